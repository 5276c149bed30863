//! JSON job size distribution specs.
//!
//! ```json
//! {"kind":"discrete","atoms":[[1.0,0.5],[2.0,0.5]]}
//! {"kind":"exponential","rate":1.0,"quantize":{"points":2000}}
//! {"kind":"pareto","shape":1.5,"scale":1.0,"quantize":{"points":4000}}
//! {"kind":"pathological","delta":0.01}
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use soap_sched_core::dist::quantize;
use soap_sched_core::{ContinuousSpec, DiscreteDist, Family};

use crate::CliError;

pub const DEFAULT_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantize {
    pub points: usize,
}

impl Default for Quantize {
    fn default() -> Self {
        Self {
            points: DEFAULT_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistSpec {
    Discrete {
        atoms: Vec<(f64, f64)>,
    },
    PointMass {
        size: f64,
    },
    Pathological {
        delta: f64,
    },
    Exponential {
        rate: f64,
        #[serde(default)]
        quantize: Quantize,
    },
    Pareto {
        shape: f64,
        scale: f64,
        #[serde(default)]
        quantize: Quantize,
    },
    Uniform {
        lo: f64,
        hi: f64,
        #[serde(default)]
        quantize: Quantize,
    },
    Hyperexponential {
        /// `[probability, rate]` pairs.
        branches: Vec<(f64, f64)>,
        #[serde(default)]
        quantize: Quantize,
    },
    NormalMixture {
        /// `[weight, mean, sd]` triples.
        components: Vec<(f64, f64, f64)>,
        #[serde(default)]
        quantize: Quantize,
    },
    /// The shipped four-bell normal mixture.
    BellMixture {
        #[serde(default)]
        quantize: Quantize,
    },
}

impl DistSpec {
    /// Parses inline JSON (anything starting with `{`) or reads a file.
    pub fn load(arg: &str) -> Result<Self, CliError> {
        let text = if arg.trim_start().starts_with('{') {
            arg.to_string()
        } else {
            std::fs::read_to_string(Path::new(arg))
                .map_err(|e| CliError::Input(format!("cannot read distribution file {arg}: {e}")))?
        };
        serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("bad distribution spec {arg}: {e}")))
    }

    pub fn build(&self) -> Result<DiscreteDist, CliError> {
        let q = |family: Family, points: usize| quantize(&ContinuousSpec::new(family, points));
        let dist = match self {
            DistSpec::Discrete { atoms } => DiscreteDist::new(atoms.iter().copied()),
            DistSpec::PointMass { size } => DiscreteDist::point_mass(*size),
            DistSpec::Pathological { delta } => DiscreteDist::pathological(*delta),
            DistSpec::Exponential { rate, quantize } => {
                q(Family::Exponential { rate: *rate }, quantize.points)
            }
            DistSpec::Pareto {
                shape,
                scale,
                quantize,
            } => q(
                Family::Pareto {
                    shape: *shape,
                    scale: *scale,
                },
                quantize.points,
            ),
            DistSpec::Uniform { lo, hi, quantize } => {
                q(Family::Uniform { lo: *lo, hi: *hi }, quantize.points)
            }
            DistSpec::Hyperexponential { branches, quantize } => {
                q(Family::HyperExponential(branches.clone()), quantize.points)
            }
            DistSpec::NormalMixture {
                components,
                quantize,
            } => q(Family::NormalMixture(components.clone()), quantize.points),
            DistSpec::BellMixture { quantize } => q(Family::four_bell_mixture(), quantize.points),
        };
        dist.map_err(CliError::from)
    }
}
