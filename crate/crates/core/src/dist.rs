//! Job size distributions.
//!
//! Every distribution is ultimately a [`DiscreteDist`]: a sorted list of
//! atoms with cached prefix and suffix aggregates so that tails, truncated
//! moments and tail integrals are O(log n) lookups. Continuous families are
//! reduced to discrete ones by equal-probability quantization.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};

/// Tolerance on the total probability mass at construction.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// A discrete job size distribution.
///
/// Internally the distribution is indexed by *knots*: knot 0 is age 0 and
/// knot `k >= 1` is the `k`-th smallest atom. For each knot the cache holds
/// the right-continuous tail `P(X > t_k)`, the tail integral
/// `∫_{t_k}^∞ P(X > t) dt`, and the partial sums `Σ p x` and `Σ p x²` over
/// the atoms at or below `t_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    sizes: Vec<f64>,
    probs: Vec<f64>,
    cum: Vec<f64>,
    knots: Vec<f64>,
    knot_tail: Vec<f64>,
    knot_int: Vec<f64>,
    pm1: Vec<f64>,
    pm2: Vec<f64>,
}

impl DiscreteDist {
    /// Builds a distribution from `(size, probability)` pairs.
    ///
    /// Atoms may be given in any order; atoms with identical sizes are
    /// merged. Sizes must be finite and positive, probabilities positive,
    /// and the total mass must be 1 within [`PROB_SUM_TOL`].
    pub fn new<I>(atoms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("distribution has no atoms".into()));
        }
        for &(x, p) in &atoms {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "atom size {x} must be finite and positive"
                )));
            }
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "atom probability {p} must be finite and positive"
                )));
            }
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (x, p) in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == x => last.1 += p,
                _ => merged.push((x, p)),
            }
        }
        let total: f64 = merged.iter().map(|a| a.1).sum();
        if libm::fabs(total - 1.0) > PROB_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self::build(merged))
    }

    fn build(atoms: Vec<(f64, f64)>) -> Self {
        let n = atoms.len();
        let sizes: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        let probs: Vec<f64> = atoms.iter().map(|a| a.1).collect();

        let mut cum = Vec::with_capacity(n);
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cum.push(acc);
        }

        let mut knots = Vec::with_capacity(n + 1);
        knots.push(0.0);
        knots.extend_from_slice(&sizes);

        // Suffix sums keep small tails accurate.
        let mut knot_tail = alloc::vec![0.0; n + 1];
        let mut acc = 0.0;
        for k in (1..n).rev() {
            acc += probs[k];
            knot_tail[k] = acc;
        }
        knot_tail[0] = 1.0;

        let mut knot_int = alloc::vec![0.0; n + 1];
        for k in (0..n).rev() {
            knot_int[k] = knot_int[k + 1] + knot_tail[k] * (knots[k + 1] - knots[k]);
        }

        let mut pm1 = alloc::vec![0.0; n + 1];
        let mut pm2 = alloc::vec![0.0; n + 1];
        for k in 0..n {
            pm1[k + 1] = pm1[k] + probs[k] * sizes[k];
            pm2[k + 1] = pm2[k] + probs[k] * sizes[k] * sizes[k];
        }

        Self {
            sizes,
            probs,
            cum,
            knots,
            knot_tail,
            knot_int,
            pm1,
            pm2,
        }
    }

    /// Single atom at `x`.
    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new([(x, 1.0)])
    }

    /// The three-atom distribution on which M-SERPT is nearly twice as slow
    /// as Gittins in heavy traffic: sizes `1-δ`, `1`, `1/δ + 1` with
    /// probabilities `1-δ`, `δ-δ²`, `δ²`.
    pub fn pathological(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "pathological delta {delta} must lie in (0, 1)"
            )));
        }
        let d2 = delta * delta;
        Self::new([
            (1.0 - delta, 1.0 - delta),
            (1.0, delta - d2),
            (1.0 / delta + 1.0, d2),
        ])
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sizes.iter().copied().zip(self.probs.iter().copied())
    }

    /// Largest support point.
    pub fn max_size(&self) -> f64 {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.pm1[self.len()]
    }

    pub fn second_moment(&self) -> f64 {
        self.pm2[self.len()]
    }

    /// Knot ages: 0 followed by every atom.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// `P(X > t_k)` for every knot.
    pub fn knot_tails(&self) -> &[f64] {
        &self.knot_tail
    }

    /// `∫_{t_k}^∞ P(X > t) dt` for every knot.
    pub fn knot_tail_integrals(&self) -> &[f64] {
        &self.knot_int
    }

    /// Number of atoms at or below `a`; also the index of the knot that
    /// starts the segment containing `a`.
    #[inline]
    pub fn knot_index(&self, a: f64) -> usize {
        self.sizes.partition_point(|&x| x <= a)
    }

    /// Right-continuous tail `P(X > a)`.
    pub fn tail(&self, a: f64) -> f64 {
        if a < 0.0 {
            return 1.0;
        }
        self.knot_tail[self.knot_index(a)]
    }

    /// `(E[min(X, a)], E[min(X, a)²])`.
    pub fn trunc_moments(&self, a: f64) -> (f64, f64) {
        let a = a.max(0.0);
        let k = self.knot_index(a);
        let g = self.knot_tail[k];
        (self.pm1[k] + a * g, self.pm2[k] + a * a * g)
    }

    /// `∫_a^∞ P(X > t) dt`.
    pub fn tail_integral(&self, a: f64) -> f64 {
        let a = a.max(0.0);
        let k = self.knot_index(a);
        if k == self.len() {
            return 0.0;
        }
        self.knot_int[k] - (a - self.knots[k]) * self.knot_tail[k]
    }

    /// Draws one job size.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = self.cum[self.cum.len() - 1];
        let u: f64 = rng.gen::<f64>() * total;
        let i = self.cum.partition_point(|&c| c <= u);
        self.sizes[i.min(self.len() - 1)]
    }
}

/// An M/G/1 queue: Poisson arrivals at rate `lambda`, i.i.d. sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Mg1 {
    dist: DiscreteDist,
    lambda: f64,
}

impl Mg1 {
    pub fn new(dist: DiscreteDist, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "arrival rate {lambda} must be finite and non-negative"
            )));
        }
        let rho = lambda * dist.mean();
        if rho >= 1.0 {
            return Err(Error::Unstable { rho });
        }
        Ok(Self { dist, lambda })
    }

    /// Picks the arrival rate that gives load `rho`.
    pub fn with_load(dist: DiscreteDist, rho: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::Unstable { rho });
        }
        let lambda = rho / dist.mean();
        Self::new(dist, lambda)
    }

    pub fn dist(&self) -> &DiscreteDist {
        &self.dist
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn rho(&self) -> f64 {
        self.lambda * self.dist.mean()
    }
}

/// Continuous job size families that can be quantized.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Exponential {
        rate: f64,
    },
    Pareto {
        shape: f64,
        scale: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `(probability, rate)` branches.
    HyperExponential(Vec<(f64, f64)>),
    /// `(weight, mean, sd)` components; the mixture is truncated at 0.
    NormalMixture(Vec<(f64, f64, f64)>),
    PointMass(f64),
}

impl Family {
    /// A fixed mixture of four normal bells at sizes 1, 4, 9 and 16 with
    /// shrinking weight, standing in for an unpublished four-bell workload.
    pub fn four_bell_mixture() -> Self {
        Family::NormalMixture(alloc::vec![
            (0.4, 1.0, 0.25),
            (0.3, 4.0, 0.6),
            (0.2, 9.0, 1.0),
            (0.1, 16.0, 1.5),
        ])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousSpec {
    pub family: Family,
    /// Number of equal-probability slices.
    pub points: usize,
}

impl ContinuousSpec {
    pub fn new(family: Family, points: usize) -> Self {
        Self { family, points }
    }

    /// Checks family parameters and the quantization size.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidParameter(msg));
        if self.points < 2 {
            return bad(format!(
                "quantization needs at least 2 points, got {}",
                self.points
            ));
        }
        match &self.family {
            Family::Exponential { rate } => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return bad(format!("exponential rate {rate} must be positive"));
                }
            }
            Family::Pareto { shape, scale } => {
                if !(shape.is_finite() && *shape > 1.0) {
                    return bad(format!("pareto shape {shape} must exceed 1"));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad(format!("pareto scale {scale} must be positive"));
                }
            }
            Family::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && *lo >= 0.0 && lo < hi) {
                    return bad(format!("uniform bounds [{lo}, {hi}] invalid"));
                }
            }
            Family::HyperExponential(branches) => {
                if branches.is_empty() {
                    return bad("hyperexponential needs at least one branch".into());
                }
                let mut total = 0.0;
                for &(p, r) in branches {
                    if !(p.is_finite() && p > 0.0 && r.is_finite() && r > 0.0) {
                        return bad(format!("hyperexponential branch ({p}, {r}) invalid"));
                    }
                    total += p;
                }
                if libm::fabs(total - 1.0) > 1e-9 {
                    return bad(format!("hyperexponential probabilities sum to {total}"));
                }
            }
            Family::NormalMixture(comps) => {
                if comps.is_empty() {
                    return bad("normal mixture needs at least one component".into());
                }
                let mut total = 0.0;
                for &(w, m, s) in comps {
                    if !(w.is_finite() && w > 0.0 && m.is_finite() && s.is_finite() && s > 0.0) {
                        return bad(format!("normal component ({w}, {m}, {s}) invalid"));
                    }
                    total += w;
                }
                if libm::fabs(total - 1.0) > 1e-9 {
                    return bad(format!("normal mixture weights sum to {total}"));
                }
            }
            Family::PointMass(x) => {
                if !(x.is_finite() && *x > 0.0) {
                    return bad(format!("point mass {x} must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// Reduces a continuous distribution to `points` atoms, one per
/// equal-probability slice, each placed at the slice's conditional mean.
/// The mean is preserved because the slice partial expectations telescope.
pub fn quantize(spec: &ContinuousSpec) -> Result<DiscreteDist> {
    spec.validate()?;
    if let Family::PointMass(x) = spec.family {
        return DiscreteDist::point_mass(x);
    }
    let n = spec.points;
    let shape = Shape::from_family(&spec.family);
    let p = 1.0 / n as f64;

    let mut bounds = Vec::with_capacity(n + 1);
    bounds.push(shape.lower());
    for k in 1..n {
        // Survival level at the upper end of slice k-1.
        bounds.push(shape.inv_survival((n - k) as f64 * p));
    }
    bounds.push(f64::INFINITY);

    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(n);
    for k in 0..n {
        let (lo, hi) = (bounds[k], bounds[k + 1]);
        let mut x = shape.partial_mean(lo, hi) * n as f64;
        x = x.max(lo);
        if hi.is_finite() {
            x = x.min(hi);
        }
        if !(x > 0.0) {
            x = f64::MIN_POSITIVE.max(lo);
        }
        atoms.push((x, p));
    }
    DiscreteDist::new(atoms)
}

/// Survival function, inverse and partial expectation for a family.
enum Shape<'a> {
    Exp(&'a [(f64, f64)]),
    SingleExp(f64),
    Pareto(f64, f64),
    Uniform(f64, f64),
    Normal(&'a [(f64, f64, f64)], f64),
}

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn std_upper(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

fn std_density(z: f64) -> f64 {
    INV_SQRT_2PI * libm::exp(-0.5 * z * z)
}

impl<'a> Shape<'a> {
    fn from_family(f: &'a Family) -> Self {
        match f {
            Family::Exponential { rate } => Shape::SingleExp(*rate),
            Family::Pareto { shape, scale } => Shape::Pareto(*shape, *scale),
            Family::Uniform { lo, hi } => Shape::Uniform(*lo, *hi),
            Family::HyperExponential(b) => Shape::Exp(b),
            Family::NormalMixture(c) => {
                let z: f64 = c.iter().map(|&(w, m, s)| w * std_upper(-m / s)).sum();
                Shape::Normal(c, z)
            }
            Family::PointMass(_) => unreachable!("point masses are not quantized"),
        }
    }

    fn lower(&self) -> f64 {
        match *self {
            Shape::Pareto(_, scale) => scale,
            Shape::Uniform(lo, _) => lo,
            _ => 0.0,
        }
    }

    fn survival(&self, x: f64) -> f64 {
        match *self {
            Shape::SingleExp(r) => libm::exp(-r * x),
            Shape::Exp(b) => b.iter().map(|&(p, r)| p * libm::exp(-r * x)).sum(),
            Shape::Pareto(a, s) => {
                if x <= s {
                    1.0
                } else {
                    libm::pow(s / x, a)
                }
            }
            Shape::Uniform(lo, hi) => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            Shape::Normal(c, z) => {
                let x = x.max(0.0);
                c.iter()
                    .map(|&(w, m, s)| w * std_upper((x - m) / s))
                    .sum::<f64>()
                    / z
            }
        }
    }

    fn inv_survival(&self, level: f64) -> f64 {
        match *self {
            Shape::SingleExp(r) => -libm::log(level) / r,
            Shape::Pareto(a, s) => s * libm::pow(level, -1.0 / a),
            Shape::Uniform(lo, hi) => hi - level * (hi - lo),
            _ => self.bisect_survival(level),
        }
    }

    fn bisect_survival(&self, level: f64) -> f64 {
        let mut lo = self.lower();
        let mut hi = lo.max(1.0);
        while self.survival(hi) > level {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.survival(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `∫_lo^hi x f(x) dx`; `hi` may be infinite.
    fn partial_mean(&self, lo: f64, hi: f64) -> f64 {
        let exp_term = |r: f64, x: f64| {
            if x.is_infinite() {
                0.0
            } else {
                (x + 1.0 / r) * libm::exp(-r * x)
            }
        };
        match *self {
            Shape::SingleExp(r) => exp_term(r, lo) - exp_term(r, hi),
            Shape::Exp(b) => b
                .iter()
                .map(|&(p, r)| p * (exp_term(r, lo) - exp_term(r, hi)))
                .sum(),
            Shape::Pareto(a, s) => {
                let pw = |x: f64| {
                    if x.is_infinite() {
                        0.0
                    } else {
                        libm::pow(x, 1.0 - a)
                    }
                };
                a * libm::pow(s, a) / (a - 1.0) * (pw(lo) - pw(hi))
            }
            Shape::Uniform(l, h) => {
                let hi = hi.min(h);
                (hi * hi - lo * lo) / (2.0 * (h - l))
            }
            Shape::Normal(c, z) => {
                let lo = lo.max(0.0);
                c.iter()
                    .map(|&(w, m, s)| {
                        let a = (lo - m) / s;
                        let (qb, db) = if hi.is_infinite() {
                            (0.0, 0.0)
                        } else {
                            let b = (hi - m) / s;
                            (std_upper(b), std_density(b))
                        };
                        w * (m * (std_upper(a) - qb) + s * (std_density(a) - db))
                    })
                    .sum::<f64>()
                    / z
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn d1() -> DiscreteDist {
        DiscreteDist::new([(1.0, 0.5), (2.0, 0.5)]).unwrap()
    }

    #[test]
    fn tail_examples() {
        let d = d1();
        assert_eq!(d.tail(0.5), 1.0);
        assert_eq!(d.tail(1.0), 0.5);
        assert_eq!(d.tail(2.0), 0.0);
        assert_eq!(d.tail(7.0), 0.0);
    }

    #[test]
    fn trunc_moment_examples() {
        let d = d1();
        assert_eq!(d.trunc_moments(1.0), (1.0, 1.0));
        let (m1, m2) = d.trunc_moments(1.5);
        assert!((m1 - 1.25).abs() < 1e-15 && (m2 - 1.625).abs() < 1e-15);
        assert_eq!(d.trunc_moments(0.0), (0.0, 0.0));
        assert_eq!(d.trunc_moments(2.0), (1.5, 2.5));
        assert_eq!(d.trunc_moments(9.0), (1.5, 2.5));
    }

    #[test]
    fn construction_errors() {
        assert!(DiscreteDist::new([(1.0, 0.5)]).is_err());
        assert!(DiscreteDist::new([(0.0, 1.0)]).is_err());
        assert!(DiscreteDist::new([(1.0, 1.5), (2.0, -0.5)]).is_err());
        assert!(DiscreteDist::new(Vec::new()).is_err());
        let merged = DiscreteDist::new([(2.0, 0.25), (1.0, 0.5), (2.0, 0.25)]).unwrap();
        assert_eq!(merged.sizes(), &[1.0, 2.0]);
    }

    #[test]
    fn pathological_atoms() {
        let d = DiscreteDist::pathological(0.1).unwrap();
        let want = [(0.9, 0.9), (1.0, 0.09), (11.0, 0.01)];
        for ((x, p), (wx, wp)) in d.atoms().zip(want) {
            assert!((x - wx).abs() < 1e-12 && (p - wp).abs() < 1e-12);
        }
        assert!((d.mean() - 1.01).abs() < 1e-12);
        assert!(DiscreteDist::pathological(0.0).is_err());
        assert!(DiscreteDist::pathological(1.0).is_err());
    }

    #[test]
    fn quantize_uniform_halves() {
        let d = quantize(&ContinuousSpec::new(
            Family::Uniform { lo: 0.0, hi: 2.0 },
            2,
        ))
        .unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.sizes()[0] - 0.5).abs() < 1e-12);
        assert!((d.sizes()[1] - 1.5).abs() < 1e-12);
        assert!((d.probs()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quantize_point_mass() {
        let d = quantize(&ContinuousSpec::new(Family::PointMass(3.0), 17)).unwrap();
        assert_eq!(d.sizes(), &[3.0]);
        assert_eq!(d.probs(), &[1.0]);
    }

    #[test]
    fn quantize_rejects_bad_parameters() {
        let bad = [
            Family::Exponential { rate: 0.0 },
            Family::Pareto {
                shape: 1.0,
                scale: 1.0,
            },
            Family::Uniform { lo: 2.0, hi: 1.0 },
            Family::HyperExponential(alloc::vec![(0.5, 1.0)]),
            Family::NormalMixture(alloc::vec![(1.0, 1.0, 0.0)]),
        ];
        for f in bad {
            assert!(quantize(&ContinuousSpec::new(f, 10)).is_err());
        }
        assert!(quantize(&ContinuousSpec::new(Family::Exponential { rate: 1.0 }, 1)).is_err());
    }

    #[test]
    fn mg1_stability() {
        assert!(Mg1::new(d1(), 0.4).is_ok());
        assert!(matches!(Mg1::new(d1(), 1.0), Err(Error::Unstable { .. })));
        assert!(Mg1::new(d1(), -1.0).is_err());
        let m = Mg1::with_load(d1(), 0.6).unwrap();
        assert!((m.lambda() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_seeded_and_on_support() {
        let d = d1();
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = d.sample(&mut a);
            assert!(x == 1.0 || x == 2.0);
            assert_eq!(x, d.sample(&mut b));
        }
        let p = DiscreteDist::point_mass(3.0).unwrap();
        assert_eq!(p.sample(&mut a), 3.0);
    }
}
