//! Mean response times from hills and valleys, classical closed forms, and
//! the M-SERPT/Gittins ratio bound.

use alloc::vec::Vec;

use crate::dist::Mg1;
use crate::error::{Error, Result};
use crate::hillvalley::{coload, decompose, excess, HvDecomp};
use crate::rank::{policy_rank, PolicySpec};

/// Per-size expectations for one atom of the size distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeResult {
    pub size: f64,
    pub prob: f64,
    pub waiting: f64,
    pub residence: f64,
    pub response: f64,
}

/// Mean waiting, residence and response time of a policy.
///
/// When `exact` is false the aggregates are lower bounds (Gittins, SERPT
/// and other non-monotone rank functions).
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticResult {
    pub per_size: Vec<SizeResult>,
    pub mean_waiting: f64,
    pub mean_residence: f64,
    pub mean_response: f64,
    pub exact: bool,
}

/// `φ(z(x)) / (ρ̄(y(x)) ρ̄(z(x)))`: exact expected waiting time for
/// monotone rank functions, a lower bound otherwise.
pub fn waiting_x(mg1: &Mg1, d: &HvDecomp, x: f64) -> f64 {
    if mg1.lambda() == 0.0 {
        return 0.0;
    }
    let y = d.prev_hill(x);
    let z = d.next_hill(x);
    excess(mg1, z) / (coload(mg1, y) * coload(mg1, z))
}

/// `x / ρ̄(y(x))`: exact expected residence time for monotone rank
/// functions, an upper bound otherwise.
pub fn residence_x(mg1: &Mg1, d: &HvDecomp, x: f64) -> f64 {
    x / coload(mg1, d.prev_hill(x))
}

/// Sums the per-size hill/valley formulas over every atom using `d`.
///
/// For monotone rank functions this is the exact mean response time. For
/// other rank functions it pairs a waiting-time lower bound with a
/// residence-time upper bound, which is the estimate used for Gittins on
/// the heavy-traffic pathological example.
pub fn hill_valley_response(mg1: &Mg1, d: &HvDecomp) -> AnalyticResult {
    let mut per_size = Vec::with_capacity(mg1.dist().len());
    let (mut mw, mut mr) = (0.0, 0.0);
    for (x, p) in mg1.dist().atoms() {
        let w = waiting_x(mg1, d, x);
        let r = residence_x(mg1, d, x);
        mw += p * w;
        mr += p * r;
        per_size.push(SizeResult {
            size: x,
            prob: p,
            waiting: w,
            residence: r,
            response: w + r,
        });
    }
    AnalyticResult {
        per_size,
        mean_waiting: mw,
        mean_residence: mr,
        mean_response: mw + mr,
        exact: false,
    }
}

/// Mean response time of `policy`.
///
/// Monotone rank functions (M-SERPT, FB, FCFS, monotone custom) are exact.
/// Gittins, SERPT and non-monotone custom ranks return the larger of two
/// lower bounds: hill/valley waiting plus `E[X]`, and the SRPT bound.
/// PS uses its insensitive closed form.
pub fn mean_response(mg1: &Mg1, policy: &PolicySpec) -> Result<AnalyticResult> {
    let rho = mg1.rho();
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    match policy {
        PolicySpec::Srpt => Err(Error::Unsupported(
            "SRPT has no closed form here; simulate it or use srpt_lower_bound".into(),
        )),
        PolicySpec::Ps => {
            let per_size: Vec<SizeResult> = mg1
                .dist()
                .atoms()
                .map(|(x, p)| SizeResult {
                    size: x,
                    prob: p,
                    waiting: 0.0,
                    residence: x / (1.0 - rho),
                    response: x / (1.0 - rho),
                })
                .collect();
            let t = mg1.dist().mean() / (1.0 - rho);
            Ok(AnalyticResult {
                per_size,
                mean_waiting: 0.0,
                mean_residence: t,
                mean_response: t,
                exact: true,
            })
        }
        _ => {
            let r = policy_rank(policy, mg1.dist())?;
            let d = decompose(&r);
            let mut res = hill_valley_response(mg1, &d);
            if r.is_nondecreasing() {
                res.exact = true;
                return Ok(res);
            }
            let mean = mg1.dist().mean();
            for s in &mut res.per_size {
                s.residence = s.size;
                s.response = s.waiting + s.size;
            }
            res.mean_residence = mean;
            res.mean_response = (res.mean_waiting + mean).max(srpt_lower_bound(mg1));
            res.exact = false;
            Ok(res)
        }
    }
}

/// `(1/ρ) log(1/(1−ρ))`, continuous at `ρ = 0` where it equals 1.
fn log_factor(rho: f64) -> f64 {
    if rho <= 0.0 {
        1.0
    } else {
        -libm::log1p(-rho) / rho
    }
}

/// Lower bound on mean response time under any policy:
/// `(1/ρ) log(1/(1−ρ)) E[X]`.
pub fn srpt_lower_bound(mg1: &Mg1) -> f64 {
    log_factor(mg1.rho()) * mg1.dist().mean()
}

/// `4/(1+√(1−ρ))`, correctly rounded in practice: the rounding errors of
/// the square root, the sum and the quotient are each folded back in, so
/// that for instance ρ = 8/9 gives exactly 3.
fn hill_branch(rho: f64) -> f64 {
    let m = 1.0 - rho;
    let s = libm::sqrt(m);
    let ds = if s > 0.0 {
        libm::fma(-s, s, m) / (2.0 * s)
    } else {
        0.0
    };
    let d = 1.0 + s;
    let e = (1.0 - d) + s + ds;
    let q = 4.0 / d;
    q + (libm::fma(-q, d, 4.0) - q * e) / d
}

/// Upper bound on `E[T_M-SERPT] / E[T_Gittins]` at load `rho`.
pub fn ratio_bound(rho: f64) -> f64 {
    let a = hill_branch(rho);
    a.max(log_factor(rho)).min(1.0 + a)
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Loads at which the ratio bound switches branch: first where the log
/// term overtakes `4/(1+√(1−ρ))`, then where it reaches `1 + 4/(1+√(1−ρ))`.
pub fn ratio_bound_thresholds() -> (f64, f64) {
    let first = bisect(0.5, 0.999_999, |r| log_factor(r) - hill_branch(r));
    let second = bisect(first, 0.999_999_999, |r| {
        log_factor(r) - 1.0 - hill_branch(r)
    });
    (first, second)
}

/// Heavy-traffic approximation of the M-SERPT/Gittins ratio on the
/// pathological distribution with parameter `delta` at load `1 − epsilon`.
pub fn pathological_ratio_approx(delta: f64, epsilon: f64) -> f64 {
    let d3 = 2.0 * delta * delta * delta;
    let e2 = epsilon * epsilon;
    (d3 + 2.0 * delta * epsilon + e2) / (d3 + delta * epsilon + e2)
}
