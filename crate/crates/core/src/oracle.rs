//! Brute-force reference computations used to cross-check the fast paths.
//!
//! Everything here works directly from the atom list with O(n) sums per
//! query and shares no cached aggregates with [`crate::dist`].

use alloc::vec::Vec;

use crate::dist::DiscreteDist;

/// `P(X > a)` by direct summation.
pub fn tail(dist: &DiscreteDist, a: f64) -> f64 {
    dist.atoms().filter(|&(x, _)| x > a).map(|(_, p)| p).sum()
}

/// `E[min(X, b) − min(X, a)] / P(a < X ≤ b)`, or `None` when no mass lies
/// in `(a, b]`.
pub fn efficiency(dist: &DiscreteDist, a: f64, b: f64) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, p) in dist.atoms() {
        num += p * (x.min(b) - x.min(a));
        if x > a && x <= b {
            den += p;
        }
    }
    (den > 0.0).then(|| num / den)
}

/// Gittins rank at age `a` and the (largest) minimizing stopping age.
pub fn gittins_at(dist: &DiscreteDist, a: f64) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (b, _) in dist.atoms().filter(|&(x, _)| x > a) {
        let Some(v) = efficiency(dist, a, b) else {
            continue;
        };
        match best {
            Some((bv, _)) if v > bv => {}
            _ => best = Some((v, b)),
        }
    }
    best
}

/// Gittins rank at age 0 and at every atom below the largest.
pub fn gittins_at_knots(dist: &DiscreteDist) -> Vec<(f64, f64, f64)> {
    let n = dist.len();
    core::iter::once(0.0)
        .chain(dist.sizes()[..n - 1].iter().copied())
        .filter_map(|a| gittins_at(dist, a).map(|(r, b)| (a, r, b)))
        .collect()
}

/// SERPT rank `E[X − a | X > a]` by direct summation.
pub fn serpt_at(dist: &DiscreteDist, a: f64) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, p) in dist.atoms().filter(|&(x, _)| x > a) {
        num += p * (x - a);
        den += p;
    }
    (den > 0.0).then(|| num / den)
}

/// `(E[min(X, a)], E[min(X, a)²])` by direct summation.
pub fn trunc_moments(dist: &DiscreteDist, a: f64) -> (f64, f64) {
    dist.atoms().fold((0.0, 0.0), |(m1, m2), (x, p)| {
        let t = x.min(a);
        (m1 + p * t, m2 + p * t * t)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d1_values() {
        let d = DiscreteDist::new([(1.0, 0.5), (2.0, 0.5)]).unwrap();
        assert_eq!(gittins_at(&d, 0.0), Some((1.5, 2.0)));
        assert_eq!(gittins_at(&d, 1.0), Some((1.0, 2.0)));
        assert_eq!(efficiency(&d, 0.2, 0.7), None);
        assert_eq!(serpt_at(&d, 0.0), Some(1.5));
        assert_eq!(trunc_moments(&d, 1.0), (1.0, 1.0));
        assert_eq!(tail(&d, 1.0), 0.5);
    }
}
