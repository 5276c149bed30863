//! Hills and valleys of a rank function, and the truncated load functionals.
//!
//! An age is a valley age when the increasing envelope of the rank function
//! is locally constant there; every other age is a hill age. Age 0 and the
//! largest job size are always treated as hill ages, so every valley
//! `(u, v]` is bounded by hill ages on both sides.

use alloc::vec::Vec;

use crate::dist::Mg1;
use crate::rank::{increasing_envelope, PiecewiseLinearFn};
use crate::rank_tol;

/// Hill ages as sorted, disjoint closed intervals (points have zero length).
#[derive(Debug, Clone, PartialEq)]
pub struct HvDecomp {
    hills: Vec<(f64, f64)>,
    end: f64,
}

impl HvDecomp {
    pub fn hills(&self) -> &[(f64, f64)] {
        &self.hills
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    /// Valleys `(u, v]` between consecutive hills.
    pub fn valleys(&self) -> Vec<(f64, f64)> {
        self.hills
            .windows(2)
            .map(|w| (w[0].1, w[1].0))
            .filter(|(u, v)| v > u)
            .collect()
    }

    /// Whether `a` lies in a hill interval.
    pub fn is_hill_age(&self, a: f64) -> bool {
        let i = self.hills.partition_point(|h| h.0 <= a);
        i > 0 && a <= self.hills[i - 1].1
    }

    /// Whether `x` is a hill size: `y(x) = x = z(x)`.
    pub fn is_hill_size(&self, x: f64) -> bool {
        self.prev_hill(x) == x && self.next_hill(x) == x
    }

    /// Previous hill age `y(x) = sup{a < x : a is a hill age}`, with `y(0) = 0`.
    pub fn prev_hill(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let i = self.hills.partition_point(|h| h.0 < x);
        if i == 0 {
            return 0.0;
        }
        self.hills[i - 1].1.min(x)
    }

    /// Next hill age `z(x) = inf{a ≥ x : a is a hill age}`, with
    /// `z(0) = z(0+)`.
    pub fn next_hill(&self, x: f64) -> f64 {
        if x > self.end {
            return x;
        }
        let i = if x <= 0.0 {
            self.hills.partition_point(|h| h.1 <= 0.0)
        } else {
            self.hills.partition_point(|h| h.1 < x)
        };
        match self.hills.get(i) {
            Some(h) => h.0.max(x.max(0.0)),
            None => self.end,
        }
    }
}

/// Splits the domain of `r` into hills and valleys using its increasing
/// envelope. Rising envelope pieces become interval hills and upward jumps
/// become point hills.
pub fn decompose(r: &PiecewiseLinearFn) -> HvDecomp {
    let env = increasing_envelope(r);
    let end = r.end();
    let mut raw: Vec<(f64, f64)> = Vec::with_capacity(env.len() + 2);
    raw.push((0.0, 0.0));
    for k in 0..env.len() {
        let (s, v, m) = (
            env.starts()[k],
            env.piece_value(k, env.starts()[k]),
            env.piece_slope(k),
        );
        if k > 0 {
            let ll = env.left_limit(k - 1);
            if v - ll > rank_tol(ll) {
                raw.push((s, s));
            }
        }
        let e = env.piece_end(k);
        if m > 0.0 && env.left_limit(k) - v > rank_tol(v) {
            raw.push((s, e));
        }
    }
    if end.is_finite() {
        raw.push((end, end));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut hills: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
    for (s, e) in raw {
        match hills.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => hills.push((s, e)),
        }
    }
    HvDecomp { hills, end }
}

/// `1 − λ E[min(X, a)]`.
pub fn coload(mg1: &Mg1, a: f64) -> f64 {
    1.0 - mg1.lambda() * mg1.dist().trunc_moments(a).0
}

/// `(λ / 2) E[min(X, a)²]`.
pub fn excess(mg1: &Mg1, a: f64) -> f64 {
    0.5 * mg1.lambda() * mg1.dist().trunc_moments(a).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;
    use crate::rank::{gittins_rank, mserpt_rank};

    fn d1() -> DiscreteDist {
        DiscreteDist::new([(1.0, 0.5), (2.0, 0.5)]).unwrap()
    }

    #[test]
    fn identity_is_all_hill() {
        let d = decompose(&PiecewiseLinearFn::identity(3.0));
        assert_eq!(d.hills(), &[(0.0, 3.0)]);
        assert!(d.valleys().is_empty());
        for x in [0.25, 1.0, 2.9] {
            assert_eq!(d.prev_hill(x), x);
            assert_eq!(d.next_hill(x), x);
            assert!(d.is_hill_size(x));
        }
    }

    #[test]
    fn constant_is_one_valley() {
        let d = decompose(&PiecewiseLinearFn::constant(0.0, 2.0));
        assert_eq!(d.hills(), &[(0.0, 0.0), (2.0, 2.0)]);
        assert_eq!(d.valleys(), alloc::vec![(0.0, 2.0)]);
        assert_eq!(d.next_hill(0.0), 2.0);
        assert!(!d.is_hill_size(2.0));
    }

    #[test]
    fn mserpt_d1_decomposition() {
        let d = decompose(&mserpt_rank(&d1()));
        assert_eq!(d.hills(), &[(0.0, 0.0), (2.0, 2.0)]);
        assert_eq!(d.prev_hill(1.0), 0.0);
        assert_eq!(d.next_hill(1.0), 2.0);
        assert_eq!(d.prev_hill(2.0), 0.0);
        assert_eq!(d.next_hill(2.0), 2.0);
    }

    #[test]
    fn pathological_hills() {
        let p = DiscreteDist::pathological(0.1).unwrap();
        let m = decompose(&mserpt_rank(&p));
        assert_eq!(m.next_hill(0.5), 0.9);
        assert!(m.is_hill_age(0.9) && m.is_hill_age(1.0) && m.is_hill_age(11.0));
        assert!(!m.is_hill_age(0.95));
        let g = decompose(&gittins_rank(&p).0);
        assert!(!g.is_hill_age(0.9));
        assert!(g.is_hill_age(1.0));
    }

    #[test]
    fn coload_and_excess_examples() {
        let mg1 = Mg1::new(d1(), 0.4).unwrap();
        assert_eq!(coload(&mg1, 0.0), 1.0);
        assert!((coload(&mg1, 2.0) - 0.4).abs() < 1e-15);
        assert!((coload(&mg1, 1.0) - 0.6).abs() < 1e-15);
        assert!((excess(&mg1, 1.0) - 0.2).abs() < 1e-15);
        assert!((excess(&mg1, 2.0) - 0.5).abs() < 1e-15);
        assert_eq!(excess(&mg1, 0.0), 0.0);
    }

    #[test]
    fn interval_hill_after_valley() {
        // Flat at 1 until age 1, then rising: valley (0, 1], hill [1, 2].
        let f = PiecewiseLinearFn::new(alloc::vec![(0.0, 1.0, 0.0), (1.0, 1.0, 1.0)], 2.0).unwrap();
        let d = decompose(&f);
        assert_eq!(d.hills(), &[(0.0, 0.0), (1.0, 2.0)]);
        assert_eq!(d.prev_hill(0.5), 0.0);
        assert_eq!(d.next_hill(0.5), 1.0);
        assert_eq!(d.prev_hill(1.5), 1.5);
        assert_eq!(d.prev_hill(1.0), 0.0);
    }
}
