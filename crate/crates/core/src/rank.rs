//! Rank functions as exact piecewise-linear objects.
//!
//! A rank function maps a job's age (service received so far) to its
//! priority; lower rank is served first. For a discrete size distribution
//! the SERPT, M-SERPT and Gittins rank functions are piecewise linear with
//! breakpoints at the support points (plus, for Gittins, crossings of the
//! candidate stopping lines between support points).

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::rank_tol;

/// A right-continuous piecewise-linear function on `[0, end)`.
///
/// Piece `k` covers `[starts[k], starts[k + 1])` and has value
/// `values[k] + slopes[k] * (a - starts[k])`. Jumps happen only at piece
/// starts.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFn {
    starts: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
    end: f64,
}

impl PiecewiseLinearFn {
    /// Builds a function from `(start, value at start, slope)` pieces.
    pub fn new(pieces: Vec<(f64, f64, f64)>, end: f64) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidParameter(
                "rank function has no pieces".into(),
            ));
        }
        if pieces[0].0 != 0.0 {
            return Err(Error::InvalidParameter(
                "first piece must start at age 0".into(),
            ));
        }
        if !(end > 0.0) || end.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "domain end {end} must be positive"
            )));
        }
        for w in pieces.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidParameter(
                    "piece starts must be strictly increasing".into(),
                ));
            }
        }
        if pieces[pieces.len() - 1].0 >= end {
            return Err(Error::InvalidParameter(
                "piece starts must lie below the domain end".into(),
            ));
        }
        if pieces.iter().any(|p| !p.1.is_finite() || !p.2.is_finite()) {
            return Err(Error::InvalidParameter(
                "piece values and slopes must be finite".into(),
            ));
        }
        Ok(Self::from_pieces_unchecked(pieces, end))
    }

    fn from_pieces_unchecked(pieces: Vec<(f64, f64, f64)>, end: f64) -> Self {
        let mut starts = Vec::with_capacity(pieces.len());
        let mut values = Vec::with_capacity(pieces.len());
        let mut slopes = Vec::with_capacity(pieces.len());
        for (s, v, m) in pieces {
            starts.push(s);
            values.push(v);
            slopes.push(m);
        }
        Self {
            starts,
            values,
            slopes,
            end,
        }
    }

    pub fn constant(value: f64, end: f64) -> Self {
        Self::from_pieces_unchecked(alloc::vec![(0.0, value, 0.0)], end)
    }

    pub fn identity(end: f64) -> Self {
        Self::from_pieces_unchecked(alloc::vec![(0.0, 0.0, 1.0)], end)
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.starts
            .iter()
            .zip(&self.values)
            .zip(&self.slopes)
            .map(|((&s, &v), &m)| (s, v, m))
    }

    /// Index of the piece containing `a` (clamped to the valid range).
    #[inline]
    pub fn piece_index(&self, a: f64) -> usize {
        self.starts.partition_point(|&s| s <= a).saturating_sub(1)
    }

    /// End of piece `k`: the next start, or the domain end.
    #[inline]
    pub fn piece_end(&self, k: usize) -> f64 {
        self.starts.get(k + 1).copied().unwrap_or(self.end)
    }

    #[inline]
    pub fn piece_value(&self, k: usize, a: f64) -> f64 {
        self.values[k] + self.slopes[k] * (a - self.starts[k])
    }

    #[inline]
    pub fn piece_slope(&self, k: usize) -> f64 {
        self.slopes[k]
    }

    /// Value approached from the left at the end of piece `k`.
    pub fn left_limit(&self, k: usize) -> f64 {
        let e = self.piece_end(k);
        if e.is_infinite() {
            if self.slopes[k] == 0.0 {
                self.values[k]
            } else {
                self.slopes[k] * f64::INFINITY
            }
        } else {
            self.piece_value(k, e)
        }
    }

    /// Supremum of the function over piece `k`.
    pub fn piece_sup(&self, k: usize) -> f64 {
        self.values[k].max(self.left_limit(k))
    }

    /// Evaluates the function; ages outside `[0, end)` are a domain error.
    pub fn eval(&self, a: f64) -> Result<f64> {
        if !(a >= 0.0 && a < self.end) {
            return Err(Error::Domain {
                age: a,
                end: self.end,
            });
        }
        Ok(self.value(a))
    }

    /// Evaluates without a domain check; ages past the end use the last piece.
    #[inline]
    pub fn value(&self, a: f64) -> f64 {
        let k = self.piece_index(a);
        self.piece_value(k, a)
    }

    /// Right derivative at `a`.
    #[inline]
    pub fn slope_at(&self, a: f64) -> f64 {
        self.slopes[self.piece_index(a)]
    }

    /// First piece start strictly after `a`.
    pub fn next_breakpoint(&self, a: f64) -> Option<f64> {
        let i = self.starts.partition_point(|&s| s <= a);
        self.starts.get(i).copied()
    }

    /// True when the function never decreases, up to the rank tolerance.
    pub fn is_nondecreasing(&self) -> bool {
        for k in 0..self.len() {
            if self.slopes[k] < 0.0 {
                let drop = self.values[k] - self.left_limit(k);
                if drop > rank_tol(self.values[k]) {
                    return false;
                }
            }
            if k + 1 < self.len() {
                let ll = self.left_limit(k);
                if self.values[k + 1] < ll - rank_tol(ll) {
                    return false;
                }
            }
        }
        true
    }

    /// Merges neighbouring pieces that continue each other exactly (within
    /// the rank tolerance): same slope and no jump.
    pub fn simplified(&self) -> Self {
        let mut out: Vec<(f64, f64, f64)> = Vec::with_capacity(self.len());
        for (s, v, m) in self.pieces() {
            if let Some(&(ps, pv, pm)) = out.last() {
                let ll = pv + pm * (s - ps);
                let same_slope = libm::fabs(m - pm) <= crate::RANK_TOL * libm::fabs(pm).max(1.0);
                if same_slope && libm::fabs(v - ll) <= rank_tol(ll) {
                    continue;
                }
            }
            out.push((s, v, m));
        }
        Self::from_pieces_unchecked(out, self.end)
    }
}

/// The increasing envelope `a ↦ max_{0 ≤ b ≤ a} f(b)`.
pub fn increasing_envelope(f: &PiecewiseLinearFn) -> PiecewiseLinearFn {
    let mut out: Vec<(f64, f64, f64)> = Vec::with_capacity(f.len());
    let mut running = f64::NEG_INFINITY;
    for k in 0..f.len() {
        let (s, v, m) = (f.starts[k], f.values[k], f.slopes[k]);
        let e = f.piece_end(k);
        if v >= running {
            if m > 0.0 {
                out.push((s, v, m));
                running = f.left_limit(k);
            } else {
                out.push((s, v, 0.0));
                running = v;
            }
        } else if m > 0.0 {
            let cross = s + (running - v) / m;
            if cross < e {
                out.push((s, running, 0.0));
                if cross > s {
                    out.push((cross, running, m));
                } else {
                    out.last_mut().unwrap().2 = m;
                }
                running = f.left_limit(k);
            } else {
                out.push((s, running, 0.0));
            }
        } else {
            out.push((s, running, 0.0));
        }
    }
    PiecewiseLinearFn::from_pieces_unchecked(out, f.end).simplified()
}

/// Gittins rank and optimal stopping age at every knot (age 0 and every
/// support point below the largest).
#[derive(Debug, Clone, PartialEq)]
pub struct GittinsTable {
    pub ages: Vec<f64>,
    pub ranks: Vec<f64>,
    pub stop_ages: Vec<f64>,
}

/// SERPT rank: expected remaining size given survival to age `a`.
///
/// Between support points the tail is flat, so the rank falls at slope 1;
/// at each support point it jumps up.
pub fn serpt_rank(dist: &DiscreteDist) -> PiecewiseLinearFn {
    let knots = dist.knots();
    let tails = dist.knot_tails();
    let ints = dist.knot_tail_integrals();
    let pieces = (0..dist.len())
        .map(|k| (knots[k], ints[k] / tails[k], -1.0))
        .collect();
    PiecewiseLinearFn::from_pieces_unchecked(pieces, dist.max_size())
}

/// M-SERPT rank: the increasing envelope of SERPT.
pub fn mserpt_rank(dist: &DiscreteDist) -> PiecewiseLinearFn {
    increasing_envelope(&serpt_rank(dist))
}

/// Efficiency `(∫_a^b F̄) / (F̄(a) − F̄(b))`.
pub fn efficiency(dist: &DiscreteDist, a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && a < b) {
        return Err(Error::InvalidParameter(format!(
            "efficiency needs 0 <= a < b, got a={a}, b={b}"
        )));
    }
    let den = dist.tail(a) - dist.tail(b);
    if !(den > 0.0) {
        return Err(Error::UndefinedRatio { a, b });
    }
    Ok((dist.tail_integral(a) - dist.tail_integral(b)) / den)
}

/// A candidate stopping line `value + slope * d` on one segment.
#[derive(Clone, Copy, Debug)]
struct Line {
    slope: f64,
    value: f64,
}

impl Line {
    #[inline]
    fn at(self, d: f64) -> f64 {
        self.value + self.slope * d
    }
}

/// x-coordinate where lines `p` and `q` meet.
#[inline]
fn meet(p: Line, q: Line) -> f64 {
    (q.value - p.value) / (p.slope - q.slope)
}

/// Gittins rank function and per-knot table.
///
/// On segment `[t_k, t_{k+1})` each candidate stopping point `x_j > t_k`
/// contributes a decreasing line in the age; the rank is their lower
/// envelope. Candidate slopes are monotone in `j`, so each envelope is a
/// monotone convex-hull sweep and the whole construction is O(n²).
pub fn gittins_rank(dist: &DiscreteDist) -> (PiecewiseLinearFn, GittinsTable) {
    let n = dist.len();
    let knots = dist.knots();
    let tails = dist.knot_tails();
    let ints = dist.knot_tail_integrals();

    let mut pieces: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * n);
    let mut table = GittinsTable {
        ages: Vec::with_capacity(n),
        ranks: Vec::with_capacity(n),
        stop_ages: Vec::with_capacity(n),
    };
    let mut hull: Vec<Line> = Vec::with_capacity(n);
    let mut hull_from: Vec<f64> = Vec::with_capacity(n);

    for k in 0..n {
        let g = tails[k];
        let start = knots[k];
        let len = knots[k + 1] - start;

        // Best stopping point at the knot itself; ties go to the later one.
        let mut best = f64::INFINITY;
        let mut best_j = n;
        for j in (k + 1..=n).rev() {
            let v = (ints[k] - ints[j]) / (g - tails[j]);
            if v < best {
                best = v;
                best_j = j;
            }
        }
        table.ages.push(start);
        table.ranks.push(best);
        table.stop_ages.push(knots[best_j]);

        // Lower envelope: add lines by decreasing slope (j = n first).
        hull.clear();
        hull_from.clear();
        for j in (k + 1..=n).rev() {
            let den = g - tails[j];
            let line = Line {
                slope: -g / den,
                value: (ints[k] - ints[j]) / den,
            };
            if let Some(top) = hull.last() {
                if line.slope >= top.slope {
                    // Parallel within rounding: keep the lower one.
                    if line.value < top.value {
                        hull.pop();
                        hull_from.pop();
                    } else {
                        continue;
                    }
                }
            }
            while let Some(&top) = hull.last() {
                if meet(top, line) > *hull_from.last().unwrap() {
                    break;
                }
                hull.pop();
                hull_from.pop();
            }
            let from = match hull.last() {
                Some(&top) => meet(top, line),
                None => f64::NEG_INFINITY,
            };
            hull.push(line);
            hull_from.push(from);
        }

        // Clip the envelope to [0, len).
        let first = hull_from.partition_point(|&f| f <= 0.0).saturating_sub(1);
        for i in first..hull.len() {
            let d0 = if i == first { 0.0 } else { hull_from[i] };
            if d0 >= len {
                break;
            }
            let line = hull[i];
            let s = start + d0;
            if let Some(&(ps, _, _)) = pieces.last() {
                if s <= ps {
                    continue;
                }
            }
            pieces.push((s, line.at(d0), line.slope));
        }
    }
    let f = PiecewiseLinearFn::from_pieces_unchecked(pieces, dist.max_size());
    (f, table)
}

/// Scheduling policies known to the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Gittins,
    Serpt,
    MSerpt,
    Fb,
    Fcfs,
    /// Shortest remaining processing time; needs job sizes, so it has no
    /// age-based rank function.
    Srpt,
    /// Processor sharing; analytic only.
    Ps,
    Custom(PiecewiseLinearFn),
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Gittins => "gittins",
            PolicySpec::Serpt => "serpt",
            PolicySpec::MSerpt => "mserpt",
            PolicySpec::Fb => "fb",
            PolicySpec::Fcfs => "fcfs",
            PolicySpec::Srpt => "srpt",
            PolicySpec::Ps => "ps",
            PolicySpec::Custom(_) => "custom",
        }
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "gittins" => PolicySpec::Gittins,
            "serpt" => PolicySpec::Serpt,
            "mserpt" | "m-serpt" => PolicySpec::MSerpt,
            "fb" | "las" => PolicySpec::Fb,
            "fcfs" => PolicySpec::Fcfs,
            "srpt" => PolicySpec::Srpt,
            "ps" => PolicySpec::Ps,
            other => return Err(Error::InvalidParameter(format!("unknown policy '{other}'"))),
        })
    }
}

/// Rank function of an age-based policy over `dist`'s support.
pub fn policy_rank(policy: &PolicySpec, dist: &DiscreteDist) -> Result<PiecewiseLinearFn> {
    let end = dist.max_size();
    match policy {
        PolicySpec::Gittins => Ok(gittins_rank(dist).0),
        PolicySpec::Serpt => Ok(serpt_rank(dist)),
        PolicySpec::MSerpt => Ok(mserpt_rank(dist)),
        PolicySpec::Fb => Ok(PiecewiseLinearFn::identity(end)),
        PolicySpec::Fcfs => Ok(PiecewiseLinearFn::constant(0.0, end)),
        PolicySpec::Custom(f) => Ok(f.clone()),
        PolicySpec::Srpt | PolicySpec::Ps => Err(Error::NoRankFunction(policy.name())),
    }
}
