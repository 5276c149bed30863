//! Randomized invariant suite behind the `verify` command.
//!
//! Each case draws a discrete distribution (2 to 8 atoms, log-uniform sizes
//! over four orders of magnitude, flat-Dirichlet probabilities) and checks
//! the structural facts the analysis rests on at several loads. Two fixed
//! fixtures (a two-point distribution and a point mass) always run first.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{hill_valley_response, mean_response};
use crate::dist::{DiscreteDist, Mg1};
use crate::hillvalley::{coload, decompose, excess, HvDecomp};
use crate::oracle;
use crate::rank::PiecewiseLinearFn;
use crate::rank::{gittins_rank, increasing_envelope, mserpt_rank, serpt_rank, PolicySpec};

/// Loads every case is checked at.
pub const LOADS: [f64; 3] = [0.3, 0.6, 0.9];

/// Relative slack for comparisons that hold exactly in real arithmetic.
const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    /// Case label: `fixture:<name>` or `case:<index>`.
    pub case: String,
    /// Seed that regenerates the case distribution (0 for fixtures).
    pub seed: u64,
    pub check: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub cases: usize,
    pub checks: u64,
    pub failures: Vec<Failure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Distinct seeds of failing random cases.
    pub fn failing_seeds(&self) -> Vec<u64> {
        let mut s: Vec<u64> = self
            .failures
            .iter()
            .filter(|f| f.case.starts_with("case:"))
            .map(|f| f.seed)
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }
}

fn le(a: f64, b: f64) -> bool {
    a <= b + SLACK * a.abs().max(b.abs()).max(1.0)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SLACK * a.abs().max(b.abs()).max(1.0)
}

/// Random case distribution for `seed`.
pub fn random_dist(seed: u64) -> DiscreteDist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = rng.gen_range(2..=8usize);
        let sizes: Vec<f64> = (0..n)
            .map(|_| libm::pow(10.0, rng.gen_range(-2.0..2.0)))
            .collect();
        let w: Vec<f64> = (0..n)
            .map(|_| -libm::log1p(-rng.gen::<f64>()).max(1e-300))
            .collect();
        let total: f64 = w.iter().sum();
        let mut probs: Vec<f64> = w.iter().map(|x| x / total).collect();
        let head: f64 = probs[..n - 1].iter().sum();
        probs[n - 1] = 1.0 - head;
        if probs[n - 1] <= 0.0 {
            continue;
        }
        if let Ok(d) = DiscreteDist::new(sizes.into_iter().zip(probs)) {
            if d.len() >= 2 {
                return d;
            }
        }
    }
}

struct Checker<'a> {
    report: &'a mut VerifyReport,
    case: String,
    seed: u64,
}

impl Checker<'_> {
    fn check(&mut self, ok: bool, name: &'static str, detail: impl FnOnce() -> String) {
        self.report.checks += 1;
        if !ok {
            self.report.failures.push(Failure {
                case: self.case.clone(),
                seed: self.seed,
                check: name,
                detail: detail(),
            });
        }
    }
}

/// Ages 0, every atom below the largest, and `k` interior points per segment.
fn probe_ages(dist: &DiscreteDist, k: usize) -> Vec<f64> {
    let knots = dist.knots();
    let mut out = Vec::new();
    for w in knots.windows(2) {
        out.push(w[0]);
        for i in 1..=k {
            out.push(w[0] + (w[1] - w[0]) * i as f64 / (k + 1) as f64);
        }
    }
    out
}

fn hill_points(d: &HvDecomp) -> Vec<f64> {
    let mut v = Vec::new();
    for &(s, e) in d.hills() {
        v.push(s);
        if e > s {
            v.push(0.5 * (s + e));
            v.push(e);
        }
    }
    v
}

fn check_ranks(c: &mut Checker<'_>, dist: &DiscreteDist) -> (PiecewiseLinearFn, PiecewiseLinearFn) {
    let (g, table) = gittins_rank(dist);
    let s = serpt_rank(dist);
    let m = mserpt_rank(dist);

    for a in probe_ages(dist, 3) {
        let (gv, sv, mv) = (g.value(a), s.value(a), m.value(a));
        c.check(le(gv, sv) && le(sv, mv), "rank_ordering", || {
            format!("age {a}: gittins {gv}, serpt {sv}, mserpt {mv}")
        });
        if let Some(o) = oracle::serpt_at(dist, a) {
            c.check(close(sv, o), "serpt_oracle", || {
                format!("age {a}: {sv} vs {o}")
            });
        }
    }

    c.check(m.is_nondecreasing(), "mserpt_monotone", || {
        "mserpt decreases".into()
    });
    let env = increasing_envelope(&m);
    let again = increasing_envelope(&env);
    let probes = probe_ages(dist, 5);
    let idem = probes
        .iter()
        .all(|&a| close(env.value(a), again.value(a)) && close(env.value(a), m.value(a)));
    c.check(idem, "envelope_idempotent", || {
        "envelope changed on reapplication".into()
    });
    for f in [&g, &s] {
        let e = increasing_envelope(f);
        let dom = probes.iter().all(|&a| le(f.value(a), e.value(a)));
        c.check(dom && e.is_nondecreasing(), "envelope_dominates", || {
            "envelope below its input or not monotone".into()
        });
    }

    if dist.len() <= 12 {
        let brute = oracle::gittins_at_knots(dist);
        c.check(brute.len() == table.ages.len(), "gittins_oracle", || {
            format!(
                "{} oracle knots vs {} table rows",
                brute.len(),
                table.ages.len()
            )
        });
        for (i, &(a, r, b)) in brute.iter().enumerate() {
            let (ta, tr) = (table.ages.get(i).copied(), table.ranks.get(i).copied());
            let fv = g.value(a);
            c.check(
                ta == Some(a) && tr.is_some_and(|t| close(t, r)) && close(fv, r),
                "gittins_oracle",
                || format!("age {a}: oracle {r}, table {tr:?}, function {fv}"),
            );
            let tb = table.stop_ages.get(i).copied().unwrap_or(f64::NAN);
            let stop_ok = tb > a && oracle::efficiency(dist, a, tb).is_some_and(|v| close(v, r));
            c.check(stop_ok, "gittins_stop_age", || {
                format!("age {a}: stop {tb}, oracle stop {b}")
            });
        }
    }
    (g, m)
}

fn check_decompositions(c: &mut Checker<'_>, dist: &DiscreteDist, gd: &HvDecomp, md: &HvDecomp) {
    for h in hill_points(gd) {
        c.check(md.is_hill_age(h), "hill_subset", || {
            format!("gittins hill age {h} is not an mserpt hill age")
        });
    }
    for (x, _) in dist.atoms() {
        if gd.is_hill_size(x) {
            c.check(md.is_hill_size(x), "hill_subset", || {
                format!("gittins hill size {x} is not an mserpt hill size")
            });
        }
        let chain = [
            gd.prev_hill(x),
            md.prev_hill(x),
            x,
            md.next_hill(x),
            gd.next_hill(x),
        ];
        c.check(
            chain.windows(2).all(|w| w[0] <= w[1]),
            "hill_ordering_chain",
            || format!("size {x}: chain {chain:?}"),
        );
    }
    for d in [gd, md] {
        c.check(
            d.prev_hill(0.0) == 0.0 && d.is_hill_age(0.0),
            "zero_is_hill",
            || "age 0 is not a hill".into(),
        );
        c.check(d.is_hill_age(d.end()), "max_is_hill", || {
            "largest size is not a hill".into()
        });
        for (u, v) in d.valleys() {
            c.check(d.next_hill(0.5 * (u + v)) == v, "valley_bounds", || {
                format!("valley ({u}, {v}]")
            });
        }
    }
}

fn check_load(c: &mut Checker<'_>, mg1: &Mg1, md: &HvDecomp, grid: &[f64]) {
    let rho = mg1.rho();
    let dist = mg1.dist();

    // Coload-ratio bound and its tail-ratio corollary at hill pairs a <= b.
    let hills = hill_points(md);
    let mut ages: Vec<f64> = hills.clone();
    ages.extend(probe_ages(dist, 1));
    for &b in &hills {
        let tb = dist.tail(b);
        let cb = coload(mg1, b);
        for &a in ages.iter().filter(|&&a| a <= b) {
            let ta = dist.tail(a);
            if ta == 0.0 {
                continue;
            }
            let ratio = coload(mg1, a) / cb;
            let lemma = 1.0 / (1.0 - rho + rho * tb / ta);
            c.check(le(ratio, lemma), "coload_ratio", || {
                format!("rho {rho}, a {a}, b {b}: {ratio} > {lemma}")
            });
            c.check(le(ratio * tb, ta), "coload_tail_ratio", || {
                format!("rho {rho}, a {a}, b {b}: ratio {ratio}, tails {ta}/{tb}")
            });
        }
    }

    // Monotonicity facts over a dense grid.
    let mut prev: Option<[f64; 5]> = None;
    for &a in grid {
        let cur = [
            dist.tail(a),
            coload(mg1, a),
            excess(mg1, a),
            md.prev_hill(a),
            md.next_hill(a),
        ];
        let (m1, m2) = oracle::trunc_moments(dist, a);
        c.check(
            close(cur[0], oracle::tail(dist, a))
                && close(cur[1], 1.0 - mg1.lambda() * m1)
                && close(cur[2], 0.5 * mg1.lambda() * m2),
            "functional_oracle",
            || format!("age {a}: {cur:?}"),
        );
        if let Some(p) = prev {
            let ok = cur[0] <= p[0]
                && cur[1] <= p[1]
                && cur[2] >= p[2]
                && cur[3] >= p[3]
                && cur[4] >= p[4];
            c.check(ok, "monotonicity_table", || {
                format!("age {a}: {p:?} -> {cur:?}")
            });
        }
        prev = Some(cur);
    }
    c.check(
        coload(mg1, 0.0) == 1.0 && close(coload(mg1, dist.max_size()), 1.0 - rho),
        "coload_endpoints",
        || "coload(0) != 1 or coload(max) != 1 - rho".into(),
    );

    // Analytic invariants.
    let fcfs = mean_response(mg1, &PolicySpec::Fcfs).expect("stable load");
    let pk = mg1.lambda() * dist.second_moment() / (2.0 * (1.0 - rho)) + dist.mean();
    c.check(close(fcfs.mean_response, pk), "pollaczek_khinchine", || {
        format!("rho {rho}: {} vs {pk}", fcfs.mean_response)
    });
    for policy in [
        PolicySpec::MSerpt,
        PolicySpec::Fb,
        PolicySpec::Gittins,
        PolicySpec::Serpt,
    ] {
        let r = mean_response(mg1, &policy).expect("stable load");
        let mut sum = 0.0;
        for s in &r.per_size {
            sum += s.prob * s.response;
            c.check(
                close(s.response, s.waiting + s.residence)
                    && s.waiting >= 0.0
                    && le(s.size, s.residence),
                "per_size_consistency",
                || format!("{policy} size {}: {s:?}", s.size),
            );
        }
        if r.exact {
            c.check(
                close(sum, r.mean_response),
                "aggregate_is_weighted_sum",
                || format!("{policy}: {sum} vs {}", r.mean_response),
            );
        }
        let lighter = Mg1::new(dist.clone(), 0.5 * mg1.lambda()).expect("lighter load is stable");
        let rl = mean_response(&lighter, &policy).expect("stable load");
        let mono = r
            .per_size
            .iter()
            .zip(&rl.per_size)
            .all(|(h, l)| le(l.response, h.response));
        c.check(mono, "load_monotone", || format!("{policy} at rho {rho}"));
    }
    let ms = mean_response(mg1, &PolicySpec::MSerpt).expect("stable load");
    let g = mean_response(mg1, &PolicySpec::Gittins).expect("stable load");
    c.check(
        le(g.mean_response, ms.mean_response),
        "gittins_bound_below_mserpt",
        || format!("rho {rho}: {} > {}", g.mean_response, ms.mean_response),
    );
    let hv = hill_valley_response(mg1, md);
    c.check(
        close(hv.mean_response, ms.mean_response),
        "mserpt_hill_valley",
        || format!("rho {rho}: {} vs {}", hv.mean_response, ms.mean_response),
    );
}

fn run_case(report: &mut VerifyReport, case: String, seed: u64, dist: &DiscreteDist) {
    let mut c = Checker { report, case, seed };
    let (g, m) = check_ranks(&mut c, dist);
    let gd = decompose(&g);
    let md = decompose(&m);
    check_decompositions(&mut c, dist, &gd, &md);

    let xmax = dist.max_size();
    let mut grid: Vec<f64> = (0..=200).map(|i| xmax * 1.05 * i as f64 / 200.0).collect();
    grid.extend(dist.sizes());
    grid.sort_by(f64::total_cmp);
    for rho in LOADS {
        let mg1 = Mg1::with_load(dist.clone(), rho).expect("load below 1");
        check_load(&mut c, &mg1, &md, &grid);
    }
    c.report.cases += 1;
}

fn run_fixtures(report: &mut VerifyReport) {
    let d1 = DiscreteDist::new([(1.0, 0.5), (2.0, 0.5)]).expect("valid fixture");
    run_case(report, "fixture:two-point".into(), 0, &d1);
    let mut c = Checker {
        report,
        case: "fixture:two-point".into(),
        seed: 0,
    };
    let gd = decompose(&gittins_rank(&d1).0);
    let md = decompose(&mserpt_rank(&d1));
    let expect: &[(f64, f64)] = &[(0.0, 0.0), (2.0, 2.0)];
    c.check(
        gd.hills() == expect && md.hills() == expect,
        "fixture_hills",
        || format!("gittins {:?}, mserpt {:?}", gd.hills(), md.hills()),
    );

    let pm = DiscreteDist::point_mass(3.0).expect("valid fixture");
    run_case(report, "fixture:point-mass".into(), 0, &pm);
    let mut c = Checker {
        report,
        case: "fixture:point-mass".into(),
        seed: 0,
    };
    let (g, _) = gittins_rank(&pm);
    let s = serpt_rank(&pm);
    let m = mserpt_rank(&pm);
    // All three agree at the only knot; Gittins and SERPT agree everywhere.
    let same = (0..30)
        .map(|i| 0.1 * i as f64)
        .all(|a| close(g.value(a), s.value(a)));
    let at_zero = [g.value(0.0), s.value(0.0), m.value(0.0)]
        .iter()
        .all(|&v| close(v, 3.0));
    c.check(same && at_zero, "fixture_point_mass_ranks", || {
        "point-mass ranks differ".into()
    });
    let hills = decompose(&m);
    c.check(
        hills.hills() == [(0.0, 0.0), (3.0, 3.0)],
        "fixture_hills",
        || format!("{:?}", hills.hills()),
    );
}

/// Runs the fixtures and `cases` random distributions derived from `seed`.
pub fn verify(cases: usize, seed: u64) -> VerifyReport {
    let mut report = VerifyReport::default();
    run_fixtures(&mut report);
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..cases {
        let case_seed: u64 = master.gen();
        let dist = random_dist(case_seed);
        run_case(&mut report, format!("case:{i}"), case_seed, &dist);
    }
    report
}
