use proptest::prelude::*;

use soap_sched_core::analytic::mean_response;
use soap_sched_core::hillvalley::{coload, decompose};
use soap_sched_core::oracle;
use soap_sched_core::rank::{gittins_rank, increasing_envelope, mserpt_rank, serpt_rank};
use soap_sched_core::{DiscreteDist, Mg1, PiecewiseLinearFn, PolicySpec};

fn dist_strategy() -> impl Strategy<Value = DiscreteDist> {
    prop::collection::vec((0.01f64..100.0, 0.05f64..1.0), 1..10).prop_filter_map(
        "duplicate sizes",
        |atoms| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            DiscreteDist::new(atoms.into_iter().map(|(x, w)| (x, w / total))).ok()
        },
    )
}

fn pwl_strategy() -> impl Strategy<Value = PiecewiseLinearFn> {
    prop::collection::vec((0.1f64..3.0, -5.0f64..5.0, -2.0f64..2.0), 1..12).prop_map(|segs| {
        let mut pieces = Vec::new();
        let mut s = 0.0;
        for (len, v, m) in segs {
            pieces.push((s, v, m));
            s += len;
        }
        PiecewiseLinearFn::new(pieces, s).unwrap()
    })
}

fn probes(f: &PiecewiseLinearFn) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..f.len() {
        let (s, e) = (f.starts()[k], f.piece_end(k));
        out.extend([
            s,
            s + 0.25 * (e - s),
            s + 0.5 * (e - s),
            s + 0.999 * (e - s),
        ]);
    }
    out
}

fn tol(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn envelope_is_running_max(f in pwl_strategy()) {
        let g = increasing_envelope(&f);
        prop_assert!(g.is_nondecreasing());
        let h = increasing_envelope(&g);
        for a in probes(&f) {
            prop_assert!(g.value(a) + tol(g.value(a)) >= f.value(a));
            prop_assert!((h.value(a) - g.value(a)).abs() <= tol(g.value(a)));
            // Running max sampled on a fine grid never exceeds the envelope.
            let sampled = probes(&f).into_iter().filter(|&b| b <= a).map(|b| f.value(b)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(sampled <= g.value(a) + tol(sampled));
        }
    }

    #[test]
    fn rank_chain(d in dist_strategy()) {
        let (git, _) = gittins_rank(&d);
        let serpt = serpt_rank(&d);
        let mserpt = mserpt_rank(&d);
        for a in probes(&serpt) {
            let (g, s, m) = (git.value(a), serpt.value(a), mserpt.value(a));
            prop_assert!(g <= s + tol(s), "gittins {g} > serpt {s} at {a}");
            prop_assert!(s <= m + tol(m), "serpt {s} > mserpt {m} at {a}");
            let o = oracle::serpt_at(&d, a).unwrap();
            prop_assert!((o - s).abs() <= tol(o));
        }
    }

    #[test]
    fn gittins_matches_brute_force(d in dist_strategy()) {
        let (git, table) = gittins_rank(&d);
        for (i, (a, r, b)) in oracle::gittins_at_knots(&d).into_iter().enumerate() {
            prop_assert!((git.value(a) - r).abs() <= tol(r));
            prop_assert!((table.ranks[i] - r).abs() <= tol(r));
            prop_assert!((table.stop_ages[i] - b).abs() <= tol(b));
            prop_assert!(b > a);
        }
    }

    #[test]
    fn gittins_hills_are_mserpt_hills(d in dist_strategy()) {
        let g = decompose(&gittins_rank(&d).0);
        let m = decompose(&mserpt_rank(&d));
        for &(start, _) in g.hills() {
            prop_assert!(m.is_hill_age(start), "gittins hill {start} not an mserpt hill");
        }
        for &x in d.sizes() {
            if g.is_hill_size(x) {
                prop_assert!(m.is_hill_size(x));
            }
        }
    }

    #[test]
    fn coload_ratio_between_hill_ages(d in dist_strategy(), rho in 0.05f64..0.95) {
        let mg1 = Mg1::with_load(d.clone(), rho).unwrap();
        let m = decompose(&mserpt_rank(&d));
        let hill_ages: Vec<f64> = d.knots().iter().copied().filter(|&a| m.is_hill_age(a)).collect();
        for &a in &hill_ages {
            for &b in hill_ages.iter().filter(|&&b| b > a) {
                let ratio = coload(&mg1, a) / coload(&mg1, b);
                let ta = oracle::tail(&d, a);
                let tb = oracle::tail(&d, b);
                let lemma = 1.0 / (1.0 - rho + rho * tb / ta);
                prop_assert!(ratio <= lemma * (1.0 + 1e-9), "{ratio} > {lemma}");
                prop_assert!(ratio * tb <= ta * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn mserpt_exact_and_above_gittins_bound(d in dist_strategy(), rho in 0.05f64..0.95) {
        let mg1 = Mg1::with_load(d, rho).unwrap();
        let m = mean_response(&mg1, &PolicySpec::MSerpt).unwrap();
        let g = mean_response(&mg1, &PolicySpec::Gittins).unwrap();
        prop_assert!(m.exact);
        prop_assert!(g.mean_response <= m.mean_response * (1.0 + 1e-9));
    }

    #[test]
    fn response_grows_with_load(d in dist_strategy(), rho in 0.05f64..0.9) {
        let lo = Mg1::with_load(d.clone(), rho).unwrap();
        let hi = Mg1::with_load(d, rho + 0.05).unwrap();
        for p in [PolicySpec::Fcfs, PolicySpec::Fb, PolicySpec::MSerpt] {
            let a = mean_response(&lo, &p).unwrap();
            let b = mean_response(&hi, &p).unwrap();
            for (x, y) in a.per_size.iter().zip(&b.per_size) {
                prop_assert!(x.response <= y.response * (1.0 + 1e-12));
            }
        }
    }
}
