use std::collections::HashMap;

use soap_sched_core::analytic::{mean_response, srpt_lower_bound};
use soap_sched_core::sim::{compare_policies, simulate, simulate_traced, TraceEvent, TraceKind};
use soap_sched_core::{ContinuousSpec, DiscreteDist, Error, Family, Mg1, PolicySpec, SimConfig};

fn d1() -> DiscreteDist {
    DiscreteDist::new([(1.0, 0.5), (2.0, 0.5)]).unwrap()
}

fn config(mg1: Mg1, policy: PolicySpec, jobs: u64, seed: u64) -> SimConfig {
    SimConfig {
        jobs,
        seed,
        ..SimConfig::new(mg1, policy)
    }
}

#[test]
fn fcfs_two_point_matches_pollaczek_khinchine() {
    let mg1 = Mg1::new(d1(), 0.4).unwrap();
    let r = simulate(&config(mg1, PolicySpec::Fcfs, 1_000_000, 42)).unwrap();
    assert!(r.ci_half_width > 0.0 && r.ci_half_width < 0.03, "{r:?}");
    assert!((r.mean_response - 2.75).abs() <= r.ci_half_width, "{r:?}");
    assert_eq!(r.completions, 1_000_000);
    assert_eq!(r.seed, 42);
}

#[test]
fn gittins_two_point_runs_to_completion_in_order() {
    let mg1 = Mg1::new(d1(), 0.4).unwrap();
    let g = simulate(&config(mg1.clone(), PolicySpec::Gittins, 1_000_000, 42)).unwrap();
    let f = simulate(&config(mg1, PolicySpec::Fcfs, 1_000_000, 42)).unwrap();
    assert!((g.mean_response - 2.75).abs() <= g.ci_half_width, "{g:?}");
    // Same streams, same schedule.
    assert_eq!(g.mean_response, f.mean_response);
}

#[test]
fn empty_system_response_is_size() {
    let mg1 = Mg1::new(DiscreteDist::point_mass(3.0).unwrap(), 0.0).unwrap();
    for p in [
        PolicySpec::Fcfs,
        PolicySpec::Fb,
        PolicySpec::MSerpt,
        PolicySpec::Srpt,
    ] {
        let r = simulate(&config(mg1.clone(), p, 10_000, 5)).unwrap();
        assert_eq!(r.mean_response, 3.0);
        assert_eq!(r.ci_half_width, 0.0);
    }
}

#[test]
fn fb_on_point_mass_matches_closed_form() {
    let mg1 = Mg1::new(DiscreteDist::point_mass(1.0).unwrap(), 0.5).unwrap();
    let r = simulate(&config(mg1, PolicySpec::Fb, 400_000, 3)).unwrap();
    assert!(
        (r.mean_response - 3.0).abs() <= 3.0 * r.ci_half_width,
        "{r:?}"
    );
}

#[test]
fn processor_sharing_is_not_simulated() {
    let mg1 = Mg1::new(d1(), 0.4).unwrap();
    let err = simulate(&config(mg1, PolicySpec::Ps, 10_000, 0)).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)));
}

#[test]
fn runs_are_reproducible_and_conserve_work() {
    let d = DiscreteDist::pathological(0.1).unwrap();
    let mg1 = Mg1::with_load(d, 0.8).unwrap();
    for p in [
        PolicySpec::MSerpt,
        PolicySpec::Gittins,
        PolicySpec::Serpt,
        PolicySpec::Fb,
        PolicySpec::Srpt,
    ] {
        let a = simulate(&config(mg1.clone(), p.clone(), 20_000, 9)).unwrap();
        let b = simulate(&config(mg1.clone(), p, 20_000, 9)).unwrap();
        assert_eq!(a, b);
        assert!((a.busy_time - a.work_done).abs() <= 1e-9 * a.busy_time);
    }
}

#[test]
fn common_random_numbers_share_streams() {
    let mg1 = Mg1::new(d1(), 0.4).unwrap();
    let policies = [PolicySpec::Fcfs, PolicySpec::MSerpt, PolicySpec::Fb];
    let base = config(mg1, PolicySpec::Fcfs, 20_000, 11);
    let crn = compare_policies(&base.mg1, &policies, &base, true).unwrap();
    assert_eq!(crn[0].mean_response, crn[1].mean_response);
    assert_ne!(crn[0].mean_response, crn[2].mean_response);
    // Without common numbers each policy gets its own seed.
    let ind = compare_policies(&base.mg1, &policies, &base, false).unwrap();
    assert_ne!(ind[0].mean_response, ind[1].mean_response);
    assert_eq!(ind[1].seed, 12);
}

#[test]
fn srpt_beats_the_universal_floor() {
    let exp = soap_sched_core::dist::quantize(&ContinuousSpec::new(
        Family::Exponential { rate: 1.0 },
        1000,
    ))
    .unwrap();
    let mg1 = Mg1::with_load(exp, 0.8).unwrap();
    let floor = srpt_lower_bound(&mg1);
    let r = simulate(&config(mg1.clone(), PolicySpec::Srpt, 200_000, 2)).unwrap();
    assert!(
        r.mean_response >= floor - 3.0 * r.ci_half_width,
        "{r:?} vs {floor}"
    );
    let fcfs = mean_response(&mg1, &PolicySpec::Fcfs)
        .unwrap()
        .mean_response;
    assert!(r.mean_response < fcfs);
}

/// Replays a trace and checks the scheduling rule on pathological(0.1)
/// under M-SERPT: an arrival (rank 1.01) preempts a job in the valley
/// (0.9, 1), whose rank is 1.1.
#[test]
fn arrivals_preempt_valley_jobs() {
    let mg1 = Mg1::with_load(DiscreteDist::pathological(0.1).unwrap(), 0.7).unwrap();
    let mut events: Vec<TraceEvent> = Vec::new();
    simulate_traced(
        &config(mg1, PolicySpec::MSerpt, 10_000, 4),
        |e: TraceEvent| events.push(e),
    )
    .unwrap();

    let mut in_service: Option<(u64, f64, f64)> = None;
    let mut checked = 0;
    for w in events.windows(2) {
        let (e, next) = (&w[0], &w[1]);
        match e.kind {
            TraceKind::Serve => in_service = Some((e.job_id, e.age, e.time)),
            TraceKind::Complete => in_service = None,
            TraceKind::Arrival => {
                if let Some((_, age0, t0)) = in_service {
                    let age = age0 + (e.time - t0);
                    if age > 0.9 + 1e-9 && age < 1.0 - 1e-9 {
                        assert_eq!(next.kind, TraceKind::Serve, "{e:?} then {next:?}");
                        assert_eq!(next.job_id, e.job_id);
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 0, "no arrival met a valley job");
}

/// Trace events are time-ordered, jobs are served only between arrival and
/// completion, and every completion happens at an atom size.
#[test]
fn trace_is_consistent() {
    let d = DiscreteDist::new([(0.5, 0.3), (1.0, 0.4), (6.0, 0.3)]).unwrap();
    let mg1 = Mg1::with_load(d, 0.8).unwrap();
    let mut events: Vec<TraceEvent> = Vec::new();
    simulate_traced(
        &config(mg1, PolicySpec::Gittins, 10_000, 8),
        |e: TraceEvent| events.push(e),
    )
    .unwrap();
    let mut arrivals: HashMap<u64, f64> = HashMap::new();
    let mut last_time = 0.0;
    for e in &events {
        assert!(e.time >= last_time);
        last_time = e.time;
        match e.kind {
            TraceKind::Arrival => {
                arrivals.insert(e.job_id, e.time);
            }
            TraceKind::Complete => {
                assert!([0.5, 1.0, 6.0].contains(&e.age), "{e:?}");
                let t = arrivals
                    .remove(&e.job_id)
                    .expect("completed before arrival");
                assert!(e.time - t >= e.age - 1e-9);
            }
            TraceKind::Serve => assert!(arrivals.contains_key(&e.job_id)),
        }
    }
}
