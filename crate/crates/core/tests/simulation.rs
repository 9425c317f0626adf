use std::collections::HashMap;

use fogforge::config::ExperimentConfig;
use fogforge::harness::Environment;
use fogforge::rng;
use fogforge::sim::{EventKind, Observation, Simulator};
use fogforge::topology::NodeId;
use fogforge::workload::{exp_from_uniform, sample_category, Job};
use proptest::prelude::*;
use rand::Rng;

fn desk() -> Environment {
    ExperimentConfig::desk().environment().unwrap()
}

fn random_dispatch(fog: Vec<NodeId>, seed: u64) -> impl FnMut(&Job, &Observation<'_>) -> NodeId {
    let mut r = rng::seeded(seed);
    move |_, _| fog[r.random_range(0..fog.len())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jobs_are_conserved(beta in 20.0f64..300.0, seed in any::<u64>(), pick in any::<u64>()) {
        let env = desk();
        let mut sim = env.simulator(beta, seed).unwrap();
        let mut d = random_dispatch(env.fog_nodes().to_vec(), pick);
        for k in 1..=10 {
            sim.run_until(1_000.0 * k as f64, &mut d).unwrap();
            prop_assert!(sim.counters().conserved(), "{:?}", sim.counters());
        }
        sim.drain(&mut d).unwrap();
        let c = sim.counters();
        prop_assert_eq!(c.created, c.delivered + c.dropped);
        prop_assert_eq!(c.queued + c.in_flight(), 0);
        prop_assert_eq!(sim.total_queued(), 0);
    }
}

#[test]
fn nodes_serve_first_in_first_out() {
    let env = desk();
    let mut sim = env.simulator(60.0, 5).unwrap();
    sim.enable_trace();
    let mut d = random_dispatch(env.fog_nodes().to_vec(), 1);
    sim.run_until(50_000.0, &mut d).unwrap();
    sim.drain(&mut d).unwrap();
    let mut arrivals: HashMap<NodeId, Vec<u64>> = HashMap::new();
    let mut completions: HashMap<NodeId, Vec<u64>> = HashMap::new();
    for rec in sim.trace() {
        let (Some(job), Some(node)) = (rec.job, rec.node) else {
            continue;
        };
        match rec.kind {
            EventKind::ArrivalAtNode => arrivals.entry(node).or_default().push(job),
            EventKind::ServiceComplete => completions.entry(node).or_default().push(job),
            _ => {}
        }
    }
    assert!(!arrivals.is_empty());
    assert_eq!(arrivals, completions);
}

#[test]
fn trace_is_time_ordered_and_timestamps_monotone() {
    let env = desk();
    let mut sim = env.simulator(100.0, 9).unwrap();
    sim.enable_trace();
    let mut d = random_dispatch(env.fog_nodes().to_vec(), 2);
    sim.run_until(20_000.0, &mut d).unwrap();
    sim.drain(&mut d).unwrap();
    for w in sim.trace().windows(2) {
        assert!(w[0].time <= w[1].time);
    }
    // per job: created <= arrival <= service complete <= delivered
    let mut last: HashMap<u64, (f64, EventKind)> = HashMap::new();
    let rank = |k: EventKind| match k {
        EventKind::JobCreated => 0,
        EventKind::ArrivalAtNode => 1,
        EventKind::ServiceComplete => 2,
        EventKind::ResponseDelivered => 3,
    };
    for rec in sim.trace() {
        let Some(job) = rec.job else { continue };
        if let Some((t, k)) = last.insert(job, (rec.time, rec.kind)) {
            assert!(t <= rec.time && rank(k) + 1 == rank(rec.kind), "job {job}");
        }
    }
    assert!(!last.is_empty());
    assert!(last
        .values()
        .all(|(_, k)| *k == EventKind::ResponseDelivered));
}

fn created_events(sim: &Simulator) -> Vec<(u64, Option<u64>, NodeId)> {
    sim.trace()
        .iter()
        .filter(|r| r.kind == EventKind::JobCreated)
        .map(|r| (r.time.to_bits(), r.job, r.node.unwrap()))
        .collect()
}

#[test]
fn workload_does_not_depend_on_dispatcher() {
    let env = desk();
    let fog = env.fog_nodes().to_vec();
    let run = |pick: &mut dyn FnMut() -> NodeId| {
        let mut sim = env.simulator(80.0, 21).unwrap();
        sim.enable_trace();
        let mut seen = Vec::new();
        let mut d = |job: &Job, _: &Observation<'_>| {
            seen.push((
                job.id,
                job.category,
                job.instructions.to_bits(),
                job.t_created.to_bits(),
            ));
            pick()
        };
        sim.run_until(30_000.0, &mut d).unwrap();
        (created_events(&sim), seen)
    };
    let first = fog[0];
    let a = run(&mut || first);
    let mut r = rng::seeded(77);
    let b = run(&mut || fog[r.random_range(0..fog.len())]);
    assert!(!a.1.is_empty());
    assert_eq!(a, b);
}

#[test]
fn same_seed_same_trace() {
    let env = desk();
    let go = || {
        let mut sim = env.simulator(120.0, 3).unwrap();
        sim.enable_trace();
        let mut d = random_dispatch(env.fog_nodes().to_vec(), 4);
        sim.run_until(10_000.0, &mut d).unwrap();
        sim.trace().to_vec()
    };
    assert_eq!(go(), go());
}

#[test]
fn inverse_cdf_matches_closed_form() {
    for u in [0.1, 0.5, 0.9, 0.999] {
        let x = exp_from_uniform(u, 150.0);
        assert!((x - (-150.0 * u.ln())).abs() < 1e-9);
    }
}

#[test]
fn category_frequencies_follow_the_mix() {
    let mix = [0.2, 0.5, 0.3];
    let mut r = rng::seeded(8);
    let mut counts = [0usize; 3];
    for _ in 0..100_000 {
        counts[sample_category(&mut r, &mix).unwrap()] += 1;
    }
    for (c, p) in counts.iter().zip(mix) {
        assert!((*c as f64 / 1e5 - p).abs() < 0.01, "{counts:?}");
    }
}
