//! Self-checks against closed-form answers: the simulator against M/M/1 queueing
//! formulas and backpropagation against finite differences.

use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;

use crate::error::Result;
use crate::nn::{gradient_check, Mlp};
use crate::rng;
use crate::sim::{Observation, Simulator};
use crate::topology::{FogTopology, LinkSpec, NodeId, NodeSpec, Role};
use crate::workload::{CategoryLabel, GenerationConfig, Job, JobGenerator, WorkloadCategory};

/// Measured against expected steady-state figures of one M/M/1 queue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mm1Check {
    pub rho: f64,
    pub horizon: f64,
    /// Time-averaged number in system.
    pub measured_l: f64,
    pub expected_l: f64,
    /// Mean time at the node (wait plus service).
    pub measured_w: f64,
    pub expected_w: f64,
}

impl Mm1Check {
    pub fn l_error(&self) -> f64 {
        (self.measured_l / self.expected_l - 1.0).abs()
    }

    pub fn w_error(&self) -> f64 {
        (self.measured_w / self.expected_w - 1.0).abs()
    }

    pub fn within(&self, tol: f64) -> bool {
        self.l_error() <= tol && self.w_error() <= tol
    }
}

fn mm1_topology(ipt: f64) -> Result<FogTopology> {
    let node = |id, role, ipt| NodeSpec {
        id,
        role,
        ipt,
        ram: 1 << 30,
    };
    let link = |a, b| LinkSpec {
        endpoints: (a, b),
        bw: 1000.0,
        pr: 1.0,
    };
    FogTopology::new(
        vec![
            node(0, Role::Cloud, 10.0 * ipt),
            node(1, Role::Fog, ipt),
            node(2, Role::Fog, ipt),
            node(3, Role::SourceCluster, ipt),
        ],
        vec![link(0, 1), link(0, 2), link(1, 3)],
    )
}

/// One cluster feeding one Fog node at utilization `rho` (service rate 1) for `horizon`
/// time units. A second, idle Fog node exists only because a topology needs two.
pub fn mm1_check(rho: f64, horizon: f64, seed: u64) -> Result<Mm1Check> {
    let mean_instructions = 1000.0;
    let topo = Arc::new(mm1_topology(mean_instructions)?);
    let categories = Arc::new(vec![WorkloadCategory {
        id: 0,
        label: CategoryLabel::Light,
        mean_instructions,
        request_bytes: 0.0,
        response_bytes: 0.0,
    }]);
    let mut sim = Simulator::new(topo, categories);
    let generation = GenerationConfig {
        beta: 1.0 / rho,
        category_mix: vec![1.0],
    };
    sim.add_generator(JobGenerator::new(
        3,
        0,
        generation,
        rng::stream(seed, "workload", 0),
    )?)?;
    let target: NodeId = 1;
    let mut always = |_: &Job, _: &Observation<'_>| target;
    let m = sim.run_until(horizon, &mut always)?;
    let mu = 1.0;
    Ok(Mm1Check {
        rho,
        horizon,
        measured_l: m.time_avg_queue(0),
        expected_l: rho / (1.0 - rho),
        measured_w: m.mean_sojourn().unwrap_or(f64::NAN),
        expected_w: 1.0 / (mu - rho),
    })
}

/// Worst finite-difference relative error for each of `nets` seeded networks.
pub fn gradient_checks(nets: usize, seed: u64) -> Result<Vec<f64>> {
    (0..nets as u64)
        .map(|k| {
            let mut r = rng::stream(seed, "gradient-check", k);
            let input = r.random_range(3..12);
            let hidden = r.random_range(4..16);
            let output = r.random_range(2..6);
            let net = Mlp::new(&[input, hidden, hidden, output], &mut r)?;
            let x = Array2::from_shape_fn((4, input), |_| r.random_range(-1.0..1.0));
            let up = Array2::from_shape_fn((4, output), |_| r.random_range(-1.0..1.0));
            gradient_check(&net, x.view(), up.view(), 1e-5)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_mm1_is_in_the_right_range() {
        let c = mm1_check(0.5, 50_000.0, 3).unwrap();
        assert!(c.within(0.15), "{c:?}");
    }

    #[test]
    fn gradients_agree() {
        assert!(gradient_checks(3, 1).unwrap().iter().all(|e| *e <= 1e-4));
    }
}
