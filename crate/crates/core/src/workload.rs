//! Poisson job generation.
//!
//! Each source cluster owns a [`JobGenerator`] with its own random stream. Inter-arrival
//! gaps are exponential with scale `beta`; each job draws a category from the mix and an
//! exponentially distributed instruction count around the category mean, which keeps node
//! service memoryless.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CategoryLabel {
    Light,
    Moderate,
    Heavy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadCategory {
    pub id: usize,
    pub label: CategoryLabel,
    pub mean_instructions: f64,
    pub request_bytes: f64,
    pub response_bytes: f64,
}

/// Default light / moderate / heavy table.
pub fn default_categories() -> Vec<WorkloadCategory> {
    vec![
        WorkloadCategory {
            id: 0,
            label: CategoryLabel::Light,
            mean_instructions: 10_000.0,
            request_bytes: 2_000.0,
            response_bytes: 500.0,
        },
        WorkloadCategory {
            id: 1,
            label: CategoryLabel::Moderate,
            mean_instructions: 25_000.0,
            request_bytes: 4_000.0,
            response_bytes: 1_000.0,
        },
        WorkloadCategory {
            id: 2,
            label: CategoryLabel::Heavy,
            mean_instructions: 45_000.0,
            request_bytes: 8_000.0,
            response_bytes: 2_000.0,
        },
    ]
}

pub fn validate_categories(categories: &[WorkloadCategory]) -> Result<()> {
    if categories.is_empty() {
        return Err(Error::invalid("at least one workload category is required"));
    }
    for (i, c) in categories.iter().enumerate() {
        if c.id != i {
            return Err(Error::invalid(format!(
                "category ids must be 0..{} in order; found {} at {i}",
                categories.len(),
                c.id
            )));
        }
        if !(c.mean_instructions > 0.0) || !c.mean_instructions.is_finite() {
            return Err(Error::invalid(format!(
                "category {i} mean_instructions must be positive"
            )));
        }
        if !(c.request_bytes >= 0.0) || !(c.response_bytes >= 0.0) {
            return Err(Error::invalid(format!(
                "category {i} has negative byte size"
            )));
        }
    }
    for a in categories {
        for b in categories {
            if a.label < b.label && a.mean_instructions >= b.mean_instructions {
                return Err(Error::invalid(format!(
                    "{:?} must need fewer instructions than {:?}",
                    a.label, b.label
                )));
            }
        }
    }
    Ok(())
}

pub fn validate_mix(mix: &[f64]) -> Result<()> {
    if mix.is_empty() {
        return Err(Error::invalid("category mix is empty"));
    }
    if mix.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::invalid(format!(
            "category mix has a negative entry: {mix:?}"
        )));
    }
    let total: f64 = mix.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "category mix sums to {total}, not 1"
        )));
    }
    Ok(())
}

/// Inverse-CDF exponential draw: `-scale * ln(u)`.
pub fn exp_from_uniform(u: f64, scale: f64) -> f64 {
    -scale * u.ln()
}

fn open_unit(rng: &mut SimRng) -> f64 {
    rng.sample(Open01)
}

pub fn sample_interarrival(rng: &mut SimRng, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::invalid(format!("beta must be positive, got {beta}")));
    }
    Ok(exp_from_uniform(open_unit(rng), beta))
}

pub fn sample_category(rng: &mut SimRng, mix: &[f64]) -> Result<usize> {
    validate_mix(mix)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in mix.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return Ok(i);
            }
        }
    }
    // u landed in the rounding slack above the cumulative sum
    Ok(last_positive)
}

pub fn sample_instructions(rng: &mut SimRng, category: &WorkloadCategory) -> Result<f64> {
    let mean = category.mean_instructions;
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::invalid(format!(
            "mean_instructions must be positive, got {mean}"
        )));
    }
    Ok(exp_from_uniform(open_unit(rng), mean))
}

/// Per-cluster generation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationConfig {
    pub beta: f64,
    pub category_mix: Vec<f64>,
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(Error::invalid(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        validate_mix(&self.category_mix)
    }
}

pub type JobId = u64;

#[derive(Debug, Clone, PartialEq)]
pub struct Job {
    pub id: JobId,
    pub category: usize,
    pub source_cluster: NodeId,
    /// Index of the source cluster within the topology's cluster list.
    pub cluster_index: usize,
    pub instructions: f64,
    pub t_created: f64,
    pub t_assigned: Option<f64>,
    pub t_arrived: Option<f64>,
    pub t_service_start: Option<f64>,
    pub t_completed: Option<f64>,
    pub t_delivered: Option<f64>,
    pub assigned_to: Option<NodeId>,
}

/// What a generator hands the simulator for each new job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JobDraw {
    pub category: usize,
    pub instructions: f64,
}

/// Single-owner Poisson source for one cluster.
#[derive(Debug, Clone)]
pub struct JobGenerator {
    pub cluster: NodeId,
    pub cluster_index: usize,
    config: GenerationConfig,
    rng: SimRng,
}

impl JobGenerator {
    pub fn new(
        cluster: NodeId,
        cluster_index: usize,
        config: GenerationConfig,
        rng: SimRng,
    ) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            cluster,
            cluster_index,
            config,
            rng,
        })
    }

    pub fn beta(&self) -> f64 {
        self.config.beta
    }

    pub fn next_gap(&mut self) -> f64 {
        sample_interarrival(&mut self.rng, self.config.beta).expect("validated beta")
    }

    pub fn draw(&mut self, categories: &[WorkloadCategory]) -> Result<JobDraw> {
        let category = sample_category(&mut self.rng, &self.config.category_mix)?;
        let spec = categories.get(category).ok_or_else(|| {
            Error::IndexOutOfRange(format!(
                "mix selects category {category} but only {} are defined",
                categories.len()
            ))
        })?;
        Ok(JobDraw {
            category,
            instructions: sample_instructions(&mut self.rng, spec)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn fixed_uniform_arithmetic() {
        assert!((exp_from_uniform(0.5, 200.0) - 138.629_436_111_989_06).abs() < 1e-9);
        assert!((exp_from_uniform(0.5, 1000.0) - 693.147_180_559_945_3).abs() < 1e-9);
    }

    fn mean_gap(beta: f64, seed: u64) -> f64 {
        let mut r = rng::seeded(seed);
        (0..100_000)
            .map(|_| sample_interarrival(&mut r, beta).unwrap())
            .sum::<f64>()
            / 100_000.0
    }

    #[test]
    fn interarrival_mean_and_scaling() {
        let m200 = mean_gap(200.0, 11);
        let m100 = mean_gap(100.0, 12);
        assert!((m200 / 200.0 - 1.0).abs() < 0.02, "{m200}");
        assert!((m100 / m200 / 0.5 - 1.0).abs() < 0.02, "{m100} vs {m200}");
    }

    #[test]
    fn interarrival_rejects_nonpositive_beta() {
        let mut r = rng::seeded(0);
        assert!(sample_interarrival(&mut r, 0.0).is_err());
        assert!(sample_interarrival(&mut r, -3.0).is_err());
    }

    #[test]
    fn category_point_mass_and_uniform() {
        let mut r = rng::seeded(5);
        assert!((0..1000).all(|_| sample_category(&mut r, &[1.0, 0.0, 0.0]).unwrap() == 0));
        let mut counts = [0usize; 3];
        let third = 1.0 / 3.0;
        for _ in 0..100_000 {
            counts[sample_category(&mut r, &[third, third, third]).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 100_000.0 - third).abs() < 0.02);
        }
    }

    #[test]
    fn category_rejects_bad_mix() {
        let mut r = rng::seeded(5);
        assert!(sample_category(&mut r, &[0.5, 0.5, -0.1]).is_err());
        assert!(sample_category(&mut r, &[0.5, 0.4, 0.0]).is_err());
    }

    #[test]
    fn instruction_mean() {
        let mut r = rng::seeded(9);
        let cat = &default_categories()[0];
        let mean = (0..100_000)
            .map(|_| sample_instructions(&mut r, cat).unwrap())
            .sum::<f64>()
            / 100_000.0;
        assert!((mean / cat.mean_instructions - 1.0).abs() < 0.02);
        let mut bad = cat.clone();
        bad.mean_instructions = 0.0;
        assert!(sample_instructions(&mut r, &bad).is_err());
    }

    #[test]
    fn default_table_is_ordered() {
        validate_categories(&default_categories()).unwrap();
        let mut swapped = default_categories();
        swapped[2].mean_instructions = 1.0;
        assert!(validate_categories(&swapped).is_err());
    }
}
