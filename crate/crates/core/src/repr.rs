//! State and reward encodings.
//!
//! The privacy-aware representation sees only the job's source cluster `c`, its category
//! `w`, and a local load-distribution matrix `d` built from the agent's own past
//! decisions, plus the system-wide queued-job total for its reward. The privacy-lacking
//! representation reads per-node queue lengths directly and serves as a comparison.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Updates between drift checks of the distribution sum.
const RESUM_PERIOD: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReprDims {
    pub clusters: usize,
    pub categories: usize,
    pub actions: usize,
}

impl ReprDims {
    pub fn new(clusters: usize, categories: usize, actions: usize) -> Result<Self> {
        if clusters == 0 || categories == 0 || actions == 0 {
            return Err(Error::invalid(format!(
                "representation dims must be >= 1, got {clusters}x{categories}x{actions}"
            )));
        }
        Ok(Self {
            clusters,
            categories,
            actions,
        })
    }

    pub fn cells(&self) -> usize {
        self.clusters * self.categories * self.actions
    }

    /// Length of the privacy-aware state vector.
    pub fn parl_state_len(&self) -> usize {
        self.clusters + self.categories + self.cells()
    }

    /// Length of the privacy-lacking state vector.
    pub fn plrl_state_len(&self) -> usize {
        self.clusters + self.categories + self.actions
    }

    fn check(&self, c: usize, w: usize) -> Result<()> {
        if c >= self.clusters || w >= self.categories {
            return Err(Error::IndexOutOfRange(format!(
                "(c={c}, w={w}) outside {}x{}",
                self.clusters, self.categories
            )));
        }
        Ok(())
    }
}

/// The `|C| x |W| x |A|` local view of where the agent has been sending load.
///
/// Every decision adds 1 to its cell and renormalizes; since the sum is 1 beforehand it is
/// exactly 2 afterwards, so every other entry halves and older decisions fade out
/// geometrically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadDistribution {
    dims: ReprDims,
    d: Vec<f64>,
    since_check: u32,
}

impl LoadDistribution {
    /// Uniform `1 / (|C| |W| |A|)` start.
    pub fn new(dims: ReprDims) -> Self {
        let cells = dims.cells();
        Self {
            dims,
            d: vec![1.0 / cells as f64; cells],
            since_check: 0,
        }
    }

    pub fn init(clusters: usize, categories: usize, actions: usize) -> Result<Self> {
        Ok(Self::new(ReprDims::new(clusters, categories, actions)?))
    }

    pub fn dims(&self) -> ReprDims {
        self.dims
    }

    fn index(&self, c: usize, w: usize, a: usize) -> Result<usize> {
        self.dims.check(c, w)?;
        if a >= self.dims.actions {
            return Err(Error::IndexOutOfRange(format!(
                "action {a} outside 0..{}",
                self.dims.actions
            )));
        }
        Ok((c * self.dims.categories + w) * self.dims.actions + a)
    }

    pub fn get(&self, c: usize, w: usize, a: usize) -> Result<f64> {
        Ok(self.d[self.index(c, w, a)?])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d
    }

    pub fn sum(&self) -> f64 {
        self.d.iter().sum()
    }

    /// Records decision `(c, w, a)`.
    pub fn update(&mut self, c: usize, w: usize, a: usize) -> Result<()> {
        let idx = self.index(c, w, a)?;
        for x in &mut self.d {
            *x *= 0.5;
        }
        // the selected cell was halved along with the rest: (x + 1) / 2 = x / 2 + 0.5
        self.d[idx] += 0.5;
        self.since_check += 1;
        if self.since_check >= RESUM_PERIOD {
            self.since_check = 0;
            let total = self.sum();
            if (total - 1.0).abs() > 1e-12 {
                for x in &mut self.d {
                    *x /= total;
                }
            }
        }
        Ok(())
    }
}

fn one_hot(out: &mut Vec<f64>, index: usize, len: usize) {
    out.extend((0..len).map(|i| if i == index { 1.0 } else { 0.0 }));
}

/// `one_hot(c) ‖ one_hot(w) ‖ flatten(d)`.
pub fn encode_state(c: usize, w: usize, d: &LoadDistribution) -> Result<Vec<f64>> {
    let dims = d.dims();
    dims.check(c, w)?;
    let mut s = Vec::with_capacity(dims.parl_state_len());
    one_hot(&mut s, c, dims.clusters);
    one_hot(&mut s, w, dims.categories);
    s.extend_from_slice(d.as_slice());
    Ok(s)
}

/// `Q_prev - Q_now`: positive when the system drained between two decisions.
pub fn parl_reward(q_prev: usize, q_now: usize) -> f64 {
    q_prev as f64 - q_now as f64
}

/// `one_hot(c) ‖ one_hot(w) ‖ queues / Σ queues` (zeros for an empty system).
pub fn plrl_state(c: usize, w: usize, dims: ReprDims, queues: &[usize]) -> Result<Vec<f64>> {
    dims.check(c, w)?;
    if queues.len() != dims.actions {
        return Err(Error::DimensionMismatch {
            expected: dims.actions,
            actual: queues.len(),
        });
    }
    let mut s = Vec::with_capacity(dims.plrl_state_len());
    one_hot(&mut s, c, dims.clusters);
    one_hot(&mut s, w, dims.categories);
    let total: usize = queues.iter().sum();
    if total == 0 {
        s.extend(std::iter::repeat_n(0.0, queues.len()));
    } else {
        s.extend(queues.iter().map(|&q| q as f64 / total as f64));
    }
    Ok(s)
}

/// `-Q_now`.
pub fn plrl_reward(q_now: usize) -> f64 {
    -(q_now as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    #[default]
    Parl,
    Plrl,
}

impl Representation {
    pub fn state_len(&self, dims: ReprDims) -> usize {
        match self {
            Representation::Parl => dims.parl_state_len(),
            Representation::Plrl => dims.plrl_state_len(),
        }
    }
}

/// Privacy-aware observer. Its inputs are the job's `(c, w)`, the agent's own decisions
/// and the system-wide queued total; it never receives per-node loads or capacities.
#[derive(Debug, Clone, PartialEq)]
pub struct ParlObserver {
    d: LoadDistribution,
}

impl ParlObserver {
    pub fn new(d: LoadDistribution) -> Self {
        Self { d }
    }

    pub fn state(&self, c: usize, w: usize) -> Result<Vec<f64>> {
        encode_state(c, w, &self.d)
    }

    pub fn record_decision(&mut self, c: usize, w: usize, a: usize) -> Result<()> {
        self.d.update(c, w, a)
    }

    pub fn reward(&self, q_prev: usize, q_now: usize) -> f64 {
        parl_reward(q_prev, q_now)
    }

    pub fn distribution(&self) -> &LoadDistribution {
        &self.d
    }

    pub fn into_distribution(self) -> LoadDistribution {
        self.d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_examples() {
        assert_eq!(
            LoadDistribution::init(1, 1, 2).unwrap().as_slice(),
            &[0.5, 0.5]
        );
        let d = LoadDistribution::init(2, 1, 2).unwrap();
        assert_eq!(d.as_slice(), &[0.25; 4]);
        assert_eq!(d.sum(), 1.0);
        assert!(LoadDistribution::init(0, 1, 2).is_err());
    }

    #[test]
    fn update_examples() {
        let mut d = LoadDistribution::init(1, 1, 2).unwrap();
        d.update(0, 0, 0).unwrap();
        assert_eq!(d.as_slice(), &[0.75, 0.25]);
        d.update(0, 0, 0).unwrap();
        assert_eq!(d.as_slice(), &[0.875, 0.125]);
        for _ in 0..200 {
            d.update(0, 0, 0).unwrap();
        }
        assert!((d.get(0, 0, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!(d.get(0, 0, 1).unwrap() < 1e-60);

        let mut d = LoadDistribution::init(2, 1, 2).unwrap();
        d.update(0, 0, 0).unwrap();
        assert_eq!(d.as_slice(), &[0.625, 0.125, 0.125, 0.125]);
        assert!(d.update(2, 0, 0).is_err());
        assert!(d.update(0, 0, 2).is_err());
    }

    #[test]
    fn state_encoding() {
        let d = LoadDistribution::init(2, 1, 2).unwrap();
        let s = encode_state(1, 0, &d).unwrap();
        assert_eq!(s, vec![0.0, 1.0, 1.0, 0.25, 0.25, 0.25, 0.25]);
        assert_eq!(s, encode_state(1, 0, &d).unwrap());
        assert_eq!(s.len(), d.dims().parl_state_len());
        assert!(encode_state(2, 0, &d).is_err());
    }

    #[test]
    fn rewards() {
        assert_eq!(parl_reward(5, 3), 2.0);
        assert_eq!(parl_reward(3, 3), 0.0);
        assert_eq!(plrl_reward(4), -4.0);
        assert_eq!(plrl_reward(0), 0.0);
    }

    #[test]
    fn plrl_state_block() {
        let dims = ReprDims::new(1, 1, 2).unwrap();
        assert_eq!(&plrl_state(0, 0, dims, &[2, 2]).unwrap()[2..], &[0.5, 0.5]);
        assert_eq!(&plrl_state(0, 0, dims, &[0, 0]).unwrap()[2..], &[0.0, 0.0]);
        assert!(plrl_state(0, 0, dims, &[1]).is_err());
    }

    #[test]
    fn recency_ordering() {
        let mut d = LoadDistribution::init(1, 2, 3).unwrap();
        d.update(0, 1, 0).unwrap();
        d.update(0, 1, 2).unwrap();
        assert!(d.get(0, 1, 2).unwrap() > d.get(0, 1, 0).unwrap());
    }
}
