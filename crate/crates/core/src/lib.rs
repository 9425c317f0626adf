//! Fog-network load balancing with privacy-aware Double Deep Q-Learning.
//!
//! The crate is organized bottom-up:
//!
//! - [`topology`]: scale-free fog topologies with Cloud / Fog / source-cluster roles.
//! - [`workload`]: Poisson job generation over light, moderate and heavy categories.
//! - [`sim`]: the deterministic discrete-event core (links, FIFO node queues, job lifecycle).
//! - [`repr`]: privacy-aware (PARL) and privacy-lacking (PLRL) state/reward encodings.
//! - [`nn`]: a small multilayer perceptron with backpropagation and Adam.
//! - [`agent`]: the DDQN agent, replay buffer, checkpoints and inference export.
//! - [`transfer`]: the five phase-transition strategies.
//! - [`harness`]: lifelong train/infer protocol, baselines and box statistics.
//! - [`validate`]: M/M/1 and finite-difference self-checks.
//! - [`config`] and [`cli`]: experiment configuration and the command surface used by the
//!   `fogforge` binary.
//!
//! Runnable walkthroughs for each capability live in `crates/core/examples/`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod nn;
pub mod repr;
pub mod rng;
pub mod sim;
pub mod topology;
pub mod transfer;
pub mod validate;
pub mod workload;

pub use error::{Error, Result};
