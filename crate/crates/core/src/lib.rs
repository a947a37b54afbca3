//! Dynamic Boltzmann machine for multi-dimensional binary time series.
//!
//! The model keeps, per synapse, eligibility traces and a FIFO of recent
//! spikes, so that the exact gradient of the log-likelihood of the next
//! slice is available in time linear in the number of synapses.

#![allow(clippy::needless_range_loop)]

pub mod bench;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod generator;
pub mod io;
pub mod json;
pub mod learning;
pub mod model;
pub mod oracle;
pub mod params;
pub mod slice;
pub mod trace;

pub use checkpoint::Checkpoint;
pub use config::{ModelConfig, Synapse};
pub use error::{DybmError, Result};
pub use generator::{eval_prediction, rollout, rollout_from, PredictionMetrics, RolloutConfig, RolloutMode};
pub use learning::{
    sequence_gradient, sequence_log_likelihood, step_gradient, train, train_with, EpochRecord,
    TrainMetrics, TrainMode, TrainerConfig,
};
pub use model::CondProb;
pub use params::{Gradient, Parameters};
pub use slice::TimeSlice;
pub use trace::{DelayQueue, TraceState};
