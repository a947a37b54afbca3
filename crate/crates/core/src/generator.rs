//! Generating series from a trained model and scoring next-step predictions.
//!
//! Random draws come from ChaCha8 seeded with the rollout seed. Generated
//! step `t` (0-based, counted after the primer) uses its own stream `t`,
//! and within a step one uniform `f64` is drawn per unit in ascending unit
//! order; the unit fires when its draw is below its firing probability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{DybmError, Result};
use crate::params::Parameters;
use crate::slice::TimeSlice;
use crate::trace::TraceState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RolloutMode {
    /// Bernoulli draw per unit.
    Sample,
    /// Fire exactly when the firing probability exceeds 0.5; ties give 0.
    Argmax,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutConfig {
    pub horizon: usize,
    pub mode: RolloutMode,
    /// Ignored in argmax mode.
    pub seed: u64,
    /// Slices absorbed before generation starts.
    pub primer: Vec<TimeSlice>,
}

impl RolloutConfig {
    pub fn argmax(horizon: usize) -> Self {
        RolloutConfig {
            horizon,
            mode: RolloutMode::Argmax,
            seed: 0,
            primer: Vec::new(),
        }
    }

    pub fn sample(horizon: usize, seed: u64) -> Self {
        RolloutConfig {
            horizon,
            mode: RolloutMode::Sample,
            seed,
            primer: Vec::new(),
        }
    }

    pub fn with_primer(mut self, primer: Vec<TimeSlice>) -> Self {
        self.primer = primer;
        self
    }
}

/// Generator for generated step `step` under `seed`.
pub fn step_rng(seed: u64, step: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step);
    rng
}

/// Draws the next slice; each unit fires independently with its own probability.
pub fn sample_step<R: Rng + ?Sized>(
    params: &Parameters,
    config: &ModelConfig,
    state: &TraceState,
    rng: &mut R,
) -> TimeSlice {
    let bits = params
        .fire_probs(config, state)
        .into_iter()
        .map(|p| rng.random::<f64>() < p)
        .collect();
    TimeSlice::from_bits(bits)
}

/// Most probable next slice. Decided on the sign of the logit so that a
/// probability of exactly one half always predicts 0.
pub fn argmax_step(params: &Parameters, config: &ModelConfig, state: &TraceState) -> TimeSlice {
    TimeSlice::from_bits(params.logits(config, state).into_iter().map(|z| z > 0.0).collect())
}

/// Generates `horizon` slices starting from the zero state.
pub fn rollout(params: &Parameters, config: &ModelConfig, cfg: &RolloutConfig) -> Result<Vec<TimeSlice>> {
    rollout_from(params, config, TraceState::new(config), cfg)
}

/// Generates `horizon` slices starting from `state`.
pub fn rollout_from(
    params: &Parameters,
    config: &ModelConfig,
    mut state: TraceState,
    cfg: &RolloutConfig,
) -> Result<Vec<TimeSlice>> {
    if cfg.horizon == 0 {
        return Err(DybmError::InvalidArgument("rollout horizon must be at least 1".into()));
    }
    for slice in &cfg.primer {
        state.advance(config, slice)?;
    }
    let mut out = Vec::with_capacity(cfg.horizon);
    for t in 0..cfg.horizon {
        let next = match cfg.mode {
            RolloutMode::Sample => sample_step(params, config, &state, &mut step_rng(cfg.seed, t as u64)),
            RolloutMode::Argmax => argmax_step(params, config, &state),
        };
        state.advance(config, &next)?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionMetrics {
    pub log_likelihood: f64,
    pub nll_per_bit: f64,
    /// Fraction of bits matched by the argmax prediction.
    pub accuracy: f64,
}

/// Walks `series` from the zero state, scoring each slice before absorbing it.
pub fn eval_prediction(params: &Parameters, config: &ModelConfig, series: &[TimeSlice]) -> Result<PredictionMetrics> {
    if series.is_empty() {
        return Err(DybmError::EmptySeries);
    }
    let mut state = TraceState::new(config);
    let mut ll = 0.0;
    let mut hits = 0usize;
    for slice in series {
        ll += params.cond_prob(config, &state, slice)?.log_prob;
        let predicted = argmax_step(params, config, &state);
        hits += predicted
            .bits()
            .iter()
            .zip(slice.bits())
            .filter(|(a, b)| a == b)
            .count();
        state.advance(config, slice)?;
    }
    let bits = (series.len() * config.n_units()) as f64;
    Ok(PredictionMetrics {
        log_likelihood: ll,
        nll_per_bit: -ll / bits,
        accuracy: hits as f64 / bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::series_from_rows;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_params_argmax_breaks_ties_to_zero() {
        let c = ModelConfig::with_defaults(3).unwrap();
        let out = rollout(&Parameters::zeros(&c), &c, &RolloutConfig::argmax(5)).unwrap();
        assert_eq!(out, vec![TimeSlice::zeros(3); 5]);
    }

    #[test]
    fn horizon_zero_rejected() {
        let c = ModelConfig::with_defaults(1).unwrap();
        assert!(rollout(&Parameters::zeros(&c), &c, &RolloutConfig::argmax(0)).is_err());
    }

    #[test]
    fn sampling_is_seeded() {
        let c = ModelConfig::with_defaults(4).unwrap();
        let p = Parameters::zeros(&c);
        let a = rollout(&p, &c, &RolloutConfig::sample(50, 9)).unwrap();
        let b = rollout(&p, &c, &RolloutConfig::sample(50, 9)).unwrap();
        let other = rollout(&p, &c, &RolloutConfig::sample(50, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
        let st = TraceState::new(&c);
        assert_eq!(
            sample_step(&p, &c, &st, &mut step_rng(3, 1)),
            sample_step(&p, &c, &st, &mut step_rng(3, 1))
        );
    }

    #[test]
    fn fair_coin_frequency() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let p = Parameters::zeros(&c);
        let st = TraceState::new(&c);
        let mut rng = step_rng(42, 0);
        let mut ones = [0usize; 2];
        for _ in 0..10_000 {
            let s = sample_step(&p, &c, &st, &mut rng);
            for j in 0..2 {
                ones[j] += s.bit(j) as usize;
            }
        }
        for n in ones {
            let mean = n as f64 / 1e4;
            assert!((mean - 0.5).abs() < 0.02, "{mean}");
        }
    }

    #[test]
    fn saturated_bias_always_fires() {
        let c = ModelConfig::with_defaults(1).unwrap();
        let mut p = Parameters::zeros(&c);
        p.bias_mut()[0] = 100.0;
        let out = rollout(&p, &c, &RolloutConfig::sample(500, 1)).unwrap();
        assert!(out.iter().all(|s| s.bit(0)));
    }

    #[test]
    fn zero_params_prediction_metrics() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let s = series_from_rows([[1, 0], [0, 0], [1, 1]]).unwrap();
        let m = eval_prediction(&Parameters::zeros(&c), &c, &s).unwrap();
        assert_abs_diff_eq!(m.nll_per_bit, 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.accuracy, 3.0 / 6.0, epsilon = 1e-15);
        assert!(eval_prediction(&Parameters::zeros(&c), &c, &[]).is_err());
    }

    #[test]
    fn deterministic_model_predicts_own_rollout() {
        // unit 0 copies the inverse of its last value: 0,1,0,1,...
        let c = ModelConfig::dense(1, vec![0.5], vec![0.5], 1.0, 2).unwrap();
        let mut p = Parameters::zeros(&c);
        p.bias_mut()[0] = 5.0;
        p.v_mut(0)[0] = 5.0;
        let out = rollout(&p, &c, &RolloutConfig::argmax(12)).unwrap();
        let m = eval_prediction(&p, &c, &out).unwrap();
        assert_eq!(m.accuracy, 1.0);
    }

    #[test]
    fn primer_is_absorbed_not_emitted() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let p = Parameters::zeros(&c);
        let primer = series_from_rows([[1, 1], [0, 1]]).unwrap();
        let out = rollout(&p, &c, &RolloutConfig::argmax(3).with_primer(primer)).unwrap();
        assert_eq!(out.len(), 3);
    }
}
