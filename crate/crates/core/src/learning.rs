//! Exact log-likelihood gradients and gradient-ascent training.
//!
//! With `err_j = (x_j - p_j) / temperature` for the observed slice `x` and
//! firing probabilities `p`, one step contributes
//!
//! * `d_bias[j]   = err_j`
//! * `d_u[i,j,k]  = alpha[i,j,k] * err_j`
//! * `d_v[i,j,l]  = -beta[i,j,l] * err_j - gamma[j,l] * err_i`
//!
//! Every series in a dataset starts from the zero state.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ModelConfig;
use crate::error::{DybmError, Result};
use crate::model::{all_betas, log_sigmoid, sigmoid};
use crate::params::{Gradient, Parameters};
use crate::slice::TimeSlice;
use crate::trace::TraceState;

/// Largest parameter magnitude tolerated before training aborts.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Adds the gradient of `log P(observed | history)` to `grad` and returns
/// that log-probability.
fn accumulate_step(
    params: &Parameters,
    config: &ModelConfig,
    state: &TraceState,
    observed: &TimeSlice,
    grad: &mut Gradient,
) -> Result<f64> {
    observed.check_len(config.n_units())?;
    let n_k = config.n_lambdas();
    let n_l = config.n_mus();
    let tau = config.temperature();
    let betas = all_betas(config, state);

    let mut log_prob = 0.0;
    let mut err = vec![0.0; config.n_units()];
    for j in 0..config.n_units() {
        let z = params.drive_with_betas(config, state, &betas, j) / tau;
        let x = observed.value(j);
        err[j] = (x - sigmoid(z)) / tau;
        log_prob += log_sigmoid(if observed.bit(j) { z } else { -z });
    }

    for (g, e) in grad.d_bias.iter_mut().zip(&err) {
        *g += e;
    }
    for (s, syn) in config.synapses().iter().enumerate() {
        let (ei, ej) = (err[syn.pre], err[syn.post]);
        let d_u = &mut grad.d_u[s * n_k..(s + 1) * n_k];
        for (g, a) in d_u.iter_mut().zip(state.alphas(s)) {
            *g += a * ej;
        }
        let d_v = &mut grad.d_v[s * n_l..(s + 1) * n_l];
        let beta = &betas[s * n_l..(s + 1) * n_l];
        for ((g, b), c) in d_v.iter_mut().zip(beta).zip(state.gammas(syn.post)) {
            *g += -b * ej - c * ei;
        }
    }
    Ok(log_prob)
}

/// Gradient of `log P(observed | history)` where `state` holds the history.
pub fn step_gradient(
    params: &Parameters,
    config: &ModelConfig,
    state: &TraceState,
    observed: &TimeSlice,
) -> Result<Gradient> {
    let mut grad = Gradient::zeros(config);
    accumulate_step(params, config, state, observed, &mut grad)?;
    Ok(grad)
}

fn walk_series(
    params: &Parameters,
    config: &ModelConfig,
    series: &[TimeSlice],
    mut grad: Option<&mut Gradient>,
) -> Result<f64> {
    if series.is_empty() {
        return Err(DybmError::EmptySeries);
    }
    let mut state = TraceState::new(config);
    let mut scratch = Gradient::zeros(config);
    let mut total = 0.0;
    for slice in series {
        let g = match grad.as_deref_mut() {
            Some(g) => g,
            None => &mut scratch,
        };
        total += accumulate_step(params, config, &state, slice, g)?;
        state.advance(config, slice)?;
    }
    Ok(total)
}

/// `sum_t log P(x[t] | x[..t])` starting from the zero state.
pub fn sequence_log_likelihood(
    params: &Parameters,
    config: &ModelConfig,
    series: &[TimeSlice],
) -> Result<f64> {
    if series.is_empty() {
        return Err(DybmError::EmptySeries);
    }
    let mut state = TraceState::new(config);
    let mut total = 0.0;
    for slice in series {
        total += params.cond_prob(config, &state, slice)?.log_prob;
        state.advance(config, slice)?;
    }
    Ok(total)
}

/// Gradient of [`sequence_log_likelihood`].
pub fn sequence_gradient(
    params: &Parameters,
    config: &ModelConfig,
    series: &[TimeSlice],
) -> Result<Gradient> {
    let mut grad = Gradient::zeros(config);
    walk_series(params, config, series, Some(&mut grad))?;
    Ok(grad)
}

/// Log-likelihood and gradient summed over every series of a dataset.
pub fn dataset_gradient(
    params: &Parameters,
    config: &ModelConfig,
    dataset: &[Vec<TimeSlice>],
) -> Result<(f64, Gradient)> {
    let mut grad = Gradient::zeros(config);
    let mut ll = 0.0;
    for series in dataset {
        ll += walk_series(params, config, series, Some(&mut grad))?;
    }
    Ok((ll, grad))
}

pub fn dataset_log_likelihood(
    params: &Parameters,
    config: &ModelConfig,
    dataset: &[Vec<TimeSlice>],
) -> Result<f64> {
    dataset
        .iter()
        .map(|s| sequence_log_likelihood(params, config, s))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainMode {
    /// One update per observed slice, in sequence order.
    Online,
    /// One update per epoch with the gradient summed over the dataset.
    FullBatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainerConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub mode: TrainMode,
    /// Online mode only: when set, the order of series is shuffled each epoch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shuffle_seed: Option<u64>,
}

impl TrainerConfig {
    pub fn full_batch(learning_rate: f64, epochs: usize) -> Self {
        TrainerConfig {
            learning_rate,
            epochs,
            mode: TrainMode::FullBatch,
            shuffle_seed: None,
        }
    }

    pub fn online(learning_rate: f64, epochs: usize) -> Self {
        TrainerConfig {
            learning_rate,
            epochs,
            mode: TrainMode::Online,
            shuffle_seed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(DybmError::config(
                "learning_rate",
                format!("must be a positive finite real, got {}", self.learning_rate),
            ));
        }
        Ok(())
    }
}

/// One metrics record, emitted once per epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Parameter updates applied so far, including this epoch's.
    pub step: usize,
    /// Full batch: dataset log-likelihood before the epoch's update.
    /// Online: sum of the per-step log-probabilities seen during the pass.
    pub log_likelihood: f64,
    pub grad_norm: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainMetrics {
    pub epochs: Vec<EpochRecord>,
    /// Negative log-likelihood of every observed slice, in processing order.
    pub step_nll: Vec<f64>,
    /// Dataset log-likelihood under the returned parameters.
    pub final_log_likelihood: f64,
    pub wall_ms: f64,
}

fn check_dataset(config: &ModelConfig, dataset: &[Vec<TimeSlice>]) -> Result<()> {
    if dataset.is_empty() {
        return Err(DybmError::EmptySeries);
    }
    for series in dataset {
        if series.is_empty() {
            return Err(DybmError::EmptySeries);
        }
        for slice in series {
            slice.check_len(config.n_units())?;
        }
    }
    Ok(())
}

fn guard(params: &Parameters, epoch: usize, step: usize) -> Result<()> {
    let m = params.max_abs();
    if !m.is_finite() || m > DIVERGENCE_LIMIT {
        return Err(DybmError::Divergence {
            epoch,
            step,
            reason: format!("parameter magnitude {m:e} exceeds {DIVERGENCE_LIMIT:e}"),
        });
    }
    Ok(())
}

fn apply(params: &Parameters, grad: &Gradient, eta: f64, epoch: usize, step: usize) -> Result<Parameters> {
    let next = params.sgd_update(grad, eta).map_err(|e| match e {
        DybmError::NonFinite(what) => DybmError::Divergence {
            epoch,
            step,
            reason: format!("non-finite {what}"),
        },
        other => other,
    })?;
    guard(&next, epoch, step)?;
    Ok(next)
}

/// Runs gradient ascent on the log-likelihood of `dataset`.
pub fn train(
    params: &Parameters,
    config: &ModelConfig,
    dataset: &[Vec<TimeSlice>],
    trainer: &TrainerConfig,
) -> Result<(Parameters, TrainMetrics)> {
    train_with(params, config, dataset, trainer, |_| {})
}

/// As [`train`], calling `on_epoch` after every epoch.
pub fn train_with<F>(
    params: &Parameters,
    config: &ModelConfig,
    dataset: &[Vec<TimeSlice>],
    trainer: &TrainerConfig,
    mut on_epoch: F,
) -> Result<(Parameters, TrainMetrics)>
where
    F: FnMut(&EpochRecord),
{
    trainer.validate()?;
    check_dataset(config, dataset)?;
    let eta = trainer.learning_rate;
    let start = Instant::now();
    let mut params = params.clone();
    let mut metrics = TrainMetrics::default();
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut shuffler = trainer.shuffle_seed.map(ChaCha8Rng::seed_from_u64);

    for epoch in 0..trainer.epochs {
        let epoch_start = Instant::now();
        let (ll, norm) = match trainer.mode {
            TrainMode::FullBatch => {
                let mut grad = Gradient::zeros(config);
                let mut ll = 0.0;
                for series in dataset {
                    let mut state = TraceState::new(config);
                    for slice in series {
                        let lp = accumulate_step(&params, config, &state, slice, &mut grad)?;
                        metrics.step_nll.push(-lp);
                        ll += lp;
                        state.advance(config, slice)?;
                    }
                }
                step += 1;
                params = apply(&params, &grad, eta, epoch, step)?;
                (ll, grad.norm())
            }
            TrainMode::Online => {
                if let Some(rng) = shuffler.as_mut() {
                    order.shuffle(rng);
                }
                let mut total = Gradient::zeros(config);
                let mut ll = 0.0;
                for &d in &order {
                    let mut state = TraceState::new(config);
                    for slice in &dataset[d] {
                        let mut grad = Gradient::zeros(config);
                        let lp = accumulate_step(&params, config, &state, slice, &mut grad)?;
                        metrics.step_nll.push(-lp);
                        ll += lp;
                        step += 1;
                        params = apply(&params, &grad, eta, epoch, step)?;
                        total.add_assign(&grad);
                        state.advance(config, slice)?;
                    }
                }
                (ll, total.norm())
            }
        };
        let record = EpochRecord {
            epoch,
            step,
            log_likelihood: ll,
            grad_norm: norm,
            wall_ms: epoch_start.elapsed().as_secs_f64() * 1e3,
        };
        on_epoch(&record);
        metrics.epochs.push(record);
    }

    metrics.final_log_likelihood = dataset_log_likelihood(&params, config, dataset)?;
    metrics.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((params, metrics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slice::series_from_rows;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_params_all_ones_gradient() {
        let c = ModelConfig::with_defaults(3).unwrap();
        let p = Parameters::zeros(&c);
        let st = TraceState::new(&c);
        let g = step_gradient(&p, &c, &st, &TimeSlice::from_values([1, 1, 1]).unwrap()).unwrap();
        assert_eq!(g.d_bias, vec![0.5; 3]);
        assert!(g.d_u.iter().chain(&g.d_v).all(|&x| x == 0.0));
    }

    #[test]
    fn score_has_zero_mean_for_bias() {
        let c = ModelConfig::dense(2, vec![0.5], vec![0.5], 1.3, 2).unwrap();
        let mut p = Parameters::zeros(&c);
        p.bias_mut().copy_from_slice(&[0.4, -1.1]);
        p.u_mut(1)[0] = 0.8;
        let mut st = TraceState::new(&c);
        for row in [[1, 0], [1, 1], [0, 1]] {
            st.advance(&c, &TimeSlice::from_values(row).unwrap()).unwrap();
        }
        for j in 0..2 {
            let pj = p.fire_prob(&c, &st, j).unwrap();
            let mut on = TimeSlice::zeros(2).bits().to_vec();
            on[j] = true;
            let g1 = step_gradient(&p, &c, &st, &TimeSlice::from_bits(on)).unwrap();
            let g0 = step_gradient(&p, &c, &st, &TimeSlice::zeros(2)).unwrap();
            assert!(g1.d_bias[j] > 0.0 && g0.d_bias[j] < 0.0);
            assert_abs_diff_eq!(pj * g1.d_bias[j] + (1.0 - pj) * g0.d_bias[j], 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_params_likelihood_is_bits_times_ln2() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let p = Parameters::zeros(&c);
        let s = series_from_rows([[1, 0], [0, 0], [1, 1], [0, 1], [1, 1]]).unwrap();
        assert_abs_diff_eq!(
            sequence_log_likelihood(&p, &c, &s).unwrap(),
            -10.0 * 2f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_slice_likelihood() {
        let c = ModelConfig::with_defaults(1).unwrap();
        let mut p = Parameters::zeros(&c);
        p.bias_mut()[0] = 3f64.ln();
        let s = series_from_rows([[1]]).unwrap();
        assert_abs_diff_eq!(
            sequence_log_likelihood(&p, &c, &s).unwrap(),
            0.75f64.ln(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn all_zero_series_gradient() {
        let c = ModelConfig::dense(2, vec![0.5], vec![0.5], 2.0, 3).unwrap();
        let p = Parameters::zeros(&c);
        let s = vec![TimeSlice::zeros(2); 7];
        let g = sequence_gradient(&p, &c, &s).unwrap();
        // -L / (2 tau)
        assert_eq!(g.d_bias, vec![-1.75; 2]);
        assert!(g.d_u.iter().chain(&g.d_v).all(|&x| x == 0.0));
    }

    #[test]
    fn single_step_sequence_gradient_matches_step_gradient() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let mut p = Parameters::zeros(&c);
        p.bias_mut()[0] = 0.3;
        let s = series_from_rows([[1, 0]]).unwrap();
        assert_eq!(
            sequence_gradient(&p, &c, &s).unwrap(),
            step_gradient(&p, &c, &TraceState::new(&c), &s[0]).unwrap()
        );
    }

    #[test]
    fn empty_series_rejected() {
        let c = ModelConfig::with_defaults(1).unwrap();
        let p = Parameters::zeros(&c);
        assert!(matches!(
            sequence_log_likelihood(&p, &c, &[]),
            Err(DybmError::EmptySeries)
        ));
        assert!(sequence_gradient(&p, &c, &[]).is_err());
    }

    #[test]
    fn zero_epochs_leave_params_unchanged() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let p = Parameters::zeros(&c);
        let data = vec![series_from_rows([[1, 0], [0, 1]]).unwrap()];
        let (out, m) = train(&p, &c, &data, &TrainerConfig::full_batch(0.1, 0)).unwrap();
        assert_eq!(out, p);
        assert!(m.epochs.is_empty());
    }

    #[test]
    fn online_mode_updates_once_per_slice() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let p = Parameters::zeros(&c);
        let data = vec![
            series_from_rows([[1, 0], [0, 1], [1, 1]]).unwrap(),
            series_from_rows([[0, 0], [1, 0]]).unwrap(),
        ];
        let (out, m) = train(&p, &c, &data, &TrainerConfig::online(0.05, 3)).unwrap();
        assert_eq!(m.epochs.last().unwrap().step, 15);
        assert_eq!(m.step_nll.len(), 15);
        assert_ne!(out, p);
        assert!(m.epochs.iter().all(|e| e.log_likelihood <= 0.0));
    }

    #[test]
    fn online_single_step_is_one_sgd_update() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let p = Parameters::zeros(&c);
        let data = vec![series_from_rows([[1, 0]]).unwrap()];
        let (out, _) = train(&p, &c, &data, &TrainerConfig::online(0.1, 1)).unwrap();
        let g = step_gradient(&p, &c, &TraceState::new(&c), &data[0][0]).unwrap();
        assert_eq!(out, p.sgd_update(&g, 0.1).unwrap());
    }

    #[test]
    fn divergence_guard_reports_epoch_and_step() {
        let c = ModelConfig::with_defaults(1).unwrap();
        let p = Parameters::zeros(&c);
        let data = vec![vec![TimeSlice::from_values([1]).unwrap(); 4]];
        let err = train(&p, &c, &data, &TrainerConfig::full_batch(1e7, 3)).unwrap_err();
        assert!(matches!(err, DybmError::Divergence { epoch: 0, step: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_trainer_and_data() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let p = Parameters::zeros(&c);
        let data = vec![series_from_rows([[1, 0]]).unwrap()];
        assert!(train(&p, &c, &data, &TrainerConfig::full_batch(0.0, 1)).is_err());
        assert!(train(&p, &c, &[], &TrainerConfig::full_batch(0.1, 1)).is_err());
        let wrong = vec![series_from_rows([[1, 0, 1]]).unwrap()];
        assert!(train(&p, &c, &wrong, &TrainerConfig::full_batch(0.1, 1)).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let c = ModelConfig::dense(2, vec![0.5, 0.8], vec![0.3], 1.0, 3).unwrap();
        let p = Parameters::zeros(&c);
        let data = vec![
            series_from_rows([[1, 0], [0, 1], [1, 1], [0, 0], [1, 0]]).unwrap(),
            series_from_rows([[0, 1], [1, 0]]).unwrap(),
        ];
        let mut trainer = TrainerConfig::online(0.1, 5);
        trainer.shuffle_seed = Some(7);
        let (a, ma) = train(&p, &c, &data, &trainer).unwrap();
        let (b, mb) = train(&p, &c, &data, &trainer).unwrap();
        assert_eq!(a, b);
        assert_eq!(ma.step_nll, mb.step_nll);
    }
}
