//! Explicit per-delay weight matrices and the truncated energy they define.
//!
//! `W[delta][i][j]` couples unit `i` at time `-delta` with unit `j` at time 0.
//! It is the sum of the forward kernel of `i -> j` evaluated at `delta` and
//! the backward kernel of `j -> i` evaluated at `-delta`, where the kernel of
//! a synapse with delay `d` is
//!
//! ```text
//! w_hat(delta) = 0                                 delta == 0
//!              = sum_k u_k * lambda_k^(delta - d)  delta >= d
//!              = -sum_l v_l * mu_l^(-delta)        otherwise
//! ```

use crate::config::ModelConfig;
use crate::error::{DybmError, Result};
use crate::model::sigmoid;
use crate::params::Parameters;
use crate::slice::TimeSlice;

/// Kernel of the synapse `pre -> post` at signed distance `delta`; zero when
/// the pair is not connected.
fn w_hat(params: &Parameters, config: &ModelConfig, pre: usize, post: usize, delta: i64) -> f64 {
    let Some(s) = config.synapse_index(pre, post) else {
        return 0.0;
    };
    if delta == 0 {
        return 0.0;
    }
    let d = config.synapses()[s].delay as i64;
    if delta >= d {
        let exponent = (delta - d) as i32;
        params
            .u(s)
            .iter()
            .zip(config.lambdas())
            .map(|(u, lambda)| u * lambda.powi(exponent))
            .sum()
    } else {
        let exponent = (-delta) as i32;
        params
            .v(s)
            .iter()
            .zip(config.mus())
            .map(|(v, mu)| -v * mu.powi(exponent))
            .sum()
    }
}

/// The three curves of the weight between `pre` at time `-delta` and `post` at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub delta: usize,
    /// Kernel of `pre -> post` at `delta`.
    pub forward: f64,
    /// Kernel of `post -> pre` at `-delta`.
    pub backward: f64,
    pub total: f64,
}

pub fn kernel_point(
    params: &Parameters,
    config: &ModelConfig,
    pre: usize,
    post: usize,
    delta: usize,
) -> KernelPoint {
    let forward = w_hat(params, config, pre, post, delta as i64);
    let backward = w_hat(params, config, post, pre, -(delta as i64));
    KernelPoint {
        delta,
        forward,
        backward,
        total: forward + backward,
    }
}

/// Kernel curves for `delta` in `1..=max_delta`. The pair must be connected.
pub fn kernel_rows(
    params: &Parameters,
    config: &ModelConfig,
    pre: usize,
    post: usize,
    max_delta: usize,
) -> Result<Vec<KernelPoint>> {
    config.require_synapse(pre, post)?;
    Ok((1..=max_delta)
        .map(|delta| kernel_point(params, config, pre, post, delta))
        .collect())
}

/// Weight matrices for delays `1..horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpandedWeights {
    n_units: usize,
    horizon: usize,
    // (horizon - 1) blocks of n_units * n_units, block delta - 1, row-major (pre, post)
    entries: Vec<f64>,
}

impl ExpandedWeights {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    /// `W[delta][pre][post]` for `1 <= delta < horizon`; zero for `delta == 0`.
    pub fn weight(&self, delta: usize, pre: usize, post: usize) -> f64 {
        if delta == 0 {
            return 0.0;
        }
        assert!(delta < self.horizon, "delta {delta} beyond horizon {}", self.horizon);
        let n = self.n_units;
        self.entries[(delta - 1) * n * n + pre * n + post]
    }
}

pub fn expand_weights(params: &Parameters, config: &ModelConfig, horizon: usize) -> Result<ExpandedWeights> {
    if horizon < 2 {
        return Err(DybmError::InvalidArgument(format!(
            "expansion horizon must be at least 2, got {horizon}"
        )));
    }
    let n = config.n_units();
    let mut entries = Vec::with_capacity((horizon - 1) * n * n);
    for delta in 1..horizon {
        for pre in 0..n {
            for post in 0..n {
                entries.push(kernel_point(params, config, pre, post, delta).total);
            }
        }
    }
    Ok(ExpandedWeights {
        n_units: n,
        horizon,
        entries,
    })
}

/// Last `len` slices of `history`, left-padded with zero slices.
pub fn pad_history(history: &[TimeSlice], len: usize, n_units: usize) -> Vec<TimeSlice> {
    let keep = history.len().min(len);
    let mut out = vec![TimeSlice::zeros(n_units); len - keep];
    out.extend_from_slice(&history[history.len() - keep..]);
    out
}

/// `E_j(1)` by the double sum over lags and units. `history` must hold
/// exactly `horizon - 1` slices, oldest first.
pub fn naive_energy(
    expanded: &ExpandedWeights,
    bias: &[f64],
    history: &[TimeSlice],
    unit: usize,
) -> Result<f64> {
    let width = expanded.horizon - 1;
    if history.len() != width {
        return Err(DybmError::InvalidArgument(format!(
            "history holds {} slices, expected {width}",
            history.len()
        )));
    }
    let mut coupling = 0.0;
    for delta in 1..expanded.horizon {
        let slice = &history[width - delta];
        slice.check_len(expanded.n_units)?;
        for pre in 0..expanded.n_units {
            coupling += slice.value(pre) * expanded.weight(delta, pre, unit);
        }
    }
    Ok(-bias[unit] - coupling)
}

pub fn naive_fire_prob(
    expanded: &ExpandedWeights,
    bias: &[f64],
    config: &ModelConfig,
    history: &[TimeSlice],
    unit: usize,
) -> Result<f64> {
    let energy = naive_energy(expanded, bias, history, unit)?;
    Ok(sigmoid(-energy / config.temperature()))
}

/// Smallest horizon whose dropped geometric tail `sum_{delta >= T} r^(delta - D)`
/// is below `tol`, with `r` the largest decay rate and `D` the largest delay.
pub fn truncation_horizon(config: &ModelConfig, tol: f64) -> usize {
    let rate = config
        .lambdas()
        .iter()
        .chain(config.mus())
        .copied()
        .fold(0.0, f64::max);
    let d = config.max_delay();
    let mut t = d.max(2);
    while rate.powi((t - d) as i32) / (1.0 - rate) >= tol {
        t += 1;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Synapse;

    fn pair_config(d_forward: usize, d_backward: Option<usize>) -> ModelConfig {
        let mut syns = vec![Synapse {
            pre: 0,
            post: 1,
            delay: d_forward,
        }];
        if let Some(delay) = d_backward {
            syns.push(Synapse {
                pre: 1,
                post: 0,
                delay,
            });
        }
        ModelConfig::new(2, vec![0.5], vec![0.5], 1.0, syns).unwrap()
    }

    #[test]
    fn ltp_minus_reverse_ltd_at_delay() {
        let c = pair_config(2, Some(3));
        let mut p = Parameters::zeros(&c);
        p.u_mut(0)[0] = 1.0;
        p.v_mut(1)[0] = 1.0;
        let w = expand_weights(&p, &c, 4).unwrap();
        assert_eq!(w.weight(2, 0, 1), 0.75);
    }

    #[test]
    fn ltd_branch_below_delay() {
        let c = pair_config(2, None);
        let mut p = Parameters::zeros(&c);
        p.v_mut(0)[0] = 1.0;
        let w = expand_weights(&p, &c, 3).unwrap();
        assert_eq!(w.weight(1, 0, 1), -2.0);
        // reverse direction only sees the backward kernel of 0 -> 1
        assert_eq!(w.weight(1, 1, 0), -0.5);
    }

    #[test]
    fn zero_params_zero_matrices() {
        let c = ModelConfig::with_defaults(3).unwrap();
        let w = expand_weights(&Parameters::zeros(&c), &c, 10).unwrap();
        assert!(w.entries.iter().all(|&x| x == 0.0));
        assert!(expand_weights(&Parameters::zeros(&c), &c, 1).is_err());
    }

    #[test]
    fn kernel_jumps_at_delay() {
        let c = pair_config(3, Some(2));
        let mut p = Parameters::zeros(&c);
        p.u_mut(0)[0] = 1.5;
        p.v_mut(0)[0] = 0.5;
        p.v_mut(1)[0] = 0.25;
        let rows = kernel_rows(&p, &c, 0, 1, 5).unwrap();
        // delta = d - 1 = 2: -v mu^-2
        assert_eq!(rows[1].forward, -2.0);
        // delta = d: u lambda^0
        assert_eq!(rows[2].forward, 1.5);
        assert_eq!(rows[2].total, 1.5 - 0.25 * 0.125);
        assert!(kernel_rows(&p, &pair_config(2, None), 1, 0, 3).is_err());
    }

    #[test]
    fn zero_history_energy_is_bias() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let mut p = Parameters::zeros(&c);
        p.bias_mut()[1] = 0.8;
        let w = expand_weights(&p, &c, 5).unwrap();
        let h = pad_history(&[], 4, 2);
        assert_eq!(naive_fire_prob(&w, p.bias(), &c, &h, 1).unwrap(), sigmoid(0.8));
        assert!(naive_energy(&w, p.bias(), &h[..3], 1).is_err());
    }

    #[test]
    fn single_spike_at_delay() {
        let c = pair_config(3, None);
        let mut p = Parameters::zeros(&c);
        p.u_mut(0)[0] = 1.0;
        let w = expand_weights(&p, &c, 6).unwrap();
        let mut h = vec![TimeSlice::zeros(2); 5];
        // lag 3 sits at index 5 - 3
        h[2] = TimeSlice::from_values([1, 0]).unwrap();
        assert_eq!(naive_fire_prob(&w, p.bias(), &c, &h, 1).unwrap(), sigmoid(1.0));
    }

    #[test]
    fn horizon_bounds_tail() {
        let c = ModelConfig::dense(1, vec![0.5], vec![0.25], 1.0, 3).unwrap();
        let t = truncation_horizon(&c, 1e-12);
        assert!(0.5f64.powi((t - 3) as i32) / 0.5 < 1e-12);
        assert!(0.5f64.powi((t - 4) as i32) / 0.5 >= 1e-12);
    }

    #[test]
    fn pad_history_keeps_most_recent() {
        let h: Vec<TimeSlice> = (0..5).map(|i| TimeSlice::from_values([i % 2]).unwrap()).collect();
        let p = pad_history(&h, 3, 1);
        assert_eq!(p, h[2..].to_vec());
        let p = pad_history(&h[..1], 3, 1);
        assert_eq!(p[0], TimeSlice::zeros(1));
        assert_eq!(p[2], h[0]);
    }
}
