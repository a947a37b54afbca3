//! Eligibility traces and axonal delay queues.
//!
//! For a synapse `pre -> post` with delay `d`, the state after absorbing a
//! history `x[-1], x[-2], ...` (zero before the first observed slice) is
//!
//! * `alpha[k] = sum_{lag >= d} lambda_k^(lag - d) * x_pre[-lag]`
//! * the queue holds `x_pre[-1] .. x_pre[-(d-1)]`, front = lag 1
//!
//! and per unit `i`, `gamma[l] = sum_{lag >= 1} mu_l^lag * x_i[-lag]`.
//! `beta` is never stored; it is summed from the queue on demand.

use std::collections::VecDeque;

use crate::config::ModelConfig;
use crate::error::{DybmError, Result};
use crate::slice::TimeSlice;

/// Fixed-length FIFO of past spikes of one pre-synaptic unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayQueue {
    bits: VecDeque<bool>,
}

impl DelayQueue {
    /// A queue of `len` zeros.
    pub fn zeros(len: usize) -> Self {
        DelayQueue {
            bits: std::iter::repeat_n(false, len).collect(),
        }
    }

    /// Builds a queue from bits ordered lag 1 first.
    pub fn from_lags(bits: Vec<bool>) -> Self {
        DelayQueue { bits: bits.into() }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Value at `lag` (1-based). Panics if `lag` is 0 or beyond the queue.
    pub fn lag(&self, lag: usize) -> bool {
        assert!(lag >= 1, "lags start at 1");
        self.bits[lag - 1]
    }

    /// Oldest entry (lag `len`).
    pub fn back(&self) -> Option<bool> {
        self.bits.back().copied()
    }

    /// Pushes the newest value at lag 1 and returns the value that leaves
    /// the queue. A zero-length queue passes `newest` straight through.
    pub fn push(&mut self, newest: bool) -> bool {
        match self.bits.pop_back() {
            Some(evicted) => {
                self.bits.push_front(newest);
                evicted
            }
            None => newest,
        }
    }

    /// Bits ordered lag 1 first.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }
}

/// Recursion used for `alpha` when absorbing a slice.
///
/// `Definition` is the only correct choice; `ScaledSum` applies the decay to
/// the incoming term as well, and exists so the validation suite can show that
/// it detects the discrepancy.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaRecursion {
    #[default]
    Definition,
    ScaledSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceState {
    // synapse-major, K entries per synapse
    alpha: Vec<f64>,
    // unit-major, L entries per unit
    gamma: Vec<f64>,
    queues: Vec<DelayQueue>,
    step_count: u64,
    n_lambdas: usize,
    n_mus: usize,
}

impl TraceState {
    /// State equivalent to an infinite all-zero history.
    pub fn new(config: &ModelConfig) -> Self {
        TraceState {
            alpha: vec![0.0; config.n_synapses() * config.n_lambdas()],
            gamma: vec![0.0; config.n_units() * config.n_mus()],
            queues: config
                .synapses()
                .iter()
                .map(|s| DelayQueue::zeros(s.delay - 1))
                .collect(),
            step_count: 0,
            n_lambdas: config.n_lambdas(),
            n_mus: config.n_mus(),
        }
    }

    /// Assembles a state from stored parts, checking shapes against `config`.
    pub fn from_parts(
        config: &ModelConfig,
        alpha: Vec<f64>,
        gamma: Vec<f64>,
        queues: Vec<DelayQueue>,
        step_count: u64,
    ) -> Result<Self> {
        let m = config.n_synapses();
        if alpha.len() != m * config.n_lambdas() {
            return Err(DybmError::ShapeMismatch(format!(
                "alpha has {} entries, expected {}",
                alpha.len(),
                m * config.n_lambdas()
            )));
        }
        if gamma.len() != config.n_units() * config.n_mus() {
            return Err(DybmError::ShapeMismatch(format!(
                "gamma has {} entries, expected {}",
                gamma.len(),
                config.n_units() * config.n_mus()
            )));
        }
        if queues.len() != m {
            return Err(DybmError::ShapeMismatch(format!(
                "{} queues for {m} synapses",
                queues.len()
            )));
        }
        for (q, syn) in queues.iter().zip(config.synapses()) {
            if q.len() != syn.delay - 1 {
                return Err(DybmError::ShapeMismatch(format!(
                    "queue ({}, {}) holds {} bits, expected {}",
                    syn.pre,
                    syn.post,
                    q.len(),
                    syn.delay - 1
                )));
            }
        }
        if let Some(bad) = alpha.iter().chain(&gamma).find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(DybmError::NonFinite(format!(
                "eligibility traces must be finite and non-negative, found {bad}"
            )));
        }
        Ok(TraceState {
            alpha,
            gamma,
            queues,
            step_count,
            n_lambdas: config.n_lambdas(),
            n_mus: config.n_mus(),
        })
    }

    /// Absorbs the next observed slice.
    pub fn advance(&mut self, config: &ModelConfig, slice: &TimeSlice) -> Result<()> {
        self.advance_with(config, slice, AlphaRecursion::Definition)
    }

    #[doc(hidden)]
    pub fn advance_with(
        &mut self,
        config: &ModelConfig,
        slice: &TimeSlice,
        recursion: AlphaRecursion,
    ) -> Result<()> {
        slice.check_len(config.n_units())?;
        let n_k = config.n_lambdas();
        for (s, syn) in config.synapses().iter().enumerate() {
            // value that has just reached lag `delay`
            let arrived = self.queues[s].push(slice.bit(syn.pre));
            let arrived = if arrived { 1.0 } else { 0.0 };
            let alpha = &mut self.alpha[s * n_k..(s + 1) * n_k];
            for (a, &lambda) in alpha.iter_mut().zip(config.lambdas()) {
                *a = match recursion {
                    AlphaRecursion::Definition => lambda * *a + arrived,
                    AlphaRecursion::ScaledSum => lambda * (*a + arrived),
                };
            }
        }
        let n_l = config.n_mus();
        for i in 0..config.n_units() {
            let x = slice.value(i);
            let gamma = &mut self.gamma[i * n_l..(i + 1) * n_l];
            for (g, &mu) in gamma.iter_mut().zip(config.mus()) {
                *g = mu * (*g + x);
            }
        }
        self.step_count += 1;
        Ok(())
    }

    pub fn alpha(&self, synapse: usize, k: usize) -> f64 {
        self.alpha[synapse * self.n_lambdas + k]
    }

    /// The `K` alpha traces of one synapse.
    pub fn alphas(&self, synapse: usize) -> &[f64] {
        let n_k = self.n_lambdas;
        &self.alpha[synapse * n_k..(synapse + 1) * n_k]
    }

    /// The `L` gamma traces of one unit.
    pub fn gammas(&self, unit: usize) -> &[f64] {
        let n_l = self.n_mus;
        &self.gamma[unit * n_l..(unit + 1) * n_l]
    }

    pub fn gamma(&self, unit: usize, l: usize) -> f64 {
        self.gamma[unit * self.n_mus + l]
    }

    pub fn queue(&self, synapse: usize) -> &DelayQueue {
        &self.queues[synapse]
    }

    pub fn queues(&self) -> &[DelayQueue] {
        &self.queues
    }

    pub fn alpha_flat(&self) -> &[f64] {
        &self.alpha
    }

    pub fn gamma_flat(&self) -> &[f64] {
        &self.gamma
    }

    /// Number of slices absorbed since the zero state.
    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// `beta` for the synapse `pre -> post` and decay rate `mus[l]`.
    pub fn beta(&self, config: &ModelConfig, pre: usize, post: usize, l: usize) -> Result<f64> {
        let s = config.require_synapse(pre, post)?;
        if l >= config.n_mus() {
            return Err(DybmError::InvalidArgument(format!(
                "mu index {l} out of range for {} rates",
                config.n_mus()
            )));
        }
        Ok(beta_from_queue(&self.queues[s], config.mus()[l]))
    }

    /// `beta` for every rate of synapse `synapse`, written into `out`.
    pub fn betas_into(&self, config: &ModelConfig, synapse: usize, out: &mut [f64]) {
        let q = &self.queues[synapse];
        for (b, &mu) in out.iter_mut().zip(config.mus()) {
            *b = beta_from_queue(q, mu);
        }
    }

    /// Stored sizes, counted from the actual buffers.
    pub fn footprint(&self) -> TraceFootprint {
        TraceFootprint {
            trace_reals: self.alpha.len() + self.gamma.len(),
            queue_bits: self.queues.iter().map(DelayQueue::len).sum(),
        }
    }
}

/// Sum over the queue of `mu^(-lag)` times the bit at that lag.
fn beta_from_queue(queue: &DelayQueue, mu: f64) -> f64 {
    let growth = 1.0 / mu;
    let mut coeff = 1.0;
    let mut sum = 0.0;
    for bit in queue.iter() {
        coeff *= growth;
        if bit {
            sum += coeff;
        }
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceFootprint {
    pub trace_reals: usize,
    pub queue_bits: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Synapse;
    use approx::assert_abs_diff_eq;

    fn single(delay: usize, lambda: f64, mu: f64) -> ModelConfig {
        ModelConfig::new(
            1,
            vec![lambda],
            vec![mu],
            1.0,
            vec![Synapse {
                pre: 0,
                post: 0,
                delay,
            }],
        )
        .unwrap()
    }

    fn feed(config: &ModelConfig, values: &[u8]) -> TraceState {
        let mut st = TraceState::new(config);
        for &v in values {
            st.advance(config, &TimeSlice::from_values([v]).unwrap()).unwrap();
        }
        st
    }

    #[test]
    fn fresh_state_is_zero_padded() {
        let c = single(3, 0.5, 0.5);
        let st = TraceState::new(&c);
        assert_eq!(st.alpha(0, 0), 0.0);
        assert_eq!(st.gamma(0, 0), 0.0);
        assert_eq!(st.queue(0).iter().collect::<Vec<_>>(), vec![false, false]);
        assert_eq!(st.beta(&c, 0, 0, 0).unwrap(), 0.0);
        assert_eq!(st.step_count(), 0);
    }

    #[test]
    fn unit_delays_have_empty_queues() {
        let c = ModelConfig::dense(2, vec![0.5], vec![0.5], 1.0, 1).unwrap();
        let st = TraceState::new(&c);
        assert!(st.queues().iter().all(DelayQueue::is_empty));
    }

    #[test]
    fn one_spike_then_three_zeros() {
        // history x[-4] = 1: alpha = 0.5^(4-3), gamma = 0.5^4
        let c = single(3, 0.5, 0.5);
        let st = feed(&c, &[1, 0, 0, 0]);
        assert_abs_diff_eq!(st.alpha(0, 0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(st.gamma(0, 0), 0.0625, epsilon = 1e-15);
        assert_eq!(st.queue(0).iter().collect::<Vec<_>>(), vec![false, false]);
        assert_eq!(st.beta(&c, 0, 0, 0).unwrap(), 0.0);
        assert_eq!(st.step_count(), 4);
    }

    #[test]
    fn unit_delay_spike_enters_alpha_undecayed() {
        let c = single(1, 0.5, 0.5);
        let st = feed(&c, &[1]);
        assert_eq!(st.alpha(0, 0), 1.0);
    }

    #[test]
    fn zero_slice_with_zero_queue_is_pure_decay() {
        let c = single(2, 0.3, 0.7);
        let mut st = feed(&c, &[1, 1, 0]);
        let (a, g) = (st.alpha(0, 0), st.gamma(0, 0));
        st.advance(&c, &TimeSlice::zeros(1)).unwrap();
        assert_eq!(st.alpha(0, 0), 0.3 * a);
        assert_eq!(st.gamma(0, 0), 0.7 * g);
    }

    #[test]
    fn beta_uses_growing_coefficients() {
        let c = single(3, 0.5, 0.5);
        let st = feed(&c, &[1, 1]);
        // lags 1 and 2 both set: 2 + 4
        assert_eq!(st.beta(&c, 0, 0, 0).unwrap(), 6.0);
    }

    #[test]
    fn beta_rejects_unconnected_pair() {
        let c = ModelConfig::new(
            2,
            vec![0.5],
            vec![0.5],
            1.0,
            vec![Synapse {
                pre: 0,
                post: 1,
                delay: 2,
            }],
        )
        .unwrap();
        let st = TraceState::new(&c);
        assert!(matches!(
            st.beta(&c, 1, 0, 0),
            Err(DybmError::UnconnectedPair { pre: 1, post: 0 })
        ));
    }

    #[test]
    fn advance_rejects_wrong_length() {
        let c = single(2, 0.5, 0.5);
        let mut st = TraceState::new(&c);
        assert!(st.advance(&c, &TimeSlice::zeros(2)).is_err());
        assert_eq!(st.step_count(), 0);
    }

    #[test]
    fn scaled_sum_recursion_differs() {
        let c = single(1, 0.5, 0.5);
        let mut st = TraceState::new(&c);
        st.advance_with(&c, &TimeSlice::from_values([1]).unwrap(), AlphaRecursion::ScaledSum)
            .unwrap();
        assert_eq!(st.alpha(0, 0), 0.5);
    }

    #[test]
    fn queue_push_evicts_oldest() {
        let mut q = DelayQueue::zeros(2);
        assert!(!q.push(true));
        assert!(!q.push(false));
        assert!(q.push(false));
        let mut empty = DelayQueue::zeros(0);
        assert!(empty.push(true));
    }

    #[test]
    fn footprint_counts() {
        let c = ModelConfig::new(
            3,
            vec![0.5, 0.7],
            vec![0.25, 0.5, 0.6],
            1.0,
            vec![
                Synapse { pre: 0, post: 1, delay: 4 },
                Synapse { pre: 2, post: 2, delay: 1 },
            ],
        )
        .unwrap();
        let fp = TraceState::new(&c).footprint();
        assert_eq!(fp.trace_reals, 2 * 2 + 3 * 3);
        assert_eq!(fp.queue_bits, 3);
    }
}
