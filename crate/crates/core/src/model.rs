//! Per-unit energies and conditional firing probabilities.
//!
//! Given the traces of the history, the units at the next step are
//! conditionally independent. Unit `j` has energy `E_j(x) = -drive_j * x`
//! where
//!
//! ```text
//! drive_j = b_j + sum_{i -> j} ( sum_k u[i,j,k] alpha[i,j,k] - sum_l v[i,j,l] beta[i,j,l] )
//!               - sum_{j -> i} sum_l v[j,i,l] gamma[i,l]
//! ```
//!
//! and fires with probability `sigmoid(drive_j / temperature)`.

use crate::config::ModelConfig;
use crate::error::Result;
use crate::params::Parameters;
use crate::slice::TimeSlice;
use crate::trace::TraceState;

/// Logistic function, branching on sign so neither tail overflows.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(sigmoid(z))` without forming the probability.
pub fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Joint probability of one slice given the history, in both linear and log form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondProb {
    pub prob: f64,
    pub log_prob: f64,
}

/// `beta` for every synapse and rate, synapse-major.
pub(crate) fn all_betas(config: &ModelConfig, state: &TraceState) -> Vec<f64> {
    let n_l = config.n_mus();
    let mut betas = vec![0.0; config.n_synapses() * n_l];
    for s in 0..config.n_synapses() {
        state.betas_into(config, s, &mut betas[s * n_l..(s + 1) * n_l]);
    }
    betas
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Parameters {
    pub(crate) fn drive_with_betas(
        &self,
        config: &ModelConfig,
        state: &TraceState,
        betas: &[f64],
        unit: usize,
    ) -> f64 {
        let n_l = config.n_mus();
        let mut drive = self.bias()[unit];
        for &s in config.incoming(unit) {
            drive += dot(self.u(s), state.alphas(s));
            drive -= dot(self.v(s), &betas[s * n_l..(s + 1) * n_l]);
        }
        for &s in config.outgoing(unit) {
            let post = config.synapses()[s].post;
            drive -= dot(self.v(s), state.gammas(post));
        }
        drive
    }

    /// Temperature-scaled log-odds of every unit firing next.
    pub fn logits(&self, config: &ModelConfig, state: &TraceState) -> Vec<f64> {
        let betas = all_betas(config, state);
        let tau = config.temperature();
        (0..config.n_units())
            .map(|j| self.drive_with_betas(config, state, &betas, j) / tau)
            .collect()
    }

    /// Energy of unit `unit` taking value `value` given the history in `state`.
    /// Always zero for `value == false`.
    pub fn unit_energy(
        &self,
        config: &ModelConfig,
        state: &TraceState,
        unit: usize,
        value: bool,
    ) -> Result<f64> {
        config.check_unit(unit)?;
        if !value {
            return Ok(0.0);
        }
        let n_l = config.n_mus();
        let mut betas = vec![0.0; n_l];
        let mut drive = self.bias()[unit];
        for &s in config.incoming(unit) {
            state.betas_into(config, s, &mut betas);
            drive += dot(self.u(s), state.alphas(s));
            drive -= dot(self.v(s), &betas);
        }
        for &s in config.outgoing(unit) {
            let post = config.synapses()[s].post;
            drive -= dot(self.v(s), state.gammas(post));
        }
        Ok(-drive)
    }

    /// Probability that `unit` fires at the next step.
    pub fn fire_prob(&self, config: &ModelConfig, state: &TraceState, unit: usize) -> Result<f64> {
        let energy = self.unit_energy(config, state, unit, true)?;
        Ok(sigmoid(-energy / config.temperature()))
    }

    pub fn fire_probs(&self, config: &ModelConfig, state: &TraceState) -> Vec<f64> {
        self.logits(config, state).into_iter().map(sigmoid).collect()
    }

    /// Probability of the whole slice given the history.
    pub fn cond_prob(
        &self,
        config: &ModelConfig,
        state: &TraceState,
        slice: &TimeSlice,
    ) -> Result<CondProb> {
        slice.check_len(config.n_units())?;
        let logits = self.logits(config, state);
        let mut prob = 1.0;
        let mut log_prob = 0.0;
        for (j, &z) in logits.iter().enumerate() {
            let z = if slice.bit(j) { z } else { -z };
            prob *= sigmoid(z);
            log_prob += log_sigmoid(z);
        }
        Ok(CondProb { prob, log_prob })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Synapse;
    use approx::assert_abs_diff_eq;

    fn chain_config(tau: f64) -> ModelConfig {
        ModelConfig::new(
            2,
            vec![0.5],
            vec![0.5],
            tau,
            vec![Synapse {
                pre: 0,
                post: 1,
                delay: 1,
            }],
        )
        .unwrap()
    }

    #[test]
    fn sigmoid_is_stable_in_both_tails() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert!(sigmoid(-700.0) > 0.0);
        assert_abs_diff_eq!(log_sigmoid(-1000.0), -1000.0, epsilon = 1e-12);
        assert_abs_diff_eq!(log_sigmoid(1000.0), 0.0, epsilon = 1e-300);
        assert_abs_diff_eq!(log_sigmoid(0.3), sigmoid(0.3).ln(), epsilon = 1e-15);
        assert!(sigmoid(f64::MAX).is_finite() && sigmoid(-f64::MAX).is_finite());
    }

    #[test]
    fn zero_value_has_zero_energy() {
        let c = chain_config(1.0);
        let mut p = Parameters::zeros(&c);
        p.bias_mut()[1] = 3.0;
        let st = TraceState::new(&c);
        assert_eq!(p.unit_energy(&c, &st, 1, false).unwrap(), 0.0);
        assert_eq!(Parameters::zeros(&c).unit_energy(&c, &st, 1, true).unwrap(), 0.0);
    }

    #[test]
    fn energy_hand_substitution() {
        // b = 2, u = 1, alpha = 0.5 (one spike two steps back, lambda = 0.5)
        let c = chain_config(1.0);
        let mut p = Parameters::zeros(&c);
        p.bias_mut()[1] = 2.0;
        p.u_mut(0)[0] = 1.0;
        let mut st = TraceState::new(&c);
        st.advance(&c, &TimeSlice::from_values([1, 0]).unwrap()).unwrap();
        st.advance(&c, &TimeSlice::from_values([0, 0]).unwrap()).unwrap();
        assert_eq!(st.alpha(0, 0), 0.5);
        assert_eq!(p.unit_energy(&c, &st, 1, true).unwrap(), -2.5);
    }

    #[test]
    fn fire_prob_reference_values() {
        let c = chain_config(1.0);
        let st = TraceState::new(&c);
        let mut p = Parameters::zeros(&c);
        assert_eq!(p.fire_prob(&c, &st, 0).unwrap(), 0.5);
        p.bias_mut()[0] = 3f64.ln();
        assert_abs_diff_eq!(p.fire_prob(&c, &st, 0).unwrap(), 0.75, epsilon = 1e-15);

        let hot = chain_config(2.0);
        let mut p = Parameters::zeros(&hot);
        p.bias_mut()[0] = 1.0;
        // sigmoid(0.5)
        assert_abs_diff_eq!(
            p.fire_prob(&hot, &TraceState::new(&hot), 0).unwrap(),
            0.622_459_331_201_854_6,
            epsilon = 1e-15
        );
    }

    #[test]
    fn cond_prob_factorizes() {
        let c = ModelConfig::with_defaults(3).unwrap();
        let p = Parameters::zeros(&c);
        let st = TraceState::new(&c);
        let cp = p.cond_prob(&c, &st, &TimeSlice::from_values([1, 0, 1]).unwrap()).unwrap();
        assert_eq!(cp.prob, 0.125);
        assert_abs_diff_eq!(cp.log_prob, 0.125f64.ln(), epsilon = 1e-15);

        let one = ModelConfig::with_defaults(1).unwrap();
        let mut p = Parameters::zeros(&one);
        p.bias_mut()[0] = 3f64.ln();
        let st = TraceState::new(&one);
        let off = p.cond_prob(&one, &st, &TimeSlice::zeros(1)).unwrap();
        let on = p.cond_prob(&one, &st, &TimeSlice::from_values([1]).unwrap()).unwrap();
        assert_abs_diff_eq!(off.prob, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(off.prob + on.prob, 1.0, epsilon = 1e-15);
        assert!(p.cond_prob(&one, &st, &TimeSlice::zeros(2)).is_err());
    }

    #[test]
    fn gamma_term_uses_outgoing_synapse() {
        // v[0 -> 1] = 1 lowers unit 0's drive by gamma of unit 1
        let c = chain_config(1.0);
        let mut p = Parameters::zeros(&c);
        p.v_mut(0)[0] = 1.0;
        let mut st = TraceState::new(&c);
        st.advance(&c, &TimeSlice::from_values([0, 1]).unwrap()).unwrap();
        assert_eq!(st.gamma(1, 0), 0.5);
        assert_eq!(p.unit_energy(&c, &st, 0, true).unwrap(), 0.5);
        assert_eq!(p.unit_energy(&c, &st, 1, true).unwrap(), 0.0);
    }

    #[test]
    fn logits_agree_with_unit_energy() {
        let c = ModelConfig::dense(2, vec![0.5, 0.3], vec![0.6, 0.4], 1.5, 3).unwrap();
        let mut p = Parameters::zeros(&c);
        for i in 0..p.n_coords() {
            *p.coord_mut(i) = (i as f64 * 0.37).sin();
        }
        let mut st = TraceState::new(&c);
        for row in [[1, 0], [1, 1], [0, 1], [1, 0]] {
            st.advance(&c, &TimeSlice::from_values(row).unwrap()).unwrap();
        }
        let logits = p.logits(&c, &st);
        for j in 0..2 {
            let e = p.unit_energy(&c, &st, j, true).unwrap();
            assert_abs_diff_eq!(logits[j], -e / 1.5, epsilon = 1e-14);
        }
    }
}
