use crate::config::ModelConfig;
use crate::slice::TimeSlice;
use crate::trace::{DelayQueue, TraceState};

/// Traces after `history` (oldest first), each summed term by term from its
/// defining series with explicit powers. Slices before the history count as zero.
pub fn traces_from_scratch(config: &ModelConfig, history: &[TimeSlice]) -> TraceState {
    let len = history.len();
    // x_i at lag >= 1; zero before the recorded history
    let at_lag = |unit: usize, lag: usize| -> f64 {
        if lag <= len {
            history[len - lag].value(unit)
        } else {
            0.0
        }
    };

    let mut alpha = Vec::with_capacity(config.n_synapses() * config.n_lambdas());
    let mut queues = Vec::with_capacity(config.n_synapses());
    for syn in config.synapses() {
        for &lambda in config.lambdas() {
            let mut sum = 0.0;
            for lag in syn.delay..=len {
                sum += lambda.powi((lag - syn.delay) as i32) * at_lag(syn.pre, lag);
            }
            alpha.push(sum);
        }
        let bits = (1..syn.delay).map(|lag| at_lag(syn.pre, lag) == 1.0).collect();
        queues.push(DelayQueue::from_lags(bits));
    }

    let mut gamma = Vec::with_capacity(config.n_units() * config.n_mus());
    for unit in 0..config.n_units() {
        for &mu in config.mus() {
            let mut sum = 0.0;
            for lag in 1..=len {
                sum += mu.powi(lag as i32) * at_lag(unit, lag);
            }
            gamma.push(sum);
        }
    }

    TraceState::from_parts(config, alpha, gamma, queues, len as u64)
        .expect("shapes follow the configuration")
}
