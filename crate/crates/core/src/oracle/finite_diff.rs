use crate::config::ModelConfig;
use crate::error::{DybmError, Result};
use crate::learning::sequence_log_likelihood;
use crate::params::{Gradient, Parameters};
use crate::slice::TimeSlice;

pub const DEFAULT_STEP: f64 = 1e-5;

/// Central differences of the sequence log-likelihood in every coordinate.
pub fn fd_gradient(
    params: &Parameters,
    config: &ModelConfig,
    series: &[TimeSlice],
    h: f64,
) -> Result<Gradient> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(DybmError::InvalidArgument(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let mut grad = Gradient::zeros(config);
    let mut probe = params.clone();
    for c in 0..params.n_coords() {
        let base = *probe.coord_mut(c);
        *probe.coord_mut(c) = base + h;
        let up = sequence_log_likelihood(&probe, config, series)?;
        *probe.coord_mut(c) = base - h;
        let down = sequence_log_likelihood(&probe, config, series)?;
        *probe.coord_mut(c) = base;
        if !(up.is_finite() && down.is_finite()) {
            return Err(DybmError::NonFinite(format!(
                "log-likelihood while perturbing coordinate {c}"
            )));
        }
        *grad.coord_mut(c) = (up - down) / (2.0 * h);
    }
    Ok(grad)
}

/// Worst coordinate of an analytic vs numeric gradient comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientComparison {
    pub max_abs_error: f64,
    /// Largest `|a - b| / max(rel * max(|a|, |b|), abs)`; at most 1 means every
    /// coordinate is within tolerance.
    pub max_scaled_error: f64,
}

impl GradientComparison {
    pub fn passes(&self) -> bool {
        self.max_scaled_error <= 1.0
    }
}

pub fn compare_gradients(analytic: &Gradient, numeric: &Gradient, rel: f64, abs: f64) -> GradientComparison {
    let mut max_abs_error: f64 = 0.0;
    let mut max_scaled_error: f64 = 0.0;
    for (a, b) in analytic.iter().zip(numeric.iter()) {
        let err = (a - b).abs();
        let scale = (rel * a.abs().max(b.abs())).max(abs);
        max_abs_error = max_abs_error.max(err);
        max_scaled_error = max_scaled_error.max(err / scale);
    }
    if analytic.n_coords() != numeric.n_coords() {
        max_scaled_error = f64::INFINITY;
    }
    GradientComparison {
        max_abs_error,
        max_scaled_error,
    }
}
