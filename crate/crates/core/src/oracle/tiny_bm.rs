//! A fully visible, static Boltzmann machine solved by enumerating all `2^n` states.
//!
//! Energy `E(x) = -b'x - x'Wx / 2` with symmetric `W` and zero diagonal;
//! `P(x)` is proportional to `exp(-E(x) / temperature)`. States are indexed by
//! bit mask, unit `i` in bit `i`.

use crate::error::{DybmError, Result};

pub const MAX_UNITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct TinyBm {
    n: usize,
    bias: Vec<f64>,
    // n * n, row-major, symmetric with zero diagonal
    weights: Vec<f64>,
    temperature: f64,
}

fn state_bits(n: usize, mask: usize) -> Vec<bool> {
    (0..n).map(|i| mask >> i & 1 == 1).collect()
}

impl TinyBm {
    pub fn new(bias: Vec<f64>, weights: Vec<f64>, temperature: f64) -> Result<Self> {
        let n = bias.len();
        if n > MAX_UNITS {
            return Err(DybmError::InvalidArgument(format!(
                "exact enumeration supports at most {MAX_UNITS} units, got {n}"
            )));
        }
        if weights.len() != n * n {
            return Err(DybmError::ShapeMismatch(format!(
                "weight matrix has {} entries for {n} units",
                weights.len()
            )));
        }
        for i in 0..n {
            if weights[i * n + i] != 0.0 {
                return Err(DybmError::InvalidArgument(format!("w[{i}][{i}] must be zero")));
            }
            for j in 0..i {
                if weights[i * n + j] != weights[j * n + i] {
                    return Err(DybmError::InvalidArgument(format!(
                        "weights must be symmetric; w[{i}][{j}] != w[{j}][{i}]"
                    )));
                }
            }
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(DybmError::InvalidArgument(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        Ok(TinyBm {
            n,
            bias,
            weights,
            temperature,
        })
    }

    pub fn zeros(n: usize, temperature: f64) -> Result<Self> {
        Self::new(vec![0.0; n], vec![0.0; n * n], temperature)
    }

    pub fn n_units(&self) -> usize {
        self.n
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Sets `w[i][j]` and `w[j][i]` together. `i` must differ from `j`.
    pub fn set_weight(&mut self, i: usize, j: usize, w: f64) {
        assert_ne!(i, j, "diagonal weights are fixed at zero");
        self.weights[i * self.n + j] = w;
        self.weights[j * self.n + i] = w;
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn energy(&self, x: &[bool]) -> f64 {
        let n = self.n;
        let mut e = 0.0;
        for i in 0..n {
            if !x[i] {
                continue;
            }
            e -= self.bias[i];
            for j in 0..n {
                if x[j] {
                    e -= 0.5 * self.weights[i * n + j];
                }
            }
        }
        e
    }

    /// Probabilities of all `2^n` states, indexed by mask.
    pub fn probs(&self) -> Vec<f64> {
        let logits: Vec<f64> = (0..1usize << self.n)
            .map(|m| -self.energy(&state_bits(self.n, m)) / self.temperature)
            .collect();
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / z).collect()
    }

    pub fn prob(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.n {
            return Err(DybmError::SliceLength {
                expected: self.n,
                got: x.len(),
            });
        }
        let mask = x.iter().enumerate().fold(0usize, |m, (i, &b)| m | (b as usize) << i);
        Ok(self.probs()[mask])
    }

    /// Energy gradient: `dE/db_i = -x_i` and, for the shared coordinate
    /// `w[i][j] = w[j][i]`, `dE/dw_ij = -x_i x_j`.
    fn energy_gradient(&self, x: &[bool]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let db = x.iter().map(|&b| if b { -1.0 } else { 0.0 }).collect();
        let mut dw = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j && x[i] && x[j] {
                    dw[i * n + j] = -1.0;
                }
            }
        }
        (db, dw)
    }

    /// Log-likelihood gradient of the dataset, as the data energy gradient
    /// minus its model expectation, scaled by `-1/temperature`.
    pub fn exact_gradient(&self, dataset: &[Vec<bool>]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        for x in dataset {
            if x.len() != n {
                return Err(DybmError::SliceLength {
                    expected: n,
                    got: x.len(),
                });
            }
        }
        let probs = self.probs();
        let mut mean_db = vec![0.0; n];
        let mut mean_dw = vec![0.0; n * n];
        for (mask, p) in probs.iter().enumerate() {
            let (db, dw) = self.energy_gradient(&state_bits(n, mask));
            for (m, g) in mean_db.iter_mut().zip(&db) {
                *m += p * g;
            }
            for (m, g) in mean_dw.iter_mut().zip(&dw) {
                *m += p * g;
            }
        }
        let scale = -1.0 / self.temperature;
        let mut grad_b = vec![0.0; n];
        let mut grad_w = vec![0.0; n * n];
        for x in dataset {
            let (db, dw) = self.energy_gradient(x);
            for ((g, d), m) in grad_b.iter_mut().zip(&db).zip(&mean_db) {
                *g += scale * (d - m);
            }
            for ((g, d), m) in grad_w.iter_mut().zip(&dw).zip(&mean_dw) {
                *g += scale * (d - m);
            }
        }
        Ok((grad_b, grad_w))
    }

    /// `<X_i X_j>` under the model, by enumeration.
    pub fn second_moments(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for (mask, p) in self.probs().iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    if mask >> i & 1 == 1 && mask >> j & 1 == 1 {
                        out[i * n + j] += p;
                    }
                }
            }
        }
        out
    }

    /// Hebbian weight signal `sum_x (x_i x_j - <X_i X_j>)` off the diagonal.
    pub fn hebb_signal(&self, dataset: &[Vec<bool>]) -> Vec<f64> {
        let n = self.n;
        let moments = self.second_moments();
        let mut out = vec![0.0; n * n];
        for x in dataset {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        let joint = if x[i] && x[j] { 1.0 } else { 0.0 };
                        out[i * n + j] += joint - moments[i * n + j];
                    }
                }
            }
        }
        out
    }

    /// Plain gradient ascent on the average log-likelihood until the gradient
    /// norm drops below `tol`. Returns the number of iterations used.
    pub fn fit(&mut self, dataset: &[Vec<bool>], eta: f64, tol: f64, max_iter: usize) -> Result<usize> {
        let n = self.n;
        let scale = 1.0 / dataset.len().max(1) as f64;
        for iter in 0..max_iter {
            let (gb, gw) = self.exact_gradient(dataset)?;
            let norm = gradient_norm(&gb, &gw) * scale;
            if norm < tol {
                return Ok(iter);
            }
            for (b, g) in self.bias.iter_mut().zip(&gb) {
                *b += eta * scale * g;
            }
            for i in 0..n {
                for j in 0..i {
                    let w = self.weights[i * n + j] + eta * scale * gw[i * n + j];
                    self.set_weight(i, j, w);
                }
            }
        }
        Err(DybmError::InvalidArgument(format!(
            "gradient ascent did not reach norm {tol} within {max_iter} iterations"
        )))
    }
}

/// Norm over the independent coordinates: biases and the upper triangle of `W`.
pub fn gradient_norm(grad_b: &[f64], grad_w: &[f64]) -> f64 {
    let n = grad_b.len();
    let mut sq: f64 = grad_b.iter().map(|g| g * g).sum();
    for i in 0..n {
        for j in i + 1..n {
            sq += grad_w[i * n + j].powi(2);
        }
    }
    sq.sqrt()
}
