//! Learnable parameters and gradients.
//!
//! Both share one flat coordinate layout: the `N` biases, then `u` synapse-major
//! (`K` per synapse), then `v` synapse-major (`L` per synapse).

use crate::config::ModelConfig;
use crate::error::{DybmError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    bias: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    n_lambdas: usize,
    n_mus: usize,
}

impl Parameters {
    /// All-zero parameters: every unit fires with probability 0.5.
    pub fn zeros(config: &ModelConfig) -> Self {
        Parameters {
            bias: vec![0.0; config.n_units()],
            u: vec![0.0; config.n_synapses() * config.n_lambdas()],
            v: vec![0.0; config.n_synapses() * config.n_mus()],
            n_lambdas: config.n_lambdas(),
            n_mus: config.n_mus(),
        }
    }

    pub fn from_parts(config: &ModelConfig, bias: Vec<f64>, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let expect = [
            ("bias", bias.len(), config.n_units()),
            ("u", u.len(), config.n_synapses() * config.n_lambdas()),
            ("v", v.len(), config.n_synapses() * config.n_mus()),
        ];
        for (name, got, want) in expect {
            if got != want {
                return Err(DybmError::ShapeMismatch(format!(
                    "{name} has {got} entries, expected {want}"
                )));
            }
        }
        let p = Parameters {
            bias,
            u,
            v,
            n_lambdas: config.n_lambdas(),
            n_mus: config.n_mus(),
        };
        p.check_finite()?;
        Ok(p)
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.iter().position(|x| !x.is_finite()) {
            None => Ok(()),
            Some(c) => Err(DybmError::NonFinite(format!("parameter coordinate {c}"))),
        }
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    /// LTP coefficients of one synapse, one per lambda.
    pub fn u(&self, synapse: usize) -> &[f64] {
        &self.u[synapse * self.n_lambdas..(synapse + 1) * self.n_lambdas]
    }

    pub fn u_mut(&mut self, synapse: usize) -> &mut [f64] {
        &mut self.u[synapse * self.n_lambdas..(synapse + 1) * self.n_lambdas]
    }

    /// LTD coefficients of one synapse, one per mu.
    pub fn v(&self, synapse: usize) -> &[f64] {
        &self.v[synapse * self.n_mus..(synapse + 1) * self.n_mus]
    }

    pub fn v_mut(&mut self, synapse: usize) -> &mut [f64] {
        &mut self.v[synapse * self.n_mus..(synapse + 1) * self.n_mus]
    }

    pub fn u_flat(&self) -> &[f64] {
        &self.u
    }

    pub fn v_flat(&self) -> &[f64] {
        &self.v
    }

    pub fn n_coords(&self) -> usize {
        self.bias.len() + self.u.len() + self.v.len()
    }

    /// All coordinates in flat order.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.bias.iter().chain(&self.u).chain(&self.v).copied()
    }

    pub fn coord_mut(&mut self, c: usize) -> &mut f64 {
        let (nb, nu) = (self.bias.len(), self.u.len());
        if c < nb {
            &mut self.bias[c]
        } else if c < nb + nu {
            &mut self.u[c - nb]
        } else {
            &mut self.v[c - nb - nu]
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut p = self.clone();
        p.bias.iter_mut().chain(&mut p.u).chain(&mut p.v).for_each(|x| *x *= factor);
        p
    }

    pub(crate) fn check_shape(&self, grad: &Gradient) -> Result<()> {
        if self.bias.len() != grad.d_bias.len()
            || self.u.len() != grad.d_u.len()
            || self.v.len() != grad.d_v.len()
        {
            return Err(DybmError::ShapeMismatch(format!(
                "parameters ({}, {}, {}) vs gradient ({}, {}, {})",
                self.bias.len(),
                self.u.len(),
                self.v.len(),
                grad.d_bias.len(),
                grad.d_u.len(),
                grad.d_v.len()
            )));
        }
        Ok(())
    }

    /// `self + eta * grad`, coordinate-wise.
    pub fn sgd_update(&self, grad: &Gradient, eta: f64) -> Result<Self> {
        self.check_shape(grad)?;
        let mut next = self.clone();
        for (x, g) in next.bias.iter_mut().zip(&grad.d_bias) {
            *x += eta * g;
        }
        for (x, g) in next.u.iter_mut().zip(&grad.d_u) {
            *x += eta * g;
        }
        for (x, g) in next.v.iter_mut().zip(&grad.d_v) {
            *x += eta * g;
        }
        next.check_finite()?;
        Ok(next)
    }
}

/// One log-likelihood gradient, laid out like [`Parameters`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub d_bias: Vec<f64>,
    pub d_u: Vec<f64>,
    pub d_v: Vec<f64>,
}

impl Gradient {
    pub fn zeros(config: &ModelConfig) -> Self {
        Gradient {
            d_bias: vec![0.0; config.n_units()],
            d_u: vec![0.0; config.n_synapses() * config.n_lambdas()],
            d_v: vec![0.0; config.n_synapses() * config.n_mus()],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.d_bias.iter().chain(&self.d_u).chain(&self.d_v).copied()
    }

    pub fn n_coords(&self) -> usize {
        self.d_bias.len() + self.d_u.len() + self.d_v.len()
    }

    pub fn coord_mut(&mut self, c: usize) -> &mut f64 {
        let (nb, nu) = (self.d_bias.len(), self.d_u.len());
        if c < nb {
            &mut self.d_bias[c]
        } else if c < nb + nu {
            &mut self.d_u[c - nb]
        } else {
            &mut self.d_v[c - nb - nu]
        }
    }

    pub fn add_assign(&mut self, other: &Gradient) {
        for (a, b) in self.d_bias.iter_mut().zip(&other.d_bias) {
            *a += b;
        }
        for (a, b) in self.d_u.iter_mut().zip(&other.d_u) {
            *a += b;
        }
        for (a, b) in self.d_v.iter_mut().zip(&other.d_v) {
            *a += b;
        }
    }

    /// Euclidean norm over all coordinates.
    pub fn norm(&self) -> f64 {
        self.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(f64::is_finite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ModelConfig {
        ModelConfig::dense(2, vec![0.5, 0.25], vec![0.5], 1.0, 2).unwrap()
    }

    #[test]
    fn zero_eta_or_zero_gradient_is_identity() {
        let c = config();
        let mut p = Parameters::zeros(&c);
        p.bias_mut()[1] = 0.7;
        p.u_mut(2)[1] = -0.3;
        let mut g = Gradient::zeros(&c);
        assert_eq!(p.sgd_update(&g, 0.5).unwrap(), p);
        g.d_v[3] = 4.0;
        assert_eq!(p.sgd_update(&g, 0.0).unwrap(), p);
    }

    #[test]
    fn ascent_step_arithmetic() {
        let c = config();
        let p = Parameters::zeros(&c);
        let mut g = Gradient::zeros(&c);
        g.d_bias[0] = 0.5;
        let next = p.sgd_update(&g, 0.1).unwrap();
        assert_eq!(next.bias()[0], 0.05);
    }

    #[test]
    fn shape_mismatch_rejected() {
        let p = Parameters::zeros(&config());
        let other = ModelConfig::dense(3, vec![0.5], vec![0.5], 1.0, 2).unwrap();
        assert!(matches!(
            p.sgd_update(&Gradient::zeros(&other), 0.1),
            Err(DybmError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn non_finite_update_rejected() {
        let c = config();
        let p = Parameters::zeros(&c);
        let mut g = Gradient::zeros(&c);
        g.d_u[0] = f64::INFINITY;
        assert!(matches!(p.sgd_update(&g, 1.0), Err(DybmError::NonFinite(_))));
    }

    #[test]
    fn flat_coordinates_cover_every_tensor() {
        let c = config();
        let mut p = Parameters::zeros(&c);
        for i in 0..p.n_coords() {
            *p.coord_mut(i) = i as f64;
        }
        assert_eq!(p.bias(), &[0.0, 1.0]);
        assert_eq!(p.u(0), &[2.0, 3.0]);
        assert_eq!(p.v(0), &[10.0]);
        assert_eq!(p.iter().collect::<Vec<_>>().len(), 2 + 8 + 4);
    }
}
