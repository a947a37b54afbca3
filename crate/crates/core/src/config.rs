//! Network shape and fixed hyper-parameters.

use serde::{Deserialize, Serialize};

use crate::error::{DybmError, Result};
use crate::json::{reals, unwrap_reals, Real};

pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_MU: f64 = 0.25;
pub const DEFAULT_DELAY: usize = 2;
pub const DEFAULT_TEMPERATURE: f64 = 1.0;

/// A directed connection from unit `pre` to unit `post` with conduction delay `delay`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Synapse {
    pub pre: usize,
    pub post: usize,
    pub delay: usize,
}

/// Validated model configuration.
///
/// Synapses are kept sorted by `(pre, post)`; every per-synapse tensor in the
/// crate (`u`, `v`, `alpha`, queues) uses that order as its major index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ConfigDoc", try_from = "ConfigDoc")]
pub struct ModelConfig {
    n_units: usize,
    lambdas: Vec<f64>,
    mus: Vec<f64>,
    temperature: f64,
    synapses: Vec<Synapse>,
    // n_units * n_units lookup of synapse index by (pre, post)
    index: Vec<Option<usize>>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl ModelConfig {
    pub fn new(
        n_units: usize,
        lambdas: Vec<f64>,
        mus: Vec<f64>,
        temperature: f64,
        connectivity: impl IntoIterator<Item = Synapse>,
    ) -> Result<Self> {
        if n_units == 0 {
            return Err(DybmError::config("n_units", "must be at least 1"));
        }
        check_rates("lambdas", &lambdas)?;
        check_rates("mus", &mus)?;
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(DybmError::config(
                "temperature",
                format!("must be a positive finite real, got {temperature}"),
            ));
        }

        let mut synapses: Vec<Synapse> = connectivity.into_iter().collect();
        synapses.sort();
        let mut index = vec![None; n_units * n_units];
        for (s, syn) in synapses.iter().enumerate() {
            if syn.pre >= n_units || syn.post >= n_units {
                return Err(DybmError::config(
                    "connectivity",
                    format!(
                        "pair ({}, {}) out of range for {n_units} units",
                        syn.pre, syn.post
                    ),
                ));
            }
            if syn.delay == 0 {
                return Err(DybmError::config(
                    "connectivity",
                    format!("delay of pair ({}, {}) must be at least 1", syn.pre, syn.post),
                ));
            }
            let slot = &mut index[syn.pre * n_units + syn.post];
            if slot.is_some() {
                return Err(DybmError::config(
                    "connectivity",
                    format!("duplicate pair ({}, {})", syn.pre, syn.post),
                ));
            }
            *slot = Some(s);
        }

        let max_delay = synapses.iter().map(|s| s.delay).max().unwrap_or(1);
        if max_delay > 1 {
            // beta uses coefficients (1/mu)^lag for lags up to max_delay - 1
            let mu_min = mus.iter().copied().fold(f64::INFINITY, f64::min);
            let log_growth = (max_delay - 1) as f64 * (1.0 / mu_min).ln();
            if log_growth >= f64::MAX.ln() {
                return Err(DybmError::config(
                    "mus",
                    format!(
                        "(1/{mu_min})^{} overflows double precision; raise the smallest mu or shorten delays",
                        max_delay - 1
                    ),
                ));
            }
        }

        let mut incoming = vec![Vec::new(); n_units];
        let mut outgoing = vec![Vec::new(); n_units];
        for (s, syn) in synapses.iter().enumerate() {
            incoming[syn.post].push(s);
            outgoing[syn.pre].push(s);
        }

        Ok(ModelConfig {
            n_units,
            lambdas,
            mus,
            temperature,
            synapses,
            index,
            incoming,
            outgoing,
        })
    }

    /// All ordered pairs, self-pairs included, with the same delay.
    pub fn dense(
        n_units: usize,
        lambdas: Vec<f64>,
        mus: Vec<f64>,
        temperature: f64,
        delay: usize,
    ) -> Result<Self> {
        let pairs = (0..n_units).flat_map(|pre| {
            (0..n_units).map(move |post| Synapse { pre, post, delay })
        });
        Self::new(n_units, lambdas, mus, temperature, pairs)
    }

    /// Dense connectivity with the default hyper-parameters
    /// (lambda = 0.5, mu = 0.25, delay 2, temperature 1).
    pub fn with_defaults(n_units: usize) -> Result<Self> {
        Self::dense(
            n_units,
            vec![DEFAULT_LAMBDA],
            vec![DEFAULT_MU],
            DEFAULT_TEMPERATURE,
            DEFAULT_DELAY,
        )
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn synapses(&self) -> &[Synapse] {
        &self.synapses
    }

    /// Number of connected ordered pairs (M).
    pub fn n_synapses(&self) -> usize {
        self.synapses.len()
    }

    pub fn n_lambdas(&self) -> usize {
        self.lambdas.len()
    }

    pub fn n_mus(&self) -> usize {
        self.mus.len()
    }

    /// Largest conduction delay (D); 1 when there are no synapses.
    pub fn max_delay(&self) -> usize {
        self.synapses.iter().map(|s| s.delay).max().unwrap_or(1)
    }

    pub fn synapse_index(&self, pre: usize, post: usize) -> Option<usize> {
        if pre >= self.n_units || post >= self.n_units {
            return None;
        }
        self.index[pre * self.n_units + post]
    }

    pub fn require_synapse(&self, pre: usize, post: usize) -> Result<usize> {
        self.synapse_index(pre, post)
            .ok_or(DybmError::UnconnectedPair { pre, post })
    }

    /// Synapses whose post-synaptic unit is `unit`, ascending by pre.
    pub fn incoming(&self, unit: usize) -> &[usize] {
        &self.incoming[unit]
    }

    /// Synapses whose pre-synaptic unit is `unit`, ascending by post.
    pub fn outgoing(&self, unit: usize) -> &[usize] {
        &self.outgoing[unit]
    }

    pub(crate) fn check_unit(&self, unit: usize) -> Result<()> {
        if unit < self.n_units {
            Ok(())
        } else {
            Err(DybmError::UnitIndex {
                index: unit,
                n_units: self.n_units,
            })
        }
    }

    /// Same network with a different temperature.
    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        Self::new(
            self.n_units,
            self.lambdas.clone(),
            self.mus.clone(),
            temperature,
            self.synapses.iter().copied(),
        )
    }
}

fn check_rates(field: &str, rates: &[f64]) -> Result<()> {
    if rates.is_empty() {
        return Err(DybmError::config(field, "must list at least one decay rate"));
    }
    for (k, &r) in rates.iter().enumerate() {
        if !(r > 0.0 && r < 1.0) {
            return Err(DybmError::config(
                format!("{field}[{k}]"),
                format!("decay rate must lie strictly inside (0, 1), got {r}"),
            ));
        }
    }
    Ok(())
}

/// On-disk form of [`ModelConfig`]. Connectivity rows are `[pre, post, delay]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDoc {
    pub n_units: usize,
    pub temperature: Real,
    pub lambdas: Vec<Real>,
    pub mus: Vec<Real>,
    pub connectivity: Vec<[usize; 3]>,
}

impl From<ModelConfig> for ConfigDoc {
    fn from(c: ModelConfig) -> Self {
        ConfigDoc {
            n_units: c.n_units,
            temperature: Real(c.temperature),
            lambdas: reals(&c.lambdas),
            mus: reals(&c.mus),
            connectivity: c
                .synapses
                .iter()
                .map(|s| [s.pre, s.post, s.delay])
                .collect(),
        }
    }
}

impl TryFrom<ConfigDoc> for ModelConfig {
    type Error = DybmError;

    fn try_from(doc: ConfigDoc) -> Result<Self> {
        ModelConfig::new(
            doc.n_units,
            unwrap_reals(&doc.lambdas),
            unwrap_reals(&doc.mus),
            doc.temperature.0,
            doc.connectivity.iter().map(|&[pre, post, delay]| Synapse {
                pre,
                post,
                delay,
            }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syn(pre: usize, post: usize, delay: usize) -> Synapse {
        Synapse { pre, post, delay }
    }

    #[test]
    fn synapses_sorted_and_indexed() {
        let c = ModelConfig::new(
            3,
            vec![0.5],
            vec![0.5],
            1.0,
            vec![syn(2, 0, 1), syn(0, 1, 3), syn(1, 1, 2)],
        )
        .unwrap();
        assert_eq!(c.synapses()[0], syn(0, 1, 3));
        assert_eq!(c.synapse_index(2, 0), Some(2));
        assert_eq!(c.synapse_index(0, 2), None);
        assert_eq!(c.incoming(1), &[0, 1]);
        assert_eq!(c.outgoing(2), &[2]);
        assert_eq!(c.max_delay(), 3);
    }

    #[test]
    fn rejects_rates_outside_open_interval() {
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            let err = ModelConfig::dense(2, vec![0.5], vec![bad], 1.0, 2).unwrap_err();
            assert!(matches!(err, DybmError::Config { .. }), "{bad}");
        }
        assert!(ModelConfig::dense(2, vec![], vec![0.5], 1.0, 2).is_err());
    }

    #[test]
    fn rejects_bad_connectivity() {
        assert!(ModelConfig::new(2, vec![0.5], vec![0.5], 1.0, vec![syn(0, 1, 0)]).is_err());
        assert!(ModelConfig::new(2, vec![0.5], vec![0.5], 1.0, vec![syn(0, 2, 1)]).is_err());
        assert!(ModelConfig::new(
            2,
            vec![0.5],
            vec![0.5],
            1.0,
            vec![syn(0, 1, 1), syn(0, 1, 2)]
        )
        .is_err());
        assert!(ModelConfig::dense(0, vec![0.5], vec![0.5], 1.0, 1).is_err());
        assert!(ModelConfig::dense(1, vec![0.5], vec![0.5], 0.0, 1).is_err());
    }

    #[test]
    fn overflow_guard_on_beta_coefficients() {
        // (1/0.5)^1024 overflows, (1/0.5)^1000 does not
        assert!(ModelConfig::dense(1, vec![0.5], vec![0.5], 1.0, 1025).is_err());
        assert!(ModelConfig::dense(1, vec![0.5], vec![0.5], 1.0, 1001).is_ok());
    }

    #[test]
    fn self_pairs_allowed() {
        let c = ModelConfig::new(1, vec![0.5], vec![0.5], 1.0, vec![syn(0, 0, 1)]).unwrap();
        assert_eq!(c.n_synapses(), 1);
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let c = ModelConfig::with_defaults(2).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: ModelConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(c, back);

        let bad = text.replace("2.5000000000000000e-1", "1.0000000000000000e0");
        assert!(serde_json::from_str::<ModelConfig>(&bad).is_err());
    }
}
