//! JSON checkpoints of a model, optionally with its trace state.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "config": {"n_units": 2, "temperature": 1.0, "lambdas": [..], "mus": [..],
//!              "connectivity": [[pre, post, delay], ..]},
//!   "bias": [..],
//!   "u": [[pre, post, [per lambda]], ..],
//!   "v": [[pre, post, [per mu]], ..],
//!   "trace_state": {"alpha": [[pre, post, [per lambda]], ..],
//!                   "gamma": [[per mu], ..],
//!                   "queues": [[pre, post, [lag 1, lag 2, ..]], ..],
//!                   "step_count": 0}
//! }
//! ```
//!
//! Indices are 0-based. Reals carry 17 significant digits so a save/load
//! cycle is bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{ConfigDoc, ModelConfig};
use crate::error::{DybmError, Result};
use crate::json::{reals, unwrap_reals, Real};
use crate::params::Parameters;
use crate::trace::{DelayQueue, TraceState};

pub const FORMAT_VERSION: u32 = 1;

type PairRow<T> = (usize, usize, Vec<T>);

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointDoc {
    format_version: u32,
    config: ConfigDoc,
    bias: Vec<Real>,
    u: Vec<PairRow<Real>>,
    v: Vec<PairRow<Real>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trace_state: Option<TraceDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceDoc {
    alpha: Vec<PairRow<Real>>,
    gamma: Vec<Vec<Real>>,
    queues: Vec<PairRow<u8>>,
    step_count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config: ModelConfig,
    pub params: Parameters,
    pub state: Option<TraceState>,
}

fn pair_rows(config: &ModelConfig, per_synapse: impl Fn(usize) -> Vec<Real>) -> Vec<PairRow<Real>> {
    config
        .synapses()
        .iter()
        .enumerate()
        .map(|(s, syn)| (syn.pre, syn.post, per_synapse(s)))
        .collect()
}

/// Reorders `rows` into synapse order, checking every synapse appears once
/// with `width` entries.
fn collect_rows<T: Clone>(
    config: &ModelConfig,
    rows: &[PairRow<T>],
    width: usize,
    name: &str,
) -> Result<Vec<Vec<T>>> {
    let mut out: Vec<Option<Vec<T>>> = vec![None; config.n_synapses()];
    for (pre, post, values) in rows {
        let s = config
            .synapse_index(*pre, *post)
            .ok_or_else(|| DybmError::Checkpoint(format!("{name} lists unconnected pair ({pre}, {post})")))?;
        if values.len() != width {
            return Err(DybmError::Checkpoint(format!(
                "{name} pair ({pre}, {post}) has {} entries, expected {width}",
                values.len()
            )));
        }
        if out[s].replace(values.clone()).is_some() {
            return Err(DybmError::Checkpoint(format!("{name} lists pair ({pre}, {post}) twice")));
        }
    }
    out.into_iter()
        .zip(config.synapses())
        .map(|(row, syn)| {
            row.ok_or_else(|| DybmError::Checkpoint(format!("{name} is missing pair ({}, {})", syn.pre, syn.post)))
        })
        .collect()
}

impl Checkpoint {
    pub fn new(config: ModelConfig, params: Parameters, state: Option<TraceState>) -> Self {
        Checkpoint { config, params, state }
    }

    pub fn to_json(&self) -> Result<String> {
        let c = &self.config;
        let p = &self.params;
        let doc = CheckpointDoc {
            format_version: FORMAT_VERSION,
            config: c.clone().into(),
            bias: reals(p.bias()),
            u: pair_rows(c, |s| reals(p.u(s))),
            v: pair_rows(c, |s| reals(p.v(s))),
            trace_state: self.state.as_ref().map(|st| TraceDoc {
                alpha: pair_rows(c, |s| reals(st.alphas(s))),
                gamma: (0..c.n_units()).map(|i| reals(st.gammas(i))).collect(),
                queues: c
                    .synapses()
                    .iter()
                    .enumerate()
                    .map(|(s, syn)| (syn.pre, syn.post, st.queue(s).iter().map(u8::from).collect()))
                    .collect(),
                step_count: st.step_count(),
            }),
        };
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| DybmError::Checkpoint(format!("malformed document: {e}")))?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == FORMAT_VERSION as u64 => {}
            Some(v) => {
                return Err(DybmError::Checkpoint(format!(
                    "unsupported format_version {v}, expected {FORMAT_VERSION}"
                )))
            }
            None => return Err(DybmError::Checkpoint("missing format_version".into())),
        }
        let doc: CheckpointDoc =
            serde_json::from_value(value).map_err(|e| DybmError::Checkpoint(format!("malformed document: {e}")))?;

        let config = ModelConfig::try_from(doc.config)?;
        let u = collect_rows(&config, &doc.u, config.n_lambdas(), "u")?;
        let v = collect_rows(&config, &doc.v, config.n_mus(), "v")?;
        let params = Parameters::from_parts(
            &config,
            unwrap_reals(&doc.bias),
            u.iter().flat_map(|r| unwrap_reals(r)).collect(),
            v.iter().flat_map(|r| unwrap_reals(r)).collect(),
        )?;

        let state = match doc.trace_state {
            None => None,
            Some(t) => {
                let alpha = collect_rows(&config, &t.alpha, config.n_lambdas(), "alpha")?;
                if t.gamma.len() != config.n_units() || t.gamma.iter().any(|g| g.len() != config.n_mus()) {
                    return Err(DybmError::Checkpoint(format!(
                        "gamma must be {} rows of {} entries",
                        config.n_units(),
                        config.n_mus()
                    )));
                }
                let widths: Vec<usize> = config.synapses().iter().map(|s| s.delay - 1).collect();
                let mut queues = Vec::with_capacity(config.n_synapses());
                let rows = collect_queue_rows(&config, &t.queues)?;
                for (bits, width) in rows.into_iter().zip(widths) {
                    if bits.len() != width {
                        return Err(DybmError::Checkpoint(format!(
                            "queue holds {} bits, expected {width}",
                            bits.len()
                        )));
                    }
                    let bits = bits
                        .into_iter()
                        .map(|b| match b {
                            0 => Ok(false),
                            1 => Ok(true),
                            other => Err(DybmError::Checkpoint(format!("queue bit {other} is not 0 or 1"))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    queues.push(DelayQueue::from_lags(bits));
                }
                Some(TraceState::from_parts(
                    &config,
                    alpha.iter().flat_map(|r| unwrap_reals(r)).collect(),
                    t.gamma.iter().flat_map(|r| unwrap_reals(r)).collect(),
                    queues,
                    t.step_count,
                )?)
            }
        };

        Ok(Checkpoint { config, params, state })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn collect_queue_rows(config: &ModelConfig, rows: &[PairRow<u8>]) -> Result<Vec<Vec<u8>>> {
    let mut out: Vec<Option<Vec<u8>>> = vec![None; config.n_synapses()];
    for (pre, post, bits) in rows {
        let s = config
            .synapse_index(*pre, *post)
            .ok_or_else(|| DybmError::Checkpoint(format!("queues list unconnected pair ({pre}, {post})")))?;
        if out[s].replace(bits.clone()).is_some() {
            return Err(DybmError::Checkpoint(format!("queues list pair ({pre}, {post}) twice")));
        }
    }
    out.into_iter()
        .zip(config.synapses())
        .map(|(row, syn)| {
            row.ok_or_else(|| DybmError::Checkpoint(format!("queues are missing pair ({}, {})", syn.pre, syn.post)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Synapse;
    use crate::slice::series_from_rows;

    fn sample() -> Checkpoint {
        let config = ModelConfig::new(
            2,
            vec![0.5, 0.9],
            vec![0.25],
            1.5,
            vec![
                Synapse { pre: 0, post: 1, delay: 3 },
                Synapse { pre: 1, post: 1, delay: 1 },
            ],
        )
        .unwrap();
        let mut params = Parameters::zeros(&config);
        for c in 0..params.n_coords() {
            *params.coord_mut(c) = (c as f64 + 0.1).sqrt() / 3.0 - 0.4;
        }
        let mut state = TraceState::new(&config);
        for s in series_from_rows([[1, 0], [1, 1], [0, 1]]).unwrap() {
            state.advance(&config, &s).unwrap();
        }
        Checkpoint::new(config, params, Some(state))
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let ck = sample();
        let text = ck.to_json().unwrap();
        let back = Checkpoint::from_json(&text).unwrap();
        assert_eq!(back, ck);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn truncated_document_is_a_parse_error() {
        let text = sample().to_json().unwrap();
        let err = Checkpoint::from_json(&text[..text.len() / 2]).unwrap_err();
        assert!(matches!(err, DybmError::Checkpoint(_)));
    }

    #[test]
    fn version_mismatch_rejected() {
        let text = sample().to_json().unwrap().replace("\"format_version\": 1", "\"format_version\": 2");
        let err = Checkpoint::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("format_version 2"), "{err}");
    }

    #[test]
    fn invalid_config_rejected() {
        let text = sample()
            .to_json()
            .unwrap()
            .replace("2.5000000000000000e-1", "1.0000000000000000e0");
        assert!(matches!(
            Checkpoint::from_json(&text),
            Err(DybmError::Config { .. })
        ));
    }

    #[test]
    fn missing_or_unconnected_rows_rejected() {
        let ck = sample();
        let text = ck.to_json().unwrap();
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["u"][0][1] = serde_json::json!(0);
        assert!(Checkpoint::from_json(&value.to_string()).is_err());
    }

    #[test]
    fn state_is_optional() {
        let mut ck = sample();
        ck.state = None;
        let text = ck.to_json().unwrap();
        assert!(!text.contains("trace_state"));
        assert_eq!(Checkpoint::from_json(&text).unwrap(), ck);
    }
}
