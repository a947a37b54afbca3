//! Per-synapse update cost and storage audit across network sizes.

use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ModelConfig, Synapse};
use crate::error::Result;
use crate::learning::step_gradient;
use crate::params::Parameters;
use crate::slice::TimeSlice;
use crate::trace::TraceState;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    /// Incoming synapses per unit.
    pub fan_in: usize,
    pub max_delay: usize,
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
    pub steps: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![8, 32, 128],
            fan_in: 4,
            max_delay: 4,
            lambdas: vec![0.5, 0.9],
            mus: vec![0.25, 0.5],
            steps: 2000,
            seed: 0,
        }
    }
}

/// Stored sizes of a model, counted from its buffers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Footprint {
    pub trace_reals: usize,
    pub queue_bits: usize,
    pub param_reals: usize,
}

impl Footprint {
    pub fn measure(params: &Parameters, state: &TraceState) -> Self {
        let traces = state.footprint();
        Footprint {
            trace_reals: traces.trace_reals,
            queue_bits: traces.queue_bits,
            param_reals: params.n_coords(),
        }
    }

    /// `M|K| + N|L|` trace reals, `sum (d - 1)` queue bits, `M(|K| + |L|) + N` parameters.
    pub fn expected(config: &ModelConfig) -> Self {
        let (n, m) = (config.n_units(), config.n_synapses());
        let (k, l) = (config.n_lambdas(), config.n_mus());
        Footprint {
            trace_reals: m * k + n * l,
            queue_bits: config.synapses().iter().map(|s| s.delay - 1).sum(),
            param_reals: m * (k + l) + n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n_units: usize,
    pub n_synapses: usize,
    pub steps: usize,
    pub per_synapse_ns: f64,
    pub measured: Footprint,
    pub expected: Footprint,
    pub footprint_matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub fan_in: usize,
    pub rows: Vec<BenchRow>,
    /// Slowest over fastest per-synapse time across sizes.
    pub time_ratio: f64,
}

/// Network where every unit receives `fan_in` synapses from distinct random units.
pub fn fixed_fan_in_config(
    rng: &mut impl Rng,
    n_units: usize,
    fan_in: usize,
    max_delay: usize,
    lambdas: Vec<f64>,
    mus: Vec<f64>,
) -> Result<ModelConfig> {
    let fan_in = fan_in.min(n_units);
    let mut synapses = Vec::with_capacity(n_units * fan_in);
    for post in 0..n_units {
        for pre in sample(rng, n_units, fan_in) {
            synapses.push(Synapse {
                pre,
                post,
                delay: rng.random_range(1..=max_delay),
            });
        }
    }
    ModelConfig::new(n_units, lambdas, mus, 1.0, synapses)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for &n in &cfg.sizes {
        let config = fixed_fan_in_config(&mut rng, n, cfg.fan_in, cfg.max_delay, cfg.lambdas.clone(), cfg.mus.clone())?;
        let mut params = Parameters::zeros(&config);
        for c in 0..params.n_coords() {
            *params.coord_mut(c) = rng.random_range(-0.1..0.1);
        }
        let series: Vec<TimeSlice> = (0..cfg.steps)
            .map(|_| TimeSlice::from_bits((0..n).map(|_| rng.random_bool(0.2)).collect()))
            .collect();

        let mut state = TraceState::new(&config);
        let start = Instant::now();
        for slice in &series {
            let grad = step_gradient(&params, &config, &state, slice)?;
            params = params.sgd_update(&grad, 1e-3)?;
            state.advance(&config, slice)?;
        }
        let elapsed = start.elapsed().as_secs_f64();
        let per_synapse_ns = elapsed * 1e9 / (cfg.steps.max(1) * config.n_synapses().max(1)) as f64;

        let measured = Footprint::measure(&params, &state);
        let expected = Footprint::expected(&config);
        rows.push(BenchRow {
            n_units: n,
            n_synapses: config.n_synapses(),
            steps: cfg.steps,
            per_synapse_ns,
            measured,
            expected,
            footprint_matches: measured == expected,
        });
    }
    let fastest = rows.iter().map(|r| r.per_synapse_ns).fold(f64::INFINITY, f64::min);
    let slowest = rows.iter().map(|r| r.per_synapse_ns).fold(0.0, f64::max);
    Ok(BenchReport {
        fan_in: cfg.fan_in,
        rows,
        time_ratio: slowest / fastest,
    })
}
