//! Seeded suite comparing the fast path against every oracle.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ModelConfig, Synapse};
use crate::learning::sequence_gradient;
use crate::params::Parameters;
use crate::slice::TimeSlice;
use crate::trace::{AlphaRecursion, TraceState};

use super::expand::{expand_weights, naive_energy, naive_fire_prob, pad_history, truncation_horizon};
use super::finite_diff::{compare_gradients, fd_gradient, DEFAULT_STEP};
use super::scratch::traces_from_scratch;
use super::tiny_bm::{gradient_norm, TinyBm};

pub const DEFAULT_SEED: u64 = 20_150_925;

pub const RECURSION_TOL: f64 = 1e-9;
pub const EXPANSION_TOL: f64 = 1e-10;
pub const TAIL_TOL: f64 = 1e-12;
pub const GRADIENT_REL_TOL: f64 = 1e-5;
pub const GRADIENT_ABS_TOL: f64 = 1e-8;
pub const NORMALIZATION_TOL: f64 = 1e-12;
pub const HEBB_TOL: f64 = 1e-12;
pub const CONVERGED_NORM: f64 = 1e-6;

/// Deliberate defects used to confirm the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Decay the newly arrived spike along with the old alpha trace.
    ScaledAlphaRecursion,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
    pub recursion_instances: usize,
    pub expansion_instances: usize,
    pub gradient_instances: usize,
    pub tiny_bm_instances: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            seed: DEFAULT_SEED,
            fault: None,
            recursion_instances: 200,
            expansion_instances: 100,
            gradient_instances: 50,
            tiny_bm_instances: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub instances: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<32} instances={:<4} max_error={:.3e} tolerance={:.0e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.max_error,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
    pub wall_ms: f64,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Bounds for a randomly drawn network.
#[derive(Debug, Clone, Copy)]
pub struct InstanceShape {
    pub max_units: usize,
    pub max_delay: usize,
    pub max_lambdas: usize,
    pub max_mus: usize,
    pub lambda_range: (f64, f64),
    pub mu_range: (f64, f64),
    pub temperature_range: (f64, f64),
}

/// Random sparse-or-dense network; each ordered pair (self-pairs included)
/// is connected with probability 0.75.
pub fn random_config(rng: &mut impl Rng, shape: &InstanceShape) -> ModelConfig {
    let n = rng.random_range(1..=shape.max_units);
    let k = rng.random_range(1..=shape.max_lambdas);
    let l = rng.random_range(1..=shape.max_mus);
    let lambdas = (0..k).map(|_| rng.random_range(shape.lambda_range.0..shape.lambda_range.1)).collect();
    let mus = (0..l).map(|_| rng.random_range(shape.mu_range.0..shape.mu_range.1)).collect();
    let tau = rng.random_range(shape.temperature_range.0..=shape.temperature_range.1);
    let mut synapses = Vec::new();
    for pre in 0..n {
        for post in 0..n {
            if rng.random_bool(0.75) {
                synapses.push(Synapse {
                    pre,
                    post,
                    delay: rng.random_range(1..=shape.max_delay),
                });
            }
        }
    }
    ModelConfig::new(n, lambdas, mus, tau, synapses).expect("random shape stays within invariants")
}

pub fn random_params(rng: &mut impl Rng, config: &ModelConfig, scale: f64) -> Parameters {
    let mut p = Parameters::zeros(config);
    for c in 0..p.n_coords() {
        *p.coord_mut(c) = rng.random_range(-scale..scale);
    }
    p
}

pub fn random_series(rng: &mut impl Rng, n_units: usize, len: usize) -> Vec<TimeSlice> {
    (0..len)
        .map(|_| TimeSlice::from_bits((0..n_units).map(|_| rng.random_bool(0.5)).collect()))
        .collect()
}

fn recursion(fault: Option<Fault>) -> AlphaRecursion {
    match fault {
        Some(Fault::ScaledAlphaRecursion) => AlphaRecursion::ScaledSum,
        None => AlphaRecursion::Definition,
    }
}

fn advance_all(config: &ModelConfig, history: &[TimeSlice], fault: Option<Fault>) -> TraceState {
    let mut state = TraceState::new(config);
    for slice in history {
        state
            .advance_with(config, slice, recursion(fault))
            .expect("slice matches configuration");
    }
    state
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn check_recursion(rng: &mut ChaCha8Rng, opts: &ValidationOptions) -> CheckResult {
    let shape = InstanceShape {
        max_units: 4,
        max_delay: 8,
        max_lambdas: 3,
        max_mus: 3,
        lambda_range: (0.05, 0.95),
        mu_range: (0.05, 0.95),
        temperature_range: (1.0, 1.0),
    };
    let mut worst: f64 = 0.0;
    for _ in 0..opts.recursion_instances {
        let config = random_config(rng, &shape);
        let len = rng.random_range(0..=64);
        let history = random_series(rng, config.n_units(), len);
        let fast = advance_all(&config, &history, opts.fault);
        let slow = traces_from_scratch(&config, &history);
        let err = if fast.queues() == slow.queues() && fast.step_count() == slow.step_count() {
            max_abs_diff(fast.alpha_flat(), slow.alpha_flat())
                .max(max_abs_diff(fast.gamma_flat(), slow.gamma_flat()))
        } else {
            f64::INFINITY
        };
        worst = worst.max(err);
    }
    CheckResult {
        name: "recursion_vs_definition",
        instances: opts.recursion_instances,
        max_error: worst,
        tolerance: RECURSION_TOL,
        passed: worst <= RECURSION_TOL,
    }
}

fn check_expansion(rng: &mut ChaCha8Rng, opts: &ValidationOptions) -> CheckResult {
    let shape = InstanceShape {
        max_units: 3,
        max_delay: 5,
        max_lambdas: 2,
        max_mus: 2,
        lambda_range: (0.1, 0.5),
        mu_range: (0.2, 0.5),
        temperature_range: (0.5, 2.0),
    };
    let mut worst: f64 = 0.0;
    for _ in 0..opts.expansion_instances {
        let config = random_config(rng, &shape);
        let params = random_params(rng, &config, 1.0);
        let horizon = truncation_horizon(&config, TAIL_TOL);
        let len = rng.random_range(0..horizon + 20);
        let history = random_series(rng, config.n_units(), len);
        let state = advance_all(&config, &history, opts.fault);
        let expanded = expand_weights(&params, &config, horizon).expect("horizon >= 2");
        let window = pad_history(&history, horizon - 1, config.n_units());
        for j in 0..config.n_units() {
            let fast_e = params.unit_energy(&config, &state, j, true).expect("unit in range");
            let slow_e = naive_energy(&expanded, params.bias(), &window, j).expect("window sized");
            let fast_p = params.fire_prob(&config, &state, j).expect("unit in range");
            let slow_p =
                naive_fire_prob(&expanded, params.bias(), &config, &window, j).expect("window sized");
            worst = worst.max((fast_e - slow_e).abs()).max((fast_p - slow_p).abs());
        }
    }
    CheckResult {
        name: "traces_vs_expanded_weights",
        instances: opts.expansion_instances,
        max_error: worst,
        tolerance: EXPANSION_TOL,
        passed: worst <= EXPANSION_TOL,
    }
}

fn check_gradients(rng: &mut ChaCha8Rng, opts: &ValidationOptions) -> CheckResult {
    let shape = InstanceShape {
        max_units: 3,
        max_delay: 5,
        max_lambdas: 2,
        max_mus: 2,
        lambda_range: (0.2, 0.9),
        mu_range: (0.2, 0.9),
        temperature_range: (0.5, 2.0),
    };
    let mut worst_scaled: f64 = 0.0;
    for _ in 0..opts.gradient_instances {
        let config = random_config(rng, &shape);
        let params = random_params(rng, &config, 0.5);
        let len = rng.random_range(1..=20);
        let series = random_series(rng, config.n_units(), len);
        let analytic = sequence_gradient(&params, &config, &series).expect("valid series");
        let numeric = fd_gradient(&params, &config, &series, DEFAULT_STEP).expect("finite likelihood");
        let cmp = compare_gradients(&analytic, &numeric, GRADIENT_REL_TOL, GRADIENT_ABS_TOL);
        worst_scaled = worst_scaled.max(cmp.max_scaled_error);
    }
    CheckResult {
        name: "analytic_vs_finite_difference",
        instances: opts.gradient_instances,
        // reported in units of the mixed tolerance max(rel * |g|, abs)
        max_error: worst_scaled,
        tolerance: 1.0,
        passed: worst_scaled <= 1.0,
    }
}

fn random_tiny_bm(rng: &mut ChaCha8Rng, n: usize) -> TinyBm {
    let mut bm = TinyBm::zeros(n, rng.random_range(0.5..2.0)).expect("n within limit");
    for b in bm.bias_mut() {
        *b = rng.random_range(-1.0..1.0);
    }
    for i in 0..n {
        for j in 0..i {
            bm.set_weight(i, j, rng.random_range(-1.0..1.0));
        }
    }
    bm
}

fn check_tiny_bm(rng: &mut ChaCha8Rng, opts: &ValidationOptions) -> Vec<CheckResult> {
    let mut norm_err: f64 = 0.0;
    let mut hebb_err: f64 = 0.0;
    for _ in 0..opts.tiny_bm_instances {
        let n = rng.random_range(1..=super::tiny_bm::MAX_UNITS);
        let bm = random_tiny_bm(rng, n);
        norm_err = norm_err.max((bm.probs().iter().sum::<f64>() - 1.0).abs());

        let small_n = rng.random_range(2..=6);
        let small = random_tiny_bm(rng, small_n);
        let data: Vec<Vec<bool>> = (0..rng.random_range(1..=10))
            .map(|_| (0..small.n_units()).map(|_| rng.random_bool(0.5)).collect())
            .collect();
        let (_, gw) = small.exact_gradient(&data).expect("data sized");
        let hebb = small.hebb_signal(&data);
        let tau = small.temperature();
        hebb_err = hebb_err.max(max_abs_diff(&gw, &hebb.iter().map(|h| h / tau).collect::<Vec<_>>()));
    }

    // full-support data so the maximum-likelihood parameters are finite
    let counts = [3usize, 1, 2, 4, 1, 2, 3, 5];
    let data: Vec<Vec<bool>> = counts
        .iter()
        .enumerate()
        .flat_map(|(mask, &c)| std::iter::repeat_n((0..3).map(|i| mask >> i & 1 == 1).collect(), c))
        .collect();
    let mut bm = TinyBm::zeros(3, 1.0).expect("n within limit");
    let converged = bm.fit(&data, 2.0, CONVERGED_NORM / data.len() as f64, 200_000).is_ok();
    let (gb, gw) = bm.exact_gradient(&data).expect("data sized");
    let final_norm = gradient_norm(&gb, &gw);

    vec![
        CheckResult {
            name: "tiny_bm_normalization",
            instances: opts.tiny_bm_instances,
            max_error: norm_err,
            tolerance: NORMALIZATION_TOL,
            passed: norm_err <= NORMALIZATION_TOL,
        },
        CheckResult {
            name: "tiny_bm_hebb_form",
            instances: opts.tiny_bm_instances,
            max_error: hebb_err,
            tolerance: HEBB_TOL,
            passed: hebb_err <= HEBB_TOL,
        },
        CheckResult {
            name: "tiny_bm_gradient_at_optimum",
            instances: 1,
            max_error: final_norm,
            tolerance: CONVERGED_NORM,
            passed: converged && final_norm < CONVERGED_NORM,
        },
    ]
}

/// Runs every property with one seeded generator, in a fixed order.
pub fn run_validation(opts: &ValidationOptions) -> ValidationReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut checks = vec![
        check_recursion(&mut rng, opts),
        check_expansion(&mut rng, opts),
        check_gradients(&mut rng, opts),
    ];
    checks.extend(check_tiny_bm(&mut rng, opts));
    ValidationReport {
        seed: opts.seed,
        checks,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}
