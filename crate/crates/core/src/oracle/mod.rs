//! Brute-force reference implementations.
//!
//! Nothing here shares arithmetic with the fast path beyond the parameter
//! containers: weights are expanded into explicit per-delay matrices, traces
//! are summed term by term, gradients are taken by central differences, and
//! small static Boltzmann machines are solved by enumerating every state.

pub mod expand;
pub mod finite_diff;
pub mod scratch;
pub mod tiny_bm;
pub mod validate;

pub use expand::{
    expand_weights, kernel_point, kernel_rows, naive_energy, naive_fire_prob, pad_history,
    truncation_horizon, ExpandedWeights, KernelPoint,
};
pub use finite_diff::{compare_gradients, fd_gradient, GradientComparison};
pub use scratch::traces_from_scratch;
pub use tiny_bm::{gradient_norm, TinyBm};
pub use validate::{run_validation, CheckResult, Fault, ValidationOptions, ValidationReport};
