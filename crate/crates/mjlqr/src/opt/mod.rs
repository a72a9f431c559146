//! Policy optimization: exact derivatives of the cost, certified constants,
//! and the three feasibility-preserving iterative methods.

mod constants;
mod grad;
mod run;

pub use constants::{mu_constant, smoothness_constants, smoothness_constants_with_truth, ConstantBundle};
pub use grad::{gain_residual, gradient, hessian_form, value_derivative};
pub use run::{
    max_step, optimize, optimize_observed, step, theoretical_rate, MethodKind, OptTrace, StepSize,
    TerminalStatus, TraceRecord,
};
