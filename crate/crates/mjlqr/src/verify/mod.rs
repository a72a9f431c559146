//! Independent oracles and checkers for the exact machinery.
//!
//! Everything here validates the closed-form layer by a second, structurally
//! different route: finite differences against the exact derivatives, Monte
//! Carlo rollouts against the Lyapunov-based cost, identity and inequality
//! checkers for the descent theory, and continuous-time method flows with an
//! exponential-decay certificate.

mod checks;
mod fd;
mod flow;
mod mc;

pub use checks::{
    almost_smoothness_gap, appendix_bounds, gradient_dominance_slack, AppendixBoundReport,
};
pub use fd::{fd_gradient, fd_hessian_form};
pub use flow::{ode_flow, ode_flow_with_truth, FlowTrace};
pub use mc::{mc_cost, RolloutEstimate};
