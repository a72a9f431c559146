//! The three iterative methods, their certified step sizes and rates, and
//! the optimizer driver.
//!
//! Updates from a policy `K` with gain residual `L`, curvature `Ψ` and
//! gradient `∇C = 2LX`:
//!
//! * gradient descent   `K⁺ = K - η ∇C(K)`          certified for `η ≤ 1/L`
//! * Gauss-Newton       `K⁺ = K - 2η Ψ⁻¹ L`         certified for `η ≤ 1/2`
//! * natural gradient   `K⁺ = K - 2η L`             certified for
//!   `η ≤ ½ (‖R‖∞ + ‖B‖∞² C(K⁰)/μ)⁻¹`
//!
//! Within those bounds every iterate stays mean-square stabilizing and the
//! optimality gap contracts at least by the matching certified factor per
//! step; a violation observed at run time is reported as a rejected step
//! rather than repaired.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::eval::{evaluate, rho_warm, PolicyEval, Workspace};
use crate::ops::MSS_MARGIN;
use crate::opt::constants::{mu_constant, smoothness_constants};
use crate::problem::{MjlsProblem, Policy};
use crate::riccati::CareSolution;
use crate::tuple::MatTuple;
use crate::value::state_correlation;

/// Gradient threshold (relative to `1 + cost`) below which a run that still
/// misses its target is declared anomalously stationary.
const STATIONARY_TOL: f64 = 1e-12;

/// Relative slack allowed before a cost increase rejects the step.
const MONOTONE_SLACK: f64 = 1e-10;

/// Selector for the three iterative methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    /// Plain gradient descent on the gains.
    GradientDescent,
    /// Curvature-preconditioned update; with step one half this is exact
    /// policy iteration.
    GaussNewton,
    /// Gradient descent preconditioned by the state correlation, which
    /// cancels the trailing `X` factor of the gradient.
    NaturalPG,
}

impl MethodKind {
    /// Stable lowercase identifier used in file names and the CLI.
    pub fn tag(self) -> &'static str {
        match self {
            MethodKind::GradientDescent => "gd",
            MethodKind::GaussNewton => "gn",
            MethodKind::NaturalPG => "npg",
        }
    }
}

/// Step-size request: the certified maximum or an explicit value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// Resolve to [`max_step`] at the initial policy.
    Auto,
    /// Use exactly this value; values beyond the certified bound void the
    /// rate certificate but are allowed.
    Fixed(f64),
}

/// Why an optimizer run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalStatus {
    /// The stopping rule was met.
    Converged,
    /// The iteration cap was reached first.
    MaxIterReached,
    /// The gradient vanished while the target was still missed; impossible
    /// in exact arithmetic, so it flags a numerical fault.
    AnomalousStationary,
}

/// One row of an optimizer trace.
#[derive(Debug, Clone, Copy)]
pub struct TraceRecord {
    /// Iterate index, starting at 0 for the initial policy.
    pub iter: usize,
    /// Cost of the iterate.
    pub cost: f64,
    /// `|C(K) - C*| / C*` when ground truth is available.
    pub rel_err: Option<f64>,
    /// Euclidean norm of the gradient over all modes.
    pub grad_norm2: f64,
    /// Step size applied between iterates.
    pub eta: f64,
    /// Certified per-step contraction of the optimality gap; present only
    /// when ground truth is available and the step is within its bound.
    pub rate_bound: Option<f64>,
    /// Lifted spectral radius of the iterate's closed loop.
    pub rho_lifted: f64,
}

/// Full record of one optimizer run.
#[derive(Debug, Clone)]
pub struct OptTrace {
    /// Per-iterate records; the first row is the initial policy.
    pub records: Vec<TraceRecord>,
    /// Why the run stopped.
    pub status: TerminalStatus,
    /// Last iterate.
    pub final_policy: Policy,
}

/// Largest certified step size of `method` started at `k0`.
pub fn max_step(problem: &MjlsProblem, method: MethodKind, k0: &Policy) -> Result<f64> {
    let mut ws = Workspace::default();
    let eval = evaluate(problem, k0, &mut ws)?;
    max_step_at(problem, method, eval.cost)
}

/// Certified step bound at sublevel value `cost0 = C(K⁰)`.
fn max_step_at(problem: &MjlsProblem, method: MethodKind, cost0: f64) -> Result<f64> {
    match method {
        MethodKind::GradientDescent => {
            let bundle = smoothness_constants(problem, cost0)?;
            Ok(1.0 / bundle.smoothness_l)
        }
        MethodKind::GaussNewton => Ok(0.5),
        MethodKind::NaturalPG => {
            let mu = mu_constant(problem);
            let b_max = problem.b().norm_max();
            let r_max = problem.r().norm_max();
            Ok(0.5 / (r_max + b_max * b_max * cost0 / mu))
        }
    }
}

/// Certified per-step contraction factor of the optimality gap for `method`
/// at step size `eta`, given `‖X‖∞` at the optimal policy.
///
/// The factor is meaningful only for steps within [`max_step`]; outside the
/// open interval (0,1) the certificate does not exist and an error is
/// returned.
pub fn theoretical_rate(
    problem: &MjlsProblem,
    method: MethodKind,
    eta: f64,
    x_star_maxnorm: f64,
) -> Result<f64> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Domain {
            context: format!("step size must be positive and finite, got {eta}"),
        });
    }
    if !(x_star_maxnorm > 0.0) {
        return Err(Error::Domain {
            context: format!("optimal correlation norm must be positive, got {x_star_maxnorm}"),
        });
    }
    let mu = mu_constant(problem);
    let r_floor = problem.r().lambda_min();
    let rate = match method {
        MethodKind::GradientDescent => 1.0 - 2.0 * mu * mu * r_floor * eta / x_star_maxnorm,
        MethodKind::GaussNewton => 1.0 - 2.0 * mu * eta / x_star_maxnorm,
        MethodKind::NaturalPG => 1.0 - 2.0 * mu * r_floor * eta / x_star_maxnorm,
    };
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Domain {
            context: format!("contraction factor {rate} falls outside (0, 1)"),
        });
    }
    Ok(rate)
}

/// One update of `method` from `policy` with step `eta`.
///
/// The result is checked for mean-square stability; an unstable result is a
/// rejected step, with the message distinguishing a certified-bound breach
/// from an aggressive caller-chosen step.
pub fn step(problem: &MjlsProblem, policy: &Policy, method: MethodKind, eta: f64) -> Result<Policy> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Domain {
            context: format!("step size must be positive and finite, got {eta}"),
        });
    }
    let mut ws = Workspace::default();
    let eval = evaluate(problem, policy, &mut ws)?;
    let next = apply_update(policy, &eval, method, eta)?;
    let rho = rho_warm(problem, &next, &mut ws)?;
    if rho >= 1.0 - MSS_MARGIN {
        let bound = max_step_at(problem, method, eval.cost)?;
        let reason = if eta <= bound {
            format!(
                "iterate left the stabilizing set (spectral radius {rho:.6}) although the step \
                 is within the certified bound {bound:.3e}; numerical tolerance breach"
            )
        } else {
            format!(
                "iterate left the stabilizing set (spectral radius {rho:.6}); the step exceeds \
                 the certified bound {bound:.3e}"
            )
        };
        return Err(Error::StepRejected { eta, reason });
    }
    Ok(next)
}

/// Update rule on a precomputed evaluation; no stability check.
fn apply_update(
    policy: &Policy,
    eval: &PolicyEval,
    method: MethodKind,
    eta: f64,
) -> Result<Policy> {
    let k = match method {
        MethodKind::GradientDescent => policy.k.axpy(-eta, &eval.grad),
        MethodKind::NaturalPG => policy.k.axpy(-2.0 * eta, &eval.l),
        MethodKind::GaussNewton => {
            let mut blocks = Vec::with_capacity(policy.k.len());
            for i in 0..policy.k.len() {
                let psi = eval.psi.block(i).clone();
                let chol = Cholesky::new(psi).ok_or_else(|| Error::SingularSystem {
                    context: format!("curvature block {i} is not positive definite"),
                })?;
                blocks.push(policy.k.block(i) - chol.solve(eval.l.block(i)) * (2.0 * eta));
            }
            Policy::new(MatTuple::new(blocks)?).k
        }
    };
    Ok(Policy::new(k))
}

/// Runs `method` from `k0` until the stopping rule or `max_iter`.
///
/// With ground truth the stopping rule is relative error at most `tol`;
/// without it, gradient norm at most `tol·(1 + C(K))`. The trace records
/// every iterate; costs are enforced non-increasing and every iterate must
/// stay mean-square stabilizing, with violations reported as rejected steps.
pub fn optimize(
    problem: &MjlsProblem,
    k0: &Policy,
    method: MethodKind,
    eta: StepSize,
    tol: f64,
    max_iter: usize,
    truth: Option<&CareSolution>,
) -> Result<OptTrace> {
    optimize_observed(problem, k0, method, eta, tol, max_iter, truth, |_, _, _| {})
}

/// As [`optimize`], invoking `observer` with every recorded iterate
/// (including the initial one); instrumentation hook for auditing runs
/// without re-solving trajectories.
#[allow(clippy::too_many_arguments)]
pub fn optimize_observed(
    problem: &MjlsProblem,
    k0: &Policy,
    method: MethodKind,
    eta: StepSize,
    tol: f64,
    max_iter: usize,
    truth: Option<&CareSolution>,
    mut observer: impl FnMut(usize, &Policy, &TraceRecord),
) -> Result<OptTrace> {
    if !(tol > 0.0) {
        return Err(Error::Domain {
            context: format!("stopping tolerance must be positive, got {tol}"),
        });
    }
    let mut ws = Workspace::default();
    let mut policy = k0.clone();
    let mut eval = evaluate(problem, &policy, &mut ws)?;
    let eta = match eta {
        StepSize::Auto => max_step_at(problem, method, eval.cost)?,
        StepSize::Fixed(v) => {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain {
                    context: format!("step size must be positive and finite, got {v}"),
                });
            }
            v
        }
    };
    // The rate certificate applies only to steps within the certified bound;
    // the bound check carries a sliver of slack for the auto-resolved value.
    let rate_bound = match truth {
        Some(care) => {
            let bound = max_step_at(problem, method, eval.cost)?;
            if eta <= bound * (1.0 + 1e-12) {
                let x_star = state_correlation(problem, &care.k_star)?.norm_max();
                theoretical_rate(problem, method, eta, x_star).ok()
            } else {
                None
            }
        }
        None => None,
    };
    let c_star = truth.map(|care| care.cost);
    let mut records = Vec::with_capacity(max_iter.min(4096) + 1);
    let record = make_record(0, &eval, eta, rate_bound, c_star);
    observer(0, &policy, &record);
    records.push(record);
    let mut status = TerminalStatus::MaxIterReached;
    if converged(&records[0], tol, c_star.is_some()) {
        status = TerminalStatus::Converged;
        return Ok(OptTrace {
            records,
            status,
            final_policy: policy,
        });
    }
    for iter in 1..=max_iter {
        let next = apply_update(&policy, &eval, method, eta)?;
        let prev_cost = eval.cost;
        eval = match evaluate(problem, &next, &mut ws) {
            Ok(e) => e,
            Err(Error::Stability { rho }) => {
                return Err(Error::StepRejected {
                    eta,
                    reason: format!(
                        "iterate {iter} left the stabilizing set (spectral radius {rho:.6})"
                    ),
                });
            }
            Err(other) => return Err(other),
        };
        if eval.cost > prev_cost * (1.0 + MONOTONE_SLACK) + f64::MIN_POSITIVE {
            return Err(Error::StepRejected {
                eta,
                reason: format!(
                    "cost increased from {prev_cost:.12e} to {:.12e} at iterate {iter}",
                    eval.cost
                ),
            });
        }
        policy = next;
        let record = make_record(iter, &eval, eta, rate_bound, c_star);
        observer(iter, &policy, &record);
        records.push(record);
        let last = records.last().expect("just pushed");
        if converged(last, tol, c_star.is_some()) {
            status = TerminalStatus::Converged;
            break;
        }
        if last.grad_norm2 <= STATIONARY_TOL * (1.0 + last.cost) {
            status = TerminalStatus::AnomalousStationary;
            break;
        }
    }
    Ok(OptTrace {
        records,
        status,
        final_policy: policy,
    })
}

fn make_record(
    iter: usize,
    eval: &PolicyEval,
    eta: f64,
    rate_bound: Option<f64>,
    c_star: Option<f64>,
) -> TraceRecord {
    TraceRecord {
        iter,
        cost: eval.cost,
        rel_err: c_star.map(|cs| ((eval.cost - cs) / cs).abs()),
        grad_norm2: eval.grad_norm2(),
        eta,
        rate_bound,
        rho_lifted: eval.rho,
    }
}

fn converged(record: &TraceRecord, tol: f64, have_truth: bool) -> bool {
    match (have_truth, record.rel_err) {
        (true, Some(err)) => err <= tol,
        _ => record.grad_norm2 <= tol * (1.0 + record.cost),
    }
}
