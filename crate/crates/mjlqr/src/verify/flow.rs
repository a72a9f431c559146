//! Continuous-time limits of the three methods, integrated by the classical
//! fourth-order Runge-Kutta scheme with a fixed step.
//!
//! Flows on the gain space:
//!
//! * gradient flow          `K̇ = -∇C(K)`
//! * Gauss-Newton flow      `K̇ = -2 Ψ⁻¹ L`
//! * natural-gradient flow  `K̇ = -2 L`
//!
//! All three decay the optimality gap `V(K) = C(K) - C(K*)` exponentially
//! inside the stabilizing set; the gradient flow carries the certified decay
//! constant `4μ²Λ_min(R)/‖X*‖∞`. Fixed-step integration is enough because
//! the flows are smooth on every sublevel set; a stage that leaves the
//! stabilizing set surfaces as a stability error, signalling that the step
//! `dt` is too large.

use nalgebra::Cholesky;

use crate::error::{Error, Result};
use crate::eval::{evaluate, PolicyEval, Workspace};
use crate::opt::MethodKind;
use crate::problem::{MjlsProblem, Policy};
use crate::riccati::{solve_care, CareSolution, CARE_MAX_ITER, CARE_TOL};
use crate::tuple::MatTuple;

/// Sampled trajectory of one method flow.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    /// Time grid, starting at 0.
    pub times: Vec<f64>,
    /// Cost at each grid point.
    pub costs: Vec<f64>,
    /// Optimality gap `C(K(t)) - C(K*)` at each grid point.
    pub gaps: Vec<f64>,
    /// Iterate snapshots on the grid.
    pub policies: Vec<Policy>,
    /// Optimal cost the gaps are measured against.
    pub optimal_cost: f64,
}

/// Integrates the selected flow from `k0` to `t_end`, solving the coupled
/// Riccati equations internally for the gap reference.
pub fn ode_flow(
    problem: &MjlsProblem,
    k0: &Policy,
    kind: MethodKind,
    dt: f64,
    t_end: f64,
) -> Result<FlowTrace> {
    let truth = solve_care(problem, CARE_TOL, CARE_MAX_ITER)?;
    ode_flow_with_truth(problem, k0, kind, dt, t_end, &truth)
}

/// As [`ode_flow`] with a precomputed Riccati solution.
pub fn ode_flow_with_truth(
    problem: &MjlsProblem,
    k0: &Policy,
    kind: MethodKind,
    dt: f64,
    t_end: f64,
    truth: &CareSolution,
) -> Result<FlowTrace> {
    if !(dt > 0.0) || !dt.is_finite() || !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain {
            context: format!("need positive finite dt and t_end, got dt={dt}, t_end={t_end}"),
        });
    }
    let mut ws = Workspace::default();
    let mut policy = k0.clone();
    let mut eval = evaluate(problem, &policy, &mut ws)?;
    let mut trace = FlowTrace {
        times: vec![0.0],
        costs: vec![eval.cost],
        gaps: vec![eval.cost - truth.cost],
        policies: vec![policy.clone()],
        optimal_cost: truth.cost,
    };
    let mut t = 0.0;
    while t < t_end - 1e-12 {
        let h = dt.min(t_end - t);
        policy = rk4_step(problem, &policy, kind, h, &mut ws)?;
        eval = evaluate(problem, &policy, &mut ws)?;
        t += h;
        trace.times.push(t);
        trace.costs.push(eval.cost);
        trace.gaps.push(eval.cost - truth.cost);
        trace.policies.push(policy.clone());
    }
    Ok(trace)
}

fn rk4_step(
    problem: &MjlsProblem,
    policy: &Policy,
    kind: MethodKind,
    h: f64,
    ws: &mut Workspace,
) -> Result<Policy> {
    let f = |p: &Policy, ws: &mut Workspace| -> Result<MatTuple> {
        let eval = evaluate(problem, p, ws)?;
        velocity(kind, &eval)
    };
    let k1 = f(policy, ws)?;
    let k2 = f(&Policy::new(policy.k.axpy(0.5 * h, &k1)), ws)?;
    let k3 = f(&Policy::new(policy.k.axpy(0.5 * h, &k2)), ws)?;
    let k4 = f(&Policy::new(policy.k.axpy(h, &k3)), ws)?;
    let mut combo = k1;
    combo = combo.axpy(2.0, &k2);
    combo = combo.axpy(2.0, &k3);
    combo = combo.axpy(1.0, &k4);
    Ok(Policy::new(policy.k.axpy(h / 6.0, &combo)))
}

fn velocity(kind: MethodKind, eval: &PolicyEval) -> Result<MatTuple> {
    match kind {
        MethodKind::GradientDescent => Ok(eval.grad.scale(-1.0)),
        MethodKind::NaturalPG => Ok(eval.l.scale(-2.0)),
        MethodKind::GaussNewton => {
            let mut blocks = Vec::with_capacity(eval.l.len());
            for i in 0..eval.l.len() {
                let chol = Cholesky::new(eval.psi.block(i).clone()).ok_or_else(|| {
                    Error::SingularSystem {
                        context: format!("curvature block {i} is not positive definite"),
                    }
                })?;
                blocks.push(chol.solve(eval.l.block(i)) * -2.0);
            }
            MatTuple::new(blocks)
        }
    }
}
