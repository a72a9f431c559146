//! Policy optimization for the quadratic control of discrete-time Markov
//! jump linear systems.
//!
//! A jump system switches its linear dynamics `x⁺ = A_i x + B_i u` according
//! to a finite Markov chain over modes `i`. This crate evaluates and
//! optimizes per-mode linear state feedback `u = -K_i x` under quadratic
//! stage costs:
//!
//! * [`tuple`], [`chain`], [`problem`]: matrix tuples, mode chains and
//!   validated problem instances.
//! * [`ops`]: the mode-coupled operators, their lifted matrix representation
//!   and the mean-square stability test.
//! * [`lyap`], [`value`]: residual-certified coupled Lyapunov solvers and
//!   policy evaluation (value, correlation, cost).
//! * [`riccati`]: coupled Riccati reference solution and optimal gain.
//! * [`opt`]: exact gradient and Hessian information, certified constants,
//!   and the three iterative methods (gradient descent, Gauss-Newton,
//!   natural policy gradient) with feasibility-preserving step sizes and
//!   per-step contraction certificates.
//! * [`verify`]: independent oracles (finite differences, Monte Carlo
//!   rollouts), identity and inequality checkers, and the continuous-time
//!   method flows.
//! * [`bench`]: seeded random instance generation, problem and trace
//!   serialization, experiment orchestration and SVG rendering.
//!
//! The binary `mjlqr` exposes generation, Riccati solving, optimization,
//! checking and flow integration as subcommands.

pub mod bench;
pub mod chain;
pub mod error;
mod eval;
pub mod lyap;
pub mod ops;
pub mod opt;
pub mod problem;
pub mod riccati;
pub mod tuple;
pub mod value;
pub mod verify;

pub use chain::MarkovChain;
pub use error::{Error, Result};
pub use problem::{MjlsProblem, Policy, ValueCertificate};
pub use tuple::MatTuple;
