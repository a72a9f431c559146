//! Command-line front end: instance generation, reference solves, policy
//! optimization runs, analytic cross-checks and continuous flows.
//!
//! Exit codes: 0 success, 1 starting policy not mean-square stabilizing,
//! 2 malformed input, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use mjlqr::bench::{
    care_to_json, flow_to_csv, random_instance, read_gain, read_problem, run_experiment,
    suffixed_path, write_care, write_problem, write_text, ExperimentConfig, GenSpec, MethodRun,
};
use mjlqr::error::Error;
use mjlqr::ops;
use mjlqr::opt::{gradient, MethodKind, StepSize, TerminalStatus};
use mjlqr::riccati::{solve_care, CARE_MAX_ITER, CARE_TOL};
use mjlqr::tuple::MatTuple;
use mjlqr::value::cost;
use mjlqr::verify::{
    almost_smoothness_gap, appendix_bounds, fd_gradient, gradient_dominance_slack, mc_cost,
    ode_flow,
};
use mjlqr::Policy;

use nalgebra::DMatrix;

#[derive(Parser)]
#[command(
    name = "mjlqr",
    version,
    about = "Quadratic control of Markov jump linear systems by policy optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random problem instance as JSON.
    Gen(GenArgs),
    /// Solve the coupled Riccati equations of a problem file.
    Care(CareArgs),
    /// Run policy optimization and write convergence traces.
    Opt(OptArgs),
    /// Cross-check a policy against independent oracles and bounds.
    Check(CheckArgs),
    /// Integrate continuous policy flows and write their traces.
    Flow(FlowArgs),
}

#[derive(clap::Args)]
struct GenArgs {
    /// State dimension of every mode.
    #[arg(long, default_value_t = 4)]
    state_dim: usize,
    /// Input dimension of every mode.
    #[arg(long, default_value_t = 2)]
    input_dim: usize,
    /// Number of chain modes.
    #[arg(long, default_value_t = 3)]
    modes: usize,
    /// Seed for the deterministic generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dirichlet self-transition concentration; defaults to max(modes-1, 1).
    #[arg(long)]
    kappa: Option<f64>,
    /// Open-loop lifted spectral radius in (0, 1).
    #[arg(long, default_value_t = 0.9)]
    radius: f64,
    /// Output problem JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct CareArgs {
    /// Problem JSON file.
    problem: PathBuf,
    /// Relative fixed-point tolerance.
    #[arg(long, default_value_t = mjlqr::riccati::CARE_TOL)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = mjlqr::riccati::CARE_MAX_ITER)]
    max_iter: usize,
    /// Output JSON path; omitted means stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct OptArgs {
    /// Problem JSON file.
    problem: PathBuf,
    /// Update rule to run.
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    /// Step size: "auto" for the certified bound, or an explicit value.
    #[arg(long, default_value = "auto", value_parser = parse_eta)]
    eta: StepSize,
    /// Relative-error convergence tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Starting gain JSON file; omitted means the zero policy.
    #[arg(long)]
    k0: Option<PathBuf>,
    /// CSV trace path; with --method all, a -gd/-gn/-npg suffix is inserted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Combined convergence plot path.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(clap::Args)]
struct CheckArgs {
    /// Problem JSON file.
    problem: PathBuf,
    /// Gain JSON file to check; omitted means the zero policy.
    #[arg(long)]
    gain: Option<PathBuf>,
    /// Seed for probe directions and rollout noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte-Carlo rollout count.
    #[arg(long, default_value_t = 2000)]
    rollouts: usize,
}

#[derive(clap::Args)]
struct FlowArgs {
    /// Problem JSON file.
    problem: PathBuf,
    /// Flow field to integrate.
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    method: MethodArg,
    /// Integration horizon.
    #[arg(long, default_value_t = 5.0)]
    t_end: f64,
    /// Runge-Kutta step length.
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Starting gain JSON file; omitted means the zero policy.
    #[arg(long)]
    k0: Option<PathBuf>,
    /// CSV trace path; with --method all, a -gd/-gn/-npg suffix is inserted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Gd,
    Gn,
    Npg,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<MethodKind> {
        match self {
            MethodArg::Gd => vec![MethodKind::GradientDescent],
            MethodArg::Gn => vec![MethodKind::GaussNewton],
            MethodArg::Npg => vec![MethodKind::NaturalPG],
            MethodArg::All => vec![
                MethodKind::GradientDescent,
                MethodKind::GaussNewton,
                MethodKind::NaturalPG,
            ],
        }
    }
}

fn parse_eta(text: &str) -> Result<StepSize, String> {
    if text.eq_ignore_ascii_case("auto") {
        return Ok(StepSize::Auto);
    }
    let value: f64 = text
        .parse()
        .map_err(|_| format!("expected \"auto\" or a number, got {text:?}"))?;
    if value > 0.0 && value.is_finite() {
        Ok(StepSize::Fixed(value))
    } else {
        Err(format!("step size must be positive and finite, got {value}"))
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Stability { .. } => 1,
        Error::InvalidInput { .. }
        | Error::DimensionMismatch { .. }
        | Error::Parse(_)
        | Error::Io { .. } => 2,
        Error::NotConverged { .. }
        | Error::StepRejected { .. }
        | Error::SingularSystem { .. }
        | Error::Domain { .. }
        | Error::GenerationFailed { .. } => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => run_gen(args),
        Command::Care(args) => run_care(args),
        Command::Opt(args) => run_opt(args),
        Command::Check(args) => run_check(args),
        Command::Flow(args) => run_flow(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run_gen(args: GenArgs) -> Result<(), Error> {
    let mut spec = GenSpec::new(args.state_dim, args.input_dim, args.modes, args.seed);
    if let Some(kappa) = args.kappa {
        spec.dirichlet_kappa = kappa;
    }
    spec.target_radius = args.radius;
    let (problem, k0) = random_instance(&spec)?;
    let (stable, rho) = ops::is_mss(&problem, &k0)?;
    write_problem(&args.out, &problem)?;
    println!(
        "wrote {} (modes={}, d={}, k={}, open-loop rho={rho:.9}, mss={stable})",
        args.out.display(),
        problem.num_modes(),
        problem.state_dim(),
        problem.input_dim()
    );
    Ok(())
}

fn run_care(args: CareArgs) -> Result<(), Error> {
    let problem = read_problem(&args.problem)?;
    let solution = solve_care(&problem, args.tol, args.max_iter)?;
    eprintln!(
        "converged in {} iterations, residual {:.3e}, optimal cost {:.12e}",
        solution.iterations, solution.residual, solution.cost
    );
    match &args.out {
        Some(path) => write_care(path, &problem, &solution)?,
        None => println!("{}", care_to_json(&problem, &solution)),
    }
    Ok(())
}

fn run_opt(args: OptArgs) -> Result<(), Error> {
    let problem = read_problem(&args.problem)?;
    let k0 = match &args.k0 {
        Some(path) => read_gain(path, &problem)?,
        None => Policy::zeros(&problem),
    };
    let runs = args
        .method
        .methods()
        .into_iter()
        .map(|method| MethodRun {
            method,
            eta: args.eta,
        })
        .collect();
    let config = ExperimentConfig {
        runs,
        tol: args.tol,
        max_iter: args.max_iter,
        csv_base: args.out.clone(),
        svg_path: args.svg.clone(),
    };
    let outcome = run_experiment(&problem, &k0, &config)?;
    for (method, trace) in &outcome.traces {
        let last = trace.records.last().expect("trace has the starting record");
        let status = match trace.status {
            TerminalStatus::Converged => "converged",
            TerminalStatus::MaxIterReached => "hit iteration cap",
            TerminalStatus::AnomalousStationary => "stationary but suboptimal",
        };
        println!(
            "{:>3}: {} after {} iterations, cost {:.12e}, rel_err {}",
            method.tag(),
            status,
            last.iter,
            last.cost,
            last.rel_err
                .map(|e| format!("{e:.3e}"))
                .unwrap_or_else(|| "n/a".into())
        );
    }
    for path in &outcome.csv_paths {
        println!("wrote {}", path.display());
    }
    if let Some(svg) = &args.svg {
        println!("wrote {}", svg.display());
    }
    Ok(())
}

/// Draws a unit-norm probe direction with the policy's shape.
fn probe_direction(rng: &mut ChaCha8Rng, modes: usize, rows: usize, cols: usize) -> MatTuple {
    let blocks: Vec<DMatrix<f64>> = (0..modes)
        .map(|_| DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let dir = MatTuple::new(blocks).expect("uniform probe shapes");
    let norm = dir.norm_two();
    if norm > 0.0 {
        dir.scale(1.0 / norm)
    } else {
        dir
    }
}

fn run_check(args: CheckArgs) -> Result<(), Error> {
    let problem = read_problem(&args.problem)?;
    let policy = match &args.gain {
        Some(path) => read_gain(path, &problem)?,
        None => Policy::zeros(&problem),
    };
    let (stable, rho) = ops::is_mss(&problem, &policy)?;
    if !stable {
        return Err(Error::Stability { rho });
    }
    let mut failures = 0usize;
    let mut report = |name: &str, pass: bool, detail: String| {
        println!("[{}] {name}: {detail}", if pass { "pass" } else { "FAIL" });
        if !pass {
            failures += 1;
        }
    };

    let c = cost(&problem, &policy)?;
    println!("cost = {c:.12e}, closed-loop lifted radius = {rho:.9}");

    // Gradient against central finite differences.
    let grad = gradient(&problem, &policy)?;
    let fd = fd_gradient(&problem, &policy, 1e-5)?;
    let diff = (&grad - &fd).norm_two();
    let tol = (1e-5 * grad.norm_two()).max(1e-6);
    report(
        "gradient vs finite differences",
        diff <= tol,
        format!("difference {diff:.3e} (tolerance {tol:.3e})"),
    );

    // Local expansion gap against a nearby stabilizing policy.
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let dir = probe_direction(
        &mut rng,
        problem.num_modes(),
        problem.input_dim(),
        problem.state_dim(),
    );
    let mut delta = 0.05;
    let mut pair = None;
    for _ in 0..20 {
        let candidate = Policy::new(policy.k.axpy(delta, &dir));
        if ops::is_mss(&problem, &candidate)?.0 {
            pair = Some(candidate);
            break;
        }
        delta *= 0.5;
    }
    match pair {
        Some(other) => {
            let gap = almost_smoothness_gap(&problem, &policy, &other)?;
            let c_other = cost(&problem, &other)?;
            let scale = 1.0 + c.abs() + c_other.abs();
            report(
                "local cost expansion",
                gap <= 1e-9 * scale,
                format!("gap {gap:.3e} (tolerance {:.3e})", 1e-9 * scale),
            );
        }
        None => report(
            "local cost expansion",
            false,
            "no nearby stabilizing policy found".into(),
        ),
    }

    // Optimality gap bounded by the gradient norm.
    let truth = solve_care(&problem, CARE_TOL, CARE_MAX_ITER)?;
    let slack = gradient_dominance_slack(&problem, &policy, &truth)?;
    report(
        "gradient dominance",
        slack >= -1e-9,
        format!("slack {slack:.3e}"),
    );

    // Uniform bounds on values, covariances and directional derivatives.
    let directions: Vec<MatTuple> = (0..3)
        .map(|_| {
            probe_direction(
                &mut rng,
                problem.num_modes(),
                problem.input_dim(),
                problem.state_dim(),
            )
        })
        .collect();
    let bounds = appendix_bounds(&problem, &policy, &directions)?;
    let min_slack = bounds
        .derivative_slacks
        .iter()
        .chain(bounds.hessian_slacks.iter())
        .fold(
            bounds.value_slack.min(bounds.trace_slack),
            |acc, s| acc.min(*s),
        );
    report(
        "uniform bounds",
        min_slack >= -1e-9,
        format!("worst slack {min_slack:.3e}"),
    );

    // Monte-Carlo cost against the analytic value.
    let horizon = ((-12.0 * std::f64::consts::LN_10) / rho.ln()).ceil().max(1.0);
    let horizon = (horizon as usize).min(200_000);
    let estimate = mc_cost(&problem, &policy, horizon, args.rollouts, args.seed)?;
    let spread = 3.0 * estimate.stderr;
    report(
        "Monte-Carlo cost",
        (estimate.mean - c).abs() <= spread,
        format!(
            "estimate {:.6e} +/- {:.1e} vs analytic {c:.6e} ({} rollouts, horizon {})",
            estimate.mean, estimate.stderr, estimate.rollouts, estimate.horizon
        ),
    );

    drop(report);
    if failures > 0 {
        Err(Error::Domain {
            context: format!("{failures} check(s) failed"),
        })
    } else {
        Ok(())
    }
}

fn run_flow(args: FlowArgs) -> Result<(), Error> {
    let problem = read_problem(&args.problem)?;
    let k0 = match &args.k0 {
        Some(path) => read_gain(path, &problem)?,
        None => Policy::zeros(&problem),
    };
    let methods = args.method.methods();
    for method in &methods {
        let trace = ode_flow(&problem, &k0, *method, args.dt, args.t_end)?;
        let final_gap = *trace.gaps.last().expect("flow records the start");
        println!(
            "{:>3}: gap {:.3e} at t = {}",
            method.tag(),
            final_gap,
            args.t_end
        );
        if let Some(base) = &args.out {
            let path = if methods.len() == 1 {
                base.clone()
            } else {
                suffixed_path(base, method.tag())
            };
            write_text(&path, &flow_to_csv(&trace))?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}
