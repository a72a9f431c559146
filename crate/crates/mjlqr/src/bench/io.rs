//! File formats for the CLI: JSON problem and gain files, CSV traces.
//!
//! Matrices are stored as row-major flat arrays, one per mode, so files stay
//! readable and diffable. All writers produce deterministic bytes for a given
//! input.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain::MarkovChain;
use crate::error::{Error, Result};
use crate::opt::OptTrace;
use crate::problem::{MjlsProblem, Policy};
use crate::riccati::CareSolution;
use crate::tuple::MatTuple;
use crate::verify::FlowTrace;

/// On-disk schema version accepted by the readers.
const FILE_VERSION: u32 = 1;

/// JSON shape of a problem instance.
#[derive(Serialize, Deserialize)]
struct ProblemFile {
    version: u32,
    num_modes: usize,
    state_dim: usize,
    input_dim: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "Q")]
    q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    r: Vec<Vec<f64>>,
    transition: Vec<Vec<f64>>,
    initial_dist: Vec<f64>,
    initial_covariance: Vec<f64>,
}

/// JSON shape of a policy gain file.
#[derive(Serialize, Deserialize)]
pub struct GainFile {
    /// Schema version, currently 1.
    pub version: u32,
    /// Number of chain modes.
    pub num_modes: usize,
    /// Row count of each gain block.
    pub input_dim: usize,
    /// Column count of each gain block.
    pub state_dim: usize,
    /// Row-major gain entries, one flat array per mode.
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
}

/// JSON shape of a solved control problem.
#[derive(Serialize, Deserialize)]
pub struct CareFile {
    /// Schema version, currently 1.
    pub version: u32,
    /// Number of chain modes.
    pub num_modes: usize,
    /// State dimension.
    pub state_dim: usize,
    /// Input dimension.
    pub input_dim: usize,
    /// Optimal cost of the instance.
    pub cost: f64,
    /// Fixed-point iterations the solver spent.
    pub iterations: usize,
    /// Relative residual of the returned value matrices.
    pub residual: f64,
    /// Row-major optimal value matrices, one flat array per mode.
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    /// Row-major optimal gains, one flat array per mode.
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
}

fn mat_to_rowmajor(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn tuple_to_rowmajor(t: &MatTuple) -> Vec<Vec<f64>> {
    t.blocks().iter().map(mat_to_rowmajor).collect()
}

fn tuple_from_rowmajor(
    flat: &[Vec<f64>],
    rows: usize,
    cols: usize,
    what: &str,
) -> Result<MatTuple> {
    let mut blocks = Vec::with_capacity(flat.len());
    for (i, entries) in flat.iter().enumerate() {
        if entries.len() != rows * cols {
            return Err(Error::Parse(format!(
                "{what} mode {i} has {} entries, expected {rows}x{cols}",
                entries.len()
            )));
        }
        blocks.push(DMatrix::from_row_slice(rows, cols, entries));
    }
    MatTuple::new(blocks).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

/// Serializes a problem to pretty JSON.
pub fn problem_to_json(problem: &MjlsProblem) -> String {
    let chain = problem.chain();
    let n = problem.num_modes();
    let file = ProblemFile {
        version: FILE_VERSION,
        num_modes: n,
        state_dim: problem.state_dim(),
        input_dim: problem.input_dim(),
        a: tuple_to_rowmajor(problem.a()),
        b: tuple_to_rowmajor(problem.b()),
        q: tuple_to_rowmajor(problem.q()),
        r: tuple_to_rowmajor(problem.r()),
        transition: (0..n)
            .map(|i| (0..n).map(|j| chain.prob(i, j)).collect())
            .collect(),
        initial_dist: (0..n).map(|i| chain.initial_dist()[i]).collect(),
        initial_covariance: mat_to_rowmajor(problem.sigma0()),
    };
    serde_json::to_string_pretty(&file).expect("problem serialization cannot fail")
}

/// Parses a problem from JSON, validating it through the usual constructors.
pub fn problem_from_json(text: &str) -> Result<MjlsProblem> {
    let file: ProblemFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.version != FILE_VERSION {
        return Err(Error::Parse(format!(
            "unsupported file version {} (expected {FILE_VERSION})",
            file.version
        )));
    }
    let n = file.num_modes;
    let d = file.state_dim;
    let k = file.input_dim;
    if n == 0 || d == 0 || k == 0 {
        return Err(Error::Parse(
            "num_modes, state_dim and input_dim must all be positive".into(),
        ));
    }
    for field in [&file.a, &file.b, &file.q, &file.r] {
        if field.len() != n {
            return Err(Error::Parse(format!(
                "matrix tuple has {} modes, expected {n}",
                field.len()
            )));
        }
    }
    let a = tuple_from_rowmajor(&file.a, d, d, "A")?;
    let b = tuple_from_rowmajor(&file.b, d, k, "B")?;
    let q = tuple_from_rowmajor(&file.q, d, d, "Q")?;
    let r = tuple_from_rowmajor(&file.r, k, k, "R")?;
    if file.transition.len() != n || file.transition.iter().any(|row| row.len() != n) {
        return Err(Error::Parse(format!("transition must be {n}x{n}")));
    }
    if file.initial_dist.len() != n {
        return Err(Error::Parse(format!("initial_dist must have {n} entries")));
    }
    let flat: Vec<f64> = file.transition.iter().flatten().copied().collect();
    let chain = MarkovChain::new(
        DMatrix::from_row_slice(n, n, &flat),
        DVector::from_vec(file.initial_dist),
    )
    .map_err(|e| Error::Parse(format!("chain: {e}")))?;
    if file.initial_covariance.len() != d * d {
        return Err(Error::Parse(format!(
            "initial_covariance has {} entries, expected {}",
            file.initial_covariance.len(),
            d * d
        )));
    }
    let sigma0 = DMatrix::from_row_slice(d, d, &file.initial_covariance);
    MjlsProblem::new(a, b, q, r, chain, sigma0).map_err(|e| Error::Parse(format!("problem: {e}")))
}

/// Writes a problem JSON file.
pub fn write_problem(path: &Path, problem: &MjlsProblem) -> Result<()> {
    write_text(path, &problem_to_json(problem))
}

/// Reads and validates a problem JSON file.
pub fn read_problem(path: &Path) -> Result<MjlsProblem> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, &e))?;
    problem_from_json(&text)
}

/// Writes a policy gain JSON file.
pub fn write_gain(path: &Path, policy: &Policy) -> Result<()> {
    let file = GainFile {
        version: FILE_VERSION,
        num_modes: policy.k.len(),
        input_dim: policy.k.nrows(),
        state_dim: policy.k.ncols(),
        k: tuple_to_rowmajor(&policy.k),
    };
    let text = serde_json::to_string_pretty(&file).expect("gain serialization cannot fail");
    write_text(path, &text)
}

/// Reads a policy gain JSON file and checks it against the problem shape.
pub fn read_gain(path: &Path, problem: &MjlsProblem) -> Result<Policy> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, &e))?;
    let file: GainFile = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.version != FILE_VERSION {
        return Err(Error::Parse(format!(
            "unsupported file version {} (expected {FILE_VERSION})",
            file.version
        )));
    }
    if file.num_modes != problem.num_modes()
        || file.input_dim != problem.input_dim()
        || file.state_dim != problem.state_dim()
    {
        return Err(Error::Parse(format!(
            "gain shape {}x{} over {} modes does not match problem {}x{} over {}",
            file.input_dim,
            file.state_dim,
            file.num_modes,
            problem.input_dim(),
            problem.state_dim(),
            problem.num_modes()
        )));
    }
    let k = tuple_from_rowmajor(&file.k, file.input_dim, file.state_dim, "K")?;
    let policy = Policy::new(k);
    problem
        .check_policy(&policy)
        .map_err(|e| Error::Parse(format!("gain: {e}")))?;
    Ok(policy)
}

/// Serializes a solved problem (value matrices, gains, cost) to pretty JSON.
pub fn care_to_json(problem: &MjlsProblem, solution: &CareSolution) -> String {
    let file = CareFile {
        version: FILE_VERSION,
        num_modes: problem.num_modes(),
        state_dim: problem.state_dim(),
        input_dim: problem.input_dim(),
        cost: solution.cost,
        iterations: solution.iterations,
        residual: solution.residual,
        p: tuple_to_rowmajor(&solution.p_star),
        k: tuple_to_rowmajor(&solution.k_star.k),
    };
    serde_json::to_string_pretty(&file).expect("solution serialization cannot fail")
}

/// Writes the solved problem as JSON.
pub fn write_care(path: &Path, problem: &MjlsProblem, solution: &CareSolution) -> Result<()> {
    write_text(path, &care_to_json(problem, solution))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders an optimizer trace as CSV with one row per iterate.
///
/// Columns are `iter,cost,rel_err,grad_norm2,eta,rate_bound,rho_lifted`;
/// optional columns are left empty when the run had no reference solution or
/// no certified step bound.
pub fn trace_to_csv(trace: &OptTrace) -> String {
    let mut out = String::from("iter,cost,rel_err,grad_norm2,eta,rate_bound,rho_lifted\n");
    for rec in &trace.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            rec.iter,
            rec.cost,
            fmt_opt(rec.rel_err),
            rec.grad_norm2,
            rec.eta,
            fmt_opt(rec.rate_bound),
            rec.rho_lifted
        ));
    }
    out
}

/// Renders a continuous-flow trace as CSV with columns `t,cost,gap`.
pub fn flow_to_csv(trace: &FlowTrace) -> String {
    let mut out = String::from("t,cost,gap\n");
    for ((t, cost), gap) in trace
        .times
        .iter()
        .zip(trace.costs.iter())
        .zip(trace.gaps.iter())
    {
        out.push_str(&format!("{t},{cost},{gap}\n"));
    }
    out
}

/// Writes a text file, mapping failures to an I/O error carrying the path.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, &e))
}
