//! Instance generation, serialization, experiment orchestration and plot
//! rendering for the benchmark CLI.

mod experiment;
mod gen;
mod io;
mod svg;

pub use experiment::{
    run_experiment, suffixed_path, ExperimentConfig, ExperimentOutcome, MethodRun,
};
pub use gen::{random_instance, GenSpec};
pub use io::{
    care_to_json, flow_to_csv, problem_from_json, problem_to_json, read_gain, read_problem,
    trace_to_csv, write_care, write_gain, write_problem, write_text, CareFile, GainFile,
};
pub use svg::render_rel_err_svg;
