//! Command-line harness over every module: config ingestion, experiment
//! execution, and trace/report emission.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, unreadable or
//! malformed inputs), 2 on numerical failure (divergence, exhausted
//! budgets, replay verification). When `--out` is given, every artifact is
//! written under that directory next to a `manifest.json` recording the
//! subcommand, config path, seed, tool version, and the SHA-256 of the
//! config bytes. Log verbosity comes from the `GW_LOG` environment
//! variable. Floats in machine outputs carry 17 significant digits.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::asyncfix::{self, DecomposedMap, RunStatus, ScheduleKind};
use crate::canon::float17;
use crate::coalgebra::{bisimilarity_partition, check_homomorphism, HomVerdict, Lts};
use crate::economy::{self, NetworkEconomy};
use crate::mumble::{parse_formula, parse_type, FiniteCategory, Model, Presheaf, Type, Value};
use crate::url::{async_q_learning, FiniteMdp, LearnConfig};
use crate::vi::{
    self, Factor, SolveStatus, StepSchedule, StochasticVIProblem, VIProblem, ViError,
};
use crate::workspace::{summarize, EventLog, Instance, WorkspaceConfig};

enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn usage(e: impl std::fmt::Display) -> CliError {
        CliError::Usage(e.to_string())
    }

    fn numerical(e: impl std::fmt::Display) -> CliError {
        CliError::Numerical(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "gw", version, about = "Global workspace engine", max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coalgebra and labeled-transition-system checks.
    #[command(subcommand)]
    Coalg(CoalgCommand),
    /// Asynchronous fixed-point iteration.
    #[command(subcommand)]
    Fix(FixCommand),
    /// Asynchronous tabular Q-learning.
    #[command(subcommand)]
    Qlearn(QlearnCommand),
    /// Variational-inequality solvers.
    #[command(subcommand)]
    Vi(ViCommand),
    /// Three-tier network economy.
    #[command(subcommand)]
    Economy(EconomyCommand),
    /// Internal logic of finite presheaf toposes.
    #[command(subcommand)]
    Mumble(MumbleCommand),
    /// Discrete-event global workspace simulation.
    #[command(subcommand)]
    Workspace(WorkspaceCommand),
}

#[derive(Subcommand)]
enum CoalgCommand {
    /// Partition the states of an LTS by bisimilarity.
    Bisim(BisimArgs),
    /// Check a state map for the coalgebra homomorphism property.
    CheckHom(CheckHomArgs),
}

#[derive(Subcommand)]
enum FixCommand {
    /// Run an asynchronous iteration to its fixed point.
    Run(FixArgs),
}

#[derive(Subcommand)]
enum QlearnCommand {
    /// Learn a Q-table on a finite MDP.
    Run(QlearnArgs),
}

#[derive(Subcommand)]
enum ViCommand {
    /// Deterministic projection method on an affine problem.
    Solve(ViSolveArgs),
    /// Two-step stochastic projection method on a noisy affine problem.
    SolveStochastic(ViStochasticArgs),
}

#[derive(Subcommand)]
enum EconomyCommand {
    /// Solve a network economy for its equilibrium.
    Equilibrium(EconomyArgs),
}

#[derive(Subcommand)]
enum MumbleCommand {
    /// Decide whether a stage forces a formula.
    Force(ForceArgs),
}

#[derive(Subcommand)]
enum WorkspaceCommand {
    /// Run the workspace simulation from a config.
    Run(WorkspaceRunArgs),
    /// Replay an event log against a config and verify it.
    Replay(WorkspaceReplayArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutArgs {
    /// Directory for reports, traces, and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct BisimArgs {
    /// LTS as JSON: states, labels, transitions.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct CheckHomArgs {
    /// JSON with `source` and `target` LTSs and a state `map`.
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct FixArgs {
    /// Affine map, start point, and schedule in TOML.
    #[arg(long)]
    config: PathBuf,
    /// Override the schedule seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Stop when the max-norm residual drops this low.
    #[arg(long)]
    tol: Option<f64>,
    /// Override the schedule horizon.
    #[arg(long)]
    max_iter: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct QlearnArgs {
    /// MDP as JSON: states, actions, gamma, transitions, rewards.
    #[arg(long)]
    config: PathBuf,
    /// Learning seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Update budget.
    #[arg(long)]
    max_iter: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ViSolveArgs {
    /// Affine mapping and constraint factors in TOML.
    #[arg(long)]
    config: PathBuf,
    /// Convergence threshold on the natural residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    max_iter: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ViStochasticArgs {
    /// Noisy affine problem and step schedule in TOML.
    #[arg(long)]
    config: PathBuf,
    /// Noise and factor-sampling seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Fail unless the final gap reaches this threshold.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration count.
    #[arg(long)]
    max_iter: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct EconomyArgs {
    /// Tier sizes, coefficients, and caps in TOML.
    #[arg(long)]
    config: PathBuf,
    /// Convergence threshold on the natural residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    max_iter: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ForceArgs {
    /// Finite category as JSON.
    #[arg(long)]
    cat: PathBuf,
    /// Model (with `types`) or bare presheaf as JSON. Omitted: a constant
    /// one-point presheaf over the category stands in.
    #[arg(long)]
    presheaf: Option<PathBuf>,
    /// Formula in the internal language.
    #[arg(long)]
    formula: String,
    /// Stage (object) at which to force.
    #[arg(long)]
    stage: String,
    /// Element interpreting the formula's free variable.
    #[arg(long)]
    element: Option<String>,
    /// Type of the free variable; defaults to the model's only type.
    #[arg(long = "type")]
    ty: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct WorkspaceRunArgs {
    /// Workspace simulation config in TOML.
    #[arg(long)]
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct WorkspaceReplayArgs {
    /// Workspace simulation config in TOML.
    #[arg(long)]
    config: PathBuf,
    /// Event log to replay (JSON-lines).
    #[arg(long)]
    log: PathBuf,
    /// Seed the original run was started with, when it overrode the config.
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

/// Written next to every output so a run can be reproduced exactly.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: String,
    pub seed: Option<u64>,
    pub out: String,
    pub version: String,
    pub config_sha256: String,
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GW_LOG"))
        .try_init()
        .ok();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Coalg(CoalgCommand::Bisim(args)) => coalg_bisim(args),
        Command::Coalg(CoalgCommand::CheckHom(args)) => coalg_check_hom(args),
        Command::Fix(FixCommand::Run(args)) => fix_run(args),
        Command::Qlearn(QlearnCommand::Run(args)) => qlearn_run(args),
        Command::Vi(ViCommand::Solve(args)) => vi_solve(args),
        Command::Vi(ViCommand::SolveStochastic(args)) => vi_solve_stochastic(args),
        Command::Economy(EconomyCommand::Equilibrium(args)) => economy_equilibrium(args),
        Command::Mumble(MumbleCommand::Force(args)) => mumble_force(args),
        Command::Workspace(WorkspaceCommand::Run(args)) => workspace_run(args),
        Command::Workspace(WorkspaceCommand::Replay(args)) => workspace_replay(args),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

struct Emitter {
    dir: Option<PathBuf>,
}

impl Emitter {
    fn prepare(
        out: &OutArgs,
        subcommand: &str,
        config: &Path,
        seed: Option<u64>,
        config_bytes: &[u8],
    ) -> Result<Emitter, CliError> {
        let Some(dir) = &out.out else {
            return Ok(Emitter { dir: None });
        };
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
        let manifest = RunManifest {
            subcommand: subcommand.to_string(),
            config: config.display().to_string(),
            seed,
            out: dir.display().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config_bytes),
        };
        let emitter = Emitter { dir: Some(dir.clone()) };
        emitter.write(
            "manifest.json",
            serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
        )?;
        Ok(emitter)
    }

    fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let path = dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
    }
}

fn float_row(values: &[f64]) -> String {
    values.iter().map(|v| float17(*v)).collect::<Vec<_>>().join(" ")
}

fn float_json(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| float17(*v)).collect()
}

fn coalg_bisim(args: BisimArgs) -> Result<(), CliError> {
    let text = read_file(&args.config)?;
    let lts = Lts::from_json(&text).map_err(CliError::usage)?;
    let blocks = bisimilarity_partition(&lts);
    let named: Vec<Vec<String>> = blocks
        .iter()
        .map(|b| b.iter().cloned().collect())
        .collect();
    let emitter = Emitter::prepare(&args.out, "coalg bisim", &args.config, None, text.as_bytes())?;
    match args.out.format {
        Format::Json => {
            let body = serde_json::to_string_pretty(&named).expect("partition serializes");
            println!("{body}");
            emitter.write("partition.json", body)?;
        }
        Format::Csv => {
            let mut body = String::from("state,class\n");
            for (class, block) in named.iter().enumerate() {
                for state in block {
                    body.push_str(&format!("{state},{class}\n"));
                }
            }
            print!("{body}");
            emitter.write("partition.csv", body)?;
        }
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct HomFile {
    source: serde_json::Value,
    target: serde_json::Value,
    map: BTreeMap<String, String>,
}

fn coalg_check_hom(args: CheckHomArgs) -> Result<(), CliError> {
    let text = read_file(&args.config)?;
    let file: HomFile = serde_json::from_str(&text).map_err(CliError::usage)?;
    let source = Lts::from_json(&file.source.to_string()).map_err(CliError::usage)?;
    let target = Lts::from_json(&file.target.to_string()).map_err(CliError::usage)?;
    let src = source.to_coalgebra().map_err(CliError::usage)?;
    let dst = target.to_coalgebra().map_err(CliError::usage)?;
    let verdict = check_homomorphism(&src, &dst, &file.map).map_err(CliError::usage)?;
    let report = match &verdict {
        HomVerdict::Holds => serde_json::json!({ "holds": true }),
        HomVerdict::Fails(failure) => serde_json::json!({
            "holds": false,
            "state": failure.state,
            "mapped_structure": failure.mapped_structure.to_string(),
            "structure_of_image": failure.structure_of_image.to_string(),
        }),
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{body}");
    let emitter =
        Emitter::prepare(&args.out, "coalg check-hom", &args.config, None, text.as_bytes())?;
    emitter.write("verdict.json", body)?;
    Ok(())
}

#[derive(serde::Deserialize)]
struct FixFile {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
    #[serde(default)]
    dims: Option<Vec<usize>>,
    #[serde(default)]
    x0: Option<Vec<f64>>,
    #[serde(default)]
    tol: Option<f64>,
    schedule: ScheduleFile,
}

#[derive(serde::Deserialize)]
struct ScheduleFile {
    kind: ScheduleKind,
    horizon: u64,
    b1: u64,
    b2: u64,
    #[serde(default)]
    seed: u64,
}

fn fix_run(args: FixArgs) -> Result<(), CliError> {
    let text = read_file(&args.config)?;
    let file: FixFile = toml::from_str(&text).map_err(CliError::usage)?;
    let dims = file
        .dims
        .clone()
        .unwrap_or_else(|| vec![1; file.offset.len()]);
    let map = DecomposedMap::affine(file.matrix, file.offset, dims).map_err(CliError::usage)?;
    let horizon = args.max_iter.unwrap_or(file.schedule.horizon);
    let seed = args.seed.unwrap_or(file.schedule.seed);
    let schedule = asyncfix::make_schedule(
        file.schedule.kind,
        map.n_components(),
        horizon,
        file.schedule.b1,
        file.schedule.b2,
        seed,
    )
    .map_err(CliError::usage)?;
    let x0 = file.x0.unwrap_or_else(|| vec![0.0; map.total_dim()]);
    let tol = args.tol.or(file.tol).unwrap_or(1e-10);
    let (x, trace) =
        asyncfix::run_async(&map, &schedule, &x0, tol).map_err(CliError::numerical)?;
    let residual = trace.records.last().map(|r| r.residual).unwrap_or(f64::NAN);

    let emitter =
        Emitter::prepare(&args.out, "fix run", &args.config, Some(seed), text.as_bytes())?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv).map_err(CliError::usage)?;
    emitter.write("trace.csv", csv)?;
    let report = serde_json::json!({
        "status": match &trace.status {
            RunStatus::Converged { steps } => format!("converged after {steps} steps"),
            RunStatus::HorizonExhausted { .. } => "horizon exhausted".to_string(),
        },
        "x": float_json(&x),
        "residual": float17(residual),
    });
    emitter.write(
        "result.json",
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;

    println!("fixed point: {}", float_row(&x));
    println!("residual: {}", float17(residual));
    match trace.status {
        RunStatus::Converged { steps } => {
            println!("status: converged after {steps} steps");
            Ok(())
        }
        RunStatus::HorizonExhausted { residual } => Err(CliError::Numerical(format!(
            "horizon {horizon} exhausted at residual {}",
            float17(residual)
        ))),
    }
}

fn qlearn_run(args: QlearnArgs) -> Result<(), CliError> {
    let text = read_file(&args.config)?;
    let mdp = FiniteMdp::from_json(&text).map_err(CliError::usage)?;
    let budget = args.max_iter.unwrap_or(100_000);
    let seed = args.seed.unwrap_or(0);
    let cfg = LearnConfig {
        budget,
        seed,
        record_stride: (budget / 1_000).max(1),
        ..LearnConfig::default()
    };
    let (q, trace) = async_q_learning(&mdp, &cfg).map_err(CliError::numerical)?;
    let named = q.to_named(&mdp);

    let emitter =
        Emitter::prepare(&args.out, "qlearn run", &args.config, Some(seed), text.as_bytes())?;
    let mut csv = Vec::new();
    trace.trace.write_csv(&mut csv).map_err(CliError::usage)?;
    emitter.write("trace.csv", csv)?;

    match args.out.format {
        Format::Json => {
            let canonical: BTreeMap<&String, String> =
                named.iter().map(|(k, v)| (k, float17(*v))).collect();
            let body = serde_json::to_string_pretty(&canonical).expect("table serializes");
            println!("{body}");
            emitter.write("q.json", body)?;
        }
        Format::Csv => {
            let mut body = String::from("state,action,q\n");
            for (key, value) in &named {
                body.push_str(&format!("{key},{}\n", float17(*value)));
            }
            print!("{body}");
            emitter.write("q.csv", body)?;
        }
    }
    if !trace.unvisited.is_empty() {
        log::warn!("{} state-action cells were never visited", trace.unvisited.len());
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct ViFile {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    x0: Option<Vec<f64>>,
    factors: Vec<Factor>,
}

fn affine_problem(
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
    factors: Vec<Factor>,
) -> Result<VIProblem, CliError> {
    let n = offset.len();
    if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
        return Err(CliError::Usage(format!(
            "matrix must be {n}x{n} to match the offset"
        )));
    }
    let mapping = move |x: &[f64]| {
        matrix
            .iter()
            .zip(&offset)
            .map(|(row, q)| q + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>())
            .collect()
    };
    VIProblem::new(mapping, factors).map_err(CliError::usage)
}

fn default_alpha(matrix: &[Vec<f64>]) -> Result<f64, CliError> {
    let worst = matrix
        .iter()
        .map(|row| row.iter().map(|a| a.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    if worst > 0.0 {
        Ok(1.0 / worst)
    } else {
        Err(CliError::Usage(
            "the mapping is constant; set alpha explicitly".to_string(),
        ))
    }
}

fn vi_solve(args: ViSolveArgs) -> Result<(), CliError> {
    let text = read_file(&args.config)?;
    let file: ViFile = toml::from_str(&text).map_err(CliError::usage)?;
    let alpha = match file.alpha {
        Some(a) => a,
        None => default_alpha(&file.matrix)?,
    };
    let problem = affine_problem(file.matrix, file.offset, file.factors)?;
    let x0 = file.x0.unwrap_or_else(|| vec![0.0; problem.dim()]);
    let tol = args.tol.unwrap_or(1e-10);
    let max_iter = args.max_iter.unwrap_or(1_000_000);
    let (x, trace) = vi::solve_projection(
        &problem,
        alpha,
        tol,
        max_iter,
        &x0,
        (max_iter / 100).max(1),
    )
    .map_err(CliError::numerical)?;
    let gap = vi::gap_residual(&problem, &x).map_err(CliError::numerical)?;

    let emitter = Emitter::prepare(&args.out, "vi solve", &args.config, None, text.as_bytes())?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv).map_err(CliError::usage)?;
    emitter.write("trace.csv", csv)?;
    let report = serde_json::json!({
        "x": float_json(&x),
        "gap": float17(gap),
        "status": match &trace.status {
            SolveStatus::Converged { iters } => format!("converged after {iters} iterations"),
            SolveStatus::BudgetExhausted { .. } => "budget exhausted".to_string(),
        },
    });
    emitter.write(
        "solution.json",
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;

    println!("solution: {}", float_row(&x));
    println!("gap: {}", float17(gap));
    match trace.status {
        SolveStatus::Converged { iters } => {
            println!("status: converged after {iters} iterations");
            Ok(())
        }
        SolveStatus::BudgetExhausted { gap } => Err(CliError::Numerical(format!(
            "budget {max_iter} exhausted at gap {}",
            float17(gap)
        ))),
    }
}

#[derive(serde::Deserialize)]
struct StochasticFile {
    matrix: Vec<Vec<f64>>,
    offset: Vec<f64>,
    factors: Vec<Factor>,
    /// Half-width of the additive uniform noise on each coordinate.
    noise: f64,
    #[serde(default)]
    x0: Option<Vec<f64>>,
    #[serde(default)]
    iters: Option<u64>,
    schedule: StepSchedule,
}

fn vi_solve_stochastic(args: ViStochasticArgs) -> Result<(), CliError> {
    let text = read_file(&args.config)?;
    let file: StochasticFile = toml::from_str(&text).map_err(CliError::usage)?;
    if !(file.noise >= 0.0 && file.noise.is_finite()) {
        return Err(CliError::Usage(format!(
            "noise must be finite and nonnegative, got {}",
            file.noise
        )));
    }
    let base = affine_problem(file.matrix.clone(), file.offset.clone(), file.factors)?;
    let x0 = file.x0.unwrap_or_else(|| vec![0.0; base.dim()]);
    let iters = args.max_iter.or(file.iters).unwrap_or(1_000_000);
    let seed = args.seed.unwrap_or(0);

    let matrix = file.matrix;
    let offset = file.offset;
    let noise = file.noise;
    let noisy = move |x: &[f64], rng: &mut rand_chacha::ChaCha8Rng| {
        matrix
            .iter()
            .zip(&offset)
            .map(|(row, q)| {
                let clean = q + row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
                if noise > 0.0 {
                    clean + rand::Rng::gen_range(rng, -noise..noise)
                } else {
                    clean
                }
            })
            .collect()
    };
    let svi = StochasticVIProblem::new(base, noisy);
    let (x, trace) = vi::solve_two_step_stochastic(
        &svi,
        &file.schedule,
        iters,
        seed,
        &x0,
        (iters / 100).max(1),
    )
    .map_err(|e| match e {
        ViError::Diverged { .. } | ViError::NonFinite { .. } => CliError::numerical(e),
        other => CliError::usage(other),
    })?;
    let gap = vi::gap_residual(svi.base(), &x).map_err(CliError::numerical)?;

    let emitter = Emitter::prepare(
        &args.out,
        "vi solve-stochastic",
        &args.config,
        Some(seed),
        text.as_bytes(),
    )?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv).map_err(CliError::usage)?;
    emitter.write("trace.csv", csv)?;
    let report = serde_json::json!({
        "x": float_json(&x),
        "gap": float17(gap),
        "iters": iters,
    });
    emitter.write(
        "solution.json",
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;

    println!("solution: {}", float_row(&x));
    println!("gap: {}", float17(gap));
    if let Some(tol) = args.tol {
        if !(gap <= tol) {
            return Err(CliError::Numerical(format!(
                "final gap {} misses the requested tolerance {tol:e}",
                float17(gap)
            )));
        }
    }
    Ok(())
}

fn economy_equilibrium(args: EconomyArgs) -> Result<(), CliError> {
    let text = read_file(&args.config)?;
    let econ = NetworkEconomy::from_toml(&text).map_err(CliError::usage)?;
    let tol = args.tol.unwrap_or(1e-8);
    let max_iter = args.max_iter.unwrap_or(1_000_000);
    let alpha = economy::safe_step(&econ);
    let (state, trace) =
        economy::solve_equilibrium(&econ, alpha, tol, max_iter).map_err(CliError::numerical)?;
    let vi_problem = economy::to_vi(&econ).map_err(CliError::numerical)?;
    let gap = vi::gap_residual(&vi_problem, &state.stacked()).map_err(CliError::numerical)?;
    let utilities: Vec<f64> = (0..econ.tiers().0)
        .map(|i| economy::producer_utility(&econ, i, &state))
        .collect::<Result<_, _>>()
        .map_err(CliError::numerical)?;
    let response = economy::best_response_check(&econ, &state, 1e-4).map_err(CliError::numerical)?;

    let emitter =
        Emitter::prepare(&args.out, "economy equilibrium", &args.config, None, text.as_bytes())?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv).map_err(CliError::usage)?;
    emitter.write("trace.csv", csv)?;
    let report = serde_json::json!({
        "flows": float_json(&state.flows),
        "qualities": float_json(&state.qualities),
        "prices": float_json(&state.prices),
        "utilities": float_json(&utilities),
        "gap": float17(gap),
        "best_response": {
            "equilibrium": response.equilibrium,
            "max_improvement": float17(response.max_improvement),
        },
    });
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    emitter.write("report.json", &body)?;
    if args.out.format == Format::Csv {
        let mut rows = String::from("variable,index,value\n");
        for (name, values) in [
            ("flow", &state.flows),
            ("quality", &state.qualities),
            ("price", &state.prices),
        ] {
            for (i, v) in values.iter().enumerate() {
                rows.push_str(&format!("{name},{i},{}\n", float17(*v)));
            }
        }
        print!("{rows}");
        emitter.write("state.csv", rows)?;
    } else {
        println!("{body}");
    }
    match trace.status {
        SolveStatus::Converged { .. } => Ok(()),
        SolveStatus::BudgetExhausted { gap } => Err(CliError::Numerical(format!(
            "budget {max_iter} exhausted at gap {}",
            float17(gap)
        ))),
    }
}

fn constant_presheaf(cat: Arc<FiniteCategory>, point: &str) -> Result<Presheaf, CliError> {
    let sets: BTreeMap<String, Vec<Value>> = cat
        .objects()
        .iter()
        .map(|o| (o.clone(), vec![Value::atom(point)]))
        .collect();
    let maps: BTreeMap<String, BTreeMap<Value, Value>> = cat
        .arrows()
        .iter()
        .map(|a| {
            (
                a.name.clone(),
                BTreeMap::from([(Value::atom(point), Value::atom(point))]),
            )
        })
        .collect();
    Presheaf::new(cat, sets, maps).map_err(CliError::usage)
}

fn mumble_force(args: ForceArgs) -> Result<(), CliError> {
    let cat_text = read_file(&args.cat)?;
    let cat = Arc::new(FiniteCategory::from_json(&cat_text).map_err(CliError::usage)?);

    let fallback_type = args.ty.clone().unwrap_or_else(|| "X".to_string());
    let model = match &args.presheaf {
        Some(path) => {
            let text = read_file(path)?;
            let raw: serde_json::Value = serde_json::from_str(&text).map_err(CliError::usage)?;
            if raw.get("types").is_some() {
                Model::from_json(cat.clone(), &text).map_err(CliError::usage)?
            } else {
                let presheaf = Presheaf::from_json(cat.clone(), &text).map_err(CliError::usage)?;
                let mut model = Model::new(cat.clone());
                model.add_type(&fallback_type, presheaf).map_err(CliError::usage)?;
                model
            }
        }
        None => {
            let point = args.element.as_deref().unwrap_or("pt");
            let mut model = Model::new(cat.clone());
            model
                .add_type(&fallback_type, constant_presheaf(cat.clone(), point)?)
                .map_err(CliError::usage)?;
            model
        }
    };

    let formula = parse_formula(&args.formula).map_err(CliError::usage)?;
    let free = formula.free_vars();
    let forcing = if free.is_empty() {
        model.forces_closed(&formula, &args.stage).map_err(CliError::usage)?
    } else if free.len() == 1 {
        let var = free.iter().next().expect("one free variable").clone();
        let element = args.element.as_deref().ok_or_else(|| {
            CliError::Usage(format!("formula has free variable `{var}`; pass --element"))
        })?;
        let ty: Type = match &args.ty {
            Some(text) => parse_type(text).map_err(CliError::usage)?,
            None => {
                let mut names = model.type_names();
                match (names.next(), names.next()) {
                    (Some(only), None) => Type::base(only),
                    _ => {
                        return Err(CliError::Usage(
                            "model has several types; pass --type for the free variable"
                                .to_string(),
                        ))
                    }
                }
            }
        };
        model
            .forces(&var, &ty, &formula, &args.stage, &Value::atom(element))
            .map_err(CliError::usage)?
    } else {
        return Err(CliError::Usage(format!(
            "formula has {} free variables; at most one is supported",
            free.len()
        )));
    };

    println!("forced: {}", forcing.forced);
    if let Some(certificate) = &forcing.certificate {
        println!("certificate: {certificate}");
    }
    let emitter = Emitter::prepare(&args.out, "mumble force", &args.cat, None, cat_text.as_bytes())?;
    let report = serde_json::json!({
        "forced": forcing.forced,
        "certificate": forcing.certificate.as_ref().map(|c| c.to_string()),
    });
    emitter.write(
        "forcing.json",
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;
    Ok(())
}

fn workspace_run(args: WorkspaceRunArgs) -> Result<(), CliError> {
    let text = read_file(&args.config)?;
    let mut config = WorkspaceConfig::from_toml(&text).map_err(CliError::usage)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let seed = config.seed;
    let instance = Instance::new(config).map_err(CliError::usage)?;
    let (log, state) = instance.run_simulation().map_err(CliError::numerical)?;
    let mut log_bytes = Vec::new();
    log.write_jsonl(&mut log_bytes).map_err(CliError::usage)?;
    let summary = summarize(&instance, &state);
    let body = serde_json::to_string_pretty(&summary).expect("summary serializes");

    let emitter =
        Emitter::prepare(&args.out, "workspace run", &args.config, Some(seed), text.as_bytes())?;
    emitter.write("events.jsonl", &log_bytes)?;
    emitter.write("summary.json", &body)?;

    println!("log sha256: {}", sha256_hex(&log_bytes));
    println!("{body}");
    Ok(())
}

fn workspace_replay(args: WorkspaceReplayArgs) -> Result<(), CliError> {
    let text = read_file(&args.config)?;
    let mut config = WorkspaceConfig::from_toml(&text).map_err(CliError::usage)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let seed = config.seed;
    let instance = Instance::new(config).map_err(CliError::usage)?;
    let log_text = read_file(&args.log)?;
    let log = EventLog::read_jsonl(&mut log_text.as_bytes()).map_err(CliError::numerical)?;
    let state = instance.replay(&log).map_err(CliError::numerical)?;
    let summary = summarize(&instance, &state);
    let body = serde_json::to_string_pretty(&summary).expect("summary serializes");

    let emitter = Emitter::prepare(
        &args.out,
        "workspace replay",
        &args.config,
        Some(seed),
        text.as_bytes(),
    )?;
    emitter.write("summary.json", &body)?;

    println!("replayed {} events", log.events.len());
    println!("{body}");
    Ok(())
}
