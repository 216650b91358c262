//! `treespec` - spectral computations for Laplacians on radial metric trees
//! and halflines with generalized point interactions.
//!
//! Exit codes: 0 success, 1 validation error, 2 violated mathematical
//! precondition (separating coupling, degenerate denominator, ...).  Errors
//! are emitted to stderr as one JSON object.

mod commands;
mod emit;
mod inputs;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;

use commands::Payload;
use treespec_core::grid;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Math(treespec_core::Error),
}

impl CliError {
    fn message(&self) -> String {
        match self {
            CliError::Validation(m) => m.clone(),
            CliError::Math(e) => e.to_string(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Math(_) => "math-precondition",
        }
    }

    fn generation(&self) -> Option<usize> {
        match self {
            CliError::Validation(_) => None,
            CliError::Math(e) => e.generation(),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Math(_) => 2,
        }
    }
}

impl From<treespec_core::Error> for CliError {
    fn from(e: treespec_core::Error) -> Self {
        if e.is_math_precondition() {
            CliError::Math(e)
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(format!("serialization failed: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Validation(format!("csv serialization failed: {e}"))
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum Command {
    /// Evaluate the admissibility conditions (a)-(d) on a tree-spec prefix.
    Check,
    /// Map every generation's vertex coupling to halfline interface data.
    Reduce,
    /// Recover vertex couplings from halfline interface data.
    Reconstruct,
    /// Transfer matrix across a halfline system at z = emin + i eta.
    Transfer,
    /// Floquet band structure of a periodic halfline system.
    Bands,
    /// Titchmarsh-Weyl m-functions at z = emin + i eta.
    Weyl,
    /// Reflectionless defect |m+ + conj(m-)| with eta extrapolation.
    Reflectionless,
    /// Eigenvalues of a truncated halfline system (shooting solver).
    EigsHalfline,
    /// Eigenvalues of a truncated radial tree (secular solver).
    EigsTree,
    /// Compare tree eigenvalues against the halfline direct sum.
    Compare,
    /// Generate a coupling sequence and emit it as a tree spec.
    GenSeq,
    /// Reproduce the worked reduction/condition examples; prints PASS/FAIL.
    Examples,
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "treespec",
    about = "Spectral computations for Laplacians on radial metric trees",
    version
)]
struct Args {
    /// Computation to run.
    #[arg(long, value_enum)]
    command: Command,
    /// Input JSON (tree spec, halfline system, or generator description).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Lower window edge; doubles as the evaluation energy for
    /// transfer/weyl/reflectionless.
    #[arg(long, default_value_t = 0.0)]
    emin: f64,
    /// Upper window edge.
    #[arg(long, default_value_t = 100.0)]
    emax: f64,
    /// Scan points over the window (0 = auto from the window size).
    #[arg(long, default_value_t = 0)]
    grid: usize,
    /// Tree truncation depth; also the horizon for `check`.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Imaginary energy offset for transfer/weyl/reflectionless.
    #[arg(long, default_value_t = 1e-6)]
    eta: f64,
    /// Matching tolerance for `compare`.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output path (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for grid scans (0 = TREESPEC_THREADS or all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            // Help/version are not errors.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(&args) {
        Ok(code) => code,
        Err(e) => {
            let mut obj = serde_json::Map::new();
            obj.insert("error".into(), serde_json::Value::String(e.message()));
            obj.insert("kind".into(), serde_json::Value::String(e.kind().into()));
            if let Some(g) = e.generation() {
                obj.insert("generation".into(), serde_json::Value::from(g));
            }
            eprintln!("{}", serde_json::Value::Object(obj));
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(args: &Args) -> Result<ExitCode, CliError> {
    configure_threads(args.threads)?;
    let window = validated_window(args)?;
    let grid_points = if args.grid == 0 {
        grid::recommended_points(window)
    } else if args.grid < 2 {
        return Err(CliError::Validation("--grid needs at least 2 points".into()));
    } else {
        args.grid
    };

    let input = |purpose: &str| -> Result<&PathBuf, CliError> {
        args.input
            .as_ref()
            .ok_or_else(|| CliError::Validation(format!("--input is required for {purpose}")))
    };

    let payload = match args.command {
        Command::Check => {
            let spec = inputs::load_tree(input("check (tree spec)")?)?;
            commands::run_check(&spec, args.depth)?
        }
        Command::Reduce => {
            let spec = inputs::load_tree(input("reduce (tree spec)")?)?;
            Payload::Reduce(commands::reduce_tree(&spec)?)
        }
        Command::Reconstruct => {
            let sys = inputs::load_halfline(input("reconstruct (halfline system)")?)?;
            Payload::Reconstruct(commands::reconstruct_halfline(&sys)?)
        }
        Command::Transfer => {
            let sys = inputs::load_halfline(input("transfer (halfline system)")?)?;
            Payload::Transfer(commands::transfer(&sys, Complex64::new(args.emin, args.eta))?)
        }
        Command::Bands => {
            let sys = inputs::load_halfline(input("bands (halfline system)")?)?;
            commands::run_bands(&sys, window, grid_points)?
        }
        Command::Weyl => {
            let sys = inputs::load_halfline(input("weyl (halfline system)")?)?;
            Payload::Weyl(commands::weyl(&sys, args.emin, args.eta)?)
        }
        Command::Reflectionless => {
            let sys = inputs::load_halfline(input("reflectionless (halfline system)")?)?;
            Payload::Reflectionless(commands::reflectionless(&sys, args.emin, args.eta)?)
        }
        Command::EigsHalfline => {
            let sys = inputs::load_halfline(input("eigs-halfline (halfline system)")?)?;
            commands::run_eigs_halfline(&sys, window, grid_points)?
        }
        Command::EigsTree => {
            let spec = inputs::load_tree(input("eigs-tree (tree spec)")?)?;
            commands::run_eigs_tree(&spec, args.depth, window, grid_points)?
        }
        Command::Compare => {
            let spec = inputs::load_tree(input("compare (tree spec)")?)?;
            commands::run_compare(&spec, args.depth, window, grid_points, args.tol)?
        }
        Command::GenSeq => {
            let gen = inputs::load_generator(input("gen-seq (generator description)")?)?;
            let (word, angle) = gen.build()?;
            Payload::GenSeq(word.to_tree_spec(angle)?)
        }
        Command::Examples => {
            let out = commands::run_examples()?;
            for check in &out.checks {
                let verdict = if check.pass { "PASS" } else { "FAIL" };
                println!("{verdict} {} ({})", check.name, check.detail);
            }
            let failed = out.checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                eprintln!(
                    "{}",
                    serde_json::json!({
                        "error": format!("{failed} example check(s) failed"),
                        "kind": "math-precondition",
                    })
                );
            }
            let code = if out.all_pass { ExitCode::SUCCESS } else { ExitCode::from(2) };
            if args.output.is_some() {
                write_output(args, &Payload::Examples(out).to_bytes(args.format)?)?;
            }
            return Ok(code);
        }
    };

    write_output(args, &payload.to_bytes(args.format)?)?;
    Ok(ExitCode::SUCCESS)
}

fn validated_window(args: &Args) -> Result<(f64, f64), CliError> {
    if !(args.emin.is_finite() && args.emax.is_finite() && args.emin < args.emax) {
        return Err(CliError::Validation(format!(
            "invalid window: emin = {}, emax = {}",
            args.emin, args.emax
        )));
    }
    Ok((args.emin, args.emax))
}

fn configure_threads(flag: usize) -> Result<(), CliError> {
    let n = if flag > 0 {
        flag
    } else {
        match std::env::var("TREESPEC_THREADS") {
            Ok(v) => v.parse::<usize>().map_err(|_| {
                CliError::Validation(format!("TREESPEC_THREADS must be an integer, got '{v}'"))
            })?,
            Err(_) => 0,
        }
    };
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(format!("thread pool setup failed: {e}")))?;
    }
    Ok(())
}

fn write_output(args: &Args, bytes: &[u8]) -> Result<(), CliError> {
    match &args.output {
        Some(path) => std::fs::write(path, bytes).map_err(|e| {
            CliError::Validation(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Validation(format!("cannot write to stdout: {e}")))
        }
    }
}
