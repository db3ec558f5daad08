//! `herz-schur` command-line tool.
//!
//! Every subcommand prints a JSON report on stdout. With `--out DIR` the report,
//! an optional CSV and a run manifest are also written to `DIR`. Exit codes:
//! 0 success, 2 negative verdict, 1 error.

mod commands;
mod error;
mod manifest;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::manifest::{to_json, write_atomic, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "herz-schur", version, about = "Schur and Herz-Schur multiplier norm certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Output {
    /// Directory receiving the report, the manifest and any CSV.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Single-threaded run; the manifest omits wall time.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Also write per-t norms as CSV (requires --out).
    #[arg(long, global = true)]
    pub csv: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfileArgs {
    /// Radial profile JSON.
    #[arg(long)]
    pub profile: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, value_delimiter = ',', default_values_t = herz_schur::experiments::DEFAULT_T_GRID.to_vec())]
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Schur multiplier norm of a kernel, optionally restricted to a subset.
    SchurNorm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<usize>>,
    },
    /// `‖ω_φ‖` of a radial profile (Hankel lift) or an explicit kernel.
    OmegaNorm {
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        profile: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
    /// `‖χ_φ‖` for the tree of degree `q + 1`.
    ChiNorm {
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        profile: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        q: u32,
        #[arg(long, default_value_t = 300)]
        n: usize,
    },
    /// `‖ω_{e^{−tφ}}‖ ≤ 1` over a grid of `t`.
    SCheck {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// `‖χ_{e^{−tφ}}‖ ≤ 1` over a grid of `t`.
    #[command(name = "q-s-check")]
    QSCheck {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 3)]
        q: u32,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Radial Herz-Schur norm on `F_∞` or `F_n`.
    RadialNorm {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value = "finf")]
        group: String,
        #[arg(long, default_value_t = 300)]
        n: usize,
    },
    /// Schur norm of the radial kernel on a ball of a free group.
    BallSchur {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value = "f2")]
        group: String,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Additivity of the `(m, n)` pairs on a ball of the homogeneous tree.
    TreeCheck {
        #[arg(long, default_value_t = 3)]
        q: usize,
        #[arg(long, default_value_t = 3)]
        radius: usize,
    },
    /// `t₂` norm and the splitting `a = b + c`.
    Littlewood {
        #[arg(long)]
        input: PathBuf,
    },
    /// Linear growth scan over a grid and a truncation ladder.
    LinearBoundScan {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "finf")]
        group: String,
        #[arg(long, value_delimiter = ',', default_values_t = herz_schur::experiments::DEFAULT_LADDER.to_vec())]
        n_ladder: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        window: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Finite-level `R`, `S` maps for a kernel or a radial profile on a ball.
    ExtractRs {
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        profile: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "f2")]
        group: String,
        #[arg(long, default_value_t = 2)]
        radius: usize,
        #[arg(long, default_value_t = 50)]
        level: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Proper function built from a contractive family on a window.
    WhCombine {
        /// `{ "family": [{ "values": [...], "norm": x }, ...], "schedule"?: { "alpha": [...], "eps": [...] } }`
        #[arg(long)]
        input: PathBuf,
        /// Number of terms of the standard schedule when none is given.
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Positive or conditionally negative definiteness of a kernel.
    Definiteness {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = commands::Kind::Pd)]
        kind: commands::Kind,
        /// Absolute tolerance; defaults to `1e-9 · max |k|`.
        #[arg(long)]
        tol: Option<f64>,
        /// `t` values for the Schoenberg check.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 1.0, 10.0])]
        t_grid: Vec<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SchurNorm { .. } => "schur-norm",
            Command::OmegaNorm { .. } => "omega-norm",
            Command::ChiNorm { .. } => "chi-norm",
            Command::SCheck { .. } => "s-check",
            Command::QSCheck { .. } => "q-s-check",
            Command::RadialNorm { .. } => "radial-norm",
            Command::BallSchur { .. } => "ball-schur",
            Command::TreeCheck { .. } => "tree-check",
            Command::Littlewood { .. } => "littlewood",
            Command::LinearBoundScan { .. } => "linear-bound-scan",
            Command::ExtractRs { .. } => "extract-rs",
            Command::WhCombine { .. } => "wh-combine",
            Command::Definiteness { .. } => "definiteness",
        }
    }
}

fn run(command: Command, output: Output) -> CliResult<bool> {
    if output.csv && output.out.is_none() {
        return Err(CliError::Usage("--csv requires --out".into()));
    }
    let start = Instant::now();
    let mut digests = BTreeMap::new();
    let name = command.name();
    let report = if output.deterministic {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
        pool.install(|| commands::execute(&command, &mut digests))?
    } else {
        commands::execute(&command, &mut digests)?
    };
    let body = to_json(&report.body);
    print!("{body}");

    if let Some(dir) = &output.out {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        let mut outputs = Vec::new();
        let path = dir.join(format!("{name}.json"));
        write_atomic(&path, body.as_bytes())?;
        outputs.push(path.display().to_string());
        if output.csv {
            if let Some(csv) = &report.csv {
                let path = dir.join(format!("{name}.csv"));
                write_atomic(&path, csv.as_bytes())?;
                outputs.push(path.display().to_string());
            }
        }
        let manifest = RunManifest {
            command: name.into(),
            input_digests: digests,
            parameters: serde_json::json!({ "args": &command, "output": &output }),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_time_ms: (!output.deterministic).then(|| start.elapsed().as_secs_f64() * 1e3),
            deterministic: output.deterministic,
            output_paths: outputs,
        };
        write_atomic(&dir.join("manifest.json"), to_json(&manifest).as_bytes())?;
    }
    Ok(report.negative)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let rendered = e.render().to_string();
            eprintln!("error [E_USAGE]: {}", rendered.trim_start_matches("error: ").trim_end());
            return ExitCode::from(1);
        }
    };
    match run(cli.command, cli.output) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(1)
        }
    }
}
