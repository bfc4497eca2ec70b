//! `neqforce` command-line front end.
//!
//! Exit codes: 0 ok, 1 validation failure, 2 config error, 3 numerical failure.

mod commands;
mod config;
mod validate;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub const VALIDATION: u8 = 1;
    pub const CONFIG: u8 = 2;
    pub const NUMERICAL: u8 = 3;

    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: Self::CONFIG,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: Self::NUMERICAL,
            message: message.into(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "neqforce", version, about = "Equilibrium and non-equilibrium Casimir forces for spheres and plates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// JSON run configuration (lengths in μm, temperatures in K).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; defaults to the config's `output`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the separation grid.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the relative quadrature tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Force curve as CSV.
    Curve(Common),
    /// Zeros of the total force with their stability, as JSON.
    Equilibria(Common),
    /// Self-propelled pairs of two spheres, as JSON.
    Spp(Common),
    /// Closed-form limits against the full integrals, as JSON; exits 1 on a breach.
    Validate(Common),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_json(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::numerical(format!("cannot write output: {e}"));
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Failure::numerical(format!("cannot write output: {e}")))?;
    writeln!(out).map_err(io)?;
    out.flush().map_err(io)
}

fn setup_threads(threads: Option<usize>) -> Result<(), Failure> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(Failure::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("cannot start {n} threads: {e}")))?;
    }
    Ok(())
}

fn check_rel_tol(rel_tol: Option<f64>) -> Result<(), Failure> {
    match rel_tol {
        Some(r) if !(r > 0.0 && r < 1.0) => Err(Failure::config(format!("--rel-tol must lie in (0, 1), got {r}"))),
        _ => Ok(()),
    }
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf()
}

fn run(command: Command) -> Result<(), Failure> {
    let (kind, common) = match command {
        Command::Curve(c) => ("curve", c),
        Command::Equilibria(c) => ("equilibria", c),
        Command::Spp(c) => ("spp", c),
        Command::Validate(c) => ("validate", c),
    };
    check_rel_tol(common.rel_tol)?;
    setup_threads(common.threads)?;

    if kind == "validate" {
        let parsed = match &common.config {
            Some(p) => Some((validate::parse(&config::read_text(p)?)?, base_dir(p))),
            None => None,
        };
        let out_path = common
            .out
            .clone()
            .or_else(|| parsed.as_ref().and_then(|(c, _)| c.output.clone()));
        let summary = validate::run(parsed.as_ref().map(|(c, d)| (c.clone(), d.as_path())), common.rel_tol)?;
        eprint!("{}", summary.table());
        write_json(&mut *open_out(out_path.as_deref())?, &summary)?;
        return if summary.ok() {
            Ok(())
        } else {
            Err(Failure {
                code: Failure::VALIDATION,
                message: format!("{} validation case(s) outside tolerance", summary.failed),
            })
        };
    }

    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Failure::config(format!("`{kind}` needs --config <path>")))?;
    let cfg = RunConfig::parse(&config::read_text(path)?)?;
    if kind == "spp" && !matches!(cfg, RunConfig::TwoSpheres(_)) {
        return Err(Failure::config("SPP requires two spheres"));
    }
    let mut settings = cfg.quadrature();
    if let Some(r) = common.rel_tol {
        settings.rel_tol = r;
    }
    settings
        .validate()
        .map_err(|e| Failure::config(format!("config field `quadrature`: {e}")))?;
    let resolved = cfg.resolve(&base_dir(path))?;
    // Grids are checked for every case before any integral runs.
    for case in &resolved.cases {
        cfg.grid_for(&case.system)?;
    }
    let out_path = common.out.clone().or_else(|| cfg.output().map(|p| base_dir(path).join(p)));
    let curves = commands::curves(&cfg, &resolved.cases, &settings)?;
    let failed: usize = curves.iter().map(|c| c.failed_points()).sum();

    let mut out = open_out(out_path.as_deref())?;
    match kind {
        "curve" => {
            commands::write_csv(&mut *out, &curves)?;
            out.flush()
                .map_err(|e| Failure::numerical(format!("cannot write output: {e}")))?;
        }
        "equilibria" => write_json(&mut *out, &commands::equilibria_json(&cfg, &curves, &settings))?,
        "spp" => write_json(&mut *out, &commands::spp_json(&cfg, &curves, &settings)?)?,
        _ => unreachable!("subcommands are matched above"),
    }
    if failed > 0 {
        return Err(Failure::numerical(format!(
            "{failed} separation(s) failed; output is partial, see the flags"
        )));
    }
    Ok(())
}
