//! Command-line driver for the spiral-sheet solver.
//!
//! Four subcommands share one configuration file (see [`config`]):
//!
//! * `solve` — run the fixed-point iteration and write a solution archive
//!   (JSON) with the perturbation samples and iteration diagnostics;
//! * `export` — rebuild the sheet from an archive and write the curve at a
//!   chosen time as CSV, SVG, or JSON;
//! * `field` — sample the induced velocity on a square window as CSV or
//!   JSON;
//! * `check` — run an invariant suite and print a pass/fail table with
//!   the measured constants.
//!
//! Exit codes: `0` success (for `solve`: the iteration contracted and
//! converged; for `check`: every row passed); `2` the run finished but the
//! result is negative (no contraction, or failed checks) — diagnostics say
//! why; `1` usage errors: bad flags, malformed configs, unreadable files.
//!
//! Everything is deterministic: rerunning a command with the same config
//! produces byte-identical artifacts, and `SPIRALSHEET_THREADS` (which
//! overrides `--threads`) only changes how many workers sample the field.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;
use spiralsheet::geometry::ExportFormat;
use spiralsheet::velocity::{sample_window, VelocityField};
use spiralsheet::{solve, Error};

use spiralsheet_cli::archive::SolutionArchive;
use spiralsheet_cli::check;
use spiralsheet_cli::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "spiralsheet",
    version,
    about = "Self-similar m-branch vortex-sheet spirals: solve, export, sample, check"
)]
struct Cli {
    /// Configuration file (sectioned key = value, or JSON); defaults apply
    /// when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for velocity sampling; the SPIRALSHEET_THREADS
    /// environment variable takes precedence.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the fixed-point solver and write a solution archive.
    Solve {
        /// Archive path (default: <out_dir>/solution.json).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Rebuild the sheet from an archive and write the curve at time t.
    Export {
        /// Solution archive written by `solve`.
        archive: PathBuf,
        /// Similarity time of the snapshot (0 gives the initial sheet).
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// csv | svg | json (default: the config's output format).
        #[arg(long)]
        format: Option<String>,
        /// Circulation samples per branch.
        #[arg(long, default_value_t = 2048)]
        samples: usize,
        /// Output path (default: <out_dir>/curve_t<t>.<ext>).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Sample the induced velocity on a square window around the center.
    Field {
        /// Solution archive written by `solve`.
        archive: PathBuf,
        /// Half-width of the window [-w, w]².
        #[arg(long, default_value_t = 1.0)]
        window: f64,
        /// Samples per axis (the output has resolution² rows).
        #[arg(long, default_value_t = 128)]
        resolution: usize,
        /// csv | json (default: the config's output format, svg not
        /// supported here).
        #[arg(long)]
        format: Option<String>,
        /// Output path (default: <out_dir>/field_<resolution>.<ext>).
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run an invariant suite and print its pass/fail table.
    Check {
        /// One of the library suites, or `all` (default: the config's
        /// suite).
        #[arg(long)]
        suite: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outcomes; everything else is
            // a usage error.
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    configure_threads(cli.threads)?;
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    match cli.command {
        Cmd::Solve { out } => cmd_solve(&config, out),
        Cmd::Export {
            archive,
            t,
            format,
            samples,
            out,
        } => cmd_export(&config, &archive, t, format, samples, out),
        Cmd::Field {
            archive,
            window,
            resolution,
            format,
            out,
        } => cmd_field(&config, &archive, window, resolution, format, out),
        Cmd::Check { suite } => cmd_check(&config, suite),
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), String> {
    let n = match std::env::var("SPIRALSHEET_THREADS") {
        Ok(s) => Some(
            s.parse::<usize>()
                .map_err(|_| format!("SPIRALSHEET_THREADS must be a positive integer, got `{s}`"))?,
        ),
        Err(_) => flag,
    };
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err("thread count must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| format!("cannot configure {n} worker threads: {e}"))
}

fn prepare_out_path(
    explicit: Option<PathBuf>,
    out_dir: &Path,
    default_name: String,
) -> Result<PathBuf, String> {
    let path = explicit.unwrap_or_else(|| out_dir.join(default_name));
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
        }
    }
    Ok(path)
}

fn cmd_solve(config: &RunConfig, out: Option<PathBuf>) -> Result<ExitCode, String> {
    let params = &config.params;
    let path = prepare_out_path(out, &config.outputs.out_dir, "solution.json".into())?;
    match solve(params) {
        Ok(report) => {
            let archive = SolutionArchive::from_report(params, &report)?;
            archive.save(&path)?;
            let a = &archive.asymptotics;
            println!(
                "m = {}, mu = {}: converged in {} outer steps",
                params.m,
                params.mu,
                report.steps.len()
            );
            println!("  perturbation norm   {:.6e}", report.iterate_norms.last().unwrap_or(&0.0));
            println!("  equation residual   {:.3e}", report.residual);
            println!("  contraction ratio   {:.3e}", report.contraction_ratio);
            println!(
                "  roll-up constant    {:.8}  (large-m limit {:.8})",
                a.beta_m,
                (2.0 * std::f64::consts::PI).powf(-params.mu)
            );
            println!("archive: {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::ContractionFailure { context, history }) => {
            let reason = format!(
                "no contraction at m = {}: {} (step norms {:?})",
                params.m, context, history
            );
            let archive = SolutionArchive::from_failure(params, reason.clone(), history)?;
            archive.save(&path)?;
            eprintln!("solve stopped: {reason}");
            eprintln!("base-profile archive written to {}", path.display());
            Ok(ExitCode::from(2))
        }
        Err(Error::NonConvergence {
            context,
            iterations,
            last_step,
        }) => {
            let reason = format!(
                "iteration budget exhausted at m = {}: {context} after {iterations} steps \
                 (last step {last_step:.3e})",
                params.m
            );
            let archive = SolutionArchive::from_failure(params, reason.clone(), Vec::new())?;
            archive.save(&path)?;
            eprintln!("solve stopped: {reason}");
            eprintln!("base-profile archive written to {}", path.display());
            Ok(ExitCode::from(2))
        }
        Err(e) => Err(e.to_string()),
    }
}

fn parse_format(flag: Option<String>, config: &RunConfig) -> Result<ExportFormat, String> {
    flag.as_deref()
        .unwrap_or(&config.outputs.format)
        .parse::<ExportFormat>()
}

fn cmd_export(
    config: &RunConfig,
    archive_path: &Path,
    t: f64,
    format: Option<String>,
    samples: usize,
    out: Option<PathBuf>,
) -> Result<ExitCode, String> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(format!("export time must be finite and >= 0, got {t}"));
    }
    let format = parse_format(format, config)?;
    let archive = SolutionArchive::load(archive_path)?;
    let solution = archive.solution()?;
    let ext = match format {
        ExportFormat::Csv => "csv",
        ExportFormat::Svg => "svg",
        ExportFormat::Json => "json",
    };
    let path = prepare_out_path(out, &config.outputs.out_dir, format!("curve_t{t}.{ext}"))?;
    let file = File::create(&path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
    let mut writer = BufWriter::new(file);
    solution
        .export_curve(&mut writer, t, samples, format)
        .map_err(|e| e.to_string())?;
    writer.flush().map_err(|e| e.to_string())?;
    println!(
        "curve at t = {t}: {} branches x {samples} samples -> {}",
        archive.params.m,
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct FieldDocument<'a> {
    window: f64,
    resolution: usize,
    /// Row-major from the bottom-left, `[x, y, vx, vy]`.
    rows: &'a [[f64; 4]],
}

fn cmd_field(
    config: &RunConfig,
    archive_path: &Path,
    window: f64,
    resolution: usize,
    format: Option<String>,
    out: Option<PathBuf>,
) -> Result<ExitCode, String> {
    let format = parse_format(format, config)?;
    if format == ExportFormat::Svg {
        return Err("field sampling writes csv or json, not svg".into());
    }
    let archive = SolutionArchive::load(archive_path)?;
    let solution = archive.solution()?;
    let field =
        VelocityField::new(solution.perturbation(), solution.params()).map_err(|e| e.to_string())?;
    let rows = sample_window(&field, window, resolution).map_err(|e| e.to_string())?;
    let ext = if format == ExportFormat::Csv { "csv" } else { "json" };
    let path = prepare_out_path(
        out,
        &config.outputs.out_dir,
        format!("field_{resolution}.{ext}"),
    )?;
    let file = File::create(&path).map_err(|e| format!("cannot create {}: {e}", path.display()))?;
    let mut writer = BufWriter::new(file);
    match format {
        ExportFormat::Csv => {
            writer.write_all(b"x,y,vx,vy\n").map_err(|e| e.to_string())?;
            for [x, y, vx, vy] in &rows {
                writeln!(writer, "{x},{y},{vx},{vy}").map_err(|e| e.to_string())?;
            }
        }
        ExportFormat::Json => {
            let doc = FieldDocument {
                window,
                resolution,
                rows: &rows,
            };
            serde_json::to_writer_pretty(&mut writer, &doc).map_err(|e| e.to_string())?;
            writer.write_all(b"\n").map_err(|e| e.to_string())?;
        }
        ExportFormat::Svg => unreachable!(),
    }
    writer.flush().map_err(|e| e.to_string())?;
    println!(
        "velocity on [-{window}, {window}]² at {resolution}x{resolution}: {} samples -> {}",
        rows.len(),
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(config: &RunConfig, suite: Option<String>) -> Result<ExitCode, String> {
    let suite = suite.unwrap_or_else(|| config.checks.suite.clone());
    let all_pass = check::run_suite(config, &suite)?;
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
