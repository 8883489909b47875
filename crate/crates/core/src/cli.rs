//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and I/O errors, 2 when a
//! mathematical check fails (sign-cancellation violation, Jacobian mismatch).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use crate::energy::{energy_report, pointwise_all, pointwise_identity, QuadratureConfig};
use crate::geometry::shapes::{generate_shape, ShapeKind, ShapeSpec};
use crate::io::{load_mesh, save_mesh, write_report, ReportFormat};
use crate::kernel::unit_ball_volume;
use crate::occ::{direction_sphere_integral, occ_check};
use crate::verify::{jacobian_check, JACOBIAN_TOLERANCE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;

const DEFAULTS: QuadratureConfig = QuadratureConfig::DEFAULT;

#[derive(Debug, Parser)]
#[command(
    name = "surface-measure",
    version,
    about = "Singular-kernel surface measure, convexity defect and orientation checks"
)]
struct Cli {
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated shape (curve JSON in 2D, OFF in 3D).
    Generate {
        #[arg(long)]
        shape: String,
        /// Shape parameter as key=value; may be repeated.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
        #[arg(long)]
        resolution: u32,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Surface measure, signed and absolute energies, convexity defect.
    Energy {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULTS.near_field_ratio)]
        eta: f64,
        #[arg(long, default_value_t = DEFAULTS.refinement_level)]
        refine: u32,
        #[arg(long)]
        exclude_adjacent: bool,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Pointwise identity value at one or all element centroids.
    Pointwise {
        file: PathBuf,
        #[arg(long)]
        index: Option<usize>,
        #[arg(long, default_value_t = DEFAULTS.near_field_ratio)]
        eta: f64,
        #[arg(long, default_value_t = DEFAULTS.refinement_level)]
        refine: u32,
    },
    /// Random-line check of the sign-cancellation condition.
    Occ {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        lines: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Compare the projection Jacobian with finite differences.
    JacobianCheck {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte-Carlo estimate of the direction-sphere constant.
    SphereIntegral {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_param(raw: &str) -> Result<(String, f64), String> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{raw}`"))?;
    let value: f64 = value.trim().parse().map_err(|_| format!("`{value}` is not a number"))?;
    Ok((key.trim().to_string(), value))
}

/// Formats a number exactly as it appears in JSON reports.
fn num(v: f64) -> String {
    serde_json::to_string(&v).unwrap_or_else(|_| "null".into())
}

enum Outcome {
    Ok,
    VerificationFailed,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start thread pool: {e}");
            return EXIT_USAGE;
        }
    };
    let mut out_buf = Vec::new();
    let mut err_buf = Vec::new();
    let result = pool.install(|| execute(cli.command, &mut out_buf, &mut err_buf));
    let _ = out.write_all(&out_buf);
    let _ = err.write_all(&err_buf);
    match result {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::VerificationFailed) => EXIT_VERIFICATION,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn execute(command: Command, out: &mut Vec<u8>, err: &mut Vec<u8>) -> anyhow::Result<Outcome> {
    match command {
        Command::Generate {
            shape,
            params,
            resolution,
            output,
        } => {
            let params: BTreeMap<String, f64> = params.into_iter().collect();
            let kind = ShapeKind::from_params(&shape, &params)?;
            let mesh = generate_shape(&ShapeSpec::new(kind, resolution))?;
            save_mesh(&mesh, &output)?;
            writeln!(out, "shape: {}", kind.name())?;
            writeln!(out, "dimension: {}", mesh.dimension())?;
            writeln!(out, "element_count: {}", mesh.element_count())?;
            writeln!(out, "total_measure: {}", num(mesh.total_measure()))?;
            writeln!(out, "output: {}", output.display())?;
            Ok(Outcome::Ok)
        }
        Command::Energy {
            file,
            eta,
            refine,
            exclude_adjacent,
            report,
            format,
        } => {
            let mesh = load_mesh(&file).with_context(|| format!("loading {}", file.display()))?;
            let orientation = mesh.check_orientation();
            if !orientation.closed || !orientation.consistent {
                writeln!(
                    err,
                    "warning: surface is {}; the identity needs the orientation cancellation condition and may not hold",
                    match (orientation.closed, orientation.consistent) {
                        (false, false) => "open and inconsistently oriented",
                        (false, true) => "not closed",
                        _ => "inconsistently oriented",
                    }
                )?;
            }
            let config = QuadratureConfig {
                near_field_ratio: eta,
                refinement_level: refine,
                exclude_adjacent,
            };
            let r = energy_report(&mesh, &config)?;
            writeln!(out, "dimension: {}", r.dimension)?;
            writeln!(out, "element_count: {}", r.element_count)?;
            writeln!(out, "total_measure: {}", num(r.total_measure))?;
            writeln!(out, "signed_energy: {}", num(r.signed_energy))?;
            writeln!(out, "absolute_energy: {}", num(r.absolute_energy))?;
            writeln!(out, "convexity_defect: {}", num(r.convexity_defect))?;
            writeln!(out, "pointwise_max_abs_error: {}", num(r.pointwise_max_abs_error))?;
            if let Some(path) = report {
                write_report(&r, &path, format.into())?;
            }
            Ok(Outcome::Ok)
        }
        Command::Pointwise {
            file,
            index,
            eta,
            refine,
        } => {
            let mesh = load_mesh(&file).with_context(|| format!("loading {}", file.display()))?;
            let config = QuadratureConfig {
                near_field_ratio: eta,
                refinement_level: refine,
                exclude_adjacent: false,
            };
            let alpha = unit_ball_volume(mesh.dimension() as u32 - 1);
            writeln!(out, "# target {}", num(alpha))?;
            match index {
                Some(i) => writeln!(out, "{i} {}", num(pointwise_identity(&mesh, i, &config)?))?,
                None => {
                    for (i, v) in pointwise_all(&mesh, &config)?.iter().enumerate() {
                        writeln!(out, "{i} {}", num(*v))?;
                    }
                }
            }
            Ok(Outcome::Ok)
        }
        Command::Occ {
            file,
            lines,
            seed,
            report,
            format,
        } => {
            let mesh = load_mesh(&file).with_context(|| format!("loading {}", file.display()))?;
            let r = occ_check(&mesh, lines, seed)?;
            writeln!(out, "lines_tested: {}", r.lines_tested)?;
            writeln!(out, "lines_degenerate_redrawn: {}", r.lines_degenerate_redrawn)?;
            writeln!(out, "max_abs_sign_sum: {}", r.max_abs_sign_sum)?;
            writeln!(out, "alternation_violations: {}", r.alternation_violations)?;
            writeln!(out, "parity_violations: {}", r.parity_violations)?;
            writeln!(out, "seed: {}", r.seed)?;
            if let Some(path) = report {
                write_report(&r, &path, format.into())?;
            }
            if r.is_clean() {
                writeln!(out, "status: ok")?;
                Ok(Outcome::Ok)
            } else {
                writeln!(out, "status: violation")?;
                Ok(Outcome::VerificationFailed)
            }
        }
        Command::JacobianCheck { samples, seed } => {
            if samples == 0 {
                return Err(anyhow!("--samples must be at least 1"));
            }
            let check = jacobian_check(samples, seed)?;
            writeln!(out, "samples_per_dimension: {}", check.samples_per_dimension)?;
            writeln!(out, "seed: {}", check.seed)?;
            writeln!(out, "max_relative_error_2d: {}", num(check.max_relative_error_2d))?;
            writeln!(out, "max_relative_error_3d: {}", num(check.max_relative_error_3d))?;
            writeln!(out, "tolerance: {}", num(JACOBIAN_TOLERANCE))?;
            if check.passed() {
                writeln!(out, "status: ok")?;
                Ok(Outcome::Ok)
            } else {
                writeln!(out, "status: mismatch")?;
                Ok(Outcome::VerificationFailed)
            }
        }
        Command::SphereIntegral { dim, samples, seed } => {
            let estimate = direction_sphere_integral(dim, samples, seed)?;
            let target = unit_ball_volume(dim as u32 - 1);
            writeln!(out, "estimate: {}", num(estimate))?;
            writeln!(out, "target: {}", num(target))?;
            writeln!(out, "relative_error: {}", num((estimate - target).abs() / target))?;
            Ok(Outcome::Ok)
        }
    }
}
