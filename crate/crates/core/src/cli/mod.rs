//! The `sckn` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 output
//! not writable, 5 oracle tolerance breach.

pub mod config;
pub mod oracle;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{Format, RunConfig};

use crate::assembly::stability_matrix;
use crate::error::Error;
use crate::params::{validate, ParameterPoint};
use crate::regions::{classify, margins, Margins, RegionLabel};
use crate::spectral::{
    coefficient_masses, eigenvector_to_s_profile, profile_shape, stability_eigenpair,
    stability_eigenvalue, DEFAULT_TOL,
};
use crate::sweep::{boundary_bisect, eigenvalue_surface, GridSpec, CONV_TOL, EXCLUDE_BAND};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_OUTPUT: i32 = 4;
pub const EXIT_ORACLE: i32 = 5;

const DEFAULT_N: usize = 40;
const DEFAULT_BOUNDARY_TOL: f64 = 1e-4;
const DEFAULT_GRID: ((f64, f64), (f64, f64), usize, usize) = ((0.02, 0.48), (2.1, 14.0), 20, 20);
const DEFAULT_S: (f64, f64, usize) = (-20.0, 20.0, 401);
/// Degree from which coefficient mass counts as tail in the eigen report.
const TAIL_DEGREE: usize = 20;

#[derive(Debug, Parser)]
#[command(
    name = "sckn",
    version,
    about = "Linear stability of the radial CKN optimizer"
)]
pub struct Cli {
    /// Flat key=value file; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct PointArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct FormatArgs {
    /// csv or json
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form region label and condition margins.
    Classify {
        #[command(flatten)]
        point: PointArgs,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Smallest eigenvalue of the truncated stability matrix.
    Eigen {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long = "N")]
        n: Option<usize>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Sign map / eigenvalue surface over an (alpha, p) grid.
    Sweep {
        #[arg(long)]
        alpha_lo: Option<f64>,
        #[arg(long)]
        alpha_hi: Option<f64>,
        #[arg(long)]
        p_lo: Option<f64>,
        #[arg(long)]
        p_hi: Option<f64>,
        #[arg(long)]
        n_alpha: Option<usize>,
        #[arg(long)]
        n_p: Option<usize>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        exclude_band: Option<f64>,
        #[arg(long)]
        out: Option<String>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Bisects the numerical threshold alpha(p).
    Boundary {
        #[arg(long)]
        p: Option<f64>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<String>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Lowest eigenvector as |phi_1|, |phi_2| over s.
    Eigvec {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        s_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        s_max: Option<f64>,
        #[arg(long)]
        s_points: Option<usize>,
        #[arg(long)]
        out: Option<String>,
        #[command(flatten)]
        format: FormatArgs,
    },
    /// Runs the independent oracles and reports the worst deviations.
    Oracle {
        /// gegenbauer, radial, poschl-teller, fd or all
        #[arg(long)]
        which: Option<String>,
    },
}

impl Command {
    /// The flags of this invocation as a [`RunConfig`].
    pub fn to_config(&self) -> RunConfig {
        let mut c = RunConfig::default();
        match self {
            Command::Classify { point, format } => {
                c.command = Some("classify".into());
                c.alpha = point.alpha;
                c.p = point.p;
                c.format = format.format;
            }
            Command::Eigen { point, n, format } => {
                c.command = Some("eigen".into());
                c.alpha = point.alpha;
                c.p = point.p;
                c.n = *n;
                c.format = format.format;
            }
            Command::Sweep {
                alpha_lo,
                alpha_hi,
                p_lo,
                p_hi,
                n_alpha,
                n_p,
                n,
                exclude_band,
                out,
                format,
            } => {
                c.command = Some("sweep".into());
                c.alpha_lo = *alpha_lo;
                c.alpha_hi = *alpha_hi;
                c.p_lo = *p_lo;
                c.p_hi = *p_hi;
                c.n_alpha = *n_alpha;
                c.n_p = *n_p;
                c.n = *n;
                c.exclude_band = *exclude_band;
                c.out = out.clone();
                c.format = format.format;
            }
            Command::Boundary {
                p,
                n,
                tol,
                out,
                format,
            } => {
                c.command = Some("boundary".into());
                c.p = *p;
                c.n = *n;
                c.tol = *tol;
                c.out = out.clone();
                c.format = format.format;
            }
            Command::Eigvec {
                point,
                n,
                s_min,
                s_max,
                s_points,
                out,
                format,
            } => {
                c.command = Some("eigvec".into());
                c.alpha = point.alpha;
                c.p = point.p;
                c.n = *n;
                c.s_min = *s_min;
                c.s_max = *s_max;
                c.s_points = *s_points;
                c.out = out.clone();
                c.format = format.format;
            }
            Command::Oracle { which } => {
                c.command = Some("oracle".into());
                c.which = which.clone();
            }
        }
        c
    }
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_)
            | Error::DegenerateBasis { .. }
            | Error::Radicand { .. }
            | Error::Dimension { .. } => EXIT_INPUT,
            Error::Quadrature { .. }
            | Error::Overflow { .. }
            | Error::Build { .. }
            | Error::Convergence { .. }
            | Error::Bracket { .. } => EXIT_SOLVER,
            Error::Io(_) => EXIT_OUTPUT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn required<T>(v: Option<T>, name: &str) -> std::result::Result<T, Failure> {
    v.ok_or_else(|| Failure {
        code: EXIT_INPUT,
        message: format!("missing required parameter --{name}"),
    })
}

/// Writes `text` to `path`, or to `stdout` when no path is given.
fn emit(text: &str, path: Option<&str>, stdout: &mut dyn Write) -> CmdResult {
    let result = match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {p}: {e}")),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write to stdout: {e}")),
    };
    result.map_err(|message| Failure {
        code: EXIT_OUTPUT,
        message,
    })
}

/// Runs one command described by `cfg`.
pub fn execute(cfg: &RunConfig, stdout: &mut dyn Write) -> CmdResult {
    let format = cfg.format.unwrap_or_default();
    match cfg.command.as_deref() {
        Some("classify") => cmd_classify(cfg, format, stdout),
        Some("eigen") => cmd_eigen(cfg, format, stdout),
        Some("sweep") => cmd_sweep(cfg, format, stdout),
        Some("boundary") => cmd_boundary(cfg, format, stdout),
        Some("eigvec") => cmd_eigvec(cfg, format, stdout),
        Some("oracle") => cmd_oracle(cfg, stdout),
        other => Err(Failure {
            code: EXIT_INPUT,
            message: format!("unknown command {other:?}"),
        }),
    }
}

/// Parses flags, layers them over `--config`, executes, and returns the exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let flags = cli.command.to_config();
    let cfg = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(file) => flags.merged_over(file),
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_INPUT;
            }
        },
        None => flags,
    };
    match execute(&cfg, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

#[derive(Serialize)]
struct ClassifyReport {
    alpha: f64,
    p: f64,
    label: RegionLabel,
    margins: Margins,
}

fn cmd_classify(cfg: &RunConfig, format: Format, stdout: &mut dyn Write) -> CmdResult {
    let point = ParameterPoint::new(required(cfg.alpha, "alpha")?, required(cfg.p, "p")?)?;
    let report = ClassifyReport {
        alpha: point.alpha,
        p: point.p,
        label: classify(&point),
        margins: margins(&point),
    };
    let text = match format {
        Format::Json => output::json(&report)?,
        Format::Csv => {
            let m = &report.margins;
            let corollary = match &m.corollary {
                Ok(v) => output::real(*v),
                Err(e) => format!("error({e})"),
            };
            let mut s = format!("alpha={}\np={}\n{}\n", report.alpha, report.p, report.label);
            for (source, reason) in &report.label.failures {
                s.push_str(&format!("failed {source}: {reason}\n"));
            }
            s.push_str(&format!(
                "margin_symmetry={}\nmargin_corollary={}\nmargin_red={}\nmargin_blue={}\nblue_t={}\n",
                output::real(m.symmetry),
                corollary,
                output::real(m.red),
                output::real(m.blue),
                output::real(m.blue_t)
            ));
            s
        }
    };
    emit(&text, None, stdout)
}

#[derive(Serialize)]
struct EigenReport {
    alpha: f64,
    p: f64,
    n: usize,
    lambda_min: f64,
    lambda_half: f64,
    converged: bool,
    residual: f64,
    asymmetry: f64,
    odd_mass: f64,
    tail_mass: f64,
    tail_degree: usize,
    profile_asymmetry: f64,
    profile_max_increase: f64,
}

fn s_grid(lo: f64, hi: f64, count: usize) -> std::result::Result<Vec<f64>, Failure> {
    if !(lo < hi) || count < 2 {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!("s range [{lo}, {hi}] with {count} points is invalid"),
        });
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

fn cmd_eigen(cfg: &RunConfig, format: Format, stdout: &mut dyn Write) -> CmdResult {
    let point = validate(required(cfg.alpha, "alpha")?, required(cfg.p, "p")?)?;
    let n = cfg.n.unwrap_or(DEFAULT_N);
    if n < 8 {
        return Err(Error::Domain(format!("N = {n} must be at least 8")).into());
    }
    let m = stability_matrix(&point, n)?;
    let eig = stability_eigenpair(&m, DEFAULT_TOL)?;
    let lambda_half = stability_eigenvalue(&m.truncate(n / 2)?)?;
    let (odd_mass, tail_mass) = coefficient_masses(&eig.coefficients, TAIL_DEGREE);
    let grid = s_grid(DEFAULT_S.0, DEFAULT_S.1, DEFAULT_S.2)?;
    let (phi1, phi2) = eigenvector_to_s_profile(&eig.coefficients, &point, &grid)?;
    let (a1, i1) = profile_shape(&phi1);
    let (a2, i2) = profile_shape(&phi2);
    let report = EigenReport {
        alpha: point.alpha,
        p: point.p,
        n,
        lambda_min: eig.lambda_min,
        lambda_half,
        converged: (eig.lambda_min - lambda_half).abs() < CONV_TOL,
        residual: eig.scaled.residual,
        asymmetry: m.asymmetry,
        odd_mass,
        tail_mass,
        tail_degree: TAIL_DEGREE,
        profile_asymmetry: a1.max(a2),
        profile_max_increase: i1.max(i2),
    };
    let text = match format {
        Format::Json => output::json(&report)?,
        Format::Csv => format!(
            "alpha={}\np={}\nN={}\nlambda_min={}\nlambda_half={}\nconverged={}\nresidual={}\n\
             asymmetry={}\nodd_mass={}\ntail_mass_from_degree_{}={}\nprofile_asymmetry={}\n\
             profile_max_increase={}\n",
            report.alpha,
            report.p,
            report.n,
            output::real(report.lambda_min),
            output::real(report.lambda_half),
            report.converged,
            output::real(report.residual),
            output::real(report.asymmetry),
            output::real(report.odd_mass),
            report.tail_degree,
            output::real(report.tail_mass),
            output::real(report.profile_asymmetry),
            output::real(report.profile_max_increase),
        ),
    };
    emit(&text, None, stdout)
}

fn cmd_sweep(cfg: &RunConfig, format: Format, stdout: &mut dyn Write) -> CmdResult {
    let (ar, pr, na, np) = DEFAULT_GRID;
    let grid = GridSpec {
        alpha_range: (cfg.alpha_lo.unwrap_or(ar.0), cfg.alpha_hi.unwrap_or(ar.1)),
        p_range: (cfg.p_lo.unwrap_or(pr.0), cfg.p_hi.unwrap_or(pr.1)),
        n_alpha: cfg.n_alpha.unwrap_or(na),
        n_p: cfg.n_p.unwrap_or(np),
        n: cfg.n.unwrap_or(DEFAULT_N),
        exclude_band: cfg.exclude_band.unwrap_or(EXCLUDE_BAND),
    };
    let rows = eigenvalue_surface(&grid)?;
    let text = match format {
        Format::Csv => output::sweep_csv(&rows),
        Format::Json => output::json(&rows)?,
    };
    emit(&text, cfg.out.as_deref(), stdout)
}

fn cmd_boundary(cfg: &RunConfig, format: Format, stdout: &mut dyn Write) -> CmdResult {
    let p = required(cfg.p, "p")?;
    let bracket = boundary_bisect(
        p,
        cfg.n.unwrap_or(DEFAULT_N),
        cfg.tol.unwrap_or(DEFAULT_BOUNDARY_TOL),
    )?;
    let text = match format {
        Format::Csv => output::boundary_csv(&[bracket]),
        Format::Json => output::json(&bracket)?,
    };
    emit(&text, cfg.out.as_deref(), stdout)
}

#[derive(Serialize)]
struct ProfileSample {
    s: f64,
    phi1_abs: f64,
    phi2_abs: f64,
}

fn cmd_eigvec(cfg: &RunConfig, format: Format, stdout: &mut dyn Write) -> CmdResult {
    let point = validate(required(cfg.alpha, "alpha")?, required(cfg.p, "p")?)?;
    let n = cfg.n.unwrap_or(DEFAULT_N);
    let grid = s_grid(
        cfg.s_min.unwrap_or(DEFAULT_S.0),
        cfg.s_max.unwrap_or(DEFAULT_S.1),
        cfg.s_points.unwrap_or(DEFAULT_S.2),
    )?;
    let eig = stability_eigenpair(&stability_matrix(&point, n)?, DEFAULT_TOL)?;
    let (phi1, phi2) = eigenvector_to_s_profile(&eig.coefficients, &point, &grid)?;
    let text = match format {
        Format::Csv => output::profile_csv(&grid, &phi1, &phi2),
        Format::Json => {
            let samples: Vec<ProfileSample> = grid
                .iter()
                .zip(&phi1)
                .zip(&phi2)
                .map(|((&s, &a), &b)| ProfileSample {
                    s,
                    phi1_abs: a,
                    phi2_abs: b,
                })
                .collect();
            output::json(&samples)?
        }
    };
    emit(&text, cfg.out.as_deref(), stdout)
}

fn cmd_oracle(cfg: &RunConfig, stdout: &mut dyn Write) -> CmdResult {
    let which = cfg.which.as_deref().unwrap_or("all");
    let checks = oracle::run_suite(which)?;
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!("{c}\n"));
    }
    emit(&text, None, stdout)?;
    match checks
        .iter()
        .filter(|c| !c.passed())
        .max_by(|a, b| a.score().total_cmp(&b.score()))
    {
        Some(worst) => Err(Failure {
            code: EXIT_ORACLE,
            message: format!("tolerance breach, worst offender: {worst}"),
        }),
        None => Ok(()),
    }
}
