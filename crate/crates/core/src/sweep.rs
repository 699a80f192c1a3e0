//! Parameter-space sweeps: sign maps, eigenvalue surfaces, boundary
//! bisection and truncation-convergence studies.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::stability_matrix;
use crate::error::{Error, Result};
use crate::params::{validate, ParameterPoint};
use crate::regions::{classify, RegionLabel};
use crate::spectral::stability_eigenvalue;

/// Eigenvalues below `-SIGN_TOL` count as negative.
pub const SIGN_TOL: f64 = 1e-9;
/// `|lambda(N) - lambda(N/2)|` below this counts as converged.
pub const CONV_TOL: f64 = 1e-8;
/// Default half-width of the excluded band around `p = 6`.
pub const EXCLUDE_BAND: f64 = 0.05;
/// Bracket endpoints for [`boundary_bisect`].
pub const BOUNDARY_ALPHA_RANGE: (f64, f64) = (0.01, 0.49);
/// Environment variable capping the sweep thread count.
pub const THREADS_ENV: &str = "SCKN_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha_range: (f64, f64),
    pub p_range: (f64, f64),
    pub n_alpha: usize,
    pub n_p: usize,
    /// Polynomials per block.
    pub n: usize,
    /// Half-width of the excluded band around `p = 6`.
    pub exclude_band: f64,
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let (alo, ahi) = self.alpha_range;
        let (plo, phi) = self.p_range;
        if !(alo > 0.0 && ahi < 0.5 && alo <= ahi) {
            return Err(Error::Domain(format!(
                "alpha range ({alo}, {ahi}) must be ordered and inside (0, 1/2)"
            )));
        }
        if !(plo > 2.0 && plo <= phi && phi.is_finite()) {
            return Err(Error::Domain(format!(
                "p range ({plo}, {phi}) must be ordered and inside (2, inf)"
            )));
        }
        if self.n_alpha == 0 || self.n_p == 0 {
            return Err(Error::Domain("grid counts must be positive".into()));
        }
        if self.n < 8 {
            return Err(Error::Domain(format!(
                "truncation N = {} must be at least 8",
                self.n
            )));
        }
        if !(self.exclude_band >= 0.0) {
            return Err(Error::Domain("exclude band must be non-negative".into()));
        }
        Ok(())
    }

    pub fn alphas(&self) -> Vec<f64> {
        linspace(self.alpha_range.0, self.alpha_range.1, self.n_alpha)
    }

    /// `p` samples with the band around 6 removed.
    pub fn ps(&self) -> Vec<f64> {
        linspace(self.p_range.0, self.p_range.1, self.n_p)
            .into_iter()
            .filter(|p| (p - 6.0).abs() >= self.exclude_band)
            .collect()
    }

    /// Grid points ordered by `p`, then `alpha`.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let alphas = self.alphas();
        self.ps()
            .into_iter()
            .flat_map(|p| alphas.iter().map(move |&a| (a, p)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NumericSign {
    Negative,
    NonNegative,
    Inconclusive,
}

impl fmt::Display for NumericSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NumericSign::Negative => "Negative",
            NumericSign::NonNegative => "NonNegative",
            NumericSign::Inconclusive => "Inconclusive",
        })
    }
}

pub fn numeric_sign(lambda_min: f64, converged: bool) -> NumericSign {
    if lambda_min < -SIGN_TOL {
        NumericSign::Negative
    } else if lambda_min >= -SIGN_TOL && converged {
        NumericSign::NonNegative
    } else {
        NumericSign::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub p: f64,
    /// Truncation used for `lambda_min` (doubled when re-solved).
    pub n: usize,
    /// NaN when the point could not be solved.
    pub lambda_min: f64,
    pub analytic_label: RegionLabel,
    pub numeric_sign: NumericSign,
    pub converged: bool,
    pub error: Option<String>,
}

/// Smallest eigenvalue at `n` and at the leading `n/2` block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSolve {
    pub n: usize,
    pub lambda_min: f64,
    pub lambda_half: f64,
    pub converged: bool,
}

pub fn solve_point(point: &ParameterPoint, n: usize) -> Result<PointSolve> {
    let m = stability_matrix(point, n)?;
    let lambda_min = stability_eigenvalue(&m)?;
    let lambda_half = stability_eigenvalue(&m.truncate(n / 2)?)?;
    Ok(PointSolve {
        n,
        lambda_min,
        lambda_half,
        converged: (lambda_min - lambda_half).abs() < CONV_TOL,
    })
}

/// Solves at `n`; an unconverged point is re-solved at `2n`, whose
/// convergence is judged against the value at `n`.
pub fn solve_with_resolve(point: &ParameterPoint, n: usize) -> Result<PointSolve> {
    let first = solve_point(point, n)?;
    if first.converged {
        return Ok(first);
    }
    solve_point(point, 2 * n)
}

pub fn evaluate_row(alpha: f64, p: f64, n: usize) -> SweepRow {
    let base = |label: RegionLabel, error: String| SweepRow {
        alpha,
        p,
        n,
        lambda_min: f64::NAN,
        analytic_label: label,
        numeric_sign: NumericSign::Inconclusive,
        converged: false,
        error: Some(error),
    };
    let point = match validate(alpha, p) {
        Ok(pt) => pt,
        Err(e) => {
            let label = ParameterPoint::new(alpha, p)
                .map(|pt| classify(&pt))
                .unwrap_or(RegionLabel {
                    tag: crate::regions::RegionTag::Undecided,
                    sources: vec![],
                    failures: vec![],
                });
            return base(label, e.to_string());
        }
    };
    let label = classify(&point);
    match solve_with_resolve(&point, n) {
        Ok(s) => SweepRow {
            alpha,
            p,
            n: s.n,
            lambda_min: s.lambda_min,
            analytic_label: label,
            numeric_sign: numeric_sign(s.lambda_min, s.converged),
            converged: s.converged,
            error: None,
        },
        Err(e) => base(label, e.to_string()),
    }
}

/// Thread pool honouring the `SCKN_THREADS` cap.
pub fn thread_pool() -> rayon::ThreadPool {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cap {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool")
}

/// One row per grid point, sorted by `(p, alpha)`.
pub fn sign_map(grid: &GridSpec) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    let points = grid.points();
    let n = grid.n;
    Ok(thread_pool().install(|| {
        points
            .par_iter()
            .map(|&(a, p)| evaluate_row(a, p, n))
            .collect()
    }))
}

/// Same rows as [`sign_map`]; read `lambda_min` as a surface over the grid.
pub fn eigenvalue_surface(grid: &GridSpec) -> Result<Vec<SweepRow>> {
    sign_map(grid)
}

/// Bisection for the sign change of `f` on `[lo, hi]`, where the low end must
/// be non-negative and the high end negative (both with the sign guard).
pub fn bisect_sign(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<(f64, f64, f64, f64)> {
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    if f_lo < -SIGN_TOL || !(f_hi < -SIGN_TOL) {
        return Err(Error::Bracket {
            lo_value: f_lo,
            hi_value: f_hi,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if v < -SIGN_TOL {
            hi = mid;
            f_hi = v;
        } else {
            lo = mid;
            f_lo = v;
        }
    }
    Ok((lo, hi, f_lo, f_hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryBracket {
    pub p: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub n: usize,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

fn check_band(p: f64) -> Result<()> {
    if (p - 6.0).abs() < EXCLUDE_BAND {
        return Err(Error::Domain(format!(
            "p = {p} lies in the excluded band |p - 6| < {EXCLUDE_BAND}"
        )));
    }
    Ok(())
}

/// Bisects the numerical stability threshold in `alpha` at fixed `p`.
pub fn boundary_bisect(p: f64, n: usize, tol_alpha: f64) -> Result<BoundaryBracket> {
    check_band(p)?;
    let (lo, hi) = BOUNDARY_ALPHA_RANGE;
    let (alpha_lo, alpha_hi, lambda_lo, lambda_hi) = bisect_sign(lo, hi, tol_alpha, |a| {
        stability_eigenvalue(&stability_matrix(&validate(a, p)?, n)?)
    })?;
    Ok(BoundaryBracket {
        p,
        alpha_lo,
        alpha_hi,
        n,
        lambda_lo,
        lambda_hi,
    })
}

/// Bisects the numerical stability threshold in `p` at fixed `alpha` on
/// `[p_lo, p_hi]`; returns `(p_lo, p_hi)` with the stable end first.
pub fn boundary_bisect_p(
    alpha: f64,
    n: usize,
    p_range: (f64, f64),
    tol_p: f64,
) -> Result<(f64, f64)> {
    let (lo, hi) = p_range;
    if lo < 6.0 + EXCLUDE_BAND && hi > 6.0 - EXCLUDE_BAND {
        return Err(Error::Domain(format!(
            "p range ({lo}, {hi}) overlaps the excluded band around 6"
        )));
    }
    let (a, b, _, _) = bisect_sign(lo, hi, tol_p, |p| {
        stability_eigenvalue(&stability_matrix(&validate(alpha, p)?, n)?)
    })?;
    Ok((a, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub n: usize,
    pub lambda_min: f64,
    /// Within `CONV_TOL` of the previous entry.
    pub converged: bool,
}

/// `lambda_min` at each truncation in `n_list` (non-decreasing, each at
/// least 4), taken as leading blocks of one assembled matrix.
pub fn convergence_study(
    point: &ParameterPoint,
    n_list: &[usize],
) -> Result<Vec<ConvergenceEntry>> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] < w[0]) || n_list[0] < 4 {
        return Err(Error::Domain(
            "N list must be non-empty, non-decreasing and start at 4 or more".into(),
        ));
    }
    let full = stability_matrix(point, *n_list.last().expect("non-empty"))?;
    let mut out: Vec<ConvergenceEntry> = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let lambda_min = stability_eigenvalue(&full.truncate(n)?)?;
        let converged = out
            .last()
            .map(|prev| (prev.lambda_min - lambda_min).abs() < CONV_TOL)
            .unwrap_or(false);
        out.push(ConvergenceEntry {
            n,
            lambda_min,
            converged,
        });
    }
    Ok(out)
}
