//! Finite-difference discretization of the linearized operator on a box
//! `[-L, L]` with Dirichlet ends, used as an independent check of the
//! Gegenbauer pipeline.
//!
//! The coupled operator is block tridiagonal with 2x2 diagonal blocks and
//! off-diagonal blocks `-(1/h^2) I`. Its smallest eigenvalue is located by
//! bisection on the inertia of the block LDL^T factorization and the
//! eigenvector by inverse iteration.

use serde::{Deserialize, Serialize};

use super::{Method, SpectralResult};
use crate::error::{Error, Result};
use crate::params::ParameterPoint;
use crate::radial::RadialProfile;

const MIN_BOX_RATE: f64 = 25.0;
const MIN_GRID: usize = 1000;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSpec {
    /// Half-width `L` of the interval.
    pub half_width: f64,
    /// Number of interior grid points.
    pub grid_points: usize,
}

impl FdSpec {
    pub fn new(half_width: f64, grid_points: usize) -> Self {
        FdSpec {
            half_width,
            grid_points,
        }
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.grid_points as f64 + 1.0)
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (1..=self.grid_points)
            .map(|i| -self.half_width + h * i as f64)
            .collect()
    }

    /// The box must be wide enough that the potential is negligible at its
    /// ends (`L * rate >= 25`) and the grid at least 1000 points.
    pub fn check(&self, rate: f64) -> Result<()> {
        if !(self.half_width * rate >= MIN_BOX_RATE) {
            return Err(Error::Domain(format!(
                "box half-width {} too small: L*rate = {} < {MIN_BOX_RATE}",
                self.half_width,
                self.half_width * rate
            )));
        }
        if self.grid_points < MIN_GRID {
            return Err(Error::Domain(format!(
                "grid has {} points, at least {MIN_GRID} required",
                self.grid_points
            )));
        }
        Ok(())
    }

    pub fn refined(&self) -> Self {
        FdSpec::new(self.half_width, 2 * self.grid_points)
    }
}

/// Discretized coupled operator. Vectors are laid out in block order: the
/// upper component on all nodes, then the lower component.
#[derive(Debug, Clone)]
pub struct CoupledFd {
    pub step: f64,
    upper: Vec<f64>,
    lower: Vec<f64>,
    coupling: Vec<f64>,
}

impl CoupledFd {
    /// Builds `-d^2/ds^2 + diag(upper, lower) + coupling * sigma_x` from the
    /// potential values at the interior nodes.
    pub fn from_potentials(
        step: f64,
        upper: Vec<f64>,
        lower: Vec<f64>,
        coupling: Vec<f64>,
    ) -> Result<Self> {
        let m = upper.len();
        for len in [lower.len(), coupling.len()] {
            if len != m {
                return Err(Error::Dimension {
                    expected: m,
                    got: len,
                });
            }
        }
        let kinetic = 2.0 / (step * step);
        Ok(CoupledFd {
            step,
            upper: upper.into_iter().map(|v| v + kinetic).collect(),
            lower: lower.into_iter().map(|v| v + kinetic).collect(),
            coupling,
        })
    }

    pub fn grid_points(&self) -> usize {
        self.upper.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.upper.len()
    }

    fn offdiag(&self) -> f64 {
        -1.0 / (self.step * self.step)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let m = self.grid_points();
        let c = self.offdiag();
        let (v1, v2) = v.split_at(m);
        let mut out = vec![0.0; 2 * m];
        for i in 0..m {
            let mut a = self.upper[i] * v1[i] + self.coupling[i] * v2[i];
            let mut b = self.lower[i] * v2[i] + self.coupling[i] * v1[i];
            if i > 0 {
                a += c * v1[i - 1];
                b += c * v2[i - 1];
            }
            if i + 1 < m {
                a += c * v1[i + 1];
                b += c * v2[i + 1];
            }
            out[i] = a;
            out[m + i] = b;
        }
        out
    }

    /// Dense copy in block order (for small grids in tests).
    pub fn to_dense(&self) -> super::DenseMatrix {
        let m = self.grid_points();
        let c = self.offdiag();
        let mut a = super::DenseMatrix::zeros(2 * m);
        for i in 0..m {
            a[(i, i)] = self.upper[i];
            a[(m + i, m + i)] = self.lower[i];
            a[(i, m + i)] = self.coupling[i];
            a[(m + i, i)] = self.coupling[i];
            if i + 1 < m {
                for off in [0, m] {
                    a[(off + i, off + i + 1)] = c;
                    a[(off + i + 1, off + i)] = c;
                }
            }
        }
        a
    }

    /// Number of eigenvalues strictly below `shift`.
    pub fn count_below(&self, shift: f64) -> usize {
        let c2 = self.offdiag().powi(2);
        let mut count = 0;
        // inverse of the previous Schur complement, stored as (a, b, d)
        let mut inv = (0.0, 0.0, 0.0);
        for i in 0..self.grid_points() {
            let a = self.upper[i] - shift - c2 * inv.0;
            let b = self.coupling[i] - c2 * inv.1;
            let d = self.lower[i] - shift - c2 * inv.2;
            let mut det = a * d - b * b;
            if det == 0.0 {
                det = f64::EPSILON * (a.abs() * d.abs() + b * b).max(f64::MIN_POSITIVE);
            }
            if det < 0.0 {
                count += 1;
            } else if a < 0.0 {
                count += 2;
            }
            inv = (d / det, -b / det, a / det);
        }
        count
    }

    /// Gershgorin bounds on the spectrum.
    fn gershgorin(&self) -> (f64, f64) {
        let c = self.offdiag().abs();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.grid_points() {
            let r = 2.0 * c + self.coupling[i].abs();
            lo = lo.min(self.upper[i].min(self.lower[i]) - r);
            hi = hi.max(self.upper[i].max(self.lower[i]) + r);
        }
        (lo, hi)
    }

    /// Bracket `[lo, hi]` around the smallest eigenvalue with
    /// `count_below(lo) == 0` and `count_below(hi) >= 1`.
    pub fn bracket_smallest(&self) -> (f64, f64) {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..MAX_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) == 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    }

    /// Solves `(A - shift) x = rhs` by block LDL^T without pivoting.
    fn shifted_solve(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let m = self.grid_points();
        let c = -self.offdiag();
        let c2 = c * c;
        let mut invs: Vec<(f64, f64, f64)> = Vec::with_capacity(m);
        let mut g: Vec<(f64, f64)> = Vec::with_capacity(m);
        let mut prev_inv = (0.0, 0.0, 0.0);
        let mut prev_g = (0.0, 0.0);
        for i in 0..m {
            let a = self.upper[i] - shift - c2 * prev_inv.0;
            let b = self.coupling[i] - c2 * prev_inv.1;
            let d = self.lower[i] - shift - c2 * prev_inv.2;
            let mut det = a * d - b * b;
            if det == 0.0 {
                det = f64::MIN_POSITIVE;
            }
            let inv = (d / det, -b / det, a / det);
            // g_i = b_i + c * S_{i-1}^{-1} g_{i-1}
            let gi = if i == 0 {
                (rhs[i], rhs[m + i])
            } else {
                let (pa, pb, pd) = prev_inv;
                (
                    rhs[i] + c * (pa * prev_g.0 + pb * prev_g.1),
                    rhs[m + i] + c * (pb * prev_g.0 + pd * prev_g.1),
                )
            };
            invs.push(inv);
            g.push(gi);
            prev_inv = inv;
            prev_g = gi;
        }
        let mut x = vec![0.0; 2 * m];
        let mut next = (0.0, 0.0);
        for i in (0..m).rev() {
            let (ia, ib, id) = invs[i];
            let r = (g[i].0 + c * next.0, g[i].1 + c * next.1);
            let xi = (ia * r.0 + ib * r.1, ib * r.0 + id * r.1);
            x[i] = xi.0;
            x[m + i] = xi.1;
            next = xi;
        }
        x
    }

    /// Smallest eigenpair by inertia bisection plus inverse iteration.
    pub fn smallest_eigenpair(&self) -> Result<SpectralResult> {
        let (lo, hi) = self.bracket_smallest();
        let value = 0.5 * (lo + hi);
        let n = self.dim();
        let mut x = vec![1.0 / (n as f64).sqrt(); n];
        let mut residual = f64::INFINITY;
        let mut theta = value;
        for _ in 0..8 {
            let y = self.shifted_solve(lo, &x);
            let nrm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !nrm.is_finite() || nrm == 0.0 {
                break;
            }
            x = y.into_iter().map(|v| v / nrm).collect();
            let ax = self.apply(&x);
            theta = ax.iter().zip(&x).map(|(a, b)| a * b).sum();
            residual = ax
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - theta * b).powi(2))
                .sum::<f64>()
                .sqrt();
            if residual <= 1e-10 * theta.abs().max(1.0) {
                break;
            }
        }
        if !(residual <= 1e-8 * theta.abs().max(1.0)) {
            return Err(Error::Convergence {
                iterations: 8,
                residual,
            });
        }
        super::fix_sign(&mut x);
        Ok(SpectralResult {
            lambda_min: theta,
            vector: x,
            residual,
            method: Method::SturmBisection,
            dim: n,
        })
    }
}

/// Discretization of the linearized operator at `point`: diagonal
/// potentials `(1 +/- alpha)^2 - (p/2)|phi*|^{p-2}` and coupling
/// `-((p-2)/2)|phi*|^{p-2}`.
pub fn fd_operator(point: &ParameterPoint, spec: &FdSpec) -> Result<CoupledFd> {
    let profile = RadialProfile::new(*point);
    spec.check(profile.rate)?;
    let p = point.p;
    let a = point.alpha;
    let weight: Vec<f64> = spec.nodes().iter().map(|&s| profile.weight(s)).collect();
    let upper = weight
        .iter()
        .map(|w| (1.0 + a).powi(2) - 0.5 * p * w)
        .collect();
    let lower = weight
        .iter()
        .map(|w| (1.0 - a).powi(2) - 0.5 * p * w)
        .collect();
    let coupling = weight.iter().map(|w| -0.5 * (p - 2.0) * w).collect();
    CoupledFd::from_potentials(spec.step(), upper, lower, coupling)
}

/// Finite-difference estimate at two resolutions plus the Richardson
/// extrapolation of the pair.
#[derive(Debug, Clone)]
pub struct FdEstimate {
    pub coarse: SpectralResult,
    pub fine_value: f64,
    pub extrapolated: f64,
}

/// Combines second-order estimates at steps `h_coarse > h_fine`.
pub fn richardson(coarse: f64, fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    let r2 = (h_coarse / h_fine).powi(2);
    (r2 * fine - coarse) / (r2 - 1.0)
}

pub fn fd_smallest_eigenvalue(point: &ParameterPoint, spec: &FdSpec) -> Result<FdEstimate> {
    let coarse = fd_operator(point, spec)?.smallest_eigenpair()?;
    let fine_spec = spec.refined();
    let fine = fd_operator(point, &fine_spec)?.smallest_eigenpair()?;
    Ok(FdEstimate {
        extrapolated: richardson(
            coarse.lambda_min,
            fine.lambda_min,
            spec.step(),
            fine_spec.step(),
        ),
        fine_value: fine.lambda_min,
        coarse,
    })
}

/// Ground energy of the scalar operator `-d^2/ds^2 + potential(s)` on
/// `[-L, L]` with `grid_points` interior nodes, by Sturm bisection on the
/// tridiagonal matrix.
pub fn scalar_ground_energy(
    half_width: f64,
    grid_points: usize,
    potential: impl Fn(f64) -> f64,
) -> f64 {
    let h = 2.0 * half_width / (grid_points as f64 + 1.0);
    let c2 = 1.0 / (h * h).powi(2);
    let diag: Vec<f64> = (1..=grid_points)
        .map(|i| 2.0 / (h * h) + potential(-half_width + h * i as f64))
        .collect();
    let count = |shift: f64| {
        let mut q = 1.0;
        let mut neg = 0;
        for (i, &d) in diag.iter().enumerate() {
            q = if i == 0 {
                d - shift
            } else {
                d - shift - c2 / q
            };
            if q == 0.0 {
                q = f64::EPSILON * d.abs().max(1.0);
            }
            if q < 0.0 {
                neg += 1;
            }
        }
        neg
    };
    let (mut lo, mut hi) = diag
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &d| {
            (l.min(d - 2.0 / (h * h)), u.max(d + 2.0 / (h * h)))
        });
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
