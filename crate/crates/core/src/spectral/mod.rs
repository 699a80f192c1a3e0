//! Smallest eigenpairs of symmetric matrices, the finite-difference oracle
//! for the linearized operator, and reconstruction of stability eigenvectors
//! as functions of `s`.

pub mod dense;
pub mod fd;
pub mod lanczos;

use serde::{Deserialize, Serialize};

pub use dense::{symmetric_eigen, DenseMatrix};
pub use fd::{fd_operator, fd_smallest_eigenvalue, FdEstimate, FdSpec};

use crate::assembly::StabilityMatrix;
use crate::error::{Error, Result};
use crate::gegenbauer::gegenbauer_all;
use crate::params::ParameterPoint;
use crate::radial::RadialProfile;

/// Matrices up to this dimension use the dense QL path.
pub const DENSE_LIMIT: usize = 512;
/// Default residual tolerance, relative to `max(1, |lambda|)`.
pub const DEFAULT_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    DenseQl,
    Lanczos,
    SturmBisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    pub lambda_min: f64,
    /// Unit eigenvector, largest-magnitude entry positive.
    pub vector: Vec<f64>,
    /// `||A v - lambda v||_2`.
    pub residual: f64,
    pub method: Method,
    pub dim: usize,
}

/// Flips `v` so that its largest-magnitude entry is positive (first one on ties).
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn residual_norm(a: &DenseMatrix, v: &[f64], lambda: f64) -> f64 {
    a.mul_vec(v)
        .iter()
        .zip(v)
        .map(|(x, y)| (x - lambda * y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn check_symmetric(a: &DenseMatrix) -> Result<()> {
    if a.is_symmetric(SYMMETRY_TOL) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "matrix is not symmetric (relative asymmetry {:e})",
            a.relative_asymmetry()
        )))
    }
}

/// Algebraically smallest eigenpair of a symmetric matrix.
///
/// The accepted residual is `tol * max(1, |lambda|)` plus the backward error
/// floor `64 eps ||A||_F` of a stable solver.
pub fn smallest_eigenpair(a: &DenseMatrix, tol: f64) -> Result<SpectralResult> {
    check_symmetric(a)?;
    let n = a.dim();
    if n == 0 {
        return Err(Error::Dimension {
            expected: 1,
            got: 0,
        });
    }
    let floor = 64.0 * f64::EPSILON * a.frobenius_norm();
    let (lambda, mut vector, method) = if n <= DENSE_LIMIT {
        let eig = symmetric_eigen(a, true)?;
        let v = eig.vector(0).expect("vectors requested");
        (eig.values[0], v, Method::DenseQl)
    } else {
        let out = lanczos::lanczos_smallest(n, |v| a.mul_vec(v), tol.max(floor), 80, 400)?;
        (out.value, out.vector, Method::Lanczos)
    };
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    vector.iter_mut().for_each(|x| *x /= norm);
    fix_sign(&mut vector);
    let residual = residual_norm(a, &vector, lambda);
    if residual > tol * lambda.abs().max(1.0) + floor {
        return Err(Error::Convergence {
            iterations: 0,
            residual,
        });
    }
    Ok(SpectralResult {
        lambda_min: lambda,
        vector,
        residual,
        method,
        dim: n,
    })
}

/// Smallest eigenvalue only; skips eigenvector accumulation on the dense path.
pub fn smallest_eigenvalue(a: &DenseMatrix) -> Result<f64> {
    check_symmetric(a)?;
    if a.dim() <= DENSE_LIMIT {
        Ok(symmetric_eigen(a, false)?.values[0])
    } else {
        Ok(smallest_eigenpair(a, DEFAULT_TOL)?.lambda_min)
    }
}

/// Smallest eigenpair of a stability matrix in the function-space metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEigen {
    /// Smallest eigenvalue of the quadratic form relative to the `L^2` norm
    /// of the perturbation. Same sign as the smallest `l^2` eigenvalue.
    pub lambda_min: f64,
    /// Eigenpair of the Gram-scaled matrix; `vector` holds coefficients in
    /// the `L^2`-orthonormal basis.
    pub scaled: SpectralResult,
    /// Gegenbauer coefficients `(w1, w2)` of the same eigenfunction,
    /// unit `l^2` norm, largest entry positive.
    pub coefficients: Vec<f64>,
}

/// Solves `M w = lambda D w` with `D` the diagonal Gram matrix of the basis,
/// via the congruence `D^{-1/2} M D^{-1/2}`. Congruence preserves inertia,
/// so the sign of the minimum is that of the `l^2` problem, while the value
/// is the `L^2` Rayleigh quotient and stays well scaled in `N` and `p`.
pub fn stability_eigenpair(m: &StabilityMatrix, tol: f64) -> Result<StabilityEigen> {
    let scaled = smallest_eigenpair(&m.gram_scaled(), tol)?;
    let mut coefficients = m.raw_coefficients(&scaled.vector);
    let norm = coefficients.iter().map(|x| x * x).sum::<f64>().sqrt();
    coefficients.iter_mut().for_each(|x| *x /= norm);
    fix_sign(&mut coefficients);
    Ok(StabilityEigen {
        lambda_min: scaled.lambda_min,
        scaled,
        coefficients,
    })
}

/// Eigenvalue-only variant of [`stability_eigenpair`].
pub fn stability_eigenvalue(m: &StabilityMatrix) -> Result<f64> {
    smallest_eigenvalue(&m.gram_scaled())
}

/// Evaluates the components `phi_i(s) = u_i(s) phi*(s)` with
/// `u_i = sum_k w_{i,k} C_k(tanh(rate s))`, and returns `|phi_1|`, `|phi_2|`
/// on `s_grid`, each scaled to maximum 1.
pub fn eigenvector_to_s_profile(
    coefficients: &[f64],
    point: &ParameterPoint,
    s_grid: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if coefficients.len() < 2 || coefficients.len() % 2 != 0 {
        return Err(Error::Dimension {
            expected: 2 * (coefficients.len() / 2).max(1),
            got: coefficients.len(),
        });
    }
    let n = coefficients.len() / 2;
    let (w1, w2) = coefficients.split_at(n);
    let profile = RadialProfile::new(*point);
    let mut phi1 = Vec::with_capacity(s_grid.len());
    let mut phi2 = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let c = gegenbauer_all(n, point.lambda, profile.z(s));
        let u1: f64 = w1.iter().zip(&c).map(|(w, c)| w * c).sum();
        let u2: f64 = w2.iter().zip(&c).map(|(w, c)| w * c).sum();
        let phi = profile.phi_star(s);
        phi1.push((u1 * phi).abs());
        phi2.push((u2 * phi).abs());
    }
    for comp in [&mut phi1, &mut phi2] {
        let max = comp.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            comp.iter_mut().for_each(|x| *x /= max);
        }
    }
    Ok((phi1, phi2))
}

/// Squared mass of a unit coefficient vector `(w1, w2)` on odd degrees and
/// on degrees `>= cutoff`, summed over both blocks.
pub fn coefficient_masses(coefficients: &[f64], cutoff: usize) -> (f64, f64) {
    let n = coefficients.len() / 2;
    let mut odd = 0.0;
    let mut tail = 0.0;
    for (i, w) in coefficients.iter().enumerate() {
        let k = i % n.max(1);
        if k % 2 == 1 {
            odd += w * w;
        }
        if k >= cutoff {
            tail += w * w;
        }
    }
    (odd, tail)
}

/// Shape of a profile sampled on a grid symmetric about 0 and sorted
/// ascending: the largest `|f(s) - f(-s)|` and the largest increase of `f`
/// between consecutive samples moving away from the centre.
pub fn profile_shape(values: &[f64]) -> (f64, f64) {
    let m = values.len();
    let asym = (0..m / 2)
        .map(|i| (values[i] - values[m - 1 - i]).abs())
        .fold(0.0, f64::max);
    let mut increase = 0.0f64;
    for i in 0..m.saturating_sub(1) {
        // right half walks outwards forwards, left half backwards
        let d = if i + 1 > m / 2 {
            values[i + 1] - values[i]
        } else {
            values[i] - values[i + 1]
        };
        increase = increase.max(d);
    }
    (asym, increase)
}
