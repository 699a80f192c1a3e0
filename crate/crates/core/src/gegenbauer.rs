//! Gegenbauer basis `C_k^lambda` on `[-1, 1]` and the operator matrices of the
//! stability problem.
//!
//! Matrices act on coefficient vectors: column `k` of an operator matrix holds
//! the expansion of the operator applied to `C_k`, so `(Op)_{jk}` is the
//! coefficient of `C_j` in `Op[C_k]`. With this convention the Gram-weighted
//! entries `Nnorm[j] (Op)_{jk}` equal `int C_j Op[C_k] (1 - z^2)^{lambda - 1/2} dz`,
//! which is what [`QuadratureOracle`] checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::LAMBDA_EPS;
use crate::quad::{gauss_jacobi_symmetric, ln_gamma};
use crate::spectral::DenseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub lambda: f64,
    /// Number of retained polynomials (degrees `0..size`).
    pub size: usize,
}

impl BasisSpec {
    pub fn new(lambda: f64, size: usize) -> Result<Self> {
        if !(lambda > -0.5) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {lambda} must exceed -1/2")));
        }
        if lambda.abs() < LAMBDA_EPS {
            return Err(Error::DegenerateBasis {
                lambda,
                eps: LAMBDA_EPS,
            });
        }
        if size < 4 {
            return Err(Error::Domain(format!(
                "basis size {size} is below the minimum of 4"
            )));
        }
        Ok(BasisSpec { lambda, size })
    }

    /// Exponent of the orthogonality weight `(1 - z^2)^{lambda - 1/2}`.
    pub fn weight_power(&self) -> f64 {
        self.lambda - 0.5
    }
}

fn nonzero(x: f64, what: &str, k: usize, lambda: f64) -> Result<f64> {
    if x == 0.0 {
        Err(Error::Domain(format!(
            "division by zero in {what} at k = {k}, lambda = {lambda}"
        )))
    } else {
        Ok(x)
    }
}

/// Coefficients of `z^2 C_k = eta2 C_{k+2} + eta1 C_k + eta0 C_{k-2}`.
pub fn eta_coeffs(k: usize, lambda: f64) -> Result<(f64, f64, f64)> {
    let kf = k as f64;
    let l = lambda;
    let d0 = nonzero(kf + l, "k + lambda", k, l)?;
    let d1 = nonzero(kf + 1.0 + l, "k + 1 + lambda", k, l)?;
    let lower = if k == 0 {
        0.0
    } else {
        let dm = nonzero(kf - 1.0 + l, "k - 1 + lambda", k, l)?;
        (kf - 1.0 + 2.0 * l) * kf / (2.0 * dm)
    };
    let eta1 = ((kf + 1.0) * (kf + 2.0 * l) / (2.0 * d1) + lower) / (2.0 * d0);
    let eta2 = (kf + 1.0) * (kf + 2.0) / (4.0 * d0 * d1);
    let eta0 = if k < 2 {
        0.0
    } else {
        let dm = nonzero(kf - 1.0 + l, "k - 1 + lambda", k, l)?;
        (kf - 1.0 + 2.0 * l) * (kf - 2.0 + 2.0 * l) / (4.0 * d0 * dm)
    };
    Ok((eta0, eta1, eta2))
}

/// `C_0 .. C_{count-1}` at `z` by the upward three-term recurrence.
pub fn gegenbauer_all(count: usize, lambda: f64, z: f64) -> Vec<f64> {
    let mut c = Vec::with_capacity(count);
    if count == 0 {
        return c;
    }
    c.push(1.0);
    if count > 1 {
        c.push(2.0 * lambda * z);
    }
    for k in 1..count.saturating_sub(1) {
        let kf = k as f64;
        let next =
            (2.0 * (kf + lambda) * z * c[k] - (kf + 2.0 * lambda - 1.0) * c[k - 1]) / (kf + 1.0);
        c.push(next);
    }
    c
}

pub fn gegenbauer_eval(k: usize, lambda: f64, z: f64) -> f64 {
    gegenbauer_all(k + 1, lambda, z)[k]
}

/// Values, first and second derivatives of `C_0 .. C_{count-1}` at `z`.
pub fn gegenbauer_with_derivatives(count: usize, lambda: f64, z: f64) -> [Vec<f64>; 3] {
    let mut c = vec![0.0; count];
    let mut d = vec![0.0; count];
    let mut dd = vec![0.0; count];
    if count > 0 {
        c[0] = 1.0;
    }
    if count > 1 {
        c[1] = 2.0 * lambda * z;
        d[1] = 2.0 * lambda;
    }
    for k in 1..count.saturating_sub(1) {
        let kf = k as f64;
        let a = 2.0 * (kf + lambda);
        let b = kf + 2.0 * lambda - 1.0;
        let q = kf + 1.0;
        c[k + 1] = (a * z * c[k] - b * c[k - 1]) / q;
        d[k + 1] = (a * (c[k] + z * d[k]) - b * d[k - 1]) / q;
        dd[k + 1] = (a * (2.0 * d[k] + z * dd[k]) - b * dd[k - 1]) / q;
    }
    [c, d, dd]
}

/// `Nnorm[k] = int C_k^2 (1 - z^2)^{lambda - 1/2} dz
///           = pi 2^{1 - 2 lambda} Gamma(k + 2 lambda) / (k! (k + lambda) Gamma(lambda)^2)`,
/// evaluated through log-Gamma differences.
pub fn norm_constant(k: usize, lambda: f64) -> Result<f64> {
    let kf = k as f64;
    let (lg_num, s_num) = libm::lgamma_r(kf + 2.0 * lambda);
    let (lg_lam, _) = libm::lgamma_r(lambda);
    let denom = kf + lambda;
    let log = std::f64::consts::PI.ln() + (1.0 - 2.0 * lambda) * std::f64::consts::LN_2 + lg_num
        - ln_gamma(kf + 1.0)
        - denom.abs().ln()
        - 2.0 * lg_lam;
    if !log.is_finite() || log > f64::MAX.ln() || log < f64::MIN_POSITIVE.ln() {
        return Err(Error::Overflow { degree: k, lambda });
    }
    let sign = s_num as f64 * denom.signum();
    Ok(sign * log.exp())
}

/// The operator matrices on degrees `0..size`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBlocks {
    pub spec: BasisSpec,
    /// Multiplication by `1 - z^2`.
    pub g: DenseMatrix,
    /// `z d/dz`.
    pub aop: DenseMatrix,
    /// Eigenvalues `k (k + 2 lambda)` of the ultraspherical operator.
    pub b: Vec<f64>,
    /// Squared norms of `C_k`.
    pub nnorm: Vec<f64>,
}

pub fn build_blocks(spec: &BasisSpec) -> Result<OperatorBlocks> {
    let n = spec.size;
    let l = spec.lambda;
    let mut g = DenseMatrix::zeros(n);
    for k in 0..n {
        let (e0, e1, e2) = eta_coeffs(k, l)?;
        g[(k, k)] = 1.0 - e1;
        if k + 2 < n {
            g[(k + 2, k)] = -e2;
        }
        if k >= 2 {
            g[(k - 2, k)] = -e0;
        }
    }
    let aop = DenseMatrix::from_fn(n, |j, k| {
        if j == k {
            k as f64
        } else if j < k && (k - j) % 2 == 0 {
            2.0 * j as f64 + 2.0 * l
        } else {
            0.0
        }
    });
    let b = (0..n).map(|k| k as f64 * (k as f64 + 2.0 * l)).collect();
    let nnorm = (0..n)
        .map(|k| norm_constant(k, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(OperatorBlocks {
        spec: *spec,
        g,
        aop,
        b,
        nnorm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleKind {
    /// `(1 - z^2) C_k`.
    Gmul,
    /// `z C_k'`.
    ZDz,
    /// `-(1 - z^2) C_k'' + (n - 2) z C_k'`.
    Ultra,
    /// `C_k`.
    Norm,
}

/// Gauss rule for `(1 - z^2)^w` with polynomial values cached at its nodes.
/// Exact for every integrand `C_j Op[C_k]` with `j, k` below the basis size.
pub struct QuadratureOracle {
    spec: BasisSpec,
    weights: Vec<f64>,
    nodes: Vec<f64>,
    values: Vec<[Vec<f64>; 3]>,
}

impl QuadratureOracle {
    pub fn new(spec: &BasisSpec, weight_power: f64) -> Result<Self> {
        let m = 4 * spec.size + 64;
        let (nodes, weights) = gauss_jacobi_symmetric(m, weight_power)?;
        let values = nodes
            .iter()
            .map(|&z| gegenbauer_with_derivatives(spec.size, spec.lambda, z))
            .collect();
        Ok(QuadratureOracle {
            spec: *spec,
            weights,
            nodes,
            values,
        })
    }

    /// `int C_j Op[C_k] (1 - z^2)^w dz`.
    pub fn entry(&self, kind: OracleKind, j: usize, k: usize) -> Result<f64> {
        let n = self.spec.size;
        if j >= n || k >= n {
            return Err(Error::Dimension {
                expected: n,
                got: j.max(k) + 1,
            });
        }
        let two_lambda_plus_one = 2.0 * self.spec.lambda + 1.0;
        // Neumaier-compensated sum
        let (mut sum, mut carry) = (0.0f64, 0.0f64);
        for ((&z, &w), [c, d, dd]) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let g = (1.0 - z) * (1.0 + z);
            let op = match kind {
                OracleKind::Norm => c[k],
                OracleKind::Gmul => g * c[k],
                OracleKind::ZDz => z * d[k],
                OracleKind::Ultra => -g * dd[k] + two_lambda_plus_one * z * d[k],
            };
            let term = w * c[j] * op;
            let t = sum + term;
            carry += if sum.abs() >= term.abs() {
                (sum - t) + term
            } else {
                (term - t) + sum
            };
            sum = t;
        }
        let sum = sum + carry;
        if !sum.is_finite() {
            return Err(Error::Quadrature {
                tol: 0.0,
                estimate: f64::INFINITY,
            });
        }
        Ok(sum)
    }
}

/// One-off form of [`QuadratureOracle::entry`].
pub fn quadrature_entry_oracle(
    kind: OracleKind,
    j: usize,
    k: usize,
    spec: &BasisSpec,
    weight_power: f64,
) -> Result<f64> {
    QuadratureOracle::new(spec, weight_power)?.entry(kind, j, k)
}

/// Largest deviation of the basis matrices from the quadrature oracle:
/// relative on nonzero entries, absolute (orthonormal basis) on structural zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub max_relative: f64,
    pub max_zero_abs: f64,
    pub worst: (OracleKind, usize, usize),
}

impl OracleReport {
    pub fn within(&self, rel: f64, abs: f64) -> bool {
        self.max_relative <= rel && self.max_zero_abs <= abs
    }
}

pub fn check_blocks_against_oracle(spec: &BasisSpec) -> Result<OracleReport> {
    let blocks = build_blocks(spec)?;
    let oracle = QuadratureOracle::new(spec, spec.weight_power())?;
    let n = spec.size;
    let mut report = OracleReport {
        max_relative: 0.0,
        max_zero_abs: 0.0,
        worst: (OracleKind::Norm, 0, 0),
    };
    let mut score = f64::NEG_INFINITY;
    for kind in [
        OracleKind::Norm,
        OracleKind::Gmul,
        OracleKind::ZDz,
        OracleKind::Ultra,
    ] {
        for j in 0..n {
            for k in 0..n {
                let local = match kind {
                    OracleKind::Norm => (j == k) as u8 as f64,
                    OracleKind::Gmul => blocks.g[(j, k)],
                    OracleKind::ZDz => blocks.aop[(j, k)],
                    OracleKind::Ultra => {
                        if j == k {
                            blocks.b[k]
                        } else {
                            0.0
                        }
                    }
                };
                let integral = oracle.entry(kind, j, k)?;
                let got = integral / blocks.nnorm[j];
                let s = if local == 0.0 {
                    // zeros are measured in the orthonormal basis
                    let dev = (integral / (blocks.nnorm[j] * blocks.nnorm[k]).sqrt()).abs();
                    report.max_zero_abs = report.max_zero_abs.max(dev);
                    dev / 1e-12
                } else {
                    let dev = ((got - local) / local).abs();
                    report.max_relative = report.max_relative.max(dev);
                    dev / 1e-9
                };
                if s > score {
                    score = s;
                    report.worst = (kind, j, k);
                }
            }
        }
    }
    Ok(report)
}
