//! The truncated stability matrix `M` in the Gegenbauer basis.
//!
//! Perturbations `(phi_1, phi_2) = (u_1, u_2) phi*` are expanded as
//! `u_i = sum_k w_{i,k} C_k(z)` with `z = tanh(rate s)`. With
//! `P = (p alpha^2 / 2)^{(n-4)/2} p alpha / (p - 2)` the quadratic form of the
//! linearized operator becomes `w^T M w` with
//!
//! ```text
//! M = P diag(N, N) [ rate^2 diag(G(B + 2A), G(B + 2A))
//!                    + diag((1 + 2 alpha) I, (1 - 2 alpha) I)
//!                    + (p alpha^2 / 4)(2 - p) [[G, G], [G, G]] ]
//! ```
//!
//! and the `L^2` norm of the perturbation is `w^T D w` with `D = P diag(N, N)`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gegenbauer::{build_blocks, BasisSpec, OperatorBlocks};
use crate::params::{validate, ParameterPoint};
use crate::spectral::DenseMatrix;

/// Largest accepted relative asymmetry before symmetrization.
pub const ASYMMETRY_TOL: f64 = 1e-8;
/// First 8 bytes of a binary matrix dump.
pub const DUMP_MAGIC: &[u8; 8] = b"SCKNMAT1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityMatrix {
    pub point: ParameterPoint,
    /// Polynomials per block.
    pub n: usize,
    /// Symmetric `2N x 2N` matrix, upper component first.
    pub data: DenseMatrix,
    /// Diagonal of the `L^2` Gram matrix `D`.
    pub gram: Vec<f64>,
    /// `||X - X^T||_F / ||X||_F` before symmetrization.
    pub asymmetry: f64,
}

/// `P = (p alpha^2 / 2)^{(n-4)/2} p alpha / (p - 2)`.
pub fn prefactor(point: &ParameterPoint) -> f64 {
    let (a, p) = (point.alpha, point.p);
    (0.5 * p * a * a).powf(0.5 * (point.n - 4.0)) * p * a / (p - 2.0)
}

pub fn assemble(
    point: &ParameterPoint,
    blocks: &OperatorBlocks,
    n: usize,
) -> Result<StabilityMatrix> {
    if blocks.spec.size < n {
        return Err(Error::Dimension {
            expected: n,
            got: blocks.spec.size,
        });
    }
    if blocks.spec.lambda != point.lambda {
        return Err(Error::Domain(format!(
            "blocks built for lambda = {}, point has lambda = {}",
            blocks.spec.lambda, point.lambda
        )));
    }
    let (a, p) = (point.alpha, point.p);
    let pre = prefactor(point);
    let rate2 = (0.5 * (p - 2.0) * a).powi(2);
    let coupling = 0.25 * p * a * a * (2.0 - p);
    let consts = [1.0 + 2.0 * a, 1.0 - 2.0 * a];

    // K = G (B + 2A); both factors are banded or upper triangular, so the
    // truncated product equals the truncation of the full product.
    let mut kin = DenseMatrix::zeros(n);
    for j in 0..n {
        for k in 0..n {
            let lo = j.saturating_sub(2);
            let hi = (j + 2).min(k);
            let mut sum = 0.0;
            for l in lo..=hi {
                let x = 2.0 * blocks.aop[(l, k)] + if l == k { blocks.b[k] } else { 0.0 };
                sum += blocks.g[(j, l)] * x;
            }
            kin[(j, k)] = sum;
        }
    }

    let mut x = DenseMatrix::zeros(2 * n);
    for (bi, c) in consts.iter().enumerate() {
        for bj in 0..2 {
            for j in 0..n {
                let row = pre * blocks.nnorm[j];
                for k in 0..n {
                    let mut v = coupling * blocks.g[(j, k)];
                    if bi == bj {
                        v += rate2 * kin[(j, k)];
                        if j == k {
                            v += c;
                        }
                    }
                    x[(bi * n + j, bj * n + k)] = row * v;
                }
            }
        }
    }
    let asymmetry = x.relative_asymmetry();
    if !(asymmetry < ASYMMETRY_TOL) {
        return Err(Error::Build { asymmetry });
    }
    let gram = (0..2 * n).map(|i| pre * blocks.nnorm[i % n]).collect();
    Ok(StabilityMatrix {
        point: *point,
        n,
        data: x.symmetrized(),
        gram,
        asymmetry,
    })
}

/// Builds the basis for `point` and assembles `M` with `n` polynomials per block.
pub fn stability_matrix(point: &ParameterPoint, n: usize) -> Result<StabilityMatrix> {
    let blocks = build_blocks(&BasisSpec::new(point.lambda, n)?)?;
    assemble(point, &blocks, n)
}

impl StabilityMatrix {
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// `w^T M w`.
    pub fn quadratic_form(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: w.len(),
            });
        }
        Ok(self.data.mul_vec(w).iter().zip(w).map(|(a, b)| a * b).sum())
    }

    /// `w^T D w`, the squared `L^2` norm of the perturbation.
    pub fn l2_norm_squared(&self, w: &[f64]) -> Result<f64> {
        if w.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: w.len(),
            });
        }
        Ok(w.iter().zip(&self.gram).map(|(x, g)| g * x * x).sum())
    }

    /// Leading `m` polynomials of each block.
    pub fn truncate(&self, m: usize) -> Result<StabilityMatrix> {
        if m > self.n || m == 0 {
            return Err(Error::Dimension {
                expected: self.n,
                got: m,
            });
        }
        let idx: Vec<usize> = (0..m).chain(self.n..self.n + m).collect();
        Ok(StabilityMatrix {
            point: self.point,
            n: m,
            data: self.data.principal(&idx),
            gram: idx.iter().map(|&i| self.gram[i]).collect(),
            asymmetry: self.asymmetry,
        })
    }

    /// `D^{-1/2} M D^{-1/2}`, the matrix of the form in an `L^2`-orthonormal basis.
    pub fn gram_scaled(&self) -> DenseMatrix {
        let inv: Vec<f64> = self.gram.iter().map(|g| 1.0 / g.sqrt()).collect();
        DenseMatrix::from_fn(self.dim(), |i, j| self.data[(i, j)] * (inv[i] * inv[j]))
    }

    /// Gegenbauer coefficients `w = D^{-1/2} y` of orthonormal-basis coefficients `y`.
    pub fn raw_coefficients(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.gram)
            .map(|(v, g)| v / g.sqrt())
            .collect()
    }

    /// Binary dump: 32-byte header (magic, `N` as u64, `alpha`, `p` as f64,
    /// all little-endian) followed by the `2N x 2N` entries in row-major order.
    pub fn write_dump(&self, mut out: impl Write) -> Result<()> {
        out.write_all(DUMP_MAGIC)?;
        out.write_all(&(self.n as u64).to_le_bytes())?;
        out.write_all(&self.point.alpha.to_le_bytes())?;
        out.write_all(&self.point.p.to_le_bytes())?;
        for v in self.data.as_slice() {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }
}

/// Reads a dump written by [`StabilityMatrix::write_dump`].
pub fn read_dump(mut input: impl Read) -> Result<(ParameterPoint, usize, DenseMatrix)> {
    let mut header = [0u8; 32];
    input.read_exact(&mut header)?;
    if &header[..8] != DUMP_MAGIC {
        return Err(Error::Io("not a stability matrix dump".into()));
    }
    let word = |i: usize| -> [u8; 8] { header[i..i + 8].try_into().expect("8 bytes") };
    let n = u64::from_le_bytes(word(8)) as usize;
    let alpha = f64::from_le_bytes(word(16));
    let p = f64::from_le_bytes(word(24));
    let dim = 2 * n;
    let mut bytes = vec![0u8; dim * dim * 8];
    input.read_exact(&mut bytes)?;
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((
        validate(alpha, p)?,
        n,
        DenseMatrix::from_row_major(dim, data)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gegenbauer::{gegenbauer_with_derivatives, norm_constant};
    use crate::quad::gauss_jacobi_symmetric;
    use crate::radial::RadialProfile;
    use crate::spectral::smallest_eigenpair;
    use approx::assert_relative_eq;

    #[test]
    fn coupling_blocks() {
        let pt = validate(0.25, 4.0).unwrap();
        let m = stability_matrix(&pt, 8).unwrap();
        assert_eq!(m.dim(), 16);
        assert!(m.data.is_symmetric(0.0));
        let blocks = build_blocks(&BasisSpec::new(0.5, 8).unwrap()).unwrap();
        let pre = prefactor(&pt);
        for j in 0..8 {
            for k in 0..8 {
                let want = -0.125 * pre * blocks.nnorm[j] * blocks.g[(j, k)];
                assert_relative_eq!(
                    m.data[(j, 8 + k)],
                    want,
                    epsilon = 1e-15,
                    max_relative = 1e-13
                );
                assert_eq!(m.data[(j, 8 + k)], m.data[(8 + j, k)]);
            }
        }
    }

    #[test]
    fn parity_structure() {
        let m = stability_matrix(&validate(0.33, 5.0).unwrap(), 4).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if (i % 4 + j % 4) % 2 == 1 {
                    assert_eq!(m.data[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn nested_truncation() {
        let pt = validate(0.25, 4.0).unwrap();
        let small = stability_matrix(&pt, 8).unwrap();
        let big = stability_matrix(&pt, 16).unwrap();
        let cut = big.truncate(8).unwrap();
        assert_eq!(small.data, cut.data);
        assert_eq!(small.gram, cut.gram);
        for n in [4, 10, 23] {
            let pt = validate(0.41, 9.5).unwrap();
            let a = stability_matrix(&pt, n).unwrap();
            let b = stability_matrix(&pt, 2 * n + 3)
                .unwrap()
                .truncate(n)
                .unwrap();
            assert_eq!(a.data, b.data);
        }
    }

    #[test]
    fn quadratic_form_basics() {
        let pt = validate(0.25, 4.0).unwrap();
        let m = stability_matrix(&pt, 8).unwrap();
        assert_eq!(m.quadratic_form(&vec![0.0; 16]).unwrap(), 0.0);
        assert!(matches!(
            m.quadratic_form(&[1.0; 3]),
            Err(Error::Dimension { .. })
        ));
        let eig = smallest_eigenpair(&m.data, 1e-10).unwrap();
        assert_relative_eq!(
            m.quadratic_form(&eig.vector).unwrap(),
            eig.lambda_min,
            epsilon = 1e-12,
            max_relative = 1e-10
        );
    }

    #[test]
    fn mismatched_blocks_rejected() {
        let pt = validate(0.25, 4.0).unwrap();
        let blocks = build_blocks(&BasisSpec::new(0.5, 8).unwrap()).unwrap();
        assert!(assemble(&pt, &blocks, 9).is_err());
        let other = validate(0.25, 5.0).unwrap();
        assert!(assemble(&other, &blocks, 8).is_err());
    }

    /// Entry `(i, j)` of `M` from the integral form
    /// `P [ rate^2 int u' v' (1-z^2)^{n/2} + c_i int u v (1-z^2)^{(n-4)/2}
    ///      + (p alpha^2/4)(2-p) int u v (1-z^2)^{(n-2)/2} ]`.
    fn integral_form(pt: &ParameterPoint, n: usize) -> DenseMatrix {
        let l = pt.lambda;
        let (a, p) = (pt.alpha, pt.p);
        let m = 4 * n + 64;
        let rule = |w: f64| {
            let (x, wt) = gauss_jacobi_symmetric(m, w).unwrap();
            let vals: Vec<_> = x
                .iter()
                .map(|&z| gegenbauer_with_derivatives(n, l, z))
                .collect();
            (wt, vals)
        };
        let (w_kin, v_kin) = rule(l + 1.5);
        let (w_mass, v_mass) = rule(l - 0.5);
        let (w_cpl, v_cpl) = rule(l + 0.5);
        let int = |wt: &[f64], vals: &[[Vec<f64>; 3]], d: usize, j: usize, k: usize| -> f64 {
            wt.iter()
                .zip(vals)
                .map(|(w, v)| w * v[d][j] * v[d][k])
                .sum()
        };
        let pre = prefactor(pt);
        let rate2 = (0.5 * (p - 2.0) * a).powi(2);
        let kappa = 0.25 * p * a * a * (2.0 - p);
        let consts = [1.0 + 2.0 * a, 1.0 - 2.0 * a];
        DenseMatrix::from_fn(2 * n, |i, jj| {
            let (bi, j) = (i / n, i % n);
            let (bj, k) = (jj / n, jj % n);
            let mut v = kappa * int(&w_cpl, &v_cpl, 0, j, k);
            if bi == bj {
                v += rate2 * int(&w_kin, &v_kin, 1, j, k)
                    + consts[bi] * int(&w_mass, &v_mass, 0, j, k);
            }
            pre * v
        })
    }

    #[test]
    fn entries_match_integral_form() {
        let points = [
            (0.25, 4.0),
            (0.1, 2.6),
            (0.4, 8.0),
            (0.3, 5.5),
            (0.2511705685618729, 7.169717715437374),
        ];
        for (a, p) in points {
            let pt = validate(a, p).unwrap();
            let m = stability_matrix(&pt, 12).unwrap();
            let oracle = integral_form(&pt, 12);
            let scale = m.data.frobenius_norm();
            for i in 0..24 {
                for j in 0..24 {
                    let (got, want) = (m.data[(i, j)], oracle[(i, j)]);
                    if (i % 12 + j % 12) % 2 == 1 {
                        assert_eq!(got, 0.0);
                        assert!(want.abs() < 1e-12 * scale);
                    } else {
                        assert!(
                            (got - want).abs() <= 1e-8 * want.abs() + 1e-12 * scale,
                            "({a}, {p}) entry ({i}, {j}): {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn lower_component_poschl_teller_direction_is_unstable() {
        let pt = validate(0.25, 9.0).unwrap();
        let e = crate::radial::lower_component_energy(&pt);
        let mut last = 0.0;
        for n in [40usize, 80, 160] {
            let m = stability_matrix(&pt, n).unwrap();
            let prof = RadialProfile::new(pt);
            // ground state sech(rate s)^nu of the lower-component well, divided by phi*
            let (a, p) = (pt.alpha, pt.p);
            let depth = 0.25 * p * p * a * a;
            let nu = 0.5 * ((1.0 + 4.0 * depth / (prof.rate * prof.rate)).sqrt() - 1.0);
            let q = 0.5 * (nu - 2.0 / (p - 2.0));
            // u = (1-z^2)^q / A, so w_k = int C_k (1-z^2)^{q + lambda - 1/2} / (A Nnorm_k)
            let (x, wt) = gauss_jacobi_symmetric(4 * n + 64, q + pt.lambda - 0.5).unwrap();
            let mut w = vec![0.0; 2 * n];
            for k in 0..n {
                let proj: f64 = x
                    .iter()
                    .zip(&wt)
                    .map(|(&z, &w)| w * gegenbauer_with_derivatives(n, pt.lambda, z)[0][k])
                    .sum();
                w[n + k] = proj / (prof.amplitude * norm_constant(k, pt.lambda).unwrap());
            }
            let form = m.quadratic_form(&w).unwrap();
            let norm2 = m.l2_norm_squared(&w).unwrap();
            assert!(form < 0.0, "form {form}");
            // truncated projections approach the well's ground energy from above
            let rq = form / norm2;
            assert!(rq >= e && rq < last, "N = {n}: {rq} vs {e}");
            last = rq;
        }
        assert!((last - e).abs() < 0.15 * e.abs());
    }

    #[test]
    fn dump_round_trip() {
        let pt = validate(0.3, 4.5).unwrap();
        let m = stability_matrix(&pt, 6).unwrap();
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 32 + 144 * 8);
        assert_eq!(&buf[..8], DUMP_MAGIC);
        let (p2, n, data) = read_dump(buf.as_slice()).unwrap();
        assert_eq!(p2, pt);
        assert_eq!(n, 6);
        assert_eq!(data, m.data);
        assert!(read_dump(&b"garbage"[..]).is_err());
    }
}
