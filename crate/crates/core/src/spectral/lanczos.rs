//! Restarted Lanczos iteration with full reorthogonalization, used for the
//! smallest eigenpair of matrices too large for the dense path.

use super::dense::tridiagonal_eigen;
use crate::error::{Error, Result};

pub struct LanczosOutcome {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Deterministic start vector with no exact symmetry, so it is not
/// orthogonal to any parity sector.
fn start_vector(n: usize) -> Vec<f64> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            1.0 + 0.5 * ((state >> 11) as f64 / (1u64 << 53) as f64)
        })
        .collect();
    let s = norm(&v);
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Smallest eigenpair of the symmetric operator `apply` on `R^n`.
///
/// Each cycle builds a Krylov basis of at most `krylov_dim` vectors and
/// restarts from the current smallest Ritz vector until the true residual
/// `||A x - theta x||` drops below `tol`.
pub fn lanczos_smallest(
    n: usize,
    apply: impl Fn(&[f64]) -> Vec<f64>,
    tol: f64,
    krylov_dim: usize,
    max_restarts: usize,
) -> Result<LanczosOutcome> {
    let m_max = krylov_dim.clamp(2, n.max(2)).min(n);
    let mut x = start_vector(n);
    let mut iterations = 0;
    let mut last_residual = f64::INFINITY;

    for _ in 0..max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m_max);
        let mut alphas = Vec::with_capacity(m_max);
        let mut betas: Vec<f64> = Vec::with_capacity(m_max);
        basis.push(x.clone());
        loop {
            let j = basis.len() - 1;
            let mut w = apply(&basis[j]);
            iterations += 1;
            let a = dot(&w, &basis[j]);
            alphas.push(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let b = norm(&w);
            if basis.len() == m_max || b <= 1e-14 * a.abs().max(1.0) {
                break;
            }
            betas.push(b);
            w.iter_mut().for_each(|v| *v /= b);
            basis.push(w);
        }
        let eig = tridiagonal_eigen(&alphas, &betas, true)?;
        let theta = eig.values[0];
        let y = eig.vector(0).expect("vectors requested");
        let mut ritz = vec![0.0; n];
        for (q, &c) in basis.iter().zip(&y) {
            ritz.iter_mut().zip(q).for_each(|(r, qi)| *r += c * qi);
        }
        let s = norm(&ritz);
        ritz.iter_mut().for_each(|v| *v /= s);
        let ar = apply(&ritz);
        let residual = norm(
            &ar.iter()
                .zip(&ritz)
                .map(|(a, r)| a - theta * r)
                .collect::<Vec<_>>(),
        );
        last_residual = residual;
        if residual <= tol {
            return Ok(LanczosOutcome {
                value: theta,
                vector: ritz,
                residual,
                iterations,
            });
        }
        x = ritz;
    }
    Err(Error::Convergence {
        iterations,
        residual: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::dense::{symmetric_eigen, DenseMatrix};

    #[test]
    fn matches_dense_on_graded_matrix() {
        let n = 150;
        let a = DenseMatrix::from_fn(n, |i, j| {
            if i == j {
                (i as f64 - 40.0).abs() * 0.1
            } else if i.abs_diff(j) == 1 {
                -0.3
            } else {
                0.0
            }
        });
        let dense = symmetric_eigen(&a, false).unwrap();
        let out = lanczos_smallest(n, |v| a.mul_vec(v), 1e-10, 60, 500).unwrap();
        assert!((out.value - dense.values[0]).abs() < 1e-10);
        assert!(out.residual <= 1e-10);
    }
}
