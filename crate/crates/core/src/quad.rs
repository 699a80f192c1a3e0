//! Quadrature rules: adaptive Gauss-Kronrod on finite intervals and
//! Gauss rules for the symmetric Jacobi weight `(1 - z^2)^w`.

use crate::error::{Error, Result};
use crate::spectral::dense::tridiagonal_eigen;

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to relative
/// tolerance `rel_tol`. Returns the integral and the error estimate.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<(f64, f64)> {
    const MAX_INTERVALS: usize = 20_000;
    let (v0, e0) = kronrod15(&f, a, b);
    // (error, lo, hi, value)
    let mut pieces = vec![(e0, a, b, v0)];
    let mut total = v0;
    let mut err = e0;
    while err > rel_tol * total.abs() && pieces.len() < MAX_INTERVALS {
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .expect("non-empty");
        let (e, lo, hi, v) = pieces.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (vl, el) = kronrod15(&f, lo, mid);
        let (vr, er) = kronrod15(&f, mid, hi);
        total += vl + vr - v;
        err += el + er - e;
        pieces.push((el, lo, mid, vl));
        pieces.push((er, mid, hi, vr));
    }
    // recompute sums to drop accumulated update round-off
    total = pieces.iter().map(|p| p.3).sum();
    err = pieces.iter().map(|p| p.0).sum();
    if err > rel_tol * total.abs() {
        return Err(Error::Quadrature {
            tol: rel_tol,
            estimate: err / total.abs().max(f64::MIN_POSITIVE),
        });
    }
    Ok((total, err))
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma_r(x).0
}

/// Gauss rule with `m` nodes for the weight `(1 - z^2)^w` on `[-1, 1]`,
/// `w > -1`, by the Golub-Welsch construction. Exact for polynomials of
/// degree below `2m`.
pub fn gauss_jacobi_symmetric(m: usize, w: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(w > -1.0) {
        return Err(Error::Domain(format!("weight exponent {w} must exceed -1")));
    }
    // monic recurrence coefficients for the ultraspherical family mu = w + 1/2
    let mu = w + 0.5;
    let off: Vec<f64> = (1..=m)
        .map(|k| {
            let k = k as f64;
            let beta = if k == 1.0 {
                1.0 / (2.0 * (1.0 + mu))
            } else {
                k * (k + 2.0 * mu - 1.0) / (4.0 * (k + mu) * (k + mu - 1.0))
            };
            beta.sqrt()
        })
        .collect();
    let eig = tridiagonal_eigen(&vec![0.0; m], &off[..m - 1], false)?;
    let total = std::f64::consts::PI.sqrt() * (ln_gamma(w + 1.0) - ln_gamma(w + 1.5)).exp();
    // orthonormal values p_0..p_m and p_m' at x
    let eval = |x: f64| {
        let mut p = Vec::with_capacity(m + 1);
        let (mut prev, mut cur) = (0.0, 1.0 / total.sqrt());
        let (mut dprev, mut dcur) = (0.0, 0.0);
        p.push(cur);
        for k in 0..m {
            let b_prev = if k == 0 { 0.0 } else { off[k - 1] };
            let next = (x * cur - b_prev * prev) / off[k];
            let dnext = (cur + x * dcur - b_prev * dprev) / off[k];
            (prev, cur, dprev, dcur) = (cur, next, dcur, dnext);
            p.push(cur);
        }
        (p, dcur)
    };
    let mut nodes = eig.values;
    nodes.sort_by(|a, b| a.total_cmp(b));
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let (p, d) = eval(*x);
            if d != 0.0 {
                *x -= p[m] / d;
            }
        }
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| 1.0 / eval(x).0[..m].iter().map(|v| v * v).sum::<f64>())
        .collect();
    // enforce the reflection symmetry of the rule
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let wt = 0.5 * (weights[i] + weights[j]);
        (nodes[i], nodes[j], weights[i], weights[j]) = (-x, x, wt, wt);
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok((nodes, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_gaussian() {
        let (v, _) = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-13).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn legendre_rule_moments() {
        let (x, w) = gauss_jacobi_symmetric(6, 0.0).unwrap();
        for deg in 0..12 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn chebyshev_weight() {
        // weight (1 - z^2)^{-1/2}: integral of z^2 is pi/2
        let (x, w) = gauss_jacobi_symmetric(5, -0.5).unwrap();
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((q - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn singular_weight_against_beta_function() {
        // int (1-z^2)^w z^4 dz = B(5/2, w+1)
        let w = -0.7;
        let (x, wt) = gauss_jacobi_symmetric(8, w).unwrap();
        let q: f64 = x.iter().zip(&wt).map(|(x, wt)| wt * x.powi(4)).sum();
        let exact = (ln_gamma(2.5) + ln_gamma(w + 1.0) - ln_gamma(w + 3.5)).exp();
        assert!((q - exact).abs() < 1e-13 * exact);
    }
}
