//! Admissible inequality parameters.
//!
//! The symmetry question only depends on `alpha` modulo integers and up to
//! sign, so every admissible pair reduces to the strip `(0, 1/2) x (2, inf)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points with `|lambda|` below this are rejected: the basis normalization
/// carries a factor `Gamma(lambda)^-2`, which vanishes at `p = 6`.
pub const LAMBDA_EPS: f64 = 1e-3;

/// A validated `(alpha, p)` pair together with its derived exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterPoint {
    pub alpha: f64,
    pub p: f64,
    /// `alpha - 2/p`, so that `p * (alpha - beta) = 2`.
    pub beta: f64,
    /// `2p / (p - 2)`.
    pub n: f64,
    /// Gegenbauer parameter `(n - 3) / 2`.
    pub lambda: f64,
}

impl ParameterPoint {
    /// Checks the open domain `(0, 1/2) x (2, inf)` only. Use [`validate`]
    /// when the point will feed the Gegenbauer pipeline.
    pub fn new(alpha: f64, p: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.5) {
            return Err(Error::Domain(format!(
                "alpha = {alpha} must lie in the open interval (0, 1/2)"
            )));
        }
        let (n, lambda) = derived_exponents(p)?;
        Ok(ParameterPoint {
            alpha,
            p,
            beta: alpha - 2.0 / p,
            n,
            lambda,
        })
    }

    /// Whether the Gegenbauer basis for this point is non-degenerate.
    pub fn basis_ok(&self) -> bool {
        self.lambda.abs() >= LAMBDA_EPS
    }
}

/// Domain check plus the basis degeneracy check near `p = 6`.
pub fn validate(alpha: f64, p: f64) -> Result<ParameterPoint> {
    let point = ParameterPoint::new(alpha, p)?;
    if !point.basis_ok() {
        return Err(Error::DegenerateBasis {
            lambda: point.lambda,
            eps: LAMBDA_EPS,
        });
    }
    Ok(point)
}

/// `(n, lambda)` for an integrability exponent `p > 2`.
pub fn derived_exponents(p: f64) -> Result<(f64, f64)> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::Domain(format!(
            "p = {p} must be a finite number greater than 2"
        )));
    }
    let n = 2.0 * p / (p - 2.0);
    Ok((n, 0.5 * (n - 3.0)))
}

/// Transformations applied by [`reduce_parameters`]: first `alpha -> alpha + k_shift`,
/// then `alpha -> -alpha` when `conjugated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub k_shift: i64,
    pub conjugated: bool,
}

impl ReductionTrace {
    pub fn apply(&self, alpha_raw: f64) -> f64 {
        let shifted = alpha_raw + self.k_shift as f64;
        if self.conjugated {
            -shifted
        } else {
            shifted
        }
    }

    pub fn is_identity(&self) -> bool {
        self.k_shift == 0 && !self.conjugated
    }
}

/// Maps an arbitrary non-integer `alpha` into `(0, 1/2)` via a phase shift
/// `e^{ik theta}` and complex conjugation.
pub fn reduce_parameters(alpha_raw: f64, p: f64) -> Result<(ParameterPoint, ReductionTrace)> {
    if !alpha_raw.is_finite() {
        return Err(Error::Domain(format!("alpha = {alpha_raw} is not finite")));
    }
    if alpha_raw.fract() == 0.0 {
        return Err(Error::Domain(format!(
            "alpha = {alpha_raw} is an integer; the inequality excludes integer alpha"
        )));
    }
    let k_shift = -(alpha_raw.round()) as i64;
    let shifted = alpha_raw + k_shift as f64;
    let trace = ReductionTrace {
        k_shift,
        conjugated: shifted < 0.0,
    };
    let alpha = trace.apply(alpha_raw);
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Domain(format!(
            "alpha = {alpha_raw} reduces to {alpha}, which is on the boundary of (0, 1/2)"
        )));
    }
    Ok((validate(alpha, p)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn quarter_four() {
        let pt = validate(0.25, 4.0).unwrap();
        assert_eq!(pt.n, 4.0);
        assert_eq!(pt.lambda, 0.5);
        assert_relative_eq!(pt.p * (pt.alpha - pt.beta), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn open_interval_boundaries() {
        assert!(matches!(validate(0.5, 4.0), Err(Error::Domain(_))));
        assert!(matches!(validate(0.0, 4.0), Err(Error::Domain(_))));
        assert!(matches!(validate(0.25, 2.0), Err(Error::Domain(_))));
        assert!(matches!(validate(0.25, f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn p_six_is_degenerate() {
        assert!(matches!(
            validate(0.25, 6.0),
            Err(Error::DegenerateBasis { .. })
        ));
        // the domain-only constructor still accepts it
        assert_eq!(ParameterPoint::new(0.25, 6.0).unwrap().lambda, 0.0);
    }

    #[test]
    fn exponents() {
        assert_eq!(derived_exponents(4.0).unwrap(), (4.0, 0.5));
        assert_eq!(derived_exponents(6.0).unwrap(), (3.0, 0.0));
        let (n, lam) = derived_exponents(1e12).unwrap();
        assert!(n > 2.0 && (n - 2.0) < 1e-10);
        assert!(lam > -0.5);
        assert!(derived_exponents(1.5).is_err());
    }

    #[test]
    fn reduction_examples() {
        let (pt, tr) = reduce_parameters(1.3, 4.0).unwrap();
        assert_relative_eq!(pt.alpha, 0.3, epsilon = 1e-15);
        assert_eq!(
            tr,
            ReductionTrace {
                k_shift: -1,
                conjugated: false
            }
        );

        let (pt, tr) = reduce_parameters(-0.2, 4.0).unwrap();
        assert_eq!(pt.alpha, 0.2);
        assert_eq!(
            tr,
            ReductionTrace {
                k_shift: 0,
                conjugated: true
            }
        );

        let (pt, tr) = reduce_parameters(0.7, 4.0).unwrap();
        assert_relative_eq!(pt.alpha, 0.3, epsilon = 1e-15);
        assert_eq!(
            tr,
            ReductionTrace {
                k_shift: -1,
                conjugated: true
            }
        );
    }

    #[test]
    fn reduction_rejects_integers_and_half_integers() {
        assert!(reduce_parameters(2.0, 4.0).is_err());
        assert!(reduce_parameters(0.0, 4.0).is_err());
        assert!(reduce_parameters(1.5, 4.0).is_err());
        assert!(reduce_parameters(-0.5, 4.0).is_err());
    }

    #[test]
    fn lambda_above_minus_half_on_log_grid() {
        for i in 0..=400 {
            let t = i as f64 / 400.0;
            // log-spaced excess over 2, from 1e-6 to 1e6
            let p = 2.0 + 10f64.powf(-6.0 + 12.0 * t);
            let (n, lam) = derived_exponents(p).unwrap();
            assert!(lam > -0.5, "p = {p}");
            assert!(n > 2.0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn reduction_is_idempotent(alpha in -40.0f64..40.0, p in 2.01f64..200.0) {
            if let Ok((pt, tr)) = reduce_parameters(alpha, p) {
                prop_assert!(pt.alpha > 0.0 && pt.alpha < 0.5);
                prop_assert_eq!(tr.apply(alpha), pt.alpha);
                let (again, tr2) = reduce_parameters(pt.alpha, p).unwrap();
                prop_assert!(tr2.is_identity());
                prop_assert_eq!(again, pt);
            }
        }

        #[test]
        fn exponent_identity(p in 2.0001f64..10.0) {
            let (n, lam) = derived_exponents(p).unwrap();
            let lhs = (n - 2.0) * (p - 2.0);
            prop_assert!((lhs - 4.0).abs() <= 1e-14 * 4.0);
            prop_assert!((lam - 0.5 * (n - 3.0)).abs() == 0.0);
        }
    }
}
