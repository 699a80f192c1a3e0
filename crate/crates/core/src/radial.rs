//! The radial optimizer `phi*(s) = A sech(rate s)^{2/(p-2)}` and the
//! Pöschl-Teller energies of `sech^2` wells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParameterPoint;
use crate::quad::integrate;

/// Relative tolerance for the `L^p` norm quadrature.
pub const RADIAL_QUAD_TOL: f64 = 1e-10;
/// The norm integral runs over `|rate s| <= RADIAL_WINDOW`.
pub const RADIAL_WINDOW: f64 = 40.0;

/// `ln sech(x)` without overflow: `-|x| + ln 2 - ln(1 + e^{-2|x|})`.
pub fn ln_sech(x: f64) -> f64 {
    let a = x.abs();
    -a + std::f64::consts::LN_2 - (-2.0 * a).exp().ln_1p()
}

/// `sech^2(x)`, exact zero only on underflow.
pub fn sech2(x: f64) -> f64 {
    (2.0 * ln_sech(x)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub point: ParameterPoint,
    /// `phi*(0) = (p alpha^2 / 2)^{1/(p-2)}`.
    pub amplitude: f64,
    /// `(p - 2) alpha / 2`.
    pub rate: f64,
}

impl RadialProfile {
    pub fn new(point: ParameterPoint) -> Self {
        let p = point.p;
        let amplitude = (0.5 * p * point.alpha * point.alpha).powf(1.0 / (p - 2.0));
        RadialProfile::with_amplitude(point, amplitude)
    }

    /// Same shape with a different amplitude; only the exact amplitude
    /// solves the Euler-Lagrange equation.
    pub fn with_amplitude(point: ParameterPoint, amplitude: f64) -> Self {
        RadialProfile {
            point,
            amplitude,
            rate: 0.5 * (point.p - 2.0) * point.alpha,
        }
    }

    fn exponent(&self) -> f64 {
        2.0 / (self.point.p - 2.0)
    }

    /// `ln phi*(s)`.
    pub fn ln_phi_star(&self, s: f64) -> f64 {
        self.amplitude.ln() + self.exponent() * ln_sech(self.rate * s)
    }

    pub fn phi_star(&self, s: f64) -> f64 {
        self.ln_phi_star(s).exp()
    }

    /// `phi*''(s) = m rate^2 phi* (m - (m + 1) sech^2)` with `m = 2/(p-2)`.
    pub fn phi_star_second(&self, s: f64) -> f64 {
        let m = self.exponent();
        m * self.rate * self.rate * self.phi_star(s) * (m - (m + 1.0) * sech2(self.rate * s))
    }

    /// `|phi*(s)|^{p-2} = A^{p-2} sech^2(rate s)`.
    pub fn weight(&self, s: f64) -> f64 {
        ((self.point.p - 2.0) * self.amplitude.ln() + 2.0 * ln_sech(self.rate * s)).exp()
    }

    /// The change of variables `z = tanh(rate s)`.
    pub fn z(&self, s: f64) -> f64 {
        (self.rate * s).tanh()
    }

    /// Max over the grid of `|-phi*'' + alpha^2 phi* - phi*^{p-1}|`.
    pub fn ode_residual(&self, s_grid: &[f64]) -> f64 {
        let a2 = self.point.alpha * self.point.alpha;
        s_grid
            .iter()
            .map(|&s| {
                let phi = self.phi_star(s);
                let nonlinear = (self.point.p - 1.0) * phi.ln();
                (-self.phi_star_second(s) + a2 * phi - nonlinear.exp()).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `int phi*^p ds` over `[c - W/rate, c + W/rate]`.
    pub fn lp_integral(&self, center: f64) -> Result<f64> {
        let p = self.point.p;
        let half = RADIAL_WINDOW / self.rate;
        let (v, _) = integrate(
            |s| (p * self.ln_phi_star(s)).exp(),
            center - half,
            center + half,
            RADIAL_QUAD_TOL,
        )?;
        Ok(v)
    }

    /// `C*_{alpha,p} = ||phi*||_p^{p-2} / (2 pi)^{p/2 - 1}`.
    pub fn radial_constant(&self) -> Result<f64> {
        let p = self.point.p;
        let integral = self.lp_integral(0.0)?;
        let norm_pow = integral.powf((p - 2.0) / p);
        Ok(norm_pow / (2.0 * std::f64::consts::PI).powf(0.5 * p - 1.0))
    }
}

/// Lowest eigenvalue of `-d^2/ds^2 + offset - depth sech^2(rate s)` on the line:
/// `offset - (rate^2/4) (sqrt(1 + 4 depth / rate^2) - 1)^2`.
pub fn poschl_teller_ground_energy(depth: f64, rate: f64, offset: f64) -> Result<f64> {
    if !(depth > 0.0) || !(rate > 0.0) {
        return Err(Error::Domain(format!(
            "Pöschl-Teller well needs depth > 0 and rate > 0, got depth = {depth}, rate = {rate}"
        )));
    }
    let r2 = rate * rate;
    let nu = (1.0 + 4.0 * depth / r2).sqrt() - 1.0;
    Ok(offset - 0.25 * r2 * nu * nu)
}

/// The scalar well seen by a perturbation in the lower component alone:
/// depth `p^2 alpha^2 / 4`, rate `(p-2) alpha / 2`, offset `(1 - alpha)^2`.
pub fn lower_component_energy(point: &ParameterPoint) -> f64 {
    let (a, p) = (point.alpha, point.p);
    poschl_teller_ground_energy(0.25 * p * p * a * a, 0.5 * (p - 2.0) * a, (1.0 - a).powi(2))
        .expect("positive depth and rate on the parameter domain")
}
