//! Oracle suite behind `sckn oracle`.

use std::fmt;

use crate::assembly::stability_matrix;
use crate::error::{Error, Result};
use crate::gegenbauer::{check_blocks_against_oracle, BasisSpec};
use crate::params::validate;
use crate::radial::{poschl_teller_ground_energy, sech2, RadialProfile};
use crate::spectral::fd::scalar_ground_energy;
use crate::spectral::{fd_smallest_eigenvalue, stability_eigenvalue, FdSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl OracleCheck {
    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }

    /// Deviation in units of the tolerance.
    pub fn score(&self) -> f64 {
        self.deviation / self.tolerance
    }
}

impl fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} deviation={:.3e} tol={:.1e} {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.deviation,
            self.tolerance,
            self.detail
        )
    }
}

pub fn gegenbauer_checks() -> Result<Vec<OracleCheck>> {
    let mut out = Vec::new();
    for l in [0.3, 0.5, 1.2] {
        let r = check_blocks_against_oracle(&BasisSpec::new(l, 16)?)?;
        out.push(OracleCheck {
            name: format!("gegenbauer lambda={l} relative"),
            deviation: r.max_relative,
            tolerance: 1e-9,
            detail: format!("worst={:?}", r.worst),
        });
        out.push(OracleCheck {
            name: format!("gegenbauer lambda={l} zeros"),
            deviation: r.max_zero_abs,
            tolerance: 1e-12,
            detail: String::new(),
        });
    }
    Ok(out)
}

pub fn radial_checks() -> Result<Vec<OracleCheck>> {
    let grid: Vec<f64> = (-2000..=2000).map(|i| i as f64 * 0.01).collect();
    let mut worst = (0.0, 0.0, 0.0);
    for (a, p) in [
        (0.25, 4.0),
        (0.4, 10.0),
        (0.1, 2.5),
        (0.45, 12.0),
        (0.2, 7.0),
    ] {
        let r = RadialProfile::new(validate(a, p)?).ode_residual(&grid);
        if r >= worst.0 {
            worst = (r, a, p);
        }
    }
    Ok(vec![OracleCheck {
        name: "radial ode residual".into(),
        deviation: worst.0,
        tolerance: 1e-10,
        detail: format!("worst at alpha={} p={}", worst.1, worst.2),
    }])
}

pub fn poschl_teller_checks() -> Result<Vec<OracleCheck>> {
    let mut worst = (0.0, 0.0, 0.0);
    for (depth, rate) in [(2.0, 1.0), (0.7, 0.9), (4.5, 2.2), (1.3, 3.1)] {
        let exact = poschl_teller_ground_energy(depth, rate, 0.0)?;
        let half = (25.0 / rate).max(25.0 / (-exact).sqrt());
        let m = ((2.0 * half / 0.005) as usize).max(2000);
        let e = |m| scalar_ground_energy(half, m, |s| -depth * sech2(rate * s));
        let extrapolated = (4.0 * e(2 * m + 1) - e(m)) / 3.0;
        let dev = (extrapolated - exact).abs();
        if dev >= worst.0 {
            worst = (dev, depth, rate);
        }
    }
    Ok(vec![OracleCheck {
        name: "poschl-teller vs finite differences".into(),
        deviation: worst.0,
        tolerance: 1e-5,
        detail: format!("worst at depth={} rate={}", worst.1, worst.2),
    }])
}

pub fn fd_checks() -> Result<Vec<OracleCheck>> {
    let mut out = Vec::new();
    for (a, p) in [(0.1, 3.0), (0.25, 9.0), (0.3, 12.0)] {
        let point = validate(a, p)?;
        let galerkin = stability_eigenvalue(&stability_matrix(&point, 80)?)?;
        let fd = fd_smallest_eigenvalue(&point, &FdSpec::new(60.0, 4000))?.extrapolated;
        let rel = (galerkin - fd).abs() / fd.abs().max(1e-300);
        let sign_ok = (galerkin < 0.0) == (fd < 0.0);
        out.push(OracleCheck {
            name: format!("fd alpha={a} p={p}"),
            deviation: if sign_ok { rel } else { f64::INFINITY },
            tolerance: 0.05,
            detail: format!("galerkin={galerkin:.10e} fd={fd:.10e}"),
        });
    }
    Ok(out)
}

pub fn run_suite(which: &str) -> Result<Vec<OracleCheck>> {
    let mut out = Vec::new();
    let all = which == "all";
    let mut matched = false;
    for (name, f) in [
        (
            "gegenbauer",
            gegenbauer_checks as fn() -> Result<Vec<OracleCheck>>,
        ),
        ("radial", radial_checks),
        ("poschl-teller", poschl_teller_checks),
        ("fd", fd_checks),
    ] {
        if all || which == name {
            matched = true;
            out.extend(f()?);
        }
    }
    if !matched {
        return Err(Error::Domain(format!(
            "unknown oracle '{which}'; expected gegenbauer, radial, poschl-teller, fd or all"
        )));
    }
    Ok(out)
}
