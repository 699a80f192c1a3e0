//! CSV and JSON renderings. Reals are written with 17 significant digits,
//! lines end in `\n`, and every CSV starts with its header.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sweep::{BoundaryBracket, SweepRow};

pub const SWEEP_HEADER: &str = "alpha,p,N,lambda_min,analytic_label,numeric_sign,converged";
pub const BOUNDARY_HEADER: &str = "p,alpha_lo,alpha_hi,N";
pub const PROFILE_HEADER: &str = "s,phi1_abs,phi2_abs";

/// `x` with 17 significant digits.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(96 * (rows.len() + 1));
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            real(r.alpha),
            real(r.p),
            r.n,
            real(r.lambda_min),
            r.analytic_label.tag,
            r.numeric_sign,
            r.converged
        ));
    }
    out
}

pub fn boundary_csv(brackets: &[BoundaryBracket]) -> String {
    let mut out = format!("{BOUNDARY_HEADER}\n");
    for b in brackets {
        out.push_str(&format!(
            "{},{},{},{}\n",
            real(b.p),
            real(b.alpha_lo),
            real(b.alpha_hi),
            b.n
        ));
    }
    out
}

pub fn profile_csv(s: &[f64], phi1: &[f64], phi2: &[f64]) -> String {
    let mut out = format!("{PROFILE_HEADER}\n");
    for ((s, a), b) in s.iter().zip(phi1).zip(phi2) {
        out.push_str(&format!("{},{},{}\n", real(*s), real(*a), real(*b)));
    }
    out
}

pub fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
