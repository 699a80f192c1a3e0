//! Closed-form symmetry and symmetry-breaking conditions.
//!
//! Equality cases of every condition count as the symmetric (stable) side.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParameterPoint;

/// Default number of uniform `t` samples for the blue envelope.
pub const BLUE_SAMPLES: usize = 101;
const GOLDEN_TOL: f64 = 1e-10;
const CURVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionTag {
    ProvenSymmetry,
    ProvenBreaking,
    Undecided,
}

impl fmt::Display for RegionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegionTag::ProvenSymmetry => "ProvenSymmetry",
            RegionTag::ProvenBreaking => "ProvenBreaking",
            RegionTag::Undecided => "Undecided",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BreakingSource {
    CorollaryCondition,
    RedTest,
    BlueEnvelope,
}

impl fmt::Display for BreakingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BreakingSource::CorollaryCondition => "CorollaryCondition",
            BreakingSource::RedTest => "RedTest",
            BreakingSource::BlueEnvelope => "BlueEnvelope",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub tag: RegionTag,
    /// Every breaking condition that fired, in evaluation order.
    pub sources: Vec<BreakingSource>,
    /// Conditions that could not be evaluated, with the reason.
    pub failures: Vec<(BreakingSource, String)>,
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag)?;
        if !self.sources.is_empty() {
            let names: Vec<String> = self.sources.iter().map(|s| s.to_string()).collect();
            write!(f, " sources={}", names.join(","))?;
        }
        Ok(())
    }
}

/// `(2/alpha) sqrt(1 - 3 alpha^2)`: symmetry holds for `p` strictly below it.
pub fn symmetry_bound(alpha: f64) -> f64 {
    2.0 / alpha * (1.0 - 3.0 * alpha * alpha).sqrt()
}

pub fn in_symmetry_region(point: &ParameterPoint) -> bool {
    point.p < symmetry_bound(point.alpha)
}

pub fn corollary_radicand(point: &ParameterPoint) -> f64 {
    let (a, p) = (point.alpha, point.p);
    p.powi(4) - a * a * (p - 2.0).powi(2) * (p + 2.0) * (3.0 * p - 2.0)
}

/// `RHS - LHS` of
/// `8 (sqrt(p^4 - alpha^2 (p-2)^2 (p+2)(3p-2)) + 2) < alpha^2 (p-2)^3 (p+2) + 4p(p+4)`;
/// positive exactly when the condition holds.
pub fn corollary_margin(point: &ParameterPoint) -> Result<f64> {
    let (a, p) = (point.alpha, point.p);
    let radicand = corollary_radicand(point);
    if radicand < 0.0 {
        return Err(Error::Radicand {
            alpha: a,
            p,
            radicand,
        });
    }
    let lhs = 8.0 * (radicand.sqrt() + 2.0);
    let rhs = a * a * (p - 2.0).powi(3) * (p + 2.0) + 4.0 * p * (p + 4.0);
    Ok(rhs - lhs)
}

pub fn in_breaking_region_corollary(point: &ParameterPoint) -> Result<bool> {
    Ok(corollary_margin(point)? > 0.0)
}

/// `(sqrt(9 alpha^2 - 14 alpha + 5) - alpha + 1) / alpha`: the red test
/// direction is non-negative for `p` up to and including this value.
pub fn red_threshold(alpha: f64) -> f64 {
    ((9.0 * alpha * alpha - 14.0 * alpha + 5.0).sqrt() - alpha + 1.0) / alpha
}

pub fn red_test_instability(point: &ParameterPoint) -> bool {
    point.p > red_threshold(point.alpha)
}

/// `LHS - RHS` of the blue positivity condition
/// `(2a + sqrt(a^2 (4p^2 + 8p(p-2) t sqrt(1-t^2) + (p-2)^2)) - a p)^2 / 16 <= a^2 + a(4t^2 - 2) + 1`;
/// positive exactly when the test direction is unstable.
pub fn blue_margin(point: &ParameterPoint, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(format!("t = {t} must lie in [0, 1]")));
    }
    let (a, p) = (point.alpha, point.p);
    let inner =
        a * a * (4.0 * p * p + 8.0 * p * (p - 2.0) * t * (1.0 - t * t).sqrt() + (p - 2.0).powi(2));
    let lhs = (2.0 * a + inner.sqrt() - a * p).powi(2) / 16.0;
    let rhs = a * a + a * (4.0 * t * t - 2.0) + 1.0;
    Ok(lhs - rhs)
}

pub fn blue_test_instability(point: &ParameterPoint, t: f64) -> Result<bool> {
    Ok(blue_margin(point, t)? > 0.0)
}

/// Largest blue margin over `t in [0, 1]`: uniform scan, then golden-section
/// refinement on the neighbouring samples of the best one.
pub fn blue_envelope_margin(point: &ParameterPoint, t_samples: usize) -> (f64, f64) {
    let m = t_samples.max(2);
    let margin = |t: f64| blue_margin(point, t.clamp(0.0, 1.0)).expect("t clamped to [0, 1]");
    let h = 1.0 / (m - 1) as f64;
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for i in 0..m {
        let v = margin(i as f64 * h);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = (best_i as f64 - 1.0).max(0.0) * h;
    let mut hi = ((best_i + 1) as f64 * h).min(1.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (margin(x1), margin(x2));
    while hi - lo > GOLDEN_TOL {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = margin(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = margin(x2);
        }
    }
    let t_ref = 0.5 * (lo + hi);
    let refined = margin(t_ref);
    let sampled_t = best_i as f64 * h;
    if refined >= best {
        (refined, t_ref)
    } else {
        (best, sampled_t)
    }
}

/// Whether some `t in [0, 1]` violates the blue condition, and the `t` with
/// the largest violation.
pub fn blue_envelope_instability(point: &ParameterPoint, t_samples: usize) -> (bool, Option<f64>) {
    let (margin, t) = blue_envelope_margin(point, t_samples);
    if margin > 0.0 {
        (true, Some(t))
    } else {
        (false, None)
    }
}

/// Signed distances to each condition; positive means the condition fires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `symmetry_bound(alpha) - p`.
    pub symmetry: f64,
    /// `Err` carries the message when the radicand is negative.
    pub corollary: std::result::Result<f64, String>,
    /// `p - red_threshold(alpha)`.
    pub red: f64,
    pub blue: f64,
    pub blue_t: f64,
}

pub fn margins(point: &ParameterPoint) -> Margins {
    let (blue, blue_t) = blue_envelope_margin(point, BLUE_SAMPLES);
    Margins {
        symmetry: symmetry_bound(point.alpha) - point.p,
        corollary: corollary_margin(point).map_err(|e| e.to_string()),
        red: point.p - red_threshold(point.alpha),
        blue,
        blue_t,
    }
}

pub fn classify(point: &ParameterPoint) -> RegionLabel {
    if in_symmetry_region(point) {
        return RegionLabel {
            tag: RegionTag::ProvenSymmetry,
            sources: vec![],
            failures: vec![],
        };
    }
    let mut sources = Vec::new();
    let mut failures = Vec::new();
    match in_breaking_region_corollary(point) {
        Ok(true) => sources.push(BreakingSource::CorollaryCondition),
        Ok(false) => {}
        Err(e) => failures.push((BreakingSource::CorollaryCondition, e.to_string())),
    }
    if red_test_instability(point) {
        sources.push(BreakingSource::RedTest);
    }
    if blue_envelope_instability(point, BLUE_SAMPLES).0 {
        sources.push(BreakingSource::BlueEnvelope);
    }
    let tag = if sources.is_empty() {
        RegionTag::Undecided
    } else {
        RegionTag::ProvenBreaking
    };
    RegionLabel {
        tag,
        sources,
        failures,
    }
}

/// Bisection on `alpha in [lo, hi]` for the switch of `fires` from false to true.
fn bisect_alpha(mut lo: f64, mut hi: f64, fires: impl Fn(f64) -> bool) -> Result<f64> {
    if fires(lo) || !fires(hi) {
        return Err(Error::Bracket {
            lo_value: fires(lo) as u8 as f64,
            hi_value: fires(hi) as u8 as f64,
        });
    }
    while hi - lo > CURVE_TOL {
        let mid = 0.5 * (lo + hi);
        if fires(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn point_at(alpha: f64, p: f64) -> ParameterPoint {
    ParameterPoint::new(alpha, p).expect("bisection stays inside the domain")
}

const CURVE_LO: f64 = 1e-6;
const CURVE_HI: f64 = 0.5 - 1e-9;

/// `alpha` on the symmetry curve `p = (2/alpha) sqrt(1 - 3 alpha^2)` at `p`.
pub fn symmetry_curve_alpha(p: f64) -> Result<f64> {
    bisect_alpha(CURVE_LO, CURVE_HI, |a| !in_symmetry_region(&point_at(a, p)))
}

/// Smallest `alpha` at which the blue envelope fires at `p`.
pub fn blue_envelope_alpha(p: f64) -> Result<f64> {
    bisect_alpha(CURVE_LO, CURVE_HI, |a| {
        blue_envelope_instability(&point_at(a, p), BLUE_SAMPLES).0
    })
}

/// Smallest `alpha` at which the red test fires at `p`.
pub fn red_alpha(p: f64) -> Result<f64> {
    bisect_alpha(CURVE_LO, CURVE_HI, |a| {
        red_test_instability(&point_at(a, p))
    })
}
