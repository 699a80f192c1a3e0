//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use sckn::assembly::stability_matrix;
use sckn::gegenbauer::{build_blocks, check_blocks_against_oracle, eta_coeffs, BasisSpec};
use sckn::params::validate;
use sckn::radial::RadialProfile;
use sckn::regions::{classify, red_threshold, symmetry_bound, symmetry_curve_alpha, RegionTag};
use sckn::spectral::{
    coefficient_masses, eigenvector_to_s_profile, fd_smallest_eigenvalue, profile_shape,
    stability_eigenpair, stability_eigenvalue, FdSpec, DEFAULT_TOL,
};
use sckn::sweep::{boundary_bisect_p, sign_map, GridSpec, NumericSign};

const FIG3: (f64, f64) = (0.2511705685618729, 7.169717715437374);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn lambda_min(alpha: f64, p: f64, n: usize) -> f64 {
    let m = stability_matrix(&validate(alpha, p).unwrap(), n).unwrap();
    stability_eigenvalue(&m).unwrap()
}

fn gegenbauer_oracle() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    let mut pass = true;
    for l in [0.3, 0.5, 1.2] {
        let r = check_blocks_against_oracle(&BasisSpec::new(l, 16).unwrap()).unwrap();
        worst = (worst.0.max(r.max_relative), worst.1.max(r.max_zero_abs));
        pass &= r.within(1e-9, 1e-12);
    }
    let legendre = build_blocks(&BasisSpec::new(0.5, 16).unwrap()).unwrap();
    let norm_dev = (0..16)
        .map(|k| (legendre.nnorm[k] - 2.0 / (2.0 * k as f64 + 1.0)).abs())
        .fold(0.0, f64::max);
    let (e0, e1, e2) = eta_coeffs(0, 0.5).unwrap();
    let eta_dev = e0.abs() + (e1 - 1.0 / 3.0).abs() + (e2 - 2.0 / 3.0).abs();
    pass &= norm_dev < 1e-14 && eta_dev < 1e-15;
    outcome(
        pass,
        format!(
            "max relative {:.2e}, max zero {:.2e}, Legendre norm {norm_dev:.1e}, eta {eta_dev:.1e}",
            worst.0, worst.1
        ),
    )
}

fn radial_residual() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20240611);
    let grid: Vec<f64> = (-2000..=2000).map(|i| i as f64 * 0.01).collect();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let alpha = rng.gen_range(1e-3..0.5);
        let p = rng.gen_range(2.1..12.0);
        let r = RadialProfile::new(validate(alpha, p).unwrap()).ode_residual(&grid);
        worst = worst.max(r);
    }
    outcome(worst < 1e-10, format!("worst residual {worst:.2e}"))
}

fn region_consistency() -> Outcome {
    let grid = GridSpec {
        alpha_range: (0.02, 0.48),
        p_range: (2.1, 14.0),
        n_alpha: 100,
        n_p: 100,
        n: 40,
        exclude_band: 0.05,
    };
    let rows = sign_map(&grid).unwrap();
    let breaking_nonneg = rows
        .iter()
        .filter(|r| {
            r.analytic_label.tag == RegionTag::ProvenBreaking
                && r.numeric_sign == NumericSign::NonNegative
                && r.converged
        })
        .count();
    let symmetry_neg = rows
        .iter()
        .filter(|r| {
            r.analytic_label.tag == RegionTag::ProvenSymmetry
                && r.numeric_sign == NumericSign::Negative
        })
        .count();
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    outcome(
        breaking_nonneg == 0 && symmetry_neg == 0,
        format!(
            "{} rows, breaking/non-negative {breaking_nonneg}, symmetry/negative {symmetry_neg}, unsolved {errors}",
            rows.len()
        ),
    )
}

fn red_test_anchor() -> Outcome {
    let at9 = lambda_min(0.25, 9.0, 40);
    let at7 = lambda_min(0.25, 7.0, 40);
    let lo = symmetry_bound(0.25);
    let hi = red_threshold(0.25);
    let (p_stable, p_unstable) = boundary_bisect_p(0.25, 40, (7.0, 9.0), 1e-3).unwrap();
    let pass = at9 < 0.0
        && at7 >= -1e-9
        && p_unstable - p_stable <= 1e-3
        && p_stable >= 7.2111
        && p_unstable <= 8.7446
        && (lo - 7.2111).abs() < 1e-4
        && (hi - 8.7446).abs() < 1e-4;
    outcome(
        pass,
        format!(
            "lambda(9) = {at9:.4e}, lambda(7) = {at7:.4e}, crossing p in [{p_stable:.5}, {p_unstable:.5}], closed-form window [{lo:.5}, {hi:.5}]"
        ),
    )
}

fn cross_oracle() -> Outcome {
    let points = [
        (0.2, 8.0),
        (0.3, 5.2),
        (0.15, 10.0),
        (0.35, 6.5),
        (0.25, 7.25),
        (0.2511705685618729, 7.169717715437374),
        (0.25, 9.0),
        (0.3, 12.0),
        (0.45, 10.0),
        (0.2, 13.0),
    ];
    let mut pass = true;
    let mut tags = Vec::new();
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for (a, p) in points {
        let pt = validate(a, p).unwrap();
        tags.push(classify(&pt).tag);
        let galerkin = lambda_min(a, p, 80);
        let fd = fd_smallest_eigenvalue(&pt, &FdSpec::new(60.0, 4000))
            .unwrap()
            .extrapolated;
        let signs = (galerkin < 0.0) == (fd < 0.0);
        let rel = (galerkin - fd).abs() / fd.abs();
        if fd.abs() > 1e-4 || galerkin.abs() > 1e-4 {
            worst = worst.max(rel);
            if rel > 0.05 {
                pass = false;
                notes.push(format!("({a}, {p}) rel {rel:.3}"));
            }
        }
        if !signs {
            pass = false;
            notes.push(format!("({a}, {p}) sign {galerkin:.3e} vs {fd:.3e}"));
        }
    }
    let regions = [
        RegionTag::ProvenSymmetry,
        RegionTag::Undecided,
        RegionTag::ProvenBreaking,
    ];
    let covered = regions.iter().all(|t| tags.contains(t));
    outcome(
        pass && covered,
        format!(
            "worst relative {worst:.3e}, all regions covered: {covered} {}",
            notes.join("; ")
        ),
    )
}

fn interlacing() -> Outcome {
    let points = [(0.1, 3.0), (0.25, 9.0), FIG3, (0.4, 5.0), (0.3, 12.0)];
    let mut worst = 0.0f64;
    for (a, p) in points {
        let full = stability_matrix(&validate(a, p).unwrap(), 160).unwrap();
        let values: Vec<f64> = [10, 20, 40, 80, 160]
            .iter()
            .map(|&n| stability_eigenvalue(&full.truncate(n).unwrap()).unwrap())
            .collect();
        for w in values.windows(2) {
            worst = worst.max(w[1] - w[0]);
        }
    }
    outcome(worst <= 1e-12, format!("largest increase {worst:.2e}"))
}

fn figure3_shape() -> Outcome {
    let pt = validate(FIG3.0, FIG3.1).unwrap();
    let eig = stability_eigenpair(&stability_matrix(&pt, 40).unwrap(), DEFAULT_TOL).unwrap();
    let grid: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.05).collect();
    let (phi1, phi2) = eigenvector_to_s_profile(&eig.coefficients, &pt, &grid).unwrap();
    let (asym1, inc1) = profile_shape(&phi1);
    let (asym2, inc2) = profile_shape(&phi2);
    let asym = asym1.max(asym2);
    let inc = inc1.max(inc2);
    outcome(
        asym < 1e-8 && inc <= 1e-10,
        format!(
            "lambda {:.4e}, asymmetry {asym:.2e}, largest outward increase {inc:.2e}",
            eig.lambda_min
        ),
    )
}

fn symmetry_threshold() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut values = Vec::new();
    for p in [3.0, 5.0, 8.0, 12.0] {
        let a = symmetry_curve_alpha(p).unwrap();
        let l = lambda_min(a, p, 80);
        values.push(format!("p={p}: {l:.3e}"));
        worst = worst.min(l);
    }
    outcome(worst >= -1e-6, values.join(", "))
}

fn spectral_decay() -> Outcome {
    let pt = validate(FIG3.0, FIG3.1).unwrap();
    let eig = stability_eigenpair(&stability_matrix(&pt, 80).unwrap(), DEFAULT_TOL).unwrap();
    let (odd, tail) = coefficient_masses(&eig.coefficients, 21);
    let (_, tail_orthonormal) = coefficient_masses(&eig.scaled.vector, 21);
    outcome(
        tail < 1e-6 && odd < 1e-10,
        format!(
            "tail mass beyond degree 20 {tail:.3e} ({tail_orthonormal:.3e} in the orthonormal basis), odd mass {odd:.3e}"
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_sckn"))
            .args([
                "sweep",
                "--alpha-lo",
                "0.05",
                "--alpha-hi",
                "0.45",
                "--p-lo",
                "2.5",
                "--p-hi",
                "12",
                "--n-alpha",
                "12",
                "--n-p",
                "12",
                "--N",
                "24",
                "--out",
            ])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let first = run("a.csv");
    let second = run("b.csv");
    outcome(
        first == second && !first.is_empty(),
        format!("{} bytes, identical: {}", first.len(), first == second),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("gegenbauer oracle", gegenbauer_oracle),
        ("radial ode residual", radial_residual),
        ("region consistency", region_consistency),
        ("red-test anchor", red_test_anchor),
        ("cross-oracle agreement", cross_oracle),
        ("interlacing", interlacing),
        ("profile shape", figure3_shape),
        ("symmetry threshold stability", symmetry_threshold),
        ("spectral decay", spectral_decay),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed: Duration = start.elapsed();
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name} ({:.1}s) {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            result.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
