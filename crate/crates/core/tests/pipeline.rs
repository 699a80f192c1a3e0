use approx::assert_relative_eq;
use proptest::prelude::*;

use sckn::assembly::{read_dump, stability_matrix};
use sckn::params::validate;
use sckn::regions::{classify, RegionTag};
use sckn::spectral::{fd_smallest_eigenvalue, stability_eigenvalue, FdSpec};
use sckn::sweep::{boundary_bisect, convergence_study, sign_map, GridSpec};

#[test]
fn eigenvalue_at_profile_point_is_frozen() {
    let pt = validate(0.2511705685618729, 7.169717715437374).unwrap();
    let l = stability_eigenvalue(&stability_matrix(&pt, 40).unwrap()).unwrap();
    assert_relative_eq!(l, 0.0128, max_relative = 0.01);
}

#[test]
fn galerkin_and_finite_differences_agree_on_breaking_point() {
    let pt = validate(0.25, 9.0).unwrap();
    let g = stability_eigenvalue(&stability_matrix(&pt, 80).unwrap()).unwrap();
    let fd = fd_smallest_eigenvalue(&pt, &FdSpec::new(60.0, 2000)).unwrap();
    assert!(g < 0.0 && fd.extrapolated < 0.0);
    assert_relative_eq!(g, fd.extrapolated, max_relative = 0.01);
}

#[test]
fn boundary_lies_between_closed_form_curves() {
    for p in [4.0, 9.0, 12.0] {
        let b = boundary_bisect(p, 40, 1e-4).unwrap();
        assert!(b.alpha_hi - b.alpha_lo <= 1e-4);
        let lo = validate(b.alpha_lo, p).unwrap();
        let hi = validate(b.alpha_hi, p).unwrap();
        assert_ne!(classify(&lo).tag, RegionTag::ProvenBreaking);
        assert_ne!(classify(&hi).tag, RegionTag::ProvenSymmetry);
    }
}

#[test]
fn convergence_study_is_monotone() {
    let pt = validate(0.3, 12.0).unwrap();
    let study = convergence_study(&pt, &[10, 20, 40, 80]).unwrap();
    assert!(study
        .windows(2)
        .all(|w| w[1].lambda_min <= w[0].lambda_min + 1e-12));
    assert!(!study[0].converged);
}

#[test]
fn sweep_is_ordered_and_reproducible() {
    let grid = GridSpec {
        alpha_range: (0.05, 0.45),
        p_range: (2.5, 12.0),
        n_alpha: 6,
        n_p: 7,
        n: 16,
        exclude_band: 0.05,
    };
    let a = sign_map(&grid).unwrap();
    let b = sign_map(&grid).unwrap();
    assert_eq!(a.len(), 42);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.lambda_min.to_bits(), y.lambda_min.to_bits());
    }
    assert!(a
        .windows(2)
        .all(|w| (w[0].p, w[0].alpha) < (w[1].p, w[1].alpha)));
}

#[test]
fn dump_file_round_trip() {
    let pt = validate(0.2, 5.0).unwrap();
    let m = stability_matrix(&pt, 10).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.bin");
    m.write_dump(std::fs::File::create(&path).unwrap()).unwrap();
    let (back, n, data) = read_dump(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back, pt);
    assert_eq!(n, 10);
    assert_eq!(data, m.data);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symmetry_region_is_numerically_stable(alpha in 0.02f64..0.48, frac in 0.05f64..0.95) {
        let bound = 2.0 / alpha * (1.0 - 3.0 * alpha * alpha).sqrt();
        let p = 2.05 + frac * (bound - 2.05);
        prop_assume!((p - 6.0).abs() > 0.05);
        let pt = validate(alpha, p).unwrap();
        prop_assume!(classify(&pt).tag == RegionTag::ProvenSymmetry);
        let l = stability_eigenvalue(&stability_matrix(&pt, 40).unwrap()).unwrap();
        prop_assert!(l > -1e-9, "lambda {} at ({}, {})", l, alpha, p);
    }

    #[test]
    fn truncation_never_raises_lambda(alpha in 0.05f64..0.45, p in 2.5f64..13.0) {
        prop_assume!((p - 6.0).abs() > 0.05);
        let pt = validate(alpha, p).unwrap();
        let study = convergence_study(&pt, &[8, 16, 32, 64]).unwrap();
        for w in study.windows(2) {
            prop_assert!(w[1].lambda_min <= w[0].lambda_min + 1e-12);
        }
    }
}
