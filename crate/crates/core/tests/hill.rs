mod common;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use nodal_morse::hill::{EdgeKind, HillOperator, Potential};
use nodal_morse::spectral::eigenvalues_hermitian;
use nodal_morse::Error;

fn free() -> HillOperator {
    HillOperator::with_default_steps(Potential::zero())
}

fn closed_form_discriminant(lambda: f64) -> f64 {
    if lambda >= 0.0 {
        2.0 * lambda.sqrt().cos()
    } else {
        2.0 * (-lambda).sqrt().cosh()
    }
}

/// Periodic (`shift = 0`) or antiperiodic (`shift = 1`) eigenvalues of
/// `-d²/dx² + q` from a truncated Fourier matrix. `terms[k-1] = (a_k, b_k)`
/// as in [`Potential::fourier`].
fn fourier_oracle(constant: f64, terms: &[(f64, f64)], shift: i64, modes: i64) -> Vec<f64> {
    let freqs: Vec<f64> = (-modes..modes).map(|k| PI * (2 * k + shift) as f64).collect();
    let n = freqs.len();
    let coeff = |m: i64| -> Complex64 {
        match m {
            0 => Complex64::new(constant, 0.0),
            m => {
                let Some(&(a, b)) = terms.get(m.unsigned_abs() as usize - 1) else {
                    return Complex64::new(0.0, 0.0);
                };
                // a cos t + b sin t = (a - ib)/2 e^{it} + (a + ib)/2 e^{-it}.
                if m > 0 {
                    Complex64::new(a / 2.0, -b / 2.0)
                } else {
                    Complex64::new(a / 2.0, b / 2.0)
                }
            }
        }
    };
    let m = DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { freqs[i] * freqs[i] } else { 0.0 };
        Complex64::new(diag, 0.0) + coeff(i as i64 - j as i64)
    });
    eigenvalues_hermitian(&m).unwrap()
}

fn edges_of(op: &HillOperator, n_max: usize, kind: EdgeKind) -> Vec<f64> {
    let bands = op.bands(n_max).unwrap();
    (1..=n_max)
        .map(|n| {
            let (a, b) = bands.band(n).unwrap();
            if a.kind == kind { a.lambda } else { b.lambda }
        })
        .collect()
}

#[test]
fn free_discriminant() {
    let op = free();
    assert_eq!(op.discriminant(0.0), 2.0);
    for k in 0..=1000 {
        let lambda = 0.1 * k as f64;
        let d = op.discriminant(lambda);
        assert!((d - closed_form_discriminant(lambda)).abs() <= 1e-7, "λ = {lambda}");
    }
    let m = op.monodromy(PI * PI);
    assert!((m[(0, 0)] + 1.0).abs() < 1e-9 && m[(0, 1)].abs() < 1e-9);
}

#[test]
fn rk4_is_fourth_order() {
    let lambda = 50.0;
    let exact = closed_form_discriminant(lambda);
    let err = |n: usize| (HillOperator::new(Potential::zero(), n).unwrap().discriminant(lambda) - exact).abs();
    let ratio = err(64) / err(128);
    assert!((12.0..20.0).contains(&ratio), "{ratio}");
}

#[test]
fn constant_potential_shifts_everything() {
    let shifted = HillOperator::with_default_steps(Potential::constant(5.0));
    let op = free();
    for lambda in [-3.0, 0.5, 7.0, 40.0] {
        let d = shifted.monodromy(lambda + 5.0) - op.monodromy(lambda);
        assert!(d.amax() < 1e-12, "{d}");
    }
    let a = op.bands(4).unwrap();
    let b = shifted.bands(4).unwrap();
    for (x, y) in a.edges.iter().zip(&b.edges) {
        assert!((x.lambda + 5.0 - y.lambda).abs() < 1e-8);
        assert_eq!((x.kind, x.simple), (y.kind, y.simple));
    }
}

#[test]
fn free_band_edges() {
    let bands = free().bands(5).unwrap();
    for n in 1..=5 {
        let (a, b) = bands.band(n).unwrap();
        let p = if a.kind == EdgeKind::Periodic { a } else { b };
        let q = if a.kind == EdgeKind::Periodic { b } else { a };
        let pk = (n / 2 * 2) as f64 * PI;
        let ak = (n.div_ceil(2) * 2 - 1) as f64 * PI;
        assert!((p.lambda - pk * pk).abs() < 1e-6, "band {n}: {p:?}");
        assert!((q.lambda - ak * ak).abs() < 1e-6, "band {n}: {q:?}");
        assert_eq!(p.simple, n == 1);
        assert!(!q.simple);
    }
}

#[test]
fn free_floquet_eigenvalue() {
    let op = free();
    let bands = op.bands(1).unwrap();
    for k in 0..=60 {
        let alpha = -3.0 + 0.1 * k as f64;
        let l = bands.floquet_eigenvalue(&op, 1, alpha).unwrap();
        assert!((l - alpha * alpha).abs() <= 1e-6, "α = {alpha}: {l}");
    }
    let r = op.hessian_identity_check(1).unwrap();
    assert!((r.fd_second_derivative - 2.0).abs() <= 1e-4 && (r.predicted - 2.0).abs() <= 1e-4, "{r:?}");
    assert!(matches!(op.hessian_identity_check(2), Err(Error::DegenerateEdge(2))));
}

#[test]
fn mathieu_edges_match_the_fourier_matrix() {
    let op = HillOperator::with_default_steps(Potential::cosine(1.0));
    let periodic = fourier_oracle(0.0, &[(1.0, 0.0)], 0, 20);
    let antiperiodic = fourier_oracle(0.0, &[(1.0, 0.0)], 1, 20);
    let (p, a) = (edges_of(&op, 6, EdgeKind::Periodic), edges_of(&op, 6, EdgeKind::Antiperiodic));
    for n in 0..6 {
        assert!((p[n] - periodic[n]).abs() <= 1e-6 * (1.0 + p[n].abs()), "P{n}: {} vs {}", p[n], periodic[n]);
        assert!((a[n] - antiperiodic[n]).abs() <= 1e-6 * (1.0 + a[n].abs()), "A{n}");
    }
    let bands = op.bands(6).unwrap();
    // Above 100 the gaps shrink below the resolution of the discriminant.
    assert!(bands.edges.iter().filter(|e| e.lambda <= 100.0).all(|e| e.simple));
    assert!(bands.edges.windows(2).all(|w| w[0].lambda < w[1].lambda));
}

#[test]
fn general_potential_edges_match_the_fourier_matrix() {
    // Not even, so the unfactored discriminant path is used.
    let terms = [(0.8, 0.6), (0.0, -0.4)];
    let op = HillOperator::with_default_steps(Potential::fourier(0.3, &terms));
    assert!(!op.is_even());
    let periodic = fourier_oracle(0.3, &terms, 0, 20);
    let antiperiodic = fourier_oracle(0.3, &terms, 1, 20);
    let (p, a) = (edges_of(&op, 4, EdgeKind::Periodic), edges_of(&op, 4, EdgeKind::Antiperiodic));
    for n in 0..4 {
        assert!((p[n] - periodic[n]).abs() <= 1e-6 * (1.0 + p[n].abs()), "P{n}: {} vs {}", p[n], periodic[n]);
        assert!((a[n] - antiperiodic[n]).abs() <= 1e-6 * (1.0 + a[n].abs()), "A{n}: {} vs {}", a[n], antiperiodic[n]);
    }
}

#[test]
fn mathieu_hessian_identity() {
    let op = HillOperator::with_default_steps(Potential::cosine(1.0));
    for n in 1..=2 {
        let r = op.hessian_identity_check(n).unwrap();
        assert!(r.holds(1e-3), "{r:?}");
        assert_eq!(r.morse_index, n - 1);
    }
}

#[test]
fn bands_are_images_of_the_circle() {
    let op = HillOperator::with_default_steps(Potential::cosine(1.0));
    let bands = op.bands(3).unwrap();
    for n in 1..=3 {
        let (lo, hi) = bands.band(n).unwrap();
        let values: Vec<f64> = (0..=64)
            .map(|j| bands.floquet_eigenvalue(&op, n, PI * j as f64 / 64.0).unwrap())
            .collect();
        let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        assert!((min - lo.lambda).abs() <= 1e-6 && (max - hi.lambda).abs() <= 1e-6, "band {n}");
        for j in 1..10 {
            let a = 0.3 * j as f64;
            let (x, y) = (bands.floquet_eigenvalue(&op, n, a).unwrap(), bands.floquet_eigenvalue(&op, n, -a).unwrap());
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn samples_interpolate_trigonometrically() {
    let samples: Vec<f64> = (0..16).map(|j| 0.7 * (2.0 * PI * j as f64 / 16.0).cos()).collect();
    let q = Potential::from_samples(&samples).unwrap();
    for k in 0..50 {
        let x = k as f64 / 37.0;
        assert!((q.eval(x) - 0.7 * (2.0 * PI * x).cos()).abs() < 1e-12);
    }
    assert!(q.is_even());
    assert!(Potential::from_samples(&[]).is_err());
}

#[test]
fn potential_specs() {
    assert_eq!(Potential::parse("zero").unwrap().eval(0.3), 0.0);
    assert_eq!(Potential::parse("const:2.5").unwrap().eval(0.7), 2.5);
    assert!((Potential::parse("cos:2").unwrap().eval(0.0) - 2.0).abs() < 1e-15);
    let f = Potential::parse("fourier:1,0,0,0.5").unwrap();
    assert!((f.eval(0.125) - ((PI / 4.0).cos() + 0.5 * (PI / 2.0).sin())).abs() < 1e-14);
    for bad in ["cos", "cos:x", "fourier:1", "sin:1", "const:inf"] {
        assert!(matches!(Potential::parse(bad), Err(Error::PotentialSpec(_))), "{bad}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn wronskian_is_conserved(
        c in -3.0..3.0f64,
        a1 in -3.0..3.0f64, b1 in -3.0..3.0f64, a2 in -2.0..2.0f64,
        lambda in -5.0..100.0f64,
    ) {
        let op = HillOperator::with_default_steps(Potential::fourier(c, &[(a1, b1), (a2, 0.0)]));
        let m = op.monodromy(lambda);
        prop_assert!((m.determinant() - 1.0).abs() <= 1e-8);
        prop_assert!((op.discriminant(lambda) - m.trace()).abs() <= 1e-9 * (1.0 + m.trace().abs()));
    }
}
