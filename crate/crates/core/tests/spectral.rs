mod common;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use common::{random_hermitian, random_op, random_symmetric, rng};
use nodal_morse::linalg::{cdot, cnorm};
use nodal_morse::spectral::{
    check_hypotheses, eig_hermitian, eig_symmetric, eigenvalues_hermitian, eigenvalues_symmetric,
};
use nodal_morse::Graph;
use nodal_morse::SchrodingerOperator;

fn spectral_scale(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

#[test]
fn path_spectrum() {
    // P3 Laplacian: 0, 1, 3.
    let op = SchrodingerOperator::laplacian(Graph::new(3, &[(0, 1), (1, 2)]).unwrap());
    let v = eigenvalues_symmetric(op.matrix()).unwrap();
    for (a, b) in v.iter().zip([0.0, 1.0, 3.0]) {
        assert!((a - b).abs() < 1e-12);
    }
    let h = check_hypotheses(&op, 2).unwrap();
    assert!(h.simple && !h.nonvanishing);
    assert_eq!(h.vanishing_vertices, vec![1]);
}

#[test]
fn phase_convention() {
    let mut r = rng(4);
    let m = random_hermitian(&mut r, 6);
    for p in eig_hermitian(&m).unwrap() {
        let vmax = p.vector.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let x0 = p.vector.iter().position(|z| z.norm() >= 0.5 * vmax).unwrap();
        assert!(p.vector[x0].im.abs() < 1e-14 && p.vector[x0].re > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn symmetric_decomposition(seed in any::<u64>(), n in 1usize..12) {
        let m = random_symmetric(&mut rng(seed), n);
        let pairs = eig_symmetric(&m).unwrap();
        let scale = spectral_scale(&m);
        for (i, p) in pairs.iter().enumerate() {
            prop_assert!(((&m * &p.vector) - &p.vector * p.value).norm() <= 1e-9 * scale.max(1e-300));
            prop_assert!((p.vector.norm() - 1.0).abs() <= 1e-10);
            for q in &pairs[i + 1..] {
                prop_assert!(p.vector.dot(&q.vector).abs() <= 1e-9);
            }
        }
        prop_assert!(pairs.windows(2).all(|w| w[0].value <= w[1].value));
        let sum: f64 = pairs.iter().map(|p| p.value).sum();
        prop_assert!((sum - m.trace()).abs() <= 1e-9 * (1.0 + m.trace().abs()));
    }

    #[test]
    fn hermitian_decomposition(seed in any::<u64>(), n in 1usize..10) {
        let m = random_hermitian(&mut rng(seed), n);
        let pairs = eig_hermitian(&m).unwrap();
        let scale = m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
        for (i, p) in pairs.iter().enumerate() {
            let residual = cnorm(&(&m * &p.vector - p.vector.scale(p.value)));
            prop_assert!(residual <= 1e-9 * scale);
            prop_assert!((cnorm(&p.vector) - 1.0).abs() <= 1e-10);
            for q in &pairs[i + 1..] {
                prop_assert!(cdot(&p.vector, &q.vector).norm() <= 1e-9);
            }
        }
        let trace: f64 = (0..n).map(|i| m[(i, i)].re).sum();
        let sum: f64 = pairs.iter().map(|p| p.value).sum();
        prop_assert!((sum - trace).abs() <= 1e-9 * (1.0 + trace.abs()));
    }

    #[test]
    fn conjugate_has_same_spectrum(seed in any::<u64>(), n in 1usize..10) {
        let m = random_hermitian(&mut rng(seed), n);
        let a = eigenvalues_hermitian(&m).unwrap();
        let b = eigenvalues_hermitian(&m.map(|z: Complex64| z.conj())).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn operator_spectra_have_small_residuals(seed in any::<u64>()) {
        let op = random_op(seed, 12, 6);
        let scale = spectral_scale(op.matrix());
        for p in eig_symmetric(op.matrix()).unwrap() {
            prop_assert!((op.matrix() * &p.vector - &p.vector * p.value).norm() <= 1e-9 * scale);
        }
    }
}
