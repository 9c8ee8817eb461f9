mod common;

use nalgebra::DVector;
use proptest::prelude::*;

use common::{random_op, random_vec, rng};
use nodal_morse::hodge::{analytic_vs_fd_hessian, analyze, magnetic_first_order, tilde_q1};
use nodal_morse::linalg::rank;
use nodal_morse::nodal::nodal_domains;
use nodal_morse::spectral::check_hypotheses;
use nodal_morse::{Error, Graph, OneForm, SchrodingerOperator};

fn triangle_op(seed: u64) -> SchrodingerOperator {
    SchrodingerOperator::random_default(Graph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), seed)
}

#[test]
fn triangle_forms_agree() {
    for seed in 0..10 {
        let c = analytic_vs_fd_hessian(&triangle_op(seed), 2).unwrap();
        assert_eq!(c.beta, 1);
        assert!(c.relative_discrepancy <= 1e-5, "{c:?}");
        assert_eq!((c.analytic_index, c.fd_index), (1, 1));
    }
}

#[test]
fn trees_have_empty_kernel() {
    let g = Graph::new(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
    let r = analyze(&SchrodingerOperator::random_default(g, 3), 2).unwrap();
    assert_eq!(r.split.kernel_basis.ncols(), 0);
    assert_eq!(r.split.grad_basis.ncols(), 3);
    assert_eq!(r.flux_hessian.shape(), (0, 0));
    let c = analytic_vs_fd_hessian(&SchrodingerOperator::random_default(Graph::new(2, &[(0, 1)]).unwrap(), 1), 1)
        .unwrap();
    assert_eq!((c.beta, c.max_abs_discrepancy), (0, 0.0));
}

#[test]
fn nodal_domain_examples() {
    let p3 = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
    assert_eq!(nodal_domains(&p3, &[1.0, -2.0, 1.0]).unwrap(), 3);
    assert_eq!(nodal_domains(&p3, &[1.0, 2.0, 1.0]).unwrap(), 1);
    assert!(matches!(analyze(&SchrodingerOperator::laplacian(p3), 2), Err(Error::HypothesesViolated { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn analytic_identities(seed in any::<u64>()) {
        let op = random_op(seed, 10, 6);
        let g = op.graph();
        let mut r = rng(seed);
        for n in 1..=op.dim() {
            if !check_hypotheses(&op, n).unwrap().holds() {
                continue;
            }
            let a = match analyze(&op, n) {
                Ok(a) => a,
                Err(Error::SplitFailure(_)) => continue,
                Err(e) => return Err(TestCaseError::fail(e.to_string())),
            };
            let shifted = op.shifted(a.lambda);
            let phi = a.phi.as_slice();
            let q = &a.qform;
            let scale = 1.0 + q.coefficients().iter().fold(0.0f64, |m, v| m.max(v.abs()));

            // Nodal bounds and the defect.
            let nodal = &a.nodal;
            let beta = g.cycle_dimension() as i64;
            prop_assert!(nodal.bounds_ok());
            prop_assert!(0 <= nodal.defect && nodal.defect <= beta);
            prop_assert!(nodal.mu <= nodal.nu + 1);
            prop_assert!(nodal.mu + g.num_edges() >= g.num_vertices() + nodal.nu);

            // Index additivity and the restricted signatures.
            prop_assert_eq!(a.index_full.0, nodal.nu);
            prop_assert_eq!(a.index_full.0, a.index_grad.0 + a.index_kernel.0);
            prop_assert_eq!(a.index_grad, (n - 1, 0));
            prop_assert_eq!(a.index_kernel, (nodal.defect as usize, 0));

            // Adjointness of d★ and the form identities.
            for _ in 0..5 {
                let w = OneForm(random_vec(&mut r, g.num_edges()));
                let f = random_vec(&mut r, g.num_vertices());
                let h = random_vec(&mut r, g.num_vertices());
                let df = g.differential(&f).unwrap();
                let dh = g.differential(&h).unwrap();
                let lhs = (q.dstar() * w.to_vector()).dot(&DVector::from_column_slice(&f));
                prop_assert!((lhs - q.bilinear(&w, &df)).abs() <= 1e-10 * scale);
                let t = tilde_q1(&shifted, phi, &f).unwrap();
                prop_assert!((t - q.value(&df)).abs() <= 1e-10 * (1.0 + q.value(&df).abs()));
                let pf = DVector::from_iterator(f.len(), f.iter().zip(phi).map(|(a, b)| a * b));
                let ph = DVector::from_iterator(h.len(), h.iter().zip(phi).map(|(a, b)| a * b));
                let hat = (shifted.matrix() * pf).dot(&ph);
                prop_assert!((hat - q.bilinear(&df, &dh)).abs() <= 1e-10 * scale);
            }

            // d★ rows are the first-order magnetic rows times φ(x).
            let m = magnetic_first_order(&shifted, phi).unwrap();
            let ds = q.dstar();
            for x in 0..g.num_vertices() {
                for k in 0..g.num_edges() {
                    prop_assert!((ds[(x, k)] - phi[x] * m[(x, k)]).abs() <= 1e-12 * scale);
                }
            }

            // The splitting: dimensions, joint span, Q-orthogonality.
            let s = &a.split;
            prop_assert_eq!(s.kernel_basis.ncols() as i64, beta);
            prop_assert!((&s.dstar_matrix * &s.kernel_basis).amax() <= 1e-9 * scale);
            let cross = s.grad_basis.transpose() * q.gram() * &s.kernel_basis;
            prop_assert!(cross.iter().all(|v| v.abs() <= 1e-9 * scale));
            prop_assert_eq!(rank(&(ds * g.incidence_matrix()), 1e-10), g.num_vertices() - 1);
        }
    }
}
