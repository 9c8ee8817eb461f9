mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{random_bipartite_graph, random_hermitian, random_op, rng};
use nodal_morse::campaign::random_connected_graph;
use nodal_morse::special_cases::{
    bipartite_check, determinant_index_check, hermitian_determinant, two_triangles_operator,
    vanishing_analysis, vanishing_instance,
};
use nodal_morse::spectral::{check_hypotheses, eig_symmetric};
use nodal_morse::{Error, Graph, SchrodingerOperator};

#[test]
fn two_triangles() {
    let op = two_triangles_operator();
    let pairs = eig_symmetric(op.matrix()).unwrap();
    let p = &pairs[3];
    assert!(p.value.abs() <= 1e-9 && p.simple);
    let hyp = check_hypotheses(&op, 4).unwrap();
    assert_eq!(hyp.vanishing_vertices, vec![2]);
    let r = vanishing_analysis(&op, 4).unwrap();
    assert_eq!((r.x0, r.n_plus, r.n_minus, r.beta, r.fd_nullity), (2, 2, 2, 2, 2));
    assert_eq!(r.fd_hessian.len(), 2);
    assert!(r.fd_hessian_norm <= 1e-5);
    // The bound |n₊ - n₋| = 0 is not sharp here.
    assert!(r.bound_holds() && r.nullity_bound < r.fd_nullity);
}

fn zero_index(op: &SchrodingerOperator) -> Option<usize> {
    let pairs = eig_symmetric(op.matrix()).unwrap();
    let k = (0..pairs.len()).min_by(|&a, &b| pairs[a].value.abs().total_cmp(&pairs[b].value.abs()))?;
    (pairs[k].value.abs() < 1e-9).then_some(k + 1)
}

#[test]
fn vanishing_search_respects_the_nullity_bound() {
    let (mut checked, mut degenerate) = (0, 0);
    for seed in 0..60u64 {
        let mut r = rng(1000 + seed);
        let n = r.gen_range(3..=8);
        let g = random_connected_graph(&mut r, n, 3);
        let x0 = r.gen_range(0..n);
        let Some((op, _)) = vanishing_instance(&g, x0, seed).unwrap() else { continue };
        let Some(k) = zero_index(&op) else { continue };
        match vanishing_analysis(&op, k) {
            Ok(rep) => {
                assert_eq!(rep.x0, x0);
                assert_eq!(rep.n_plus + rep.n_minus, g.neighbors(x0).len());
                assert!(rep.bound_holds(), "seed {seed}: {rep:?}");
                checked += 1;
            }
            Err(Error::DegenerateEigenvalue { .. }) => degenerate += 1,
            // Degenerate or near-degenerate FD stencils are not evidence either way.
            Err(Error::IllConditioned { .. } | Error::NotSingleVanishing(_)) => {}
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    assert!(checked >= 20, "only {checked} instances checked ({degenerate} degenerate)");
}

#[test]
fn large_imbalance_forces_degeneracy() {
    // A star has β = 0, so any |n₊ - n₋| > 0 at the centre must make 0 degenerate.
    let g = Graph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    let mut hits = 0;
    for seed in 0..40 {
        let (op, phi) = vanishing_instance(&g, 0, seed).unwrap().unwrap();
        let plus = (1..4).filter(|&y| phi[y] > 0.0).count();
        if plus.abs_diff(3 - plus) > g.cycle_dimension() {
            hits += 1;
            let pairs = eig_symmetric(op.matrix()).unwrap();
            let k = zero_index(&op).unwrap();
            assert!(!pairs[k - 1].simple, "seed {seed}");
        }
    }
    assert!(hits > 0);
}

#[test]
fn complete_bipartite() {
    let edges: Vec<(usize, usize)> = (0..2).flat_map(|a| (2..5).map(move |b| (a, b))).collect();
    let g = Graph::new(5, &edges).unwrap();
    for seed in 0..5 {
        let op = SchrodingerOperator::random_default(g.clone(), seed);
        let r = bipartite_check(&op).unwrap();
        assert!(r.euler_identity && r.num_vertices - 1 + r.beta == 6);
        assert!(r.holds(1e-10), "{r:?}");
    }
}

#[test]
fn random_bipartite_instances() {
    let mut r = rng(77);
    for _ in 0..20 {
        let n = r.gen_range(2..=9);
        let g = random_bipartite_graph(&mut r, n, 4);
        let op = SchrodingerOperator::random_default(g, r.gen());
        let rep = bipartite_check(&op).unwrap();
        assert!(rep.holds(1e-10), "{rep:?}");
    }
}

#[test]
fn trees_are_bipartite() {
    let g = Graph::new(5, &[(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
    let r = bipartite_check(&SchrodingerOperator::random_default(g, 3)).unwrap();
    assert_eq!((r.beta, r.top_index), (0, 0));
    assert!(r.holds(1e-10));
}

#[test]
fn determinant_on_random_instances() {
    let mut pairs = 0;
    for seed in 0..30 {
        let op = random_op(500 + seed, 8, 4);
        for n in 1..=op.dim() {
            match determinant_index_check(&op, n) {
                Ok(r) => {
                    assert!(r.holds(), "seed {seed}, n {n}: {r:?}");
                    assert!(r.factorization_discrepancy <= 1e-6, "{r:?}");
                    pairs += 1;
                }
                Err(Error::HypothesesViolated { .. } | Error::IllConditioned { .. }) => {}
                Err(e) => panic!("seed {seed}, n {n}: {e}"),
            }
        }
    }
    assert!(pairs > 50);
}

proptest! {
    #[test]
    fn determinant_matches_lu(seed in any::<u64>(), n in 1usize..8) {
        let m = random_hermitian(&mut rng(seed), n);
        let lu = m.clone().determinant();
        let det = hermitian_determinant(&m).unwrap();
        prop_assert!(lu.im.abs() <= 1e-12);
        prop_assert!((det - lu.re).abs() <= 1e-10 * (1.0 + lu.re.abs()));
    }
}
