#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nodal_morse::campaign::random_connected_graph;
use nodal_morse::{Graph, SchrodingerOperator};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random operator on a random connected graph with `2..=max_n` vertices.
pub fn random_op(seed: u64, max_n: usize, max_extra: usize) -> SchrodingerOperator {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_n);
    let g = random_connected_graph(&mut r, n, max_extra);
    SchrodingerOperator::random_default(g, r.gen())
}

/// Random connected bipartite graph: a random tree (always bipartite) plus
/// extra edges between the two colour classes.
pub fn random_bipartite_graph(r: &mut ChaCha8Rng, n: usize, max_extra: usize) -> Graph {
    let mut edges = Vec::new();
    let mut colour = vec![0u8; n];
    for x in 1..n {
        let p = r.gen_range(0..x);
        colour[x] = 1 - colour[p];
        edges.push((p, x));
    }
    let candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|x| (x + 1..n).map(move |y| (x, y)))
        .filter(|&(x, y)| colour[x] != colour[y] && !edges.contains(&(x, y)))
        .collect();
    let extra = r.gen_range(0..=max_extra.min(candidates.len()));
    let mut pool = candidates;
    for _ in 0..extra {
        let k = r.gen_range(0..pool.len());
        edges.push(pool.swap_remove(k));
    }
    Graph::new(n, &edges).expect("tree plus edges is connected")
}

pub fn random_symmetric(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

/// `A + iB` with `A` symmetric and `B` antisymmetric.
pub fn random_hermitian(r: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let a = random_symmetric(r, n);
    let b = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    let b = (&b - b.transpose()) * 0.5;
    DMatrix::from_fn(n, n, |i, j| Complex64::new(a[(i, j)], b[(i, j)]))
}

pub fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
