//! Small dense helpers: elimination-based rank and nullspace, Gram–Schmidt,
//! linear solves, and complex inner products.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Maximum absolute row sum.
pub fn norm_inf(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Reduced row echelon form with partial pivoting. Returns the reduced
/// matrix and the pivot columns. Entries whose magnitude falls below
/// `rel_tol * ‖m‖∞` are treated as zero.
pub fn rref(m: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, Vec<usize>) {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let tol = rel_tol * norm_inf(m).max(f64::MIN_POSITIVE);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            for i in r..rows {
                a[(i, c)] = 0.0;
            }
            continue;
        }
        a.swap_rows(r, p);
        let pv = a[(r, c)];
        for j in c..cols {
            a[(r, j)] /= pv;
        }
        for i in 0..rows {
            if i != r {
                let f = a[(i, c)];
                if f != 0.0 {
                    for j in c..cols {
                        let delta = f * a[(r, j)];
                        a[(i, j)] -= delta;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    rref(m, rel_tol).1.len()
}

/// Orthonormal basis (as columns) of the nullspace of `m`.
pub fn nullspace(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    let (r, pivots) = rref(m, rel_tol);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis = DMatrix::zeros(cols, free.len());
    for (k, &f) in free.iter().enumerate() {
        basis[(f, k)] = 1.0;
        for (row, &p) in pivots.iter().enumerate() {
            basis[(p, k)] = -r[(row, f)];
        }
    }
    let (q, _) = orthonormalize(&basis, 1e-12);
    q
}

/// Modified Gram–Schmidt (two passes). Returns the orthonormal columns
/// spanning the same space and the numerical rank; columns whose residual
/// norm drops below `rel_tol` times their original norm are discarded.
pub fn orthonormalize(m: &DMatrix<f64>, rel_tol: f64) -> (DMatrix<f64>, usize) {
    let mut kept: Vec<DVector<f64>> = Vec::new();
    for c in m.column_iter() {
        let orig = c.norm();
        if orig == 0.0 {
            continue;
        }
        let mut v = c.into_owned();
        for _ in 0..2 {
            for q in &kept {
                let p = q.dot(&v);
                v.axpy(-p, q, 1.0);
            }
        }
        let n = v.norm();
        if n > rel_tol * orig {
            kept.push(v / n);
        }
    }
    let r = kept.len();
    let out = if r == 0 {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&kept)
    };
    (out, r)
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting. Returns
/// `None` when a pivot falls below `1e-14 * ‖a‖∞`.
pub fn solve(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.nrows(), n);
    let tol = 1e-14 * norm_inf(a).max(f64::MIN_POSITIVE);
    let mut m = a.clone();
    let mut x = b.clone();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs()))?;
        if m[(p, c)].abs() <= tol {
            return None;
        }
        m.swap_rows(c, p);
        x.swap_rows(c, p);
        for i in c + 1..n {
            let f = m[(i, c)] / m[(c, c)];
            if f != 0.0 {
                for j in c..n {
                    let d = f * m[(c, j)];
                    m[(i, j)] -= d;
                }
                for j in 0..x.ncols() {
                    let d = f * x[(c, j)];
                    x[(i, j)] -= d;
                }
            }
        }
    }
    for j in 0..x.ncols() {
        for i in (0..n).rev() {
            let mut s = x[(i, j)];
            for k in i + 1..n {
                s -= m[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = s / m[(i, i)];
        }
    }
    Some(x)
}

/// `⟨u, v⟩ = Σ u_i conj(v_i)`, linear in the first slot.
pub fn cdot(u: &DVector<Complex64>, v: &DVector<Complex64>) -> Complex64 {
    u.iter().zip(v.iter()).map(|(a, b)| a * b.conj()).sum()
}

pub fn cnorm(u: &DVector<Complex64>) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

pub fn to_complex_vec(v: &DVector<f64>) -> DVector<Complex64> {
    v.map(|x| Complex64::new(x, 0.0))
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}
