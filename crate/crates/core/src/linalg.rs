//! Lanczos iterations with full reorthogonalization.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal `alpha`
/// and off-diagonal `beta`; eigenvalues ascending with matching column vectors.
pub fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Largest eigenvalue of a real symmetric operator given by `apply`.
pub fn largest_eigenvalue(n: usize, max_iter: usize, mut apply: impl FnMut(&[f64], &mut [f64])) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662).sin()).collect();
    normalize(&mut v);
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut w = vec![0.0; n];
    for _ in 0..max_iter.min(n) {
        apply(&v, &mut w);
        let a = dot(&v, &w);
        alpha.push(a);
        basis.push(v.clone());
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nb = dot(&w, &w).sqrt();
        if nb < 1e-14 * a.abs().max(1.0) {
            break;
        }
        beta.push(nb);
        v = w.iter().map(|x| x / nb).collect();
    }
    beta.truncate(alpha.len().saturating_sub(1));
    let (vals, _) = tridiagonal_eigen(&alpha, &beta);
    *vals.last().expect("at least one iteration")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

pub(crate) fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn cnorm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_known_spectrum() {
        // Path-graph Laplacian-like matrix 2 on the diagonal, -1 off: eigenvalues 2 - 2 cos(k pi/(n+1)).
        let n = 12;
        let (vals, vecs) = tridiagonal_eigen(&vec![2.0; n], &vec![-1.0; n - 1]);
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12);
        }
        assert!((vecs.column(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn largest_of_diagonal() {
        let d: Vec<f64> = (0..200).map(|i| (i as f64).sqrt()).collect();
        let top = largest_eigenvalue(200, 200, |x, y| {
            for i in 0..200 {
                y[i] = d[i] * x[i];
            }
        });
        assert!((top - 199f64.sqrt()).abs() < 1e-10);
    }
}
