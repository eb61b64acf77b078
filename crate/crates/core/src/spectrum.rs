//! Discrete spectrum of `H = K(-i grad) + V` and the eigenvalue-accumulation ladder.
//!
//! Eigenpairs come from a matrix-free Hermitian Lanczos iteration with full
//! reorthogonalization. Converged Ritz pairs are locked and deflated; every restart
//! begins from a fresh seeded random vector or the best unconverged Ritz vector, so
//! repeated eigenvalues are picked up one eigenvector at a time. The search ends when
//! the lowest converged Ritz value of the deflated operator lies above the window.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cdot, cnorm, tridiagonal_eigen};
use crate::propagate::PropagationPlan;
use crate::report::fmt;

/// Relative residual certificate.
pub const RESIDUAL_FACTOR: f64 = 1e-8;
/// Default width of the near-threshold shell `(-delta, 0)`.
pub const DEFAULT_DELTA: f64 = 0.25;
/// Largest lattice the dense oracle accepts.
pub const DENSE_LIMIT: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub max_krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_krylov: 600,
            max_restarts: 60,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub window: (f64, f64),
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `(m, #{lambda : 2^{-m-1} <= -lambda < 2^{-m}})`.
    pub shells: Vec<(u32, usize)>,
    pub points: Vec<usize>,
    pub half_lengths: Vec<f64>,
    /// `max K + max |V|`; residuals are certified below `1e-8` times this.
    pub scale: f64,
    pub converged: bool,
    pub restarts: usize,
}

impl SpectrumReport {
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > lo && l < hi).count()
    }
}

/// Dyadic shell counts for `m = 0..=max_m`.
pub fn shell_counts(eigenvalues: &[f64], max_m: u32) -> Vec<(u32, usize)> {
    (0..=max_m)
        .map(|m| {
            let outer = 2f64.powi(-(m as i32));
            let inner = outer / 2.0;
            let c = eigenvalues.iter().filter(|&&l| -l >= inner && -l < outer).count();
            (m, c)
        })
        .collect()
}

struct Operator<'a> {
    plan: &'a PropagationPlan,
    v: &'a [f64],
    scratch: Vec<Complex64>,
}

impl Operator<'_> {
    fn apply(&mut self, x: &[Complex64], y: &mut [Complex64]) {
        self.scratch.copy_from_slice(x);
        let lat = self.plan.lattice();
        lat.raw_forward(&mut self.scratch);
        for (s, k) in self.scratch.iter_mut().zip(self.plan.kinetic()) {
            *s *= k;
        }
        lat.raw_inverse(&mut self.scratch);
        for ((o, s), (xi, vi)) in y.iter_mut().zip(&self.scratch).zip(x.iter().zip(self.v)) {
            *o = s + xi * vi;
        }
    }
}

fn orthogonalize(w: &mut [Complex64], against: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for b in against {
            let c = cdot(b, w);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    (0..n).map(|_| Complex64::new(u(), u())).collect()
}

/// Eigenpairs of `H` with eigenvalue in `(lo, hi)`, at most `k_max` of them, lowest first.
pub fn discrete_spectrum(
    plan: &PropagationPlan,
    v: &[f64],
    window: (f64, f64),
    k_max: usize,
    opts: &SolverOptions,
) -> Result<SpectrumReport> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::invalid(format!("empty search window ({lo}, {hi})")));
    }
    let lat = plan.lattice();
    let n = lat.len();
    if v.len() != n {
        return Err(Error::invalid("potential samples do not match the lattice"));
    }
    let scale = plan.kinetic().iter().fold(0.0f64, |m, k| m.max(k.abs()))
        + v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = RESIDUAL_FACTOR * scale.max(1.0);
    let mut op = Operator {
        plan,
        v,
        scratch: vec![Complex64::default(); n],
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut locked: Vec<Vec<Complex64>> = Vec::new();
    let mut found: Vec<(f64, f64)> = Vec::new();
    let mut start: Option<Vec<Complex64>> = None;
    let mut converged = false;
    let mut restarts = 0;
    let mut hy = vec![Complex64::default(); n];

    while restarts < opts.max_restarts && locked.len() < n {
        restarts += 1;
        let mut q = start.take().unwrap_or_else(|| random_vector(&mut rng, n));
        orthogonalize(&mut q, &locked);
        let nq = cnorm(&q);
        if nq < 1e-12 {
            q = random_vector(&mut rng, n);
            orthogonalize(&mut q, &locked);
        }
        let nq = cnorm(&q);
        q.iter_mut().for_each(|x| *x /= nq);

        let m = opts.max_krylov.min(n - locked.len()).max(1);
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        let mut w = vec![Complex64::default(); n];
        for _ in 0..m {
            op.apply(&q, &mut w);
            let a = cdot(&q, &w).re;
            alpha.push(a);
            basis.push(q.clone());
            orthogonalize(&mut w, &basis);
            orthogonalize(&mut w, &locked);
            let b = cnorm(&w);
            if b < 1e-13 * scale.max(1.0) {
                break;
            }
            beta.push(b);
            q = w.iter().map(|x| x / b).collect();
        }
        beta.truncate(alpha.len() - 1);
        let (theta, s) = tridiagonal_eigen(&alpha, &beta);

        let mut new_locks = 0;
        let mut lowest_unconverged: Option<Vec<Complex64>> = None;
        let mut lowest_converged_above = false;
        for (i, &t) in theta.iter().enumerate() {
            if t >= hi && (lowest_unconverged.is_some() || new_locks > 0) {
                break;
            }
            let mut y = vec![Complex64::default(); n];
            for (j, b) in basis.iter().enumerate() {
                let c = s[(j, i)];
                y.iter_mut().zip(b).for_each(|(yy, bb)| *yy += bb * c);
            }
            let ny = cnorm(&y);
            y.iter_mut().for_each(|x| *x /= ny);
            op.apply(&y, &mut hy);
            let res = hy
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b * t).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if res < tol {
                if t >= hi {
                    if new_locks == 0 && lowest_unconverged.is_none() {
                        lowest_converged_above = true;
                    }
                    break;
                }
                orthogonalize(&mut y, &locked);
                let ny = cnorm(&y);
                y.iter_mut().for_each(|x| *x /= ny);
                if t > lo {
                    found.push((t, res));
                }
                locked.push(y);
                new_locks += 1;
            } else if lowest_unconverged.is_none() {
                lowest_unconverged = Some(y);
            }
        }
        let in_window = found.len();
        if lowest_converged_above || in_window >= k_max {
            converged = true;
            break;
        }
        if locked.len() >= n {
            converged = true;
            break;
        }
        if new_locks == 0 {
            start = lowest_unconverged;
        }
    }

    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    found.truncate(k_max);
    let eigenvalues: Vec<f64> = found.iter().map(|p| p.0).collect();
    let residuals: Vec<f64> = found.iter().map(|p| p.1).collect();
    Ok(SpectrumReport {
        window,
        shells: shell_counts(&eigenvalues, 15),
        eigenvalues,
        residuals,
        points: lat.axes().iter().map(|a| a.points).collect(),
        half_lengths: lat.axes().iter().map(|a| a.half_length).collect(),
        scale,
        converged,
        restarts,
    })
}

/// All eigenvalues of the assembled matrix, ascending.
pub fn dense_eigenvalues(plan: &PropagationPlan, v: &[f64]) -> Result<Vec<f64>> {
    let n = plan.lattice().len();
    if n > DENSE_LIMIT {
        return Err(Error::invalid(format!("dense oracle limited to {DENSE_LIMIT} points, got {n}")));
    }
    if v.len() != n {
        return Err(Error::invalid("potential samples do not match the lattice"));
    }
    let mut op = Operator {
        plan,
        v,
        scratch: vec![Complex64::default(); n],
    };
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    let mut e = vec![Complex64::default(); n];
    let mut col = vec![Complex64::default(); n];
    for j in 0..n {
        e.iter_mut().for_each(|x| *x = Complex64::default());
        e[j] = Complex64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        for i in 0..n {
            h[(i, j)] = col[i];
        }
    }
    // Symmetrize away rounding so the Hermitian solver sees an exact Hermitian matrix.
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut vals: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderRow {
    pub eps: f64,
    pub coupling: f64,
    pub points: usize,
    pub half_length: f64,
    pub count: usize,
    pub eigenvalues: Vec<f64>,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Growing,
    Stable,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Growing => "growing",
            Verdict::Stable => "stable",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Strictly increasing counts are "growing"; equal last two counts are "stable".
pub fn verdict(counts: &[usize]) -> Verdict {
    if counts.len() >= 2 && counts.windows(2).all(|w| w[1] > w[0]) {
        Verdict::Growing
    } else if counts.len() >= 2 && counts[counts.len() - 1] == counts[counts.len() - 2] {
        Verdict::Stable
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AccumulationStudy {
    pub delta: f64,
    pub rows: Vec<LadderRow>,
    pub verdicts: Vec<(f64, Verdict)>,
}

impl AccumulationStudy {
    pub const CSV_HEADER: [&'static str; 6] = ["eps", "c", "N", "L", "count", "verdict"];

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let v = self
                    .verdicts
                    .iter()
                    .find(|(e, _)| *e == r.eps)
                    .map_or(Verdict::Inconclusive, |p| p.1);
                vec![
                    fmt(r.eps),
                    fmt(r.coupling),
                    r.points.to_string(),
                    fmt(r.half_length),
                    r.count.to_string(),
                    v.to_string(),
                ]
            })
            .collect()
    }
}

/// Counts of eigenvalues in `(-delta, 0)` for `-c (1 + x^2)^(-eps/2)` along a ladder of
/// one-dimensional `(N, L)` boxes, with the symbol of `plan_for`.
pub fn accumulation_study(
    sym: &crate::symbol::DispersionSymbol,
    eps_list: &[f64],
    coupling: f64,
    ladder: &[(usize, f64)],
    delta: f64,
    opts: &SolverOptions,
) -> Result<AccumulationStudy> {
    if sym.dim() != 1 {
        return Err(Error::invalid("accumulation ladder is one-dimensional"));
    }
    if ladder.len() < 2 {
        return Err(Error::invalid("ladder needs at least two rungs"));
    }
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for &eps in eps_list {
        let mut counts = Vec::new();
        for &(n, l) in ladder {
            let lat = crate::field::Lattice::uniform(sym, n, l)?;
            let plan = PropagationPlan::new(sym, &lat, crate::propagate::DEFAULT_DT)?;
            let v = lat.position_values(|x| -coupling * (1.0 + x[0] * x[0]).powf(-eps / 2.0));
            let floor = -coupling.abs() - 1.0;
            let rep = discrete_spectrum(&plan, &v, (floor, 0.0), n, opts)?;
            if !rep.converged {
                return Err(Error::NonConvergence(format!(
                    "eigensolver did not converge at eps={eps}, N={n}, L={l}"
                )));
            }
            let count = rep.count_in(-delta, 0.0);
            counts.push(count);
            rows.push(LadderRow {
                eps,
                coupling,
                points: n,
                half_length: l,
                count,
                eigenvalues: rep.eigenvalues,
                converged: rep.converged,
            });
        }
        verdicts.push((eps, verdict(&counts)));
    }
    Ok(AccumulationStudy {
        delta,
        rows,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Lattice;
    use crate::symbol::DispersionSymbol;

    fn plan(n: usize, l: f64) -> PropagationPlan {
        let sym = DispersionSymbol::laplacian(1);
        let lat = Lattice::uniform(&sym, n, l).unwrap();
        PropagationPlan::new(&sym, &lat, 1.0 / 64.0).unwrap()
    }

    #[test]
    fn free_laplacian_has_no_negative_eigenvalues() {
        let p = plan(128, 20.0);
        let v = vec![0.0; 128];
        let r = discrete_spectrum(&p, &v, (-10.0, 0.0), 10, &SolverOptions::default()).unwrap();
        assert!(r.eigenvalues.is_empty());
        assert!(r.converged);
    }

    #[test]
    fn matches_dense_oracle() {
        let p = plan(256, 20.0);
        let v = p.lattice().position_values(|x| -2.0 * (1.0 + x[0] * x[0]).powf(-1.5));
        let r = discrete_spectrum(&p, &v, (-10.0, 0.0), 20, &SolverOptions::default()).unwrap();
        let dense = dense_eigenvalues(&p, &v).unwrap();
        let neg: Vec<f64> = dense.into_iter().filter(|&l| l < 0.0).collect();
        assert_eq!(r.eigenvalues.len(), neg.len());
        for (a, b) in r.eigenvalues.iter().zip(&neg) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(r.residuals.iter().all(|&x| x < 1e-8 * r.scale));
    }

    #[test]
    fn free_degeneracy_is_resolved() {
        // Positive spectrum of the free box: k^2 is doubly degenerate away from 0 and Nyquist.
        let p = plan(64, 10.0);
        let v = vec![0.0; 64];
        let r = discrete_spectrum(&p, &v, (-1.0, 0.5), 64, &SolverOptions { max_krylov: 20, ..Default::default() }).unwrap();
        let dk = std::f64::consts::PI / 10.0;
        let expect: Vec<f64> = [0, 1, 1, 2, 2].iter().map(|&m: &i32| (m as f64 * dk).powi(2)).collect();
        assert_eq!(r.eigenvalues.len(), expect.len(), "{:?}", r.eigenvalues);
        for (a, b) in r.eigenvalues.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict(&[5, 11, 19]), Verdict::Growing);
        assert_eq!(verdict(&[1, 1, 1]), Verdict::Stable);
        assert_eq!(verdict(&[2, 1, 3]), Verdict::Inconclusive);
        assert_eq!(shell_counts(&[-0.3, -0.6, -0.2], 1), vec![(0, 1), (1, 1)]);
    }
}
