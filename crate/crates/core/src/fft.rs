//! Unnormalized multi-dimensional DFT over row-major buffers (last axis fastest).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct NdFft {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("shape", &self.shape).finish()
    }
}

impl NdFft {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        NdFft {
            shape: shape.to_vec(),
            forward: shape.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    /// `X_n = sum_m x_m exp(-2 pi i n.m / N)` in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.forward);
    }

    /// `x_m = sum_n X_n exp(+2 pi i n.m / N)` in place (no `1/N`).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inverse);
    }

    fn run(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len(), "buffer length does not match lattice");
        for (axis, plan) in plans.iter().enumerate() {
            self.run_axis(data, axis, plan);
        }
    }

    fn run_axis(&self, data: &mut [Complex64], axis: usize, plan: &Arc<dyn Fft<f64>>) {
        let n = self.shape[axis];
        let stride: usize = self.shape[axis + 1..].iter().product();
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        if stride == 1 {
            plan.process_with_scratch(data, &mut scratch);
            return;
        }
        let block = n * stride;
        let mut lines = vec![Complex64::default(); block];
        for chunk in data.chunks_exact_mut(block) {
            // chunk is an n x stride matrix; transpose to stride x n, transform rows, transpose back.
            for i in 0..n {
                let row = &chunk[i * stride..(i + 1) * stride];
                for (s, v) in row.iter().enumerate() {
                    lines[s * n + i] = *v;
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            for i in 0..n {
                let row = &mut chunk[i * stride..(i + 1) * stride];
                for (s, v) in row.iter_mut().enumerate() {
                    *v = lines[s * n + i];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft_2d(x: &[Complex64], n0: usize, n1: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); n0 * n1];
        for a in 0..n0 {
            for b in 0..n1 {
                let mut acc = Complex64::default();
                for m in 0..n0 {
                    for l in 0..n1 {
                        let ph = -2.0 * std::f64::consts::PI
                            * ((a * m) as f64 / n0 as f64 + (b * l) as f64 / n1 as f64);
                        acc += x[m * n1 + l] * Complex64::from_polar(1.0, ph);
                    }
                }
                out[a * n1 + b] = acc;
            }
        }
        out
    }

    #[test]
    fn matches_naive_2d() {
        let (n0, n1) = (8, 4);
        let x: Vec<Complex64> = (0..n0 * n1)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut y = x.clone();
        NdFft::new(&[n0, n1]).forward(&mut y);
        let z = naive_dft_2d(&x, n0, n1);
        for (a, b) in y.iter().zip(&z) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_3d() {
        let shape = [4, 8, 2];
        let n: usize = shape.iter().product();
        let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        let f = NdFft::new(&shape);
        let mut y = x.clone();
        f.forward(&mut y);
        f.inverse(&mut y);
        for (a, b) in y.iter().zip(&x) {
            assert!((a / n as f64 - b).norm() < 1e-12);
        }
    }
}
