//! Periodic tensor-product lattices, wavefunctions and weighted norms.
//!
//! Axis `i` has `N_i` points `x = -L_i + 2 L_i m / N_i` and momenta `k = pi m / L_i`,
//! `m in [-N_i/2, N_i/2)`. Momentum samples are stored in FFT order and use the
//! continuum normalization `psi_hat(k) = (2 pi)^(-d/2) int e^{-ikx} psi(x) dx`, so
//! both representations carry the same L² norm with volume elements `dx` and `dk`.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::admissibility::DecayIndex;
use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::symbol::DispersionSymbol;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Axis {
    pub points: usize,
    pub half_length: f64,
}

impl Axis {
    pub fn new(points: usize, half_length: f64) -> Self {
        Axis { points, half_length }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    pub fn dk(&self) -> f64 {
        std::f64::consts::PI / self.half_length
    }

    /// Largest representable momentum magnitude, `pi N / (2 L)`.
    pub fn k_nyquist(&self) -> f64 {
        self.dk() * (self.points / 2) as f64
    }
}

#[derive(Debug)]
pub struct Lattice {
    axes: Vec<Axis>,
    block_of_axis: Vec<usize>,
    fft: NdFft,
    x: Vec<Vec<f64>>,
    k: Vec<Vec<f64>>,
    odd: Vec<bool>,
}

impl Lattice {
    /// `block_of_axis[i]` names the symbol block owning coordinate `i`.
    pub fn new(axes: Vec<Axis>, block_of_axis: Vec<usize>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::invalid("lattice needs at least one axis"));
        }
        if block_of_axis.len() != axes.len() {
            return Err(Error::invalid("block map length differs from axis count"));
        }
        for w in block_of_axis.windows(2) {
            if w[1] != w[0] && w[1] != w[0] + 1 {
                return Err(Error::invalid("block map must list blocks in order over consecutive axes"));
            }
        }
        if block_of_axis[0] != 0 {
            return Err(Error::invalid("block map must start at block 0"));
        }
        for (i, a) in axes.iter().enumerate() {
            if a.points < 16 || !a.points.is_power_of_two() {
                return Err(Error::invalid(format!(
                    "axis {i}: point count {} must be a power of two >= 16",
                    a.points
                )));
            }
            if !(a.half_length > 0.0 && a.half_length.is_finite()) {
                return Err(Error::invalid(format!(
                    "axis {i}: half-length {} must be positive",
                    a.half_length
                )));
            }
        }
        let shape: Vec<usize> = axes.iter().map(|a| a.points).collect();
        let x = axes
            .iter()
            .map(|a| (0..a.points).map(|m| -a.half_length + a.dx() * m as f64).collect())
            .collect();
        let k = axes
            .iter()
            .map(|a| (0..a.points).map(|m| a.dk() * signed_index(m, a.points) as f64).collect())
            .collect();
        let total: usize = shape.iter().product();
        let mut odd = vec![false; total];
        let mut idx = vec![0usize; shape.len()];
        for flag in odd.iter_mut() {
            *flag = idx.iter().sum::<usize>() % 2 == 1;
            increment(&mut idx, &shape);
        }
        Ok(Lattice {
            fft: NdFft::new(&shape),
            axes,
            block_of_axis,
            x,
            k,
            odd,
        })
    }

    /// Axes grouped by the symbol's block dimensions.
    pub fn for_symbol(sym: &DispersionSymbol, axes: Vec<Axis>) -> Result<Arc<Self>> {
        if axes.len() != sym.dim() {
            return Err(Error::invalid(format!(
                "symbol has dimension {}, lattice has {} axes",
                sym.dim(),
                axes.len()
            )));
        }
        Ok(Arc::new(Self::new(axes, sym.coordinate_blocks())?))
    }

    /// Same `(N, L)` on every axis.
    pub fn uniform(sym: &DispersionSymbol, points: usize, half_length: f64) -> Result<Arc<Self>> {
        Self::for_symbol(sym, vec![Axis::new(points, half_length); sym.dim()])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn block_of_axis(&self) -> &[usize] {
        &self.block_of_axis
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn len(&self) -> usize {
        self.odd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.odd.is_empty()
    }

    pub fn min_half_length(&self) -> f64 {
        self.axes.iter().map(|a| a.half_length).fold(f64::INFINITY, f64::min)
    }

    /// `prod_i dx_i`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::dx).product()
    }

    /// `prod_i dk_i`.
    pub fn momentum_cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::dk).product()
    }

    pub fn x_axis(&self, i: usize) -> &[f64] {
        &self.x[i]
    }

    /// Momenta of axis `i` in FFT order.
    pub fn k_axis(&self, i: usize) -> &[f64] {
        &self.k[i]
    }

    pub(crate) fn fft(&self) -> &NdFft {
        &self.fft
    }

    /// Row-major stride of axis `i`.
    pub fn stride(&self, i: usize) -> usize {
        self.axes[i + 1..].iter().map(|a| a.points).product()
    }

    /// Evaluates `f(x)` at every position sample.
    pub fn position_values<T>(&self, mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        self.grid_values(&self.x, &mut f)
    }

    /// Evaluates `f(k)` at every momentum sample, in FFT order.
    pub fn momentum_values<T>(&self, mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        self.grid_values(&self.k, &mut f)
    }

    fn grid_values<T>(&self, coords: &[Vec<f64>], f: &mut impl FnMut(&[f64]) -> T) -> Vec<T> {
        let shape = self.shape();
        let mut idx = vec![0usize; shape.len()];
        let mut point = vec![0.0; shape.len()];
        let mut out = Vec::with_capacity(self.len());
        for _ in 0..self.len() {
            for (i, &m) in idx.iter().enumerate() {
                point[i] = coords[i][m];
            }
            out.push(f(&point));
            increment(&mut idx, &shape);
        }
        out
    }

    fn transform_scale(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powf(-(self.dim() as f64) / 2.0) * self.cell_volume()
    }

    /// Raw DFT followed by the continuum normalization and the `e^{ikL}` offset phase.
    pub(crate) fn position_to_momentum(&self, data: &mut [Complex64]) {
        self.fft.forward(data);
        let s = self.transform_scale();
        for (v, &odd) in data.iter_mut().zip(&self.odd) {
            *v *= if odd { -s } else { s };
        }
    }

    pub(crate) fn momentum_to_position(&self, data: &mut [Complex64]) {
        let s = 1.0 / (self.transform_scale() * self.len() as f64);
        for (v, &odd) in data.iter_mut().zip(&self.odd) {
            *v *= if odd { -s } else { s };
        }
        self.fft.inverse(data);
    }

    /// Raw forward DFT (no scaling); suited to multiplier application.
    pub(crate) fn raw_forward(&self, data: &mut [Complex64]) {
        self.fft.forward(data);
    }

    /// Raw inverse DFT including the `1/N` factor.
    pub(crate) fn raw_inverse(&self, data: &mut [Complex64]) {
        self.fft.inverse(data);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn same_geometry(&self, other: &Lattice) -> bool {
        self.axes == other.axes && self.block_of_axis == other.block_of_axis
    }
}

/// FFT-order index `m` of an axis with `n` points as a signed frequency index.
pub fn signed_index(m: usize, n: usize) -> i64 {
    if m < n / 2 {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

pub(crate) fn increment(idx: &mut [usize], shape: &[usize]) {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < shape[i] {
            return;
        }
        idx[i] = 0;
    }
}

#[derive(Clone, Debug)]
pub struct WaveFunction {
    lattice: Arc<Lattice>,
    samples: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(lattice: Arc<Lattice>, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != lattice.len() {
            return Err(Error::invalid(format!(
                "{} samples for a lattice of {} points",
                samples.len(),
                lattice.len()
            )));
        }
        Ok(WaveFunction { lattice, samples })
    }

    pub fn zeros(lattice: Arc<Lattice>) -> Self {
        let n = lattice.len();
        WaveFunction {
            lattice,
            samples: vec![Complex64::default(); n],
        }
    }

    pub fn from_position_fn(lattice: Arc<Lattice>, f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let samples = lattice.position_values(f);
        WaveFunction { lattice, samples }
    }

    /// Builds the state whose continuum momentum amplitude is `f(k)`.
    pub fn from_momentum_fn(lattice: Arc<Lattice>, f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let samples = lattice.momentum_values(f);
        MomentumField {
            lattice,
            samples,
        }
        .to_position()
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.lattice.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self, other>`, antilinear in `self`.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.lattice.cell_volume()
    }

    /// `||self - other||`.
    pub fn distance(&self, other: &WaveFunction) -> f64 {
        (self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            * self.lattice.cell_volume())
        .sqrt()
    }

    pub fn scale(&mut self, c: Complex64) {
        self.samples.iter_mut().for_each(|v| *v *= c);
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &WaveFunction) {
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += c * b;
        }
    }

    /// Scales to unit norm; errors on the zero state.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::invalid("cannot normalize the zero state"));
        }
        self.scale(Complex64::new(1.0 / n, 0.0));
        Ok(())
    }

    /// Pointwise product with real samples.
    pub fn multiply_real(&mut self, values: &[f64]) {
        for (v, &w) in self.samples.iter_mut().zip(values) {
            *v *= w;
        }
    }

    pub fn to_momentum(&self) -> MomentumField {
        let mut samples = self.samples.clone();
        self.lattice.position_to_momentum(&mut samples);
        MomentumField {
            lattice: self.lattice.clone(),
            samples,
        }
    }

    /// Applies a real multiplier `m(k)` given in FFT order.
    pub fn apply_multiplier(&self, multiplier: &[f64]) -> WaveFunction {
        let mut buf = self.samples.clone();
        self.lattice.raw_forward(&mut buf);
        for (v, &m) in buf.iter_mut().zip(multiplier) {
            *v *= m;
        }
        self.lattice.raw_inverse(&mut buf);
        WaveFunction {
            lattice: self.lattice.clone(),
            samples: buf,
        }
    }

    pub fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if std::ptr::eq(self.lattice.as_ref(), lattice) || self.lattice.same_geometry(lattice) {
            Ok(())
        } else {
            Err(Error::invalid("wavefunction lives on a different lattice"))
        }
    }

    /// Binary record: magic `ASWF`, `u32` version, `u32` ndim, per axis `u32` points and
    /// `f64` half-length, then `(f32 re, f32 im)` pairs; all little-endian.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        write_record(path, &self.lattice, self.samples.iter().copied())
    }

    pub fn read_binary(path: &Path) -> Result<(Vec<Axis>, Vec<Complex64>)> {
        read_record(path)
    }

    /// `x,re,im,abs2` rows for a one-dimensional lattice.
    pub fn write_csv_1d(&self, path: &Path) -> Result<()> {
        if self.lattice.dim() != 1 {
            return Err(Error::invalid("CSV export is defined for one-dimensional lattices"));
        }
        let mut out = String::from("x,re,im,abs2\n");
        for (x, v) in self.lattice.x_axis(0).iter().zip(&self.samples) {
            out.push_str(&format!(
                "{},{},{},{}\n",
                crate::report::fmt(*x),
                crate::report::fmt(v.re),
                crate::report::fmt(v.im),
                crate::report::fmt(v.norm_sqr())
            ));
        }
        std::fs::write(path, out)?;
        Ok(())
    }
}

const MAGIC: &[u8; 4] = b"ASWF";

pub(crate) fn write_record(
    path: &Path,
    lattice: &Lattice,
    samples: impl Iterator<Item = Complex64>,
) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + lattice.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&1u32.to_le_bytes());
    buf.extend_from_slice(&(lattice.dim() as u32).to_le_bytes());
    for a in lattice.axes() {
        buf.extend_from_slice(&(a.points as u32).to_le_bytes());
        buf.extend_from_slice(&a.half_length.to_le_bytes());
    }
    for v in samples {
        buf.extend_from_slice(&(v.re as f32).to_le_bytes());
        buf.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    std::fs::File::create(path)?.write_all(&buf)?;
    Ok(())
}

fn read_record(path: &Path) -> Result<(Vec<Axis>, Vec<Complex64>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let bad = || Error::invalid(format!("{} is not a field record", path.display()));
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let s = bytes.get(pos..pos + n).ok_or_else(bad)?;
        pos += n;
        Ok(s)
    };
    if take(4)? != MAGIC {
        return Err(bad());
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("4 bytes"));
    let _version = u32_at(take(4)?);
    let ndim = u32_at(take(4)?) as usize;
    let mut axes = Vec::with_capacity(ndim);
    for _ in 0..ndim {
        let points = u32_at(take(4)?) as usize;
        let half_length = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        axes.push(Axis::new(points, half_length));
    }
    let n: usize = axes.iter().map(|a| a.points).product();
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let re = f32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
        let im = f32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
        samples.push(Complex64::new(re as f64, im as f64));
    }
    Ok((axes, samples))
}

/// Momentum representation in FFT order with continuum normalization.
#[derive(Clone, Debug)]
pub struct MomentumField {
    lattice: Arc<Lattice>,
    samples: Vec<Complex64>,
}

impl MomentumField {
    pub fn new(lattice: Arc<Lattice>, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != lattice.len() {
            return Err(Error::invalid("momentum sample count does not match lattice"));
        }
        Ok(MomentumField { lattice, samples })
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn norm_sqr(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.lattice.momentum_cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn to_position(&self) -> WaveFunction {
        let mut samples = self.samples.clone();
        self.lattice.momentum_to_position(&mut samples);
        WaveFunction {
            lattice: self.lattice.clone(),
            samples,
        }
    }
}

/// Weight `rho^eps(x) = prod_j (1 + |x_j|^2)^(-eps_j/2)` with `x_j` the block coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec {
    pub eps: Vec<f64>,
}

impl WeightSpec {
    pub fn new(eps: Vec<f64>) -> Self {
        WeightSpec { eps }
    }

    pub fn from_index(eps: &DecayIndex) -> Self {
        WeightSpec { eps: eps.to_f64() }
    }

    /// Samples of the weight on the lattice.
    pub fn values(&self, lattice: &Lattice) -> Result<Vec<f64>> {
        let nu = lattice.block_of_axis().last().map_or(0, |b| b + 1);
        if self.eps.len() != nu {
            return Err(Error::invalid(format!(
                "weight has {} exponents, lattice has {nu} blocks",
                self.eps.len()
            )));
        }
        let blocks = lattice.block_of_axis().to_vec();
        let eps = self.eps.clone();
        let mut r2 = vec![0.0; nu];
        Ok(lattice.position_values(|x| {
            r2.iter_mut().for_each(|v| *v = 0.0);
            for (xi, &b) in x.iter().zip(&blocks) {
                r2[b] += xi * xi;
            }
            r2.iter()
                .zip(&eps)
                .map(|(r, e)| if *e == 0.0 { 1.0 } else { (1.0 + r).powf(-e / 2.0) })
                .product()
        }))
    }
}

/// `||rho^eps psi||`.
pub fn weight_norm(wf: &WaveFunction, w: &WeightSpec) -> Result<f64> {
    let values = w.values(wf.lattice())?;
    Ok(weighted_norm_with(wf, &values))
}

pub(crate) fn weighted_norm_with(wf: &WaveFunction, weight: &[f64]) -> f64 {
    (wf.samples()
        .iter()
        .zip(weight)
        .map(|(v, w)| v.norm_sqr() * w * w)
        .sum::<f64>()
        * wf.lattice().cell_volume())
    .sqrt()
}

/// Normalized modulated Gaussian `prod_i exp(-(x_i - x0_i)^2 / (4 sigma_i^2) + i k0_i x_i)`;
/// `|psi|^2` has standard deviation `sigma_i` along axis `i`.
pub fn gaussian_packet(
    lattice: &Arc<Lattice>,
    x0: &[f64],
    k0: &[f64],
    sigma: &[f64],
) -> Result<WaveFunction> {
    let d = lattice.dim();
    if x0.len() != d || k0.len() != d || sigma.len() != d {
        return Err(Error::invalid(format!("packet parameters must have length {d}")));
    }
    for i in 0..d {
        if !(sigma[i] > 0.0) {
            return Err(Error::invalid(format!("axis {i}: width must be positive")));
        }
        let l = lattice.axes()[i].half_length;
        if x0[i].abs() + 6.0 * sigma[i] >= l {
            return Err(Error::invalid(format!(
                "axis {i}: packet |x0| + 6 sigma = {} exceeds half-length {l}",
                x0[i].abs() + 6.0 * sigma[i]
            )));
        }
    }
    let mut wf = WaveFunction::from_position_fn(lattice.clone(), |x| {
        let mut phase = 0.0;
        let mut mag = 0.0;
        for i in 0..d {
            let u = x[i] - x0[i];
            mag -= u * u / (4.0 * sigma[i] * sigma[i]);
            phase += k0[i] * x[i];
        }
        Complex64::from_polar(mag.exp(), phase)
    });
    wf.normalize()?;
    Ok(wf)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize, l: f64) -> Arc<Lattice> {
        Lattice::uniform(&DispersionSymbol::laplacian(1), n, l).unwrap()
    }

    #[test]
    fn lattice_validation() {
        let sym = DispersionSymbol::laplacian(1);
        assert!(Lattice::uniform(&sym, 8, 1.0).is_err());
        assert!(Lattice::uniform(&sym, 48, 1.0).is_err());
        assert!(Lattice::uniform(&sym, 64, -1.0).is_err());
        assert!(Lattice::for_symbol(&sym, vec![Axis::new(32, 1.0); 2]).is_err());
        let lat = line(16, 4.0);
        assert_eq!(lat.x_axis(0)[0], -4.0);
        assert!((lat.k_axis(0)[15] + std::f64::consts::PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn packet_normalized_and_guarded() {
        let lat = line(512, 40.0);
        let wf = gaussian_packet(&lat, &[0.0], &[0.0], &[1.0]).unwrap();
        assert!((wf.norm() - 1.0).abs() < 1e-12);
        assert!(gaussian_packet(&lat, &[36.0], &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn momentum_expectation() {
        let lat = line(512, 40.0);
        let wf = gaussian_packet(&lat, &[1.0], &[2.0], &[1.5]).unwrap();
        let m = wf.to_momentum();
        let dk = lat.axes()[0].dk();
        let mean: f64 = m
            .samples()
            .iter()
            .zip(lat.k_axis(0))
            .map(|(v, k)| k * v.norm_sqr())
            .sum::<f64>()
            * dk;
        assert!((mean - 2.0).abs() < 1e-6, "{mean}");
    }

    #[test]
    fn gaussian_transform_oracle() {
        // psi = (2 pi s^2)^(-1/4) exp(-x^2/(4 s^2))  =>  psi_hat = (2 s^2/pi)^(1/4) exp(-s^2 k^2).
        let lat = line(256, 30.0);
        let s = 1.3;
        let wf = gaussian_packet(&lat, &[0.0], &[0.0], &[s]).unwrap();
        let m = wf.to_momentum();
        for (v, &k) in m.samples().iter().zip(lat.k_axis(0)) {
            let exact = (2.0 * s * s / std::f64::consts::PI).powf(0.25) * (-s * s * k * k).exp();
            assert!((v - Complex64::new(exact, 0.0)).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn delta_has_flat_spectrum() {
        let lat = line(64, 8.0);
        let mut samples = vec![Complex64::default(); 64];
        samples[32] = Complex64::new(1.0, 0.0);
        let m = WaveFunction::new(lat, samples).unwrap().to_momentum();
        let first = m.samples()[0].norm();
        assert!(m.samples().iter().all(|v| (v.norm() - first).abs() < 1e-14));
    }

    #[test]
    fn parseval_and_round_trip_2d() {
        let lat = Lattice::uniform(&DispersionSymbol::laplacian(2), 32, 10.0).unwrap();
        let wf = gaussian_packet(&lat, &[1.0, -0.5], &[0.7, -1.1], &[1.0, 1.4]).unwrap();
        let m = wf.to_momentum();
        assert!((m.norm() - wf.norm()).abs() < 1e-12);
        let back = m.to_position();
        assert!(back.distance(&wf) < 1e-12);
    }

    #[test]
    fn weight_norm_examples() {
        let lat = line(1024, 40.0);
        let wf = gaussian_packet(&lat, &[0.0], &[0.0], &[1.0]).unwrap();
        let w0 = weight_norm(&wf, &WeightSpec::new(vec![0.0])).unwrap();
        assert_eq!(w0, wf.norm());
        // Oracle: int (1+x^2)^-1 |psi|^2 dx by composite Simpson on a fine independent grid.
        let n = 200_000;
        let (a, b) = (-20.0f64, 20.0f64);
        let h = (b - a) / n as f64;
        let f = |x: f64| {
            (1.0 / (2.0 * std::f64::consts::PI).sqrt()) * (-x * x / 2.0).exp() / (1.0 + x * x)
        };
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let oracle = (acc * h / 3.0).sqrt();
        let w1 = weight_norm(&wf, &WeightSpec::new(vec![1.0])).unwrap();
        assert!((w1 - oracle).abs() < 1e-8, "{w1} vs {oracle}");
        let mut last = f64::INFINITY;
        for x0 in [0.0, 5.0, 10.0, 20.0] {
            let p = gaussian_packet(&lat, &[x0], &[0.0], &[1.0]).unwrap();
            let v = weight_norm(&p, &WeightSpec::new(vec![1.0])).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn binary_round_trip() {
        let lat = line(32, 5.0);
        let wf = gaussian_packet(&lat, &[0.0], &[1.0], &[0.5]).unwrap();
        let dir = std::env::temp_dir().join(format!("aswf-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("f.bin");
        wf.write_binary(&p).unwrap();
        let (axes, s) = WaveFunction::read_binary(&p).unwrap();
        assert_eq!(axes, lat.axes());
        for (a, b) in s.iter().zip(wf.samples()) {
            assert!((a - b).norm() < 1e-6);
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
