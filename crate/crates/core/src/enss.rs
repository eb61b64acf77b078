//! Incoming/outgoing decomposition of a single block.
//!
//! A block map takes a state to the spectral representation of `h_j = p_j(-i grad_j)`:
//! values over `lambda = p_j(k_j)` arranged in sheets (two half-lines for a positive or
//! negative one-dimensional block, one sheet for a signed block, one ray per angle for a
//! two-dimensional radial block). On each sheet the half-line Fourier cut is realized by
//! the discrete odd-offset Hilbert kernel
//!
//! `R_mn = (2/pi) sqrt(w_m w_n) / (lambda_m - lambda_n)` for odd `m - n`,
//!
//! with `w = d lambda` the node weights, so `T^+ = (I - iR)/2` and `T^- = (I + iR)/2`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::admissibility::{j_plus_set, rho_components, DecayIndex};
use crate::error::{Error, Result};
use crate::field::{signed_index, Lattice, MomentumField, WaveFunction, WeightSpec};
use crate::linalg;
use crate::propagate::{free_evolve_unchecked, PropagationPlan};
use crate::rational::{half, to_f64};
use crate::report::fmt;
use crate::symbol::{BlockKind, BlockSpec, DispersionSymbol, EnergyWindow, SmoothCutoff};

/// Smallest admissible sheet.
pub const MIN_SHEET_NODES: usize = 64;
/// Advertised tolerance of one-dimensional maps.
pub const LINE_TOLERANCE: f64 = 1e-8;
/// Advertised tolerance of radial maps.
pub const RADIAL_TOLERANCE: f64 = 1e-3;

const LANCZOS_STEPS: usize = 160;

/// Direction of the cut: outgoing (`+`) or incoming (`-`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    #[serde(alias = "+")]
    Plus,
    #[serde(alias = "-")]
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

#[derive(Debug)]
struct Sheet {
    /// Node positions inside the fiber (line maps) or radial node numbers minus one.
    nodes: Vec<usize>,
    lambda: Vec<f64>,
    /// Dense row-major `R`, already scaled to a contraction.
    kernel: Vec<f64>,
}

impl Sheet {
    fn new(nodes: Vec<usize>, lambda: Vec<f64>, weight: Vec<f64>) -> (Self, f64) {
        let n = nodes.len();
        let mut kernel = vec![0.0; n * n];
        let c = 2.0 / std::f64::consts::PI;
        for m in 0..n {
            for p in ((m % 2) ^ 1..n).step_by(2) {
                let d = lambda[m] - lambda[p];
                if d != 0.0 {
                    kernel[m * n + p] = c * (weight[m] * weight[p]).sqrt() / d;
                }
            }
        }
        // R is antisymmetric, so ||R||^2 is the top eigenvalue of -R^2 = R^T R.
        let mut tmp = vec![0.0; n];
        let norm = linalg::largest_eigenvalue(n, LANCZOS_STEPS, |x, y| {
            real_matvec(&kernel, n, x, &mut tmp);
            real_matvec(&kernel, n, &tmp, y);
            y.iter_mut().for_each(|v| *v = -*v);
        })
        .max(0.0)
        .sqrt();
        if norm > 1.0 {
            kernel.iter_mut().for_each(|v| *v /= norm);
        }
        (
            Sheet {
                nodes,
                lambda,
                kernel,
            },
            norm,
        )
    }

    fn len(&self) -> usize {
        self.nodes.len()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.len();
        for (m, out) in y.iter_mut().enumerate() {
            let row = &self.kernel[m * n..(m + 1) * n];
            *out = row.iter().zip(x).map(|(r, v)| v * r).sum();
        }
    }
}

fn real_matvec(a: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    for (m, out) in y.iter_mut().enumerate() {
        *out = a[m * n..(m + 1) * n].iter().zip(x).map(|(r, v)| r * v).sum();
    }
}

#[derive(Debug)]
enum Geometry {
    Line {
        axis: usize,
        sheets: Vec<Sheet>,
    },
    Radial {
        axes: [usize; 2],
        points: usize,
        dk: f64,
        n_theta: usize,
        ray: Sheet,
    },
}

/// Spectral data of a state: per fiber, the sheets' node values scaled so that the
/// Euclidean norm equals the `L^2` norm.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralData {
    pub values: Vec<Complex64>,
}

impl SpectralData {
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Spectral map and `T^±` for one block.
#[derive(Debug)]
pub struct EnssBlockMap {
    block: usize,
    spec: BlockSpec,
    lattice: Arc<Lattice>,
    geometry: Geometry,
    fibers: Vec<usize>,
    kernel_norm: f64,
}

/// Builds the map for block `j` (zero-based) on `lattice`.
pub fn build_block_map(sym: &DispersionSymbol, lattice: &Arc<Lattice>, j: usize) -> Result<EnssBlockMap> {
    EnssBlockMap::build(sym, lattice, j)
}

impl EnssBlockMap {
    pub fn build(sym: &DispersionSymbol, lattice: &Arc<Lattice>, j: usize) -> Result<Self> {
        if j >= sym.nu() {
            return Err(Error::invalid(format!("block {} out of range 1..={}", j + 1, sym.nu())));
        }
        if lattice.dim() != sym.dim() || lattice.block_of_axis() != sym.coordinate_blocks().as_slice() {
            return Err(Error::invalid("lattice does not match the symbol's block layout"));
        }
        let spec = sym.block(j).clone();
        let axes: Vec<usize> = sym.block_axes(j).collect();
        let shape = lattice.shape();
        let fibers = fiber_bases(&shape, &axes, lattice);
        let (geometry, kernel_norm) = match axes.len() {
            1 => line_geometry(&spec, lattice, axes[0])?,
            2 => radial_geometry(&spec, lattice, [axes[0], axes[1]])?,
            d => {
                return Err(Error::Unsupported(format!(
                    "spectral map for a block of dimension {d}; only 1 and 2 are built"
                )))
            }
        };
        Ok(EnssBlockMap {
            block: j,
            spec,
            lattice: lattice.clone(),
            geometry,
            fibers,
            kernel_norm,
        })
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn block_spec(&self) -> &BlockSpec {
        &self.spec
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    /// Radial maps interpolate and are only accurate to [`RADIAL_TOLERANCE`].
    pub fn is_approximate(&self) -> bool {
        matches!(self.geometry, Geometry::Radial { .. })
    }

    pub fn tolerance(&self) -> f64 {
        if self.is_approximate() {
            RADIAL_TOLERANCE
        } else {
            LINE_TOLERANCE
        }
    }

    /// Largest `||R||` over sheets before rescaling.
    pub fn kernel_norm(&self) -> f64 {
        self.kernel_norm
    }

    pub fn sheet_sizes(&self) -> Vec<usize> {
        match &self.geometry {
            Geometry::Line { sheets, .. } => sheets.iter().map(Sheet::len).collect(),
            Geometry::Radial { ray, n_theta, .. } => vec![ray.len(); *n_theta],
        }
    }

    fn nodes_per_fiber(&self) -> usize {
        self.sheet_sizes().iter().sum()
    }

    pub fn forward(&self, wf: &WaveFunction) -> Result<SpectralData> {
        wf.check_lattice(&self.lattice)?;
        let mom = wf.to_momentum();
        let scale = self.lattice.momentum_cell_volume().sqrt();
        let per = self.nodes_per_fiber();
        let mut values = vec![Complex64::default(); per * self.fibers.len()];
        for (f, &base) in self.fibers.iter().enumerate() {
            let out = &mut values[f * per..(f + 1) * per];
            match &self.geometry {
                Geometry::Line { axis, sheets } => {
                    let stride = self.lattice.stride(*axis);
                    let mut pos = 0;
                    for sh in sheets {
                        for &node in &sh.nodes {
                            out[pos] = mom.samples()[base + node * stride] * scale;
                            pos += 1;
                        }
                    }
                }
                Geometry::Radial {
                    axes,
                    points,
                    dk,
                    n_theta,
                    ray,
                } => {
                    let strides = [self.lattice.stride(axes[0]), self.lattice.stride(axes[1])];
                    let grid = |s1: i64, s2: i64| -> Complex64 {
                        let half = (*points / 2) as i64;
                        if s1.abs() > half || s2.abs() > half {
                            return Complex64::default();
                        }
                        let m1 = s1.rem_euclid(*points as i64) as usize;
                        let m2 = s2.rem_euclid(*points as i64) as usize;
                        mom.samples()[base + m1 * strides[0] + m2 * strides[1]]
                    };
                    let dtheta = 2.0 * std::f64::consts::PI / *n_theta as f64;
                    for l in 0..*n_theta {
                        let (sn, cs) = (l as f64 * dtheta).sin_cos();
                        for i in 0..ray.len() {
                            let r = (i + 1) as f64 * dk;
                            let v = bicubic_cartesian(&grid, r * cs / dk, r * sn / dk);
                            out[l * ray.len() + i] = v * (r * dk * dtheta).sqrt() * scale;
                        }
                    }
                }
            }
        }
        Ok(SpectralData { values })
    }

    pub fn inverse(&self, data: &SpectralData) -> Result<WaveFunction> {
        let per = self.nodes_per_fiber();
        if data.values.len() != per * self.fibers.len() {
            return Err(Error::invalid("spectral data does not match this map"));
        }
        let scale = 1.0 / self.lattice.momentum_cell_volume().sqrt();
        let mut mom = vec![Complex64::default(); self.lattice.len()];
        for (f, &base) in self.fibers.iter().enumerate() {
            let src = &data.values[f * per..(f + 1) * per];
            match &self.geometry {
                Geometry::Line { axis, sheets } => {
                    let stride = self.lattice.stride(*axis);
                    let mut pos = 0;
                    for sh in sheets {
                        for &node in &sh.nodes {
                            mom[base + node * stride] = src[pos] * scale;
                            pos += 1;
                        }
                    }
                }
                Geometry::Radial {
                    axes,
                    points,
                    dk,
                    n_theta,
                    ray,
                } => {
                    let n_r = ray.len();
                    let dtheta = 2.0 * std::f64::consts::PI / *n_theta as f64;
                    // Continuum amplitudes on the polar grid, index i <-> r = (i+1) dk.
                    let mut polar = vec![Complex64::default(); n_r * n_theta];
                    for l in 0..*n_theta {
                        for i in 0..n_r {
                            let r = (i + 1) as f64 * dk;
                            polar[l * n_r + i] = src[l * n_r + i] * scale / (r * dk * dtheta).sqrt();
                        }
                    }
                    let strides = [self.lattice.stride(axes[0]), self.lattice.stride(axes[1])];
                    let origin = polar_origin(&polar, n_r, *n_theta);
                    let r_max = n_r as f64;
                    for m1 in 0..*points {
                        let u1 = signed_index(m1, *points) as f64;
                        for m2 in 0..*points {
                            let u2 = signed_index(m2, *points) as f64;
                            let rho = (u1 * u1 + u2 * u2).sqrt();
                            if rho >= r_max {
                                continue;
                            }
                            let theta = u2.atan2(u1).rem_euclid(2.0 * std::f64::consts::PI);
                            let v = bicubic_polar(&polar, origin, n_r, *n_theta, rho, theta / dtheta);
                            mom[base + m1 * strides[0] + m2 * strides[1]] = v;
                        }
                    }
                }
            }
        }
        Ok(MomentumField::new(self.lattice.clone(), mom)?.to_position())
    }

    /// `D R D^*` on spectral data, `D = diag(exp(-i sigma0 lambda))`.
    fn kernel_apply(&self, data: &mut SpectralData, sigma0: f64) {
        let per = self.nodes_per_fiber();
        let sheets: Vec<&Sheet> = match &self.geometry {
            Geometry::Line { sheets, .. } => sheets.iter().collect(),
            Geometry::Radial { ray, n_theta, .. } => vec![ray; *n_theta],
        };
        let mut buf = Vec::new();
        for fiber in data.values.chunks_mut(per) {
            let mut pos = 0;
            for sh in &sheets {
                let n = sh.len();
                let seg = &mut fiber[pos..pos + n];
                if sigma0 != 0.0 {
                    for (v, l) in seg.iter_mut().zip(&sh.lambda) {
                        *v *= Complex64::from_polar(1.0, sigma0 * l);
                    }
                }
                buf.resize(n, Complex64::default());
                sh.apply(seg, &mut buf);
                seg.copy_from_slice(&buf);
                if sigma0 != 0.0 {
                    for (v, l) in seg.iter_mut().zip(&sh.lambda) {
                        *v *= Complex64::from_polar(1.0, -sigma0 * l);
                    }
                }
                pos += n;
            }
        }
    }

    /// `R psi` mapped back to the lattice, with the cut shifted to `sigma0`.
    fn hilbert_part(&self, wf: &WaveFunction, sigma0: f64) -> Result<WaveFunction> {
        let mut data = self.forward(wf)?;
        self.kernel_apply(&mut data, sigma0);
        self.inverse(&data)
    }

    /// `T^± psi`.
    pub fn apply_t(&self, wf: &WaveFunction, sign: Sign) -> Result<WaveFunction> {
        self.apply_t_shifted(wf, sign, 0.0)
    }

    /// `T^±` with the cut placed at `sigma0`: `e^{-ith} T_{sigma0} = T_{sigma0 + t} e^{-ith}`.
    pub fn apply_t_shifted(&self, wf: &WaveFunction, sign: Sign, sigma0: f64) -> Result<WaveFunction> {
        let hr = self.hilbert_part(wf, sigma0)?;
        let c = Complex64::new(0.0, -0.5 * sign.factor());
        let mut out = wf.clone();
        out.scale(Complex64::new(0.5, 0.0));
        out.axpy(c, &hr);
        Ok(out)
    }

    /// Block eigenvalue `lambda = p_j(k_j)` at every lattice momentum, in FFT order.
    pub fn block_lambda(&self) -> Vec<f64> {
        let axes: Vec<usize> = (0..self.lattice.dim())
            .filter(|&i| self.lattice.block_of_axis()[i] == self.block)
            .collect();
        let spec = self.spec.clone();
        self.lattice.momentum_values(|k| {
            let kj: Vec<f64> = axes.iter().map(|&i| k[i]).collect();
            spec.eval(&kj)
        })
    }
}

/// Flat offsets of every fiber's origin (block axes at index 0).
fn fiber_bases(shape: &[usize], block_axes: &[usize], lattice: &Lattice) -> Vec<usize> {
    let outer: Vec<usize> = (0..shape.len()).filter(|i| !block_axes.contains(i)).collect();
    let mut bases = vec![0usize];
    for &ax in &outer {
        let stride = lattice.stride(ax);
        bases = bases
            .iter()
            .flat_map(|&b| (0..shape[ax]).map(move |m| b + m * stride))
            .collect();
    }
    bases.sort_unstable();
    bases
}

fn line_geometry(spec: &BlockSpec, lattice: &Lattice, axis: usize) -> Result<(Geometry, f64)> {
    let ax = lattice.axes()[axis];
    let n = ax.points;
    let dk = ax.dk();
    let a = spec.a();
    let groups: Vec<Vec<usize>> = match spec.kind {
        BlockKind::Signed => vec![(0..n).collect()],
        _ => vec![
            (0..n).filter(|&m| signed_index(m, n) >= 0).collect(),
            (0..n).filter(|&m| signed_index(m, n) < 0).collect(),
        ],
    };
    let mut sheets = Vec::new();
    let mut norm: f64 = 0.0;
    for mut g in groups {
        let lam = |m: usize| spec.eval_radial(signed_index(m, n) as f64 * dk);
        g.sort_by(|&x, &y| lam(x).total_cmp(&lam(y)));
        if g.len() < MIN_SHEET_NODES {
            return Err(under_resolved(g.len()));
        }
        let lambda: Vec<f64> = g.iter().map(|&m| lam(m)).collect();
        let weight: Vec<f64> = g
            .iter()
            .map(|&m| {
                let k = (signed_index(m, n) as f64 * dk).abs();
                if k == 0.0 {
                    0.0
                } else {
                    a * k.powf(a - 1.0) * dk
                }
            })
            .collect();
        let (sheet, r) = Sheet::new(g, lambda, weight);
        norm = norm.max(r);
        sheets.push(sheet);
    }
    Ok((Geometry::Line { axis, sheets }, norm))
}

fn radial_geometry(spec: &BlockSpec, lattice: &Lattice, axes: [usize; 2]) -> Result<(Geometry, f64)> {
    let (a0, a1) = (lattice.axes()[axes[0]], lattice.axes()[axes[1]]);
    if a0 != a1 {
        return Err(Error::invalid(
            "radial map needs equal point count and half-length on both block axes",
        ));
    }
    let points = a0.points;
    let dk = a0.dk();
    let n_r = points / 2 - 2;
    if n_r < MIN_SHEET_NODES {
        return Err(under_resolved(n_r));
    }
    let min_theta = (2.0 * std::f64::consts::PI * n_r as f64).ceil() as usize;
    let n_theta = min_theta.div_ceil(4) * 4;
    let a = spec.a();
    let nodes: Vec<usize> = (0..n_r).collect();
    let lambda: Vec<f64> = nodes.iter().map(|&i| spec.eval_radial((i + 1) as f64 * dk)).collect();
    let weight: Vec<f64> = nodes
        .iter()
        .map(|&i| a * ((i + 1) as f64 * dk).powf(a - 1.0) * dk)
        .collect();
    let (ray, norm) = Sheet::new(nodes, lambda, weight);
    Ok((
        Geometry::Radial {
            axes,
            points,
            dk,
            n_theta,
            ray,
        },
        norm,
    ))
}

fn under_resolved(n: usize) -> Error {
    Error::invalid(format!(
        "spectral grid under-resolved: sheet has {n} nodes, need at least {MIN_SHEET_NODES}"
    ))
}

fn catmull_rom(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}

fn bicubic_cartesian(grid: &impl Fn(i64, i64) -> Complex64, u1: f64, u2: f64) -> Complex64 {
    let (f1, f2) = (u1.floor(), u2.floor());
    let (w1, w2) = (catmull_rom(u1 - f1), catmull_rom(u2 - f2));
    let (f1, f2) = (f1 as i64, f2 as i64);
    let mut acc = Complex64::default();
    for (p, a) in w1.iter().enumerate() {
        let mut row = Complex64::default();
        for (q, b) in w2.iter().enumerate() {
            row += grid(f1 + p as i64 - 1, f2 + q as i64 - 1) * b;
        }
        acc += row * a;
    }
    acc
}

/// Value at the origin from the symmetric cubic through `r = -2, -1, 1, 2` on every diameter.
fn polar_origin(polar: &[Complex64], n_r: usize, n_theta: usize) -> Complex64 {
    let half = n_theta / 2;
    let mut acc = Complex64::default();
    for l in 0..half {
        let o = l + half;
        let (p1, p2) = (polar[l * n_r], polar[l * n_r + 1]);
        let (m1, m2) = (polar[o * n_r], polar[o * n_r + 1]);
        acc += (-m2 + (m1 + p1) * 4.0 - p2) / 6.0;
    }
    acc / half as f64
}

/// Cubic interpolation in `r` (mirrored through the origin) and periodic cubic in `theta`;
/// `rho` and `phi` are in units of `dk` and `dtheta`.
fn bicubic_polar(polar: &[Complex64], origin: Complex64, n_r: usize, n_theta: usize, rho: f64, phi: f64) -> Complex64 {
    let half = n_theta as i64 / 2;
    let sample = |ri: i64, li: i64| -> Complex64 {
        let (ri, li) = if ri < 0 { (-ri, li + half) } else { (ri, li) };
        if ri == 0 {
            return origin;
        }
        if ri as usize > n_r {
            return Complex64::default();
        }
        let l = li.rem_euclid(n_theta as i64) as usize;
        polar[l * n_r + ri as usize - 1]
    };
    let (fr, fp) = (rho.floor(), phi.floor());
    let (wr, wp) = (catmull_rom(rho - fr), catmull_rom(phi - fp));
    let (fr, fp) = (fr as i64, fp as i64);
    let mut acc = Complex64::default();
    for (p, a) in wr.iter().enumerate() {
        let mut row = Complex64::default();
        for (q, b) in wp.iter().enumerate() {
            row += sample(fr + p as i64 - 1, fp + q as i64 - 1) * b;
        }
        acc += row * a;
    }
    acc
}

/// Outcome of the `Q_j^±` selection rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", content = "block", rename_all = "snake_case")]
pub enum QChoice {
    /// `eps_j > 1/2`: use `T_j^±`.
    Own(usize),
    /// Use `T_m^±` for this `m` in `J_+ \ {j}` with `rho_m > 1/2`.
    Other(usize),
    /// No admissible replacement.
    None,
}

pub fn choose_q(sym: &DispersionSymbol, eps: &DecayIndex, j: usize) -> Result<QChoice> {
    if j >= sym.nu() {
        return Err(Error::invalid(format!("block {} out of range 1..={}", j + 1, sym.nu())));
    }
    let rho = rho_components(sym, eps)?;
    if eps.eps()[j] > half() {
        return Ok(QChoice::Own(j));
    }
    Ok(j_plus_set(sym)
        .into_iter()
        .find(|&m| m != j && rho.rho_j[m] > half())
        .map_or(QChoice::None, QChoice::Other))
}

/// Envelope decay measurement `||rho^eps e^{∓ith} [zeta(h/s)] T^± psi||` over an ensemble.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub a: f64,
    pub dim: usize,
    pub eps: f64,
    pub sign: Sign,
    pub scale: Option<f64>,
    pub times: Vec<f64>,
    /// Ensemble maximum at each time.
    pub values: Vec<f64>,
    /// Members still inside the wrap-around budget at each time.
    pub members: Vec<usize>,
    pub slope: f64,
    pub target: f64,
    /// RMS of the log-space fit residual.
    pub residual: f64,
}

impl DecayFit {
    pub const CSV_HEADER: [&'static str; 7] = ["a", "d_j", "eps_j", "s", "slope", "target", "residual"];

    pub fn csv_row(&self) -> Vec<String> {
        vec![
            fmt(self.a),
            self.dim.to_string(),
            fmt(self.eps),
            self.scale.map_or_else(|| "none".to_string(), fmt),
            fmt(self.slope),
            fmt(self.target),
            fmt(self.residual),
        ]
    }
}

/// Ensemble and cutoff options for [`decay_fit`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayOptions {
    pub members: usize,
    /// Momentum width of the widest member; member `m` has `width * 2^(-m/a)`.
    pub width: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            members: 8,
            width: 0.5,
        }
    }
}

/// `2, 4, .., 2^n`.
pub fn dyadic_times(first: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| first * 2f64.powi(i as i32)).collect()
}

fn block_plan(map: &EnssBlockMap) -> Result<(DispersionSymbol, PropagationPlan)> {
    let lat = map.lattice();
    if lat.dim() != map.spec.dim || lat.block_of_axis().iter().any(|&b| b != 0) {
        return Err(Error::invalid(
            "decay measurements need a map built on the block's own lattice",
        ));
    }
    let sub = DispersionSymbol::from_blocks(vec![map.spec.clone()])?;
    let plan = PropagationPlan::new(&sub, lat, crate::propagate::DEFAULT_DT)?;
    Ok((sub, plan))
}

fn check_block_symbol(sym: &DispersionSymbol, map: &EnssBlockMap) -> Result<()> {
    if map.block() >= sym.nu() || sym.block(map.block()) != &map.spec {
        return Err(Error::invalid("map was not built for this symbol's block"));
    }
    Ok(())
}

fn cutoff_multiplier(map: &EnssBlockMap, zeta: &SmoothCutoff, s: f64) -> Vec<f64> {
    map.block_lambda().iter().map(|l| zeta.eval(l.abs() / s)).collect()
}

/// Centered momentum Gaussian ensemble on the map's lattice.
pub fn decay_ensemble(map: &EnssBlockMap, opts: &DecayOptions) -> Result<Vec<WaveFunction>> {
    let a = map.spec.a();
    (0..opts.members)
        .map(|m| {
            let kappa = opts.width * 2f64.powf(-(m as f64) / a);
            let mut wf = WaveFunction::from_momentum_fn(map.lattice().clone(), |k| {
                let k2: f64 = k.iter().map(|v| v * v).sum();
                Complex64::new((-k2 / (4.0 * kappa * kappa)).exp(), 0.0)
            });
            wf.normalize()?;
            Ok(wf)
        })
        .collect()
}

pub fn decay_fit(
    sym: &DispersionSymbol,
    map: &EnssBlockMap,
    eps_j: f64,
    sign: Sign,
    cutoff: Option<(SmoothCutoff, f64)>,
    t_grid: &[f64],
    opts: &DecayOptions,
) -> Result<DecayFit> {
    check_block_symbol(sym, map)?;
    if t_grid.len() < 6 {
        return Err(Error::invalid(format!(
            "decay fit needs at least 6 times, got {}",
            t_grid.len()
        )));
    }
    if t_grid.iter().any(|t| !(*t > 0.0)) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("decay times must be positive and increasing"));
    }
    if !(eps_j >= 0.0) {
        return Err(Error::invalid("decay index must be nonnegative"));
    }
    let (_, plan) = block_plan(map)?;
    let weight = WeightSpec::new(vec![eps_j]).values(map.lattice())?;
    let cut = cutoff.map(|(z, s)| cutoff_multiplier(map, &z, s));
    let ensemble = decay_ensemble(map, opts)?;
    let budget = crate::propagate::GUARD_FRACTION * map.lattice().min_half_length();

    let mut values = vec![f64::NAN; t_grid.len()];
    let mut members = vec![0usize; t_grid.len()];
    for psi in &ensemble {
        let v_max = plan.velocity_bound(psi);
        let mut state = map.apply_t(psi, sign)?;
        if let Some(c) = &cut {
            state = state.apply_multiplier(c);
        }
        for (i, &t) in t_grid.iter().enumerate() {
            if v_max * t > budget {
                continue;
            }
            let evolved = free_evolve_unchecked(&plan, &state, sign.factor() * t);
            let v = crate::field::weighted_norm_with(&evolved, &weight);
            values[i] = if values[i].is_nan() { v } else { values[i].max(v) };
            members[i] += 1;
        }
    }
    if let Some(i) = members.iter().position(|&m| m == 0) {
        let v_max = ensemble
            .iter()
            .map(|p| plan.velocity_bound(p))
            .fold(f64::INFINITY, f64::min);
        plan.guard_from_speed(v_max, t_grid[i])?;
    }
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::invalid("insufficient mass after cutoff"));
    }
    let lx: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, intercept) = linear_fit(&lx, &ly);
    let residual = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / lx.len() as f64)
        .sqrt();
    let a = map.spec.a();
    let d = map.spec.dim as f64;
    let target = match cutoff {
        None => -eps_j.min(d / 2.0) / a,
        Some(_) => -eps_j,
    };
    Ok(DecayFit {
        a,
        dim: map.spec.dim,
        eps: eps_j,
        sign,
        scale: cutoff.map(|c| c.1),
        times: t_grid.to_vec(),
        values,
        members,
        slope,
        target,
        residual,
    })
}

/// Least-squares `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Time at which `||rho^eps e^{∓ith} zeta(h/s) T^± psi||` first halves.
#[derive(Clone, Debug, Serialize)]
pub struct DecayOnset {
    pub scale: f64,
    pub onset: f64,
    pub initial: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn decay_onset(
    sym: &DispersionSymbol,
    map: &EnssBlockMap,
    eps_j: f64,
    sign: Sign,
    zeta: &SmoothCutoff,
    s: f64,
    probe: &WaveFunction,
    t_grid: &[f64],
) -> Result<DecayOnset> {
    check_block_symbol(sym, map)?;
    let (_, plan) = block_plan(map)?;
    let t_max = t_grid.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    plan.check_guard(probe, t_max)?;
    let weight = WeightSpec::new(vec![eps_j]).values(map.lattice())?;
    let state = map
        .apply_t(probe, sign)?
        .apply_multiplier(&cutoff_multiplier(map, zeta, s));
    let norm = state.norm();
    if norm < 1e-6 * probe.norm() {
        return Err(Error::invalid("insufficient mass after cutoff"));
    }
    let r0 = crate::field::weighted_norm_with(&state, &weight) / norm;
    for &t in t_grid {
        let evolved = free_evolve_unchecked(&plan, &state, sign.factor() * t);
        if crate::field::weighted_norm_with(&evolved, &weight) / norm < 0.5 * r0 {
            return Ok(DecayOnset {
                scale: s,
                onset: t,
                initial: r0,
            });
        }
    }
    Err(Error::NonConvergence(format!(
        "weighted norm did not halve by t = {t_max} at cutoff scale {s}"
    )))
}

/// Multipliers `phi_j` with `phi(P) = sum_j zeta(p_j / s) phi_j` on the lattice.
#[derive(Clone, Debug)]
pub struct SpectralPartition {
    /// Zero-based blocks of `J_+`, matching `components`.
    pub blocks: Vec<usize>,
    /// FFT-ordered multipliers.
    pub components: Vec<Vec<f64>>,
    /// Grid supremum of `|phi(P) - sum_j zeta(p_j/s) phi_j|`.
    pub residual: f64,
}

/// Partition subordinate to `{zeta(p_j/s) > 0}`, `j` in `J_+`, normalized by `sum zeta^2`.
pub fn spectral_partition(
    sym: &DispersionSymbol,
    lattice: &Lattice,
    window: &EnergyWindow,
    zeta: &SmoothCutoff,
    s: f64,
) -> Result<SpectralPartition> {
    window.validate()?;
    zeta.validate()?;
    if !(s > 0.0) {
        return Err(Error::invalid("partition scale must be positive"));
    }
    let blocks = j_plus_set(sym);
    if blocks.is_empty() {
        return Err(Error::invalid("partition needs at least one block in J_+"));
    }
    let edge = 0.75 * s * blocks.len() as f64;
    if window.support().0 <= edge {
        return Err(Error::invalid(format!(
            "window support starts at {} <= {edge}; not coverable at scale {s}",
            window.support().0
        )));
    }
    let axes: Vec<Vec<usize>> = blocks.iter().map(|&j| sym.block_axes(j).collect()).collect();
    let mut components = vec![Vec::with_capacity(lattice.len()); blocks.len()];
    let mut residual: f64 = 0.0;
    let mut z = vec![0.0; blocks.len()];
    let mut scratch = Vec::new();
    let _ = lattice.momentum_values(|k| {
        let phi = window.eval(sym.eval_unchecked(k));
        for (zi, (&j, ax)) in z.iter_mut().zip(blocks.iter().zip(&axes)) {
            scratch.clear();
            scratch.extend(ax.iter().map(|&i| k[i]));
            *zi = zeta.eval(sym.block(j).eval(&scratch) / s);
        }
        let denom: f64 = z.iter().map(|v| v * v).sum();
        let mut recon = 0.0;
        for (c, zi) in components.iter_mut().zip(&z) {
            let v = if phi == 0.0 { 0.0 } else { phi * zi / denom };
            recon += zi * v;
            c.push(v);
        }
        residual = residual.max((phi - recon).abs());
    });
    if !residual.is_finite() {
        return Err(Error::invalid("window not coverable at this scale"));
    }
    Ok(SpectralPartition {
        blocks,
        components,
        residual,
    })
}

/// `rho_j` as floats, for reporting.
pub fn rho_values(sym: &DispersionSymbol, eps: &DecayIndex) -> Result<Vec<f64>> {
    Ok(rho_components(sym, eps)?.rho_j.iter().map(to_f64).collect())
}
