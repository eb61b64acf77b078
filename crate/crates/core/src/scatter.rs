//! Wave operators, scattering operator and propagation estimates.
//!
//! The static wave operator is approximated by Cook's integral
//! `W psi = psi + i sign int_0^T e^{i sign s H} V e^{-i sign s H_o} psi ds`
//! with the composite trapezoid locked to the propagation step. The sum
//! `sum_n w_n U^n f_n`, `U = e^{i sign dt H}`, is accumulated backwards in Horner form
//! so that one splitting step per quadrature node suffices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::enss::{linear_fit, Sign};
use crate::error::{Error, Result};
use crate::field::{weighted_norm_with, WaveFunction, WeightSpec};
use crate::potential::{EnvelopeCertificate, TimeDependentPotential};
use crate::propagate::{free_evolve_unchecked, multiply, PropagationPlan, SpectralFunction};
use crate::report::fmt;
use crate::symbol::{EnergyWindow, SmoothCutoff};

/// Largest tolerated fraction of `|psi_hat|^2` outside the window support.
pub const WINDOW_LEAK: f64 = 0.01;
/// Smallest distance of window edges from the threshold `P = 0`.
pub const THRESHOLD_GAP: f64 = 0.1;
/// Quadrature step of smoothness integrals.
pub const SMOOTHNESS_STEP: f64 = 1.0 / 16.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CookOptions {
    /// Tail tolerance for the `converged` flag.
    pub tol: f64,
    /// When set, also measure `||e^{-i tau H} W psi - W e^{-i tau H_o} psi||`.
    pub intertwining_tau: Option<f64>,
}

impl Default for CookOptions {
    fn default() -> Self {
        CookOptions {
            tol: 1e-3,
            intertwining_tau: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CookResult {
    pub output: WaveFunction,
    pub sign: Sign,
    pub horizon: f64,
    pub step: f64,
    /// `int_{T/2}^{T} ||V e^{∓isH_o} psi|| ds`.
    pub tail: f64,
    pub isometry_defect: f64,
    pub intertwining_defect: Option<f64>,
    pub converged: bool,
}

impl CookResult {
    pub const CSV_HEADER: [&'static str; 6] = ["scenario", "sign", "T", "tail", "isometry_defect", "intertwining_defect"];

    pub fn csv_row(&self, scenario: &str) -> Vec<String> {
        vec![
            scenario.to_string(),
            self.sign.to_string(),
            fmt(self.horizon),
            fmt(self.tail),
            fmt(self.isometry_defect),
            self.intertwining_defect.map_or_else(|| "nan".into(), fmt),
        ]
    }
}

/// Checks window placement and that `psi` carries at most 1% of its mass outside it.
pub fn check_localization(plan: &PropagationPlan, window: &EnergyWindow, wf: &WaveFunction) -> Result<f64> {
    window.validate()?;
    let (lo, hi) = window.support();
    if lo < THRESHOLD_GAP && hi > -THRESHOLD_GAP {
        return Err(Error::invalid(format!(
            "window ({lo}, {hi}) must stay {THRESHOLD_GAP} away from the threshold 0"
        )));
    }
    let sym = plan.symbol();
    let lam = plan.lattice().momentum_values(|k| sym.eval_unchecked(k));
    let mut buf = wf.samples().to_vec();
    plan.lattice().raw_forward(&mut buf);
    let total: f64 = buf.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let outside: f64 = buf
        .iter()
        .zip(&lam)
        .filter(|(_, &l)| !(l > lo && l < hi))
        .map(|(v, _)| v.norm_sqr())
        .sum();
    let leak = outside / total;
    if leak > WINDOW_LEAK {
        return Err(Error::invalid(format!(
            "state not localized in ({lo}, {hi}): {:.3}% of the mass lies outside",
            100.0 * leak
        )));
    }
    Ok(leak)
}

/// `phi(P) psi`.
pub fn apply_window(plan: &PropagationPlan, window: &EnergyWindow, wf: &WaveFunction) -> WaveFunction {
    let sym = plan.symbol();
    let m = plan.lattice().momentum_values(|k| window.eval(sym.eval_unchecked(k)));
    wf.apply_multiplier(&m)
}

fn check_v(plan: &PropagationPlan, v: &[f64]) -> Result<()> {
    if v.len() != plan.lattice().len() {
        return Err(Error::invalid("potential samples do not match the lattice"));
    }
    Ok(())
}

/// Cook approximation of `W_± psi` at horizon `T`.
pub fn cook_wave_operator(
    plan: &PropagationPlan,
    v: &[f64],
    wf: &WaveFunction,
    sign: Sign,
    horizon: f64,
    window: Option<&EnergyWindow>,
    opts: &CookOptions,
) -> Result<CookResult> {
    wf.check_lattice(plan.lattice())?;
    check_v(plan, v)?;
    if !(horizon > 0.0) {
        return Err(Error::invalid("Cook horizon must be positive"));
    }
    if let Some(w) = window {
        check_localization(plan, w, wf)?;
    }
    let tau = opts.intertwining_tau.unwrap_or(0.0);
    plan.check_guard(wf, horizon + tau)?;
    let (out, tail) = cook_integral(plan, v, wf, sign, horizon);
    let isometry_defect = (out.norm() - wf.norm()).abs();
    let intertwining_defect = match opts.intertwining_tau {
        None => None,
        Some(tau) => {
            let mut lhs = out.clone();
            plan.strang_static(lhs.samples_mut(), v, tau);
            let shifted = free_evolve_unchecked(plan, wf, tau);
            let (rhs, _) = cook_integral(plan, v, &shifted, sign, horizon);
            Some(lhs.distance(&rhs))
        }
    };
    Ok(CookResult {
        output: out,
        sign,
        horizon,
        step: plan.steps_for(horizon) as f64 / horizon,
        tail,
        isometry_defect,
        intertwining_defect,
        converged: tail < opts.tol,
    })
}

fn cook_integral(plan: &PropagationPlan, v: &[f64], wf: &WaveFunction, sign: Sign, horizon: f64) -> (WaveFunction, f64) {
    let lat = plan.lattice();
    let n = plan.steps_for(horizon);
    let h = horizon / n as f64;
    let sg = sign.factor();
    let len = lat.len();
    let inv_n = 1.0 / len as f64;

    // Raw spectrum of e^{-i sign s_n H_o} psi, starting at s_n = T and stepping back.
    let mut spec = wf.samples().to_vec();
    lat.raw_forward(&mut spec);
    let kin = plan.kinetic();
    for (x, &k) in spec.iter_mut().zip(kin) {
        *x *= Complex64::from_polar(1.0, -sg * horizon * k);
    }
    let back: Vec<Complex64> = kin.iter().map(|&k| Complex64::from_polar(1.0, sg * h * k)).collect();

    // U = e^{i sign h H} by one Strang step of length -sign h.
    let half_v = crate::propagate::potential_phase(v, -sg * h / 2.0);
    let kin_u = plan.kinetic_phase(-sg * h);

    let mut f = vec![Complex64::default(); len];
    let mut acc = vec![Complex64::default(); len];
    let mut norms = vec![0.0; n + 1];
    let cell = lat.cell_volume();
    for step in (0..=n).rev() {
        f.copy_from_slice(&spec);
        lat.fft().inverse(&mut f);
        for (y, &p) in f.iter_mut().zip(v) {
            *y *= p * inv_n;
        }
        norms[step] = (f.iter().map(|y| y.norm_sqr()).sum::<f64>() * cell).sqrt();
        let w = if step == 0 || step == n { 0.5 * h } else { h };
        if step < n {
            multiply(&mut acc, &half_v);
            plan.apply_kinetic(&mut acc, &kin_u);
            multiply(&mut acc, &half_v);
        }
        for (a, y) in acc.iter_mut().zip(&f) {
            *a += y * w;
        }
        if step > 0 {
            multiply(&mut spec, &back);
        }
    }
    let mut out = wf.clone();
    let c = Complex64::new(0.0, sg);
    for (o, a) in out.samples_mut().iter_mut().zip(&acc) {
        *o += c * a;
    }
    let mid = n / 2;
    let tail: f64 = (mid..n).map(|i| 0.5 * h * (norms[i] + norms[i + 1])).sum();
    (out, tail)
}

#[allow(clippy::too_many_arguments)]
/// Doubles the horizon from `t0` until the tail drops below `opts.tol`; stops unconverged
/// when the guard would be violated or `t_max` is reached.
pub fn cook_until_converged(
    plan: &PropagationPlan,
    v: &[f64],
    wf: &WaveFunction,
    sign: Sign,
    t0: f64,
    t_max: f64,
    window: Option<&EnergyWindow>,
    opts: &CookOptions,
) -> Result<CookResult> {
    let tau = opts.intertwining_tau.unwrap_or(0.0);
    let limit = (plan.max_horizon(wf) - tau).min(t_max);
    let mut t = t0;
    let mut last = cook_wave_operator(plan, v, wf, sign, t, window, opts)?;
    while !last.converged && 2.0 * t <= limit {
        t *= 2.0;
        last = cook_wave_operator(plan, v, wf, sign, t, window, opts)?;
    }
    Ok(last)
}

/// `S psi ~ e^{iTH_o} e^{-2iTH} e^{iTH_o} psi`.
pub fn scattering_apply(plan: &PropagationPlan, v: &[f64], wf: &WaveFunction, horizon: f64) -> Result<WaveFunction> {
    wf.check_lattice(plan.lattice())?;
    check_v(plan, v)?;
    plan.check_guard(wf, horizon)?;
    let mut out = free_evolve_unchecked(plan, wf, -horizon);
    plan.strang_static(out.samples_mut(), v, 2.0 * horizon);
    Ok(free_evolve_unchecked(plan, &out, -horizon))
}

#[derive(Clone, Debug, Serialize)]
pub struct SmoothnessResult {
    pub gamma: f64,
    pub eps: Vec<f64>,
    pub horizon: f64,
    /// Horizons `T/2^k` at which the ensemble-maximal ratio was recorded.
    pub checkpoints: Vec<f64>,
    /// `max_psi I_T(psi) / ||psi||^2` at each checkpoint.
    pub ratios: Vec<f64>,
    /// `I_T` of every member at the full horizon.
    pub integrals: Vec<f64>,
    pub ratio: f64,
    /// Relative change of the ratio over the last doubling.
    pub last_change: f64,
    pub converged: bool,
}

/// `I_T = int_{-T}^{T} (1+|t|)^{-2 gamma} ||rho^eps e^{-itH_o} psi||^2 dt` for every member.
pub fn smoothness_integral(
    plan: &PropagationPlan,
    eps: &[f64],
    gamma: f64,
    ensemble: &[WaveFunction],
    horizon: f64,
) -> Result<SmoothnessResult> {
    if !(horizon >= 2.0 * SMOOTHNESS_STEP) {
        return Err(Error::invalid("smoothness horizon too short"));
    }
    let weight = WeightSpec::new(eps.to_vec()).values(plan.lattice())?;
    let checkpoints: Vec<f64> = (0..)
        .map(|k| horizon / 2f64.powi(k))
        .take_while(|t| *t >= 1.0)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    let n = (horizon / SMOOTHNESS_STEP).round() as usize;
    let h = horizon / n as f64;
    let mut ratios = vec![0.0f64; checkpoints.len()];
    let mut integrals = Vec::with_capacity(ensemble.len());
    for psi in ensemble {
        psi.check_lattice(plan.lattice())?;
        plan.check_guard(psi, horizon)?;
        let n2 = psi.norm_sqr();
        if n2 == 0.0 {
            integrals.push(0.0);
            continue;
        }
        let mut spec = psi.samples().to_vec();
        plan.lattice().raw_forward(&mut spec);
        let integrand = |t: f64| -> f64 {
            let phase = plan.kinetic_phase(t);
            let mut buf: Vec<Complex64> = spec.iter().zip(&phase).map(|(a, b)| a * b).collect();
            plan.lattice().fft().inverse(&mut buf);
            let wf = WaveFunction::new(plan.lattice().clone(), buf).expect("lattice-sized");
            (1.0 + t.abs()).powf(-2.0 * gamma) * weighted_norm_with(&wf, &weight).powi(2)
        };
        let mut prev = integrand(0.0) * 2.0;
        let mut acc = 0.0;
        let mut next_cp = 0;
        for i in 1..=n {
            let t = i as f64 * h;
            let cur = integrand(t) + integrand(-t);
            acc += 0.5 * h * (prev + cur);
            prev = cur;
            while next_cp < checkpoints.len() && (t - checkpoints[next_cp]).abs() < 0.5 * h {
                ratios[next_cp] = ratios[next_cp].max(acc / n2);
                next_cp += 1;
            }
        }
        integrals.push(acc);
    }
    let ratio = *ratios.last().unwrap_or(&0.0);
    let last_change = if ratios.len() >= 2 && ratios[ratios.len() - 2] > 0.0 {
        ratio / ratios[ratios.len() - 2] - 1.0
    } else {
        0.0
    };
    Ok(SmoothnessResult {
        gamma,
        eps: eps.to_vec(),
        horizon,
        checkpoints,
        ratios,
        integrals,
        ratio,
        last_change,
        converged: last_change.abs() < 0.05,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffScan {
    pub axis: usize,
    pub scales: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Log-log slope of ratio against `s`.
    pub exponent: f64,
}

/// Smoothness ratios after the high-frequency cut `zeta(|k_axis| / s)`.
pub fn smoothness_cutoff_scan(
    plan: &PropagationPlan,
    eps: &[f64],
    gamma: f64,
    ensemble: &[WaveFunction],
    horizon: f64,
    axis: usize,
    scales: &[f64],
) -> Result<CutoffScan> {
    if axis >= plan.lattice().dim() {
        return Err(Error::invalid(format!("cutoff axis {axis} out of range")));
    }
    if scales.len() < 2 {
        return Err(Error::invalid("cutoff scan needs at least two scales"));
    }
    let zeta = SmoothCutoff::default();
    let mut ratios = Vec::with_capacity(scales.len());
    for &s in scales {
        let m = plan.lattice().momentum_values(|k| zeta.eval(k[axis].abs() / s));
        let cut: Vec<WaveFunction> = ensemble.iter().map(|p| p.apply_multiplier(&m)).collect();
        let r = smoothness_integral(plan, eps, gamma, &cut, horizon)?;
        let ratio = r
            .integrals
            .iter()
            .zip(ensemble)
            .map(|(i, p)| if p.norm_sqr() > 0.0 { i / p.norm_sqr() } else { 0.0 })
            .fold(0.0, f64::max);
        ratios.push(ratio);
    }
    let lx: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
    let ly: Vec<f64> = ratios.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect();
    Ok(CutoffScan {
        axis,
        scales: scales.to_vec(),
        ratios,
        exponent: linear_fit(&lx, &ly).0,
    })
}

/// Numerical check of `f' > c` on a grid over `omega`.
#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityCheck {
    pub min_derivative: f64,
    pub at: f64,
}

pub fn check_condition_ip(f: &SpectralFunction, omega: (f64, f64), c: f64) -> Result<MonotonicityCheck> {
    let (lo, hi) = omega;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::invalid("monotonicity check needs a bounded interval"));
    }
    let mut best = MonotonicityCheck {
        min_derivative: f64::INFINITY,
        at: lo,
    };
    for i in 0..=1000 {
        let l = lo + (hi - lo) * i as f64 / 1000.0;
        let d = f.derivative(l);
        if d < best.min_derivative {
            best = MonotonicityCheck { min_derivative: d, at: l };
        }
    }
    if !(best.min_derivative > c) {
        return Err(Error::invalid(format!(
            "f' = {} <= {c} at lambda = {} in ({lo}, {hi})",
            best.min_derivative, best.at
        )));
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceResult {
    pub horizon: f64,
    pub defect: f64,
    pub monotonicity: MonotonicityCheck,
}

/// `||W_T(f(H_o)+V, f(H_o)) psi - W_T(H, H_o) psi||` with `W_T(A, B) = e^{iTA} e^{-iTB}`.
pub fn invariance_compare(
    plan: &PropagationPlan,
    f: SpectralFunction,
    v: &[f64],
    wf: &WaveFunction,
    window: &EnergyWindow,
    horizon: f64,
) -> Result<InvarianceResult> {
    check_v(plan, v)?;
    let (lo, hi) = window.support();
    let mono = check_condition_ip(&f, (lo, if hi.is_finite() { hi } else { lo + 100.0 }), 0.0)?;
    check_localization(plan, window, wf)?;
    let fplan = PropagationPlan::with_function(plan.symbol(), plan.lattice(), plan.dt(), f)?;
    plan.check_guard(wf, horizon)?;
    fplan.check_guard(wf, horizon)?;
    let wave = |p: &PropagationPlan| -> WaveFunction {
        let mut out = free_evolve_unchecked(p, wf, horizon);
        p.strang_static(out.samples_mut(), v, -horizon);
        out
    };
    let defect = wave(&fplan).distance(&wave(plan));
    Ok(InvarianceResult {
        horizon,
        defect,
        monotonicity: mono,
    })
}

/// Cauchy log of a time-dependent wave operator.
#[derive(Clone, Debug, Serialize)]
pub struct TimedepResult {
    pub sign: Sign,
    pub horizons: Vec<f64>,
    /// `||result(T_{n+1}) - result(T_n)||`.
    pub increments: Vec<f64>,
    /// `| ||result(T_last)|| - ||psi|| |`.
    pub unitarity_defect: f64,
    pub certificate: Option<EnvelopeCertificate>,
    pub decreasing: bool,
    #[serde(skip)]
    pub output: Option<WaveFunction>,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// `W_± psi ~ U(0, ±T) e^{∓iTH_o} psi` at each horizon; requires
/// `(1+|t|)^gamma g in L^2` and `gamma + rho > 1/2`.
pub fn timedep_wave_operator(
    plan: &PropagationPlan,
    pot: &TimeDependentPotential,
    wf: &WaveFunction,
    sign: Sign,
    horizons: &[f64],
    gamma: f64,
    rho: f64,
) -> Result<TimedepResult> {
    wf.check_lattice(plan.lattice())?;
    check_v(plan, &pot.shape.values)?;
    if horizons.len() < 2 || horizons.windows(2).any(|w| w[1] <= w[0]) || horizons[0] <= 0.0 {
        return Err(Error::invalid("need at least two increasing positive horizons"));
    }
    let cert = pot.envelope.l2_certificate(gamma);
    if !cert.finite {
        return Err(Error::Certificate(format!(
            "(1+|t|)^{gamma} g is not square integrable"
        )));
    }
    if !(gamma + rho > 0.5) {
        return Err(Error::Certificate(format!(
            "gamma + rho = {} does not exceed 1/2",
            gamma + rho
        )));
    }
    let t_max = *horizons.last().expect("nonempty");
    plan.check_guard(wf, t_max)?;
    let sg = sign.factor();
    let results: Vec<WaveFunction> = horizons
        .iter()
        .map(|&t| {
            let mut out = free_evolve_unchecked(plan, wf, sg * t);
            plan.strang_timedep(out.samples_mut(), pot, sg * t, 0.0);
            out
        })
        .collect();
    let increments: Vec<f64> = results.windows(2).map(|w| w[1].distance(&w[0])).collect();
    let last = results.last().expect("nonempty").clone();
    Ok(TimedepResult {
        sign,
        horizons: horizons.to_vec(),
        decreasing: strictly_decreasing(&increments),
        unitarity_defect: (last.norm() - wf.norm()).abs(),
        increments,
        certificate: Some(cert),
        output: Some(last),
    })
}

/// Periodic case along integer horizons: `W psi ~ M^{-n} e^{-inH_o} psi`.
pub fn monodromy_wave_operator(
    plan: &PropagationPlan,
    pot: &TimeDependentPotential,
    wf: &WaveFunction,
    periods: &[usize],
) -> Result<TimedepResult> {
    wf.check_lattice(plan.lattice())?;
    check_v(plan, &pot.shape.values)?;
    if !pot.envelope.is_periodic() {
        return Err(Error::invalid("monodromy wave operator needs a 1-periodic envelope"));
    }
    if periods.len() < 2 || periods.windows(2).any(|w| w[1] <= w[0]) || periods[0] == 0 {
        return Err(Error::invalid("need at least two increasing period counts"));
    }
    let n_max = *periods.last().expect("nonempty");
    plan.check_guard(wf, n_max as f64)?;
    let results: Vec<WaveFunction> = periods
        .iter()
        .map(|&n| {
            let mut out = free_evolve_unchecked(plan, wf, n as f64);
            for _ in 0..n {
                plan.strang_timedep(out.samples_mut(), pot, 1.0, 0.0);
            }
            out
        })
        .collect();
    let increments: Vec<f64> = results.windows(2).map(|w| w[1].distance(&w[0])).collect();
    let last = results.last().expect("nonempty").clone();
    Ok(TimedepResult {
        sign: Sign::Plus,
        horizons: periods.iter().map(|&n| n as f64).collect(),
        decreasing: strictly_decreasing(&increments),
        unitarity_defect: (last.norm() - wf.norm()).abs(),
        increments,
        certificate: None,
        output: Some(last),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissibility::DecayIndex;
    use crate::field::{gaussian_packet, Lattice};
    use crate::potential::{build_static, PotentialSpec, StaticPotential};
    use crate::symbol::DispersionSymbol;
    use std::sync::Arc;

    fn setup() -> (PropagationPlan, Arc<Lattice>) {
        let sym = DispersionSymbol::laplacian(1);
        let lat = Lattice::uniform(&sym, 1024, 200.0).unwrap();
        (PropagationPlan::new(&sym, &lat, 1.0 / 64.0).unwrap(), lat)
    }

    fn bump(lat: &Lattice, c: f64) -> Vec<f64> {
        build_static(lat, &PotentialSpec::aniso(c, DecayIndex::parse(&["2"]).unwrap()))
            .unwrap()
            .values
    }

    #[test]
    fn zero_potential_is_identity() {
        let (plan, lat) = setup();
        let psi = gaussian_packet(&lat, &[0.0], &[1.0], &[4.0]).unwrap();
        let zero = StaticPotential::zero(&lat).values;
        let r = cook_wave_operator(&plan, &zero, &psi, Sign::Plus, 16.0, None, &CookOptions::default()).unwrap();
        assert!(r.output.distance(&psi) < 1e-13);
        assert_eq!(r.tail, 0.0);
        let s = scattering_apply(&plan, &zero, &psi, 8.0).unwrap();
        assert!(s.distance(&psi) < 1e-12);
    }

    #[test]
    fn cook_matches_direct_product() {
        // W_T = e^{iTH} e^{-iTH_o} by splitting; the trapezoid agrees to O(dt^2).
        let (plan, lat) = setup();
        let v = bump(&lat, 0.3);
        let psi = gaussian_packet(&lat, &[-10.0], &[1.2], &[4.0]).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let t = 12.0;
            let r = cook_wave_operator(&plan, &v, &psi, sign, t, None, &CookOptions::default()).unwrap();
            let mut direct = free_evolve_unchecked(&plan, &psi, sign.factor() * t);
            plan.strang_static(direct.samples_mut(), &v, -sign.factor() * t);
            assert!(r.output.distance(&direct) < 2e-4, "{sign}: {}", r.output.distance(&direct));
        }
    }

    #[test]
    fn cook_is_linear() {
        let (plan, lat) = setup();
        let v = bump(&lat, 0.3);
        let a = gaussian_packet(&lat, &[-10.0], &[1.2], &[4.0]).unwrap();
        let b = gaussian_packet(&lat, &[15.0], &[-0.8], &[3.0]).unwrap();
        let mut ab = a.clone();
        ab.axpy(Complex64::new(0.5, -2.0), &b);
        let o = CookOptions::default();
        let wa = cook_wave_operator(&plan, &v, &a, Sign::Plus, 8.0, None, &o).unwrap().output;
        let wb = cook_wave_operator(&plan, &v, &b, Sign::Plus, 8.0, None, &o).unwrap().output;
        let wab = cook_wave_operator(&plan, &v, &ab, Sign::Plus, 8.0, None, &o).unwrap().output;
        let mut sum = wa;
        sum.axpy(Complex64::new(0.5, -2.0), &wb);
        assert!(sum.distance(&wab) < 1e-12);
    }

    #[test]
    fn localization_rejects_threshold_mass() {
        let (plan, lat) = setup();
        let psi = gaussian_packet(&lat, &[0.0], &[0.0], &[4.0]).unwrap();
        let w = EnergyWindow::new(1.0, 1.2, 3.0, 4.0).unwrap();
        assert!(check_localization(&plan, &w, &psi).is_err());
        let near = EnergyWindow::new(0.05, 0.2, 3.0, 4.0).unwrap();
        assert!(check_localization(&plan, &near, &psi).is_err());
    }

    #[test]
    fn zero_state_has_zero_smoothness() {
        let (plan, lat) = setup();
        let r = smoothness_integral(&plan, &[0.4], 0.4, &[WaveFunction::zeros(lat)], 4.0).unwrap();
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn condition_ip() {
        assert!(check_condition_ip(&SpectralFunction::Quarticpower { r: 0.25 }, (1.0, 4.0), 0.1).is_ok());
        assert!(check_condition_ip(&SpectralFunction::Quarticpower { r: 0.25 }, (-1.0, 4.0), 0.0).is_err());
    }
}
