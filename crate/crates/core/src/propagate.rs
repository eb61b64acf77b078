//! Free, static and time-dependent propagation on a lattice.
//!
//! Free flow multiplies momentum samples by `exp(-i t K(k))` where `K = P` or a
//! reparametrized `K = f(P)`. Interacting flows use Strang splitting
//! `e^{-ihV/2} e^{-ihK} e^{-ihV/2}`; time-dependent potentials are sampled at the
//! midpoint of each step.
//!
//! Every public entry point checks the wrap-around guard
//! `v_max * |t| <= 0.45 * min_i L_i`, where `v_max` is the largest `|grad K|` over
//! momentum samples holding at least `1e-10` of the state's mass.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Lattice, WaveFunction};
use crate::potential::TimeDependentPotential;
use crate::symbol::DispersionSymbol;

pub const DEFAULT_DT: f64 = 1.0 / 64.0;
pub const GUARD_FRACTION: f64 = 0.45;
pub const MASS_THRESHOLD: f64 = 1e-10;

/// Monotone spectral function `f` used to build `T_o = f(H_o)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpectralFunction {
    Identity,
    /// `(1 + lambda^4)^r`.
    Quarticpower { r: f64 },
    Sinh,
}

impl SpectralFunction {
    pub fn value(&self, l: f64) -> f64 {
        match *self {
            SpectralFunction::Identity => l,
            SpectralFunction::Quarticpower { r } => (1.0 + l.powi(4)).powf(r),
            SpectralFunction::Sinh => l.sinh(),
        }
    }

    pub fn derivative(&self, l: f64) -> f64 {
        match *self {
            SpectralFunction::Identity => 1.0,
            SpectralFunction::Quarticpower { r } => 4.0 * r * l.powi(3) * (1.0 + l.powi(4)).powf(r - 1.0),
            SpectralFunction::Sinh => l.cosh(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GuardReport {
    pub v_max: f64,
    pub horizon: f64,
    pub budget: f64,
}

#[derive(Clone, Debug)]
pub struct PropagationPlan {
    symbol: DispersionSymbol,
    lattice: Arc<Lattice>,
    dt: f64,
    function: SpectralFunction,
    kinetic: Vec<f64>,
    speed: Vec<f64>,
}

impl PropagationPlan {
    pub fn new(symbol: &DispersionSymbol, lattice: &Arc<Lattice>, dt: f64) -> Result<Self> {
        Self::with_function(symbol, lattice, dt, SpectralFunction::Identity)
    }

    /// Plan whose free part is `f(P(-i grad))`.
    pub fn with_function(
        symbol: &DispersionSymbol,
        lattice: &Arc<Lattice>,
        dt: f64,
        function: SpectralFunction,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step {dt} must be positive")));
        }
        if lattice.dim() != symbol.dim() {
            return Err(Error::invalid("lattice dimension differs from symbol dimension"));
        }
        let expected = symbol.coordinate_blocks();
        if lattice.block_of_axis() != expected.as_slice() {
            return Err(Error::invalid("lattice block map does not match the symbol"));
        }
        let mut grad = vec![0.0; symbol.dim()];
        let kinetic = lattice.momentum_values(|k| function.value(symbol.eval_unchecked(k)));
        let speed = lattice.momentum_values(|k| {
            symbol.gradient_into(k, &mut grad);
            let g: f64 = grad.iter().map(|v| v * v).sum::<f64>().sqrt();
            g * function.derivative(symbol.eval_unchecked(k)).abs()
        });
        Ok(PropagationPlan {
            symbol: symbol.clone(),
            lattice: lattice.clone(),
            dt,
            function,
            kinetic,
            speed,
        })
    }

    pub fn symbol(&self) -> &DispersionSymbol {
        &self.symbol
    }

    pub fn lattice(&self) -> &Arc<Lattice> {
        &self.lattice
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn function(&self) -> SpectralFunction {
        self.function
    }

    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("time step {dt} must be positive")));
        }
        let mut p = self.clone();
        p.dt = dt;
        Ok(p)
    }

    /// `K(k)` in FFT order.
    pub fn kinetic(&self) -> &[f64] {
        &self.kinetic
    }

    /// `|grad K(k)|` in FFT order.
    pub fn speed(&self) -> &[f64] {
        &self.speed
    }

    /// Largest speed over momentum samples carrying at least [`MASS_THRESHOLD`] of the mass.
    pub fn velocity_bound(&self, wf: &WaveFunction) -> f64 {
        let mut buf = wf.samples().to_vec();
        self.lattice.raw_forward(&mut buf);
        let total: f64 = buf.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        buf.iter()
            .zip(&self.speed)
            .filter(|(v, _)| v.norm_sqr() >= MASS_THRESHOLD * total)
            .fold(0.0, |m, (_, s)| m.max(*s))
    }

    /// Checks `v_max * |horizon| <= 0.45 min L`.
    pub fn check_guard(&self, wf: &WaveFunction, horizon: f64) -> Result<GuardReport> {
        let v_max = self.velocity_bound(wf);
        self.guard_from_speed(v_max, horizon)
    }

    pub fn guard_from_speed(&self, v_max: f64, horizon: f64) -> Result<GuardReport> {
        let min_l = self.lattice.min_half_length();
        let budget = GUARD_FRACTION * min_l;
        if v_max * horizon.abs() > budget {
            return Err(Error::Guard {
                v_max,
                horizon: horizon.abs(),
                min_half_length: min_l,
                required_half_length: v_max * horizon.abs() / GUARD_FRACTION,
            });
        }
        Ok(GuardReport {
            v_max,
            horizon: horizon.abs(),
            budget,
        })
    }

    /// Longest horizon the guard allows for `wf`.
    pub fn max_horizon(&self, wf: &WaveFunction) -> f64 {
        let v = self.velocity_bound(wf);
        if v == 0.0 {
            f64::INFINITY
        } else {
            GUARD_FRACTION * self.lattice.min_half_length() / v
        }
    }

    /// `exp(-i t K) / N`, matched to the unscaled inverse transform.
    pub(crate) fn kinetic_phase(&self, t: f64) -> Vec<Complex64> {
        let inv_n = 1.0 / self.lattice.len() as f64;
        self.kinetic
            .iter()
            .map(|&k| Complex64::from_polar(inv_n, -t * k))
            .collect()
    }

    /// Forward transform, multiply, unscaled inverse.
    pub(crate) fn apply_kinetic(&self, buf: &mut [Complex64], phase: &[Complex64]) {
        let fft = self.lattice.fft();
        fft.forward(buf);
        for (v, p) in buf.iter_mut().zip(phase) {
            *v *= p;
        }
        fft.inverse(buf);
    }

    /// Strang splitting for a static potential without guard checks.
    pub(crate) fn strang_static(&self, buf: &mut [Complex64], v: &[f64], t: f64) {
        if t == 0.0 {
            return;
        }
        let n = (t.abs() / self.dt).ceil().max(1.0) as usize;
        let h = t / n as f64;
        let half = potential_phase(v, h / 2.0);
        let full = potential_phase(v, h);
        let kin = self.kinetic_phase(h);
        multiply(buf, &half);
        for i in 0..n {
            self.apply_kinetic(buf, &kin);
            multiply(buf, if i + 1 < n { &full } else { &half });
        }
    }

    /// Midpoint-sampled splitting for `V_t = g(t) shape` from `s` to `t`, without guard checks.
    pub(crate) fn strang_timedep(&self, buf: &mut [Complex64], pot: &TimeDependentPotential, s: f64, t: f64) {
        if t == s {
            return;
        }
        let n = ((t - s).abs() / self.dt).ceil().max(1.0) as usize;
        let h = (t - s) / n as f64;
        let shape = &pot.shape.values;
        let g = |m: usize| pot.envelope.eval(s + (m as f64 + 0.5) * h);
        let kin = self.kinetic_phase(h);
        let mut phase = vec![Complex64::default(); buf.len()];
        let fill = |phase: &mut [Complex64], coeff: f64| {
            for (p, v) in phase.iter_mut().zip(shape) {
                *p = Complex64::from_polar(1.0, -coeff * v);
            }
        };
        let mut g_prev = g(0);
        fill(&mut phase, h / 2.0 * g_prev);
        multiply(buf, &phase);
        for m in 0..n {
            self.apply_kinetic(buf, &kin);
            let coeff = if m + 1 < n {
                let g_next = g(m + 1);
                let c = h / 2.0 * (g_prev + g_next);
                g_prev = g_next;
                c
            } else {
                h / 2.0 * g_prev
            };
            fill(&mut phase, coeff);
            multiply(buf, &phase);
        }
    }

    /// Number of splitting steps used over `|t|`.
    pub fn steps_for(&self, t: f64) -> usize {
        (t.abs() / self.dt).ceil().max(1.0) as usize
    }
}

pub(crate) fn potential_phase(v: &[f64], t: f64) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::from_polar(1.0, -t * x)).collect()
}

pub(crate) fn multiply(buf: &mut [Complex64], phase: &[Complex64]) {
    for (v, p) in buf.iter_mut().zip(phase) {
        *v *= p;
    }
}

fn check_potential(plan: &PropagationPlan, v: &[f64]) -> Result<()> {
    if v.len() != plan.lattice.len() {
        return Err(Error::invalid("potential samples do not match the lattice"));
    }
    Ok(())
}

/// `e^{-itH_o} psi` by the exact multiplier.
pub fn free_evolve(plan: &PropagationPlan, wf: &WaveFunction, t: f64) -> Result<WaveFunction> {
    wf.check_lattice(&plan.lattice)?;
    plan.check_guard(wf, t)?;
    Ok(free_evolve_unchecked(plan, wf, t))
}

pub(crate) fn free_evolve_unchecked(plan: &PropagationPlan, wf: &WaveFunction, t: f64) -> WaveFunction {
    let mut out = wf.clone();
    if t != 0.0 {
        let phase = plan.kinetic_phase(t);
        plan.apply_kinetic(out.samples_mut(), &phase);
    }
    out
}

/// Second-order approximation of `e^{-itH} psi` for `H = H_o + V`.
pub fn evolve_static(plan: &PropagationPlan, v: &[f64], wf: &WaveFunction, t: f64) -> Result<WaveFunction> {
    wf.check_lattice(&plan.lattice)?;
    check_potential(plan, v)?;
    plan.check_guard(wf, t)?;
    let mut out = wf.clone();
    plan.strang_static(out.samples_mut(), v, t);
    Ok(out)
}

/// Approximation of the propagator `U(t, s) psi` for `V_t = g(t) shape`.
pub fn evolve_timedep(
    plan: &PropagationPlan,
    pot: &TimeDependentPotential,
    wf: &WaveFunction,
    s: f64,
    t: f64,
) -> Result<WaveFunction> {
    wf.check_lattice(&plan.lattice)?;
    check_potential(plan, &pot.shape.values)?;
    plan.check_guard(wf, t - s)?;
    let mut out = wf.clone();
    plan.strang_timedep(out.samples_mut(), pot, s, t);
    Ok(out)
}

/// One period `M psi = U(1, 0) psi`.
pub fn monodromy_apply(plan: &PropagationPlan, pot: &TimeDependentPotential, wf: &WaveFunction) -> Result<WaveFunction> {
    if !pot.envelope.is_periodic() {
        return Err(Error::invalid("monodromy needs a 1-periodic envelope"));
    }
    evolve_timedep(plan, pot, wf, 0.0, 1.0)
}

/// `M^n psi`, guarding the whole `n`-period horizon.
pub fn monodromy_power(
    plan: &PropagationPlan,
    pot: &TimeDependentPotential,
    wf: &WaveFunction,
    n: usize,
) -> Result<WaveFunction> {
    if !pot.envelope.is_periodic() {
        return Err(Error::invalid("monodromy needs a 1-periodic envelope"));
    }
    wf.check_lattice(&plan.lattice)?;
    plan.check_guard(wf, n as f64)?;
    let mut out = wf.clone();
    for _ in 0..n {
        plan.strang_timedep(out.samples_mut(), pot, 0.0, 1.0);
    }
    Ok(out)
}

/// Outcome of [`calibrate_dt`].
#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub dt: f64,
    pub self_convergence: f64,
    pub halvings: usize,
    pub converged: bool,
}

/// Halves `dt` until `||U_dt(1) psi - U_{dt/2}(1) psi|| <= target`.
pub fn calibrate_dt(
    plan: &PropagationPlan,
    v: &[f64],
    probe: &WaveFunction,
    target: f64,
    max_halvings: usize,
) -> Result<Calibration> {
    check_potential(plan, v)?;
    plan.check_guard(probe, 1.0)?;
    let mut dt = plan.dt;
    let run = |dt: f64| -> Result<WaveFunction> {
        let p = plan.with_dt(dt)?;
        let mut out = probe.clone();
        p.strang_static(out.samples_mut(), v, 1.0);
        Ok(out)
    };
    let mut coarse = run(dt)?;
    for halvings in 0..=max_halvings {
        let fine = run(dt / 2.0)?;
        let err = fine.distance(&coarse);
        if err <= target {
            return Ok(Calibration {
                dt,
                self_convergence: err,
                halvings,
                converged: true,
            });
        }
        if halvings == max_halvings {
            return Ok(Calibration {
                dt,
                self_convergence: err,
                halvings,
                converged: false,
            });
        }
        dt /= 2.0;
        coarse = fine;
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::gaussian_packet;

    fn setup(n: usize, l: f64) -> (PropagationPlan, Arc<Lattice>) {
        let sym = DispersionSymbol::laplacian(1);
        let lat = Lattice::uniform(&sym, n, l).unwrap();
        (PropagationPlan::new(&sym, &lat, DEFAULT_DT).unwrap(), lat)
    }

    #[test]
    fn identity_at_zero_and_norm() {
        let (plan, lat) = setup(1024, 300.0);
        let wf = gaussian_packet(&lat, &[0.0], &[0.0], &[3.0]).unwrap();
        assert!(free_evolve(&plan, &wf, 0.0).unwrap().distance(&wf) < 1e-15);
        let out = free_evolve(&plan, &wf, 50.0).unwrap();
        assert!((out.norm() - wf.norm()).abs() < 1e-12);
    }

    #[test]
    fn guard_rejects_fast_states() {
        let (plan, lat) = setup(512, 20.0);
        let wf = gaussian_packet(&lat, &[0.0], &[5.0], &[1.0]).unwrap();
        match free_evolve(&plan, &wf, 10.0) {
            Err(Error::Guard { required_half_length, .. }) => assert!(required_half_length > 20.0),
            other => panic!("expected guard error, got {other:?}"),
        }
    }

    #[test]
    fn variance_law() {
        // |psi_t|^2 has variance sigma^2 (1 + t^2 / sigma^4) for H_o = -d^2/dx^2.
        let (plan, lat) = setup(1024, 100.0);
        let s = 2.0;
        let wf = gaussian_packet(&lat, &[0.0], &[0.0], &[s]).unwrap();
        let t = 10.0;
        let out = free_evolve(&plan, &wf, t).unwrap();
        let dx = lat.axes()[0].dx();
        let var: f64 = out
            .samples()
            .iter()
            .zip(lat.x_axis(0))
            .map(|(v, x)| x * x * v.norm_sqr())
            .sum::<f64>()
            * dx;
        let exact = s * s * (1.0 + t * t / s.powi(4));
        assert!((var - exact).abs() < 1e-6, "{var} vs {exact}");
    }

    #[test]
    fn static_matches_free_for_zero_potential() {
        let (plan, lat) = setup(256, 50.0);
        let wf = gaussian_packet(&lat, &[0.0], &[0.5], &[2.0]).unwrap();
        let zero = vec![0.0; lat.len()];
        let a = evolve_static(&plan, &zero, &wf, 3.0).unwrap();
        let b = free_evolve(&plan, &wf, 3.0).unwrap();
        assert!(a.distance(&b) < 1e-12);
    }

    #[test]
    fn second_order_convergence() {
        let (plan, lat) = setup(256, 40.0);
        let wf = gaussian_packet(&lat, &[-3.0], &[1.0], &[1.5]).unwrap();
        let v: Vec<f64> = lat.x_axis(0).iter().map(|x| -2.0 / (1.0 + x * x)).collect();
        let run = |dt: f64| evolve_static(&plan.with_dt(dt).unwrap(), &v, &wf, 2.0).unwrap();
        let reference = run(1.0 / 512.0);
        let e1 = run(1.0 / 32.0).distance(&reference);
        let e2 = run(1.0 / 64.0).distance(&reference);
        let ratio = e1 / e2;
        assert!((3.3..4.8).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn unitarity_with_potential() {
        let (plan, lat) = setup(1024, 300.0);
        let wf = gaussian_packet(&lat, &[0.0], &[0.0], &[3.0]).unwrap();
        let v: Vec<f64> = lat.x_axis(0).iter().map(|x| 0.7 * (1.0 + x * x).powf(-1.0)).collect();
        let out = evolve_static(&plan, &v, &wf, 50.0).unwrap();
        assert!((out.norm() - wf.norm()).abs() < 1e-10);
    }

    #[test]
    fn calibration_halves_until_target() {
        let (plan, lat) = setup(128, 20.0);
        let wf = gaussian_packet(&lat, &[0.0], &[0.5], &[1.5]).unwrap();
        let v: Vec<f64> = lat.x_axis(0).iter().map(|x| -(1.0 + x * x).powf(-1.0)).collect();
        let c = calibrate_dt(&plan.with_dt(0.25).unwrap(), &v, &wf, 1e-4, 10).unwrap();
        assert!(c.converged && c.halvings > 0 && c.self_convergence <= 1e-4);
    }
}
