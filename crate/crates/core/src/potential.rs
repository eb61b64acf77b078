//! Static potentials in the anisotropic and isotropic decay classes, time envelopes,
//! and the class certificates reported with every sampled potential.

use serde::{Deserialize, Serialize};

use crate::admissibility::DecayIndex;
use crate::error::{Error, Result};
use crate::field::Lattice;
use crate::rational::{self, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKind {
    Aniso,
    Iso,
    Sum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Exact power law with the extra decay margin.
    #[default]
    Plain,
    /// Exact power law divided by `1 + ln(1 + |x|^2)`.
    Logdamped,
    /// `(1 - |x|^2 / R^2)_+^3`, independent of the exponents.
    Compact,
}

/// `cos(frequency * x_axis)` factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Oscillation {
    pub axis: usize,
    pub frequency: f64,
}

fn default_margin() -> f64 {
    0.05
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// Amplitude `c` of the anisotropic (or sole) part.
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<DecayIndex>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_rational"
    )]
    pub q: Option<Q>,
    /// Amplitude of the isotropic part of a `sum` potential.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iso_amplitude: Option<f64>,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oscillation: Option<Oscillation>,
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Q>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(q) => s.serialize_some(&rational::format(q)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Q>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let raw = Option::<Raw>::deserialize(d)?;
        raw.map(|r| match r {
            Raw::Int(i) => Ok(rational::qi(i)),
            Raw::Float(x) => rational::from_f64_decimal(x),
            Raw::Text(t) => rational::parse(&t),
        })
        .transpose()
        .map_err(serde::de::Error::custom)
    }
}

impl PotentialSpec {
    /// `c * rho^eps * rho^(margin)` with the default margin.
    pub fn aniso(amplitude: f64, eps: DecayIndex) -> Self {
        PotentialSpec {
            kind: PotentialKind::Aniso,
            amplitude,
            eps: Some(eps),
            q: None,
            iso_amplitude: None,
            profile: Profile::Plain,
            margin: default_margin(),
            radius: default_radius(),
            oscillation: None,
        }
    }

    /// `c (1 + |x|^2)^(-q/2 - margin/2)`.
    pub fn iso(amplitude: f64, q: Q) -> Self {
        PotentialSpec {
            kind: PotentialKind::Iso,
            amplitude,
            eps: None,
            q: Some(q),
            iso_amplitude: None,
            profile: Profile::Plain,
            margin: default_margin(),
            radius: default_radius(),
            oscillation: None,
        }
    }

    pub fn sum(amplitude: f64, eps: DecayIndex, iso_amplitude: f64, q: Q) -> Self {
        PotentialSpec {
            kind: PotentialKind::Sum,
            iso_amplitude: Some(iso_amplitude),
            q: Some(q),
            ..Self::aniso(amplitude, eps)
        }
    }

    /// `c (1 - |x|^2/R^2)_+^3`.
    pub fn compact(amplitude: f64, radius: f64) -> Self {
        PotentialSpec {
            kind: PotentialKind::Iso,
            amplitude,
            eps: None,
            q: None,
            iso_amplitude: None,
            profile: Profile::Compact,
            margin: 0.0,
            radius,
            oscillation: None,
        }
    }

    pub fn with_profile(mut self, profile: Profile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn with_oscillation(mut self, axis: usize, frequency: f64) -> Self {
        self.oscillation = Some(Oscillation { axis, frequency });
        self
    }

    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        let nu = lattice.block_of_axis().last().map_or(0, |b| b + 1);
        if !self.amplitude.is_finite() {
            return Err(Error::config("potential.amplitude", "must be finite"));
        }
        if !(self.margin >= 0.0) {
            return Err(Error::config("potential.margin", "must be nonnegative"));
        }
        if self.profile == Profile::Compact && !(self.radius > 0.0) {
            return Err(Error::config("potential.radius", "must be positive"));
        }
        if matches!(self.kind, PotentialKind::Aniso | PotentialKind::Sum) && self.profile != Profile::Compact {
            match &self.eps {
                Some(e) if e.len() == nu => {}
                Some(e) => {
                    return Err(Error::config(
                        "potential.eps",
                        format!("has {} entries, lattice has {nu} blocks", e.len()),
                    ))
                }
                None => return Err(Error::config("potential.eps", "required for this kind")),
            }
        }
        if matches!(self.kind, PotentialKind::Iso | PotentialKind::Sum)
            && self.profile != Profile::Compact
            && self.q.is_none()
        {
            return Err(Error::config("potential.q", "required for this kind"));
        }
        if self.kind == PotentialKind::Sum && self.iso_amplitude.is_none() {
            return Err(Error::config("potential.iso_amplitude", "required for sum potentials"));
        }
        if let Some(o) = &self.oscillation {
            if o.axis >= lattice.dim() {
                return Err(Error::config("potential.oscillation.axis", "out of range"));
            }
        }
        Ok(())
    }
}

/// Class certificate: `sup |w V|` and the maximum over the outer shell
/// `max_i |x_i| / L_i >= 0.9`, where `w` is the inverse class weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassCertificate {
    pub class: String,
    pub sup: f64,
    pub shell_max: f64,
    /// `shell_max < 0.5 * sup` (or the part vanishes identically).
    pub passes: bool,
}

#[derive(Clone, Debug)]
pub struct StaticPotential {
    pub values: Vec<f64>,
    pub certificates: Vec<ClassCertificate>,
}

impl StaticPotential {
    pub fn zero(lattice: &Lattice) -> Self {
        StaticPotential {
            values: vec![0.0; lattice.len()],
            certificates: Vec::new(),
        }
    }

    pub fn in_class(&self) -> bool {
        self.certificates.iter().all(|c| c.passes)
    }

    /// Errors with the failing certificate when the box is too small to exhibit the vanishing ratio.
    pub fn require_class(&self) -> Result<()> {
        match self.certificates.iter().find(|c| !c.passes) {
            None => Ok(()),
            Some(c) => Err(Error::Certificate(format!(
                "not in {} at this box size: shell max {} vs sup {}",
                c.class, c.shell_max, c.sup
            ))),
        }
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn block_r2(x: &[f64], blocks: &[usize], nu: usize) -> Vec<f64> {
    let mut r2 = vec![0.0; nu];
    for (xi, &b) in x.iter().zip(blocks) {
        r2[b] += xi * xi;
    }
    r2
}

fn shell_mask(lattice: &Lattice) -> Vec<bool> {
    let ls: Vec<f64> = lattice.axes().iter().map(|a| a.half_length).collect();
    lattice.position_values(|x| x.iter().zip(&ls).any(|(xi, l)| xi.abs() / l >= 0.9))
}

fn certificate(class: &str, ratio: &[f64], shell: &[bool]) -> ClassCertificate {
    let sup = ratio.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let shell_max = ratio
        .iter()
        .zip(shell)
        .filter(|(_, s)| **s)
        .fold(0.0f64, |m, (v, _)| m.max(v.abs()));
    ClassCertificate {
        class: class.into(),
        sup,
        shell_max,
        passes: sup == 0.0 || shell_max < 0.5 * sup,
    }
}

/// Samples the potential and its class certificates.
pub fn build_static(lattice: &Lattice, spec: &PotentialSpec) -> Result<StaticPotential> {
    spec.validate(lattice)?;
    let blocks = lattice.block_of_axis().to_vec();
    let nu = blocks.last().map_or(0, |b| b + 1);
    let shell = shell_mask(lattice);
    let osc: Vec<f64> = match spec.oscillation {
        Some(o) => lattice.position_values(|x| (o.frequency * x[o.axis]).cos()),
        None => vec![1.0; lattice.len()],
    };
    let logdamp = |r2: f64| 1.0 / (1.0 + (1.0 + r2).ln());
    let mut values = vec![0.0; lattice.len()];
    let mut certificates = Vec::new();

    if spec.profile == Profile::Compact {
        let r = spec.radius;
        let part = lattice.position_values(|x| {
            let s: f64 = x.iter().map(|v| v * v).sum::<f64>() / (r * r);
            if s >= 1.0 {
                0.0
            } else {
                (1.0 - s).powi(3)
            }
        });
        for ((v, p), o) in values.iter_mut().zip(&part).zip(&osc) {
            *v = spec.amplitude * p * o;
        }
        certificates.push(certificate("compact", &values, &shell));
        return Ok(StaticPotential { values, certificates });
    }

    if matches!(spec.kind, PotentialKind::Aniso | PotentialKind::Sum) {
        let eps = spec.eps.as_ref().expect("validated").to_f64();
        let c = spec.amplitude;
        let m = spec.margin;
        let mut ratio = Vec::with_capacity(lattice.len());
        let part = lattice.position_values(|x| {
            let r2 = block_r2(x, &blocks, nu);
            let base: f64 = r2.iter().zip(&eps).map(|(r, e)| (1.0 + r).powf(-e / 2.0)).product();
            let extra: f64 = match spec.profile {
                Profile::Plain => r2.iter().map(|r| (1.0 + r).powf(-m / 2.0)).product(),
                _ => logdamp(r2.iter().sum()),
            };
            ratio.push(c * extra);
            c * base * extra
        });
        for ((v, p), o) in values.iter_mut().zip(&part).zip(&osc) {
            *v += p * o;
        }
        let ratio: Vec<f64> = ratio.iter().zip(&osc).map(|(r, o)| r * o).collect();
        certificates.push(certificate("L_eps", &ratio, &shell));
    }

    if matches!(spec.kind, PotentialKind::Iso | PotentialKind::Sum) {
        let q = rational::to_f64(spec.q.as_ref().expect("validated"));
        let c = match spec.kind {
            PotentialKind::Sum => spec.iso_amplitude.expect("validated"),
            _ => spec.amplitude,
        };
        let m = spec.margin;
        let mut ratio = Vec::with_capacity(lattice.len());
        let part = lattice.position_values(|x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let extra = match spec.profile {
                Profile::Plain => (1.0 + r2).powf(-m / 2.0),
                _ => logdamp(r2),
            };
            ratio.push(c * extra);
            c * (1.0 + r2).powf(-q / 2.0) * extra
        });
        for ((v, p), o) in values.iter_mut().zip(&part).zip(&osc) {
            *v += p * o;
        }
        let ratio: Vec<f64> = ratio.iter().zip(&osc).map(|(r, o)| r * o).collect();
        certificates.push(certificate("L_q", &ratio, &shell));
    }
    Ok(StaticPotential { values, certificates })
}

/// Scalar time envelope multiplying a static shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum TimeEnvelope {
    Constant,
    /// `exp(-rate |t|)`.
    Exponential { rate: f64 },
    /// `(1 + t^2)^(-power/2)`.
    Inversepower { power: f64 },
    /// `a0 + sum_n (cos_n cos(2 pi n t) + sin_n sin(2 pi n t))`, period 1.
    Periodic {
        a0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

/// `int (1 + |t|)^(2 gamma) g(t)^2 dt` over the line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeCertificate {
    pub gamma: f64,
    pub finite: bool,
    pub integral: f64,
}

impl TimeEnvelope {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeEnvelope::Constant => 1.0,
            TimeEnvelope::Exponential { rate } => (-rate * t.abs()).exp(),
            TimeEnvelope::Inversepower { power } => (1.0 + t * t).powf(-power / 2.0),
            TimeEnvelope::Periodic { a0, cos, sin } => {
                let w = 2.0 * std::f64::consts::PI * t.rem_euclid(1.0);
                let mut v = *a0;
                for (n, c) in cos.iter().enumerate() {
                    v += c * (w * (n + 1) as f64).cos();
                }
                for (n, s) in sin.iter().enumerate() {
                    v += s * (w * (n + 1) as f64).sin();
                }
                v
            }
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, TimeEnvelope::Periodic { .. } | TimeEnvelope::Constant)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TimeEnvelope::Exponential { rate } if !(*rate > 0.0) => {
                Err(Error::config("envelope.rate", "must be positive"))
            }
            TimeEnvelope::Inversepower { power } if !(*power > 0.0) => {
                Err(Error::config("envelope.power", "must be positive"))
            }
            TimeEnvelope::Periodic { a0, cos, sin }
                if !a0.is_finite() || cos.iter().chain(sin).any(|v| !v.is_finite()) =>
            {
                Err(Error::config("envelope", "periodic coefficients must be finite"))
            }
            _ => Ok(()),
        }
    }

    /// Decides `(1 + |t|)^gamma g in L^2` and evaluates the integral.
    pub fn l2_certificate(&self, gamma: f64) -> EnvelopeCertificate {
        let finite = match self {
            TimeEnvelope::Exponential { .. } => true,
            TimeEnvelope::Inversepower { power } => 2.0 * gamma - 2.0 * power < -1.0,
            TimeEnvelope::Constant | TimeEnvelope::Periodic { .. } => false,
        };
        let integral = if !finite {
            f64::INFINITY
        } else {
            let f = |t: f64| (1.0 + t).powf(2.0 * gamma) * self.eval(t).powi(2);
            // Composite Simpson on decades [0,1], [1,10], ..., [1e3,1e4] plus the power tail.
            let mut acc = simpson(&f, 0.0, 1.0, 2000);
            let mut a = 1.0;
            while a < 1e4 {
                acc += simpson(&f, a, a * 10.0, 4000);
                a *= 10.0;
            }
            if let TimeEnvelope::Inversepower { power } = self {
                let e = 2.0 * gamma - 2.0 * power + 1.0;
                acc += -(1e4f64).powf(e) / e;
            }
            2.0 * acc
        };
        EnvelopeCertificate {
            gamma,
            finite,
            integral,
        }
    }

    /// `max_t |g'(t)|` sampled on `[0, 1)` by central differences.
    pub fn max_time_derivative(&self) -> f64 {
        let h = 1e-5;
        (0..1000)
            .map(|i| {
                let t = i as f64 / 1000.0;
                ((self.eval(t + h) - self.eval(t - h)) / (2.0 * h)).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// `V_t = g(t) * shape`.
#[derive(Clone, Debug)]
pub struct TimeDependentPotential {
    pub shape: StaticPotential,
    pub envelope: TimeEnvelope,
}

impl TimeDependentPotential {
    pub fn new(shape: StaticPotential, envelope: TimeEnvelope) -> Result<Self> {
        envelope.validate()?;
        Ok(TimeDependentPotential { shape, envelope })
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        eval_timedep(&self.shape, &self.envelope, t)
    }

    /// Pointwise bound `F = max_t |g| * |shape|` for periodic envelopes.
    pub fn sup_envelope(&self) -> f64 {
        match &self.envelope {
            TimeEnvelope::Periodic { a0, cos, sin } => {
                a0.abs() + cos.iter().chain(sin).map(|c| c.abs()).sum::<f64>()
            }
            _ => 1.0,
        }
    }

    /// `max_{t,x} |d/dt V_t(x)|` on the lattice.
    pub fn max_time_derivative(&self) -> f64 {
        self.envelope.max_time_derivative() * self.shape.sup_abs()
    }
}

pub fn eval_timedep(shape: &StaticPotential, envelope: &TimeEnvelope, t: f64) -> Vec<f64> {
    let g = envelope.eval(t);
    shape.values.iter().map(|v| g * v).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::symbol::DispersionSymbol;

    #[test]
    fn plain_normalization() {
        let lat = Lattice::uniform(&DispersionSymbol::laplacian(1), 256, 40.0).unwrap();
        let spec = PotentialSpec::aniso(-1.0, DecayIndex::parse(&["3"]).unwrap());
        let v = build_static(&lat, &spec).unwrap();
        let c = &v.certificates[0];
        assert_eq!(c.sup, 1.0);
        // x = 0 sits at index N/2.
        assert_eq!(v.values[128], -1.0);
        let w: Vec<f64> = lat.x_axis(0).iter().map(|x| (1.0 + x * x).powf(-1.5)).collect();
        assert!(v.values.iter().zip(&w).all(|(v, w)| v.abs() <= w + 1e-15));
    }

    #[test]
    fn zero_amplitude() {
        let lat = Lattice::uniform(&DispersionSymbol::laplacian(1), 64, 10.0).unwrap();
        let v = build_static(&lat, &PotentialSpec::aniso(0.0, DecayIndex::parse(&["1"]).unwrap())).unwrap();
        assert!(v.values.iter().all(|x| *x == 0.0));
        assert!(v.in_class());
    }

    #[test]
    fn iso_shell_certificate_matches_closed_form() {
        let lat = Lattice::uniform(&DispersionSymbol::laplacian(2), 64, 40.0).unwrap();
        let spec = PotentialSpec::iso(1.0, q(3, 2));
        let v = build_static(&lat, &spec).unwrap();
        let c = &v.certificates[0];
        // Ratio (1 + |x|^2)^(-margin/2) peaks at the origin; its shell maximum sits at the
        // shell point nearest the origin, |x| = smallest grid |x_1| >= 36 with x_2 = 0.
        let dx = 80.0 / 64.0;
        let x_in = (0..64).map(|m| (-40.0 + dx * m as f64).abs()).filter(|a| *a >= 36.0).fold(f64::INFINITY, f64::min);
        let oracle = (1.0 + x_in * x_in).powf(-0.025);
        assert!((c.shell_max - oracle).abs() < 1e-14);
        assert_eq!(c.sup, 1.0);
        assert!(!c.passes, "margin 0.05 decays too slowly to halve by the box edge");
        let damped = build_static(&lat, &spec.clone().with_profile(Profile::Logdamped)).unwrap();
        assert!(damped.in_class());
        let wide = build_static(&lat, &spec.with_margin(0.5)).unwrap();
        assert!(wide.in_class());
    }

    #[test]
    fn envelopes() {
        let g = TimeEnvelope::Exponential { rate: 1.0 };
        assert_eq!(g.eval(0.0), 1.0);
        let p = TimeEnvelope::Periodic { a0: 1.0, cos: vec![1.0], sin: vec![] };
        assert!((p.eval(0.3) - p.eval(1.3)).abs() < 1e-15);
        // int (1+t^2)^-1 dt = pi.
        let c = TimeEnvelope::Inversepower { power: 1.0 }.l2_certificate(0.0);
        assert!(c.finite);
        assert!((c.integral - std::f64::consts::PI).abs() < 1e-3, "{}", c.integral);
        // int exp(-2|t|) dt = 1.
        let e = g.l2_certificate(0.0);
        assert!((e.integral - 1.0).abs() < 1e-9);
        assert!(!TimeEnvelope::Inversepower { power: 0.5 }.l2_certificate(0.0).finite);
    }

    #[test]
    fn timedep_matches_shape_at_zero() {
        let lat = Lattice::uniform(&DispersionSymbol::laplacian(1), 64, 10.0).unwrap();
        let shape = build_static(&lat, &PotentialSpec::aniso(0.3, DecayIndex::parse(&["1"]).unwrap())).unwrap();
        let v0 = eval_timedep(&shape, &TimeEnvelope::Exponential { rate: 1.0 }, 0.0);
        assert_eq!(v0, shape.values);
        let per = TimeEnvelope::Periodic { a0: 1.0, cos: vec![1.0], sin: vec![] };
        assert_eq!(eval_timedep(&shape, &per, 0.25), eval_timedep(&shape, &per, 1.25));
    }
}
