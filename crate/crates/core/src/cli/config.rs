//! Scenario files.
//!
//! A scenario is a TOML document with a top-level `experiment`, the `[symbol]` and
//! `[lattice]` sections and one parameter table named after the experiment. Unknown
//! keys are rejected so that typos surface as config errors naming the key.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::admissibility::DecayIndex;
use crate::enss::Sign;
use crate::error::{Error, Result};
use crate::field::{gaussian_packet, Axis, Lattice, WaveFunction};
use crate::potential::{PotentialSpec, TimeEnvelope};
use crate::propagate::{SpectralFunction, DEFAULT_DT};
use crate::symbol::{DispersionSymbol, EnergyWindow};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Admit,
    Evolve,
    DecayFit,
    Smooth,
    Waveop,
    Invariance,
    Monodromy,
    Spectrum,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Admit => "admit",
            Experiment::Evolve => "evolve",
            Experiment::DecayFit => "decay-fit",
            Experiment::Smooth => "smooth",
            Experiment::Waveop => "waveop",
            Experiment::Invariance => "invariance",
            Experiment::Monodromy => "monodromy",
            Experiment::Spectrum => "spectrum",
        }
    }
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

/// Per-axis point counts and half-lengths; a single entry is broadcast to every axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub points: Vec<usize>,
    pub half_length: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

impl LatticeConfig {
    pub fn axes(&self, dim: usize) -> Result<Vec<Axis>> {
        let pick = |len: usize, field: &str| -> Result<()> {
            if len == 1 || len == dim {
                Ok(())
            } else {
                Err(Error::config(
                    format!("lattice.{field}"),
                    format!("has {len} entries, symbol dimension is {dim}"),
                ))
            }
        };
        pick(self.points.len(), "points")?;
        pick(self.half_length.len(), "half_length")?;
        Ok((0..dim)
            .map(|i| {
                Axis::new(
                    self.points[i.min(self.points.len() - 1)],
                    self.half_length[i.min(self.half_length.len() - 1)],
                )
            })
            .collect())
    }

    pub fn build(&self, sym: &DispersionSymbol) -> Result<Arc<Lattice>> {
        if !(self.dt > 0.0) {
            return Err(Error::config("lattice.dt", "must be positive"));
        }
        Lattice::for_symbol(sym, self.axes(sym.dim())?).map_err(|e| Error::config("lattice", e.to_string()))
    }
}

/// Modulated Gaussian `exp(-(x-x0)^2/(4 sigma^2) + i k0 x)`; single entries broadcast.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub x0: Vec<f64>,
    pub k0: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl PacketConfig {
    pub fn build(&self, lattice: &Arc<Lattice>, field: &str) -> Result<WaveFunction> {
        let d = lattice.dim();
        let expand = |v: &[f64], name: &str| -> Result<Vec<f64>> {
            match v.len() {
                1 => Ok(vec![v[0]; d]),
                n if n == d => Ok(v.to_vec()),
                n => Err(Error::config(
                    format!("{field}.{name}"),
                    format!("has {n} entries, lattice has {d} axes"),
                )),
            }
        };
        gaussian_packet(
            lattice,
            &expand(&self.x0, "x0")?,
            &expand(&self.k0, "k0")?,
            &expand(&self.sigma, "sigma")?,
        )
        .map_err(|e| Error::config(field, e.to_string()))
    }
}

/// Window rising on `[lo0, lo1]` and, when given, falling on `[hi0, hi1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub lo0: f64,
    pub lo1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi1: Option<f64>,
}

impl WindowConfig {
    pub fn build(&self) -> Result<EnergyWindow> {
        let w = match (self.hi0, self.hi1) {
            (Some(a), Some(b)) => EnergyWindow::new(self.lo0, self.lo1, a, b),
            (None, None) => EnergyWindow::above(self.lo0, self.lo1),
            _ => return Err(Error::config("window", "give both hi0 and hi1 or neither")),
        };
        w.map_err(|e| Error::config("window", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmitParams {
    pub eps: DecayIndex,
    /// Isotropic exponent, as a rational string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveParams {
    pub t: f64,
    /// Number of equally spaced records between 0 and `t`.
    #[serde(default = "default_records")]
    pub records: usize,
    #[serde(default)]
    pub dump_field: bool,
}

fn default_records() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayParams {
    /// One-based block index.
    pub block: usize,
    pub eps: f64,
    #[serde(default = "plus")]
    pub sign: Sign,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default = "default_members")]
    pub members: usize,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_scale: Option<f64>,
}

fn plus() -> Sign {
    Sign::Plus
}
fn default_members() -> usize {
    8
}
fn default_width() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothCutoffScan {
    /// Zero-based lattice axis of the frequency cut.
    pub axis: usize,
    pub scales: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothParams {
    pub eps: Vec<f64>,
    pub gamma: f64,
    pub horizon: f64,
    /// Ensemble; defaults to the `[state]` packet alone.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<PacketConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<SmoothCutoffScan>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveopParams {
    #[serde(default = "plus")]
    pub sign: Sign,
    pub horizon: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Double the horizon until the tail drops below `tol`, up to `t_max`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Horizons of the Cauchy log when an `[envelope]` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizons: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Also report `S psi` at this horizon.
    #[serde(default)]
    pub scattering: bool,
    #[serde(default)]
    pub dump_field: bool,
}

fn default_tol() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceParams {
    pub function: SpectralFunction,
    pub horizons: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonodromyParams {
    pub periods: Vec<usize>,
    #[serde(default)]
    pub dump_field: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderParams {
    pub eps: Vec<f64>,
    pub coupling: f64,
    /// `[[N, L], ...]`.
    pub rungs: Vec<(usize, f64)>,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_delta() -> f64 {
    crate::spectrum::DEFAULT_DELTA
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub window: (f64, f64),
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default)]
    pub oracle: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderParams>,
}

fn default_k_max() -> usize {
    32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub symbol: DispersionSymbol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<TimeEnvelope>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<PacketConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub admit: Option<AdmitParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveParams>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "decay-fit")]
    pub decay: Option<DecayParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smooth: Option<SmoothParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waveop: Option<WaveopParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariance: Option<InvarianceParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monodromy: Option<MonodromyParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumParams>,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("<serialize>", e.to_string()))
    }

    fn need<'a, T>(value: &'a Option<T>, field: &str) -> Result<&'a T> {
        value
            .as_ref()
            .ok_or_else(|| Error::config(field, "section required by this experiment is missing"))
    }

    pub fn lattice(&self) -> Result<&LatticeConfig> {
        Self::need(&self.lattice, "lattice")
    }

    pub fn potential(&self) -> Result<&PotentialSpec> {
        Self::need(&self.potential, "potential")
    }

    pub fn state(&self) -> Result<&PacketConfig> {
        Self::need(&self.state, "state")
    }

    /// Structural checks that do not need numerical work.
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = &self.lattice {
            l.axes(self.symbol.dim())?;
        }
        let e = self.experiment;
        if !matches!(e, Experiment::Admit | Experiment::Spectrum) {
            self.lattice()?;
        }
        match e {
            Experiment::Admit => {
                let p = Self::need(&self.admit, "admit")?;
                if p.eps.len() != self.symbol.nu() {
                    return Err(Error::config(
                        "admit.eps",
                        format!("has {} entries, symbol has {} blocks", p.eps.len(), self.symbol.nu()),
                    ));
                }
                if let Some(q) = &p.q {
                    crate::rational::parse(q).map_err(|e| Error::config("admit.q", e.to_string()))?;
                }
            }
            Experiment::Evolve => {
                Self::need(&self.evolve, "evolve")?;
                self.state()?;
            }
            Experiment::DecayFit => {
                let p = Self::need(&self.decay, "decay-fit")?;
                if p.block == 0 || p.block > self.symbol.nu() {
                    return Err(Error::config(
                        "decay-fit.block",
                        format!("block {} out of range 1..={}", p.block, self.symbol.nu()),
                    ));
                }
            }
            Experiment::Smooth => {
                let p = Self::need(&self.smooth, "smooth")?;
                if p.eps.len() != self.symbol.nu() {
                    return Err(Error::config("smooth.eps", "needs one entry per block"));
                }
                if p.members.is_empty() {
                    self.state()?;
                }
                if let Some(c) = &p.cutoff {
                    if c.axis >= self.symbol.dim() {
                        return Err(Error::config("smooth.cutoff.axis", "out of range"));
                    }
                }
            }
            Experiment::Waveop => {
                let p = Self::need(&self.waveop, "waveop")?;
                self.potential()?;
                self.state()?;
                if self.envelope.is_some() && p.horizons.is_none() {
                    return Err(Error::config("waveop.horizons", "required with an [envelope]"));
                }
            }
            Experiment::Invariance => {
                Self::need(&self.invariance, "invariance")?;
                Self::need(&self.window, "window")?;
                self.potential()?;
                self.state()?;
            }
            Experiment::Monodromy => {
                Self::need(&self.monodromy, "monodromy")?;
                let env = Self::need(&self.envelope, "envelope")?;
                if !env.is_periodic() {
                    return Err(Error::config("envelope.type", "monodromy needs a periodic envelope"));
                }
                self.potential()?;
                self.state()?;
            }
            Experiment::Spectrum => {
                let p = Self::need(&self.spectrum, "spectrum")?;
                if self.lattice.is_none() && p.ladder.is_none() {
                    return Err(Error::config("lattice", "spectrum needs a [lattice] or a [spectrum.ladder]"));
                }
            }
        }
        if let Some(env) = &self.envelope {
            env.validate()?;
        }
        Ok(())
    }
}

/// Config error naming the key on the offending line.
fn toml_error(text: &str, err: &toml::de::Error) -> Error {
    let (line, key) = match err.span() {
        Some(span) => {
            let line_no = text[..span.start.min(text.len())].matches('\n').count() + 1;
            let line = text.lines().nth(line_no - 1).unwrap_or("");
            let key = line
                .split('=')
                .next()
                .map(|k| k.trim().trim_matches(|c| c == '[' || c == ']').to_string())
                .filter(|k| !k.is_empty())
                .unwrap_or_else(|| "<document>".into());
            let section = text
                .lines()
                .take(line_no - 1)
                .filter_map(|l| l.trim().strip_prefix('[').and_then(|l| l.split(']').next()))
                .filter(|l| !l.is_empty() && !line.trim_start().starts_with('['))
                .last();
            match section {
                Some(sec) => (line_no, format!("{}.{key}", sec.trim_matches('['))),
                None => (line_no, key),
            }
        }
        None => (0, "<document>".into()),
    };
    Error::config(key, format!("line {line}: {}", err.message()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ADMIT: &str = r#"
experiment = "admit"
seed = 7

[symbol]
blocks = [
  { dim = 2, exponent = 2, kind = "positive" },
  { dim = 2, exponent = 2, kind = "positive" },
]

[admit]
eps = ["1", "1/2"]
"#;

    #[test]
    fn round_trip() {
        let cfg = ScenarioConfig::from_toml(ADMIT).unwrap();
        let text = cfg.to_toml().unwrap();
        let again = ScenarioConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.to_toml().unwrap());
    }

    #[test]
    fn unknown_kind_names_field() {
        let bad = ADMIT.replacen("\"positive\"", "\"sideways\"", 1);
        match ScenarioConfig::from_toml(&bad) {
            Err(Error::Config { field, message }) => {
                assert!(message.contains("sideways"), "{message}");
                assert!(field.contains("blocks") || field.contains("kind") || field.contains("dim"), "{field}");
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn missing_section() {
        let bad = ADMIT.replace("experiment = \"admit\"", "experiment = \"evolve\"");
        match ScenarioConfig::from_toml(&bad) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "lattice"),
            other => panic!("expected config error, got {other:?}"),
        }
    }
}
