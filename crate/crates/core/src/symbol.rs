//! Block-anisotropic dispersion symbols `P(k) = sum_j p_j(k_j)` and the smooth cutoff.
//!
//! Each block `j` acts on `d_j` consecutive coordinates with exponent `a_j > 1`:
//! positive blocks contribute `|k_j|^a_j`, signed blocks (one-dimensional only)
//! `|k_j|^a_j sign k_j`, negative blocks `-|k_j|^a_j`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Positive,
    Signed,
    Negative,
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::Positive => "positive",
            BlockKind::Signed => "signed",
            BlockKind::Negative => "negative",
        })
    }
}

/// A real exponent with an exact rational value when one is known.
#[derive(Clone, Debug, PartialEq)]
pub struct Exponent {
    value: f64,
    exact: Option<Q>,
}

impl Exponent {
    pub fn rational(num: i64, den: i64) -> Self {
        let exact = rational::q(num, den);
        Exponent {
            value: rational::to_f64(&exact),
            exact: Some(exact),
        }
    }

    pub fn from_exact(exact: Q) -> Self {
        Exponent {
            value: rational::to_f64(&exact),
            exact: Some(exact),
        }
    }

    /// Recovers an exact value when `x` equals `p/q` with `q <= 1000`.
    pub fn from_f64(x: f64) -> Self {
        Exponent {
            value: x,
            exact: rational::recover_small(x, 1000),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Exponent::from_exact(rational::parse(text)?))
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&Q> {
        self.exact.as_ref()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(q) => f.write_str(&rational::format(q)),
            None => write!(f, "{}", self.value),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Exponent::rational(i, 1)),
            Raw::Float(x) => Ok(Exponent::from_f64(x)),
            Raw::Text(t) => Exponent::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub dim: usize,
    pub exponent: Exponent,
    pub kind: BlockKind,
}

impl BlockSpec {
    pub fn new(dim: usize, exponent: f64, kind: BlockKind) -> Self {
        BlockSpec {
            dim,
            exponent: Exponent::from_f64(exponent),
            kind,
        }
    }

    pub fn a(&self) -> f64 {
        self.exponent.value()
    }

    /// `(a - 1) / a`.
    pub fn tau(&self) -> f64 {
        (self.a() - 1.0) / self.a()
    }

    /// `p_j` evaluated on the block coordinates.
    pub fn eval(&self, kj: &[f64]) -> f64 {
        let a = self.a();
        match self.kind {
            BlockKind::Positive => norm(kj).powf(a),
            BlockKind::Negative => -norm(kj).powf(a),
            BlockKind::Signed => {
                let k = kj[0];
                k.abs().powf(a) * k.signum()
            }
        }
    }

    /// `p_j` as a function of `|k_j|` (signed kind: of the signed scalar).
    pub fn eval_radial(&self, r: f64) -> f64 {
        let a = self.a();
        match self.kind {
            BlockKind::Positive => r.abs().powf(a),
            BlockKind::Negative => -r.abs().powf(a),
            BlockKind::Signed => r.abs().powf(a) * r.signum(),
        }
    }

    /// Gradient of `p_j` written into `out`.
    pub fn gradient(&self, kj: &[f64], out: &mut [f64]) {
        let a = self.a();
        let r = norm(kj);
        if r == 0.0 {
            out.iter_mut().for_each(|g| *g = 0.0);
            return;
        }
        let scale = match self.kind {
            BlockKind::Positive => a * r.powf(a - 2.0),
            BlockKind::Negative => -a * r.powf(a - 2.0),
            // d/dk |k|^a sign k = a |k|^(a-1)
            BlockKind::Signed => {
                out[0] = a * r.powf(a - 1.0);
                return;
            }
        };
        for (g, k) in out.iter_mut().zip(kj) {
            *g = scale * k;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Range of `P`: `[0, inf)` when every block is positive, the whole line otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymbolRange {
    HalfLine,
    Line,
}

impl fmt::Display for SymbolRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolRange::HalfLine => "[0,inf)",
            SymbolRange::Line => "R",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersionSymbol {
    blocks: Vec<BlockSpec>,
    j_minus: usize,
    j_plus: usize,
}

impl DispersionSymbol {
    /// Validates block kinds against the boundaries: blocks `1..=j_minus` positive,
    /// `j_minus+1..=j_plus` signed, the rest negative.
    pub fn new(blocks: Vec<BlockSpec>, j_minus: usize, j_plus: usize) -> Result<Self> {
        let nu = blocks.len();
        if nu == 0 {
            return Err(Error::invalid("symbol needs at least one block"));
        }
        if j_minus > j_plus || j_plus > nu {
            return Err(Error::invalid(format!(
                "need 0 <= j_minus <= j_plus <= nu, got j_minus={j_minus}, j_plus={j_plus}, nu={nu}"
            )));
        }
        for (i, b) in blocks.iter().enumerate() {
            let j = i + 1;
            if b.dim == 0 {
                return Err(Error::invalid(format!("block {j} has dimension 0")));
            }
            if !(b.a() > 1.0) {
                return Err(Error::invalid(format!(
                    "block {j}: exponent {} must exceed 1",
                    b.exponent
                )));
            }
            if b.kind == BlockKind::Signed && b.dim != 1 {
                return Err(Error::invalid(format!(
                    "block {j}: signed blocks must be one-dimensional, got dim {}",
                    b.dim
                )));
            }
            let expected = if j <= j_minus {
                BlockKind::Positive
            } else if j <= j_plus {
                BlockKind::Signed
            } else {
                BlockKind::Negative
            };
            if b.kind != expected {
                return Err(Error::invalid(format!(
                    "block {j} is {} but the boundaries (j_minus={j_minus}, j_plus={j_plus}) require {expected}",
                    b.kind
                )));
            }
        }
        Ok(DispersionSymbol {
            blocks,
            j_minus,
            j_plus,
        })
    }

    /// Infers `j_minus`/`j_plus` from the kinds.
    pub fn from_blocks(blocks: Vec<BlockSpec>) -> Result<Self> {
        let j_minus = blocks
            .iter()
            .take_while(|b| b.kind == BlockKind::Positive)
            .count();
        let j_plus = j_minus
            + blocks[j_minus..]
                .iter()
                .take_while(|b| b.kind == BlockKind::Signed)
                .count();
        Self::new(blocks, j_minus, j_plus)
    }

    /// `-Delta` on `R^d`.
    pub fn laplacian(d: usize) -> Self {
        Self::new(vec![BlockSpec::new(d, 2.0, BlockKind::Positive)], 1, 1).expect("valid")
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn block(&self, j: usize) -> &BlockSpec {
        &self.blocks[j]
    }

    pub fn nu(&self) -> usize {
        self.blocks.len()
    }

    pub fn j_minus(&self) -> usize {
        self.j_minus
    }

    pub fn j_plus(&self) -> usize {
        self.j_plus
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// Block index (0-based) owning each scalar coordinate.
    pub fn coordinate_blocks(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(j, b)| std::iter::repeat(j).take(b.dim))
            .collect()
    }

    /// Coordinate range `[start, end)` of block `j` (0-based).
    pub fn block_axes(&self, j: usize) -> std::ops::Range<usize> {
        let start: usize = self.blocks[..j].iter().map(|b| b.dim).sum();
        start..start + self.blocks[j].dim
    }

    pub fn range(&self) -> SymbolRange {
        if self.blocks.iter().all(|b| b.kind == BlockKind::Positive) {
            SymbolRange::HalfLine
        } else {
            SymbolRange::Line
        }
    }

    fn check_dim(&self, k: &[f64]) -> Result<()> {
        if k.len() != self.dim() {
            return Err(Error::invalid(format!(
                "momentum has {} components, symbol dimension is {}",
                k.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    pub fn eval(&self, k: &[f64]) -> Result<f64> {
        self.check_dim(k)?;
        Ok(self.eval_unchecked(k))
    }

    pub(crate) fn eval_unchecked(&self, k: &[f64]) -> f64 {
        let mut start = 0;
        let mut total = 0.0;
        for b in &self.blocks {
            total += b.eval(&k[start..start + b.dim]);
            start += b.dim;
        }
        total
    }

    /// `p_j(k_j)` for block `j` given the full momentum vector.
    pub fn eval_block(&self, j: usize, k: &[f64]) -> f64 {
        self.blocks[j].eval(&k[self.block_axes(j)])
    }

    pub fn group_velocity(&self, k: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(k)?;
        let mut out = vec![0.0; k.len()];
        self.gradient_into(k, &mut out);
        Ok(out)
    }

    pub(crate) fn gradient_into(&self, k: &[f64], out: &mut [f64]) {
        let mut start = 0;
        for b in &self.blocks {
            b.gradient(&k[start..start + b.dim], &mut out[start..start + b.dim]);
            start += b.dim;
        }
    }
}

impl<'de> Deserialize<'de> for DispersionSymbol {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            blocks: Vec<BlockSpec>,
            j_minus: Option<usize>,
            j_plus: Option<usize>,
        }
        let raw = Raw::deserialize(d)?;
        let sym = match (raw.j_minus, raw.j_plus) {
            (Some(m), Some(p)) => DispersionSymbol::new(raw.blocks, m, p),
            (None, None) => DispersionSymbol::from_blocks(raw.blocks),
            _ => Err(Error::invalid("give both j_minus and j_plus or neither")),
        };
        sym.map_err(serde::de::Error::custom)
    }
}

/// Monotone cutoff equal to 0 below `lower` and 1 above `upper`, bridged by the
/// odd-degree smoothstep of the given order (order 3 is the C^3 septic).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothCutoff {
    pub lower: f64,
    pub upper: f64,
    pub order: u32,
}

impl Default for SmoothCutoff {
    fn default() -> Self {
        SmoothCutoff {
            lower: 0.5,
            upper: 1.0,
            order: 3,
        }
    }
}

impl SmoothCutoff {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        let c = SmoothCutoff {
            lower,
            upper,
            order: 3,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) || !self.lower.is_finite() || !self.upper.is_finite() {
            return Err(Error::invalid(format!(
                "cutoff needs finite lower < upper, got ({}, {})",
                self.lower, self.upper
            )));
        }
        if !(1..=3).contains(&self.order) {
            return Err(Error::invalid(format!(
                "cutoff bridge order {} not in 1..=3",
                self.order
            )));
        }
        Ok(())
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        if lambda <= self.lower {
            return 0.0;
        }
        if lambda >= self.upper {
            return 1.0;
        }
        let t = (lambda - self.lower) / (self.upper - self.lower);
        match self.order {
            1 => t * t * (3.0 - 2.0 * t),
            2 => t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
            _ => t.powi(4) * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t))),
        }
    }

    pub fn derivative(&self, lambda: f64) -> f64 {
        if lambda <= self.lower || lambda >= self.upper {
            return 0.0;
        }
        let w = self.upper - self.lower;
        let t = (lambda - self.lower) / w;
        let s = t * (1.0 - t);
        let dt = match self.order {
            1 => 6.0 * s,
            2 => 30.0 * s * s,
            _ => 140.0 * s * s * s,
        };
        dt / w
    }
}

/// Smooth energy window `phi(lambda) = rise(lambda) * (1 - fall(lambda))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyWindow {
    pub rise: SmoothCutoff,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fall: Option<SmoothCutoff>,
}

impl EnergyWindow {
    /// Rises on `[lo0, lo1]`, equals 1 on `[lo1, hi0]`, falls on `[hi0, hi1]`.
    pub fn new(lo0: f64, lo1: f64, hi0: f64, hi1: f64) -> Result<Self> {
        if !(lo1 <= hi0) {
            return Err(Error::invalid(format!("window plateau [{lo1}, {hi0}] is empty")));
        }
        Ok(EnergyWindow {
            rise: SmoothCutoff::new(lo0, lo1)?,
            fall: Some(SmoothCutoff::new(hi0, hi1)?),
        })
    }

    /// Rises on `[lo0, lo1]` and stays 1 above.
    pub fn above(lo0: f64, lo1: f64) -> Result<Self> {
        Ok(EnergyWindow {
            rise: SmoothCutoff::new(lo0, lo1)?,
            fall: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.rise.validate()?;
        if let Some(f) = &self.fall {
            f.validate()?;
            if f.lower < self.rise.upper {
                return Err(Error::invalid("window falls before it has fully risen"));
            }
        }
        Ok(())
    }

    pub fn eval(&self, lambda: f64) -> f64 {
        let up = self.rise.eval(lambda);
        match &self.fall {
            Some(f) => up * (1.0 - f.eval(lambda)),
            None => up,
        }
    }

    /// Open support interval `omega = (lo0, hi1)`.
    pub fn support(&self) -> (f64, f64) {
        (
            self.rise.lower,
            self.fall.map_or(f64::INFINITY, |f| f.upper),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_shape() {
        let w = EnergyWindow::new(0.2, 0.4, 2.0, 2.5).unwrap();
        assert_eq!(w.eval(0.1), 0.0);
        assert_eq!(w.eval(1.0), 1.0);
        assert_eq!(w.eval(3.0), 0.0);
        assert_eq!(w.support(), (0.2, 2.5));
        assert!(EnergyWindow::new(0.2, 3.0, 2.0, 2.5).is_err());
    }

    fn hyperbolic() -> DispersionSymbol {
        DispersionSymbol::new(
            vec![
                BlockSpec::new(1, 2.0, BlockKind::Positive),
                BlockSpec::new(1, 2.0, BlockKind::Negative),
            ],
            1,
            1,
        )
        .unwrap()
    }

    fn signed(a: f64) -> DispersionSymbol {
        DispersionSymbol::new(vec![BlockSpec::new(1, a, BlockKind::Signed)], 0, 1).unwrap()
    }

    #[test]
    fn construction_rules() {
        let lap = DispersionSymbol::laplacian(2);
        assert_eq!(lap.dim(), 2);
        assert_eq!(lap.range(), SymbolRange::HalfLine);
        hyperbolic();
        assert!(DispersionSymbol::new(vec![BlockSpec::new(2, 1.0, BlockKind::Positive)], 1, 1).is_err());
        assert!(DispersionSymbol::new(vec![BlockSpec::new(2, 2.0, BlockKind::Signed)], 0, 1).is_err());
        assert!(DispersionSymbol::new(
            vec![
                BlockSpec::new(1, 2.0, BlockKind::Negative),
                BlockSpec::new(1, 2.0, BlockKind::Positive)
            ],
            1,
            1
        )
        .is_err());
        let inferred = DispersionSymbol::from_blocks(hyperbolic().blocks().to_vec()).unwrap();
        assert_eq!((inferred.j_minus(), inferred.j_plus()), (1, 1));
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(DispersionSymbol::laplacian(2).eval(&[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(signed(3.0).eval(&[-2.0]).unwrap(), -8.0);
        assert_eq!(hyperbolic().eval(&[1.0, 1.0]).unwrap(), 0.0);
        assert!(hyperbolic().eval(&[1.0]).is_err());
    }

    #[test]
    fn velocity_examples() {
        let v = DispersionSymbol::laplacian(2).group_velocity(&[1.0, 0.0]).unwrap();
        assert_eq!(v, vec![2.0, 0.0]);
        assert_eq!(signed(3.0).group_velocity(&[-2.0]).unwrap(), vec![12.0]);
        assert_eq!(hyperbolic().group_velocity(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn ranges() {
        assert_eq!(hyperbolic().range(), SymbolRange::Line);
        assert_eq!(signed(2.0).range(), SymbolRange::Line);
    }

    #[test]
    fn cutoff_values() {
        let z = SmoothCutoff::default();
        assert_eq!(z.eval(2.0), 1.0);
        assert_eq!(z.eval(0.25), 0.0);
        assert!((z.eval(0.75) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponent_round_trip() {
        let e = Exponent::from_f64(1.5);
        assert_eq!(e.to_string(), "3/2");
        assert_eq!(Exponent::parse(&e.to_string()).unwrap(), e);
        assert!(Exponent::from_f64(std::f64::consts::E).exact().is_none());
    }
}
