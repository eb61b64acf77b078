//! Exact admissibility calculus for decay multi-indices.
//!
//! For a symbol with blocks `(d_j, a_j)` and a decay index `eps`, the exponents
//!
//! ```text
//! rho_j       = min(2 eps_j, d_j) / (2 a_j)      rho       = sum_j rho_j
//! tilde_rho_j = min(eps_j, d_j) / 2              tilde_rho = sum_j tilde_rho_j
//! ```
//!
//! drive the membership tests for `E_j`, `E_+`, `E_-`, `E_o` and `K_+`.
//! Everything is computed in exact rationals. Blocks are indexed from 0 in the
//! API and rendered 1-based in witnesses.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, half, qi, Q};
use crate::symbol::{BlockKind, DispersionSymbol};

/// Verdict margins below this are flagged when an exponent is not exactly rational.
pub const INEXACT_MARGIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecayIndex {
    eps: Vec<Q>,
}

impl DecayIndex {
    pub fn new(eps: Vec<Q>) -> Result<Self> {
        for (j, e) in eps.iter().enumerate() {
            if e.is_negative() {
                return Err(Error::invalid(format!(
                    "eps_{} = {} is negative",
                    j + 1,
                    rational::format(e)
                )));
            }
        }
        Ok(DecayIndex { eps })
    }

    /// Parses each entry with [`rational::parse`].
    pub fn parse(entries: &[&str]) -> Result<Self> {
        Self::new(entries.iter().map(|s| rational::parse(s)).collect::<Result<_>>()?)
    }

    /// Converts floats through their shortest decimal form (`0.8` is `4/5`).
    pub fn from_f64(entries: &[f64]) -> Result<Self> {
        Self::new(
            entries
                .iter()
                .map(|&x| rational::from_f64_decimal(x))
                .collect::<Result<_>>()?,
        )
    }

    pub fn uniform(nu: usize, value: Q) -> Result<Self> {
        Self::new(vec![value; nu])
    }

    pub fn eps(&self) -> &[Q] {
        &self.eps
    }

    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.eps.iter().map(rational::to_f64).collect()
    }
}

impl fmt::Display for DecayIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.eps.iter().map(rational::format).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for DecayIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.eps.iter().map(rational::format).collect();
        parts.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DecayIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Entry {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let raw = Vec::<Entry>::deserialize(d)?;
        let eps = raw
            .into_iter()
            .map(|e| match e {
                Entry::Int(i) => Ok(qi(i)),
                Entry::Float(x) => rational::from_f64_decimal(x),
                Entry::Text(t) => rational::parse(&t),
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        DecayIndex::new(eps).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhoProfile {
    pub rho_j: Vec<Q>,
    pub rho: Q,
    pub tilde_rho_j: Vec<Q>,
    pub tilde_rho: Q,
    /// False when some `a_j` had no exact rational value and its binary expansion was used.
    pub exact: bool,
}

fn exponent_exact(sym: &DispersionSymbol, j: usize) -> (Q, bool) {
    let e = &sym.block(j).exponent;
    match e.exact() {
        Some(q) => (q.clone(), true),
        None => (
            BigRational::from_float(e.value()).expect("validated finite exponent"),
            false,
        ),
    }
}

fn check_len(sym: &DispersionSymbol, eps: &DecayIndex) -> Result<()> {
    if eps.len() != sym.nu() {
        return Err(Error::invalid(format!(
            "decay index has {} entries, symbol has {} blocks",
            eps.len(),
            sym.nu()
        )));
    }
    Ok(())
}

pub fn rho_components(sym: &DispersionSymbol, eps: &DecayIndex) -> Result<RhoProfile> {
    check_len(sym, eps)?;
    let mut rho_j = Vec::with_capacity(sym.nu());
    let mut tilde_rho_j = Vec::with_capacity(sym.nu());
    let mut exact = true;
    for (j, e) in eps.eps().iter().enumerate() {
        let d = qi(sym.block(j).dim as i64);
        let (a, ok) = exponent_exact(sym, j);
        exact &= ok;
        let two = qi(2);
        rho_j.push(rational::min(&(&two * e), &d) / (&two * &a));
        tilde_rho_j.push(rational::min(e, &d) / &two);
    }
    let rho = rho_j.iter().fold(Q::zero(), |acc, x| acc + x);
    let tilde_rho = tilde_rho_j.iter().fold(Q::zero(), |acc, x| acc + x);
    Ok(RhoProfile {
        rho_j,
        rho,
        tilde_rho_j,
        tilde_rho,
        exact,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SetName {
    E(usize),
    EPlus,
    EMinus,
    EO,
    KPlus,
    Lq,
}

impl fmt::Display for SetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetName::E(j) => write!(f, "E_{}", j + 1),
            SetName::EPlus => f.write_str("E_plus"),
            SetName::EMinus => f.write_str("E_minus"),
            SetName::EO => f.write_str("E_o"),
            SetName::KPlus => f.write_str("K_plus"),
            SetName::Lq => f.write_str("L_q"),
        }
    }
}

impl Serialize for SetName {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Membership {
    pub set: SetName,
    /// Meaningful only when `applicable`.
    pub verdict: bool,
    pub applicable: bool,
    pub witness: String,
    /// Some strict inequality of the verdict holds with equality.
    pub boundary: bool,
    /// An inexact exponent left the verdict margin below [`INEXACT_MARGIN`].
    pub inexact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub eps: DecayIndex,
    #[serde(serialize_with = "ser_profile")]
    pub rho: RhoProfile,
    pub memberships: Vec<Membership>,
    pub notes: Vec<String>,
}

fn ser_profile<S: Serializer>(p: &RhoProfile, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let f = |v: &[Q]| v.iter().map(rational::format).collect::<Vec<_>>();
    let mut st = s.serialize_struct("RhoProfile", 5)?;
    st.serialize_field("rho_j", &f(&p.rho_j))?;
    st.serialize_field("rho", &rational::format(&p.rho))?;
    st.serialize_field("tilde_rho_j", &f(&p.tilde_rho_j))?;
    st.serialize_field("tilde_rho", &rational::format(&p.tilde_rho))?;
    st.serialize_field("exact", &p.exact)?;
    st.end()
}

impl AdmissibilityReport {
    pub fn get(&self, set: SetName) -> Option<&Membership> {
        self.memberships.iter().find(|m| m.set == set)
    }

    /// Verdict of an applicable set; `None` when absent or not applicable.
    pub fn verdict(&self, set: SetName) -> Option<bool> {
        self.get(set).filter(|m| m.applicable).map(|m| m.verdict)
    }

    /// Aligned plain-text rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("eps        = {}\n", self.eps));
        let f = |v: &[Q]| v.iter().map(rational::format).collect::<Vec<_>>().join(", ");
        out.push_str(&format!(
            "rho_j      = ({})   rho = {}\n",
            f(&self.rho.rho_j),
            rational::format(&self.rho.rho)
        ));
        out.push_str(&format!(
            "~rho_j     = ({})   ~rho = {}\n",
            f(&self.rho.tilde_rho_j),
            rational::format(&self.rho.tilde_rho)
        ));
        for m in &self.memberships {
            let v = if !m.applicable {
                "n/a  "
            } else if m.verdict {
                "true "
            } else {
                "false"
            };
            let mut flags = String::new();
            if m.boundary {
                flags.push_str(" [boundary]");
            }
            if m.inexact {
                flags.push_str(" [inexact]");
            }
            out.push_str(&format!("{:<10} {v}  {}{flags}\n", m.set.to_string(), m.witness));
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

struct Check {
    holds: bool,
    boundary: bool,
    inexact: bool,
    text: String,
}

/// `lhs > rhs` with rendering, boundary and inexactness tracking.
fn strict(label: &str, lhs: &Q, rhs: &Q, exact: bool) -> Check {
    let margin = lhs - rhs;
    Check {
        holds: margin.is_positive(),
        boundary: margin.is_zero(),
        inexact: !exact && rational::to_f64(&margin).abs() < INEXACT_MARGIN,
        text: format!(
            "{label} = {} {} {}",
            rational::format(lhs),
            if margin.is_positive() { ">" } else { "<=" },
            rational::format(rhs)
        ),
    }
}

/// `lhs <= rhs` (non-strict) with rendering.
fn weak(label: &str, lhs: &Q, rhs: &Q, exact: bool) -> Check {
    let margin = rhs - lhs;
    Check {
        holds: !margin.is_negative(),
        boundary: margin.is_zero(),
        inexact: !exact && rational::to_f64(&margin).abs() < INEXACT_MARGIN,
        text: format!(
            "{label} = {} {} {}",
            rational::format(lhs),
            if margin.is_negative() { ">" } else { "<=" },
            rational::format(rhs)
        ),
    }
}

/// Membership of `eps` in `E_j` (0-based `j`): `eps_j + rho - rho_j > 1`, minus the
/// removal set `{eps_j <= 1/2 and rho_m <= 1/2 for some m != j}`.
pub fn in_e_j(sym: &DispersionSymbol, eps: &DecayIndex, j: usize) -> Result<Membership> {
    let prof = rho_components(sym, eps)?;
    e_j_from_profile(eps, &prof, j)
}

fn e_j_from_profile(eps: &DecayIndex, prof: &RhoProfile, j: usize) -> Result<Membership> {
    let nu = eps.len();
    if j >= nu {
        return Err(Error::invalid(format!("block index {} out of range 1..={nu}", j + 1)));
    }
    let n = j + 1;
    let lhs = &eps.eps()[j] + &prof.rho - &prof.rho_j[j];
    let main = strict(&format!("eps_{n} + rho - rho_{n}"), &lhs, &qi(1), prof.exact);
    let small = weak(&format!("eps_{n}"), &eps.eps()[j], &half(), prof.exact);
    let partner = (0..nu)
        .filter(|&m| m != j)
        .map(|m| (m, weak(&format!("rho_{}", m + 1), &prof.rho_j[m], &half(), prof.exact)))
        .find(|(_, c)| c.holds);
    let removed = small.holds && partner.is_some();
    let verdict = main.holds && !removed;
    let mut witness = main.text.clone();
    let mut boundary = main.boundary;
    let mut inexact = main.inexact;
    if main.holds {
        if removed {
            let (_, p) = partner.as_ref().expect("removed implies partner");
            witness.push_str(&format!("; removed: {} and {}", small.text, p.text));
            boundary |= small.boundary || p.boundary;
            inexact |= small.inexact || p.inexact;
        } else {
            witness.push_str(&format!("; not removed: {}", small.text));
            boundary |= small.boundary;
            inexact |= small.inexact;
        }
    }
    Ok(Membership {
        set: SetName::E(j),
        verdict,
        applicable: true,
        witness,
        boundary,
        inexact,
    })
}

fn intersection(set: SetName, parts: &[&Membership], label: &str) -> Membership {
    if parts.is_empty() {
        return Membership {
            set,
            verdict: true,
            applicable: true,
            witness: format!("{label} is empty; intersection is vacuous"),
            boundary: false,
            inexact: false,
        };
    }
    let failing = parts.iter().find(|m| !m.verdict);
    let names: Vec<String> = parts.iter().map(|m| m.set.to_string()).collect();
    Membership {
        set,
        verdict: failing.is_none(),
        applicable: true,
        witness: match failing {
            Some(m) => format!("fails {}: {}", m.set, m.witness),
            None => format!("all of {} hold", names.join(", ")),
        },
        boundary: parts.iter().any(|m| m.boundary),
        inexact: parts.iter().any(|m| m.inexact),
    }
}

/// Zero-based block indices of `J_+ = {1..j_+}`.
pub fn j_plus_set(sym: &DispersionSymbol) -> Vec<usize> {
    (0..sym.j_plus()).collect()
}

/// Zero-based block indices of `J_- = {j_- - 1, .., nu}` clipped to valid indices,
/// and whether clipping happened.
pub fn j_minus_set(sym: &DispersionSymbol) -> (Vec<usize>, bool) {
    let clipped = sym.j_minus() < 2;
    let start = sym.j_minus().saturating_sub(2);
    ((start..sym.nu()).collect(), clipped)
}

fn two_block_hyperbolic(sym: &DispersionSymbol) -> bool {
    sym.nu() == 2
        && sym.block(0).kind == BlockKind::Positive
        && sym.block(1).kind == BlockKind::Negative
}

/// Full report. `q`, when given, decides isotropic class membership (`q > 1`).
pub fn classify(
    sym: &DispersionSymbol,
    eps: &DecayIndex,
    q: Option<&Q>,
) -> Result<AdmissibilityReport> {
    let prof = rho_components(sym, eps)?;
    let nu = sym.nu();
    let mut notes = Vec::new();
    if !prof.exact {
        notes.push("some exponent is not an exact rational; verdicts use its binary value".into());
    }
    let e: Vec<Membership> = (0..nu)
        .map(|j| e_j_from_profile(eps, &prof, j))
        .collect::<Result<_>>()?;

    let jp = j_plus_set(sym);
    let (jm, clipped) = j_minus_set(sym);
    if clipped {
        notes.push(format!(
            "J_minus starts at block j_minus - 1 = {}; clipped to block 1",
            sym.j_minus() as i64 - 1
        ));
    }
    let e_plus = intersection(
        SetName::EPlus,
        &jp.iter().map(|&j| &e[j]).collect::<Vec<_>>(),
        "J_plus",
    );
    let e_minus = intersection(
        SetName::EMinus,
        &jm.iter().map(|&j| &e[j]).collect::<Vec<_>>(),
        "J_minus",
    );

    let total = strict("rho", &prof.rho, &qi(1), prof.exact);
    let strong = (0..nu)
        .map(|j| (j, strict(&format!("rho_{}", j + 1), &prof.rho_j[j], &half(), prof.exact)))
        .find(|(_, c)| c.holds);
    let e_o = Membership {
        set: SetName::EO,
        verdict: total.holds && strong.is_some(),
        applicable: true,
        witness: match &strong {
            Some((_, c)) => format!("{}; {}", total.text, c.text),
            None => format!("{}; no rho_j > 1/2", total.text),
        },
        boundary: total.boundary || strong.as_ref().is_some_and(|(_, c)| c.boundary),
        inexact: total.inexact,
    };

    let k_plus = if sym.range() == crate::symbol::SymbolRange::HalfLine {
        let checks: Vec<Check> = (0..nu)
            .map(|j| {
                let lhs = &eps.eps()[j] + &prof.tilde_rho - &prof.tilde_rho_j[j];
                strict(
                    &format!("eps_{0} + ~rho - ~rho_{0}", j + 1),
                    &lhs,
                    &qi(1),
                    prof.exact,
                )
            })
            .collect();
        let fail = checks.iter().find(|c| !c.holds);
        Membership {
            set: SetName::KPlus,
            verdict: fail.is_none(),
            applicable: true,
            witness: match fail {
                Some(c) => format!("fails {}", c.text),
                None => checks.iter().map(|c| c.text.as_str()).collect::<Vec<_>>().join("; "),
            },
            boundary: checks.iter().any(|c| c.boundary),
            inexact: checks.iter().any(|c| c.inexact),
        }
    } else if two_block_hyperbolic(sym) {
        let lhs = &eps.eps()[0] + &prof.tilde_rho_j[1];
        let c = strict("eps_1 + ~rho_2", &lhs, &qi(1), prof.exact);
        Membership {
            set: SetName::KPlus,
            verdict: c.holds,
            applicable: true,
            witness: c.text,
            boundary: c.boundary,
            inexact: c.inexact,
        }
    } else {
        Membership {
            set: SetName::KPlus,
            verdict: false,
            applicable: false,
            witness: "defined only for all-positive or two-block (+,-) symbols".into(),
            boundary: false,
            inexact: false,
        }
    };

    let l_q = match q {
        Some(q) => {
            let c = strict("q", q, &Q::one(), true);
            Membership {
                set: SetName::Lq,
                verdict: c.holds,
                applicable: true,
                witness: c.text,
                boundary: c.boundary,
                inexact: false,
            }
        }
        None => Membership {
            set: SetName::Lq,
            verdict: false,
            applicable: false,
            witness: "no isotropic exponent q given".into(),
            boundary: false,
            inexact: false,
        },
    };

    let mut memberships = e;
    memberships.extend([e_plus, e_minus, e_o, k_plus, l_q]);
    Ok(AdmissibilityReport {
        eps: eps.clone(),
        rho: prof,
        memberships,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::symbol::BlockSpec;

    fn two_by_two() -> DispersionSymbol {
        DispersionSymbol::new(
            vec![
                BlockSpec::new(2, 2.0, BlockKind::Positive),
                BlockSpec::new(2, 2.0, BlockKind::Positive),
            ],
            2,
            2,
        )
        .unwrap()
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

    fn laplacian_axes(d: usize) -> DispersionSymbol {
        DispersionSymbol::new(vec![BlockSpec::new(1, 2.0, BlockKind::Positive); d], d, d).unwrap()
    }

    #[test]
    fn rho_examples() {
        let one = DispersionSymbol::laplacian(2);
        let p = rho_components(&one, &DecayIndex::parse(&["9/10"]).unwrap()).unwrap();
        assert_eq!(p.rho_j[0], q(9, 20));
        let p = rho_components(&one, &DecayIndex::parse(&["3"]).unwrap()).unwrap();
        assert_eq!(p.rho_j[0], q(1, 2));
        let p = rho_components(&one, &DecayIndex::parse(&["0"]).unwrap()).unwrap();
        assert_eq!(p.rho_j[0], q(0, 1));
        assert!(rho_components(&one, &DecayIndex::parse(&["1", "1"]).unwrap()).is_err());
        assert!(DecayIndex::parse(&["-1"]).is_err());
    }

    #[test]
    fn e_j_examples() {
        let s = two_by_two();
        let m = in_e_j(&s, &DecayIndex::parse(&["9/10", "9/10"]).unwrap(), 0).unwrap();
        assert!(m.verdict);
        assert!(m.witness.contains("27/20"), "{}", m.witness);
        assert!(!in_e_j(&s, &DecayIndex::parse(&["0", "0"]).unwrap(), 0).unwrap().verdict);
        let m = in_e_j(&s, &DecayIndex::parse(&["2/5", "2/5"]).unwrap(), 0).unwrap();
        assert!(!m.verdict);
        assert!(in_e_j(&s, &DecayIndex::parse(&["1", "1"]).unwrap(), 2).is_err());
    }

    #[test]
    fn removal_clause_fires_when_main_inequality_holds() {
        // d = (1, 8), a = (2, 2): rho_2 = min(2 eps_2, 8)/4 can exceed 1/2 while eps_1 is small.
        let s = DispersionSymbol::new(
            vec![
                BlockSpec::new(1, 2.0, BlockKind::Positive),
                BlockSpec::new(1, 2.0, BlockKind::Positive),
                BlockSpec::new(8, 2.0, BlockKind::Positive),
            ],
            3,
            3,
        )
        .unwrap();
        let eps = DecayIndex::parse(&["2/5", "1/10", "4"]).unwrap();
        let m = in_e_j(&s, &eps, 0).unwrap();
        // 2/5 + 1/20 + 2 > 1 but eps_1 <= 1/2 and rho_2 = 1/20 <= 1/2.
        assert!(!m.verdict);
        assert!(m.witness.contains("removed"), "{}", m.witness);
    }

    #[test]
    fn laplacian_three_axes() {
        let r = classify(
            &laplacian_axes(3),
            &DecayIndex::parse(&["2/5", "2/5", "2/5"]).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(r.verdict(SetName::EPlus), Some(false));
        // eps_j + ~rho - ~rho_j = 2/5 + 2/5 = 4/5 under the ~rho_j = min(eps_j, d_j)/2 rule.
        assert_eq!(r.verdict(SetName::KPlus), Some(false));
        let r = classify(
            &laplacian_axes(3),
            &DecayIndex::parse(&["7/10", "7/10", "7/10"]).unwrap(),
            None,
        )
        .unwrap();
        assert_eq!(r.verdict(SetName::KPlus), Some(true));
        assert_eq!(r.verdict(SetName::EPlus), Some(true));
    }

    #[test]
    fn two_by_two_point() {
        let r = classify(&two_by_two(), &DecayIndex::parse(&["9/10", "9/10"]).unwrap(), None).unwrap();
        assert_eq!(r.verdict(SetName::EPlus), Some(true));
        assert_eq!(r.verdict(SetName::EO), Some(false));
    }

    #[test]
    fn hyperbolic_point() {
        let r = classify(&hyperbolic(), &DecayIndex::parse(&["4/5", "3/5"]).unwrap(), None).unwrap();
        assert_eq!(r.rho.rho_j[1], q(1, 4));
        assert_eq!(r.verdict(SetName::EPlus), Some(true));
        assert_eq!(r.verdict(SetName::E(0)), Some(true));
        assert!(r.notes.iter().any(|n| n.contains("clipped")));
        assert_eq!(r.verdict(SetName::KPlus), Some(true));
    }

    #[test]
    fn boundary_is_flagged() {
        let r = classify(
            &DispersionSymbol::laplacian(1),
            &DecayIndex::parse(&["1"]).unwrap(),
            Some(&q(3, 2)),
        )
        .unwrap();
        let e1 = r.get(SetName::E(0)).unwrap();
        assert!(!e1.verdict && e1.boundary);
        assert_eq!(r.verdict(SetName::Lq), Some(true));
    }

    #[test]
    fn inexact_exponent_flag() {
        let s = DispersionSymbol::new(
            vec![BlockSpec::new(1, std::f64::consts::SQRT_2, BlockKind::Positive)],
            1,
            1,
        )
        .unwrap();
        let r = classify(&s, &DecayIndex::parse(&["2"]).unwrap(), None).unwrap();
        assert!(!r.rho.exact);
        assert_eq!(r.verdict(SetName::E(0)), Some(true));
    }
}
