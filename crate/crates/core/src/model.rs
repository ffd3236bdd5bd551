//! Channel configurations and the canonical reception scenarios.
//!
//! Both relays observe the transmission through `Y1 = a X + J + N1` and
//! `Y2 = b X + J + N2` with a common Gaussian interferer `J`, and forward
//! to the destination over error-free links of capacity `c1` and `c2`
//! bits per channel use. Powers are linear, rates are in bits.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Capacity of a relay-to-destination link in bits per channel use.
///
/// An unlimited link is a distinct variant, not a large number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Capacity {
    Finite(f64),
    Infinite,
}

impl Capacity {
    pub fn finite(bits: f64) -> Result<Self> {
        if !bits.is_finite() {
            return Err(Error::param("capacity", bits, "must be finite; use Capacity::Infinite"));
        }
        if bits < 0.0 {
            return Err(Error::param("capacity", bits, "must be nonnegative"));
        }
        Ok(Capacity::Finite(bits))
    }

    /// Capacity in bits, `f64::INFINITY` for an unlimited link.
    pub fn bits(self) -> f64 {
        match self {
            Capacity::Finite(c) => c,
            Capacity::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Capacity::Infinite)
    }

    /// `2^(-2C)`, the distortion fraction left by a link of this capacity.
    pub fn neg_exp2(self) -> f64 {
        match self {
            Capacity::Finite(c) => (-2.0 * c).exp2(),
            Capacity::Infinite => 0.0,
        }
    }

    /// `1 / (2^(2C) - 1)`; infinite for a zero-capacity link.
    pub fn inv_excess(self) -> f64 {
        match self {
            Capacity::Finite(c) => 1.0 / (2.0 * c * LN_2).exp_m1(),
            Capacity::Infinite => 0.0,
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        match self {
            Capacity::Finite(c) => Capacity::Finite(c * factor),
            Capacity::Infinite => Capacity::Infinite,
        }
    }
}

impl fmt::Display for Capacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Capacity::Finite(c) => write!(f, "{c}"),
            Capacity::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Capacity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => Ok(Capacity::Infinite),
            other => {
                let bits: f64 = other
                    .parse()
                    .map_err(|_| Error::Invalid(format!("cannot parse capacity '{s}'")))?;
                Capacity::finite(bits)
            }
        }
    }
}

impl Serialize for Capacity {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Capacity::Finite(c) => serializer.serialize_f64(*c),
            Capacity::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Capacity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(c) => Capacity::finite(c).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// The reception scenarios with closed-form rate expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioCase {
    /// Relay 1 sees signal plus interference over an unlimited link,
    /// relay 2 sees the interference alone.
    CaseA,
    /// As `CaseA` with a finite link from relay 1.
    CaseB,
    /// Both relays see the signal in anti-phase plus the common interference.
    CaseC,
    /// Case C gains with both links unlimited.
    FullCooperation,
}

impl ScenarioCase {
    pub const ALL: [ScenarioCase; 4] = [
        ScenarioCase::CaseA,
        ScenarioCase::CaseB,
        ScenarioCase::CaseC,
        ScenarioCase::FullCooperation,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            ScenarioCase::CaseA => "a",
            ScenarioCase::CaseB => "b",
            ScenarioCase::CaseC => "c",
            ScenarioCase::FullCooperation => "full",
        }
    }
}

impl fmt::Display for ScenarioCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioCase::CaseA => f.write_str("case A"),
            ScenarioCase::CaseB => f.write_str("case B"),
            ScenarioCase::CaseC => f.write_str("case C"),
            ScenarioCase::FullCooperation => f.write_str("full cooperation"),
        }
    }
}

impl FromStr for ScenarioCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "case-a" | "casea" => Ok(ScenarioCase::CaseA),
            "b" | "case-b" | "caseb" => Ok(ScenarioCase::CaseB),
            "c" | "case-c" | "casec" => Ok(ScenarioCase::CaseC),
            "full" | "full-cooperation" | "fullcooperation" => Ok(ScenarioCase::FullCooperation),
            _ => Err(Error::UnknownName {
                kind: "case",
                name: s.to_string(),
                available: "a, b, c, full".to_string(),
            }),
        }
    }
}

/// Full parameterization of the two-relay channel and its links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub a: f64,
    pub b: f64,
    pub p_x: f64,
    pub p_j: f64,
    pub p_n1: f64,
    pub p_n2: f64,
    pub c1: Capacity,
    pub c2: Capacity,
}

fn check_power(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::param(name, value, "must be finite"));
    }
    if value < 0.0 {
        return Err(Error::param(name, value, "must be nonnegative"));
    }
    Ok(())
}

fn check_capacity(name: &'static str, c: Capacity) -> Result<()> {
    match c {
        Capacity::Finite(v) if !(v >= 0.0) || !v.is_finite() => {
            Err(Error::param(name, v, "must be finite and nonnegative"))
        }
        _ => Ok(()),
    }
}

impl ChannelConfig {
    /// Builds a general-gain configuration after validating every field.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: f64,
        b: f64,
        p_x: f64,
        p_j: f64,
        p_n1: f64,
        p_n2: f64,
        c1: Capacity,
        c2: Capacity,
    ) -> Result<Self> {
        let cfg = ChannelConfig {
            a,
            b,
            p_x,
            p_j,
            p_n1,
            p_n2,
            c1,
            c2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(Error::param("a", self.a, "gain must be finite"));
        }
        if !self.b.is_finite() {
            return Err(Error::param("b", self.b, "gain must be finite"));
        }
        check_power("p_x", self.p_x)?;
        check_power("p_j", self.p_j)?;
        check_power("p_n1", self.p_n1)?;
        check_power("p_n2", self.p_n2)?;
        check_capacity("c1", self.c1)?;
        check_capacity("c2", self.c2)
    }

    fn has_ab_gains(&self) -> bool {
        self.a == 1.0 && self.b == 0.0 && self.p_n1 == 1.0 && self.p_n2 == 0.0
    }

    fn has_c_gains(&self) -> bool {
        self.a == 1.0 && self.b == -1.0 && self.p_n1 == 1.0 && self.p_n2 == 1.0
    }

    /// The canonical scenario this configuration belongs to, if any.
    pub fn classify(&self) -> Option<ScenarioCase> {
        if self.has_ab_gains() {
            Some(if self.c1.is_infinite() {
                ScenarioCase::CaseA
            } else {
                ScenarioCase::CaseB
            })
        } else if self.has_c_gains() {
            Some(if self.c1.is_infinite() && self.c2.is_infinite() {
                ScenarioCase::FullCooperation
            } else {
                ScenarioCase::CaseC
            })
        } else {
            None
        }
    }

    /// Checks that the fixed parameters of `case` hold exactly.
    pub fn validate_case(&self, case: ScenarioCase) -> Result<()> {
        self.validate()?;
        if self.classify() == Some(case) {
            Ok(())
        } else {
            Err(Error::wrong_case(case_label(case), self.classify()))
        }
    }

    /// True for the gain family shared by Cases A and B.
    pub fn is_interference_relay(&self) -> bool {
        self.has_ab_gains()
    }

    /// True for the anti-phase gain family of Case C (including full cooperation).
    pub fn is_two_interfered(&self) -> bool {
        self.has_c_gains()
    }
}

fn case_label(case: ScenarioCase) -> &'static str {
    match case {
        ScenarioCase::CaseA => "case A",
        ScenarioCase::CaseB => "case B",
        ScenarioCase::CaseC => "case C",
        ScenarioCase::FullCooperation => "full cooperation",
    }
}

/// Builds the configuration of a canonical scenario.
///
/// `c1` must be absent or infinite for Case A and finite for Case B; both
/// capacities must be absent or infinite for full cooperation.
pub fn make_preset(
    case: ScenarioCase,
    p_x: f64,
    p_j: f64,
    c1: Option<Capacity>,
    c2: Option<Capacity>,
) -> Result<ChannelConfig> {
    check_power("p_x", p_x)?;
    check_power("p_j", p_j)?;
    for c in [c1, c2].into_iter().flatten() {
        check_capacity("capacity", c)?;
    }
    let need = |c: Option<Capacity>, name: &str| {
        c.ok_or_else(|| Error::Invalid(format!("{case} requires {name}")))
    };
    let cfg = match case {
        ScenarioCase::CaseA => {
            if let Some(Capacity::Finite(v)) = c1 {
                return Err(Error::param("c1", v, "case A has an unlimited first link"));
            }
            ChannelConfig {
                a: 1.0,
                b: 0.0,
                p_x,
                p_j,
                p_n1: 1.0,
                p_n2: 0.0,
                c1: Capacity::Infinite,
                c2: need(c2, "c2")?,
            }
        }
        ScenarioCase::CaseB => {
            let c1 = need(c1, "c1")?;
            if c1.is_infinite() {
                return Err(Error::param("c1", f64::INFINITY, "case B needs a finite first link"));
            }
            ChannelConfig {
                a: 1.0,
                b: 0.0,
                p_x,
                p_j,
                p_n1: 1.0,
                p_n2: 0.0,
                c1,
                c2: need(c2, "c2")?,
            }
        }
        ScenarioCase::CaseC => {
            let (c1, c2) = (need(c1, "c1")?, need(c2, "c2")?);
            if c1.is_infinite() && c2.is_infinite() {
                return Err(Error::Invalid(
                    "case C with both links unlimited is full cooperation".to_string(),
                ));
            }
            ChannelConfig {
                a: 1.0,
                b: -1.0,
                p_x,
                p_j,
                p_n1: 1.0,
                p_n2: 1.0,
                c1,
                c2,
            }
        }
        ScenarioCase::FullCooperation => {
            for (name, c) in [("c1", c1), ("c2", c2)] {
                if let Some(Capacity::Finite(v)) = c {
                    return Err(Error::param(name, v, "full cooperation has unlimited links"));
                }
            }
            ChannelConfig {
                a: 1.0,
                b: -1.0,
                p_x,
                p_j,
                p_n1: 1.0,
                p_n2: 1.0,
                c1: Capacity::Infinite,
                c2: Capacity::Infinite,
            }
        }
    };
    cfg.validate_case(case)?;
    Ok(cfg)
}

/// `½·log2(1 + x)` for `x ≥ 0`, accurate for tiny `x`.
pub(crate) fn half_log2_1p(x: f64) -> f64 {
    0.5 * x.ln_1p() / LN_2
}

/// Mutual information `½·log2(1 + s/n)` of a Gaussian channel in bits.
pub fn gaussian_mi(signal_power: f64, noise_plus_interference_power: f64) -> Result<f64> {
    if !(signal_power >= 0.0) {
        return Err(Error::param("signal_power", signal_power, "must be nonnegative"));
    }
    if !(noise_plus_interference_power > 0.0) {
        return Err(Error::param(
            "noise_plus_interference_power",
            noise_plus_interference_power,
            "must be positive",
        ));
    }
    Ok(half_log2_1p(signal_power / noise_plus_interference_power))
}
