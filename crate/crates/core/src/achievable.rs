//! Achievable rates of the dithered modulo-lattice compress-and-forward
//! scheme, the local-decoding baseline, and their composite.
//!
//! Each lattice report carries the scheme's internal parameters: the MMSE
//! scaling `alpha`, the quantization distortions of both relays and the
//! equivalent-noise power `p_neq`. For the lattice schemes the reported rate
//! is always `max{½·log2(p_x / p_neq), 0}`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{half_log2_1p, Capacity, ChannelConfig, ScenarioCase};
use crate::registry::{Named, Registry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SchemeKind {
    /// Generic lattice compress-and-forward with independent per-relay quantization.
    LatticeCF,
    LocalDecode,
    CaseAEq,
    CaseBEq,
    CaseCClosedForm,
    CaseCDerived,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::LatticeCF => "lattice-cf",
            SchemeKind::LocalDecode => "local-decode",
            SchemeKind::CaseAEq => "case-a",
            SchemeKind::CaseBEq => "case-b",
            SchemeKind::CaseCClosedForm => "case-c-closed",
            SchemeKind::CaseCDerived => "case-c-derived",
        })
    }
}

/// Which entry of `min{P_X, α²·P_J}` set the second relay's distortion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MinBranch {
    /// Quantizing the modulo-reduced signal (variance `P_X`) is cheaper.
    Signal,
    /// Quantizing the scaled interference is cheaper.
    Interference,
}

/// Internal parameters of a lattice scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeParams {
    pub alpha: f64,
    pub p_d1: f64,
    pub p_d2: f64,
    /// Residual term of the equivalent noise that does not come from quantization.
    pub p_residual: f64,
    pub p_neq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AchievableReport {
    pub rate: f64,
    pub scheme: SchemeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<LatticeParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<MinBranch>,
    /// The relay indices were interchanged to obtain this rate.
    pub swapped: bool,
}

impl AchievableReport {
    fn local(rate: f64) -> Self {
        AchievableReport {
            rate,
            scheme: SchemeKind::LocalDecode,
            params: None,
            branch: None,
            swapped: false,
        }
    }
}

/// Variant of the Case C rate expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum CaseCVariant {
    /// The closed form stated with the scaling results (default).
    #[default]
    ClosedForm,
    /// The form reached by the Slepian-Wolf derivation with `α = 2P/(4P+2)`.
    Derived,
}

impl FromStr for CaseCVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(CaseCVariant::ClosedForm),
            "derived" => Ok(CaseCVariant::Derived),
            _ => Err(Error::UnknownName {
                kind: "case C variant",
                name: s.to_string(),
                available: "closed, derived".to_string(),
            }),
        }
    }
}

fn check_nonneg(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, v, "must be finite and nonnegative"))
    }
}

fn rate_from_neq(p_x: f64, p_neq: f64) -> f64 {
    if p_x == 0.0 {
        return 0.0;
    }
    let r = 0.5 * (p_x / p_neq).log2();
    if r > 0.0 {
        r
    } else {
        0.0
    }
}

/// Lattice scheme with `α = P/(P+1)`, shared by Cases A, B and the stated Case C form.
///
/// `p_neq = P/(P+1) + P/(2^(2C1)-1) + min{P, α²P_J}·2^(-2C2)`, which is
/// `α² + (1-α)²P + P_D1 + P_D2` at the MMSE choice of `α`.
fn single_noise_lattice(p_x: f64, p_j: f64, c1: Capacity, c2: Capacity, scheme: SchemeKind) -> AchievableReport {
    let alpha = p_x / (p_x + 1.0);
    let p_residual = alpha; // α²·1 + (1-α)²·P = P/(P+1)
    let p_d1 = if p_x == 0.0 { 0.0 } else { p_x * c1.inv_excess() };
    let scaled_interference = alpha * alpha * p_j;
    let (cap, branch) = if p_x <= scaled_interference {
        (p_x, MinBranch::Signal)
    } else {
        (scaled_interference, MinBranch::Interference)
    };
    let p_d2 = cap * c2.neg_exp2();
    let p_neq = p_residual + p_d1 + p_d2;
    AchievableReport {
        rate: rate_from_neq(p_x, p_neq),
        scheme,
        params: Some(LatticeParams {
            alpha,
            p_d1,
            p_d2,
            p_residual,
            p_neq,
        }),
        branch: Some(branch),
        swapped: false,
    }
}

/// Case A rate: `max{½·log2((1+P)/(1 + min{1+P, P_J·P/(P+1)}·2^(-2C2))), 0}`.
pub fn achievable_case_a(p_x: f64, p_j: f64, c2: Capacity) -> Result<AchievableReport> {
    check_nonneg("p_x", p_x)?;
    check_nonneg("p_j", p_j)?;
    Ok(single_noise_lattice(p_x, p_j, Capacity::Infinite, c2, SchemeKind::CaseAEq))
}

/// Case B rate with a finite first link.
///
/// Equals `max{½·log2((1+P)(2^(2C1)-1) / (P + 2^(2C1) + min{1+P, P_J·P/(P+1)}·2^(-2C2)(2^(2C1)-1))), 0}`.
pub fn achievable_case_b(p_x: f64, p_j: f64, c1: Capacity, c2: Capacity) -> Result<AchievableReport> {
    check_nonneg("p_x", p_x)?;
    check_nonneg("p_j", p_j)?;
    Ok(single_noise_lattice(p_x, p_j, c1, c2, SchemeKind::CaseBEq))
}

fn case_c_oriented(p_x: f64, p_j: f64, c1: Capacity, c2: Capacity, variant: CaseCVariant) -> AchievableReport {
    match variant {
        CaseCVariant::ClosedForm => single_noise_lattice(p_x, p_j, c1, c2, SchemeKind::CaseCClosedForm),
        CaseCVariant::Derived => {
            let alpha = 2.0 * p_x / (4.0 * p_x + 2.0);
            let p_d1 = if p_x == 0.0 { 0.0 } else { p_x * c1.inv_excess() };
            let sum_load = 4.0 * p_j + 2.0 + p_d1;
            let (cap, branch) = if p_x <= sum_load {
                (p_x, MinBranch::Signal)
            } else {
                (sum_load, MinBranch::Interference)
            };
            let p_d2 = if cap == 0.0 { 0.0 } else { cap * c2.inv_excess() };
            let p_residual = 0.5;
            let p_neq = p_residual + p_d1 + p_d2;
            AchievableReport {
                rate: rate_from_neq(p_x, p_neq),
                scheme: SchemeKind::CaseCDerived,
                params: Some(LatticeParams {
                    alpha,
                    p_d1,
                    p_d2,
                    p_residual,
                    p_neq,
                }),
                branch: Some(branch),
                swapped: false,
            }
        }
    }
}

/// Case C rate, maximized over both assignments of the relay indices.
pub fn achievable_case_c(
    p_x: f64,
    p_j: f64,
    c1: Capacity,
    c2: Capacity,
    variant: CaseCVariant,
) -> Result<AchievableReport> {
    check_nonneg("p_x", p_x)?;
    check_nonneg("p_j", p_j)?;
    let direct = case_c_oriented(p_x, p_j, c1, c2, variant);
    let mut swapped = case_c_oriented(p_x, p_j, c2, c1, variant);
    swapped.swapped = true;
    Ok(if swapped.rate > direct.rate { swapped } else { direct })
}

/// Decode at the relays treating the interferer as noise and forward bits.
pub fn local_decode_baseline(
    case: ScenarioCase,
    p_x: f64,
    p_j: f64,
    c1: Capacity,
    c2: Capacity,
) -> Result<AchievableReport> {
    check_nonneg("p_x", p_x)?;
    check_nonneg("p_j", p_j)?;
    let channel = half_log2_1p(p_x / (p_j + 1.0));
    let links = match case {
        ScenarioCase::CaseB => c1.bits(),
        ScenarioCase::CaseC => c1.bits() + c2.bits(),
        other => {
            return Err(Error::WrongCase {
                expected: "case B or case C",
                found: other.to_string(),
            })
        }
    };
    Ok(AchievableReport::local(links.min(channel)))
}

/// Lattice compress-and-forward for arbitrary gains.
///
/// Uses `α = (a-b)P/((a-b)²P + P_N1 + P_N2)` and lets each relay quantize its
/// own modulo-reduced signal (variance `P`) independently, so
/// `P_Di = P/(2^(2Ci)-1)` and
/// `p_neq = α²(P_N1+P_N2) + (1-α(a-b))²P + P_D1 + P_D2`.
pub fn lattice_cf_general(cfg: &ChannelConfig) -> Result<AchievableReport> {
    cfg.validate()?;
    let gain = cfg.a - cfg.b;
    let p_x = cfg.p_x;
    let noise = cfg.p_n1 + cfg.p_n2;
    let denom = gain * gain * p_x + noise;
    let alpha = if denom > 0.0 { gain * p_x / denom } else { 0.0 };
    let p_residual = alpha * alpha * noise + (1.0 - alpha * gain).powi(2) * p_x;
    let dist = |c: Capacity| if p_x == 0.0 { 0.0 } else { p_x * c.inv_excess() };
    let (p_d1, p_d2) = (dist(cfg.c1), dist(cfg.c2));
    let p_neq = p_residual + p_d1 + p_d2;
    Ok(AchievableReport {
        rate: rate_from_neq(p_x, p_neq),
        scheme: SchemeKind::LatticeCF,
        params: Some(LatticeParams {
            alpha,
            p_d1,
            p_d2,
            p_residual,
            p_neq,
        }),
        branch: None,
        swapped: false,
    })
}

/// A rate scheme selectable by name.
pub trait RateScheme: Named + Send + Sync {
    fn kind(&self) -> SchemeKind;
    fn supports(&self, cfg: &ChannelConfig) -> bool;
    fn evaluate(&self, cfg: &ChannelConfig) -> Result<AchievableReport>;
    /// Whether the scheme takes part in the default composite.
    fn in_composite(&self) -> bool {
        true
    }
}

macro_rules! scheme {
    ($ty:ident, $name:literal) => {
        pub struct $ty;
        impl Named for $ty {
            fn name(&self) -> &'static str {
                $name
            }
        }
    };
}

scheme!(CaseAScheme, "case-a");
scheme!(CaseBScheme, "case-b");
scheme!(LocalDecodeScheme, "local-decode");
scheme!(LatticeCfScheme, "lattice-cf");

pub struct CaseCScheme(pub CaseCVariant);

impl Named for CaseCScheme {
    fn name(&self) -> &'static str {
        match self.0 {
            CaseCVariant::ClosedForm => "case-c-closed",
            CaseCVariant::Derived => "case-c-derived",
        }
    }
}

impl RateScheme for CaseAScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::CaseAEq
    }
    fn supports(&self, cfg: &ChannelConfig) -> bool {
        cfg.classify() == Some(ScenarioCase::CaseA)
    }
    fn evaluate(&self, cfg: &ChannelConfig) -> Result<AchievableReport> {
        cfg.validate_case(ScenarioCase::CaseA)?;
        achievable_case_a(cfg.p_x, cfg.p_j, cfg.c2)
    }
}

impl RateScheme for CaseBScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::CaseBEq
    }
    fn supports(&self, cfg: &ChannelConfig) -> bool {
        cfg.classify() == Some(ScenarioCase::CaseB)
    }
    fn evaluate(&self, cfg: &ChannelConfig) -> Result<AchievableReport> {
        cfg.validate_case(ScenarioCase::CaseB)?;
        achievable_case_b(cfg.p_x, cfg.p_j, cfg.c1, cfg.c2)
    }
}

impl RateScheme for CaseCScheme {
    fn kind(&self) -> SchemeKind {
        match self.0 {
            CaseCVariant::ClosedForm => SchemeKind::CaseCClosedForm,
            CaseCVariant::Derived => SchemeKind::CaseCDerived,
        }
    }
    fn supports(&self, cfg: &ChannelConfig) -> bool {
        cfg.classify() == Some(ScenarioCase::CaseC)
    }
    fn evaluate(&self, cfg: &ChannelConfig) -> Result<AchievableReport> {
        cfg.validate_case(ScenarioCase::CaseC)?;
        achievable_case_c(cfg.p_x, cfg.p_j, cfg.c1, cfg.c2, self.0)
    }
    fn in_composite(&self) -> bool {
        self.0 == CaseCVariant::ClosedForm
    }
}

impl RateScheme for LocalDecodeScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::LocalDecode
    }
    fn supports(&self, cfg: &ChannelConfig) -> bool {
        matches!(cfg.classify(), Some(ScenarioCase::CaseB | ScenarioCase::CaseC))
    }
    fn evaluate(&self, cfg: &ChannelConfig) -> Result<AchievableReport> {
        let case = cfg
            .classify()
            .ok_or_else(|| Error::wrong_case("case B or case C", None))?;
        local_decode_baseline(case, cfg.p_x, cfg.p_j, cfg.c1, cfg.c2)
    }
}

impl RateScheme for LatticeCfScheme {
    fn kind(&self) -> SchemeKind {
        SchemeKind::LatticeCF
    }
    // Dominated by the case-specific forms in Cases A and B.
    fn supports(&self, cfg: &ChannelConfig) -> bool {
        !cfg.is_interference_relay()
    }
    fn evaluate(&self, cfg: &ChannelConfig) -> Result<AchievableReport> {
        lattice_cf_general(cfg)
    }
}

pub fn default_schemes() -> Registry<dyn RateScheme> {
    let mut reg: Registry<dyn RateScheme> = Registry::new("rate scheme");
    let entries: [Arc<dyn RateScheme>; 6] = [
        Arc::new(CaseAScheme),
        Arc::new(CaseBScheme),
        Arc::new(CaseCScheme(CaseCVariant::ClosedForm)),
        Arc::new(CaseCScheme(CaseCVariant::Derived)),
        Arc::new(LocalDecodeScheme),
        Arc::new(LatticeCfScheme),
    ];
    for e in entries {
        reg.register(e).expect("scheme names are unique");
    }
    reg
}

/// Maximum over the composite schemes of `registry` that support `cfg`.
///
/// Ties keep the earlier-registered scheme.
pub fn best_achievable_in(registry: &Registry<dyn RateScheme>, cfg: &ChannelConfig) -> Result<AchievableReport> {
    cfg.validate()?;
    let mut best: Option<AchievableReport> = None;
    for scheme in registry.iter().filter(|s| s.in_composite() && s.supports(cfg)) {
        let report = scheme.evaluate(cfg)?;
        if best.as_ref().is_none_or(|b| report.rate > b.rate) {
            best = Some(report);
        }
    }
    best.ok_or_else(|| Error::wrong_case("a configuration with an applicable scheme", cfg.classify()))
}

/// Best rate over the default schemes for `cfg`.
pub fn best_achievable(cfg: &ChannelConfig) -> Result<AchievableReport> {
    best_achievable_in(&default_schemes(), cfg)
}

/// Every supported scheme of the default registry, composite or not.
pub fn all_achievable(cfg: &ChannelConfig) -> Result<Vec<AchievableReport>> {
    default_schemes()
        .iter()
        .filter(|s| s.supports(cfg))
        .map(|s| s.evaluate(cfg))
        .collect()
}
