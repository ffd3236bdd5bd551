//! Outer bounds on the achievable rate and the full-cooperation capacity.
//!
//! Every expression is evaluated in the log domain; `2^(2C)` is never formed.
//! A term `C + I` with an unlimited link is `+inf` and never binds.

use std::f64::consts::{E, PI};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{half_log2_1p, ChannelConfig, ScenarioCase};
use crate::registry::{Named, Registry};

/// One labeled term of a cut-set or other outer bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTerm {
    pub label: String,
    pub value: f64,
}

impl BoundTerm {
    fn new(label: &str, value: f64) -> Self {
        BoundTerm {
            label: label.to_string(),
            value,
        }
    }
}

/// All outer bounds that apply to a configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub terms: Vec<BoundTerm>,
    pub cutset_min: f64,
    /// Present for the Case C gain family with a nonzero interferer.
    pub modulo_bound: Option<f64>,
    /// Minimum over every applicable bound.
    pub binding: f64,
}

fn min_of(terms: &[BoundTerm]) -> f64 {
    terms.iter().map(|t| t.value).fold(f64::INFINITY, f64::min)
}

impl BoundReport {
    fn from_cutset(terms: Vec<BoundTerm>) -> Self {
        let cutset_min = min_of(&terms);
        BoundReport {
            terms,
            cutset_min,
            modulo_bound: None,
            binding: cutset_min,
        }
    }
}

/// `I(X;Y1)` with the interferer treated as noise, `½·log2(1 + P_X/(P_J+1))`.
fn interfered_mi(p_x: f64, p_j: f64) -> f64 {
    half_log2_1p(p_x / (p_j + 1.0))
}

/// Cut-set bound for Case A: `min{C2 + I(X;Y1), I(X;Y1|J)}`.
pub fn cutset_case_a(cfg: &ChannelConfig) -> Result<BoundReport> {
    cfg.validate_case(ScenarioCase::CaseA)?;
    Ok(BoundReport::from_cutset(vec![
        BoundTerm::new("C2 + I(X;Y1)", cfg.c2.bits() + interfered_mi(cfg.p_x, cfg.p_j)),
        BoundTerm::new("I(X;Y1|J)", half_log2_1p(cfg.p_x)),
    ]))
}

/// Cut-set bound for Case B: `min{C1, C2 + I(X;Y1), I(X;Y1|Y2)}`.
///
/// Accepts Case A configurations too, where the `C1` term is unlimited.
pub fn cutset_case_b(cfg: &ChannelConfig) -> Result<BoundReport> {
    cfg.validate()?;
    if !cfg.is_interference_relay() {
        return Err(Error::wrong_case("case A/B gains", cfg.classify()));
    }
    Ok(BoundReport::from_cutset(vec![
        BoundTerm::new("C1", cfg.c1.bits()),
        BoundTerm::new("C2 + I(X;Y1)", cfg.c2.bits() + interfered_mi(cfg.p_x, cfg.p_j)),
        BoundTerm::new("I(X;Y1|Y2)", half_log2_1p(cfg.p_x)),
    ]))
}

/// Cut-set bound for Case C:
/// `min{C1 + C2, C1 + I(X;Y2), C2 + I(X;Y1), I(X;Y1,Y2)}`.
pub fn cutset_case_c(cfg: &ChannelConfig) -> Result<BoundReport> {
    cfg.validate()?;
    if !cfg.is_two_interfered() {
        return Err(Error::wrong_case("case C gains", cfg.classify()));
    }
    let single = interfered_mi(cfg.p_x, cfg.p_j);
    Ok(BoundReport::from_cutset(vec![
        BoundTerm::new("C1 + C2", cfg.c1.bits() + cfg.c2.bits()),
        BoundTerm::new("C1 + I(X;Y2)", cfg.c1.bits() + single),
        BoundTerm::new("C2 + I(X;Y1)", cfg.c2.bits() + single),
        BoundTerm::new("I(X;Y1,Y2)", full_cooperation_capacity(cfg.p_x)),
    ]))
}

/// `¼·log2(8πe)`, the lattice-shaping constant of the modulo bound.
pub fn modulo_constant() -> f64 {
    0.25 * (8.0 * PI * E).log2()
}

/// Modulo outer bound for Case C:
/// `½(C1 + C2 + ½·log2(1 + P_X/P_J)) + ¼·log2(8πe)`.
pub fn modulo_bound_case_c(cfg: &ChannelConfig) -> Result<f64> {
    cfg.validate()?;
    if !cfg.is_two_interfered() {
        return Err(Error::wrong_case("case C gains", cfg.classify()));
    }
    if cfg.p_j <= 0.0 {
        return Err(Error::param("p_j", cfg.p_j, "modulo bound needs a nonzero interferer"));
    }
    let links = cfg.c1.bits() + cfg.c2.bits();
    Ok(0.5 * (links + half_log2_1p(cfg.p_x / cfg.p_j)) + modulo_constant())
}

/// Capacity with both receptions available, `½·log2(1 + 2 P_X)`.
pub fn full_cooperation_capacity(p_x: f64) -> f64 {
    half_log2_1p(2.0 * p_x)
}

/// An outer bound family selectable by name.
pub trait OuterBound: Named + Send + Sync {
    fn supports(&self, cfg: &ChannelConfig) -> bool;
    fn terms(&self, cfg: &ChannelConfig) -> Result<Vec<BoundTerm>>;
}

pub struct CutSetBound;

impl Named for CutSetBound {
    fn name(&self) -> &'static str {
        "cutset"
    }
}

impl OuterBound for CutSetBound {
    fn supports(&self, cfg: &ChannelConfig) -> bool {
        cfg.classify().is_some()
    }

    fn terms(&self, cfg: &ChannelConfig) -> Result<Vec<BoundTerm>> {
        let report = match cfg.classify() {
            Some(ScenarioCase::CaseA) => cutset_case_a(cfg)?,
            Some(ScenarioCase::CaseB) => cutset_case_b(cfg)?,
            Some(ScenarioCase::CaseC | ScenarioCase::FullCooperation) => cutset_case_c(cfg)?,
            None => return Err(Error::wrong_case("a canonical case", None)),
        };
        Ok(report.terms)
    }
}

pub struct ModuloBound;

impl Named for ModuloBound {
    fn name(&self) -> &'static str {
        "modulo"
    }
}

impl OuterBound for ModuloBound {
    fn supports(&self, cfg: &ChannelConfig) -> bool {
        cfg.is_two_interfered() && cfg.p_j > 0.0
    }

    fn terms(&self, cfg: &ChannelConfig) -> Result<Vec<BoundTerm>> {
        Ok(vec![BoundTerm::new("modulo", modulo_bound_case_c(cfg)?)])
    }
}

pub fn default_bounds() -> Registry<dyn OuterBound> {
    let mut reg: Registry<dyn OuterBound> = Registry::new("outer bound");
    reg.register(Arc::new(CutSetBound)).expect("fresh registry");
    reg.register(Arc::new(ModuloBound)).expect("fresh registry");
    reg
}

/// Evaluates every registered bound that applies to `cfg`.
pub fn evaluate_bounds(registry: &Registry<dyn OuterBound>, cfg: &ChannelConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let mut terms = Vec::new();
    let mut cutset_min = f64::INFINITY;
    let mut modulo_bound = None;
    for bound in registry.iter().filter(|b| b.supports(cfg)) {
        let t = bound.terms(cfg)?;
        let m = min_of(&t);
        match bound.name() {
            "cutset" => cutset_min = cutset_min.min(m),
            "modulo" => modulo_bound = Some(m),
            _ => {}
        }
        terms.extend(t);
    }
    if terms.is_empty() {
        return Err(Error::wrong_case("a canonical case", cfg.classify()));
    }
    let binding = min_of(&terms);
    Ok(BoundReport {
        terms,
        cutset_min,
        modulo_bound,
        binding,
    })
}

/// All applicable bounds from the default registry.
pub fn bound_report(cfg: &ChannelConfig) -> Result<BoundReport> {
    evaluate_bounds(&default_bounds(), cfg)
}
