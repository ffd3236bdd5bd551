//! Pre-log estimation, link-capacity regions, gap certificates and the
//! rate-versus-sum-capacity sweep.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::achievable::{
    achievable_case_a, achievable_case_b, achievable_case_c, best_achievable, CaseCVariant,
    SchemeKind,
};
use crate::bounds::{bound_report, full_cooperation_capacity, cutset_case_a, cutset_case_b, cutset_case_c, modulo_bound_case_c};
use crate::error::{Error, Result};
use crate::model::{half_log2_1p, make_preset, Capacity, ChannelConfig, ScenarioCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PrelogMethod {
    /// `R(P) / log2(P)` at the largest power.
    Ratio,
    /// Slope between the two largest powers of the grid.
    #[default]
    FiniteDifference,
}

impl FromStr for PrelogMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ratio" => Ok(PrelogMethod::Ratio),
            "finite-difference" | "finite_difference" | "fd" => Ok(PrelogMethod::FiniteDifference),
            _ => Err(Error::UnknownName {
                kind: "pre-log method",
                name: s.to_string(),
                available: "ratio, finite-difference".to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingEstimate {
    pub prelog: f64,
    /// `log2(P_X)` values at which the rate was sampled.
    pub exponent_grid: Vec<f64>,
    pub rate_samples: Vec<f64>,
    pub method: PrelogMethod,
}

/// Integer exponents `start..=end`, as used for `log2(P_X)` grids.
pub fn exponent_range(start: i32, end: i32) -> Vec<f64> {
    (start..=end).map(f64::from).collect()
}

/// Estimates `lim R / log2(P_X)` from samples of `rate_fn` at `P_X = 2^e`.
pub fn estimate_prelog<F>(rate_fn: F, exponents: &[f64], method: PrelogMethod) -> Result<ScalingEstimate>
where
    F: Fn(f64) -> f64,
{
    if exponents.is_empty() {
        return Err(Error::Invalid("exponent range is empty".into()));
    }
    let rates: Vec<f64> = exponents.iter().map(|&e| rate_fn(e.exp2())).collect();
    if let Some((e, r)) = exponents.iter().zip(&rates).find(|(_, r)| !r.is_finite()) {
        return Err(Error::NonFinite(format!("rate {r} at log2(P_X) = {e}")));
    }
    let n = rates.len();
    let prelog = match method {
        PrelogMethod::Ratio => {
            let e = exponents[n - 1];
            if e == 0.0 {
                return Err(Error::Invalid("ratio estimate needs log2(P_X) != 0".into()));
            }
            rates[n - 1] / e
        }
        PrelogMethod::FiniteDifference => {
            if n < 2 {
                return Err(Error::Invalid("finite-difference estimate needs two exponents".into()));
            }
            let de = exponents[n - 1] - exponents[n - 2];
            if de == 0.0 {
                return Err(Error::Invalid("repeated exponent".into()));
            }
            (rates[n - 1] - rates[n - 2]) / de
        }
    };
    Ok(ScalingEstimate {
        prelog,
        exponent_grid: exponents.to_vec(),
        rate_samples: rates,
        method,
    })
}

/// How the interferer power follows the transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Coupling {
    /// `P_J = P_X^k`.
    Power(f64),
    /// `P_J` held fixed.
    Fixed(f64),
}

impl Coupling {
    pub fn p_j(self, p_x: f64) -> f64 {
        match self {
            Coupling::Power(k) => p_x.powf(k),
            Coupling::Fixed(p) => p,
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coupling::Power(k) if *k == 1.0 => f.write_str("pj=px"),
            Coupling::Power(k) => write!(f, "pj=px^{k}"),
            Coupling::Fixed(p) => write!(f, "pj={p}"),
        }
    }
}

impl FromStr for Coupling {
    type Err = Error;
    /// Accepts `pj=px`, `pj=px^0.5` and `pj=1e4`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("cannot parse coupling '{s}' (try pj=px, pj=px^0.5, pj=1e4)"));
        let rhs = s.trim().strip_prefix("pj=").ok_or_else(bad)?;
        if rhs == "px" {
            return Ok(Coupling::Power(1.0));
        }
        if let Some(k) = rhs.strip_prefix("px^") {
            return k.parse().map(Coupling::Power).map_err(|_| bad());
        }
        let p: f64 = rhs.parse().map_err(|_| bad())?;
        if p.is_finite() && p >= 0.0 {
            Ok(Coupling::Fixed(p))
        } else {
            Err(bad())
        }
    }
}

fn nonneg_log_half(x: f64) -> f64 {
    (0.5 * x.log2()).max(0.0)
}

/// Link capacities that the scaling results prescribe for rate `½·log2(P_X)`.
///
/// Case A: `C2 = ½·log2(P_X P_J/(P_X+P_J))`. Case B adds `C1 = ½·log2(P_X)`.
/// Case C uses the corner point of the required region with the larger `C1`.
pub fn prescribed_capacities(case: ScenarioCase, p_x: f64, p_j: f64) -> Result<(Capacity, Capacity)> {
    let interference_info = nonneg_log_half(p_x * p_j / (p_x + p_j));
    match case {
        ScenarioCase::CaseA => Ok((Capacity::Infinite, Capacity::Finite(interference_info))),
        ScenarioCase::CaseB => Ok((
            Capacity::Finite(nonneg_log_half(p_x)),
            Capacity::Finite(interference_info),
        )),
        ScenarioCase::CaseC => {
            let region = required_region_case_c(0.5 * p_x.log2().max(0.0), p_x, p_j)?;
            let (c1, c2) = region.p1();
            Ok((Capacity::Finite(c1), Capacity::Finite(c2)))
        }
        ScenarioCase::FullCooperation => Ok((Capacity::Infinite, Capacity::Infinite)),
    }
}

/// Pre-log of the achievable rate and of the outer bound under a coupling.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseScaling {
    pub case: ScenarioCase,
    pub coupling: String,
    pub capacity_factor: f64,
    pub achievable: ScalingEstimate,
    pub outer_bound: ScalingEstimate,
}

/// Scales the prescribed capacities by `capacity_factor` (1 for sufficiency,
/// below 1 for a necessity witness) and estimates both pre-logs.
pub fn case_scaling(
    case: ScenarioCase,
    coupling: Coupling,
    capacity_factor: f64,
    exponents: &[f64],
    method: PrelogMethod,
) -> Result<CaseScaling> {
    if case == ScenarioCase::FullCooperation {
        return Err(Error::Invalid("full cooperation has no link-capacity scaling".into()));
    }
    let config_at = |p_x: f64| -> Result<ChannelConfig> {
        let p_j = coupling.p_j(p_x);
        let (c1, c2) = prescribed_capacities(case, p_x, p_j)?;
        let (c1, c2) = (c1.scale(capacity_factor), c2.scale(capacity_factor));
        match case {
            ScenarioCase::CaseA => make_preset(case, p_x, p_j, None, Some(c2)),
            _ => make_preset(case, p_x, p_j, Some(c1), Some(c2)),
        }
    };
    // configs are valid for every p_x > 0; map failures to NaN so estimate_prelog reports them
    let achievable = estimate_prelog(
        |p_x| config_at(p_x).and_then(|c| best_achievable(&c)).map_or(f64::NAN, |r| r.rate),
        exponents,
        method,
    )?;
    let outer_bound = estimate_prelog(
        |p_x| config_at(p_x).and_then(|c| bound_report(&c)).map_or(f64::NAN, |b| b.binding),
        exponents,
        method,
    )?;
    Ok(CaseScaling {
        case,
        coupling: coupling.to_string(),
        capacity_factor,
        achievable,
        outer_bound,
    })
}

/// `a1·C1 + a2·C2 ≥ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HalfPlane {
    pub label: String,
    pub c1_weight: f64,
    pub c2_weight: f64,
    pub rhs: f64,
}

impl HalfPlane {
    pub fn contains(&self, c1: f64, c2: f64) -> bool {
        self.c1_weight * c1 + self.c2_weight * c2 >= self.rhs - 1e-12 * (1.0 + self.rhs.abs())
    }
}

/// Required `(C1, C2)` region for a target rate in Case C.
///
/// The region is `{C1 ≥ d, C2 ≥ d, C1 + C2 ≥ s}` intersected with the
/// nonnegative quadrant; `vertices` are its finite corners ordered by `C1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionPolygon {
    pub target_rate: f64,
    pub vertices: Vec<(f64, f64)>,
    pub constraints: Vec<HalfPlane>,
}

impl RegionPolygon {
    pub fn contains(&self, c1: f64, c2: f64) -> bool {
        c1 >= 0.0 && c2 >= 0.0 && self.constraints.iter().all(|h| h.contains(c1, c2))
    }

    /// Corner with the larger first-link capacity.
    pub fn p1(&self) -> (f64, f64) {
        *self.vertices.last().expect("region has a vertex")
    }

    /// Corner with the smaller first-link capacity.
    pub fn p2(&self) -> (f64, f64) {
        self.vertices[0]
    }
}

pub fn required_region_case_c(target_rate: f64, p_x: f64, p_j: f64) -> Result<RegionPolygon> {
    if !(p_j > 0.0) || !p_j.is_finite() {
        return Err(Error::param("p_j", p_j, "region needs a positive interferer power"));
    }
    if !(p_x >= 0.0) || !p_x.is_finite() {
        return Err(Error::param("p_x", p_x, "must be finite and nonnegative"));
    }
    if !(target_rate >= 0.0) || !target_rate.is_finite() {
        return Err(Error::param("target_rate", target_rate, "must be finite and nonnegative"));
    }
    let separation = half_log2_1p(p_x / p_j);
    let sum = (2.0 * target_rate - separation).max(target_rate).max(0.0);
    let each = (target_rate - separation).max(0.0);
    let mut vertices = vec![(each, sum - each), (sum - each, each)];
    if sum <= 2.0 * each {
        vertices = vec![(each, each)];
    }
    vertices.dedup();
    Ok(RegionPolygon {
        target_rate,
        vertices,
        constraints: vec![
            HalfPlane {
                label: "C1 + C2".into(),
                c1_weight: 1.0,
                c2_weight: 1.0,
                rhs: sum,
            },
            HalfPlane {
                label: "C1".into(),
                c1_weight: 1.0,
                c2_weight: 0.0,
                rhs: each,
            },
            HalfPlane {
                label: "C2".into(),
                c1_weight: 0.0,
                c2_weight: 1.0,
                rhs: each,
            },
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapRegime {
    /// Case A with `P_J > P_X` and `C2 = ½·log2(1+P_X)`.
    CaseAStrongInterferer,
    /// Case A with `1 ≤ P_J < P_X` and `C2 = ½·log2(P_J)`.
    CaseAWeakInterferer,
    /// Case B with `P_X > 1`, `C1 = ½·log2(1+P_X)`, `C2 = ½·log2(P_J)`.
    CaseB,
    /// Case C with `1 < P_J < P_X` against the modulo bound.
    CaseCModulo,
    /// Case C with `P_J > (1+P_X)²/P_X` against the cut-set bound.
    CaseCCutset,
}

impl GapRegime {
    /// Gap the regime is certified to stay below, in bits.
    pub fn claimed_bound(self) -> f64 {
        match self {
            GapRegime::CaseAStrongInterferer => 0.7925,
            GapRegime::CaseAWeakInterferer => 1.0,
            GapRegime::CaseB => 1.29,
            GapRegime::CaseCModulo => 2.816,
            GapRegime::CaseCCutset => 1.5,
        }
    }

    pub fn case(self) -> ScenarioCase {
        match self {
            GapRegime::CaseAStrongInterferer | GapRegime::CaseAWeakInterferer => ScenarioCase::CaseA,
            GapRegime::CaseB => ScenarioCase::CaseB,
            GapRegime::CaseCModulo | GapRegime::CaseCCutset => ScenarioCase::CaseC,
        }
    }

    pub fn regimes(case: ScenarioCase) -> &'static [GapRegime] {
        match case {
            ScenarioCase::CaseA => &[GapRegime::CaseAStrongInterferer, GapRegime::CaseAWeakInterferer],
            ScenarioCase::CaseB => &[GapRegime::CaseB],
            ScenarioCase::CaseC => &[GapRegime::CaseCModulo, GapRegime::CaseCCutset],
            ScenarioCase::FullCooperation => &[],
        }
    }

    pub fn contains(self, p_x: f64, p_j: f64) -> bool {
        match self {
            GapRegime::CaseAStrongInterferer => p_j > p_x,
            GapRegime::CaseAWeakInterferer => p_j < p_x && p_j >= 1.0,
            GapRegime::CaseB => p_x > 1.0 && p_j >= 1.0,
            GapRegime::CaseCModulo => p_j > 1.0 && p_j < p_x,
            GapRegime::CaseCCutset => p_x > 0.0 && p_j > (1.0 + p_x).powi(2) / p_x,
        }
    }

    fn bound_name(self) -> &'static str {
        match self {
            GapRegime::CaseCModulo => "modulo",
            _ => "cutset",
        }
    }

    /// Gap between the designated outer bound and the lattice rate at the
    /// regime's prescribed link capacities.
    pub fn gap(self, p_x: f64, p_j: f64) -> Result<f64> {
        if !self.contains(p_x, p_j) {
            return Err(Error::OutsideRegime(format!("{self:?} at P_X={p_x}, P_J={p_j}")));
        }
        let link_x = Capacity::Finite(half_log2_1p(p_x));
        let link_j = Capacity::Finite(0.5 * p_j.log2());
        let fin = Some;
        match self {
            GapRegime::CaseAStrongInterferer | GapRegime::CaseAWeakInterferer => {
                let c2 = if self == GapRegime::CaseAStrongInterferer { link_x } else { link_j };
                let cfg = make_preset(ScenarioCase::CaseA, p_x, p_j, None, fin(c2))?;
                Ok(cutset_case_a(&cfg)?.binding - achievable_case_a(p_x, p_j, c2)?.rate)
            }
            GapRegime::CaseB => {
                let cfg = make_preset(ScenarioCase::CaseB, p_x, p_j, fin(link_x), fin(link_j))?;
                Ok(cutset_case_b(&cfg)?.binding - achievable_case_b(p_x, p_j, link_x, link_j)?.rate)
            }
            GapRegime::CaseCModulo => {
                let cfg = make_preset(ScenarioCase::CaseC, p_x, p_j, fin(link_x), fin(link_j))?;
                let rate = achievable_case_c(p_x, p_j, link_x, link_j, CaseCVariant::ClosedForm)?.rate;
                Ok(modulo_bound_case_c(&cfg)? - rate)
            }
            GapRegime::CaseCCutset => {
                let cfg = make_preset(ScenarioCase::CaseC, p_x, p_j, fin(link_x), fin(link_x))?;
                let rate = achievable_case_c(p_x, p_j, link_x, link_x, CaseCVariant::ClosedForm)?.rate;
                Ok(cutset_case_c(&cfg)?.binding - rate)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapPoint {
    pub p_x: f64,
    pub p_j: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCertificate {
    pub case: ScenarioCase,
    pub regime: GapRegime,
    pub points: Vec<GapPoint>,
    pub max_gap: f64,
    pub bound_used: String,
    pub claimed_bound: f64,
    pub holds: bool,
}

impl GapCertificate {
    fn from_points(regime: GapRegime, points: Vec<GapPoint>) -> Self {
        let max_gap = points.iter().map(|p| p.gap).fold(f64::NEG_INFINITY, f64::max);
        let claimed_bound = regime.claimed_bound();
        GapCertificate {
            case: regime.case(),
            regime,
            holds: max_gap <= claimed_bound,
            points,
            max_gap,
            bound_used: regime.bound_name().to_string(),
            claimed_bound,
        }
    }
}

fn single_point_gap(case: ScenarioCase, p_x: f64, p_j: f64) -> Result<GapCertificate> {
    let regime = GapRegime::regimes(case)
        .iter()
        .copied()
        .find(|r| r.contains(p_x, p_j))
        .ok_or_else(|| Error::OutsideRegime(format!("{case} at P_X={p_x}, P_J={p_j}")))?;
    let gap = regime.gap(p_x, p_j)?;
    Ok(GapCertificate::from_points(regime, vec![GapPoint { p_x, p_j, gap }]))
}

pub fn gap_case_a(p_x: f64, p_j: f64) -> Result<GapCertificate> {
    single_point_gap(ScenarioCase::CaseA, p_x, p_j)
}

pub fn gap_case_b(p_x: f64, p_j: f64) -> Result<GapCertificate> {
    if !(p_x > 1.0) {
        return Err(Error::param("p_x", p_x, "case B gap regime needs P_X > 1"));
    }
    single_point_gap(ScenarioCase::CaseB, p_x, p_j)
}

pub fn gap_case_c(p_x: f64, p_j: f64) -> Result<GapCertificate> {
    single_point_gap(ScenarioCase::CaseC, p_x, p_j)
}

/// Decade-spaced grid `10^lo ..= 10^hi` with `per_decade` points per decade.
pub fn decade_grid(lo: i32, hi: i32, per_decade: u32) -> Vec<f64> {
    let steps = (hi - lo) as u32 * per_decade;
    (0..=steps)
        .map(|k| 10f64.powf(lo as f64 + k as f64 / per_decade as f64))
        .collect()
}

/// Certifies every regime of `case` over all grid pairs `(P_X, P_J)` inside it.
pub fn certify_gaps(case: ScenarioCase, grid: &[f64]) -> Result<Vec<GapCertificate>> {
    GapRegime::regimes(case)
        .iter()
        .map(|&regime| {
            let pairs: Vec<(f64, f64)> = grid
                .iter()
                .flat_map(|&p_x| grid.iter().map(move |&p_j| (p_x, p_j)))
                .filter(|&(p_x, p_j)| regime.contains(p_x, p_j))
                .collect();
            if pairs.is_empty() {
                return Err(Error::OutsideRegime(format!("no grid point falls in {regime:?}")));
            }
            let points = pairs
                .par_iter()
                .map(|&(p_x, p_j)| regime.gap(p_x, p_j).map(|gap| GapPoint { p_x, p_j, gap }))
                .collect::<Result<Vec<_>>>()?;
            Ok(GapCertificate::from_points(regime, points))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoosenessDemo {
    pub cutset_prelog: f64,
    pub modulo_prelog: f64,
    /// `(P_X, cut-set, modulo)` along the decade ladder, ascending.
    pub ladder: Vec<(f64, f64, f64)>,
}

/// Evaluates both Case C bounds at `P_J = √P_X`, `C1 = C2 = ¼·log2(P_X)` on a
/// decade ladder ending at `p_x`; pre-logs are the slopes of the last decade.
pub fn cutset_looseness_demo(p_x: f64) -> Result<LoosenessDemo> {
    if !(p_x > 1.0) || !p_x.is_finite() {
        return Err(Error::param("p_x", p_x, "must exceed 1"));
    }
    let decades = (p_x.log10().floor() as i32).clamp(1, 12);
    let ladder = (0..=decades)
        .rev()
        .map(|k| {
            let p = p_x / 10f64.powi(k);
            let c = Capacity::Finite((0.25 * p.log2()).max(0.0));
            let cfg = make_preset(ScenarioCase::CaseC, p, p.sqrt(), Some(c), Some(c))?;
            Ok((p, cutset_case_c(&cfg)?.binding, modulo_bound_case_c(&cfg)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = ladder.len();
    let (lo, hi) = (ladder[n - 2], ladder[n - 1]);
    let dlog = (hi.0 / lo.0).log2();
    Ok(LoosenessDemo {
        cutset_prelog: (hi.1 - lo.1) / dlog,
        modulo_prelog: (hi.2 - lo.2) / dlog,
        ladder,
    })
}

/// Lower bound on the information about the interferer the destination must
/// receive, `½·log2(P_X P_J/(P_X + P_J))`.
pub fn interference_info_lower_bound(p_x: f64, p_j: f64) -> Result<f64> {
    if !(p_x > 0.0) {
        return Err(Error::param("p_x", p_x, "must be positive"));
    }
    if !(p_j > 0.0) {
        return Err(Error::param("p_j", p_j, "must be positive"));
    }
    // P_X P_J/(P_X+P_J) written as a harmonic form to avoid overflow
    Ok(0.5 * (1.0 / (1.0 / p_x + 1.0 / p_j)).log2())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum SplitMode {
    /// Best of 1001 uniformly spaced splits `C1 ∈ [0, S]`.
    #[default]
    Optimal,
    /// `C1 = C2 = S/2`.
    Equal,
}

impl FromStr for SplitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(SplitMode::Optimal),
            "equal" => Ok(SplitMode::Equal),
            _ => Err(Error::UnknownName {
                kind: "split mode",
                name: s.to_string(),
                available: "optimal, equal".to_string(),
            }),
        }
    }
}

pub const SPLIT_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sum_capacity: f64,
    pub c1: f64,
    pub c2: f64,
    pub best_rate: f64,
    pub winning_scheme: SchemeKind,
    /// Cut-set bound maximized over the same splits.
    pub cutset: f64,
    pub modulo: Option<f64>,
}

fn split_config(case: ScenarioCase, p_x: f64, p_j: f64, c1: f64, c2: f64) -> Result<ChannelConfig> {
    let (c1, c2) = (Capacity::Finite(c1), Capacity::Finite(c2));
    make_preset(case, p_x, p_j, Some(c1), Some(c2))
}

/// Best rate as a function of the total link capacity `C1 + C2`.
pub fn sweep_sum_capacity(
    case: ScenarioCase,
    p_x: f64,
    p_j: f64,
    sums: &[f64],
    split: SplitMode,
) -> Result<Vec<SweepRow>> {
    if !matches!(case, ScenarioCase::CaseB | ScenarioCase::CaseC) {
        return Err(Error::WrongCase {
            expected: "case B or case C",
            found: case.to_string(),
        });
    }
    sums.par_iter()
        .map(|&sum| {
            if !(sum >= 0.0) || !sum.is_finite() {
                return Err(Error::param("sum_capacity", sum, "must be finite and nonnegative"));
            }
            let splits: Vec<f64> = match split {
                SplitMode::Optimal => (0..=SPLIT_SAMPLES)
                    .map(|k| sum * k as f64 / SPLIT_SAMPLES as f64)
                    .collect(),
                SplitMode::Equal => vec![0.5 * sum],
            };
            let mut best: Option<(f64, crate::achievable::AchievableReport)> = None;
            let mut cutset = f64::NEG_INFINITY;
            for c1 in splits {
                let cfg = split_config(case, p_x, p_j, c1, (sum - c1).max(0.0))?;
                let report = best_achievable(&cfg)?;
                cutset = cutset.max(bound_report(&cfg)?.cutset_min);
                if best.as_ref().is_none_or(|(_, b)| report.rate > b.rate) {
                    best = Some((c1, report));
                }
            }
            let (c1, report) = best.expect("at least one split");
            let modulo = if case == ScenarioCase::CaseC && p_j > 0.0 {
                Some(modulo_bound_case_c(&split_config(case, p_x, p_j, c1, sum - c1)?)?)
            } else {
                None
            };
            Ok(SweepRow {
                sum_capacity: sum,
                c1,
                c2: sum - c1,
                best_rate: report.rate,
                winning_scheme: report.scheme,
                cutset,
                modulo,
            })
        })
        .collect()
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Distance in bits kept from each breakpoint when fitting the two slopes;
/// the curve bends over an O(1)-bit neighbourhood of each corner.
pub const BREAKPOINT_MARGIN_BITS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepShape {
    /// `½·log2(P_X/P_J)`, end of the local-decoding segment.
    pub lower_breakpoint: f64,
    /// `½·log2(P_X P_J)`, beyond which the rate saturates.
    pub upper_breakpoint: f64,
    pub ceiling: f64,
    pub slope_below: Option<f64>,
    pub slope_between: Option<f64>,
    /// `ceiling - rate` at the largest swept sum beyond the upper breakpoint.
    pub saturation_gap: Option<f64>,
}

/// Fits the piecewise slopes of a sweep produced by [`sweep_sum_capacity`].
///
/// The ceiling is the rate with unlimited links: `½·log2(1+P_X)` in Case B
/// and the full-cooperation capacity in Case C.
pub fn analyze_sweep(rows: &[SweepRow], case: ScenarioCase, p_x: f64, p_j: f64) -> SweepShape {
    let ceiling = match case {
        ScenarioCase::CaseC | ScenarioCase::FullCooperation => full_cooperation_capacity(p_x),
        _ => half_log2_1p(p_x),
    };
    let lower = 0.5 * (p_x / p_j).log2();
    let upper = 0.5 * (p_x * p_j).log2();
    let pts = |lo: f64, hi: f64| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.sum_capacity >= lo && r.sum_capacity <= hi)
            .map(|r| (r.sum_capacity, r.best_rate))
            .collect()
    };
    let saturation_gap = rows
        .iter()
        .filter(|r| r.sum_capacity > upper)
        .max_by(|a, b| a.sum_capacity.total_cmp(&b.sum_capacity))
        .map(|r| ceiling - r.best_rate);
    SweepShape {
        lower_breakpoint: lower,
        upper_breakpoint: upper,
        ceiling,
        slope_below: fit_slope(&pts(0.0, lower - BREAKPOINT_MARGIN_BITS)),
        slope_between: fit_slope(&pts(lower + BREAKPOINT_MARGIN_BITS, upper - BREAKPOINT_MARGIN_BITS)),
        saturation_gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn prelog_of_trivial_functions() {
        let grid = exponent_range(10, 40);
        let half = estimate_prelog(|p| 0.5 * p.log2(), &grid, PrelogMethod::FiniteDifference).unwrap();
        assert_relative_eq!(half.prelog, 0.5, max_relative = 1e-12);
        let ratio = estimate_prelog(|p| 0.5 * p.log2(), &grid, PrelogMethod::Ratio).unwrap();
        assert_relative_eq!(ratio.prelog, 0.5, max_relative = 1e-12);
        let flat = estimate_prelog(|_| 3.0, &grid, PrelogMethod::FiniteDifference).unwrap();
        assert_eq!(flat.prelog, 0.0);
        assert!(estimate_prelog(|_| f64::NAN, &grid, PrelogMethod::Ratio).is_err());
        assert!(estimate_prelog(|_| 1.0, &[], PrelogMethod::Ratio).is_err());
        assert!(estimate_prelog(|_| 1.0, &[3.0], PrelogMethod::FiniteDifference).is_err());
    }

    #[test]
    fn case_a_prelog_with_matched_interference_link() {
        let grid = exponent_range(10, 40);
        let s = case_scaling(ScenarioCase::CaseA, Coupling::Power(1.0), 1.0, &grid, PrelogMethod::FiniteDifference)
            .unwrap();
        assert!((s.achievable.prelog - 0.5).abs() <= 0.02, "{}", s.achievable.prelog);
    }

    #[test]
    fn coupling_parse() {
        assert_eq!("pj=px".parse::<Coupling>().unwrap(), Coupling::Power(1.0));
        assert_eq!("pj=px^0.5".parse::<Coupling>().unwrap(), Coupling::Power(0.5));
        assert_eq!("pj=1e4".parse::<Coupling>().unwrap(), Coupling::Fixed(1e4));
        assert!("px=pj".parse::<Coupling>().is_err());
        assert!("pj=-3".parse::<Coupling>().is_err());
    }

    #[test]
    fn region_examples() {
        let p = 2f64.powi(30);
        let r = 0.5 * p.log2();
        let region = required_region_case_c(r, p, p).unwrap();
        // sum rhs = log2 P - ½, per-link rhs = ½ log2 P - ½
        assert_relative_eq!(region.constraints[0].rhs, 30.0 - 0.5, max_relative = 1e-14);
        assert_relative_eq!(region.constraints[1].rhs / 30.0, 0.5 - 0.5 / 30.0, max_relative = 1e-14);
        assert_eq!(region.p1(), (15.0, 14.5));
        assert_eq!(region.p2(), (14.5, 15.0));

        let zero = required_region_case_c(0.0, 10.0, 3.0).unwrap();
        assert_eq!(zero.vertices, vec![(0.0, 0.0)]);
        assert!(zero.contains(0.0, 0.0) && zero.contains(7.0, 0.0));

        let low = required_region_case_c(0.5, 100.0, 1.0).unwrap();
        assert_eq!(low.constraints[1].rhs, 0.0);
        assert_eq!(low.constraints[0].rhs, 0.5);
        assert_eq!(low.vertices, vec![(0.0, 0.5), (0.5, 0.0)]);

        assert!(required_region_case_c(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn corner_points_achieve_target_prelog() {
        let grid = exponent_range(10, 40);
        for corner in 0..2 {
            let rate = |p_x: f64| {
                let region = required_region_case_c(0.5 * p_x.log2(), p_x, p_x).unwrap();
                let (c1, c2) = if corner == 0 { region.p1() } else { region.p2() };
                let cfg = make_preset(ScenarioCase::CaseC, p_x, p_x, Some(Capacity::Finite(c1)),
                                      Some(Capacity::Finite(c2))).unwrap();
                best_achievable(&cfg).unwrap().rate
            };
            let est = estimate_prelog(rate, &grid, PrelogMethod::FiniteDifference).unwrap();
            assert!((est.prelog - 0.5).abs() <= 0.02, "corner {corner}: {}", est.prelog);
        }
    }

    #[test]
    fn gap_examples() {
        let a1 = gap_case_a(100.0, 1000.0).unwrap();
        assert_eq!(a1.regime, GapRegime::CaseAStrongInterferer);
        assert!(a1.holds && a1.max_gap <= 0.7925);
        let a2 = gap_case_a(1000.0, 100.0).unwrap();
        assert_eq!(a2.regime, GapRegime::CaseAWeakInterferer);
        assert!(a2.max_gap <= 1.0);
        assert!(gap_case_a(50.0, 50.0).is_err());

        assert!(gap_case_b(1e4, 1e3).unwrap().max_gap <= 1.29);
        assert!(gap_case_b(1.0 + 1e-6, 1.0).unwrap().max_gap <= 1.29);
        assert!(gap_case_b(1e8, 1e8).unwrap().max_gap <= 1.29);
        assert!(gap_case_b(1.0, 5.0).is_err());

        let c1 = gap_case_c(1e6, 1e3).unwrap();
        assert_eq!(c1.regime, GapRegime::CaseCModulo);
        assert!(c1.max_gap <= 2.816);
        let c2 = gap_case_c(1e3, 1e7).unwrap();
        assert_eq!(c2.regime, GapRegime::CaseCCutset);
        assert!(c2.max_gap <= 1.5);
        assert!(gap_case_c(4.0, 2.0).unwrap().max_gap <= 2.816);
        assert!(gap_case_c(10.0, 11.0).is_err());
    }

    #[test]
    fn gap_sweep_along_diagonal() {
        let diag: Vec<f64> = decade_grid(1, 9, 5);
        let worst = diag
            .iter()
            .map(|&p| gap_case_a(p, p * 1.0001).unwrap().max_gap)
            .fold(0.0, f64::max);
        assert!(worst <= 1.0);
    }

    #[test]
    fn looseness_demo() {
        let d = cutset_looseness_demo(1e9).unwrap();
        assert!((d.cutset_prelog - 0.5).abs() <= 0.02, "{}", d.cutset_prelog);
        assert!(d.modulo_prelog < d.cutset_prelog - 0.05);
        let small = cutset_looseness_demo(2.0).unwrap();
        assert!(small.cutset_prelog.is_finite() && small.modulo_prelog.is_finite());
        assert!(cutset_looseness_demo(1.0).is_err());
    }

    #[test]
    fn interference_info_examples() {
        assert_relative_eq!(interference_info_lower_bound(8.0, 8.0).unwrap(), 1.0);
        assert_relative_eq!(interference_info_lower_bound(15.0, 15.0).unwrap(), 1.453_445_297_804_259, max_relative = 1e-12);
        assert_relative_eq!(interference_info_lower_bound(1e300, 64.0).unwrap(), 3.0, max_relative = 1e-12);
        assert!(interference_info_lower_bound(0.0, 1.0).is_err());
    }

    #[test]
    fn sweep_edges() {
        assert!(sweep_sum_capacity(ScenarioCase::CaseB, 1e8, 1e4, &[], SplitMode::Optimal).unwrap().is_empty());
        assert!(sweep_sum_capacity(ScenarioCase::CaseA, 1e8, 1e4, &[1.0], SplitMode::Optimal).is_err());
        let rows = sweep_sum_capacity(ScenarioCase::CaseC, 1e8, 1e4, &[0.0, 3.0, 12.0], SplitMode::Equal).unwrap();
        assert_eq!(rows[0].best_rate, 0.0);
        assert_eq!(rows[1].winning_scheme, SchemeKind::LocalDecode);
        for r in &rows {
            assert!(r.best_rate <= r.modulo.unwrap());
        }
    }

    #[test]
    fn sweep_shape_case_b() {
        let sums: Vec<f64> = (0..=160).map(|k| 0.25 * k as f64).collect();
        let rows = sweep_sum_capacity(ScenarioCase::CaseB, 1e8, 1e4, &sums, SplitMode::Optimal).unwrap();
        let shape = analyze_sweep(&rows, ScenarioCase::CaseB, 1e8, 1e4);
        assert!((shape.slope_below.unwrap() - 1.0).abs() <= 0.05);
        assert!((shape.slope_between.unwrap() - 0.5).abs() <= 0.05);
        assert!(shape.saturation_gap.unwrap().abs() <= 0.1);
    }

    #[test]
    fn fit_slope_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        assert_relative_eq!(fit_slope(&pts).unwrap(), 3.0, max_relative = 1e-12);
        assert!(fit_slope(&pts[..1]).is_none());
    }

    proptest! {
        #[test]
        fn region_is_convex(r in 0.0f64..30.0, lx in 0.0f64..9.0, lj in 0.0f64..9.0,
                            t1 in 0.0f64..40.0, t2 in 0.0f64..40.0, u1 in 0.0f64..40.0, u2 in 0.0f64..40.0) {
            let region = required_region_case_c(r, 10f64.powf(lx), 10f64.powf(lj)).unwrap();
            for &(c1, c2) in &region.vertices {
                prop_assert!(region.contains(c1, c2));
            }
            if region.contains(t1, t2) && region.contains(u1, u2) {
                prop_assert!(region.contains(0.5 * (t1 + u1), 0.5 * (t2 + u2)));
                // closed under componentwise increase
                prop_assert!(region.contains(t1 + 1.0, t2));
            }
        }
    }
}
