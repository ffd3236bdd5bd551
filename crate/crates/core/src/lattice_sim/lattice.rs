//! Scalar dithered modulo-lattice relaying.
//!
//! The transmitter sends `X = (V - U) mod L` for a message point `V` and a
//! shared dither `U`. Each relay scales its observation, reduces it modulo
//! the cell and adds a Gaussian test-channel distortion; the destination
//! forms `W1 - W2 + U mod L`, which equals `V + N_eq mod L` with no
//! interferer term left in `N_eq`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::interferer::default_interferers;
use super::rng::stream_rng;
use super::stats::{chi_square_uniform, correlation, CompensatedSum};
use crate::error::{Error, Result};
use crate::model::{Capacity, ScenarioCase};

const BATCH: u64 = 1 << 14;
pub const HISTOGRAM_BINS: usize = 64;

/// One-dimensional lattice `L·Z` with the centered cell `[-L/2, L/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLattice {
    pub cell: f64,
}

impl ScalarLattice {
    /// Cell whose uniform second moment equals `p_x`.
    pub fn for_power(p_x: f64) -> Self {
        ScalarLattice {
            cell: (12.0 * p_x).sqrt(),
        }
    }

    pub fn reduce(&self, x: f64) -> f64 {
        let l = self.cell;
        let mut m = x - l * (x / l + 0.5).floor();
        // rounding can land exactly on a boundary
        if m >= 0.5 * l {
            m -= l;
        } else if m < -0.5 * l {
            m += l;
        }
        m
    }

    pub fn uniform_point(&self, rng: &mut impl Rng) -> f64 {
        (rng.random::<f64>() - 0.5) * self.cell
    }

    fn bin(&self, x: f64) -> usize {
        let k = ((x / self.cell + 0.5) * HISTOGRAM_BINS as f64).floor();
        (k.max(0.0) as usize).min(HISTOGRAM_BINS - 1)
    }
}

/// Receive gains of the simulated channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SimGains {
    /// `a = 1`, `b = 0`: only the first relay hears the source.
    CaseB,
    /// `a = 1`, `b = -1`: the relays hear the source in anti-phase.
    CaseC,
    General { a: f64, b: f64 },
}

impl SimGains {
    pub fn ab(self) -> (f64, f64) {
        match self {
            SimGains::CaseB => (1.0, 0.0),
            SimGains::CaseC => (1.0, -1.0),
            SimGains::General { a, b } => (a, b),
        }
    }

    pub fn from_case(case: ScenarioCase) -> Result<Self> {
        match case {
            ScenarioCase::CaseA | ScenarioCase::CaseB => Ok(SimGains::CaseB),
            ScenarioCase::CaseC | ScenarioCase::FullCooperation => Ok(SimGains::CaseC),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub gains: SimGains,
    pub p_x: f64,
    pub p_j: f64,
    pub p_n1: f64,
    pub p_n2: f64,
    #[serde(serialize_with = "ser_capacity")]
    pub c1: Capacity,
    #[serde(serialize_with = "ser_capacity")]
    pub c2: Capacity,
    pub samples: u64,
    pub seed: u64,
    pub alpha_override: Option<f64>,
    /// Replaces the `(P_D1, P_D2)` allocation.
    pub distortion_override: Option<(f64, f64)>,
    pub interferer: String,
}

fn ser_capacity<S: serde::Serializer>(c: &Capacity, s: S) -> std::result::Result<S::Ok, S::Error> {
    c.serialize(s)
}

impl SimConfig {
    /// Canonical noise powers for the gain family, Gaussian interferer.
    pub fn new(gains: SimGains, p_x: f64, p_j: f64, c1: Capacity, c2: Capacity, samples: u64, seed: u64) -> Self {
        let (p_n1, p_n2) = match gains {
            SimGains::CaseB => (1.0, 0.0),
            _ => (1.0, 1.0),
        };
        SimConfig {
            gains,
            p_x,
            p_j,
            p_n1,
            p_n2,
            c1,
            c2,
            samples,
            seed,
            alpha_override: None,
            distortion_override: None,
            interferer: "gaussian".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.gains.ab();
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Invalid("gains must be finite".into()));
        }
        if !(self.p_x > 0.0) || !self.p_x.is_finite() {
            return Err(Error::param("p_x", self.p_x, "must be positive and finite"));
        }
        for (name, v) in [("p_j", self.p_j), ("p_n1", self.p_n1), ("p_n2", self.p_n2)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, v, "must be finite and nonnegative"));
            }
        }
        if self.samples == 0 {
            return Err(Error::Invalid("samples must be at least 1".into()));
        }
        if let Some(alpha) = self.alpha_override {
            if !alpha.is_finite() {
                return Err(Error::param("alpha", alpha, "must be finite"));
            }
        }
        match self.distortion_override {
            Some((d1, d2)) => {
                for (name, v) in [("p_d1", d1), ("p_d2", d2)] {
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(Error::param(name, v, "must be finite and nonnegative"));
                    }
                }
            }
            None => {
                for (name, c) in [("c1", self.c1), ("c2", self.c2)] {
                    if let Capacity::Finite(v) = c {
                        if !(v > 0.0) || !v.is_finite() {
                            return Err(Error::param(name, v, "an active quantizer needs a positive finite capacity"));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Combining coefficient and distortion powers used by the relays.
    pub fn allocation(&self) -> Result<(f64, f64, f64)> {
        self.validate()?;
        let (a, b) = self.gains.ab();
        let p = self.p_x;
        let g = a - b;
        let noise = self.p_n1 + self.p_n2;
        let alpha = self.alpha_override.unwrap_or_else(|| {
            let den = g * g * p + noise;
            if den == 0.0 {
                0.0
            } else {
                g * p / den
            }
        });
        if let Some((d1, d2)) = self.distortion_override {
            return Ok((alpha, d1, d2));
        }
        let p_d1 = p * self.c1.inv_excess();
        let p_d2 = match self.gains {
            SimGains::CaseB => p.min(alpha * alpha * (self.p_j + self.p_n2)) * self.c2.neg_exp2(),
            SimGains::CaseC => p.min(4.0 * self.p_j + noise + p_d1) * self.c2.inv_excess(),
            SimGains::General { .. } => p * self.c2.inv_excess(),
        };
        Ok((alpha, p_d1, p_d2))
    }

    pub fn lattice(&self) -> ScalarLattice {
        ScalarLattice::for_power(self.p_x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub empirical_var_neq: f64,
    pub analytic_var_neq: f64,
    pub identity_max_residual: f64,
    pub cell_size: f64,
    pub dither_uniformity_pvalue: f64,
    pub x_v_correlation: Option<f64>,
    pub rate_estimate: f64,
    pub analytic_rate: f64,
    pub alpha: f64,
    pub p_d1: f64,
    pub p_d2: f64,
    pub samples: u64,
    pub seed: u64,
    pub interferer: String,
}

#[derive(Debug, Clone, Default)]
struct Partial {
    neq: CompensatedSum,
    neq2: CompensatedSum,
    x: CompensatedSum,
    v: CompensatedSum,
    xx: CompensatedSum,
    vv: CompensatedSum,
    xv: CompensatedSum,
    max_residual: f64,
    bins: Vec<u64>,
}

impl Partial {
    fn new() -> Self {
        Partial {
            bins: vec![0; HISTOGRAM_BINS],
            ..Default::default()
        }
    }

    fn record_xv(&mut self, lattice: &ScalarLattice, x: f64, v: f64) {
        self.x.add(x);
        self.v.add(v);
        self.xx.add(x * x);
        self.vv.add(v * v);
        self.xv.add(x * v);
        self.bins[lattice.bin(x)] += 1;
    }

    fn merge(&mut self, other: &Partial) {
        for (a, b) in [
            (&mut self.neq, &other.neq),
            (&mut self.neq2, &other.neq2),
            (&mut self.x, &other.x),
            (&mut self.v, &other.v),
            (&mut self.xx, &other.xx),
            (&mut self.vv, &other.vv),
            (&mut self.xv, &other.xv),
        ] {
            a.merge(b);
        }
        self.max_residual = self.max_residual.max(other.max_residual);
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += b;
        }
    }

    fn correlation(&self, n: f64) -> Option<f64> {
        correlation(
            n,
            self.x.value(),
            self.v.value(),
            self.xx.value(),
            self.vv.value(),
            self.xv.value(),
        )
    }
}

/// Runs `per_batch` over fixed-size batches in parallel and merges the
/// partial results in batch order, so the outcome is thread-count independent.
fn run_batches<F>(samples: u64, per_batch: F) -> Result<Partial>
where
    F: Fn(u64, u64) -> Result<Partial> + Sync,
{
    let batches = samples.div_ceil(BATCH);
    let parts = (0..batches)
        .into_par_iter()
        .map(|k| per_batch(k * BATCH, ((k + 1) * BATCH).min(samples)))
        .collect::<Result<Vec<_>>>()?;
    let mut total = Partial::new();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

fn gaussian(rng: &mut impl Rng, power: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * power.sqrt()
}

pub fn run_lattice_sim(cfg: &SimConfig) -> Result<SimStats> {
    let (alpha, p_d1, p_d2) = cfg.allocation()?;
    let interferer = default_interferers().get(&cfg.interferer)?;
    let lattice = cfg.lattice();
    let (a, b) = cfg.gains.ab();
    let signal_leak = 1.0 - alpha * (a - b);

    let total = run_batches(cfg.samples, |start, end| {
        let mut part = Partial::new();
        for i in start..end {
            let mut rng = stream_rng(cfg.seed, i);
            let v = lattice.uniform_point(&mut rng);
            let u = lattice.uniform_point(&mut rng);
            let x = lattice.reduce(v - u);
            let j = interferer.sample(&mut rng, cfg.p_j);
            let n1 = gaussian(&mut rng, cfg.p_n1);
            let n2 = gaussian(&mut rng, cfg.p_n2);
            let d1 = gaussian(&mut rng, p_d1);
            let d2 = gaussian(&mut rng, p_d2);

            let y1 = a * x + j + n1;
            let y2 = b * x + j + n2;
            let w1 = lattice.reduce(alpha * y1) + d1;
            let w2 = lattice.reduce(alpha * y2) + d2;
            let y_hat = lattice.reduce(w1 - w2 + u);

            let neq = alpha * (n1 - n2) + d1 - d2 - signal_leak * x;
            let target = lattice.reduce(v + neq);
            let residual = lattice.reduce(y_hat - target).abs();
            if !(residual.is_finite() && neq.is_finite() && y_hat.is_finite()) {
                return Err(Error::NonFinite(format!("sample {i} of seed {}", cfg.seed)));
            }
            part.neq.add(neq);
            part.neq2.add(neq * neq);
            part.max_residual = part.max_residual.max(residual);
            part.record_xv(&lattice, x, v);
        }
        Ok(part)
    })?;

    let n = cfg.samples as f64;
    let mean = total.neq.value() / n;
    let empirical_var_neq = total.neq2.value() / n - mean * mean;
    let analytic_var_neq =
        alpha * alpha * (cfg.p_n1 + cfg.p_n2) + signal_leak * signal_leak * cfg.p_x + p_d1 + p_d2;
    Ok(SimStats {
        empirical_var_neq,
        analytic_var_neq,
        identity_max_residual: total.max_residual,
        cell_size: lattice.cell,
        dither_uniformity_pvalue: chi_square_uniform(&total.bins).1,
        x_v_correlation: total.correlation(n),
        rate_estimate: (0.5 * (cfg.p_x / empirical_var_neq).log2()).max(0.0),
        analytic_rate: (0.5 * (cfg.p_x / analytic_var_neq).log2()).max(0.0),
        alpha,
        p_d1,
        p_d2,
        samples: cfg.samples,
        seed: cfg.seed,
        interferer: cfg.interferer.clone(),
    })
}

/// How message and dither are drawn in [`crypto_lemma_check_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum DitherMode {
    #[default]
    Standard,
    /// Every sample carries the same message point.
    ConstantMessage,
    /// `U = 0`, so `X = V`.
    NoDither,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CryptoStats {
    pub chi_square: f64,
    pub uniformity_pvalue: f64,
    /// `None` when `V` does not vary.
    pub x_v_correlation: Option<f64>,
    /// Three standard errors, `3/√samples`.
    pub correlation_threshold: f64,
    pub uniform: bool,
    pub independent: bool,
}

pub const UNIFORMITY_PVALUE_FLOOR: f64 = 0.001;

pub fn crypto_lemma_check(p_x: f64, samples: u64, seed: u64) -> Result<CryptoStats> {
    crypto_lemma_check_with(p_x, samples, seed, DitherMode::Standard)
}

pub fn crypto_lemma_check_with(p_x: f64, samples: u64, seed: u64, mode: DitherMode) -> Result<CryptoStats> {
    if !(p_x > 0.0) || !p_x.is_finite() {
        return Err(Error::param("p_x", p_x, "must be positive and finite"));
    }
    if samples < 100_000 {
        return Err(Error::Invalid(format!("crypto-lemma check needs at least 100000 samples, got {samples}")));
    }
    let lattice = ScalarLattice::for_power(p_x);
    let fixed_v = lattice.uniform_point(&mut stream_rng(seed, u64::MAX));
    let total = run_batches(samples, |start, end| {
        let mut part = Partial::new();
        for i in start..end {
            let mut rng = stream_rng(seed, i);
            let v = lattice.uniform_point(&mut rng);
            let u = lattice.uniform_point(&mut rng);
            let (v, u) = match mode {
                DitherMode::Standard => (v, u),
                DitherMode::ConstantMessage => (fixed_v, u),
                DitherMode::NoDither => (v, 0.0),
            };
            part.record_xv(&lattice, lattice.reduce(v - u), v);
        }
        Ok(part)
    })?;
    let n = samples as f64;
    let (chi_square, uniformity_pvalue) = chi_square_uniform(&total.bins);
    let x_v_correlation = total.correlation(n);
    let correlation_threshold = 3.0 / n.sqrt();
    Ok(CryptoStats {
        chi_square,
        uniformity_pvalue,
        x_v_correlation,
        correlation_threshold,
        uniform: uniformity_pvalue > UNIFORMITY_PVALUE_FLOOR,
        independent: x_v_correlation.is_none_or(|r| r.abs() < correlation_threshold),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwCheck {
    /// `½·log2(1 + min{P_X, α²(4P_J+P_N1+P_N2)+P_D1}/P_D2)`.
    pub required_rate: f64,
    pub c2: f64,
    pub satisfied: bool,
}

/// Rate needed to describe the second relay's quantized signal given the
/// first, checked against the second link. Only the accounting is verified;
/// no binning is simulated.
pub fn sw_rate_check(cfg: &SimConfig) -> Result<SwCheck> {
    if cfg.gains != SimGains::CaseC {
        return Err(Error::WrongCase {
            expected: "case C",
            found: format!("{:?} gains", cfg.gains),
        });
    }
    let (alpha, p_d1, p_d2) = cfg.allocation()?;
    let load = cfg.p_x.min(alpha * alpha * (4.0 * cfg.p_j + cfg.p_n1 + cfg.p_n2) + p_d1);
    let required_rate = if load == 0.0 {
        0.0
    } else if p_d2 == 0.0 {
        f64::INFINITY
    } else {
        0.5 * (load / p_d2).ln_1p() / std::f64::consts::LN_2
    };
    let c2 = cfg.c2.bits();
    Ok(SwCheck {
        required_rate,
        c2,
        satisfied: required_rate <= c2 + 1e-12 * (1.0 + c2),
    })
}
