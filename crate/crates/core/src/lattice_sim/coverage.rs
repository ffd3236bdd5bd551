//! Random-codebook covering of a Gaussian source.
//!
//! A source block `Y ~ N(0, σ²)^n` is covered when some codeword of an
//! i.i.d. `N(0, σ²+D)` codebook is jointly typical with it under the test
//! channel `U = Y + Z`, `Z ~ N(0, D)`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::rng::stream_rng;
use crate::error::{Error, Result};

/// Largest allowed `n · codebook_rate`.
pub const MAX_CODEBOOK_BITS: f64 = 24.0;

/// Default experiment: unit-variance source, test channel carrying a quarter bit.
pub const DEFAULT_BLOCK_LENGTH: usize = 16;
pub const DEFAULT_MUTUAL_INFORMATION: f64 = 0.25;
pub const DEFAULT_EPSILON: f64 = 0.47;
pub const DEFAULT_TRIALS: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageConfig {
    pub block_length: usize,
    pub codebook_rate: f64,
    pub source_variance: f64,
    pub test_channel_distortion: f64,
    pub typicality_epsilon: f64,
    pub trials: usize,
    pub seed: u64,
}

impl CoverageConfig {
    /// Default experiment with the codebook rate offset from `I(Y;U)` by `rate_offset` bits.
    pub fn with_rate_offset(rate_offset: f64, seed: u64) -> Self {
        let source_variance = 1.0;
        CoverageConfig {
            block_length: DEFAULT_BLOCK_LENGTH,
            codebook_rate: (DEFAULT_MUTUAL_INFORMATION + rate_offset).max(0.0),
            source_variance,
            test_channel_distortion: distortion_for_information(source_variance, DEFAULT_MUTUAL_INFORMATION),
            typicality_epsilon: DEFAULT_EPSILON,
            trials: DEFAULT_TRIALS,
            seed,
        }
    }

    /// `I(Y;U) = ½·log2((σ² + D)/D)`.
    pub fn mutual_information(&self) -> f64 {
        0.5 * (self.source_variance / self.test_channel_distortion).ln_1p() / std::f64::consts::LN_2
    }

    pub fn codebook_size(&self) -> u64 {
        (self.block_length as f64 * self.codebook_rate).exp2().round().max(1.0) as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_length == 0 {
            return Err(Error::Invalid("block length must be positive".into()));
        }
        for (name, v) in [
            ("source_variance", self.source_variance),
            ("test_channel_distortion", self.test_channel_distortion),
            ("typicality_epsilon", self.typicality_epsilon),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, v, "must be positive and finite"));
            }
        }
        if !(self.codebook_rate >= 0.0) {
            return Err(Error::param("codebook_rate", self.codebook_rate, "must be nonnegative"));
        }
        let bits = self.block_length as f64 * self.codebook_rate;
        if !(bits <= MAX_CODEBOOK_BITS) {
            return Err(Error::Invalid(format!(
                "codebook of 2^{bits:.2} entries exceeds the 2^{MAX_CODEBOOK_BITS} cap"
            )));
        }
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be positive".into()));
        }
        Ok(())
    }
}

/// Test-channel distortion that makes `I(Y;U)` equal `bits`.
pub fn distortion_for_information(source_variance: f64, bits: f64) -> f64 {
    source_variance / (2.0 * bits * std::f64::consts::LN_2).exp_m1()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub coverage: f64,
    pub covered: usize,
    pub trials: usize,
    pub codebook_size: u64,
    pub mutual_information: f64,
    /// Fraction of source blocks that were typical on their own.
    pub source_typical_fraction: f64,
    /// `1 - (1 - 2^{-n(I+ε)})^{M}`, the coverage implied by the
    /// per-codeword success floor.
    pub coverage_floor: f64,
}

struct Typicality {
    n: f64,
    var_y: f64,
    var_u: f64,
    d: f64,
    eps: f64,
}

impl Typicality {
    // -(1/n) log2 p(·) - h(·) for a Gaussian is (log2 e / 2)(mean quadratic form - dim)
    fn excess(&self, quad_sum: f64, dim: f64) -> f64 {
        0.5 * std::f64::consts::LOG2_E * (quad_sum / self.n - dim)
    }

    fn marginal_ok(&self, sum_sq: f64, var: f64) -> bool {
        self.excess(sum_sq / var, 1.0).abs() < self.eps
    }

    fn joint_ok(&self, y: &[f64], u: &[f64]) -> bool {
        let mut quad = 0.0;
        let mut uu = 0.0;
        for (&yi, &ui) in y.iter().zip(u) {
            quad += (ui - yi).powi(2) / self.d + yi * yi / self.var_y;
            uu += ui * ui;
        }
        self.marginal_ok(uu, self.var_u) && self.excess(quad, 2.0).abs() < self.eps
    }
}

pub fn coverage_experiment(cfg: &CoverageConfig) -> Result<CoverageReport> {
    cfg.validate()?;
    let n = cfg.block_length;
    let m = cfg.codebook_size();
    let typ = Typicality {
        n: n as f64,
        var_y: cfg.source_variance,
        var_u: cfg.source_variance + cfg.test_channel_distortion,
        d: cfg.test_channel_distortion,
        eps: cfg.typicality_epsilon,
    };
    let sd_y = typ.var_y.sqrt();
    let sd_u = typ.var_u.sqrt();

    let outcomes: Vec<(bool, bool)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(cfg.seed, t);
            let y: Vec<f64> = (0..n).map(|_| sd_y * rng.sample::<f64, _>(StandardNormal)).collect();
            let y_typical = typ.marginal_ok(y.iter().map(|v| v * v).sum(), typ.var_y);
            if !y_typical {
                return (false, false);
            }
            // codewords are drawn lazily; the search stops at the first hit
            let mut u = vec![0.0; n];
            for _ in 0..m {
                for ui in u.iter_mut() {
                    *ui = sd_u * rng.sample::<f64, _>(StandardNormal);
                }
                if typ.joint_ok(&y, &u) {
                    return (true, true);
                }
            }
            (true, false)
        })
        .collect();

    let covered = outcomes.iter().filter(|o| o.1).count();
    let source_typical = outcomes.iter().filter(|o| o.0).count();
    let trials = cfg.trials;
    let info = cfg.mutual_information();
    let per_codeword = (-(n as f64) * (info + cfg.typicality_epsilon)).exp2();
    let coverage_floor = -(m as f64 * (-per_codeword).ln_1p()).exp_m1();
    Ok(CoverageReport {
        coverage: covered as f64 / trials as f64,
        covered,
        trials,
        codebook_size: m,
        mutual_information: info,
        source_typical_fraction: source_typical as f64 / trials as f64,
        coverage_floor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_information_is_quarter_bit() {
        let cfg = CoverageConfig::with_rate_offset(0.25, 0);
        assert!((cfg.mutual_information() - 0.25).abs() < 1e-14);
        assert_eq!(cfg.codebook_size(), 256);
        assert_eq!(CoverageConfig::with_rate_offset(-0.25, 0).codebook_size(), 1);
    }

    #[test]
    fn oversized_codebook_rejected() {
        let mut cfg = CoverageConfig::with_rate_offset(0.25, 0);
        cfg.codebook_rate = 1.6;
        assert!(coverage_experiment(&cfg).is_err());
    }

    #[test]
    fn degenerate_cases() {
        let mut tiny = CoverageConfig::with_rate_offset(0.0, 5);
        tiny.codebook_rate = 0.0;
        tiny.typicality_epsilon = 0.02;
        tiny.trials = 400;
        assert!(coverage_experiment(&tiny).unwrap().coverage < 0.05);

        let mut loose = CoverageConfig::with_rate_offset(0.0, 5);
        loose.codebook_rate = 0.0;
        loose.typicality_epsilon = 1e3;
        loose.trials = 200;
        assert_eq!(coverage_experiment(&loose).unwrap().coverage, 1.0);
    }

    #[test]
    fn deterministic() {
        let mut cfg = CoverageConfig::with_rate_offset(0.25, 42);
        cfg.trials = 64;
        assert_eq!(coverage_experiment(&cfg).unwrap(), coverage_experiment(&cfg).unwrap());
    }
}
