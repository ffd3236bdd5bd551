//! Monte Carlo simulation of the dithered modulo-lattice relaying scheme.

pub mod coverage;
pub mod interferer;
pub mod lattice;
pub mod rng;
pub mod stats;

pub use coverage::{coverage_experiment, CoverageConfig, CoverageReport};
pub use interferer::{default_interferers, InterfererModel};
pub use lattice::{
    crypto_lemma_check, crypto_lemma_check_with, run_lattice_sim, sw_rate_check, CryptoStats,
    DitherMode, ScalarLattice, SimConfig, SimGains, SimStats, SwCheck,
};
