//! Capacity scaling of a diamond relay channel whose relays both observe an
//! interfering signal and forward to the destination over finite-rate links.
//!
//! The crate evaluates cut-set and modulo outer bounds, nested-lattice
//! compute-and-forward rates and local-decoding baselines, estimates their
//! pre-logs, and ships a Monte Carlo simulator of the scalar lattice scheme.

// Parameter checks use negated comparisons so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod achievable;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod lattice_sim;
pub mod model;
pub mod output;
pub mod registry;
pub mod scaling;

pub use achievable::{
    achievable_case_a, achievable_case_b, achievable_case_c, all_achievable, best_achievable,
    lattice_cf_general, local_decode_baseline, AchievableReport, CaseCVariant, RateScheme,
    SchemeKind,
};
pub use bounds::{
    bound_report, cutset_case_a, cutset_case_b, cutset_case_c, modulo_bound_case_c, BoundReport,
    OuterBound,
};
pub use error::{Error, Result};
pub use model::{gaussian_mi, make_preset, Capacity, ChannelConfig, ScenarioCase};
pub use registry::{Named, Registry};
