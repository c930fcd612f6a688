//! Brute-force validators: Monte Carlo region properties and RSE, the
//! one-dimensional categorical-interval formulas, truncated-ball integrals
//! and the summation lemma behind the conservativeness argument.

mod cap;
mod interval;
mod region;

pub use cap::{cap_integrals, cap_slabs, lemma_check, CapGeometry, CapIntegrals, LemmaOutcome};
pub use interval::{rse_interval_actual, rse_interval_categorical, rse_interval_difference};
pub use region::{mc_region_props, mc_rse, McConfig, McEstimate, Proposal, RegionMcReport};
