//! Region accuracy for maximum-likelihood error regions.
//!
//! Closed-form size, credibility and region squared error (RSE/MRSE) of
//! likelihood-ratio regions under a uniform prior, Monte Carlo and
//! quadrature validators for those formulas, three quantum estimation
//! models, and adaptive protocols that choose measurement settings to
//! minimize the predicted MRSE.

pub mod adaptive;
pub mod error;
pub mod fisher;
pub mod inference;
pub mod mc;
pub mod models;
pub mod optimize;
pub mod quadrature;
pub mod region;
pub mod rng;
pub mod space;
pub mod specfn;

pub use error::{Error, Result};
pub use fisher::FisherMatrix;
pub use inference::{Batch, Dataset, MlOptions, MlResult};
pub use models::{ModelSpec, Outcome, Setting, StatisticalModel};
pub use region::{LambdaCrit, RegionProps, RegionSpec};
pub use space::ParamSpace;

/// Version tag embedded in JSON outputs.
pub const SCHEMA_VERSION: &str = "bayesreg/1";
