//! Non-centred Bayesian structural time series with shrinkage priors for
//! mixed-frequency nowcasting.
//!
//! The model couples a local-linear trend, written in non-centred form so
//! that the state standard deviations can be shrunk to zero, with a
//! high-dimensional regression block under a spike-and-slab or horseshoe
//! prior (optionally sparsified draw by draw). Monthly indicators enter the
//! quarterly equation through skip-sampling, and a release calendar drives
//! pseudo-real-time nowcast evaluation.
//!
//! Module map:
//! - [`linalg`]: banded matrices, banded Cholesky, precision-form sampling
//! - [`state`]: the non-centred trend block and the variance density-ratio test
//! - [`shrinkage`]: regression priors and post-hoc sparsification
//! - [`gibbs`]: the sampler loop, configuration, and draw storage
//! - [`data`]: transformations, skip-sampling, calendar, masking
//! - [`forecast`]: predictive draws, scoring, rolling evaluation
//! - [`sim`]: data-generating processes and the replication study

pub mod data;
pub mod error;
pub mod forecast;
pub mod gibbs;
pub mod linalg;
pub mod shrinkage;
pub mod sim;
pub mod state;

pub use error::{Error, Result};
pub use gibbs::{McmcConfig, ModelConfig, PosteriorDraws, PriorKind};
pub use state::{SavageDickey, StatePriorConfig, ThetaParams};
