//! Subset selection for linear regression driven by p-values of the
//! likelihood-ratio statistic, alongside the classical penalized-likelihood
//! criteria, exact and greedy search over model families, and a seeded
//! Monte Carlo harness for consistency experiments.

pub mod criteria;
pub mod datagen;
pub mod search;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod regcore;
pub mod specfun;

pub use error::{Error, Result};
