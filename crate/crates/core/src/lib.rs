//! Fairness–efficiency frontiers of commodity taxes in monopolistic
//! screening markets: firm best responses, information-rent distributions
//! under correlated valuations, stochastic-order comparisons, and a
//! brute-force oracle for the dominance results.

pub mod cli;
pub mod couplings;
pub mod error;
pub mod frontier;
pub mod io;
pub mod marginals;
pub mod mechanism;
pub mod numeric;
pub mod oracle;
pub mod orders;

pub use error::{Error, Result};
