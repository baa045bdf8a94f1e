//! Simulation and analysis of a two-seller market for perishable goods.
//!
//! Buyers choose between sellers with a logit rule driven by their
//! satisfaction, which is updated from the freshness and the price of the
//! product they bought. Sellers restock every sold item with a fresh one, and
//! the price of an item drops as it ages. Depending on the choice noise
//! (temperature) and on how much buyers care about price (greed), the market
//! settles into a symmetric, an asymmetric or an oscillatory phase.
//!
//! The crate is organised as
//!
//! - [`model`]: freshness, price, logit choice and satisfaction update,
//! - [`special`]: lower incomplete gamma, bracketed root finding, finite differences,
//! - [`agent`]: the stochastic agent-based engine,
//! - [`mean_field`]: stationary averages and the deterministic single-buyer reduction,
//! - [`phase`]: phase boundaries, order parameters, classification and sweeps,
//! - [`cli`]: configuration files, manifests and the `duopoly` subcommands.

// `!(x > 0.0)` style checks also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent;
pub mod cli;
pub mod error;
pub mod mean_field;
pub mod model;
pub mod phase;
pub mod series;
pub mod special;
pub mod svg;

pub use error::{Error, Result};
pub use model::ModelParams;
pub use series::{TimeSeries, TimeSeriesRow};
