//! Repeated position-auction toolkit: GSP/VCG mechanics, hindsight-regret
//! analysis, and estimators that recover bidders' private per-click values
//! from bid logs.
//!
//! The crate is organized around a small set of data types:
//!
//! - [`auction`] - one auction: allocation by bid rank, GSP/VCG payments,
//!   counterfactual replay of a single bidder's alternative bid.
//! - [`sequence`] - time-indexed bid logs and analysis windows.
//! - [`regret`] - actual/optimal fixed-bid utilities, regret reports, and
//!   regret-vs-value curves.
//! - [`estimators`] - the regret-minimization family plus the average-bid
//!   baseline and estimate combination.
//! - [`equilibrium`] - the two classic equilibrium-based estimators
//!   (VCG-like Nash equilibrium with minimal perturbations, and empirical
//!   best response) for GSP logs.
//! - [`sim`] - synthetic bidder populations with known ground-truth values.
//! - [`eval`] - accuracy metrics, rank-based bias correction, welfare
//!   normalization, and correlations.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate.

#![no_std]

extern crate alloc;

pub mod auction;
mod error;
pub mod equilibrium;
pub mod estimators;
pub mod eval;
pub mod grid;
pub mod regret;
pub mod sequence;
pub mod sim;

pub use auction::{AuctionOutcome, BidProfile, CtrProfile, Mechanism};
pub use error::Error;
pub use grid::Grid;
pub use sequence::{BidSequence, Window};
