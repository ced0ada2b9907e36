//! Sampling approximations of facility-location mechanisms, the rank
//! distribution of a sample median, and auction formats that elicit close to
//! one bit per bidder.
//!
//! The crate is organised by subsystem:
//!
//! - [`facility`]: metric instances, the median and percentile mechanisms and
//!   their sampled counterparts.
//! - [`vandermonde`]: the exact and limiting rank distribution of a sample
//!   median, its moments and the numeric tables built from it.
//! - [`auction`]: valuation profiles, bit accounting, second-price
//!   simulators, the adaptive ascending auction, simultaneous multi-item and
//!   two-price multi-unit auctions.
//! - [`plurality`]: sampled plurality for single-minded voters.
//! - [`experiment`]: seed derivation, parallel trial runners and CSV output.
//! - [`acceptance`]: the reproducible experiment suite with pinned tolerances.

pub mod acceptance;
pub mod auction;
pub mod error;
pub mod experiment;
pub mod facility;
pub mod plurality;
pub mod vandermonde;

pub use error::{Error, Result};
