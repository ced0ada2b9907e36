//! Valuation profiles, bit accounting and auction formats.

mod ascending;
mod kernel;
mod ledger;
mod multi_unit;
mod profile;
mod simultaneous;
mod truthfulness;

pub use ascending::{
    ascending_auction, inclusion_rate_experiment, single_item_sample_size, AscendingConfig,
    InclusionStats, RoundState,
};
pub use kernel::{
    english_sim, matches_vcg, sealed_bid_sim, vcg_on, vcg_oracle, AuctionOutcome, SubAuction,
};
pub use ledger::{BitEvent, BitLedger, LedgerSnapshot};
pub use multi_unit::{
    estimate_bounds, multi_unit_auction, multi_unit_constant_m, partition, threshold_query,
    EstimatorState, MultiUnitConfig, MultiUnitOutcome, RoundPrices, RoundSummary,
};
pub use profile::{ValuationProfile, MAX_K};
pub use simultaneous::{
    multi_item_sample_size, simultaneous_additive, EncodingRound, MultiItemOutcome,
};
pub use truthfulness::{truthfulness_probe, utility, Deviation, ItemResults, ProbeReport};
