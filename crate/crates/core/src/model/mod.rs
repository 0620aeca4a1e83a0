//! Value distributions, auction instances, bid strategies, and the interim
//! quantities they induce.

mod distribution;
mod instance;
mod interim;
mod sample;
mod strategy;

pub use distribution::DistributionSpec;
pub use instance::AuctionInstance;
pub use interim::{
    conditional_win_probability, highest_value_probability, interim, threshold_quantile,
    win_probability, InterimQuantities,
};
pub use sample::{draw_outcome, outcome_from_values, sample_outcome, shard_rng, SampleOutcome};
pub use strategy::BidStrategy;
