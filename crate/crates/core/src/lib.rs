//! Secretary-style algorithms for online knapsack with item sizes in `{1, B}`.
//!
//! The crate covers the extended secretary algorithm and its boosted variant,
//! an ordinal algorithm that mixes a classic secretary with a multiple-choice
//! secretary, exact enumeration of selection probabilities, the scalar bounds
//! behind the boosting interval, a factor-revealing LP with its dual
//! certificate, and seeded Monte Carlo estimation.

pub mod algorithms;
pub mod analysis;
pub mod error;
pub mod instance;
pub mod lp;
pub mod montecarlo;
pub mod probability;
pub mod stream;

pub use algorithms::{
    boosted_extended_secretary, classic_on_instance, classic_secretary, extended_secretary,
    kleinberg_k_secretary, mixed_ordinal_1b, sample_length, BoostingConfig, PackedItem,
    SelectionOutcome, INV_E,
};
pub use error::{Error, Result};
pub use instance::{
    make_instance, optimal_packing, sample_order, ArrivalOrder, Instance, InstanceKind, Item,
    Packing, RankMaps,
};
