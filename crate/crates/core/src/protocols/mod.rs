//! Correlated party sequences and the three protocols built on them.

pub mod calibration;
pub mod liar;
pub mod secret_sharing;
pub mod sequences;
pub mod strangers;

pub use liar::{
    liar_adjudicate, liar_receive, liar_send, liar_send_fabricated, run_liar_round, LiarOutcome, LiarStrategy,
    LiarThresholds, Party, Reception, TritMessage, Verdict, VerdictReason, DEFAULT_SIGMA_BAND,
};
pub use secret_sharing::{rotated_order, secret_share_round, CheatRecord, CheatStrategy, Cheater, KeyOutcome, SharedKeyRound};
pub use sequences::{columns_are_permutations, generate_sequences, ColumnSource, PartySequence, SingletSource};
pub use strangers::{consistent_completions, strangers_assign, Assignment};
pub use calibration::{
    binomial_sigma, cheat_calibration, fabrication_calibration, liar_calibration, CheatCalibration, RateEstimate,
};
