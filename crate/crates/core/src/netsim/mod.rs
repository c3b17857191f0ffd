//! Simulated multi-party environment: pairwise channels, a singlet source,
//! the distribute-and-test phase and end-to-end scenarios.

pub mod bus;
pub mod capture;
pub mod config;
pub mod scenario;
pub mod source;

pub use bus::{ChannelMessage, MessageBus, PartyNode, Payload, Role};
pub use capture::{capture_parties, CaptureOutcome};
pub use config::{AdversaryConfig, CaptureConfig, LiarConfig, ScenarioConfig, ScenarioKind, SecretSharingConfig};
pub use scenario::{run_scenario, Outcome, Record, Transcript};
pub use source::{
    distribute_and_test, intercept_resend_detection_probability, Distribution, Eavesdropper, RoundState, SourceRound,
    TestRecord, TestReport,
};
