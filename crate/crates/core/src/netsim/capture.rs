//! Parties lost to the enemy.
//!
//! If the captured parties publish their outcomes, each remaining column is a
//! permutation of the values nobody published, so the survivors hold pseudo
//! singlets of the smaller size and the protocols keep working among them.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::protocols::PartySequence;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaptureOutcome {
    pub survivors: Vec<PartySequence>,
    /// Sequences made public by the captured parties (empty unless they publish).
    pub published: Vec<PartySequence>,
    /// False when the captured parties kept silent: survivors cannot tell
    /// which values are missing, so their rounds are discarded.
    pub usable: bool,
}

impl CaptureOutcome {
    /// Published values at one position, i.e. the values excluded from the
    /// survivors' column there.
    pub fn public_at(&self, round: usize) -> Vec<u8> {
        self.published.iter().filter_map(|s| s.values.get(round).copied()).collect()
    }

    /// Values still private at `round`, ascending.
    pub fn remaining_values(&self, n: usize, round: usize) -> Vec<u8> {
        let public: BTreeSet<u8> = self.public_at(round).into_iter().collect();
        (0..n as u8).filter(|v| !public.contains(v)).collect()
    }
}

pub fn capture_parties(sequences: &[PartySequence], captured: &[usize], publish: bool) -> Result<CaptureOutcome> {
    let known: BTreeSet<usize> = sequences.iter().map(|s| s.party).collect();
    let captured: BTreeSet<usize> = captured.iter().copied().collect();
    if let Some(p) = captured.iter().find(|p| !known.contains(p)) {
        return Err(Error::InvalidArgument(format!("captured party {p} does not exist")));
    }
    let (taken, survivors): (Vec<_>, Vec<_>) = sequences.iter().cloned().partition(|s| captured.contains(&s.party));
    Ok(if publish {
        CaptureOutcome { survivors, published: taken, usable: true }
    } else {
        CaptureOutcome { survivors, published: Vec::new(), usable: false }
    })
}
