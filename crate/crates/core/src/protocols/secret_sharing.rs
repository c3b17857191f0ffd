//! Key reconstruction by public declaration, with an optional cheating agent.
//!
//! The dealer's value is the key digit. Agents declare their own values one by
//! one; the key is the only value nobody declared. An honest agent that hears
//! a declaration equal to its own still-private value stops the round.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::protocols::sequences::PartySequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheatStrategy {
    /// Uniformly random value that is neither its own nor already declared.
    RandomUndeclared,
    /// Always this value (falls back to its own value if that is the one given).
    Fixed(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cheater {
    pub party: usize,
    pub strategy: CheatStrategy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeyOutcome {
    Reconstructed { value: u8, correct: bool },
    /// `by` heard a declaration equal to its own value, or saw a repeated value.
    Aborted { by: usize, after_declaration: usize },
}

/// What happened at the cheater's turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheatRecord {
    pub party: usize,
    pub true_value: u8,
    pub declared_value: u8,
    /// 0-based position in the declaration order.
    pub position: usize,
    /// Honest agents declaring after the cheater.
    pub honest_after: usize,
    /// Parties whose values were still private at the cheater's turn,
    /// counting the dealer and the cheater itself.
    pub r_including_cheater: usize,
    /// Same count without the cheater.
    pub r_excluding_cheater: usize,
    /// Whether the first honest agent declaring after the cheater holds the false value.
    pub next_honest_holds: Option<bool>,
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedKeyRound {
    pub round: usize,
    pub dealer: usize,
    pub declared: Vec<(usize, u8)>,
    pub outcome: KeyOutcome,
    pub cheat: Option<CheatRecord>,
}

impl SharedKeyRound {
    pub fn aborted(&self) -> bool {
        matches!(self.outcome, KeyOutcome::Aborted { .. })
    }
}

/// `parties` rotated left by `round`, so each occupies the last slot once
/// every `parties.len()` rounds.
pub fn rotated_order(parties: &[usize], round: usize) -> Vec<usize> {
    let mut order = parties.to_vec();
    if !order.is_empty() {
        let k = round % order.len();
        order.rotate_left(k);
    }
    order
}

/// One reconstruction round at position `round` of the sequences.
///
/// `public` lists values already published by other parties (for example
/// captured parties); they are excluded from the value set.
pub fn secret_share_round<R: Rng + ?Sized>(
    sequences: &[PartySequence],
    round: usize,
    dealer: usize,
    declare_order: &[usize],
    cheater: Option<&Cheater>,
    public: &[u8],
    rng: &mut R,
) -> Result<SharedKeyRound> {
    let values: BTreeMap<usize, u8> = sequences
        .iter()
        .map(|s| {
            s.values
                .get(round)
                .map(|&v| (s.party, v))
                .ok_or(Error::RoundOutOfRange { round, len: s.len() })
        })
        .collect::<Result<_>>()?;
    let dealer_value = *values.get(&dealer).ok_or_else(|| Error::InvalidArgument(format!("unknown dealer {dealer}")))?;

    let mut expected: Vec<usize> = values.keys().copied().filter(|&p| p != dealer).collect();
    let mut given = declare_order.to_vec();
    given.sort_unstable();
    expected.sort_unstable();
    if given != expected {
        return Err(Error::InvalidArgument(format!("declare order {declare_order:?} must cover agents {expected:?}")));
    }
    if let Some(c) = cheater {
        if c.party == dealer || !values.contains_key(&c.party) {
            return Err(Error::InvalidArgument(format!("cheater {} must be an agent", c.party)));
        }
    }

    let n_total = values.len() + public.len();
    let universe: Vec<u8> = (0..n_total as u8).filter(|v| !public.contains(v)).collect();
    let is_cheater = |p: usize| cheater.is_some_and(|c| c.party == p);

    let mut declared: Vec<(usize, u8)> = Vec::with_capacity(declare_order.len());
    let mut cheat = None;
    for (pos, &p) in declare_order.iter().enumerate() {
        let own = values[&p];
        let v = if let Some(c) = cheater.filter(|c| c.party == p) {
            let candidates: Vec<u8> = universe
                .iter()
                .copied()
                .filter(|&v| v != own && !declared.iter().any(|&(_, d)| d == v))
                .collect();
            let v = match c.strategy {
                CheatStrategy::RandomUndeclared => candidates.choose(rng).copied().unwrap_or(own),
                CheatStrategy::Fixed(v) => v,
            };
            let later_honest: Vec<usize> = declare_order[pos + 1..].iter().copied().filter(|&q| !is_cheater(q)).collect();
            cheat = Some(CheatRecord {
                party: p,
                true_value: own,
                declared_value: v,
                position: pos,
                honest_after: later_honest.len(),
                r_including_cheater: later_honest.len() + 2,
                r_excluding_cheater: later_honest.len() + 1,
                next_honest_holds: later_honest.first().map(|q| values[q] == v),
                detected: false,
            });
            v
        } else {
            own
        };

        if declared.iter().any(|&(_, d)| d == v) {
            declared.push((p, v));
            return Ok(finish_abort(round, dealer, declared, cheat, p, pos));
        }
        declared.push((p, v));
        if let Some(&q) = declare_order[pos + 1..].iter().find(|&&q| !is_cheater(q) && values[&q] == v) {
            return Ok(finish_abort(round, dealer, declared, cheat, q, pos));
        }
    }

    let total: u32 = universe.iter().map(|&v| v as u32).sum();
    let sum: u32 = declared.iter().map(|&(_, v)| v as u32).sum();
    let value = total.checked_sub(sum).map(|v| v as u8).unwrap_or(u8::MAX);
    Ok(SharedKeyRound {
        round,
        dealer,
        declared,
        outcome: KeyOutcome::Reconstructed { value, correct: value == dealer_value },
        cheat,
    })
}

fn finish_abort(
    round: usize,
    dealer: usize,
    declared: Vec<(usize, u8)>,
    mut cheat: Option<CheatRecord>,
    by: usize,
    after_declaration: usize,
) -> SharedKeyRound {
    if let Some(c) = cheat.as_mut() {
        c.detected = true;
    }
    SharedKeyRound { round, dealer, declared, outcome: KeyOutcome::Aborted { by, after_declaration }, cheat }
}
