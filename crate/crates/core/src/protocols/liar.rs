//! Three-party liar detection with trit messages and position lists.
//!
//! A sends a trit to B and C together with the positions where her sequence
//! holds it. B forwards to C his own message with his own position list, plus
//! the list he received from A. Honest lists from different parties never
//! intersect, and each honest list covers about a third of the positions.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::protocols::sequences::PartySequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Party::A => "A",
            Party::B => "B",
            Party::C => "C",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TritMessage {
    pub value: u8,
    pub positions: Vec<usize>,
}

impl TritMessage {
    pub fn new(value: u8, positions: Vec<usize>, length: usize) -> Result<Self> {
        if value > 2 {
            return Err(Error::InvalidArgument(format!("trit value {value}")));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) || positions.last().is_some_and(|&p| p >= length) {
            return Err(Error::InvalidArgument("positions must be strictly ascending and < L".into()));
        }
        Ok(TritMessage { value, positions })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiarThresholds {
    pub length: usize,
    /// Rule II: shortest acceptable single list.
    pub list_min: f64,
    /// Combined length of B's two lists at or above which A is accused.
    pub pair_min: f64,
}

impl LiarThresholds {
    /// Single-list cut `L/3 - band * sqrt(L * 2/9)` and pair cut `L/2`.
    pub fn new(length: usize, sigma_band: f64) -> Self {
        let l = length as f64;
        LiarThresholds {
            length,
            list_min: l / 3.0 - sigma_band * (l * 2.0 / 9.0).sqrt(),
            pair_min: l / 2.0,
        }
    }
}

pub const DEFAULT_SIGMA_BAND: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reception {
    Accept,
    /// The receiver holds the claimed value at `position` itself.
    Intersects { position: usize },
    TooShort { len: usize, min: f64 },
}

impl Reception {
    pub fn accepted(self) -> bool {
        self == Reception::Accept
    }
}

/// Honest message: every position where `sender` holds `value`.
pub fn liar_send(sender: &PartySequence, value: u8) -> TritMessage {
    TritMessage { value, positions: sender.positions_of(value) }
}

/// Honest list plus `k` positions where the sender does not hold `value`.
pub fn liar_send_fabricated<R: Rng + ?Sized>(sender: &PartySequence, value: u8, k: usize, rng: &mut R) -> TritMessage {
    let others: Vec<usize> = (0..sender.len()).filter(|&i| sender.values[i] != value).collect();
    let mut positions = sender.positions_of(value);
    positions.extend(others.choose_multiple(rng, k.min(others.len())));
    positions.sort_unstable();
    TritMessage { value, positions }
}

pub fn liar_receive(receiver: &PartySequence, msg: &TritMessage, thresholds: &LiarThresholds) -> Reception {
    if let Some(&position) = msg.positions.iter().find(|&&p| receiver.values.get(p) == Some(&msg.value)) {
        return Reception::Intersects { position };
    }
    if (msg.positions.len() as f64) < thresholds.list_min {
        return Reception::TooShort { len: msg.positions.len(), min: thresholds.list_min };
    }
    Reception::Accept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictReason {
    /// A list from the accused failed C's checks.
    RejectedList,
    /// B's two lists were compared against the pair threshold.
    CombinedLength,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub accused: Party,
    pub reason: VerdictReason,
    pub own_len: usize,
    pub relayed_len: usize,
    pub threshold: f64,
}

/// C's decision once A's and B's values disagree.
pub fn liar_adjudicate(
    from_a: &TritMessage,
    from_b_own: &TritMessage,
    from_b_relayed: &TritMessage,
    thresholds: &LiarThresholds,
) -> Result<Verdict> {
    if from_a.value == from_b_own.value && from_b_relayed.value == from_b_own.value {
        return Err(Error::NoConflict);
    }
    let own_len = from_b_own.positions.len();
    let relayed_len = from_b_relayed.positions.len();
    let accused = if (own_len + relayed_len) as f64 >= thresholds.pair_min { Party::A } else { Party::B };
    Ok(Verdict { accused, reason: VerdictReason::CombinedLength, own_len, relayed_len, threshold: thresholds.pair_min })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiarStrategy {
    Honest,
    /// A sends different trits to B and C, each with her genuine list.
    DishonestA,
    /// B relabels the value, splitting his own list for the new value across
    /// his own message and the "relayed" one.
    DishonestB,
    /// A pads her list (the same one to both receivers) with `k` positions
    /// where she does not hold the value.
    Fabricator { k: usize },
}

impl LiarStrategy {
    pub fn liar(self) -> Option<Party> {
        match self {
            LiarStrategy::Honest => None,
            LiarStrategy::DishonestA | LiarStrategy::Fabricator { .. } => Some(Party::A),
            LiarStrategy::DishonestB => Some(Party::B),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LiarOutcome {
    pub a_to_b: TritMessage,
    pub a_to_c: TritMessage,
    pub b_own: TritMessage,
    pub b_relayed: TritMessage,
    pub b_reception: Reception,
    pub c_receptions: [Reception; 3],
    /// Value C settles on when nothing is wrong.
    pub agreed: Option<u8>,
    pub verdict: Option<Verdict>,
}

/// One message exchange over sequences `[A, B, C]` with A intending to send `value`.
pub fn run_liar_round<R: Rng + ?Sized>(
    seqs: &[PartySequence; 3],
    value: u8,
    strategy: LiarStrategy,
    thresholds: &LiarThresholds,
    rng: &mut R,
) -> LiarOutcome {
    let [a, b, c] = seqs;
    let other = |v: u8, rng: &mut R| -> u8 { (v + rng.gen_range(1..=2)) % 3 };

    let (a_to_b, a_to_c) = match strategy {
        LiarStrategy::DishonestA => {
            let v2 = other(value, rng);
            (liar_send(a, value), liar_send(a, v2))
        }
        LiarStrategy::Fabricator { k } => {
            let padded = liar_send_fabricated(a, value, k, rng);
            (padded.clone(), padded)
        }
        _ => (liar_send(a, value), liar_send(a, value)),
    };
    let b_reception = liar_receive(b, &a_to_b, thresholds);

    let (b_own, b_relayed) = match strategy {
        LiarStrategy::DishonestB => {
            let fake = other(a_to_b.value, rng);
            let mine = b.positions_of(fake);
            let (mut own, mut relayed) = (Vec::new(), Vec::new());
            for (i, p) in mine.into_iter().enumerate() {
                if i % 2 == 0 { own.push(p) } else { relayed.push(p) }
            }
            (TritMessage { value: fake, positions: own }, TritMessage { value: fake, positions: relayed })
        }
        _ => (liar_send(b, a_to_b.value), a_to_b.clone()),
    };

    let c_receptions = [
        liar_receive(c, &a_to_c, thresholds),
        liar_receive(c, &b_own, thresholds),
        liar_receive(c, &b_relayed, thresholds),
    ];

    let rejected = |accused: Party| Verdict {
        accused,
        reason: VerdictReason::RejectedList,
        own_len: b_own.positions.len(),
        relayed_len: b_relayed.positions.len(),
        threshold: thresholds.pair_min,
    };
    // A list that arrived straight from A and fails C's checks convicts A;
    // a failing list from B could be B's own doing.
    let (agreed, verdict) = if !c_receptions[0].accepted() {
        (None, Some(rejected(Party::A)))
    } else if !c_receptions[1].accepted() || !c_receptions[2].accepted() {
        (None, Some(rejected(Party::B)))
    } else {
        match liar_adjudicate(&a_to_c, &b_own, &b_relayed, thresholds) {
            Ok(v) => (None, Some(v)),
            Err(_) => (Some(a_to_c.value), None),
        }
    };

    LiarOutcome { a_to_b, a_to_c, b_own, b_relayed, b_reception, c_receptions, agreed, verdict }
}
