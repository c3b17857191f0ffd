use rand::Rng;

use crate::error::{Error, Result};
use crate::singlet::{build_singlet, is_permutation, sample_common_direction, SingletState};
use crate::spin::Direction;

/// One party's outcome sequence over `{0, ..., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartySequence {
    pub party: usize,
    pub values: Vec<u8>,
}

impl PartySequence {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Positions holding `value`, ascending.
    pub fn positions_of(&self, value: u8) -> Vec<usize> {
        self.values.iter().enumerate().filter(|(_, &v)| v == value).map(|(i, _)| i).collect()
    }
}

/// Produces one joint outcome (one value per party) per call.
pub trait ColumnSource {
    fn parties(&self) -> usize;
    fn next_column(&mut self) -> Option<Vec<u8>>;
}

/// Common-direction measurements on fresh copies of |S_n>, each along a
/// random direction announced after distribution.
pub struct SingletSource<R> {
    state: SingletState,
    rng: R,
}

impl<R: Rng> SingletSource<R> {
    pub fn new(n: usize, rng: R) -> Result<Self> {
        Ok(SingletSource { state: build_singlet(n)?, rng })
    }
}

impl<R: Rng> ColumnSource for SingletSource<R> {
    fn parties(&self) -> usize {
        self.state.n()
    }

    fn next_column(&mut self) -> Option<Vec<u8>> {
        let dir = Direction::random(&mut self.rng);
        Some(sample_common_direction(&self.state, &dir, &mut self.rng))
    }
}

/// Replays pre-measured columns.
impl ColumnSource for std::vec::IntoIter<Vec<u8>> {
    fn parties(&self) -> usize {
        self.as_slice().first().map_or(0, Vec::len)
    }

    fn next_column(&mut self) -> Option<Vec<u8>> {
        self.next()
    }
}

pub fn generate_sequences(n: usize, length: usize, source: &mut dyn ColumnSource) -> Result<Vec<PartySequence>> {
    if source.parties() != n && length > 0 {
        return Err(Error::DimensionMismatch { expected: n, actual: source.parties() });
    }
    let mut seqs: Vec<PartySequence> =
        (0..n).map(|party| PartySequence { party, values: Vec::with_capacity(length) }).collect();
    for produced in 0..length {
        let column = source.next_column().ok_or(Error::Capacity { needed: length, available: produced })?;
        for (seq, v) in seqs.iter_mut().zip(column) {
            seq.values.push(v);
        }
    }
    Ok(seqs)
}

/// Every position holds a permutation of `0..n` across the parties.
pub fn columns_are_permutations(seqs: &[PartySequence]) -> bool {
    let len = seqs.first().map_or(0, PartySequence::len);
    (0..len).all(|j| {
        let column: Vec<u8> = seqs.iter().map(|s| s.values[j]).collect();
        is_permutation(&column)
    })
}
