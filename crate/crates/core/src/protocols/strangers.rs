use crate::error::{Error, Result};
use crate::protocols::sequences::PartySequence;
use crate::singlet::{is_permutation, permutations};

/// Murderer `i` is assigned victim `mapping[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub round: usize,
    pub mapping: Vec<u8>,
}

impl Assignment {
    pub fn is_bijection(&self) -> bool {
        is_permutation(&self.mapping)
    }
}

pub fn strangers_assign(sequences: &[PartySequence], round: usize) -> Result<Assignment> {
    let len = sequences.first().map_or(0, PartySequence::len);
    if round >= len {
        return Err(Error::RoundOutOfRange { round, len });
    }
    Ok(Assignment { round, mapping: sequences.iter().map(|s| s.values[round]).collect() })
}

/// Full assignments consistent with what a coalition knows (`(party, victim)` pairs).
pub fn consistent_completions(n: usize, known: &[(usize, u8)]) -> Vec<Vec<u8>> {
    permutations(n).into_iter().filter(|p| known.iter().all(|&(party, v)| p[party] == v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seqs(columns: &[&[u8]]) -> Vec<PartySequence> {
        let n = columns[0].len();
        (0..n).map(|p| PartySequence { party: p, values: columns.iter().map(|c| c[p]).collect() }).collect()
    }

    #[test]
    fn read_off() {
        let s = seqs(&[&[2, 0, 1]]);
        let a = strangers_assign(&s, 0).unwrap();
        assert_eq!(a.mapping, vec![2, 0, 1]);
        assert!(a.is_bijection());
        assert!(matches!(strangers_assign(&s, 1), Err(Error::RoundOutOfRange { .. })));
    }

    #[test]
    fn coalition_of_n_minus_two_learns_nothing_decisive() {
        for n in 3..=6 {
            let truth: Vec<u8> = (0..n as u8).rev().collect();
            let known: Vec<(usize, u8)> = (0..n - 2).map(|p| (p, truth[p])).collect();
            let completions = consistent_completions(n, &known);
            assert_eq!(completions.len(), 2);
            // The two outsiders' victims are swapped between the completions.
            assert_eq!(completions[0][n - 2], completions[1][n - 1]);
            assert_eq!(completions[0][n - 1], completions[1][n - 2]);
        }
    }
}
