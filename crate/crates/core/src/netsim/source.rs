//! The singlet source, an intercept-resend eavesdropper and the
//! distribute-and-test acceptance phase.
//!
//! A random subset of the distributed rounds is measured along a publicly
//! announced random direction (one per tested round) and published. A tested
//! round passes iff the published outcomes form a permutation of `0..n`. Any
//! failure aborts the whole batch; otherwise only the untested rounds survive.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::trial_rng;
use crate::singlet::{is_permutation, permutations, sample_index, tuple_of, DenseState, DENSE_N_MAX};
use crate::spin::{rotation_operator, CMatrix, Direction, SpinFrame};

#[derive(Debug, Clone, PartialEq)]
pub enum RoundState {
    /// Untouched copy of |S_n>.
    Singlet,
    /// Every particle was measured along `eve_dir` and re-prepared in the
    /// eigenstate of the observed outcome.
    Resent { eve_dir: Direction, eve_outcome: Vec<u8> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceRound {
    pub id: usize,
    pub state: RoundState,
}

impl SourceRound {
    pub fn tampered(&self) -> bool {
        matches!(self.state, RoundState::Resent { .. })
    }

    /// Joint outcome when every party measures along `dir`.
    pub fn measure<R: Rng + ?Sized>(&self, frame: &SpinFrame, dir: &Direction, rng: &mut R) -> Vec<u8> {
        let n = frame.n();
        match &self.state {
            RoundState::Singlet => {
                let mut outcome: Vec<u8> = (0..n as u8).collect();
                outcome.shuffle(rng);
                outcome
            }
            RoundState::Resent { eve_dir, eve_outcome } => {
                // <dir, j | eve, k> = (U_dir^dagger U_eve)_{jk}; parties are independent.
                let overlap = rotation_operator(frame, dir).matrix().adjoint() * rotation_operator(frame, eve_dir).matrix();
                eve_outcome
                    .iter()
                    .map(|&k| {
                        let weights: Vec<f64> = (0..n).map(|j| overlap[(j, k as usize)].norm_sqr()).collect();
                        sample_index(&weights, rng) as u8
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eavesdropper {
    pub dir: Direction,
    /// Fraction of rounds intercepted.
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestRecord {
    pub round: usize,
    pub direction: Direction,
    pub outcome: Vec<u8>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub tested: Vec<TestRecord>,
    pub accept: bool,
}

impl TestReport {
    pub fn failures(&self) -> usize {
        self.tested.iter().filter(|t| !t.pass).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub n: usize,
    pub rounds: Vec<SourceRound>,
    /// Untested rounds handed to the protocols; empty after an abort.
    pub surviving: Vec<SourceRound>,
    pub report: TestReport,
    /// Nothing was tested, so acceptance carries no assurance.
    pub insecure: bool,
}

pub fn distribute_and_test(
    n: usize,
    rounds: usize,
    test_fraction: f64,
    adversary: Option<&Eavesdropper>,
    seed: u64,
) -> Result<Distribution> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidArgument(format!("test fraction {test_fraction} not in [0, 1)")));
    }
    if let Some(eve) = adversary {
        if !(0.0..=1.0).contains(&eve.fraction) {
            return Err(Error::InvalidArgument(format!("interception fraction {} not in [0, 1]", eve.fraction)));
        }
    }
    let frame = SpinFrame::new(n)?;
    let mut channel_rng = trial_rng(seed, 0);
    let mut beacon = trial_rng(seed, 1);
    let mut lab_rng = trial_rng(seed, 2);

    let rounds: Vec<SourceRound> = (0..rounds)
        .map(|id| {
            let state = match adversary {
                Some(eve) if channel_rng.gen::<f64>() < eve.fraction => {
                    // The singlet gives a uniform permutation along any axis.
                    let mut eve_outcome: Vec<u8> = (0..n as u8).collect();
                    eve_outcome.shuffle(&mut channel_rng);
                    RoundState::Resent { eve_dir: eve.dir, eve_outcome }
                }
                _ => RoundState::Singlet,
            };
            SourceRound { id, state }
        })
        .collect();

    let test_count = (test_fraction * rounds.len() as f64).round() as usize;
    let mut tested_ids = rand::seq::index::sample(&mut beacon, rounds.len(), test_count).into_vec();
    tested_ids.sort_unstable();

    let tested: Vec<TestRecord> = tested_ids
        .iter()
        .map(|&id| {
            let direction = Direction::random(&mut beacon);
            let outcome = rounds[id].measure(&frame, &direction, &mut lab_rng);
            let pass = is_permutation(&outcome);
            TestRecord { round: id, direction, outcome, pass }
        })
        .collect();
    let accept = tested.iter().all(|t| t.pass);

    let surviving = if accept {
        let mut is_tested = vec![false; rounds.len()];
        tested_ids.iter().for_each(|&i| is_tested[i] = true);
        rounds.iter().filter(|r| !is_tested[r.id]).cloned().collect()
    } else {
        Vec::new()
    };
    Ok(Distribution { n, insecure: test_count == 0, rounds, surviving, report: TestReport { tested, accept } })
}

/// Probability that a fully intercepted-and-resent round fails a test along
/// `test_dir`, by dense contraction: average over the eavesdropper's outcomes
/// of the weight of non-permutation tuples in the resent product state.
pub fn intercept_resend_detection_probability(n: usize, eve_dir: &Direction, test_dir: &Direction) -> Result<f64> {
    if !(2..=DENSE_N_MAX.min(5)).contains(&n) {
        return Err(Error::Size { n, min: 2, max: DENSE_N_MAX.min(5) });
    }
    let frame = SpinFrame::new(n)?;
    let u_eve: CMatrix = rotation_operator(&frame, eve_dir).matrix().clone();
    let column = |k: usize| -> Vec<Complex64> { (0..n).map(|i| u_eve[(i, k)]).collect() };
    let perms = permutations(n);
    let mut total = 0.0;
    for eve_outcome in &perms {
        let factors: Vec<Vec<Complex64>> = eve_outcome.iter().map(|&k| column(k as usize)).collect();
        let resent = DenseState::product(n, &factors);
        let probs = resent.born_probabilities(test_dir)?;
        let fail: f64 = probs
            .iter()
            .enumerate()
            .filter(|(i, _)| !is_permutation(&tuple_of(*i, n, n)))
            .map(|(_, p)| p)
            .sum();
        total += fail;
    }
    Ok(total / perms.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn honest_distribution_always_accepts() {
        let d = distribute_and_test(4, 1000, 0.5, None, 3).unwrap();
        assert!(d.report.accept);
        assert_eq!(d.report.tested.len(), 500);
        assert_eq!(d.surviving.len(), 500);
        assert!(!d.insecure);
    }

    #[test]
    fn zero_fraction_is_vacuous() {
        let d = distribute_and_test(3, 50, 0.0, None, 1).unwrap();
        assert!(d.report.accept && d.insecure);
        assert_eq!(d.surviving.len(), 50);
        assert!(distribute_and_test(3, 50, 1.0, None, 1).is_err());
    }

    #[test]
    fn full_interception_aborts() {
        let eve = Eavesdropper { dir: Direction::z(), fraction: 1.0 };
        let d = distribute_and_test(2, 400, 0.5, Some(&eve), 9).unwrap();
        assert!(!d.report.accept);
        assert!(d.surviving.is_empty());
    }

    #[test]
    fn spin_half_oracle_matches_hand_value() {
        // Resent pair |e,k>|e,1-k>: both parties agree with probability sin^2(g)/2.
        for g in [0.0, 0.4, 1.0, std::f64::consts::FRAC_PI_2] {
            let p = intercept_resend_detection_probability(2, &Direction::z(), &Direction::new(g, 0.7)).unwrap();
            assert!((p - g.sin().powi(2) / 2.0).abs() < 1e-12, "g={g} p={p}");
        }
    }

    #[test]
    fn same_axis_resend_is_invisible() {
        for n in 2..=4 {
            let d = Direction::new(0.9, 1.3);
            assert!(intercept_resend_detection_probability(n, &d, &d).unwrap() < 1e-12);
        }
    }
}
