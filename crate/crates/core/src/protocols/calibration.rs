//! Monte Carlo detection rates for the protocol checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::{trial_rng, Execution};
use crate::protocols::liar::{liar_receive, liar_send_fabricated, run_liar_round, LiarStrategy, LiarThresholds, Party};
use crate::protocols::secret_sharing::{secret_share_round, CheatStrategy, Cheater};
use crate::protocols::sequences::{generate_sequences, PartySequence, SingletSource};

/// Standard deviation of an empirical rate from `trials` Bernoulli(p) draws.
pub fn binomial_sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Hit counts against an expected probability.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub trials: usize,
    pub hits: usize,
    pub expected: f64,
}

impl RateEstimate {
    pub fn rate(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    pub fn sigma(&self) -> f64 {
        binomial_sigma(self.expected, self.trials)
    }

    /// Deviation in units of the binomial sigma (0 when the expectation is degenerate and met).
    pub fn z_score(&self) -> f64 {
        let d = self.rate() - self.expected;
        let s = self.sigma();
        if s == 0.0 {
            if d == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            d / s
        }
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.z_score().abs() <= sigmas
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheatCalibration {
    pub n: usize,
    /// Cheater's slot in the declaration order.
    pub position: usize,
    pub r_including_cheater: usize,
    pub r_excluding_cheater: usize,
    /// First honest agent after the cheater holds the false value; expected `1/(r-1)`.
    pub next_honest: RateEstimate,
    /// Any later honest agent holds it; expected `(r-2)/(r-1)`.
    pub aborts: RateEstimate,
}

/// Random-undeclared cheater in every slot that still has an honest agent
/// after it, `trials` fresh columns per slot, dealer 0.
pub fn cheat_calibration(n: usize, trials: usize, seed: u64, exec: Execution) -> Result<Vec<CheatCalibration>> {
    if n < 3 {
        return Err(Error::Size { n, min: 3, max: usize::MAX });
    }
    let agents: Vec<usize> = (1..n).collect();
    (0..n - 2)
        .map(|position| {
            let cheater = Cheater { party: agents[position], strategy: CheatStrategy::RandomUndeclared };
            let results = exec.map(trials, |t| {
                let mut rng = trial_rng(seed, (position * trials + t) as u64);
                let mut column: Vec<u8> = (0..n as u8).collect();
                column.shuffle(&mut rng);
                let seqs: Vec<PartySequence> =
                    column.iter().enumerate().map(|(party, &v)| PartySequence { party, values: vec![v] }).collect();
                secret_share_round(&seqs, 0, 0, &agents, Some(&cheater), &[], &mut rng)
                    .map(|r| r.cheat.expect("cheater always declares"))
            });
            let records = results.into_iter().collect::<Result<Vec<_>>>()?;
            let r = records[0].r_including_cheater;
            let next = records.iter().filter(|c| c.next_honest_holds == Some(true)).count();
            let aborts = records.iter().filter(|c| c.detected).count();
            let p = 1.0 / (r as f64 - 1.0);
            Ok(CheatCalibration {
                n,
                position,
                r_including_cheater: r,
                r_excluding_cheater: records[0].r_excluding_cheater,
                next_honest: RateEstimate { trials, hits: next, expected: p },
                aborts: RateEstimate { trials, hits: aborts, expected: (r as f64 - 2.0) * p },
            })
        })
        .collect()
}

fn three_sequences(length: usize, seed: u64, index: u64) -> [PartySequence; 3] {
    let mut src = SingletSource::new(3, trial_rng(seed, index)).expect("n = 3 is valid");
    generate_sequences(3, length, &mut src).expect("source never runs dry").try_into().expect("three parties")
}

/// Receiver C checking a list padded with `k` false positions; expected
/// rejection rate `(2^k - 1) / 2^k`.
pub fn fabrication_calibration(k: usize, length: usize, trials: usize, seed: u64, exec: Execution) -> RateEstimate {
    let thresholds = LiarThresholds::new(length, 0.0);
    let rejected = exec.map(trials, |t| {
        let [a, _, c] = three_sequences(length, seed, (k * trials + t) as u64);
        let mut rng = trial_rng(seed ^ 0x5eed, (k * trials + t) as u64);
        let value = rng.gen_range(0..3u8);
        let msg = liar_send_fabricated(&a, value, k, &mut rng);
        !liar_receive(&c, &msg, &LiarThresholds { list_min: 0.0, ..thresholds }).accepted()
    });
    RateEstimate { trials, hits: rejected.iter().filter(|&&r| r).count(), expected: 1.0 - 0.5f64.powi(k as i32) }
}

/// Whether a round ended the way it should under `strategy`: agreement on
/// the sent value with nobody lying, the liar accused otherwise, and never
/// an honest party accused.
fn liar_round_correct(strategy: LiarStrategy, value: u8, agreed: Option<u8>, accused: Option<Party>) -> bool {
    match (strategy, accused) {
        (LiarStrategy::Honest, None) => agreed == Some(value),
        (LiarStrategy::DishonestA, Some(p)) => p == Party::A,
        (LiarStrategy::DishonestB, Some(p)) => p == Party::B,
        // Padding that slips through is harmless: C still gets A's genuine value.
        (LiarStrategy::Fabricator { .. }, None) => agreed == Some(value),
        (LiarStrategy::Fabricator { .. }, Some(p)) => p == Party::A,
        _ => false,
    }
}

pub fn liar_calibration(strategy: LiarStrategy, length: usize, runs: usize, sigma_band: f64, seed: u64, exec: Execution) -> RateEstimate {
    let thresholds = LiarThresholds::new(length, sigma_band);
    let correct = exec.map(runs, |t| {
        let seqs = three_sequences(length, seed, t as u64);
        let mut rng = trial_rng(seed ^ 0x11a2, t as u64);
        let value = rng.gen_range(0..3u8);
        let out = run_liar_round(&seqs, value, strategy, &thresholds, &mut rng);
        liar_round_correct(strategy, value, out.agreed, out.verdict.map(|v| v.accused))
    });
    RateEstimate { trials: runs, hits: correct.iter().filter(|&&c| c).count(), expected: 1.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheat_slots_cover_r() {
        let rows = cheat_calibration(5, 400, 1, Execution::Sequential).unwrap();
        let rs: Vec<usize> = rows.iter().map(|r| r.r_including_cheater).collect();
        assert_eq!(rs, vec![5, 4, 3]);
        assert!(rows.iter().all(|r| r.r_excluding_cheater + 1 == r.r_including_cheater));
        assert!(rows.iter().all(|r| r.next_honest.hits <= r.aborts.hits));
    }

    #[test]
    fn calibration_is_execution_independent() {
        let a = fabrication_calibration(2, 90, 200, 4, Execution::Sequential);
        let b = fabrication_calibration(2, 90, 200, 4, Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_expectation() {
        let e = RateEstimate { trials: 10, hits: 10, expected: 1.0 };
        assert_eq!(e.z_score(), 0.0);
        assert!(!RateEstimate { hits: 9, ..e }.within(3.0));
    }
}
