//! Self-checks of |S_n>: antisymmetry, normalisation, invariance under
//! common rotations, and the Born sampler against the uniform law on
//! permutations.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::exec::{trial_rng, Execution};
use crate::singlet::{
    apply_lateral_rotation, build_singlet, factorial, is_permutation, permutations, sample_index, to_dense, tuple_of,
    DENSE_N_MAX,
};
use crate::spin::{rotation_operator, Direction, SpinFrame};

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub directions: usize,
    pub samples: usize,
    /// Directions the sampler is exercised along (samples are split evenly).
    pub sample_directions: usize,
    pub tolerance: f64,
    /// Chi-square significance level.
    pub alpha: f64,
    /// Flip the sign of one amplitude before checking.
    pub corrupt: bool,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            directions: 100,
            samples: 20_000,
            sample_directions: 4,
            tolerance: 1e-8,
            alpha: 1e-3,
            corrupt: false,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateCheck {
    pub n: usize,
    pub terms: usize,
    pub antisymmetric: bool,
    pub norm_error: f64,
    /// Largest `| 1 - |<S|U^n|S>| |` over the random directions.
    pub invariance_error: f64,
    pub samples: usize,
    pub non_permutation_samples: usize,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    pub passed: bool,
}

pub const VERIFY_CSV_HEADER: &str =
    "n,terms,antisymmetric,norm_error,invariance_error,samples,non_permutation,chi_square,dof,p_value,passed";

impl StateCheck {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.3e},{:.3e},{},{},{:.4},{},{:.6},{}",
            self.n,
            self.terms,
            self.antisymmetric,
            self.norm_error,
            self.invariance_error,
            self.samples,
            self.non_permutation_samples,
            self.chi_square,
            self.dof,
            self.p_value,
            self.passed
        )
    }
}

pub fn verify_state(n: usize, opts: &VerifyOptions) -> Result<StateCheck> {
    if !(2..=DENSE_N_MAX).contains(&n) {
        return Err(Error::Size { n, min: 2, max: DENSE_N_MAX });
    }
    let mut state = build_singlet(n)?;
    if opts.corrupt {
        let first: Vec<u8> = (0..n as u8).collect();
        let a = state.amplitude(&first);
        state.set_amplitude(first, -a);
    }
    let antisymmetric = state.is_antisymmetric();
    let norm_error = (state.norm_sqr() - 1.0).abs();
    let dense = to_dense(&state)?;
    let frame = SpinFrame::new(n)?;

    let mut dir_rng = trial_rng(opts.seed, n as u64);
    let dirs: Vec<Direction> = (0..opts.directions).map(|_| Direction::random(&mut dir_rng)).collect();
    let errors = opts.exec.map(dirs.len(), |i| {
        let rotated = apply_lateral_rotation(&dense, &rotation_operator(&frame, &dirs[i])).expect("matching levels");
        (1.0 - dense.inner(&rotated).norm()).abs()
    });
    let invariance_error = errors.into_iter().fold(0.0, f64::max);

    // Born sampling along a few random common directions, pooled.
    let perms = permutations(n);
    let index_of = |t: &[u8]| perms.binary_search_by(|p| p.as_slice().cmp(t)).ok();
    let mut counts = vec![0usize; perms.len()];
    let mut non_permutation = 0;
    let per_dir = opts.samples / opts.sample_directions.max(1);
    let mut sample_rng = trial_rng(opts.seed, 1000 + n as u64);
    for _ in 0..opts.sample_directions {
        let dir = Direction::random(&mut sample_rng);
        let probs = dense.born_probabilities(&dir)?;
        for _ in 0..per_dir {
            let tuple = tuple_of(sample_index(&probs, &mut sample_rng), n, n);
            match index_of(&tuple).filter(|_| is_permutation(&tuple)) {
                Some(i) => counts[i] += 1,
                None => non_permutation += 1,
            }
        }
    }
    let samples = per_dir * opts.sample_directions;
    let expected = samples as f64 / factorial(n) as f64;
    let chi_square: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let dof = perms.len() - 1;
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(chi_square)).unwrap_or(f64::NAN);

    let passed = antisymmetric
        && norm_error < opts.tolerance
        && invariance_error < opts.tolerance
        && non_permutation == 0
        && p_value > opts.alpha;
    Ok(StateCheck {
        n,
        terms: state.len(),
        antisymmetric,
        norm_error,
        invariance_error,
        samples,
        non_permutation_samples: non_permutation,
        chi_square,
        dof,
        p_value,
        passed,
    })
}
