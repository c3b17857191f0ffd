use std::f64::consts::PI;

use supersinglet::bell::{
    chsh_value, classical_bound, classical_bound_reduced, maximize_sigma_violation, maximize_violation, BellSetting,
    BruteForce, ClosedForm, CorrelationKernel, GeneralClosedForm, OptimizerConfig,
};
use supersinglet::exec::Execution;
use supersinglet::observables::{
    corr_closed_nm1, corr_closed_nm2, corr_exact, corr_sigma, corr_sigma_bruteforce, corr_sigma_published, sigma_residual,
};

fn angles() -> Vec<f64> {
    (0..40).map(|i| 0.013 + i as f64 * 2.0 * PI / 40.0).collect()
}

#[test]
fn one_flipped_party_matches_contraction() {
    for n in 2..=6 {
        let oracle = BruteForce::new(n).unwrap();
        for t in angles() {
            assert!((corr_closed_nm1(n, t) - oracle.correlation(n, 1, t)).abs() < 1e-10, "n={n} t={t}");
        }
    }
}

#[test]
fn symmetric_polynomial_form_is_exact_for_every_split() {
    for n in 3..=6 {
        let oracle = BruteForce::new(n).unwrap();
        for m in 1..n {
            for t in angles() {
                assert!((corr_exact(n, m, t) - oracle.correlation(n, m, t)).abs() < 1e-10, "n={n} m={m} t={t}");
            }
        }
    }
}

#[test]
fn two_flipped_parties_published_form_holds_at_four_only() {
    let at = |n: usize| {
        let oracle = BruteForce::new(n).unwrap();
        angles().into_iter().map(|t| (corr_closed_nm2(n, t) - oracle.correlation(n, 2, t)).abs()).fold(0.0, f64::max)
    };
    assert!(at(4) < 1e-10);
    assert!(at(5) > 0.1);
    assert!(at(6) > 0.1);
}

#[test]
fn residual_pair_sign() {
    for n in 2..=5 {
        let residual = sigma_residual(n).unwrap();
        for t in angles() {
            let exact = corr_sigma_bruteforce(&residual, t).unwrap();
            assert!((corr_sigma(n, t) - exact).abs() < 1e-10);
            assert!((corr_sigma_published(n, t) + exact).abs() < 1e-10);
        }
    }
}

#[test]
fn small_n_maxima_agree_with_contraction() {
    let cfg = OptimizerConfig { grid: 40, ..Default::default() };
    for (n, m) in [(2, 1), (3, 1), (4, 1), (4, 2)] {
        let closed = maximize_violation(n, m, &GeneralClosedForm, &cfg).unwrap();
        let brute = maximize_violation(n, m, &BruteForce::new(n).unwrap(), &cfg).unwrap();
        assert!((closed.value - brute.value).abs() < 1e-7, "n={n} m={m}");
        let s = BellSetting::new(n, m, closed.argmax_angles).unwrap();
        assert!((chsh_value(&s, &BruteForce::new(n).unwrap()) - closed.value).abs() < 1e-7);
    }
}

#[test]
fn optimizer_is_execution_independent() {
    let seq = OptimizerConfig { grid: 30, exec: Execution::Sequential, ..Default::default() };
    let par = OptimizerConfig { exec: Execution::Parallel, ..seq.clone() };
    for (n, m) in [(3, 1), (7, 2), (200, 1)] {
        assert_eq!(maximize_violation(n, m, &ClosedForm, &seq).unwrap(), maximize_violation(n, m, &ClosedForm, &par).unwrap());
    }
    assert_eq!(maximize_sigma_violation(9, &seq).unwrap(), maximize_sigma_violation(9, &par).unwrap());
}

#[test]
fn quantum_beats_classical() {
    assert_eq!(classical_bound_reduced(), 2);
    for n in 2..=6 {
        for m in 1..n {
            assert_eq!(classical_bound(n, m), 2);
        }
    }
    let cfg = OptimizerConfig { grid: 30, ..Default::default() };
    for n in [2, 3, 5, 10, 50] {
        assert!(maximize_violation(n, 1, &ClosedForm, &cfg).unwrap().value > 2.3);
    }
}
