use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use supersinglet::exec::trial_rng;
use supersinglet::singlet::{
    apply_lateral_rotation, build_singlet, factorial, inversions, is_permutation, permutations, sample_born, tuple_of,
    to_dense, DenseState,
};
use supersinglet::spin::{rotation_operator, Direction, SpinFrame};

/// Sign from counting cycles instead of inversions.
fn cycle_sign(perm: &[u8]) -> f64 {
    let mut seen = vec![false; perm.len()];
    let mut even = true;
    for s in 0..perm.len() {
        let mut len = 0usize;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = perm[i] as usize;
            len += 1;
        }
        if len > 0 && len.is_multiple_of(2) {
            even = !even;
        }
    }
    if even { 1.0 } else { -1.0 }
}

#[test]
fn amplitudes_match_cycle_parity() {
    for n in 2..=7 {
        let s = build_singlet(n).unwrap();
        let modulus = (1.0 / factorial(n) as f64).sqrt();
        assert_eq!(s.len() as u64, factorial(n));
        for p in permutations(n) {
            assert!((s.amplitude(&p) - cycle_sign(&p) * modulus).abs() < 1e-12, "{p:?}");
        }
    }
}

#[test]
fn three_party_state_as_written() {
    let s = build_singlet(3).unwrap();
    let r = 1.0 / 6f64.sqrt();
    for (k, sign) in [([0, 1, 2], 1.0), ([0, 2, 1], -1.0), ([1, 0, 2], -1.0), ([1, 2, 0], 1.0), ([2, 0, 1], 1.0), ([2, 1, 0], -1.0)] {
        assert!((s.amplitude(&k) - sign * r).abs() < 1e-15);
    }
    assert_eq!(s.amplitude(&[0, 0, 1]), 0.0);
}

#[test]
fn invariant_under_common_rotations() {
    for n in 2..=5 {
        let dense = to_dense(&build_singlet(n).unwrap()).unwrap();
        let frame = SpinFrame::new(n).unwrap();
        let mut rng = trial_rng(11, n as u64);
        for _ in 0..100 {
            let rot = rotation_operator(&frame, &Direction::random(&mut rng));
            let overlap = dense.inner(&apply_lateral_rotation(&dense, &rot).unwrap());
            assert!((overlap.norm() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn sampler_matches_born_oracle() {
    // Chi-square of Born samples along random directions against the uniform
    // law on permutations; no other tuple may ever appear.
    for n in 2..=4 {
        let dense = to_dense(&build_singlet(n).unwrap()).unwrap();
        let perms = permutations(n);
        let mut counts = vec![0usize; perms.len()];
        let mut rng = trial_rng(12, n as u64);
        let samples = 6000;
        for _ in 0..samples {
            let dir = Direction::random(&mut rng);
            let t = sample_born(&dense, &dir, &mut rng).unwrap();
            assert!(is_permutation(&t));
            counts[perms.iter().position(|p| *p == t).unwrap()] += 1;
        }
        let expected = samples as f64 / perms.len() as f64;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        let p = ChiSquared::new((perms.len() - 1) as f64).unwrap().sf(chi2);
        assert!(p > 1e-4, "n={n} chi2={chi2} p={p}");
    }
}

#[test]
fn born_probabilities_of_a_tilted_product_state() {
    // |0> of spin 1/2 measured along polar angle t: cos^2(t/2), sin^2(t/2).
    let frame = SpinFrame::new(2).unwrap();
    let up = rotation_operator(&frame, &Direction::z()).matrix().column(0).iter().copied().collect::<Vec<_>>();
    let state = DenseState::product(2, &[up]);
    let t = 0.9;
    let p = state.born_probabilities(&Direction::new(t, 0.3)).unwrap();
    assert!((p[0] - (t / 2.0).cos().powi(2)).abs() < 1e-12);
    assert!((p[1] - (t / 2.0).sin().powi(2)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn swapping_two_parties_negates(n in 2usize..=6, a in 0usize..6, b in 0usize..6) {
        prop_assume!(a < n && b < n && a != b);
        let s = build_singlet(n).unwrap();
        let swapped = s.swap_factors(a, b);
        for (k, v) in s.terms() {
            prop_assert_eq!(swapped.amplitude(k), -v);
        }
    }

    #[test]
    fn inversion_parity_agrees_with_cycles(seed in any::<u64>(), n in 1usize..=9) {
        let mut rng = trial_rng(seed, 0);
        let mut p: Vec<u8> = (0..n as u8).collect();
        for i in (1..n).rev() {
            p.swap(i, rng.gen_range(0..=i));
        }
        let by_inversions = if inversions(&p).is_multiple_of(2) { 1.0 } else { -1.0 };
        prop_assert_eq!(by_inversions, cycle_sign(&p));
    }

    #[test]
    fn text_round_trip(n in 2usize..=4, seed in any::<u64>()) {
        let dense = to_dense(&build_singlet(n).unwrap()).unwrap();
        let frame = SpinFrame::new(n).unwrap();
        let rot = rotation_operator(&frame, &Direction::random(&mut trial_rng(seed, 1)));
        let rotated = apply_lateral_rotation(&dense, &rot).unwrap();
        let mut buf = Vec::new();
        rotated.write_text(&mut buf).unwrap();
        let back = DenseState::read_text(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back.levels(), n);
        prop_assert!((back.inner(&rotated).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn flat_index_round_trip(n in 2usize..=6, idx in 0usize..46656) {
        let dim = n.pow(n as u32);
        let i = idx % dim;
        let t = tuple_of(i, n, n);
        prop_assert_eq!(supersinglet::singlet::flat_index(&t, n), i);
    }
}
