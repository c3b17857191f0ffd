use supersinglet::exec::trial_rng;
use supersinglet::netsim::{
    capture_parties, distribute_and_test, intercept_resend_detection_probability, run_scenario, Eavesdropper, Outcome,
    ScenarioConfig,
};
use supersinglet::protocols::{generate_sequences, SingletSource};
use supersinglet::spin::Direction;

#[test]
fn honest_tests_never_fail() {
    for n in 2..=6 {
        let d = distribute_and_test(n, 4000, 0.5, None, n as u64).unwrap();
        assert!(d.report.accept);
        assert_eq!(d.report.failures(), 0);
    }
}

#[test]
fn partial_interception_rate_matches_oracle() {
    let dir = Direction::new(1.1, 0.4);
    let eve = Eavesdropper { dir, fraction: 0.3 };
    let d = distribute_and_test(3, 8000, 0.5, Some(&eve), 4).unwrap();
    let tampered: std::collections::BTreeSet<usize> = d.rounds.iter().filter(|r| r.tampered()).map(|r| r.id).collect();
    let (mut mean, mut var) = (0.0, 0.0);
    for t in &d.report.tested {
        let p = if tampered.contains(&t.round) { intercept_resend_detection_probability(3, &dir, &t.direction).unwrap() } else { 0.0 };
        mean += p;
        var += p * (1.0 - p);
        if !tampered.contains(&t.round) {
            assert!(t.pass);
        }
    }
    let seen = d.report.failures() as f64;
    assert!((seen - mean).abs() <= 3.0 * var.sqrt(), "seen {seen} expected {mean} +/- {}", var.sqrt());
    assert!(d.surviving.is_empty());
}

#[test]
fn captured_third_leaves_an_antisymmetric_pair() {
    let mut src = SingletSource::new(3, trial_rng(6, 0)).unwrap();
    let seqs = generate_sequences(3, 10_000, &mut src).unwrap();
    let out = capture_parties(&seqs, &[1], true).unwrap();
    let mut first_lower = 0;
    for r in 0..10_000 {
        let rest = out.remaining_values(3, r);
        let (a, c) = (out.survivors[0].values[r], out.survivors[1].values[r]);
        let mut pair = vec![a, c];
        pair.sort_unstable();
        assert_eq!(pair, rest);
        first_lower += (a < c) as usize;
    }
    let f = first_lower as f64 / 10_000.0;
    assert!((f - 0.5).abs() < 3.0 * 0.005, "{f}");
}

#[test]
fn scenario_transcripts_are_reproducible() {
    let cfg = ScenarioConfig::parse(
        "scenario = \"liar-detection\"\nn = 3\nrounds = 1400\nlength = 300\n[liar]\nstrategy = \"fabricator\"\nfabricated = 4\nruns = 2\n",
    )
    .unwrap();
    let a = run_scenario(&cfg, 12).unwrap();
    assert_eq!(a.to_jsonl(), run_scenario(&cfg, 12).unwrap().to_jsonl());
    assert_ne!(a.outcome, Outcome::Abort);
    for line in a.to_jsonl().lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn insecure_zero_fraction_is_flagged_in_summary() {
    let cfg = ScenarioConfig::parse("scenario = \"strangers\"\nn = 4\nrounds = 30\ntest_fraction = 0.0\n").unwrap();
    let t = run_scenario(&cfg, 1).unwrap();
    assert_eq!(t.summary["insecure"], serde_json::json!(true));
    assert_eq!(t.summary["bijective"], serde_json::json!(30));
}
