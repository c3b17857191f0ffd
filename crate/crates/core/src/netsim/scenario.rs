//! End-to-end runs: source, test phase, sequence extraction, protocol.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exec::trial_rng;
use crate::protocols::{
    rotated_order, run_liar_round, secret_share_round, strangers_assign, CheatStrategy, Cheater, KeyOutcome, LiarThresholds,
    Party, PartySequence, Reception,
};
use crate::spin::{Direction, SpinFrame};

use super::bus::{ChannelMessage, MessageBus, PartyNode, Payload, Role};
use super::capture::{capture_parties, CaptureOutcome};
use super::config::{ScenarioConfig, ScenarioKind, SecretSharingConfig};
use super::source::{distribute_and_test, Distribution};

// Independent streams derived from the scenario seed; 0..=2 belong to the source.
const EXTRACT_BEACON: u64 = 3;
const EXTRACT_LAB: u64 = 4;
const PROTOCOL: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Accept,
    /// A check fired: failed test round or a stopped key reconstruction.
    Abort,
    /// Liar detection ended with somebody accused.
    Accusation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Record {
    pub phase: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round: Option<usize>,
    pub sender: String,
    pub receiver: String,
    pub payload: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub records: Vec<Record>,
    pub outcome: Outcome,
    pub summary: BTreeMap<String, Value>,
}

impl Transcript {
    /// One JSON object per line, then a final `{"summary": ...}` line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            writeln!(out)?;
        }
        let mut summary = self.summary.clone();
        summary.insert("scenario".into(), json!(self.scenario.label()));
        summary.insert("seed".into(), json!(self.seed));
        summary.insert("outcome".into(), serde_json::to_value(self.outcome).map_err(io::Error::other)?);
        serde_json::to_writer(&mut out, &json!({ "summary": summary }))?;
        writeln!(out)
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }
}

fn name(party: usize) -> String {
    format!("P{party}")
}

fn dir_text(d: &Direction) -> String {
    format!("({:.6},{:.6})", d.polar, d.azimuth)
}

struct Run<'a> {
    cfg: &'a ScenarioConfig,
    records: Vec<Record>,
    summary: BTreeMap<String, Value>,
    bus: MessageBus,
    nodes: Vec<PartyNode>,
}

impl Run<'_> {
    fn log(&mut self, phase: &'static str, round: Option<usize>, sender: String, receiver: String, payload: String, verdict: Option<String>) {
        self.records.push(Record { phase, round, sender, receiver, payload, verdict });
    }

    /// Sends on the pairwise channel, delivers it and records it.
    fn message(&mut self, phase: &'static str, from: usize, to: usize, round: usize, payload: Payload, verdict: Option<String>) {
        let summary = payload.summary();
        self.bus.send(ChannelMessage { from, to, round, payload });
        self.bus.deliver_to(&mut self.nodes[to]);
        self.log(phase, Some(round), name(from), name(to), summary, verdict);
    }

    fn set(&mut self, key: &str, value: Value) {
        self.summary.insert(key.into(), value);
    }
}

fn roles(kind: ScenarioKind, n: usize, ss: &SecretSharingConfig) -> Vec<Role> {
    (0..n)
        .map(|p| match kind {
            ScenarioKind::Strangers => Role::Agent,
            ScenarioKind::SecretSharing if p == ss.dealer => Role::Dealer,
            ScenarioKind::SecretSharing => Role::Agent,
            ScenarioKind::LiarDetection if p == 0 => Role::Sender,
            ScenarioKind::LiarDetection => Role::Receiver,
        })
        .collect()
}

pub fn run_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<Transcript> {
    cfg.validate()?;
    let n = cfg.n;
    let ss = cfg.secret_sharing.clone().unwrap_or(SecretSharingConfig { dealer: 0, cheater: None, cheat_value: None });
    let eve = cfg.adversary.as_ref().map(|a| a.eavesdropper());

    let mut run = Run {
        cfg,
        records: Vec::new(),
        summary: BTreeMap::new(),
        bus: MessageBus::new(n),
        nodes: roles(cfg.scenario, n, &ss).into_iter().enumerate().map(|(i, r)| PartyNode::new(i, r)).collect(),
    };

    let dist = distribute_and_test(n, cfg.rounds, cfg.test_fraction, eve.as_ref(), seed)?;
    let tampered = dist.rounds.iter().filter(|r| r.tampered()).count();
    run.log(
        "source",
        None,
        "source".into(),
        "all".into(),
        format!("distributed {} rounds of S_{n}", cfg.rounds),
        eve.map(|e| format!("intercepted {tampered} along {}", dir_text(&e.dir))),
    );
    for t in &dist.report.tested {
        let verdict = if t.pass { "pass" } else { "fail" };
        run.log("test", Some(t.round), "all".into(), "public".into(), format!("dir={} outcome={:?}", dir_text(&t.direction), t.outcome), Some(verdict.into()));
    }
    run.set("rounds", json!(cfg.rounds));
    run.set("tested", json!(dist.report.tested.len()));
    run.set("test_failures", json!(dist.report.failures()));
    run.set("tampered_rounds", json!(tampered));
    run.set("accept", json!(dist.report.accept));
    run.set("insecure", json!(dist.insecure));
    run.set("surviving", json!(dist.surviving.len()));
    if dist.insecure {
        run.log("test", None, "all".into(), "public".into(), "no rounds tested".into(), Some("insecure".into()));
    }
    if !dist.report.accept {
        run.log("test", None, "all".into(), "public".into(), format!("{} failed test rounds", dist.report.failures()), Some("abort".into()));
        return Ok(finish(run, cfg.scenario, seed, Outcome::Abort));
    }

    let runs = match cfg.scenario {
        ScenarioKind::LiarDetection => cfg.liar.as_ref().map_or(1, |l| l.runs),
        _ => 1,
    };
    let length = match cfg.length {
        Some(l) => l,
        None => dist.surviving.len() / runs.max(1),
    };
    let needed = length * runs;
    if needed > dist.surviving.len() {
        return Err(Error::Capacity { needed, available: dist.surviving.len() });
    }
    let sequences = extract(&dist, needed, seed)?;
    run.log("extract", None, "all".into(), "all".into(), format!("measured {needed} surviving rounds along public directions"), None);
    run.set("length", json!(length));
    for seq in sequences.iter() {
        run.nodes[seq.party].hold(seq.clone());
    }

    let capture = match &cfg.capture {
        Some(cap) => {
            let out = capture_parties(&sequences, &cap.parties, cap.publish)?;
            for &p in &cap.parties {
                let text = if cap.publish { "captured; sequence published" } else { "captured; silent" };
                if cap.publish {
                    run.nodes[p].publish();
                }
                run.log("capture", None, name(p), "public".into(), text.into(), None);
            }
            run.set("captured", json!(cap.parties));
            run.set("usable", json!(out.usable));
            if !out.usable {
                run.log("capture", None, "all".into(), "all".into(), "survivors cannot tell the missing values".into(), Some("unusable".into()));
                return Ok(finish(run, cfg.scenario, seed, Outcome::Accept));
            }
            if out.survivors.is_empty() {
                run.log("capture", None, "all".into(), "all".into(), "no parties left".into(), Some("empty".into()));
                return Ok(finish(run, cfg.scenario, seed, Outcome::Accept));
            }
            out
        }
        None => CaptureOutcome { survivors: sequences.clone(), published: Vec::new(), usable: true },
    };

    let outcome = match cfg.scenario {
        ScenarioKind::Strangers => strangers(&mut run, &capture, length),
        ScenarioKind::SecretSharing => secret_sharing(&mut run, &capture, &ss, length, seed)?,
        ScenarioKind::LiarDetection => liar(&mut run, &sequences, length, runs, seed),
    };
    Ok(finish(run, cfg.scenario, seed, outcome))
}

fn finish(run: Run<'_>, scenario: ScenarioKind, seed: u64, outcome: Outcome) -> Transcript {
    let mut summary = run.summary;
    summary.insert("messages_delivered".into(), json!(run.bus.delivered()));
    Transcript { scenario, seed, records: run.records, outcome, summary }
}

/// Each surviving round is measured by every party along one publicly
/// announced random direction.
fn extract(dist: &Distribution, count: usize, seed: u64) -> Result<Vec<PartySequence>> {
    let frame = SpinFrame::new(dist.n)?;
    let mut beacon = trial_rng(seed, EXTRACT_BEACON);
    let mut lab = trial_rng(seed, EXTRACT_LAB);
    let mut seqs: Vec<PartySequence> =
        (0..dist.n).map(|party| PartySequence { party, values: Vec::with_capacity(count) }).collect();
    for round in dist.surviving.iter().take(count) {
        let dir = Direction::random(&mut beacon);
        for (seq, v) in seqs.iter_mut().zip(round.measure(&frame, &dir, &mut lab)) {
            seq.values.push(v);
        }
    }
    Ok(seqs)
}

fn strangers(run: &mut Run<'_>, capture: &CaptureOutcome, length: usize) -> Outcome {
    let n = run.cfg.n;
    let mut bijective = 0usize;
    for round in 0..length {
        let assignment = strangers_assign(&capture.survivors, round).expect("round within extracted length");
        for (seq, &target) in capture.survivors.iter().zip(&assignment.mapping) {
            run.log("assign", Some(round), name(seq.party), format!("recipient {target}"), "gift".into(), None);
        }
        let mut got = assignment.mapping.clone();
        got.sort_unstable();
        let ok = got == capture.remaining_values(n, round);
        bijective += ok as usize;
        let verdict = if ok { "bijective" } else { "collision" };
        run.log("assign", Some(round), "all".into(), "all".into(), format!("mapping {:?}", assignment.mapping), Some(verdict.into()));
    }
    run.set("assignments", json!(length));
    run.set("bijective", json!(bijective));
    Outcome::Accept
}

fn secret_sharing(
    run: &mut Run<'_>,
    capture: &CaptureOutcome,
    ss: &SecretSharingConfig,
    length: usize,
    seed: u64,
) -> Result<Outcome> {
    let mut rng = trial_rng(seed, PROTOCOL);
    let parties: Vec<usize> = capture.survivors.iter().map(|s| s.party).collect();
    let agents: Vec<usize> = parties.iter().copied().filter(|&p| p != ss.dealer).collect();
    let cheater = ss.cheater.map(|party| Cheater {
        party,
        strategy: ss.cheat_value.map_or(CheatStrategy::RandomUndeclared, CheatStrategy::Fixed),
    });

    let (mut correct, mut wrong, mut aborts) = (0usize, 0usize, 0usize);
    let mut by_r: BTreeMap<usize, [usize; 2]> = BTreeMap::new();
    for round in 0..length {
        let order = rotated_order(&agents, round);
        let public = capture.public_at(round);
        let result = secret_share_round(&capture.survivors, round, ss.dealer, &order, cheater.as_ref(), &public, &mut rng)?;
        for &(p, v) in &result.declared {
            for &q in parties.iter().filter(|&&q| q != p) {
                run.bus.send(ChannelMessage { from: p, to: q, round, payload: Payload::Declaration(v) });
                run.bus.deliver_to(&mut run.nodes[q]);
            }
            run.log("declare", Some(round), name(p), "all".into(), Payload::Declaration(v).summary(), None);
        }
        if let Some(c) = &result.cheat {
            let entry = by_r.entry(c.r_including_cheater).or_default();
            entry[0] += 1;
            entry[1] += c.detected as usize;
            run.log(
                "cheat",
                Some(round),
                name(c.party),
                "all".into(),
                format!("claimed {} holding {} at slot {}, r={}", c.declared_value, c.true_value, c.position, c.r_including_cheater),
                Some(if c.detected { "detected" } else { "undetected" }.into()),
            );
        }
        let verdict = match result.outcome {
            KeyOutcome::Reconstructed { value, correct: ok } => {
                if ok { correct += 1 } else { wrong += 1 }
                format!("key {value} {}", if ok { "correct" } else { "wrong" })
            }
            KeyOutcome::Aborted { by, .. } => {
                aborts += 1;
                format!("abort by {}", name(by))
            }
        };
        run.log("key", Some(round), name(ss.dealer), "all".into(), "reconstruction".into(), Some(verdict));
    }
    run.set("keys_correct", json!(correct));
    run.set("keys_wrong", json!(wrong));
    run.set("aborts", json!(aborts));
    let attempts: usize = by_r.values().map(|e| e[0]).sum();
    let detected: usize = by_r.values().map(|e| e[1]).sum();
    run.set("cheat_attempts", json!(attempts));
    run.set("cheat_detected", json!(detected));
    let per_r: BTreeMap<String, Value> =
        by_r.iter().map(|(r, e)| (r.to_string(), json!({ "attempts": e[0], "detected": e[1] }))).collect();
    run.set("cheat_by_r", json!(per_r));
    Ok(if aborts > 0 { Outcome::Abort } else { Outcome::Accept })
}

fn reception_text(r: &Reception) -> String {
    match r {
        Reception::Accept => "accept".into(),
        Reception::Intersects { position } => format!("reject: overlap at {position}"),
        Reception::TooShort { len, min } => format!("reject: {len} < {min:.2}"),
    }
}

fn liar(run: &mut Run<'_>, sequences: &[PartySequence], length: usize, runs: usize, seed: u64) -> Outcome {
    let cfg = run.cfg.liar.clone().expect("validated");
    let strategy = cfg.strategy();
    let thresholds = LiarThresholds::new(length, cfg.sigma_band);
    let mut rng = trial_rng(seed, PROTOCOL);
    let (a, b, c) = (Party::A.index(), Party::B.index(), Party::C.index());
    let mut accused: BTreeMap<&'static str, usize> = BTreeMap::new();
    let mut agreed = 0usize;

    for k in 0..runs {
        let window = k * length..(k + 1) * length;
        let seqs: [PartySequence; 3] = std::array::from_fn(|p| PartySequence {
            party: p,
            values: sequences[p].values[window.clone()].to_vec(),
        });
        let value = rng.gen_range(0..3u8);
        let out = run_liar_round(&seqs, value, strategy, &thresholds, &mut rng);
        let list = |m: &crate::protocols::TritMessage, relayed| Payload::PositionList {
            value: m.value,
            positions: m.positions.clone(),
            relayed,
        };
        run.message("liar", a, b, k, list(&out.a_to_b, false), Some(reception_text(&out.b_reception)));
        run.message("liar", a, c, k, list(&out.a_to_c, false), Some(reception_text(&out.c_receptions[0])));
        run.message("liar", b, c, k, list(&out.b_own, false), Some(reception_text(&out.c_receptions[1])));
        run.message("liar", b, c, k, list(&out.b_relayed, true), Some(reception_text(&out.c_receptions[2])));
        let verdict = match (&out.verdict, out.agreed) {
            (Some(v), _) => {
                *accused.entry(v.accused.name()).or_default() += 1;
                format!("accuse {} ({:?}, {}+{} vs {:.1})", v.accused.name(), v.reason, v.own_len, v.relayed_len, v.threshold)
            }
            (None, Some(x)) => {
                agreed += 1;
                format!("agree on {x}")
            }
            (None, None) => "no decision".into(),
        };
        run.log("verdict", Some(k), "C".into(), "all".into(), format!("A intended {value}"), Some(verdict));
    }
    run.set("liar_runs", json!(runs));
    run.set("agreed", json!(agreed));
    run.set("accused", json!(accused));
    run.set("list_min", json!(thresholds.list_min));
    run.set("pair_min", json!(thresholds.pair_min));
    if accused.is_empty() { Outcome::Accept } else { Outcome::Accusation }
}
