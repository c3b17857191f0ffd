//! Declarative scenario files (TOML).
//!
//! ```toml
//! scenario = "secret-sharing"
//! n = 4
//! rounds = 4000
//! test_fraction = 0.5
//! seed = 7
//! length = 1000
//!
//! [secret_sharing]
//! dealer = 0
//! cheater = 2
//! ```

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::protocols::{LiarStrategy, DEFAULT_SIGMA_BAND};
use crate::singlet::SPARSE_N_MAX;
use crate::spin::Direction;

use super::source::Eavesdropper;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Strangers,
    SecretSharing,
    LiarDetection,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Strangers => "strangers",
            ScenarioKind::SecretSharing => "secret-sharing",
            ScenarioKind::LiarDetection => "liar-detection",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AdversaryConfig {
    InterceptResend {
        polar: f64,
        #[serde(default)]
        azimuth: f64,
        #[serde(default = "one")]
        fraction: f64,
    },
}

impl AdversaryConfig {
    pub fn eavesdropper(&self) -> Eavesdropper {
        match *self {
            AdversaryConfig::InterceptResend { polar, azimuth, fraction } => {
                Eavesdropper { dir: Direction::new(polar, azimuth), fraction }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecretSharingConfig {
    #[serde(default)]
    pub dealer: usize,
    pub cheater: Option<usize>,
    /// Value the cheater always claims; random among undeclared values when absent.
    pub cheat_value: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiarStrategyName {
    Honest,
    DishonestA,
    DishonestB,
    Fabricator,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LiarConfig {
    pub strategy: LiarStrategyName,
    /// Positions a fabricator adds to each list.
    #[serde(default = "one_usize")]
    pub fabricated: usize,
    #[serde(default = "one_usize")]
    pub runs: usize,
    #[serde(default = "default_band")]
    pub sigma_band: f64,
}

impl LiarConfig {
    pub fn strategy(&self) -> LiarStrategy {
        match self.strategy {
            LiarStrategyName::Honest => LiarStrategy::Honest,
            LiarStrategyName::DishonestA => LiarStrategy::DishonestA,
            LiarStrategyName::DishonestB => LiarStrategy::DishonestB,
            LiarStrategyName::Fabricator => LiarStrategy::Fabricator { k: self.fabricated },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureConfig {
    pub parties: Vec<usize>,
    #[serde(default = "yes")]
    pub publish: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub n: usize,
    /// Source rounds distributed before testing.
    pub rounds: usize,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    pub seed: Option<u64>,
    /// Positions used by the protocol (per run for liar detection); all
    /// surviving rounds when absent.
    pub length: Option<usize>,
    pub adversary: Option<AdversaryConfig>,
    pub secret_sharing: Option<SecretSharingConfig>,
    pub liar: Option<LiarConfig>,
    pub capture: Option<CaptureConfig>,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

fn yes() -> bool {
    true
}

fn default_band() -> f64 {
    DEFAULT_SIGMA_BAND
}

fn default_test_fraction() -> f64 {
    0.5
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().trim().to_string();
            match e.span() {
                Some(span) => Error::Config(format!("line {}: {msg}", line_of(text, span.start))),
                None => Error::Config(msg),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(2..=SPARSE_N_MAX).contains(&self.n) {
            return bad(format!("n = {} outside 2..={SPARSE_N_MAX}", self.n));
        }
        if !(0.0..1.0).contains(&self.test_fraction) {
            return bad(format!("test_fraction = {} must lie in [0, 1)", self.test_fraction));
        }
        if let Some(AdversaryConfig::InterceptResend { fraction, .. }) = self.adversary {
            if !(0.0..=1.0).contains(&fraction) {
                return bad(format!("adversary fraction = {fraction} must lie in [0, 1]"));
            }
        }
        match self.scenario {
            ScenarioKind::SecretSharing => {
                let ss = self.secret_sharing.clone().unwrap_or(SecretSharingConfig { dealer: 0, cheater: None, cheat_value: None });
                if ss.dealer >= self.n {
                    return bad(format!("dealer {} is not a party", ss.dealer));
                }
                if let Some(c) = ss.cheater {
                    if c >= self.n || c == ss.dealer {
                        return bad(format!("cheater {c} must be an agent other than the dealer"));
                    }
                    if self.capture.as_ref().is_some_and(|cap| cap.parties.contains(&c)) {
                        return bad(format!("cheater {c} cannot be captured"));
                    }
                }
                if let Some(v) = ss.cheat_value {
                    if v as usize >= self.n {
                        return bad(format!("cheat_value {v} outside 0..{}", self.n));
                    }
                }
                if self.capture.as_ref().is_some_and(|cap| cap.parties.contains(&ss.dealer)) {
                    return bad("the dealer cannot be captured".into());
                }
            }
            ScenarioKind::LiarDetection => {
                if self.n != 3 {
                    return bad(format!("liar detection needs n = 3, got {}", self.n));
                }
                if self.liar.is_none() {
                    return bad("liar-detection needs a [liar] table".into());
                }
                if self.capture.is_some() {
                    return bad("capture is not supported for liar detection".into());
                }
            }
            ScenarioKind::Strangers => {}
        }
        if let Some(cap) = &self.capture {
            if let Some(p) = cap.parties.iter().find(|&&p| p >= self.n) {
                return bad(format!("captured party {p} is not a party"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg = ScenarioConfig::parse(
            r#"
scenario = "liar-detection"
n = 3
rounds = 2000
seed = 4
length = 300

[adversary]
kind = "intercept-resend"
polar = 0.5

[liar]
strategy = "dishonest-b"
runs = 2
"#,
        )
        .unwrap();
        assert_eq!(cfg.scenario, ScenarioKind::LiarDetection);
        assert_eq!(cfg.test_fraction, 0.5);
        assert_eq!(cfg.liar.as_ref().unwrap().strategy(), LiarStrategy::DishonestB);
        assert_eq!(cfg.adversary.unwrap().eavesdropper().fraction, 1.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = ScenarioConfig::parse("scenario = \"strangers\"\nn = 3\nrounds = \"many\"\n").unwrap_err();
        match err {
            Error::Config(m) => assert!(m.starts_with("line 3"), "{m}"),
            other => panic!("{other:?}"),
        }
        let err = ScenarioConfig::parse("scenario = \"strangers\"\nn = 3\nrounds = 5\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config(m) if m.starts_with("line 4")));
    }

    #[test]
    fn semantic_checks() {
        assert!(ScenarioConfig::parse("scenario = \"liar-detection\"\nn = 4\nrounds = 5\n[liar]\nstrategy = \"honest\"\n").is_err());
        assert!(ScenarioConfig::parse("scenario = \"strangers\"\nn = 3\nrounds = 5\ntest_fraction = 1.0\n").is_err());
        assert!(ScenarioConfig::parse("scenario = \"secret-sharing\"\nn = 3\nrounds = 5\n[secret_sharing]\ncheater = 0\n").is_err());
    }
}
