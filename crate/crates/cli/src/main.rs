use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use supersinglet::bell::{
    maximize_sigma_violation, maximize_violation, write_bell_csv, write_bell_pretty, BellRow, BruteForce,
    ClosedForm, CorrelationKernel, GeneralClosedForm, OptimizerConfig, Sigma, SigmaBruteForce,
};
use supersinglet::error::Error;
use supersinglet::exec::{trial_rng, Execution};
use supersinglet::netsim::{run_scenario, Outcome, ScenarioConfig};
use supersinglet::observables::{correlation_sweep, write_sweep_csv, Family};
use supersinglet::protocols::{cheat_calibration, fabrication_calibration, liar_calibration, LiarStrategy, DEFAULT_SIGMA_BAND};
use supersinglet::verify::{verify_state, VerifyOptions, VERIFY_CSV_HEADER};

const EXIT_ABORT: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_CONFIG: u8 = 4;
const EXIT_ACCUSATION: u8 = 5;

#[derive(Parser)]
#[command(name = "supersinglet", version, about = "N-particle N-level singlet simulator")]
struct Cli {
    /// Directory for outputs when no --output is given (stdout otherwise).
    #[arg(long, global = true, env = "SUPERSINGLET_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Run everything on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for all randomness; drawn and printed to stderr when omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Pretty,
}

#[derive(Subcommand)]
enum Command {
    /// Check antisymmetry, normalisation, rotational invariance and the sampler.
    VerifyState {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 5)]
        n_max: usize,
        #[arg(long, default_value_t = 100)]
        directions: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        /// Flip one amplitude sign first (the checks must then fail).
        #[arg(long, hide = true)]
        corrupt_amplitude: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Maximal violations of the CHSH-type inequality.
    BellTable {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Grid points per angle.
        #[arg(long, default_value_t = 60)]
        grid: usize,
        /// Large n used for the asymptotic rows.
        #[arg(long, default_value_t = 1000)]
        large_n: usize,
        /// Skip the brute-force rows.
        #[arg(long)]
        no_brute_force: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Closed-form correlations against brute-force contraction, as CSV.
    CorrSweep {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        /// Families: 1, 2, 2-general, sigma (repeatable; default all).
        #[arg(long = "m", value_parser = parse_family)]
        families: Vec<Family>,
        /// Random angles per (n, m).
        #[arg(long, default_value_t = 25)]
        angles: usize,
        /// Exit with status 3 if any row differs by more than this.
        #[arg(long)]
        strict: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a protocol scenario from a TOML file; writes a JSON-lines transcript.
    RunScenario {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Empirical detection curves for cheating, fabrication and lying.
    DetectCalibration {
        /// Parties in the secret-sharing curve.
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 5)]
        k_max: usize,
        /// Sequence length L for the liar checks.
        #[arg(long, default_value_t = 300)]
        length: usize,
        /// Liar-detection runs per strategy.
        #[arg(long, default_value_t = 1000)]
        runs: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_family(s: &str) -> Result<Family, String> {
    Family::parse(s).ok_or_else(|| format!("unknown family `{s}` (expected 1, 2, 2-general or sigma)"))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::thread_rng().gen();
        eprintln!("seed: {s}");
        s
    })
}

fn open_output(explicit: Option<&Path>, out_dir: Option<&Path>, default_name: &str) -> anyhow::Result<Box<dyn Write>> {
    let path = match (explicit, out_dir) {
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(dir)) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            Some(dir.join(default_name))
        }
        (None, None) => None,
    };
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.downcast_ref::<Error>().is_some_and(|e| matches!(e, Error::Config(_) | Error::Capacity { .. }));
            ExitCode::from(if config { EXIT_CONFIG } else { 1 })
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let out_dir = cli.out_dir.as_deref();
    match &cli.command {
        Command::VerifyState { n_min, n_max, directions, samples, corrupt_amplitude, common } => {
            let seed = resolve_seed(common.seed);
            let mut out = open_output(common.output.as_deref(), out_dir, "verify_state.csv")?;
            writeln!(out, "{VERIFY_CSV_HEADER}")?;
            let mut ok = true;
            for n in *n_min..=*n_max {
                let opts = VerifyOptions {
                    directions: *directions,
                    samples: *samples,
                    corrupt: *corrupt_amplitude,
                    seed,
                    exec,
                    ..Default::default()
                };
                let check = verify_state(n, &opts)?;
                ok &= check.passed;
                writeln!(out, "{}", check.csv_row())?;
            }
            out.flush()?;
            Ok(if ok { 0 } else { EXIT_VERIFY })
        }
        Command::BellTable { format, grid, large_n, no_brute_force, output } => {
            let cfg = OptimizerConfig { grid: *grid, exec, ..Default::default() };
            let rows = bell_rows(*large_n, !no_brute_force, &cfg)?;
            let name = match format {
                Format::Csv => "bell_table.csv",
                Format::Pretty => "bell_table.txt",
            };
            let mut out = open_output(output.as_deref(), out_dir, name)?;
            match format {
                Format::Csv => write_bell_csv(&rows, &mut out)?,
                Format::Pretty => write_bell_pretty(&rows, &mut out)?,
            }
            out.flush()?;
            Ok(0)
        }
        Command::CorrSweep { n_min, n_max, families, angles, strict, common } => {
            let seed = resolve_seed(common.seed);
            let families =
                if families.is_empty() { vec![Family::M1, Family::M2, Family::M2General, Family::Sigma] } else { families.clone() };
            let mut rng = trial_rng(seed, 0);
            let thetas: Vec<f64> = (0..*angles).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
            let ns: Vec<usize> = (*n_min..=*n_max).collect();
            let rows = correlation_sweep(&ns, &families, &thetas, exec)?;
            let mut out = open_output(common.output.as_deref(), out_dir, "corr_sweep.csv")?;
            write_sweep_csv(&rows, &mut out)?;
            out.flush()?;
            for family in &families {
                let bad: Vec<usize> = ns
                    .iter()
                    .copied()
                    .filter(|&n| rows.iter().any(|r| r.family == *family && r.n == n && r.abs_diff > 1e-8))
                    .collect();
                if !bad.is_empty() {
                    eprintln!("note: m={} closed form disagrees with brute force at n = {bad:?}", family.label());
                }
            }
            let worst = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
            Ok(match strict {
                Some(tol) if worst > *tol => EXIT_VERIFY,
                _ => 0,
            })
        }
        Command::RunScenario { config, common } => {
            let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
            let cfg = ScenarioConfig::parse(&text).with_context(|| format!("in {}", config.display()))?;
            let seed = match (common.seed, cfg.seed) {
                (Some(s), _) | (None, Some(s)) => s,
                (None, None) => resolve_seed(None),
            };
            let transcript = run_scenario(&cfg, seed)?;
            let mut out = open_output(common.output.as_deref(), out_dir, "transcript.jsonl")?;
            transcript.write_jsonl(&mut out)?;
            out.flush()?;
            eprintln!("{}", summary_line(&transcript));
            Ok(match transcript.outcome {
                Outcome::Accept => 0,
                Outcome::Abort => EXIT_ABORT,
                Outcome::Accusation => EXIT_ACCUSATION,
            })
        }
        Command::DetectCalibration { n, trials, k_max, length, runs, common } => {
            let seed = resolve_seed(common.seed);
            let mut out = open_output(common.output.as_deref(), out_dir, "detect_calibration.csv")?;
            writeln!(out, "curve,param,trials,hits,rate,expected,z")?;
            let row = |out: &mut dyn Write, curve: &str, param: String, e: &supersinglet::protocols::RateEstimate| {
                writeln!(out, "{curve},{param},{},{},{:.6},{:.6},{:.3}", e.trials, e.hits, e.rate(), e.expected, e.z_score())
            };
            for c in cheat_calibration(*n, *trials, seed, exec)? {
                row(&mut out, "cheat-next-honest", format!("r={}", c.r_including_cheater), &c.next_honest)?;
                row(&mut out, "cheat-abort", format!("r={}", c.r_including_cheater), &c.aborts)?;
            }
            for k in 1..=*k_max {
                row(&mut out, "fabrication", format!("k={k}"), &fabrication_calibration(k, *length, *trials, seed, exec))?;
            }
            let strategies = [
                ("honest", LiarStrategy::Honest),
                ("dishonest-a", LiarStrategy::DishonestA),
                ("dishonest-b", LiarStrategy::DishonestB),
                ("fabricator", LiarStrategy::Fabricator { k: 1 }),
            ];
            for (name, s) in strategies {
                let e = liar_calibration(s, *length, *runs, DEFAULT_SIGMA_BAND, seed, exec);
                row(&mut out, "liar-accuracy", name.to_string(), &e)?;
            }
            out.flush()?;
            Ok(0)
        }
    }
}

fn summary_line(t: &supersinglet::netsim::Transcript) -> String {
    let mut parts = vec![format!("outcome={}", serde_json::to_value(t.outcome).unwrap_or_default().as_str().unwrap_or("?"))];
    for (k, v) in &t.summary {
        if !v.is_object() && !v.is_array() {
            parts.push(format!("{k}={v}"));
        }
    }
    if let (Some(a), Some(d)) = (t.summary.get("cheat_attempts"), t.summary.get("cheat_detected")) {
        if let (Some(a), Some(d)) = (a.as_u64(), d.as_u64()) {
            if a > 0 {
                parts.push(format!("abort_rate={:.4}", d as f64 / a as f64));
            }
        }
    }
    if let Some(by_r) = t.summary.get("cheat_by_r").and_then(|v| v.as_object()) {
        for (r, e) in by_r {
            let r: f64 = r.parse().unwrap_or(f64::NAN);
            let attempts = e["attempts"].as_u64().unwrap_or(0);
            let detected = e["detected"].as_u64().unwrap_or(0);
            parts.push(format!(
                "r={r}:{detected}/{attempts} (abort target {:.4}, next-honest target 1/(r-1)={:.4})",
                (r - 2.0) / (r - 1.0),
                1.0 / (r - 1.0)
            ));
        }
    }
    parts.join(" ")
}

fn bell_rows(large_n: usize, brute: bool, cfg: &OptimizerConfig) -> anyhow::Result<Vec<BellRow>> {
    if large_n < 6 {
        bail!("--large-n must be at least 6");
    }
    let mut rows = Vec::new();
    let mut push = |family: &'static str, n: usize, m: usize, kernel: &dyn CorrelationKernel| -> anyhow::Result<()> {
        let result = maximize_violation(n, m, kernel, cfg)?;
        rows.push(BellRow { family, kernel: kernel.name(), result });
        Ok(())
    };
    for n in [2, 3, 4, 5, large_n] {
        push("m1", n, 1, &ClosedForm)?;
    }
    for n in [4, 5, large_n] {
        push("m2", n, 2, &ClosedForm)?;
    }
    for n in [4, 5, large_n] {
        push("m2", n, 2, &GeneralClosedForm)?;
    }
    if brute {
        for n in [2, 3, 4, 5] {
            push("m1", n, 1, &BruteForce::new(n)?)?;
        }
        for n in [4, 5] {
            push("m2", n, 2, &BruteForce::new(n)?)?;
        }
    }
    for n in [2, 3, large_n] {
        rows.push(BellRow { family: "sigma", kernel: Sigma.name(), result: maximize_sigma_violation(n, cfg)? });
    }
    if brute {
        for n in [2, 3] {
            let kernel = SigmaBruteForce::new(n)?;
            rows.push(BellRow { family: "sigma", kernel: kernel.name(), result: maximize_violation(2, 1, &kernel, cfg).map(|mut r| {
                r.n = n;
                r
            })? });
        }
    }
    Ok(rows)
}
