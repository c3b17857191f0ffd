//! Generalised CHSH expression and maximisation of its quantum violation.
//!
//! `n - m` observers choose between directions A and a, the remaining `m`
//! between B and b. All directions are coplanar, so each correlation depends on
//! the angle between the two directions involved only; `theta_A` is fixed at 0.

use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::observables::{
    corr_closed_nm1, corr_closed_nm2, corr_exact, corr_sigma, correlation_bruteforce, peres_in_frame,
    BruteForceOracle, CorrelationSpec, Family,
};
use crate::simplex::{self, SimplexOptions};
use crate::singlet::{build_singlet, to_dense, DenseState};
use crate::spin::{CMatrix, Direction, SpinFrame};

/// Correlation `E(n, m, theta)` of the product of all observers' outcomes.
pub trait CorrelationKernel: Sync {
    fn correlation(&self, n: usize, m: usize, theta: f64) -> f64;
    fn name(&self) -> &'static str;
}

/// Published closed forms: `m = 1` and `m = 2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedForm;

impl CorrelationKernel for ClosedForm {
    fn correlation(&self, n: usize, m: usize, theta: f64) -> f64 {
        match m {
            1 => corr_closed_nm1(n, theta),
            2 => corr_closed_nm2(n, theta),
            _ => panic!("published closed forms exist for m = 1, 2 only (got {m})"),
        }
    }

    fn name(&self) -> &'static str {
        "closed-form"
    }
}

/// Symmetric-polynomial closed form, exact for every `m`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GeneralClosedForm;

impl CorrelationKernel for GeneralClosedForm {
    fn correlation(&self, n: usize, m: usize, theta: f64) -> f64 {
        corr_exact(n, m, theta)
    }

    fn name(&self) -> &'static str {
        "general-closed-form"
    }
}

/// Dense contraction of |S_n> for a fixed `n`.
pub struct BruteForce {
    n: usize,
    frame: SpinFrame,
    state: DenseState,
    peres_z: CMatrix,
}

impl BruteForce {
    pub fn new(n: usize) -> Result<Self> {
        let state = to_dense(&build_singlet(n)?)?;
        let frame = SpinFrame::new(n)?;
        let peres_z = peres_in_frame(&frame, &Direction::z()).matrix;
        Ok(BruteForce { n, frame, state, peres_z })
    }
}

impl CorrelationKernel for BruteForce {
    fn correlation(&self, n: usize, m: usize, theta: f64) -> f64 {
        assert_eq!(n, self.n, "brute-force kernel built for n = {}", self.n);
        let pb = peres_in_frame(&self.frame, &Direction::in_xz_plane(theta)).matrix;
        let mut ops: Vec<CMatrix> = vec![self.peres_z.clone(); n - m];
        ops.extend(std::iter::repeat_n(pb, m));
        let spec = CorrelationSpec::new(n, ops).expect("matching dimensions");
        correlation_bruteforce(&self.state, &spec).expect("matching dimensions")
    }

    fn name(&self) -> &'static str {
        "brute-force"
    }
}

/// Two-party residual state correlation (sign fixed by contraction).
#[derive(Debug, Clone, Copy, Default)]
pub struct Sigma;

impl CorrelationKernel for Sigma {
    fn correlation(&self, n: usize, _m: usize, theta: f64) -> f64 {
        corr_sigma(n, theta)
    }

    fn name(&self) -> &'static str {
        "sigma"
    }
}

/// Residual-state correlation by contraction. The pair is fixed at
/// construction, so the `n` passed to `correlation` is ignored (the
/// optimizer sees two parties).
pub struct SigmaBruteForce {
    n: usize,
    oracle: BruteForceOracle,
}

impl SigmaBruteForce {
    pub fn new(n: usize) -> Result<Self> {
        Ok(SigmaBruteForce { n, oracle: BruteForceOracle::new(n, Family::Sigma)? })
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl CorrelationKernel for SigmaBruteForce {
    fn correlation(&self, _n: usize, _m: usize, theta: f64) -> f64 {
        self.oracle.correlation(theta)
    }

    fn name(&self) -> &'static str {
        "sigma-brute-force"
    }
}

/// Four coplanar measurement angles `(A, a, B, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellSetting {
    pub n: usize,
    pub m: usize,
    pub angles: [f64; 4],
}

impl BellSetting {
    pub fn new(n: usize, m: usize, angles: [f64; 4]) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(Error::InvalidArgument(format!("need 1 <= m <= n-1, got n={n} m={m}")));
        }
        Ok(BellSetting { n, m, angles })
    }
}

/// `|E(A,B) + E(A,b) + E(a,B) - E(a,b)|`.
pub fn chsh_value(setting: &BellSetting, kernel: &dyn CorrelationKernel) -> f64 {
    let [ta, ta2, tb, tb2] = setting.angles;
    let e = |theta: f64| kernel.correlation(setting.n, setting.m, theta);
    (e(tb - ta) + e(tb2 - ta) + e(tb - ta2) - e(tb2 - ta2)).abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellResult {
    pub n: usize,
    pub m: usize,
    pub value: f64,
    pub argmax_angles: [f64; 4],
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Grid points per angle and per window.
    pub grid: usize,
    /// Grid slices refined with the simplex.
    pub refine_candidates: usize,
    pub simplex: SimplexOptions,
    pub exec: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            grid: 60,
            refine_candidates: 4,
            simplex: SimplexOptions { initial_step: 0.05, max_evals: 3000, f_tol: 1e-15, x_tol: 1e-12 },
            exec: Execution::default(),
        }
    }
}

/// Half-widths of the search windows: the full circle plus zooms on the
/// `1/sqrt(n)` and `1/n` scales where large-`n` correlations vary.
fn search_windows(n: usize) -> Vec<f64> {
    let mut windows = vec![PI];
    for w in [6.0 / (n as f64).sqrt(), 8.0 / n as f64] {
        if w < PI / 2.0 {
            windows.push(w);
        }
    }
    windows
}

struct Candidate {
    value: f64,
    angles: [f64; 3],
}

/// Best lattice point per `theta_a` slice of one window, slices in index order.
fn grid_window(
    n: usize,
    m: usize,
    kernel: &dyn CorrelationKernel,
    half_width: f64,
    grid: usize,
    exec: Execution,
) -> Vec<Candidate> {
    let g = grid as isize;
    let h = 2.0 * half_width / grid as f64;
    // Every angle difference on the lattice is an integer multiple of h in [-g, g].
    let table = exec.map(2 * grid + 1, |k| kernel.correlation(n, m, (k as isize - g) as f64 * h));
    let t = |k: isize| table[(k + g) as usize];
    let pos = |i: usize| i as isize - g / 2;

    exec.map(grid, |ia| {
        let a = pos(ia);
        let mut best = Candidate { value: f64::NEG_INFINITY, angles: [0.0; 3] };
        for ib in 0..grid {
            let b = pos(ib);
            for ib2 in 0..grid {
                let b2 = pos(ib2);
                let v = (t(b) + t(b2) + t(b - a) - t(b2 - a)).abs();
                if v > best.value {
                    best = Candidate { value: v, angles: [a as f64 * h, b as f64 * h, b2 as f64 * h] };
                }
            }
        }
        best
    })
}

/// Global maximum of the CHSH expression over `(theta_a, theta_B, theta_b)`.
///
/// A lattice search over every window picks the strongest slices, each is
/// polished with a simplex, and the best polished point wins (ties broken by
/// the earlier candidate). The result does not depend on `config.exec`.
pub fn maximize_violation(n: usize, m: usize, kernel: &dyn CorrelationKernel, config: &OptimizerConfig) -> Result<BellResult> {
    if m == 0 || m >= n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n-1, got n={n} m={m}")));
    }
    if config.grid < 4 {
        return Err(Error::InvalidArgument("grid resolution must be at least 4".into()));
    }
    let calls = AtomicUsize::new(0);
    let counted = |theta: f64| {
        calls.fetch_add(1, Ordering::Relaxed);
        kernel.correlation(n, m, theta)
    };
    let counting = FnKernel(&counted);

    let mut candidates = Vec::new();
    for w in search_windows(n) {
        let mut slices = grid_window(n, m, &counting, w, config.grid, config.exec);
        // Stable sort keeps index order among equal values.
        slices.sort_by(|x, y| y.value.total_cmp(&x.value));
        candidates.extend(slices.into_iter().take(config.refine_candidates));
    }

    let objective = |x: &[f64]| -> f64 {
        let setting = BellSetting { n, m, angles: [0.0, x[0], x[1], x[2]] };
        -chsh_value(&setting, &counting)
    };
    let polished = config.exec.map(candidates.len(), |i| {
        let c = &candidates[i];
        let r = simplex::minimize(objective, &c.angles, &config.simplex);
        let angles = [0.0, r.x[0], r.x[1], r.x[2]].map(|a: f64| a.rem_euclid(2.0 * PI));
        let value = chsh_value(&BellSetting { n, m, angles }, kernel);
        (value, angles)
    });

    let mut best = (f64::NEG_INFINITY, [0.0; 4]);
    for (value, angles) in polished {
        if value > best.0 {
            best = (value, angles);
        }
    }
    Ok(BellResult { n, m, value: best.0, argmax_angles: best.1, evaluations: calls.into_inner() })
}

struct FnKernel<'a, F: Fn(f64) -> f64 + Sync>(&'a F);

impl<F: Fn(f64) -> f64 + Sync> CorrelationKernel for FnKernel<'_, F> {
    fn correlation(&self, _n: usize, _m: usize, theta: f64) -> f64 {
        (self.0)(theta)
    }

    fn name(&self) -> &'static str {
        "counted"
    }
}

/// Maximum of two-party CHSH on the residual pair state.
pub fn maximize_sigma_violation(n: usize, config: &OptimizerConfig) -> Result<BellResult> {
    if n < 2 {
        return Err(Error::Size { n, min: 2, max: usize::MAX });
    }
    // Two parties, one on each side of the inequality.
    let kernel = FnKernel(&move |theta: f64| corr_sigma(n, theta));
    let mut r = maximize_violation(2, 1, &kernel, config)?;
    r.n = n;
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Decreasing,
    Increasing,
    Mixed,
}

#[derive(Debug, Clone)]
pub struct AsymptoteReport {
    pub m: usize,
    pub maxima: Vec<BellResult>,
    pub trend: Trend,
}

impl AsymptoteReport {
    pub fn last_value(&self) -> Option<f64> {
        self.maxima.last().map(|r| r.value)
    }
}

fn trend_of(values: &[f64]) -> Trend {
    let dec = values.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let inc = values.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    match (dec, inc) {
        (true, false) => Trend::Decreasing,
        (false, true) => Trend::Increasing,
        _ => Trend::Mixed,
    }
}

/// Violation maxima along an ascending list of `n` for one `m` family.
pub fn asymptote_estimate(m: usize, kernel: &dyn CorrelationKernel, ns: &[usize], config: &OptimizerConfig) -> Result<AsymptoteReport> {
    if ns.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("n list must be strictly ascending".into()));
    }
    let maxima = ns.iter().map(|&n| maximize_violation(n, m, kernel, config)).collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = maxima.iter().map(|r| r.value).collect();
    Ok(AsymptoteReport { m, trend: trend_of(&values), maxima })
}

/// Sigma-family maxima along an ascending list of `n`.
pub fn sigma_asymptote(ns: &[usize], config: &OptimizerConfig) -> Result<AsymptoteReport> {
    let maxima = ns.iter().map(|&n| maximize_sigma_violation(n, config)).collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = maxima.iter().map(|r| r.value).collect();
    Ok(AsymptoteReport { m: 1, trend: trend_of(&values), maxima })
}

/// Largest `|expression|` over deterministic local assignments of +/-1 values.
///
/// Every observer on the A side holds a pair `(A_j, a_j)`, every observer on
/// the B side a pair `(B_k, b_k)`; all `4^n` tables are enumerated. Only the
/// side products enter the expression, so this also covers the 2^4 reduced tables.
pub fn classical_bound(n: usize, m: usize) -> i32 {
    assert!(m >= 1 && m < n && n <= 12);
    let mut best = i32::MIN;
    for table in 0u64..(1u64 << (2 * n)) {
        let bit = |i: usize| if table >> i & 1 == 1 { -1i32 } else { 1 };
        let (mut big_a, mut small_a, mut big_b, mut small_b) = (1, 1, 1, 1);
        for j in 0..n - m {
            big_a *= bit(2 * j);
            small_a *= bit(2 * j + 1);
        }
        for k in n - m..n {
            big_b *= bit(2 * k);
            small_b *= bit(2 * k + 1);
        }
        let value = (big_a * big_b + big_a * small_b + small_a * big_b - small_a * small_b).abs();
        best = best.max(value);
    }
    best
}

/// Largest `|expression|` over the 16 side-product tables.
pub fn classical_bound_reduced() -> i32 {
    (0..16)
        .map(|t: u32| {
            let v = |i: u32| if t >> i & 1 == 1 { -1i32 } else { 1 };
            (v(0) * v(2) + v(0) * v(3) + v(1) * v(2) - v(1) * v(3)).abs()
        })
        .max()
        .unwrap()
}

/// CHSH value by contraction with arbitrary (not necessarily coplanar) directions.
pub fn chsh_value_directions(state: &DenseState, m: usize, dirs: &[Direction; 4]) -> Result<f64> {
    let n = state.levels();
    let frame = SpinFrame::new(n)?;
    let e = |a: &Direction, b: &Direction| -> Result<f64> {
        correlation_bruteforce(state, &CorrelationSpec::split(&frame, state.parties(), m, a, b))
    };
    let [da, da2, db, db2] = dirs;
    Ok((e(da, db)? + e(da, db2)? + e(da2, db)? - e(da2, db2)?).abs())
}

/// Multi-start search over general directions (A fixed at z) by contraction.
pub fn maximize_violation_out_of_plane(n: usize, m: usize, starts: usize, seed: u64, exec: Execution) -> Result<BellResult> {
    use rand::Rng;
    let state = to_dense(&build_singlet(n)?)?;
    let to_dirs = |x: &[f64]| {
        [
            Direction::z(),
            Direction::new(x[0], x[1]),
            Direction::new(x[2], x[3]),
            Direction::new(x[4], x[5]),
        ]
    };
    let calls = AtomicUsize::new(0);
    let runs = exec.map(starts, |i| {
        let mut rng = crate::exec::trial_rng(seed, i as u64);
        let x0: Vec<f64> = (0..6).map(|_| rng.gen_range(0.0..PI)).collect();
        let r = simplex::minimize(
            |x| {
                calls.fetch_add(4, Ordering::Relaxed);
                -chsh_value_directions(&state, m, &to_dirs(x)).expect("fixed dims")
            },
            &x0,
            &SimplexOptions { initial_step: 0.3, max_evals: 3000, f_tol: 1e-14, x_tol: 1e-10 },
        );
        (-r.value, r.x)
    });
    let (value, x) = runs.into_iter().fold((f64::NEG_INFINITY, vec![0.0; 6]), |acc, r| if r.0 > acc.0 { r } else { acc });
    let dirs = to_dirs(&x);
    let angles = [0.0, dirs[1].polar, dirs[2].polar, dirs[3].polar];
    Ok(BellResult { n, m, value, argmax_angles: angles, evaluations: calls.into_inner() })
}

pub const BELL_CSV_HEADER: &str = "family,n,m,kernel,max_value,theta_a,theta_B,theta_b,evaluations";

#[derive(Debug, Clone)]
pub struct BellRow {
    pub family: &'static str,
    pub kernel: &'static str,
    pub result: BellResult,
}

pub fn write_bell_csv<W: Write>(rows: &[BellRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{BELL_CSV_HEADER}")?;
    for r in rows {
        let a = r.result.argmax_angles;
        writeln!(
            out,
            "{},{},{},{},{:.9},{:.9},{:.9},{:.9},{}",
            r.family, r.result.n, r.result.m, r.kernel, r.result.value, a[1], a[2], a[3], r.result.evaluations
        )?;
    }
    Ok(())
}

pub fn write_bell_pretty<W: Write>(rows: &[BellRow], mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "{:<8} {:>6} {:>3} {:<20} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "family", "n", "m", "kernel", "max", "theta_a", "theta_B", "theta_b", "evals"
    )?;
    for r in rows {
        let a = r.result.argmax_angles;
        writeln!(
            out,
            "{:<8} {:>6} {:>3} {:<20} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {:>10}",
            r.family, r.result.n, r.result.m, r.kernel, r.result.value, a[1], a[2], a[3], r.result.evaluations
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn quick() -> OptimizerConfig {
        OptimizerConfig { grid: 24, ..Default::default() }
    }

    #[test]
    fn tsirelson_setting_for_two_qubits() {
        // The minus sign sits on E(a, b), so b = -pi/4 rather than 3pi/4.
        let s = BellSetting::new(2, 1, [0.0, PI / 2.0, PI / 4.0, -PI / 4.0]).unwrap();
        assert!((chsh_value(&s, &ClosedForm) - 2.0 * SQRT_2).abs() < 1e-9);
        assert!((chsh_value(&s, &BruteForce::new(2).unwrap()) - 2.0 * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn degenerate_setting() {
        for n in 2..6 {
            let s = BellSetting::new(n, 1, [0.4; 4]).unwrap();
            assert!((chsh_value(&s, &ClosedForm) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn setting_validation() {
        assert!(BellSetting::new(3, 0, [0.0; 4]).is_err());
        assert!(BellSetting::new(3, 3, [0.0; 4]).is_err());
        assert!(maximize_violation(3, 3, &ClosedForm, &quick()).is_err());
    }

    #[test]
    fn classical_bounds() {
        assert_eq!(classical_bound_reduced(), 2);
        for n in 2..=5 {
            for m in 1..n {
                assert_eq!(classical_bound(n, m), 2);
            }
        }
    }

    #[test]
    fn result_reproducible_from_angles() {
        let r = maximize_violation(3, 1, &ClosedForm, &quick()).unwrap();
        let again = chsh_value(&BellSetting::new(3, 1, r.argmax_angles).unwrap(), &ClosedForm);
        assert!((again - r.value).abs() < 1e-12);
        assert!(r.evaluations > 0);
    }

    #[test]
    fn sequential_and_parallel_identical() {
        let mut cfg = quick();
        cfg.exec = Execution::Sequential;
        let a = maximize_violation(4, 2, &ClosedForm, &cfg).unwrap();
        cfg.exec = Execution::Parallel;
        let b = maximize_violation(4, 2, &ClosedForm, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trend_classification() {
        assert_eq!(trend_of(&[3.0, 2.0, 1.0]), Trend::Decreasing);
        assert_eq!(trend_of(&[1.0, 2.0]), Trend::Increasing);
        assert_eq!(trend_of(&[1.0, 2.0, 1.5]), Trend::Mixed);
    }
}
