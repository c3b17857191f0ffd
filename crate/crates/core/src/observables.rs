//! Peres parity observables, correlation functions and post-measurement residual states.
//!
//! Two independent routes compute every correlation: brute-force contraction
//! of the dense state, and closed forms in the angle between directions.

use std::io::{self, Write};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::singlet::{build_singlet, flat_index, to_dense, tuple_of, DenseState, DENSE_N_MAX};
use crate::spin::{rotation_operator, CMatrix, Direction, SpinFrame};

/// A +/-1 valued observable built from a spin-component measurement.
#[derive(Debug, Clone)]
pub struct PeresObservable {
    pub n: usize,
    pub dir: Direction,
    pub matrix: CMatrix,
}

/// `(-1)^(s-m)` for level `k` (m = k - s): +1 on the top level, alternating downward.
pub fn peres_sign(n: usize, level: usize) -> f64 {
    if (n - 1 - level).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn peres_observable(n: usize, dir: &Direction) -> Result<PeresObservable> {
    let frame = SpinFrame::new(n)?;
    Ok(peres_in_frame(&frame, dir))
}

pub(crate) fn peres_in_frame(frame: &SpinFrame, dir: &Direction) -> PeresObservable {
    let n = frame.n();
    let u = rotation_operator(frame, dir);
    let d = CMatrix::from_diagonal(&DVector::from_iterator(
        n,
        (0..n).map(|k| Complex64::new(peres_sign(n, k), 0.0)),
    ));
    let matrix = u.matrix() * d * u.matrix().adjoint();
    PeresObservable { n, dir: *dir, matrix }
}

/// One local observable per party.
#[derive(Debug, Clone)]
pub struct CorrelationSpec {
    n: usize,
    observables: Vec<CMatrix>,
}

impl CorrelationSpec {
    pub fn new(n: usize, observables: Vec<CMatrix>) -> Result<Self> {
        for o in &observables {
            if o.nrows() != n || o.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: o.nrows() });
            }
        }
        Ok(CorrelationSpec { n, observables })
    }

    pub fn from_peres(obs: &[PeresObservable]) -> Result<Self> {
        let n = obs.first().map(|o| o.n).unwrap_or(0);
        CorrelationSpec::new(n, obs.iter().map(|o| o.matrix.clone()).collect())
    }

    /// `parties - m` Peres observables along `a` followed by `m` along `b`.
    pub fn split(frame: &SpinFrame, parties: usize, m: usize, a: &Direction, b: &Direction) -> Self {
        let pa = peres_in_frame(frame, a).matrix;
        let pb = peres_in_frame(frame, b).matrix;
        let mut observables = vec![pa; parties - m];
        observables.extend(std::iter::repeat_n(pb, m));
        CorrelationSpec { n: frame.n(), observables }
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }
}

/// `<psi| O_1 (x) ... (x) O_p |psi>`.
pub fn correlation_bruteforce(state: &DenseState, spec: &CorrelationSpec) -> Result<f64> {
    if spec.n != state.levels() {
        return Err(Error::DimensionMismatch { expected: state.levels(), actual: spec.n });
    }
    let ops: Vec<&CMatrix> = spec.observables.iter().collect();
    let applied = state.apply_product(&ops)?;
    let value = state.inner(&applied);
    debug_assert!(value.im.abs() < 1e-9, "non-real expectation {value}");
    Ok(value.re)
}

fn sign_floor_half(n: usize) -> f64 {
    if (n / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `sin(n theta) / sin(theta)`, taking the limit `n cos(theta)^(n-1)` at multiples of pi.
pub fn sine_ratio(n: usize, theta: f64) -> f64 {
    let s = theta.sin();
    if s.abs() < 1e-4 {
        // Chebyshev U_{n-1}(cos theta) is the same function without the division.
        let x = theta.cos();
        let (mut prev, mut cur) = (1.0, 2.0 * x);
        if n == 1 {
            return 1.0;
        }
        for _ in 2..n {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        (n as f64 * theta).sin() / s
    }
}

/// Correlation with `n-1` parties along one direction and one party at angle `theta`.
pub fn corr_closed_nm1(n: usize, theta: f64) -> f64 {
    sign_floor_half(n) * sine_ratio(n, theta) / n as f64
}

/// Published closed form for `n-2` parties along one direction and two at angle `theta`.
///
/// Agrees with brute-force contraction only for `n = 4`; see [`corr_exact`]
/// for the form valid at every `n`.
pub fn corr_closed_nm2(n: usize, theta: f64) -> f64 {
    sign_floor_half(n) * (1.0 + sine_ratio(n + 1, theta)) / (n as f64 + 2.0)
}

/// Exact correlation of |S_n> with `n-m` parties along one direction and `m`
/// at angle `theta`.
///
/// Measuring `n-m` parties leaves the other `m` in an antisymmetrised state of
/// the missing levels, so the correlation is the `m`-th elementary symmetric
/// polynomial of the eigenvalues `exp(2 i theta mu)` of the product of the two
/// parity operators, divided by `C(n, m)`.
pub fn corr_exact(n: usize, m: usize, theta: f64) -> f64 {
    assert!(m <= n);
    let s = (n as f64 - 1.0) / 2.0;
    let mut e = vec![Complex64::new(0.0, 0.0); m + 1];
    e[0] = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let lambda = Complex64::from_polar(1.0, 2.0 * theta * (k as f64 - s));
        for j in (1..=m).rev() {
            e[j] = e[j] + e[j - 1] * lambda;
        }
    }
    sign_floor_half(n) * e[m].re / binomial(n, m)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Residual-state correlation with the sign fixed by brute-force contraction:
/// `(-1)^(n-1) cos^(n-1) theta`.
pub fn corr_sigma(n: usize, theta: f64) -> f64 {
    -corr_sigma_published(n, theta)
}

/// Residual-state correlation with the published prefactor `(-1)^n`.
pub fn corr_sigma_published(n: usize, theta: f64) -> f64 {
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * theta.cos().powi(n as i32 - 1)
}

/// State left to the unmeasured parties after some parties measured along
/// `dir` and announced their results.
#[derive(Debug, Clone)]
pub struct ResidualState {
    pub n: usize,
    /// Original indices of the parties still holding particles.
    pub remaining: Vec<usize>,
    pub state: DenseState,
}

pub fn residual_after_measurement(
    state: &DenseState,
    measured_parties: &[usize],
    dir: &Direction,
    results: &[u8],
) -> Result<ResidualState> {
    let levels = state.levels();
    let parties = state.parties();
    if measured_parties.len() != results.len() {
        return Err(Error::DimensionMismatch { expected: measured_parties.len(), actual: results.len() });
    }
    let mut is_measured = vec![false; parties];
    for &p in measured_parties {
        if p >= parties || is_measured[p] {
            return Err(Error::InvalidArgument(format!("bad or repeated measured party {p}")));
        }
        is_measured[p] = true;
    }
    if let Some(&r) = results.iter().find(|&&r| r as usize >= levels) {
        return Err(Error::InvalidArgument(format!("result {r} out of range")));
    }

    // Bring the measured factors into the eigenbasis of the measured component.
    let frame = SpinFrame::new(levels)?;
    let u_dag = rotation_operator(&frame, dir).matrix().adjoint();
    let mut rotated = state.clone();
    for &p in measured_parties {
        rotated.apply_local(p, &u_dag)?;
    }

    let remaining: Vec<usize> = (0..parties).filter(|&p| !is_measured[p]).collect();
    let mut amps = vec![Complex64::new(0.0, 0.0); levels.pow(remaining.len() as u32)];
    let mut full = vec![0u8; parties];
    for (&p, &r) in measured_parties.iter().zip(results) {
        full[p] = r;
    }
    for (i, a) in amps.iter_mut().enumerate() {
        let rest = tuple_of(i, levels, remaining.len());
        for (&p, &v) in remaining.iter().zip(&rest) {
            full[p] = v;
        }
        *a = rotated.amplitudes()[flat_index(&full, levels)];
    }
    let residual = DenseState::from_amplitudes(levels, remaining.len(), amps)?;
    let norm = residual.norm();
    if norm < 1e-12 {
        return Err(Error::ImpossibleOutcome(format!("{results:?} along {dir:?}")));
    }
    let state = residual.normalized().expect("nonzero norm");
    Ok(ResidualState { n: levels, remaining, state })
}

/// Two-party residual of |S_n> after parties `0..n-2` measure along z and
/// announce `1, ..., n-2`, leaving the extremal pair of levels `{0, n-1}`.
pub fn sigma_residual(n: usize) -> Result<ResidualState> {
    let dense = to_dense(&build_singlet(n)?)?;
    let measured: Vec<usize> = (0..n - 2).collect();
    let results: Vec<u8> = (1..n as u8 - 1).collect();
    residual_after_measurement(&dense, &measured, &Direction::z(), &results)
}

/// Brute-force residual correlation: first remaining party measures its Peres
/// observable along the announcement axis, the second at angle `theta` from it.
pub fn corr_sigma_bruteforce(residual: &ResidualState, theta: f64) -> Result<f64> {
    let frame = SpinFrame::new(residual.n)?;
    let spec = CorrelationSpec::split(&frame, 2, 1, &Direction::z(), &Direction::in_xz_plane(theta));
    correlation_bruteforce(&residual.state, &spec)
}

/// Correlation families that have both a closed form and a brute-force oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// One party on the second direction.
    M1,
    /// Two parties on the second direction, published closed form.
    M2,
    /// Two parties on the second direction, symmetric-polynomial closed form.
    M2General,
    /// Two-party residual state, published sign.
    Sigma,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::M1 => "1",
            Family::M2 => "2",
            Family::M2General => "2-general",
            Family::Sigma => "sigma",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "1" => Some(Family::M1),
            "2" => Some(Family::M2),
            "2-general" => Some(Family::M2General),
            "sigma" => Some(Family::Sigma),
            _ => None,
        }
    }

    pub fn min_n(self) -> usize {
        match self {
            Family::M1 | Family::Sigma => 2,
            Family::M2 | Family::M2General => 3,
        }
    }

    pub fn closed_form(self, n: usize, theta: f64) -> f64 {
        match self {
            Family::M1 => corr_closed_nm1(n, theta),
            Family::M2 => corr_closed_nm2(n, theta),
            Family::M2General => corr_exact(n, 2, theta),
            Family::Sigma => corr_sigma_published(n, theta),
        }
    }
}

/// Brute-force evaluator for one `(n, family)` pair with the state built once.
pub struct BruteForceOracle {
    n: usize,
    family: Family,
    frame: SpinFrame,
    state: DenseState,
}

impl BruteForceOracle {
    pub fn new(n: usize, family: Family) -> Result<Self> {
        if n < family.min_n() || n > DENSE_N_MAX {
            return Err(Error::Size { n, min: family.min_n(), max: DENSE_N_MAX });
        }
        let state = match family {
            Family::Sigma => sigma_residual(n)?.state,
            _ => to_dense(&build_singlet(n)?)?,
        };
        Ok(BruteForceOracle { n, family, frame: SpinFrame::new(n)?, state })
    }

    pub fn correlation(&self, theta: f64) -> f64 {
        let (parties, m) = match self.family {
            Family::M1 => (self.n, 1),
            Family::M2 | Family::M2General => (self.n, 2),
            Family::Sigma => (2, 1),
        };
        let spec = CorrelationSpec::split(&self.frame, parties, m, &Direction::z(), &Direction::in_xz_plane(theta));
        correlation_bruteforce(&self.state, &spec).expect("dimensions fixed at construction")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub family: Family,
    pub theta: f64,
    pub closed_form: f64,
    pub brute_force: f64,
    pub abs_diff: f64,
}

pub const SWEEP_CSV_HEADER: &str = "n,m,theta,closed_form,brute_force,abs_diff";

/// Closed form against brute force for every `(n, family, theta)` combination.
pub fn correlation_sweep(
    ns: &[usize],
    families: &[Family],
    thetas: &[f64],
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &family in families {
        for &n in ns {
            if n < family.min_n() {
                continue;
            }
            let oracle = BruteForceOracle::new(n, family)?;
            let values = exec.map(thetas.len(), |i| oracle.correlation(thetas[i]));
            for (&theta, brute_force) in thetas.iter().zip(values) {
                let closed_form = family.closed_form(n, theta);
                rows.push(SweepRow {
                    n,
                    family,
                    theta,
                    closed_form,
                    brute_force,
                    abs_diff: (closed_form - brute_force).abs(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{:.12},{:.12},{:.12},{:.3e}",
            r.n,
            r.family.label(),
            r.theta,
            r.closed_form,
            r.brute_force,
            r.abs_diff
        )?;
    }
    Ok(())
}
