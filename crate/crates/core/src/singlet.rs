//! The N-particle N-level singlet state, its dense form and measurement sampling.
//!
//! Basis convention: the tensor index tuple `(i_1, ..., i_n)` maps to the flat
//! index `sum_k i_k * n^(n-k)`, so the first subsystem is most significant.

use std::collections::BTreeMap;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::spin::{rotation_operator, CMatrix, Direction, Rotation, SpinFrame};

/// Largest `n` for which dense `n^n` vectors are built.
pub const DENSE_N_MAX: usize = 7;
/// Largest `n` for which the sparse `n!`-term map is built.
pub const SPARSE_N_MAX: usize = 10;

/// Number of inversions of `perm`.
pub fn inversions(perm: &[u8]) -> usize {
    let mut count = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                count += 1;
            }
        }
    }
    count
}

/// `(-1)^t` where `t` is the number of transpositions sorting `perm`.
pub fn parity_sign(perm: &[u8]) -> i8 {
    if inversions(perm).is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn is_permutation(values: &[u8]) -> bool {
    let n = values.len();
    let mut seen = vec![false; n];
    for &v in values {
        let v = v as usize;
        if v >= n || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<u8>> {
    let mut current: Vec<u8> = (0..n as u8).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
        out.push(current.clone());
    }
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Flat index of a tensor index tuple over `levels`-level subsystems.
pub fn flat_index(tuple: &[u8], levels: usize) -> usize {
    tuple.iter().fold(0, |acc, &d| acc * levels + d as usize)
}

pub fn tuple_of(mut index: usize, levels: usize, parties: usize) -> Vec<u8> {
    let mut t = vec![0u8; parties];
    for k in (0..parties).rev() {
        t[k] = (index % levels) as u8;
        index /= levels;
    }
    t
}

/// Sparse amplitude map of |S_n>.
#[derive(Debug, Clone, PartialEq)]
pub struct SingletState {
    n: usize,
    amplitudes: BTreeMap<Vec<u8>, f64>,
}

pub fn build_singlet(n: usize) -> Result<SingletState> {
    if !(2..=SPARSE_N_MAX).contains(&n) {
        return Err(Error::Size { n, min: 2, max: SPARSE_N_MAX });
    }
    let modulus = 1.0 / (factorial(n) as f64).sqrt();
    let amplitudes = permutations(n)
        .into_iter()
        .map(|p| {
            let a = parity_sign(&p) as f64 * modulus;
            (p, a)
        })
        .collect();
    Ok(SingletState { n, amplitudes })
}

impl SingletState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitude(&self, key: &[u8]) -> f64 {
        self.amplitudes.get(key).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u8>, f64)> {
        self.amplitudes.iter().map(|(k, &a)| (k, a))
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a * a).sum()
    }

    /// Overwrites one amplitude. Used to build negative controls.
    pub fn set_amplitude(&mut self, key: Vec<u8>, value: f64) {
        self.amplitudes.insert(key, value);
    }

    /// State with tensor factors `a` and `b` exchanged.
    pub fn swap_factors(&self, a: usize, b: usize) -> SingletState {
        let amplitudes = self
            .amplitudes
            .iter()
            .map(|(k, &v)| {
                let mut k = k.clone();
                k.swap(a, b);
                (k, v)
            })
            .collect();
        SingletState { n: self.n, amplitudes }
    }

    /// True if every factor exchange negates every amplitude exactly.
    pub fn is_antisymmetric(&self) -> bool {
        for a in 0..self.n {
            for b in a + 1..self.n {
                let swapped = self.swap_factors(a, b);
                if swapped.amplitudes.len() != self.amplitudes.len() {
                    return false;
                }
                for (k, &v) in &swapped.amplitudes {
                    if self.amplitude(k) != -v {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Dense state vector over `parties` subsystems of `levels` levels each.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    levels: usize,
    parties: usize,
    amps: Vec<Complex64>,
}

pub fn to_dense(state: &SingletState) -> Result<DenseState> {
    let n = state.n;
    if n > DENSE_N_MAX {
        return Err(Error::Size { n, min: 2, max: DENSE_N_MAX });
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); n.pow(n as u32)];
    for (k, a) in state.terms() {
        amps[flat_index(k, n)] = Complex64::new(a, 0.0);
    }
    Ok(DenseState { levels: n, parties: n, amps })
}

impl DenseState {
    pub fn from_amplitudes(levels: usize, parties: usize, amps: Vec<Complex64>) -> Result<Self> {
        let dim = levels.pow(parties as u32);
        if amps.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: amps.len() });
        }
        Ok(DenseState { levels, parties, amps })
    }

    /// Product state `|k_1> (x) ... (x) |k_p>` with each factor given as a column vector.
    pub fn product(levels: usize, factors: &[Vec<Complex64>]) -> Self {
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for f in factors {
            debug_assert_eq!(f.len(), levels);
            amps = amps.iter().flat_map(|&a| f.iter().map(move |&b| a * b)).collect();
        }
        DenseState { levels, parties: factors.len(), amps }
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, tuple: &[u8]) -> Complex64 {
        self.amps[flat_index(tuple, self.levels)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn normalized(mut self) -> Option<Self> {
        let norm = self.norm();
        if norm == 0.0 {
            return None;
        }
        self.amps.iter_mut().for_each(|a| *a /= norm);
        Some(self)
    }

    /// Applies `op` to tensor factor `factor` in place.
    pub fn apply_local(&mut self, factor: usize, op: &CMatrix) -> Result<()> {
        let d = self.levels;
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: op.nrows() });
        }
        if factor >= self.parties {
            return Err(Error::InvalidArgument(format!("factor {factor} >= {}", self.parties)));
        }
        let stride = d.pow((self.parties - 1 - factor) as u32);
        let block = stride * d;
        let mut scratch = vec![Complex64::new(0.0, 0.0); d];
        for base in (0..self.amps.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, s) in scratch.iter_mut().enumerate() {
                    *s = (0..d).map(|j| op[(i, j)] * self.amps[start + j * stride]).sum();
                }
                for (i, s) in scratch.iter().enumerate() {
                    self.amps[start + i * stride] = *s;
                }
            }
        }
        Ok(())
    }

    /// Applies one operator per factor.
    pub fn apply_product(&self, ops: &[&CMatrix]) -> Result<DenseState> {
        if ops.len() != self.parties {
            return Err(Error::DimensionMismatch { expected: self.parties, actual: ops.len() });
        }
        let mut out = self.clone();
        for (k, op) in ops.iter().enumerate() {
            out.apply_local(k, op)?;
        }
        Ok(out)
    }

    /// Exact Born probabilities for all parties measuring their spin
    /// component along `dir`, indexed by flat outcome index.
    pub fn born_probabilities(&self, dir: &Direction) -> Result<Vec<f64>> {
        let frame = SpinFrame::new(self.levels)?;
        let u_dag = rotation_operator(&frame, dir).matrix().adjoint();
        let ops = vec![&u_dag; self.parties];
        let rotated = self.apply_product(&ops)?;
        Ok(rotated.amps.iter().map(|a| a.norm_sqr()).collect())
    }

    /// Writes `index re im` lines for every nonzero amplitude.
    pub fn write_text<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# levels={} parties={}", self.levels, self.parties)?;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                writeln!(out, "{i} {:e} {:e}", a.re, a.im)?;
            }
        }
        Ok(())
    }

    pub fn read_text(text: &str) -> Result<DenseState> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Config("empty dense state".into()))?;
        let field = |name: &str| -> Result<usize> {
            header
                .split_whitespace()
                .find_map(|t| t.strip_prefix(name))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Config(format!("missing {name} in header")))
        };
        let levels = field("levels=")?;
        let parties = field("parties=")?;
        let mut amps = vec![Complex64::new(0.0, 0.0); levels.pow(parties as u32)];
        for (lineno, line) in lines.enumerate() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Config(format!("line {}: expected `index re im`", lineno + 2));
            if parts.len() != 3 {
                return Err(bad());
            }
            let i: usize = parts[0].parse().map_err(|_| bad())?;
            let re: f64 = parts[1].parse().map_err(|_| bad())?;
            let im: f64 = parts[2].parse().map_err(|_| bad())?;
            *amps.get_mut(i).ok_or_else(bad)? = Complex64::new(re, im);
        }
        Ok(DenseState { levels, parties, amps })
    }
}

/// Applies the same single-subsystem rotation to every factor.
pub fn apply_lateral_rotation(state: &DenseState, rot: &Rotation) -> Result<DenseState> {
    if rot.n() != state.levels {
        return Err(Error::DimensionMismatch { expected: state.levels, actual: rot.n() });
    }
    let ops = vec![rot.matrix(); state.parties];
    state.apply_product(&ops)
}

/// Outcomes of every party measuring along a common direction.
///
/// Every permutation basis state of |S_n> carries weight `1/n!` and the state
/// is invariant under common rotations, so the joint outcome is a uniformly
/// random permutation whatever `dir` is. `sample_born` is the general path.
pub fn sample_common_direction<R: Rng + ?Sized>(
    state: &SingletState,
    _dir: &Direction,
    rng: &mut R,
) -> Vec<u8> {
    let mut outcome: Vec<u8> = (0..state.n as u8).collect();
    outcome.shuffle(rng);
    outcome
}

/// Born-rule sample of a common-direction measurement on an arbitrary dense state.
pub fn sample_born<R: Rng + ?Sized>(
    state: &DenseState,
    dir: &Direction,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let probs = state.born_probabilities(dir)?;
    let index = sample_index(&probs, rng);
    Ok(tuple_of(index, state.levels, state.parties))
}

/// Index drawn with probability proportional to `weights`.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut target = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return i;
        }
        target -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parity_by_inversions() {
        assert_eq!(parity_sign(&[0, 1, 2]), 1);
        assert_eq!(parity_sign(&[0, 2, 1]), -1);
        assert_eq!(parity_sign(&[1, 2, 0]), 1);
        assert_eq!(parity_sign(&[3, 2, 1, 0]), 1);
        assert_eq!(inversions(&[3, 2, 1, 0]), 6);
    }

    #[test]
    fn permutations_lexicographic() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[1], vec![0, 2, 1]);
        assert_eq!(p[5], vec![2, 1, 0]);
        assert_eq!(permutations(5).len(), 120);
    }

    #[test]
    fn size_errors() {
        assert!(matches!(build_singlet(1), Err(Error::Size { .. })));
        assert!(matches!(build_singlet(SPARSE_N_MAX + 1), Err(Error::Size { .. })));
        let s8 = build_singlet(8).unwrap();
        assert!(matches!(to_dense(&s8), Err(Error::Size { .. })));
    }

    #[test]
    fn dense_singlet_two() {
        let d = to_dense(&build_singlet(2).unwrap()).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let want = [0.0, h, -h, 0.0];
        for (a, w) in d.amplitudes().iter().zip(want) {
            assert!((a.re - w).abs() < 1e-15 && a.im == 0.0);
        }
    }

    #[test]
    fn dense_singlet_three_support() {
        let d = to_dense(&build_singlet(3).unwrap()).unwrap();
        assert_eq!(d.dim(), 27);
        let nz: Vec<_> = d.amplitudes().iter().filter(|a| a.norm() > 0.0).collect();
        assert_eq!(nz.len(), 6);
        for a in nz {
            assert!((a.norm() - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_rotation_is_exact() {
        let d = to_dense(&build_singlet(4).unwrap()).unwrap();
        let out = apply_lateral_rotation(&d, &Rotation::identity(4)).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn rotation_dimension_mismatch() {
        let d = to_dense(&build_singlet(3).unwrap()).unwrap();
        assert!(matches!(
            apply_lateral_rotation(&d, &Rotation::identity(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn corrupted_state_not_antisymmetric() {
        let mut s = build_singlet(3).unwrap();
        assert!(s.is_antisymmetric());
        s.set_amplitude(vec![0, 1, 2], -s.amplitude(&[0, 1, 2]));
        assert!(!s.is_antisymmetric());
    }

    #[test]
    fn text_round_trip() {
        let d = to_dense(&build_singlet(3).unwrap()).unwrap();
        let mut buf = Vec::new();
        d.write_text(&mut buf).unwrap();
        let back = DenseState::read_text(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, d);
        assert!(DenseState::read_text("# levels=2 parties=2\n1 x 0\n").is_err());
    }

    #[test]
    fn born_sampler_on_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let p = DenseState::product(2, &[vec![zero, one], vec![one, zero]]);
        for _ in 0..20 {
            assert_eq!(sample_born(&p, &Direction::z(), &mut rng).unwrap(), vec![1, 0]);
        }
    }
}
