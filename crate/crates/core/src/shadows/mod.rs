//! Classical shadows from randomized measurements.
//!
//! Two ensembles are supported: independent uniformly random Pauli bases on
//! each qubit, and a single Haar-random unitary on the whole register.
//!
//! # Random stream contract
//!
//! Snapshot `i` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` with `set_stream(i)`. Pauli snapshots draw
//! `n` basis indices (`random_range(0..3)`, 0 = X, 1 = Y, 2 = Z, qubit 0 first),
//! then `n` uniforms in `[0, 1)` used to sample the outcome bits qubit by qubit
//! from the exact conditional Born probabilities. Global snapshots first draw
//! `2 d^2` standard normals (row-major, real then imaginary part) for the
//! unitary, then `n` uniforms for the outcome.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, DensityOperator, C64};

pub mod archive;
pub mod budget;
pub mod estimators;

pub use budget::{confidence_radius, measurement_budget, BudgetParams};
pub use estimators::{
    batch_median_estimate, estimate_d2_sector, estimate_linear, estimate_p3_sector, jackknife_error, sector_blocks,
    PowerSums, ShadowEstimator,
};

/// Single-qubit measurement basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Basis {
    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Basis::X),
            1 => Ok(Basis::Y),
            2 => Ok(Basis::Z),
            _ => Err(Error::Format(format!("invalid basis code {code}"))),
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    /// Eigenvector for outcome `b` (0 = +1 eigenvalue).
    pub fn eigenvector(self, b: u8) -> [C64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let sign = if b == 0 { 1.0 } else { -1.0 };
        match self {
            Basis::Z if b == 0 => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            Basis::Z => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            Basis::X => [C64::new(s, 0.0), C64::new(sign * s, 0.0)],
            Basis::Y => [C64::new(s, 0.0), C64::new(0.0, sign * s)],
        }
    }

    /// Inverted-channel factor `3 |v_b><v_b| - I`.
    pub fn factor(self, b: u8) -> Matrix2<C64> {
        let v = self.eigenvector(b);
        let one = C64::new(1.0, 0.0);
        Matrix2::new(
            v[0] * v[0].conj() * 3.0 - one,
            v[0] * v[1].conj() * 3.0,
            v[1] * v[0].conj() * 3.0,
            v[1] * v[1].conj() * 3.0 - one,
        )
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Y => "Y",
            Basis::Z => "Z",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ensemble {
    /// Independent random X/Y/Z basis per qubit.
    Pauli,
    /// One Haar-random unitary on the whole register.
    Global,
}

impl Ensemble {
    pub fn tag(self) -> u32 {
        match self {
            Ensemble::Pauli => 0,
            Ensemble::Global => 1,
        }
    }

    pub fn from_tag(tag: u32) -> Result<Self> {
        match tag {
            0 => Ok(Ensemble::Pauli),
            1 => Ok(Ensemble::Global),
            _ => Err(Error::Format(format!("unknown ensemble tag {tag}"))),
        }
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pauli" => Ok(Ensemble::Pauli),
            "global" => Ok(Ensemble::Global),
            _ => Err(Error::Config(format!("unknown ensemble '{s}' (pauli|global)"))),
        }
    }
}

/// One measurement record. `bases` is empty for the global ensemble.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Snapshot {
    pub source_index: u32,
    pub bases: Vec<Basis>,
    pub outcomes: Vec<u8>,
}

/// Inverted-channel operator of one snapshot, kept in factored form.
#[derive(Clone, Debug, PartialEq)]
pub enum SnapshotOperator {
    /// `⊗_k (3 |v_k><v_k| - I)`.
    Product(Vec<Matrix2<C64>>),
    /// `(d + 1) |psi><psi| - I` with `|psi> = U^† |b>`.
    Global(CVector),
}

impl SnapshotOperator {
    pub fn n_qubits(&self) -> usize {
        match self {
            SnapshotOperator::Product(f) => f.len(),
            SnapshotOperator::Global(psi) => psi.len().trailing_zeros() as usize,
        }
    }

    /// Entry `(r, c)` of the operator, optionally partially transposed on the
    /// last `n_b` qubits.
    #[inline]
    pub fn entry(&self, r: usize, c: usize, n_b: usize, transpose_b: bool) -> C64 {
        match self {
            SnapshotOperator::Product(factors) => {
                let n = factors.len();
                let mut z = C64::new(1.0, 0.0);
                for (k, f) in factors.iter().enumerate() {
                    let shift = n - 1 - k;
                    let (mut rb, mut cb) = ((r >> shift) & 1, (c >> shift) & 1);
                    if transpose_b && k >= n - n_b {
                        std::mem::swap(&mut rb, &mut cb);
                    }
                    z *= f[(rb, cb)];
                }
                z
            }
            SnapshotOperator::Global(psi) => {
                let (r, c) = if transpose_b {
                    let mask = (1usize << n_b) - 1;
                    ((r & !mask) | (c & mask), (c & !mask) | (r & mask))
                } else {
                    (r, c)
                };
                let d = psi.len() as f64;
                let mut z = psi[r] * psi[c].conj() * (d + 1.0);
                if r == c {
                    z -= C64::new(1.0, 0.0);
                }
                z
            }
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let d = 1usize << self.n_qubits();
        CMatrix::from_fn(d, d, |r, c| self.entry(r, c, 0, false))
    }

    /// `tr(O rho_hat)`.
    pub fn expectation(&self, observable: &CMatrix) -> f64 {
        let d = observable.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..d {
            for c in 0..d {
                let o = observable[(c, r)];
                if o != C64::new(0.0, 0.0) {
                    acc += o * self.entry(r, c, 0, false);
                }
            }
        }
        acc.re
    }
}

/// Operator of a Pauli-ensemble snapshot. Global snapshots need the run seed; see [`Shadow::operator`].
pub fn snapshot_operator(s: &Snapshot) -> Result<SnapshotOperator> {
    if s.bases.len() != s.outcomes.len() {
        return Err(Error::Format("snapshot has no per-qubit bases (global ensemble)".into()));
    }
    Ok(SnapshotOperator::Product(s.bases.iter().zip(&s.outcomes).map(|(b, &o)| b.factor(o)).collect()))
}

/// Sequence of source states `rho_1..rho_N` feeding the measurements.
#[derive(Clone)]
pub enum SourceSequence {
    /// The same state every time.
    Constant(DensityOperator),
    /// Snapshot `i` measures state `i mod len`.
    Cycle(Vec<DensityOperator>),
    /// Snapshot `i` measures `f(i)`.
    Schedule(Arc<dyn Fn(usize) -> DensityOperator + Send + Sync>),
}

impl fmt::Debug for SourceSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSequence::Constant(_) => f.write_str("Constant(..)"),
            SourceSequence::Cycle(v) => write!(f, "Cycle(len={})", v.len()),
            SourceSequence::Schedule(_) => f.write_str("Schedule(..)"),
        }
    }
}

impl SourceSequence {
    /// Index reported as the snapshot's `source_index`.
    pub fn source_index(&self, i: usize) -> u32 {
        match self {
            SourceSequence::Constant(_) => 0,
            SourceSequence::Cycle(v) => (i % v.len()) as u32,
            SourceSequence::Schedule(_) => i as u32,
        }
    }

    pub fn state(&self, i: usize) -> DensityOperator {
        match self {
            SourceSequence::Constant(rho) => rho.clone(),
            SourceSequence::Cycle(v) => v[i % v.len()].clone(),
            SourceSequence::Schedule(f) => f(i),
        }
    }

    fn distinct_states(&self) -> Option<&[DensityOperator]> {
        match self {
            SourceSequence::Constant(rho) => Some(std::slice::from_ref(rho)),
            SourceSequence::Cycle(v) => Some(v),
            SourceSequence::Schedule(_) => None,
        }
    }

    /// `(1/N) sum_i rho_i` over the first `n` snapshots.
    pub fn average(&self, n: usize) -> Result<DensityOperator> {
        match self {
            SourceSequence::Constant(rho) => Ok(rho.clone()),
            _ => {
                let states: Vec<DensityOperator> = (0..n).map(|i| self.state(i)).collect();
                let parts: Vec<(f64, &DensityOperator)> = states.iter().map(|s| (1.0 / n as f64, s)).collect();
                DensityOperator::mix(&parts)
            }
        }
    }

    fn validate(&self) -> Result<usize> {
        let check = |rho: &DensityOperator| -> Result<usize> {
            if !rho.is_normalized() {
                return Err(Error::NotNormalized((rho.trace() - 1.0).abs()));
            }
            Ok(rho.bipartition().n_qubits())
        };
        match self {
            SourceSequence::Constant(rho) => check(rho),
            SourceSequence::Cycle(v) => {
                let first = v.first().ok_or_else(|| Error::Config("empty source cycle".into()))?;
                let n = check(first)?;
                for rho in v {
                    if check(rho)? != n {
                        return Err(Error::DimensionMismatch { expected: 1 << n, got: rho.dim() });
                    }
                }
                Ok(n)
            }
            SourceSequence::Schedule(f) => check(&f(0)),
        }
    }
}

/// Per-snapshot random stream.
pub fn snapshot_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Haar-random unitary from QR of a complex Gaussian matrix, with the phases
/// of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut g = CMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(r, c)] = C64::new(re * s, im * s);
        }
    }
    let qr = g.qr();
    let mut q = qr.q();
    let rmat = qr.r();
    for c in 0..d {
        let rd = rmat[(c, c)];
        let phase = if rd.norm() > 0.0 { rd / rd.norm() } else { C64::new(1.0, 0.0) };
        for r in 0..d {
            q[(r, c)] *= phase;
        }
    }
    q
}

/// Cumulative Born distribution over outcome strings (qubit 0 most significant).
struct Cumulative(Vec<f64>);

impl Cumulative {
    fn new(probs: impl Iterator<Item = f64>) -> Self {
        let mut cum = vec![0.0];
        let mut acc = 0.0;
        for p in probs {
            acc += p.max(0.0);
            cum.push(acc);
        }
        Cumulative(cum)
    }

    /// Sample bits one qubit at a time from marginal then conditional probabilities.
    fn sample_bits(&self, uniforms: &[f64]) -> Vec<u8> {
        let (mut lo, mut hi) = (0usize, self.0.len() - 1);
        let mut bits = Vec::with_capacity(uniforms.len());
        for &u in uniforms {
            let mid = (lo + hi) / 2;
            let mass = self.0[hi] - self.0[lo];
            let p0 = if mass > 0.0 { (self.0[mid] - self.0[lo]) / mass } else { 0.5 };
            if u < p0 {
                bits.push(0);
                hi = mid;
            } else {
                bits.push(1);
                lo = mid;
            }
        }
        bits
    }
}

/// `m <- (V ⊗ I) m (V ⊗ I)^†` with `V` acting on qubit `q` of an `n`-qubit register.
fn rotate_qubit(m: &mut CMatrix, q: usize, n: usize, v: &[[C64; 2]; 2]) {
    let d = m.nrows();
    let bit = 1usize << (n - 1 - q);
    for r0 in 0..d {
        if r0 & bit != 0 {
            continue;
        }
        let r1 = r0 | bit;
        for c in 0..d {
            let (a, b) = (m[(r0, c)], m[(r1, c)]);
            m[(r0, c)] = v[0][0] * a + v[0][1] * b;
            m[(r1, c)] = v[1][0] * a + v[1][1] * b;
        }
    }
    for c0 in 0..d {
        if c0 & bit != 0 {
            continue;
        }
        let c1 = c0 | bit;
        for r in 0..d {
            let (a, b) = (m[(r, c0)], m[(r, c1)]);
            m[(r, c0)] = a * v[0][0].conj() + b * v[0][1].conj();
            m[(r, c1)] = a * v[1][0].conj() + b * v[1][1].conj();
        }
    }
}

/// Rows are the conjugated eigenvectors, so `V |v_b> = |b>`.
fn basis_rotation(b: Basis) -> [[C64; 2]; 2] {
    let v0 = b.eigenvector(0);
    let v1 = b.eigenvector(1);
    [[v0[0].conj(), v0[1].conj()], [v1[0].conj(), v1[1].conj()]]
}

fn rotated_diagonal(rho: &CMatrix, bases: &[Basis]) -> Vec<f64> {
    let n = bases.len();
    let mut m = rho.clone();
    for (q, &b) in bases.iter().enumerate() {
        if b != Basis::Z {
            rotate_qubit(&mut m, q, n, &basis_rotation(b));
        }
    }
    m.diagonal().iter().map(|z| z.re).collect()
}

/// Born tables for all `3^n` basis choices of one state, indexed by
/// `sum_k code_k 3^(n-1-k)`.
struct BornTable(Vec<Cumulative>);

impl BornTable {
    const MAX_QUBITS: usize = 7;

    fn new(rho: &CMatrix, n: usize) -> Self {
        let mut out: Vec<Option<Cumulative>> = (0..3usize.pow(n as u32)).map(|_| None).collect();
        fn rec(m: &CMatrix, q: usize, n: usize, code: usize, out: &mut [Option<Cumulative>]) {
            if q == n {
                out[code] = Some(Cumulative::new(m.diagonal().iter().map(|z| z.re)));
                return;
            }
            for b in [Basis::X, Basis::Y, Basis::Z] {
                let next = code * 3 + b.code() as usize;
                if b == Basis::Z {
                    rec(m, q + 1, n, next, out);
                } else {
                    let mut r = m.clone();
                    rotate_qubit(&mut r, q, n, &basis_rotation(b));
                    rec(&r, q + 1, n, next, out);
                }
            }
        }
        rec(rho, 0, n, 0, &mut out);
        BornTable(out.into_iter().map(|c| c.expect("filled")).collect())
    }

    fn get(&self, bases: &[Basis]) -> &Cumulative {
        &self.0[bases.iter().fold(0usize, |acc, b| acc * 3 + b.code() as usize)]
    }
}

fn draw_bases<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Basis> {
    (0..n).map(|_| Basis::from_code(rng.random_range(0..3u8)).expect("in range")).collect()
}

fn draw_uniforms<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// One Pauli-ensemble snapshot of `rho` (source index 0).
pub fn sample_snapshot<R: Rng + ?Sized>(rho: &DensityOperator, rng: &mut R) -> Snapshot {
    let n = rho.bipartition().n_qubits();
    let bases = draw_bases(n, rng);
    let u = draw_uniforms(n, rng);
    let cum = Cumulative::new(rotated_diagonal(rho.matrix(), &bases).into_iter());
    Snapshot { source_index: 0, bases, outcomes: cum.sample_bits(&u) }
}

/// One global-ensemble snapshot of `rho`; the unitary is the first thing drawn from `rng`.
pub fn sample_global_snapshot<R: Rng + ?Sized>(rho: &DensityOperator, rng: &mut R) -> Snapshot {
    let n = rho.bipartition().n_qubits();
    let d = rho.dim();
    let u = haar_unitary(d, rng);
    let w = &u * rho.matrix();
    let probs = (0..d).map(|b| (0..d).map(|j| w[(b, j)] * u[(b, j)].conj()).sum::<C64>().re);
    let cum = Cumulative::new(probs);
    let uniforms = draw_uniforms(n, rng);
    Snapshot { source_index: 0, bases: Vec::new(), outcomes: cum.sample_bits(&uniforms) }
}

/// A run of snapshots with the metadata needed to reconstruct their operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Shadow {
    pub n_qubits: usize,
    pub ensemble: Ensemble,
    /// Master seed; regenerates the unitaries of global snapshots.
    pub seed: u64,
    pub snapshots: Vec<Snapshot>,
}

impl Shadow {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Inverted-channel operator of snapshot `i`.
    pub fn operator(&self, i: usize) -> Result<SnapshotOperator> {
        let s = self.snapshots.get(i).ok_or_else(|| Error::OutOfRange(format!("snapshot {i}")))?;
        match self.ensemble {
            Ensemble::Pauli => snapshot_operator(s),
            Ensemble::Global => {
                let d = 1usize << self.n_qubits;
                let u = haar_unitary(d, &mut snapshot_rng(self.seed, i as u64));
                let b = s.outcomes.iter().fold(0usize, |acc, &x| (acc << 1) | x as usize);
                let psi = CVector::from_fn(d, |r, _| u[(b, r)].conj());
                Ok(SnapshotOperator::Global(psi))
            }
        }
    }

    /// Keep only the snapshots in `range` (stream indices are not renumbered
    /// for Pauli runs; global runs must keep their original positions).
    pub fn subset(&self, idx: &[usize]) -> Result<Shadow> {
        if self.ensemble == Ensemble::Global {
            return Err(Error::InvalidSelection("global-ensemble shadows cannot be re-indexed".into()));
        }
        Ok(Shadow {
            n_qubits: self.n_qubits,
            ensemble: self.ensemble,
            seed: self.seed,
            snapshots: idx.iter().map(|&i| self.snapshots[i].clone()).collect(),
        })
    }
}

/// Simulate `n` snapshots of the source in parallel. Bit-reproducible for a
/// given `(seed, n, source)`; see the module docs for the stream contract.
pub fn simulate(source: &SourceSequence, n: usize, ensemble: Ensemble, seed: u64) -> Result<Shadow> {
    let n_qubits = source.validate()?;
    let tables: Option<Vec<BornTable>> = match (ensemble, source.distinct_states()) {
        (Ensemble::Pauli, Some(states)) if n_qubits <= BornTable::MAX_QUBITS => {
            Some(states.par_iter().map(|rho| BornTable::new(rho.matrix(), n_qubits)).collect())
        }
        _ => None,
    };
    let snapshots = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = snapshot_rng(seed, i as u64);
            let src = source.source_index(i);
            let mut snap = match (ensemble, &tables) {
                (Ensemble::Pauli, Some(t)) => {
                    let bases = draw_bases(n_qubits, &mut rng);
                    let u = draw_uniforms(n_qubits, &mut rng);
                    let outcomes = t[src as usize].get(&bases).sample_bits(&u);
                    Snapshot { source_index: 0, bases, outcomes }
                }
                (Ensemble::Pauli, None) => sample_snapshot(&source.state(i), &mut rng),
                (Ensemble::Global, _) => sample_global_snapshot(&source.state(i), &mut rng),
            };
            snap.source_index = src;
            snap
        })
        .collect();
    Ok(Shadow { n_qubits, ensemble, seed, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Bipartition, PureState};

    fn zero_state(n: usize) -> DensityOperator {
        let bip = Bipartition::unsplit(n).unwrap();
        DensityOperator::from_pure(&PureState::basis(bip, 0).unwrap())
    }

    #[test]
    fn factors() {
        let f = Basis::Z.factor(0);
        assert_eq!(f, Matrix2::new(C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-1.0, 0.0)));
        let fx = Basis::X.factor(0);
        assert!((fx[(0, 0)].re - 0.5).abs() < 1e-15 && (fx[(0, 1)].re - 1.5).abs() < 1e-15);
        for b in [Basis::X, Basis::Y, Basis::Z] {
            for o in 0..2 {
                let f = b.factor(o);
                assert!((f.trace() - C64::new(1.0, 0.0)).norm() < 1e-15);
                assert!((f - f.adjoint()).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn z_measurement_of_zero_is_deterministic() {
        let rho = zero_state(1);
        for i in 0..200 {
            let s = sample_snapshot(&rho, &mut snapshot_rng(1, i));
            if s.bases[0] == Basis::Z {
                assert_eq!(s.outcomes[0], 0);
            }
        }
    }

    #[test]
    fn x_measurement_of_zero_is_uniform() {
        let rho = zero_state(1);
        let (mut n, mut ones) = (0, 0);
        for i in 0..6000 {
            let s = sample_snapshot(&rho, &mut snapshot_rng(2, i));
            if s.bases[0] == Basis::X {
                n += 1;
                ones += s.outcomes[0] as usize;
            }
        }
        let frac = ones as f64 / n as f64;
        assert!((frac - 0.5).abs() < 5.0 * (0.25 / n as f64).sqrt(), "{frac}");
    }

    #[test]
    fn cached_and_direct_sampling_agree() {
        let bip = Bipartition::new(1, 2).unwrap();
        let v = CVector::from_fn(8, |i, _| C64::new((i as f64 * 0.7).sin(), (i as f64 * 0.3).cos()));
        let rho = DensityOperator::from_pure(&PureState::normalized(bip, v).unwrap());
        let shadow = simulate(&SourceSequence::Constant(rho.clone()), 300, Ensemble::Pauli, 99).unwrap();
        for (i, s) in shadow.snapshots.iter().enumerate() {
            assert_eq!(s, &sample_snapshot(&rho, &mut snapshot_rng(99, i as u64)));
        }
        let g = simulate(&SourceSequence::Constant(rho.clone()), 20, Ensemble::Global, 5).unwrap();
        for (i, s) in g.snapshots.iter().enumerate() {
            assert_eq!(s, &sample_global_snapshot(&rho, &mut snapshot_rng(5, i as u64)));
        }
    }

    #[test]
    fn snapshot_operator_traces_and_identity_expectation() {
        let rho = zero_state(3);
        let shadow = simulate(&SourceSequence::Constant(rho), 50, Ensemble::Pauli, 3).unwrap();
        let id = CMatrix::identity(8, 8);
        for i in 0..shadow.len() {
            let op = shadow.operator(i).unwrap();
            assert!((op.to_dense().trace().re - 1.0).abs() < 1e-12);
            assert!((op.expectation(&id) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(8, &mut snapshot_rng(0, 0));
        assert!((&u * u.adjoint() - CMatrix::identity(8, 8)).norm() < 1e-12);
    }

    #[test]
    fn global_snapshot_operator() {
        let rho = zero_state(2);
        let shadow = simulate(&SourceSequence::Constant(rho.clone()), 4000, Ensemble::Global, 11).unwrap();
        let mut mean = CMatrix::zeros(4, 4);
        for i in 0..shadow.len() {
            let op = shadow.operator(i).unwrap().to_dense();
            assert!((op.trace().re - 1.0).abs() < 1e-12);
            mean += op;
        }
        mean /= C64::new(shadow.len() as f64, 0.0);
        assert!((mean - rho.matrix()).norm() < 0.2);
    }

    #[test]
    fn partial_transpose_entries() {
        let s = Snapshot { source_index: 0, bases: vec![Basis::Y, Basis::X], outcomes: vec![0, 1] };
        let op = snapshot_operator(&s).unwrap();
        let dense = op.to_dense();
        let bip = Bipartition::new(1, 1).unwrap();
        let pt = crate::linalg::partial_transpose(&DensityOperator::new(bip, dense).unwrap());
        for r in 0..4 {
            for c in 0..4 {
                assert!((op.entry(r, c, 1, true) - pt.matrix()[(r, c)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn determinism() {
        let rho = zero_state(2);
        let a = simulate(&SourceSequence::Constant(rho.clone()), 100, Ensemble::Pauli, 7).unwrap();
        let b = simulate(&SourceSequence::Constant(rho.clone()), 100, Ensemble::Pauli, 7).unwrap();
        let c = simulate(&SourceSequence::Constant(rho), 100, Ensemble::Pauli, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
