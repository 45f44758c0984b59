//! Dense complex operators on qubit registers split into two subsystems.
//!
//! Basis convention: qubit 0 is the most significant bit of a computational
//! basis index, and the qubits of subsystem A come first. For a register with
//! `n_a + n_b` qubits, index `i = a * 2^n_b + b` where `a` enumerates A and `b`
//! enumerates B.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::conditions::MomentVector;
use crate::error::{Error, Result};

pub mod qdm;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest register handled by the dense kernels.
pub const MAX_QUBITS: usize = 14;

/// Absolute Hermiticity tolerance applied on construction (scaled by the
/// largest entry when that exceeds one).
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Anything that can be viewed as a dense complex matrix.
pub trait AsMatrix {
    fn as_matrix(&self) -> &CMatrix;
}

impl AsMatrix for CMatrix {
    fn as_matrix(&self) -> &CMatrix {
        self
    }
}

/// Split of a qubit register into subsystems A (first `n_a` qubits) and B.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    n_a: usize,
    n_b: usize,
}

impl Bipartition {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 || n_b == 0 || n_a + n_b > MAX_QUBITS {
            return Err(Error::InvalidBipartition { n_a, n_b, cap: MAX_QUBITS });
        }
        Ok(Self { n_a, n_b })
    }

    /// A register with no B part. Partial transposition is the identity on it.
    pub fn unsplit(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidBipartition { n_a: n, n_b: 0, cap: MAX_QUBITS });
        }
        Ok(Self { n_a: n, n_b: 0 })
    }

    fn from_counts(n_a: usize, n_b: usize) -> Result<Self> {
        match (n_a, n_b) {
            (0, n) | (n, 0) => Self::unsplit(n),
            _ => Self::new(n_a, n_b),
        }
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn n_qubits(&self) -> usize {
        self.n_a + self.n_b
    }

    pub fn is_split(&self) -> bool {
        self.n_b > 0
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn dim_a(&self) -> usize {
        1 << self.n_a
    }

    pub fn dim_b(&self) -> usize {
        1 << self.n_b
    }

    /// Split a basis index into its (A, B) parts.
    #[inline]
    pub fn split_index(&self, i: usize) -> (usize, usize) {
        (i >> self.n_b, i & (self.dim_b() - 1))
    }

    #[inline]
    pub fn join_index(&self, a: usize, b: usize) -> usize {
        (a << self.n_b) | b
    }

    /// Number of excitations (set bits) in the A part of basis index `i`.
    #[inline]
    pub fn charge_a(&self, i: usize) -> u32 {
        (i >> self.n_b).count_ones()
    }

    #[inline]
    pub fn charge_b(&self, i: usize) -> u32 {
        (i & (self.dim_b() - 1)).count_ones()
    }
}

/// Value of qubit `q` (0 = most significant) in basis index `i` of an
/// `n`-qubit register.
#[inline]
pub fn bit(i: usize, q: usize, n: usize) -> usize {
    (i >> (n - 1 - q)) & 1
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise deviation `|M[i,j] - conj(M[j,i])|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn hermitian_tolerance(m: &CMatrix) -> f64 {
    HERMITIAN_TOL * max_abs(m).max(1.0)
}

/// Replace `m` by `(m + m^dagger) / 2`. Exactly Hermitian input is left bit-identical.
pub fn symmetrize_hermitian(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = v;
            m[(j, i)] = v.conj();
        }
    }
}

/// Hermitian operator on a bipartite qubit register. Usually a density
/// matrix, but also used for partial transposes and unnormalized blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    bipartition: Bipartition,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates shape and Hermiticity, then symmetrizes away the residual.
    pub fn new(bipartition: Bipartition, mut matrix: CMatrix) -> Result<Self> {
        let dim = bipartition.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        let dev = hermitian_deviation(&matrix);
        if dev > hermitian_tolerance(&matrix) {
            return Err(Error::NotHermitian(dev));
        }
        symmetrize_hermitian(&mut matrix);
        Ok(Self { bipartition, matrix })
    }

    pub(crate) fn from_hermitian_unchecked(bipartition: Bipartition, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), bipartition.dim());
        Self { bipartition, matrix }
    }

    pub fn from_pure(state: &PureState) -> Self {
        let v = &state.amplitudes;
        Self { bipartition: state.bipartition, matrix: v * v.adjoint() }
    }

    pub fn maximally_mixed(bipartition: Bipartition) -> Self {
        let d = bipartition.dim();
        let matrix = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        Self { bipartition, matrix }
    }

    /// Diagonal operator with the given real entries.
    pub fn diagonal(bipartition: Bipartition, diag: &[f64]) -> Result<Self> {
        let d = bipartition.dim();
        if diag.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: diag.len() });
        }
        let matrix = CMatrix::from_diagonal(&CVector::from_iterator(d, diag.iter().map(|&x| C64::new(x, 0.0))));
        Ok(Self { bipartition, matrix })
    }

    /// Product operator `a ⊗ b`, with A taken from `a`'s qubits and B from `b`'s.
    pub fn product(a: &DensityOperator, b: &DensityOperator) -> Result<Self> {
        let bip = Bipartition::new(a.bipartition.n_qubits(), b.bipartition.n_qubits())?;
        Ok(Self { bipartition: bip, matrix: a.matrix.kronecker(&b.matrix) })
    }

    /// Same matrix, different split of the register.
    pub fn with_bipartition(&self, bipartition: Bipartition) -> Result<Self> {
        if bipartition.n_qubits() != self.bipartition.n_qubits() {
            return Err(Error::DimensionMismatch { expected: self.bipartition.dim(), got: bipartition.dim() });
        }
        Ok(Self { bipartition, matrix: self.matrix.clone() })
    }

    pub fn bipartition(&self) -> Bipartition {
        self.bipartition
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Whether `|tr - 1| <= 1e-10`.
    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= 1e-10
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { bipartition: self.bipartition, matrix: &self.matrix * C64::new(s, 0.0) }
    }

    /// Convex or affine combination `sum_i w_i rho_i` of operators on the same register.
    pub fn mix(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::OutOfRange("empty mixture".into()))?.1;
        let mut m = CMatrix::zeros(first.dim(), first.dim());
        for (w, rho) in parts {
            if rho.bipartition != first.bipartition {
                return Err(Error::DimensionMismatch { expected: first.dim(), got: rho.dim() });
            }
            m += &rho.matrix * C64::new(*w, 0.0);
        }
        Ok(Self { bipartition: first.bipartition, matrix: m })
    }

    /// `tr(O rho)`, real part.
    pub fn expectation(&self, observable: &CMatrix) -> Result<f64> {
        if observable.nrows() != self.dim() || observable.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: observable.nrows() });
        }
        Ok(trace_product(observable, &self.matrix).re)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }
}

impl AsMatrix for DensityOperator {
    fn as_matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// `tr(A B)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Normalized state vector on a bipartite register.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    bipartition: Bipartition,
    amplitudes: CVector,
}

impl PureState {
    pub fn new(bipartition: Bipartition, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != bipartition.dim() {
            return Err(Error::DimensionMismatch { expected: bipartition.dim(), got: amplitudes.len() });
        }
        let dev = (amplitudes.norm_squared() - 1.0).abs();
        if dev > 1e-10 {
            return Err(Error::NotNormalized(dev));
        }
        Ok(Self { bipartition, amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(bipartition: Bipartition, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized(1.0));
        }
        Self::new(bipartition, amplitudes / C64::new(norm, 0.0))
    }

    pub fn basis(bipartition: Bipartition, index: usize) -> Result<Self> {
        let d = bipartition.dim();
        if index >= d {
            return Err(Error::OutOfRange(format!("basis index {index} >= {d}")));
        }
        let mut v = CVector::zeros(d);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self { bipartition, amplitudes: v })
    }

    pub fn bipartition(&self) -> Bipartition {
        self.bipartition
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn n_qubits(&self) -> usize {
        self.bipartition.n_qubits()
    }

    /// Reduced density matrix on `keep_a ∪ keep_b`, with `keep_a` forming
    /// the new A subsystem and `keep_b` the new B subsystem, in the given order.
    pub fn reduced_density(&self, keep_a: &[usize], keep_b: &[usize]) -> Result<DensityOperator> {
        let n = self.n_qubits();
        let layout = Reduction::new(n, keep_a, keep_b)?;
        let dk = 1 << layout.kept.len();
        let dr = 1 << layout.rest.len();
        let mut m = CMatrix::zeros(dk, dr);
        for k in 0..dk {
            for r in 0..dr {
                m[(k, r)] = self.amplitudes[layout.compose(k, r)];
            }
        }
        let rho = &m * m.adjoint();
        Ok(DensityOperator::from_hermitian_unchecked(layout.bipartition, rho))
    }

    /// `<psi| D |psi>` for a diagonal observable given as a function of the basis index.
    pub fn diagonal_expectation(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.amplitudes.iter().enumerate().map(|(i, a)| a.norm_sqr() * f(i)).sum()
    }
}

/// Index bookkeeping for tracing out all qubits not listed in `kept`.
struct Reduction {
    n: usize,
    kept: Vec<usize>,
    rest: Vec<usize>,
    bipartition: Bipartition,
}

impl Reduction {
    fn new(n: usize, keep_a: &[usize], keep_b: &[usize]) -> Result<Self> {
        let kept: Vec<usize> = keep_a.iter().chain(keep_b).copied().collect();
        if kept.is_empty() {
            return Err(Error::InvalidSelection("empty keep set".into()));
        }
        let mut seen = vec![false; n];
        for &q in &kept {
            if q >= n {
                return Err(Error::InvalidSelection(format!("qubit {q} outside register of {n}")));
            }
            if seen[q] {
                return Err(Error::InvalidSelection(format!("qubit {q} listed twice")));
            }
            seen[q] = true;
        }
        let rest = (0..n).filter(|q| !seen[*q]).collect();
        let bipartition = Bipartition::from_counts(keep_a.len(), keep_b.len())?;
        Ok(Self { n, kept, rest, bipartition })
    }

    /// Full-register index from kept-qubit index `k` and traced-qubit index `r`.
    fn compose(&self, k: usize, r: usize) -> usize {
        let nk = self.kept.len();
        let nr = self.rest.len();
        let mut full = 0usize;
        for (pos, &q) in self.kept.iter().enumerate() {
            full |= ((k >> (nk - 1 - pos)) & 1) << (self.n - 1 - q);
        }
        for (pos, &q) in self.rest.iter().enumerate() {
            full |= ((r >> (nr - 1 - pos)) & 1) << (self.n - 1 - q);
        }
        full
    }
}

/// Transpose of the B indices: entry `(a b, a' b')` moves to `(a b', a' b)`.
pub fn partial_transpose(rho: &DensityOperator) -> DensityOperator {
    let bip = rho.bipartition;
    let d = bip.dim();
    let mut out = CMatrix::zeros(d, d);
    for r in 0..d {
        let (a, b) = bip.split_index(r);
        for c in 0..d {
            let (a2, b2) = bip.split_index(c);
            out[(bip.join_index(a, b2), bip.join_index(a2, b))] = rho.matrix[(r, c)];
        }
    }
    DensityOperator { bipartition: bip, matrix: out }
}

/// Trace out every qubit not in `keep`. Kept qubits stay in register order;
/// the result is split into the kept A qubits and the kept B qubits.
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let mut sorted = keep.to_vec();
    sorted.sort_unstable();
    let n_a = rho.bipartition.n_a();
    let split = sorted.partition_point(|&q| q < n_a);
    reduce(rho, &sorted[..split], &sorted[split..])
}

/// Partial trace with an explicit new split: `keep_a` becomes A and `keep_b` becomes B.
pub fn reduce(rho: &DensityOperator, keep_a: &[usize], keep_b: &[usize]) -> Result<DensityOperator> {
    let n = rho.bipartition.n_qubits();
    let layout = Reduction::new(n, keep_a, keep_b)?;
    let dk = 1 << layout.kept.len();
    let dr = 1 << layout.rest.len();
    let mut out = CMatrix::zeros(dk, dk);
    for k1 in 0..dk {
        for k2 in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for r in 0..dr {
                acc += rho.matrix[(layout.compose(k1, r), layout.compose(k2, r))];
            }
            out[(k1, k2)] = acc;
        }
    }
    Ok(DensityOperator::from_hermitian_unchecked(layout.bipartition, out))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen<M: AsMatrix + ?Sized>(m: &M) -> Result<HermitianEigen> {
    let m = m.as_matrix();
    let dev = hermitian_deviation(m);
    if dev > hermitian_tolerance(m) {
        return Err(Error::NotHermitian(dev));
    }
    let mut sym = m.clone();
    symmetrize_hermitian(&mut sym);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// All eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_spectrum<M: AsMatrix + ?Sized>(m: &M) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}

/// Power traces `tr(M^k)` for `k = 1..=kmax` by repeated multiplication.
pub fn matrix_moments<M: AsMatrix + ?Sized>(m: &M, kmax: usize) -> MomentVector {
    let m = m.as_matrix();
    assert!(kmax >= 1, "kmax must be at least 1");
    let scale = max_abs(m).max(1e-300);
    let mut values = Vec::with_capacity(kmax);
    let mut power = m.clone();
    for k in 1..=kmax {
        let tr = power.trace();
        debug_assert!(
            tr.im.abs() <= 1e-10 * scale.powi(k as i32).max(1.0) * m.nrows() as f64,
            "imaginary residue {} in tr(M^{k})",
            tr.im
        );
        values.push(tr.re);
        if k < kmax {
            power = &power * m;
        }
    }
    MomentVector::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> DensityOperator {
        let bip = Bipartition::new(1, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVector::from_vec(vec![c(0.0), c(s), c(s), c(0.0)]);
        DensityOperator::from_pure(&PureState::new(bip, psi).unwrap())
    }

    #[test]
    fn pt_of_identity_is_identity() {
        let rho = DensityOperator::maximally_mixed(Bipartition::new(1, 1).unwrap());
        assert_eq!(partial_transpose(&rho), rho);
    }

    #[test]
    fn pt_of_bell_pair() {
        let pt = partial_transpose(&bell());
        let mut expected = CMatrix::zeros(4, 4);
        expected[(1, 1)] = c(0.5);
        expected[(2, 2)] = c(0.5);
        expected[(0, 3)] = c(0.5);
        expected[(3, 0)] = c(0.5);
        assert!((pt.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn pt_entry_convention() {
        // |a><a| ⊗ |b><b'| with a=1, b=0, b'=1 on a 1|2 split.
        let bip = Bipartition::new(1, 2).unwrap();
        let mut m = CMatrix::zeros(8, 8);
        let (row, col) = (bip.join_index(1, 0), bip.join_index(1, 1));
        m[(row, col)] = c(1.0);
        m[(col, row)] = c(1.0);
        let pt = partial_transpose(&DensityOperator::new(bip, m).unwrap());
        assert_eq!(pt.matrix()[(bip.join_index(1, 1), bip.join_index(1, 0))], c(1.0));
        assert_eq!(pt.matrix()[(bip.join_index(1, 0), bip.join_index(1, 1))], c(1.0));
        assert_eq!(pt.matrix().iter().filter(|z| z.norm() > 0.0).count(), 2);
    }

    #[test]
    fn pt_of_product_transposes_b() {
        let one = Bipartition::unsplit(1).unwrap();
        let mut ma = CMatrix::zeros(2, 2);
        ma[(0, 0)] = c(0.7);
        ma[(1, 1)] = c(0.3);
        ma[(0, 1)] = C64::new(0.1, 0.2);
        ma[(1, 0)] = C64::new(0.1, -0.2);
        let mut mb = CMatrix::zeros(2, 2);
        mb[(0, 0)] = c(0.4);
        mb[(1, 1)] = c(0.6);
        mb[(0, 1)] = C64::new(0.05, -0.3);
        mb[(1, 0)] = C64::new(0.05, 0.3);
        let ra = DensityOperator::new(one, ma.clone()).unwrap();
        let rb = DensityOperator::new(one, mb.clone()).unwrap();
        let pt = partial_transpose(&DensityOperator::product(&ra, &rb).unwrap());
        let expected = ma.kronecker(&mb.transpose());
        assert!((pt.matrix() - expected).norm() < 1e-15);
        let s1 = hermitian_spectrum(&pt).unwrap();
        let s2 = hermitian_spectrum(&DensityOperator::product(&ra, &rb).unwrap()).unwrap();
        for (x, y) in s1.iter().zip(&s2) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let red = partial_trace(&bell(), &[0]).unwrap();
        assert_eq!(red.bipartition(), Bipartition::unsplit(1).unwrap());
        let expected = CMatrix::identity(2, 2) * c(0.5);
        assert!((red.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let one = Bipartition::unsplit(1).unwrap();
        let ra = DensityOperator::diagonal(one, &[0.8, 0.2]).unwrap();
        let rb = DensityOperator::diagonal(one, &[0.1, 0.9]).unwrap();
        let red = partial_trace(&DensityOperator::product(&ra, &rb).unwrap(), &[0]).unwrap();
        assert!((red.matrix() - ra.matrix()).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_of_ghz() {
        let bip = Bipartition::new(2, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = CVector::zeros(8);
        v[0] = c(s);
        v[7] = c(s);
        let rho = DensityOperator::from_pure(&PureState::new(bip, v).unwrap());
        let red = partial_trace(&rho, &[0, 1]).unwrap();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = c(0.5);
        expected[(3, 3)] = c(0.5);
        assert!((red.matrix() - expected).norm() < 1e-15);
        assert!((red.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_keep() {
        assert!(matches!(partial_trace(&bell(), &[]), Err(Error::InvalidSelection(_))));
        assert!(matches!(partial_trace(&bell(), &[3]), Err(Error::InvalidSelection(_))));
    }

    #[test]
    fn pure_state_reduction_matches_dense() {
        let bip = Bipartition::new(2, 2).unwrap();
        let v = CVector::from_iterator(16, (0..16).map(|i| C64::new((i as f64).sin(), (i as f64 * 0.3).cos())));
        let psi = PureState::normalized(bip, v).unwrap();
        let rho = DensityOperator::from_pure(&psi);
        let a = psi.reduced_density(&[3, 0], &[2]).unwrap();
        let b = reduce(&rho, &[3, 0], &[2]).unwrap();
        assert!((a.matrix() - b.matrix()).norm() < 1e-13);
        assert_eq!(a.bipartition(), Bipartition::new(2, 1).unwrap());
    }

    #[test]
    fn spectra() {
        let id = DensityOperator::maximally_mixed(Bipartition::new(1, 1).unwrap());
        assert_eq!(hermitian_spectrum(&id).unwrap().len(), 4);
        for x in hermitian_spectrum(&id).unwrap() {
            assert!((x - 0.25).abs() < 1e-15);
        }
        let pt = partial_transpose(&bell());
        let s = hermitian_spectrum(&pt).unwrap();
        for (x, y) in s.iter().zip([0.5, 0.5, 0.5, -0.5]) {
            assert!((x - y).abs() < 1e-14);
        }
        let diag = CMatrix::from_diagonal(&CVector::from_vec(vec![c(3.0), c(1.0), c(-2.0)]));
        assert_eq!(hermitian_spectrum(&diag).unwrap(), vec![3.0, 1.0, -2.0]);
    }

    #[test]
    fn spectrum_rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(matches!(hermitian_spectrum(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn moments() {
        let id = DensityOperator::maximally_mixed(Bipartition::new(1, 1).unwrap());
        assert_eq!(matrix_moments(&id, 3).values(), &[1.0, 0.25, 0.0625]);
        let pt = partial_transpose(&bell());
        let p = matrix_moments(&pt, 3);
        for (x, y) in p.values().iter().zip([1.0, 1.0, 0.25]) {
            assert!((x - y).abs() < 1e-14);
        }
        let diag = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0), c(2.0), c(3.0)]));
        assert_eq!(matrix_moments(&diag, 3).values(), &[6.0, 14.0, 36.0]);
    }

    #[test]
    fn construction_checks() {
        let bip = Bipartition::new(1, 1).unwrap();
        assert!(Bipartition::new(0, 2).is_err());
        assert!(Bipartition::new(8, 7).is_err());
        assert!(matches!(DensityOperator::new(bip, CMatrix::zeros(3, 3)), Err(Error::DimensionMismatch { .. })));
        let mut m = CMatrix::identity(4, 4);
        m[(0, 1)] = c(1e-3);
        assert!(matches!(DensityOperator::new(bip, m), Err(Error::NotHermitian(_))));
        assert!(PureState::new(bip, CVector::zeros(4)).is_err());
    }
}
