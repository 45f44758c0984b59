//! U(1) charge sectors: projectors onto fixed total charge `Q_q` and fixed
//! charge difference `P_q`, block extraction, and symmetry-resolved conditions.
//!
//! The charge of a basis state is its number of set bits. A state commuting
//! with the total charge has a partial transpose that is block diagonal in the
//! charge difference `N_A - N_B`.

use std::fmt;
use std::str::FromStr;

use crate::conditions::{evaluate, evaluate_spectral, spectrum_of_hermitian_part, ConditionReport, Condition, MomentVector};
use crate::error::{Error, Result};
use crate::linalg::{matrix_moments, partial_transpose, AsMatrix, Bipartition, CMatrix, DensityOperator, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SectorKind {
    /// Total charge `N_A + N_B`.
    Q,
    /// Charge difference `N_A - N_B`.
    P,
    /// The whole register (charge label ignored).
    Full,
}

impl FromStr for SectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "q" => Ok(SectorKind::Q),
            "p" => Ok(SectorKind::P),
            "full" | "all" => Ok(SectorKind::Full),
            _ => Err(Error::Config(format!("unknown sector kind '{s}'"))),
        }
    }
}

impl fmt::Display for SectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SectorKind::Q => "Q",
            SectorKind::P => "P",
            SectorKind::Full => "full",
        })
    }
}

/// Charge of basis index `i` under `kind`.
#[inline]
pub fn charge_of(kind: SectorKind, bip: Bipartition, i: usize) -> i32 {
    match kind {
        SectorKind::Q => i.count_ones() as i32,
        SectorKind::P => bip.charge_a(i) as i32 - bip.charge_b(i) as i32,
        SectorKind::Full => 0,
    }
}

/// Valid charge range `[lo, hi]` for `kind`.
pub fn charge_range(kind: SectorKind, bip: Bipartition) -> (i32, i32) {
    match kind {
        SectorKind::Q => (0, bip.n_qubits() as i32),
        SectorKind::P => (-(bip.n_b() as i32), bip.n_a() as i32),
        SectorKind::Full => (0, 0),
    }
}

/// Projector onto the basis states of one charge, stored as its index set
/// in ascending order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorProjector {
    kind: SectorKind,
    charge: i32,
    basis_indices: Vec<usize>,
    bipartition: Bipartition,
}

impl SectorProjector {
    /// The identity on the whole register.
    pub fn full(bipartition: Bipartition) -> Self {
        Self { kind: SectorKind::Full, charge: 0, basis_indices: (0..bipartition.dim()).collect(), bipartition }
    }

    pub fn kind(&self) -> SectorKind {
        self.kind
    }

    pub fn charge(&self) -> i32 {
        self.charge
    }

    pub fn basis_indices(&self) -> &[usize] {
        &self.basis_indices
    }

    pub fn bipartition(&self) -> Bipartition {
        self.bipartition
    }

    /// `tr(P)`.
    pub fn rank(&self) -> usize {
        self.basis_indices.len()
    }

    /// Charge label for reports; `None` for the full register.
    pub fn sector_label(&self) -> Option<i32> {
        (self.kind != SectorKind::Full).then_some(self.charge)
    }

    /// Dense 0/1 diagonal matrix.
    pub fn to_matrix(&self) -> CMatrix {
        let d = self.bipartition.dim();
        let mut m = CMatrix::zeros(d, d);
        for &i in &self.basis_indices {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn contains(&self, i: usize) -> bool {
        self.basis_indices.binary_search(&i).is_ok()
    }
}

pub fn build_projector(kind: SectorKind, q: i32, bipartition: Bipartition) -> Result<SectorProjector> {
    if kind == SectorKind::Full {
        return Ok(SectorProjector::full(bipartition));
    }
    if kind == SectorKind::P && !bipartition.is_split() {
        return Err(Error::InvalidSelection("charge-difference sectors need a split register".into()));
    }
    let (lo, hi) = charge_range(kind, bipartition);
    if q < lo || q > hi {
        return Err(Error::SectorOutOfRange { charge: q, lo, hi });
    }
    let basis_indices = (0..bipartition.dim()).filter(|&i| charge_of(kind, bipartition, i) == q).collect();
    Ok(SectorProjector { kind, charge: q, basis_indices, bipartition })
}

/// All projectors of one kind, in ascending charge.
pub fn all_projectors(kind: SectorKind, bipartition: Bipartition) -> Result<Vec<SectorProjector>> {
    let (lo, hi) = charge_range(kind, bipartition);
    (lo..=hi).map(|q| build_projector(kind, q, bipartition)).collect()
}

/// Compressed sector block `P M P` in the sector basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorBlock {
    pub charge: i32,
    pub matrix: CMatrix,
    pub parent_dimension: usize,
}

impl SectorBlock {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn moments(&self, kmax: usize) -> MomentVector {
        matrix_moments(&self.matrix, kmax)
    }

    pub fn spectrum(&self) -> Vec<f64> {
        spectrum_of_hermitian_part(&self.matrix)
    }
}

impl AsMatrix for SectorBlock {
    fn as_matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

pub fn block_extract(m: &DensityOperator, proj: &SectorProjector) -> Result<SectorBlock> {
    if m.bipartition() != proj.bipartition {
        return Err(Error::DimensionMismatch { expected: proj.bipartition.dim(), got: m.dim() });
    }
    let idx = &proj.basis_indices;
    let full = m.matrix();
    let matrix = CMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])]);
    Ok(SectorBlock { charge: proj.charge, matrix, parent_dimension: m.dim() })
}

/// Place a block back into the full register (zeros elsewhere).
pub fn embed(block: &SectorBlock, proj: &SectorProjector) -> CMatrix {
    let d = proj.bipartition.dim();
    let idx = &proj.basis_indices;
    let mut out = CMatrix::zeros(d, d);
    for (r, &i) in idx.iter().enumerate() {
        for (c, &j) in idx.iter().enumerate() {
            out[(i, j)] = block.matrix[(r, c)];
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockDiagonality {
    pub is_block_diagonal: bool,
    /// Frobenius norm of the entries coupling different charges.
    pub residual: f64,
}

pub fn is_block_diagonal(m: &DensityOperator, kind: SectorKind) -> BlockDiagonality {
    let bip = m.bipartition();
    let mat = m.matrix();
    let d = m.dim();
    let charges: Vec<i32> = (0..d).map(|i| charge_of(kind, bip, i)).collect();
    let mut off = 0.0;
    for r in 0..d {
        for c in 0..d {
            if charges[r] != charges[c] {
                off += mat[(r, c)].norm_sqr();
            }
        }
    }
    let residual = off.sqrt();
    BlockDiagonality { is_block_diagonal: residual <= 1e-10 * m.norm(), residual }
}

/// `sum_q Q_q rho Q_q`: drop every coherence between different total charges.
pub fn symmetrize(rho: &DensityOperator) -> DensityOperator {
    let mut m = rho.matrix().clone();
    let d = rho.dim();
    for r in 0..d {
        for c in 0..d {
            if r.count_ones() != c.count_ones() {
                m[(r, c)] = C64::new(0.0, 0.0);
            }
        }
    }
    DensityOperator::from_hermitian_unchecked(rho.bipartition(), m)
}

/// Reference form of the dephasing channel: the average of `U_i^{⊗n} rho U_i^{†⊗n}`
/// over `2^k` uniform phase rotations `U_i = diag(1, exp(2 pi i i / 2^k))`,
/// `k = floor(log2 n) + 1`. Equals [`symmetrize`] exactly in exact arithmetic.
pub fn symmetrize_by_phase_average(rho: &DensityOperator) -> DensityOperator {
    let n = rho.bipartition().n_qubits();
    let k = (usize::BITS - n.leading_zeros()) as usize;
    let copies = 1usize << k;
    let d = rho.dim();
    let mut acc = CMatrix::zeros(d, d);
    for i in 0..copies {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / copies as f64;
        let u = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |j, _| {
            C64::from_polar(1.0, theta * j.count_ones() as f64)
        }));
        acc += &u * rho.matrix() * u.adjoint();
    }
    acc /= C64::new(copies as f64, 0.0);
    DensityOperator::from_hermitian_unchecked(rho.bipartition(), acc)
}

/// Sector block of the partial transpose, `P_q rho^Γ P_q`, for a state that is
/// block diagonal in total charge.
pub fn pt_sector_block(rho: &DensityOperator, q: i32) -> Result<SectorBlock> {
    let diag = is_block_diagonal(rho, SectorKind::Q);
    if !diag.is_block_diagonal {
        return Err(Error::NotSymmetric(diag.residual));
    }
    let proj = build_projector(SectorKind::P, q, rho.bipartition())?;
    if proj.rank() == 0 {
        return Err(Error::EmptySector(q));
    }
    block_extract(&partial_transpose(rho), &proj)
}

/// Evaluate one condition on the raw moments of `P_q rho^Γ P_q`.
pub fn sr_evaluate(rho: &DensityOperator, q: i32, condition: Condition) -> Result<ConditionReport> {
    let block = pt_sector_block(rho, q)?;
    let report = match condition.required_order() {
        Some(k) => evaluate(condition, &block.moments(k))?,
        None => evaluate_spectral(condition, &block.spectrum())?,
    };
    Ok(report.in_sector(q))
}

/// Both sides of the multi-copy identity `tr(P_q rho^Γ P_q)^k = tr(L_q^(k) rho^{⊗k})`.
///
/// The right side is summed directly over the basis of `k` copies using the
/// cyclic shifts `(a_1..a_k) -> (a_k, a_1, .., a_{k-1})` on the A copies and
/// `(b_1..b_k) -> (b_2, .., b_k, b_1)` on the B copies, with the charge
/// projector acting on `A_1` and `B_k`.
pub fn lemma2_oracle(rho: &DensityOperator, q: i32, k: usize) -> Result<(f64, f64)> {
    let bip = rho.bipartition();
    let n = bip.n_qubits();
    if !(1..=3).contains(&k) || k * n > 12 {
        return Err(Error::OutOfRange(format!("multi-copy oracle needs k in 1..=3 and k*n <= 12, got k={k}, n={n}")));
    }
    let direct = pt_sector_block(rho, q)?.moments(k).p(k);

    let m = rho.matrix();
    let d = bip.dim();
    let mut total = C64::new(0.0, 0.0);
    let mut xa = vec![0usize; k];
    let mut xb = vec![0usize; k];
    for x in 0..d.pow(k as u32) {
        let mut rest = x;
        for c in (0..k).rev() {
            let (a, b) = bip.split_index(rest % d);
            xa[c] = a;
            xb[c] = b;
            rest /= d;
        }
        if xa[0].count_ones() as i32 - xb[k - 1].count_ones() as i32 != q {
            continue;
        }
        let mut prod = C64::new(1.0, 0.0);
        for c in 0..k {
            let ya = xa[(c + 1) % k];
            let yb = xb[(c + k - 1) % k];
            prod *= m[(bip.join_index(ya, yb), bip.join_index(xa[c], xb[c]))];
        }
        total += prod;
    }
    Ok((direct, total.re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CVector, PureState};

    fn bell() -> DensityOperator {
        let bip = Bipartition::new(1, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(0.0, 0.0)]);
        DensityOperator::from_pure(&PureState::new(bip, v).unwrap())
    }

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn projector_examples() {
        let b11 = Bipartition::new(1, 1).unwrap();
        assert_eq!(build_projector(SectorKind::P, 0, b11).unwrap().basis_indices(), &[0, 3]);
        let b22 = Bipartition::new(2, 2).unwrap();
        assert_eq!(build_projector(SectorKind::P, -1, b22).unwrap().rank(), 4);
        assert_eq!(build_projector(SectorKind::Q, 0, b22).unwrap().basis_indices(), &[0]);
        assert!(matches!(build_projector(SectorKind::P, 3, b22), Err(Error::SectorOutOfRange { .. })));
        assert!(matches!(build_projector(SectorKind::Q, -1, b22), Err(Error::SectorOutOfRange { .. })));
    }

    #[test]
    fn sector_sizes_are_binomial() {
        for (na, nb) in [(1, 1), (2, 3), (3, 2), (4, 4)] {
            let bip = Bipartition::new(na, nb).unwrap();
            let ps = all_projectors(SectorKind::P, bip).unwrap();
            assert_eq!(ps.iter().map(|p| p.rank()).sum::<usize>(), bip.dim());
            for p in &ps {
                assert_eq!(p.rank(), binomial(na + nb, (p.charge() + nb as i32) as usize));
            }
            for p in all_projectors(SectorKind::Q, bip).unwrap() {
                assert_eq!(p.rank(), binomial(na + nb, p.charge() as usize));
            }
        }
    }

    #[test]
    fn block_examples() {
        let pt = partial_transpose(&bell());
        let b11 = pt.bipartition();
        let b0 = block_extract(&pt, &build_projector(SectorKind::P, 0, b11).unwrap()).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0].map(|x| C64::new(x, 0.0)));
        assert!((b0.matrix - expected).norm() < 1e-15);
        let bm = block_extract(&pt, &build_projector(SectorKind::P, -1, b11).unwrap()).unwrap();
        assert!((bm.matrix[(0, 0)].re - 0.5).abs() < 1e-15);
        let id = DensityOperator::maximally_mixed(Bipartition::new(2, 1).unwrap());
        let p = build_projector(SectorKind::P, 1, id.bipartition()).unwrap();
        let blk = block_extract(&id, &p).unwrap();
        assert!((blk.matrix - CMatrix::identity(p.rank(), p.rank()) * C64::new(0.125, 0.0)).norm() < 1e-15);
        let other = Bipartition::new(1, 2).unwrap();
        assert!(block_extract(&id, &build_projector(SectorKind::P, 0, other).unwrap()).is_err());
    }

    #[test]
    fn sr_examples() {
        let r = sr_evaluate(&bell(), 0, Condition::Dn(2)).unwrap();
        assert!((r.margin - 0.5).abs() < 1e-15 && r.detected());
        assert_eq!(r.name(), "SR-D2");
        let r = sr_evaluate(&bell(), -1, Condition::Dn(2)).unwrap();
        assert!(r.margin.abs() < 1e-15 && !r.detected());
        let id = DensityOperator::maximally_mixed(Bipartition::new(2, 2).unwrap());
        for q in -2..=2 {
            for c in [Condition::Dn(2), Condition::Dn(3), Condition::P3Ppt] {
                assert!(!sr_evaluate(&id, q, c).unwrap().detected());
            }
        }
    }

    #[test]
    fn sr_rejects_asymmetric_states() {
        let bip = Bipartition::new(1, 1).unwrap();
        let plus = PureState::new(bip, CVector::from_element(4, C64::new(0.5, 0.0))).unwrap();
        let rho = DensityOperator::from_pure(&plus);
        assert!(matches!(sr_evaluate(&rho, 0, Condition::Dn(2)), Err(Error::NotSymmetric(_))));
        assert!(sr_evaluate(&symmetrize(&rho), 0, Condition::Dn(2)).is_ok());
    }

    #[test]
    fn symmetrize_plus_plus() {
        let bip = Bipartition::new(1, 1).unwrap();
        let plus = PureState::new(bip, CVector::from_element(4, C64::new(0.5, 0.0))).unwrap();
        let rho = DensityOperator::from_pure(&plus);
        let s = symmetrize(&rho);
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = C64::new(0.25, 0.0);
        expected[(3, 3)] = C64::new(0.25, 0.0);
        for i in [1, 2] {
            for j in [1, 2] {
                expected[(i, j)] = C64::new(0.25, 0.0);
            }
        }
        assert_eq!(s.matrix(), &expected);
        assert_eq!(symmetrize(&s), s);
        assert!(is_block_diagonal(&s, SectorKind::Q).is_block_diagonal);
        assert!(!is_block_diagonal(&rho, SectorKind::Q).is_block_diagonal);
        assert_eq!(symmetrize(&bell()), bell());
    }

    #[test]
    fn phase_average_matches_projection() {
        let bip = Bipartition::new(2, 1).unwrap();
        let v = CVector::from_fn(8, |i, _| C64::new((i as f64 + 1.0).sqrt(), (i as f64).cos()));
        let rho = DensityOperator::from_pure(&PureState::normalized(bip, v).unwrap());
        let a = symmetrize(&rho);
        let b = symmetrize_by_phase_average(&rho);
        assert!((a.matrix() - b.matrix()).norm() < 1e-12);
    }

    #[test]
    fn pt_of_symmetric_state_is_p_block_diagonal() {
        let pt = partial_transpose(&bell());
        assert!(is_block_diagonal(&pt, SectorKind::P).is_block_diagonal);
    }

    #[test]
    fn lemma2_examples() {
        let (a, b) = lemma2_oracle(&bell(), 0, 2).unwrap();
        assert!((a - 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        for q in -1..=1 {
            let (a, b) = lemma2_oracle(&bell(), q, 1).unwrap();
            let p = build_projector(SectorKind::P, q, bell().bipartition()).unwrap();
            let tr: f64 = p.basis_indices().iter().map(|&i| bell().matrix()[(i, i)].re).sum();
            assert!((a - tr).abs() < 1e-15 && (b - tr).abs() < 1e-15);
        }
        let id = DensityOperator::maximally_mixed(Bipartition::new(2, 2).unwrap());
        for k in 1..=3 {
            for q in -2..=2 {
                let (a, b) = lemma2_oracle(&id, q, k).unwrap();
                let rank = build_projector(SectorKind::P, q, id.bipartition()).unwrap().rank() as f64;
                let want = rank * 0.0625f64.powi(k as i32);
                assert!((a - want).abs() < 1e-14 && (b - want).abs() < 1e-14, "k={k} q={q}: {a} {b} {want}");
            }
        }
        assert!(lemma2_oracle(&id, 0, 4).is_err());
    }
}
