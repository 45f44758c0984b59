//! Kinetically constrained chain `H = Omega sum_i P_{i-1} X_i P_{i+1}` with
//! `P = |0><0|` and open boundaries, quenched from `|1010..>`.
//!
//! States are kept in the blockade subspace (no two adjacent 1s), whose
//! dimension on an open chain of `N` sites is the Fibonacci number `F(N+2)`.

use rayon::prelude::*;

use super::krylov::expm_multiply;
use crate::conditions::{check_dn, check_p3ppt, negativity_from_spectrum, ConditionReport, MomentVector};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_spectrum, matrix_moments, partial_transpose, Bipartition, CVector, DensityOperator, PureState, C64};
use crate::shadows::estimators::{grouped_jackknife_error, moment_split_estimate, sector_blocks, PowerSums};
use crate::shadows::{simulate, Ensemble, SourceSequence};
use crate::symmetry::SectorProjector;

pub const MAX_SITES: usize = 14;

/// Per-step Krylov error target.
pub const KRYLOV_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PXPParams {
    pub n_sites: usize,
    pub omega: f64,
    pub t_grid: Vec<f64>,
    /// Sites of the two halves of the analysed subsystem.
    pub a1: Vec<usize>,
    pub a2: Vec<usize>,
}

impl PXPParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 || self.n_sites > MAX_SITES {
            return Err(Error::OutOfRange(format!("n_sites must lie in [2, {MAX_SITES}], got {}", self.n_sites)));
        }
        if !self.omega.is_finite() {
            return Err(Error::OutOfRange("omega must be finite".into()));
        }
        if self.t_grid.iter().any(|t| !t.is_finite()) || self.t_grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::OutOfRange("times must be finite and ascending".into()));
        }
        let mut seen = vec![false; self.n_sites];
        for &s in self.a1.iter().chain(&self.a2) {
            if s >= self.n_sites || std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidSelection(format!("site {s} is out of range or repeated")));
            }
        }
        Ok(())
    }
}

/// Blockade-constrained basis: indices with no two adjacent set bits, ascending.
pub fn constrained_basis(n: usize) -> Vec<usize> {
    (0..1usize << n).filter(|i| i & (i >> 1) == 0).collect()
}

/// `F(n)` with `F(1) = F(2) = 1`.
pub fn fibonacci(n: usize) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..n {
        (a, b) = (b, a + b);
    }
    a
}

/// Staggered product state `|1010..>` (site 0 excited).
pub fn staggered_index(n: usize) -> usize {
    (0..n).step_by(2).map(|s| 1usize << (n - 1 - s)).sum()
}

/// The Hamiltonian as adjacency lists in the constrained basis: `X_i` flips
/// site `i` when both neighbours are in `|0>`.
pub struct PxpHamiltonian {
    pub n_sites: usize,
    pub omega: f64,
    pub basis: Vec<usize>,
    neighbours: Vec<Vec<usize>>,
}

impl PxpHamiltonian {
    pub fn new(n: usize, omega: f64) -> Self {
        let basis = constrained_basis(n);
        let mut pos = vec![usize::MAX; 1 << n];
        for (k, &i) in basis.iter().enumerate() {
            pos[i] = k;
        }
        let neighbours = basis
            .iter()
            .map(|&i| {
                (0..n)
                    .filter_map(|s| {
                        let b = 1usize << (n - 1 - s);
                        let left = if s > 0 { i & (b << 1) } else { 0 };
                        let right = if s + 1 < n { i & (b >> 1) } else { 0 };
                        (left == 0 && right == 0).then(|| pos[i ^ b])
                    })
                    .collect()
            })
            .collect();
        Self { n_sites: n, omega, basis, neighbours }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        CVector::from_fn(v.len(), |k, _| {
            self.neighbours[k].iter().map(|&j| v[j]).sum::<C64>() * self.omega
        })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let d = self.dim();
        let mut h = nalgebra::DMatrix::zeros(d, d);
        for (k, nb) in self.neighbours.iter().enumerate() {
            for &j in nb {
                h[(k, j)] = self.omega;
            }
        }
        h
    }

    /// Embed a constrained-basis vector into the full register.
    pub fn embed(&self, v: &CVector) -> Result<PureState> {
        let n = self.n_sites;
        let mut amp = CVector::zeros(1 << n);
        for (k, &i) in self.basis.iter().enumerate() {
            amp[i] = v[k];
        }
        let bip = if n >= 2 { Bipartition::new(n / 2, n - n / 2)? } else { Bipartition::unsplit(n)? };
        PureState::new(bip, amp)
    }

    pub fn initial_state(&self) -> CVector {
        let s = staggered_index(self.n_sites);
        let k = self.basis.binary_search(&s).expect("staggered state is unblocked");
        let mut v = CVector::zeros(self.dim());
        v[k] = C64::new(1.0, 0.0);
        v
    }
}

/// `exp(-i H t) |1010..>` at every grid time, as constrained-basis vectors.
pub fn pxp_evolve_constrained(params: &PXPParams) -> Result<(PxpHamiltonian, Vec<CVector>)> {
    params.validate()?;
    let h = PxpHamiltonian::new(params.n_sites, params.omega);
    let mut v = h.initial_state();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(params.t_grid.len());
    for &target in &params.t_grid {
        if target != t {
            v = expm_multiply(|x| h.apply(x), &v, target - t, KRYLOV_TOL)?;
            t = target;
        }
        out.push(v.clone());
    }
    Ok((h, out))
}

/// Full-register states at every grid time.
pub fn pxp_evolve(params: &PXPParams) -> Result<Vec<PureState>> {
    let (h, states) = pxp_evolve_constrained(params)?;
    states.iter().map(|v| h.embed(v)).collect()
}

/// `<Z_i>` for every site, with `Z |0> = +|0>`.
pub fn z_profile(state: &PureState) -> Vec<f64> {
    let n = state.n_qubits();
    (0..n)
        .map(|s| state.diagonal_expectation(|i| if (i >> (n - 1 - s)) & 1 == 1 { -1.0 } else { 1.0 }))
        .collect()
}

/// Staggered magnetization normalized to 1 on `|1010..>`.
pub fn staggered_magnetization(state: &PureState) -> f64 {
    let z = z_profile(state);
    z.iter().enumerate().map(|(s, v)| if s % 2 == 0 { -v } else { *v }).sum::<f64>() / z.len() as f64
}

/// First local maximum of `m` after its first dip below zero: `(index, value)`.
pub fn first_revival(m: &[f64]) -> Option<(usize, f64)> {
    let dip = m.iter().position(|&x| x < 0.0)?;
    (dip + 1..m.len().saturating_sub(1)).find(|&k| m[k] >= m[k - 1] && m[k] >= m[k + 1] && m[k] > 0.0).map(|k| (k, m[k]))
}

/// Exact conditions on the subsystem at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanRow {
    pub t: f64,
    pub negativity: f64,
    pub d3: ConditionReport,
    pub d4: ConditionReport,
    pub p3ppt: ConditionReport,
}

impl ScanRow {
    pub fn sound(&self) -> bool {
        let any = self.d3.detected() || self.d4.detected() || self.p3ppt.detected();
        !any || self.negativity > super::xxz::NEGATIVITY_FLOOR
    }
}

fn scan_reports(t: f64, p: &MomentVector, negativity: f64) -> Result<ScanRow> {
    Ok(ScanRow { t, negativity, d3: check_dn(p, 3)?, d4: check_dn(p, 4)?, p3ppt: check_p3ppt(p)? })
}

/// Negativity, `D_3`, `D_4` and `p_3`-PPT of `rho_A^Γ` (split `A1|A2`) at every time.
pub fn pxp_entanglement_scan(states: &[PureState], times: &[f64], a1: &[usize], a2: &[usize]) -> Result<Vec<ScanRow>> {
    if states.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: states.len() });
    }
    if a1.is_empty() || a2.is_empty() {
        return Err(Error::InvalidSelection("the subsystem must split into two non-empty halves".into()));
    }
    states
        .par_iter()
        .zip(times.par_iter())
        .map(|(s, &t)| {
            let rho = s.reduced_density(a1, a2)?;
            let pt = partial_transpose(&rho);
            let neg = negativity_from_spectrum(&hermitian_spectrum(&pt)?);
            scan_reports(t, &matrix_moments(&pt, 4), neg)
        })
        .collect()
}

/// Shadow estimates of the scan quantities with jackknife standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowScanRow {
    pub t: f64,
    pub moments: [f64; 4],
    pub d3_margin: f64,
    pub d4_margin: f64,
    pub p3ppt_margin: f64,
    pub d3_error: f64,
    pub d4_error: f64,
    pub p3ppt_error: f64,
}

/// `p_1..p_4` of the partial transpose from global-unitary snapshot blocks:
/// U-statistics up to third order and a four-group split estimate for `p_4`.
fn shadow_moments(blocks: &[nalgebra::DMatrix<C64>]) -> Result<MomentVector> {
    let ps = PowerSums::from_blocks(blocks)?;
    Ok(MomentVector::new(vec![ps.p1(), ps.p2()?, ps.p3()?, moment_split_estimate(blocks, 4)?]))
}

/// Re-estimate the scan from `n_snapshots` global random unitaries per time point.
/// Error bars come from a 20-group delete-a-group jackknife.
pub fn pxp_shadow_scan(
    states: &[PureState],
    times: &[f64],
    a1: &[usize],
    a2: &[usize],
    n_snapshots: usize,
    seed: u64,
) -> Result<Vec<ShadowScanRow>> {
    const GROUPS: usize = 20;
    if n_snapshots < 2 * GROUPS {
        return Err(Error::TooFewSnapshots { needed: 2 * GROUPS, got: n_snapshots });
    }
    states
        .iter()
        .zip(times)
        .enumerate()
        .map(|(k, (s, &t))| {
            let rho = s.reduced_density(a1, a2)?;
            let bip = rho.bipartition();
            let shadow = simulate(&SourceSequence::Constant(rho), n_snapshots, Ensemble::Global, seed.wrapping_add(k as u64))?;
            let blocks = sector_blocks(&shadow, &SectorProjector::full(bip))?;
            let p = shadow_moments(&blocks)?;
            let margin = |f: fn(&MomentVector) -> Result<f64>| {
                grouped_jackknife_error(&blocks, GROUPS, |b| f(&shadow_moments(b)?))
            };
            let d3 = |p: &MomentVector| Ok(check_dn(p, 3)?.margin);
            let d4 = |p: &MomentVector| Ok(check_dn(p, 4)?.margin);
            let p3 = |p: &MomentVector| Ok(check_p3ppt(p)?.margin);
            Ok(ShadowScanRow {
                t,
                moments: [p.p(1), p.p(2), p.p(3), p.p(4)],
                d3_margin: d3(&p)?,
                d4_margin: d4(&p)?,
                p3ppt_margin: p3(&p)?,
                d3_error: margin(d3)?,
                d4_error: margin(d4)?,
                p3ppt_error: margin(p3)?,
            })
        })
        .collect()
}

/// Reduced state of the subsystem at every time, for state emission.
pub fn reduced_states(states: &[PureState], a1: &[usize], a2: &[usize]) -> Result<Vec<DensityOperator>> {
    states.iter().map(|s| s.reduced_density(a1, a2)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constrained_dimension_is_fibonacci() {
        for n in 1..=14 {
            assert_eq!(constrained_basis(n).len() as u64, fibonacci(n + 2), "n={n}");
        }
        assert_eq!(constrained_basis(12).len(), 377);
    }

    #[test]
    fn dimension_by_transfer_matrix() {
        // Count strings ending in 0 / 1 independently of the filter above.
        let mut ends = (1u64, 1u64);
        for _ in 1..12 {
            ends = (ends.0 + ends.1, ends.0);
        }
        assert_eq!(ends.0 + ends.1, 377);
    }

    #[test]
    fn krylov_matches_dense_and_conserves() {
        let p = PXPParams { n_sites: 8, omega: 1.0, t_grid: vec![0.0, 0.7, 2.0, 5.0], a1: vec![], a2: vec![] };
        let (h, states) = pxp_evolve_constrained(&p).unwrap();
        let dense = h.to_dense();
        let eig = dense.clone().symmetric_eigen();
        let u = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        let v0 = h.initial_state();
        let hc = dense.map(|x| C64::new(x, 0.0));
        let e0 = v0.dotc(&(&hc * &v0)).re;
        for (v, &t) in states.iter().zip(&p.t_grid) {
            let ph = CVector::from_fn(h.dim(), |j, _| C64::new(0.0, -eig.eigenvalues[j] * t).exp());
            let want = &u * (u.adjoint() * &v0).component_mul(&ph);
            assert!((v - want).norm() < 1e-9);
            assert!((v.norm() - 1.0).abs() < 1e-9);
            assert!((v.dotc(&(&hc * v)).re - e0).abs() < 1e-8);
        }
    }

    #[test]
    fn product_state_detects_nothing() {
        let p = PXPParams { n_sites: 8, omega: 1.0, t_grid: vec![0.0], a1: vec![2, 3], a2: vec![4, 5] };
        let states = pxp_evolve(&p).unwrap();
        let rows = pxp_entanglement_scan(&states, &p.t_grid, &p.a1, &p.a2).unwrap();
        let r = &rows[0];
        assert!(r.negativity < 1e-12);
        assert!(!r.d3.detected() && !r.d4.detected() && !r.p3ppt.detected());
        assert!((staggered_magnetization(&states[0]) - 1.0).abs() < 1e-12);
    }
}
