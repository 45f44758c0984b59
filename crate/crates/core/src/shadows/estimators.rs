//! Linear and U-statistics estimators over classical shadows.
//!
//! Polynomial estimators work on per-snapshot sector blocks
//! `B_i = P rho_hat_i^Γ P` (compressed to the sector basis). With `t_i = tr B_i`,
//! `S = sum_i B_i` and `T = sum_i B_i^2`, inclusion-exclusion over coincident
//! indices gives
//!
//! * `sum_{i != j} tr(B_i B_j) = tr(S^2) - sum_i tr(B_i^2)`
//! * `sum_{i,j,k distinct} tr(B_i B_j B_k) = tr(S^3) - 3 tr(T S) + 2 sum_i tr(B_i^3)`
//!
//! so every estimator runs in `O(N)` block operations. Blocks are summed in a
//! canonical order (sorted by their bit patterns), which makes the estimates
//! bit-identical under any permutation of the snapshots.

use std::cmp::Ordering;

use rayon::prelude::*;

use super::Shadow;
use crate::error::{Error, Result};
use crate::linalg::{trace_product, CMatrix, DensityOperator, C64};
use crate::symmetry::SectorProjector;

/// `(1/N) sum_i tr(O rho_hat_i)`.
pub fn estimate_linear(shadow: &Shadow, observable: &DensityOperator) -> Result<f64> {
    if shadow.is_empty() {
        return Err(Error::TooFewSnapshots { needed: 1, got: 0 });
    }
    let d = 1usize << shadow.n_qubits;
    if observable.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: observable.dim() });
    }
    let values = linear_values(shadow, observable.matrix())?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Per-snapshot values `tr(O rho_hat_i)`.
pub fn linear_values(shadow: &Shadow, observable: &CMatrix) -> Result<Vec<f64>> {
    (0..shadow.len()).into_par_iter().map(|i| Ok(shadow.operator(i)?.expectation(observable))).collect()
}

/// Compressed blocks `P rho_hat_i^Γ P` for every snapshot, in snapshot order.
pub fn sector_blocks(shadow: &Shadow, proj: &SectorProjector) -> Result<Vec<CMatrix>> {
    let bip = proj.bipartition();
    if bip.n_qubits() != shadow.n_qubits {
        return Err(Error::DimensionMismatch { expected: 1 << shadow.n_qubits, got: bip.dim() });
    }
    let idx = proj.basis_indices();
    let n_b = bip.n_b();
    (0..shadow.len())
        .into_par_iter()
        .map(|i| {
            let op = shadow.operator(i)?;
            Ok(CMatrix::from_fn(idx.len(), idx.len(), |r, c| op.entry(idx[r], idx[c], n_b, n_b > 0)))
        })
        .collect()
}

fn cmp_blocks(a: &CMatrix, b: &CMatrix) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        let o = x.re.to_bits().cmp(&y.re.to_bits()).then(x.im.to_bits().cmp(&y.im.to_bits()));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

fn tr(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Power sums of a set of Hermitian blocks, sufficient for the first-,
/// second- and third-order U-statistics.
#[derive(Clone, Debug)]
pub struct PowerSums {
    pub n: usize,
    pub sum_t: f64,
    pub sum_t2: f64,
    pub sum_tr_b2: f64,
    pub sum_tr_b3: f64,
    pub s: CMatrix,
    pub t: CMatrix,
}

impl PowerSums {
    pub fn from_blocks(blocks: &[CMatrix]) -> Result<Self> {
        let first = blocks.first().ok_or(Error::TooFewSnapshots { needed: 1, got: 0 })?;
        let r = first.nrows();
        let mut order: Vec<&CMatrix> = blocks.iter().collect();
        order.sort_by(|a, b| cmp_blocks(a, b));
        let mut out = PowerSums {
            n: blocks.len(),
            sum_t: 0.0,
            sum_t2: 0.0,
            sum_tr_b2: 0.0,
            sum_tr_b3: 0.0,
            s: CMatrix::zeros(r, r),
            t: CMatrix::zeros(r, r),
        };
        for b in order {
            let b2 = b * b;
            let t = tr(b);
            out.sum_t += t;
            out.sum_t2 += t * t;
            out.sum_tr_b2 += tr(&b2);
            out.sum_tr_b3 += trace_product(&b2, b).re;
            out.s += b;
            out.t += b2;
        }
        Ok(out)
    }

    fn need(&self, k: usize) -> Result<()> {
        if self.n < k {
            return Err(Error::TooFewSnapshots { needed: k, got: self.n });
        }
        Ok(())
    }

    /// `(1/N) sum_i tr B_i`.
    pub fn p1(&self) -> f64 {
        self.sum_t / self.n as f64
    }

    /// Unbiased `p_1^2`: `(1/(N(N-1))) sum_{i != j} t_i t_j`.
    pub fn p1_squared(&self) -> Result<f64> {
        self.need(2)?;
        let n = self.n as f64;
        Ok((self.sum_t * self.sum_t - self.sum_t2) / (n * (n - 1.0)))
    }

    /// `(1/(N(N-1))) sum_{i != j} tr(B_i B_j)`.
    pub fn p2(&self) -> Result<f64> {
        self.need(2)?;
        let n = self.n as f64;
        Ok((trace_product(&self.s, &self.s).re - self.sum_tr_b2) / (n * (n - 1.0)))
    }

    /// `D_2 = p_1^2 - p_2`, as one U-statistic.
    pub fn d2(&self) -> Result<f64> {
        self.need(2)?;
        let n = self.n as f64;
        let pairs_t = self.sum_t * self.sum_t - self.sum_t2;
        let pairs_b = trace_product(&self.s, &self.s).re - self.sum_tr_b2;
        Ok((pairs_t - pairs_b) / (n * (n - 1.0)))
    }

    /// `(1/(N(N-1)(N-2))) sum_{distinct i,j,k} Re tr(B_i B_j B_k)`.
    pub fn p3(&self) -> Result<f64> {
        self.need(3)?;
        let n = self.n as f64;
        let s2 = &self.s * &self.s;
        let s3 = trace_product(&s2, &self.s).re;
        let ts = trace_product(&self.t, &self.s).re;
        Ok((s3 - 3.0 * ts + 2.0 * self.sum_tr_b3) / (n * (n - 1.0) * (n - 2.0)))
    }
}

/// `D_2^(q)` estimate: `(1/(N(N-1))) sum_{i != j} [t_i t_j - Re tr(B_i B_j)]`.
pub fn estimate_d2_sector(shadow: &Shadow, proj: &SectorProjector) -> Result<f64> {
    if shadow.len() < 2 {
        return Err(Error::TooFewSnapshots { needed: 2, got: shadow.len() });
    }
    PowerSums::from_blocks(&sector_blocks(shadow, proj)?)?.d2()
}

/// Third sector moment estimate over ordered distinct triples.
pub fn estimate_p3_sector(shadow: &Shadow, proj: &SectorProjector) -> Result<f64> {
    if shadow.len() < 3 {
        return Err(Error::TooFewSnapshots { needed: 3, got: shadow.len() });
    }
    PowerSums::from_blocks(&sector_blocks(shadow, proj)?)?.p3()
}

/// Direct `O(N^2)` pair sum, kept as a reference for the power-sum rewrite.
pub fn d2_naive(blocks: &[CMatrix]) -> f64 {
    let n = blocks.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += tr(&blocks[i]) * tr(&blocks[j]) - trace_product(&blocks[i], &blocks[j]).re;
            }
        }
    }
    acc / (n * (n - 1)) as f64
}

/// Direct `O(N^3)` triple sum.
pub fn p3_naive(blocks: &[CMatrix]) -> f64 {
    let n = blocks.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            let bij = &blocks[i] * &blocks[j];
            for k in 0..n {
                if k != i && k != j {
                    acc += trace_product(&bij, &blocks[k]).re;
                }
            }
        }
    }
    acc / (n * (n - 1) * (n - 2)) as f64
}

/// Unbiased estimate of `tr(M^k)` for `E[B_i] = M` from `k` disjoint groups:
/// snapshot `i` goes to group `i mod k`, and the estimate averages
/// `Re tr(G_{π1} ... G_{πk})` over cyclically distinct orderings of the group means.
pub fn moment_split_estimate(blocks: &[CMatrix], k: usize) -> Result<f64> {
    if k == 0 || blocks.len() < k {
        return Err(Error::TooFewSnapshots { needed: k.max(1), got: blocks.len() });
    }
    let r = blocks[0].nrows();
    let mut means = vec![CMatrix::zeros(r, r); k];
    let mut counts = vec![0usize; k];
    for (i, b) in blocks.iter().enumerate() {
        means[i % k] += b;
        counts[i % k] += 1;
    }
    for (m, c) in means.iter_mut().zip(&counts) {
        *m /= C64::new(*c as f64, 0.0);
    }
    let mut perm: Vec<usize> = (1..k).collect();
    let mut acc = 0.0;
    let mut count = 0usize;
    permute(&mut perm, 0, &mut |p| {
        let mut prod = means[0].clone();
        for &g in &p[..p.len().saturating_sub(1)] {
            prod = &prod * &means[g];
        }
        let last = p.last().map(|&g| &means[g]).unwrap_or(&means[0]);
        acc += if p.is_empty() { tr(&prod) } else { trace_product(&prod, last).re };
        count += 1;
    });
    Ok(acc / count as f64)
}

fn permute(v: &mut Vec<usize>, start: usize, f: &mut dyn FnMut(&[usize])) {
    if start + 1 >= v.len() {
        f(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permute(v, start + 1, f);
        v.swap(start, i);
    }
}

/// Which U-statistic a resampling routine should recompute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShadowEstimator {
    P1,
    P2,
    D2,
    P3,
}

impl ShadowEstimator {
    pub fn evaluate(self, blocks: &[CMatrix]) -> Result<f64> {
        let ps = PowerSums::from_blocks(blocks)?;
        match self {
            ShadowEstimator::P1 => Ok(ps.p1()),
            ShadowEstimator::P2 => ps.p2(),
            ShadowEstimator::D2 => ps.d2(),
            ShadowEstimator::P3 => ps.p3(),
        }
    }

    /// Leave-one-out values, each in `O(r^3)` from the full power sums.
    pub fn leave_one_out(self, blocks: &[CMatrix]) -> Result<Vec<f64>> {
        let n = blocks.len();
        if n < 10 {
            return Err(Error::TooFewSnapshots { needed: 10, got: n });
        }
        let ps = PowerSums::from_blocks(blocks)?;
        let s2 = &ps.s * &ps.s;
        let m = (n - 1) as f64;
        Ok(blocks
            .par_iter()
            .map(|b| {
                let b2 = b * b;
                let t = tr(b);
                let sum_t = ps.sum_t - t;
                let sum_t2 = ps.sum_t2 - t * t;
                let tr_b2 = tr(&b2);
                let ss = trace_product(&ps.s, &ps.s).re - 2.0 * trace_product(&ps.s, b).re + tr_b2;
                let sum_tr_b2 = ps.sum_tr_b2 - tr_b2;
                match self {
                    ShadowEstimator::P1 => sum_t / m,
                    ShadowEstimator::P2 => (ss - sum_tr_b2) / (m * (m - 1.0)),
                    ShadowEstimator::D2 => ((sum_t * sum_t - sum_t2) - (ss - sum_tr_b2)) / (m * (m - 1.0)),
                    ShadowEstimator::P3 => {
                        let tr_b3 = trace_product(&b2, b).re;
                        let s3 = trace_product(&s2, &ps.s).re - 3.0 * trace_product(&s2, b).re
                            + 3.0 * trace_product(&ps.s, &b2).re
                            - tr_b3;
                        let ts = trace_product(&ps.t, &ps.s).re
                            - trace_product(&ps.t, b).re
                            - trace_product(&b2, &ps.s).re
                            + tr_b3;
                        (s3 - 3.0 * ts + 2.0 * (ps.sum_tr_b3 - tr_b3)) / (m * (m - 1.0) * (m - 2.0))
                    }
                }
            })
            .collect())
    }
}

/// Jackknife standard error from leave-one-out values.
pub fn jackknife_from_values(loo: &[f64]) -> f64 {
    let n = loo.len() as f64;
    let mean = loo.iter().sum::<f64>() / n;
    ((n - 1.0) / n * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt()
}

/// Leave-one-out jackknife standard error of `estimator` over `items` (N >= 10).
pub fn jackknife_error<T: Clone, F>(items: &[T], estimator: F) -> Result<f64>
where
    F: Fn(&[T]) -> Result<f64>,
{
    let n = items.len();
    if n < 10 {
        return Err(Error::TooFewSnapshots { needed: 10, got: n });
    }
    let mut buf: Vec<T> = items[1..].to_vec();
    let mut loo = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            buf[i - 1] = items[i - 1].clone();
        }
        loo.push(estimator(&buf)?);
    }
    Ok(jackknife_from_values(&loo))
}

/// Delete-a-group jackknife over `groups` contiguous groups, for estimators
/// too expensive to recompute `N` times.
pub fn grouped_jackknife_error<T: Clone, F>(items: &[T], groups: usize, estimator: F) -> Result<f64>
where
    F: Fn(&[T]) -> Result<f64>,
{
    if groups < 2 || items.len() < groups {
        return Err(Error::TooFewSnapshots { needed: groups.max(2), got: items.len() });
    }
    let bounds = batch_bounds(items.len(), groups);
    let loo: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| {
            let rest: Vec<T> = items[..lo].iter().chain(&items[hi..]).cloned().collect();
            estimator(&rest)
        })
        .collect::<Result<_>>()?;
    Ok(jackknife_from_values(&loo))
}

/// Contiguous near-equal batches: the first `len % batches` get one extra item.
pub fn batch_bounds(len: usize, batches: usize) -> Vec<(usize, usize)> {
    let base = len / batches;
    let extra = len % batches;
    let mut out = Vec::with_capacity(batches);
    let mut lo = 0;
    for b in 0..batches {
        let hi = lo + base + usize::from(b < extra);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

/// Median of the estimator over contiguous batches; an even count averages the two central values.
pub fn batch_median_estimate<T, F>(items: &[T], batches: usize, estimator: F) -> Result<f64>
where
    F: Fn(&[T]) -> Result<f64> + Sync,
    T: Sync,
{
    if batches == 0 || batches > items.len() {
        return Err(Error::OutOfRange(format!("{batches} batches for {} snapshots", items.len())));
    }
    let mut vals: Vec<f64> = batch_bounds(items.len(), batches)
        .into_par_iter()
        .map(|(lo, hi)| estimator(&items[lo..hi]))
        .collect::<Result<_>>()?;
    vals.sort_by(f64::total_cmp);
    let m = vals.len();
    Ok(if m % 2 == 1 { vals[m / 2] } else { 0.5 * (vals[m / 2 - 1] + vals[m / 2]) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Bipartition, CVector, PureState};
    use crate::shadows::{simulate, Ensemble, SourceSequence};
    use crate::symmetry::{build_projector, SectorKind};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn bell() -> DensityOperator {
        let bip = Bipartition::new(1, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(0.0, 0.0)]);
        DensityOperator::from_pure(&PureState::new(bip, v).unwrap())
    }

    #[test]
    fn power_sums_match_naive() {
        let shadow = simulate(&SourceSequence::Constant(bell()), 60, Ensemble::Pauli, 4).unwrap();
        for q in -1..=1 {
            let proj = build_projector(SectorKind::P, q, bell().bipartition()).unwrap();
            let blocks = sector_blocks(&shadow, &proj).unwrap();
            let ps = PowerSums::from_blocks(&blocks).unwrap();
            assert!((ps.d2().unwrap() - d2_naive(&blocks)).abs() < 1e-10);
            assert!((ps.p3().unwrap() - p3_naive(&blocks)).abs() < 1e-10);
        }
    }

    #[test]
    fn leave_one_out_matches_recomputation() {
        let shadow = simulate(&SourceSequence::Constant(bell()), 30, Ensemble::Pauli, 6).unwrap();
        let proj = build_projector(SectorKind::P, 0, bell().bipartition()).unwrap();
        let blocks = sector_blocks(&shadow, &proj).unwrap();
        for est in [ShadowEstimator::P1, ShadowEstimator::P2, ShadowEstimator::D2, ShadowEstimator::P3] {
            let fast = est.leave_one_out(&blocks).unwrap();
            for (i, f) in fast.iter().enumerate() {
                let rest: Vec<CMatrix> = blocks.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, b)| b.clone()).collect();
                assert!((f - est.evaluate(&rest).unwrap()).abs() < 1e-9, "{est:?} {i}");
            }
            let slow = jackknife_error(&blocks, |b| est.evaluate(b)).unwrap();
            assert!((slow - jackknife_from_values(&fast)).abs() < 1e-9);
        }
    }

    #[test]
    fn permutation_invariance_is_bit_exact() {
        let shadow = simulate(&SourceSequence::Constant(bell()), 500, Ensemble::Pauli, 8).unwrap();
        let proj = build_projector(SectorKind::P, 0, bell().bipartition()).unwrap();
        let mut blocks = sector_blocks(&shadow, &proj).unwrap();
        let a = PowerSums::from_blocks(&blocks).unwrap();
        blocks.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
        let b = PowerSums::from_blocks(&blocks).unwrap();
        assert_eq!(a.d2().unwrap().to_bits(), b.d2().unwrap().to_bits());
        assert_eq!(a.p3().unwrap().to_bits(), b.p3().unwrap().to_bits());
    }

    #[test]
    fn too_few_snapshots() {
        let shadow = simulate(&SourceSequence::Constant(bell()), 2, Ensemble::Pauli, 1).unwrap();
        let proj = build_projector(SectorKind::P, 0, bell().bipartition()).unwrap();
        assert!(estimate_d2_sector(&shadow, &proj).is_ok());
        assert!(matches!(estimate_p3_sector(&shadow, &proj), Err(Error::TooFewSnapshots { .. })));
        let one = simulate(&SourceSequence::Constant(bell()), 1, Ensemble::Pauli, 1).unwrap();
        assert!(matches!(estimate_d2_sector(&one, &proj), Err(Error::TooFewSnapshots { .. })));
    }

    #[test]
    fn linear_identity_is_one() {
        let shadow = simulate(&SourceSequence::Constant(bell()), 50, Ensemble::Pauli, 2).unwrap();
        let id = DensityOperator::new(bell().bipartition(), CMatrix::identity(4, 4)).unwrap();
        assert!((estimate_linear(&shadow, &id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jackknife_of_constant_is_zero() {
        let items = vec![3.0; 20];
        let e = jackknife_error(&items, |x| Ok(x.iter().sum::<f64>() / x.len() as f64)).unwrap();
        assert_eq!(e, 0.0);
        assert!(jackknife_error(&items[..5], |_| Ok(0.0)).is_err());
    }

    #[test]
    fn batch_median_conventions() {
        let items: Vec<f64> = vec![1.0, 2.0, 3.0, 10.0];
        let mean = |x: &[f64]| Ok(x.iter().sum::<f64>() / x.len() as f64);
        assert_eq!(batch_median_estimate(&items, 1, mean).unwrap(), 4.0);
        assert_eq!(batch_median_estimate(&items, 4, mean).unwrap(), 2.5);
        assert_eq!(batch_median_estimate(&items, 3, mean).unwrap(), 3.0);
        assert_eq!(batch_bounds(10, 3), vec![(0, 4), (4, 7), (7, 10)]);
    }

    #[test]
    fn split_estimator_is_exact_for_constant_blocks() {
        let m = CMatrix::from_fn(3, 3, |r, c| C64::new((r + c) as f64 * 0.1, 0.0));
        let blocks = vec![m.clone(); 12];
        for k in 1..=4 {
            let want = crate::linalg::matrix_moments(&m, k).p(k);
            assert!((moment_split_estimate(&blocks, k).unwrap() - want).abs() < 1e-12);
        }
    }
}
