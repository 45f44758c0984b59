//! Ground states of the open XXZ chain `H = -sum_i (X X + Y Y + J_z Z Z)` and
//! the condition sweep over `J_z`.
//!
//! `Z |0> = +|0>`. The flip-flop part `XX + YY` maps `|01> <-> |10>` with
//! amplitude 2, so the Hamiltonian conserves the number of set bits.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::conditions::{
    check_d3opt_or_d2, check_dn, check_p3ppt, check_stieltjes5, negativity_from_spectrum, Condition, ConditionReport,
    MomentVector,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_spectrum, matrix_moments, partial_transpose, Bipartition, CVector, DensityOperator, PureState, C64};
use crate::symmetry::pt_sector_block;

/// Largest chain solved densely.
pub const MAX_SITES: usize = 12;

/// Relative gap below which two levels count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct XXZParams {
    pub l_sites: usize,
    pub jz: f64,
    /// Sites of A1, in order.
    pub a1: Vec<usize>,
    /// Sites of A2, in order.
    pub a2: Vec<usize>,
}

impl XXZParams {
    /// Middle block of `ell` sites split into halves.
    pub fn connected(l_sites: usize, ell: usize, jz: f64) -> Result<Self> {
        if ell < 2 || ell > l_sites {
            return Err(Error::InvalidSelection(format!("subsystem of {ell} sites in a chain of {l_sites}")));
        }
        let start = (l_sites - ell) / 2;
        let h = ell / 2;
        let p = Self { l_sites, jz, a1: (start..start + h).collect(), a2: (start + h..start + ell).collect() };
        p.validate()?;
        Ok(p)
    }

    /// First `ell/2` sites against the last `ell/2`.
    pub fn disjoint(l_sites: usize, ell: usize, jz: f64) -> Result<Self> {
        if ell < 2 || ell % 2 != 0 || ell > l_sites {
            return Err(Error::InvalidSelection(format!("disjoint subsystem of {ell} sites in a chain of {l_sites}")));
        }
        let h = ell / 2;
        let p = Self { l_sites, jz, a1: (0..h).collect(), a2: (l_sites - h..l_sites).collect() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_sites < 2 || self.l_sites > MAX_SITES {
            return Err(Error::OutOfRange(format!("l_sites must lie in [2, {MAX_SITES}], got {}", self.l_sites)));
        }
        if !self.jz.is_finite() {
            return Err(Error::OutOfRange("J_z must be finite".into()));
        }
        if self.a1.is_empty() || self.a2.is_empty() {
            return Err(Error::InvalidSelection("both halves of the subsystem need at least one site".into()));
        }
        let mut seen = vec![false; self.l_sites];
        for &s in self.a1.iter().chain(&self.a2) {
            if s >= self.l_sites || std::mem::replace(&mut seen[s], true) {
                return Err(Error::InvalidSelection(format!("site {s} is out of range or repeated")));
            }
        }
        Ok(())
    }
}

/// Diagonal energy of basis state `i`: `-J_z sum <Z Z>`.
fn diagonal_energy(i: usize, l: usize, jz: f64) -> f64 {
    (0..l - 1)
        .map(|s| {
            let same = ((i >> (l - 1 - s)) & 1) == ((i >> (l - 2 - s)) & 1);
            if same {
                -jz
            } else {
                jz
            }
        })
        .sum()
}

/// Flip-flop neighbours of basis state `i` (each with matrix element `-2`).
fn flip_neighbours(i: usize, l: usize) -> impl Iterator<Item = usize> {
    (0..l - 1).filter_map(move |s| {
        let m = (1usize << (l - 1 - s)) | (1usize << (l - 2 - s));
        let pair = i & m;
        (pair != 0 && pair != m).then_some(i ^ m)
    })
}

/// Hamiltonian restricted to the basis states in `basis` (assumed closed under `H`).
fn restricted_hamiltonian(l: usize, jz: f64, basis: &[usize]) -> DMatrix<f64> {
    let d = basis.len();
    let mut pos = vec![usize::MAX; 1 << l];
    for (k, &i) in basis.iter().enumerate() {
        pos[i] = k;
    }
    let mut h = DMatrix::zeros(d, d);
    for (k, &i) in basis.iter().enumerate() {
        h[(k, k)] = diagonal_energy(i, l, jz);
        for j in flip_neighbours(i, l) {
            h[(pos[j], k)] -= 2.0;
        }
    }
    h
}

/// Dense Hamiltonian on the full `2^L` space.
pub fn xxz_hamiltonian(l: usize, jz: f64) -> DMatrix<f64> {
    let basis: Vec<usize> = (0..1usize << l).collect();
    restricted_hamiltonian(l, jz, &basis)
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub state: PureState,
    pub energy: f64,
    /// Number of levels within the degeneracy tolerance of the lowest one.
    pub multiplicity: usize,
}

/// Lowest eigenvector in the zero-magnetization sector (`L/2` set bits, rounded down),
/// with the largest-magnitude amplitude made real and positive.
pub fn xxz_ground_state(params: &XXZParams) -> Result<GroundState> {
    params.validate()?;
    let l = params.l_sites;
    let basis: Vec<usize> = (0..1usize << l).filter(|i| i.count_ones() as usize == l / 2).collect();
    let h = restricted_hamiltonian(l, params.jz, &basis);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..basis.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let e0 = eig.eigenvalues[order[0]];
    let tol = DEGENERACY_TOL * e0.abs().max(1.0);
    let multiplicity = order.iter().take_while(|&&k| eig.eigenvalues[k] - e0 <= tol).count();
    let v = eig.eigenvectors.column(order[0]);
    let big = v.iter().enumerate().fold(0, |best, (k, x)| if x.abs() > v[best].abs() + 1e-12 { k } else { best });
    let sign = v[big].signum();
    let mut amp = CVector::zeros(1 << l);
    for (k, &i) in basis.iter().enumerate() {
        amp[i] = C64::new(sign * v[k], 0.0);
    }
    let bip = Bipartition::new(l / 2, l - l / 2)?;
    Ok(GroundState { state: PureState::normalized(bip, amp)?, energy: e0, multiplicity })
}

/// `<H^2> - <H>^2` for a state on the full space.
pub fn energy_variance(l: usize, jz: f64, state: &PureState) -> f64 {
    let h = xxz_hamiltonian(l, jz).map(|x| C64::new(x, 0.0));
    let hv = &h * state.amplitudes();
    let e = state.amplitudes().dotc(&hv).re;
    hv.norm_squared() - e * e
}

/// One condition evaluated at one `J_z`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub jz: f64,
    pub report: ConditionReport,
    /// Negativity of the full `rho_A^Γ`.
    pub negativity: f64,
}

impl SweepRow {
    /// Detection implies entanglement (negativity above round-off).
    pub fn sound(&self) -> bool {
        !self.report.detected() || self.negativity > NEGATIVITY_FLOOR
    }
}

/// Negativities below this are treated as zero.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

/// The non-spectral conditions of the sweep, in output order.
pub const SWEEP_CONDITIONS: [Condition; 4] = [Condition::P3Ppt, Condition::Dn(3), Condition::D3Opt, Condition::Stieltjes5];

fn condition_reports(p: &MomentVector) -> Result<Vec<ConditionReport>> {
    Ok(vec![check_p3ppt(p)?, check_dn(p, 3)?, check_d3opt_or_d2(p)?, check_stieltjes5(p)?])
}

/// Conditions on `rho_A^Γ` (split `A1|A2`) and on its sector `q` block, plus negativity.
pub fn analyze_reduced(rho_a: &DensityOperator, q: i32) -> Result<(Vec<ConditionReport>, f64)> {
    let pt = partial_transpose(rho_a);
    let spectrum = hermitian_spectrum(&pt)?;
    let neg = negativity_from_spectrum(&spectrum);
    let mut reports = condition_reports(&matrix_moments(&pt, 5))?;
    let block = pt_sector_block(rho_a, q)?;
    reports.extend(condition_reports(&block.moments(5))?.into_iter().map(|r| r.in_sector(q)));
    let sector_neg = negativity_from_spectrum(&block.spectrum());
    reports.push(ConditionReport::new(Condition::Negativity, neg, 0.0, neg));
    reports.push(ConditionReport::new(Condition::Negativity, sector_neg, 0.0, sector_neg).in_sector(q));
    Ok((reports, neg))
}

/// Ground state at every `J_z` of the grid; conditions on `rho_A^Γ` and its `q` sector.
pub fn xxz_condition_sweep(params: &XXZParams, jz_grid: &[f64], q: i32) -> Result<Vec<SweepRow>> {
    params.validate()?;
    let rows: Vec<Vec<SweepRow>> = jz_grid
        .par_iter()
        .map(|&jz| {
            let p = XXZParams { jz, ..params.clone() };
            let gs = xxz_ground_state(&p)?;
            let rho_a = gs.state.reduced_density(&p.a1, &p.a2)?;
            let (reports, negativity) = analyze_reduced(&rho_a, q)?;
            Ok(reports.into_iter().map(|report| SweepRow { jz, report, negativity }).collect())
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_site_triplet() {
        let p = XXZParams::connected(2, 2, 0.0).unwrap();
        let gs = xxz_ground_state(&p).unwrap();
        assert!((gs.energy + 2.0).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = gs.state.amplitudes();
        assert!((a[1].re - s).abs() < 1e-12 && (a[2].re - s).abs() < 1e-12);
        assert_eq!(gs.multiplicity, 1);
    }

    #[test]
    fn sector_energy_matches_full_space() {
        for l in [2, 4, 6, 8] {
            for jz in [-3.0, -1.0, -0.4, 0.0, 0.5] {
                let p = XXZParams::connected(l, 2, jz).unwrap();
                let gs = xxz_ground_state(&p).unwrap();
                let full = xxz_hamiltonian(l, jz).symmetric_eigen().eigenvalues.min();
                assert!((gs.energy - full).abs() < 1e-10, "L={l} jz={jz}");
            }
        }
    }

    #[test]
    fn eigenvector_quality() {
        let p = XXZParams::connected(8, 4, -1.3).unwrap();
        let gs = xxz_ground_state(&p).unwrap();
        let h = xxz_hamiltonian(8, -1.3);
        let norm = h.clone().symmetric_eigen().eigenvalues.amax();
        assert!(energy_variance(8, -1.3, &gs.state) <= 1e-16 * norm * norm * 1e2);
    }

    #[test]
    fn strong_antiferromagnet_approaches_neel() {
        let l = 6;
        let p = XXZParams::connected(l, 2, -20.0).unwrap();
        let gs = xxz_ground_state(&p).unwrap();
        let a = gs.state.amplitudes();
        let neel = 0b010101;
        let weight = a[neel].norm_sqr() + a[neel ^ 0b111111].norm_sqr();
        assert!(weight > 0.98, "{weight}");
    }

    #[test]
    fn sweep_is_sound() {
        let p = XXZParams::connected(8, 4, 0.0).unwrap();
        let rows = xxz_condition_sweep(&p, &[-3.0, -1.0, 0.0, 0.5], 1).unwrap();
        assert_eq!(rows.len(), 4 * 10);
        assert!(rows.iter().all(SweepRow::sound));
        assert!(rows.iter().any(|r| r.report.condition == Condition::P3Ppt && r.report.detected()));
    }
}
