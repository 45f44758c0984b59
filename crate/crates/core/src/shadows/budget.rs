//! Measurement budgets and confidence radii for the `D_2` sector estimator.
//!
//! With `K = 2^(n+m) tr(P) / (eps^2 delta)` the budget is
//! `N = K/2 (C1 + sqrt(C1^2 + C2 eps^2 delta 2^(n+m) / tr(P))) + 1`, and the
//! radius for a given `N` is
//! `eps = sqrt(2^(n+m) tr(P) / (delta (N-1)) (C1 + C2 4^(n+m) / (N-1)))`.

use crate::error::{Error, Result};
use crate::linalg::Bipartition;
use crate::symmetry::SectorProjector;

#[derive(Clone, Debug, PartialEq)]
pub struct BudgetParams {
    pub epsilon: f64,
    pub delta: f64,
    pub sector: SectorProjector,
    pub c1: f64,
    pub c2: f64,
}

impl BudgetParams {
    /// The simplified constants `C1 = 4`, `C2 = 2`.
    pub fn theorem1(epsilon: f64, delta: f64, sector: SectorProjector) -> Self {
        Self { epsilon, delta, sector, c1: 4.0, c2: 2.0 }
    }

    /// Tightest state-independent constants: `C1 = 4 (1 - 1/tr P)` and the exact `C2` bound.
    pub fn worst_case(epsilon: f64, delta: f64, sector: SectorProjector) -> Self {
        let t = sector.rank() as f64;
        let c2 = c2_bound(sector.rank(), sector.bipartition().n_qubits());
        Self { epsilon, delta, sector, c1: 4.0 * (1.0 - 1.0 / t), c2 }
    }
}

/// `C2 = 1 + (3 tr P - 4 + 8 / (tr P 4^(n+m))) / 2^(n+m)`.
pub fn c2_bound(trace_p: usize, n_qubits: usize) -> f64 {
    let t = trace_p as f64;
    let d = (1u64 << n_qubits) as f64;
    1.0 + (3.0 * t - 4.0 + 8.0 / (t * d * d)) / d
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::OutOfRange(format!("{name} must lie in (0, 1), got {x}")));
    }
    Ok(())
}

fn check_sector(sector: &SectorProjector, bip: Bipartition) -> Result<f64> {
    if sector.bipartition() != bip {
        return Err(Error::DimensionMismatch { expected: bip.dim(), got: sector.bipartition().dim() });
    }
    if sector.rank() < 2 {
        return Err(Error::OutOfRange(format!(
            "sector {} has tr(P) = {}; the bound needs a non-trivial sector (tr P >= 2)",
            sector.charge(),
            sector.rank()
        )));
    }
    Ok(sector.rank() as f64)
}

/// Number of snapshots guaranteeing `|D2_hat - D2| <= eps` with probability `1 - delta`.
///
/// The constants must dominate the worst-case ones, `c1 >= 4 (1 - 1/tr P)` and
/// `c2 >= C2(tr P, n+m)`. For `n + m >= 4` the latter is at most 2.
pub fn measurement_budget(params: &BudgetParams, bip: Bipartition) -> Result<u64> {
    check_unit("epsilon", params.epsilon)?;
    check_unit("delta", params.delta)?;
    let t = check_sector(&params.sector, bip)?;
    let nq = bip.n_qubits();
    if params.c1 < 4.0 * (1.0 - 1.0 / t) - 1e-12 {
        return Err(Error::OutOfRange(format!("c1 = {} is below the worst case {}", params.c1, 4.0 * (1.0 - 1.0 / t))));
    }
    let c2_needed = c2_bound(params.sector.rank(), nq);
    if params.c2 < c2_needed - 1e-12 {
        return Err(Error::OutOfRange(format!("c2 = {} is below the worst case {c2_needed}", params.c2)));
    }
    let d = (1u64 << nq) as f64;
    let ed = params.epsilon * params.epsilon * params.delta;
    let k = d * t / ed;
    let n = k / 2.0 * (params.c1 + (params.c1 * params.c1 + params.c2 * ed * d / t).sqrt()) + 1.0;
    Ok(n.ceil() as u64)
}

/// Half-width of the `1 - delta` confidence interval for `N` snapshots,
/// with `C1 = 4 (1 - 1/tr P)` and `C2 = 2`.
pub fn confidence_radius(n: u64, delta: f64, sector: &SectorProjector, bip: Bipartition) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewSnapshots { needed: 2, got: n as usize });
    }
    check_unit("delta", delta)?;
    let t = check_sector(sector, bip)?;
    let d = (1u64 << bip.n_qubits()) as f64;
    let m = (n - 1) as f64;
    let c1 = 4.0 * (1.0 - 1.0 / t);
    let c2 = 2.0;
    Ok((d * t / (delta * m) * (c1 + c2 * d * d / m)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::{build_projector, SectorKind};

    fn sector(na: usize, nb: usize, q: i32) -> (SectorProjector, Bipartition) {
        let bip = Bipartition::new(na, nb).unwrap();
        (build_projector(SectorKind::P, q, bip).unwrap(), bip)
    }

    #[test]
    fn theorem_example() {
        let (p, bip) = sector(2, 2, 1);
        assert_eq!(p.rank(), 4);
        let n = measurement_budget(&BudgetParams::theorem1(0.1, 0.05, p), bip).unwrap();
        // K = 16 * 4 / (0.01 * 0.05) = 128000; N = 64000 (4 + sqrt(16.004)) + 1.
        let want = (64000.0 * (4.0 + 16.004f64.sqrt()) + 1.0f64).ceil() as u64;
        assert_eq!(n, want);
        assert_eq!(n, 512_033);
    }

    #[test]
    fn halving_epsilon_quadruples_leading_term() {
        let (p, bip) = sector(2, 2, 0);
        let a = measurement_budget(&BudgetParams::theorem1(0.2, 0.05, p.clone()), bip).unwrap() as f64;
        let b = measurement_budget(&BudgetParams::theorem1(0.1, 0.05, p), bip).unwrap() as f64;
        assert!((b / a - 4.0).abs() < 1e-3);
    }

    #[test]
    fn radius_round_trip_and_scaling() {
        let (p, bip) = sector(2, 2, 0);
        for eps in [0.05, 0.1, 0.2] {
            for delta in [0.01, 0.05, 0.1] {
                let n = measurement_budget(&BudgetParams::theorem1(eps, delta, p.clone()), bip).unwrap();
                assert!(confidence_radius(n, delta, &p, bip).unwrap() <= eps * (1.0 + 1e-6));
            }
        }
        let big = 1u64 << 40;
        let r1 = confidence_radius(big, 0.05, &p, bip).unwrap();
        let r2 = confidence_radius(big, 0.1, &p, bip).unwrap();
        assert!((r2 / r1 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        let r4 = confidence_radius(4 * big, 0.05, &p, bip).unwrap();
        assert!((r1 / r4 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (p, bip) = sector(2, 2, 2);
        assert_eq!(p.rank(), 1);
        assert!(measurement_budget(&BudgetParams::theorem1(0.1, 0.05, p), bip).is_err());
        let (p, bip) = sector(2, 2, 0);
        assert!(measurement_budget(&BudgetParams::theorem1(1.5, 0.05, p.clone()), bip).is_err());
        assert!(measurement_budget(&BudgetParams::theorem1(0.1, 0.0, p.clone()), bip).is_err());
        let mut weak = BudgetParams::theorem1(0.1, 0.05, p);
        weak.c1 = 1.0;
        assert!(measurement_budget(&weak, bip).is_err());
    }

    #[test]
    fn small_registers_allowed_when_constants_dominate() {
        let (p, bip) = sector(1, 1, 0);
        assert!(c2_bound(2, 2) <= 2.0);
        let n = measurement_budget(&BudgetParams::theorem1(0.1, 0.05, p), bip).unwrap();
        assert_eq!(n, (8000.0 * (4.0 + 16.002f64.sqrt()) + 1.0f64).ceil() as u64);
    }
}
