//! Pauli classical shadows of a Bell pair: sector D2 with its rigorous radius
//! and jackknife bars, and a QSH1 archive round trip.

use ptmoments::prelude::*;
use ptmoments::shadows::archive::{read_qsh, write_qsh};
use ptmoments::shadows::estimators::{jackknife_from_values, sector_blocks, PowerSums};
use ptmoments::shadows::{confidence_radius, simulate, Ensemble, ShadowEstimator, SourceSequence};

fn main() -> ptmoments::Result<()> {
    let bip = Bipartition::new(1, 1)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let rho = DensityOperator::from_pure(&PureState::new(bip, CVector::from_vec(vec![z, C64::new(s, 0.0), C64::new(s, 0.0), z]))?);
    let n = 100_000;
    let shadow = simulate(&SourceSequence::Constant(rho.clone()), n, Ensemble::Pauli, 2024)?;
    let proj = build_projector(SectorKind::P, 0, bip)?;
    let blocks = sector_blocks(&shadow, &proj)?;
    let ps = PowerSums::from_blocks(&blocks)?;
    let jk = 1.96 * jackknife_from_values(&ShadowEstimator::D2.leave_one_out(&blocks)?);
    let radius = confidence_radius(n as u64, 0.05, &proj, bip)?;
    println!("sector 0, {n} snapshots: D2 = {:+.4} (exact -0.5)", ps.d2()?);
    println!("  jackknife 1.96 sigma: {jk:.4}");
    println!("  rigorous 95% radius:  {radius:.4}");

    let mut buf = Vec::new();
    write_qsh(&shadow, &mut buf)?;
    let back = read_qsh(&buf[..], shadow.seed)?;
    println!("archive: {} bytes, round trip identical: {}", buf.len(), back == shadow);
    Ok(())
}
