//! Charge sectors of a partial transpose: block structure, sector moments from
//! multi-copy observables, and the dephasing channel in two forms.

use ptmoments::prelude::*;
use ptmoments::symmetry::{lemma2_oracle, pt_sector_block, symmetrize_by_phase_average};
use rand::{Rng, SeedableRng};

fn random_symmetric_state(n_a: usize, n_b: usize, seed: u64) -> DensityOperator {
    let bip = Bipartition::new(n_a, n_b).unwrap();
    let d = bip.dim();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let m = &g * g.adjoint();
    let tr = m.trace();
    symmetrize(&DensityOperator::new(bip, m / tr).unwrap())
}

fn main() -> ptmoments::Result<()> {
    let rho = random_symmetric_state(2, 2, 3);
    println!("block diagonal in total charge: {}", is_block_diagonal(&rho, SectorKind::Q).is_block_diagonal);
    for q in -2..=2 {
        let block = pt_sector_block(&rho, q)?;
        let direct = block.moments(3);
        let (lhs, rhs) = lemma2_oracle(&rho, q, 2)?;
        println!(
            "  q={q:+}  dim {}  p1 {:.6}  p2 {:.6} (two-copy observable {:.6}, {:.6})  SR-D2 {}",
            block.dim(),
            direct.p(1),
            direct.p(2),
            lhs,
            rhs,
            sr_evaluate(&rho, q, Condition::Dn(2))?.verdict
        );
    }
    let raw = {
        let bip = rho.bipartition();
        let d = bip.dim();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let g = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let m = &g * g.adjoint();
        let tr = m.trace();
        DensityOperator::new(bip, m / tr)?
    };
    let diff = (symmetrize(&raw).matrix() - symmetrize_by_phase_average(&raw).matrix()).norm();
    println!("charge projection vs phase average: |difference| = {diff:.2e}");
    Ok(())
}
