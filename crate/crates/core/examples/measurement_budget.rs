//! Snapshot budgets for the sector D2 estimator and the radius they buy.

use ptmoments::prelude::*;
use ptmoments::shadows::{confidence_radius, measurement_budget, BudgetParams};

fn main() -> ptmoments::Result<()> {
    let bip = Bipartition::new(2, 2)?;
    let proj = build_projector(SectorKind::P, 1, bip)?;
    println!("2+2 qubits, sector q=1 (tr P = {})", proj.rank());
    println!("  eps    delta   N            radius(N)");
    for eps in [0.05, 0.1, 0.2] {
        for delta in [0.01, 0.05, 0.1] {
            let n = measurement_budget(&BudgetParams::theorem1(eps, delta, proj.clone()), bip)?;
            let r = confidence_radius(n, delta, &proj, bip)?;
            println!("  {eps:.2}   {delta:.2}    {n:<12} {r:.5}");
        }
    }
    Ok(())
}
