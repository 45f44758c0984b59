//! Moment conditions on a Bell pair and a Werner family, exact reference included.
//!
//! `cargo run --example bell_conditions -- bell.qdm` also writes the Bell state
//! in QDM1 format for use with `ptmoments analyze`.

use ptmoments::conditions::check_stieltjes5;
use ptmoments::linalg::qdm::save_qdm;
use ptmoments::prelude::*;

fn bell() -> DensityOperator {
    let bip = Bipartition::new(1, 1).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let psi = PureState::new(bip, CVector::from_vec(vec![z, C64::new(s, 0.0), C64::new(s, 0.0), z])).unwrap();
    DensityOperator::from_pure(&psi)
}

fn main() -> ptmoments::Result<()> {
    let rho = bell();
    let pt = partial_transpose(&rho);
    let p = matrix_moments(&pt, 5);
    println!("PT moments of the Bell pair: {:?}", p.values());
    for report in [check_p3ppt(&p)?, check_dn(&p, 3)?, check_dn(&p, 4)?, check_stieltjes5(&p)?] {
        println!("  {:<10} margin {:+.6} {}", report.name(), report.margin, report.verdict);
    }
    println!("  negativity {:.6}", negativity(&pt));
    let sr = sr_evaluate(&rho, 0, Condition::Dn(2))?;
    println!("  {} in sector 0: margin {:+.6} {}", sr.name(), sr.margin, sr.verdict);

    // Werner states w |Bell><Bell| + (1 - w) I/4 are entangled for w > 1/3.
    let mixed = DensityOperator::maximally_mixed(rho.bipartition());
    println!("\n   w    p3PPT   D3     negativity");
    for w in [0.2, 0.3, 0.34, 0.4, 0.6, 1.0] {
        let state = DensityOperator::mix(&[(w, &rho), (1.0 - w, &mixed)])?;
        let pt = partial_transpose(&state);
        let p = matrix_moments(&pt, 3);
        println!(
            "  {w:.2}  {:<6} {:<6} {:.4}",
            check_p3ppt(&p)?.detected(),
            check_dn(&p, 3)?.detected(),
            negativity(&pt)
        );
    }

    if let Some(path) = std::env::args().nth(1) {
        save_qdm(&path, &rho)?;
        println!("\nwrote {path}");
    }
    Ok(())
}
