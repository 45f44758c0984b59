//! Dissipative XY quench from the Néel state: sector q=-1 ratios at early
//! times against the leading-order predictions.

use ptmoments::models::quench::{lindblad_evolve, perturbative_ratios, quench_ratios, QuenchParams};

fn main() -> ptmoments::Result<()> {
    let times = vec![0.0, 1e-3, 1e-2, 0.05, 0.2, 0.5];
    for gamma in [0.05, 0.1, 0.2] {
        let p = QuenchParams::new(8, 1.0, gamma, times.clone())?;
        let ratios = quench_ratios(&lindblad_evolve(&p)?, -1)?;
        let (d2, p3) = perturbative_ratios(gamma, 1.0, 4);
        println!("gamma/J = {gamma}: predicted D2 ratio {d2:.4}, p3-PPT ratio {p3:.4}");
        for (t, r) in times.iter().zip(&ratios) {
            match r {
                Some((a, b)) => println!("  Jt = {t:<6} D2 ratio {a:.4}  p3-PPT ratio {b:.4}"),
                None => println!("  Jt = {t:<6} undefined (empty block)"),
            }
        }
    }
    Ok(())
}
