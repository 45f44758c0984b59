//! XXZ ground states: conditions on a disjoint two-interval subsystem across J_z.

use ptmoments::conditions::Condition;
use ptmoments::models::xxz::{xxz_condition_sweep, XXZParams};

fn main() -> ptmoments::Result<()> {
    let grid: Vec<f64> = (0..=18).map(|k| -4.0 + 0.25 * k as f64).collect();
    let params = XXZParams::disjoint(10, 6, 0.0)?;
    let rows = xxz_condition_sweep(&params, &grid, 1)?;
    println!("  J_z    p3PPT  D3    D3opt Stieltjes5  negativity");
    for &jz in &grid {
        let at = |c: Condition| {
            rows.iter().find(|r| r.jz == jz && r.report.sector.is_none() && r.report.condition == c).unwrap()
        };
        let mark = |c| if at(c).report.detected() { "yes" } else { " - " };
        println!(
            "  {jz:+.2}  {}    {}   {}   {}         {:.4}",
            mark(Condition::P3Ppt),
            mark(Condition::Dn(3)),
            mark(Condition::D3Opt),
            mark(Condition::Stieltjes5),
            at(Condition::P3Ppt).negativity
        );
    }
    Ok(())
}
