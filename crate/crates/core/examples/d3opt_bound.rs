//! The optimal third-moment bound against p3-PPT and D3, on normalized moments.

use ptmoments::conditions::d3opt_threshold;

fn main() -> ptmoments::Result<()> {
    println!("  p2      D3opt     D3 (3p2-1)/2   p3PPT p2^2");
    for k in 1..=20 {
        let p2 = k as f64 / 20.0;
        let opt = d3opt_threshold(p2)?;
        let d3 = (3.0 * p2 - 1.0) / 2.0;
        println!("  {p2:.2}   {opt:.6}  {d3:+.6}      {:.6}", p2 * p2);
    }
    Ok(())
}
