//! Refine the lattice spacing and watch the success probability approach 1 − A/B.
//!
//! cargo run --example continuous_limit -- [A] [B]

use qudit_teleport::analysis::continuous_limit_sweep;

fn main() -> qudit_teleport::Result<()> {
    let mut args = std::env::args().skip(1);
    let extent_a: f64 = args.next().map_or(1.0, |s| s.parse().expect("A"));
    let extent_b: f64 = args.next().map_or(2.0, |s| s.parse().expect("B"));
    let steps: Vec<f64> = (0..8).map(|k| 0.5f64.powi(k)).collect();

    for p in continuous_limit_sweep(extent_a, extent_b, &steps)? {
        println!(
            "ε = {:<10} a2x = {:>5} b2x = {:>5}  P = {:.10}  gap = {:.3e} (bound {:.3e})",
            p.step, p.a2x, p.b2x, p.p_disc, p.gap, p.bound
        );
    }
    Ok(())
}
