//! Teleport a qubit through a two-level ancilla and tally outcomes.
//!
//! cargo run --example qubit_teleport -- [trials] [seed]

use num_complex::Complex64;
use qudit_teleport::teleport::{ProtocolConfig, Teleporter};

fn main() -> qudit_teleport::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials: u64 = args.next().map_or(10_000, |s| s.parse().expect("trials"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    // α_{-1/2} = 0.6, α_{+1/2} = 0.8i
    let cfg = ProtocolConfig::from_doubled(1, 1, &[Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)])?;
    let teleporter = Teleporter::new(cfg);

    println!("outcome table (Q, P, probability):");
    for o in teleporter.outcomes() {
        println!("  Q = {:>4}  P = {:>4}  {:.6}", o.q_sum, o.p_diff, o.probability);
    }

    let records: Vec<_> = (0..trials).map(|t| teleporter.run_trial(seed, t)).collect();
    let successes = records.iter().filter(|r| r.success).count();
    let mean_f: f64 = records.iter().map(|r| r.fidelity_sq).sum::<f64>() / trials as f64;
    println!("exact success probability {}", teleporter.success_probability());
    println!("sampled {successes}/{trials} successes, mean F² = {mean_f:.6}");

    let first = &records[0];
    println!(
        "trial 0 trace: {}",
        serde_json::to_string(&first.trace_line(0)).expect("serializable")
    );
    Ok(())
}
