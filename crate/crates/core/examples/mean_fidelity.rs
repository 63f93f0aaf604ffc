//! Mean squared fidelity of qubit teleportation when failures are kept.

use qudit_teleport::analysis::{mean_squared_fidelity, qubit_mean_fidelity_formula};
use qudit_teleport::Spectrum;

fn main() -> qudit_teleport::Result<()> {
    let a = Spectrum::from_doubled(1)?;
    println!(
        "{:>5} {:>16} {:>16} {:>16}",
        "b", "F (engine)", "F (closed form)", "F renormalized"
    );
    for b2x in (1..=19).step_by(2) {
        let b = Spectrum::from_doubled(b2x)?;
        let report = mean_squared_fidelity(a, b)?;
        println!(
            "{:>5} {:>16.12} {:>16.12} {:>16.12}",
            b.half_width(),
            report.mean_f,
            qubit_mean_fidelity_formula(b),
            report.mean_f_normalized
        );
    }

    let report = mean_squared_fidelity(a, Spectrum::from_doubled(1)?)?;
    println!("\nper-Q breakdown at b = 1/2:");
    println!("{}", serde_json::to_string_pretty(&report.per_q).expect("serializable"));
    Ok(())
}
