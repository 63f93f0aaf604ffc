//! Success probability table: engine enumeration against 1 − 2a/(2b+1).

use qudit_teleport::analysis::{success_report, write_csv, ReportRow};
use qudit_teleport::teleport::{ProtocolConfig, Teleporter};
use qudit_teleport::{analysis, Spectrum};

fn main() -> qudit_teleport::Result<()> {
    let mut rows = Vec::new();
    for a2x in 0..=4 {
        for b2x in a2x..=9 {
            let cfg = ProtocolConfig::flat(Spectrum::from_doubled(a2x)?, Spectrum::from_doubled(b2x)?)?;
            let teleporter = Teleporter::new(cfg);
            let success = success_report(&teleporter);
            let fidelity = analysis::fidelity_report(&teleporter);
            rows.push(ReportRow::new(&success, &fidelity));
        }
    }
    write_csv(&rows, std::io::stdout())?;

    eprintln!("qubit with an (n+1)-level ancilla:");
    for n in [1u64, 2, 4, 8, 16] {
        eprintln!("  n = {n:>2}  P = {:.6}", analysis::success_probability_dim(2, n + 1)?);
    }
    Ok(())
}
