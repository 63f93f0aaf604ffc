//! Write an input state to JSON, read it back, and teleport it.

use qudit_teleport::qstate::random_state;
use qudit_teleport::teleport::{input_rng, ProtocolConfig, Teleporter};
use qudit_teleport::{PureState, Spectrum};

fn main() -> qudit_teleport::Result<()> {
    let a = Spectrum::from_doubled(2)?;
    let psi = random_state(a, &mut input_rng(11));
    let path = std::env::temp_dir().join("qudit_teleport_input.json");
    psi.save(&path)?;
    println!("wrote {}:\n{}", path.display(), std::fs::read_to_string(&path)?);

    let loaded = PureState::load(&path)?;
    assert_eq!(loaded, psi);

    let teleporter = Teleporter::new(ProtocolConfig::new(a, Spectrum::from_doubled(6)?, loaded)?);
    let record = teleporter.run_trial(11, 0);
    println!(
        "trace: {}",
        serde_json::to_string(&record.trace_line(0)).expect("serializable")
    );
    println!("Bob's corrected state: {}", record.corrected.to_json()?);
    Ok(())
}
