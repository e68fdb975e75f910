//! Ten cavities loaded by a single Rydberg atom.

use cavity_ghz::{run_atom_ghz, IntegratorConfig, SimulationMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorConfig::default();
    let ideal = run_atom_ghz(10, SimulationMode::IdealResonant, &cfg)?;
    println!("{}", serde_json::to_string(&ideal.summary())?);

    let lossy = run_atom_ghz(3, SimulationMode::Lindblad, &cfg)?;
    println!("{}", serde_json::to_string(&lossy.summary())?);
    Ok(())
}
