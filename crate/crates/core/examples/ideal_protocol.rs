//! Run the protocol with only the intended interactions and compare every
//! step with the analytic state.

use cavity_ghz::{fidelity, ghz_target, preset_phase_qutrit, run_protocol, IntegratorConfig, SimulationMode, SystemDims};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorConfig::default();
    for n in 2..=6 {
        let params = preset_phase_qutrit(n, 50.0, 0.01)?;
        let dims = SystemDims::new(n, 2)?;
        let run = run_protocol(n, &params, &dims, SimulationMode::IdealResonant, &cfg)?;
        let steps: Vec<String> = run
            .records
            .iter()
            .filter_map(|r| r.fidelity)
            .map(|f| format!("{:.2e}", 1.0 - f))
            .collect();
        let f = fidelity(&run.final_state, &ghz_target(&dims)?)?;
        println!("n = {n}  dim = {:5}  1 - F = {:.2e}  per step: {}", dims.dim(), 1.0 - f, steps.join(" "));
    }
    Ok(())
}
