//! Full master-equation run of the phase-qutrit preset.
//!
//! `cargo run --release --example lindblad_fidelity -- 3 60`

use cavity_ghz::{fidelity, ghz_target, preset_phase_qutrit, run_protocol, IntegratorConfig, SimulationMode, SystemDims};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(Ok(2), |s| s.parse())?;
    let b: f64 = args.next().map_or(Ok(50.0), |s| s.parse())?;

    let params = preset_phase_qutrit(n, b, 0.01)?;
    let dims = SystemDims::new(n, 3)?;
    let run = run_protocol(n, &params, &dims, SimulationMode::Lindblad, &IntegratorConfig::default())?;

    for r in &run.records {
        let f = r.fidelity.map_or(String::new(), |f| format!("F_step = {f:.6}"));
        println!("{:<26} t = {:.4e}  steps = {:5}  {f}", r.label, r.t_end, r.steps_taken);
    }
    println!("trace drift       {:.2e}", run.max_trace_drift());
    println!("hermiticity       {:.2e}", run.max_hermiticity_defect());
    println!("min eigenvalue    {:.2e}", run.min_eigenvalue().unwrap_or(f64::NAN));
    println!("F(n = {n}, b = {b}) = {:.6}", fidelity(&run.final_state, &ghz_target(&dims)?)?);
    Ok(())
}
