//! Operation time against every lifetime in the model.

use cavity_ghz::{decoherence_budget, preset_phase_qutrit, preset_rydberg_atom};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("phase qutrit, n = 4, b = 85");
    print!("{}", decoherence_budget(&preset_phase_qutrit(4, 85.0, 0.01)?, 4)?);
    println!();
    let atom = decoherence_budget(&preset_rydberg_atom(10)?, 10)?;
    println!("Rydberg atom, n = 10");
    println!("tau = {:.3e} s  T_cav = {:.3e} s  tau/T_cav = {:.4}", atom.tau, atom.t_cav, atom.tau_over_t_cav);
    for (name, v) in &atom.rate_products {
        if *v > 0.0 {
            println!("tau * {name} = {v:.3e}");
        }
    }
    Ok(())
}
