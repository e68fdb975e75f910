//! Idle-cavity excitation during a resonant swap and the capacitive estimate
//! of direct cavity coupling.

use cavity_ghz::model::{angular, estimate_g_cross};
use cavity_ghz::{crosstalk_probability, preset_phase_qutrit};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>5} {:>12} {:>12} {:>14}", "b", "g/2pi [MHz]", "gt/2pi [MHz]", "p_idle");
    for b in [10.0, 20.0, 40.0, 50.0, 60.0, 85.0, 100.0] {
        let p = preset_phase_qutrit(4, b, 0.0)?;
        let d = p.detunings();
        let prob = crosstalk_probability(p.g_tilde[1], d.Delta_j[1], p.g[0])?;
        println!(
            "{b:5.0} {:12.3} {:12.3} {prob:14.4e}",
            p.g[0] / angular(1e6),
            p.g_tilde[1] / angular(1e6)
        );
    }

    let g = angular(8.3e6);
    for n in 2..=4 {
        let g_kl = estimate_g_cross(g, 1e-15, 100e-15 - n as f64 * 1e-15, n)?;
        println!("n = {n}: g_kl / g = {:.4}", g_kl / g);
    }
    Ok(())
}
