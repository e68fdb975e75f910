//! The segment sequence and its timing.

use cavity_ghz::{build_schedule, preset_phase_qutrit, total_time};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = 4;
    let params = preset_phase_qutrit(n, 85.0, 0.01)?;
    let schedule = build_schedule(n, &params)?;
    let mut t = 0.0;
    for seg in &schedule.segments {
        t += seg.duration;
        println!("{:<26} {:>10.3} ns  ends {:>8.3} ns", seg.label, seg.duration * 1e9, t * 1e9);
    }
    assert_eq!(schedule.total_duration(), total_time(&params, n)?);
    println!("tau = {:.3} ns", schedule.total_duration() * 1e9);
    Ok(())
}
