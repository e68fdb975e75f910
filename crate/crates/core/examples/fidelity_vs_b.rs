//! Fidelity against b = Delta / g' for several cavity counts and direct
//! coupling strengths, written as CSV.
//!
//! `cargo run --release --example fidelity_vs_b -- out.csv`

use std::fs::File;

use cavity_ghz::{sweep_b, SimulationMode, SweepConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "fidelity_vs_b.csv".into());
    let mut cfg = SweepConfig::new(vec![2, 3], (1..=10).map(|k| 10.0 * k as f64).collect(), 0.01, SimulationMode::Lindblad);
    cfg.g_cross_ratios = vec![0.001, 0.01, 0.1];

    let result = sweep_b(&cfg)?;
    result.write_csv(File::create(&path)?)?;
    for row in &result.rows {
        println!("n = {}  b = {:5.1}  g_kl/g = {:<5}  F = {:.5}", row.n, row.b, row.g_cross_ratio, row.fidelity);
    }
    println!("wrote {} rows to {path}", result.rows.len());
    Ok(())
}
