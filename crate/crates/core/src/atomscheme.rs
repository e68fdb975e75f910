//! The same protocol with a Rydberg atom as the coupler, passing through the
//! cavities in sequence.

use serde::Serialize;

use crate::analysis::{decoherence_budget, fidelity, ghz_target, BudgetReport};
use crate::error::{arg_err, Result};
use crate::model::preset_rydberg_atom;
use crate::propagate::IntegratorConfig;
use crate::protocol::{run_protocol, ProtocolRun, SimulationMode};
use crate::statespace::SystemDims;

/// Largest atom-scheme size simulated with a full density matrix.
pub const ATOM_LINDBLAD_MAX_N: usize = 5;

/// Each cavity holds at most one photon in this scheme.
pub const ATOM_FOCK_CUTOFF: usize = 2;

#[derive(Clone, Debug)]
pub struct AtomRun {
    pub run: ProtocolRun,
    pub fidelity: f64,
    pub budget: BudgetReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct AtomSummary {
    pub n: usize,
    pub mode: SimulationMode,
    pub fidelity: f64,
    pub tau: f64,
    pub t_cav: f64,
    pub tau_over_t_cav: f64,
}

impl AtomRun {
    pub fn summary(&self) -> AtomSummary {
        AtomSummary {
            n: self.budget.n,
            mode: self.run.mode,
            fidelity: self.fidelity,
            tau: self.run.tau,
            t_cav: self.budget.t_cav,
            tau_over_t_cav: self.budget.tau_over_t_cav,
        }
    }
}

pub fn run_atom_ghz(n: usize, mode: SimulationMode, cfg: &IntegratorConfig) -> Result<AtomRun> {
    if !(2..=12).contains(&n) {
        return arg_err(format!("atom scheme supports 2..=12 cavities, got {n}"));
    }
    if mode == SimulationMode::Lindblad && n > ATOM_LINDBLAD_MAX_N {
        return arg_err(format!(
            "density-matrix atom runs are limited to n <= {ATOM_LINDBLAD_MAX_N}, got {n}"
        ));
    }
    let params = preset_rydberg_atom(n)?;
    let dims = SystemDims::new(n, ATOM_FOCK_CUTOFF)?;
    let run = run_protocol(n, &params, &dims, mode, cfg)?;
    let f = fidelity(&run.final_state, &ghz_target(&dims)?)?;
    let budget = decoherence_budget(&params, n)?;
    Ok(AtomRun {
        run,
        fidelity: f,
        budget,
    })
}
