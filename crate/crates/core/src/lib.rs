//! Simulation of n-photon GHZ-state generation in n cavities that share one
//! three-level coupler.
//!
//! The coupler is loaded into `(|0> + |2>) / sqrt 2` and swaps one photon into
//! each cavity in turn. Runs can include only the intended interactions, every
//! coherent coupling, or the full master equation with loss and dephasing.
//!
//! ```
//! use cavity_ghz::{fidelity, ghz_target, preset_phase_qutrit, run_protocol};
//! use cavity_ghz::{IntegratorConfig, SimulationMode, SystemDims};
//!
//! let params = preset_phase_qutrit(3, 60.0, 0.01).unwrap();
//! let dims = SystemDims::new(3, 2).unwrap();
//! let run = run_protocol(3, &params, &dims, SimulationMode::IdealResonant, &IntegratorConfig::default()).unwrap();
//! let f = fidelity(&run.final_state, &ghz_target(&dims).unwrap()).unwrap();
//! assert!(f > 1.0 - 1e-6);
//! ```

pub mod analysis;
pub mod atomscheme;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod propagate;
pub mod protocol;
pub mod sparse;
pub mod statespace;

pub use analysis::{decoherence_budget, fidelity, ghz_target, sweep_b, BudgetReport, SweepConfig, SweepResult, SweepRow};
pub use atomscheme::{run_atom_ghz, AtomRun};
pub use error::{Error, Result};
pub use hamiltonian::{build_h, CompiledHamiltonian, HamiltonianKind, HamiltonianSpec};
pub use model::{
    cavity_lifetime, crosstalk_probability, estimate_g_cross, preset_phase_qutrit, preset_rydberg_atom, q_from_kappa,
    total_time, DecoherenceRates, PhysicalParams,
};
pub use propagate::{evolve_lindblad, evolve_pure, IntegratorConfig, SegmentResult};
pub use protocol::{build_schedule, ideal_state_after_step, run_protocol, ProtocolRun, Schedule, Segment, SimulationMode};
pub use statespace::{basis_state, QuantumState, SystemDims};
