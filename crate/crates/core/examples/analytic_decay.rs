//! Cavity decay and coupler dephasing against their closed forms.

use cavity_ghz::statespace::basis_state;
use cavity_ghz::{evolve_lindblad, DecoherenceRates, HamiltonianKind, HamiltonianSpec, IntegratorConfig, QuantumState, SystemDims};
use ndarray::Array2;
use num_complex::Complex64 as C64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorConfig::default();
    let idle = HamiltonianSpec::new(HamiltonianKind::IdleAll, false, false);
    let t = 2e-6;

    let mut params = cavity_ghz::preset_phase_qutrit(1, 50.0, 0.0)?;
    params.rates = DecoherenceRates::zero(1);
    params.rates.kappa = vec![1.0 / 20e-6];
    let dims = SystemDims::new(1, 2)?;
    let one_photon = basis_state(&dims, 0, &[1])?.to_density();
    let out = evolve_lindblad(&one_photon, &idle, &params, 0.0, t, &cfg)?;
    let n_photon = out.final_state.mean_photons(1)?;
    println!("<n>(t)   = {n_photon:.10}  exp(-kappa t) = {:.10}", (-params.rates.kappa[0] * t).exp());

    params.rates = DecoherenceRates::zero(1);
    params.rates.gamma_phi_21 = 1.0 / 5e-6;
    let mut rho = Array2::<C64>::zeros((dims.dim(), dims.dim()));
    let (a, b) = (dims.index_of(1, &[0])?, dims.index_of(2, &[0])?);
    for (i, j) in [(a, a), (a, b), (b, a), (b, b)] {
        rho[[i, j]] = C64::new(0.5, 0.0);
    }
    let plus = QuantumState::density(dims, rho)?;
    let out = evolve_lindblad(&plus, &idle, &params, 0.0, t, &cfg)?;
    let coherence = out.final_state.as_density().expect("density")[[a, b]].re;
    println!(
        "rho_12(t) = {coherence:.10}  exp(-2 gamma t) / 2 = {:.10}",
        0.5 * (-2.0 * params.rates.gamma_phi_21 * t).exp()
    );
    Ok(())
}
