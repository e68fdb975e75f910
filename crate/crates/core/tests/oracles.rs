mod common;

use cavity_ghz::protocol::run_protocol;
use cavity_ghz::{
    crosstalk_probability, fidelity, ghz_target, preset_phase_qutrit, preset_rydberg_atom, run_atom_ghz, DecoherenceRates,
    IntegratorConfig, QuantumState, SimulationMode, SystemDims,
};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn state_distance(a: &QuantumState, b: &QuantumState) -> f64 {
    let (x, y) = (a.as_pure().unwrap(), b.as_pure().unwrap());
    x.iter().zip(y.iter()).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn closed_form_crosstalk_matches_two_level_evolution(
        gt in 1e6f64..5e7,
        ratio in 0.0f64..30.0,
        gi in 5e6f64..5e7,
    ) {
        let delta = ratio * gt;
        let t = std::f64::consts::PI / (2.0 * gi);
        let numeric = common::two_level_transfer(gt, delta, t);
        let closed = crosstalk_probability(gt, delta, gi).unwrap();
        prop_assert!((numeric - closed).abs() < 1e-6, "{} vs {}", numeric, closed);
    }
}

#[test]
fn lossless_run_without_spurious_couplings_is_ideal() {
    let mut params = preset_phase_qutrit(2, 50.0, 0.0).unwrap();
    params.rates = DecoherenceRates::zero(2);
    params.g_prime = vec![0.0; 2];
    params.g_tilde = vec![0.0; 2];
    params.g_tilde_prime = vec![0.0; 2];
    params.Omega_10 = 0.0;
    let dims = SystemDims::new(2, 3).unwrap();
    let target = ghz_target(&dims).unwrap();
    let cfg = IntegratorConfig::default();
    let lindblad = run_protocol(2, &params, &dims, SimulationMode::Lindblad, &cfg).unwrap();
    let ideal = run_protocol(2, &params, &dims, SimulationMode::IdealResonant, &cfg).unwrap();
    let fl = fidelity(&lindblad.final_state, &target).unwrap();
    let fi = fidelity(&ideal.final_state, &target).unwrap();
    assert!(fl > 1.0 - 1e-5, "{fl}");
    assert!((fl - fi).abs() < 1e-5);
}

#[test]
fn coherent_errors_converge_at_fourth_order() {
    let params = preset_phase_qutrit(2, 30.0, 0.01).unwrap();
    let dims = SystemDims::new(2, 3).unwrap();
    let coarse = IntegratorConfig {
        dt_factor: 10.0,
        min_steps: 1,
        ..IntegratorConfig::default()
    };
    let run = |cfg: &IntegratorConfig| {
        run_protocol(2, &params, &dims, SimulationMode::PureCoherentErrors, cfg)
            .unwrap()
            .final_state
    };
    let reference = run(&coarse.refined(16));
    let e1 = state_distance(&run(&coarse), &reference);
    let e2 = state_distance(&run(&coarse.refined(2)), &reference);
    assert!(e1 > 1e-10, "coarse error too small to measure: {e1}");
    assert!(e1 / e2 > 12.0, "error ratio {} ({e1} / {e2})", e1 / e2);
}

#[test]
fn ideal_algebra_is_parameter_independent() {
    let cfg = IntegratorConfig::default();
    let dims = SystemDims::new(2, 2).unwrap();
    let qutrit = run_protocol(2, &preset_phase_qutrit(2, 50.0, 0.01).unwrap(), &dims, SimulationMode::IdealResonant, &cfg)
        .unwrap();
    let atom = run_atom_ghz(2, SimulationMode::IdealResonant, &cfg).unwrap();
    assert!(state_distance(&qutrit.final_state, &atom.run.final_state) < 1e-6);
}

#[test]
fn atom_without_spurious_terms_matches_ideal() {
    let cfg = IntegratorConfig::default();
    let params = preset_rydberg_atom(4).unwrap();
    assert_eq!(params.Omega_10, 0.0);
    assert!(params.g_prime.iter().chain(&params.g_tilde).all(|&g| g == 0.0));
    let coherent = run_atom_ghz(4, SimulationMode::PureCoherentErrors, &cfg).unwrap();
    let ideal = run_atom_ghz(4, SimulationMode::IdealResonant, &cfg).unwrap();
    assert!((coherent.fidelity - ideal.fidelity).abs() < 1e-6);
    let overlap: C64 = coherent
        .run
        .final_state
        .as_pure()
        .unwrap()
        .iter()
        .zip(ideal.run.final_state.as_pure().unwrap().iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    assert!(overlap.norm() > 1.0 - 1e-6);
}

#[test]
fn ideal_fidelity_does_not_depend_on_cutoff() {
    let cfg = IntegratorConfig::default();
    let params = preset_phase_qutrit(3, 60.0, 0.01).unwrap();
    let f = |cutoff| {
        let dims = SystemDims::new(3, cutoff).unwrap();
        let run = run_protocol(3, &params, &dims, SimulationMode::IdealResonant, &cfg).unwrap();
        fidelity(&run.final_state, &ghz_target(&dims).unwrap()).unwrap()
    };
    assert!((f(2) - f(3)).abs() < 1e-12);
}

fn ratio_sweep(n: usize, b: f64) -> Vec<f64> {
    let cfg = IntegratorConfig::default();
    let dims = SystemDims::new(n, 3).unwrap();
    let target = ghz_target(&dims).unwrap();
    [0.001, 0.01, 0.1]
        .iter()
        .map(|&r| {
            let params = preset_phase_qutrit(n, b, r).unwrap();
            let run = run_protocol(n, &params, &dims, SimulationMode::Lindblad, &cfg).unwrap();
            fidelity(&run.final_state, &target).unwrap()
        })
        .collect()
}

#[test]
fn stronger_direct_coupling_degrades_three_cavities() {
    let f = ratio_sweep(3, 60.0);
    assert!(f[0] >= f[1] && f[1] >= f[2], "{f:?}");
}

#[test]
fn weak_direct_coupling_is_negligible_for_two_cavities() {
    // Below 1% the hopping between idle cavities can interfere with other
    // errors either way; only the size of the effect is fixed.
    let f = ratio_sweep(2, 50.0);
    assert!((f[0] - f[1]).abs() < 1e-4, "{f:?}");
    assert!(f[2] < f[0].min(f[1]), "{f:?}");
}
