//! Interaction-picture Hamiltonians for the three kinds of protocol segment:
//! a cavity tuned into resonance with the 1-2 transition, a drive on the 1-2
//! transition, and a drive on the 0-2 transition. Each also carries the
//! spectator couplings of the idling cavities and the direct inter-cavity
//! hopping.
//!
//! Every Hamiltonian is a sum of rotating terms
//! `A exp(i (nu t - phi)) X + h.c.` with a static operator `X`. Time enters only
//! through the phases, always evaluated on the global protocol clock.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};
use crate::model::{inter_cavity_detunings, PhysicalParams};
use crate::sparse::SparseOperator;
use crate::statespace::{annihilation_sparse, coupler_transition_sparse, CompositeOperator, SystemDims};

/// Which interaction is switched on during a segment.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum HamiltonianKind {
    /// Cavity `i` (1-based) resonant with the 1-2 transition.
    ResonantCavity(usize),
    /// Drive at the 1-2 frequency with initial phase `phi`.
    Pulse21(f64),
    /// Drive at the 0-2 frequency with initial phase `phi`.
    Pulse20(f64),
    /// Every cavity idle, no drive.
    IdleAll,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub kind: HamiltonianKind,
    /// Off-resonant couplings: the active cavity's 0-1 coupling, every idle
    /// cavity's 1-2 and 0-1 couplings, and the 1-2 drive's leakage onto 0-1.
    pub include_offresonant: bool,
    /// Direct cavity-cavity hopping.
    pub include_crosstalk: bool,
}

impl HamiltonianSpec {
    pub fn new(kind: HamiltonianKind, include_offresonant: bool, include_crosstalk: bool) -> Self {
        Self {
            kind,
            include_offresonant,
            include_crosstalk,
        }
    }

    /// Only the intended resonant interaction.
    pub fn ideal(kind: HamiltonianKind) -> Self {
        Self::new(kind, false, false)
    }

    /// Every coupling the model knows about.
    pub fn full(kind: HamiltonianKind) -> Self {
        Self::new(kind, true, true)
    }

    /// 1-based index of the cavity tuned into resonance, if any.
    pub fn active_cavity(&self) -> Option<usize> {
        match self.kind {
            HamiltonianKind::ResonantCavity(i) => Some(i),
            _ => None,
        }
    }
}

/// Static operator multiplying a rotating coefficient.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum TermOperator {
    /// `|upper><lower| a_cavity`.
    CavityExchange { cavity: usize, upper: usize, lower: usize },
    /// `|upper><lower|` (a classical drive).
    Drive { upper: usize, lower: usize },
    /// `a_from a_to^dagger`: a photon hops from one cavity to another.
    Hop { from: usize, to: usize },
}

/// One `amplitude exp(i (frequency t - phase)) X + h.c.` contribution.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct RotatingTerm {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub op: TermOperator,
}

impl RotatingTerm {
    pub fn coefficient(&self, t: f64) -> C64 {
        C64::from_polar(self.amplitude, self.frequency * t - self.phase)
    }
}

fn push_idle_terms(terms: &mut Vec<RotatingTerm>, params: &PhysicalParams, skip: Option<usize>) {
    let det = params.detunings();
    for j in 1..=params.n_cavities() {
        if Some(j) == skip {
            continue;
        }
        terms.push(RotatingTerm {
            amplitude: params.g_tilde[j - 1],
            frequency: det.Delta_j[j - 1],
            phase: 0.0,
            op: TermOperator::CavityExchange { cavity: j, upper: 2, lower: 1 },
        });
        terms.push(RotatingTerm {
            amplitude: params.g_tilde_prime[j - 1],
            frequency: det.Delta_j_prime[j - 1],
            phase: 0.0,
            op: TermOperator::CavityExchange { cavity: j, upper: 1, lower: 0 },
        });
    }
}

/// Enumerate the nonzero rotating terms of `spec`.
pub fn rotating_terms(spec: &HamiltonianSpec, params: &PhysicalParams) -> Result<Vec<RotatingTerm>> {
    let n = params.n_cavities();
    let mut terms = Vec::new();
    match spec.kind {
        HamiltonianKind::ResonantCavity(i) => {
            if i == 0 || i > n {
                return arg_err(format!("active cavity {i} outside 1..={n}"));
            }
            terms.push(RotatingTerm {
                amplitude: params.g[i - 1],
                frequency: 0.0,
                phase: 0.0,
                op: TermOperator::CavityExchange { cavity: i, upper: 2, lower: 1 },
            });
            if spec.include_offresonant {
                terms.push(RotatingTerm {
                    amplitude: params.g_prime[i - 1],
                    frequency: params.omega_10 - params.omega_c_active[i - 1],
                    phase: 0.0,
                    op: TermOperator::CavityExchange { cavity: i, upper: 1, lower: 0 },
                });
                push_idle_terms(&mut terms, params, Some(i));
            }
        }
        HamiltonianKind::Pulse21(phi) => {
            terms.push(RotatingTerm {
                amplitude: params.Omega_21,
                frequency: 0.0,
                phase: phi,
                op: TermOperator::Drive { upper: 2, lower: 1 },
            });
            if spec.include_offresonant {
                terms.push(RotatingTerm {
                    amplitude: params.Omega_10,
                    frequency: params.Delta_mu_w,
                    phase: phi,
                    op: TermOperator::Drive { upper: 1, lower: 0 },
                });
                push_idle_terms(&mut terms, params, None);
            }
        }
        HamiltonianKind::Pulse20(phi) => {
            terms.push(RotatingTerm {
                amplitude: params.Omega_20,
                frequency: 0.0,
                phase: phi,
                op: TermOperator::Drive { upper: 2, lower: 0 },
            });
            if spec.include_offresonant {
                push_idle_terms(&mut terms, params, None);
            }
        }
        HamiltonianKind::IdleAll => {
            if spec.include_offresonant {
                push_idle_terms(&mut terms, params, None);
            }
        }
    }
    if spec.include_crosstalk {
        let freqs = params.cavity_frequencies(spec.active_cavity());
        let det = inter_cavity_detunings(&freqs);
        // Each unordered pair once: the (l, k) term is the Hermitian
        // conjugate of the (k, l) term.
        for k in 1..=n {
            for l in (k + 1)..=n {
                terms.push(RotatingTerm {
                    amplitude: params.g_cross[k - 1][l - 1],
                    frequency: det[k - 1][l - 1],
                    phase: 0.0,
                    op: TermOperator::Hop { from: k, to: l },
                });
            }
        }
    }
    terms.retain(|t| t.amplitude != 0.0);
    Ok(terms)
}

/// Largest coupling, Rabi rate or detuning among the terms of `spec`; sets
/// the integration step.
pub fn max_frequency_scale(spec: &HamiltonianSpec, params: &PhysicalParams) -> Result<f64> {
    Ok(rotating_terms(spec, params)?
        .iter()
        .map(|t| t.amplitude.max(t.frequency.abs()))
        .fold(0.0, f64::max))
}

fn term_operator(op: TermOperator, dims: &SystemDims) -> Result<SparseOperator> {
    Ok(match op {
        TermOperator::CavityExchange { cavity, upper, lower } => {
            coupler_transition_sparse(dims, upper, lower)?.mul(&annihilation_sparse(dims, cavity)?)
        }
        TermOperator::Drive { upper, lower } => coupler_transition_sparse(dims, upper, lower)?,
        TermOperator::Hop { from, to } => {
            annihilation_sparse(dims, from)?.mul(&annihilation_sparse(dims, to)?.adjoint())
        }
    })
}

/// A Hamiltonian compiled onto a fixed sparsity pattern; evaluating it at a
/// new time only rewrites the stored values.
#[derive(Clone, Debug)]
pub struct CompiledHamiltonian {
    dims: SystemDims,
    terms: Vec<RotatingTerm>,
    matrix: SparseOperator,
    /// `(slot, term, value of X at that slot, slot belongs to X^dagger)`.
    contributions: Vec<(usize, usize, C64, bool)>,
    coefficients: Vec<C64>,
}

impl CompiledHamiltonian {
    pub fn new(spec: &HamiltonianSpec, params: &PhysicalParams, dims: &SystemDims) -> Result<Self> {
        if params.n_cavities() != dims.n_cavities() {
            return arg_err(format!(
                "parameters describe {} cavities but the space has {}",
                params.n_cavities(),
                dims.n_cavities()
            ));
        }
        params.validate()?;
        let terms = rotating_terms(spec, params)?;
        let ops = terms
            .iter()
            .map(|t| term_operator(t.op, dims))
            .collect::<Result<Vec<_>>>()?;

        let one = C64::new(1.0, 0.0);
        let pattern: Vec<(usize, usize, C64)> = ops
            .iter()
            .flat_map(|op| op.triplets().flat_map(move |(r, c, _)| [(r, c, one), (c, r, one)]))
            .collect();
        let mut matrix = SparseOperator::from_triplets(dims.dim(), pattern);

        let mut contributions = Vec::new();
        for (k, op) in ops.iter().enumerate() {
            for (r, c, v) in op.triplets() {
                contributions.push((matrix.position(r, c).expect("slot in pattern"), k, v, false));
                contributions.push((matrix.position(c, r).expect("slot in pattern"), k, v, true));
            }
        }
        matrix.values_mut().iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        Ok(Self {
            dims: *dims,
            coefficients: vec![C64::new(0.0, 0.0); terms.len()],
            terms,
            matrix,
            contributions,
        })
    }

    pub fn dims(&self) -> &SystemDims {
        &self.dims
    }

    pub fn terms(&self) -> &[RotatingTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Evaluate at time `t` and return the sparse matrix.
    pub fn at(&mut self, t: f64) -> &SparseOperator {
        for (c, term) in self.coefficients.iter_mut().zip(&self.terms) {
            *c = term.coefficient(t);
        }
        let vals = self.matrix.values_mut();
        vals.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for &(slot, k, v, adjoint) in &self.contributions {
            let w = self.coefficients[k] * v;
            vals[slot] += if adjoint { w.conj() } else { w };
        }
        &self.matrix
    }
}

/// Dense Hamiltonian of `spec` at global time `t`.
pub fn build_h(spec: &HamiltonianSpec, params: &PhysicalParams, dims: &SystemDims, t: f64) -> Result<CompositeOperator> {
    let mut h = CompiledHamiltonian::new(spec, params, dims)?;
    let m: Array2<C64> = h.at(t).to_dense();
    CompositeOperator::new(*dims, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset_phase_qutrit, preset_rydberg_atom, angular};
    use crate::statespace::{annihilation, coupler_transition};
    use std::f64::consts::PI;

    fn dims(n: usize) -> SystemDims {
        SystemDims::new(n, 3).unwrap()
    }

    #[test]
    fn every_kind_is_exactly_hermitian() {
        let p = preset_phase_qutrit(3, 40.0, 0.01).unwrap();
        let kinds = [
            HamiltonianKind::ResonantCavity(2),
            HamiltonianKind::Pulse21(PI),
            HamiltonianKind::Pulse20(-PI / 2.0),
            HamiltonianKind::IdleAll,
        ];
        for kind in kinds {
            for t in [0.0, 1.3e-9, 7.77e-8] {
                let h = build_h(&HamiltonianSpec::full(kind), &p, &dims(3), t).unwrap();
                assert_eq!(h.hermiticity_defect(), 0.0, "{kind:?} at {t}");
            }
        }
    }

    #[test]
    fn resonant_only_is_static_jaynes_cummings() {
        let p = preset_phase_qutrit(2, 50.0, 0.01).unwrap();
        let d = dims(2);
        let spec = HamiltonianSpec::ideal(HamiltonianKind::ResonantCavity(1));
        let expect = coupler_transition(&d, 2, 1).unwrap().dot(&annihilation(&d, 1).unwrap());
        let expect = (expect.matrix() + &expect.adjoint().into_matrix()).mapv(|v| v * p.g[0]);
        for t in [0.0, 3.1e-9, 1e-7] {
            assert_eq!(build_h(&spec, &p, &d, t).unwrap().matrix(), &expect);
        }
    }

    #[test]
    fn pulse20_touches_only_the_02_block() {
        let p = preset_phase_qutrit(2, 50.0, 0.01).unwrap();
        let d = dims(2);
        let spec = HamiltonianSpec::ideal(HamiltonianKind::Pulse20(-PI / 2.0));
        let h = build_h(&spec, &p, &d, 0.0).unwrap();
        for ((r, c), v) in h.matrix().indexed_iter() {
            if v.norm() == 0.0 {
                continue;
            }
            let levels = (d.coupler_level_of(r), d.coupler_level_of(c));
            assert!(levels == (0, 2) || levels == (2, 0));
            assert_eq!(d.decode(r).1, d.decode(c).1);
            assert!((v.norm() - p.Omega_20).abs() < 1e-6 * p.Omega_20);
        }
    }

    #[test]
    fn frequency_scale_of_resonant_step_is_the_idle_01_detuning() {
        let p = preset_phase_qutrit(4, 85.0, 0.01).unwrap();
        let s = max_frequency_scale(&HamiltonianSpec::full(HamiltonianKind::ResonantCavity(1)), &p).unwrap();
        assert!((s - angular(1.2e9)).abs() < 1e-6 * s);
    }

    #[test]
    fn frequency_scale_zero_without_terms() {
        let p = preset_rydberg_atom(3).unwrap();
        let s = max_frequency_scale(&HamiltonianSpec::full(HamiltonianKind::IdleAll), &p).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn frequency_scale_monotone_in_included_terms() {
        let p = preset_phase_qutrit(3, 60.0, 0.01).unwrap();
        for kind in [HamiltonianKind::ResonantCavity(1), HamiltonianKind::Pulse21(PI), HamiltonianKind::IdleAll] {
            let ideal = max_frequency_scale(&HamiltonianSpec::ideal(kind), &p).unwrap();
            let cross = max_frequency_scale(&HamiltonianSpec::new(kind, false, true), &p).unwrap();
            let full = max_frequency_scale(&HamiltonianSpec::full(kind), &p).unwrap();
            assert!(ideal <= cross && cross <= full);
        }
    }

    #[test]
    fn inconsistent_dims_rejected() {
        let p = preset_phase_qutrit(3, 60.0, 0.01).unwrap();
        let spec = HamiltonianSpec::full(HamiltonianKind::IdleAll);
        assert!(build_h(&spec, &p, &dims(2), 0.0).is_err());
        let spec = HamiltonianSpec::full(HamiltonianKind::ResonantCavity(4));
        assert!(build_h(&spec, &p, &dims(3), 0.0).is_err());
    }

    #[test]
    fn hop_terms_follow_current_cavity_frequencies() {
        let p = preset_phase_qutrit(3, 60.0, 0.01).unwrap();
        let spec = HamiltonianSpec::new(HamiltonianKind::ResonantCavity(2), false, true);
        let terms = rotating_terms(&spec, &p).unwrap();
        let hop = |from, to| {
            terms
                .iter()
                .find(|t| t.op == TermOperator::Hop { from, to })
                .unwrap()
                .frequency
        };
        assert_eq!(hop(1, 3), 0.0);
        assert!((hop(1, 2) - angular(700e6)).abs() < 1.0);
        assert!((hop(2, 3) + angular(700e6)).abs() < 1.0);
    }
}
