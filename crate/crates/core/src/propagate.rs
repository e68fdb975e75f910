//! Fixed-step RK4 integration of the Schrödinger equation and of the Lindblad
//! master equation with cavity decay, coupler relaxation on all three paths and
//! pure dephasing of the form `gamma_phi (S^z rho S^z - rho)`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::hamiltonian::{max_frequency_scale, CompiledHamiltonian, HamiltonianSpec};
use crate::model::PhysicalParams;
use crate::sparse::SparseOperator;
use crate::statespace::{
    annihilation_sparse, coupler_transition_sparse, dephasing_z_sparse, LevelPair, QuantumState, StateKind,
    SystemDims,
};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const MINUS_I: C64 = C64 { re: 0.0, im: -1.0 };

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Rk4Fixed,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    /// Steps per period of the fastest coherent frequency in a segment (and
    /// per e-folding time of the summed decay rates).
    pub dt_factor: f64,
    pub method: Method,
    pub trace_tolerance: f64,
    pub hermiticity_tolerance: f64,
    /// Floor on the number of steps in any nonempty segment.
    pub min_steps: usize,
    /// Diagonalize the density matrix at the end of every Lindblad segment.
    pub check_positivity: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt_factor: 40.0,
            method: Method::Rk4Fixed,
            trace_tolerance: 1e-7,
            hermiticity_tolerance: 1e-9,
            min_steps: 64,
            check_positivity: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_factor >= 10.0) || !self.dt_factor.is_finite() {
            return arg_err(format!("dt_factor must be at least 10, got {}", self.dt_factor));
        }
        if self.min_steps == 0 {
            return arg_err("min_steps must be positive");
        }
        Ok(())
    }

    /// Same configuration with every step divided by `k`.
    pub fn refined(&self, k: usize) -> Self {
        Self {
            dt_factor: self.dt_factor * k as f64,
            min_steps: self.min_steps * k,
            ..*self
        }
    }

    /// Number of equal steps used for a segment.
    pub fn steps_for(&self, duration: f64, frequency_scale: f64, rate_scale: f64) -> usize {
        if duration <= 0.0 {
            return 0;
        }
        let mut dt_max = f64::INFINITY;
        if frequency_scale > 0.0 {
            dt_max = TAU / (self.dt_factor * frequency_scale);
        }
        if rate_scale > 0.0 {
            dt_max = dt_max.min(1.0 / (self.dt_factor * rate_scale));
        }
        let from_scale = if dt_max.is_finite() {
            (duration / dt_max).ceil() as usize
        } else {
            0
        };
        from_scale.max(self.min_steps)
    }
}

#[derive(Clone, Debug)]
pub struct SegmentResult {
    pub final_state: QuantumState,
    pub steps_taken: usize,
    pub dt: f64,
    /// Largest `|tr rho - 1|` (or `|<psi|psi> - 1|`) seen at any step.
    pub max_trace_drift: f64,
    /// Largest entry of `|rho - rho^dagger|` seen at any step; zero for pure
    /// states.
    pub max_hermiticity_defect: f64,
    /// Smallest eigenvalue of the final density matrix, when checked.
    pub min_eigenvalue: Option<f64>,
    /// Set when drift or defect exceeded the configured tolerance.
    pub flagged: bool,
}

fn check_segment(psi0: &QuantumState, duration: f64, cfg: &IntegratorConfig, kind: StateKind) -> Result<()> {
    cfg.validate()?;
    if psi0.kind() != kind {
        return arg_err(format!("expected a {kind:?} initial state"));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return arg_err(format!("segment duration {duration} must be finite and nonnegative"));
    }
    Ok(())
}

fn segment_name(spec: &HamiltonianSpec) -> String {
    format!("{:?}", spec.kind)
}

/// Integrate `i d psi/dt = H(t) psi` over `[t_start, t_start + duration]`.
///
/// The state is not renormalized; its norm drift is reported instead.
pub fn evolve_pure(
    psi0: &QuantumState,
    spec: &HamiltonianSpec,
    params: &PhysicalParams,
    t_start: f64,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<SegmentResult> {
    check_segment(psi0, duration, cfg, StateKind::PureVector)?;
    let dims = *psi0.dims();
    let mut h = CompiledHamiltonian::new(spec, params, &dims)?;
    let psi = psi0.as_pure().expect("pure state").to_vec();
    let initial_drift = (psi0.trace() - 1.0).abs();

    if h.is_zero() || duration == 0.0 {
        return Ok(SegmentResult {
            final_state: psi0.clone(),
            steps_taken: 0,
            dt: duration,
            max_trace_drift: initial_drift,
            max_hermiticity_defect: 0.0,
            min_eigenvalue: None,
            flagged: initial_drift > cfg.trace_tolerance,
        });
    }

    let scale = max_frequency_scale(spec, params)?;
    let steps = cfg.steps_for(duration, scale, 0.0);
    let dt = duration / steps as f64;
    let d = psi.len();

    let rhs = |h: &mut CompiledHamiltonian, t: f64, x: &[C64], out: &mut [C64]| {
        out.iter_mut().for_each(|o| *o = ZERO);
        h.at(t).apply_add(MINUS_I, x, out);
    };

    let mut y = psi;
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![ZERO; d], vec![ZERO; d], vec![ZERO; d], vec![ZERO; d], vec![ZERO; d]);
    let mut max_drift = initial_drift;
    for step in 0..steps {
        let t = t_start + step as f64 * dt;
        rk4_step(&mut y, dt, t, &mut h, &rhs, [&mut k1, &mut k2, &mut k3, &mut k4], &mut tmp);
        let norm: f64 = y.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() {
            return Err(Error::Numerical {
                segment: segment_name(spec),
                step,
                detail: "non-finite amplitude".into(),
            });
        }
        max_drift = max_drift.max((norm - 1.0).abs());
    }
    Ok(SegmentResult {
        final_state: QuantumState::pure_unchecked(dims, Array1::from_vec(y)),
        steps_taken: steps,
        dt,
        max_trace_drift: max_drift,
        max_hermiticity_defect: 0.0,
        min_eigenvalue: None,
        flagged: max_drift > cfg.trace_tolerance,
    })
}

#[allow(clippy::too_many_arguments)]
fn rk4_step<F>(
    y: &mut [C64],
    dt: f64,
    t: f64,
    h: &mut CompiledHamiltonian,
    rhs: &F,
    k: [&mut Vec<C64>; 4],
    tmp: &mut [C64],
) where
    F: Fn(&mut CompiledHamiltonian, f64, &[C64], &mut [C64]),
{
    let [k1, k2, k3, k4] = k;
    let half = 0.5 * dt;
    rhs(h, t, y, k1);
    for ((o, a), b) in tmp.iter_mut().zip(y.iter()).zip(k1.iter()) {
        *o = a + b * half;
    }
    rhs(h, t + half, tmp, k2);
    for ((o, a), b) in tmp.iter_mut().zip(y.iter()).zip(k2.iter()) {
        *o = a + b * half;
    }
    rhs(h, t + half, tmp, k3);
    for ((o, a), b) in tmp.iter_mut().zip(y.iter()).zip(k3.iter()) {
        *o = a + b * dt;
    }
    rhs(h, t + dt, tmp, k4);
    let sixth = dt / 6.0;
    for (i, yi) in y.iter_mut().enumerate() {
        *yi += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * sixth;
    }
}

/// Dissipative part of the master equation on a fixed space.
#[derive(Clone, Debug)]
pub struct Dissipator {
    /// `rate * J rho J^dagger` terms: collapse operators and dephasing `S^z`.
    sandwiches: Vec<(f64, SparseOperator)>,
    /// `sum rate c^dagger c` over collapse operators, plus `gamma_phi (S^z)^2`
    /// for each dephasing channel.
    anti: SparseOperator,
    /// Sum of every rate, for step control.
    rate_scale: f64,
}

impl Dissipator {
    pub fn new(params: &PhysicalParams, dims: &SystemDims) -> Result<Self> {
        let r = &params.rates;
        let mut collapse: Vec<(f64, SparseOperator)> = Vec::new();
        for (i, &kappa) in r.kappa.iter().enumerate() {
            if kappa > 0.0 {
                collapse.push((kappa, annihilation_sparse(dims, i + 1)?));
            }
        }
        for (rate, (lower, upper)) in [(r.gamma_21, (1, 2)), (r.gamma_20, (0, 2)), (r.gamma_10, (0, 1))] {
            if rate > 0.0 {
                collapse.push((rate, coupler_transition_sparse(dims, lower, upper)?));
            }
        }
        let mut anti = SparseOperator::zeros(dims.dim());
        for (rate, c) in &collapse {
            anti = anti.add(&c.adjoint().mul(c).scaled(C64::new(*rate, 0.0)));
        }
        // S^z vanishes on the third level, so `- gamma_phi rho` becomes
        // `- gamma_phi {(S^z)^2, rho} / 2`: the same term on the two dephased
        // levels, and trace preserving on the whole qutrit.
        let mut sandwiches = collapse;
        for (rate, pair) in [
            (r.gamma_phi_21, LevelPair::P21),
            (r.gamma_phi_20, LevelPair::P20),
            (r.gamma_phi_10, LevelPair::P10),
        ] {
            if rate > 0.0 {
                let sz = dephasing_z_sparse(dims, pair);
                anti = anti.add(&sz.mul(&sz).scaled(C64::new(rate, 0.0)));
                sandwiches.push((rate, sz));
            }
        }
        Ok(Self {
            sandwiches,
            anti,
            rate_scale: r.total(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.sandwiches.is_empty()
    }

    pub fn rate_scale(&self) -> f64 {
        self.rate_scale
    }

    /// `out += D[rho]`.
    pub fn apply_add(&self, rho: &[C64], out: &mut [C64]) {
        for (rate, j) in &self.sandwiches {
            j.sandwich_add(*rate, rho, out);
        }
        let minus_half = C64::new(-0.5, 0.0);
        self.anti.left_mul_add(minus_half, rho, out);
        self.anti.right_mul_add(minus_half, rho, out);
    }
}

fn hermiticity_defect(rho: &[C64], d: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in a..d {
            worst = worst.max((rho[a * d + b] - rho[b * d + a].conj()).norm());
        }
    }
    worst
}

fn trace_of(rho: &[C64], d: usize) -> f64 {
    (0..d).map(|a| rho[a * d + a].re).sum()
}

/// Smallest eigenvalue of the Hermitian part of `rho`.
pub fn min_eigenvalue(rho: &Array2<C64>) -> f64 {
    let d = rho.nrows();
    let m = DMatrix::from_fn(d, d, |i, j| (rho[[i, j]] + rho[[j, i]].conj()) * 0.5);
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Integrate the master equation over `[t_start, t_start + duration]`.
pub fn evolve_lindblad(
    rho0: &QuantumState,
    spec: &HamiltonianSpec,
    params: &PhysicalParams,
    t_start: f64,
    duration: f64,
    cfg: &IntegratorConfig,
) -> Result<SegmentResult> {
    check_segment(rho0, duration, cfg, StateKind::DensityMatrix)?;
    let dims = *rho0.dims();
    let d = dims.dim();
    let mut h = CompiledHamiltonian::new(spec, params, &dims)?;
    let diss = Dissipator::new(params, &dims)?;
    let rho_init = rho0.as_density().expect("density matrix");
    let mut y: Vec<C64> = rho_init.iter().copied().collect();

    let mut max_drift = (trace_of(&y, d) - 1.0).abs();
    let mut max_defect = hermiticity_defect(&y, d);
    let mut steps = 0;
    let mut dt = duration;

    if duration > 0.0 && !(h.is_zero() && diss.is_zero()) {
        let scale = max_frequency_scale(spec, params)?;
        steps = cfg.steps_for(duration, scale, diss.rate_scale());
        dt = duration / steps as f64;

        let rhs = |h: &mut CompiledHamiltonian, t: f64, x: &[C64], out: &mut [C64]| {
            out.iter_mut().for_each(|o| *o = ZERO);
            let hm = h.at(t);
            hm.left_mul_add(MINUS_I, x, out);
            hm.right_mul_add(C64::new(0.0, 1.0), x, out);
            diss.apply_add(x, out);
        };
        let n2 = d * d;
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
            (vec![ZERO; n2], vec![ZERO; n2], vec![ZERO; n2], vec![ZERO; n2], vec![ZERO; n2]);
        for step in 0..steps {
            let t = t_start + step as f64 * dt;
            rk4_step(&mut y, dt, t, &mut h, &rhs, [&mut k1, &mut k2, &mut k3, &mut k4], &mut tmp);
            let tr = trace_of(&y, d);
            let defect = hermiticity_defect(&y, d);
            if !tr.is_finite() || !defect.is_finite() {
                return Err(Error::Numerical {
                    segment: segment_name(spec),
                    step,
                    detail: "non-finite density matrix entry".into(),
                });
            }
            max_drift = max_drift.max((tr - 1.0).abs());
            max_defect = max_defect.max(defect);
        }
    }

    let rho = Array2::from_shape_vec((d, d), y).expect("square buffer");
    let min_eig = cfg.check_positivity.then(|| min_eigenvalue(&rho));
    Ok(SegmentResult {
        final_state: QuantumState::density_unchecked(dims, rho),
        steps_taken: steps,
        dt,
        max_trace_drift: max_drift,
        max_hermiticity_defect: max_defect,
        min_eigenvalue: min_eig,
        flagged: max_drift > cfg.trace_tolerance || max_defect > cfg.hermiticity_tolerance,
    })
}
