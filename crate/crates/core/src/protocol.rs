//! The n-step GHZ preparation sequence: schedule construction, the analytic
//! state after every step, and full simulations of the sequence.
//!
//! Steps `1..=n-2` load one photon into cavity `i` from the |2> branch and
//! restore |1> -> |2> with a phase-pi drive. Step `n-1` additionally moves the
//! |0> branch to |2> and swaps |1> and |2>. Step `n` loads the last cavity,
//! leaving the coupler in |1> and the cavities in `(|0..0> + |1..1>) / sqrt 2`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::analysis::fidelity;
use crate::error::{arg_err, Error, Result};
use crate::hamiltonian::{HamiltonianKind, HamiltonianSpec};
use crate::model::{quarter_period, total_time, PhysicalParams};
use crate::propagate::{evolve_lindblad, evolve_pure, IntegratorConfig, SegmentResult};
use crate::statespace::{basis_state, QuantumState, SystemDims};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub kind: HamiltonianKind,
    pub duration: f64,
    pub label: String,
    /// Protocol step this segment belongs to; 0 for the preparation pulse.
    pub step: usize,
}

impl Segment {
    pub fn spec(&self, mode: SimulationMode) -> HamiltonianSpec {
        match mode {
            SimulationMode::IdealResonant => HamiltonianSpec::ideal(self.kind),
            _ => HamiltonianSpec::full(self.kind),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub segments: Vec<Segment>,
    pub n: usize,
    pub params: PhysicalParams,
}

impl Schedule {
    /// Sum of segment durations, accumulated in order.
    pub fn total_duration(&self) -> f64 {
        self.segments.iter().fold(0.0, |acc, s| acc + s.duration)
    }

    /// Index of the last segment of each step, in step order.
    pub fn step_ends(&self) -> Vec<usize> {
        let mut ends = Vec::new();
        for (k, seg) in self.segments.iter().enumerate() {
            let next_step = self.segments.get(k + 1).map(|s| s.step);
            if next_step != Some(seg.step) {
                ends.push(k);
            }
        }
        ends
    }
}

fn phase_label(phi: f64) -> &'static str {
    if phi == PI {
        "pi"
    } else if phi == PI / 2.0 {
        "pi/2"
    } else if phi == -PI / 2.0 {
        "-pi/2"
    } else {
        "custom"
    }
}

fn pulse(kind: HamiltonianKind, rate: f64, step: usize) -> Segment {
    let label = match kind {
        HamiltonianKind::Pulse21(phi) => format!("step{step}:pulse21(phi={})", phase_label(phi)),
        HamiltonianKind::Pulse20(phi) => format!("step{step}:pulse20(phi={})", phase_label(phi)),
        _ => unreachable!("pulse segments only"),
    };
    Segment {
        kind,
        duration: quarter_period(rate),
        label,
        step,
    }
}

/// Segment list for an `n`-cavity run. The durations add up to
/// [`total_time`] exactly.
pub fn build_schedule(n: usize, params: &PhysicalParams) -> Result<Schedule> {
    // Shares validation with the closed form.
    total_time(params, n)?;
    let mut segments = Vec::new();
    for i in 1..=n {
        let retune = Segment {
            kind: HamiltonianKind::IdleAll,
            duration: params.t_d,
            label: format!("step{i}:retune"),
            step: i,
        };
        segments.push(retune.clone());
        segments.push(Segment {
            kind: HamiltonianKind::ResonantCavity(i),
            duration: quarter_period(params.g[i - 1]),
            label: format!("step{i}:resonant(c{i})"),
            step: i,
        });
        segments.push(retune);
        if i + 2 <= n {
            segments.push(pulse(HamiltonianKind::Pulse21(PI), params.Omega_21, i));
        } else if i + 1 == n {
            segments.push(pulse(HamiltonianKind::Pulse20(-PI / 2.0), params.Omega_20, i));
            segments.push(pulse(HamiltonianKind::Pulse21(PI / 2.0), params.Omega_21, i));
        }
    }
    Ok(Schedule {
        segments,
        n,
        params: params.clone(),
    })
}

/// Pulse taking |0> to `(|0> + |2>) / sqrt 2` ahead of step 1.
pub fn preparation_segment(params: &PhysicalParams) -> Segment {
    Segment {
        kind: HamiltonianKind::Pulse20(-PI / 2.0),
        duration: PI / (4.0 * params.Omega_20),
        label: "prep:pulse20(phi=-pi/2)".into(),
        step: 0,
    }
}

/// Normalized superposition of two basis states with the given amplitudes
/// (before the common `1/sqrt 2`).
pub(crate) fn two_branch_state(
    dims: &SystemDims,
    a: (usize, &[usize], C64),
    b: (usize, &[usize], C64),
) -> Result<QuantumState> {
    let mut psi = Array1::zeros(dims.dim());
    psi[dims.index_of(a.0, a.1)?] += a.2 * FRAC_1_SQRT_2;
    psi[dims.index_of(b.0, b.1)?] += b.2 * FRAC_1_SQRT_2;
    Ok(QuantumState::pure_unchecked(*dims, psi))
}

/// Analytic state of the coupler and cavities after step `k` (0 = after the
/// preparation pulse).
pub fn ideal_state_after_step(dims: &SystemDims, k: usize) -> Result<QuantumState> {
    let n = dims.n_cavities();
    if n < 2 {
        return arg_err("protocol needs at least two cavities");
    }
    if k > n {
        return arg_err(format!("step {k} outside 0..={n}"));
    }
    let one = C64::new(1.0, 0.0);
    let vac = vec![0; n];
    let loaded = |m: usize| -> Vec<usize> { (0..n).map(|j| usize::from(j < m)).collect() };
    if k == 0 {
        two_branch_state(dims, (0, &vac, one), (2, &vac, one))
    } else if k + 2 <= n {
        two_branch_state(dims, (0, &vac, one), (2, &loaded(k), one))
    } else if k + 1 == n {
        two_branch_state(dims, (1, &vac, one), (2, &loaded(k), C64::new(0.0, 1.0)))
    } else {
        crate::analysis::ghz_target(dims)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulationMode {
    /// Only the intended resonant interactions, starting from the prepared
    /// superposition.
    #[serde(rename = "ideal")]
    IdealResonant,
    /// Every coherent coupling, no dissipation.
    #[serde(rename = "coherent")]
    PureCoherentErrors,
    /// Every coherent coupling plus the full master equation.
    #[serde(rename = "lindblad")]
    Lindblad,
}

impl fmt::Display for SimulationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimulationMode::IdealResonant => "ideal",
            SimulationMode::PureCoherentErrors => "coherent",
            SimulationMode::Lindblad => "lindblad",
        })
    }
}

impl FromStr for SimulationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(SimulationMode::IdealResonant),
            "coherent" => Ok(SimulationMode::PureCoherentErrors),
            "lindblad" => Ok(SimulationMode::Lindblad),
            other => Err(Error::Config(format!("unknown mode '{other}' (ideal, coherent, lindblad)"))),
        }
    }
}

/// One row of the per-segment trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentRecord {
    pub label: String,
    pub step: usize,
    pub t_end: f64,
    pub steps_taken: usize,
    pub dt: f64,
    /// Fidelity against the analytic state, at step boundaries only.
    pub fidelity: Option<f64>,
    pub trace_drift: f64,
    pub hermiticity_defect: f64,
    pub min_eigenvalue: Option<f64>,
    pub flagged: bool,
}

#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub mode: SimulationMode,
    pub final_state: QuantumState,
    pub records: Vec<SegmentRecord>,
    pub schedule: Schedule,
    /// Total protocol time, excluding the preparation pulse.
    pub tau: f64,
    /// Duration of the preparation pulse (zero in ideal mode).
    pub prep_duration: f64,
}

impl ProtocolRun {
    pub fn flagged(&self) -> bool {
        self.records.iter().any(|r| r.flagged)
    }

    pub fn max_trace_drift(&self) -> f64 {
        self.records.iter().map(|r| r.trace_drift).fold(0.0, f64::max)
    }

    pub fn max_hermiticity_defect(&self) -> f64 {
        self.records.iter().map(|r| r.hermiticity_defect).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.records.iter().filter_map(|r| r.min_eigenvalue).reduce(f64::min)
    }

    /// Smallest step used by any segment that took steps.
    pub fn min_dt(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| r.steps_taken > 0)
            .map(|r| r.dt)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Simulate the protocol.
pub fn run_protocol(
    n: usize,
    params: &PhysicalParams,
    dims: &SystemDims,
    mode: SimulationMode,
    cfg: &IntegratorConfig,
) -> Result<ProtocolRun> {
    run_protocol_observed(n, params, dims, mode, cfg, |_, _| {})
}

/// [`run_protocol`] with a callback after every segment.
pub fn run_protocol_observed<F>(
    n: usize,
    params: &PhysicalParams,
    dims: &SystemDims,
    mode: SimulationMode,
    cfg: &IntegratorConfig,
    mut observer: F,
) -> Result<ProtocolRun>
where
    F: FnMut(&Segment, &SegmentResult),
{
    if dims.n_cavities() != n || params.n_cavities() != n {
        return arg_err(format!(
            "n = {n} but the space has {} cavities and the parameters {}",
            dims.n_cavities(),
            params.n_cavities()
        ));
    }
    params.validate()?;
    let schedule = build_schedule(n, params)?;
    let tau = total_time(params, n)?;

    let mut segments = Vec::with_capacity(schedule.segments.len() + 1);
    let mut state = match mode {
        SimulationMode::IdealResonant => ideal_state_after_step(dims, 0)?,
        _ => {
            segments.push(preparation_segment(params));
            basis_state(dims, 0, &vec![0; n])?
        }
    };
    let prep_duration = segments.first().map_or(0.0, |s| s.duration);
    segments.extend(schedule.segments.iter().cloned());
    if mode == SimulationMode::Lindblad {
        state = state.to_density();
    }

    let mut oracles: Vec<Option<QuantumState>> = vec![None; n + 1];
    let mut records = Vec::with_capacity(segments.len());
    let mut t = 0.0;
    for (k, seg) in segments.iter().enumerate() {
        let spec = seg.spec(mode);
        let result = match mode {
            SimulationMode::Lindblad => evolve_lindblad(&state, &spec, params, t, seg.duration, cfg)?,
            _ => evolve_pure(&state, &spec, params, t, seg.duration, cfg)?,
        };
        t += seg.duration;
        observer(seg, &result);

        let closes_step = segments.get(k + 1).map(|s| s.step) != Some(seg.step);
        let fid = if closes_step {
            let target = match &oracles[seg.step] {
                Some(s) => s,
                None => oracles[seg.step].insert(ideal_state_after_step(dims, seg.step)?),
            };
            Some(fidelity(&result.final_state, target)?)
        } else {
            None
        };
        records.push(SegmentRecord {
            label: seg.label.clone(),
            step: seg.step,
            t_end: t,
            steps_taken: result.steps_taken,
            dt: result.dt,
            fidelity: fid,
            trace_drift: result.max_trace_drift,
            hermiticity_defect: result.max_hermiticity_defect,
            min_eigenvalue: result.min_eigenvalue,
            flagged: result.flagged,
        });
        state = result.final_state;
    }

    Ok(ProtocolRun {
        mode,
        final_state: state,
        records,
        schedule,
        tau,
        prep_duration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset_phase_qutrit, preset_rydberg_atom};

    #[test]
    fn two_cavity_schedule_has_eight_segments() {
        let p = preset_phase_qutrit(2, 50.0, 0.0).unwrap();
        let s = build_schedule(2, &p).unwrap();
        assert_eq!(s.segments.len(), 8);
        assert_eq!(s.step_ends(), vec![4, 7]);
        assert!(build_schedule(1, &p).is_err());
    }

    #[test]
    fn schedule_duration_matches_closed_form_exactly() {
        for n in 2..=6 {
            let p = preset_phase_qutrit(n, 85.0, 0.01).unwrap();
            let s = build_schedule(n, &p).unwrap();
            assert_eq!(s.total_duration(), total_time(&p, n).unwrap());
        }
        let p = preset_rydberg_atom(10).unwrap();
        assert_eq!(build_schedule(10, &p).unwrap().total_duration(), total_time(&p, 10).unwrap());
    }

    #[test]
    fn three_cavity_ordering() {
        let p = preset_phase_qutrit(3, 60.0, 0.0).unwrap();
        let labels: Vec<String> = build_schedule(3, &p)
            .unwrap()
            .segments
            .into_iter()
            .map(|s| s.label)
            .filter(|l| !l.ends_with("retune"))
            .collect();
        assert_eq!(
            labels,
            [
                "step1:resonant(c1)",
                "step1:pulse21(phi=pi)",
                "step2:resonant(c2)",
                "step2:pulse20(phi=-pi/2)",
                "step2:pulse21(phi=pi/2)",
                "step3:resonant(c3)",
            ]
        );
    }

    #[test]
    fn ideal_states() {
        let dims = SystemDims::new(2, 2).unwrap();
        let last = ideal_state_after_step(&dims, 2).unwrap();
        let v = last.as_pure().unwrap();
        let a = v[dims.index_of(1, &[0, 0]).unwrap()];
        let b = v[dims.index_of(1, &[1, 1]).unwrap()];
        assert_eq!(a, C64::new(FRAC_1_SQRT_2, 0.0));
        assert_eq!(b, C64::new(FRAC_1_SQRT_2, 0.0));
        assert!(v.iter().filter(|x| x.norm() > 0.0).count() == 2);

        let dims = SystemDims::new(4, 2).unwrap();
        let s = ideal_state_after_step(&dims, 3).unwrap();
        let v = s.as_pure().unwrap();
        let ratio = v[dims.index_of(2, &[1, 1, 1, 0]).unwrap()] / v[dims.index_of(1, &[0, 0, 0, 0]).unwrap()];
        assert_eq!(ratio, C64::new(0.0, 1.0));
        for k in 0..=4 {
            assert!((ideal_state_after_step(&dims, k).unwrap().trace() - 1.0).abs() < 1e-15);
        }
        assert!(ideal_state_after_step(&dims, 5).is_err());
    }

    #[test]
    fn mode_strings_round_trip() {
        for m in [SimulationMode::IdealResonant, SimulationMode::PureCoherentErrors, SimulationMode::Lindblad] {
            assert_eq!(m.to_string().parse::<SimulationMode>().unwrap(), m);
        }
        assert!("exact".parse::<SimulationMode>().is_err());
    }
}
