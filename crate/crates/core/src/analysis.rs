//! Fidelity against the GHZ target, sweeps over `b = Delta / g'`, and the
//! static feasibility budget.

use std::fmt;
use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::model::{
    cavity_lifetime, crosstalk_probability, preset_phase_qutrit, q_from_kappa, total_time, PhysicalParams,
};
use crate::propagate::IntegratorConfig;
use crate::protocol::{run_protocol, two_branch_state, ProtocolRun, SimulationMode};
use crate::statespace::{QuantumState, StateKind, SystemDims};

/// `<psi|rho|psi>` for a density matrix, `|<psi|phi>|^2` for a pure state.
pub fn fidelity(state: &QuantumState, target: &QuantumState) -> Result<f64> {
    let psi = target
        .as_pure()
        .ok_or_else(|| Error::Argument("fidelity target must be a pure state".into()))?;
    if state.dims().dim() != psi.len() {
        return Err(Error::DimensionMismatch {
            expected: psi.len(),
            found: state.dims().dim(),
        });
    }
    match state.kind() {
        StateKind::PureVector => {
            let phi = state.as_pure().expect("pure");
            let overlap: C64 = psi.iter().zip(phi.iter()).map(|(a, b)| a.conj() * b).sum();
            Ok(overlap.norm_sqr())
        }
        StateKind::DensityMatrix => {
            let rho = state.as_density().expect("density");
            let d = psi.len();
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..d {
                if psi[a] == C64::new(0.0, 0.0) {
                    continue;
                }
                let row: C64 = (0..d).map(|b| rho[[a, b]] * psi[b]).sum();
                acc += psi[a].conj() * row;
            }
            Ok(acc.re)
        }
    }
}

/// `|1> (|0..0> + |1..1>) / sqrt 2`.
pub fn ghz_target(dims: &SystemDims) -> Result<QuantumState> {
    let n = dims.n_cavities();
    let one = C64::new(1.0, 0.0);
    two_branch_state(dims, (1, &vec![0; n], one), (1, &vec![1; n], one))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub b: f64,
    pub g_cross_ratio: f64,
    pub fidelity: f64,
    pub tau_seconds: f64,
    pub dt_used: f64,
    pub trace_drift: f64,
    pub hermiticity_defect: f64,
    /// Fidelity recomputed at the alternate Fock cutoff, when requested.
    pub fidelity_alt_cutoff: Option<f64>,
    pub converged: bool,
    /// `ok`, `unconverged`, `flagged`, or an error message.
    pub status: String,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        !matches!(self.status.as_str(), "ok" | "unconverged" | "flagged")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub preset: String,
    pub rows: Vec<SweepRow>,
}

/// Fock cutoffs of two runs must agree this closely for a row to count as
/// converged.
pub const CUTOFF_AGREEMENT: f64 = 5e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub b_values: Vec<f64>,
    pub g_cross_ratios: Vec<f64>,
    pub mode: SimulationMode,
    pub integrator: IntegratorConfig,
    pub fock_cutoff: usize,
    /// Repeat every point with one more Fock state per cavity and compare.
    pub check_cutoff: bool,
    /// Worker threads; results do not depend on it.
    pub jobs: usize,
}

impl SweepConfig {
    pub fn new(n_values: Vec<usize>, b_values: Vec<f64>, g_cross_ratio: f64, mode: SimulationMode) -> Self {
        Self {
            n_values,
            b_values,
            g_cross_ratios: vec![g_cross_ratio],
            mode,
            integrator: IntegratorConfig::default(),
            fock_cutoff: crate::statespace::DEFAULT_FOCK_CUTOFF,
            check_cutoff: false,
            jobs: 1,
        }
    }
}

/// The cutoff a row is compared against: one more Fock state per cavity.
pub fn alternate_cutoff(k: usize) -> usize {
    k + 1
}

/// Run one point of a phase-qutrit sweep and report its fidelity against the
/// GHZ target.
pub fn phase_qutrit_point(
    n: usize,
    b: f64,
    g_cross_ratio: f64,
    mode: SimulationMode,
    fock_cutoff: usize,
    cfg: &IntegratorConfig,
) -> Result<(f64, ProtocolRun)> {
    let params = preset_phase_qutrit(n, b, g_cross_ratio)?;
    let dims = SystemDims::new(n, fock_cutoff)?;
    let run = run_protocol(n, &params, &dims, mode, cfg)?;
    let f = fidelity(&run.final_state, &ghz_target(&dims)?)?;
    Ok((f, run))
}

fn sweep_row(n: usize, b: f64, ratio: f64, cfg: &SweepConfig) -> SweepRow {
    let mut row = SweepRow {
        n,
        b,
        g_cross_ratio: ratio,
        fidelity: f64::NAN,
        tau_seconds: f64::NAN,
        dt_used: f64::NAN,
        trace_drift: f64::NAN,
        hermiticity_defect: f64::NAN,
        fidelity_alt_cutoff: None,
        converged: true,
        status: "ok".into(),
    };
    let primary = phase_qutrit_point(n, b, ratio, cfg.mode, cfg.fock_cutoff, &cfg.integrator);
    let (f, run) = match primary {
        Ok(x) => x,
        Err(e) => {
            row.converged = false;
            row.status = format!("error: {e}");
            return row;
        }
    };
    row.fidelity = f;
    row.tau_seconds = run.tau;
    row.dt_used = run.min_dt();
    row.trace_drift = run.max_trace_drift();
    row.hermiticity_defect = run.max_hermiticity_defect();
    if run.flagged() {
        row.status = "flagged".into();
    }
    if cfg.check_cutoff {
        let alt = alternate_cutoff(cfg.fock_cutoff);
        match phase_qutrit_point(n, b, ratio, cfg.mode, alt, &cfg.integrator) {
            Ok((f_alt, _)) => {
                row.fidelity_alt_cutoff = Some(f_alt);
                row.converged = (f - f_alt).abs() <= CUTOFF_AGREEMENT;
                if !row.converged && row.status == "ok" {
                    row.status = "unconverged".into();
                }
            }
            Err(e) => {
                row.converged = false;
                row.status = format!("error: {e}");
            }
        }
    }
    row
}

/// Fidelity of the phase-qutrit protocol over a grid of `(n, b, ratio)`.
///
/// Failures are recorded per row. Rows come back sorted by `(n, b, ratio)`
/// whatever the number of workers.
pub fn sweep_b(cfg: &SweepConfig) -> Result<SweepResult> {
    if cfg.n_values.is_empty() || cfg.b_values.is_empty() || cfg.g_cross_ratios.is_empty() {
        return arg_err("sweep lists must be nonempty");
    }
    if let Some(b) = cfg.b_values.iter().find(|b| !(**b > 0.0)) {
        return arg_err(format!("b values must be positive, got {b}"));
    }
    cfg.integrator.validate()?;
    let mut points: Vec<(usize, f64, f64)> = Vec::new();
    for &n in &cfg.n_values {
        for &b in &cfg.b_values {
            for &r in &cfg.g_cross_ratios {
                points.push((n, b, r));
            }
        }
    }
    points.sort_by(|x, y| {
        x.0.cmp(&y.0)
            .then(x.1.total_cmp(&y.1))
            .then(x.2.total_cmp(&y.2))
    });
    points.dedup();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        points
            .par_iter()
            .map(|&(n, b, r)| sweep_row(n, b, r, cfg))
            .collect::<Vec<_>>()
    });
    Ok(SweepResult {
        preset: "phase_qutrit".into(),
        rows,
    })
}

impl SweepResult {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(SweepRow::failed)
    }

    pub fn any_unconverged(&self) -> bool {
        self.rows.iter().any(|r| !r.converged || r.status == "flagged")
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for row in &self.rows {
            serde_json::to_writer(&mut out, row)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(preset: &str, input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r.deserialize().collect::<std::result::Result<Vec<SweepRow>, _>>()?;
        Ok(Self {
            preset: preset.into(),
            rows,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrosstalkRow {
    pub step: usize,
    pub idle_cavity: usize,
    pub g_tilde: f64,
    pub delta_j: f64,
    pub probability: f64,
}

/// Static feasibility report: operation time against every lifetime in the
/// model, and the idle-cavity excitation probability of every step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetReport {
    pub n: usize,
    pub tau: f64,
    /// Loaded quality factor of each cavity at its active frequency.
    pub quality_factors: Vec<f64>,
    /// Single-photon lifetime of each cavity.
    pub cavity_lifetimes: Vec<f64>,
    /// Shortest cavity lifetime divided by `n`; infinite without cavity loss.
    pub t_cav: f64,
    pub tau_over_t_cav: f64,
    /// `tau * rate` for each cavity decay and each coupler channel.
    pub rate_products: Vec<(String, f64)>,
    pub crosstalk: Vec<CrosstalkRow>,
}

impl BudgetReport {
    pub fn max_crosstalk(&self) -> f64 {
        self.crosstalk.iter().map(|r| r.probability).fold(0.0, f64::max)
    }
}

pub fn decoherence_budget(params: &PhysicalParams, n: usize) -> Result<BudgetReport> {
    params.validate()?;
    let tau = total_time(params, n)?;
    let kappa = &params.rates.kappa[..n];
    let omega = &params.omega_c_active[..n];
    let quality_factors: Vec<f64> = kappa
        .iter()
        .zip(omega)
        .map(|(&k, &w)| q_from_kappa(1.0 / k, w))
        .collect();
    let nu: Vec<f64> = omega.iter().map(|w| w / std::f64::consts::TAU).collect();
    let single: Vec<f64> = quality_factors
        .iter()
        .zip(&nu)
        .map(|(&q, &f)| cavity_lifetime(&[q], &[f], &[1.0]))
        .collect::<Result<_>>()?;
    let t_cav = cavity_lifetime(&quality_factors, &nu, &vec![1.0; n])?;

    let mut rate_products: Vec<(String, f64)> = kappa
        .iter()
        .enumerate()
        .map(|(i, k)| (format!("kappa_{}", i + 1), tau * k))
        .collect();
    rate_products.extend(params.rates.coupler_rates().iter().map(|(name, r)| (name.to_string(), tau * r)));

    let det = params.detunings();
    let mut crosstalk = Vec::new();
    for i in 1..=n {
        for j in (1..=n).filter(|&j| j != i) {
            crosstalk.push(CrosstalkRow {
                step: i,
                idle_cavity: j,
                g_tilde: params.g_tilde[j - 1],
                delta_j: det.Delta_j[j - 1],
                probability: crosstalk_probability(params.g_tilde[j - 1], det.Delta_j[j - 1], params.g[i - 1])?,
            });
        }
    }
    Ok(BudgetReport {
        n,
        tau,
        quality_factors,
        cavity_lifetimes: single,
        t_cav,
        tau_over_t_cav: tau / t_cav,
        rate_products,
        crosstalk,
    })
}

impl fmt::Display for BudgetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "cavities            n = {}", self.n)?;
        writeln!(f, "operation time      tau = {:.4e} s", self.tau)?;
        for (i, (q, t)) in self.quality_factors.iter().zip(&self.cavity_lifetimes).enumerate() {
            writeln!(f, "cavity {:<3}          Q = {:.4e}  lifetime = {:.4e} s", i + 1, q, t)?;
        }
        writeln!(f, "mode lifetime       T_cav = {:.4e} s", self.t_cav)?;
        writeln!(f, "ratio               tau/T_cav = {:.4e}", self.tau_over_t_cav)?;
        for (name, v) in &self.rate_products {
            writeln!(f, "tau * {name:<14} = {v:.4e}")?;
        }
        writeln!(f, "idle-cavity crosstalk (step, idle cavity, probability):")?;
        for row in &self.crosstalk {
            writeln!(f, "  {:>3} {:>3}  {:.6e}", row.step, row.idle_cavity, row.probability)?;
        }
        Ok(())
    }
}
