//! Physical parameters, hardware presets and the closed-form scalar estimates
//! (operation time, cavity lifetime, idle-cavity crosstalk, capacitive
//! inter-cavity coupling, quality factor).
//!
//! Every angular frequency, coupling and Rabi rate is stored in rad/s with
//! hbar = 1. Decay rates are plain 1/s.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Result};

/// Convert an ordinary frequency in Hz to rad/s.
pub fn angular(hz: f64) -> f64 {
    TAU * hz
}

/// Duration of a resonant swap or a full-transfer pulse at rate `rate`.
#[inline]
pub fn quarter_period(rate: f64) -> f64 {
    PI / (2.0 * rate)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceRates {
    /// Cavity field decay rate per cavity.
    pub kappa: Vec<f64>,
    pub gamma_phi_21: f64,
    pub gamma_phi_20: f64,
    pub gamma_phi_10: f64,
    /// Energy relaxation |2> -> |1>.
    pub gamma_21: f64,
    /// Energy relaxation |2> -> |0>.
    pub gamma_20: f64,
    /// Energy relaxation |1> -> |0>.
    pub gamma_10: f64,
}

impl DecoherenceRates {
    pub fn zero(n: usize) -> Self {
        Self {
            kappa: vec![0.0; n],
            gamma_phi_21: 0.0,
            gamma_phi_20: 0.0,
            gamma_phi_10: 0.0,
            gamma_21: 0.0,
            gamma_20: 0.0,
            gamma_10: 0.0,
        }
    }

    /// Coupler rates as `(name, value)` pairs, for reports.
    pub fn coupler_rates(&self) -> [(&'static str, f64); 6] {
        [
            ("gamma_phi_21", self.gamma_phi_21),
            ("gamma_phi_20", self.gamma_phi_20),
            ("gamma_phi_10", self.gamma_phi_10),
            ("gamma_21", self.gamma_21),
            ("gamma_20", self.gamma_20),
            ("gamma_10", self.gamma_10),
        ]
    }

    /// Sum of every rate, used for step-size control.
    pub fn total(&self) -> f64 {
        self.kappa.iter().sum::<f64>() + self.coupler_rates().iter().map(|r| r.1).sum::<f64>()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.kappa.len() != n {
            return arg_err(format!("kappa has {} entries for {n} cavities", self.kappa.len()));
        }
        let coupler = self.coupler_rates();
        for r in self.kappa.iter().copied().chain(coupler.iter().map(|r| r.1)) {
            if !(r >= 0.0 && r.is_finite()) {
                return arg_err(format!("decoherence rate {r} must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

/// Frequencies, couplings, drives and decoherence of the coupler-plus-cavities
/// system.
#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub omega_10: f64,
    pub omega_21: f64,
    pub omega_20: f64,
    /// Frequency of each cavity while it is the active (resonant) cavity.
    pub omega_c_active: Vec<f64>,
    /// Frequency of each cavity while idling.
    pub omega_c_idle: Vec<f64>,
    /// Resonant coupling to the 1-2 transition.
    pub g: Vec<f64>,
    /// Active-cavity coupling to the 0-1 transition.
    pub g_prime: Vec<f64>,
    /// Idle-cavity coupling to the 1-2 transition.
    pub g_tilde: Vec<f64>,
    /// Idle-cavity coupling to the 0-1 transition.
    pub g_tilde_prime: Vec<f64>,
    /// Direct inter-cavity coupling, symmetric with zero diagonal.
    pub g_cross: Vec<Vec<f64>>,
    pub Omega_21: f64,
    pub Omega_20: f64,
    pub Omega_10: f64,
    /// Detuning of the 1-2 drive from the 0-1 transition.
    pub Delta_mu_w: f64,
    /// Cavity retuning (or atom transit) dead time in seconds.
    pub t_d: f64,
    pub rates: DecoherenceRates,
}

/// Detunings derived from the frequency table.
#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq)]
pub struct Detunings {
    /// `omega_10 - omega_c_active[i]`.
    pub Delta: Vec<f64>,
    /// `omega_21 - omega_c_idle[j]`.
    pub Delta_j: Vec<f64>,
    /// `omega_10 - omega_c_idle[j]`.
    pub Delta_j_prime: Vec<f64>,
    /// `omega_l - omega_k` with every cavity idling.
    pub Delta_kl: Vec<Vec<f64>>,
}

impl PhysicalParams {
    pub fn n_cavities(&self) -> usize {
        self.g.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_cavities();
        if n == 0 {
            return arg_err("parameters describe zero cavities");
        }
        let lists = [
            ("omega_c_active", &self.omega_c_active),
            ("omega_c_idle", &self.omega_c_idle),
            ("g_prime", &self.g_prime),
            ("g_tilde", &self.g_tilde),
            ("g_tilde_prime", &self.g_tilde_prime),
        ];
        for (name, list) in lists {
            if list.len() != n {
                return arg_err(format!("{name} has {} entries for {n} cavities", list.len()));
            }
        }
        if self.g_cross.len() != n || self.g_cross.iter().any(|row| row.len() != n) {
            return arg_err(format!("g_cross must be {n}x{n}"));
        }
        for k in 0..n {
            if self.g_cross[k][k] != 0.0 {
                return arg_err("g_cross must have a zero diagonal");
            }
            for l in 0..n {
                if self.g_cross[k][l] != self.g_cross[l][k] {
                    return arg_err("g_cross must be symmetric");
                }
            }
        }
        let scalars = [
            self.omega_10,
            self.omega_21,
            self.omega_20,
            self.Omega_21,
            self.Omega_20,
            self.Omega_10,
            self.Delta_mu_w,
            self.t_d,
        ];
        let everything = scalars
            .iter()
            .chain(self.omega_c_active.iter())
            .chain(self.omega_c_idle.iter())
            .chain(self.g.iter())
            .chain(self.g_prime.iter())
            .chain(self.g_tilde.iter())
            .chain(self.g_tilde_prime.iter())
            .chain(self.g_cross.iter().flatten());
        for &v in everything {
            if !(v >= 0.0 && v.is_finite()) {
                return arg_err(format!("parameter value {v} must be finite and nonnegative"));
            }
        }
        let sum = self.omega_10 + self.omega_21;
        if (self.omega_20 - sum).abs() > 1e-9 * sum.abs().max(f64::MIN_POSITIVE) {
            return arg_err("omega_20 must equal omega_10 + omega_21");
        }
        self.rates.validate(n)
    }

    /// Cavity frequencies with `active` (1-based) tuned in and all others idle.
    pub fn cavity_frequencies(&self, active: Option<usize>) -> Vec<f64> {
        (0..self.n_cavities())
            .map(|k| {
                if active == Some(k + 1) {
                    self.omega_c_active[k]
                } else {
                    self.omega_c_idle[k]
                }
            })
            .collect()
    }

    pub fn detunings(&self) -> Detunings {
        let idle = self.cavity_frequencies(None);
        Detunings {
            Delta: self.omega_c_active.iter().map(|w| self.omega_10 - w).collect(),
            Delta_j: idle.iter().map(|w| self.omega_21 - w).collect(),
            Delta_j_prime: idle.iter().map(|w| self.omega_10 - w).collect(),
            Delta_kl: inter_cavity_detunings(&idle),
        }
    }

    /// Replace the inter-cavity coupling with a uniform `ratio * g_k` matrix
    /// (using the smaller of the two resonant couplings of a pair).
    pub fn set_uniform_cross_ratio(&mut self, ratio: f64) {
        let n = self.n_cavities();
        self.g_cross = (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| if k == l { 0.0 } else { ratio * self.g[k].min(self.g[l]) })
                    .collect()
            })
            .collect();
    }
}

/// `Delta_kl = omega_l - omega_k` for the given cavity frequencies.
pub fn inter_cavity_detunings(freqs: &[f64]) -> Vec<Vec<f64>> {
    freqs
        .iter()
        .map(|wk| freqs.iter().map(|wl| wl - wk).collect())
        .collect()
}

/// Active-cavity detuning from the 0-1 transition, held fixed while `b` is swept.
pub const PHASE_QUTRIT_DELTA_HZ: f64 = 500e6;

/// Superconducting phase qutrit coupled to `n` tunable resonators.
///
/// `b = Delta / g'` is swept by holding `Delta` fixed and shrinking `g'`.
pub fn preset_phase_qutrit(n: usize, b: f64, g_cross_ratio: f64) -> Result<PhysicalParams> {
    if !(1..=6).contains(&n) {
        return arg_err(format!("phase-qutrit preset supports 1..=6 cavities, got {n}"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return arg_err(format!("b must be positive, got {b}"));
    }
    if !(g_cross_ratio >= 0.0 && g_cross_ratio.is_finite()) {
        return arg_err(format!("g_cross_ratio must be nonnegative, got {g_cross_ratio}"));
    }
    let omega_10 = angular(6.8e9);
    let omega_21 = angular(6.3e9);
    let active = angular(6.3e9);
    let idle = angular(5.6e9);
    let delta = angular(PHASE_QUTRIT_DELTA_HZ);

    let g_prime = delta / b;
    let g = 2f64.sqrt() * g_prime;
    let g_tilde = g * (idle / active).sqrt();
    let g_tilde_prime = g_tilde / 2f64.sqrt();
    let omega_10_rabi = angular(50e6);

    let mut params = PhysicalParams {
        omega_10,
        omega_21,
        omega_20: omega_10 + omega_21,
        omega_c_active: vec![active; n],
        omega_c_idle: vec![idle; n],
        g: vec![g; n],
        g_prime: vec![g_prime; n],
        g_tilde: vec![g_tilde; n],
        g_tilde_prime: vec![g_tilde_prime; n],
        g_cross: vec![vec![0.0; n]; n],
        Omega_21: 2f64.sqrt() * omega_10_rabi,
        Omega_20: angular(200e6),
        Omega_10: omega_10_rabi,
        Delta_mu_w: angular(500e6),
        t_d: 1e-9,
        rates: DecoherenceRates {
            kappa: vec![1.0 / 20e-6; n],
            gamma_phi_21: 1.0 / 5e-6,
            gamma_phi_20: 1.0 / 5e-6,
            gamma_phi_10: 1.0 / 5e-6,
            gamma_21: 1.0 / 25e-6,
            gamma_20: 1.0 / 200e-6,
            gamma_10: 1.0 / 50e-6,
        },
    };
    params.set_uniform_cross_ratio(g_cross_ratio);
    Ok(params)
}

/// Loaded quality factor assumed for the Rydberg-atom cavities.
pub const RYDBERG_CAVITY_Q: f64 = 1e10;

/// Rydberg atom sent through `n` identical cavities resonant with its 1-2
/// transition.
///
/// The quoted coupling "2 pi x 50 KHz" is read as kHz. Only the |2> relaxation
/// time (to |1>) and the |2> dephasing time are available for the atom; all
/// other coupler channels are zero. The 0-1 transition is placed at the
/// 49-50 spacing (~54.3 GHz); nothing couples to it, so its value only enters
/// unused detunings.
pub fn preset_rydberg_atom(n: usize) -> Result<PhysicalParams> {
    if !(1..=12).contains(&n) {
        return arg_err(format!("atom preset supports 1..=12 cavities, got {n}"));
    }
    let omega_21 = angular(51.1e9);
    let omega_10 = angular(54.3e9);
    let g = angular(50e3);
    let t_r = 3e-2;
    let t_phi = 1e-3;
    Ok(PhysicalParams {
        omega_10,
        omega_21,
        omega_20: omega_10 + omega_21,
        omega_c_active: vec![omega_21; n],
        omega_c_idle: vec![omega_21; n],
        g: vec![g; n],
        g_prime: vec![0.0; n],
        g_tilde: vec![0.0; n],
        g_tilde_prime: vec![0.0; n],
        g_cross: vec![vec![0.0; n]; n],
        Omega_21: 10.0 * g,
        Omega_20: 10.0 * g,
        Omega_10: 0.0,
        Delta_mu_w: omega_10 - omega_21,
        t_d: 1e-6,
        rates: DecoherenceRates {
            kappa: vec![omega_21 / RYDBERG_CAVITY_Q; n],
            gamma_phi_21: 1.0 / t_phi,
            gamma_21: 1.0 / t_r,
            ..DecoherenceRates::zero(n)
        },
    })
}

/// Total protocol time: resonant swaps, inter-step pulses, the final pair of
/// pulses and `2n` dead times.
///
/// Terms are accumulated in schedule order so that the sum of a built
/// schedule's segment durations reproduces this value bit for bit.
pub fn total_time(params: &PhysicalParams, n: usize) -> Result<f64> {
    if n < 2 {
        return arg_err(format!("protocol needs n >= 2, got {n}"));
    }
    if n > params.n_cavities() {
        return arg_err(format!("parameters describe {} cavities, not {n}", params.n_cavities()));
    }
    if let Some(i) = params.g[..n].iter().position(|&g| g <= 0.0) {
        return arg_err(format!("resonant coupling of cavity {} is zero", i + 1));
    }
    if params.Omega_21 <= 0.0 || params.Omega_20 <= 0.0 {
        return arg_err("pulse Rabi frequencies must be positive");
    }
    let mut tau = 0.0;
    for i in 1..=n {
        tau += params.t_d;
        tau += quarter_period(params.g[i - 1]);
        tau += params.t_d;
        if i + 2 <= n {
            tau += quarter_period(params.Omega_21);
        } else if i + 1 == n {
            tau += quarter_period(params.Omega_20);
            tau += quarter_period(params.Omega_21);
        }
    }
    Ok(tau)
}

/// Photon lifetime bound for `n` cavities: the shortest single-cavity
/// lifetime `(Q / 2 pi nu) / n_bar`, divided by the number of cavities.
pub fn cavity_lifetime(q: &[f64], nu_c: &[f64], n_bar: &[f64]) -> Result<f64> {
    if q.is_empty() || q.len() != nu_c.len() || q.len() != n_bar.len() {
        return arg_err("Q, nu_c and n_bar must be nonempty lists of equal length");
    }
    let mut shortest = f64::INFINITY;
    for ((&qi, &nu), &nb) in q.iter().zip(nu_c).zip(n_bar) {
        if nu <= 0.0 || nb <= 0.0 {
            return arg_err("cavity frequency and mean photon number must be positive");
        }
        if qi <= 0.0 {
            return arg_err("quality factor must be positive");
        }
        shortest = shortest.min(qi / (TAU * nu) / nb);
    }
    Ok(shortest / q.len() as f64)
}

/// Probability that an idle cavity is excited during one resonant swap of
/// duration `pi / (2 g_i)`, from the generalized Rabi formula for its
/// off-resonant 1-2 coupling.
pub fn crosstalk_probability(g_tilde_j: f64, delta_j: f64, g_i: f64) -> Result<f64> {
    if !(g_i > 0.0) {
        return arg_err(format!("active coupling must be positive, got {g_i}"));
    }
    let w2 = 4.0 * g_tilde_j * g_tilde_j + delta_j * delta_j;
    if w2 == 0.0 {
        return Ok(0.0);
    }
    let flop = 0.5 * (1.0 - (PI * w2.sqrt() / (2.0 * g_i)).cos());
    let weight = 1.0 - delta_j * delta_j / w2;
    Ok((flop * weight).clamp(0.0, 1.0))
}

/// Capacitive estimate of the direct inter-cavity coupling,
/// `g C_c / (n C_c + C_q)`.
pub fn estimate_g_cross(g: f64, c_c: f64, c_q: f64, n: usize) -> Result<f64> {
    if !(c_c > 0.0 && c_q > 0.0) {
        return arg_err("capacitances must be positive");
    }
    if n == 0 {
        return arg_err("need at least one cavity");
    }
    let c_sigma = n as f64 * c_c + c_q;
    Ok(g * c_c / c_sigma)
}

/// Quality factor of a mode with energy lifetime `kappa_inv` at angular
/// frequency `omega_c`.
pub fn q_from_kappa(kappa_inv: f64, omega_c: f64) -> f64 {
    omega_c * kappa_inv
}
