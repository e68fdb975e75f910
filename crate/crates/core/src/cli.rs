//! Command-line front end.
//!
//! Every setting is a flat key. A `--config` file holds `key = value` lines
//! (`#` starts a comment) and each key can be overridden by the flag
//! `--key-name`. Frequencies are plain Hz, times seconds, rates 1/s.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Arg, ArgMatches, Command};

use crate::analysis::{alternate_cutoff, decoherence_budget, fidelity, ghz_target, SweepConfig, SweepResult, CUTOFF_AGREEMENT};
use crate::atomscheme::{ATOM_FOCK_CUTOFF, ATOM_LINDBLAD_MAX_N};
use crate::error::{Error, Result};
use crate::model::{angular, preset_phase_qutrit, preset_rydberg_atom, DecoherenceRates, PhysicalParams};
use crate::propagate::IntegratorConfig;
use crate::protocol::{build_schedule, preparation_segment, run_protocol, SimulationMode};
use crate::statespace::{SystemDims, DEFAULT_FOCK_CUTOFF};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNCONVERGED: i32 = 3;

/// Settings that select what to run.
const GENERAL_KEYS: &[(&str, &str)] = &[
    ("preset", "phase_qutrit, rydberg_atom or custom"),
    ("n", "number of cavities"),
    ("b", "Delta / g' (phase_qutrit only)"),
    ("mode", "ideal, coherent or lindblad"),
    ("fock_cutoff", "Fock states kept per cavity"),
    ("g_cross_ratio", "direct cavity coupling as a fraction of the smaller g"),
    ("dt_factor", "integrator steps per period of the fastest frequency"),
    ("min_steps", "minimum integrator steps per segment"),
    ("check_cutoff", "repeat with one more Fock state and compare (true/false)"),
    ("output", "output file"),
    ("format", "csv or jsonl"),
    ("jobs", "sweep worker threads"),
    ("n_list", "comma-separated cavity counts (sweep)"),
    ("b_list", "comma-separated b values or start:stop:step (sweep)"),
    ("ratio_list", "comma-separated g_cross ratios (sweep)"),
];

/// Physical parameters. Per-cavity keys accept one value for every cavity or
/// a comma-separated list.
const PHYSICAL_KEYS: &[(&str, &str)] = &[
    ("omega_10", "coupler 0-1 frequency, Hz"),
    ("omega_21", "coupler 1-2 frequency, Hz"),
    ("omega_c_active", "active cavity frequencies, Hz"),
    ("omega_c_idle", "idle cavity frequencies, Hz"),
    ("g", "resonant 1-2 coupling, Hz"),
    ("g_prime", "0-1 coupling to the active cavity, Hz"),
    ("g_tilde", "1-2 coupling to idle cavities, Hz"),
    ("g_tilde_prime", "0-1 coupling to idle cavities, Hz"),
    ("g_cross", "direct coupling between every cavity pair, Hz"),
    ("rabi_21", "1-2 drive strength, Hz"),
    ("rabi_20", "0-2 drive strength, Hz"),
    ("rabi_10", "spurious 0-1 drive strength, Hz"),
    ("delta_mu_w", "detuning of the 1-2 drive from the 0-1 transition, Hz"),
    ("t_d", "retuning time, s"),
    ("kappa", "cavity decay rates, 1/s"),
    ("gamma_phi_21", "1/s"),
    ("gamma_phi_20", "1/s"),
    ("gamma_phi_10", "1/s"),
    ("gamma_21", "1/s"),
    ("gamma_20", "1/s"),
    ("gamma_10", "1/s"),
];

fn all_keys() -> impl Iterator<Item = &'static (&'static str, &'static str)> {
    GENERAL_KEYS.iter().chain(PHYSICAL_KEYS)
}

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub fn command() -> Command {
    let mut common: Vec<Arg> = vec![
        Arg::new("config").long("config").value_name("FILE").help("key = value settings file"),
        Arg::new("dump_config")
            .long("dump-config")
            .value_name("FILE")
            .help("write the effective settings to FILE"),
    ];
    for (key, help) in all_keys() {
        common.push(Arg::new(*key).long(flag_name(key)).value_name("VALUE").help(*help));
    }
    let sub = |name: &'static str, about: &'static str| Command::new(name).about(about).args(common.clone());
    Command::new("cavity-ghz")
        .about("Simulate GHZ-state generation across cavities sharing one qutrit coupler")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(sub("run", "simulate one protocol run and print the per-segment trace"))
        .subcommand(sub("sweep", "fidelity over a grid of n, b and crosstalk ratio"))
        .subcommand(sub("budget", "operation time against lifetimes and idle-cavity crosstalk"))
        .subcommand(sub("schedule", "print the segment table"))
        .version(env!("CARGO_PKG_VERSION"))
}

/// Parse `key = value` lines.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().replace('-', "_");
        if !all_keys().any(|(name, _)| *name == key) {
            return Err(usage(format!("line {}: unknown key '{key}'", lineno + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Preset {
    PhaseQutrit,
    RydbergAtom,
    Custom,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase_qutrit" => Ok(Preset::PhaseQutrit),
            "rydberg_atom" => Ok(Preset::RydbergAtom),
            "custom" => Ok(Preset::Custom),
            other => Err(usage(format!("unknown preset '{other}'"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "jsonl" => Ok(OutputFormat::Jsonl),
            other => Err(usage(format!("unknown format '{other}' (csv, jsonl)"))),
        }
    }
}

/// Effective settings after merging the config file and flags.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub preset: Preset,
    pub n: usize,
    pub b: f64,
    pub mode: SimulationMode,
    pub fock_cutoff: usize,
    pub g_cross_ratio: f64,
    pub integrator: IntegratorConfig,
    pub check_cutoff: bool,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub jobs: usize,
    pub n_list: Vec<usize>,
    pub b_list: Vec<f64>,
    pub ratio_list: Vec<f64>,
    /// The merged key map the settings came from.
    pub raw: BTreeMap<String, String>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| usage(format!("bad value '{v}' for {key}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

/// `start:stop:step` (inclusive) or a comma list.
fn parse_b_list(v: &str) -> Result<Vec<f64>> {
    if let Some((start, rest)) = v.split_once(':') {
        let (stop, step) = rest
            .split_once(':')
            .ok_or_else(|| usage("b_list range must be start:stop:step"))?;
        let (start, stop, step): (f64, f64, f64) = (
            parse_value("b_list", start.trim())?,
            parse_value("b_list", stop.trim())?,
            parse_value("b_list", step.trim())?,
        );
        if !(step > 0.0) || stop < start {
            return Err(usage("b_list range needs step > 0 and stop >= start"));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|k| start + k as f64 * step).collect());
    }
    parse_list("b_list", v)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(usage(format!("bad value '{v}' for {key} (true/false)"))),
    }
}

impl RunConfig {
    pub fn from_map(raw: BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| raw.get(k).map(String::as_str);
        let preset: Preset = get("preset").map_or(Ok(Preset::PhaseQutrit), str::parse)?;
        let n: usize = get("n").map_or(Ok(2), |v| parse_value("n", v))?;
        let b: f64 = get("b").map_or(Ok(50.0), |v| parse_value("b", v))?;
        let mode: SimulationMode = get("mode").map_or(Ok(SimulationMode::Lindblad), |v| {
            v.parse().map_err(|_| usage(format!("unknown mode '{v}' (ideal, coherent, lindblad)")))
        })?;
        let default_cutoff = match preset {
            Preset::RydbergAtom => ATOM_FOCK_CUTOFF,
            _ => DEFAULT_FOCK_CUTOFF,
        };
        let fock_cutoff = get("fock_cutoff").map_or(Ok(default_cutoff), |v| parse_value("fock_cutoff", v))?;
        let g_cross_ratio = get("g_cross_ratio").map_or(Ok(0.01), |v| parse_value("g_cross_ratio", v))?;
        let mut integrator = IntegratorConfig::default();
        if let Some(v) = get("dt_factor") {
            integrator.dt_factor = parse_value("dt_factor", v)?;
        }
        if let Some(v) = get("min_steps") {
            integrator.min_steps = parse_value("min_steps", v)?;
        }
        integrator.validate().map_err(|e| usage(e.to_string()))?;
        let check_cutoff = get("check_cutoff").map_or(Ok(false), |v| parse_bool("check_cutoff", v))?;
        let format = get("format").map_or(Ok(OutputFormat::Csv), str::parse)?;
        let jobs: usize = get("jobs").map_or(Ok(1), |v| parse_value("jobs", v))?;
        if jobs == 0 {
            return Err(usage("jobs must be at least 1"));
        }
        let n_list = get("n_list").map_or(Ok(vec![n]), |v| parse_list("n_list", v))?;
        let b_list = get("b_list").map_or(Ok(vec![b]), parse_b_list)?;
        let ratio_list = get("ratio_list").map_or(Ok(vec![g_cross_ratio]), |v| parse_list("ratio_list", v))?;
        if n < 2 {
            return Err(usage(format!("the protocol needs n >= 2, got {n}")));
        }
        if n_list.iter().any(|&k| k < 2) {
            return Err(usage("n_list entries must be >= 2"));
        }
        if !(b > 0.0) || b_list.iter().any(|&x| !(x > 0.0)) {
            return Err(usage("b must be positive"));
        }
        if fock_cutoff < 2 {
            return Err(usage("fock_cutoff must be at least 2"));
        }
        Ok(Self {
            preset,
            n,
            b,
            mode,
            fock_cutoff,
            g_cross_ratio,
            integrator,
            check_cutoff,
            output: get("output").map(PathBuf::from),
            format,
            jobs,
            n_list,
            b_list,
            ratio_list,
            raw,
        })
    }

    /// The settings in config-file form. Feeding this back reproduces the run.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        let preset = match self.preset {
            Preset::PhaseQutrit => "phase_qutrit",
            Preset::RydbergAtom => "rydberg_atom",
            Preset::Custom => "custom",
        };
        line("preset", preset.into());
        line("n", self.n.to_string());
        line("b", format!("{:?}", self.b));
        line("mode", self.mode.to_string());
        line("fock_cutoff", self.fock_cutoff.to_string());
        line("g_cross_ratio", format!("{:?}", self.g_cross_ratio));
        line("dt_factor", format!("{:?}", self.integrator.dt_factor));
        line("min_steps", self.integrator.min_steps.to_string());
        line("check_cutoff", self.check_cutoff.to_string());
        if let Some(p) = &self.output {
            line("output", p.display().to_string());
        }
        line(
            "format",
            match self.format {
                OutputFormat::Csv => "csv",
                OutputFormat::Jsonl => "jsonl",
            }
            .into(),
        );
        line("jobs", self.jobs.to_string());
        let join = |v: Vec<String>| v.join(",");
        line("n_list", join(self.n_list.iter().map(|x| x.to_string()).collect()));
        line("b_list", join(self.b_list.iter().map(|x| format!("{x:?}")).collect()));
        line("ratio_list", join(self.ratio_list.iter().map(|x| format!("{x:?}")).collect()));
        for (key, _) in PHYSICAL_KEYS {
            if let Some(v) = self.raw.get(*key) {
                line(key, v.clone());
            }
        }
        out
    }

    fn has_physical_overrides(&self) -> bool {
        PHYSICAL_KEYS.iter().any(|(k, _)| self.raw.contains_key(*k))
    }

    /// Physical parameters for `n` cavities: the preset with any overrides
    /// applied.
    pub fn params(&self, n: usize) -> Result<PhysicalParams> {
        let mut p = match self.preset {
            Preset::PhaseQutrit => preset_phase_qutrit(n, self.b, self.g_cross_ratio)?,
            Preset::RydbergAtom => preset_rydberg_atom(n)?,
            Preset::Custom => {
                let missing: Vec<&str> = PHYSICAL_KEYS
                    .iter()
                    .map(|(k, _)| *k)
                    .filter(|k| *k != "g_cross" && !self.raw.contains_key(*k))
                    .collect();
                if !missing.is_empty() {
                    return Err(usage(format!("custom preset needs: {}", missing.join(", "))));
                }
                blank_params(n)
            }
        };
        self.apply_overrides(&mut p)?;
        if self.preset == Preset::Custom && !self.raw.contains_key("g_cross") {
            p.set_uniform_cross_ratio(self.g_cross_ratio);
        }
        p.validate().map_err(|e| usage(e.to_string()))?;
        Ok(p)
    }

    fn apply_overrides(&self, p: &mut PhysicalParams) -> Result<()> {
        let n = p.n_cavities();
        let scalar = |k: &str| -> Result<Option<f64>> { self.raw.get(k).map(|v| parse_value(k, v)).transpose() };
        let per_cavity = |k: &str| -> Result<Option<Vec<f64>>> {
            let Some(v) = self.raw.get(k) else { return Ok(None) };
            let vals: Vec<f64> = parse_list(k, v)?;
            match vals.len() {
                1 => Ok(Some(vec![vals[0]; n])),
                len if len == n => Ok(Some(vals)),
                len => Err(usage(format!("{k} has {len} values for {n} cavities"))),
            }
        };
        let hz = |v: Vec<f64>| v.into_iter().map(angular).collect::<Vec<_>>();

        if let Some(v) = scalar("omega_10")? {
            p.omega_10 = angular(v);
        }
        if let Some(v) = scalar("omega_21")? {
            p.omega_21 = angular(v);
        }
        p.omega_20 = p.omega_10 + p.omega_21;
        for (key, field) in [
            ("omega_c_active", &mut p.omega_c_active),
            ("omega_c_idle", &mut p.omega_c_idle),
            ("g", &mut p.g),
            ("g_prime", &mut p.g_prime),
            ("g_tilde", &mut p.g_tilde),
            ("g_tilde_prime", &mut p.g_tilde_prime),
        ] {
            if let Some(v) = per_cavity(key)? {
                *field = hz(v);
            }
        }
        if let Some(v) = scalar("g_cross")? {
            let g = angular(v);
            p.g_cross = (0..n)
                .map(|k| (0..n).map(|l| if k == l { 0.0 } else { g }).collect())
                .collect();
        }
        for (key, field) in [
            ("rabi_21", &mut p.Omega_21),
            ("rabi_20", &mut p.Omega_20),
            ("rabi_10", &mut p.Omega_10),
            ("delta_mu_w", &mut p.Delta_mu_w),
        ] {
            if let Some(v) = scalar(key)? {
                *field = angular(v);
            }
        }
        if let Some(v) = scalar("t_d")? {
            p.t_d = v;
        }
        if let Some(v) = per_cavity("kappa")? {
            p.rates.kappa = v;
        }
        let r = &mut p.rates;
        for (key, field) in [
            ("gamma_phi_21", &mut r.gamma_phi_21),
            ("gamma_phi_20", &mut r.gamma_phi_20),
            ("gamma_phi_10", &mut r.gamma_phi_10),
            ("gamma_21", &mut r.gamma_21),
            ("gamma_20", &mut r.gamma_20),
            ("gamma_10", &mut r.gamma_10),
        ] {
            if let Some(v) = scalar(key)? {
                *field = v;
            }
        }
        Ok(())
    }

    fn dims(&self, n: usize) -> Result<SystemDims> {
        SystemDims::new(n, self.fock_cutoff)
    }
}

fn blank_params(n: usize) -> PhysicalParams {
    PhysicalParams {
        omega_10: 0.0,
        omega_21: 0.0,
        omega_20: 0.0,
        omega_c_active: vec![0.0; n],
        omega_c_idle: vec![0.0; n],
        g: vec![0.0; n],
        g_prime: vec![0.0; n],
        g_tilde: vec![0.0; n],
        g_tilde_prime: vec![0.0; n],
        g_cross: vec![vec![0.0; n]; n],
        Omega_21: 0.0,
        Omega_20: 0.0,
        Omega_10: 0.0,
        Delta_mu_w: 0.0,
        t_d: 0.0,
        rates: DecoherenceRates::zero(n),
    }
}

fn collect_settings(m: &ArgMatches) -> Result<BTreeMap<String, String>> {
    let mut map = match m.get_one::<String>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {path}: {e}")))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    for (key, _) in all_keys() {
        if let Some(v) = m.get_one::<String>(key) {
            map.insert((*key).to_string(), v.clone());
        }
    }
    Ok(map)
}

fn open_output(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn cmd_run(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    if cfg.preset == Preset::RydbergAtom && cfg.mode == SimulationMode::Lindblad && cfg.n > ATOM_LINDBLAD_MAX_N {
        return Err(usage(format!(
            "density-matrix atom runs are limited to n <= {ATOM_LINDBLAD_MAX_N}"
        )));
    }
    let params = cfg.params(cfg.n)?;
    let dims = cfg.dims(cfg.n)?;
    let run = run_protocol(cfg.n, &params, &dims, cfg.mode, &cfg.integrator)?;
    let f = fidelity(&run.final_state, &ghz_target(&dims)?)?;

    writeln!(out, "{:<28} {:>12} {:>6} {:>12} {:>12} {:>10}", "segment", "t_end[s]", "steps", "fidelity", "trace_drift", "flagged")?;
    for r in &run.records {
        let fid = r.fidelity.map_or_else(|| "-".to_string(), |v| format!("{v:.8}"));
        writeln!(
            out,
            "{:<28} {:>12.5e} {:>6} {:>12} {:>12.3e} {:>10}",
            r.label, r.t_end, r.steps_taken, fid, r.trace_drift, r.flagged
        )?;
    }
    writeln!(out, "tau = {:.6e} s", run.tau)?;
    if run.prep_duration > 0.0 {
        writeln!(out, "preparation pulse = {:.6e} s (not in tau)", run.prep_duration)?;
    }
    writeln!(out, "fidelity = {f:.10}")?;

    let mut converged = !run.flagged();
    if cfg.check_cutoff {
        let alt = alternate_cutoff(cfg.fock_cutoff);
        let alt_dims = SystemDims::new(cfg.n, alt)?;
        let alt_run = run_protocol(cfg.n, &params, &alt_dims, cfg.mode, &cfg.integrator)?;
        let f_alt = fidelity(&alt_run.final_state, &ghz_target(&alt_dims)?)?;
        writeln!(out, "fidelity at cutoff {alt} = {f_alt:.10}")?;
        if (f - f_alt).abs() > CUTOFF_AGREEMENT {
            writeln!(out, "cutoff check failed")?;
            converged = false;
        }
    }

    if let Some(path) = &cfg.output {
        let mut w = open_output(path)?;
        match cfg.format {
            OutputFormat::Csv => {
                let mut c = csv::Writer::from_writer(&mut w);
                for r in &run.records {
                    c.serialize(r)?;
                }
                c.flush()?;
            }
            OutputFormat::Jsonl => {
                for r in &run.records {
                    serde_json::to_writer(&mut w, r)?;
                    w.write_all(b"\n")?;
                }
            }
        }
        w.flush()?;
    }
    Ok(if converged { EXIT_OK } else { EXIT_UNCONVERGED })
}

fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    if cfg.preset != Preset::PhaseQutrit {
        return Err(usage("sweep runs the phase_qutrit preset only"));
    }
    if cfg.has_physical_overrides() {
        return Err(usage("sweep does not take physical overrides"));
    }
    let sweep = SweepConfig {
        n_values: cfg.n_list.clone(),
        b_values: cfg.b_list.clone(),
        g_cross_ratios: cfg.ratio_list.clone(),
        mode: cfg.mode,
        integrator: cfg.integrator,
        fock_cutoff: cfg.fock_cutoff,
        check_cutoff: cfg.check_cutoff,
        jobs: cfg.jobs,
    };
    let res: SweepResult = crate::analysis::sweep_b(&sweep).map_err(|e| match e {
        Error::Argument(m) => usage(m),
        e => e,
    })?;
    match &cfg.output {
        Some(path) => {
            let mut w = open_output(path)?;
            match cfg.format {
                OutputFormat::Csv => res.write_csv(&mut w)?,
                OutputFormat::Jsonl => res.write_jsonl(&mut w)?,
            }
            w.flush()?;
            writeln!(out, "{} rows written to {}", res.rows.len(), path.display())?;
        }
        None => match cfg.format {
            OutputFormat::Csv => res.write_csv(&mut *out)?,
            OutputFormat::Jsonl => res.write_jsonl(&mut *out)?,
        },
    }
    Ok(if res.any_failed() {
        EXIT_NUMERICAL
    } else if res.any_unconverged() {
        EXIT_UNCONVERGED
    } else {
        EXIT_OK
    })
}

fn cmd_budget(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let params = cfg.params(cfg.n)?;
    let report = decoherence_budget(&params, cfg.n)?;
    write!(out, "{report}")?;
    Ok(EXIT_OK)
}

fn cmd_schedule(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let params = cfg.params(cfg.n)?;
    let schedule = build_schedule(cfg.n, &params)?;
    writeln!(out, "{:>3} {:<28} {:>14} {:>14} {:>14}", "#", "segment", "duration[s]", "t_start[s]", "t_end[s]")?;
    let mut t = 0.0;
    if cfg.mode != SimulationMode::IdealResonant {
        let prep = preparation_segment(&params);
        writeln!(out, "{:>3} {:<28} {:>14.6e} {:>14} {:>14}", "-", prep.label, prep.duration, "-", "-")?;
    }
    for (k, seg) in schedule.segments.iter().enumerate() {
        let end = t + seg.duration;
        writeln!(out, "{:>3} {:<28} {:>14.6e} {:>14.6e} {:>14.6e}", k, seg.label, seg.duration, t, end)?;
        t = end;
    }
    writeln!(out, "total = {:.6e} s", schedule.total_duration())?;
    Ok(EXIT_OK)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Argument(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// Run the CLI on `args` (program name first) and return the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let result = collect_settings(sub).and_then(|raw| {
        let cfg = RunConfig::from_map(raw)?;
        if let Some(path) = sub.get_one::<String>("dump_config") {
            std::fs::write(path, cfg.to_config_text())?;
        }
        match name {
            "run" => cmd_run(&cfg, out),
            "sweep" => cmd_sweep(&cfg, out),
            "budget" => cmd_budget(&cfg, out),
            "schedule" => cmd_schedule(&cfg, out),
            _ => unreachable!("unknown subcommand"),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    main_with_args(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(std::iter::once("cavity-ghz").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn config_parsing() {
        let m = parse_config("# comment\nn = 3\nfock-cutoff = 2 # trailing\n\n").unwrap();
        assert_eq!(m["n"], "3");
        assert_eq!(m["fock_cutoff"], "2");
        assert!(parse_config("bogus = 1").is_err());
        assert!(parse_config("n 3").is_err());
    }

    #[test]
    fn b_ranges() {
        let v = parse_b_list("40:100:5").unwrap();
        assert_eq!(v.len(), 13);
        assert_eq!(v[12], 100.0);
        assert_eq!(parse_b_list("10, 20").unwrap(), vec![10.0, 20.0]);
        assert!(parse_b_list("10:5:1").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(&["run", "--n", "1"]).0, EXIT_USAGE);
        assert_eq!(run(&["run", "--mode", "quantum"]).0, EXIT_USAGE);
        assert_eq!(run(&["run", "--preset", "custom"]).0, EXIT_USAGE);
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run(&["budget", "--n", "3", "--kappa", "1,2"]).0, EXIT_USAGE);
    }

    #[test]
    fn ideal_run_prints_unit_fidelity() {
        let (code, out, _) = run(&["run", "--n", "2", "--b", "50", "--mode", "ideal"]);
        assert_eq!(code, EXIT_OK);
        let f: f64 = out
            .lines()
            .find_map(|l| l.strip_prefix("fidelity = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!(f > 1.0 - 1e-6);
    }

    #[test]
    fn budget_reports() {
        let (code, out, _) = run(&["budget", "--preset", "rydberg_atom", "--n", "10"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("tau = 7.5000e-5 s"), "{out}");
        let (_, out, _) = run(&["budget", "--n", "4", "--b", "85"]);
        assert!(out.contains("Q = 7.9168e5"), "{out}");
    }

    #[test]
    fn custom_preset_round_trips_through_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("cfg.txt");
        let text = "preset = custom\nn = 2\nmode = ideal\nomega_10 = 6.8e9\nomega_21 = 6.3e9\n\
                    omega_c_active = 6.3e9\nomega_c_idle = 5.6e9\ng = 10e6\ng_prime = 0\ng_tilde = 0\n\
                    g_tilde_prime = 0\nrabi_21 = 70e6\nrabi_20 = 200e6\nrabi_10 = 0\ndelta_mu_w = 500e6\n\
                    t_d = 1e-9\nkappa = 0\ngamma_phi_21 = 0\ngamma_phi_20 = 0\ngamma_phi_10 = 0\n\
                    gamma_21 = 0\ngamma_20 = 0\ngamma_10 = 0\n";
        std::fs::write(&cfg_path, text).unwrap();
        let dump = dir.path().join("dump.txt");
        let (code, first, err) = run(&[
            "run",
            "--config",
            cfg_path.to_str().unwrap(),
            "--dump-config",
            dump.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        let (code, second, _) = run(&["run", "--config", dump.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(first, second);
    }

    #[test]
    fn schedule_table() {
        let (code, out, _) = run(&["schedule", "--n", "3", "--mode", "ideal"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("step2:pulse20(phi=-pi/2)"));
        assert_eq!(out.lines().filter(|l| l.contains("step")).count(), 12);
    }
}
