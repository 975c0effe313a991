//! Single runs, parameter sweeps, initial-condition comparisons and the
//! small-bath oracle check, with their on-disk outputs.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::analysis::steady_value;
use crate::bath::reorganization_energy;
use crate::config::RunConfig;
use crate::dynamics::{classify_dynamics, eom_rhs, integrate, DynamicsClass, Trajectory, DEFAULT_PROMINENCE};
use crate::state::{init_state, InitialCondition};
use crate::table::{self, fmt_num};
use crate::{deviation, oracle, Error, Result};

/// Environment variable capping the number of sweep workers.
pub const THREADS_ENV: &str = "SPINBOSON_THREADS";

/// Size the global worker pool from [`THREADS_ENV`], if set.
pub fn configure_threads_from_env() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    if n == 0 {
        return Err(Error::Config(format!("{THREADS_ENV} must be >= 1")));
    }
    #[cfg(feature = "parallel")]
    {
        // a second call keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub trajectory: Trajectory,
    pub recurrence_time: f64,
    pub reorganization_energy: f64,
    pub discrete_reorganization_energy: f64,
    pub wall_time: f64,
}

impl RunOutcome {
    pub fn times(&self) -> Vec<f64> {
        self.trajectory.times()
    }

    pub fn p_z(&self) -> Vec<f64> {
        self.trajectory.column(|r| r.p_z)
    }

    /// `None` when the window is too short to classify.
    pub fn classification(&self) -> Option<DynamicsClass> {
        classify_dynamics(&self.times(), &self.p_z(), self.config.delta, DEFAULT_PROMINENCE).ok()
    }

    pub fn steady_p_z(&self) -> f64 {
        steady_value(&self.times(), &self.p_z())
    }

    pub fn steady_entropy(&self) -> f64 {
        steady_value(&self.times(), &self.trajectory.column(|r| r.entropy))
    }

    /// Mean σ over the final quarter; `NaN` without σ.
    pub fn sigma_saturation(&self) -> f64 {
        if !self.config.compute_sigma {
            return f64::NAN;
        }
        steady_value(&self.times(), &self.trajectory.column(|r| r.sigma))
    }

    /// Header lines for the trajectory table. Everything here is a pure
    /// function of the config, so reruns produce identical tables.
    pub fn header(&self) -> Vec<(String, String)> {
        let mut h: Vec<(String, String)> = self
            .config
            .to_text()
            .lines()
            .filter_map(|l| l.split_once(" = "))
            .filter(|(k, _)| *k != "output")
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        h.push(("recurrence_time".into(), fmt_num(self.recurrence_time)));
        h.push(("reorganization_energy".into(), fmt_num(self.reorganization_energy)));
        h.push((
            "discrete_reorganization_energy".into(),
            fmt_num(self.discrete_reorganization_energy),
        ));
        h.push(("regularization_events".into(), self.trajectory.regularization_events.to_string()));
        if let Some(e) = self.trajectory.mean_bath_energy {
            h.push(("mean_bath_energy".into(), fmt_num(e)));
        }
        h
    }

    /// Sidecar: the config as a loadable file, followed by derived values
    /// as comments.
    pub fn sidecar(&self) -> String {
        let mut s = format!("# schema = {}\n", table::SCHEMA);
        s.push_str(&self.config.to_text());
        let _ = writeln!(s, "# recurrence_time = {}", fmt_num(self.recurrence_time));
        let _ = writeln!(s, "# reorganization_energy = {}", fmt_num(self.reorganization_energy));
        let _ = writeln!(
            s,
            "# discrete_reorganization_energy = {}",
            fmt_num(self.discrete_reorganization_energy)
        );
        let _ = writeln!(s, "# regularization_events = {}", self.trajectory.regularization_events);
        for w in &self.trajectory.warnings {
            let _ = writeln!(s, "# warning = {w}");
        }
        let _ = writeln!(s, "# wall_time_s = {:.3}", self.wall_time);
        s
    }
}

/// Run one trajectory in memory.
pub fn simulate(config: &RunConfig) -> Result<RunOutcome> {
    let bath = config.validate()?;
    let start = Instant::now();
    let initial = init_state(config.initial_condition, &bath);
    let sigma = config.compute_sigma.then_some(config.bath_average);
    let trajectory = integrate(&initial, &bath, config.delta, &config.integrator, sigma, |_| {})?;
    Ok(RunOutcome {
        config: config.clone(),
        trajectory,
        recurrence_time: bath.recurrence_time(),
        reorganization_energy: reorganization_energy(&config.spectral)?,
        discrete_reorganization_energy: bath.reorganization_energy(),
        wall_time: start.elapsed().as_secs_f64(),
    })
}

pub fn sidecar_path(table_path: &Path) -> PathBuf {
    let mut name = table_path.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

/// Run and write the table plus its `.meta` sidecar to `config.output_path`.
pub fn run(config: &RunConfig, force: bool) -> Result<RunOutcome> {
    let path = config
        .output_path
        .clone()
        .ok_or_else(|| Error::Config("no output path given".into()))?;
    let meta = sidecar_path(&path);
    for p in [&path, &meta] {
        if p.exists() && !force {
            return Err(Error::WouldOverwrite(p.display().to_string()));
        }
    }
    let outcome = simulate(config)?;
    write_outcome(&outcome, &path, force)?;
    Ok(outcome)
}

fn write_outcome(outcome: &RunOutcome, path: &Path, force: bool) -> Result<()> {
    table::write_trajectory(path, &outcome.header(), &outcome.trajectory.records, force)?;
    let meta = sidecar_path(path);
    let mut f = table::create(&meta, force)?;
    f.write_all(outcome.sidecar().as_bytes()).map_err(|e| Error::io(&meta, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Alpha,
    S,
    Delta,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::S => "s",
            SweepParameter::Delta => "delta",
        }
    }

    pub fn apply(self, config: &mut RunConfig, value: f64) {
        match self {
            SweepParameter::Alpha => config.spectral.alpha = value,
            SweepParameter::S => config.spectral.s = value,
            SweepParameter::Delta => config.delta = value,
        }
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParameter::Alpha),
            "s" => Ok(SweepParameter::S),
            "delta" => Ok(SweepParameter::Delta),
            _ => Err(Error::Config(format!("cannot sweep `{s}` (alpha, s or delta)"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    /// `Err` holds the failure message of that point.
    pub result: std::result::Result<SweepPoint, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub classification: Option<DynamicsClass>,
    pub steady_p_z: f64,
    pub steady_entropy: f64,
    pub sigma_saturation: f64,
    pub table_path: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
}

impl SweepSummary {
    pub fn render(&self) -> String {
        let mut s = format!("# schema = spinboson-sweep/1\n# parameter = {}\n", self.parameter.as_str());
        s.push_str("value,status,classification,steady_p_z,steady_entropy,sigma_saturation\n");
        for row in &self.rows {
            match &row.result {
                Ok(p) => {
                    let class = p.classification.map_or("unclassified", DynamicsClass::as_str);
                    let _ = writeln!(
                        s,
                        "{},ok,{class},{},{},{}",
                        fmt_num(row.value),
                        fmt_num(p.steady_p_z),
                        fmt_num(p.steady_entropy),
                        fmt_num(p.sigma_saturation)
                    );
                }
                Err(msg) => {
                    let _ = writeln!(s, "{},\"error: {}\",,,,", fmt_num(row.value), msg.replace('"', "'"));
                }
            }
        }
        s
    }
}

fn map_points<T: Send, R: Send>(items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Run `base` once per value of `parameter`. With `out_dir`, each run is
/// written as `<param>_<value>.csv` and the summary as `summary.csv`.
/// A failing point is recorded and the others continue.
pub fn sweep(
    base: &RunConfig,
    parameter: SweepParameter,
    values: &[f64],
    out_dir: Option<&Path>,
    force: bool,
) -> Result<SweepSummary> {
    if let Some(dir) = out_dir {
        let summary = dir.join("summary.csv");
        if summary.exists() && !force {
            return Err(Error::WouldOverwrite(summary.display().to_string()));
        }
    }
    let rows = map_points(values.to_vec(), |value| {
        let mut cfg = base.clone();
        parameter.apply(&mut cfg, value);
        cfg.output_path = out_dir.map(|d| d.join(format!("{}_{}.csv", parameter.as_str(), value)));
        let result = simulate(&cfg).and_then(|out| {
            if let Some(p) = &cfg.output_path {
                write_outcome(&out, p, force)?;
            }
            Ok(SweepPoint {
                classification: out.classification(),
                steady_p_z: out.steady_p_z(),
                steady_entropy: out.steady_entropy(),
                sigma_saturation: out.sigma_saturation(),
                table_path: cfg.output_path.clone(),
            })
        });
        SweepRow {
            value,
            result: result.map_err(|e| e.to_string()),
        }
    });
    let summary = SweepSummary { parameter, rows };
    if let Some(dir) = out_dir {
        let path = dir.join("summary.csv");
        let mut f = table::create(&path, force)?;
        f.write_all(summary.render().as_bytes()).map_err(|e| Error::io(&path, e))?;
    }
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub times: Vec<f64>,
    pub p_z_factorized: Vec<f64>,
    pub p_z_polarized: Vec<f64>,
    pub max_abs_difference: f64,
    pub integrated_abs_difference: f64,
    pub factorized: RunOutcome,
    pub polarized: RunOutcome,
}

impl Comparison {
    pub fn render(&self) -> String {
        let mut s = String::from("# schema = spinboson-compare/1\n");
        let _ = writeln!(s, "# max_abs_difference = {}", fmt_num(self.max_abs_difference));
        let _ = writeln!(s, "# integrated_abs_difference = {}", fmt_num(self.integrated_abs_difference));
        s.push_str("t,p_z_factorized,p_z_polarized\n");
        for k in 0..self.times.len() {
            let _ = writeln!(
                s,
                "{},{},{}",
                fmt_num(self.times[k]),
                fmt_num(self.p_z_factorized[k]),
                fmt_num(self.p_z_polarized[k])
            );
        }
        s
    }
}

/// Run the factorized and polarized variants of otherwise identical
/// configs and align their `P_z` traces.
pub fn compare_initial_conditions(factorized: &RunConfig, polarized: &RunConfig) -> Result<Comparison> {
    if factorized.initial_condition != InitialCondition::Factorized
        || polarized.initial_condition != InitialCondition::Polarized
    {
        return Err(Error::Config("expected one factorized and one polarized config".into()));
    }
    if !factorized.same_physics_except_initial(polarized) {
        return Err(Error::Config(
            "configs to compare must differ only in the initial condition".into(),
        ));
    }
    let mut outcomes = map_points(vec![factorized.clone(), polarized.clone()], |c| simulate(&c));
    let pol = outcomes.pop().expect("two runs")?;
    let fac = outcomes.pop().expect("two runs")?;
    let times = fac.times();
    let (pf, pp) = (fac.p_z(), pol.p_z());
    let diff: Vec<f64> = pf.iter().zip(&pp).map(|(a, b)| (a - b).abs()).collect();
    let max_abs_difference = diff.iter().copied().fold(0.0, f64::max);
    let span = times.last().copied().unwrap_or(0.0) - times.first().copied().unwrap_or(0.0);
    let integrated_abs_difference = deviation::time_average(&times, &diff) * span;
    Ok(Comparison {
        times,
        p_z_factorized: pf,
        p_z_polarized: pp,
        max_abs_difference,
        integrated_abs_difference,
        factorized: fac,
        polarized: pol,
    })
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub n_modes: usize,
    pub n_max: usize,
    pub dim: usize,
    pub max_p_z_difference: f64,
    /// Largest relative mismatch of `⟨δ|δ⟩` over the sampled points.
    pub max_deviation_mismatch: f64,
    pub samples: usize,
    pub truncation_defect: f64,
    pub warnings: Vec<String>,
}

/// Propagate the config's (small) bath both variationally and exactly and
/// compare `P_z` and the residual norm at every record.
pub fn oracle_check(config: &RunConfig, n_max: usize) -> Result<OracleReport> {
    let bath = config.validate()?;
    let system = oracle::build_hamiltonian(&bath, n_max, config.delta)?;
    let record_dt = config.integrator.dt * config.integrator.record_every as f64;
    let t_max = config.integrator.n_steps() as f64 * config.integrator.dt;
    let initial = init_state(config.initial_condition, &bath);

    let mut states = Vec::new();
    let mut cfg = config.integrator.clone();
    cfg.t_max = t_max;
    // replay the run, keeping the states at the record points
    let mut state = initial.clone();
    let mut rk = crate::dynamics::Rk4::new(bath.len());
    let n_steps = cfg.n_steps();
    for step in 0..=n_steps {
        if step % cfg.record_every == 0 {
            let mut s = state.clone();
            s.t = step as f64 * cfg.dt;
            states.push(s);
        }
        if step < n_steps {
            rk.step(&mut state, &bath, config.delta, cfg.epsilon_amp, cfg.dt);
        }
    }
    let exact = oracle::exact_propagate(&system, config.initial_condition, record_dt, states.last().map_or(0.0, |s| s.t))?;

    let mut max_p_z_difference: f64 = 0.0;
    let mut max_mismatch: f64 = 0.0;
    let mut defect: f64 = exact.truncation_defect;
    for (st, ex) in states.iter().zip(&exact.records) {
        max_p_z_difference = max_p_z_difference.max((crate::state::observables(st).p_z - ex.p_z).abs());
        let d = eom_rhs(st, &bath, config.delta, cfg.epsilon_amp)?;
        let closed = deviation::deviation_norm_squared(st, &d, &bath, config.delta)?;
        let brute = oracle::exact_deviation(&system, st, &d)?;
        defect = defect.max(brute.truncation_defect);
        let scale = brute.value.abs().max(1e-300);
        if brute.value > 1e-20 || closed > 1e-20 {
            max_mismatch = max_mismatch.max((closed - brute.value).abs() / scale);
        }
    }
    Ok(OracleReport {
        n_modes: bath.len(),
        n_max,
        dim: system.dim,
        max_p_z_difference,
        max_deviation_mismatch: max_mismatch,
        samples: states.len().min(exact.records.len()),
        truncation_defect: defect,
        warnings: exact.warnings,
    })
}
