//! Run configuration and its flat `key = value` text form.
//!
//! All physical quantities are in units of the cutoff frequency `ω_c`.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::bath::{discretize_bath, DiscreteBath, SpectralParams};
use crate::deviation::BathAverage;
use crate::dynamics::IntegratorConfig;
use crate::state::InitialCondition;
use crate::{Error, Result};

/// Mode count of the full-scale profile.
pub const FULL_SCALE_MODES: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spectral: SpectralParams,
    pub n_modes: usize,
    pub omega_max: f64,
    pub delta: f64,
    pub initial_condition: InitialCondition,
    pub integrator: IntegratorConfig,
    pub compute_sigma: bool,
    pub bath_average: BathAverage,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    /// Desk-scale profile: 2000 modes up to `4 ω_c`, `Δ = 0.1`, `t_max = 40`.
    fn default() -> Self {
        RunConfig {
            spectral: SpectralParams {
                s: 0.25,
                alpha: 0.1,
                omega_c: 1.0,
            },
            n_modes: 2000,
            omega_max: 4.0,
            delta: 0.1,
            initial_condition: InitialCondition::Factorized,
            integrator: IntegratorConfig::default(),
            compute_sigma: false,
            bath_average: BathAverage::FullInterval,
            output_path: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "s",
    "alpha",
    "omega_c",
    "n_modes",
    "omega_max",
    "delta",
    "initial_condition",
    "dt",
    "t_max",
    "record_every",
    "epsilon_amp",
    "norm_tolerance",
    "compute_sigma",
    "bath_average",
    "output",
];

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("`{key}` expects a number, got `{value}`")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("`{key}` expects a non-negative integer, got `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("`{key}` expects true or false, got `{value}`"))),
    }
}

impl RunConfig {
    pub fn full_scale() -> Self {
        RunConfig {
            n_modes: FULL_SCALE_MODES,
            ..Default::default()
        }
    }

    /// Parse a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    /// Set one field from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "s" => self.spectral.s = parse_f64(key, value)?,
            "alpha" => self.spectral.alpha = parse_f64(key, value)?,
            "omega_c" => self.spectral.omega_c = parse_f64(key, value)?,
            "n_modes" => self.n_modes = parse_usize(key, value)?,
            "omega_max" => self.omega_max = parse_f64(key, value)?,
            "delta" => self.delta = parse_f64(key, value)?,
            "initial_condition" => self.initial_condition = value.parse()?,
            "dt" => self.integrator.dt = parse_f64(key, value)?,
            "t_max" => self.integrator.t_max = parse_f64(key, value)?,
            "record_every" => self.integrator.record_every = parse_usize(key, value)?,
            "epsilon_amp" => self.integrator.epsilon_amp = parse_f64(key, value)?,
            "norm_tolerance" => self.integrator.norm_tolerance = parse_f64(key, value)?,
            "compute_sigma" => self.compute_sigma = parse_bool(key, value)?,
            "bath_average" => self.bath_average = value.parse()?,
            "output" => self.output_path = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Every field as `key = value` lines that [`RunConfig::parse`] reads
    /// back to an identical config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let i = &self.integrator;
        let _ = writeln!(s, "s = {}", self.spectral.s);
        let _ = writeln!(s, "alpha = {}", self.spectral.alpha);
        let _ = writeln!(s, "omega_c = {}", self.spectral.omega_c);
        let _ = writeln!(s, "n_modes = {}", self.n_modes);
        let _ = writeln!(s, "omega_max = {}", self.omega_max);
        let _ = writeln!(s, "delta = {}", self.delta);
        let _ = writeln!(s, "initial_condition = {}", self.initial_condition);
        let _ = writeln!(s, "dt = {}", i.dt);
        let _ = writeln!(s, "t_max = {}", i.t_max);
        let _ = writeln!(s, "record_every = {}", i.record_every);
        let _ = writeln!(s, "epsilon_amp = {}", i.epsilon_amp);
        let _ = writeln!(s, "norm_tolerance = {}", i.norm_tolerance);
        let _ = writeln!(s, "compute_sigma = {}", self.compute_sigma);
        let _ = writeln!(s, "bath_average = {}", self.bath_average.as_str());
        if let Some(p) = &self.output_path {
            let _ = writeln!(s, "output = {}", p.display());
        }
        s
    }

    pub fn bath(&self) -> Result<DiscreteBath> {
        discretize_bath(&self.spectral, self.n_modes, self.omega_max)
    }

    /// Check every invariant and return the implied bath.
    pub fn validate(&self) -> Result<DiscreteBath> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!("delta must be > 0, got {}", self.delta)));
        }
        let bath = self.bath().map_err(|e| Error::Config(e.to_string()))?;
        self.integrator
            .validate(&bath)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.integrator.t_max >= bath.recurrence_time() {
            return Err(Error::Config(format!(
                "t_max = {} must stay below the recurrence time {:.4} (raise n_modes)",
                self.integrator.t_max,
                bath.recurrence_time()
            )));
        }
        Ok(bath)
    }

    /// True if `self` and `other` agree on everything except the initial
    /// condition and output path.
    pub fn same_physics_except_initial(&self, other: &RunConfig) -> bool {
        let strip = |c: &RunConfig| RunConfig {
            initial_condition: InitialCondition::Factorized,
            output_path: None,
            ..c.clone()
        };
        strip(self) == strip(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::full_scale();
        cfg.spectral.alpha = 0.0286;
        cfg.initial_condition = InitialCondition::Polarized;
        cfg.integrator.dt = 0.005;
        cfg.compute_sigma = true;
        cfg.bath_average = BathAverage::Running;
        cfg.output_path = Some("runs/a.csv".into());
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn parse_comments_and_errors() {
        let cfg = RunConfig::parse("# sweep base\nalpha = 0.2  # strong\n\nn_modes=500\n").unwrap();
        assert_eq!(cfg.spectral.alpha, 0.2);
        assert_eq!(cfg.n_modes, 500);
        assert!(RunConfig::parse("alpha 0.2").is_err());
        assert!(RunConfig::parse("beta = 1").is_err());
        assert!(RunConfig::parse("n_modes = -3").is_err());
        assert!(RunConfig::parse("compute_sigma = maybe").is_err());
    }

    #[test]
    fn validation() {
        RunConfig::default().validate().unwrap();
        let mut c = RunConfig::default();
        c.delta = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.n_modes = 10; // T_p = 5π
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.integrator.dt = 0.5;
        assert!(c.validate().is_err());
    }
}
