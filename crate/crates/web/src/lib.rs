//! Browser bindings: bath profile, single trajectories and the
//! factorized/polarized comparison.

use spinboson::analysis::steady_value;
use spinboson::bath::{reorganization_energy, spectral_density, SpectralParams};
use spinboson::config::RunConfig;
use spinboson::dynamics::{classify_dynamics, integrate, Trajectory, DEFAULT_PROMINENCE};
use spinboson::state::{init_state, InitialCondition};
use wasm_bindgen::prelude::*;

const DENSITY_POINTS: usize = 400;

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct BathProfile {
    omega: Vec<f64>,
    density: Vec<f64>,
    frequencies: Vec<f64>,
    couplings: Vec<f64>,
    reorganization_energy: f64,
    discrete_reorganization_energy: f64,
    recurrence_time: f64,
}

#[wasm_bindgen]
impl BathProfile {
    /// Grid for the continuous `J(ω)` curve.
    #[wasm_bindgen(getter)]
    pub fn omega(&self) -> Vec<f64> {
        self.omega.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn frequencies(&self) -> Vec<f64> {
        self.frequencies.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn couplings(&self) -> Vec<f64> {
        self.couplings.clone()
    }

    #[wasm_bindgen(getter, js_name = reorganizationEnergy)]
    pub fn reorganization_energy(&self) -> f64 {
        self.reorganization_energy
    }

    #[wasm_bindgen(getter, js_name = discreteReorganizationEnergy)]
    pub fn discrete_reorganization_energy(&self) -> f64 {
        self.discrete_reorganization_energy
    }

    #[wasm_bindgen(getter, js_name = recurrenceTime)]
    pub fn recurrence_time(&self) -> f64 {
        self.recurrence_time
    }
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Dynamics {
    times: Vec<f64>,
    p_z: Vec<f64>,
    entropy: Vec<f64>,
    classification: String,
    steady_p_z: f64,
    steady_entropy: f64,
}

#[wasm_bindgen]
impl Dynamics {
    #[wasm_bindgen(getter)]
    pub fn times(&self) -> Vec<f64> {
        self.times.clone()
    }

    #[wasm_bindgen(getter, js_name = pZ)]
    pub fn p_z(&self) -> Vec<f64> {
        self.p_z.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn entropy(&self) -> Vec<f64> {
        self.entropy.clone()
    }

    /// `coherent`, `incoherent`, or `unclassified` for windows shorter
    /// than five bare Rabi periods.
    #[wasm_bindgen(getter)]
    pub fn classification(&self) -> String {
        self.classification.clone()
    }

    #[wasm_bindgen(getter, js_name = steadyPZ)]
    pub fn steady_p_z(&self) -> f64 {
        self.steady_p_z
    }

    #[wasm_bindgen(getter, js_name = steadyEntropy)]
    pub fn steady_entropy(&self) -> f64 {
        self.steady_entropy
    }
}

#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Contrast {
    factorized: Dynamics,
    polarized: Dynamics,
    max_abs_difference: f64,
}

#[wasm_bindgen]
impl Contrast {
    #[wasm_bindgen(getter)]
    pub fn factorized(&self) -> Dynamics {
        self.factorized.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn polarized(&self) -> Dynamics {
        self.polarized.clone()
    }

    #[wasm_bindgen(getter, js_name = maxAbsDifference)]
    pub fn max_abs_difference(&self) -> f64 {
        self.max_abs_difference
    }
}

fn demo_config(s: f64, alpha: f64, delta: f64, n_modes: usize, t_max: f64) -> RunConfig {
    let mut c = RunConfig::default();
    c.spectral = SpectralParams { s, alpha, omega_c: 1.0 };
    c.delta = delta;
    c.n_modes = n_modes;
    c.integrator.t_max = t_max;
    c.integrator.record_every = 20;
    c
}

pub fn try_bath_profile(s: f64, alpha: f64, n_modes: usize, omega_max: f64) -> Result<BathProfile, String> {
    let mut c = demo_config(s, alpha, 0.1, n_modes, 0.0);
    c.omega_max = omega_max;
    let bath = c.bath().map_err(|e| e.to_string())?;
    let omega: Vec<f64> = (1..=DENSITY_POINTS)
        .map(|k| omega_max * k as f64 / DENSITY_POINTS as f64)
        .collect();
    let density = omega
        .iter()
        .map(|&w| spectral_density(w, &c.spectral))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    Ok(BathProfile {
        omega,
        density,
        frequencies: bath.frequencies().to_vec(),
        couplings: bath.couplings().to_vec(),
        reorganization_energy: reorganization_energy(&c.spectral).map_err(|e| e.to_string())?,
        discrete_reorganization_energy: bath.reorganization_energy(),
        recurrence_time: bath.recurrence_time(),
    })
}

fn summarize(traj: &Trajectory, delta: f64) -> Dynamics {
    let times = traj.times();
    let p_z = traj.column(|r| r.p_z);
    let entropy = traj.column(|r| r.entropy);
    let classification = classify_dynamics(&times, &p_z, delta, DEFAULT_PROMINENCE)
        .map(|c| c.as_str())
        .unwrap_or("unclassified")
        .to_string();
    Dynamics {
        steady_p_z: steady_value(&times, &p_z),
        steady_entropy: steady_value(&times, &entropy),
        times,
        p_z,
        entropy,
        classification,
    }
}

fn trajectory(config: &RunConfig) -> Result<Dynamics, String> {
    let bath = config.validate().map_err(|e| e.to_string())?;
    let initial = init_state(config.initial_condition, &bath);
    let traj = integrate(&initial, &bath, config.delta, &config.integrator, None, |_| {}).map_err(|e| e.to_string())?;
    Ok(summarize(&traj, config.delta))
}

pub fn try_run_dynamics(
    s: f64,
    alpha: f64,
    delta: f64,
    polarized: bool,
    n_modes: usize,
    t_max: f64,
) -> Result<Dynamics, String> {
    let mut c = demo_config(s, alpha, delta, n_modes, t_max);
    c.initial_condition = if polarized {
        InitialCondition::Polarized
    } else {
        InitialCondition::Factorized
    };
    trajectory(&c)
}

pub fn try_compare(s: f64, alpha: f64, delta: f64, n_modes: usize, t_max: f64) -> Result<Contrast, String> {
    let factorized = try_run_dynamics(s, alpha, delta, false, n_modes, t_max)?;
    let polarized = try_run_dynamics(s, alpha, delta, true, n_modes, t_max)?;
    let max_abs_difference = factorized
        .p_z
        .iter()
        .zip(&polarized.p_z)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(Contrast {
        factorized,
        polarized,
        max_abs_difference,
    })
}

/// Spectral density curve and the discretized couplings.
#[wasm_bindgen(js_name = bathProfile)]
pub fn bath_profile(s: f64, alpha: f64, n_modes: usize, omega_max: f64) -> Result<BathProfile, JsError> {
    try_bath_profile(s, alpha, n_modes, omega_max).map_err(|e| JsError::new(&e))
}

/// One trajectory starting from `|+⟩`.
#[wasm_bindgen(js_name = runDynamics)]
pub fn run_dynamics(
    s: f64,
    alpha: f64,
    delta: f64,
    polarized: bool,
    n_modes: usize,
    t_max: f64,
) -> Result<Dynamics, JsError> {
    try_run_dynamics(s, alpha, delta, polarized, n_modes, t_max).map_err(|e| JsError::new(&e))
}

/// Factorized and polarized runs of the same parameters.
#[wasm_bindgen(js_name = compareInitialConditions)]
pub fn compare_initial_conditions(s: f64, alpha: f64, delta: f64, n_modes: usize, t_max: f64) -> Result<Contrast, JsError> {
    try_compare(s, alpha, delta, n_modes, t_max).map_err(|e| JsError::new(&e))
}
