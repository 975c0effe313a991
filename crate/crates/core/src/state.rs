//! The two-branch coherent-state trial state and its static functionals.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::bath::DiscreteBath;
use crate::{Error, Result};

/// Bath preparation at `t = 0`. The spin always starts in `|+⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialCondition {
    /// Bath in its vacuum: `f = g = 0`.
    Factorized,
    /// Bath relaxed around the `|+⟩` spin: `f = g = -λ/(2ω)`.
    Polarized,
}

impl InitialCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            InitialCondition::Factorized => "factorized",
            InitialCondition::Polarized => "polarized",
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitialCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "factorized" | "factorised" => Ok(InitialCondition::Factorized),
            "polarized" | "polarised" => Ok(InitialCondition::Polarized),
            other => Err(Error::Config(format!(
                "unknown initial condition `{other}` (expected factorized or polarized)"
            ))),
        }
    }
}

/// `|D⟩ = A|+⟩|f⟩ + B|−⟩|g⟩` with `|f⟩ = exp(Σ f_l b_l† − h.c.)|0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    pub a: Complex64,
    pub b: Complex64,
    pub f: Vec<Complex64>,
    pub g: Vec<Complex64>,
    pub t: f64,
}

impl VariationalState {
    pub fn new(a: Complex64, b: Complex64, f: Vec<Complex64>, g: Vec<Complex64>) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::InvalidParameter(format!(
                "displacement vectors differ in length ({} vs {})",
                f.len(),
                g.len()
            )));
        }
        Ok(VariationalState { a, b, f, g, t: 0.0 })
    }

    pub fn n_modes(&self) -> usize {
        self.f.len()
    }

    /// `|A|² + |B|²`, which equals `⟨D|D⟩`.
    pub fn norm(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    /// Multiply both spin amplitudes by `exp(iφ)`.
    pub fn with_global_phase(&self, phi: f64) -> Self {
        let u = Complex64::from_polar(1.0, phi);
        VariationalState {
            a: self.a * u,
            b: self.b * u,
            ..self.clone()
        }
    }

    pub(crate) fn check_bath(&self, bath: &DiscreteBath) -> Result<()> {
        if self.f.len() != bath.len() || self.g.len() != bath.len() {
            return Err(Error::InvalidParameter(format!(
                "state has {} modes but bath has {}",
                self.f.len(),
                bath.len()
            )));
        }
        Ok(())
    }
}

pub fn init_state(condition: InitialCondition, bath: &DiscreteBath) -> VariationalState {
    let disp: Vec<Complex64> = match condition {
        InitialCondition::Factorized => vec![Complex64::new(0.0, 0.0); bath.len()],
        InitialCondition::Polarized => bath
            .modes()
            .map(|(w, l)| Complex64::new(-l / (2.0 * w), 0.0))
            .collect(),
    };
    VariationalState {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        f: disp.clone(),
        g: disp,
        t: 0.0,
    }
}

/// `E = Σ_l [f_l* g_l − (|f_l|² + |g_l|²)/2]`, so that `⟨f|g⟩ = exp(E)`.
///
/// The overlap is always carried in this log form; `Re E` reaches large
/// negative values at strong coupling.
pub fn overlap_exponent(state: &VariationalState) -> Complex64 {
    state
        .f
        .iter()
        .zip(&state.g)
        .fold(Complex64::new(0.0, 0.0), |acc, (f, g)| {
            acc + f.conj() * g - 0.5 * (f.norm_sqr() + g.norm_sqr())
        })
}

/// `Σ_l |f_l − g_l|² = −2 Re E`, evaluated directly.
pub fn displacement_distance_sq(state: &VariationalState) -> f64 {
    state.f.iter().zip(&state.g).map(|(f, g)| (f - g).norm_sqr()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinObservables {
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

/// Spin expectations. `P_x + i P_y = 2 A* B ⟨f|g⟩`.
pub fn observables(state: &VariationalState) -> SpinObservables {
    spin_from_overlap(state, overlap_exponent(state))
}

pub(crate) fn spin_from_overlap(state: &VariationalState, exponent: Complex64) -> SpinObservables {
    let coherence = 2.0 * state.a.conj() * state.b * exponent.exp();
    SpinObservables {
        p_x: coherence.re,
        p_y: coherence.im,
        p_z: state.a.norm_sqr() - state.b.norm_sqr(),
    }
}

const BOUNDARY: f64 = 1e-15;

fn neg_x_ln_x(x: f64) -> f64 {
    if x <= BOUNDARY {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Entanglement entropy of the spin with the bath, in nats.
pub fn entropy(state: &VariationalState) -> Result<f64> {
    entropy_from_parts(
        state.a.norm_sqr(),
        state.b.norm_sqr(),
        displacement_distance_sq(state),
    )
}

/// Entropy of the reduced spin state given `|A|²`, `|B|²` and `Σ|f−g|²`.
pub fn entropy_from_parts(a_sq: f64, b_sq: f64, distance_sq: f64) -> Result<f64> {
    // 1 - arg = 4|A|²|B|² (1 - e^{-d}) ≥ 0
    let defect = -4.0 * a_sq * b_sq * (-distance_sq).exp_m1();
    let arg = 1.0 - defect;
    if arg < -1e-12 {
        return Err(Error::Consistency(format!(
            "negative purity discriminant {arg:e} in entropy"
        )));
    }
    let root = arg.max(0.0).sqrt();
    // ω₋ = (1 − √arg)/2 written without the cancellation
    let w_minus = (defect / (2.0 * (1.0 + root))).clamp(0.0, 0.5);
    let w_plus = 1.0 - w_minus;
    let plus_term = if w_minus <= BOUNDARY {
        0.0
    } else {
        -w_plus * (-w_minus).ln_1p()
    };
    Ok(plus_term + neg_x_ln_x(w_minus))
}

/// `Σ_l ω_l (|A|²|f_l|² + |B|²|g_l|²)`.
pub fn bath_energy(state: &VariationalState, bath: &DiscreteBath) -> f64 {
    let (a2, b2) = (state.a.norm_sqr(), state.b.norm_sqr());
    bath.frequencies()
        .iter()
        .zip(state.f.iter().zip(&state.g))
        .map(|(w, (f, g))| w * (a2 * f.norm_sqr() + b2 * g.norm_sqr()))
        .sum()
}

/// `⟨D|H|D⟩` for tunneling amplitude `delta`.
pub fn total_energy(state: &VariationalState, bath: &DiscreteBath, delta: f64) -> f64 {
    let (a2, b2) = (state.a.norm_sqr(), state.b.norm_sqr());
    let mut boson = 0.0;
    let mut coupling = 0.0;
    for ((w, l), (f, g)) in bath.modes().zip(state.f.iter().zip(&state.g)) {
        boson += w * (a2 * f.norm_sqr() + b2 * g.norm_sqr());
        coupling += l * (a2 * f.re - b2 * g.re);
    }
    let tunneling = -delta * (state.a.conj() * state.b * overlap_exponent(state).exp()).re;
    boson + tunneling + coupling
}

/// One output row of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub entropy: f64,
    /// Relative deviation; `NaN` when not computed or undefined.
    pub sigma: f64,
    pub e_total: f64,
    pub e_bath: f64,
    pub norm: f64,
}

impl ObservableRecord {
    pub fn evaluate(state: &VariationalState, bath: &DiscreteBath, delta: f64) -> Result<Self> {
        let spin = observables(state);
        Ok(ObservableRecord {
            t: state.t,
            p_x: spin.p_x,
            p_y: spin.p_y,
            p_z: spin.p_z,
            entropy: entropy(state)?,
            sigma: f64::NAN,
            e_total: total_energy(state, bath, delta),
            e_bath: bath_energy(state, bath),
            norm: state.norm(),
        })
    }
}
