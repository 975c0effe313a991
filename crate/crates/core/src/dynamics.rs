//! Explicit equations of motion for the trial state and a fixed-step RK4
//! propagator.
//!
//! The variational conditions give implicit equations in which `Ȧ` and `Ḃ`
//! depend on the displacement velocities. Solving the displacement
//! equations first and substituting them back yields (with
//! `E = Σ[f*g − (|f|²+|g|²)/2]`, `O = exp(E)`):
//!
//! ```text
//! i ḟ_l = ω_l f_l + λ_l/2 + (Δ/2)(B/A) O (f_l − g_l)
//! i ġ_l = ω_l g_l − λ_l/2 + (Δ/2)(A/B) O* (g_l − f_l)
//! i Ȧ   =  (A/2) Σ λ_l Re f_l − (Δ/2) A Re[(B/A) O S_f] − (Δ/2) B O
//! i Ḃ   = −(B/2) Σ λ_l Re g_l − (Δ/2) B Re[(A/B) O* S_g] − (Δ/2) A O*
//! ```
//!
//! where `S_f = Σ(|f_l|² − f_l* g_l)` and `S_g = Σ(|g_l|² − g_l* f_l)`.
//! `docs/equations-of-motion.md` has the full derivation. Both amplitude
//! equations are `−i × (real number) × own amplitude` plus the tunneling
//! term, so `d(|A|²+|B|²)/dt = 0` holds identically, including with the
//! ratio regularization below.
//!
//! The ratios `B/A` and `A/B` are evaluated as `B A*/max(|A|², ε²)`; a
//! regularization event is recorded whenever the floor is active while the
//! branches are displaced from each other.

use num_complex::Complex64;

use crate::bath::DiscreteBath;
use crate::deviation::{self, BathAverage};
use crate::state::{ObservableRecord, VariationalState};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub da: Complex64,
    pub db: Complex64,
    pub df: Vec<Complex64>,
    pub dg: Vec<Complex64>,
    /// Set when an amplitude fell below the regularization floor.
    pub regularized: bool,
}

impl StateDerivative {
    pub fn zeros(n_modes: usize) -> Self {
        StateDerivative {
            da: ZERO,
            db: ZERO,
            df: vec![ZERO; n_modes],
            dg: vec![ZERO; n_modes],
            regularized: false,
        }
    }

    /// `d(|A|²+|B|²)/dt`.
    pub fn norm_rate(&self, state: &VariationalState) -> f64 {
        2.0 * (state.a.conj() * self.da + state.b.conj() * self.db).re
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_max: f64,
    pub record_every: usize,
    pub epsilon_amp: f64,
    /// Abort once `| |A|²+|B|² − initial |` exceeds this.
    pub norm_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 0.01,
            t_max: 40.0,
            record_every: 10,
            epsilon_amp: 1e-8,
            norm_tolerance: 1e-4,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self, bath: &DiscreteBath) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.dt * bath.omega_max() < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} does not resolve omega_max = {} (need dt*omega_max < 0.5)",
                self.dt,
                bath.omega_max()
            )));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_max must be >= 0, got {}", self.t_max)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        if !(self.epsilon_amp >= 0.0) {
            return Err(Error::InvalidParameter("epsilon_amp must be >= 0".into()));
        }
        if !(self.norm_tolerance > 0.0) {
            return Err(Error::InvalidParameter("norm_tolerance must be > 0".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }
}

/// Evaluate the explicit right-hand side.
pub fn eom_rhs(
    state: &VariationalState,
    bath: &DiscreteBath,
    delta: f64,
    epsilon_amp: f64,
) -> Result<StateDerivative> {
    state.check_bath(bath)?;
    let mut out = StateDerivative::zeros(bath.len());
    eom_rhs_into(state, bath, delta, epsilon_amp, &mut out);
    Ok(out)
}

/// Regularized `num/den` for amplitudes: `num den* / max(|den|², ε²)`.
#[inline]
fn amplitude_ratio(num: Complex64, den: Complex64, eps: f64) -> (Complex64, bool) {
    let d2 = den.norm_sqr();
    let floor = eps * eps;
    if d2 >= floor && d2 > 0.0 {
        (num * den.conj() / d2, false)
    } else if floor > 0.0 {
        (num * den.conj() / floor, true)
    } else {
        (ZERO, true)
    }
}

/// Mode sums the right-hand side depends on.
#[derive(Debug, Clone, Copy, Default)]
struct Reductions {
    ff: f64,
    gg: f64,
    fg: Complex64,
    lam_re_f: f64,
    lam_re_g: f64,
    dist: f64,
}

impl Reductions {
    #[inline]
    fn add(&mut self, fl: Complex64, gl: Complex64, ll: f64) {
        self.ff += fl.norm_sqr();
        self.gg += gl.norm_sqr();
        self.fg += fl.conj() * gl;
        self.lam_re_f += ll * fl.re;
        self.lam_re_g += ll * gl.re;
        self.dist += (fl - gl).norm_sqr();
    }

    fn of(f: &[Complex64], g: &[Complex64], lambda: &[f64]) -> Self {
        let mut r = Reductions::default();
        for l in 0..f.len() {
            r.add(f[l], g[l], lambda[l]);
        }
        r
    }
}

/// Everything in the right-hand side that is shared by all modes.
#[derive(Debug, Clone, Copy)]
struct Coefficients {
    kf: Complex64,
    kg: Complex64,
    da: Complex64,
    db: Complex64,
    regularized: bool,
}

impl Coefficients {
    fn new(a: Complex64, b: Complex64, r: &Reductions, delta: f64, eps: f64) -> Self {
        let overlap = (r.fg - 0.5 * (r.ff + r.gg)).exp();
        let s_f = r.ff - r.fg;
        let s_g = r.gg - r.fg.conj();
        let (b_over_a, reg_a) = amplitude_ratio(b, a, eps);
        let (a_over_b, reg_b) = amplitude_ratio(a, b, eps);
        let half_delta = 0.5 * delta;
        let ia_dot = a * (0.5 * r.lam_re_f - half_delta * (b_over_a * overlap * s_f).re) - half_delta * b * overlap;
        let ib_dot = b * (-0.5 * r.lam_re_g - half_delta * (a_over_b * overlap.conj() * s_g).re)
            - half_delta * a * overlap.conj();
        Coefficients {
            kf: half_delta * b_over_a * overlap,
            kg: half_delta * a_over_b * overlap.conj(),
            da: -I * ia_dot,
            db: -I * ib_dot,
            regularized: (reg_a || reg_b) && r.dist > 0.0 && delta != 0.0,
        }
    }

    /// `(ḟ_l, ġ_l)`
    #[inline]
    fn mode_rates(&self, fl: Complex64, gl: Complex64, wl: f64, half_lambda: f64) -> (Complex64, Complex64) {
        let diff = fl - gl;
        let rf = wl * fl + half_lambda + self.kf * diff;
        let rg = wl * gl - half_lambda - self.kg * diff;
        (Complex64::new(rf.im, -rf.re), Complex64::new(rg.im, -rg.re))
    }
}

pub(crate) fn eom_rhs_into(
    state: &VariationalState,
    bath: &DiscreteBath,
    delta: f64,
    eps: f64,
    out: &mut StateDerivative,
) {
    let omega = bath.frequencies();
    let lambda = bath.couplings();
    let (f, g) = (&state.f[..], &state.g[..]);
    let n = omega.len();
    debug_assert!(f.len() == n && g.len() == n && out.df.len() == n);

    let c = Coefficients::new(state.a, state.b, &Reductions::of(f, g, lambda), delta, eps);
    out.da = c.da;
    out.db = c.db;
    out.regularized = c.regularized;
    let (df, dg) = (&mut out.df[..n], &mut out.dg[..n]);
    for l in 0..n {
        (df[l], dg[l]) = c.mode_rates(f[l], g[l], omega[l], 0.5 * lambda[l]);
    }
}

/// Scratch space for one RK4 step.
///
/// Each stage is a single pass over the modes: it forms the stage rates,
/// adds them to the running RK4 sum, writes the next stage point and
/// accumulates that point's mode sums.
#[derive(Debug, Clone)]
pub struct Rk4 {
    stage: VariationalState,
    next: VariationalState,
    acc_f: Vec<Complex64>,
    acc_g: Vec<Complex64>,
    primed: StateDerivative,
}

impl Rk4 {
    pub fn new(n_modes: usize) -> Self {
        let blank = VariationalState {
            a: ZERO,
            b: ZERO,
            f: vec![ZERO; n_modes],
            g: vec![ZERO; n_modes],
            t: 0.0,
        };
        Rk4 {
            stage: blank.clone(),
            next: blank,
            acc_f: vec![ZERO; n_modes],
            acc_g: vec![ZERO; n_modes],
            primed: StateDerivative::zeros(n_modes),
        }
    }

    /// Evaluate the right-hand side at `state` (the first RK4 stage).
    pub fn prime(&mut self, state: &VariationalState, bath: &DiscreteBath, delta: f64, eps: f64) -> &StateDerivative {
        eom_rhs_into(state, bath, delta, eps, &mut self.primed);
        &self.primed
    }

    /// Advance `state` by `dt`. Returns true if any stage was regularized.
    pub fn step(&mut self, state: &mut VariationalState, bath: &DiscreteBath, delta: f64, eps: f64, dt: f64) -> bool {
        let omega = bath.frequencies();
        let lambda = bath.couplings();
        let n = omega.len();
        let w = dt / 6.0;

        // stage 1 reads `state` directly
        let c1 = Coefficients::new(state.a, state.b, &Reductions::of(&state.f, &state.g, lambda), delta, eps);
        let mut red = Reductions::default();
        {
            let (nf, ng) = (&mut self.next.f[..n], &mut self.next.g[..n]);
            let (af, ag) = (&mut self.acc_f[..n], &mut self.acc_g[..n]);
            let (f, g) = (&state.f[..n], &state.g[..n]);
            let h = 0.5 * dt;
            for l in 0..n {
                let (kf, kg) = c1.mode_rates(f[l], g[l], omega[l], 0.5 * lambda[l]);
                af[l] = f[l] + w * kf;
                ag[l] = g[l] + w * kg;
                nf[l] = f[l] + h * kf;
                ng[l] = g[l] + h * kg;
                red.add(nf[l], ng[l], lambda[l]);
            }
        }
        let mut acc_a = state.a + w * c1.da;
        let mut acc_b = state.b + w * c1.db;
        self.next.a = state.a + 0.5 * dt * c1.da;
        self.next.b = state.b + 0.5 * dt * c1.db;
        let mut regularized = c1.regularized;

        // stages 2 and 3
        for h in [0.5 * dt, dt] {
            std::mem::swap(&mut self.stage, &mut self.next);
            let c = Coefficients::new(self.stage.a, self.stage.b, &red, delta, eps);
            regularized |= c.regularized;
            red = Reductions::default();
            let (sf, sg) = (&self.stage.f[..n], &self.stage.g[..n]);
            let (nf, ng) = (&mut self.next.f[..n], &mut self.next.g[..n]);
            let (af, ag) = (&mut self.acc_f[..n], &mut self.acc_g[..n]);
            let (f, g) = (&state.f[..n], &state.g[..n]);
            for l in 0..n {
                let (kf, kg) = c.mode_rates(sf[l], sg[l], omega[l], 0.5 * lambda[l]);
                af[l] += 2.0 * w * kf;
                ag[l] += 2.0 * w * kg;
                nf[l] = f[l] + h * kf;
                ng[l] = g[l] + h * kg;
                red.add(nf[l], ng[l], lambda[l]);
            }
            acc_a += 2.0 * w * c.da;
            acc_b += 2.0 * w * c.db;
            self.next.a = state.a + h * c.da;
            self.next.b = state.b + h * c.db;
        }

        // stage 4 writes the result
        std::mem::swap(&mut self.stage, &mut self.next);
        let c4 = Coefficients::new(self.stage.a, self.stage.b, &red, delta, eps);
        regularized |= c4.regularized;
        let (sf, sg) = (&self.stage.f[..n], &self.stage.g[..n]);
        let (af, ag) = (&self.acc_f[..n], &self.acc_g[..n]);
        let (f, g) = (&mut state.f[..n], &mut state.g[..n]);
        for l in 0..n {
            let (kf, kg) = c4.mode_rates(sf[l], sg[l], omega[l], 0.5 * lambda[l]);
            f[l] = af[l] + w * kf;
            g[l] = ag[l] + w * kg;
        }
        state.a = acc_a + w * c4.da;
        state.b = acc_b + w * c4.db;
        state.t += dt;
        regularized
    }
}

/// A completed run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<ObservableRecord>,
    /// `⟨δ|δ⟩` at each record, when the deviation was requested.
    pub deviation_sq: Option<Vec<f64>>,
    /// Time-averaged bath energy used to normalize σ.
    pub mean_bath_energy: Option<f64>,
    pub regularization_events: usize,
    pub warnings: Vec<String>,
    pub final_state: VariationalState,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, pick: impl Fn(&ObservableRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(pick).collect()
    }
}

/// Propagate `initial` with RK4 and collect observables every
/// `record_every` steps (and at the final step).
///
/// With `sigma` set, `⟨δ|δ⟩` is evaluated at every record and σ is filled
/// in after the run, once the bath-energy average is known; `observer`
/// therefore sees `sigma = NaN`.
pub fn integrate(
    initial: &VariationalState,
    bath: &DiscreteBath,
    delta: f64,
    config: &IntegratorConfig,
    sigma: Option<BathAverage>,
    mut observer: impl FnMut(&ObservableRecord),
) -> Result<Trajectory> {
    config.validate(bath)?;
    initial.check_bath(bath)?;

    let mut warnings = Vec::new();
    if config.t_max >= bath.recurrence_time() {
        warnings.push(format!(
            "t_max = {} reaches the recurrence time {:.3}",
            config.t_max,
            bath.recurrence_time()
        ));
    }

    let n_steps = config.n_steps();
    let eps = config.epsilon_amp;
    let norm0 = initial.norm();
    let mut state = initial.clone();
    state.t = 0.0;
    let mut rk = Rk4::new(bath.len());
    let mut records = Vec::with_capacity(n_steps / config.record_every + 2);
    let mut dev = sigma.map(|_| Vec::with_capacity(records.capacity()));
    let mut events = 0usize;

    for step in 0..=n_steps {
        let t = step as f64 * config.dt;
        state.t = t;
        let is_record = step % config.record_every == 0 || step == n_steps;
        if is_record {
            let mut rec = ObservableRecord::evaluate(&state, bath, delta)?;
            rec.t = t;
            if let Some(dev) = dev.as_mut() {
                let k1 = rk.prime(&state, bath, delta, eps);
                dev.push(deviation::deviation_norm_squared(&state, k1, bath, delta)?);
            }
            observer(&rec);
            records.push(rec);
        }
        if step == n_steps {
            break;
        }
        if rk.step(&mut state, bath, delta, eps, config.dt) {
            events += 1;
        }
        let drift = (state.norm() - norm0).abs();
        if !(drift <= config.norm_tolerance) {
            return Err(Error::NormDrift {
                time: (step + 1) as f64 * config.dt,
                drift,
                bound: config.norm_tolerance,
            });
        }
    }
    state.t = n_steps as f64 * config.dt;

    if events > 0 {
        warnings.push(format!("amplitude regularization fired on {events} steps"));
    }

    let mut mean_bath_energy = None;
    if let (Some(mode), Some(dev)) = (sigma, dev.as_ref()) {
        let series = deviation::relative_deviation(&records, dev, mode);
        for (rec, s) in records.iter_mut().zip(&series.sigma) {
            rec.sigma = *s;
        }
        if let Some(note) = series.note {
            warnings.push(note);
        }
        mean_bath_energy = Some(series.mean_bath_energy);
    }

    Ok(Trajectory {
        records,
        deviation_sq: dev,
        mean_bath_energy,
        regularization_events: events,
        warnings,
        final_state: state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsClass {
    Coherent,
    Incoherent,
}

impl DynamicsClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DynamicsClass::Coherent => "coherent",
            DynamicsClass::Incoherent => "incoherent",
        }
    }
}

pub const DEFAULT_PROMINENCE: f64 = 1e-3;

/// Coherent if `P_z` has at least two local extrema with prominence above
/// `prominence` once `t > 1/Δ`.
///
/// The trajectory must span five bare Rabi periods, `t_max ≥ 10π/Δ`.
pub fn classify_dynamics(times: &[f64], p_z: &[f64], delta: f64, prominence: f64) -> Result<DynamicsClass> {
    if times.len() != p_z.len() {
        return Err(Error::InvalidParameter("times and p_z differ in length".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter("classification needs delta > 0".into()));
    }
    let required = 10.0 * std::f64::consts::PI / delta;
    let span = times.last().copied().unwrap_or(0.0) - times.first().copied().unwrap_or(0.0);
    if span < required * (1.0 - 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "trajectory spans {span:.3} but classification needs at least 10π/Δ = {required:.3}"
        )));
    }
    let start = times.partition_point(|&t| t <= 1.0 / delta);
    let extrema = crate::analysis::prominent_extrema(&p_z[start..], prominence);
    Ok(if extrema.len() >= 2 {
        DynamicsClass::Coherent
    } else {
        DynamicsClass::Incoherent
    })
}
