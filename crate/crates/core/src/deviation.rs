//! Schrödinger residual `|δ⟩ = (i∂t − H)|D⟩` of the trial state and the
//! relative deviation σ(t) built from it.
//!
//! Every vector that appears (`|D⟩`, `|Ḋ⟩`, `H|D⟩`) lies, spin sector by
//! spin sector, in the span of `|h⟩`, `b_l†|h⟩` and `|o⟩`, where `|h⟩` is the
//! sector's own coherent state and `|o⟩` the other branch's. Inner products
//! of such vectors reduce to single sums over modes using
//!
//! ```text
//! ⟨h|b_l†|h⟩ = h_l*      ⟨h|b_l b_m†|h⟩ = δ_lm + h_l h_m*
//! ⟨h|o⟩ = O              ⟨h|b_l|o⟩ = o_l O
//! ```
//!
//! so the whole residual costs O(N_b). See `docs/deviation.md`.

use num_complex::Complex64;

use crate::bath::DiscreteBath;
use crate::dynamics::StateDerivative;
use crate::state::{ObservableRecord, VariationalState};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// How the bath energy is averaged when normalizing σ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BathAverage {
    /// Mean over the whole simulated window `[0, t_max]`.
    #[default]
    FullInterval,
    /// Mean over `[0, t]` at each record.
    Running,
}

impl BathAverage {
    pub fn as_str(self) -> &'static str {
        match self {
            BathAverage::FullInterval => "full",
            BathAverage::Running => "running",
        }
    }
}

impl std::str::FromStr for BathAverage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "full" => Ok(BathAverage::FullInterval),
            "running" => Ok(BathAverage::Running),
            other => Err(Error::Config(format!(
                "unknown bath average `{other}` (expected full or running)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationBreakdown {
    /// `⟨Ḋ|Ḋ⟩`
    pub dd: f64,
    /// `⟨D|H²|D⟩`
    pub hh: f64,
    /// `2 Im⟨D|H|Ḋ⟩`
    pub cross: f64,
    /// `⟨δ|δ⟩`, evaluated from the residual directly rather than as the
    /// sum of the three parts above.
    pub delta_norm_sq: f64,
    pub e_bath_avg: f64,
    pub sigma: f64,
}

/// One spin sector of a vector: `scalar|h⟩ + Σ ladder_l b_l†|h⟩ + shifted|o⟩`.
#[derive(Debug, Clone)]
struct SectorVector {
    scalar: Complex64,
    ladder: Vec<Complex64>,
    shifted: Complex64,
}

/// `⟨u|v⟩` for two vectors of the same sector.
fn sector_inner(u: &SectorVector, v: &SectorVector, home: &[Complex64], other: &[Complex64], overlap: Complex64) -> Complex64 {
    let mut uc_h = ZERO; // Σ u_l* h_l
    let mut vc_h = ZERO; // Σ v_l h_l*
    let mut uc_vc = ZERO;
    let mut uc_o = ZERO;
    let mut vc_o = ZERO;
    for l in 0..home.len() {
        let (uc, vc) = (u.ladder[l].conj(), v.ladder[l]);
        uc_h += uc * home[l];
        vc_h += vc * home[l].conj();
        uc_vc += uc * vc;
        uc_o += uc * other[l];
        vc_o += vc * other[l].conj();
    }
    let us = u.scalar.conj();
    let ub = u.shifted.conj();
    us * v.scalar
        + us * vc_h
        + uc_h * v.scalar
        + uc_vc
        + uc_h * vc_h
        + us * v.shifted * overlap
        + ub * v.scalar * overlap.conj()
        + ub * v.shifted
        + v.shifted * overlap * uc_o
        + ub * overlap.conj() * vc_o
}

struct Sectors {
    plus: SectorVector,
    minus: SectorVector,
}

fn time_derivative_vector(state: &VariationalState, d: &StateDerivative) -> Sectors {
    let re_f: f64 = d.df.iter().zip(&state.f).map(|(df, f)| (df * f.conj()).re).sum();
    let re_g: f64 = d.dg.iter().zip(&state.g).map(|(dg, g)| (dg * g.conj()).re).sum();
    Sectors {
        plus: SectorVector {
            scalar: d.da - state.a * re_f,
            ladder: d.df.iter().map(|df| state.a * df).collect(),
            shifted: ZERO,
        },
        minus: SectorVector {
            scalar: d.db - state.b * re_g,
            ladder: d.dg.iter().map(|dg| state.b * dg).collect(),
            shifted: ZERO,
        },
    }
}

fn hamiltonian_vector(state: &VariationalState, bath: &DiscreteBath, delta: f64) -> Sectors {
    let lam_f: Complex64 = bath.couplings().iter().zip(&state.f).map(|(l, f)| l * f).sum();
    let lam_g: Complex64 = bath.couplings().iter().zip(&state.g).map(|(l, g)| l * g).sum();
    Sectors {
        plus: SectorVector {
            scalar: 0.5 * state.a * lam_f,
            ladder: bath.modes().zip(&state.f).map(|((w, l), f)| state.a * (w * f + 0.5 * l)).collect(),
            shifted: -0.5 * delta * state.b,
        },
        minus: SectorVector {
            scalar: -0.5 * state.b * lam_g,
            ladder: bath.modes().zip(&state.g).map(|((w, l), g)| state.b * (w * g - 0.5 * l)).collect(),
            shifted: -0.5 * delta * state.a,
        },
    }
}

/// Squared norm of one sector of the residual,
/// `|s + βO + Σc h*|² + Σ|c|² + |β|²(1−|O|²) + 2 Re[β O Σ c*(o−h)]`,
/// which is the general inner product regrouped around the component of
/// `|o⟩` orthogonal to `|h⟩`. Returns `(value, magnitude scale)`.
fn residual_sector_norm_sq(
    scalar: Complex64,
    shifted: Complex64,
    ladder: impl Fn(usize) -> Complex64,
    home: &[Complex64],
    other: &[Complex64],
    overlap: Complex64,
    one_minus_overlap_sq: f64,
) -> (f64, f64) {
    let mut c_h = ZERO;
    let mut c_sq = 0.0;
    let mut c_diff = ZERO;
    for l in 0..home.len() {
        let c = ladder(l);
        c_h += c * home[l].conj();
        c_sq += c.norm_sqr();
        c_diff += c.conj() * (other[l] - home[l]);
    }
    let head = (scalar + shifted * overlap + c_h).norm_sqr();
    let orth = shifted.norm_sqr() * one_minus_overlap_sq;
    let cross = 2.0 * (shifted * overlap * c_diff).re;
    (head + c_sq + orth + cross, head + c_sq + orth + cross.abs())
}

/// `⟨δ|δ⟩` for an arbitrary state/derivative pair.
pub fn deviation_norm_squared(
    state: &VariationalState,
    derivative: &StateDerivative,
    bath: &DiscreteBath,
    delta: f64,
) -> Result<f64> {
    state.check_bath(bath)?;
    if derivative.df.len() != bath.len() || derivative.dg.len() != bath.len() {
        return Err(Error::InvalidParameter("derivative and bath differ in size".into()));
    }
    let (a, b) = (state.a, state.b);
    let (f, g) = (&state.f[..], &state.g[..]);
    let (df, dg) = (&derivative.df[..], &derivative.dg[..]);
    let omega = bath.frequencies();
    let lambda = bath.couplings();

    let mut fg = ZERO;
    let mut ff = 0.0;
    let mut gg = 0.0;
    let mut dist = 0.0;
    let mut re_f = 0.0;
    let mut re_g = 0.0;
    let mut lam_f = ZERO;
    let mut lam_g = ZERO;
    for l in 0..f.len() {
        fg += f[l].conj() * g[l];
        ff += f[l].norm_sqr();
        gg += g[l].norm_sqr();
        dist += (f[l] - g[l]).norm_sqr();
        re_f += (df[l] * f[l].conj()).re;
        re_g += (dg[l] * g[l].conj()).re;
        lam_f += lambda[l] * f[l];
        lam_g += lambda[l] * g[l];
    }
    let overlap = (fg - 0.5 * (ff + gg)).exp();
    let orth = -(-dist).exp_m1();
    let half_delta = 0.5 * delta;

    let (plus, plus_scale) = residual_sector_norm_sq(
        I * (derivative.da - a * re_f) - 0.5 * a * lam_f,
        half_delta * b,
        |l| I * a * df[l] - a * (omega[l] * f[l] + 0.5 * lambda[l]),
        f,
        g,
        overlap,
        orth,
    );
    let (minus, minus_scale) = residual_sector_norm_sq(
        I * (derivative.db - b * re_g) + 0.5 * b * lam_g,
        half_delta * a,
        |l| I * b * dg[l] - b * (omega[l] * g[l] - 0.5 * lambda[l]),
        g,
        f,
        overlap.conj(),
        orth,
    );
    let total = plus + minus;
    let scale = plus_scale + minus_scale;
    if total < -1e-6 * scale {
        return Err(Error::Consistency(format!(
            "residual norm assembled to {total:e} (scale {scale:e})"
        )));
    }
    Ok(total.max(0.0))
}

/// The three contributions `⟨Ḋ|Ḋ⟩`, `⟨D|H²|D⟩`, `2 Im⟨D|H|Ḋ⟩` alongside
/// `⟨δ|δ⟩`. σ is normalized with `e_bath_avg`.
pub fn deviation_breakdown(
    state: &VariationalState,
    derivative: &StateDerivative,
    bath: &DiscreteBath,
    delta: f64,
    e_bath_avg: f64,
) -> Result<DeviationBreakdown> {
    let delta_norm_sq = deviation_norm_squared(state, derivative, bath, delta)?;
    let overlap = crate::state::overlap_exponent(state).exp();
    let dot = time_derivative_vector(state, derivative);
    let ham = hamiltonian_vector(state, bath, delta);
    let (f, g) = (&state.f[..], &state.g[..]);

    let dd = sector_inner(&dot.plus, &dot.plus, f, g, overlap) + sector_inner(&dot.minus, &dot.minus, g, f, overlap.conj());
    let hh = sector_inner(&ham.plus, &ham.plus, f, g, overlap) + sector_inner(&ham.minus, &ham.minus, g, f, overlap.conj());
    let h_dot = sector_inner(&ham.plus, &dot.plus, f, g, overlap) + sector_inner(&ham.minus, &dot.minus, g, f, overlap.conj());

    Ok(DeviationBreakdown {
        dd: dd.re,
        hh: hh.re,
        cross: 2.0 * h_dot.im,
        delta_norm_sq,
        e_bath_avg,
        sigma: sigma_value(delta_norm_sq, e_bath_avg),
    })
}

pub const MIN_BATH_ENERGY: f64 = 1e-12;

fn sigma_value(delta_norm_sq: f64, e_bath_avg: f64) -> f64 {
    if e_bath_avg < MIN_BATH_ENERGY {
        f64::NAN
    } else {
        delta_norm_sq.max(0.0).sqrt() / e_bath_avg
    }
}

#[derive(Debug, Clone)]
pub struct SigmaSeries {
    pub sigma: Vec<f64>,
    /// Full-interval average (also reported in running mode).
    pub mean_bath_energy: f64,
    /// Set when σ could not be formed.
    pub note: Option<String>,
}

/// Trapezoidal time average of `values` on `times`.
pub fn time_average(times: &[f64], values: &[f64]) -> f64 {
    match times.len() {
        0 => f64::NAN,
        1 => values[0],
        _ => {
            let span = times[times.len() - 1] - times[0];
            if span <= 0.0 {
                return values[0];
            }
            let area: f64 = times
                .windows(2)
                .zip(values.windows(2))
                .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
                .sum();
            area / span
        }
    }
}

/// σ(t) = √⟨δ|δ⟩ / Ē_bath at every record.
pub fn relative_deviation(records: &[ObservableRecord], deviation_sq: &[f64], mode: BathAverage) -> SigmaSeries {
    let times: Vec<f64> = records.iter().map(|r| r.t).collect();
    let e_bath: Vec<f64> = records.iter().map(|r| r.e_bath).collect();
    let mean = time_average(&times, &e_bath);
    let mut note = None;
    let sigma = match mode {
        BathAverage::FullInterval => {
            if !(mean >= MIN_BATH_ENERGY) {
                note = Some(format!("mean bath energy {mean:e} is too small; sigma undefined"));
            }
            deviation_sq.iter().map(|&d| sigma_value(d, mean)).collect()
        }
        BathAverage::Running => {
            let mut out = Vec::with_capacity(records.len());
            let mut area = 0.0;
            for k in 0..records.len() {
                if k > 0 {
                    area += 0.5 * (times[k] - times[k - 1]) * (e_bath[k] + e_bath[k - 1]);
                }
                let span = times[k] - times[0];
                let avg = if span > 0.0 { area / span } else { e_bath[k] };
                out.push(sigma_value(deviation_sq[k], avg));
            }
            if out.iter().any(|s| s.is_nan()) {
                note = Some("running bath energy average too small at some records; sigma undefined there".into());
            }
            out
        }
    };
    SigmaSeries {
        sigma,
        mean_bath_energy: mean,
        note,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{discretize_bath, SpectralParams};
    use crate::dynamics::eom_rhs;
    use crate::state::{init_state, InitialCondition};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(n: usize) -> (VariationalState, DiscreteBath) {
        let bath = discretize_bath(&SpectralParams::new(0.5, 0.2, 1.0).unwrap(), n, 3.0).unwrap();
        let st = VariationalState::new(
            c(0.7, 0.2),
            c(-0.3, 0.6),
            (0..n).map(|l| c(0.2 - 0.1 * l as f64, 0.05 * l as f64)).collect(),
            (0..n).map(|l| c(-0.1, 0.3 - 0.07 * l as f64)).collect(),
        )
        .unwrap();
        (st, bath)
    }

    #[test]
    fn breakdown_sums_to_direct_residual() {
        let (st, bath) = sample(4);
        let mut d = eom_rhs(&st, &bath, 0.3, 1e-8).unwrap();
        // also off the equations of motion
        for pair in [d.clone(), {
            d.da += c(0.1, -0.2);
            d.df[1] += c(0.3, 0.0);
            d.dg[2] -= c(0.0, 0.4);
            d
        }] {
            let br = deviation_breakdown(&st, &pair, &bath, 0.3, 1.0).unwrap();
            let sum = br.dd + br.hh + br.cross;
            assert!((sum - br.delta_norm_sq).abs() < 1e-12 * br.hh, "{br:?}");
        }
    }

    #[test]
    fn on_shell_residual_closed_form() {
        let (st, bath) = sample(6);
        let delta = 0.4;
        let d = eom_rhs(&st, &bath, delta, 1e-8).unwrap();
        let got = deviation_norm_squared(&st, &d, &bath, delta).unwrap();
        let dist = crate::state::displacement_distance_sq(&st);
        let want = 0.25 * delta * delta * st.norm() * (1.0 - (1.0 + dist) * (-dist).exp());
        assert!((got - want).abs() < 1e-13 * want, "{got} vs {want}");
    }

    #[test]
    fn exact_limits_vanish() {
        let bath = discretize_bath(&SpectralParams::new(0.25, 0.3, 1.0).unwrap(), 32, 4.0).unwrap();
        let st = init_state(InitialCondition::Factorized, &bath);
        let d = eom_rhs(&st, &bath, 0.0, 1e-8).unwrap();
        assert_eq!(deviation_norm_squared(&st, &d, &bath, 0.0).unwrap(), 0.0);

        let free = bath.scaled(0.0);
        let mut st = init_state(InitialCondition::Factorized, &free);
        st.a = c(0.6, 0.0);
        st.b = c(0.0, 0.8);
        let d = eom_rhs(&st, &free, 0.5, 1e-8).unwrap();
        assert!(deviation_norm_squared(&st, &d, &free, 0.5).unwrap() < 1e-30);
    }

    #[test]
    fn global_phase_invariance() {
        let (st, bath) = sample(5);
        let d = eom_rhs(&st, &bath, 0.2, 1e-8).unwrap();
        let mut d2 = d.clone();
        d2.da += c(0.05, 0.1);
        let u = Complex64::from_polar(1.0, 0.83);
        let rotated = st.with_global_phase(0.83);
        let mut d_rot = d2.clone();
        d_rot.da *= u;
        d_rot.db *= u;
        let x = deviation_norm_squared(&st, &d2, &bath, 0.2).unwrap();
        let y = deviation_norm_squared(&rotated, &d_rot, &bath, 0.2).unwrap();
        assert!((x - y).abs() < 1e-14 * x.max(1e-300));
    }

    #[test]
    fn sigma_normalization() {
        let recs: Vec<ObservableRecord> = (0..5)
            .map(|k| ObservableRecord {
                t: k as f64,
                p_x: 0.0,
                p_y: 0.0,
                p_z: 1.0,
                entropy: 0.0,
                sigma: f64::NAN,
                e_total: 0.0,
                e_bath: k as f64,
                norm: 1.0,
            })
            .collect();
        let dev = vec![4.0; 5];
        let full = relative_deviation(&recs, &dev, BathAverage::FullInterval);
        assert_eq!(full.mean_bath_energy, 2.0);
        assert!(full.sigma.iter().all(|&s| s == 1.0));
        let running = relative_deviation(&recs, &dev, BathAverage::Running);
        assert!(running.sigma[0].is_nan());
        assert_eq!(running.sigma[4], 1.0);
        assert!((running.sigma[2] - 2.0).abs() < 1e-15);

        let zero: Vec<_> = recs.iter().map(|r| ObservableRecord { e_bath: 0.0, ..*r }).collect();
        let s = relative_deviation(&zero, &dev, BathAverage::FullInterval);
        assert!(s.sigma.iter().all(|x| x.is_nan()));
        assert!(s.note.is_some());
    }
}
