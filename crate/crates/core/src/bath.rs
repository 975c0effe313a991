//! Sub-Ohmic spectral density and its homogeneous discretization.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Continuous bath description `J(ω) = 2α ω_c^(1-s) ω^s exp(-ω/ω_c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    pub s: f64,
    pub alpha: f64,
    pub omega_c: f64,
}

impl SpectralParams {
    pub fn new(s: f64, alpha: f64, omega_c: f64) -> Result<Self> {
        let p = SpectralParams { s, alpha, omega_c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(Error::InvalidParameter(format!("s must be > 0, got {}", self.s)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.omega_c > 0.0 && self.omega_c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega_c must be > 0, got {}",
                self.omega_c
            )));
        }
        Ok(())
    }
}

pub fn spectral_density(omega: f64, params: &SpectralParams) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "spectral density needs omega >= 0, got {omega}"
        )));
    }
    Ok(density_unchecked(omega, params))
}

#[inline]
fn density_unchecked(omega: f64, p: &SpectralParams) -> f64 {
    if omega == 0.0 {
        return 0.0;
    }
    2.0 * p.alpha * p.omega_c.powf(1.0 - p.s) * omega.powf(p.s) * (-omega / p.omega_c).exp()
}

/// `∫₀^∞ J(ω)/ω dω = 2α ω_c Γ(s)`.
pub fn reorganization_energy(params: &SpectralParams) -> Result<f64> {
    if !(params.s > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reorganization energy diverges for s <= 0 (got {})",
            params.s
        )));
    }
    Ok(2.0 * params.alpha * params.omega_c * statrs::function::gamma::gamma(params.s))
}

/// A finite set of bath modes on the uniform grid `ω_l = l Δω`, `l = 1..=N_b`.
///
/// Frequencies and couplings are kept in separate arrays; the equations of
/// motion stream over both in lockstep.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBath {
    omega: Vec<f64>,
    lambda: Vec<f64>,
    delta_omega: f64,
    omega_max: f64,
}

impl DiscreteBath {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.omega
    }

    pub fn couplings(&self) -> &[f64] {
        &self.lambda
    }

    pub fn modes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega.iter().copied().zip(self.lambda.iter().copied())
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// Poincaré recurrence time `2π/Δω`.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.delta_omega
    }

    /// Discrete analogue of the reorganization energy, `Σ λ_l²/ω_l`.
    ///
    /// Differs from [`reorganization_energy`] by the tail above `ω_max` and
    /// by the grid error near `ω = 0`; neither is compensated.
    pub fn reorganization_energy(&self) -> f64 {
        self.modes().map(|(w, l)| l * l / w).sum()
    }

    /// Same grid, different couplings. Signs are not restricted, which is
    /// what the spin-flip symmetry checks need.
    pub fn with_couplings(&self, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() != self.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} couplings, got {}",
                self.len(),
                lambda.len()
            )));
        }
        Ok(DiscreteBath {
            lambda,
            ..self.clone()
        })
    }

    /// Scale every coupling by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        DiscreteBath {
            lambda: self.lambda.iter().map(|l| l * factor).collect(),
            ..self.clone()
        }
    }
}

/// Homogeneous discretization with `λ_l² = J(ω_l) Δω` and `Δω = ω_max/N_b`.
pub fn discretize_bath(params: &SpectralParams, n_modes: usize, omega_max: f64) -> Result<DiscreteBath> {
    params.validate()?;
    if n_modes == 0 {
        return Err(Error::InvalidParameter("n_modes must be >= 1".into()));
    }
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "omega_max must be > 0, got {omega_max}"
        )));
    }
    let delta_omega = omega_max / n_modes as f64;
    let omega: Vec<f64> = (1..=n_modes).map(|l| l as f64 * delta_omega).collect();
    let lambda = omega
        .iter()
        .map(|&w| (density_unchecked(w, params) * delta_omega).sqrt())
        .collect();
    Ok(DiscreteBath {
        omega,
        lambda,
        delta_omega,
        omega_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sub_ohmic() -> SpectralParams {
        SpectralParams::new(0.25, 0.1, 1.0).unwrap()
    }

    #[test]
    fn density_at_cutoff_cancels_powers() {
        for s in [0.1, 0.25, 0.5, 1.0, 2.0] {
            let p = SpectralParams::new(s, 0.3, 2.5).unwrap();
            let j = spectral_density(2.5, &p).unwrap();
            let want = 2.0 * 0.3 * 2.5 * (-1.0f64).exp();
            assert!((j - want).abs() < 1e-14 * want, "s={s}: {j} vs {want}");
        }
    }

    #[test]
    fn density_values() {
        assert_eq!(spectral_density(0.0, &sub_ohmic()).unwrap(), 0.0);
        let j = spectral_density(2.0, &sub_ohmic()).unwrap();
        assert!((j - 0.032_189).abs() < 1e-6, "{j}");
        assert!(spectral_density(-1.0, &sub_ohmic()).is_err());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SpectralParams::new(0.0, 0.1, 1.0).is_err());
        assert!(SpectralParams::new(0.5, -0.1, 1.0).is_err());
        assert!(SpectralParams::new(0.5, 0.1, 0.0).is_err());
        assert!(discretize_bath(&sub_ohmic(), 0, 4.0).is_err());
        assert!(discretize_bath(&sub_ohmic(), 10, -4.0).is_err());
    }

    #[test]
    fn four_mode_grid() {
        let bath = discretize_bath(&sub_ohmic(), 4, 4.0).unwrap();
        assert_eq!(bath.frequencies(), &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(bath.delta_omega(), 1.0);
        let l1 = bath.couplings()[0];
        assert!((l1 * l1 - 0.2 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((l1 * l1 - 0.073_576).abs() < 1e-6);
    }

    #[test]
    fn full_scale_recurrence_time() {
        let bath = discretize_bath(&sub_ohmic(), 20_000, 4.0).unwrap();
        assert!((bath.recurrence_time() - 10_000.0 * PI).abs() < 1e-9);
        // grid is l * Δω exactly
        for (l, &w) in bath.frequencies().iter().enumerate() {
            assert_eq!(w, (l + 1) as f64 * bath.delta_omega());
        }
    }

    #[test]
    fn doubling_modes_halves_spacing() {
        let a = discretize_bath(&sub_ohmic(), 1000, 4.0).unwrap();
        let b = discretize_bath(&sub_ohmic(), 2000, 4.0).unwrap();
        assert_eq!(a.delta_omega(), 2.0 * b.delta_omega());
        assert_eq!(2.0 * a.recurrence_time(), b.recurrence_time());
    }

    #[test]
    fn reorganization_energy_closed_forms() {
        let ohmic = SpectralParams::new(1.0, 0.3, 1.0).unwrap();
        assert!((reorganization_energy(&ohmic).unwrap() - 0.6).abs() < 1e-14);
        let half = SpectralParams::new(0.5, 0.1, 1.0).unwrap();
        let e = reorganization_energy(&half).unwrap();
        assert!((e - 0.2 * PI.sqrt()).abs() < 1e-13);
        assert!((e - 0.354_491).abs() < 1e-6);
        let bad = SpectralParams { s: 0.0, alpha: 0.1, omega_c: 1.0 };
        assert!(reorganization_energy(&bad).is_err());
    }

    #[test]
    fn with_couplings_checks_length() {
        let bath = discretize_bath(&sub_ohmic(), 3, 3.0).unwrap();
        assert!(bath.with_couplings(vec![0.0; 2]).is_err());
        let flipped = bath.with_couplings(bath.couplings().iter().map(|l| -l).collect()).unwrap();
        assert_eq!(flipped.frequencies(), bath.frequencies());
    }
}
