//! Brute-force reference: the full spin-boson Hamiltonian on a truncated
//! Fock space, for baths of a handful of modes.
//!
//! Basis states are `|s⟩ ⊗ |n_1 … n_N⟩` with `s ∈ {+, −}` and
//! `0 ≤ n_l ≤ n_max`; the flat index is `s·M + Σ_l n_l (n_max+1)^(l)` with
//! `M = (n_max+1)^N`, so mode 0 is the fastest-varying digit.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::bath::DiscreteBath;
use crate::dynamics::StateDerivative;
use crate::state::{InitialCondition, VariationalState};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub const MAX_MODES: usize = 6;
pub const DEFAULT_MAX_DIM: usize = 1 << 21;
/// Embeddings with a larger norm defect are reported.
pub const TRUNCATION_WARN: f64 = 1e-8;

/// Real symmetric matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl CsrMatrix {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = &self.col[self.row_ptr[r]..self.row_ptr[r + 1]];
        match row.binary_search(&c) {
            Ok(k) => self.val[self.row_ptr[r] + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            *out = acc;
        }
    }

    /// Largest `|H_rc − H_cr|` over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                worst = worst.max((self.val[k] - self.get(self.col[k], r)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col[k])] = self.val[k];
            }
        }
        m
    }
}

#[derive(Debug, Clone)]
pub struct FockSystem {
    pub bath: DiscreteBath,
    pub n_max: usize,
    pub delta: f64,
    pub dim: usize,
    pub hamiltonian: CsrMatrix,
}

impl FockSystem {
    /// Dimension of one spin sector, `(n_max+1)^N_b`.
    pub fn sector_dim(&self) -> usize {
        self.dim / 2
    }

    fn stride(&self, mode: usize) -> usize {
        (self.n_max + 1).pow(mode as u32)
    }

    /// `⟨ψ|H|ψ⟩`
    pub fn energy(&self, psi: &[Complex64]) -> f64 {
        let mut h_psi = vec![ZERO; self.dim];
        self.hamiltonian.matvec(psi, &mut h_psi);
        psi.iter().zip(&h_psi).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// `⟨ψ|b_l† b_l|ψ⟩`
    pub fn occupation(&self, psi: &[Complex64], mode: usize) -> f64 {
        let stride = self.stride(mode);
        let base = self.n_max + 1;
        psi.iter()
            .enumerate()
            .map(|(idx, z)| (((idx % self.sector_dim()) / stride) % base) as f64 * z.norm_sqr())
            .sum()
    }
}

pub fn build_hamiltonian(bath: &DiscreteBath, n_max: usize, delta: f64) -> Result<FockSystem> {
    build_hamiltonian_with_limit(bath, n_max, delta, DEFAULT_MAX_DIM)
}

/// `H = −(Δ/2)σx + Σ ω_l b_l†b_l + (σz/2) Σ λ_l (b_l + b_l†)` on the
/// truncated product basis.
pub fn build_hamiltonian_with_limit(bath: &DiscreteBath, n_max: usize, delta: f64, max_dim: usize) -> Result<FockSystem> {
    let n_modes = bath.len();
    if n_modes > MAX_MODES {
        return Err(Error::InvalidParameter(format!(
            "the Fock oracle handles at most {MAX_MODES} modes, got {n_modes}"
        )));
    }
    let base = n_max + 1;
    let sector = (0..n_modes)
        .try_fold(1usize, |acc, _| acc.checked_mul(base))
        .ok_or(Error::DimensionTooLarge { dim: usize::MAX, limit: max_dim })?;
    let dim = 2 * sector;
    if dim > max_dim {
        return Err(Error::DimensionTooLarge { dim, limit: max_dim });
    }

    let omega = bath.frequencies();
    let lambda = bath.couplings();
    let strides: Vec<usize> = (0..n_modes).map(|l| base.pow(l as u32)).collect();
    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut col = Vec::with_capacity(dim * (2 * n_modes + 2));
    let mut val = Vec::with_capacity(col.capacity());
    let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * n_modes + 2);
    row_ptr.push(0);
    for r in 0..dim {
        let (spin, occ_index) = (r / sector, r % sector);
        let sz = if spin == 0 { 1.0 } else { -1.0 };
        row.clear();
        let mut diag = 0.0;
        for l in 0..n_modes {
            let n = (occ_index / strides[l]) % base;
            diag += omega[l] * n as f64;
            let g = 0.5 * sz * lambda[l];
            if n > 0 {
                row.push((r - strides[l], g * (n as f64).sqrt()));
            }
            if n < n_max {
                row.push((r + strides[l], g * ((n + 1) as f64).sqrt()));
            }
        }
        row.push((r, diag));
        if delta != 0.0 {
            let flipped = if spin == 0 { r + sector } else { r - sector };
            row.push((flipped, -0.5 * delta));
        }
        row.sort_by_key(|e| e.0);
        for &(c, v) in &row {
            if v != 0.0 || c == r {
                col.push(c);
                val.push(v);
            }
        }
        row_ptr.push(col.len());
    }
    Ok(FockSystem {
        bath: bath.clone(),
        n_max,
        delta,
        dim,
        hamiltonian: CsrMatrix { n: dim, row_ptr, col, val },
    })
}

/// Truncated coherent-state amplitudes `e^{-|z|²/2} z^n/√n!`, `n ≤ n_max`.
fn coherent_amplitudes(z: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut c = Vec::with_capacity(n_max + 1);
    c.push(Complex64::new((-0.5 * z.norm_sqr()).exp(), 0.0));
    for n in 1..=n_max {
        let prev = c[n - 1];
        c.push(prev * z / (n as f64).sqrt());
    }
    c
}

/// `Π_l v_l[n_l]` over the sector basis.
fn product_vector(factors: &[&[Complex64]], base: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for v in factors {
        let mut next = Vec::with_capacity(out.len() * base);
        for a in v.iter() {
            for b in &out {
                next.push(a * b);
            }
        }
        out = next;
    }
    out
}

/// A variational state (and optionally its time derivative) written out in
/// the Fock basis.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub psi: Vec<Complex64>,
    /// `1 − Π_l ‖truncated coherent state‖²`, worst of the two branches.
    pub truncation_defect: f64,
}

fn branch(amplitudes: &[Vec<Complex64>]) -> (f64, Vec<&[Complex64]>) {
    let kept: f64 = amplitudes.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>()).product();
    (1.0 - kept, amplitudes.iter().map(|v| v.as_slice()).collect())
}

pub fn embed_state(system: &FockSystem, state: &VariationalState) -> Result<Embedding> {
    state.check_bath(&system.bath)?;
    let base = system.n_max + 1;
    let cf: Vec<_> = state.f.iter().map(|&z| coherent_amplitudes(z, system.n_max)).collect();
    let cg: Vec<_> = state.g.iter().map(|&z| coherent_amplitudes(z, system.n_max)).collect();
    let (df, vf) = branch(&cf);
    let (dg, vg) = branch(&cg);
    let mut psi: Vec<Complex64> = product_vector(&vf, base).into_iter().map(|x| state.a * x).collect();
    psi.extend(product_vector(&vg, base).into_iter().map(|x| state.b * x));
    Ok(Embedding { psi, truncation_defect: df.max(dg) })
}

/// `d|D⟩/dt` by the chain rule over every variational parameter.
pub fn embed_derivative(system: &FockSystem, state: &VariationalState, d: &StateDerivative) -> Result<Vec<Complex64>> {
    state.check_bath(&system.bath)?;
    let n_max = system.n_max;
    let base = n_max + 1;
    let sector_of = |amp: Complex64, damp: Complex64, disp: &[Complex64], ddisp: &[Complex64]| {
        let coh: Vec<_> = disp.iter().map(|&z| coherent_amplitudes(z, n_max)).collect();
        // d/dt c_n = ż √n c_{n−1} − Re(ż z*) c_n
        let dcoh: Vec<Vec<Complex64>> = coh
            .iter()
            .zip(disp.iter().zip(ddisp))
            .map(|(c, (z, dz))| {
                let shrink = (dz * z.conj()).re;
                (0..=n_max)
                    .map(|n| {
                        let raise = if n > 0 { dz * (n as f64).sqrt() * c[n - 1] } else { ZERO };
                        raise - shrink * c[n]
                    })
                    .collect()
            })
            .collect();
        let plain: Vec<&[Complex64]> = coh.iter().map(|v| v.as_slice()).collect();
        let mut out: Vec<Complex64> = product_vector(&plain, base).into_iter().map(|x| damp * x).collect();
        for l in 0..disp.len() {
            let mut factors = plain.clone();
            factors[l] = &dcoh[l];
            for (o, x) in out.iter_mut().zip(product_vector(&factors, base)) {
                *o += amp * x;
            }
        }
        out
    };
    let mut v = sector_of(state.a, d.da, &state.f, &d.df);
    v.extend(sector_of(state.b, d.db, &state.g, &d.dg));
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSpin {
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub entropy: f64,
    pub norm: f64,
}

/// Spin observables and entanglement entropy from the reduced 2×2 density
/// matrix of `psi`.
pub fn reduced_spin(psi: &[Complex64]) -> ReducedSpin {
    let m = psi.len() / 2;
    let (up, down) = psi.split_at(m);
    let p: f64 = up.iter().map(|z| z.norm_sqr()).sum();
    let q: f64 = down.iter().map(|z| z.norm_sqr()).sum();
    let coh: Complex64 = up.iter().zip(down).map(|(u, d)| u.conj() * d).sum();
    let norm = p + q;
    let disc = ((p - q).powi(2) + 4.0 * coh.norm_sqr()).sqrt();
    let entropy = [(norm + disc) / 2.0, (norm - disc) / 2.0]
        .iter()
        .map(|&w| if w <= 1e-15 { 0.0 } else { -w * w.ln() })
        .sum();
    ReducedSpin {
        p_x: 2.0 * coh.re,
        p_y: 2.0 * coh.im,
        p_z: p - q,
        entropy,
        norm,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactRecord {
    pub t: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
    pub entropy: f64,
    pub energy: f64,
    pub norm: f64,
    /// `⟨b_l†b_l⟩` per mode.
    pub occupations: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExactTrajectory {
    pub records: Vec<ExactRecord>,
    pub truncation_defect: f64,
    pub warnings: Vec<String>,
}

/// The spin starts in `|+⟩`; the bath in vacuum or displaced by `−λ/(2ω)`.
pub fn initial_vector(system: &FockSystem, condition: InitialCondition) -> Result<(Vec<Complex64>, f64, Vec<String>)> {
    let st = crate::state::init_state(condition, &system.bath);
    let mut emb = embed_state(system, &st)?;
    let mut warnings = Vec::new();
    if emb.truncation_defect > TRUNCATION_WARN {
        warnings.push(format!(
            "initial displacement truncated with norm defect {:.2e}; raise n_max",
            emb.truncation_defect
        ));
    } else if emb.truncation_defect > 0.0 {
        let scale = 1.0 / (1.0 - emb.truncation_defect).sqrt();
        emb.psi.iter_mut().for_each(|z| *z *= scale);
    }
    Ok((emb.psi, emb.truncation_defect, warnings))
}

/// Short-iterative Lanczos propagator for `exp(−iHt)`.
pub struct Lanczos<'a> {
    h: &'a CsrMatrix,
    max_krylov: usize,
    tolerance: f64,
    basis: Vec<Vec<Complex64>>,
    w: Vec<Complex64>,
}

impl<'a> Lanczos<'a> {
    pub fn new(h: &'a CsrMatrix) -> Self {
        let max_krylov = 30.min(h.dim());
        Lanczos {
            h,
            max_krylov,
            tolerance: 1e-13,
            basis: Vec::with_capacity(max_krylov),
            w: vec![ZERO; h.dim()],
        }
    }

    /// Replace `psi` by `exp(−iH dt) psi`, subdividing `dt` when the
    /// Krylov error estimate exceeds the tolerance.
    pub fn propagate(&mut self, psi: &mut [Complex64], dt: f64) {
        let mut remaining = dt;
        let mut h = dt;
        while remaining > 0.0 {
            h = h.min(remaining);
            if self.try_step(psi, h) {
                remaining -= h;
                if remaining <= 1e-14 * dt.abs() {
                    break;
                }
            } else {
                h *= 0.5;
            }
        }
    }

    fn try_step(&mut self, psi: &mut [Complex64], h: f64) -> bool {
        let norm0 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            return true;
        }
        self.basis.clear();
        self.basis.push(psi.iter().map(|z| z / norm0).collect());
        let mut alpha = Vec::with_capacity(self.max_krylov);
        let mut beta: Vec<f64> = Vec::with_capacity(self.max_krylov);
        let mut last_beta = 0.0;
        for j in 0..self.max_krylov {
            self.h.matvec(&self.basis[j], &mut self.w);
            let a: f64 = self.basis[j].iter().zip(&self.w).map(|(v, w)| (v.conj() * w).re).sum();
            alpha.push(a);
            for (w, v) in self.w.iter_mut().zip(&self.basis[j]) {
                *w -= a * v;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (w, v) in self.w.iter_mut().zip(&self.basis[j - 1]) {
                    *w -= b * v;
                }
            }
            // full reorthogonalization keeps the small basis clean
            for v in &self.basis {
                let proj: Complex64 = v.iter().zip(&self.w).map(|(v, w)| v.conj() * w).sum();
                for (w, vv) in self.w.iter_mut().zip(v) {
                    *w -= proj * vv;
                }
            }
            let b = self.w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            last_beta = b;
            if b < 1e-12 * (1.0 + a.abs()) || j + 1 == self.max_krylov {
                break;
            }
            beta.push(b);
            self.basis.push(self.w.iter().map(|z| z / b).collect());
        }
        let m = alpha.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for j in 0..m {
            t[(j, j)] = alpha[j];
            if j + 1 < m {
                t[(j, j + 1)] = beta[j];
                t[(j + 1, j)] = beta[j];
            }
        }
        let eig = SymmetricEigen::new(t);
        let coeffs: Vec<Complex64> = (0..m)
            .map(|r| {
                (0..m)
                    .map(|k| {
                        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k] * h);
                        eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)] * phase
                    })
                    .sum()
            })
            .collect();
        let converged = m < self.max_krylov || last_beta * coeffs[m - 1].norm() < self.tolerance;
        if !converged {
            return false;
        }
        for z in psi.iter_mut() {
            *z = ZERO;
        }
        for (v, c) in self.basis.iter().zip(&coeffs) {
            let c = c * norm0;
            for (z, vv) in psi.iter_mut().zip(v) {
                *z += c * vv;
            }
        }
        true
    }
}

fn exact_record(system: &FockSystem, psi: &[Complex64], t: f64) -> ExactRecord {
    let spin = reduced_spin(psi);
    ExactRecord {
        t,
        p_x: spin.p_x,
        p_y: spin.p_y,
        p_z: spin.p_z,
        entropy: spin.entropy,
        energy: system.energy(psi),
        norm: spin.norm,
        occupations: (0..system.bath.len()).map(|l| system.occupation(psi, l)).collect(),
    }
}

/// Unitary propagation of the full Hamiltonian, recording every `dt`.
pub fn exact_propagate(system: &FockSystem, condition: InitialCondition, dt: f64, t_max: f64) -> Result<ExactTrajectory> {
    if !(dt > 0.0) || !(t_max >= 0.0) {
        return Err(Error::InvalidParameter("exact propagation needs dt > 0 and t_max >= 0".into()));
    }
    let (mut psi, defect, warnings) = initial_vector(system, condition)?;
    let n_steps = (t_max / dt).round() as usize;
    let mut records = Vec::with_capacity(n_steps + 1);
    records.push(exact_record(system, &psi, 0.0));
    let mut lanczos = Lanczos::new(&system.hamiltonian);
    for k in 1..=n_steps {
        lanczos.propagate(&mut psi, dt);
        records.push(exact_record(system, &psi, k as f64 * dt));
    }
    Ok(ExactTrajectory {
        records,
        truncation_defect: defect,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactDeviation {
    pub value: f64,
    pub truncation_defect: f64,
}

/// `‖i|Ḋ⟩ − H|D⟩‖²` with both vectors written out in the Fock basis.
pub fn exact_deviation(system: &FockSystem, state: &VariationalState, derivative: &StateDerivative) -> Result<ExactDeviation> {
    let emb = embed_state(system, state)?;
    let dot = embed_derivative(system, state, derivative)?;
    let mut h_psi = vec![ZERO; system.dim];
    system.hamiltonian.matvec(&emb.psi, &mut h_psi);
    let value = dot.iter().zip(&h_psi).map(|(d, h)| (I * d - h).norm_sqr()).sum();
    Ok(ExactDeviation {
        value,
        truncation_defect: emb.truncation_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{discretize_bath, SpectralParams};

    fn one_mode(lambda: f64) -> DiscreteBath {
        discretize_bath(&SpectralParams::new(1.0, 0.1, 1.0).unwrap(), 1, 1.0)
            .unwrap()
            .with_couplings(vec![lambda])
            .unwrap()
    }

    #[test]
    fn frozen_boson_is_bare_spin() {
        let sys = build_hamiltonian(&one_mode(0.3), 0, 0.4).unwrap();
        assert_eq!(sys.dim, 2);
        let h = sys.hamiltonian.to_dense();
        assert_eq!(h, DMatrix::from_row_slice(2, 2, &[0.0, -0.2, -0.2, 0.0]));
    }

    #[test]
    fn single_photon_blocks() {
        let sys = build_hamiltonian(&one_mode(0.2), 1, 0.0).unwrap();
        assert_eq!(sys.dim, 4);
        let eig = SymmetricEigen::new(sys.hamiltonian.to_dense());
        let mut got: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        // each spin sector is [[0, ±0.1], [±0.1, 1]]
        let r = (0.25f64 + 0.01).sqrt();
        let want = [0.5 - r, 0.5 - r, 0.5 + r, 0.5 + r];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn hermitian_and_sized() {
        let bath = discretize_bath(&SpectralParams::new(0.4, 0.7, 1.0).unwrap(), 3, 3.0).unwrap();
        let sys = build_hamiltonian(&bath, 5, 0.37).unwrap();
        assert_eq!(sys.dim, 2 * 6usize.pow(3));
        assert_eq!(sys.hamiltonian.hermiticity_defect(), 0.0);
    }

    #[test]
    fn guards() {
        let bath = discretize_bath(&SpectralParams::new(0.4, 0.7, 1.0).unwrap(), 7, 3.0).unwrap();
        assert!(build_hamiltonian(&bath, 1, 0.1).is_err());
        let bath = discretize_bath(&SpectralParams::new(0.4, 0.7, 1.0).unwrap(), 4, 3.0).unwrap();
        assert!(matches!(
            build_hamiltonian_with_limit(&bath, 10, 0.1, 10_000),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn lanczos_matches_dense_exponential() {
        let bath = discretize_bath(&SpectralParams::new(0.5, 0.4, 1.0).unwrap(), 2, 2.0).unwrap();
        let sys = build_hamiltonian(&bath, 4, 0.3).unwrap();
        let dense = sys.hamiltonian.to_dense();
        let eig = SymmetricEigen::new(dense);
        let psi0: Vec<Complex64> = (0..sys.dim).map(|k| Complex64::new((k as f64).sin(), (0.3 * k as f64).cos())).collect();
        let t = 2.7;
        let mut want = vec![ZERO; sys.dim];
        for k in 0..sys.dim {
            let proj: Complex64 = (0..sys.dim).map(|r| eig.eigenvectors[(r, k)] * psi0[r]).sum();
            let ph = Complex64::from_polar(1.0, -eig.eigenvalues[k] * t) * proj;
            for r in 0..sys.dim {
                want[r] += ph * eig.eigenvectors[(r, k)];
            }
        }
        let mut psi = psi0.clone();
        Lanczos::new(&sys.hamiltonian).propagate(&mut psi, t);
        let err: f64 = psi.iter().zip(&want).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn decoupled_rabi() {
        let bath = discretize_bath(&SpectralParams::new(0.5, 0.0, 1.0).unwrap(), 2, 2.0).unwrap();
        let sys = build_hamiltonian(&bath, 3, 0.8).unwrap();
        let traj = exact_propagate(&sys, InitialCondition::Factorized, 0.25, 10.0).unwrap();
        for r in &traj.records {
            assert!((r.p_z - (0.8 * r.t).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn coherent_embedding_entropy_matches_closed_form() {
        let bath = discretize_bath(&SpectralParams::new(0.5, 0.4, 1.0).unwrap(), 2, 2.0).unwrap();
        let sys = build_hamiltonian(&bath, 20, 0.3).unwrap();
        let st = VariationalState::new(
            Complex64::new(0.6, 0.2),
            Complex64::new(0.1, -(1.0f64 - 0.41).sqrt()),
            vec![Complex64::new(0.4, -0.3), Complex64::new(-0.2, 0.1)],
            vec![Complex64::new(-0.5, 0.2), Complex64::new(0.3, 0.6)],
        )
        .unwrap();
        let emb = embed_state(&sys, &st).unwrap();
        assert!(emb.truncation_defect < 1e-12);
        let spin = reduced_spin(&emb.psi);
        let obs = crate::state::observables(&st);
        assert!((spin.p_x - obs.p_x).abs() < 1e-10);
        assert!((spin.p_y - obs.p_y).abs() < 1e-10);
        assert!((spin.p_z - obs.p_z).abs() < 1e-10);
        assert!((spin.entropy - crate::state::entropy(&st).unwrap()).abs() < 1e-8);
        let e = sys.energy(&emb.psi);
        assert!((e - crate::state::total_energy(&st, &bath, 0.3)).abs() < 1e-10);
    }
}
