//! The closed-form residual and the variational trajectory against
//! brute-force Fock-space evaluations.

use std::sync::OnceLock;

use proptest::prelude::*;
use spinboson::bath::{discretize_bath, DiscreteBath, SpectralParams};
use spinboson::config::RunConfig;
use spinboson::deviation::{deviation_breakdown, deviation_norm_squared};
use spinboson::driver::oracle_check;
use spinboson::dynamics::{eom_rhs, StateDerivative};
use spinboson::oracle::{build_hamiltonian, embed_derivative, embed_state, exact_deviation, exact_propagate, FockSystem};
use spinboson::state::{InitialCondition, VariationalState};
use spinboson::Complex64;

const DELTA: f64 = 0.2;
const N_MAX: usize = 24;

fn largest_displacement(bath: &DiscreteBath) -> f64 {
    bath.modes().map(|(w, l)| l / (2.0 * w)).fold(0.0, f64::max)
}

/// Coupling that puts the largest `λ/2ω` of the three-mode bath at 0.3.
fn weak_alpha() -> f64 {
    let unit = discretize_bath(&SpectralParams::new(0.25, 1.0, 1.0).unwrap(), 3, 3.0).unwrap();
    (0.3 / largest_displacement(&unit)).powi(2)
}

/// Three modes at ω = 1, 2, 3.
fn weak_bath() -> DiscreteBath {
    let bath = discretize_bath(&SpectralParams::new(0.25, weak_alpha(), 1.0).unwrap(), 3, 3.0).unwrap();
    assert!((largest_displacement(&bath) - 0.3).abs() < 1e-12);
    bath
}

fn weak_config(ic: InitialCondition) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.spectral = SpectralParams::new(0.25, weak_alpha(), 1.0).unwrap();
    cfg.n_modes = 3;
    cfg.omega_max = 3.0;
    cfg.delta = DELTA;
    cfg.initial_condition = ic;
    cfg.integrator.t_max = 5.0;
    cfg.integrator.record_every = 25;
    cfg
}

fn system() -> &'static FockSystem {
    static SYS: OnceLock<FockSystem> = OnceLock::new();
    SYS.get_or_init(|| build_hamiltonian(&weak_bath(), N_MAX, DELTA).unwrap())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

fn state_strategy(n: usize, disp: f64) -> impl Strategy<Value = VariationalState> {
    (
        complex(1.0),
        complex(1.0),
        proptest::collection::vec(complex(disp), n),
        proptest::collection::vec(complex(disp), n),
    )
        .prop_map(|(a, b, f, g)| VariationalState::new(a, b, f, g).unwrap())
}

fn derivative_strategy(n: usize) -> impl Strategy<Value = StateDerivative> {
    (
        complex(1.0),
        complex(1.0),
        proptest::collection::vec(complex(1.0), n),
        proptest::collection::vec(complex(1.0), n),
    )
        .prop_map(|(da, db, df, dg)| StateDerivative {
            da,
            db,
            df,
            dg,
            regularized: false,
        })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn residual_matches_fock_space_for_arbitrary_pairs(
        st in state_strategy(3, 0.4),
        d in derivative_strategy(3),
    ) {
        let sys = system();
        let brute = exact_deviation(sys, &st, &d).unwrap();
        prop_assert!(brute.truncation_defect < 1e-12);
        let closed = deviation_norm_squared(&st, &d, &sys.bath, DELTA).unwrap();
        prop_assert!(rel(closed, brute.value) < 1e-6, "closed {closed:e} brute {:e}", brute.value);
    }

    #[test]
    fn residual_matches_fock_space_on_the_equations_of_motion(st in state_strategy(3, 0.4)) {
        let sys = system();
        let d = eom_rhs(&st, &sys.bath, DELTA, 1e-8).unwrap();
        let brute = exact_deviation(sys, &st, &d).unwrap();
        let closed = deviation_norm_squared(&st, &d, &sys.bath, DELTA).unwrap();
        prop_assert!(rel(closed, brute.value) < 1e-6, "closed {closed:e} brute {:e}", brute.value);
    }

    #[test]
    fn derivative_norm_matches_fock_space(st in state_strategy(3, 0.4), d in derivative_strategy(3)) {
        let sys = system();
        let dot = embed_derivative(sys, &st, &d).unwrap();
        let brute: f64 = dot.iter().map(|z| z.norm_sqr()).sum();
        let parts = deviation_breakdown(&st, &d, &sys.bath, DELTA, 1.0).unwrap();
        prop_assert!(rel(parts.dd, brute) < 1e-9);
    }
}

/// `⟨D|H²|D⟩` from the normal-ordered expansion of `H²`, with explicit
/// double sums over modes.
fn h_squared_normal_ordered(st: &VariationalState, bath: &DiscreteBath, delta: f64) -> f64 {
    let w = bath.frequencies();
    let lam = bath.couplings();
    let n = bath.len();
    let diag = |z: &[Complex64], sign: f64| -> f64 {
        let mut hb2 = 0.0;
        let mut x2 = 0.0;
        let mut anti = 0.0;
        for l in 0..n {
            for m in 0..n {
                hb2 += w[l] * w[m] * z[l].norm_sqr() * z[m].norm_sqr();
                x2 += lam[l] * lam[m] * (2.0 * z[l].re) * (2.0 * z[m].re);
                anti += w[l] * lam[m] * z[l].norm_sqr() * 4.0 * z[m].re;
            }
            hb2 += w[l] * w[l] * z[l].norm_sqr();
            x2 += lam[l] * lam[l];
            anti += w[l] * lam[l] * 2.0 * z[l].re;
        }
        hb2 + 0.25 * x2 + sign * 0.5 * anti
    };
    let overlap = st
        .f
        .iter()
        .zip(&st.g)
        .map(|(f, g)| f.conj() * g - 0.5 * (f.norm_sqr() + g.norm_sqr()))
        .sum::<Complex64>()
        .exp();
    let hop: Complex64 = (0..n).map(|l| w[l] * st.f[l].conj() * st.g[l]).sum::<Complex64>() * overlap;
    let norm = st.a.norm_sqr() + st.b.norm_sqr();
    0.25 * delta * delta * norm + st.a.norm_sqr() * diag(&st.f, 1.0) + st.b.norm_sqr() * diag(&st.g, -1.0)
        - delta * 2.0 * (st.a.conj() * st.b * hop).re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn h_squared_matches_normal_ordered_expansion(
        st in state_strategy(64, 0.8),
        d in derivative_strategy(64),
        alpha in 0.01f64..0.5,
        s in 0.2f64..1.0,
        delta in 0.0f64..1.0,
    ) {
        let bath = discretize_bath(&SpectralParams::new(s, alpha, 1.0).unwrap(), 64, 5.0).unwrap();
        let parts = deviation_breakdown(&st, &d, &bath, delta, 1.0).unwrap();
        let reference = h_squared_normal_ordered(&st, &bath, delta);
        prop_assert!(rel(parts.hh, reference) < 1e-10, "{} vs {reference}", parts.hh);
    }
}

#[test]
fn normal_ordered_reference_agrees_with_fock_space() {
    let sys = system();
    let st = VariationalState::new(
        c(0.6, 0.2),
        c(-0.3, 0.5),
        vec![c(0.2, -0.1), c(0.0, 0.3), c(-0.25, 0.05)],
        vec![c(-0.1, 0.2), c(0.3, 0.0), c(0.1, 0.1)],
    )
    .unwrap();
    let emb = embed_state(sys, &st).unwrap();
    let mut h = vec![Complex64::new(0.0, 0.0); sys.dim];
    sys.hamiltonian.matvec(&emb.psi, &mut h);
    let brute: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    assert!(rel(h_squared_normal_ordered(&st, &sys.bath, DELTA), brute) < 1e-10);
}

#[test]
fn trajectories_track_exact_dynamics() {
    for ic in [InitialCondition::Factorized, InitialCondition::Polarized] {
        let r = oracle_check(&weak_config(ic), N_MAX).unwrap();
        assert!(r.samples >= 20, "{ic}: {} samples", r.samples);
        assert!(r.max_p_z_difference < 1e-2, "{ic}: {}", r.max_p_z_difference);
        assert!(r.max_deviation_mismatch < 1e-6, "{ic}: {}", r.max_deviation_mismatch);
        assert!(r.truncation_defect < 1e-12);
        assert!(r.warnings.is_empty());
    }
}

#[test]
fn occupation_cutoff_converges() {
    let bath = weak_bath();
    let mut previous: Option<Vec<f64>> = None;
    let mut diffs = Vec::new();
    for n_max in [8, 12, 16, 20, 24] {
        let sys = build_hamiltonian(&bath, n_max, DELTA).unwrap();
        let traj = exact_propagate(&sys, InitialCondition::Factorized, 0.25, 5.0).unwrap();
        let pz: Vec<f64> = traj.records.iter().map(|r| r.p_z).collect();
        if let Some(prev) = &previous {
            diffs.push(pz.iter().zip(prev).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        }
        previous = Some(pz);
    }
    assert!(diffs.windows(2).all(|w| w[1] <= w[0].max(1e-13)), "{diffs:?}");
    assert!(*diffs.last().unwrap() < 1e-8, "{diffs:?}");
}

#[test]
fn independent_boson_occupations_are_exact() {
    let bath = weak_bath();
    let sys = build_hamiltonian(&bath, N_MAX, 0.0).unwrap();
    let traj = exact_propagate(&sys, InitialCondition::Factorized, 0.5, 5.0).unwrap();
    for rec in &traj.records {
        assert!((rec.p_z - 1.0).abs() < 1e-10);
        for (l, (w, lam)) in bath.modes().enumerate() {
            let expected = (lam / w).powi(2) * (0.5 * w * rec.t).sin().powi(2);
            assert!((rec.occupations[l] - expected).abs() < 1e-10, "t = {} mode {l}", rec.t);
        }
    }
}
