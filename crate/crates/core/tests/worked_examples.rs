//! Worked examples of every module, checked through the public API against
//! independent oracles.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use approx::assert_abs_diff_eq;
use molcav::analysis::{
    detection_probability, fidelity_pure, joint_wigner, joint_wigner_points, log_negativity, log_negativity_pure,
    mean_excitations, project_electronic, WIGNER_MAX,
};
use molcav::analytic::{
    analytic_state, cat_state, detection_prob_analytic, full_state_analytic, magnus_unitary, mean_excitations_analytic,
};
use molcav::dynamics::{evolve_schrodinger, linspace, propagate, IntegratorOptions};
use molcav::hilbert::{
    coherent_state, partial_trace, partial_transpose, CompositeSpace, DensityMatrix, FockCutoffs, Level, Mode, Sign,
    Space, StateVector, C64,
};
use molcav::model::{bessel_j, derive_effective, rwa_hamiltonian_td, ModelParams};
use nalgebra::{DMatrix, DVector};

fn baseline() -> (ModelParams, molcav::model::EffectiveParams) {
    let p = ModelParams::default();
    let e = derive_effective(&p).unwrap();
    (p, e)
}

fn bell() -> DensityMatrix {
    let c = FockCutoffs::new(1, 1).unwrap();
    let mut v = DVector::zeros(4);
    v[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    v[3] = C64::new(FRAC_1_SQRT_2, 0.0);
    StateVector::new(Space::TwoMode(c), v).unwrap().to_density()
}

#[test]
fn coherent_state_mean_and_overlap() {
    let s = coherent_state(C64::new(2.0, 0.0), 20).unwrap().value;
    let mean: f64 = s.amplitudes().iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum();
    assert_abs_diff_eq!(mean, 4.0, epsilon = 1e-4);

    let (a, b) = (C64::new(1.0, 0.0), C64::new(1.0, 1.0));
    let x = coherent_state(a, 25).unwrap().value;
    let y = coherent_state(b, 25).unwrap().value;
    let oracle = (-(a.norm_sqr() + b.norm_sqr()) / 2.0 + a.conj() * b).exp();
    assert!((x.inner(&y).unwrap() - oracle).norm() < 1e-6);
}

#[test]
fn bell_state_partial_operations() {
    let rho = bell();
    let pt = partial_transpose(&rho, Mode::Vibration).unwrap();
    let min = pt.symmetric_eigen().eigenvalues.min();
    assert_abs_diff_eq!(min, -0.5, epsilon = 1e-12);

    let reduced = partial_trace(&rho, Mode::Cavity).unwrap();
    let half = DMatrix::from_diagonal_element(2, 2, C64::new(0.5, 0.0));
    assert!((reduced.matrix() - half).camax() < 1e-15);
    assert_abs_diff_eq!(log_negativity(&rho).unwrap(), 1.0, epsilon = 1e-8);
}

#[test]
fn bessel_reference_value() {
    assert_abs_diff_eq!(bessel_j(1, 1.841).unwrap(), 0.58187, epsilon = 1e-4);
    assert_abs_diff_eq!(bessel_j(-1, 0.7).unwrap(), -bessel_j(1, 0.7).unwrap(), epsilon = 1e-15);
}

#[test]
fn baseline_effective_parameters() {
    let (_, e) = baseline();
    assert_abs_diff_eq!(e.theta_mix, 0.73556, epsilon = 1e-4);
    assert_abs_diff_eq!(e.omega_plus, 52.7625, epsilon = 1e-3);
    assert_abs_diff_eq!(e.omega_minus, 47.7375, epsilon = 1e-3);
    assert_abs_diff_eq!(e.g_a, -0.3904, epsilon = 5e-4);
    assert_abs_diff_eq!(e.g_b, -0.4314, epsilon = 5e-4);
    assert_abs_diff_eq!(e.delta_a, 0.1952, epsilon = 3e-4);
    assert_abs_diff_eq!(e.omega_0, 47.5423, epsilon = 1e-3);
    assert_abs_diff_eq!(e.delta_b, 5.2202, epsilon = 1e-3);
}

#[test]
fn cat_amplitudes_and_excitations_at_detection_time() {
    let (p, e) = baseline();
    let s = analytic_state(&p, &e, e.detection_time().unwrap()).unwrap();
    assert_abs_diff_eq!(s.alpha.norm(), 2.88, epsilon = 0.08);
    assert_abs_diff_eq!(s.beta.norm(), 2.82, epsilon = 0.08);
    let (na, nb) = mean_excitations_analytic(&s);
    assert_abs_diff_eq!(na, 4.15, epsilon = 0.25);
    assert_abs_diff_eq!(nb, 3.98, epsilon = 0.25);
    let (pp, pm) = detection_prob_analytic(&s);
    assert_abs_diff_eq!(pp, 0.5, epsilon = 0.01);
    assert_abs_diff_eq!(pm, 0.5, epsilon = 0.01);

    let space = CompositeSpace::new(FockCutoffs::new(30, 28).unwrap()).unwrap();
    let full = full_state_analytic(&s, space).unwrap().value;
    let (ba, bb) = mean_excitations(&full);
    assert_abs_diff_eq!(ba, na, epsilon = 1e-6);
    assert_abs_diff_eq!(bb, nb, epsilon = 1e-6);
    let g00 = StateVector::basis(space, Level::Ground, 0, 0).unwrap();
    assert_abs_diff_eq!(g00.inner(&full).unwrap().norm(), FRAC_1_SQRT_2, epsilon = 1e-8);
}

#[test]
fn decoupling_time_bounds() {
    let (p, e) = baseline();
    let s = analytic_state(&p, &e, e.period().unwrap()).unwrap();
    let (sn, cs) = e.theta_mix.sin_cos();
    assert!(s.alpha.norm() <= 2.0 * (e.g_b * sn / e.delta_b).abs() + 1e-9);
    assert!(s.beta.norm() <= 2.0 * (e.g_b * cs / e.delta_b).abs() + 1e-9);
    assert!(s.alpha.norm() < 0.112 && s.beta.norm() < 0.124);
}

#[test]
fn analytic_probabilities_sum_to_one() {
    let (p, e) = baseline();
    for k in 0..50 {
        let s = analytic_state(&p, &e, 0.731 * k as f64).unwrap();
        assert_eq!(s.p_plus + s.p_minus, 1.0);
    }
}

#[test]
fn large_symmetric_cat_has_half_the_excitations() {
    let (p, e) = baseline();
    let mut s = analytic_state(&p, &e, 0.0).unwrap();
    s.alpha = C64::new(3.0, 0.0);
    s.beta = C64::new(3.0, 0.0);
    s.theta = 0.0;
    let q = (-(s.alpha.norm_sqr() + s.beta.norm_sqr()) / 2.0).exp();
    s.m_plus = Some((2.0 * (1.0 + q)).sqrt().recip());
    s.m_minus = Some((2.0 * (1.0 - q)).sqrt().recip());
    for sign in Sign::ALL {
        let cat = cat_state(&s, sign, FockCutoffs::new(30, 30).unwrap()).unwrap().value;
        let (na, nb) = mean_excitations(&cat);
        assert_abs_diff_eq!(na, 4.5, epsilon = 1e-3);
        assert_abs_diff_eq!(nb, 4.5, epsilon = 1e-3);
    }
}

#[test]
fn magnus_propagator_matches_direct_integration() {
    let (_, e) = baseline();
    let cutoffs = FockCutoffs::new(48, 12).unwrap();
    let space = CompositeSpace::new(cutoffs).unwrap();
    let ts = e.detection_time().unwrap();
    let u = magnus_unitary(&e, ts, cutoffs).unwrap();
    let wide = FockCutoffs::new(64, 12).unwrap();
    let m = magnus_unitary(&e, ts, wide).unwrap().to_matrix();
    let low: Vec<usize> = (0..3).flat_map(|n| (0..3).map(move |j| n * wide.dim_b() + j)).collect();
    let cols = m.select_columns(&low);
    let defect = (cols.adjoint() * &cols - DMatrix::identity(low.len(), low.len())).camax();
    assert!(defect < 1e-10, "unitarity defect {defect:e} on low Fock columns");

    let closed = u.apply(&StateVector::fock(cutoffs, 0, 0).unwrap()).unwrap();
    let h = rwa_hamiltonian_td(&e, &space).unwrap();
    let mut y: Vec<C64> = StateVector::basis(space, Level::Excited, 0, 0).unwrap().amplitudes().iter().copied().collect();
    propagate(&h, &mut y, 0.0, ts, 8000).unwrap();
    let overlap: C64 = space.block(Level::Excited).zip(closed.iter()).map(|(i, c)| c.conj() * y[i]).sum();
    assert!(overlap.norm_sqr() >= 1.0 - 1e-8, "1 - F = {:e}", 1.0 - overlap.norm_sqr());
}

#[test]
fn mid_period_cats_are_maximally_entangled() {
    let (p, e) = baseline();
    let t = 0.5 * e.period().unwrap();
    let s = analytic_state(&p, &e, t).unwrap();
    let cat = cat_state(&s, Sign::Plus, FockCutoffs::new(28, 27).unwrap()).unwrap().value;
    assert_abs_diff_eq!(log_negativity_pure(&cat).unwrap(), 1.0, epsilon = 0.01);
}

#[test]
fn coherent_wigner_is_a_gaussian() {
    let c = FockCutoffs::new(20, 20).unwrap();
    let (a0, b0) = (C64::new(1.0, 0.0), C64::new(0.0, 0.5));
    let va = molcav::hilbert::coherent_amplitudes(a0, c.dim_a()).unwrap().value;
    let vb = molcav::hilbert::coherent_amplitudes(b0, c.dim_b()).unwrap().value;
    let v = DVector::from_fn(c.two_mode_dim(), |i, _| va[i / c.dim_b()] * vb[i % c.dim_b()]);
    let psi = StateVector::normalized(Space::TwoMode(c), v).unwrap();
    let axis = [-2.0, -1.0, 0.0, 0.7, 1.3, 2.0];
    let pts: Vec<C64> = axis.iter().flat_map(|&x| axis.iter().map(move |&y| C64::new(x, y)))
        .filter(|z| z.norm() <= 2.0)
        .collect();
    let grid = joint_wigner(&psi, &pts, &pts, 2).unwrap();
    for (i, s) in pts.iter().enumerate() {
        for (j, x) in pts.iter().enumerate() {
            let oracle = WIGNER_MAX * (-2.0 * (s - a0).norm_sqr() - 2.0 * (x - b0).norm_sqr()).exp();
            assert!((grid.values[(i, j)] - oracle).abs() < 1e-4);
        }
    }
    let vac = StateVector::fock(c, 0, 0).unwrap();
    let w0 = joint_wigner_points(&vac, &[(C64::default(), C64::default())]).unwrap()[0];
    assert_abs_diff_eq!(w0, 4.0 / (PI * PI), epsilon = 1e-6);
}

#[test]
fn odd_cat_wigner_has_two_lobes_and_a_negative_centre() {
    let (p, e) = baseline();
    let s = analytic_state(&p, &e, e.detection_time().unwrap()).unwrap();
    let cat = cat_state(&s, Sign::Minus, FockCutoffs::new(28, 27).unwrap()).unwrap().value;
    let (ra, rb) = (s.alpha.re, s.beta.re);
    let origin = (C64::default(), C64::default());
    let lobe = (C64::new(ra, 0.0), C64::new(rb, 0.0));
    let axis = linspace(-0.6, 0.6, 12);
    let mid: Vec<(C64, C64)> = axis
        .iter()
        .flat_map(|&u| axis.iter().map(move |&v| (C64::new(ra / 2.0 + u, 0.0), C64::new(rb / 2.0 + v, 0.0))))
        .collect();
    let w = joint_wigner_points(&cat, &[origin, lobe]).unwrap();
    assert!(w[0] > 0.05 && w[1] > 0.05, "{w:?}");
    let central = joint_wigner_points(&cat, &mid).unwrap();
    let min = central.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(min < -0.05, "most negative value near the midpoint {min}");
}

#[test]
fn projection_of_the_initial_state() {
    let space = CompositeSpace::new(FockCutoffs::new(2, 2).unwrap()).unwrap();
    let psi = StateVector::initial_plus(space);
    let r = project_electronic(&psi, Sign::Plus).unwrap();
    assert_eq!(r.probability, 1.0);
    assert!(matches!(
        project_electronic(&psi, Sign::Minus),
        Err(molcav::Error::VanishingBranch { .. })
    ));
}

/// Exact evolution at the baseline: probabilities and excitation numbers
/// against the closed forms over one period.
#[test]
fn exact_dynamics_tracks_the_analytic_solution() {
    let (p, e) = baseline();
    let space = CompositeSpace::new(FockCutoffs::new(29, 26).unwrap()).unwrap();
    let period = e.period().unwrap();
    let times: Vec<f64> = (1..=200).map(|k| k as f64 * period / 200.0).collect();
    let traj = evolve_schrodinger(&p, &e, &StateVector::initial_plus(space), &IntegratorOptions::with_samples(times))
        .unwrap();

    let na: Vec<f64> = traj.states.iter().map(|s| mean_excitations(s).0).collect();
    let k = (0..na.len()).max_by(|&a, &b| na[a].total_cmp(&na[b])).unwrap();
    let ts = e.detection_time().unwrap();
    assert!((traj.times[k] - ts).abs() < 0.05 * ts, "peak at {}", traj.times[k]);
    let s = analytic_state(&p, &e, traj.times[k]).unwrap();
    assert!((na[k] / mean_excitations_analytic(&s).0 - 1.0).abs() < 0.05);

    let mid = traj.times.iter().position(|&t| (t - ts).abs() < 1e-9).unwrap();
    for sign in Sign::ALL {
        assert_abs_diff_eq!(detection_probability(&traj.states[mid], sign).unwrap(), 0.5, epsilon = 0.05);
    }
    let s = analytic_state(&p, &e, ts).unwrap();
    let f = fidelity_pure(&full_state_analytic(&s, space).unwrap().value, &traj.states[mid]).unwrap();
    assert!(f >= 0.95, "F(t_s) = {f}");
}
