use proptest::prelude::*;
use sfio_core::applications::*;
use sfio_core::jets::{Block, ConstantMap, Monomial, Polynomial, Signature, SmoothMap, TrigPolynomial, TrigTerm};
use sfio_core::oscillatory::{pair_distribution, PointDistribution, QuadratureConfig};
use sfio_core::stochastic::GlobalGaussianSpeed;
use sfio_core::symbol_spaces::{axis, check_alpha_membership, check_homogeneity, GridSpec, OpenSet, TestFunction};
use sfio_core::Error;
use std::sync::Arc;

fn one() -> Signature {
    Signature::new(1, 0, 0)
}

fn constant(c: f64) -> Arc<dyn SmoothMap> {
    Arc::new(ConstantMap::new(one(), c))
}

fn sine_speed(amp: f64) -> Arc<dyn SmoothMap> {
    Arc::new(TrigPolynomial::new(one(), Block::X, 0, 1.0, vec![TrigTerm { k: 1.0, cos: 0.0, sin: amp }]).unwrap())
}

fn cheap() -> QuadratureConfig {
    QuadratureConfig { xi_max: 24.0, estimate_error: false, ..Default::default() }
}

fn gauss(x: f64) -> f64 {
    (-x * x).exp()
}

fn sup_error(a: &[sfio_core::Complex64], b: impl Fn(usize) -> sfio_core::Complex64) -> f64 {
    a.iter().enumerate().map(|(i, v)| (v - b(i)).norm()).fold(0.0, f64::max)
}

#[test]
fn unit_speed_characteristics_translate() {
    let j = solve_characteristics(constant(1.0).as_ref(), 0.7, 0.2, 3).unwrap();
    assert!((j.gamma - 0.5).abs() < 1e-14);
    assert!((j.derivs[1] - 1.0).abs() < 1e-14);
    assert!(j.derivs[2..].iter().all(|d| d.abs() < 1e-14));
}

#[test]
fn linear_speed_has_a_closed_form_foot_point() {
    // c = x + 1 is only bounded below on a box, so the solver is called directly
    let c = Polynomial::new(one(), &[Monomial { coef: 1.0, x: vec![0], y: vec![], xi: vec![] }, Monomial { coef: 1.0, x: vec![1], y: vec![], xi: vec![] }]).unwrap();
    for &x in &[-0.5, 0.0, 0.5, 1.0] {
        for &t in &[0.1, 0.5, 1.0] {
            let j = solve_characteristics(&c, x, t, 3).unwrap();
            let e = (-t).exp();
            assert!((j.gamma - ((x + 1.0) * e - 1.0)).abs() < 1e-8, "x = {x}, t = {t}");
            assert!((j.derivs[1] - e).abs() < 1e-8);
            assert!(j.derivs[2].abs() < 1e-8 && j.derivs[3].abs() < 1e-8);
        }
    }
}

#[test]
fn characteristics_survive_step_halving() {
    let c = sine_speed(0.5);
    let opts = OdeOptions::default();
    let a = solve_characteristics_with(c.as_ref(), 0.0, 0.3, 3, &opts).unwrap();
    let b = solve_characteristics_with(c.as_ref(), 0.0, 0.3, 3, &opts.halved()).unwrap();
    for (u, v) in a.derivs.iter().zip(&b.derivs) {
        assert!((u - v).abs() < 1e-8, "{u} vs {v}");
    }
}

#[test]
fn speeds_below_alpha_are_rejected() {
    assert!(transport_phase(sine_speed(0.5), 0.3, 0.6).is_err());
    assert!(transport_phase(sine_speed(0.5), 0.3, 0.0).is_err());
    assert!(check_speed(sine_speed(0.5).as_ref(), 0.5).is_ok());
}

#[test]
fn transport_at_unit_speed_is_a_translation() {
    let u0 = TestFunction::gaussian(0.0, 1.0, 1.0).unwrap();
    let xs = [-0.2, 0.4, 1.1];
    let f = transport_solve(constant(1.0), 0.4, 0.5, &u0, &xs, &QuadratureConfig::default()).unwrap();
    let err = sup_error(&f.values, |i| gauss(xs[i] - 0.4).into());
    assert!(err < 1e-4, "{err}");
}

#[test]
fn transport_matches_the_characteristics_oracle() {
    let c = sine_speed(0.5);
    let u0 = TestFunction::gaussian(0.0, 1.0, 1.0).unwrap();
    let xs = [-0.6, 0.1, 0.9];
    let f = transport_solve(c.clone(), 0.3, 0.5, &u0, &xs, &cheap()).unwrap();
    let oracle = transport_oracle(c.as_ref(), 0.3, &u0, &xs).unwrap();
    let err = sup_error(&f.values, |i| oracle[i].into());
    assert!(err < 1e-3, "{err}");
}

#[test]
fn transport_at_time_zero_is_the_identity() {
    let u0 = TestFunction::gaussian(0.2, 0.8, 1.0).unwrap();
    let xs = [-0.5, 0.3];
    let f = transport_solve(sine_speed(0.5), 0.0, 0.5, &u0, &xs, &QuadratureConfig::default()).unwrap();
    let err = sup_error(&f.values, |i| u0.value(&[xs[i]]).unwrap().into());
    assert!(err < 1e-6, "{err}");
}

#[test]
fn transported_point_mass_pairs_through_the_jacobian() {
    // u₀ = δ_{0.3} moves to x* with γ(x*) = 0.3 and weight 1/γ'(x*)
    let c = sine_speed(0.5);
    let t = 0.4;
    let op = transport_operator(c.clone(), t, 0.5, &cheap()).unwrap();
    let psi = TestFunction::gaussian(0.5, 0.7, 1.0).unwrap();
    let v = pair_distribution(&op, &PointDistribution::delta(0.3), &psi).unwrap();
    let x_star = solve_characteristics(c.as_ref(), 0.3, -t, 0).unwrap().gamma;
    let jac = solve_characteristics(c.as_ref(), x_star, t, 1).unwrap().derivs[1];
    let expected = psi.value(&[x_star]).unwrap() / jac;
    assert!((v - expected).norm() < 1e-5, "{v} vs {expected}");
}

#[test]
fn constant_speed_flows() {
    let ts = [0.0, 0.5, 1.0, 2.0];
    for xi in [-1.5, 1.0, 3.0] {
        let flows = solve_flows(constant(1.0).as_ref(), &ts, 0.2, xi, &OdeOptions::default()).unwrap();
        for s in &flows {
            assert!((s.f - (0.2 + s.t * xi.signum())).abs() < 1e-12);
            assert_eq!(s.g, xi);
        }
    }
    assert!(solve_flows(constant(1.0).as_ref(), &ts, 0.0, 0.5, &OdeOptions::default()).is_err());
}

#[test]
fn flows_keep_the_symbol_on_its_linear_branch() {
    let c = sine_speed(0.25);
    let data = HalfWaveData::new(c.clone(), (-3.0, 3.0), 2.0).unwrap();
    assert!(data.t_obs > 0.0);
    let ts = axis(0.0, data.t_obs, 21);
    for x1 in [-2.0, 0.0, 1.3] {
        for xi1 in [-2.0, 2.0] {
            let flows = solve_flows(c.as_ref(), &ts, x1, xi1, &OdeOptions::default()).unwrap();
            let c1 = c.value(&sfio_core::jets::Point::new(&[x1], &[], &[]).unwrap()).unwrap();
            for s in &flows {
                assert!((p_value(s.g) - s.g.abs()).abs() < 1e-14);
                let dp = p_coefficients(s.g, 1)[1];
                assert!((dp - xi1.signum()).abs() < 1e-14);
                // the Hamiltonian c(F)P(G) is conserved along the flow
                let cf = c.value(&sfio_core::jets::Point::new(&[s.f], &[], &[]).unwrap()).unwrap();
                assert!((cf * p_value(s.g) - c1 * xi1.abs()).abs() < 1e-9, "t = {}", s.t);
            }
        }
    }
}

#[test]
fn flows_survive_step_halving() {
    let c = sine_speed(0.25);
    let ts = [0.5, 1.0, 1.5];
    let a = solve_flows(c.as_ref(), &ts, 0.4, 1.5, &OdeOptions::default()).unwrap();
    let b = solve_flows(c.as_ref(), &ts, 0.4, 1.5, &OdeOptions::default().halved()).unwrap();
    for (u, v) in a.iter().zip(&b) {
        assert!((u.f - v.f).abs() < 1e-8 && (u.g - v.g).abs() < 1e-8);
    }
}

#[test]
fn eikonal_phase_for_constant_speed() {
    let data = HalfWaveData::new(constant(1.5), (-3.0, 3.0), 1.0).unwrap();
    assert_eq!(data.t_obs, 1.0);
    for (x, t, xi) in [(0.3, 0.5, 1.0), (-1.0, 0.9, -1.0), (2.0, 0.2, 2.5)] {
        let j = eikonal_phi(&data, x, t, xi, 2).unwrap();
        assert!((j.value - (x * xi - 1.5 * t * xi.abs())).abs() < 1e-12);
        assert!((j.derivs[1] - xi).abs() < 1e-12 && j.derivs[2].abs() < 1e-12);
    }
}

#[test]
fn eikonal_phase_starts_linear() {
    let data = HalfWaveData::new(sine_speed(0.25), (-3.0, 3.0), 2.0).unwrap();
    for (x, xi) in [(0.3, 1.0), (-2.0, -1.0)] {
        assert_eq!(eikonal_phi(&data, x, 0.0, xi, 0).unwrap().value, x * xi);
    }
    let err = eikonal_phi(&data, 0.0, data.t_obs + 0.1, 1.0, 0).unwrap_err();
    assert!(matches!(err, Error::BeyondHorizon { .. }));
    assert!(eikonal_phi(&data, 0.0, 0.5, 0.5, 0).is_err());
}

#[test]
fn eikonal_residual_is_small() {
    let data = HalfWaveData::new(sine_speed(0.25), (-3.0, 3.0), 2.0).unwrap();
    for x in [-1.5, 0.0, 0.8] {
        for t in [0.0, 0.3, 1.0] {
            for xi in [-1.0, 1.0] {
                let r = eikonal_residual(&data, x, t, xi).unwrap();
                assert!(r < 1e-4, "x = {x}, t = {t}, ξ = {xi}: {r}");
            }
        }
    }
}

#[test]
fn eikonal_representation_matches_the_backward_flow() {
    // Hamilton–Jacobi: φ(x, t, ξ) = ξ·F(−t; x, ξ) when P is linear along the rays
    let c = sine_speed(0.25);
    let data = HalfWaveData::new(c.clone(), (-3.0, 3.0), 2.0).unwrap();
    let neg: Arc<dyn SmoothMap> =
        Arc::new(TrigPolynomial::new(one(), Block::X, 0, -1.0, vec![TrigTerm { k: 1.0, cos: 0.0, sin: -0.25 }]).unwrap());
    for (x, t, xi) in [(0.4, 0.7, 1.0), (-1.2, 1.5, -1.0), (2.0, 0.3, 1.0)] {
        // running the flow backwards is the forward flow of −c
        let back = solve_flows(neg.as_ref(), &[t], x, xi, &OdeOptions::default()).unwrap();
        let phi = eikonal_phi(&data, x, t, xi, 0).unwrap().value;
        assert!((phi - xi * back[0].f).abs() < 1e-9, "{phi} vs {}", xi * back[0].f);
    }
}

#[test]
fn halfwave_at_constant_speed_matches_the_spectral_oracle() {
    let data = HalfWaveData::new(constant(1.0), (-3.0, 3.0), 1.0).unwrap();
    let u0 = TestFunction::gaussian(0.0, 0.5, 1.0).unwrap();
    let xs = [-0.5, 0.0, 0.4];
    let t = 0.3;
    let f = halfwave_solve(&data, t, &u0, &xs, &cheap()).unwrap();
    let oracle = spectral_halfwave(1.0, &u0, t, &xs, &SpectralOptions::default()).unwrap();
    let err = sup_error(&f.values, |i| oracle[i]);
    assert!(err < 1e-2, "{err}");
}

#[test]
fn halfwave_at_time_zero_is_the_identity() {
    let data = HalfWaveData::new(sine_speed(0.25), (-3.0, 3.0), 2.0).unwrap();
    let u0 = TestFunction::gaussian(0.0, 0.8, 1.0).unwrap();
    let xs = [-0.3, 0.5];
    let f = halfwave_solve(&data, 0.0, &u0, &xs, &QuadratureConfig::default()).unwrap();
    let err = sup_error(&f.values, |i| u0.value(&[xs[i]]).unwrap().into());
    assert!(err < 1e-6, "{err}");
}

#[test]
fn halfwave_with_variable_speed_tracks_the_grid_reference() {
    let c = sine_speed(0.25);
    let data = HalfWaveData::new(c.clone(), (-3.0, 3.0), 2.0).unwrap();
    let u0 = TestFunction::gaussian(0.0, 0.5, 1.0).unwrap();
    let xs = [-0.4, 0.0, 0.3];
    let t = 0.2;
    let f = halfwave_solve(&data, t, &u0, &xs, &cheap()).unwrap();
    let reference = pseudo_spectral_halfwave(c.as_ref(), &u0, t, &xs, &PeriodicGrid::default()).unwrap();
    let err = sup_error(&f.values, |i| reference[i]);
    assert!(err < 5e-2, "{err}");
}

#[test]
fn spectral_references_agree_at_constant_speed() {
    let u0 = TestFunction::gaussian(0.0, 0.5, 1.0).unwrap();
    let xs = [-0.5, 0.0, 0.7];
    let a = spectral_halfwave(1.0, &u0, 0.3, &xs, &SpectralOptions::default()).unwrap();
    let b = pseudo_spectral_halfwave(constant(1.0).as_ref(), &u0, 0.3, &xs, &PeriodicGrid::default()).unwrap();
    let err = sup_error(&a, |i| b[i]);
    assert!(err < 1e-4, "{err}");
}

fn wave(c0: f64) -> WaveScenario {
    WaveScenario::new(c0, TestFunction::gaussian(0.0, 1.0, 1.0).unwrap()).unwrap()
}

#[test]
fn deterministic_wave_is_dalembert() {
    let xs = [-1.0, -0.2, 0.5];
    let f = wave_solve(&wave(1.0), 0.5, &xs, &QuadratureConfig::default()).unwrap();
    let err = sup_error(&f.values, |i| (0.5 * (gauss(xs[i] - 0.5) + gauss(xs[i] + 0.5))).into());
    assert!(err < 1e-4, "{err}");
    let f = wave_solve(&wave(1.0), 0.0, &xs, &cheap()).unwrap();
    let err = sup_error(&f.values, |i| gauss(xs[i]).into());
    assert!(err < 1e-6, "{err}");
}

#[test]
fn random_wave_mean_matches_the_expected_field() {
    let w = wave(1.0).with_perturbation(GlobalGaussianSpeed::new(1.0, 0.1, 0.2).unwrap()).unwrap();
    let xs = [-1.2, -0.4, 0.3, 1.0];
    let exp = wave_expected(&w, 1.0, &xs, &cheap()).unwrap();
    let mc = wave_mc(&w, 1.0, &xs, 2000, 2024, &[]).unwrap();
    for i in 0..xs.len() {
        assert!((mc.mean[i] - exp.values[i]).norm() < 3.0 * mc.se[i], "x = {}", xs[i]);
    }
}

#[test]
fn zero_variance_wave_equals_the_branch_sum() {
    let w = wave(1.0).with_perturbation(GlobalGaussianSpeed::new(1.0, 0.0, 0.2).unwrap()).unwrap();
    let xs = axis(-2.0, 2.0, 9);
    let mc = wave_mc(&w, 0.7, &xs, 16, 1, &[]).unwrap();
    let exact = dalembert(&w.u0, w.weights, 1.0, 0.7, &xs).unwrap();
    for (m, e) in mc.mean.iter().zip(&exact) {
        assert!((m.re - e).abs() < 1e-12 && m.im == 0.0);
    }
    assert!(wave(1.0).with_perturbation(GlobalGaussianSpeed::new(2.0, 0.1, 0.2).unwrap()).is_err());
}

#[test]
fn scenario_phases_are_homogeneous_and_nondegenerate() {
    let grid = GridSpec::whole_line(7);
    let data = HalfWaveData::new(sine_speed(0.25), (-3.0, 3.0), 2.0).unwrap();
    let phases = [
        ("transport", transport_phase(sine_speed(0.5), 0.3, 0.5).unwrap(), 0.1),
        ("halfwave", halfwave_phase(&data, 0.5).unwrap(), 0.1),
        ("wave+", wave_branch_phase(1.0, 1.0, 0.5).unwrap(), 0.5),
        ("wave-", wave_branch_phase(1.0, -1.0, 0.5).unwrap(), 0.5),
    ];
    for (name, phi, alpha) in phases {
        let h = check_homogeneity(&phi, &[0.5, 2.0, 10.0], &grid, 2).unwrap();
        assert!(h.max_residual < 1e-8, "{name}: {}", h.max_residual);
        let a = check_alpha_membership(&phi, alpha, &GridSpec::new(OpenSet::whole(1), OpenSet::whole(1), 7), 2).unwrap();
        assert!(a.pass, "{name}: {}", a.min_observed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn foot_points_increase_with_x(x in -5.0..5.0f64, t in 0.0..2.0f64) {
        let j = solve_characteristics(sine_speed(0.5).as_ref(), x, t, 1).unwrap();
        prop_assert!(j.derivs[1] > 0.0);
    }

    #[test]
    fn flows_are_homogeneous_in_frequency(x1 in -3.0..3.0f64, xi1 in 1.0..3.0f64, lambda in 1.0..5.0f64, neg in any::<bool>()) {
        let xi1 = if neg { -xi1 } else { xi1 };
        let c = sine_speed(0.25);
        let ts = [0.4, 1.2];
        let a = solve_flows(c.as_ref(), &ts, x1, xi1, &OdeOptions::default()).unwrap();
        let b = solve_flows(c.as_ref(), &ts, x1, lambda * xi1, &OdeOptions::default()).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((lambda * u.g - v.g).abs() < 1e-8 * lambda * xi1.abs());
            prop_assert!((u.f - v.f).abs() < 1e-8);
        }
    }

    #[test]
    fn eikonal_residual_stays_small(x in -2.5..2.5f64, t in 0.0..1.5f64, neg in any::<bool>()) {
        let data = HalfWaveData::new(sine_speed(0.25), (-3.0, 3.0), 2.0).unwrap();
        let xi = if neg { -1.0 } else { 1.0 };
        prop_assert!(eikonal_residual(&data, x, t, xi).unwrap() < 1e-4);
    }
}
