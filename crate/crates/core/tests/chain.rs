use approx::assert_relative_eq;
use qlaser_core::coeffs::{analyze, CoeffId};
use qlaser_core::linear_theory::{linear_theory, thresholds};
use qlaser_core::oracle::{moments_exact, ode_residual, q_from_state, solve, steady_state};
use qlaser_core::params::{from_dimensionless, reduce, RateSet, ReducedParams};
use qlaser_core::qsolution::{asymptotic_profile, moments, q_gaussian, select_solution, ProfileKind, DEFAULT_THETA};
use qlaser_core::Error;

fn rates(r: f64, i_s: f64, c: f64) -> RateSet {
    from_dimensionless(r, i_s, c, 1.0).unwrap()
}

#[test]
fn rates_survive_reduction_into_the_oracle() {
    let rt = RateSet::new(0.3, 0.05, 0.02, 0.011).unwrap();
    let p = reduce(&rt).unwrap();
    let back = RateSet::from(p);
    let (a, b) = (moments_exact(&solve(&rt).unwrap()), moments_exact(&solve(&back).unwrap()));
    // the reduced triple fixes the state up to the time scale
    assert_relative_eq!(a.mean_photon, b.mean_photon, max_relative = 1e-9);
}

#[test]
fn asymptotic_and_exact_agree_deep_in_the_window() {
    let (i_s, c) = (40.0, 20.0);
    let r = thresholds(c, i_s).unwrap().r_m;
    let p = ReducedParams::new(r, i_s, c).unwrap();
    let asym = moments(&asymptotic_profile(&p, DEFAULT_THETA).unwrap()).unwrap();
    let exact = moments_exact(&solve(&rates(r, i_s, c)).unwrap());
    assert!((asym.mean_photon - exact.mean_photon).abs() < 0.01 * exact.mean_photon);
    assert!((asym.mandel_qf.unwrap() - exact.mandel_qf.unwrap()).abs() < 0.05);
    let lin = linear_theory(&p);
    assert_relative_eq!(lin.i0, 60.0, max_relative = 1e-12);
}

#[test]
fn oracle_profile_moments_match_fock_moments() {
    let s = solve(&rates(3.0, 2.0, 40.0)).unwrap();
    let q = moments(&q_from_state(&s).unwrap()).unwrap();
    let m = moments_exact(&s);
    assert_relative_eq!(q.mean_photon, m.mean_photon, max_relative = 1e-8);
    assert!((q.mandel_qf.unwrap() - m.mandel_qf.unwrap()).abs() < 1e-7);
}

#[test]
fn branch_switch_follows_theta() {
    let (i_s, c) = (40.0, 20.0);
    let r_th = thresholds(c, i_s).unwrap().r_th;
    let below = ReducedParams::new(0.4 * r_th, i_s, c).unwrap();
    let above = ReducedParams::new(0.6 * r_th, i_s, c).unwrap();
    assert_eq!(select_solution(&below, DEFAULT_THETA), ProfileKind::Thermal);
    assert_eq!(select_solution(&above, DEFAULT_THETA), ProfileKind::Generating);
    assert_eq!(select_solution(&above, 0.7), ProfileKind::Thermal);
    assert_eq!(asymptotic_profile(&below, DEFAULT_THETA).unwrap().kind, ProfileKind::Thermal);
}

#[test]
fn gaussian_needs_the_window() {
    let p = ReducedParams::new(0.5, 40.0, 20.0).unwrap();
    assert!(matches!(q_gaussian(&p, &linear_theory(&p)), Err(Error::Regime(_))));
}

#[test]
fn residual_flags_wrong_coefficients_on_a_third_point() {
    let rt = rates(5.0, 10.0, 30.0);
    let s = steady_state(&rt, 120).unwrap();
    let (table, _, _) = analyze(&reduce(&rt).unwrap()).unwrap();
    assert!(ode_residual(&s, &table).max < 1e-9);
    for id in [CoeffId::B21, CoeffId::B31, CoeffId::B52] {
        assert!(ode_residual(&s, &table.perturbed(id, 1.01)).max > 1e-3, "{id}");
    }
}

