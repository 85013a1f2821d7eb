mod common;

use common::{alpha_threshold_by_quadrature, cover_instance, simpson};
use ufl_core::charfn::{
    alpha, bound_lemma20, characteristic_of_client, characteristic_of_instance, decompose, reconstruct,
    threshold, PiecewiseConstant, Profile,
};
use ufl_core::game::GAMMA_0;
use ufl_core::instance::UflInstance;
use ufl_core::relaxation::{solve_relaxation, FractionalSolution};

fn half_half() -> FractionalSolution {
    let inst = UflInstance::new(vec![1.0, 1.0], vec![vec![1.0, 2.0]]).unwrap();
    FractionalSolution::from_values(&inst, vec![0.5, 0.5], vec![0.5, 0.5]).unwrap()
}

/// Quadrature of the defining integral, one Simpson panel set per piece.
fn alpha_by_quadrature(gamma: f64, h: &PiecewiseConstant) -> f64 {
    let decay: f64 = h
        .pieces()
        .map(|(a, b, c)| simpson(|p| c * gamma * (-gamma * p).exp(), a, b, 400))
        .sum();
    let integral: f64 = h.pieces().map(|(a, b, _)| h.eval(0.5 * (a + b)) * (b - a)).sum();
    decay + (-gamma).exp() * (gamma * integral + (3.0 - gamma) * h.eval(1.0 / gamma))
}

#[test]
fn client_profile_follows_distance_order() {
    let h = characteristic_of_client(&half_half(), 0).unwrap();
    assert_eq!(h.breakpoints(), &[0.0, 0.5, 1.0]);
    assert_eq!(h.values(), &[1.0, 2.0]);
    assert_eq!(h.eval(0.5), 1.0);
    assert_eq!(h.eval(0.0), 1.0);
    assert!((h.integral() - 1.5).abs() < 1e-15);
    match h.normalize() {
        Profile::Normalized(n) => {
            assert!((n.values()[0] - 2.0 / 3.0).abs() < 1e-15);
            assert!((n.values()[1] - 4.0 / 3.0).abs() < 1e-15);
        }
        Profile::Degenerate => panic!("nonzero profile"),
    }
}

#[test]
fn instance_profile_integrates_to_connection_cost() {
    for seed in 0..10 {
        let frac = solve_relaxation(&cover_instance(6, 10, seed)).unwrap();
        let h = characteristic_of_instance(&frac).unwrap();
        assert!((h.integral() - frac.connection_cost()).abs() < 1e-7);
    }
}

#[test]
fn identical_clients_double() {
    let inst = UflInstance::new(vec![1.0, 1.0], vec![vec![1.0, 2.0], vec![1.0, 2.0]]).unwrap();
    let frac = FractionalSolution::from_values(&inst, vec![0.5, 0.5, 0.5, 0.5], vec![0.5, 0.5]).unwrap();
    let h = characteristic_of_instance(&frac).unwrap();
    assert_eq!(h.values(), &[2.0, 4.0]);
}

#[test]
fn thresholds_and_decomposition() {
    assert_eq!(threshold(0.0).unwrap().values(), &[1.0]);
    let h = threshold(0.5).unwrap();
    assert_eq!((h.eval(0.5), h.eval(0.75)), (0.0, 2.0));
    for q in [0.0, 0.1, 0.5, 0.9] {
        assert!((threshold(q).unwrap().integral() - 1.0).abs() < 1e-12);
        let terms = decompose(&threshold(q).unwrap());
        assert_eq!(terms.len(), 1);
        assert!((terms[0].q - q).abs() < 1e-15 && (terms[0].weight - 1.0).abs() < 1e-12);
    }
    let h = characteristic_of_client(&half_half(), 0).unwrap();
    let terms = decompose(&h);
    assert_eq!(terms.len(), 2);
    assert_eq!((terms[0].q, terms[0].weight), (0.0, 1.0));
    assert_eq!((terms[1].q, terms[1].weight), (0.5, 0.5));
    let back = reconstruct(&terms).unwrap();
    for k in 0..=1000 {
        let p = k as f64 / 1000.0;
        assert!((back.eval(p) - h.eval(p)).abs() < 1e-12);
    }
    assert!(decompose(&PiecewiseConstant::constant(0.0).unwrap()).is_empty());
    assert!(matches!(PiecewiseConstant::constant(0.0).unwrap().normalize(), Profile::Degenerate));
}

#[test]
fn alpha_closed_forms() {
    let h0 = threshold(0.0).unwrap();
    assert!((alpha(1.5, &h0).unwrap() - 1.446_260_320_296_85).abs() < 1e-12);
    let expected = ((-1.8f64).exp() - (-2.0f64).exp()) / 0.1 + 2.0 * (-2.0f64).exp();
    assert!((alpha(2.0, &threshold(0.9).unwrap()).unwrap() - expected).abs() < 1e-12);
    assert!((expected - 0.5703).abs() < 1e-4);
}

#[test]
fn alpha_agrees_with_quadrature() {
    let frac = solve_relaxation(&cover_instance(5, 8, 2)).unwrap();
    let Profile::Normalized(derived) = characteristic_of_instance(&frac).unwrap().normalize() else {
        panic!("cover instances have positive distances");
    };
    let profiles = [threshold(0.0).unwrap(), threshold(0.3).unwrap(), threshold(0.7).unwrap(), derived];
    for gamma in [1.0, 1.5, GAMMA_0, 2.0, 3.0] {
        for h in &profiles {
            let closed = alpha(gamma, h).unwrap();
            assert!((closed - alpha_by_quadrature(gamma, h)).abs() < 1e-9, "gamma {gamma}");
        }
        for q in [0.0, 0.3, 0.7] {
            let closed = alpha(gamma, &threshold(q).unwrap()).unwrap();
            assert!((closed - alpha_threshold_by_quadrature(gamma, q)).abs() < 1e-9);
        }
    }
}

#[test]
fn bound_is_linear_and_alpha_requires_unit_mass() {
    let h = characteristic_of_client(&half_half(), 0).unwrap();
    let b = bound_lemma20(1.7, &h).unwrap();
    assert!((bound_lemma20(1.7, &h.scaled(3.0).unwrap()).unwrap() - 3.0 * b).abs() < 1e-12);
    assert!(alpha(1.7, &h).is_err());
    assert!(bound_lemma20(0.5, &h).is_err());
}
