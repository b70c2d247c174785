mod common;

use std::f64::consts::PI;

use common::{from_shape, gaussian_system, grid, shape_strategy};
use num_complex::Complex64;
use proptest::prelude::*;
use vanhove_core::scattering::{asymptotic_character, convergence_probe, decay_overlap, transport_state, Direction};
use vanhove_core::{CharState, CharacteristicFunction, RadialFunction, VanHoveSystem};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn asymptotic_characters_form_a_heisenberg_group(s1 in shape_strategy(2, 0.5), s2 in shape_strategy(2, 0.5), hbar in 0.0f64..1.0) {
        let g = grid();
        let sys = gaussian_system(&g);
        let (f, h) = (from_shape(&g, &s1), from_shape(&g, &s2));
        let c = |x: &RadialFunction| asymptotic_character(&sys, x, hbar, Direction::Outgoing).unwrap().coeff;
        let sum = f.try_add(&h).unwrap();
        prop_assert!((c(&f) * c(&h) - c(&sum)).norm() <= 1e-12);
        let plus = asymptotic_character(&sys, &f, hbar, Direction::Outgoing).unwrap();
        let minus = asymptotic_character(&sys, &f, hbar, Direction::Incoming).unwrap();
        prop_assert_eq!(plus, minus);
    }

    #[test]
    fn transported_dirac_is_translated(center in shape_strategy(2, 0.5), shape in shape_strategy(2, 1.0)) {
        let g = grid();
        let sys = gaussian_system(&g);
        let t = from_shape(&g, &center);
        let f = from_shape(&g, &shape);
        let s = CharState::dirac(t.clone());
        let moved = transport_state(&sys, &s, Direction::Outgoing).unwrap().eval(&f).unwrap();
        let shifted = CharState::dirac(t.try_add(sys.j_over_omega()).unwrap()).eval(&f).unwrap();
        prop_assert!((moved - shifted).norm() <= 1e-12);
    }

    #[test]
    fn convergence_deviation_is_bounded(shape in shape_strategy(2, 0.5), t in 0.0f64..500.0, hbar in 0.0f64..1.0) {
        let g = grid();
        let sys = gaussian_system(&g);
        let f = from_shape(&g, &shape);
        let target = asymptotic_character(&sys, &f, hbar, Direction::Outgoing).unwrap().coeff;
        let dev = (convergence_probe(&sys, &f, hbar, t).unwrap() - target).norm();
        let bound = 2.0 * PI * decay_overlap(&sys, &f, t).unwrap().norm();
        prop_assert!(dev <= bound * (1.0 + 1e-12) + 1e-15);
    }
}

#[test]
fn free_transport_is_identity() {
    let g = grid();
    let free = VanHoveSystem::free(&g).unwrap();
    let s = CharState::coherent(RadialFunction::gaussian(&g, 2.0), 0.3).unwrap();
    let f = RadialFunction::gaussian(&g, 0.7).scale(Complex64::new(0.2, 0.9));
    let moved = transport_state(&free, &s, Direction::Outgoing).unwrap();
    assert_eq!(moved.eval(&f).unwrap(), s.eval(&f).unwrap());
}

#[test]
fn convergence_deviation_decreases() {
    let g = grid();
    let sys = gaussian_system(&g);
    let f = RadialFunction::gaussian(&g, 1.0);
    let target = asymptotic_character(&sys, &f, 0.1, Direction::Outgoing).unwrap().coeff;
    let devs: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|t| (convergence_probe(&sys, &f, 0.1, *t).unwrap() - target).norm())
        .collect();
    assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
    assert!(devs[2] < 7e-2);
}
