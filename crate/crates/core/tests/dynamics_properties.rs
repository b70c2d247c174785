mod common;

use std::sync::Arc;

use common::{from_shape, gaussian_system, grid, poly_distance, shape_strategy};
use num_complex::Complex64;
use proptest::prelude::*;
use vanhove_core::states::evaluate;
use vanhove_core::weyl::{adjoint, compose};
use vanhove_core::{CharState, GridConfig, CharacteristicFunction, RadialFunction, RealizedSource, SourceSpec, TrigPolynomial, VanHoveSystem};

fn two_terms(g: &Arc<vanhove_core::MomentumGrid>, hbar: f64, a: &[(f64, f64, f64)], b: &[(f64, f64, f64)]) -> TrigPolynomial {
    TrigPolynomial::from_terms(
        g.clone(),
        hbar,
        [(Complex64::new(0.7, -0.2), from_shape(g, a)), (Complex64::new(-0.3, 0.5), from_shape(g, b))],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flow_group_law(shape in shape_strategy(3, 1.0), t in -5.0f64..5.0, s in -5.0f64..5.0) {
        let g = grid();
        let sys = gaussian_system(&g);
        let a = from_shape(&g, &shape);
        let once = sys.classical_flow(&a, t + s).unwrap();
        let twice = sys.classical_flow(&sys.classical_flow(&a, s).unwrap(), t).unwrap();
        let jw = sys.j_over_omega().values();
        for ((x, y), (j, v)) in once.values().iter().zip(twice.values()).zip(jw.iter().zip(a.values())) {
            prop_assert!((x - y).norm() <= 1e-13 * j.norm().max(v.norm()).max(1.0));
        }
    }

    #[test]
    fn energy_is_conserved(shape in shape_strategy(3, 1.0), t in -1e3f64..1e3) {
        let g = grid();
        let sys = gaussian_system(&g);
        let a = from_shape(&g, &shape);
        let e0 = sys.classical_energy(&a).unwrap();
        let et = sys.classical_energy(&sys.classical_flow(&a, t).unwrap()).unwrap();
        prop_assert!((et - e0).abs() <= 1e-10 * e0.abs().max(1e-3));
        let completed = sys.classical_energy_completed(&a).unwrap();
        prop_assert!((completed - e0).abs() <= 1e-10 * e0.abs().max(1.0));
    }

    #[test]
    fn weyl_and_state_evolution_are_dual(
        a in shape_strategy(2, 0.5), b in shape_strategy(2, 0.5), center in shape_strategy(2, 0.5),
        t in -20.0f64..20.0, hbar in 0.01f64..1.0,
    ) {
        let g = grid();
        let sys = gaussian_system(&g);
        let p = two_terms(&g, hbar, &a, &b);
        let s = CharState::coherent(from_shape(&g, &center), hbar).unwrap();
        let lhs = evaluate(&sys.evolve_state(&s, t).unwrap(), &p).unwrap();
        let rhs = evaluate(&s, &sys.evolve_weyl(&p, t).unwrap()).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-13);
    }

    #[test]
    fn evolution_is_a_star_automorphism(
        a in shape_strategy(2, 0.5), b in shape_strategy(2, 0.5), c in shape_strategy(2, 0.5),
        t in -20.0f64..20.0, hbar in 0.01f64..1.0,
    ) {
        let g = grid();
        let sys = gaussian_system(&g);
        let p = two_terms(&g, hbar, &a, &b);
        let q = two_terms(&g, hbar, &b, &c);
        let ev = |x: &TrigPolynomial| sys.evolve_weyl(x, t).unwrap();
        let lhs = ev(&compose(&p, &q).unwrap());
        let rhs = compose(&ev(&p), &ev(&q)).unwrap();
        prop_assert!(poly_distance(&lhs, &rhs) <= 1e-13);
        prop_assert!(poly_distance(&ev(&adjoint(&p)), &adjoint(&ev(&p))) <= 1e-13);
        let back = sys.evolve_weyl(&ev(&p), -t).unwrap();
        prop_assert!(poly_distance(&back, &p) <= 1e-13);
    }

    #[test]
    fn equilibrium_states_are_invariant(shape in shape_strategy(3, 1.0), t in -100.0f64..100.0, hbar in 0.01f64..1.0) {
        let g = grid();
        let sys = gaussian_system(&g);
        let f = from_shape(&g, &shape);
        let src = sys.source().clone();
        let states = [
            CharState::gibbs_quantum(src.clone(), 1.0, hbar).unwrap(),
            CharState::gibbs_quantum(src.clone(), f64::INFINITY, hbar).unwrap(),
            CharState::gibbs_classical(src, 2.0).unwrap(),
            CharState::dirac(sys.minimizer()),
        ];
        for s in &states {
            let moved = sys.evolve_state(s, t).unwrap().eval(&f).unwrap();
            prop_assert!((moved - s.eval(&f).unwrap()).norm() <= 1e-13, "{}", s.name());
        }
    }
}

#[test]
fn regularized_gibbs_states_converge() {
    let g = GridConfig::default().with_breakpoints((2..=8).map(|k| 1.0 / (1u32 << k) as f64)).build().unwrap();
    let full = Arc::new(RealizedSource::new(SourceSpec::power_law(0.8), &g).unwrap());
    let f = RadialFunction::gaussian(&g, 1.0).scale(Complex64::new(0.12, 0.06));
    for hbar in [0.5, 0.1] {
        let target = CharState::gibbs_quantum(full.clone(), 1.0, hbar).unwrap().eval(&f).unwrap();
        let mut last = f64::INFINITY;
        for k in 2..=8 {
            let n = 1u32 << k;
            let src = Arc::new(RealizedSource::new(SourceSpec::power_law(0.8).with_cutoff(n), &g).unwrap());
            let v = CharState::gibbs_quantum(src, 1.0, hbar).unwrap().eval(&f).unwrap();
            let d = (v - target).norm();
            assert!(d < last, "n={n}: {d} after {last}");
            last = d;
        }
        assert!(last < 1e-2);
    }
}

#[test]
fn free_system_has_trivial_phase() {
    let g = grid();
    let free = VanHoveSystem::free(&g).unwrap();
    let f = RadialFunction::gaussian(&g, 0.8);
    for t in [-3.0, 0.5, 40.0] {
        assert_eq!(free.evolution_phase(&f, t).unwrap(), Complex64::new(1.0, 0.0));
    }
}
