mod common;

use common::{from_shape, grid, shape_strategy};
use proptest::prelude::*;
use vanhove_core::grid::apply_free_phase;
use vanhove_core::{GridConfig, RadialFunction, WeightExponent};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn free_phase_preserves_every_norm(shape in shape_strategy(3, 1.0), t in -1e3f64..1e3) {
        let g = grid();
        let f = from_shape(&g, &shape);
        let moved = apply_free_phase(&f, t);
        for w in WeightExponent::all() {
            let (a, b) = (f.norm_sq(w), moved.norm_sq(w));
            prop_assert!((a - b).abs() <= 1e-12 * a, "alpha {}: {a} vs {b}", w.alpha());
        }
    }

    #[test]
    fn cauchy_schwarz(s1 in shape_strategy(3, 1.0), s2 in shape_strategy(3, 1.0)) {
        let g = grid();
        let (f, h) = (from_shape(&g, &s1), from_shape(&g, &s2));
        for w in WeightExponent::all() {
            let ip = f.inner(&h, w).unwrap().norm_sqr();
            prop_assert!(ip <= f.norm_sq(w) * h.norm_sq(w) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn inner_product_is_hermitian(s1 in shape_strategy(2, 1.0), s2 in shape_strategy(2, 1.0)) {
        let g = grid();
        let (f, h) = (from_shape(&g, &s1), from_shape(&g, &s2));
        let a = f.inner(&h, WeightExponent::L2).unwrap();
        let b = h.inner(&f, WeightExponent::L2).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-14 * (1.0 + a.norm()));
    }

    #[test]
    fn doubling_is_stable(sigma in 0.3f64..4.0) {
        let coarse = GridConfig::default().build().unwrap();
        let fine = GridConfig::default().doubled().build().unwrap();
        for w in [WeightExponent::INV_OMEGA, WeightExponent::L2, WeightExponent::OMEGA] {
            let a = RadialFunction::gaussian(&coarse, sigma).norm_sq(w);
            let b = RadialFunction::gaussian(&fine, sigma).norm_sq(w);
            prop_assert!((a - b).abs() < 1e-10, "alpha {}: {a} vs {b}", w.alpha());
        }
    }
}
