mod common;

use common::grid;
use proptest::prelude::*;
use vanhove_core::sources::realize;
use vanhove_core::{SourceSpec, WeightExponent};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn removing_the_cutoff_increases_every_norm(gamma in 0.0f64..1.45, n in 1u32..100_000) {
        let g = grid();
        let cut = realize(&SourceSpec::power_law(gamma).with_cutoff(n), &g).unwrap();
        let full = realize(&SourceSpec::power_law(gamma), &g).unwrap();
        let finer = realize(&SourceSpec::power_law(gamma).with_cutoff(n.saturating_mul(2)), &g).unwrap();
        for w in WeightExponent::all() {
            let (a, b, c) = (cut.norm_sq(w), finer.norm_sq(w), full.norm_sq(w));
            prop_assert!(a.is_finite());
            prop_assert!(a <= b && b <= c, "alpha {}: {a} {b} {c}", w.alpha());
        }
    }
}

#[test]
fn cutoff_below_grid_is_exact() {
    let g = grid();
    let full = realize(&SourceSpec::power_law(0.8), &g).unwrap();
    let n = (1.0 / g.nodes()[0]).ceil() as u32;
    let cut = realize(&SourceSpec::power_law(0.8).with_cutoff(n), &g).unwrap();
    assert_eq!(full.values(), cut.values());
}

#[test]
fn cutoff_sources_converge_pointwise() {
    let g = grid();
    let full = realize(&SourceSpec::power_law(1.2), &g).unwrap();
    let mut last = usize::MAX;
    for n in [4u32, 64, 1024, 16384, 262_144] {
        let cut = realize(&SourceSpec::power_law(1.2).with_cutoff(n), &g).unwrap();
        let differing = cut.values().iter().zip(full.values()).filter(|(a, b)| a != b).count();
        assert!(differing <= last);
        last = differing;
    }
}
