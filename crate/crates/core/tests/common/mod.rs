#![allow(dead_code)]

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use vanhove_core::{GridConfig, MomentumGrid, RadialFunction, SourceSpec, TrigPolynomial, VanHoveSystem, WeightExponent};

pub fn grid() -> Arc<MomentumGrid> {
    GridConfig::default().build().unwrap()
}

pub fn gaussian_system(g: &Arc<MomentumGrid>) -> VanHoveSystem {
    VanHoveSystem::from_spec(SourceSpec::gaussian(), g).unwrap()
}

/// `(re, im, sigma)` triples, one per Gaussian term.
pub type Shape = Vec<(f64, f64, f64)>;

pub fn shape_strategy(max_terms: usize, amp: f64) -> impl Strategy<Value = Shape> {
    prop::collection::vec((-amp..amp, -amp..amp, 0.3f64..3.0), 1..=max_terms)
}

pub fn from_shape(g: &Arc<MomentumGrid>, shape: &[(f64, f64, f64)]) -> RadialFunction {
    RadialFunction::from_fn(g, |r| {
        shape.iter().map(|(a, b, s)| Complex64::new(*a, *b) * (-s * r * r).exp()).sum()
    })
}

pub fn random_shape<R: Rng>(rng: &mut R, terms: usize, amp: f64) -> Shape {
    (0..terms)
        .map(|_| (rng.random_range(-amp..amp), rng.random_range(-amp..amp), rng.random_range(0.3..3.0)))
        .collect()
}

pub fn random_function<R: Rng>(rng: &mut R, g: &Arc<MomentumGrid>, terms: usize, amp: f64) -> RadialFunction {
    from_shape(g, &random_shape(rng, terms, amp))
}

pub fn unit(g: &Arc<MomentumGrid>) -> RadialFunction {
    let f = RadialFunction::gaussian(g, 1.0);
    f.scale(Complex64::new(1.0 / f.norm_sq(WeightExponent::L2).sqrt(), 0.0))
}

fn close(a: &RadialFunction, b: &RadialFunction, tol: f64) -> bool {
    a.values().iter().zip(b.values()).all(|(x, y)| (x - y).norm() <= tol * (1.0 + x.norm()))
}

/// Distance between two trig polynomials with generators identified up to `1e-12`.
///
/// Terms with matching generators are merged before coefficients are compared,
/// so round-off in generator sums does not split a term in two.
pub fn poly_distance(a: &TrigPolynomial, b: &TrigPolynomial) -> f64 {
    let merge = |p: &TrigPolynomial| {
        let mut out: Vec<(RadialFunction, Complex64)> = Vec::new();
        for (h, c) in p.terms() {
            match out.iter_mut().find(|(g, _)| close(g, h.function(), 1e-12)) {
                Some(slot) => slot.1 += *c,
                None => out.push((h.function().clone(), *c)),
            }
        }
        out
    };
    let mut rest = merge(b);
    let mut total = 0.0;
    for (g, c) in merge(a) {
        match rest.iter().position(|(h, _)| close(&g, h, 1e-12)) {
            Some(i) => {
                total += (c - rest[i].1).norm();
                rest.swap_remove(i);
            }
            None => total += c.norm(),
        }
    }
    total + rest.iter().map(|(_, c)| c.norm()).sum::<f64>()
}
