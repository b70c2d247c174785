//! Asymptotic characters, wave operators acting on states, and the decay of
//! `<f, e^{itw} J/w>` that drives convergence to the asymptotic dynamics.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::VanHoveSystem;
use crate::error::{invalid, Error, Result};
use crate::grid::{apply_free_phase, inner_product, inner_product_with, MomentumGrid, RadialFunction, WeightExponent};
use crate::special::{legendre_all, spherical_bessel_all};
use crate::states::CharacteristicFunction;
use crate::weyl::{FunctionHandle, TrigPolynomial, WeylTerm};

/// Times above this use the panelwise Filon rule for the overlap.
pub const FILON_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Incoming,
    Outgoing,
}

/// `e^{2 pi i Re <f, J/w>}`
fn translation_factor(sys: &VanHoveSystem, f: &RadialFunction) -> Result<Complex64> {
    let b = inner_product(f, sys.j_over_omega(), WeightExponent::L2)?.re;
    Ok(Complex64::from_polar(1.0, 2.0 * PI * b))
}

/// `W^{+-}(f) = W(f) e^{2 pi i Re <f, J/w>}`; both directions give the same element.
pub fn asymptotic_character(sys: &VanHoveSystem, f: &RadialFunction, hbar: f64, _direction: Direction) -> Result<WeylTerm> {
    if !(hbar >= 0.0 && hbar.is_finite()) {
        return invalid(format!("hbar must be finite and nonnegative, got {hbar}"));
    }
    Ok(WeylTerm { coeff: translation_factor(sys, f)?, generator: FunctionHandle::new(f.clone()) })
}

/// Applies the wave operator termwise to a polynomial.
pub fn asymptotic_polynomial(sys: &VanHoveSystem, a: &TrigPolynomial, direction: Direction) -> Result<TrigPolynomial> {
    a.map_terms(|f, c| {
        let term = asymptotic_character(sys, f, a.hbar(), direction)?;
        Ok((f.clone(), c * term.coeff))
    })
}

/// `<f, e^{itw} J/w>_2`, with the Filon rule for `|t| > 10`.
pub fn decay_overlap(sys: &VanHoveSystem, f: &RadialFunction, t: f64) -> Result<Complex64> {
    let j = sys.j_over_omega();
    if t.abs() <= FILON_THRESHOLD {
        return inner_product_with(f, j, |om| Complex64::from_polar(1.0, t * om));
    }
    f.same_grid(j)?;
    let grid = f.grid();
    let density: Vec<Complex64> = f
        .values()
        .iter()
        .zip(j.values())
        .zip(grid.nodes())
        .map(|((a, b), r)| a.conj() * b * (grid.angular_factor() * r.powi(grid.dim() as i32 - 1)))
        .collect();
    Ok(filon_oscillatory(grid, &density, t))
}

/// `int h(r) e^{itw(r)} dr` over the grid from node samples of `h`.
///
/// On each panel `w` is linearized at the midpoint, the remainder phase is kept
/// in the smooth factor, the factor is expanded in Legendre polynomials from
/// its node values, and `int P_n(x) e^{ikx} dx = 2 i^n j_n(k)` is used exactly.
pub fn filon_oscillatory(grid: &MomentumGrid, density: &[Complex64], t: f64) -> Complex64 {
    let (ref_nodes, ref_weights) = grid.reference_rule();
    let p = ref_nodes.len();
    let mass = grid.mass();
    let mut legendre_at: Vec<Vec<f64>> = Vec::with_capacity(p);
    for x in ref_nodes {
        let mut row = vec![0.0; p];
        legendre_all(p, *x, &mut row);
        legendre_at.push(row);
    }
    let i_pow = [Complex64::new(1.0, 0.0), Complex64::i(), Complex64::new(-1.0, 0.0), -Complex64::i()];
    grid.panels()
        .par_iter()
        .map(|panel| {
            let half = 0.5 * (panel.hi - panel.lo);
            let mid = 0.5 * (panel.hi + panel.lo);
            let om_mid = mid.hypot(mass);
            let slope = mid / om_mid;
            let smooth: Vec<Complex64> = (0..p)
                .map(|k| {
                    let r = mid + half * ref_nodes[k];
                    let lin = om_mid + slope * (r - mid);
                    density[panel.start + k] * Complex64::from_polar(1.0, t * (r.hypot(mass) - lin))
                })
                .collect();
            let kappa = t * slope * half;
            let mut bessel = vec![0.0; p];
            spherical_bessel_all(p, kappa, &mut bessel);
            let mut sum = Complex64::new(0.0, 0.0);
            for n in 0..p {
                let coeff: Complex64 = (0..p)
                    .map(|k| smooth[k] * (ref_weights[k] * legendre_at[k][n]))
                    .sum::<Complex64>()
                    * (0.5 * (2 * n + 1) as f64);
                sum += coeff * i_pow[n % 4] * (2.0 * bessel[n]);
            }
            sum * Complex64::from_polar(half, t * om_mid)
        })
        .sum()
}

/// `(t, |<f, e^{itw} J/w>|)` for each time.
pub fn decay_probe(sys: &VanHoveSystem, f: &RadialFunction, t_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if sys.grid().dim() < 2 {
        return invalid("the decay probe is only claimed for d >= 2");
    }
    t_grid
        .par_iter()
        .map(|&t| decay_overlap(sys, f, t).map(|z| (t, z.norm())))
        .collect()
}

/// Coefficient of `tau(t)[W(e^{-itw} f)]` on the generator `f`.
pub fn convergence_probe(sys: &VanHoveSystem, f: &RadialFunction, hbar: f64, t: f64) -> Result<Complex64> {
    let limit = asymptotic_character(sys, f, hbar, Direction::Outgoing)?.coeff;
    let overlap = decay_overlap(sys, f, t)?;
    Ok(limit * Complex64::from_polar(1.0, -2.0 * PI * overlap.re))
}

/// Same coefficient computed by evolving `W(e^{-itw} f)` through the algebra.
pub fn convergence_probe_via_dynamics(sys: &VanHoveSystem, f: &RadialFunction, hbar: f64, t: f64) -> Result<Complex64> {
    let pulled = apply_free_phase(f, -t);
    let evolved = sys.evolve_weyl(&TrigPolynomial::character(pulled, hbar)?, t)?;
    let coeff = evolved.terms().next().map(|(_, c)| *c);
    coeff.ok_or_else(|| Error::InvalidParameter("evolution produced no term".into()))
}

/// Pushforward of a state by a wave operator: `f -> omega(f) e^{+-2 pi i Re <f, J/w>}`.
pub struct TransportedState<'a, S: ?Sized> {
    system: &'a VanHoveSystem,
    base: &'a S,
    inverse: bool,
}

pub fn transport_state<'a, S: CharacteristicFunction + ?Sized>(
    sys: &'a VanHoveSystem,
    s: &'a S,
    _direction: Direction,
) -> Result<TransportedState<'a, S>> {
    transport_with(sys, s, false)
}

/// Inverse transport, with the phase conjugated.
pub fn transport_state_inverse<'a, S: CharacteristicFunction + ?Sized>(
    sys: &'a VanHoveSystem,
    s: &'a S,
    _direction: Direction,
) -> Result<TransportedState<'a, S>> {
    transport_with(sys, s, true)
}

fn transport_with<'a, S: CharacteristicFunction + ?Sized>(
    sys: &'a VanHoveSystem,
    s: &'a S,
    inverse: bool,
) -> Result<TransportedState<'a, S>> {
    if s.grid().id() != sys.grid().id() {
        return Err(Error::GridMismatch(sys.grid().id(), s.grid().id()));
    }
    Ok(TransportedState { system: sys, base: s, inverse })
}

impl<S: CharacteristicFunction + ?Sized> CharacteristicFunction for TransportedState<'_, S> {
    fn hbar(&self) -> f64 {
        self.base.hbar()
    }

    fn grid(&self) -> &Arc<MomentumGrid> {
        self.base.grid()
    }

    fn eval(&self, f: &RadialFunction) -> Result<Complex64> {
        let phase = translation_factor(self.system, f)?;
        let phase = if self.inverse { phase.conj() } else { phase };
        Ok(self.base.eval(f)? * phase)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridConfig;
    use crate::sources::SourceSpec;
    use crate::states::CharState;

    fn setup() -> (Arc<MomentumGrid>, VanHoveSystem) {
        let g = GridConfig::default().build().unwrap();
        let sys = VanHoveSystem::from_spec(SourceSpec::gaussian(), &g).unwrap();
        (g, sys)
    }

    #[test]
    fn asymptotic_examples() {
        let (g, sys) = setup();
        let z = RadialFunction::zeros(&g);
        let w = asymptotic_character(&sys, &z, 0.1, Direction::Outgoing).unwrap();
        assert_eq!(w.coeff, Complex64::new(1.0, 0.0));
        let f = RadialFunction::gaussian(&g, 1.0);
        let free = VanHoveSystem::free(&g).unwrap();
        assert_eq!(asymptotic_character(&free, &f, 0.1, Direction::Incoming).unwrap().coeff, Complex64::new(1.0, 0.0));
        let c = asymptotic_character(&sys, &f, 0.0, Direction::Outgoing).unwrap().coeff;
        assert!((c - Complex64::from_polar(1.0, 2.0 * PI * PI)).norm() < 1e-7);
        assert_eq!(c, asymptotic_character(&sys, &f, 0.0, Direction::Incoming).unwrap().coeff);
    }

    #[test]
    fn decay_examples() {
        let (g, sys) = setup();
        let f = RadialFunction::gaussian(&g, 1.0);
        let d = decay_probe(&sys, &f, &[0.0, 1000.0]).unwrap();
        assert!((d[0].1 - PI).abs() < 1e-8);
        assert!(d[1].1 < 1e-2);
        let free = VanHoveSystem::free(&g).unwrap();
        assert!(decay_probe(&free, &f, &[0.0, 10.0, 500.0]).unwrap().iter().all(|(_, v)| *v == 0.0));
    }

    fn dense_oracle(t: f64) -> Complex64 {
        // 4 pi int_0^12 r e^{-2 r^2} e^{itr} dr
        let rule = gauss_quad::GaussLegendre::new(16).unwrap();
        let panels = 4000;
        let width = 12.0 / panels as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * width;
            for (x, w) in rule.nodes().zip(rule.weights()) {
                let r = mid + 0.5 * width * x;
                sum += Complex64::from_polar(0.5 * width * w * r * (-2.0 * r * r).exp(), t * r);
            }
        }
        sum * (4.0 * PI)
    }

    #[test]
    fn filon_matches_dense_oracle() {
        let (g, sys) = setup();
        let f = RadialFunction::gaussian(&g, 1.0);
        let grid = f.grid();
        let density: Vec<Complex64> = f
            .values()
            .iter()
            .zip(sys.j_over_omega().values())
            .zip(grid.nodes())
            .map(|((a, b), r)| a.conj() * b * (grid.angular_factor() * r * r))
            .collect();
        for t in [0.0, 5.0, 40.0, 150.0, 1000.0] {
            let oracle = dense_oracle(t);
            let filon = filon_oscillatory(grid, &density, t);
            assert!((filon - oracle).norm() < 1e-12, "t={t}: {filon} vs {oracle}");
        }
    }

    #[test]
    fn convergence_probe_agrees_with_dynamics() {
        let (g, sys) = setup();
        let f = RadialFunction::gaussian(&g, 1.5).scale(Complex64::new(0.2, -0.4));
        for t in [0.0, 3.0, 10.0] {
            let a = convergence_probe(&sys, &f, 0.1, t).unwrap();
            let b = convergence_probe_via_dynamics(&sys, &f, 0.1, t).unwrap();
            assert!((a - b).norm() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn transport_examples() {
        let (g, sys) = setup();
        let t0 = RadialFunction::gaussian(&g, 2.0).scale(Complex64::new(0.3, 0.1));
        let s = CharState::dirac(t0.clone());
        let f = RadialFunction::gaussian(&g, 0.8).scale(Complex64::new(-0.2, 0.6));
        let moved = transport_state(&sys, &s, Direction::Outgoing).unwrap();
        let shifted = CharState::dirac(t0.try_add(sys.j_over_omega()).unwrap());
        assert!((moved.eval(&f).unwrap() - shifted.eval(&f).unwrap()).norm() < 1e-13);
        let back = transport_state_inverse(&sys, &moved, Direction::Outgoing).unwrap();
        assert!((back.eval(&f).unwrap() - s.eval(&f).unwrap()).norm() <= 1e-15);
        let free = VanHoveSystem::free(&g).unwrap();
        let same = transport_state(&free, &s, Direction::Incoming).unwrap();
        assert_eq!(same.eval(&f).unwrap(), s.eval(&f).unwrap());
    }
}
