//! Classical flow and energy, the van Hove dynamics on characters and states,
//! and the two equilibrium criteria: the KMS continuation identity and the
//! frequency-support test for ground states.

use std::f64::consts::PI;
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{apply_free_phase, inner_product, inner_product_with, MomentumGrid, RadialFunction, WeightExponent};
use crate::sources::{RealizedSource, SourceSpec};
use crate::special::{coth, coth_minus_one, coth_plus_one};
use crate::states::{evaluate, CharState, CharacteristicFunction, StateKind};
use crate::weyl::{compose, TrigPolynomial};

/// Free field coupled to an admissible source `J` in `L^2_{1/w}`.
#[derive(Debug, Clone)]
pub struct VanHoveSystem {
    source: Arc<RealizedSource>,
}

impl VanHoveSystem {
    pub fn new(source: RealizedSource) -> Result<Self> {
        Self::from_shared(Arc::new(source))
    }

    pub fn from_shared(source: Arc<RealizedSource>) -> Result<Self> {
        source.require_admissible()?;
        Ok(Self { source })
    }

    pub fn from_spec(spec: SourceSpec, grid: &Arc<MomentumGrid>) -> Result<Self> {
        Self::new(RealizedSource::new(spec, grid)?)
    }

    /// `J = 0`.
    pub fn free(grid: &Arc<MomentumGrid>) -> Result<Self> {
        Self::from_spec(SourceSpec::zero(grid), grid)
    }

    pub fn source(&self) -> &Arc<RealizedSource> {
        &self.source
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        self.source.grid()
    }

    pub fn j_over_omega(&self) -> &RadialFunction {
        self.source.j_over_omega()
    }

    /// The energy minimizer and stationary point `-J/w`.
    pub fn minimizer(&self) -> RadialFunction {
        self.j_over_omega().neg()
    }

    /// `-|J|^2_{L^2_{1/w}}`.
    pub fn ground_energy(&self) -> f64 {
        -self.source.norm_sq(WeightExponent::INV_OMEGA)
    }

    fn check(&self, f: &RadialFunction) -> Result<()> {
        if f.grid().id() == self.grid().id() {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.grid().id(), f.grid().id()))
        }
    }

    /// `Phi_t(alpha) = e^{-itw}(alpha + J/w) - J/w`.
    pub fn classical_flow(&self, alpha0: &RadialFunction, t: f64) -> Result<RadialFunction> {
        let shifted = alpha0.try_add(self.j_over_omega())?;
        apply_free_phase(&shifted, -t).try_sub(self.j_over_omega())
    }

    /// `E(alpha) = <alpha, w alpha> + 2 Re <alpha, J>`.
    pub fn classical_energy(&self, alpha: &RadialFunction) -> Result<f64> {
        self.check(alpha)?;
        let cross = inner_product(alpha, self.source.samples(), WeightExponent::L2)?.re;
        Ok(alpha.norm_sq(WeightExponent::OMEGA) + 2.0 * cross)
    }

    /// Completed square `|alpha + J/w|^2_w - |J|^2_{1/w}`.
    pub fn classical_energy_completed(&self, alpha: &RadialFunction) -> Result<f64> {
        let shifted = alpha.try_add(self.j_over_omega())?;
        Ok(shifted.norm_sq(WeightExponent::OMEGA) + self.ground_energy())
    }

    /// Unimodular factor `e^{2 pi i Re <f, (e^{-itw} - 1) J/w>}` picked up by `W(f)`.
    pub fn evolution_phase(&self, f: &RadialFunction, t: f64) -> Result<Complex64> {
        let b = inner_product_with(f, self.j_over_omega(), |om| {
            let theta = t * om;
            let half = (0.5 * theta).sin();
            Complex64::new(-2.0 * half * half, -theta.sin())
        })?
        .re;
        Ok(Complex64::from_polar(1.0, 2.0 * PI * b))
    }

    /// `tau(t)[W(f)] = W(e^{itw} f) e^{2 pi i Re <f, (e^{-itw} - 1) J/w>}`, termwise.
    pub fn evolve_weyl(&self, a: &TrigPolynomial, t: f64) -> Result<TrigPolynomial> {
        if a.grid().id() != self.grid().id() {
            return Err(Error::GridMismatch(self.grid().id(), a.grid().id()));
        }
        a.map_terms(|f, c| Ok((apply_free_phase(f, t), c * self.evolution_phase(f, t)?)))
    }

    /// The state `omega o tau(t)` as an evaluator.
    pub fn evolve_state<'a, S: CharacteristicFunction + ?Sized>(&'a self, s: &'a S, t: f64) -> Result<EvolvedState<'a, S>> {
        if s.grid().id() != self.grid().id() {
            return Err(Error::GridMismatch(self.grid().id(), s.grid().id()));
        }
        Ok(EvolvedState { system: self, base: s, t })
    }

    fn gibbs_parameters(&self, s: &CharState) -> Result<(f64, f64)> {
        match s.kind() {
            StateKind::GibbsQuantum { beta_h, source } => {
                if source.samples() != self.source.samples() {
                    return invalid("Gibbs state belongs to a different source");
                }
                Ok((*beta_h, s.hbar()))
            }
            _ => invalid("expected a quantum Gibbs state"),
        }
    }

    /// Largest residual of `omega(W(f) tau(t + i beta)[W(g)]) = omega(tau(t)[W(g)] W(f))`
    /// over `t_grid`, relative to `max(|LHS|, 1)`.
    ///
    /// The left side is the closed form continued by `e^{itw} -> e^{itw} e^{-beta w}`;
    /// the right side is computed through the algebra.
    pub fn kms_check(&self, s: &CharState, f: &RadialFunction, g: &RadialFunction, t_grid: &[f64]) -> Result<f64> {
        let (beta, hbar) = self.gibbs_parameters(s)?;
        if beta.is_infinite() {
            return invalid("KMS check needs finite beta_hbar; use ground_state_check");
        }
        self.check(f)?;
        self.check(g)?;
        let wf = TrigPolynomial::character(f.clone(), hbar)?;
        let wg = TrigPolynomial::character(g.clone(), hbar)?;
        let residuals: Vec<f64> = t_grid
            .par_iter()
            .map(|&t| {
                let lhs = self.kms_continued_lhs(beta, hbar, f, g, t)?;
                let rhs = evaluate(s, &compose(&self.evolve_weyl(&wg, t)?, &wf)?)?;
                Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
            })
            .collect::<Result<_>>()?;
        Ok(residuals.into_iter().fold(0.0, f64::max))
    }

    /// `omega(W(f) tau(t)[W(g)])` in a quantum Gibbs state, with `t -> t + i beta`.
    fn kms_continued_lhs(&self, beta: f64, hbar: f64, f: &RadialFunction, g: &RadialFunction, t: f64) -> Result<Complex64> {
        let k = |om: f64| coth(0.5 * beta * om);
        let kf = inner_product_with(f, f, |om| Complex64::new(k(om), 0.0))?.re;
        let kg = inner_product_with(g, g, |om| Complex64::new(k(om), 0.0))?.re;
        let src = -2.0 * PI
            * (inner_product(f, self.j_over_omega(), WeightExponent::L2)?.re
                + inner_product(g, self.j_over_omega(), WeightExponent::L2)?.re);
        let prefactor = Complex64::from_polar((-0.5 * PI * PI * hbar * (kf + kg)).exp(), src);
        // E(t) = (1/2)<f, e^{itw}(K+1) g> + (1/2)<g, e^{-itw}(K-1) f>, continued in t.
        let forward = inner_product_with(f, g, |om| {
            let x = 0.5 * beta * om;
            Complex64::from_polar(1.0, t * om) * ((-beta * om).exp() * coth_plus_one(x))
        })?;
        let backward = inner_product_with(g, f, |om| {
            let x = 0.5 * beta * om;
            let grown = if beta * om < 700.0 { (beta * om).exp() * coth_minus_one(x) } else { coth_plus_one(x) };
            Complex64::from_polar(1.0, -t * om) * grown
        })?;
        let e = 0.5 * (forward + backward);
        Ok(prefactor * (-PI * PI * hbar * e).exp())
    }

    /// `|int F(t) omega(W(f) tau(t)[W(g)]) dt|` in the ground state, with `F` from `window`.
    pub fn ground_state_check(&self, s: &CharState, f: &RadialFunction, g: &RadialFunction, window: &KmsWindow) -> Result<f64> {
        let (beta, hbar) = self.gibbs_parameters(s)?;
        if !beta.is_infinite() {
            return invalid("ground-state check needs beta_hbar = infinity");
        }
        if window.s_plus >= 0.0 {
            return invalid("ground-state window must have strictly negative frequency support");
        }
        self.window_integral(s, hbar, f, g, window).map(|z| z.norm())
    }

    /// `int F(t) omega(W(f) tau(t)[W(g)]) dt` for any window, by composite Gauss-Legendre.
    pub fn window_integral(&self, s: &CharState, hbar: f64, f: &RadialFunction, g: &RadialFunction, window: &KmsWindow) -> Result<Complex64> {
        self.check(f)?;
        self.check(g)?;
        let wf = TrigPolynomial::character(f.clone(), hbar)?;
        let wg = TrigPolynomial::character(g.clone(), hbar)?;
        let nodes = window.time_nodes();
        let parts: Vec<Complex64> = nodes
            .par_iter()
            .map(|&(t, w, ft)| {
                let value = evaluate(s, &compose(&wf, &self.evolve_weyl(&wg, t)?)?)?;
                Ok(ft * value * w)
            })
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().sum())
    }
}

/// `omega(tau(t)[W(f)])`, evaluated lazily.
pub struct EvolvedState<'a, S: ?Sized> {
    system: &'a VanHoveSystem,
    base: &'a S,
    t: f64,
}

impl<S: CharacteristicFunction + ?Sized> CharacteristicFunction for EvolvedState<'_, S> {
    fn hbar(&self) -> f64 {
        self.base.hbar()
    }

    fn grid(&self) -> &Arc<MomentumGrid> {
        self.base.grid()
    }

    fn eval(&self, f: &RadialFunction) -> Result<Complex64> {
        let rotated = apply_free_phase(f, self.t);
        Ok(self.base.eval(&rotated)? * self.system.evolution_phase(f, self.t)?)
    }
}

/// Smooth test window `F` with `F^` a bump on `[s_minus, s_plus]`, normalized by
/// `F(t) = (1/2 pi) int F^(s) e^{-ist} ds`, so that `int F(t) e^{i nu t} dt = F^(nu)`.
#[derive(Debug, Clone)]
pub struct KmsWindow {
    pub s_minus: f64,
    pub s_plus: f64,
    pub t_max: f64,
    /// Time-quadrature panel width and points per panel.
    pub panel_width: f64,
    pub panel_points: usize,
    profile_nodes: Vec<(f64, f64)>,
}

const PROFILE_PANELS: usize = 256;
const PROFILE_POINTS: usize = 16;
const WINDOW_FLOOR: f64 = 1e-12;

/// `exp(-1/(1-u^2))` on `(-1, 1)`.
pub fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

impl KmsWindow {
    /// Window with time truncation chosen where `|F|` stays below `1e-12`.
    pub fn new(s_minus: f64, s_plus: f64) -> Result<Self> {
        if !(s_plus > s_minus && s_minus.is_finite() && s_plus.is_finite()) {
            return invalid(format!("window support [{s_minus}, {s_plus}] is empty"));
        }
        let rule = GaussLegendre::new(PROFILE_POINTS).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut profile_nodes = Vec::with_capacity(PROFILE_PANELS * PROFILE_POINTS);
        let width = 1.0 / PROFILE_PANELS as f64;
        for p in 0..PROFILE_PANELS {
            let mid = (p as f64 + 0.5) * width;
            for (x, w) in rule.nodes().zip(rule.weights()) {
                let u = mid + 0.5 * width * x;
                profile_nodes.push((u, 0.5 * width * w * bump(u)));
            }
        }
        let mut window = Self { s_minus, s_plus, t_max: 0.0, panel_width: 1.0, panel_points: 16, profile_nodes };
        let mut last_large = 0.0;
        let mut t = 0.0;
        while t < 20_000.0 {
            if window.profile(t).norm() >= WINDOW_FLOOR {
                last_large = t;
            }
            if t - last_large > 200.0 {
                break;
            }
            t += 0.5;
        }
        window.t_max = (last_large + 1.0).ceil();
        Ok(window)
    }

    pub fn with_time_truncation(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_resolution(mut self, panel_width: f64, panel_points: usize) -> Self {
        self.panel_width = panel_width;
        self.panel_points = panel_points;
        self
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.s_plus + self.s_minus)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.s_plus - self.s_minus)
    }

    /// `F^(s)`.
    pub fn spectrum(&self, s: f64) -> f64 {
        bump((s - self.center()) / self.half_width())
    }

    /// `F(t) = (h/pi) e^{-ict} int_0^1 b(u) cos(h u t) du`.
    pub fn profile(&self, t: f64) -> Complex64 {
        let h = self.half_width();
        let integral: f64 = self.profile_nodes.iter().map(|(u, wb)| wb * (h * u * t).cos()).sum();
        Complex64::from_polar(h / PI * integral, -self.center() * t)
    }

    /// `(t, weight, F(t))` for the composite time rule on `[-t_max, t_max]`.
    pub fn time_nodes(&self) -> Vec<(f64, f64, Complex64)> {
        let panels = ((2.0 * self.t_max) / self.panel_width).ceil().max(1.0) as usize;
        let width = 2.0 * self.t_max / panels as f64;
        let rule = GaussLegendre::new(self.panel_points.max(2)).expect("at least two points");
        let reference: Vec<(f64, f64)> = rule.nodes().copied().zip(rule.weights().copied()).collect();
        (0..panels)
            .flat_map(|p| {
                let mid = -self.t_max + (p as f64 + 0.5) * width;
                reference.iter().map(move |(x, w)| (mid + 0.5 * width * x, 0.5 * width * w))
            })
            .map(|(t, w)| (t, w, self.profile(t)))
            .collect()
    }
}
