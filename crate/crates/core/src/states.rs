//! Regular states through their characteristic functions `f -> omega(W_hbar(f))`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{inner_product, inner_product_with, MomentumGrid, RadialFunction, WeightExponent};
use crate::linalg::{min_eigenvalue, CMatrix};
use crate::sources::RealizedSource;
use crate::special::coth;
use crate::weyl::{symplectic_form, TrigPolynomial};

/// Anything that can be evaluated on characters: states, evolved states, transported states.
pub trait CharacteristicFunction: Sync {
    fn hbar(&self) -> f64;
    fn grid(&self) -> &Arc<MomentumGrid>;
    fn eval(&self, f: &RadialFunction) -> Result<Complex64>;
}

#[derive(Debug, Clone)]
pub enum StateKind {
    Coherent { center: RadialFunction },
    /// `beta_h = f64::INFINITY` is the ground state.
    GibbsQuantum { beta_h: f64, source: Arc<RealizedSource> },
    GibbsClassical { beta: f64, source: Arc<RealizedSource> },
    Dirac { center: RadialFunction },
    Deformed { base: Box<CharState> },
}

#[derive(Debug, Clone)]
pub struct CharState {
    hbar: f64,
    grid: Arc<MomentumGrid>,
    kind: StateKind,
}

/// `e^{2 pi i Re <f, T>}`
pub fn translation_phase(f: &RadialFunction, t: &RadialFunction) -> Result<Complex64> {
    let b = inner_product(f, t, WeightExponent::L2)?.re;
    Ok(Complex64::from_polar(1.0, 2.0 * PI * b))
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        invalid(format!("{name} must be positive, got {x}"))
    }
}

impl CharState {
    /// Coherent state `C_hbar(T)`; at `hbar = 0` it is the Dirac mass at `T`.
    pub fn coherent(center: RadialFunction, hbar: f64) -> Result<Self> {
        if !(hbar >= 0.0 && hbar.is_finite()) {
            return invalid(format!("hbar must be finite and nonnegative, got {hbar}"));
        }
        Ok(Self { hbar, grid: center.grid().clone(), kind: StateKind::Coherent { center } })
    }

    pub fn dirac(center: RadialFunction) -> Self {
        Self { hbar: 0.0, grid: center.grid().clone(), kind: StateKind::Dirac { center } }
    }

    pub fn gibbs_quantum(source: Arc<RealizedSource>, beta_h: f64, hbar: f64) -> Result<Self> {
        positive("hbar", hbar)?;
        positive("beta_hbar", beta_h)?;
        source.require_admissible()?;
        Ok(Self { hbar, grid: source.grid().clone(), kind: StateKind::GibbsQuantum { beta_h, source } })
    }

    pub fn gibbs_classical(source: Arc<RealizedSource>, beta: f64) -> Result<Self> {
        positive("beta", beta)?;
        if beta.is_infinite() {
            return invalid("classical Gibbs state needs finite beta; use the Dirac state at -J/w");
        }
        source.require_admissible()?;
        Ok(Self { hbar: 0.0, grid: source.grid().clone(), kind: StateKind::GibbsClassical { beta, source } })
    }

    /// Minimal deformation `e^{-(pi^2 hbar/2)|f|^2} m(f)` of a classical state.
    pub fn deformed(base: CharState, hbar: f64) -> Result<Self> {
        positive("hbar", hbar)?;
        if base.hbar != 0.0 {
            return invalid("deformation needs a classical base state");
        }
        Ok(Self { hbar, grid: base.grid.clone(), kind: StateKind::Deformed { base: Box::new(base) } })
    }

    pub fn kind(&self) -> &StateKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            StateKind::Coherent { .. } => "coherent",
            StateKind::GibbsQuantum { .. } => "gibbs-quantum",
            StateKind::GibbsClassical { .. } => "gibbs-classical",
            StateKind::Dirac { .. } => "dirac",
            StateKind::Deformed { .. } => "deformed",
        }
    }

    fn check_grid(&self, f: &RadialFunction) -> Result<()> {
        if f.grid().id() == self.grid.id() {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.grid.id(), f.grid().id()))
        }
    }

    fn vacuum_damping(&self, f: &RadialFunction) -> f64 {
        (-0.5 * PI * PI * self.hbar * f.norm_sq(WeightExponent::L2)).exp()
    }
}

impl CharacteristicFunction for CharState {
    fn hbar(&self) -> f64 {
        self.hbar
    }

    fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    fn eval(&self, f: &RadialFunction) -> Result<Complex64> {
        self.check_grid(f)?;
        match &self.kind {
            StateKind::Dirac { center } => translation_phase(f, center),
            StateKind::Coherent { center } => Ok(translation_phase(f, center)? * self.vacuum_damping(f)),
            StateKind::GibbsQuantum { beta_h, source } => {
                let phase = translation_phase(f, &source.j_over_omega().neg())?;
                if beta_h.is_infinite() {
                    return Ok(phase * self.vacuum_damping(f));
                }
                let b = *beta_h;
                let q = inner_product_with(f, f, |om| Complex64::new(coth(0.5 * b * om), 0.0))?.re;
                Ok(phase * (-0.5 * PI * PI * self.hbar * q).exp())
            }
            StateKind::GibbsClassical { beta, source } => {
                let phase = translation_phase(f, &source.j_over_omega().neg())?;
                let q = f.norm_sq(WeightExponent::INV_OMEGA);
                Ok(phase * (-PI * PI / beta * q).exp())
            }
            StateKind::Deformed { base } => Ok(base.eval(f)? * self.vacuum_damping(f)),
        }
    }
}

/// `sum_j alpha_j omega(W(f_j))`.
pub fn evaluate<S: CharacteristicFunction + ?Sized>(state: &S, a: &TrigPolynomial) -> Result<Complex64> {
    if state.hbar() != a.hbar() {
        return Err(Error::HbarMismatch(state.hbar(), a.hbar()));
    }
    if state.grid().id() != a.grid().id() {
        return Err(Error::GridMismatch(state.grid().id(), a.grid().id()));
    }
    let parts: Vec<Complex64> = a
        .terms()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(g, c)| state.eval(g.function()).map(|v| **c * v))
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramReport {
    pub size: usize,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

pub const MAX_GRAM_SIZE: usize = 64;
const HERMITIAN_TOL: f64 = 1e-10;

/// `M_jk = omega(f_j - f_k) e^{-i pi^2 hbar sigma(f_j, f_k)}`.
pub fn gram_matrix<S: CharacteristicFunction + ?Sized>(state: &S, panel: &[RadialFunction]) -> Result<CMatrix> {
    let n = panel.len();
    if n == 0 || n > MAX_GRAM_SIZE {
        return invalid(format!("panel size must be in 1..={MAX_GRAM_SIZE}, got {n}"));
    }
    let hbar = state.hbar();
    let entries: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (j, k) = (idx / n, idx % n);
            let diff = panel[j].try_sub(&panel[k])?;
            let mut v = state.eval(&diff)?;
            if hbar != 0.0 {
                let sigma = symplectic_form(&panel[j], &panel[k])?;
                v *= Complex64::from_polar(1.0, -PI * PI * hbar * sigma);
            }
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok(CMatrix::from_row_slice(n, n, &entries))
}

pub fn gram_report(m: &CMatrix) -> Result<GramReport> {
    let size = m.nrows();
    let min = min_eigenvalue(m, HERMITIAN_TOL)?;
    Ok(GramReport { size, min_eigenvalue: min, psd: min >= -1e-10 * size as f64 })
}

/// Positive-definiteness check of the characteristic function on a finite panel.
pub fn bochner_gram<S: CharacteristicFunction + ?Sized>(state: &S, panel: &[RadialFunction]) -> Result<GramReport> {
    gram_report(&gram_matrix(state, panel)?)
}

/// Negative control: the Gram matrix with the sign of the phase flipped on one
/// entry pair `(j, k)`, `(k, j)`.
pub fn bochner_gram_corrupted<S: CharacteristicFunction + ?Sized>(
    state: &S,
    panel: &[RadialFunction],
    pair: (usize, usize),
) -> Result<GramReport> {
    let mut m = gram_matrix(state, panel)?;
    let (j, k) = pair;
    if j >= panel.len() || k >= panel.len() || j == k {
        return invalid("corrupted pair must be two distinct panel indices");
    }
    let sigma = symplectic_form(&panel[j], &panel[k])?;
    let flip = Complex64::from_polar(1.0, 2.0 * PI * PI * state.hbar() * sigma);
    m[(j, k)] *= flip;
    m[(k, j)] *= flip.conj();
    gram_report(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridConfig;
    use crate::sources::SourceSpec;
    use crate::weyl::adjoint;

    fn grid() -> Arc<MomentumGrid> {
        GridConfig::default().build().unwrap()
    }

    fn unit(g: &Arc<MomentumGrid>) -> RadialFunction {
        let f = RadialFunction::gaussian(g, 1.0);
        f.scale(Complex64::new(1.0 / f.norm_sq(WeightExponent::L2).sqrt(), 0.0))
    }

    fn gaussian_source(g: &Arc<MomentumGrid>) -> Arc<RealizedSource> {
        Arc::new(RealizedSource::new(SourceSpec::gaussian(), g).unwrap())
    }

    #[test]
    fn normalization() {
        let g = grid();
        let z = RadialFunction::zeros(&g);
        let src = gaussian_source(&g);
        let t = RadialFunction::gaussian(&g, 2.0);
        let states = vec![
            CharState::coherent(t.clone(), 0.1).unwrap(),
            CharState::dirac(t.clone()),
            CharState::gibbs_quantum(src.clone(), 1.0, 0.1).unwrap(),
            CharState::gibbs_quantum(src.clone(), f64::INFINITY, 0.1).unwrap(),
            CharState::gibbs_classical(src.clone(), 2.0).unwrap(),
            CharState::deformed(CharState::gibbs_classical(src, 2.0).unwrap(), 0.1).unwrap(),
        ];
        for s in &states {
            assert_eq!(s.eval(&z).unwrap(), Complex64::new(1.0, 0.0), "{}", s.name());
        }
    }

    #[test]
    fn vacuum_value() {
        let g = grid();
        let s = CharState::coherent(RadialFunction::zeros(&g), 0.1).unwrap();
        let v = s.eval(&unit(&g)).unwrap();
        assert!((v.re - (-PI * PI / 20.0).exp()).abs() < 1e-14);
        assert!((v.re - 0.610_50).abs() < 1e-5);
    }

    #[test]
    fn quantum_gibbs_tends_to_classical() {
        let g = grid();
        let src = gaussian_source(&g);
        let f = RadialFunction::gaussian(&g, 1.5).scale(Complex64::new(0.3, 0.2));
        let classical = CharState::gibbs_classical(src.clone(), 2.0).unwrap().eval(&f).unwrap();
        let mut last = f64::INFINITY;
        for k in 4..12 {
            let hbar = 2f64.powi(-k);
            let q = CharState::gibbs_quantum(src.clone(), 2.0 * hbar, hbar).unwrap().eval(&f).unwrap();
            let dev = (q - classical).norm();
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn ground_gibbs_is_coherent_at_minimizer() {
        let g = grid();
        let src = gaussian_source(&g);
        let f = RadialFunction::gaussian(&g, 0.8).scale(Complex64::new(0.4, -0.1));
        let a = CharState::gibbs_quantum(src.clone(), f64::INFINITY, 0.2).unwrap().eval(&f).unwrap();
        let b = CharState::coherent(src.j_over_omega().neg(), 0.2).unwrap().eval(&f).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn type_two_sources_have_no_gibbs_state() {
        let g = grid();
        let src = Arc::new(RealizedSource::new(SourceSpec::power_law(1.2), &g).unwrap());
        assert!(matches!(
            CharState::gibbs_quantum(src.clone(), 1.0, 0.1),
            Err(Error::SourceNotAdmissible(_))
        ));
        assert!(CharState::gibbs_classical(src, 1.0).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let g = grid();
        let s = CharState::coherent(RadialFunction::gaussian(&g, 3.0), 0.3).unwrap();
        assert_eq!(evaluate(&s, &TrigPolynomial::identity(&g, 0.3).unwrap()).unwrap(), Complex64::new(1.0, 0.0));
        let f = RadialFunction::gaussian(&g, 1.0).scale(Complex64::new(0.2, 0.1));
        let p = TrigPolynomial::from_terms(
            g.clone(),
            0.3,
            [(Complex64::new(1.0, 0.0), f.clone()), (Complex64::new(1.0, 0.0), f.neg())],
        )
        .unwrap();
        let v = evaluate(&s, &p).unwrap();
        assert!((v - 2.0 * s.eval(&f).unwrap().re).norm() < 1e-15);
        let q = crate::weyl::compose(&adjoint(&p), &p).unwrap();
        let e = evaluate(&s, &q).unwrap();
        assert!(e.re >= 0.0 && e.im.abs() < 1e-13);
    }

    #[test]
    fn gram_examples() {
        let g = grid();
        let s = CharState::coherent(RadialFunction::zeros(&g), 0.5).unwrap();
        let r = bochner_gram(&s, &[RadialFunction::zeros(&g)]).unwrap();
        assert_eq!(r, GramReport { size: 1, min_eigenvalue: 1.0, psd: true });
        assert!(bochner_gram(&s, &[]).is_err());
    }

    #[test]
    fn corrupted_gram_fails() {
        let g = grid();
        let u = unit(&g);
        let s = CharState::coherent(RadialFunction::zeros(&g), 1.0).unwrap();
        let panel: Vec<RadialFunction> = (0..8)
            .map(|k| {
                let a = 0.25 * ((k as f64) * 1.3).cos();
                let b = 0.25 * ((k as f64) * 0.7 + 0.4).sin();
                u.scale(Complex64::new(a, b))
            })
            .collect();
        assert!(bochner_gram(&s, &panel).unwrap().psd);
        assert!(!bochner_gram_corrupted(&s, &panel, (0, 1)).unwrap().psd);
    }
}
