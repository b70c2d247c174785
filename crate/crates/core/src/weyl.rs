//! Symbolic Weyl algebra: characters `W_hbar(f)`, trigonometric polynomials,
//! composition with the exact phase `e^{-i pi^2 hbar sigma(f, g)}`, adjoints and
//! the Weyl and anti-Wick quantizations.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use indexmap::IndexMap;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{inner_product, MomentumGrid, RadialFunction, WeightExponent};

/// `sigma(f, g) = Im <f, g>_2`.
pub fn symplectic_form(f: &RadialFunction, g: &RadialFunction) -> Result<f64> {
    Ok(inner_product(f, g, WeightExponent::L2)?.im)
}

fn canonical_bits(x: f64) -> u64 {
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

/// A generator of the algebra. Identity is decided by the exact sample bits.
#[derive(Debug, Clone)]
pub struct FunctionHandle {
    id: u64,
    payload: Arc<RadialFunction>,
}

impl FunctionHandle {
    pub fn new(f: RadialFunction) -> Self {
        let mut h = DefaultHasher::new();
        f.grid().id().hash(&mut h);
        for v in f.values() {
            canonical_bits(v.re).hash(&mut h);
            canonical_bits(v.im).hash(&mut h);
        }
        Self { id: h.finish(), payload: Arc::new(f) }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn function(&self) -> &RadialFunction {
        &self.payload
    }

    pub fn is_zero(&self) -> bool {
        self.payload.is_zero()
    }
}

impl PartialEq for FunctionHandle {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.payload.grid().id() == other.payload.grid().id()
            && self
                .payload
                .values()
                .iter()
                .zip(other.payload.values())
                .all(|(a, b)| {
                    canonical_bits(a.re) == canonical_bits(b.re) && canonical_bits(a.im) == canonical_bits(b.im)
                })
    }
}

impl Eq for FunctionHandle {}

impl Hash for FunctionHandle {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylTerm {
    pub coeff: Complex64,
    pub generator: FunctionHandle,
}

/// `sum_j alpha_j W_hbar(f_j)`; `hbar = 0` is the commutative algebra of characters.
#[derive(Debug, Clone)]
pub struct TrigPolynomial {
    hbar: f64,
    grid: Arc<MomentumGrid>,
    terms: IndexMap<FunctionHandle, Complex64>,
}

impl PartialEq for TrigPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.hbar == other.hbar && self.grid.id() == other.grid.id() && self.terms == other.terms
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar >= 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        invalid(format!("hbar must be finite and nonnegative, got {hbar}"))
    }
}

impl TrigPolynomial {
    pub fn zero(grid: &Arc<MomentumGrid>, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        Ok(Self { hbar, grid: Arc::clone(grid), terms: IndexMap::new() })
    }

    /// `W_hbar(0)`.
    pub fn identity(grid: &Arc<MomentumGrid>, hbar: f64) -> Result<Self> {
        Self::character(RadialFunction::zeros(grid), hbar)
    }

    /// The single character `W_hbar(f)` with coefficient 1.
    pub fn character(f: RadialFunction, hbar: f64) -> Result<Self> {
        Self::from_terms(f.grid().clone(), hbar, [(Complex64::new(1.0, 0.0), f)])
    }

    /// Builds a polynomial, merging repeated generators and dropping zero coefficients.
    pub fn from_terms(
        grid: Arc<MomentumGrid>,
        hbar: f64,
        terms: impl IntoIterator<Item = (Complex64, RadialFunction)>,
    ) -> Result<Self> {
        let mut p = Self::zero(&grid, hbar)?;
        for (c, f) in terms {
            if f.grid().id() != grid.id() {
                return Err(Error::GridMismatch(grid.id(), f.grid().id()));
            }
            if !c.is_finite() {
                return invalid("coefficients must be finite");
            }
            p.accumulate(FunctionHandle::new(f), c);
        }
        p.prune();
        Ok(p)
    }

    fn accumulate(&mut self, g: FunctionHandle, c: Complex64) {
        *self.terms.entry(g).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| !(c.re == 0.0 && c.im == 0.0));
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_classical(&self) -> bool {
        self.hbar == 0.0
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FunctionHandle, &Complex64)> {
        self.terms.iter()
    }

    pub fn to_terms(&self) -> Vec<WeylTerm> {
        self.terms
            .iter()
            .map(|(g, c)| WeylTerm { coeff: *c, generator: g.clone() })
            .collect()
    }

    /// Coefficient of the generator with exactly these samples.
    pub fn coefficient(&self, f: &RadialFunction) -> Option<Complex64> {
        self.terms.get(&FunctionHandle::new(f.clone())).copied()
    }

    fn same_algebra(&self, other: &Self) -> Result<()> {
        if self.hbar != other.hbar {
            return Err(Error::HbarMismatch(self.hbar, other.hbar));
        }
        if self.grid.id() != other.grid.id() {
            return Err(Error::GridMismatch(self.grid.id(), other.grid.id()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_algebra(other)?;
        let mut out = self.clone();
        for (g, c) in &other.terms {
            out.accumulate(g.clone(), *c);
        }
        out.prune();
        Ok(out)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|c| *c *= s);
        out.prune();
        out
    }

    /// Rewrites every term through `op(generator, coeff) -> (generator', coeff')`.
    pub fn map_terms(
        &self,
        op: impl Fn(&RadialFunction, Complex64) -> Result<(RadialFunction, Complex64)> + Sync,
    ) -> Result<Self> {
        let terms: Vec<(&FunctionHandle, &Complex64)> = self.terms.iter().collect();
        let mapped: Vec<(Complex64, RadialFunction)> = terms
            .par_iter()
            .map(|(g, c)| op(g.function(), **c).map(|(f, c2)| (c2, f)))
            .collect::<Result<_>>()?;
        Self::from_terms(Arc::clone(&self.grid), self.hbar, mapped)
    }

    /// `sum_j |alpha_j|`, an upper bound for the C*-norm.
    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Pointwise value `Pi(T) = sum_j alpha_j e^{2 pi i Re <f_j, T>}` of a classical polynomial.
    pub fn eval_at(&self, t: &RadialFunction) -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        for (g, c) in &self.terms {
            let phase = 2.0 * PI * inner_product(g.function(), t, WeightExponent::L2)?.re;
            sum += c * Complex64::from_polar(1.0, phase);
        }
        Ok(sum)
    }
}

/// Product with `W(f) W(g) = W(f + g) e^{-i pi^2 hbar sigma(f, g)}` extended bilinearly.
pub fn compose(a: &TrigPolynomial, b: &TrigPolynomial) -> Result<TrigPolynomial> {
    a.same_algebra(b)?;
    let hbar = a.hbar;
    let pairs: Vec<(&FunctionHandle, &Complex64, &FunctionHandle, &Complex64)> = a
        .terms
        .iter()
        .flat_map(|(f, ca)| b.terms.iter().map(move |(g, cb)| (f, ca, g, cb)))
        .collect();
    let products: Vec<(Complex64, RadialFunction)> = pairs
        .par_iter()
        .map(|(f, ca, g, cb)| {
            let sum = f.function().try_add(g.function())?;
            let mut coeff = *ca * *cb;
            if hbar != 0.0 {
                let sigma = symplectic_form(f.function(), g.function())?;
                coeff *= Complex64::from_polar(1.0, -PI * PI * hbar * sigma);
            }
            Ok((coeff, sum))
        })
        .collect::<Result<_>>()?;
    TrigPolynomial::from_terms(Arc::clone(&a.grid), hbar, products)
}

/// `W(f)^* = W(-f)`, extended antilinearly.
pub fn adjoint(a: &TrigPolynomial) -> TrigPolynomial {
    let mut out = TrigPolynomial { hbar: a.hbar, grid: Arc::clone(&a.grid), terms: IndexMap::new() };
    for (g, c) in &a.terms {
        out.accumulate(FunctionHandle::new(g.function().neg()), c.conj());
    }
    out
}

fn require_classical(a: &TrigPolynomial, hbar: f64) -> Result<()> {
    if !a.is_classical() {
        return invalid("quantization expects a classical polynomial (hbar = 0)");
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return invalid(format!("quantization needs hbar > 0, got {hbar}"));
    }
    Ok(())
}

/// Weyl quantization: `W_0(f) -> W_hbar(f)` with unchanged coefficients.
pub fn quantize(a: &TrigPolynomial, hbar: f64) -> Result<TrigPolynomial> {
    require_classical(a, hbar)?;
    Ok(TrigPolynomial { hbar, grid: Arc::clone(&a.grid), terms: a.terms.clone() })
}

/// Anti-Wick quantization: `W_0(f) -> W_hbar(f) e^{-(pi^2 hbar / 2) |f|^2}`.
pub fn antiwick(a: &TrigPolynomial, hbar: f64) -> Result<TrigPolynomial> {
    require_classical(a, hbar)?;
    let mut out = quantize(a, hbar)?;
    for (g, c) in out.terms.iter_mut() {
        *c *= (-0.5 * PI * PI * hbar * g.function().norm_sq(WeightExponent::L2)).exp();
    }
    out.prune();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridConfig;

    fn grid() -> Arc<MomentumGrid> {
        GridConfig::default().build().unwrap()
    }

    fn unit_real(g: &Arc<MomentumGrid>) -> RadialFunction {
        let f = RadialFunction::gaussian(g, 1.0);
        let n = f.norm_sq(WeightExponent::L2).sqrt();
        f.scale(Complex64::new(1.0 / n, 0.0))
    }

    #[test]
    fn symplectic_examples() {
        let g = grid();
        let f = unit_real(&g);
        assert_eq!(symplectic_form(&f, &f).unwrap(), 0.0);
        let s = symplectic_form(&f, &f.scale(Complex64::i())).unwrap();
        assert!((s - 1.0).abs() < 1e-14);
        let h = RadialFunction::from_fn(&g, |r| Complex64::new(r.cos(), r.sin()) * (-r * r).exp());
        let a = symplectic_form(&f, &h).unwrap() + symplectic_form(&h, &f).unwrap();
        assert!(a.abs() < 1e-14);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let g = grid();
        let f = RadialFunction::gaussian(&g, 0.7);
        let a = TrigPolynomial::character(f.clone(), 0.3).unwrap();
        let b = TrigPolynomial::character(f.neg(), 0.3).unwrap();
        assert_eq!(compose(&a, &b).unwrap(), TrigPolynomial::identity(&g, 0.3).unwrap());
    }

    #[test]
    fn compose_phase_for_unit_pair() {
        let g = grid();
        let f = unit_real(&g);
        let fi = f.scale(Complex64::i());
        let p = compose(
            &TrigPolynomial::character(f.clone(), 1.0).unwrap(),
            &TrigPolynomial::character(fi.clone(), 1.0).unwrap(),
        )
        .unwrap();
        let c = p.coefficient(&f.try_add(&fi).unwrap()).unwrap();
        assert!((c - Complex64::from_polar(1.0, -PI * PI)).norm() < 1e-13);

        let q = compose(
            &TrigPolynomial::character(f.clone(), 0.0).unwrap(),
            &TrigPolynomial::character(fi.clone(), 0.0).unwrap(),
        )
        .unwrap();
        assert_eq!(q.coefficient(&f.try_add(&fi).unwrap()), Some(Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn adjoint_examples() {
        let g = grid();
        let id = TrigPolynomial::identity(&g, 0.5).unwrap();
        assert_eq!(adjoint(&id), id);
        let p = TrigPolynomial::from_terms(
            g.clone(),
            0.5,
            [
                (Complex64::new(1.0, 2.0), RadialFunction::gaussian(&g, 1.0)),
                (Complex64::new(-0.5, 0.25), RadialFunction::gaussian(&g, 2.0).scale(Complex64::i())),
            ],
        )
        .unwrap();
        assert_eq!(adjoint(&adjoint(&p)), p);
    }

    #[test]
    fn quantization_examples() {
        let g = grid();
        let id0 = TrigPolynomial::identity(&g, 0.0).unwrap();
        assert_eq!(quantize(&id0, 0.2).unwrap(), TrigPolynomial::identity(&g, 0.2).unwrap());
        assert_eq!(antiwick(&id0, 0.2).unwrap(), TrigPolynomial::identity(&g, 0.2).unwrap());
        let f = unit_real(&g);
        let p = TrigPolynomial::character(f.clone(), 0.0).unwrap();
        let aw = antiwick(&p, 0.1).unwrap();
        assert!((aw.coefficient(&f).unwrap().re - (-PI * PI / 20.0).exp()).abs() < 1e-14);
        assert!(quantize(&p, 0.0).is_err());
        assert!(quantize(&quantize(&p, 0.1).unwrap(), 0.1).is_err());
    }

    #[test]
    fn hbar_mismatch() {
        let g = grid();
        let a = TrigPolynomial::identity(&g, 0.1).unwrap();
        let b = TrigPolynomial::identity(&g, 0.2).unwrap();
        assert!(matches!(compose(&a, &b), Err(Error::HbarMismatch(..))));
    }

    #[test]
    fn l1_and_eval() {
        let g = grid();
        let t = RadialFunction::gaussian(&g, 1.0);
        let p = TrigPolynomial::from_terms(
            g.clone(),
            0.0,
            [
                (Complex64::new(2.0, 0.0), RadialFunction::zeros(&g)),
                (Complex64::new(0.0, -1.0), RadialFunction::gaussian(&g, 1.0)),
            ],
        )
        .unwrap();
        assert_eq!(p.l1_norm(), 3.0);
        let expect = Complex64::new(2.0, 0.0)
            + Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, 2.0 * PI * t.norm_sq(WeightExponent::L2));
        assert!((p.eval_at(&t).unwrap() - expect).norm() < 1e-13);
    }
}
