//! Radial momentum grids, the dispersion relation and weighted inner products.
//!
//! A grid is a composite Gauss-Legendre rule on geometrically spaced panels
//! over `[r_min, r_max]`. Every d-dimensional integral of a radial integrand
//! becomes `sigma_{d-1} * sum_i w_i r_i^{d-1} h(r_i)`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

static NEXT_GRID_ID: AtomicU64 = AtomicU64::new(1);

/// Construction parameters for a [`MomentumGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub dim: u32,
    pub mass: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub panels: usize,
    pub points: usize,
    /// Extra panel edges. Indicator cutoffs placed on an edge are integrated exactly.
    pub breakpoints: Vec<f64>,
    /// Adds one panel on `[0, r_min]` so integrable densities lose no mass near the origin.
    pub origin_panel: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            mass: 0.0,
            r_min: 1e-6,
            r_max: 12.0,
            panels: 16,
            points: 32,
            breakpoints: Vec::new(),
            origin_panel: true,
        }
    }
}

impl GridConfig {
    pub fn with_dim(mut self, dim: u32) -> Self {
        self.dim = dim;
        self
    }

    pub fn with_mass(mut self, mass: f64) -> Self {
        self.mass = mass;
        self
    }

    pub fn with_resolution(mut self, panels: usize, points: usize) -> Self {
        self.panels = panels;
        self.points = points;
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(breakpoints);
        self
    }

    /// Same grid with twice the panels and twice the points per panel.
    pub fn doubled(&self) -> Self {
        let mut c = self.clone();
        c.panels *= 2;
        c.points *= 2;
        c
    }

    pub fn build(&self) -> Result<Arc<MomentumGrid>> {
        MomentumGrid::new(self).map(Arc::new)
    }
}

/// One Gauss-Legendre panel: `[lo, hi]` owning nodes `start..start + len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub start: usize,
    pub len: usize,
}

#[derive(Debug)]
pub struct MomentumGrid {
    id: u64,
    config: GridConfig,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    angular_factor: f64,
    measure: Vec<f64>,
    omega: Vec<f64>,
    panels: Vec<Panel>,
    ref_nodes: Vec<f64>,
    ref_weights: Vec<f64>,
}

/// Surface area of the unit sphere in `R^d`, `2 pi^{d/2} / Gamma(d/2)`.
pub fn sphere_area(dim: u32) -> f64 {
    // Gamma(d/2) by upward recursion from Gamma(1/2) or Gamma(1).
    let (mut x, mut gamma) = if dim.is_multiple_of(2) { (1.0, 1.0) } else { (0.5, PI.sqrt()) };
    let target = dim as f64 / 2.0;
    while x < target {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(target) / gamma
}

impl MomentumGrid {
    pub fn new(config: &GridConfig) -> Result<Self> {
        if config.dim == 0 {
            return invalid("dimension must be at least 1");
        }
        if !(config.mass >= 0.0 && config.mass.is_finite()) {
            return invalid(format!("mass must be finite and nonnegative, got {}", config.mass));
        }
        if !(config.r_min > 0.0 && config.r_max > config.r_min && config.r_max.is_finite()) {
            return invalid(format!(
                "need 0 < r_min < r_max, got [{}, {}]",
                config.r_min, config.r_max
            ));
        }
        if config.panels == 0 || config.points < 2 {
            return invalid("need at least one panel and two points per panel");
        }

        let ratio = (config.r_max / config.r_min).powf(1.0 / config.panels as f64);
        let mut edges: Vec<f64> = (0..=config.panels)
            .map(|k| config.r_min * ratio.powi(k as i32))
            .collect();
        edges[config.panels] = config.r_max;
        if config.origin_panel {
            edges.insert(0, 0.0);
        }
        for &b in &config.breakpoints {
            if b > config.r_min && b < config.r_max {
                edges.push(b);
            }
        }
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());

        let rule = GaussLegendre::new(config.points)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let mut reference: Vec<(f64, f64)> =
            rule.nodes().copied().zip(rule.weights().copied()).collect();
        reference.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (ref_nodes, ref_weights): (Vec<f64>, Vec<f64>) = reference.into_iter().unzip();

        let angular_factor = sphere_area(config.dim);
        let mut nodes = Vec::with_capacity(edges.len() * config.points);
        let mut weights = Vec::with_capacity(nodes.capacity());
        let mut panels = Vec::with_capacity(edges.len() - 1);
        for pair in edges.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            panels.push(Panel { lo, hi, start: nodes.len(), len: ref_nodes.len() });
            for (x, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }

        let measure = nodes
            .iter()
            .zip(&weights)
            .map(|(r, w)| angular_factor * w * r.powi(config.dim as i32 - 1))
            .collect();
        let omega = nodes.iter().map(|r| r.hypot(config.mass)).collect();

        let grid = Self {
            id: NEXT_GRID_ID.fetch_add(1, Ordering::Relaxed),
            config: config.clone(),
            nodes,
            weights,
            angular_factor,
            measure,
            omega,
            panels,
            ref_nodes,
            ref_weights,
        };
        grid.self_check()?;
        Ok(grid)
    }

    /// Quadrature of the constant radial density against its closed form.
    fn self_check(&self) -> Result<()> {
        let d = self.config.dim as i32;
        let exact = self.angular_factor * (self.config.r_max.powi(d) - self.lower_limit().powi(d)) / d as f64;
        let approx: f64 = self.measure.iter().sum();
        let rel = ((approx - exact) / exact).abs();
        let increasing = self.nodes.windows(2).all(|p| p[1] > p[0]);
        let positive = self.nodes[0] > 0.0 && self.weights.iter().all(|w| *w > 0.0);
        if rel > 1e-12 || !increasing || !positive {
            return Err(Error::Calibration(rel));
        }
        Ok(())
    }

    /// Lower end of the integration range: `0` with an origin panel, else `r_min`.
    pub fn lower_limit(&self) -> f64 {
        self.panels[0].lo
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn dim(&self) -> u32 {
        self.config.dim
    }

    pub fn mass(&self) -> f64 {
        self.config.mass
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn angular_factor(&self) -> f64 {
        self.angular_factor
    }

    /// Full radial measure per node, `sigma_{d-1} w_i r_i^{d-1}`.
    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    /// Dispersion `w(r_i) = sqrt(r_i^2 + mu^2)` on every node.
    pub fn omegas(&self) -> &[f64] {
        &self.omega
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    /// Gauss-Legendre reference rule on `[-1, 1]`, nodes ascending.
    pub fn reference_rule(&self) -> (&[f64], &[f64]) {
        (&self.ref_nodes, &self.ref_weights)
    }

    /// Panel edges in ascending order, from the lower limit to `r_max`.
    pub fn edges(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.panels.iter().map(|p| p.lo).collect();
        e.push(self.config.r_max);
        e
    }

    pub fn dispersion(&self, node_index: usize) -> Result<f64> {
        self.omega
            .get(node_index)
            .copied()
            .ok_or(Error::IndexOutOfRange { index: node_index, len: self.len() })
    }

    /// Integrates a radial function given as a closure, `sigma int h(r) r^{d-1} dr`.
    pub fn integrate(&self, h: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.measure).map(|(r, m)| m * h(*r)).sum()
    }

    /// Measure combined with `w^alpha` on every node.
    pub fn weighted_measure(&self, w: WeightExponent) -> Vec<f64> {
        self.measure
            .iter()
            .zip(&self.omega)
            .map(|(m, om)| m * w.factor(*om))
            .collect()
    }
}

/// Exponent `alpha` selecting the space `L^2_{w^alpha}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeightExponent(i8);

impl WeightExponent {
    /// `L^2_{1/w^2}`
    pub const INV_OMEGA_SQ: Self = Self(-2);
    /// `L^2_{1/w}`
    pub const INV_OMEGA: Self = Self(-1);
    /// plain `L^2`
    pub const L2: Self = Self(0);
    /// energy space `L^2_w`
    pub const OMEGA: Self = Self(1);

    pub fn new(alpha: i8) -> Result<Self> {
        if (-2..=1).contains(&alpha) {
            Ok(Self(alpha))
        } else {
            invalid(format!("weight exponent must be in -2..=1, got {alpha}"))
        }
    }

    pub fn alpha(self) -> i8 {
        self.0
    }

    pub fn all() -> [Self; 4] {
        [Self(-2), Self(-1), Self(0), Self(1)]
    }

    #[inline]
    pub fn factor(self, omega: f64) -> f64 {
        match self.0 {
            -2 => 1.0 / (omega * omega),
            -1 => 1.0 / omega,
            0 => 1.0,
            _ => omega,
        }
    }
}

/// Complex radial function sampled on the nodes of a grid.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    grid: Arc<MomentumGrid>,
    values: Vec<Complex64>,
}

impl PartialEq for RadialFunction {
    fn eq(&self, other: &Self) -> bool {
        self.grid.id == other.grid.id && self.values == other.values
    }
}

impl RadialFunction {
    pub fn zeros(grid: &Arc<MomentumGrid>) -> Self {
        Self { grid: Arc::clone(grid), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_values(grid: &Arc<MomentumGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("radial function samples must be finite");
        }
        Ok(Self { grid: Arc::clone(grid), values })
    }

    /// Samples `f(r)` on every node. Panics on non-finite samples.
    pub fn from_fn(grid: &Arc<MomentumGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values: Vec<Complex64> = grid.nodes.iter().map(|&r| f(r)).collect();
        assert!(values.iter().all(|v| v.is_finite()), "non-finite sample");
        Self { grid: Arc::clone(grid), values }
    }

    pub fn from_real_fn(grid: &Arc<MomentumGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |r| Complex64::new(f(r), 0.0))
    }

    /// `e^{-sigma r^2}`
    pub fn gaussian(grid: &Arc<MomentumGrid>, sigma: f64) -> Self {
        Self::from_real_fn(grid, |r| (-sigma * r * r).exp())
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid.id == other.grid.id {
            Ok(())
        } else {
            Err(Error::GridMismatch(self.grid.id, other.grid.id))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect();
        Ok(Self { grid: Arc::clone(&self.grid), values })
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map(&self, op: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: Arc::clone(&self.grid), values: self.values.iter().map(|v| op(*v)).collect() }
    }

    /// Pointwise multiplication by `g(w(r_i))`.
    pub fn mul_by_omega_fn(&self, g: impl Fn(f64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&self.grid.omega)
            .map(|(v, om)| v * g(*om))
            .collect();
        Self { grid: Arc::clone(&self.grid), values }
    }

    /// Pointwise multiplication by `1_{r >= cutoff}`.
    pub fn restrict_above(&self, cutoff: f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&self.grid.nodes)
            .map(|(v, r)| if *r >= cutoff { *v } else { Complex64::new(0.0, 0.0) })
            .collect();
        Self { grid: Arc::clone(&self.grid), values }
    }

    pub fn inner(&self, other: &Self, w: WeightExponent) -> Result<Complex64> {
        inner_product(self, other, w)
    }

    pub fn norm_sq(&self, w: WeightExponent) -> f64 {
        weighted_norm_sq(self, w)
    }
}

/// `sigma sum_i w_i r_i^{d-1} w(r_i)^alpha conj(f_i) g_i`
pub fn inner_product(f: &RadialFunction, g: &RadialFunction, w: WeightExponent) -> Result<Complex64> {
    f.same_grid(g)?;
    let grid = &f.grid;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .zip(grid.measure.iter().zip(&grid.omega))
        .map(|((a, b), (m, om))| a.conj() * b * (m * w.factor(*om)))
        .sum())
}

/// Weighted inner product with an extra real multiplier per node.
pub fn inner_product_with(
    f: &RadialFunction,
    g: &RadialFunction,
    kernel: impl Fn(f64) -> Complex64,
) -> Result<Complex64> {
    f.same_grid(g)?;
    let grid = &f.grid;
    Ok(f.values
        .iter()
        .zip(&g.values)
        .zip(grid.measure.iter().zip(&grid.omega))
        .map(|((a, b), (m, om))| a.conj() * b * kernel(*om) * *m)
        .sum())
}

pub fn weighted_norm_sq(f: &RadialFunction, w: WeightExponent) -> f64 {
    let grid = &f.grid;
    f.values
        .iter()
        .zip(grid.measure.iter().zip(&grid.omega))
        .map(|(a, (m, om))| a.norm_sqr() * m * w.factor(*om))
        .sum()
}

/// Pointwise `e^{i t w(r)} f(r)`.
pub fn apply_free_phase(f: &RadialFunction, t: f64) -> RadialFunction {
    f.mul_by_omega_fn(|om| Complex64::from_polar(1.0, t * om))
}

pub fn dispersion(grid: &MomentumGrid, node_index: usize) -> Result<f64> {
    grid.dispersion(node_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid3() -> Arc<MomentumGrid> {
        GridConfig::default().build().unwrap()
    }

    #[test]
    fn dispersion_examples() {
        let g = GridConfig { mass: 3.0, ..GridConfig::default() }.build().unwrap();
        let i = g.len() / 2;
        let r = g.nodes()[i];
        assert_eq!(g.dispersion(i).unwrap(), (r * r + 9.0).sqrt());
        assert_eq!(3f64.hypot(4.0), 5.0);
        assert_relative_eq!(1f64.hypot(1.0), std::f64::consts::SQRT_2, epsilon = 1e-15);
        let g0 = grid3();
        assert_eq!(g0.dispersion(7).unwrap(), g0.nodes()[7]);
        assert!(matches!(
            g0.dispersion(g0.len()),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(1), 2.0, epsilon = 1e-15);
        assert_relative_eq!(sphere_area(2), 2.0 * PI, epsilon = 1e-15);
        assert_relative_eq!(sphere_area(3), 4.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(4), 2.0 * PI * PI, epsilon = 1e-14);
    }

    #[test]
    fn gaussian_benchmarks() {
        let g = grid3();
        let f = RadialFunction::gaussian(&g, 1.0);
        let z = RadialFunction::zeros(&g);
        assert_eq!(inner_product(&z, &z, WeightExponent::L2).unwrap(), Complex64::new(0.0, 0.0));
        let a = inner_product(&f, &f, WeightExponent::INV_OMEGA).unwrap();
        assert!((a.re - PI).abs() < 1e-8 && a.im == 0.0);
        let b = inner_product(&f, &f, WeightExponent::INV_OMEGA_SQ).unwrap();
        assert!((b.re - 2.0 * PI * (PI / 2.0).sqrt()).abs() < 1e-6);
        assert_relative_eq!(f.norm_sq(WeightExponent::INV_OMEGA), PI, epsilon = 1e-8);
        assert_eq!(f.norm_sq(WeightExponent::L2), inner_product(&f, &f, WeightExponent::L2).unwrap().re);
    }

    #[test]
    fn doubling_resolution_is_stable() {
        let g = grid3();
        let g2 = g.config().doubled().build().unwrap();
        for w in [WeightExponent::INV_OMEGA, WeightExponent::INV_OMEGA_SQ, WeightExponent::L2] {
            let a = RadialFunction::gaussian(&g, 1.0).norm_sq(w);
            let b = RadialFunction::gaussian(&g2, 1.0).norm_sq(w);
            assert!((a - b).abs() < 1e-10, "{w:?}: {a} vs {b}");
        }
    }

    #[test]
    fn free_phase_examples() {
        let g = grid3();
        let f = RadialFunction::gaussian(&g, 1.0);
        assert_eq!(apply_free_phase(&f, 0.0), f);
        let back = apply_free_phase(&apply_free_phase(&f, 2.5), -2.5);
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-14);
        }
        let n0 = f.norm_sq(WeightExponent::INV_OMEGA).sqrt();
        let n1 = apply_free_phase(&f, 7.3).norm_sq(WeightExponent::INV_OMEGA).sqrt();
        assert!((n0 - n1).abs() < 1e-13);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = RadialFunction::gaussian(&grid3(), 1.0);
        let b = RadialFunction::gaussian(&grid3(), 1.0);
        assert!(matches!(
            inner_product(&a, &b, WeightExponent::L2),
            Err(Error::GridMismatch(..))
        ));
        assert!(a.try_add(&b).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(WeightExponent::new(2).is_err());
        assert!(WeightExponent::new(-3).is_err());
        assert!(GridConfig { r_min: 0.0, ..GridConfig::default() }.build().is_err());
        let g = grid3();
        assert!(RadialFunction::from_values(&g, vec![Complex64::new(0.0, 0.0); 3]).is_err());
        let mut bad = vec![Complex64::new(0.0, 0.0); g.len()];
        bad[0] = Complex64::new(f64::NAN, 0.0);
        assert!(RadialFunction::from_values(&g, bad).is_err());
    }

    #[test]
    fn breakpoints_become_edges() {
        let g = GridConfig::default().with_breakpoints([0.1, 0.01]).build().unwrap();
        let edges = g.edges();
        assert!(edges.contains(&0.1) && edges.contains(&0.01));
        // indicator above an edge is integrated exactly: int_{0.1}^{12} r^2 dr * 4 pi
        let f = RadialFunction::from_real_fn(&g, |_| 1.0).restrict_above(0.1);
        let exact = 4.0 * PI * (12f64.powi(3) - 0.1f64.powi(3)) / 3.0;
        assert_relative_eq!(f.norm_sq(WeightExponent::L2), exact, max_relative = 1e-12);
    }
}
