//! Truncated Fock-space numerics for single bosonic modes.
//!
//! The van Hove Hamiltonian has no mode coupling, so multi-mode quantities are
//! assembled from independent single-mode computations: sums for energies and
//! products for overlaps. A mode is cut at occupation `N`; every matrix claim is
//! read off the lower block `0..=N/2`.
//!
//! Slot convention: `a(f) = conj(f) a` and `a*(f) = f a*`, with the
//! hbar-scaled versions carrying an extra `sqrt(hbar)`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridConfig, WeightExponent};
use crate::linalg::{hermitian_defect, hermitian_eigen, leading_block, min_eigenvalue, CMatrix};
use crate::sources::{least_squares_slope, InfraredClass, RealizedSource, SourceSpec, DEFAULT_SLOPE_TOL};
use crate::weyl::{antiwick, quantize, TrigPolynomial};

pub const HERMITIAN_TOL: f64 = 1e-12;

/// Extra occupation levels kept beyond the displaced ground state.
pub const CUTOFF_MARGIN: usize = 20;

type CVector = DVector<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockMode {
    omega: f64,
    coupling: Complex64,
    cutoff: usize,
    hbar: f64,
}

impl FockMode {
    pub fn new(omega: f64, coupling: Complex64, cutoff: usize, hbar: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return invalid(format!("mode frequency must be positive, got {omega}"));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return invalid(format!("hbar must be positive, got {hbar}"));
        }
        if !(coupling.re.is_finite() && coupling.im.is_finite()) {
            return invalid("coupling is not finite");
        }
        if cutoff < 2 {
            return Err(Error::Truncation(format!("cutoff {cutoff} below 2")));
        }
        let need = Self::minimal_cutoff(omega, coupling, hbar);
        if cutoff < need {
            return Err(Error::Truncation(format!("cutoff {cutoff} below the coherent-amplitude requirement {need}")));
        }
        Ok(Self { omega, coupling, cutoff, hbar })
    }

    /// Mode with the smallest adequate cutoff.
    pub fn with_auto_cutoff(omega: f64, coupling: Complex64, hbar: f64) -> Result<Self> {
        if !(omega > 0.0) || !(hbar > 0.0) {
            return invalid("mode frequency and hbar must be positive");
        }
        Self::new(omega, coupling, Self::minimal_cutoff(omega, coupling, hbar), hbar)
    }

    /// `ceil(4 |j|^2 / (hbar w^2)) + 20`.
    pub fn minimal_cutoff(omega: f64, coupling: Complex64, hbar: f64) -> usize {
        let amp = 4.0 * coupling.norm_sqr() / (hbar * omega * omega);
        (amp.ceil() as usize).saturating_add(CUTOFF_MARGIN).max(2)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn coupling(&self) -> Complex64 {
        self.coupling
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    /// Size of the trusted block `0..=N/2`.
    pub fn trusted(&self) -> usize {
        self.cutoff / 2 + 1
    }

    /// Same mode at twice the cutoff.
    pub fn doubled(&self) -> Self {
        Self { cutoff: 2 * self.cutoff, ..*self }
    }

    /// `-|j|^2 / w`.
    pub fn ground_energy_closed_form(&self) -> f64 {
        -self.coupling.norm_sqr() / self.omega
    }

    /// `|j / w|^2`.
    pub fn number_closed_form(&self) -> f64 {
        (self.coupling / self.omega).norm_sqr()
    }

    /// Weyl argument `-j / (pi i hbar w)` of the displaced ground state.
    pub fn ground_displacement(&self) -> Complex64 {
        -self.coupling / (Complex64::new(0.0, PI * self.hbar * self.omega))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: CMatrix,
}

impl DenseOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return invalid("operator matrix must be square");
        }
        Ok(Self { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.matrix)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect() <= HERMITIAN_TOL
    }

    pub fn block(&self, k: usize) -> CMatrix {
        leading_block(&self.matrix, k.min(self.dim()))
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    /// `<v, M v>`.
    pub fn expectation(&self, v: &CVector) -> Complex64 {
        v.dotc(&(&self.matrix * v))
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return invalid("operator dimensions differ");
        }
        Ok(Self { matrix: &self.matrix * &other.matrix })
    }
}

/// Basis vector `e_k` in dimension `dim`.
pub fn basis_vector(dim: usize, k: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Number-basis ladder matrices (unscaled).
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub annihilation: DenseOperator,
    pub creation: DenseOperator,
    pub number: DenseOperator,
}

impl Ladder {
    /// `a_hbar = sqrt(hbar) a`.
    pub fn annihilation_hbar(&self, hbar: f64) -> DenseOperator {
        DenseOperator { matrix: self.annihilation.matrix.scale(hbar.sqrt()) }
    }

    pub fn creation_hbar(&self, hbar: f64) -> DenseOperator {
        DenseOperator { matrix: self.creation.matrix.scale(hbar.sqrt()) }
    }

    /// `[a, a*]`; equals the identity except entry `(N, N) = -N`.
    pub fn commutator(&self) -> CMatrix {
        let a = &self.annihilation.matrix;
        let c = &self.creation.matrix;
        a * c - c * a
    }
}

pub fn build_ladder(mode: &FockMode) -> Ladder {
    ladder_of_dim(mode.dim())
}

fn ladder_of_dim(dim: usize) -> Ladder {
    let mut a = CMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let number = CMatrix::from_diagonal(&CVector::from_fn(dim, |n, _| Complex64::new(n as f64, 0.0)));
    Ladder {
        creation: DenseOperator { matrix: a.adjoint() },
        annihilation: DenseOperator { matrix: a },
        number: DenseOperator { matrix: number },
    }
}

/// `H = hbar w n + sqrt(hbar) (j a* + conj(j) a)`.
pub fn build_hamiltonian(mode: &FockMode) -> DenseOperator {
    let dim = mode.dim();
    let s = mode.hbar.sqrt();
    let mut h = CMatrix::zeros(dim, dim);
    for n in 0..dim {
        h[(n, n)] = Complex64::new(mode.hbar * mode.omega * n as f64, 0.0);
        if n + 1 < dim {
            let r = ((n + 1) as f64).sqrt();
            h[(n + 1, n)] = mode.coupling * s * r;
            h[(n, n + 1)] = mode.coupling.conj() * s * r;
        }
    }
    DenseOperator { matrix: h }
}

/// Spectral data of the real tridiagonal field `a + a*` at a fixed cutoff.
///
/// `phi(z) = sqrt(hbar) |z| U (a + a*) U^dagger` with `U = diag(e^{i n arg z})`,
/// so one real eigendecomposition serves every Weyl matrix.
#[derive(Debug, Clone)]
pub struct WeylFactory {
    cutoff: usize,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl WeylFactory {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::Truncation(format!("cutoff {cutoff} below 2")));
        }
        let dim = cutoff + 1;
        let mut x = DMatrix::<f64>::zeros(dim, dim);
        for n in 1..dim {
            let r = (n as f64).sqrt();
            x[(n - 1, n)] = r;
            x[(n, n - 1)] = r;
        }
        let eig = x.symmetric_eigen();
        Ok(Self { cutoff, values: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors })
    }

    pub fn for_mode(mode: &FockMode) -> Result<Self> {
        Self::new(mode.cutoff)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// `exp(i pi sqrt(hbar) (z a* + conj(z) a))`.
    pub fn weyl(&self, hbar: f64, z: Complex64) -> Result<DenseOperator> {
        check_displacement(self.cutoff, hbar, z)?;
        let dim = self.cutoff + 1;
        if z == Complex64::new(0.0, 0.0) {
            return Ok(DenseOperator { matrix: CMatrix::identity(dim, dim) });
        }
        let scale = PI * hbar.sqrt() * z.norm();
        let theta = z.arg();
        let mut left = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            let e = Complex64::from_polar(1.0, scale * self.values[k]);
            for n in 0..dim {
                left[(n, k)] = Complex64::from_polar(self.vectors[(n, k)], n as f64 * theta) * e;
            }
        }
        let mut right = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            for m in 0..dim {
                right[(k, m)] = Complex64::from_polar(self.vectors[(m, k)], -(m as f64) * theta);
            }
        }
        Ok(DenseOperator { matrix: left * right })
    }
}

fn check_displacement(cutoff: usize, hbar: f64, z: Complex64) -> Result<()> {
    if !(hbar > 0.0) {
        return invalid(format!("hbar must be positive, got {hbar}"));
    }
    let load = PI * PI * hbar * z.norm_sqr();
    if !(load <= cutoff as f64 / 4.0) {
        return Err(Error::Truncation(format!(
            "displacement pi^2 hbar |z|^2 = {load} exceeds N/4 = {}",
            cutoff as f64 / 4.0
        )));
    }
    Ok(())
}

pub fn weyl_matrix(mode: &FockMode, z: Complex64) -> Result<DenseOperator> {
    WeylFactory::for_mode(mode)?.weyl(mode.hbar, z)
}

/// `max |W^dagger W - I|` on the leading `k` block.
pub fn unitarity_defect(w: &DenseOperator, k: usize) -> f64 {
    let p = w.matrix.adjoint() * &w.matrix;
    let k = k.min(w.dim());
    let mut worst = 0.0_f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((p[(i, j)] - target).norm());
        }
    }
    worst
}

/// `<e_0, W_hbar(z) e_0>`.
pub fn vacuum_expectation(mode: &FockMode, z: Complex64) -> Result<Complex64> {
    Ok(weyl_matrix(mode, z)?.matrix[(0, 0)])
}

/// `max |W(z) W(w) - W(z + w) e^{-i pi^2 hbar Im(conj(z) w)}|` on the trusted block.
///
/// The product moves trusted states twice, so the combined displacement
/// `pi^2 hbar (|z| + |w|)^2` must stay below `N/8`.
pub fn weyl_relation_defect(mode: &FockMode, z: Complex64, w: Complex64) -> Result<f64> {
    let factory = WeylFactory::for_mode(mode)?;
    let h = mode.hbar;
    let load = PI * PI * h * (z.norm() + w.norm()).powi(2);
    if !(load <= mode.cutoff as f64 / 8.0) {
        return Err(Error::Truncation(format!(
            "combined displacement pi^2 hbar (|z| + |w|)^2 = {load} exceeds N/8 = {}",
            mode.cutoff as f64 / 8.0
        )));
    }
    let wz = factory.weyl(h, z)?;
    let ww = factory.weyl(h, w)?;
    let wzw = factory.weyl(h, z + w)?;
    let phase = Complex64::from_polar(1.0, -PI * PI * h * (z.conj() * w).im);
    let lhs = wz.compose(&ww)?;
    let k = mode.trusted();
    let mut worst = 0.0_f64;
    for i in 0..k {
        for j in 0..k {
            worst = worst.max((lhs.matrix[(i, j)] - wzw.matrix[(i, j)] * phase).norm());
        }
    }
    Ok(worst)
}

/// `W_hbar(-j / (pi i hbar w)) e_0`.
pub fn coherent_vector(mode: &FockMode) -> Result<CVector> {
    let w = weyl_matrix(mode, mode.ground_displacement())?;
    Ok(w.matrix.column(0).into_owned())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateReport {
    pub energy: f64,
    pub predicted_energy: f64,
    pub gap: f64,
    pub overlap_sq: f64,
}

pub fn ground_state_analysis(mode: &FockMode) -> Result<GroundStateReport> {
    let h = build_hamiltonian(mode);
    let (values, vectors) = hermitian_eigen(h.matrix(), HERMITIAN_TOL)?;
    let ground = vectors.column(0);
    let coherent = coherent_vector(mode)?;
    let overlap = ground.dotc(&coherent);
    Ok(GroundStateReport {
        energy: values[0],
        predicted_energy: mode.ground_energy_closed_form(),
        gap: values[1] - values[0],
        overlap_sq: overlap.norm_sqr(),
    })
}

/// `<C, hbar n C>` for the displaced ground-state vector `C`.
pub fn number_expectation(mode: &FockMode) -> Result<f64> {
    let c = coherent_vector(mode)?;
    let n = build_ladder(mode).number;
    Ok(mode.hbar * n.expectation(&c).re)
}

/// `|<W(f) e_0, C>|` from matrices, with the closed form
/// `exp(-(pi^2 hbar / 2) |f + j / (pi i hbar w)|^2)`.
pub fn weyl_overlap(mode: &FockMode, f: Complex64) -> Result<(f64, f64)> {
    let factory = WeylFactory::for_mode(mode)?;
    let probe = factory.weyl(mode.hbar, f)?.matrix.column(0).into_owned();
    let coherent = factory.weyl(mode.hbar, mode.ground_displacement())?.matrix.column(0).into_owned();
    let shift = f - mode.ground_displacement();
    let closed = (-0.5 * PI * PI * mode.hbar * shift.norm_sqr()).exp();
    Ok((probe.dotc(&coherent).norm(), closed))
}

/// One mode per grid node: `w_m = w(r_m)`, `j_m = J(r_m) sqrt(measure_m)`.
pub fn modes_from_source(source: &RealizedSource, hbar: f64) -> Result<Vec<FockMode>> {
    let grid = source.grid();
    let omegas = grid.omegas();
    source
        .samples()
        .values()
        .iter()
        .zip(grid.measure())
        .zip(omegas)
        .map(|((j, m), w)| FockMode::with_auto_cutoff(*w, *j * m.sqrt(), hbar))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiModeReport {
    pub modes: usize,
    /// Sum of single-mode lowest eigenvalues.
    pub ground_energy: f64,
    /// `-sum |j_m|^2 / w_m`.
    pub closed_form: f64,
    /// `-|J|^2` in `L^2_{1/w}` from the grid norm.
    pub norm_form: f64,
    /// Product of single-mode ground/coherent overlaps.
    pub overlap_sq: f64,
}

pub fn multi_mode_ground_state(source: &RealizedSource, hbar: f64) -> Result<MultiModeReport> {
    let modes = modes_from_source(source, hbar)?;
    let reports: Vec<GroundStateReport> = modes.par_iter().map(ground_state_analysis).collect::<Result<_>>()?;
    Ok(MultiModeReport {
        modes: modes.len(),
        ground_energy: reports.iter().map(|r| r.energy).sum(),
        closed_form: modes.iter().map(FockMode::ground_energy_closed_form).sum(),
        norm_form: -source.samples().norm_sq(WeightExponent::INV_OMEGA),
        overlap_sq: reports.iter().map(|r| r.overlap_sq).product(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftPhotonRow {
    pub n: u32,
    /// `|J_n|^2` in `L^2_{1/w^2}`, the number expectation of the regularized ground state.
    pub number: f64,
    /// `-|J_n|^2` in `L^2_{1/w}`.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftPhotonReport {
    pub class: InfraredClass,
    pub hbar: f64,
    pub rows: Vec<SoftPhotonRow>,
    /// Log-log slope of successive number increments against `n`.
    pub number_slope: f64,
    /// Same for the magnitude of the energy.
    pub energy_slope: f64,
    pub slope_tol: f64,
}

impl SoftPhotonReport {
    pub fn number_diverges(&self) -> bool {
        self.number_slope > -self.slope_tol
    }

    pub fn energy_diverges(&self) -> bool {
        self.energy_slope > -self.slope_tol
    }
}

/// Number expectations and ground energies of `J_n = J 1_{r > 1/n}` on a grid
/// with breakpoints at every `1/n`. `n_list` must be geometric and increasing.
pub fn soft_photon_sweep(spec: &SourceSpec, config: &GridConfig, hbar: f64, n_list: &[u32]) -> Result<SoftPhotonReport> {
    if !(hbar > 0.0) {
        return invalid(format!("hbar must be positive, got {hbar}"));
    }
    if n_list.len() < 4 {
        return Err(Error::InsufficientData { have: n_list.len(), need: 4 });
    }
    if n_list.contains(&0) || n_list.windows(2).any(|p| p[1] <= p[0]) {
        return invalid("cutoff list must be positive and increasing");
    }
    let ratio = n_list[1] as f64 / n_list[0] as f64;
    if n_list.windows(2).any(|p| ((p[1] as f64 / p[0] as f64) - ratio).abs() > 1e-12 * ratio) {
        return invalid("cutoff list must be geometric");
    }
    let grid = config.clone().with_breakpoints(n_list.iter().map(|n| 1.0 / *n as f64)).build()?;
    let base = spec.clone().without_cutoff();
    let class = crate::sources::classify(&base, &grid)?;
    if class == InfraredClass::OutOfScope {
        return Err(Error::SourceNotAdmissible(format!("source class {class}")));
    }
    let rows: Vec<SoftPhotonRow> = n_list
        .iter()
        .map(|&n| {
            let j = crate::sources::realize(&base.clone().with_cutoff(n), &grid)?;
            Ok(SoftPhotonRow {
                n,
                number: j.norm_sq(WeightExponent::INV_OMEGA_SQ),
                energy: -j.norm_sq(WeightExponent::INV_OMEGA),
            })
        })
        .collect::<Result<_>>()?;
    let number_slope = increment_slope(&rows, |r| r.number);
    let energy_slope = increment_slope(&rows, |r| -r.energy);
    Ok(SoftPhotonReport { class, hbar, rows, number_slope, energy_slope, slope_tol: DEFAULT_SLOPE_TOL })
}

fn increment_slope(rows: &[SoftPhotonRow], value: impl Fn(&SoftPhotonRow) -> f64) -> f64 {
    let points: Vec<(f64, f64)> = rows
        .windows(2)
        .filter_map(|p| {
            let inc = value(&p[1]) - value(&p[0]);
            (inc > 0.0).then(|| ((p[0].n as f64).ln(), inc.ln()))
        })
        .collect();
    if points.len() < 3 {
        return f64::NEG_INFINITY;
    }
    least_squares_slope(&points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderBoundReport {
    pub trials: usize,
    /// Largest `|a_hbar(g) Psi| / (|S^{-1/2} g| |dGamma(S)^{1/2} Psi|)`.
    pub annihilation: f64,
    /// Largest `|a*_hbar(g) Psi| / (|S^{-1/2} g| |dGamma(S)^{1/2} Psi| + sqrt(hbar) |g| |Psi|)`.
    pub creation: f64,
}

impl LadderBoundReport {
    pub fn max_ratio(&self) -> f64 {
        self.annihilation.max(self.creation)
    }
}

fn ladder_ratios(mode: &FockMode, ladder: &Ladder, s: f64, g: Complex64, psi: &CVector) -> (f64, f64) {
    let h = mode.hbar;
    let lhs_a = (ladder.annihilation.apply(psi) * (g.conj() * h.sqrt())).norm();
    let lhs_c = (ladder.creation.apply(psi) * (g * h.sqrt())).norm();
    let dgamma = (h * s * ladder.number.expectation(psi).re).max(0.0).sqrt();
    let main = g.norm() / s.sqrt() * dgamma;
    let extra = h.sqrt() * g.norm() * psi.norm();
    let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
    (ratio(lhs_a, main), ratio(lhs_c, main + extra))
}

/// Checks the ladder bounds on `e_1` plus `trials` random vectors whose top two
/// components vanish.
pub fn ladder_bound_check(mode: &FockMode, s: f64, g: Complex64, trials: usize, seed: u64) -> Result<LadderBoundReport> {
    if !(s > 0.0 && s.is_finite()) {
        return invalid(format!("S must be positive, got {s}"));
    }
    let ladder = build_ladder(mode);
    let dim = mode.dim();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut vectors = vec![basis_vector(dim, 1)];
    for _ in 0..trials {
        vectors.push(CVector::from_fn(dim, |n, _| {
            if n + 2 >= dim {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }
        }));
    }
    let mut report = LadderBoundReport { trials, annihilation: 0.0, creation: 0.0 };
    for psi in &vectors {
        let (a, c) = ladder_ratios(mode, &ladder, s, g, psi);
        report.annihilation = report.annihilation.max(a);
        report.creation = report.creation.max(c);
    }
    Ok(report)
}

/// Coordinate `z = <u, f>` of a generator along the unit vector `u`.
pub fn mode_coordinate(u: &crate::grid::RadialFunction, f: &crate::grid::RadialFunction) -> Result<Complex64> {
    let z = u.inner(f, WeightExponent::L2)?;
    let residual = f.try_sub(&u.scale(z))?.norm_sq(WeightExponent::L2).sqrt();
    let scale = f.norm_sq(WeightExponent::L2).sqrt();
    if residual > 1e-10 * scale.max(1.0) {
        return invalid(format!("generator leaves the span of the mode vector (residual {residual:.3e})"));
    }
    Ok(z)
}

fn single_mode_terms(symbol: &TrigPolynomial, u: &crate::grid::RadialFunction) -> Result<Vec<(Complex64, Complex64)>> {
    let norm = u.norm_sq(WeightExponent::L2);
    if (norm - 1.0).abs() > 1e-10 {
        return invalid(format!("mode vector must have unit norm, got {norm}"));
    }
    symbol.terms().map(|(h, c)| Ok((*c, mode_coordinate(u, h.function())?))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GardingOptions {
    /// Phase-space radius the low-lying states must resolve.
    pub photon_radius: f64,
    pub min_cutoff: usize,
    /// Positivity samples per side of the sampling box.
    pub sample_side: usize,
}

impl Default for GardingOptions {
    fn default() -> Self {
        Self { photon_radius: 0.5, min_cutoff: 40, sample_side: 100 }
    }
}

impl GardingOptions {
    /// `2 (R^2/hbar + 6 R/sqrt(hbar) + 20)`, raised to satisfy the displacement bound.
    pub fn cutoff_for(&self, hbar: f64, zmax: f64) -> usize {
        let r = self.photon_radius;
        let n = 2.0 * (r * r / hbar + 6.0 * r / hbar.sqrt() + 20.0);
        let need = 4.0 * PI * PI * hbar * zmax * zmax;
        (n.max(need).ceil() as usize).max(self.min_cutoff)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GardingRow {
    pub hbar: f64,
    pub cutoff: usize,
    pub weyl_min: f64,
    pub antiwick_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GardingReport {
    pub rows: Vec<GardingRow>,
    /// Smallest sampled value of the classical symbol.
    pub symbol_min: f64,
    /// Least-squares slope of `weyl_min` against `hbar` through the origin.
    pub kappa: f64,
    /// Relative residual of that fit.
    pub fit_residual: f64,
    /// `max(0, -kappa)`.
    pub constant: f64,
}

pub const GARDING_FIT_TOL: f64 = 0.1;

impl GardingReport {
    /// Linear fit good to [`GARDING_FIT_TOL`] or every minimum nonnegative.
    pub fn bounded(&self) -> bool {
        let nonneg = self.rows.iter().all(|r| r.weyl_min >= 0.0);
        nonneg || (self.constant.is_finite() && self.fit_residual < GARDING_FIT_TOL)
    }

    pub fn antiwick_min(&self) -> f64 {
        self.rows.iter().map(|r| r.antiwick_min).fold(f64::INFINITY, f64::min)
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.weyl_min / r.hbar).collect()
    }
}

/// Smallest real part of the single-mode symbol on a square box of
/// `side x side` points with edge `1 / min |z|`, centred at the origin.
pub fn sample_symbol_min(terms: &[(Complex64, Complex64)], side: usize) -> f64 {
    let zmin = terms.iter().map(|t| t.1.norm()).filter(|r| *r > 0.0).fold(f64::INFINITY, f64::min);
    let edge = if zmin.is_finite() { 1.0 / zmin } else { 1.0 };
    let side = side.max(1);
    let mut worst = f64::INFINITY;
    for i in 0..side {
        for k in 0..side {
            let zeta = Complex64::new(
                edge * ((i as f64 + 0.5) / side as f64 - 0.5),
                edge * ((k as f64 + 0.5) / side as f64 - 0.5),
            );
            let v: Complex64 = terms
                .iter()
                .map(|(c, z)| c * Complex64::from_polar(1.0, 2.0 * PI * (z.conj() * zeta).re))
                .sum();
            worst = worst.min(v.re);
        }
    }
    worst
}

/// Lowest trusted-block eigenvalues of the Weyl and anti-Wick quantizations of
/// a nonnegative classical symbol whose generators lie along `u`.
pub fn garding_probe(
    symbol: &TrigPolynomial,
    u: &crate::grid::RadialFunction,
    hbars: &[f64],
    options: &GardingOptions,
) -> Result<GardingReport> {
    if !symbol.is_classical() {
        return invalid("symbol must be classical");
    }
    if hbars.is_empty() || hbars.iter().any(|h| !(*h > 0.0)) {
        return invalid("hbar list must be nonempty and positive");
    }
    let terms = single_mode_terms(symbol, u)?;
    let symbol_min = sample_symbol_min(&terms, options.sample_side);
    if symbol_min < -1e-10 * symbol.l1_norm().max(1.0) {
        return invalid(format!("symbol fails positivity sampling (min {symbol_min:.3e})"));
    }
    let zmax = terms.iter().map(|t| t.1.norm()).fold(0.0, f64::max);
    let u = Arc::new(u.clone());
    let rows: Vec<GardingRow> = hbars
        .par_iter()
        .map(|&hbar| {
            let cutoff = options.cutoff_for(hbar, zmax);
            let factory = WeylFactory::new(cutoff)?;
            let weyl = single_mode_terms(&quantize(symbol, hbar)?, &u)?;
            let aw = single_mode_terms(&antiwick(symbol, hbar)?, &u)?;
            let dim = cutoff + 1;
            let mut qw = CMatrix::zeros(dim, dim);
            let mut qa = CMatrix::zeros(dim, dim);
            for ((c, z), (ca, _)) in weyl.iter().zip(&aw) {
                let w = factory.weyl(hbar, *z)?.into_matrix();
                qw += &w * *c;
                qa += &w * *ca;
            }
            let k = cutoff / 2 + 1;
            let tol = 1e-8 * symbol.l1_norm().max(1.0);
            Ok(GardingRow {
                hbar,
                cutoff,
                weyl_min: min_eigenvalue(&leading_block(&qw, k), tol)?,
                antiwick_min: min_eigenvalue(&leading_block(&qa, k), tol)?,
            })
        })
        .collect::<Result<_>>()?;
    let shh: f64 = rows.iter().map(|r| r.hbar * r.hbar).sum();
    let slh: f64 = rows.iter().map(|r| r.hbar * r.weyl_min).sum();
    let kappa = slh / shh;
    let res: f64 = rows.iter().map(|r| (r.weyl_min - kappa * r.hbar).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = rows.iter().map(|r| r.weyl_min.powi(2)).sum::<f64>().sqrt();
    let fit_residual = if scale > 0.0 { res / scale } else { 0.0 };
    Ok(GardingReport { rows, symbol_min, kappa, fit_residual, constant: (-kappa).max(0.0) })
}
