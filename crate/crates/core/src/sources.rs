//! Source families `J`, infrared cutoffs `J_n = 1_{|k| >= 1/n} J`, and the
//! infrared classifier.
//!
//! The concrete family is `J_gamma(r) = r^{-gamma} e^{-r^2}`. The Gaussian is a
//! UV cutoff, so only the behaviour at `r -> 0` separates the classes:
//!
//! | class      | `J` in                       | condition at `mu = 0`            |
//! |------------|------------------------------|----------------------------------|
//! | Regular    | `L^2_{1/w} ∩ L^2_{1/w^2}`    | `gamma < (d-2)/2`                |
//! | TypeI      | `L^2_{1/w}` only             | `(d-2)/2 <= gamma < (d-1)/2`     |
//! | TypeII     | `L^2` only                   | `(d-1)/2 <= gamma < d/2`         |
//! | OutOfScope | not even `L^2`               | `gamma >= d/2`                   |

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::{MomentumGrid, RadialFunction, WeightExponent};

#[derive(Debug, Clone, PartialEq)]
pub enum SourceFamily {
    PowerLawGaussian { gamma: f64 },
    GaussianOnly,
    /// Explicit samples, one per grid node.
    CustomSamples(Vec<Complex64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub family: SourceFamily,
    pub ir_cutoff: Option<u32>,
}

impl SourceSpec {
    pub fn power_law(gamma: f64) -> Self {
        Self { family: SourceFamily::PowerLawGaussian { gamma }, ir_cutoff: None }
    }

    pub fn gaussian() -> Self {
        Self { family: SourceFamily::GaussianOnly, ir_cutoff: None }
    }

    pub fn custom(samples: Vec<Complex64>) -> Self {
        Self { family: SourceFamily::CustomSamples(samples), ir_cutoff: None }
    }

    /// The zero source (free field).
    pub fn zero(grid: &MomentumGrid) -> Self {
        Self::custom(vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn with_cutoff(mut self, n: u32) -> Self {
        self.ir_cutoff = Some(n);
        self
    }

    pub fn without_cutoff(mut self) -> Self {
        self.ir_cutoff = None;
        self
    }

    fn gamma(&self) -> Option<f64> {
        match self.family {
            SourceFamily::PowerLawGaussian { gamma } => Some(gamma),
            SourceFamily::GaussianOnly => Some(0.0),
            SourceFamily::CustomSamples(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InfraredClass {
    Regular,
    TypeI,
    TypeII,
    OutOfScope,
}

impl InfraredClass {
    /// Whether `J` lies in `L^2_{1/w}`, the condition for the dynamics and Gibbs states.
    pub fn is_admissible(self) -> bool {
        matches!(self, Self::Regular | Self::TypeI)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Regular => "Regular",
            Self::TypeI => "TypeI",
            Self::TypeII => "TypeII",
            Self::OutOfScope => "OutOfScope",
        }
    }
}

impl fmt::Display for InfraredClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Samples `J` (or `J_n` when a cutoff is set) on the grid nodes.
pub fn realize(spec: &SourceSpec, grid: &Arc<MomentumGrid>) -> Result<RadialFunction> {
    if spec.ir_cutoff == Some(0) {
        return invalid("infrared cutoff n must be at least 1");
    }
    let d = grid.dim() as f64;
    let raw = match &spec.family {
        SourceFamily::PowerLawGaussian { gamma } => {
            if !gamma.is_finite() {
                return invalid("gamma must be finite");
            }
            if *gamma >= d / 2.0 && spec.ir_cutoff.is_none() {
                return invalid(format!(
                    "gamma = {gamma} >= d/2 = {}: J is not square integrable without an infrared cutoff",
                    d / 2.0
                ));
            }
            let g = *gamma;
            RadialFunction::from_real_fn(grid, |r| r.powf(-g) * (-r * r).exp())
        }
        SourceFamily::GaussianOnly => RadialFunction::gaussian(grid, 1.0),
        SourceFamily::CustomSamples(values) => RadialFunction::from_values(grid, values.clone())?,
    };
    Ok(match spec.ir_cutoff {
        Some(n) => raw.restrict_above(1.0 / n as f64),
        None => raw,
    })
}

/// `J` in `L^2_{w^{-alpha}}` iff `gamma < (d - alpha)/2`; the threshold itself counts as divergent.
fn in_space(gamma: f64, dim: u32, alpha: f64) -> bool {
    gamma < (dim as f64 - alpha) / 2.0
}

fn class_from_membership(l2: bool, inv_omega: bool, inv_omega_sq: bool) -> InfraredClass {
    match (l2, inv_omega, inv_omega_sq) {
        (_, true, true) => InfraredClass::Regular,
        (_, true, false) => InfraredClass::TypeI,
        (true, false, _) => InfraredClass::TypeII,
        _ => InfraredClass::OutOfScope,
    }
}

/// Closed-form classification of the power-law family.
///
/// With `mu > 0` all infrared weights are bounded, so every square-integrable
/// source is Regular. An active cutoff likewise removes the infrared region.
pub fn classify_analytic(spec: &SourceSpec, grid: &MomentumGrid) -> Result<InfraredClass> {
    let gamma = spec
        .gamma()
        .ok_or_else(|| Error::InvalidParameter("analytic classification needs a power-law source".into()))?;
    let d = grid.dim();
    if spec.ir_cutoff.is_some() {
        return Ok(InfraredClass::Regular);
    }
    if grid.mass() > 0.0 {
        return Ok(if in_space(gamma, d, 0.0) { InfraredClass::Regular } else { InfraredClass::OutOfScope });
    }
    Ok(class_from_membership(
        in_space(gamma, d, 0.0),
        in_space(gamma, d, 1.0),
        in_space(gamma, d, 2.0),
    ))
}

/// Fitted infrared growth exponents and the resulting class.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericClassification {
    pub class: InfraredClass,
    /// Growth exponent of `m(eps)` against `1/eps` in `L^2`, `L^2_{1/w}` and `L^2_{1/w^2}`.
    pub slopes: [f64; 3],
    pub slope_tol: f64,
    pub epsilons: Vec<f64>,
}

impl NumericClassification {
    pub fn slope_l2(&self) -> f64 {
        self.slopes[0]
    }

    pub fn slope_inv_omega(&self) -> f64 {
        self.slopes[1]
    }

    pub fn slope_inv_omega_sq(&self) -> f64 {
        self.slopes[2]
    }
}

pub const DEFAULT_SLOPE_TOL: f64 = 0.01;
const EPS_RANGE_LO_FACTOR: f64 = 10.0;
const EPS_RANGE_HI: f64 = 0.02;

/// Classifies any realizable source from the infrared growth of its truncated norms.
///
/// For each weight the shell masses `m(eps_k) - m(eps_{k-1})` over consecutive
/// panel edges are fitted in log-log against `1/eps`. Their slope is the growth
/// exponent of `m(eps)` when it diverges and negative when it converges.
pub fn classify_numeric(spec: &SourceSpec, grid: &Arc<MomentumGrid>) -> Result<NumericClassification> {
    classify_numeric_with(spec, grid, DEFAULT_SLOPE_TOL)
}

pub fn classify_numeric_with(
    spec: &SourceSpec,
    grid: &Arc<MomentumGrid>,
    slope_tol: f64,
) -> Result<NumericClassification> {
    let j = realize(spec, grid)?;
    let lo = grid.config().r_min * EPS_RANGE_LO_FACTOR;
    let eps: Vec<f64> = grid
        .edges()
        .into_iter()
        .filter(|e| *e >= lo && *e <= EPS_RANGE_HI)
        .rev()
        .collect();
    if eps.len() < 4 {
        return Err(Error::InsufficientData { have: eps.len(), need: 4 });
    }
    let mut slopes = [f64::NEG_INFINITY; 3];
    for (slot, alpha) in [0i8, -1, -2].into_iter().enumerate() {
        let w = WeightExponent::new(alpha)?;
        let density: Vec<f64> = j
            .values()
            .iter()
            .zip(grid.weighted_measure(w))
            .map(|(v, m)| v.norm_sqr() * m)
            .collect();
        let shell = |a: f64, b: f64| -> f64 {
            grid.nodes()
                .iter()
                .zip(&density)
                .filter(|(r, _)| **r >= a && **r < b)
                .map(|(_, v)| v)
                .sum()
        };
        let points: Vec<(f64, f64)> = eps
            .windows(2)
            .map(|p| (p[1], shell(p[1], p[0])))
            .filter(|(_, m)| *m > 0.0)
            .map(|(e, m)| ((1.0 / e).ln(), m.ln()))
            .collect();
        if points.len() >= 3 {
            // shells are geometric, so the log shell mass grows like s * log(1/eps)
            slopes[slot] = least_squares_slope(&points);
        }
    }
    let converges = |s: f64| s <= -slope_tol;
    let class = class_from_membership(converges(slopes[0]), converges(slopes[1]), converges(slopes[2]));
    Ok(NumericClassification { class, slopes, slope_tol, epsilons: eps })
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Classification used for admissibility: closed form for the power-law family
/// without cutoff at `mu = 0`, fitted otherwise.
pub fn classify(spec: &SourceSpec, grid: &Arc<MomentumGrid>) -> Result<InfraredClass> {
    match (&spec.family, spec.ir_cutoff) {
        (SourceFamily::CustomSamples(_), None) => Ok(classify_numeric(spec, grid)?.class),
        _ => classify_analytic(spec, grid),
    }
}

/// A source sampled on a grid together with `J/w` and its infrared class.
#[derive(Debug, Clone)]
pub struct RealizedSource {
    spec: SourceSpec,
    j: RadialFunction,
    j_over_omega: RadialFunction,
    class: InfraredClass,
}

impl RealizedSource {
    pub fn new(spec: SourceSpec, grid: &Arc<MomentumGrid>) -> Result<Self> {
        let j = realize(&spec, grid)?;
        let class = classify(&spec, grid)?;
        let j_over_omega = j.mul_by_omega_fn(|om| Complex64::new(1.0 / om, 0.0));
        Ok(Self { spec, j, j_over_omega, class })
    }

    pub fn spec(&self) -> &SourceSpec {
        &self.spec
    }

    pub fn samples(&self) -> &RadialFunction {
        &self.j
    }

    pub fn j_over_omega(&self) -> &RadialFunction {
        &self.j_over_omega
    }

    pub fn class(&self) -> InfraredClass {
        self.class
    }

    pub fn grid(&self) -> &Arc<MomentumGrid> {
        self.j.grid()
    }

    pub fn norm_sq(&self, w: WeightExponent) -> f64 {
        self.j.norm_sq(w)
    }

    pub fn require_admissible(&self) -> Result<()> {
        if self.class.is_admissible() {
            Ok(())
        } else {
            Err(Error::SourceNotAdmissible(self.class.to_string()))
        }
    }
}
