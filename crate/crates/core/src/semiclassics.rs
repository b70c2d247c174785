//! hbar sweeps measuring how quantum characteristic functions approach their
//! classical limits under evolution, at equilibrium and after scattering.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::VanHoveSystem;
use crate::error::{invalid, Error, Result};
use crate::grid::{MomentumGrid, RadialFunction, WeightExponent};
use crate::scattering::{transport_state, Direction};
use crate::sources::least_squares_slope;
use crate::states::{CharState, CharacteristicFunction};

/// Deviations inside this band enter the rate fit.
pub const FIT_BAND: (f64, f64) = (1e-12, 0.1);

/// Default ladder `2^{-3}, ..., 2^{-14}`.
pub fn default_hbar_ladder() -> Vec<f64> {
    (3..=14).map(|k| 2f64.powi(-k)).collect()
}

pub const PANEL_WIDTHS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// `e^{-s r^2}` and `i e^{-s r^2}` for `s` in [`PANEL_WIDTHS`].
pub fn standard_panel(grid: &std::sync::Arc<MomentumGrid>) -> Vec<RadialFunction> {
    let real: Vec<RadialFunction> = PANEL_WIDTHS.iter().map(|s| RadialFunction::gaussian(grid, *s)).collect();
    let imag: Vec<RadialFunction> = real.iter().map(|f| f.scale(Complex64::i())).collect();
    real.into_iter().chain(imag).collect()
}

/// `e^{-r^2}` scaled to unit norm in `L^2_{1/w}`.
pub fn unit_inv_omega_member(grid: &std::sync::Arc<MomentumGrid>) -> RadialFunction {
    let f = RadialFunction::gaussian(grid, 1.0);
    let n = f.norm_sq(WeightExponent::INV_OMEGA).sqrt();
    f.scale(Complex64::new(1.0 / n, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `beta_hbar = infinity`
    GroundState,
    /// `beta_hbar = beta * hbar`
    Linear { beta: f64 },
    /// `beta_hbar = c * hbar^{1 - eps}`
    SubLinear { c: f64, eps: f64 },
    /// `beta_hbar = c * hbar^{1 + eps}`
    SuperLinear { c: f64, eps: f64 },
}

impl Regime {
    pub fn beta_hbar(&self, hbar: f64) -> f64 {
        match *self {
            Regime::GroundState => f64::INFINITY,
            Regime::Linear { beta } => beta * hbar,
            Regime::SubLinear { c, eps } => c * hbar.powf(1.0 - eps),
            Regime::SuperLinear { c, eps } => c * hbar.powf(1.0 + eps),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regime::GroundState => "ground-state",
            Regime::Linear { .. } => "linear",
            Regime::SubLinear { .. } => "sublinear",
            Regime::SuperLinear { .. } => "superlinear",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Regime::GroundState => Ok(()),
            Regime::Linear { beta } if beta > 0.0 && beta.is_finite() => Ok(()),
            Regime::SubLinear { c, eps } if c > 0.0 && eps > 0.0 && eps <= 1.0 => Ok(()),
            Regime::SuperLinear { c, eps } if c > 0.0 && eps > 0.0 => Ok(()),
            _ => invalid(format!("invalid regime parameters {self:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Converged => "converged",
            Verdict::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub label: String,
    pub hbar_values: Vec<f64>,
    pub deviations: Vec<f64>,
    pub fitted_order: Option<f64>,
    pub verdict: Verdict,
    /// `max |omega_hbar(0) - 1|` over the sweep, classical state included.
    pub mass_defect: f64,
}

impl SweepReport {
    fn build(label: impl Into<String>, hbar_values: Vec<f64>, deviations: Vec<f64>, mass_defect: f64) -> Self {
        let fitted_order = fit_rate(&hbar_values, &deviations).ok();
        let verdict = trend_verdict(&deviations);
        Self { label: label.into(), hbar_values, deviations, fitted_order, verdict, mass_defect }
    }

    pub fn last_deviation(&self) -> f64 {
        self.deviations.last().copied().unwrap_or(f64::NAN)
    }
}

/// Nonincreasing along the ladder and at least halved overall.
fn trend_verdict(deviations: &[f64]) -> Verdict {
    let (Some(first), Some(last)) = (deviations.first(), deviations.last()) else {
        return Verdict::Diverged;
    };
    let monotone = deviations.windows(2).all(|p| p[1] <= p[0] + 1e-15);
    if monotone && (*last <= 0.5 * first || *last < 1e-13) {
        Verdict::Converged
    } else {
        Verdict::Diverged
    }
}

/// Least-squares slope of `log deviation` against `log hbar` inside [`FIT_BAND`].
pub fn fit_rate(hbars: &[f64], deviations: &[f64]) -> Result<f64> {
    if hbars.len() != deviations.len() {
        return invalid("hbar and deviation lists differ in length");
    }
    let points: Vec<(f64, f64)> = hbars
        .iter()
        .zip(deviations)
        .filter(|(h, d)| **h > 0.0 && **d >= FIT_BAND.0 && **d <= FIT_BAND.1)
        .map(|(h, d)| (h.ln(), d.ln()))
        .collect();
    if points.len() < 4 {
        return Err(Error::InsufficientData { have: points.len(), need: 4 });
    }
    Ok(least_squares_slope(&points))
}

fn check_sweep_inputs(panel: &[RadialFunction], hbars: &[f64]) -> Result<()> {
    if panel.is_empty() {
        return invalid("test-function panel is empty");
    }
    if hbars.is_empty() || hbars.iter().any(|h| !(*h > 0.0)) {
        return invalid("hbar ladder must be nonempty and positive");
    }
    Ok(())
}

fn sup_deviation<A, B>(a: &A, b: &B, panel: &[RadialFunction]) -> Result<f64>
where
    A: CharacteristicFunction + ?Sized,
    B: CharacteristicFunction + ?Sized,
{
    let mut worst = 0.0_f64;
    for f in panel {
        worst = worst.max((a.eval(f)? - b.eval(f)?).norm());
    }
    Ok(worst)
}

fn mass_defect<S: CharacteristicFunction + ?Sized>(s: &S) -> Result<f64> {
    let zero = RadialFunction::zeros(s.grid());
    Ok((s.eval(&zero)? - 1.0).norm())
}

/// Compares `family(hbar)` evolved for time `t` against the evolved classical state.
pub fn egorov_sweep<F>(
    sys: &VanHoveSystem,
    family: F,
    classical: &CharState,
    t: f64,
    panel: &[RadialFunction],
    hbars: &[f64],
) -> Result<SweepReport>
where
    F: Fn(f64) -> Result<CharState> + Sync,
{
    check_sweep_inputs(panel, hbars)?;
    if classical.hbar() != 0.0 {
        return invalid("the limit state must be classical");
    }
    let limit = sys.evolve_state(classical, t)?;
    let rows: Vec<(f64, f64)> = hbars
        .par_iter()
        .map(|&hbar| {
            let state = family(hbar)?;
            let evolved = sys.evolve_state(&state, t)?;
            Ok((sup_deviation(&evolved, &limit, panel)?, mass_defect(&evolved)?))
        })
        .collect::<Result<_>>()?;
    let mass = rows.iter().map(|r| r.1).fold(mass_defect(&limit)?, f64::max);
    Ok(SweepReport::build(
        format!("egorov t={t}"),
        hbars.to_vec(),
        rows.into_iter().map(|r| r.0).collect(),
        mass,
    ))
}

/// Quantum Gibbs states along `regime` against their classical limit.
///
/// The superlinear regime has no regular limit; its deviation is the largest
/// `|omega_hbar(f)|` over the nonzero panel members.
pub fn equilibrium_sweep(sys: &VanHoveSystem, regime: Regime, panel: &[RadialFunction], hbars: &[f64]) -> Result<SweepReport> {
    check_sweep_inputs(panel, hbars)?;
    regime.validate()?;
    let source = sys.source().clone();
    let limit = match regime {
        Regime::Linear { beta } => Some(CharState::gibbs_classical(source.clone(), beta)?),
        Regime::GroundState | Regime::SubLinear { .. } => Some(CharState::dirac(sys.minimizer())),
        Regime::SuperLinear { .. } => None,
    };
    let nonzero: Vec<RadialFunction> = panel.iter().filter(|f| !f.is_zero()).cloned().collect();
    let rows: Vec<(f64, f64)> = hbars
        .par_iter()
        .map(|&hbar| {
            let state = CharState::gibbs_quantum(source.clone(), regime.beta_hbar(hbar), hbar)?;
            let dev = match &limit {
                Some(target) => sup_deviation(&state, target, panel)?,
                None => {
                    let mut worst = 0.0_f64;
                    for f in &nonzero {
                        worst = worst.max(state.eval(f)?.norm());
                    }
                    worst
                }
            };
            Ok((dev, mass_defect(&state)?))
        })
        .collect::<Result<_>>()?;
    let mut mass = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    if let Some(target) = &limit {
        mass = mass.max(mass_defect(target)?);
    }
    Ok(SweepReport::build(
        format!("equilibrium {}", regime.name()),
        hbars.to_vec(),
        rows.into_iter().map(|r| r.0).collect(),
        mass,
    ))
}

/// Sweep of transported states together with the untransported reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSweep {
    pub report: SweepReport,
    pub untransported: Vec<f64>,
    /// `max |transported - untransported|` over the ladder.
    pub diagram_defect: f64,
}

pub const DIAGRAM_TOL: f64 = 1e-15;

impl ScatteringSweep {
    pub fn commutes(&self) -> bool {
        self.diagram_defect <= DIAGRAM_TOL
    }
}

/// Transports `family(hbar)` and the classical state by the wave operator and
/// compares the deviations with the untransported ones.
pub fn scattering_sweep<F>(
    sys: &VanHoveSystem,
    family: F,
    classical: &CharState,
    panel: &[RadialFunction],
    hbars: &[f64],
) -> Result<ScatteringSweep>
where
    F: Fn(f64) -> Result<CharState> + Sync,
{
    check_sweep_inputs(panel, hbars)?;
    if classical.hbar() != 0.0 {
        return invalid("the limit state must be classical");
    }
    let limit = transport_state(sys, classical, Direction::Outgoing)?;
    let rows: Vec<(f64, f64, f64)> = hbars
        .par_iter()
        .map(|&hbar| {
            let state = family(hbar)?;
            let moved = transport_state(sys, &state, Direction::Outgoing)?;
            Ok((
                sup_deviation(&moved, &limit, panel)?,
                sup_deviation(&state, classical, panel)?,
                mass_defect(&moved)?,
            ))
        })
        .collect::<Result<_>>()?;
    let deviations: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let untransported: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let diagram_defect = deviations
        .iter()
        .zip(&untransported)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mass = rows.iter().map(|r| r.2).fold(mass_defect(&limit)?, f64::max);
    Ok(ScatteringSweep {
        report: SweepReport::build("scattering", hbars.to_vec(), deviations, mass),
        untransported,
        diagram_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridConfig;
    use crate::sources::SourceSpec;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn setup() -> (Arc<MomentumGrid>, VanHoveSystem) {
        let g = GridConfig::default().build().unwrap();
        let sys = VanHoveSystem::from_spec(SourceSpec::gaussian(), &g).unwrap();
        (g, sys)
    }

    #[test]
    fn fit_rate_exact_powers() {
        let h: Vec<f64> = (3..10).map(|k| 2f64.powi(-k)).collect();
        let lin: Vec<f64> = h.iter().map(|x| 0.3 * x).collect();
        let quad: Vec<f64> = h.iter().map(|x| 0.7 * x * x).collect();
        assert!((fit_rate(&h, &lin).unwrap() - 1.0).abs() < 1e-10);
        assert!((fit_rate(&h, &quad).unwrap() - 2.0).abs() < 1e-10);
        assert!(matches!(fit_rate(&h[..3], &lin[..3]), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn coherent_egorov_single_member() {
        let (g, sys) = setup();
        let f = RadialFunction::gaussian(&g, 1.0);
        let f = f.scale(Complex64::new(1.0 / f.norm_sq(WeightExponent::L2).sqrt(), 0.0));
        let t0 = RadialFunction::gaussian(&g, 2.0).scale(Complex64::new(0.1, 0.3));
        let classical = CharState::dirac(t0.clone());
        for t in [0.0, 5.0] {
            let r = egorov_sweep(&sys, |h| CharState::coherent(t0.clone(), h), &classical, t, std::slice::from_ref(&f), &[0.01]).unwrap();
            assert!((r.deviations[0] - 0.04815).abs() < 1e-5, "{}", r.deviations[0]);
            assert!((r.deviations[0] - (1.0 - (-PI * PI * 0.005f64).exp())).abs() < 1e-13);
        }
    }

    #[test]
    fn deformed_gibbs_matches_damping() {
        let (g, sys) = setup();
        let panel = standard_panel(&g);
        let m = CharState::gibbs_classical(sys.source().clone(), 2.0).unwrap();
        let hbars = default_hbar_ladder();
        let r = egorov_sweep(&sys, |h| CharState::deformed(m.clone(), h), &m, 0.0, &panel, &hbars).unwrap();
        let order = r.fitted_order.unwrap();
        assert!((order - 1.0).abs() < 0.05, "{order}");
        assert_eq!(r.verdict, Verdict::Converged);
    }

    #[test]
    fn regimes_have_expected_limits() {
        let (g, sys) = setup();
        let panel = standard_panel(&g);
        let hbars = default_hbar_ladder();
        let lin = equilibrium_sweep(&sys, Regime::Linear { beta: 2.0 }, &panel, &hbars).unwrap();
        assert!((lin.fitted_order.unwrap() - 2.0).abs() < 0.1);
        assert!(lin.mass_defect == 0.0);
        let gs = equilibrium_sweep(&sys, Regime::GroundState, &panel, &hbars).unwrap();
        assert_eq!(gs.verdict, Verdict::Converged);
        let sup = equilibrium_sweep(&sys, Regime::SuperLinear { c: 1.0, eps: 0.5 }, &[unit_inv_omega_member(&g)], &hbars).unwrap();
        assert!(sup.last_deviation() < 0.05);
        assert!(equilibrium_sweep(&sys, Regime::Linear { beta: -1.0 }, &panel, &hbars).is_err());
        assert!(equilibrium_sweep(&sys, Regime::GroundState, &[], &hbars).is_err());
    }

    #[test]
    fn scattering_sweep_commutes() {
        let (g, sys) = setup();
        let t0 = RadialFunction::gaussian(&g, 1.0).scale(Complex64::new(-0.2, 0.4));
        let classical = CharState::dirac(t0.clone());
        let s = scattering_sweep(&sys, |h| CharState::coherent(t0.clone(), h), &classical, &standard_panel(&g), &default_hbar_ladder()).unwrap();
        assert!(s.commutes(), "{}", s.diagram_defect);
    }
}
