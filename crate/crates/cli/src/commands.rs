//! One function per subcommand. Each builds a [`Report`] with a table, a flat
//! summary and named checks.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use vanhove_core::dynamics::KmsWindow;
use vanhove_core::fock::{
    build_hamiltonian, garding_probe, ground_state_analysis, number_expectation, soft_photon_sweep, GardingOptions,
};
use vanhove_core::linalg::hermitian_eigen;
use vanhove_core::scattering::{
    asymptotic_character, convergence_probe, decay_overlap, transport_state, transport_state_inverse, Direction,
};
use vanhove_core::semiclassics::{egorov_sweep, equilibrium_sweep, scattering_sweep, unit_inv_omega_member, Verdict};
use vanhove_core::sources::{classify, classify_analytic, classify_numeric};
use vanhove_core::states::evaluate;
use vanhove_core::weyl::{adjoint, compose};
use vanhove_core::{
    CharState, CharacteristicFunction, FockMode, InfraredClass, MomentumGrid, RadialFunction, Regime,
    TrigPolynomial, VanHoveSystem, WeightExponent,
};

use crate::config::RunConfig;
use crate::report::Report;
use crate::CliError;

type Outcome = Result<Report, CliError>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `Xoshiro256++` seeded through its splitmix64 expansion of the 64-bit seed.
fn rng(cfg: &RunConfig) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(cfg.seed)
}

/// Sum of two complex Gaussians with widths in `[0.3, 3)`.
fn random_function(r: &mut Xoshiro256PlusPlus, g: &Arc<MomentumGrid>, amp: f64) -> RadialFunction {
    let terms: Vec<(Complex64, f64)> = (0..2)
        .map(|_| (c(r.random_range(-amp..amp), r.random_range(-amp..amp)), r.random_range(0.3..3.0)))
        .collect();
    RadialFunction::from_fn(g, |x| terms.iter().map(|(a, s)| a * (-s * x * x).exp()).sum())
}

fn panel(cfg: &RunConfig, g: &Arc<MomentumGrid>) -> Vec<RadialFunction> {
    let real: Vec<RadialFunction> = cfg.sigmas.iter().map(|s| RadialFunction::gaussian(g, *s)).collect();
    let imag: Vec<RadialFunction> = real.iter().map(|f| f.scale(Complex64::i())).collect();
    real.into_iter().chain(imag).collect()
}

fn reference_center(g: &Arc<MomentumGrid>) -> RadialFunction {
    RadialFunction::gaussian(g, 1.5).scale(c(0.4, -0.3))
}

fn system(cfg: &RunConfig) -> Result<(Arc<MomentumGrid>, VanHoveSystem), CliError> {
    let g = cfg.grid.build()?;
    let sys = VanHoveSystem::from_spec(cfg.source.clone(), &g)?;
    Ok((g, sys))
}

fn max(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

pub fn classify_cmd(cfg: &RunConfig) -> Outcome {
    let g = cfg.grid.build()?;
    let class = classify(&cfg.source, &g)?;
    let mut r = Report::new(&["weight", "alpha", "growth_slope", "in_space"]);
    r.put("class", class.as_str());
    match classify_numeric(&cfg.source, &g) {
        Ok(num) => {
            let names = ["L2", "L2_inv_omega", "L2_inv_omega_sq"];
            let alphas = [0u32, 1, 2];
            for ((name, alpha), slope) in names.iter().zip(alphas).zip(num.slopes) {
                let inside = if slope <= -num.slope_tol { "yes" } else { "no" };
                r.row(vec![(*name).into(), alpha.into(), slope.into(), inside.into()]);
            }
            r.put("numeric_class", num.class.as_str());
            r.put_num("slope_tol", num.slope_tol);
            if let Ok(analytic) = classify_analytic(&cfg.source, &g) {
                r.put("analytic_class", analytic.as_str());
                r.check(
                    "analytic_numeric_agree",
                    analytic == num.class,
                    format!("analytic {analytic}, numeric {}", num.class),
                );
            }
        }
        Err(e) => r.put("numeric_class", format!("unavailable: {e}")),
    }
    Ok(r)
}

pub fn energy(cfg: &RunConfig) -> Outcome {
    let (g, sys) = system(cfg)?;
    let e_min = sys.classical_energy(&sys.minimizer())?;
    let closed = sys.ground_energy();
    let mut rng = rng(cfg);
    let samples: Vec<(RadialFunction, f64)> =
        (0..cfg.pairs).map(|_| (random_function(&mut rng, &g, 1.0), rng.random_range(-1e3..1e3))).collect();
    let drifts: Vec<(f64, f64, f64)> = samples
        .par_iter()
        .map(|(a0, t)| {
            let e0 = sys.classical_energy(a0)?;
            let et = sys.classical_energy(&sys.classical_flow(a0, *t)?)?;
            Ok((e0, et, (et - e0).abs() / e0.abs()))
        })
        .collect::<vanhove_core::Result<_>>()?;
    let mut r = Report::new(&["sample", "t", "energy_0", "energy_t", "relative_drift"]);
    for (k, ((_, t), (e0, et, d))) in samples.iter().zip(&drifts).enumerate() {
        r.row(vec![k.into(), (*t).into(), (*e0).into(), (*et).into(), (*d).into()]);
    }
    let worst = max(drifts.iter().map(|d| d.2));
    let gap = (e_min - closed).abs();
    r.put_num("ground_energy", e_min);
    r.put_num("closed_form", closed);
    r.put_num("max_relative_drift", worst);
    r.check("minimizer_energy", gap <= 1e-10 * closed.abs().max(1.0), format!("|E(-J/w) + |J|^2| = {gap:.3e}"));
    r.check("energy_conservation", worst <= 1e-10, format!("max relative drift {worst:.3e} (tol 1e-10)"));
    Ok(r)
}

pub fn evolve(cfg: &RunConfig) -> Outcome {
    let (g, sys) = system(cfg)?;
    let center = reference_center(&g);
    let state = CharState::coherent(center.clone(), cfg.hbar)?;
    let mut r = Report::new(&["t", "sigma", "re", "im", "modulus", "coherent_defect", "duality_defect"]);
    let (mut coherent, mut dual, mut modulus) = (0.0_f64, 0.0_f64, 0.0_f64);
    for &sigma in &cfg.sigmas {
        let f = RadialFunction::gaussian(&g, sigma);
        let start = state.eval(&f)?.norm();
        for &t in &cfg.times {
            let v = sys.evolve_state(&state, t)?.eval(&f)?;
            let moved = CharState::coherent(sys.classical_flow(&center, t)?, cfg.hbar)?.eval(&f)?;
            let heis = evaluate(&state, &sys.evolve_weyl(&TrigPolynomial::character(f.clone(), cfg.hbar)?, t)?)?;
            let (dc, dd) = ((v - moved).norm(), (v - heis).norm());
            coherent = coherent.max(dc);
            dual = dual.max(dd);
            modulus = modulus.max((v.norm() - start).abs());
            r.row(vec![t.into(), sigma.into(), v.re.into(), v.im.into(), v.norm().into(), dc.into(), dd.into()]);
        }
    }
    r.put_num("max_coherent_defect", coherent);
    r.put_num("max_duality_defect", dual);
    r.put_num("max_modulus_drift", modulus);
    r.check("coherent_transport", coherent <= 1e-12, format!("coherent state follows the flow to {coherent:.3e}"));
    r.check("state_weyl_duality", dual <= 1e-13, format!("state vs observable evolution {dual:.3e}"));
    r.check("modulus_conserved", modulus <= 1e-12, format!("|omega_t(f)| drift {modulus:.3e}"));
    Ok(r)
}

pub fn kms(cfg: &RunConfig) -> Outcome {
    let (g, sys) = system(cfg)?;
    let ts: Vec<f64> = (0..21).map(|k| -5.0 + 0.5 * k as f64).collect();
    let mut rng = rng(cfg);
    let pairs: Vec<(RadialFunction, RadialFunction)> =
        (0..cfg.pairs).map(|_| (random_function(&mut rng, &g, 0.4), random_function(&mut rng, &g, 0.4))).collect();
    let mut r = Report::new(&["pair", "beta_hbar", "residual"]);
    let mut worst = 0.0_f64;
    for &beta in &cfg.betas {
        let s = CharState::gibbs_quantum(sys.source().clone(), beta, cfg.hbar)?;
        let res: Vec<f64> =
            pairs.par_iter().map(|(f, h)| sys.kms_check(&s, f, h, &ts)).collect::<vanhove_core::Result<_>>()?;
        for (k, x) in res.iter().enumerate() {
            r.row(vec![k.into(), beta.into(), (*x).into()]);
            worst = worst.max(*x);
        }
    }
    r.put_num("max_residual", worst);
    r.check("kms_identity", worst <= 1e-10, format!("max KMS residual {worst:.3e} (tol 1e-10)"));
    Ok(r)
}

pub fn groundstate(cfg: &RunConfig) -> Outcome {
    let (g, sys) = system(cfg)?;
    let ground = CharState::gibbs_quantum(sys.source().clone(), f64::INFINITY, cfg.hbar)?;
    let neg = KmsWindow::new(cfg.window.0, cfg.window.1)?;
    let pos = KmsWindow::new(cfg.control_window.0, cfg.control_window.1)?;
    let mut rng = rng(cfg);
    let pairs: Vec<(RadialFunction, RadialFunction)> =
        (0..cfg.window_pairs).map(|_| (random_function(&mut rng, &g, 0.6), random_function(&mut rng, &g, 0.6))).collect();
    let rows: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|(f, h)| {
            let res = sys.ground_state_check(&ground, f, h, &neg)?;
            let control = sys.window_integral(&ground, cfg.hbar, f, h, &pos)?.norm();
            Ok((res, control))
        })
        .collect::<vanhove_core::Result<_>>()?;
    let mut r = Report::new(&["pair", "residual", "control_modulus"]);
    for (k, (res, control)) in rows.iter().enumerate() {
        r.row(vec![k.into(), (*res).into(), (*control).into()]);
    }
    let worst = max(rows.iter().map(|x| x.0));
    let control = max(rows.iter().map(|x| x.1));
    r.put_num("max_residual", worst);
    r.put_num("max_control", control);
    r.check("ground_state_window", worst <= 1e-6, format!("window residual {worst:.3e} (tol 1e-6)"));
    r.check("control_detects", control >= 1e-3, format!("positive-support control {control:.3e} (want >= 1e-3)"));
    Ok(r)
}

pub fn egorov(cfg: &RunConfig) -> Outcome {
    let (g, sys) = system(cfg)?;
    let panel = panel(cfg, &g);
    let center = reference_center(&g);
    let classical = CharState::dirac(center.clone());
    let norms: Vec<f64> = panel.iter().map(|f| f.norm_sq(WeightExponent::L2)).collect();
    let mut r = Report::new(&["t", "hbar", "deviation", "closed_form"]);
    let (mut worst, mut orders) = (0.0_f64, Vec::new());
    for &t in &cfg.times {
        let rep = egorov_sweep(&sys, |h| CharState::coherent(center.clone(), h), &classical, t, &panel, &cfg.hbar_ladder)?;
        for (h, d) in rep.hbar_values.iter().zip(&rep.deviations) {
            let want = max(norms.iter().map(|n| 1.0 - (-0.5 * PI * PI * h * n).exp()));
            worst = worst.max((d - want).abs());
            r.row(vec![t.into(), (*h).into(), (*d).into(), want.into()]);
        }
        orders.push(rep.fitted_order.unwrap_or(f64::NAN));
    }
    let spread = orders.iter().map(|o| (o - 1.0).abs()).fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    r.put_num("fitted_order", orders.first().copied().unwrap_or(f64::NAN));
    r.put_num("max_order_error", spread);
    r.put_num("max_closed_form_defect", worst);
    r.check("closed_form_rate", worst <= 1e-12, format!("max |deviation - closed form| {worst:.3e}"));
    r.check("order_one", spread <= 0.05, format!("fitted orders {orders:.4?} (want 1 +- 0.05)"));
    Ok(r)
}

pub fn equilibrium(cfg: &RunConfig) -> Outcome {
    let (g, sys) = system(cfg)?;
    let panel = match cfg.regime {
        Regime::SuperLinear { .. } => vec![unit_inv_omega_member(&g)],
        _ => panel(cfg, &g),
    };
    let rep = equilibrium_sweep(&sys, cfg.regime, &panel, &cfg.hbar_ladder)?;
    let mut r = Report::new(&["hbar", "beta_hbar", "deviation"]);
    for (h, d) in rep.hbar_values.iter().zip(&rep.deviations) {
        r.row(vec![(*h).into(), cfg.regime.beta_hbar(*h).into(), (*d).into()]);
    }
    let order = rep.fitted_order.unwrap_or(f64::NAN);
    r.put("regime", cfg.regime.name());
    r.put_num("fitted_order", order);
    r.put("verdict", rep.verdict.as_str());
    r.put_num("last_deviation", rep.last_deviation());
    r.put_num("mass_defect", rep.mass_defect);
    match cfg.regime {
        Regime::Linear { .. } => {
            r.check("linear_order_two", (order - 2.0).abs() <= 0.1, format!("fitted order {order:.4} (want 2 +- 0.1)"))
        }
        Regime::SuperLinear { .. } => {
            let last = rep.last_deviation();
            r.check("superlinear_vanishes", last < 0.05, format!("|omega(f)| at smallest hbar {last:.3e} (tol 0.05)"))
        }
        Regime::GroundState | Regime::SubLinear { .. } => r.check(
            "converges_to_minimizer",
            rep.verdict == Verdict::Converged,
            format!("verdict {}, last deviation {:.3e}", rep.verdict.as_str(), rep.last_deviation()),
        ),
    }
    Ok(r)
}

pub fn scattering(cfg: &RunConfig) -> Outcome {
    let (g, sys) = system(cfg)?;
    let f = RadialFunction::gaussian(&g, 1.0);
    let target = asymptotic_character(&sys, &f, cfg.hbar, Direction::Outgoing)?.coeff;
    let mut r = Report::new(&["t", "overlap", "deviation", "bound"]);
    let mut bound_ok = true;
    for &t in &cfg.times {
        let overlap = decay_overlap(&sys, &f, t)?.norm();
        let dev = (convergence_probe(&sys, &f, cfg.hbar, t)? - target).norm();
        let bound = 2.0 * PI * overlap;
        bound_ok &= dev <= bound * (1.0 + 1e-12) + 1e-15;
        r.row(vec![t.into(), overlap.into(), dev.into(), bound.into()]);
    }
    let decay = decay_overlap(&sys, &f, 1e3)?.norm();

    let center = reference_center(&g);
    let states = [
        CharState::coherent(center.clone(), cfg.hbar)?,
        CharState::dirac(center.clone()),
        CharState::gibbs_quantum(sys.source().clone(), 1.0, cfg.hbar)?,
    ];
    let panel = panel(cfg, &g);
    let mut round_trip = 0.0_f64;
    for s in &states {
        let out = transport_state(&sys, s, Direction::Outgoing)?;
        let back = transport_state_inverse(&sys, &out, Direction::Incoming)?;
        for h in &panel {
            round_trip = round_trip.max((back.eval(h)? - s.eval(h)?).norm());
        }
    }
    let classical = CharState::dirac(center.clone());
    let sweep = scattering_sweep(&sys, |h| CharState::coherent(center.clone(), h), &classical, &panel, &cfg.hbar_ladder)?;

    r.put_num("decay_at_1e3", decay);
    r.put_num("round_trip_defect", round_trip);
    r.put_num("diagram_defect", sweep.diagram_defect);
    r.check("decay_at_1e3", decay < 1e-2, format!("|overlap| at t=1e3 {decay:.3e} (tol 1e-2)"));
    r.check("overlap_bound", bound_ok, "deviation within 2 pi |overlap| at every t");
    r.check("s_matrix_identity", round_trip <= 1e-15, format!("round trip {round_trip:.3e} (tol 1e-15)"));
    r.check("diagram_commutes", sweep.commutes(), format!("transported vs untransported {:.3e}", sweep.diagram_defect));
    Ok(r)
}

pub fn fock_spectrum(cfg: &RunConfig) -> Outcome {
    let mode = FockMode::new(cfg.omega, c(cfg.coupling, 0.0), cfg.fock_n, cfg.hbar)?;
    let h = build_hamiltonian(&mode);
    let (eigs, _) = hermitian_eigen(h.matrix(), 1e-12)?;
    let report = ground_state_analysis(&mode)?;
    let doubled = ground_state_analysis(&mode.doubled())?;
    let number = number_expectation(&mode)?;
    let e0 = mode.ground_energy_closed_form();
    // Displaced number states |k> stay resolved while sqrt(k) + |alpha| + 1 fits under sqrt(N).
    let alpha = mode.ground_displacement().norm() * PI * cfg.hbar.sqrt();
    let resolved = ((((mode.cutoff() as f64).sqrt() - alpha - 1.0).max(0.0)).powi(2) as usize).min(mode.trusted());
    let mut r = Report::new(&["k", "eigenvalue", "predicted", "resolved"]);
    let mut worst = 0.0_f64;
    for (k, e) in eigs.iter().take(mode.trusted()).enumerate() {
        let want = e0 + k as f64 * cfg.hbar * cfg.omega;
        if k < resolved {
            worst = worst.max((e - want).abs());
        }
        r.row(vec![k.into(), (*e).into(), want.into(), if k < resolved { "yes" } else { "no" }.into()]);
    }
    let drift = (report.energy - doubled.energy).abs().max((report.overlap_sq - doubled.overlap_sq).abs());
    r.put_num("ground_energy", report.energy);
    r.put_num("closed_form", e0);
    r.put_num("gap", report.gap);
    r.put_num("overlap_sq", report.overlap_sq);
    r.put_num("number", number);
    r.put("resolved_levels", resolved);
    r.check("ground_energy", (report.energy - e0).abs() <= 1e-8, format!("E0 {:.12} vs {e0:.12}", report.energy));
    r.check("coherent_ground_state", report.overlap_sq >= 1.0 - 1e-8, format!("overlap^2 {:.12}", report.overlap_sq));
    r.check("ladder_spectrum", worst <= 1e-8, format!("max level defect {worst:.3e} over {resolved} resolved levels"));
    r.check(
        "number_expectation",
        (number - mode.number_closed_form()).abs() <= 1e-8,
        format!("<hbar n> {number:.12} vs {:.12}", mode.number_closed_form()),
    );
    r.check("doubling_stable", drift < 1e-8, format!("doubling N moves ground data by {drift:.3e}"));
    Ok(r)
}

pub fn soft_photons(cfg: &RunConfig) -> Outcome {
    let rep = soft_photon_sweep(&cfg.source, &cfg.grid, cfg.hbar, &cfg.cutoffs)?;
    let mut r = Report::new(&["n", "number", "energy"]);
    for row in &rep.rows {
        r.row(vec![row.n.into(), row.number.into(), row.energy.into()]);
    }
    r.put("class", rep.class.as_str());
    r.put_num("number_slope", rep.number_slope);
    r.put_num("energy_slope", rep.energy_slope);
    r.put("number_diverges", rep.number_diverges());
    r.put("energy_diverges", rep.energy_diverges());
    let want = match rep.class {
        InfraredClass::Regular => (false, false),
        InfraredClass::TypeI => (true, false),
        _ => (true, true),
    };
    let got = (rep.number_diverges(), rep.energy_diverges());
    r.check(
        "soft_photons_match_class",
        got == want,
        format!("class {}: number diverges {}, energy diverges {}", rep.class, got.0, got.1),
    );
    Ok(r)
}

pub fn garding(cfg: &RunConfig) -> Outcome {
    let g = cfg.grid.build()?;
    let u = RadialFunction::gaussian(&g, 1.0);
    let u = u.scale(c(1.0 / u.norm_sq(WeightExponent::L2).sqrt(), 0.0));
    let one = c(1.0, 0.0);
    let p = TrigPolynomial::from_terms(
        g.clone(),
        0.0,
        [(one, RadialFunction::zeros(&g)), (one, u.clone()), (one, u.scale(Complex64::i()))],
    )?;
    let symbol = compose(&adjoint(&p), &p)?;
    let opts = GardingOptions { photon_radius: cfg.photon_radius, ..GardingOptions::default() };
    let rep = garding_probe(&symbol, &u, &cfg.garding_ladder, &opts)?;
    let mut r = Report::new(&["hbar", "cutoff", "weyl_min", "antiwick_min", "weyl_min_over_hbar"]);
    for row in &rep.rows {
        r.row(vec![
            row.hbar.into(),
            row.cutoff.into(),
            row.weyl_min.into(),
            row.antiwick_min.into(),
            (row.weyl_min / row.hbar).into(),
        ]);
    }
    r.put_num("symbol_min", rep.symbol_min);
    r.put_num("constant", rep.constant);
    r.put_num("fit_residual", rep.fit_residual);
    r.put_num("antiwick_min", rep.antiwick_min());
    r.check(
        "weyl_lower_bound",
        rep.bounded(),
        format!("lambda_min >= -C hbar with C = {:.4}, fit residual {:.3}", rep.constant, rep.fit_residual),
    );
    r.check("antiwick_positive", rep.antiwick_min() >= -1e-8, format!("anti-Wick min {:.3e}", rep.antiwick_min()));
    Ok(r)
}
