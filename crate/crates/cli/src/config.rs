//! Flat `key=value` run configuration.
//!
//! Values come from built-in defaults, then an optional file, then
//! command-line overrides. Every key is known up front; anything else is an
//! error.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};
use vanhove_core::{GridConfig, Regime, SourceSpec};

use crate::CliError;

/// Every recognised key with its default value and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("d", "3", "spatial dimension"),
    ("mu", "0", "mass in the dispersion relation"),
    ("r_min", "1e-6", "inner edge of the geometric panels"),
    ("r_max", "12", "outer radius of the momentum grid"),
    ("panels", "16", "number of geometric panels"),
    ("points", "32", "Gauss-Legendre points per panel"),
    ("source", "gaussian", "source family: gaussian | powerlaw"),
    ("gamma", "0.3", "power-law exponent of the source"),
    ("ir_cutoff", "0", "infrared cutoff n (0 = none)"),
    ("hbar", "0.1", "semiclassical parameter for single-hbar commands"),
    ("hbar_exponents", "3:14", "hbar ladder 2^-k for k in lo:hi"),
    ("beta", "2", "inverse temperature"),
    ("betas", "0.5,1,4", "beta_hbar values for the KMS check"),
    ("regime", "linear", "equilibrium regime: linear | sublinear | superlinear | ground"),
    ("c", "1", "prefactor of the sub/superlinear regimes"),
    ("eps", "0.5", "exponent offset of the sub/superlinear regimes"),
    ("times", "0,1,10,100", "sample times"),
    ("sigmas", "0.5,1,2,4", "Gaussian widths of the test-function panel"),
    ("cutoff_exponents", "4:16", "infrared cutoffs 2^k for k in lo:hi"),
    ("pairs", "20", "random test-function pairs"),
    ("window_pairs", "4", "random pairs for the ground-state window test"),
    ("window", "-3,-1", "spectral window for the ground-state test"),
    ("control_window", "1,3", "positive-support control window"),
    ("omega", "1", "single-mode frequency"),
    ("coupling", "0.5", "single-mode coupling j (real)"),
    ("fock_n", "60", "Fock-space occupation cutoff"),
    ("garding_exponents", "3:10", "hbar ladder 2^-k of the Garding probe"),
    ("photon_radius", "0.5", "phase-space radius resolved by the Garding probe"),
    ("seed", "1", "64-bit seed for random samples"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    raw: BTreeMap<&'static str, String>,
    pub grid: GridConfig,
    pub source: SourceSpec,
    pub hbar: f64,
    pub hbar_ladder: Vec<f64>,
    pub beta: f64,
    pub betas: Vec<f64>,
    pub regime: Regime,
    pub times: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub cutoffs: Vec<u32>,
    pub pairs: usize,
    pub window_pairs: usize,
    pub window: (f64, f64),
    pub control_window: (f64, f64),
    pub omega: f64,
    pub coupling: f64,
    pub fock_n: usize,
    pub garding_ladder: Vec<f64>,
    pub photon_radius: f64,
    pub seed: u64,
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}={value}: {why}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse().map_err(|e| bad(key, value, e))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    let out = value.split(',').map(|x| num(key, x)).collect::<Result<Vec<f64>, _>>()?;
    if out.iter().any(|x| !x.is_finite()) {
        return Err(bad(key, value, "entries must be finite"));
    }
    Ok(out)
}

fn range(key: &str, value: &str) -> Result<(i32, i32), CliError> {
    let (lo, hi) = value.split_once(':').ok_or_else(|| bad(key, value, "expected lo:hi"))?;
    let (lo, hi) = (num(key, lo)?, num(key, hi)?);
    if lo > hi {
        return Err(bad(key, value, "lo must not exceed hi"));
    }
    Ok((lo, hi))
}

fn pair(key: &str, value: &str) -> Result<(f64, f64), CliError> {
    match list(key, value)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(bad(key, value, "expected two numbers")),
    }
}

/// Splits `key=value`, trimming both sides.
pub fn split_assignment(s: &str) -> Result<(String, String), CliError> {
    let (k, v) = s.split_once('=').ok_or_else(|| CliError::Config(format!("expected key=value, got {s:?}")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl RunConfig {
    #[cfg(test)]
    pub fn defaults() -> Self {
        Self::from_assignments(Vec::new()).expect("built-in defaults parse")
    }

    /// Reads the optional file, then applies overrides in order.
    pub fn load(file: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut assignments = Vec::new();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let kv = split_assignment(line)
                    .map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
                assignments.push(kv);
            }
        }
        for o in overrides {
            assignments.push(split_assignment(o)?);
        }
        Self::from_assignments(assignments)
    }

    pub fn from_assignments(assignments: Vec<(String, String)>) -> Result<Self, CliError> {
        let mut raw: BTreeMap<&'static str, String> = KEYS.iter().map(|(k, v, _)| (*k, v.to_string())).collect();
        for (k, v) in assignments {
            let key = KEYS
                .iter()
                .map(|e| e.0)
                .find(|name| *name == k)
                .ok_or_else(|| CliError::Config(format!("unknown key {k:?}")))?;
            raw.insert(key, v);
        }
        let get = |k: &str| raw[k].as_str();

        let mut grid = GridConfig::default()
            .with_dim(num("d", get("d"))?)
            .with_mass(num("mu", get("mu"))?)
            .with_resolution(num("panels", get("panels"))?, num("points", get("points"))?);
        grid.r_min = num("r_min", get("r_min"))?;
        grid.r_max = num("r_max", get("r_max"))?;

        let mut source = match get("source") {
            "gaussian" => SourceSpec::gaussian(),
            "powerlaw" => SourceSpec::power_law(num("gamma", get("gamma"))?),
            other => return Err(bad("source", other, "expected gaussian or powerlaw")),
        };
        let cutoff: u32 = num("ir_cutoff", get("ir_cutoff"))?;
        if cutoff > 0 {
            source = source.with_cutoff(cutoff);
        }

        let (lo, hi) = range("hbar_exponents", get("hbar_exponents"))?;
        let hbar_ladder = (lo..=hi).map(|k| 2f64.powi(-k)).collect();
        let (glo, ghi) = range("garding_exponents", get("garding_exponents"))?;
        let garding_ladder = (glo..=ghi).map(|k| 2f64.powi(-k)).collect();
        let (clo, chi) = range("cutoff_exponents", get("cutoff_exponents"))?;
        if clo < 0 || chi > 31 {
            return Err(bad("cutoff_exponents", get("cutoff_exponents"), "exponents must lie in 0:31"));
        }
        let cutoffs = (clo..=chi).map(|k| 1u32 << k).collect();

        let beta: f64 = num("beta", get("beta"))?;
        let (c, eps): (f64, f64) = (num("c", get("c"))?, num("eps", get("eps"))?);
        let regime = match get("regime") {
            "linear" => Regime::Linear { beta },
            "sublinear" => Regime::SubLinear { c, eps },
            "superlinear" => Regime::SuperLinear { c, eps },
            "ground" => Regime::GroundState,
            other => return Err(bad("regime", other, "expected linear, sublinear, superlinear or ground")),
        };

        let seed_text = get("seed");
        let seed = match seed_text.strip_prefix("0x") {
            Some(hex) => u64::from_str_radix(hex, 16).map_err(|e| bad("seed", seed_text, e))?,
            None => num("seed", seed_text)?,
        };

        Ok(Self {
            grid,
            source,
            hbar: num("hbar", get("hbar"))?,
            hbar_ladder,
            beta,
            betas: list("betas", get("betas"))?,
            regime,
            times: list("times", get("times"))?,
            sigmas: list("sigmas", get("sigmas"))?,
            cutoffs,
            pairs: num("pairs", get("pairs"))?,
            window_pairs: num("window_pairs", get("window_pairs"))?,
            window: pair("window", get("window"))?,
            control_window: pair("control_window", get("control_window"))?,
            omega: num("omega", get("omega"))?,
            coupling: num("coupling", get("coupling"))?,
            fock_n: num("fock_n", get("fock_n"))?,
            garding_ladder,
            photon_radius: num("photon_radius", get("photon_radius"))?,
            seed,
            raw,
        })
    }

    /// Effective settings in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.raw.iter().map(|(k, v)| (*k, v.as_str()))
    }

    /// SHA-256 over the canonical `key=value\n` listing.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.entries() {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(k: &str, v: &str) -> (String, String) {
        (k.into(), v.into())
    }

    #[test]
    fn defaults_cover_every_key() {
        let cfg = RunConfig::defaults();
        assert_eq!(cfg.entries().count(), KEYS.len());
        assert_eq!(cfg.hbar_ladder.len(), 12);
        assert_eq!(cfg.cutoffs.first(), Some(&16));
        assert_eq!(cfg.cutoffs.last(), Some(&65536));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_assignments(vec![kv("temperature", "3")]), Err(CliError::Config(_))));
        assert!(RunConfig::from_assignments(vec![kv("regime", "cubic")]).is_err());
        assert!(RunConfig::from_assignments(vec![kv("hbar_exponents", "5:3")]).is_err());
        assert!(RunConfig::from_assignments(vec![kv("window", "1")]).is_err());
    }

    #[test]
    fn hash_tracks_values_not_order() {
        let a = RunConfig::from_assignments(vec![kv("gamma", "0.8"), kv("source", "powerlaw")]).unwrap();
        let b = RunConfig::from_assignments(vec![kv("source", "powerlaw"), kv("gamma", "0.8")]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), RunConfig::defaults().hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn later_assignments_win() {
        let cfg = RunConfig::from_assignments(vec![kv("hbar", "0.5"), kv("hbar", "0.25")]).unwrap();
        assert_eq!(cfg.hbar, 0.25);
        let hex = RunConfig::from_assignments(vec![kv("seed", "0xff")]).unwrap();
        assert_eq!(hex.seed, 255);
    }
}
