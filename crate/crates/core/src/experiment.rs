//! Experiment specifications, figure presets and bound-curve scenarios.
//!
//! An [`ExperimentSpec`] is a flat TOML document:
//!
//! ```toml
//! command = "reproduce"
//! output_path = "fig3.csv"
//! figure = 3
//! max_trials = 2000000
//! ```
//!
//! Every key other than `command` and `output_path` lands in `parameters` and
//! must be a scalar or an array of scalars.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analysis::{pep_average_mc, siso_sep_exact_ln, BoundCurve, Bounds, SisoBoundForm};
use crate::channel::{db_to_linear, ChannelParams};
use crate::constellation::{Normalization, SpaceCode};
use crate::optimizer::closed_form_fdsc;
use crate::simulator::{crossing_snr_db, run_ber, spatial_multiplexing_code, BerPoint, BitLabeling, SimConfig};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Farey,
    Design,
    Bounds,
    Simulate,
    Reproduce,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(flatten)]
    pub parameters: BTreeMap<String, toml::Value>,
}

fn is_scalar(v: &toml::Value) -> bool {
    !matches!(v, toml::Value::Table(_) | toml::Value::Array(_))
}

impl ExperimentSpec {
    pub fn new(command: Command) -> Self {
        ExperimentSpec {
            command,
            output_path: None,
            parameters: BTreeMap::new(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: ExperimentSpec = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        self.validate()?;
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Parameters must be flat: scalars or arrays of scalars.
    pub fn validate(&self) -> Result<()> {
        for (key, value) in &self.parameters {
            let flat = match value {
                toml::Value::Array(items) => items.iter().all(is_scalar),
                v => is_scalar(v),
            };
            if !flat {
                return Err(Error::Config(format!("parameter `{key}` must be a scalar or a list of scalars")));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&toml::Value> {
        self.parameters.get(key)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| value_f64(key, v)).transpose()
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(v) => Err(Error::Config(format!("`{key}` must be a nonnegative integer, got {v}"))),
        }
    }

    pub fn get_str(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s)),
            Some(v) => Err(Error::Config(format!("`{key}` must be a string, got {v}"))),
        }
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(toml::Value::Array(items)) => items.iter().map(|v| value_f64(key, v)).collect::<Result<_>>().map(Some),
            Some(v) => Ok(Some(vec![value_f64(key, v)?])),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<toml::Value>) {
        self.parameters.insert(key.to_string(), value.into());
    }
}

fn value_f64(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Config(format!("`{key}` must be a number, got {v}"))),
    }
}

/// How a figure's `sigma2` parameter maps to the spread of `ln h`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingConvention {
    /// `sigma2` is the variance of `ln h`.
    LogIntensity,
    /// `sigma2` is the variance of the log-amplitude `X`, `h = exp(2X)`, so
    /// `ln h` has standard deviation `2 sqrt(sigma2)`.
    #[default]
    LogAmplitude,
}

impl FadingConvention {
    /// Standard deviation of `ln h`.
    pub fn sigma_ln_h(&self, sigma2: f64) -> Result<f64> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::invalid(format!("sigma2 must be positive, got {sigma2}")));
        }
        Ok(match self {
            FadingConvention::LogIntensity => sigma2.sqrt(),
            FadingConvention::LogAmplitude => 2.0 * sigma2.sqrt(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Optimal full-diversity code for `2 x 2`.
    Fdsc,
    /// Uncoded per-aperture transmission.
    Sm,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Fdsc => "fdsc",
            Scheme::Sm => "sm",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fdsc" => Ok(Scheme::Fdsc),
            "sm" => Ok(Scheme::Sm),
            _ => Err(Error::Parse(format!("unknown scheme `{s}` (expected fdsc or sm)"))),
        }
    }
}

/// Unit-mean-power code of `scheme` for `n` apertures and `2^p`-PAM.
pub fn scheme_code(scheme: Scheme, n: usize, p: u32) -> Result<SpaceCode> {
    match scheme {
        Scheme::Sm => spatial_multiplexing_code(n, p),
        Scheme::Fdsc => {
            if n != 2 {
                return Err(Error::invalid(format!("the closed-form code is 2 x 2, got n = {n}")));
            }
            closed_form_fdsc(p)?.code.rescale(Normalization::MeanPowerOne, p)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub scheme: Scheme,
    pub sigma2: f64,
    pub snr_grid_db: Vec<f64>,
}

/// One BER scenario: a set of curves sharing shape, budget and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub rx: usize,
    pub tx: usize,
    pub bits: u32,
    pub convention: FadingConvention,
    pub labeling: BitLabeling,
    pub max_trials: u64,
    pub min_errors: u64,
    pub seed: u64,
    pub curves: Vec<CurveSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveResult {
    pub scheme: Scheme,
    pub sigma2: f64,
    pub points: Vec<BerPoint>,
}

/// Trial budget per SNR point of the presets.
pub const PRESET_MAX_TRIALS: u64 = 10_000_000;

/// Bit errors per SNR point of the presets.
pub const PRESET_MIN_ERRORS: u64 = 200;

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + step * k as f64).collect()
}

/// Scenario of figure 3 (FDSC against SM at `sigma2` 0.01 and 0.5) or
/// figure 4 (SM at `sigma2` 0.001, 0.01 and 0.1, with one FDSC curve for the
/// decay-rate comparison). Both are `2 x 2` OOK at 2 bits per channel use.
pub fn figure_preset(figure: u32) -> Result<Scenario> {
    let curve = |scheme, sigma2, lo, hi, step| CurveSpec {
        scheme,
        sigma2,
        snr_grid_db: grid(lo, hi, step),
    };
    let curves = match figure {
        3 => vec![
            curve(Scheme::Fdsc, 0.01, 0.0, 18.0, 2.0),
            curve(Scheme::Sm, 0.01, 0.0, 40.0, 2.0),
            curve(Scheme::Fdsc, 0.5, 0.0, 30.0, 2.0),
            curve(Scheme::Sm, 0.5, 0.0, 40.0, 2.0),
        ],
        4 => vec![
            curve(Scheme::Sm, 0.001, 10.0, 60.0, 2.5),
            curve(Scheme::Sm, 0.01, 10.0, 60.0, 2.5),
            curve(Scheme::Sm, 0.1, 10.0, 60.0, 2.5),
            curve(Scheme::Fdsc, 0.5, 0.0, 36.0, 2.0),
        ],
        _ => return Err(Error::invalid(format!("figure must be 3 or 4, got {figure}"))),
    };
    Ok(Scenario {
        rx: 2,
        tx: 2,
        bits: 1,
        convention: FadingConvention::LogAmplitude,
        labeling: BitLabeling::Natural,
        max_trials: PRESET_MAX_TRIALS,
        min_errors: PRESET_MIN_ERRORS,
        seed: 2015,
        curves,
    })
}

impl Scenario {
    pub fn sim_config(&self, curve: &CurveSpec) -> Result<SimConfig> {
        let sigma = self.convention.sigma_ln_h(curve.sigma2)?;
        Ok(SimConfig {
            params: ChannelParams::iid(self.rx, self.tx, 0.0, sigma)?,
            code: scheme_code(curve.scheme, self.tx, self.bits)?,
            bits: self.bits,
            symbols: self.tx,
            snr_grid_db: curve.snr_grid_db.clone(),
            max_trials: self.max_trials,
            min_errors: self.min_errors,
            seed: self.seed,
            labeling: self.labeling,
        })
    }

    pub fn run_curve(&self, curve: &CurveSpec) -> Result<CurveResult> {
        Ok(CurveResult {
            scheme: curve.scheme,
            sigma2: curve.sigma2,
            points: run_ber(&self.sim_config(curve)?)?,
        })
    }

    pub fn run(&self) -> Result<Vec<CurveResult>> {
        self.curves.iter().map(|c| self.run_curve(c)).collect()
    }
}

/// `crossing(reference) - crossing(improved)` at BER `target`, in dB.
pub fn snr_gap_db(reference: &[BerPoint], improved: &[BerPoint], target: f64) -> Option<f64> {
    Some(crossing_snr_db(reference, target)? - crossing_snr_db(improved, target)?)
}

/// Analytic or simulated reference for a bound curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundScenario {
    /// OOK over one log-normal link; reference is the quadrature SEP.
    Siso { sigma: f64, p_op: f64 },
    /// `2 x 2` iid link with the FDSC (`p = 1`) error vector; reference is a
    /// Monte Carlo PEP.
    Mimo {
        sigma: f64,
        p_op: f64,
        trials: u64,
        seed: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundRow {
    pub rho_db: f64,
    /// Exact SEP (SISO) or Monte Carlo PEP mean (MIMO).
    pub reference: f64,
    /// Monte Carlo standard error; zero for the exact reference.
    pub std_error: f64,
    pub bounds: Option<Bounds>,
}

/// Error vector `F(1,0)` of the `p = 1` FDSC under entry-sum normalization.
pub fn fdsc_error_vector() -> Result<Vec<f64>> {
    closed_form_fdsc(1)?.code.encode(&[1, 0])
}

/// Evaluates `scenario` at every `rho_db` point.
pub fn bound_rows(scenario: &BoundScenario, rho_db: &[f64]) -> Result<Vec<BoundRow>> {
    let rho: Vec<f64> = rho_db.iter().map(|&d| db_to_linear(d)).collect();
    match *scenario {
        BoundScenario::Siso { sigma, p_op } => {
            let curve = BoundCurve::siso(&rho, p_op, sigma, SisoBoundForm::default())?;
            rho.iter()
                .zip(rho_db)
                .zip(curve.bounds)
                .map(|((&r, &db), bounds)| {
                    Ok(BoundRow {
                        rho_db: db,
                        reference: siso_sep_exact_ln(r, p_op, sigma, 1)?.exp(),
                        std_error: 0.0,
                        bounds,
                    })
                })
                .collect()
        }
        BoundScenario::Mimo {
            sigma,
            p_op,
            trials,
            seed,
        } => {
            let params = ChannelParams::iid(2, 2, 0.0, sigma)?;
            let e = fdsc_error_vector()?;
            let curve = BoundCurve::mimo(&rho, &e, &params, p_op)?;
            rho.iter()
                .zip(rho_db)
                .zip(curve.bounds)
                .map(|((&r, &db), bounds)| {
                    let mc = pep_average_mc(&e, &params, r, p_op, trials, seed)?;
                    Ok(BoundRow {
                        rho_db: db,
                        reference: mc.mean,
                        std_error: mc.std_error,
                        bounds,
                    })
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::mean_optical_power;

    #[test]
    fn spec_round_trip() {
        let mut spec = ExperimentSpec::new(Command::Simulate);
        spec.output_path = Some("out.csv".into());
        spec.set("sigma2", 0.5);
        spec.set("seed", 7);
        spec.set("scheme", "fdsc");
        spec.set("snr_db", vec![0.0, 2.5, 5.0]);
        let text = spec.to_toml_string().unwrap();
        assert_eq!(ExperimentSpec::from_toml_str(&text).unwrap(), spec);
        assert_eq!(spec.get_f64_list("snr_db").unwrap().unwrap(), vec![0.0, 2.5, 5.0]);
        assert_eq!(spec.get_u64("seed").unwrap(), Some(7));
        assert_eq!(spec.get_f64("seed").unwrap(), Some(7.0));
        assert!(spec.get_str("sigma2").is_err());
    }

    #[test]
    fn nested_tables_are_rejected() {
        let err = ExperimentSpec::from_toml_str("command = \"farey\"\n[inner]\nk = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(ExperimentSpec::from_toml_str("command = \"nope\"").is_err());
        assert!(ExperimentSpec::from_toml_str("k = 3").is_err());
    }

    #[test]
    fn conventions() {
        assert!((FadingConvention::LogIntensity.sigma_ln_h(0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!((FadingConvention::LogAmplitude.sigma_ln_h(0.25).unwrap() - 1.0).abs() < 1e-15);
        assert!(FadingConvention::LogAmplitude.sigma_ln_h(0.0).is_err());
    }

    #[test]
    fn preset_codes_have_unit_power() {
        for fig in [3, 4] {
            let s = figure_preset(fig).unwrap();
            for c in &s.curves {
                let cfg = s.sim_config(c).unwrap();
                cfg.validate().unwrap();
                assert!((mean_optical_power(&cfg.code, 1).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        assert!(figure_preset(5).is_err());
        let f = scheme_code(Scheme::Fdsc, 2, 1).unwrap();
        let third = 1.0 / 3.0;
        for (a, b) in f.entries().iter().zip([third, 2.0 * third, third, 2.0 * third]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn siso_rows_are_sandwiched() {
        let rows = bound_rows(&BoundScenario::Siso { sigma: 0.5, p_op: 1.0 }, &[0.0, 40.0, 60.0]).unwrap();
        assert!(rows[0].bounds.is_none());
        for r in &rows[1..] {
            let b = r.bounds.unwrap();
            assert!(b.contains_ln(r.reference.ln()), "{r:?}");
        }
    }
}
