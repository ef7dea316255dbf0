//! Monte Carlo BER estimation with exhaustive ML detection.
//!
//! Each trial draws `H`, a uniform symbol vector `s` and receiver noise,
//! forms `y = H F s / P_op + n` with `sigma_n^2 = 1/(N rho)` and detects
//! `s_hat = argmin ||y - H F c / P_op||^2` over every candidate `c`.
//!
//! Trials run in batches of [`BATCH_TRIALS`]; batch `b` of SNR point `k` uses
//! stream `(seed, stream_id(k, b))`. Batches are accumulated in index order and
//! a point stops after the first batch that brings the bit-error count to
//! `min_errors` (or exhausts `max_trials`). The outcome therefore depends only
//! on the configuration, never on the number of worker threads.

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{db_to_linear, snr_to_noise_sigma, ChannelParams, ChannelRealization};
use crate::constellation::{mean_optical_power, symbol_vectors, Normalization, SpaceCode};
use crate::rng::{stream_id, stream_rng};
use crate::{Error, Result};

/// Trials per deterministic batch.
pub const BATCH_TRIALS: u64 = 10_000;

/// Smallest admissible `min_errors`.
pub const MIN_ERRORS_FLOOR: u64 = 50;

/// Default stopping target in bit errors per SNR point.
pub const DEFAULT_MIN_ERRORS: u64 = 100;

/// Tolerance of the equal-power check.
pub const POWER_TOL: f64 = 1e-12;

/// Largest candidate set searched by the detector.
pub const MAX_CANDIDATES: usize = 1 << 12;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Most batches evaluated speculatively per round.
const MAX_ROUND: u64 = 64;

/// Bit labels of PAM levels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitLabeling {
    /// Level `v` carries the binary digits of `v`.
    #[default]
    Natural,
    /// Level `v` carries `v ^ (v >> 1)`; adjacent levels differ in one bit.
    Gray,
}

impl BitLabeling {
    pub fn label(&self, level: u32) -> u32 {
        match self {
            BitLabeling::Natural => level,
            BitLabeling::Gray => level ^ (level >> 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub params: ChannelParams,
    /// `N x L` code; must have unit mean optical power for `bits`.
    pub code: SpaceCode,
    /// Bits per PAM symbol `p`.
    pub bits: u32,
    /// Symbols per channel use `L`.
    pub symbols: usize,
    /// SNR points, `10 log10(rho)`.
    pub snr_grid_db: Vec<f64>,
    pub max_trials: u64,
    pub min_errors: u64,
    pub seed: u64,
    pub labeling: BitLabeling,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_errors < MIN_ERRORS_FLOOR {
            return Err(Error::invalid(format!(
                "min_errors must be >= {MIN_ERRORS_FLOOR}, got {}",
                self.min_errors
            )));
        }
        if self.max_trials < self.min_errors {
            return Err(Error::invalid("max_trials must be >= min_errors"));
        }
        if self.code.cols() != self.symbols {
            return Err(Error::DimensionMismatch {
                expected: self.code.cols(),
                found: self.symbols,
            });
        }
        if self.code.rows() != self.params.tx() {
            return Err(Error::DimensionMismatch {
                expected: self.params.tx(),
                found: self.code.rows(),
            });
        }
        if let Some(x) = self.snr_grid_db.iter().find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("SNR grid value {x} is not finite")));
        }
        let power = mean_optical_power(&self.code, self.bits)?;
        if (power - 1.0).abs() > POWER_TOL {
            return Err(Error::PowerFairness { found: power });
        }
        Ok(())
    }
}

/// One simulated SNR point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub bit_errors: u64,
    pub symbol_errors: u64,
    pub trials: u64,
    pub ber: f64,
    /// 95% Wilson interval on the bit error rate.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `bit_errors >= min_errors`; unresolved points hit `max_trials` first.
    pub resolved: bool,
}

/// Wilson score interval for `k` successes out of `n` at 95%.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let phat = k / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0).min(phat), (center + half).min(1.0).max(phat))
}

/// Exhaustive ML detector over a precomputed candidate list.
#[derive(Clone, Debug)]
pub struct MlDetector {
    candidates: Vec<Vec<u32>>,
    /// Row-major `|S| x N` codewords, already divided by `P_op`.
    codewords: Vec<f64>,
    tx: usize,
}

impl MlDetector {
    pub fn new(code: &SpaceCode, p: u32, l: usize, p_op: f64) -> Result<Self> {
        if l != code.cols() {
            return Err(Error::DimensionMismatch {
                expected: code.cols(),
                found: l,
            });
        }
        if !(p_op > 0.0) {
            return Err(Error::invalid(format!("P_op must be positive, got {p_op}")));
        }
        if p as usize * l > MAX_CANDIDATES.trailing_zeros() as usize {
            return Err(Error::CapExceeded {
                requested: 1u128 << (p as usize * l).min(127),
                cap: MAX_CANDIDATES as u128,
            });
        }
        let candidates = symbol_vectors(p, l)?;
        let mut codewords = Vec::with_capacity(candidates.len() * code.rows());
        for s in &candidates {
            codewords.extend(code.encode(s)?.into_iter().map(|x| x / p_op));
        }
        Ok(MlDetector {
            candidates,
            codewords,
            tx: code.rows(),
        })
    }

    pub fn candidates(&self) -> &[Vec<u32>] {
        &self.candidates
    }

    /// Scaled codeword of candidate `idx`.
    pub fn codeword(&self, idx: usize) -> &[f64] {
        &self.codewords[idx * self.tx..(idx + 1) * self.tx]
    }

    /// Index of the candidate closest to `y` through row-major `gains`
    /// (`y.len()` rows). Ties keep the lowest index, which is the
    /// lexicographically smallest symbol vector.
    pub fn detect_index(&self, y: &[f64], gains: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (idx, x) in self.codewords.chunks_exact(self.tx).enumerate() {
            let mut d = 0.0;
            for (yi, row) in y.iter().zip(gains.chunks_exact(self.tx)) {
                let r: f64 = row.iter().zip(x).map(|(h, v)| h * v).sum();
                let diff = yi - r;
                d += diff * diff;
            }
            if d < best_d {
                best_d = d;
                best = idx;
            }
        }
        best
    }

    pub fn detect(&self, y: &[f64], h: &ChannelRealization) -> Result<Vec<u32>> {
        if h.tx() != self.tx || y.len() != h.rx() {
            return Err(Error::DimensionMismatch {
                expected: h.rx() * self.tx,
                found: y.len() * h.tx(),
            });
        }
        Ok(self.candidates[self.detect_index(y, h.gains())].clone())
    }
}

/// `argmin_s ||y - H F s / P_op||^2` over all `2^(pL)` symbol vectors.
pub fn ml_detect(
    y: &[f64],
    h: &ChannelRealization,
    code: &SpaceCode,
    p: u32,
    l: usize,
    p_op: f64,
) -> Result<Vec<u32>> {
    MlDetector::new(code, p, l, p_op)?.detect(y, h)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    bit_errors: u64,
    symbol_errors: u64,
}

struct PointSim<'a> {
    config: &'a SimConfig,
    detector: &'a MlDetector,
    bit_diff: &'a [u32],
    sigma_n: f64,
    point: usize,
}

impl PointSim<'_> {
    fn batch(&self, b: u64) -> Tally {
        let cfg = self.config;
        let count = BATCH_TRIALS.min(cfg.max_trials - b * BATCH_TRIALS);
        let (rx, tx) = (cfg.params.rx(), cfg.params.tx());
        let n_cand = self.detector.candidates.len();
        let q = 1usize << cfg.bits;
        let mut rng = stream_rng(cfg.seed, stream_id(self.point, b));
        let mut gains = vec![0.0; rx * tx];
        let mut y = vec![0.0; rx];
        let mut t = Tally {
            trials: count,
            ..Tally::default()
        };
        for _ in 0..count {
            cfg.params.sample_into(&mut rng, &mut gains);
            let s = rng.random_range(0..n_cand);
            let x = self.detector.codeword(s);
            for (yi, row) in y.iter_mut().zip(gains.chunks_exact(tx)) {
                let noise: f64 = rng.sample(StandardNormal);
                *yi = row.iter().zip(x).map(|(h, v)| h * v).sum::<f64>() + self.sigma_n * noise;
            }
            let s_hat = self.detector.detect_index(&y, &gains);
            if s_hat != s {
                let (a, b) = (&self.detector.candidates[s], &self.detector.candidates[s_hat]);
                for (u, v) in a.iter().zip(b) {
                    if u != v {
                        t.symbol_errors += 1;
                        t.bit_errors += u64::from(self.bit_diff[*u as usize * q + *v as usize]);
                    }
                }
            }
        }
        t
    }

    fn run(&self) -> BerPoint {
        let cfg = self.config;
        let batches = cfg.max_trials.div_ceil(BATCH_TRIALS);
        let mut total = Tally::default();
        let mut next = 0u64;
        let mut round = 1u64;
        'outer: while next < batches {
            let end = (next + round).min(batches);
            let tallies: Vec<Tally> = (next..end).into_par_iter().map(|b| self.batch(b)).collect();
            for t in tallies {
                total.trials += t.trials;
                total.bit_errors += t.bit_errors;
                total.symbol_errors += t.symbol_errors;
                if total.bit_errors >= cfg.min_errors {
                    break 'outer;
                }
            }
            next = end;
            round = (round * 2).min(MAX_ROUND);
        }
        let bits = total.trials * cfg.symbols as u64 * cfg.bits as u64;
        let ber = total.bit_errors as f64 / bits as f64;
        let (ci_low, ci_high) = wilson_interval(total.bit_errors, bits);
        BerPoint {
            snr_db: cfg.snr_grid_db[self.point],
            bit_errors: total.bit_errors,
            symbol_errors: total.symbol_errors,
            trials: total.trials,
            ber,
            ci_low,
            ci_high,
            resolved: total.bit_errors >= cfg.min_errors,
        }
    }
}

/// Simulates every SNR point of `config`.
pub fn run_ber(config: &SimConfig) -> Result<Vec<BerPoint>> {
    config.validate()?;
    let p_op = mean_optical_power(&config.code, config.bits)?;
    let detector = MlDetector::new(&config.code, config.bits, config.symbols, p_op)?;
    let q = 1usize << config.bits;
    let bit_diff: Vec<u32> = (0..q * q)
        .map(|k| {
            let (u, v) = ((k / q) as u32, (k % q) as u32);
            (config.labeling.label(u) ^ config.labeling.label(v)).count_ones()
        })
        .collect();
    config
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(point, &db)| {
            let sigma_n = snr_to_noise_sigma(db_to_linear(db), config.params.tx())?;
            Ok(PointSim {
                config,
                detector: &detector,
                bit_diff: &bit_diff,
                sigma_n,
                point,
            }
            .run())
        })
        .collect()
}

/// Uncoded transmission: the `n x n` identity scaled to unit mean optical
/// power for `2^p`-PAM (no scaling for OOK with `n = 2`).
pub fn spatial_multiplexing_code(n: usize, p: u32) -> Result<SpaceCode> {
    SpaceCode::identity(n, Normalization::MeanPowerOne)?.rescale(Normalization::MeanPowerOne, p)
}

/// Least-squares slope of `log10(BER)` against `log10(rho)` over resolved,
/// nonzero points with `lo_db <= snr_db <= hi_db`.
pub fn slope_fit(points: &[BerPoint], window: (f64, f64)) -> Result<f64> {
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.resolved && p.ber > 0.0 && p.snr_db >= window.0 && p.snr_db <= window.1)
        .map(|p| (p.snr_db / 10.0, p.ber.log10()))
        .collect();
    fit_line(&xy)
}

/// Least-squares slope through `(x, y)` pairs; at least 4 are required.
pub fn fit_line(xy: &[(f64, f64)]) -> Result<f64> {
    if xy.len() < 4 {
        return Err(Error::InsufficientPoints {
            needed: 4,
            found: xy.len(),
        });
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("window has no SNR spread"));
    }
    Ok(sxy / sxx)
}

/// SNR (dB) where the BER curve first falls through `target`, by linear
/// interpolation of `log10(BER)` between adjacent nonzero points.
pub fn crossing_snr_db(points: &[BerPoint], target: f64) -> Option<f64> {
    let usable: Vec<&BerPoint> = points.iter().filter(|p| p.ber > 0.0).collect();
    let lt = target.log10();
    usable.windows(2).find_map(|w| {
        let (a, b) = (w[0], w[1]);
        let (la, lb) = (a.ber.log10(), b.ber.log10());
        if la >= lt && lb < lt {
            Some(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db))
        } else {
            None
        }
    })
}
