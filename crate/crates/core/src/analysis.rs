//! Error-probability analysis under log-normal fading.
//!
//! - SISO OOK/PAM: an exact symbol-error oracle by quadrature and the
//!   asymptotic sandwich bounds obtained by splitting the fading integral at
//!   an SNR-dependent threshold `tau(rho)`.
//! - MIMO: conditional and averaged pairwise error probabilities (PEP), the
//!   asymptotic PEP bounds, the diversity decomposition of the dominant term
//!   and the full-diversity predicate on error sets.
//!
//! Bounds decay like `exp(-c ln^2 rho)` and leave `f64` range at moderate
//! SNR, so they are carried as natural logarithms ([`Bounds`]).

use rayon::prelude::*;

use crate::channel::{log_q_function, normal_hazard, q_function, ChannelParams, ChannelRealization};
use crate::constellation::{ErrorVector, PamConstellation};
use crate::quadrature::{log_integrate, log_sum_exp};
use crate::rng::{stream_id, stream_rng};
use crate::channel::LN_SQRT_2PI;
use crate::{Error, Result};

/// Minimum Monte Carlo sample size for [`pep_average_mc`].
pub const MIN_MC_TRIALS: u64 = 10_000;

/// Trials per deterministic Monte Carlo shard.
pub const MC_BATCH: u64 = 10_000;

/// Lower bound, dominant upper term and remainder upper term, as logarithms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub ln_lower: f64,
    pub ln_upper_dominant: f64,
    pub ln_upper_remainder: f64,
}

impl Bounds {
    pub fn lower(&self) -> f64 {
        self.ln_lower.exp()
    }

    pub fn upper_dominant(&self) -> f64 {
        self.ln_upper_dominant.exp()
    }

    pub fn upper_remainder(&self) -> f64 {
        self.ln_upper_remainder.exp()
    }

    /// `ln(upper_dominant + upper_remainder)`.
    pub fn ln_upper(&self) -> f64 {
        log_sum_exp([self.ln_upper_dominant, self.ln_upper_remainder])
    }

    /// `lower <= x <= upper` for `x = exp(ln_x)`.
    pub fn contains_ln(&self, ln_x: f64) -> bool {
        self.ln_lower <= ln_x && ln_x <= self.ln_upper()
    }
}

/// Which form of the SISO upper bound to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SisoBoundForm {
    /// Factor `1/4` and offset `ln(P^2/(4 sigma^2))`.
    #[default]
    Refined,
    /// Factor `1/2` and offset `ln(P^2/sigma^2)`.
    Condensed,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// Exact average SEP of unipolar `2^p`-PAM over a SISO log-normal link with
/// `mu = 0`: `c1 E[Q(sqrt(c2 rho) h / P_op)]`.
pub fn siso_sep_exact(rho: f64, p_op: f64, sigma: f64, p: u32) -> Result<f64> {
    Ok(siso_sep_exact_ln(rho, p_op, sigma, p)?.exp())
}

/// Natural log of [`siso_sep_exact`], usable where the SEP underflows.
///
/// With `h = e^z` the integrand is `exp(g(z))`,
/// `g(z) = ln Q(a e^z) - z^2/(2 sigma^2)`, `a = sqrt(c2 rho)/P_op`, which is
/// concave; the quadrature is centred on its mode.
pub fn siso_sep_exact_ln(rho: f64, p_op: f64, sigma: f64, p: u32) -> Result<f64> {
    check_positive("rho", rho)?;
    check_positive("P_op", p_op)?;
    check_positive("sigma", sigma)?;
    let (c1, c2) = PamConstellation::new(p)?.sep_coefficients();
    let a = (c2 * rho).sqrt() / p_op;
    let inv_var = 1.0 / (sigma * sigma);

    let g = |z: f64| log_q_function(a * z.exp()) - 0.5 * z * z * inv_var;
    let dg = |z: f64| {
        let x = a * z.exp();
        -x * normal_hazard(x) - z * inv_var
    };

    // dg(0) < 0 and dg -> +inf as z -> -inf.
    let mut hi = 0.0;
    let mut lo = -1.0;
    while dg(lo) <= 0.0 {
        hi = lo;
        lo *= 2.0;
        if lo < -1e6 {
            return Err(Error::Quadrature {
                achieved: f64::INFINITY,
                requested: crate::quadrature::DEFAULT_TOLERANCE,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if dg(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * lo.abs().max(1.0) {
            break;
        }
    }
    let mode = 0.5 * (lo + hi);

    // g'' = -x H (1 + x (H - x)) - 1/sigma^2 with H the normal hazard.
    let x = a * mode.exp();
    let hz = normal_hazard(x);
    let curvature = -x * hz * (1.0 + x * (hz - x)) - inv_var;
    let scale = 1.0 / (-curvature).sqrt();

    let ln_integral = log_integrate(g, mode, scale)?;
    Ok(c1.ln() + ln_integral - LN_SQRT_2PI - sigma.ln())
}

/// Splitting threshold `P_op ln(rho) / (2 sqrt(rho sigma^2))`.
pub fn tau_siso(rho: f64, p_op: f64, sigma: f64) -> Result<f64> {
    if !(rho > 1.0) {
        return Err(Error::invalid(format!("tau needs rho > 1, got {rho}")));
    }
    check_positive("P_op", p_op)?;
    check_positive("sigma", sigma)?;
    Ok(p_op * rho.ln() / (2.0 * (rho * sigma * sigma).sqrt()))
}

/// Smallest `rho` beyond which `tau` stays below 1. Both thresholds have the
/// form `k ln(rho) / sqrt(rho)`, maximal at `rho = e^2` and decreasing after.
fn tau_threshold<F: Fn(f64) -> f64>(tau_of_ln_rho: F) -> f64 {
    let mut lo = 2.0f64;
    if tau_of_ln_rho(lo) < 1.0 {
        return 1.0;
    }
    let mut hi = 4.0f64;
    while tau_of_ln_rho(hi) >= 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if tau_of_ln_rho(mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.exp()
}

/// `ln tau_siso` as a function of `ln rho`, for SNRs beyond `f64` range.
pub fn ln_tau_siso(ln_rho: f64, p_op: f64, sigma: f64) -> f64 {
    p_op.ln() + ln_rho.ln() - (2.0 * sigma).ln() - 0.5 * ln_rho
}

/// Smallest SNR of the SISO asymptotic regime: `ln rho > 1`,
/// `ln rho > ln(4 sigma^2 / P_op^2)` and `tau_siso(rho) < 1`.
pub fn siso_regime_threshold(p_op: f64, sigma: f64) -> f64 {
    let tau = |l: f64| p_op * l / (2.0 * sigma * (0.5 * l).exp());
    let t = tau_threshold(tau);
    t.max(std::f64::consts::E).max(4.0 * sigma * sigma / (p_op * p_op))
}

fn siso_in_regime(rho: f64, p_op: f64, sigma: f64) -> bool {
    let l = rho.ln();
    l > 1.0 && l > (4.0 * sigma * sigma / (p_op * p_op)).ln() && tau_siso(rho, p_op, sigma).is_ok_and(|t| t < 1.0)
}

/// SISO OOK bounds in the asymptotic regime ([`SisoBoundForm::Refined`]).
pub fn siso_sep_bounds(rho: f64, p_op: f64, sigma: f64) -> Result<Bounds> {
    siso_sep_bounds_variant(rho, p_op, sigma, SisoBoundForm::Refined)
}

/// SISO OOK bounds with an explicit choice of printed upper bound.
///
/// - lower: `C_1L / (ln rho - ln(4 s^2/P^2)) exp(-(ln rho - ln(P^2/(4 s^2)))^2 / (8 s^2))`,
///   `C_1L = Q(1/(2 s)) / sqrt(2 pi)`;
/// - dominant: `k (ln rho)^-1 exp(-(ln(rho/ln^2 rho) - c)^2 / (8 s^2))`;
/// - remainder: `C_12U rho^-1/2 exp(-ln^2 rho / (8 s^2))`, `C_12U = e^(s^2/2)/(4 s)`.
pub fn siso_sep_bounds_variant(
    rho: f64,
    p_op: f64,
    sigma: f64,
    variant: SisoBoundForm,
) -> Result<Bounds> {
    check_positive("rho", rho)?;
    check_positive("P_op", p_op)?;
    check_positive("sigma", sigma)?;
    if !siso_in_regime(rho, p_op, sigma) {
        return Err(Error::OutOfRegime {
            rho,
            threshold: siso_regime_threshold(p_op, sigma),
        });
    }
    let l = rho.ln();
    let var8 = 8.0 * sigma * sigma;
    let p2 = p_op * p_op;
    let ln_c1l = q_function(1.0 / (2.0 * sigma)).ln() - LN_SQRT_2PI;
    let ln_lower = ln_c1l
        - (l - (4.0 * sigma * sigma / p2).ln()).ln()
        - (l - (p2 / (4.0 * sigma * sigma)).ln()).powi(2) / var8;

    let (factor, offset) = match variant {
        SisoBoundForm::Refined => (0.25f64, (p2 / (4.0 * sigma * sigma)).ln()),
        SisoBoundForm::Condensed => (0.5f64, (p2 / (sigma * sigma)).ln()),
    };
    let ln_upper_dominant = factor.ln() - l.ln() - (l - 2.0 * l.ln() - offset).powi(2) / var8;

    let ln_c12u = 0.5 * sigma * sigma - (4.0 * sigma).ln();
    let ln_upper_remainder = ln_c12u - 0.5 * l - l * l / var8;

    Ok(Bounds {
        ln_lower,
        ln_upper_dominant,
        ln_upper_remainder,
    })
}

fn check_error_dims(e: &[f64], tx: usize) -> Result<()> {
    if e.len() != tx {
        return Err(Error::DimensionMismatch {
            expected: tx,
            found: e.len(),
        });
    }
    Ok(())
}

/// `d^2(e) = rho/(N P_op^2) sum_i (h_i . e)^2` for row-major gains.
fn distance_sq(e: &[f64], gains: &[f64], rho: f64, p_op: f64) -> f64 {
    let n = e.len();
    let s: f64 = gains
        .chunks(n)
        .map(|row| {
            let dot: f64 = row.iter().zip(e).map(|(h, v)| h * v).sum();
            dot * dot
        })
        .sum();
    rho / (n as f64 * p_op * p_op) * s
}

/// PEP given the channel: `Q(d(e)/2)`.
pub fn pep_conditional(e: &[f64], h: &ChannelRealization, rho: f64, p_op: f64) -> Result<f64> {
    check_error_dims(e, h.tx())?;
    check_positive("P_op", p_op)?;
    if !(rho >= 0.0) {
        return Err(Error::invalid(format!("rho must be nonnegative, got {rho}")));
    }
    Ok(q_function(0.5 * distance_sq(e, h.gains(), rho, p_op).sqrt()))
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// PEP averaged over the fading by Monte Carlo. Trials are split into
/// fixed-size shards with independent streams, so the estimate depends only
/// on `seed` and `trials`.
pub fn pep_average_mc(
    e: &[f64],
    params: &ChannelParams,
    rho: f64,
    p_op: f64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    check_error_dims(e, params.tx())?;
    check_positive("P_op", p_op)?;
    check_positive("rho", rho)?;
    if trials < MIN_MC_TRIALS {
        return Err(Error::invalid(format!("need at least {MIN_MC_TRIALS} trials, got {trials}")));
    }
    let shards = trials.div_ceil(MC_BATCH);
    let partial: Vec<(f64, f64)> = (0..shards)
        .into_par_iter()
        .map(|b| {
            let count = MC_BATCH.min(trials - b * MC_BATCH);
            let mut rng = stream_rng(seed, stream_id(0, b));
            let mut gains = vec![0.0; params.rx() * params.tx()];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                params.sample_into(&mut rng, &mut gains);
                let v = q_function(0.5 * distance_sq(e, &gains, rho, p_op).sqrt());
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = trials as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        trials,
    })
}

/// Splitting threshold `sqrt(N P_op^2 Omega / M) ln(rho) / sqrt(rho)`.
pub fn tau_mimo(rho: f64, params: &ChannelParams, p_op: f64) -> Result<f64> {
    if !(rho > 1.0) {
        return Err(Error::invalid(format!("tau needs rho > 1, got {rho}")));
    }
    check_positive("P_op", p_op)?;
    let (m, n) = (params.rx() as f64, params.tx() as f64);
    Ok((n * p_op * p_op * params.large_scale_gain() / m).sqrt() * rho.ln() / rho.sqrt())
}

/// `ln tau_mimo` as a function of `ln rho`.
pub fn ln_tau_mimo(ln_rho: f64, params: &ChannelParams, p_op: f64) -> f64 {
    let (m, n) = (params.rx() as f64, params.tx() as f64);
    0.5 * (n * p_op * p_op * params.large_scale_gain() / m).ln() + ln_rho.ln() - 0.5 * ln_rho
}

/// Smallest SNR of the MIMO asymptotic regime: `ln rho > 1` and `tau_mimo < 1`.
pub fn mimo_regime_threshold(params: &ChannelParams, p_op: f64) -> f64 {
    let (m, n) = (params.rx() as f64, params.tx() as f64);
    let k = (n * p_op * p_op * params.large_scale_gain() / m).sqrt();
    tau_threshold(|l| k * l / (0.5 * l).exp()).max(std::f64::consts::E)
}

fn require_unipolar(e: &[f64]) -> Result<()> {
    let v = ErrorVector {
        e: e.to_vec(),
        source_pair: (0, 0),
    };
    if !v.is_unipolar() {
        return Err(Error::AssumptionViolated(format!(
            "error vector {e:?} must be unipolar without zero entries"
        )));
    }
    Ok(())
}

/// Asymptotic MIMO PEP bounds `(P_L, P_U1, P_U2)` as printed:
///
/// - `P_L  = C_L (ln rho)^-MN exp(-sum_ij (ln rho + ln(P^2 Omega) - ln(M |e|^2))^2 / (8 s_ij^2))`
/// - `P_U1 = C_U (ln rho)^-MN exp(-sum_ij (ln(rho/ln^2 rho) + ln(P^2 Omega) - ln e_j^2)^2 / (8 s_ij^2))`
/// - `P_U2 = C_3U rho^(-MN/2) exp(-sum_ij ln^2 rho / (8 s_ij^2))`
///
/// with `C_L = prod s / ((4 pi)^MN e^(-MN/2)) Q(|e|^-1 / 2)`,
/// `C_U = (N P^2)^MN / (2 prod s) exp(-Omega/8 ln^2(N P^2 Omega / M))` and
/// `C_3U = exp(sum s^2 / 2) / (2 prod s) (|e|^2/(N P^2))^(-MN/2)`.
pub fn pep_bounds(e: &[f64], params: &ChannelParams, rho: f64, p_op: f64) -> Result<Bounds> {
    check_error_dims(e, params.tx())?;
    check_positive("P_op", p_op)?;
    check_positive("rho", rho)?;
    require_unipolar(e)?;
    let l = rho.ln();
    if !(l > 1.0) || tau_mimo(rho, params, p_op)? >= 1.0 {
        return Err(Error::OutOfRegime {
            rho,
            threshold: mimo_regime_threshold(params, p_op),
        });
    }

    let (m, n) = (params.rx(), params.tx());
    let mn = (m * n) as f64;
    let p2 = p_op * p_op;
    let omega = params.large_scale_gain();
    let norm_sq: f64 = e.iter().map(|v| v * v).sum();
    let sum_ln_sigma: f64 = params.sigmas().iter().map(|s| s.ln()).sum();
    let sum_var: f64 = params.sigmas().iter().map(|s| s * s).sum();

    let ln_cl = sum_ln_sigma - mn * (4.0 * std::f64::consts::PI).ln()
        + 0.5 * mn
        + log_q_function(0.5 / norm_sq.sqrt());
    let ln_cu = mn * (n as f64 * p2).ln()
        - std::f64::consts::LN_2
        - sum_ln_sigma
        - omega / 8.0 * (n as f64 * p2 * omega / m as f64).ln().powi(2);
    let ln_c3u = 0.5 * sum_var - std::f64::consts::LN_2 - sum_ln_sigma
        - 0.5 * mn * (norm_sq / (n as f64 * p2)).ln();

    let shift = (p2 * omega).ln();
    let lower_center = l + shift - (m as f64 * norm_sq).ln();
    let upper_base = l - 2.0 * l.ln() + shift;
    let (mut lower_exp, mut upper_exp, mut rem_exp) = (0.0, 0.0, 0.0);
    for i in 0..m {
        for (j, ej) in e.iter().enumerate() {
            let var8 = 8.0 * params.sigma(i, j).powi(2);
            lower_exp += lower_center * lower_center / var8;
            upper_exp += (upper_base - (ej * ej).ln()).powi(2) / var8;
            rem_exp += l * l / var8;
        }
    }
    let ln_ln = mn * l.ln();
    Ok(Bounds {
        ln_lower: ln_cl - ln_ln - lower_exp,
        ln_upper_dominant: ln_cu - ln_ln - upper_exp,
        ln_upper_remainder: ln_c3u - 0.5 * mn * l - rem_exp,
    })
}

/// Gains shaping the dominant PEP term of one error vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiversityGains {
    /// Large-scale gain `Omega = sum_ij sigma_ij^-2`.
    pub omega: f64,
    /// `ln D_s(e)` with `D_s(e) = prod_j |e_j|^(sum_i sigma_ij^-2)`.
    pub ln_d_small: f64,
    /// Coding gain `exp(1/2 sum_ij (sigma_ij ln|e_j|)^2) (N P^2 Omega / M)^(1/2 ln ln D_s)`.
    /// `None` when `D_s <= 1`, where `ln ln D_s` is undefined.
    pub coding_gain: Option<f64>,
}

impl DiversityGains {
    pub fn d_small(&self) -> f64 {
        self.ln_d_small.exp()
    }
}

fn ln_d_small(e: &[f64], params: &ChannelParams) -> f64 {
    e.iter()
        .enumerate()
        .map(|(j, v)| {
            let w: f64 = (0..params.rx()).map(|i| params.sigma(i, j).powi(-2)).sum();
            w * v.abs().ln()
        })
        .sum()
}

pub fn diversity_decomposition(e: &[f64], params: &ChannelParams, p_op: f64) -> Result<DiversityGains> {
    check_error_dims(e, params.tx())?;
    check_positive("P_op", p_op)?;
    if e.contains(&0.0) {
        return Err(Error::AssumptionViolated(format!("error vector {e:?} has a zero entry")));
    }
    let omega = params.large_scale_gain();
    let ln_ds = ln_d_small(e, params);
    let coding_gain = (ln_ds > 0.0).then(|| {
        let quad: f64 = (0..params.rx())
            .flat_map(|i| e.iter().enumerate().map(move |(j, v)| (i, j, *v)))
            .map(|(i, j, v)| (params.sigma(i, j) * v.abs().ln()).powi(2))
            .sum();
        let base = params.tx() as f64 * p_op * p_op * omega / params.rx() as f64;
        (0.5 * quad + 0.5 * ln_ds.ln() * base.ln()).exp()
    });
    Ok(DiversityGains {
        omega,
        ln_d_small: ln_ds,
        coding_gain,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OffenderKind {
    /// Entries of both signs: some positive channel annihilates `e`.
    Bipolar,
    /// A zero entry: the corresponding paths never contribute.
    ZeroEntry,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Offender {
    pub vector: ErrorVector,
    pub kind: OffenderKind,
}

/// Outcome of the full-diversity predicate; a vector that is both bipolar
/// and has a zero entry is listed once per kind.
#[derive(Clone, Debug, PartialEq)]
pub struct DiversityCheck {
    pub full_diversity: bool,
    pub offenders: Vec<Offender>,
}

/// Full large-scale diversity holds iff every error vector is unipolar with
/// no zero entries.
pub fn full_diversity_check(errors: &[ErrorVector]) -> Result<DiversityCheck> {
    if errors.is_empty() {
        return Err(Error::invalid("empty error set"));
    }
    let mut offenders = Vec::new();
    for v in errors {
        let has_pos = v.e.iter().any(|&x| x > 0.0);
        let has_neg = v.e.iter().any(|&x| x < 0.0);
        if has_pos && has_neg {
            offenders.push(Offender {
                vector: v.clone(),
                kind: OffenderKind::Bipolar,
            });
        }
        if v.has_zero() {
            offenders.push(Offender {
                vector: v.clone(),
                kind: OffenderKind::ZeroEntry,
            });
        }
    }
    Ok(DiversityCheck {
        full_diversity: offenders.is_empty(),
        offenders,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiversityReport {
    pub omega: f64,
    /// `min_e D_s(e)`; 0 when some vector has a zero entry.
    pub d_small_min: f64,
    pub full_diversity: bool,
    pub offenders: Vec<Offender>,
}

pub fn diversity_report(errors: &[ErrorVector], params: &ChannelParams) -> Result<DiversityReport> {
    let check = full_diversity_check(errors)?;
    for v in errors {
        check_error_dims(&v.e, params.tx())?;
    }
    let d_small_min = errors
        .iter()
        .map(|v| if v.has_zero() { 0.0 } else { ln_d_small(&v.e, params).exp() })
        .fold(f64::INFINITY, f64::min);
    Ok(DiversityReport {
        omega: params.large_scale_gain(),
        d_small_min,
        full_diversity: check.full_diversity,
        offenders: check.offenders,
    })
}

/// Bounds (or the exact/MC value) sampled on an SNR grid; out-of-regime points
/// carry `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurve {
    pub rho_grid: Vec<f64>,
    pub bounds: Vec<Option<Bounds>>,
}

impl BoundCurve {
    pub fn siso(rho_grid: &[f64], p_op: f64, sigma: f64, variant: SisoBoundForm) -> Result<Self> {
        let bounds = rho_grid
            .iter()
            .map(|&rho| match siso_sep_bounds_variant(rho, p_op, sigma, variant) {
                Ok(b) => Ok(Some(b)),
                Err(Error::OutOfRegime { .. }) => Ok(None),
                Err(err) => Err(err),
            })
            .collect::<Result<_>>()?;
        Ok(BoundCurve {
            rho_grid: rho_grid.to_vec(),
            bounds,
        })
    }

    pub fn mimo(rho_grid: &[f64], e: &[f64], params: &ChannelParams, p_op: f64) -> Result<Self> {
        let bounds = rho_grid
            .iter()
            .map(|&rho| match pep_bounds(e, params, rho, p_op) {
                Ok(b) => Ok(Some(b)),
                Err(Error::OutOfRegime { .. }) => Ok(None),
                Err(err) => Err(err),
            })
            .collect::<Result<_>>()?;
        Ok(BoundCurve {
            rho_grid: rho_grid.to_vec(),
            bounds,
        })
    }

    /// In-regime points satisfy `lower <= dominant + remainder`.
    pub fn is_consistent(&self) -> bool {
        self.bounds
            .iter()
            .flatten()
            .all(|b| b.ln_lower <= b.ln_upper())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelRealization;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn exact_sep_small_rho_limit() {
        for p in 1..=3 {
            let (c1, _) = PamConstellation::new(p).unwrap().sep_coefficients();
            let v = siso_sep_exact(1e-14, 1.0, 0.5, p).unwrap();
            assert!(rel(v, c1 / 2.0) < 1e-6, "p = {p}: {v}");
        }
    }

    #[test]
    fn exact_sep_matches_deterministic_channel() {
        // sigma -> 0: SEP -> Q(sqrt(rho)) for OOK.
        let v = siso_sep_exact(16.0, 1.0, 1e-4, 1).unwrap();
        assert!(rel(v, q_function(4.0)) < 1e-3);
    }

    #[test]
    fn exact_sep_is_monotone() {
        let mut prev = 1.0;
        for k in 0..40 {
            let rho = 10f64.powf(k as f64 * 0.2);
            let v = siso_sep_exact_ln(rho, 1.0, 0.5, 1).unwrap();
            assert!(v < prev, "rho = {rho}");
            prev = v;
        }
    }

    #[test]
    fn siso_sandwich_at_reference_point() {
        let rho = 1e4;
        let b = siso_sep_bounds(rho, 1.0, 0.5).unwrap();
        let exact = siso_sep_exact_ln(rho, 1.0, 0.5, 1).unwrap();
        assert!(b.contains_ln(exact), "{b:?} vs {exact}");
    }

    #[test]
    fn remainder_is_negligible_asymptotically() {
        let mut prev = f64::NEG_INFINITY;
        for k in 3..=12 {
            let b = siso_sep_bounds(10f64.powi(k), 1.0, 0.5).unwrap();
            let gap = b.ln_upper_dominant - b.ln_upper_remainder;
            assert!(gap > prev);
            prev = gap;
        }
        assert!(prev > 20.0);
    }

    #[test]
    fn siso_out_of_regime_reports_threshold() {
        match siso_sep_bounds(2.0, 1.0, 0.5) {
            Err(Error::OutOfRegime { threshold, .. }) => {
                assert!(siso_sep_bounds(threshold * 1.0001, 1.0, 0.5).is_ok());
                assert!(siso_sep_bounds(threshold * 0.999, 1.0, 0.5).is_err());
            }
            other => panic!("{other:?}"),
        }
        // A small sigma makes the tau condition binding.
        match siso_sep_bounds(10.0, 1.0, 0.05) {
            Err(Error::OutOfRegime { threshold, .. }) => {
                assert!(threshold > 100.0);
                assert!(siso_sep_bounds(threshold * 1.0001, 1.0, 0.05).is_ok());
                assert!(siso_sep_bounds(threshold * 0.999, 1.0, 0.05).is_err());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn statement_variant_differs() {
        let a = siso_sep_bounds_variant(1e6, 1.0, 0.5, SisoBoundForm::Refined).unwrap();
        let s = siso_sep_bounds_variant(1e6, 1.0, 0.5, SisoBoundForm::Condensed).unwrap();
        assert_eq!(a.ln_lower, s.ln_lower);
        assert_eq!(a.ln_upper_remainder, s.ln_upper_remainder);
        assert_ne!(a.ln_upper_dominant, s.ln_upper_dominant);
    }

    #[test]
    fn tau_siso_values() {
        let e2 = std::f64::consts::E.powi(2);
        assert!(rel(tau_siso(e2, 1.0, 1.0).unwrap(), (-1.0f64).exp()) < 1e-15);
        assert!(tau_siso(1.0, 1.0, 1.0).is_err());
        // The two exponents agree asymptotically, but only at the rate
        // 1 - 2 ln(ln rho)/ln rho: the ratio is ~2 at rho = 1e10 and within
        // 5% only once ln rho is in the hundreds.
        let (p, s) = (1.0, 0.5);
        let ratio = |l: f64| {
            let lt = ln_tau_siso(l, p, s);
            ((l + 2.0 * lt).exp() / (2.0 * p * p)) / ((lt + s * s).powi(2) / (2.0 * s * s))
        };
        assert!(rel(ln_tau_siso(1e4f64.ln(), p, s).exp(), tau_siso(1e4, p, s).unwrap()) < 1e-14);
        assert!((ratio(1e10f64.ln()) - 2.0).abs() < 0.05);
        let mut prev = f64::INFINITY;
        for l in [50.0, 100.0, 200.0, 400.0, 1000.0] {
            let r = ratio(l);
            assert!(r < prev && r > 1.0);
            prev = r;
        }
        assert!((prev - 1.0).abs() < 0.05, "{prev}");
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let rho = e2 * (1.0 + k as f64);
            let t = tau_siso(rho, 1.0, 1.0).unwrap();
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn pep_conditional_examples() {
        let h = ChannelRealization::new(1, 2, vec![1.0, 1.0]).unwrap();
        assert_eq!(pep_conditional(&[1.0, -1.0], &h, 1e6, 1.0).unwrap(), 0.5);
        let s = ChannelRealization::new(1, 1, vec![1.0]).unwrap();
        let rho = 36.0;
        assert!(rel(pep_conditional(&[1.0], &s, rho, 1.0).unwrap(), q_function(3.0)) < 1e-15);
        assert!(pep_conditional(&[1.0], &s, 1e12, 1.0).unwrap() < 1e-100);
        assert!(pep_conditional(&[1.0, 1.0], &s, 1.0, 1.0).is_err());
    }

    #[test]
    fn pep_mc_degenerate_channel() {
        let params = ChannelParams::iid(2, 2, 0.0, 1e-3).unwrap();
        let e = [-1.0 / 6.0, -1.0 / 6.0];
        let rho = 100.0;
        let mc = pep_average_mc(&e, &params, rho, 1.0, 20_000, 3).unwrap();
        let h = ChannelRealization::new(2, 2, vec![1.0; 4]).unwrap();
        let exact = pep_conditional(&e, &h, rho, 1.0).unwrap();
        assert!((mc.mean - exact).abs() <= 3.0 * mc.std_error.max(1e-12) + 1e-6 * exact);
        assert!(pep_average_mc(&e, &params, rho, 1.0, 9_999, 3).is_err());
    }

    #[test]
    fn pep_mc_is_deterministic() {
        let params = ChannelParams::iid(2, 2, 0.0, 0.5).unwrap();
        let e = [0.5, 0.5];
        let a = pep_average_mc(&e, &params, 10.0, 1.0, 25_000, 9).unwrap();
        let b = pep_average_mc(&e, &params, 10.0, 1.0, 25_000, 9).unwrap();
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a.mean));
    }

    #[test]
    fn pep_bounds_gating() {
        let params = ChannelParams::iid(2, 2, 0.0, 0.5).unwrap();
        assert!(matches!(
            pep_bounds(&[1.0, -1.0], &params, 1e6, 1.0),
            Err(Error::AssumptionViolated(_))
        ));
        assert!(matches!(
            pep_bounds(&[1.0, 0.0], &params, 1e6, 1.0),
            Err(Error::AssumptionViolated(_))
        ));
        assert!(matches!(
            pep_bounds(&[1.0, 1.0], &params, 2.0, 1.0),
            Err(Error::OutOfRegime { .. })
        ));
        let t = mimo_regime_threshold(&params, 1.0);
        assert!(pep_bounds(&[1.0, 1.0], &params, t * 1.0001, 1.0).is_ok());
    }

    #[test]
    fn pep_remainder_vanishes_relative_to_dominant() {
        let params = ChannelParams::iid(2, 2, 0.0, 0.5).unwrap();
        let e = [-1.0 / 6.0, -1.0 / 6.0];
        let mut prev = f64::NEG_INFINITY;
        for k in 4..=16 {
            let b = pep_bounds(&e, &params, 10f64.powi(k), 1.0).unwrap();
            let gap = b.ln_upper_dominant - b.ln_upper_remainder;
            assert!(gap > prev);
            prev = gap;
        }
    }

    #[test]
    fn tau_mimo_plug_in() {
        let params = ChannelParams::iid(2, 2, 0.0, 0.5).unwrap();
        let t = tau_mimo(1e4, &params, 1.0).unwrap();
        assert!(rel(t, 4.0 * 1e4f64.ln() / 100.0) < 1e-14);
        assert!(rel(tau_mimo(1e4, &params, 3.0).unwrap(), 3.0 * t) < 1e-14);
        // Asymptotic equality of the exponents; slow convergence as in SISO.
        let omega = params.large_scale_gain();
        let ratio = |l: f64| {
            let lt = ln_tau_mimo(l, &params, 1.0);
            (2.0 * (l + 2.0 * lt).exp() / (8.0 * 2.0)) / (lt.powi(2) * omega / 2.0)
        };
        assert!(rel(ln_tau_mimo(1e4f64.ln(), &params, 1.0).exp(), t) < 1e-14);
        assert!(ratio(1e10f64.ln()) > 1.5);
        assert!((ratio(1000.0) - 1.0).abs() < 0.05, "{}", ratio(1000.0));
    }

    #[test]
    fn diversity_decomposition_examples() {
        let params = ChannelParams::iid(2, 2, 0.0, 0.5).unwrap();
        let g = diversity_decomposition(&[1.0 / 6.0, 1.0 / 6.0], &params, 1.0).unwrap();
        assert!((g.omega - 16.0).abs() < 1e-12);
        assert!(rel(g.ln_d_small, 8.0 * (1.0f64 / 36.0).ln()) < 1e-14);
        assert!(g.coding_gain.is_none());
        let unit = diversity_decomposition(&[1.0, -1.0], &params, 1.0).unwrap();
        assert_eq!(unit.d_small(), 1.0);
        let big = diversity_decomposition(&[2.0, 2.0], &params, 1.0).unwrap();
        assert!(big.coding_gain.is_some_and(|c| c > 0.0));
        assert!(diversity_decomposition(&[1.0, 0.0], &params, 1.0).is_err());
        let other = diversity_decomposition(&[0.3, 0.9], &params, 1.0).unwrap();
        assert_eq!(other.omega, g.omega);
    }

    #[test]
    fn full_diversity_examples() {
        let single = vec![ErrorVector {
            e: vec![-1.0, -1.0],
            source_pair: (0, 1),
        }];
        assert!(full_diversity_check(&single).unwrap().full_diversity);
        assert!(full_diversity_check(&[]).is_err());
        let mixed = vec![
            ErrorVector { e: vec![1.0, -1.0], source_pair: (0, 1) },
            ErrorVector { e: vec![1.0, 0.0], source_pair: (0, 2) },
            ErrorVector { e: vec![-1.0, 1.0, 0.0], source_pair: (0, 3) },
        ];
        let r = full_diversity_check(&mixed).unwrap();
        assert!(!r.full_diversity);
        let kinds: Vec<_> = r.offenders.iter().map(|o| o.kind).collect();
        assert_eq!(
            kinds,
            vec![
                OffenderKind::Bipolar,
                OffenderKind::ZeroEntry,
                OffenderKind::Bipolar,
                OffenderKind::ZeroEntry
            ]
        );
    }
}
