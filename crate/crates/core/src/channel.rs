//! Log-normal MIMO intensity channel, the Gaussian tail function and SNR
//! conventions.
//!
//! Gains are `h_ij = exp(z_ij)` with `z_ij ~ N(mu_ij, sigma_ij^2)`, all
//! independent. Matrices are stored row-major with `rx` rows (receive
//! apertures, `M`) and `tx` columns (transmit apertures, `N`).
//!
//! SNR is the squared optical SNR `rho = 1/(N sigma_n^2)`. Decibel values
//! always mean `10 log10(rho)`.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::rng::Rng;
use crate::{Error, Result};

/// `1/sqrt(2 pi)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `ln(sqrt(2 pi))`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Above this argument `ln Q` is evaluated from the Mills ratio instead of
/// `erfc`, which loses relative accuracy and eventually underflows.
const LOG_Q_SWITCH: f64 = 10.0;

/// Gaussian tail `Q(x) = P(Z > x)` for a standard normal `Z`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Mills ratio `Q(x)/phi(x)` for `x >= 1` by Lentz's continued fraction
/// `1/(x + 1/(x + 2/(x + 3/(x + ...))))`.
fn mills_ratio(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// `ln Q(x)`, accurate far into the tail where `Q(x)` itself underflows.
pub fn log_q_function(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > LOG_Q_SWITCH {
        -0.5 * x * x - LN_SQRT_2PI + mills_ratio(x).ln()
    } else if x < -LOG_Q_SWITCH {
        (-q_function(-x)).ln_1p()
    } else {
        q_function(x).ln()
    }
}

/// Hazard `phi(x)/Q(x)` of the standard normal, finite for all real `x`.
pub fn normal_hazard(x: f64) -> f64 {
    if x > LOG_Q_SWITCH {
        1.0 / mills_ratio(x)
    } else {
        (-0.5 * x * x - LN_SQRT_2PI - log_q_function(x)).exp()
    }
}

/// Log-normal density of `h` when `ln h ~ N(mu, sigma^2)`.
pub fn lognormal_pdf(h: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("log-normal density needs h > 0, got {h}")));
    }
    if !(sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let z = (h.ln() - mu) / sigma;
    Ok(FRAC_1_SQRT_2PI / (h * sigma) * (-0.5 * z * z).exp())
}

/// Maximiser of [`lognormal_pdf`]: `exp(mu - sigma^2)`.
pub fn lognormal_mode(mu: f64, sigma: f64) -> f64 {
    (mu - sigma * sigma).exp()
}

/// Noise standard deviation giving squared optical SNR `rho` with `n`
/// transmit apertures: `sigma_n^2 = 1/(n rho)`.
pub fn snr_to_noise_sigma(rho: f64, n: usize) -> Result<f64> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::invalid(format!("rho must be positive and finite, got {rho}")));
    }
    if n == 0 {
        return Err(Error::invalid("need at least one transmit aperture"));
    }
    Ok((1.0 / (n as f64 * rho)).sqrt())
}

/// Inverse of [`snr_to_noise_sigma`].
pub fn noise_sigma_to_snr(sigma_n: f64, n: usize) -> Result<f64> {
    if !(sigma_n > 0.0) || n == 0 {
        return Err(Error::invalid("noise sigma and aperture count must be positive"));
    }
    Ok(1.0 / (n as f64 * sigma_n * sigma_n))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Per-path log-normal parameters of an `M x N` link.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelParams {
    rx: usize,
    tx: usize,
    mu: Vec<f64>,
    sigma: Vec<f64>,
}

impl ChannelParams {
    /// `mu` and `sigma` are row-major `rx x tx`; every `sigma` must be positive.
    pub fn new(rx: usize, tx: usize, mu: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if rx == 0 || tx == 0 {
            return Err(Error::invalid("channel dimensions must be positive"));
        }
        for v in [&mu, &sigma] {
            if v.len() != rx * tx {
                return Err(Error::DimensionMismatch {
                    expected: rx * tx,
                    found: v.len(),
                });
            }
        }
        if let Some(s) = sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::invalid(format!("sigma must be positive and finite, got {s}")));
        }
        if let Some(m) = mu.iter().find(|m| !m.is_finite()) {
            return Err(Error::invalid(format!("mu must be finite, got {m}")));
        }
        Ok(ChannelParams { rx, tx, mu, sigma })
    }

    /// Identically distributed paths.
    pub fn iid(rx: usize, tx: usize, mu: f64, sigma: f64) -> Result<Self> {
        Self::new(rx, tx, vec![mu; rx * tx], vec![sigma; rx * tx])
    }

    pub fn rx(&self) -> usize {
        self.rx
    }

    pub fn tx(&self) -> usize {
        self.tx
    }

    pub fn mu(&self, i: usize, j: usize) -> f64 {
        self.mu[i * self.tx + j]
    }

    pub fn sigma(&self, i: usize, j: usize) -> f64 {
        self.sigma[i * self.tx + j]
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigma
    }

    pub fn mus(&self) -> &[f64] {
        &self.mu
    }

    /// Large-scale diversity gain `Omega = sum_ij sigma_ij^-2`.
    pub fn large_scale_gain(&self) -> f64 {
        self.sigma.iter().map(|s| s.powi(-2)).sum()
    }

    /// `Omega` with path `(i, j)` removed.
    pub fn large_scale_gain_without(&self, i: usize, j: usize) -> Result<f64> {
        if i >= self.rx || j >= self.tx {
            return Err(Error::invalid(format!("path ({i}, {j}) out of range")));
        }
        let skip = i * self.tx + j;
        Ok(self
            .sigma
            .iter()
            .enumerate()
            .filter(|&(idx, _)| idx != skip)
            .map(|(_, s)| s.powi(-2))
            .sum())
    }

    /// Draws gains into `out` (row-major, length `rx * tx`).
    pub fn sample_into(&self, rng: &mut Rng, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.rx * self.tx);
        for ((h, mu), sigma) in out.iter_mut().zip(&self.mu).zip(&self.sigma) {
            let z: f64 = rng.sample(StandardNormal);
            *h = (mu + sigma * z).exp();
        }
    }
}

/// One draw of the channel matrix `H`; every gain is strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    rx: usize,
    tx: usize,
    gains: Vec<f64>,
}

impl ChannelRealization {
    pub fn new(rx: usize, tx: usize, gains: Vec<f64>) -> Result<Self> {
        if gains.len() != rx * tx {
            return Err(Error::DimensionMismatch {
                expected: rx * tx,
                found: gains.len(),
            });
        }
        if let Some(h) = gains.iter().find(|h| !(**h > 0.0 && h.is_finite())) {
            return Err(Error::invalid(format!("channel gains must be positive, got {h}")));
        }
        Ok(ChannelRealization { rx, tx, gains })
    }

    pub fn rx(&self) -> usize {
        self.rx
    }

    pub fn tx(&self) -> usize {
        self.tx
    }

    pub fn gain(&self, i: usize, j: usize) -> f64 {
        self.gains[i * self.tx + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.gains[i * self.tx..(i + 1) * self.tx]
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }
}

/// Draws `H` from `params` using the caller's stream.
pub fn sample_channel(params: &ChannelParams, rng: &mut Rng) -> ChannelRealization {
    let mut gains = vec![0.0; params.rx * params.tx];
    params.sample_into(rng, &mut gains);
    ChannelRealization {
        rx: params.rx,
        tx: params.tx,
        gains,
    }
}
