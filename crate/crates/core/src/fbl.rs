//! Finite-blocklength error model.
//!
//! Under the normal approximation, a packet of `D` bits sent over `m`
//! channel uses at SNR `γ` is decoded in error with probability
//! `Q(f(γ, m, D))`, where
//!
//! ```text
//! f(γ, m, D) = sqrt(m / V(γ)) · (ln(1 + γ) − D·ln2 / m),   V(γ) = 1 − (1 + γ)^−2.
//! ```
//!
//! Error probabilities are carried as [`ErrorProb`], which keeps the natural
//! log alongside the value so that errors far below `f64::MIN_POSITIVE`
//! remain comparable.

use std::f64::consts::{LN_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::search::{bisect_boundary, MAX_BISECTION_ITERS};

/// Arguments above this use the asymptotic tail expansion of `Q`.
const ASYMPTOTIC_FROM: f64 = 8.0;

/// A probability together with its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorProb {
    value: f64,
    ln: f64,
}

impl ErrorProb {
    /// Certain failure.
    pub const ONE: ErrorProb = ErrorProb {
        value: 1.0,
        ln: 0.0,
    };

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::domain(format!("probability {value} outside [0, 1]")));
        }
        Ok(Self::from_value(value))
    }

    fn from_value(value: f64) -> Self {
        ErrorProb {
            value,
            ln: value.ln(),
        }
    }

    /// Builds a probability from its natural log (clamped to `<= 0`).
    pub fn from_ln(ln: f64) -> Self {
        let ln = ln.min(0.0);
        ErrorProb {
            value: ln.exp(),
            ln,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// Natural log of the probability; finite even where `value()` underflows.
    pub fn ln(&self) -> f64 {
        self.ln
    }

    pub fn log10(&self) -> f64 {
        self.ln / std::f64::consts::LN_10
    }

    /// Probability of both independent events.
    pub fn and(self, other: ErrorProb) -> ErrorProb {
        let ln = self.ln + other.ln;
        let value = self.value * other.value;
        if value.is_normal() {
            ErrorProb { value, ln }
        } else {
            ErrorProb::from_ln(ln)
        }
    }

    /// Sum of the probabilities of two disjoint events.
    pub fn plus(self, other: ErrorProb) -> ErrorProb {
        let (hi, lo) = if self.ln >= other.ln {
            (self.ln, other.ln)
        } else {
            (other.ln, self.ln)
        };
        if hi == f64::NEG_INFINITY {
            return ErrorProb::from_ln(f64::NEG_INFINITY);
        }
        let ln = (hi + (lo - hi).exp().ln_1p()).min(0.0);
        let value = self.value + other.value;
        if value.is_normal() && value <= 1.0 {
            ErrorProb { value, ln }
        } else {
            ErrorProb::from_ln(ln)
        }
    }

    /// `1 − p`.
    pub fn complement(self) -> ErrorProb {
        ErrorProb {
            value: 1.0 - self.value,
            ln: (-self.value).ln_1p(),
        }
    }
}

/// Linear signal-to-interference-plus-noise ratio.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Snr(pub f64);

/// Which channel dispersion enters the rate margin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateModel {
    /// `V = 1 − (1 + γ)^−2`.
    #[default]
    Exact,
    /// `V ≈ 1`, accurate once `γ` exceeds roughly 20 dB.
    HighSnr,
}

/// Gaussian upper tail `Q(x) = P(N(0,1) > x)`.
pub fn q_tail(x: f64) -> ErrorProb {
    if x.is_nan() {
        return ErrorProb {
            value: f64::NAN,
            ln: f64::NAN,
        };
    }
    if x > ASYMPTOTIC_FROM {
        return ErrorProb::from_ln(ln_q_asymptotic(x));
    }
    if x < -ASYMPTOTIC_FROM {
        return q_tail(-x).complement();
    }
    ErrorProb::from_value(0.5 * libm::erfc(x / SQRT_2))
}

/// `ln Q(x)` from the asymptotic expansion
/// `Q(x) ~ φ(x)/x · Σ (−1)^n (2n−1)!! / x^{2n}`, truncated at its smallest term.
fn ln_q_asymptotic(x: f64) -> f64 {
    if x == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    let inv_x2 = 1.0 / (x * x);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for n in 1..200 {
        let next = -term * (2 * n - 1) as f64 * inv_x2;
        if next.abs() >= term.abs() {
            break;
        }
        sum += next;
        term = next;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    -0.5 * x * x - x.ln() - 0.5 * (2.0 * PI).ln() + sum.ln()
}

/// Inverse of [`q_tail`]: the `x` with `Q(x) = p`.
pub fn q_tail_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("Q^-1 argument {p} outside (0, 1)")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return q_tail_inv(1.0 - p).map(|x| -x);
    }
    let target = p.ln();
    // Abramowitz & Stegun 26.2.23 starting point, |error| < 4.5e-4.
    let t = (-2.0 * target).sqrt();
    let mut x = t
        - (2.515517 + 0.802853 * t + 0.010328 * t * t)
            / (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..MAX_BISECTION_ITERS {
        let lq = q_tail(x).ln();
        let resid = lq - target;
        if resid == 0.0 {
            return Ok(x);
        }
        if resid > 0.0 {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        // d ln Q / dx = −φ(x) / Q(x)
        let slope = -(-0.5 * x * x - 0.5 * (2.0 * PI).ln() - lq).exp();
        let mut next = x - resid / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence {
        what: "inverse Q",
        iterations: MAX_BISECTION_ITERS,
    })
}

/// Channel dispersion `V(γ) = 1 − (1 + γ)^−2`.
pub fn dispersion(gamma: Snr) -> f64 {
    let g = gamma.0;
    // γ(2 + γ)/(1 + γ)² avoids cancellation for small γ
    g * (2.0 + g) / ((1.0 + g) * (1.0 + g))
}

/// Normalised rate margin `f(γ, m, D)`; the decoding error is `Q(f)`.
pub fn rate_margin(gamma: Snr, m: u32, d_bits: u32, model: RateModel) -> Result<f64> {
    let g = gamma.0;
    if !(g > 0.0) {
        return Err(Error::domain(format!("rate margin needs SNR > 0, got {g}")));
    }
    if m == 0 {
        return Err(Error::domain("rate margin needs a positive blocklength"));
    }
    let m_f = m as f64;
    let v = match model {
        RateModel::Exact => dispersion(gamma),
        RateModel::HighSnr => 1.0,
    };
    Ok((m_f / v).sqrt() * (g.ln_1p() - d_bits as f64 * LN_2 / m_f))
}

/// Decoding error probability `Q(f(γ, m, D))`.
pub fn decode_error(gamma: Snr, m: u32, d_bits: u32, model: RateModel) -> Result<ErrorProb> {
    rate_margin(gamma, m, d_bits, model).map(q_tail)
}

/// Decoding error with the `γ → 0⁺` limit (certain failure) filled in.
pub(crate) fn decode_error_or_fail(gamma: f64, m: u32, d_bits: u32, model: RateModel) -> ErrorProb {
    if gamma > 0.0 {
        // rate_margin cannot fail for γ > 0 and m > 0
        decode_error(Snr(gamma), m, d_bits, model).unwrap_or(ErrorProb::ONE)
    } else {
        ErrorProb::ONE
    }
}

/// Smallest SNR at which the coding rate `D/m` is below capacity.
pub fn rate_threshold_snr(m: u32, d_bits: u32) -> f64 {
    (d_bits as f64 * LN_2 / m as f64).exp_m1()
}

/// `(2^{D/m} − 1)/h`: the infimum power at which decoding error drops below 1/2.
pub fn min_power_for_rate(h: f64, m: u32, d_bits: u32) -> f64 {
    rate_threshold_snr(m, d_bits) / h
}

/// Transmit power at which a link with normalised gain `h` reaches exactly
/// `eps_target` decoding error.
///
/// Bisects on the decoding error itself down to adjacent floats, so the
/// returned power meets the target as evaluated by [`decode_error`].
pub fn power_for_error(
    h: f64,
    m: u32,
    d_bits: u32,
    eps_target: f64,
    model: RateModel,
) -> Result<f64> {
    if !(eps_target > 0.0 && eps_target < 0.5) {
        return Err(Error::domain(format!(
            "target error {eps_target} outside (0, 0.5)"
        )));
    }
    if !(h > 0.0) || m == 0 {
        return Err(Error::domain("power search needs h > 0 and m > 0"));
    }
    let floor = min_power_for_rate(h, m, d_bits);
    if !floor.is_finite() {
        return Err(Error::domain(format!(
            "{d_bits} bits over {m} symbols needs an unrepresentable power"
        )));
    }
    let meets =
        |p: f64| decode_error(Snr(p * h), m, d_bits, model).is_ok_and(|e| e.value() <= eps_target);

    let lo = floor * (1.0 + 1e-15);
    let mut hi = if floor > 0.0 { 2.0 * floor } else { 1.0 / h };
    let mut doublings = 0;
    while !meets(hi) {
        hi *= 2.0;
        doublings += 1;
        if doublings > 2100 || !hi.is_finite() {
            return Err(Error::NoConvergence {
                what: "power bracket",
                iterations: doublings,
            });
        }
    }
    if meets(lo) {
        return Ok(lo);
    }
    let (_, pass) = bisect_boundary(lo, hi, 0.0, "power for target error", meets)?;
    Ok(pass)
}

/// Path loss, noise floor and bandwidth of the deployment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub pathloss_intercept_db: f64,
    pub pathloss_exponent_coeff_db: f64,
}

impl Default for ChannelModel {
    /// 1 MHz, −173 dBm/Hz, `35.3 + 37.6·log10(d)` dB.
    fn default() -> Self {
        ChannelModel {
            bandwidth_hz: 1e6,
            noise_psd_dbm_per_hz: -173.0,
            pathloss_intercept_db: 35.3,
            pathloss_exponent_coeff_db: 37.6,
        }
    }
}

impl ChannelModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0) || !self.bandwidth_hz.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        Ok(())
    }

    /// Noise power over the whole band, in watts.
    pub fn noise_power_w(&self) -> f64 {
        let dbm = self.noise_psd_dbm_per_hz + 10.0 * self.bandwidth_hz.log10();
        10f64.powf((dbm - 30.0) / 10.0)
    }

    pub fn pathloss_db(&self, distance_m: f64) -> f64 {
        self.pathloss_intercept_db + self.pathloss_exponent_coeff_db * distance_m.log10()
    }

    /// Symbol duration `1/B` in seconds.
    pub fn symbol_time_s(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }
}

/// Channel power gain divided by noise power (1/W), so that SNR = `p·h`.
pub fn normalized_gain(model: &ChannelModel, distance_m: f64, fading_power: f64) -> f64 {
    fading_power * 10f64.powf(-model.pathloss_db(distance_m) / 10.0) / model.noise_power_w()
}
