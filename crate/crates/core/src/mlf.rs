//! Two-parameter Mittag-Leffler functions on the negative real axis.
//!
//! `E_{ρ,μ}(-x) = Σ_k (-x)^k / Γ(ρk + μ)` for `ρ ∈ (0, 1]`, `μ > 0`, `x ≥ 0`.
//!
//! Three regimes are used:
//!
//! * **series**: the Taylor series, accepted while the sum of absolute terms
//!   stays small enough that cancellation cannot cost more than ~1e-12;
//! * **asymptotic**: `Σ_{j≥1} (-1)^{j+1} x^{-j} / Γ(μ - ρj)`, truncated at the
//!   smallest term and accepted when that term is below ~1e-12;
//! * **midrange**: everything in between. For `ρ < 1` the Hankel contour of
//!   the Laplace inversion is collapsed onto the branch cut, which leaves a
//!   real, non-oscillating integral; for `ρ = 1` the Beta-type representation
//!   `E_{1,μ}(-x) = Γ(μ-1)^{-1} ∫_0^1 e^{-xs} (1-s)^{μ-2} ds` is used.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::{self, Estimate};
use crate::special::{cos_pi, ln_gamma, rgamma, sin_pi};

/// Absolute accuracy promised for every accepted query.
pub const TARGET_ABS_ERROR: f64 = 1e-10;

/// Largest accepted argument magnitude.
pub const MAX_ARGUMENT: f64 = 1e6;

/// A regime is only used when its own error estimate is below this.
const REGIME_TOL: f64 = 1e-12;

const SERIES_MAX_TERMS: usize = 4000;
const ASYMPTOTIC_MAX_TERMS: usize = 600;

/// Parameters of a single evaluation of `E_{ρ,μ}(-x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlQuery {
    pub rho: f64,
    pub mu: f64,
    pub x: f64,
}

impl MlQuery {
    pub fn new(rho: f64, mu: f64, x: f64) -> Result<Self> {
        let q = MlQuery { rho, mu, x };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho)?;
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return domain(format!("mu must be a positive finite number, got {}", self.mu));
        }
        check_argument(self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Series,
    Midrange,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlValue {
    pub value: f64,
    pub regime: Regime,
    pub est_abs_error: f64,
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho <= 1.0) {
        return domain(format!("fractional order rho must lie in (0, 1], got {rho}"));
    }
    Ok(())
}

fn check_argument(x: f64) -> Result<()> {
    if !(x >= 0.0) {
        return domain(format!("argument x must be non-negative, got {x}"));
    }
    if x > MAX_ARGUMENT {
        return domain(format!("argument x = {x} exceeds the supported range {MAX_ARGUMENT}"));
    }
    Ok(())
}

/// Evaluate `E_{ρ,μ}(-x)`.
pub fn ml(q: MlQuery) -> Result<MlValue> {
    q.validate()?;
    let MlQuery { rho, mu, x } = q;

    if x == 0.0 {
        let v = rgamma(mu);
        return Ok(MlValue {
            value: v,
            regime: Regime::Series,
            est_abs_error: f64::EPSILON * v.abs(),
        });
    }

    if rho == 1.0 && mu == 1.0 {
        // keep the exponential exact so that the classical function stays
        // strictly positive and decreasing far into the tail
        let v = (-x).exp();
        let regime = if x <= 1.0 { Regime::Series } else { Regime::Midrange };
        return Ok(MlValue {
            value: v,
            regime,
            est_abs_error: f64::EPSILON * v,
        });
    }

    if let Some(v) = series(rho, mu, x) {
        if v.est_abs_error <= REGIME_TOL {
            return Ok(v);
        }
    }
    if let Some(v) = asymptotic(rho, mu, x) {
        if v.est_abs_error <= REGIME_TOL {
            return Ok(v);
        }
    }
    let v = midrange(rho, mu, x);
    if !(v.est_abs_error <= TARGET_ABS_ERROR) || !v.value.is_finite() {
        return Err(Error::Accuracy(format!(
            "E_{{{rho},{mu}}}(-{x}): estimated error {:e} above {TARGET_ABS_ERROR:e}",
            v.est_abs_error
        )));
    }
    Ok(v)
}

/// Convenience wrapper returning only the value of `E_{ρ,μ}(-x)`.
pub fn mittag_leffler(rho: f64, mu: f64, x: f64) -> Result<f64> {
    ml(MlQuery { rho, mu, x }).map(|v| v.value)
}

/// Classical Mittag-Leffler function `E_ρ(-x) = E_{ρ,1}(-x)`.
pub fn ml_classical(rho: f64, x: f64) -> Result<f64> {
    mittag_leffler(rho, 1.0, x)
}

/// `1 - E_ρ(-x)` without cancellation for small x.
///
/// Uses `1 - E_ρ(-x) = x E_{ρ,ρ+1}(-x)` below x = 1 and plain subtraction above.
pub fn ml_deficit(rho: f64, x: f64) -> Result<f64> {
    check_rho(rho)?;
    check_argument(x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x <= 1.0 {
        Ok(x * mittag_leffler(rho, rho + 1.0, x)?)
    } else {
        Ok(1.0 - ml_classical(rho, x)?)
    }
}

fn series(rho: f64, mu: f64, x: f64) -> Option<MlValue> {
    // the absolute terms sum to roughly exp(x^{1/ρ}); beyond this the
    // cancellation alone exceeds the regime tolerance
    if x.powf(1.0 / rho) > 40.0 {
        return None;
    }
    let ln_x = x.ln();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut abs_sum = 0.0f64;
    let mut prev = f64::INFINITY;
    let mut tail = f64::INFINITY;
    for k in 0..SERIES_MAX_TERMS {
        let arg = rho * k as f64 + mu;
        let mag = if arg < 170.0 && k < 700 {
            x.powi(k as i32) * rgamma(arg)
        } else {
            (k as f64 * ln_x - ln_gamma(arg)).exp()
        };
        let term = if k % 2 == 0 { mag } else { -mag };
        // Kahan summation
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        abs_sum += mag;
        if k > 2 && mag < prev && (mag <= 1e-20 || mag <= 1e-18 * abs_sum) {
            let ratio = mag / prev;
            if ratio < 0.5 {
                tail = mag * ratio / (1.0 - ratio);
                break;
            }
        }
        prev = mag;
    }
    if !tail.is_finite() {
        return None;
    }
    Some(MlValue {
        value: sum,
        regime: Regime::Series,
        est_abs_error: 8.0 * f64::EPSILON * abs_sum + tail,
    })
}

/// Upper bound on |1/Γ(a)| that never vanishes, so that a pole of Γ cannot
/// masquerade as convergence of the asymptotic series.
fn rgamma_envelope_ln(a: f64) -> f64 {
    if a >= 0.5 {
        -ln_gamma(a)
    } else {
        ln_gamma(1.0 - a) - PI.ln()
    }
}

fn asymptotic(rho: f64, mu: f64, x: f64) -> Option<MlValue> {
    if x < 1.0 {
        return None;
    }
    let ln_x = x.ln();
    let mut sum = 0.0f64;
    let mut prev_env = f64::INFINITY;
    let mut error = f64::INFINITY;
    for j in 1..=ASYMPTOTIC_MAX_TERMS {
        let a = mu - rho * j as f64;
        let env = (rgamma_envelope_ln(a) - j as f64 * ln_x).exp();
        if j > 1 && env > prev_env {
            // divergent from here on: truncate at the smallest term; the
            // remainder can exceed that term by a modest factor
            error = 10.0 * env;
            break;
        }
        let r = rgamma(a);
        let mut mag = if j < 300 { x.powi(-(j as i32)) * r } else { f64::NAN };
        if !mag.is_finite() {
            mag = if r == 0.0 {
                0.0
            } else {
                r.signum() * (-ln_gamma(a) - j as f64 * ln_x).exp()
            };
        }
        sum += if j % 2 == 1 { mag } else { -mag };
        if env < 1e-18 {
            error = env;
            break;
        }
        prev_env = env;
    }
    if !error.is_finite() {
        return None;
    }
    if rho == 1.0 {
        // the pole at s = -x contributes x^{1-μ} e^{-x} in magnitude
        error += ((1.0 - mu) * ln_x - x).exp();
    } else {
        // poles just off the principal sheet leave an exponentially small
        // remainder of size ρ^{-1} x^{(1-μ)/ρ} exp(x^{1/ρ} cos(π/ρ))
        let c = cos_pi(1.0 / rho);
        if c < 0.0 {
            error += ((1.0 - mu) / rho * ln_x + x.powf(1.0 / rho) * c).exp() / rho;
        }
    }
    Some(MlValue {
        value: sum,
        regime: Regime::Asymptotic,
        est_abs_error: error + 4.0 * f64::EPSILON * sum.abs(),
    })
}

fn midrange(rho: f64, mu: f64, x: f64) -> MlValue {
    let est = if rho < 1.0 {
        reduced_cut_integral(rho, mu, x)
    } else {
        exponential_order(mu, x)
    };
    MlValue {
        value: est.value,
        regime: Regime::Midrange,
        est_abs_error: est.error + 4.0 * f64::EPSILON * est.value.abs().max(1.0),
    }
}

/// Shift μ down below 1 + ρ/2 using `E_{ρ,β+ρ}(-x) = (1/Γ(β) - E_{ρ,β}(-x)) / x`,
/// evaluate the branch-cut integral there and walk back up.
fn reduced_cut_integral(rho: f64, mu: f64, x: f64) -> Estimate {
    let mut beta = mu;
    let mut steps = 0usize;
    // land in (1 - ρ/2, 1 + ρ/2] so the end-point exponent ρ - β stays clear of -1
    while beta > 1.0 + 0.5 * rho {
        beta -= rho;
        steps += 1;
    }
    let mut est = cut_integral(rho, beta, x);
    for _ in 0..steps {
        est = Estimate {
            value: (rgamma(beta) - est.value) / x,
            error: (est.error + f64::EPSILON) / x,
        };
        beta += rho;
    }
    est
}

/// `E_{α,β}(-x) = (1/π) ∫_0^∞ e^{-r} r^{α-β} (r^α sin πβ + x sin π(β-α)) / |r^α e^{iπα} + x|² dr`
/// valid for 0 < α < 1 and 0 < β < 1 + α.
fn cut_integral(alpha: f64, beta: f64, x: f64) -> Estimate {
    let s_b = sin_pi(beta);
    let s_ba = sin_pi(beta - alpha);
    let c_a = cos_pi(alpha);
    let s_a = sin_pi(alpha);
    let integrand = move |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let ra = r.powf(alpha);
        let re = ra + x * c_a;
        let im = x * s_a;
        let den = re * re + im * im;
        (-r).exp() * r.powf(alpha - beta) * (ra * s_b + x * s_ba) / (den * PI)
    };
    // the denominator is smallest at r^α = x, sharply so as α → 1
    let peak = x.powf(1.0 / alpha);
    let tol = 1e-15;
    // near r = 0 the integrand behaves like r^{α-β}; hand that power to the
    // substitution and integrate the bounded remainder
    let p0 = (alpha - beta).min(0.0);
    let regular = move |r: f64| -> f64 {
        let ra = r.powf(alpha);
        let re = ra + x * c_a;
        let im = x * s_a;
        let den = re * re + im * im;
        (-r).exp() * r.powf(alpha - beta - p0) * (ra * s_b + x * s_ba) / (den * PI)
    };
    let first = quad::integrate_offset(regular, 0.5 * peak, p0, tol);
    let rest = quad::integrate(integrand, 0.5 * peak, peak, tol)
        + quad::integrate(integrand, peak, 2.0 * peak, tol)
        + quad::integrate(integrand, 2.0 * peak, 2.0 * peak + 60.0, tol);
    first + rest
}

/// ρ = 1 and μ ≠ 1.
fn exponential_order(mu: f64, x: f64) -> Estimate {
    if mu == 1.0 {
        return Estimate {
            value: (-x).exp(),
            error: 0.0,
        };
    }
    if mu < 1.0 {
        // E_{1,μ}(-x) = 1/Γ(μ) - x E_{1,μ+1}(-x)
        let up = exponential_order(mu + 1.0, x);
        return Estimate {
            value: rgamma(mu) - x * up.value,
            error: x * up.error + f64::EPSILON,
        };
    }
    // (1/(x Γ(μ-1))) ∫_0^x e^{-v} (1 - v/x)^{μ-2} dv
    let c = rgamma(mu - 1.0) / x;
    let tol = 1e-15 / c.max(1e-300);
    let smooth_end = (0.5 * x).min(80.0);
    let head = quad::integrate(|v: f64| (-v).exp() * (1.0 - v / x).powf(mu - 2.0), 0.0, smooth_end, tol);
    let tail = if smooth_end < 0.5 * x {
        // e^{-v} below e^{-80} here; bounded by e^{-80} ∫ (1-v/x)^{μ-2}
        let bound = (-80.0f64).exp() * x / (mu - 1.0);
        Estimate {
            value: 0.0,
            error: bound,
        }
    } else {
        // offset s = x - v from the (possibly singular) right end
        let p = (mu - 2.0).min(0.0);
        quad::integrate_offset(
            |s: f64| (-(x - s)).exp() * x.powf(2.0 - mu) * s.powf(mu - 2.0 - p),
            0.5 * x,
            p,
            tol,
        )
    };
    let est = head + tail;
    Estimate {
        value: c * est.value,
        error: c * est.error,
    }
}
