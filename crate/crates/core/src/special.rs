//! Gamma-function helpers shared by the Mittag-Leffler evaluator and the
//! fractional power rule.

use std::f64::consts::PI;

/// Γ(x) for real x; `inf` at non-positive integers.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// ln|Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Reciprocal gamma 1/Γ(x), exactly zero at the poles x = 0, -1, -2, ...
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return 0.0;
    }
    if x > 0.0 {
        if x < 171.0 {
            1.0 / libm::tgamma(x)
        } else {
            (-libm::lgamma(x)).exp()
        }
    } else if x > -170.0 {
        1.0 / libm::tgamma(x)
    } else {
        // reflection: 1/Γ(x) = sin(πx) Γ(1-x) / π
        sin_pi(x) * (libm::lgamma(1.0 - x) - PI.ln()).exp()
    }
}

/// sin(πv) with exact zeros at the integers.
pub fn sin_pi(v: f64) -> f64 {
    let n = v.round();
    let r = v - n;
    let s = (PI * r).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// cos(πv) with exact zeros at the half-integers.
pub fn cos_pi(v: f64) -> f64 {
    sin_pi(v + 0.5)
}
