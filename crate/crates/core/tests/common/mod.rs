#![allow(dead_code)]

use subdiff_core::forward::{PowerTerm, SourceProfile};
use subdiff_core::fraccalc::TimeGrid;
use subdiff_core::special::rgamma;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// `g = D^ρ ω + ω` for `ω = (t - 1/2)²` on `[0, 1]`, with its fractional
/// powers declared for exact quadrature.
pub fn manufactured_source(rho: f64, m: usize) -> SourceProfile {
    let c2 = 2.0 * rgamma(3.0 - rho);
    let c1 = -rgamma(2.0 - rho);
    let grid = TimeGrid::new(1.0, m).unwrap();
    SourceProfile::from_fn(grid, |t| {
        c2 * t.powf(2.0 - rho) + c1 * t.powf(1.0 - rho) + (t - 0.5).powi(2)
    })
    .unwrap()
    .with_power_terms(vec![
        PowerTerm {
            coef: c2,
            exponent: 2.0 - rho,
        },
        PowerTerm {
            coef: c1,
            exponent: 1.0 - rho,
        },
    ])
    .unwrap()
}

/// `2 + sin(2πt)` on `[0, 1]`.
pub fn wavy(m: usize) -> SourceProfile {
    SourceProfile::from_fn_c1(
        TimeGrid::new(1.0, m).unwrap(),
        |t| 2.0 + (TWO_PI * t).sin(),
        |t| TWO_PI * (TWO_PI * t).cos(),
    )
    .unwrap()
}

pub fn constant(m: usize, c: f64) -> SourceProfile {
    SourceProfile::from_fn_c1(TimeGrid::new(1.0, m).unwrap(), |_| c, |_| 0.0).unwrap()
}
