//! Builtin time profiles `g(t)`, generated analytically together with their
//! derivatives, plus loading of sampled profiles from JSON.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use subdiff_core::forward::{PowerTerm, SourceProfile};
use subdiff_core::fraccalc::TimeGrid;
use subdiff_core::special::rgamma;

use crate::error::{WorkbenchError, WorkbenchResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinProfile {
    /// `g ≡ 1`
    #[serde(rename = "const")]
    Const,
    /// `2 + sin(2πt)`
    #[serde(rename = "two-plus-sin")]
    TwoPlusSin,
    /// `1 + t`
    #[serde(rename = "one-plus-t")]
    OnePlusT,
    /// `t - 0.3`, sign-changing, positive after `t = 0.3`
    #[serde(rename = "t-minus-0.3")]
    TMinusPoint3,
    /// `D^ρ ω + ω` for `ω = (t - 1/2)²`, which makes `(ω v_1, v_1)` a
    /// solution pair with vanishing data at `t0 = 1/2`.
    #[serde(rename = "example1")]
    Example1,
    /// `t^{2-ρ}/Γ(3-ρ) - t^{1-ρ}/Γ(2-ρ) + (t - 1/2)²`, the same expression
    /// with unit leading coefficient; it carries the reference endpoint
    /// constants but does not make `ω v_1` a solution.
    #[serde(rename = "example1-unit")]
    Example1Unit,
}

impl BuiltinProfile {
    pub const ALL: [BuiltinProfile; 6] = [
        Self::Const,
        Self::TwoPlusSin,
        Self::OnePlusT,
        Self::TMinusPoint3,
        Self::Example1,
        Self::Example1Unit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Const => "const",
            Self::TwoPlusSin => "two-plus-sin",
            Self::OnePlusT => "one-plus-t",
            Self::TMinusPoint3 => "t-minus-0.3",
            Self::Example1 => "example1",
            Self::Example1Unit => "example1-unit",
        }
    }

    /// Profiles admitted by the round-trip study.
    pub fn is_sign_definite(self) -> bool {
        matches!(self, Self::Const | Self::TwoPlusSin | Self::OnePlusT)
    }

    pub fn value(self, rho: f64, t: f64) -> f64 {
        match self {
            Self::Const => 1.0,
            Self::TwoPlusSin => 2.0 + (2.0 * PI * t).sin(),
            Self::OnePlusT => 1.0 + t,
            Self::TMinusPoint3 => t - 0.3,
            Self::Example1 | Self::Example1Unit => {
                self.power_terms(rho).iter().map(|p| p.eval(t)).sum::<f64>() + (t - 0.5).powi(2)
            }
        }
    }

    /// `g'(t)` for the C1 profiles.
    fn derivative(self, t: f64) -> Option<f64> {
        match self {
            Self::Const => Some(0.0),
            Self::TwoPlusSin => Some(2.0 * PI * (2.0 * PI * t).cos()),
            Self::OnePlusT | Self::TMinusPoint3 => Some(1.0),
            Self::Example1 | Self::Example1Unit => None,
        }
    }

    fn power_terms(self, rho: f64) -> Vec<PowerTerm> {
        let lead = match self {
            Self::Example1 => 2.0,
            Self::Example1Unit => 1.0,
            _ => return Vec::new(),
        };
        vec![
            PowerTerm {
                coef: lead * rgamma(3.0 - rho),
                exponent: 2.0 - rho,
            },
            PowerTerm {
                coef: -rgamma(2.0 - rho),
                exponent: 1.0 - rho,
            },
        ]
    }

    pub fn build(self, rho: f64, grid: TimeGrid) -> WorkbenchResult<SourceProfile> {
        let g = |t| self.value(rho, t);
        let profile = if self.derivative(0.0).is_some() {
            SourceProfile::from_fn_c1(grid, g, |t| self.derivative(t).unwrap_or(0.0))?
        } else {
            // t^{1-ρ} has an unbounded derivative at the origin
            SourceProfile::from_fn(grid, g)?
        };
        Ok(profile.with_power_terms(self.power_terms(rho))?)
    }
}

impl fmt::Display for BuiltinProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinProfile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|p| p.name()).collect();
            format!("unknown profile `{s}`, expected one of {}", names.join(", "))
        })
    }
}

/// Sampled profile file: uniform nodes `t` from 0, values `g`, and
/// optionally derivative samples `dg`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledProfile {
    pub t: Vec<f64>,
    pub g: Vec<f64>,
    #[serde(default)]
    pub dg: Option<Vec<f64>>,
}

pub fn load_sampled(path: &Path) -> WorkbenchResult<SourceProfile> {
    let text =
        std::fs::read_to_string(path).map_err(|e| WorkbenchError::config("g", format!("{}: {e}", path.display())))?;
    let s: SampledProfile = serde_json::from_str(&text).map_err(|e| WorkbenchError::config("g", e.to_string()))?;
    let grid = TimeGrid::from_nodes(&s.t).map_err(|e| WorkbenchError::config("g", e.to_string()))?;
    let profile = match s.dg {
        Some(dg) => SourceProfile::with_derivative(grid, s.g, dg),
        None => SourceProfile::new(grid, s.g),
    };
    profile.map_err(|e| WorkbenchError::config("g", e.to_string()))
}
