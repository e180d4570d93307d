//! Caputo fractional derivatives: the power rule and the L1 scheme on
//! uniform grids.

use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Result};
use crate::mlf::check_rho;
use crate::special::{gamma, rgamma};

/// Uniform grid `t_m = m T / M`, `m = 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0) || !t_final.is_finite() {
            return domain(format!("final time T must be positive, got {t_final}"));
        }
        if steps < 2 {
            return domain(format!("time grid needs M >= 2 steps, got {steps}"));
        }
        Ok(TimeGrid { t_final, steps })
    }

    /// Rebuild a grid from explicit node times, rejecting anything that is not
    /// uniform and anchored at zero.
    pub fn from_nodes(nodes: &[f64]) -> Result<Self> {
        if nodes.len() < 3 {
            return domain("time grid needs at least three nodes");
        }
        if nodes[0] != 0.0 {
            return domain(format!("time grid must start at 0, starts at {}", nodes[0]));
        }
        let steps = nodes.len() - 1;
        let grid = TimeGrid::new(nodes[steps], steps)?;
        let h = grid.step();
        for (m, &t) in nodes.iter().enumerate() {
            if (t - grid.node(m)).abs() > 1e-9 * h.max(1.0) {
                return domain(format!("non-uniform grid: node {m} at {t}, expected {}", grid.node(m)));
            }
        }
        Ok(grid)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn node(&self, m: usize) -> f64 {
        if m == self.steps {
            self.t_final
        } else {
            m as f64 * self.t_final / self.steps as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |m| self.node(m))
    }

    /// Index `m` with `t_m == t`, if `t` is a node up to rounding.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let pos = t / self.step();
        let m = pos.round();
        if m >= 0.0 && m <= self.steps as f64 && (pos - m).abs() < 1e-9 {
            Some(m as usize)
        } else {
            None
        }
    }
}

/// Samples of a scalar function on a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return shape(format!("{} samples for a grid of {} nodes", values.len(), grid.len()));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        GridFunction { grid, values }
    }
}

/// Discrete Caputo derivative. The value at `t = 0` is not defined.
#[derive(Debug, Clone, PartialEq)]
pub struct CaputoSamples {
    pub grid: TimeGrid,
    interior: Vec<f64>,
}

impl CaputoSamples {
    /// Derivative at node `m`; `None` at the origin.
    pub fn at(&self, m: usize) -> Option<f64> {
        if m == 0 {
            None
        } else {
            self.interior.get(m - 1).copied()
        }
    }

    /// Values at nodes `1..=M`.
    pub fn interior(&self) -> &[f64] {
        &self.interior
    }
}

/// `D_t^ρ t^p = Γ(p+1)/Γ(p+1-ρ) t^{p-ρ}`.
pub fn caputo_power(p: f64, rho: f64, t: f64) -> Result<f64> {
    if !(p > 0.0) {
        return domain(format!("power rule needs p > 0, got {p}"));
    }
    check_rho(rho)?;
    if !(t >= 0.0) {
        return domain(format!("t must be non-negative, got {t}"));
    }
    let coef = gamma(p + 1.0) * rgamma(p + 1.0 - rho);
    if t == 0.0 {
        return Ok(if p > rho {
            0.0
        } else if p == rho {
            coef
        } else {
            f64::INFINITY
        });
    }
    Ok(coef * t.powf(p - rho))
}

/// L1 discretisation of the Caputo derivative of a grid function.
///
/// For `ρ < 1`:
/// `D^ρ h(t_n) ≈ h^{-ρ}/Γ(2-ρ) Σ_{j<n} a_j (h_{n-j} - h_{n-j-1})`,
/// `a_j = (j+1)^{1-ρ} - j^{1-ρ}`. For `ρ = 1` second-order central
/// differences are used, one-sided at `t_M`.
pub fn caputo_l1(h: &GridFunction, rho: f64) -> Result<CaputoSamples> {
    check_rho(rho)?;
    let grid = h.grid;
    let m_steps = grid.steps();
    if h.values.len() != grid.len() {
        return shape(format!("{} samples for a grid of {} nodes", h.values.len(), grid.len()));
    }
    let dt = grid.step();
    let v = &h.values;

    if rho == 1.0 {
        let mut out = Vec::with_capacity(m_steps);
        for m in 1..m_steps {
            out.push((v[m + 1] - v[m - 1]) / (2.0 * dt));
        }
        let m = m_steps;
        out.push((3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * dt));
        return Ok(CaputoSamples { grid, interior: out });
    }

    let one_minus = 1.0 - rho;
    let weights: Vec<f64> = (0..m_steps)
        .map(|j| ((j + 1) as f64).powf(one_minus) - (j as f64).powf(one_minus))
        .collect();
    let diffs: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = dt.powf(-rho) * rgamma(2.0 - rho);
    let interior = (1..=m_steps)
        .map(|n| {
            // diffs[n-1-j] = h_{n-j} - h_{n-j-1}
            let s: f64 = weights[..n]
                .iter()
                .zip(diffs[..n].iter().rev())
                .map(|(a, d)| a * d)
                .sum();
            scale * s
        })
        .collect();
    Ok(CaputoSamples { grid, interior })
}
