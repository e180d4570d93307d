//! Forward problem: given `f` and `g`, the mode trajectories
//! `u_k(t) = f_k [b_k(t) + b_k(T) E_ρ(-λ_k t^ρ) / (1 - E_ρ(-λ_k T^ρ))]`.
//!
//! The convolution `b_k(t) = ∫_0^t (t-s)^{ρ-1} E_{ρ,ρ}(-λ_k (t-s)^ρ) g(s) ds`
//! is integrated exactly against the piecewise-linear interpolant of `g`.
//! Integrating by parts twice moves the weakly singular kernel onto its
//! antiderivatives
//!
//! ```text
//! F(τ) = τ^ρ     E_{ρ,ρ+1}(-λτ^ρ),   F' = τ^{ρ-1} E_{ρ,ρ}(-λτ^ρ),
//! G(τ) = τ^{ρ+1} E_{ρ,ρ+2}(-λτ^ρ),   G' = F,
//! ```
//!
//! giving `b(t) = g(0) F(t) + Σ_p g'_p [G(t - s_p) - G(t - s_{p+1})]` with
//! `g'_p` the slope on piece `p`. Constant `g` is therefore reproduced to
//! Mittag-Leffler accuracy.
//!
//! Known power-law terms `c t^q` of `g` (typically the non-smooth part, such
//! as `t^{1-ρ}`) can be declared on the profile. They are integrated exactly,
//! `∫_0^t K(t-s) s^q ds = Γ(q+1) t^{ρ+q} E_{ρ,ρ+q+1}(-λt^ρ)`, and only the
//! remainder goes through the piecewise-linear rule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Error, Result};
use crate::fraccalc::{caputo_l1, GridFunction, TimeGrid};
use crate::mlf::{check_rho, mittag_leffler, ml_classical, ml_deficit};
use crate::special::gamma;
use crate::spectral::{CoefVector, SpectralOperator};

/// Below this, `1 - E_ρ(-λT^ρ)` is treated as a floating-point breakdown.
pub const DEGENERATE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Smoothness {
    C0,
    C1,
}

/// A term `coef · t^exponent` of `g` handled by exact moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coef: f64,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn eval(&self, t: f64) -> f64 {
        if self.exponent == 0.0 {
            self.coef
        } else {
            self.coef * t.powf(self.exponent)
        }
    }
}

/// Samples of the time factor `g` on the solution grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceProfile {
    grid: TimeGrid,
    values: Vec<f64>,
    smoothness: Smoothness,
    derivative: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    power_terms: Vec<PowerTerm>,
}

impl SourceProfile {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        check_samples(&grid, &values, "g")?;
        Ok(SourceProfile {
            grid,
            values,
            smoothness: Smoothness::C0,
            derivative: None,
            power_terms: Vec::new(),
        })
    }

    pub fn with_derivative(grid: TimeGrid, values: Vec<f64>, derivative: Vec<f64>) -> Result<Self> {
        check_samples(&grid, &values, "g")?;
        check_samples(&grid, &derivative, "g'")?;
        Ok(SourceProfile {
            grid,
            values,
            smoothness: Smoothness::C1,
            derivative: Some(derivative),
            power_terms: Vec::new(),
        })
    }

    pub fn from_fn(grid: TimeGrid, g: impl Fn(f64) -> f64) -> Result<Self> {
        SourceProfile::new(grid, grid.nodes().map(g).collect())
    }

    pub fn from_fn_c1(grid: TimeGrid, g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64) -> Result<Self> {
        SourceProfile::with_derivative(grid, grid.nodes().map(g).collect(), grid.nodes().map(dg).collect())
    }

    /// Declare power-law terms contained in `g`. The samples keep describing
    /// the whole of `g`; only the quadrature changes.
    pub fn with_power_terms(mut self, terms: Vec<PowerTerm>) -> Result<Self> {
        for t in &terms {
            if !(t.exponent >= 0.0) || !t.exponent.is_finite() || !t.coef.is_finite() {
                return domain(format!(
                    "power term {} t^{} must have a finite exponent >= 0",
                    t.coef, t.exponent
                ));
            }
        }
        self.power_terms = terms;
        Ok(self)
    }

    pub fn power_terms(&self) -> &[PowerTerm] {
        &self.power_terms
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn derivative(&self) -> Option<&[f64]> {
        self.derivative.as_deref()
    }

    /// Piecewise-linear interpolant of the remainder plus the exact power
    /// terms.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let tf = self.grid.t_final();
        if !(0.0..=tf).contains(&t) {
            return domain(format!("t = {t} outside [0, {tf}]"));
        }
        let r = self.remainder();
        let pos = t / self.grid.step();
        let i = (pos.floor() as usize).min(self.grid.steps() - 1);
        let w = pos - i as f64;
        Ok(r[i] + w * (r[i + 1] - r[i]) + self.power_sum(t))
    }

    fn power_sum(&self, t: f64) -> f64 {
        self.power_terms.iter().map(|p| p.eval(t)).sum()
    }

    /// Samples of `g` minus the declared power terms.
    fn remainder(&self) -> Vec<f64> {
        if self.power_terms.is_empty() {
            return self.values.clone();
        }
        self.grid
            .nodes()
            .zip(&self.values)
            .map(|(t, v)| v - self.power_sum(t))
            .collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Strictly one sign at every sample.
    pub fn is_sign_definite(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0) || self.values.iter().all(|&v| v < 0.0)
    }

    /// Value at zero and slopes of the piecewise-linear remainder.
    fn linear_part(&self) -> (f64, Vec<f64>) {
        let r = self.remainder();
        let h = self.grid.step();
        (r[0], r.windows(2).map(|w| (w[1] - w[0]) / h).collect())
    }
}

fn check_samples(grid: &TimeGrid, v: &[f64], what: &str) -> Result<()> {
    if v.len() != grid.len() {
        return shape(format!(
            "{what}: {} samples for a grid of {} nodes",
            v.len(),
            grid.len()
        ));
    }
    if let Some(m) = v.iter().position(|x| !x.is_finite()) {
        return domain(format!("{what}: sample {m} is not finite"));
    }
    Ok(())
}

/// Relaxation kernel of one mode and its antiderivatives.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    lambda: f64,
    rho: f64,
}

impl Kernel {
    pub(crate) fn new(lambda: f64, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return domain(format!("eigenvalue must be positive, got {lambda}"));
        }
        Ok(Kernel { lambda, rho })
    }

    fn arg(&self, tau: f64) -> f64 {
        self.lambda * tau.powf(self.rho)
    }

    /// `E_ρ(-λτ^ρ)`.
    pub(crate) fn relax(&self, tau: f64) -> Result<f64> {
        if tau == 0.0 {
            return Ok(1.0);
        }
        ml_classical(self.rho, self.arg(tau))
    }

    /// `F(τ) = (1 - E_ρ(-λτ^ρ)) / λ`.
    pub(crate) fn step(&self, tau: f64) -> Result<f64> {
        if tau == 0.0 {
            return Ok(0.0);
        }
        Ok(ml_deficit(self.rho, self.arg(tau))? / self.lambda)
    }

    /// `G(τ) = ∫_0^τ F`.
    fn ramp(&self, tau: f64) -> Result<f64> {
        if tau == 0.0 {
            return Ok(0.0);
        }
        Ok(tau.powf(self.rho + 1.0) * mittag_leffler(self.rho, self.rho + 2.0, self.arg(tau))?)
    }

    /// `∫_0^t K(t-s) s^q ds = Γ(q+1) t^{ρ+q} E_{ρ,ρ+q+1}(-λt^ρ)`.
    fn power_moment(&self, q: f64, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if q == 0.0 {
            return self.step(t);
        }
        Ok(gamma(q + 1.0) * t.powf(self.rho + q) * mittag_leffler(self.rho, self.rho + q + 1.0, self.arg(t))?)
    }

    fn power_part(&self, g: &SourceProfile, t: f64) -> Result<f64> {
        g.power_terms
            .iter()
            .try_fold(0.0, |acc, p| Ok(acc + p.coef * self.power_moment(p.exponent, t)?))
    }
}

/// `b_k(t)` for a single `t ∈ [0, T]`; costs one Mittag-Leffler evaluation
/// per grid piece below `t`.
pub fn b_coeff(lambda: f64, rho: f64, t: f64, g: &SourceProfile) -> Result<f64> {
    let kernel = Kernel::new(lambda, rho)?;
    b_at(&kernel, t, g)
}

pub(crate) fn b_at(kernel: &Kernel, t: f64, g: &SourceProfile) -> Result<f64> {
    let grid = g.grid;
    if !(0.0..=grid.t_final()).contains(&t) {
        return domain(format!("t = {t} outside [0, {}]", grid.t_final()));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if let Some(m) = grid.node_index(t) {
        // reuse the node path so on-grid values agree bitwise with b_on_grid
        let ramp: Vec<f64> = (0..=m).map(|j| kernel.ramp(grid.node(j))).collect::<Result<_>>()?;
        let (g0, slopes) = g.linear_part();
        let conv: f64 = (0..m).map(|p| slopes[p] * (ramp[m - p] - ramp[m - p - 1])).sum();
        let tm = grid.node(m);
        return Ok(g0 * kernel.step(tm)? + conv + kernel.power_part(g, tm)?);
    }
    let (g0, slopes) = g.linear_part();
    let below = (0..=grid.steps()).take_while(|&p| grid.node(p) < t).count();
    let mut acc = g0 * kernel.step(t)? + kernel.power_part(g, t)?;
    let mut upper = 0.0; // G(t - s_{p+1}), vanishing for the partial last piece
    for p in (0..below).rev() {
        let lower = kernel.ramp(t - grid.node(p))?;
        acc += slopes[p] * (lower - upper);
        upper = lower;
    }
    Ok(acc)
}

/// `b_k(t_m)` at every node of `g`'s grid.
pub fn b_on_grid(lambda: f64, rho: f64, g: &SourceProfile) -> Result<Vec<f64>> {
    let kernel = Kernel::new(lambda, rho)?;
    b_nodes(&kernel, g)
}

fn b_nodes(kernel: &Kernel, g: &SourceProfile) -> Result<Vec<f64>> {
    let grid = g.grid;
    let m_steps = grid.steps();
    let ramp: Vec<f64> = (0..=m_steps)
        .map(|j| kernel.ramp(grid.node(j)))
        .collect::<Result<_>>()?;
    let d_ramp: Vec<f64> = ramp.windows(2).map(|w| w[1] - w[0]).collect();
    let (g0, slopes) = g.linear_part();
    let mut out = Vec::with_capacity(m_steps + 1);
    out.push(0.0);
    for m in 1..=m_steps {
        // Σ_p slope_p (G_{m-p} - G_{m-p-1}) = Σ_p slopes[p] d_ramp[m-1-p]
        let conv: f64 = slopes[..m]
            .iter()
            .zip(d_ramp[..m].iter().rev())
            .map(|(s, d)| s * d)
            .sum();
        let tm = grid.node(m);
        out.push(g0 * kernel.step(tm)? + conv + kernel.power_part(g, tm)?);
    }
    Ok(out)
}

/// Per-mode data needed to evaluate `u_k` anywhere in `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeTrajectory {
    pub k: usize,
    pub lambda: f64,
    pub b_final: f64,
    pub one_minus_e_final: f64,
    pub u: Vec<f64>,
}

/// Mode trajectories `u_k(t_m)` of the forward problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForwardSolution {
    pub grid: TimeGrid,
    pub rho: f64,
    pub f: CoefVector,
    pub source: SourceProfile,
    pub modes: Vec<ModeTrajectory>,
}

/// Residuals of a mode field against the equation and the non-local condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// `max_{k, m ≥ 1} |D^ρ u_k + λ_k u_k - f_k g|` with the L1 derivative.
    pub pde_residual: f64,
    /// The same maximum over `t_m ≥ T/4`. For `ρ < 1` a `t^ρ` component of
    /// `u` leaves an O(1) L1 truncation error at the first nodes, so only this
    /// part converges under refinement.
    pub pde_residual_tail: f64,
    /// `max_k |u_k(0) - u_k(T)|`.
    pub nonlocal_defect: f64,
}

pub fn solve_forward(
    op: &SpectralOperator,
    f: &CoefVector,
    g: &SourceProfile,
    rho: f64,
    grid: TimeGrid,
) -> Result<ForwardSolution> {
    check_rho(rho)?;
    if f.len() != op.modes() {
        return shape(format!(
            "{} source coefficients for an operator with {} modes",
            f.len(),
            op.modes()
        ));
    }
    if g.grid != grid {
        return shape(format!(
            "g is sampled on (T={}, M={}) but the solution grid is (T={}, M={})",
            g.grid.t_final(),
            g.grid.steps(),
            grid.t_final(),
            grid.steps()
        ));
    }
    let modes = (0..op.modes())
        .into_par_iter()
        .map(|i| solve_mode(i + 1, op.eigenvalues()[i], f[i], g, rho))
        .collect::<Result<Vec<_>>>()?;
    Ok(ForwardSolution {
        grid,
        rho,
        f: f.clone(),
        source: g.clone(),
        modes,
    })
}

/// Coefficients `u_k(t)` of the forward solution at a single time, without
/// building whole trajectories.
pub fn observe_at(op: &SpectralOperator, f: &CoefVector, g: &SourceProfile, rho: f64, t: f64) -> Result<CoefVector> {
    check_rho(rho)?;
    if f.len() != op.modes() {
        return shape(format!(
            "{} source coefficients for an operator with {} modes",
            f.len(),
            op.modes()
        ));
    }
    let t_final = g.grid.t_final();
    let values = (0..op.modes())
        .into_par_iter()
        .map(|i| {
            if f[i] == 0.0 {
                return Ok(0.0);
            }
            let lambda = op.eigenvalues()[i];
            let kernel = Kernel::new(lambda, rho)?;
            let one_minus_e_final = kernel.step(t_final)? * lambda;
            if !(one_minus_e_final >= DEGENERATE_FLOOR) {
                return Err(Error::Degenerate(format!(
                    "1 - E_rho(-lambda_{} T^rho) = {one_minus_e_final:e}",
                    i + 1
                )));
            }
            let lift = b_at(&kernel, t_final, g)? / one_minus_e_final;
            Ok(f[i] * (b_at(&kernel, t, g)? + lift * kernel.relax(t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    CoefVector::new(values)
}

fn solve_mode(k: usize, lambda: f64, fk: f64, g: &SourceProfile, rho: f64) -> Result<ModeTrajectory> {
    let kernel = Kernel::new(lambda, rho)?;
    let grid = g.grid;
    let one_minus_e_final = kernel.step(grid.t_final())? * lambda;
    if !(one_minus_e_final >= DEGENERATE_FLOOR) {
        return Err(Error::Degenerate(format!(
            "1 - E_rho(-lambda_{k} T^rho) = {one_minus_e_final:e}"
        )));
    }
    if fk == 0.0 {
        return Ok(ModeTrajectory {
            k,
            lambda,
            b_final: 0.0,
            one_minus_e_final,
            u: vec![0.0; grid.len()],
        });
    }
    let b = b_nodes(&kernel, g)?;
    let b_final = b[grid.steps()];
    let lift = b_final / one_minus_e_final;
    let u = grid
        .nodes()
        .zip(&b)
        .map(|(t, bm)| Ok(fk * (bm + lift * kernel.relax(t)?)))
        .collect::<Result<_>>()?;
    Ok(ModeTrajectory {
        k,
        lambda,
        b_final,
        one_minus_e_final,
        u,
    })
}

impl ForwardSolution {
    pub fn modes_count(&self) -> usize {
        self.modes.len()
    }

    /// `u_k(t)` for any `t ∈ [0, T]`, on or off the grid.
    pub fn mode_value_at(&self, k: usize, t: f64) -> Result<f64> {
        let mode = self
            .modes
            .get(k.wrapping_sub(1))
            .ok_or_else(|| Error::Shape(format!("no mode k={k}")))?;
        let fk = self.f[k - 1];
        if fk == 0.0 {
            return Ok(0.0);
        }
        if let Some(m) = self.grid.node_index(t) {
            return Ok(mode.u[m]);
        }
        let kernel = Kernel::new(mode.lambda, self.rho)?;
        let bt = b_at(&kernel, t, &self.source)?;
        Ok(fk * (bt + mode.b_final / mode.one_minus_e_final * kernel.relax(t)?))
    }

    /// Coefficients `u_k(t)`, `k = 1..N`.
    pub fn coefficients_at(&self, t: f64) -> Result<CoefVector> {
        let values = (1..=self.modes.len())
            .into_par_iter()
            .map(|k| self.mode_value_at(k, t))
            .collect::<Result<Vec<_>>>()?;
        CoefVector::new(values)
    }

    /// Physical-space samples of `u(t_m)`.
    pub fn physical_at_node(&self, op: &SpectralOperator, m: usize) -> Result<Vec<f64>> {
        let c = CoefVector::new(self.modes.iter().map(|mode| mode.u[m]).collect())?;
        op.synthesize(&c)
    }

    pub fn residual_check(&self) -> Result<ResidualReport> {
        let lambdas: Vec<f64> = self.modes.iter().map(|m| m.lambda).collect();
        let trajectories: Vec<Vec<f64>> = self.modes.iter().map(|m| m.u.clone()).collect();
        residual_check(&lambdas, &trajectories, &self.f, &self.source, self.rho)
    }
}

/// Residual of arbitrary mode trajectories sampled on `g`'s grid.
pub fn residual_check(
    lambdas: &[f64],
    trajectories: &[Vec<f64>],
    f: &CoefVector,
    g: &SourceProfile,
    rho: f64,
) -> Result<ResidualReport> {
    if lambdas.len() != trajectories.len() || f.len() != lambdas.len() {
        return shape(format!(
            "{} eigenvalues, {} trajectories, {} coefficients",
            lambdas.len(),
            trajectories.len(),
            f.len()
        ));
    }
    let grid = g.grid;
    let mut report = ResidualReport {
        pde_residual: 0.0,
        pde_residual_tail: 0.0,
        nonlocal_defect: 0.0,
    };
    let tail_start = grid.steps().div_ceil(4);
    for ((&lambda, u), &fk) in lambdas.iter().zip(trajectories).zip(f.as_slice()) {
        let d = caputo_l1(&GridFunction::new(grid, u.clone())?, rho)?;
        for (m, (&um, &gm)) in u.iter().zip(&g.values).enumerate().skip(1) {
            let r = d.at(m).unwrap_or(0.0) + lambda * um - fk * gm;
            report.pde_residual = report.pde_residual.max(r.abs());
            if m >= tail_start {
                report.pde_residual_tail = report.pde_residual_tail.max(r.abs());
            }
        }
        report.nonlocal_defect = report.nonlocal_defect.max((u[0] - u[grid.steps()]).abs());
    }
    Ok(report)
}
