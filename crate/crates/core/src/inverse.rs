//! Inverse source problem: recover `f` from `ψ = u(t0)`.
//!
//! Each mode obeys `f_k Δ_k = ψ_k (1 - E_ρ(-λ_k T^ρ))` with
//! `Δ_k = (1 - E_ρ(-λ_k T^ρ)) b_k(t0) + E_ρ(-λ_k t0^ρ) b_k(T)`.
//! Modes with `Δ_k = 0` (numerically: `λ_k |Δ_k|` below a threshold) carry no
//! information about `f_k`; data on them must vanish and `f_k` is free.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, shape, Error, Result};
use crate::forward::{b_at, solve_forward, ForwardSolution, Kernel, SourceProfile};
use crate::mlf::check_rho;
use crate::spectral::{CoefVector, SpectralOperator};

/// Thresholds of the mode classification and the solvability check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InverseTolerances {
    /// `k ∈ K0` iff `λ_k |Δ_k| ≤ tau · ‖g‖∞ · max(1, T^ρ)`.
    pub tau: f64,
    /// Modes up to `near_factor` times the threshold are flagged.
    pub near_factor: f64,
    /// `|ψ_k| ≤ ortho · ‖ψ‖` is accepted as zero on degenerate modes.
    pub ortho: f64,
}

impl Default for InverseTolerances {
    fn default() -> Self {
        InverseTolerances {
            tau: 1e-6,
            near_factor: 10.0,
            ortho: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub k: usize,
    pub lambda: f64,
    pub b_t0: f64,
    #[serde(rename = "b_T")]
    pub b_final: f64,
    #[serde(rename = "one_minus_E_T")]
    pub one_minus_e_final: f64,
    #[serde(rename = "E_t0")]
    pub e_t0: f64,
    pub delta: f64,
    /// `λ_k |Δ_k|`, the scale-free size of the determinant.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePartition {
    #[serde(rename = "K_rho")]
    pub regular: Vec<usize>,
    #[serde(rename = "K0")]
    pub degenerate: Vec<usize>,
    /// Regular modes within `near_factor` of the threshold.
    pub near_degenerate: Vec<usize>,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Unique,
    NonUniqueFamily,
}

/// Which uniqueness result covers the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    /// `g` keeps one sign on `[0, T]`.
    SignDefinite,
    /// `ρ = 1` and `g(t0) g(T) > 0`.
    ClassicalSignCondition,
    /// No sign condition applies (for `ρ < 1` the admissible `T` is not
    /// quantified); the verdict rests on the computed `Δ_k` alone.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplification {
    pub k: usize,
    /// `|f_k| / |ψ_k|`.
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseResult {
    pub f: CoefVector,
    pub u: ForwardSolution,
    pub table: Vec<DeltaRecord>,
    pub partition: ModePartition,
    pub verdict: Verdict,
    pub hypothesis: Hypothesis,
    pub free_modes: Vec<usize>,
    pub amplification: Vec<Amplification>,
    /// Least-squares slope of `ln(amplification)` against `ln λ_k`.
    pub growth_exponent: Option<f64>,
    /// `max_{k ∈ K_ρ} |u_k(t0) - ψ_k|` of the reconstruction.
    pub measurement_defect: f64,
}

/// Operator, source and observation time shared by the inverse operations.
/// The final time `T` is the end of `g`'s grid.
#[derive(Debug, Clone, Copy)]
pub struct InverseProblem<'a> {
    pub op: &'a SpectralOperator,
    pub g: &'a SourceProfile,
    pub rho: f64,
    pub t0: f64,
}

impl<'a> InverseProblem<'a> {
    pub fn new(op: &'a SpectralOperator, g: &'a SourceProfile, rho: f64, t0: f64) -> Result<Self> {
        check_rho(rho)?;
        let t_final = g.grid().t_final();
        if !(t0 > 0.0 && t0 < t_final) {
            return domain(format!("observation time t0 = {t0} must lie in (0, {t_final})"));
        }
        Ok(InverseProblem { op, g, rho, t0 })
    }

    pub fn t_final(&self) -> f64 {
        self.g.grid().t_final()
    }

    /// `τ ‖g‖∞ max(1, T^ρ)`.
    pub fn threshold(&self, tau: f64) -> f64 {
        tau * self.g.sup_norm() * self.t_final().powf(self.rho).max(1.0)
    }

    pub fn delta_table(&self) -> Result<Vec<DeltaRecord>> {
        (1..=self.op.modes())
            .into_par_iter()
            .map(|k| delta_record(k, self.op.lambda(k), self.rho, self.t0, self.g))
            .collect()
    }

    pub fn classify(&self, tol: &InverseTolerances) -> Result<ModePartition> {
        Ok(partition(
            &self.delta_table()?,
            self.threshold(tol.tau),
            tol.near_factor,
        ))
    }

    pub fn hypothesis(&self) -> Result<Hypothesis> {
        if self.g.is_sign_definite() {
            return Ok(Hypothesis::SignDefinite);
        }
        if self.rho == 1.0 && self.g.value_at(self.t0)? * self.g.value_at(self.t_final())? > 0.0 {
            return Ok(Hypothesis::ClassicalSignCondition);
        }
        Ok(Hypothesis::Empirical)
    }

    pub fn solve(
        &self,
        psi: &CoefVector,
        free_values: &BTreeMap<usize, f64>,
        tol: &InverseTolerances,
    ) -> Result<InverseResult> {
        let n = self.op.modes();
        if psi.len() != n {
            return shape(format!(
                "{} data coefficients for an operator with {n} modes",
                psi.len()
            ));
        }
        let table = self.delta_table()?;
        let partition = partition(&table, self.threshold(tol.tau), tol.near_factor);

        let psi_norm = psi.norm();
        for &k in &partition.degenerate {
            let psi_k = psi[k - 1];
            if psi_k.abs() > tol.ortho * psi_norm {
                return Err(Error::NonOrthogonalData { k, psi_k });
            }
        }
        for (&k, v) in free_values {
            if !partition.degenerate.contains(&k) {
                return domain(format!("free value given for mode k={k}, which is not degenerate"));
            }
            if !v.is_finite() {
                return domain(format!("free value for mode k={k} is not finite"));
            }
        }

        let mut f = vec![0.0; n];
        for r in &table {
            let psi_k = psi[r.k - 1];
            f[r.k - 1] = if partition.degenerate.contains(&r.k) {
                free_values.get(&r.k).copied().unwrap_or(0.0)
            } else if psi_k == 0.0 {
                0.0
            } else {
                psi_k * r.one_minus_e_final / r.delta
            };
        }
        let f = CoefVector::new(f)?;
        let u = solve_forward(self.op, &f, self.g, self.rho, self.g.grid())?;

        let amplification: Vec<Amplification> = partition
            .regular
            .iter()
            .filter(|&&k| psi[k - 1] != 0.0)
            .map(|&k| Amplification {
                k,
                factor: (f[k - 1] / psi[k - 1]).abs(),
            })
            .collect();
        let growth_exponent = growth_exponent(self.op, &amplification);

        let mut measurement_defect = 0.0_f64;
        for &k in &partition.regular {
            let uk = u.mode_value_at(k, self.t0)?;
            measurement_defect = measurement_defect.max((uk - psi[k - 1]).abs());
        }

        Ok(InverseResult {
            verdict: if partition.degenerate.is_empty() {
                Verdict::Unique
            } else {
                Verdict::NonUniqueFamily
            },
            hypothesis: self.hypothesis()?,
            free_modes: partition.degenerate.clone(),
            f,
            u,
            table,
            partition,
            amplification,
            growth_exponent,
            measurement_defect,
        })
    }

    pub fn lower_bound_scan(&self, tol: &InverseTolerances) -> Result<LowerBoundScan> {
        let table = self.delta_table()?;
        let threshold = self.threshold(tol.tau);
        let (argmin, min_scaled) = table
            .iter()
            .map(|r| (r.k, r.scaled))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        // first k from which every mode clears the near-degenerate band
        let band = threshold * tol.near_factor;
        let k0 = table.iter().rposition(|r| r.scaled <= band).map_or(1, |i| i + 2);
        let tail_min = table
            .iter()
            .filter(|r| r.k >= k0)
            .map(|r| r.scaled)
            .fold(f64::INFINITY, f64::min);
        let rows = table
            .iter()
            .map(|r| ScanRow {
                k: r.k,
                lambda: r.lambda,
                scaled: r.scaled,
            })
            .collect();
        Ok(LowerBoundScan {
            t0: self.t0,
            rows,
            min_scaled,
            argmin,
            k0,
            tail_min: if k0 <= self.op.modes() { Some(tail_min) } else { None },
            constant: (self.g.is_sign_definite() && min_scaled > 0.0).then_some(min_scaled),
            threshold,
        })
    }
}

/// `Δ_k` and its ingredients for one mode.
pub fn delta(lambda: f64, rho: f64, t0: f64, g: &SourceProfile) -> Result<DeltaRecord> {
    check_rho(rho)?;
    let t_final = g.grid().t_final();
    if !(t0 > 0.0 && t0 < t_final) {
        return domain(format!("observation time t0 = {t0} must lie in (0, {t_final})"));
    }
    delta_record(0, lambda, rho, t0, g)
}

fn delta_record(k: usize, lambda: f64, rho: f64, t0: f64, g: &SourceProfile) -> Result<DeltaRecord> {
    let kernel = Kernel::new(lambda, rho)?;
    let t_final = g.grid().t_final();
    let b_t0 = b_at(&kernel, t0, g)?;
    let b_final = b_at(&kernel, t_final, g)?;
    let one_minus_e_final = kernel.step(t_final)? * lambda;
    let e_t0 = kernel.relax(t0)?;
    let delta = one_minus_e_final * b_t0 + e_t0 * b_final;
    Ok(DeltaRecord {
        k,
        lambda,
        b_t0,
        b_final,
        one_minus_e_final,
        e_t0,
        delta,
        scaled: lambda * delta.abs(),
    })
}

fn partition(table: &[DeltaRecord], threshold: f64, near_factor: f64) -> ModePartition {
    let mut p = ModePartition {
        regular: Vec::new(),
        degenerate: Vec::new(),
        near_degenerate: Vec::new(),
        threshold,
    };
    for r in table {
        if r.scaled <= threshold {
            p.degenerate.push(r.k);
        } else {
            p.regular.push(r.k);
            if r.scaled < near_factor * threshold {
                p.near_degenerate.push(r.k);
            }
        }
    }
    p
}

fn growth_exponent(op: &SpectralOperator, amp: &[Amplification]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = amp
        .iter()
        .filter(|a| a.factor > 0.0)
        .map(|a| (op.lambda(a.k).ln(), a.factor.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub k: usize,
    pub lambda: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundScan {
    pub t0: f64,
    pub rows: Vec<ScanRow>,
    pub min_scaled: f64,
    pub argmin: usize,
    /// Smallest `k` from which all modes clear the near-degenerate band.
    pub k0: usize,
    pub tail_min: Option<f64>,
    /// Empirical `C` in `|Δ_k| ≥ C / λ_k`, reported for sign-definite `g`.
    pub constant: Option<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub t0: f64,
    /// Sign criterion: `g` sign-definite, or `g(t0) g(T) > 0` for `ρ = 1`,
    /// or `g(0) ≠ 0` for `ρ < 1`.
    pub sign_ok: bool,
    pub degenerate: Vec<usize>,
    pub min_scaled: f64,
    pub argmin: usize,
    pub accepted: bool,
}

/// Rank observation times: accepted candidates (sign criterion met, no
/// degenerate modes) first, each group by decreasing `min_k λ_k |Δ_k|`.
pub fn pick_t0(
    op: &SpectralOperator,
    g: &SourceProfile,
    rho: f64,
    candidates: &[f64],
    tol: &InverseTolerances,
) -> Result<Vec<CandidateReport>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let t_final = g.grid().t_final();
    let mut out = Vec::with_capacity(candidates.len());
    for &t0 in candidates {
        let problem = InverseProblem::new(op, g, rho, t0)?;
        let scan = problem.lower_bound_scan(tol)?;
        let degenerate: Vec<usize> = scan
            .rows
            .iter()
            .filter(|r| r.scaled <= scan.threshold)
            .map(|r| r.k)
            .collect();
        let sign_ok = g.is_sign_definite()
            || if rho == 1.0 {
                g.value_at(t0)? * g.value_at(t_final)? > 0.0
            } else {
                g.values()[0] != 0.0
            };
        out.push(CandidateReport {
            t0,
            sign_ok,
            accepted: sign_ok && degenerate.is_empty(),
            degenerate,
            min_scaled: scan.min_scaled,
            argmin: scan.argmin,
        });
    }
    out.sort_by(|a, b| b.accepted.cmp(&a.accepted).then(b.min_scaled.total_cmp(&a.min_scaled)));
    Ok(out)
}
