//! JSON documents and CSV plot data. Every writer is a pure function of its
//! input, so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use subdiff_core::forward::ForwardSolution;
use subdiff_core::fraccalc::TimeGrid;
use subdiff_core::inverse::{Amplification, DeltaRecord, InverseResult, LowerBoundScan, Verdict};
use subdiff_core::spectral::SpectralOperator;

use crate::error::{WorkbenchError, WorkbenchResult};
use crate::report::ScenarioReport;

#[derive(Serialize)]
struct ModeOut<'a> {
    k: usize,
    lambda: f64,
    u: &'a [f64],
}

#[derive(Serialize)]
struct SolutionOut<'a> {
    grid: TimeGrid,
    rho: f64,
    modes: Vec<ModeOut<'a>>,
    f: &'a [f64],
}

#[derive(Serialize)]
struct InverseOut<'a> {
    f: &'a [f64],
    verdict: Verdict,
    #[serde(rename = "K0")]
    k0: &'a [usize],
    near_degenerate: &'a [usize],
    threshold: f64,
    free_modes: &'a [usize],
    partition_table: &'a [DeltaRecord],
    amplification: &'a [Amplification],
    growth_exponent: Option<f64>,
    measurement_defect: f64,
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn solution_json(sol: &ForwardSolution) -> String {
    to_pretty(&SolutionOut {
        grid: sol.grid,
        rho: sol.rho,
        modes: sol
            .modes
            .iter()
            .map(|m| ModeOut {
                k: m.k,
                lambda: m.lambda,
                u: &m.u,
            })
            .collect(),
        f: sol.f.as_slice(),
    })
}

pub fn inverse_json(res: &InverseResult) -> String {
    to_pretty(&InverseOut {
        f: res.f.as_slice(),
        verdict: res.verdict,
        k0: &res.partition.degenerate,
        near_degenerate: &res.partition.near_degenerate,
        threshold: res.partition.threshold,
        free_modes: &res.free_modes,
        partition_table: &res.table,
        amplification: &res.amplification,
        growth_exponent: res.growth_exponent,
        measurement_defect: res.measurement_defect,
    })
}

pub fn report_json(rep: &ScenarioReport) -> String {
    to_pretty(rep)
}

/// Rows `t, u(x_0), …, u(x_P)` of the synthesized field.
pub fn solution_csv(sol: &ForwardSolution, op: &SpectralOperator) -> WorkbenchResult<String> {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# forward solution, rho = {}, {} modes, {} time steps",
        sol.rho,
        sol.modes.len(),
        sol.grid.steps()
    );
    let _ = writeln!(
        out,
        "# columns: t, then u(t, x_i) at x_i = i*L/P for i = 0..=P, L = {}",
        op.length()
    );
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..op.grid_points()).map(|i| format!("u{i}")))
        .collect();
    let _ = writeln!(out, "{}", header.join(","));
    for (m, t) in sol.grid.nodes().enumerate() {
        let field = sol.physical_at_node(op, m)?;
        out.push_str(&t.to_string());
        for v in field {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn scan_csv(scan: &LowerBoundScan) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# lower-bound scan at t0 = {}, threshold = {}",
        scan.t0, scan.threshold
    );
    let _ = writeln!(
        out,
        "# columns: mode index k, eigenvalue lambda_k, scaled determinant lambda_k*|delta_k|"
    );
    out.push_str("k,lambda,scaled\n");
    for r in &scan.rows {
        let _ = writeln!(out, "{},{},{}", r.k, r.lambda, r.scaled);
    }
    out
}

/// Plot data accepted by [`emit_plotdata`].
pub enum PlotData<'a> {
    Solution {
        solution: &'a ForwardSolution,
        operator: &'a SpectralOperator,
    },
    Scan(&'a LowerBoundScan),
    Report(&'a ScenarioReport),
}

pub fn render(data: &PlotData<'_>) -> WorkbenchResult<String> {
    match data {
        PlotData::Solution { solution, operator } => solution_csv(solution, operator),
        PlotData::Scan(scan) => Ok(scan_csv(scan)),
        PlotData::Report(rep) => Ok(report_json(rep)),
    }
}

pub fn write_text(path: &Path, text: &str) -> WorkbenchResult<()> {
    std::fs::write(path, text).map_err(|source| WorkbenchError::Io {
        path: path.into(),
        source,
    })
}

pub fn emit_plotdata(data: &PlotData<'_>, path: &Path) -> WorkbenchResult<()> {
    write_text(path, &render(data)?)
}
