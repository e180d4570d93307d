use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use subdiff_core::forward::{observe_at, solve_forward};
use subdiff_core::inverse::{pick_t0, InverseProblem};
use subdiff_core::mlf::{ml, MlQuery};
use subdiff_workbench::config::{RunConfig, SourceChoice};
use subdiff_workbench::output::{emit_plotdata, inverse_json, report_json, solution_json, write_text, PlotData};
use subdiff_workbench::profiles::BuiltinProfile;
use subdiff_workbench::scenario::{scenario_example1, scenario_lemma_suite, scenario_roundtrip, Example1Params};
use subdiff_workbench::{ScenarioReport, WorkbenchError, WorkbenchResult};

/// Forward and inverse source problems for the subdiffusion equation with a
/// non-local time condition.
#[derive(Parser)]
#[command(name = "subdiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate E_{rho,mu}(-x).
    MlEval {
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        x: f64,
        /// Print value, regime and error estimate as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Solve the forward problem for the configured f.
    Forward(RunArgs),
    /// Recover f from the measurement psi at t0.
    Inverse {
        #[command(flatten)]
        run: RunArgs,
        /// Value of f_k on a degenerate mode, as k=value; repeatable.
        #[arg(long = "free", value_parser = parse_free)]
        free: Vec<(usize, f64)>,
    },
    /// Run the lemma suite.
    Verify {
        /// Fractional orders to check.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0"
        )]
        rhos: Vec<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Reproduce the non-uniqueness example.
    Example1(RunArgs),
    /// Forward, measure, recover, compare.
    Roundtrip(RunArgs),
    /// Rank candidate observation times.
    PickT0 {
        #[arg(long, value_delimiter = ',', required = true)]
        candidates: Vec<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML or JSON run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "T")]
    t_final: Option<f64>,
    #[arg(long)]
    t0: Option<f64>,
    /// Time steps.
    #[arg(short = 'M', long = "steps")]
    steps: Option<usize>,
    /// Retained modes.
    #[arg(short = 'N', long = "modes")]
    modes: Option<usize>,
    /// Spatial intervals.
    #[arg(short = 'P', long = "points")]
    points: Option<usize>,
    /// Builtin profile name or path to a sampled profile JSON.
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the JSON result document.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write CSV plot data.
    #[arg(long)]
    plot: Option<PathBuf>,
}

fn parse_free(s: &str) -> Result<(usize, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected k=value")?;
    Ok((
        k.trim().parse().map_err(|e| format!("{e}"))?,
        v.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

impl RunArgs {
    fn config(&self) -> WorkbenchResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_path(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {$(if let Some(v) = self.$flag { cfg.$field = v; })*};
        }
        set!(rho => rho, t_final => t_final, t0 => t0, steps => steps, modes => modes, points => points, seed => seed);
        if let Some(g) = &self.g {
            cfg.g = match g.parse::<BuiltinProfile>() {
                Ok(p) => SourceChoice::Builtin(p),
                Err(_) => SourceChoice::File { file: g.into() },
            };
        }
        if self.plot.is_some() {
            cfg.output.plot = self.plot.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(out: Option<&Path>, text: &str) -> WorkbenchResult<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Print the summary, write the JSON, and map pass/fail to 0/1.
fn finish_report(rep: &ScenarioReport, out: Option<&Path>) -> WorkbenchResult<u8> {
    eprint!("{rep}");
    if let Some(path) = out {
        write_text(path, &report_json(rep))?;
    }
    Ok(if rep.passed() { 0 } else { 1 })
}

#[derive(Serialize)]
struct MlOut {
    rho: f64,
    mu: f64,
    x: f64,
    value: f64,
    regime: subdiff_core::mlf::Regime,
    est_abs_error: f64,
}

fn run(cli: Cli) -> WorkbenchResult<u8> {
    match cli.command {
        Command::MlEval { rho, mu, x, json } => {
            let q = MlQuery::new(rho, mu, x).map_err(|e| WorkbenchError::config("rho/mu/x", e.to_string()))?;
            let v = ml(q)?;
            if json {
                let out = MlOut {
                    rho,
                    mu,
                    x,
                    value: v.value,
                    regime: v.regime,
                    est_abs_error: v.est_abs_error,
                };
                println!("{}", serde_json::to_string(&out).expect("plain data"));
            } else {
                println!("{}", v.value);
            }
            Ok(0)
        }
        Command::Forward(args) => {
            let cfg = args.config()?;
            let op = cfg.operator()?;
            let g = cfg.source()?;
            let sol = solve_forward(&op, &cfg.source_coefficients(), &g, cfg.rho, g.grid())?;
            let r = sol.residual_check()?;
            eprintln!(
                "pde residual {:e} (t >= T/4: {:e}), non-local defect {:e}",
                r.pde_residual, r.pde_residual_tail, r.nonlocal_defect
            );
            if let Some(path) = &cfg.output.plot {
                emit_plotdata(
                    &PlotData::Solution {
                        solution: &sol,
                        operator: &op,
                    },
                    path,
                )?;
            }
            emit(
                args.out.as_deref().or(cfg.output.solution.as_deref()),
                &solution_json(&sol),
            )?;
            Ok(0)
        }
        Command::Inverse { run, free } => {
            let mut cfg = run.config()?;
            cfg.free.extend(free);
            cfg.validate()?;
            let op = cfg.operator()?;
            let g = cfg.source()?;
            let psi = match &cfg.psi {
                Some(p) => subdiff_core::spectral::CoefVector::new(p.clone())?,
                None => observe_at(&op, &cfg.source_coefficients(), &g, cfg.rho, cfg.t0)?,
            };
            let res = InverseProblem::new(&op, &g, cfg.rho, cfg.t0)?.solve(
                &psi,
                &cfg.free_values(),
                &cfg.tolerances.inverse(),
            )?;
            eprintln!(
                "verdict {:?}, K0 {:?}, hypothesis {:?}",
                res.verdict, res.partition.degenerate, res.hypothesis
            );
            if let Some(path) = &cfg.output.plot {
                emit_plotdata(
                    &PlotData::Solution {
                        solution: &res.u,
                        operator: &op,
                    },
                    path,
                )?;
            }
            emit(
                run.out.as_deref().or(cfg.output.inverse.as_deref()),
                &inverse_json(&res),
            )?;
            Ok(0)
        }
        Command::Verify { rhos, run } => {
            let cfg = run.config()?;
            let rep = scenario_lemma_suite(&rhos, cfg.seed, &cfg.tolerances)?;
            finish_report(&rep, run.out.as_deref().or(cfg.output.report.as_deref()))
        }
        Command::Example1(args) => {
            let cfg = args.config()?;
            let params = Example1Params {
                rho: cfg.rho,
                steps: cfg.steps,
                modes: cfg.modes,
                points: cfg.points,
            };
            let rep = scenario_example1(params, &cfg.tolerances)?;
            finish_report(&rep, args.out.as_deref().or(cfg.output.report.as_deref()))
        }
        Command::Roundtrip(args) => {
            let cfg = args.config()?;
            let rep = scenario_roundtrip(&cfg)?;
            finish_report(&rep, args.out.as_deref().or(cfg.output.report.as_deref()))
        }
        Command::PickT0 { candidates, run } => {
            let cfg = run.config()?;
            if let Some(&bad) = candidates.iter().find(|&&c| !(c > 0.0 && c < cfg.t_final)) {
                return Err(WorkbenchError::config("candidates", format!("{bad} is outside (0, T)")));
            }
            let op = cfg.operator()?;
            let g = cfg.source()?;
            let tol = cfg.tolerances.inverse();
            let ranked = pick_t0(&op, &g, cfg.rho, &candidates, &tol)?;
            for c in &ranked {
                eprintln!(
                    "t0 = {}: sign {} min scaled {:e} at k = {}, K0 {:?} -> {}",
                    c.t0,
                    if c.sign_ok { "ok" } else { "violated" },
                    c.min_scaled,
                    c.argmin,
                    c.degenerate,
                    if c.accepted { "accepted" } else { "rejected" }
                );
            }
            if let (Some(path), Some(best)) = (&cfg.output.plot, ranked.first()) {
                let scan = InverseProblem::new(&op, &g, cfg.rho, best.t0)?.lower_bound_scan(&tol)?;
                emit_plotdata(&PlotData::Scan(&scan), path)?;
            }
            let mut text = serde_json::to_string_pretty(&ranked).expect("plain data");
            text.push('\n');
            emit(run.out.as_deref(), &text)?;
            Ok(if ranked.iter().any(|c| c.accepted) { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
