//! Acceptance gate: one line per criterion, non-zero exit if any fails.
//! Constants marked as oracles come from `crates/core/tests/data/oracles.py`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use subdiff_core::forward::{residual_check, solve_forward, SourceProfile};
use subdiff_core::fraccalc::TimeGrid;
use subdiff_core::inverse::{pick_t0, InverseProblem, InverseTolerances, Verdict};
use subdiff_core::mlf::{mittag_leffler, ml_classical};
use subdiff_core::special::rgamma;
use subdiff_core::spectral::{dirichlet_laplacian_1d, CoefVector};
use subdiff_workbench::config::{RunConfig, SourceChoice, Tolerances};
use subdiff_workbench::profiles::BuiltinProfile;
use subdiff_workbench::scenario::{scenario_example1, scenario_roundtrip, Example1Params};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn constant(m: usize) -> SourceProfile {
    SourceProfile::from_fn_c1(TimeGrid::new(1.0, m).unwrap(), |_| 1.0, |_| 0.0).unwrap()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn example_constants() -> Outcome {
    let g = BuiltinProfile::Example1Unit;
    let g0 = g.value(0.5, 0.0);
    ensure(g0 == 0.25, || format!("g(0) = {g0}"))?;
    let sp = PI.sqrt();
    let closed = (16.0 + 3.0 * sp - 24.0) / (12.0 * sp);
    let g1 = g.value(0.5, 1.0);
    // oracle: mpmath, 20 digits
    ensure((closed - -0.126_126_389_031_837_5).abs() < 1e-15, || {
        format!("closed form {closed}")
    })?;
    ensure((g1 - closed).abs() <= 1e-10, || {
        format!("g(1) = {g1}, closed form {closed}")
    })?;
    Ok(format!("g(0) = {g0}, g(1) = {g1:.12}"))
}

fn example_degeneracy() -> Outcome {
    let g = BuiltinProfile::Example1
        .build(0.5, TimeGrid::new(1.0, 4096).map_err(err)?)
        .map_err(err)?;
    let op = dirichlet_laplacian_1d(8, 64).map_err(err)?;
    let problem = InverseProblem::new(&op, &g, 0.5, 0.5).map_err(err)?;
    let table = problem.delta_table().map_err(err)?;
    let first = table[0].scaled;
    ensure(first <= 1e-5, || format!("lambda_1|delta| = {first:e}"))?;
    let rest = table[1..].iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
    ensure(rest >= 0.01, || format!("min over k=2..8 = {rest:e}"))?;
    let partition = problem.classify(&InverseTolerances::default()).map_err(err)?;
    ensure(partition.degenerate == [1], || {
        format!("K0 = {:?}", partition.degenerate)
    })?;
    Ok(format!(
        "lambda_1|delta| = {first:.3e}, min k>=2 = {rest:.4}, K0 = {{1}}"
    ))
}

fn non_uniqueness() -> Outcome {
    let rho = 0.5;
    let g = BuiltinProfile::Example1
        .build(rho, TimeGrid::new(1.0, 2048).map_err(err)?)
        .map_err(err)?;
    let op = dirichlet_laplacian_1d(8, 64).map_err(err)?;
    let problem = InverseProblem::new(&op, &g, rho, 0.5).map_err(err)?;
    let res = problem
        .solve(&CoefVector::zeros(8), &BTreeMap::new(), &InverseTolerances::default())
        .map_err(err)?;
    ensure(res.verdict == Verdict::NonUniqueFamily, || {
        format!("verdict {:?}", res.verdict)
    })?;
    let omega: Vec<f64> = g.grid().nodes().map(|t| (t - 0.5).powi(2)).collect();
    let r = residual_check(
        &[op.lambda(1)],
        &[omega],
        &CoefVector::new(vec![1.0]).map_err(err)?,
        &g,
        rho,
    )
    .map_err(err)?;
    ensure(r.pde_residual <= 5e-3, || format!("pde residual {:e}", r.pde_residual))?;
    ensure(r.nonlocal_defect <= 1e-8, || {
        format!("non-local defect {:e}", r.nonlocal_defect)
    })?;

    let params = Example1Params {
        rho,
        steps: 2048,
        modes: 8,
        points: 64,
    };
    let rep = scenario_example1(params, &Tolerances::default()).map_err(err)?;
    let failed: Vec<String> = rep.failures().map(|c| c.to_string()).collect();
    ensure(failed.is_empty(), || format!("scenario checks failed: {failed:?}"))?;
    Ok(format!(
        "NonUniqueFamily, pair residual {:.2e}, defect {:e}, scenario {}/{} checks",
        r.pde_residual,
        r.nonlocal_defect,
        rep.checks.len(),
        rep.checks.len()
    ))
}

fn round_trip(rho: f64) -> Outcome {
    let cfg = RunConfig {
        rho,
        t0: 0.5,
        steps: 4096,
        modes: 16,
        points: 128,
        g: SourceChoice::Builtin(BuiltinProfile::TwoPlusSin),
        ..RunConfig::default()
    };
    let rep = scenario_roundtrip(&cfg).map_err(err)?;
    let study = rep.table("error vs M").ok_or("missing study table")?;
    let ms: Vec<f64> = study.rows.iter().map(|r| r[0]).collect();
    let errors: Vec<f64> = study.rows.iter().map(|r| r[1]).collect();
    ensure(ms == [512.0, 1024.0, 2048.0, 4096.0], || format!("ladder {ms:?}"))?;
    ensure(errors.windows(2).all(|w| w[1] < w[0]), || {
        format!("not monotone: {errors:?}")
    })?;
    ensure(errors[3] <= 1e-5, || format!("final error {:e}", errors[3]))?;
    let failed: Vec<String> = rep.failures().map(|c| c.to_string()).collect();
    ensure(failed.is_empty(), || format!("scenario checks failed: {failed:?}"))?;
    let shown: Vec<String> = errors.iter().map(|e| format!("{e:.1e}")).collect();
    Ok(format!("rho = {rho}: errors {}", shown.join(" > ")))
}

fn steady_state() -> Outcome {
    let n = 16;
    let op = dirichlet_laplacian_1d(n, 8 * n).map_err(err)?;
    let g = constant(512);
    let f = CoefVector::new((1..=n).map(|k| 1.0 + 0.5 * (k as f64).sin()).collect()).map_err(err)?;
    let psi = CoefVector::new((1..=n).map(|k| (k as f64).cos() / (k * k) as f64).collect()).map_err(err)?;
    let (mut fwd, mut inv): (f64, f64) = (0.0, 0.0);
    let rhos = [0.1, 0.25, 0.5, 0.75, 0.9, 1.0];
    for rho in rhos {
        let sol = solve_forward(&op, &f, &g, rho, g.grid()).map_err(err)?;
        for m in &sol.modes {
            let want = f[m.k - 1] / m.lambda;
            fwd = m.u.iter().map(|u| (u - want).abs()).fold(fwd, f64::max);
        }
        let res = InverseProblem::new(&op, &g, rho, 0.3)
            .and_then(|p| p.solve(&psi, &BTreeMap::new(), &InverseTolerances::default()))
            .map_err(err)?;
        for k in 1..=n {
            inv = inv.max((res.f[k - 1] - op.lambda(k) * psi[k - 1]).abs());
        }
    }
    ensure(fwd <= 1e-8, || format!("forward deviation {fwd:e}"))?;
    ensure(inv <= 1e-8, || format!("inverse deviation {inv:e}"))?;
    Ok(format!(
        "rho in {rhos:?}: |u - A^-1 f| = {fwd:.1e}, |f - lambda psi| = {inv:.1e}"
    ))
}

fn ml_oracles() -> Outcome {
    let xs: Vec<f64> = std::iter::once(0.0).chain(log_grid(1e-3, 50.0, 99)).collect();
    let exp_err = xs
        .iter()
        .map(|&x| mittag_leffler(1.0, 1.0, x).map(|v| (v - (-x).exp()).abs()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?
        .into_iter()
        .fold(0.0, f64::max);
    ensure(exp_err <= 1e-10, || format!("exp reduction error {exp_err:e}"))?;
    // oracle: e·erfc(1), mpmath
    let half = mittag_leffler(0.5, 1.0, 1.0).map_err(err)?;
    ensure((half - 0.427_583_576_155_807).abs() <= 1e-9, || {
        format!("E_1/2(-1) = {half}")
    })?;

    let mut worst_growth: f64 = 0.0;
    for i in 1..=10 {
        let rho = i as f64 / 10.0;
        let mut prev = 1.0;
        for x in log_grid(1e-3, 1e3, 300) {
            let v = ml_classical(rho, x).map_err(err)?;
            let ok = (v > 0.0 && v < prev) || (v == 0.0 && prev < 1e-300);
            ensure(ok, || format!("rho = {rho}: not decreasing at x = {x}"))?;
            prev = v;
        }
        for mu in [1.0, rho, 1.0 + rho] {
            let scaled: Vec<f64> = log_grid(10.0, 1e4, 120)
                .into_iter()
                .map(|x| mittag_leffler(rho, mu, x).map(|e| x * x * (e - rgamma(mu - rho) / x).abs()))
                .collect::<Result<_, _>>()
                .map_err(err)?;
            let first = scaled[..40].iter().cloned().fold(0.0, f64::max);
            let rest = scaled[40..].iter().cloned().fold(0.0, f64::max);
            ensure(first.is_finite() && first < 10.0, || {
                format!("rho = {rho}, mu = {mu}: first decade {first}")
            })?;
            worst_growth = worst_growth.max(rest / first.max(1e-6));
        }
    }
    ensure(worst_growth <= 1.5, || format!("x^2 deviation grows by {worst_growth}"))?;
    Ok(format!(
        "exp error {exp_err:.1e}, E_1/2(-1) = {half:.10}, deviation growth <= {worst_growth:.3}"
    ))
}

fn scan_closed_form() -> Outcome {
    let op = dirichlet_laplacian_1d(64, 512).map_err(err)?;
    let g = constant(256);
    // oracle: 1 - E_ρ(-1) from the mpmath series
    let oracle = [
        (0.25, 0.536_147_239_198_286_7),
        (0.5, 0.572_416_423_844_193),
        (0.75, 0.606_891_697_184_245_9),
        (1.0, 0.632_120_558_828_557_7),
    ];
    let mut mins = Vec::new();
    for (rho, want) in oracle {
        let scan = InverseProblem::new(&op, &g, rho, 0.5)
            .and_then(|p| p.lower_bound_scan(&InverseTolerances::default()))
            .map_err(err)?;
        ensure((scan.min_scaled - want).abs() <= 1e-8 && scan.min_scaled > 0.0, || {
            format!("rho = {rho}: min {} vs {want}", scan.min_scaled)
        })?;
        mins.push(format!("{:.10}", scan.min_scaled));
    }
    Ok(format!("min_k lambda_k|delta| = {}", mins.join(", ")))
}

fn uniqueness_mirror() -> Outcome {
    let op = dirichlet_laplacian_1d(16, 128).map_err(err)?;
    let profiles = [
        BuiltinProfile::Const,
        BuiltinProfile::TwoPlusSin,
        BuiltinProfile::OnePlusT,
    ];
    for (p, rho) in profiles.into_iter().zip([0.3, 0.7, 1.0]) {
        let g = p.build(rho, TimeGrid::new(1.0, 256).map_err(err)?).map_err(err)?;
        let res = InverseProblem::new(&op, &g, rho, 0.4)
            .and_then(|pr| pr.solve(&CoefVector::zeros(16), &BTreeMap::new(), &InverseTolerances::default()))
            .map_err(err)?;
        let nonzero = res
            .f
            .as_slice()
            .iter()
            .chain(res.u.modes.iter().flat_map(|m| &m.u))
            .filter(|v| v.to_bits() != 0)
            .count();
        ensure(nonzero == 0 && res.verdict == Verdict::Unique, || {
            format!("{p}: {nonzero} nonzero entries")
        })?;
    }
    Ok("f and u bitwise zero for const, two-plus-sin, one-plus-t".into())
}

fn amplification() -> Outcome {
    let n = 32;
    let op = dirichlet_laplacian_1d(n, 8 * n).map_err(err)?;
    let g = constant(512);
    let psi = CoefVector::new((1..=n).map(|k| 1.0 / (k * k * k) as f64).collect()).map_err(err)?;
    let res = InverseProblem::new(&op, &g, 0.5, 0.5)
        .and_then(|p| p.solve(&psi, &BTreeMap::new(), &InverseTolerances::default()))
        .map_err(err)?;
    ensure(res.amplification.len() == n, || {
        format!("{} factors", res.amplification.len())
    })?;
    let mut worst: f64 = 0.0;
    for a in &res.amplification {
        worst = worst.max((a.factor - (a.k * a.k) as f64).abs());
    }
    ensure(worst <= 1e-8, || format!("|factor - k^2| = {worst:e}"))?;
    Ok(format!(
        "max_k |factor - k^2| = {worst:.1e}, growth exponent {:.6}",
        res.growth_exponent.unwrap_or(f64::NAN)
    ))
}

fn t0_selection() -> Outcome {
    let op = dirichlet_laplacian_1d(16, 128).map_err(err)?;
    let g = BuiltinProfile::TMinusPoint3
        .build(1.0, TimeGrid::new(1.0, 1024).map_err(err)?)
        .map_err(err)?;
    let ranked = pick_t0(&op, &g, 1.0, &[0.1, 0.65], &InverseTolerances::default()).map_err(err)?;
    let at = |t0: f64| {
        ranked
            .iter()
            .find(|c| c.t0 == t0)
            .ok_or(format!("missing candidate {t0}"))
    };
    let bad = at(0.1)?;
    let good = at(0.65)?;
    ensure(!bad.sign_ok && !bad.accepted, || {
        format!("t0 = 0.1 not flagged: {bad:?}")
    })?;
    ensure(good.sign_ok && good.accepted && good.min_scaled > 0.0, || {
        format!("t0 = 0.65 rejected: {good:?}")
    })?;
    Ok(format!("0.1 flagged, 0.65 accepted with min {:.4}", good.min_scaled))
}

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Duration,
    run: Box<dyn Fn() -> Outcome>,
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let criteria = vec![
        Criterion {
            id: 1,
            name: "example constants",
            limit: secs(1),
            run: Box::new(example_constants),
        },
        Criterion {
            id: 2,
            name: "example degeneracy",
            limit: secs(10),
            run: Box::new(example_degeneracy),
        },
        Criterion {
            id: 3,
            name: "non-uniqueness",
            limit: secs(30),
            run: Box::new(non_uniqueness),
        },
        Criterion {
            id: 4,
            name: "round trip",
            limit: secs(180),
            run: Box::new(|| {
                let mut lines = Vec::new();
                for rho in [0.4, 0.7, 1.0] {
                    let start = Instant::now();
                    let line = round_trip(rho)?;
                    let took = start.elapsed();
                    ensure(took < Duration::from_secs(60), || {
                        format!("rho = {rho} took {took:.1?}")
                    })?;
                    lines.push(format!("{line} ({took:.1?})"));
                }
                Ok(lines.join("; "))
            }),
        },
        Criterion {
            id: 5,
            name: "steady state",
            limit: secs(5),
            run: Box::new(steady_state),
        },
        Criterion {
            id: 6,
            name: "Mittag-Leffler oracles",
            limit: secs(5),
            run: Box::new(ml_oracles),
        },
        Criterion {
            id: 7,
            name: "constant-source scan",
            limit: secs(10),
            run: Box::new(scan_closed_form),
        },
        Criterion {
            id: 8,
            name: "uniqueness mirror",
            limit: secs(1),
            run: Box::new(uniqueness_mirror),
        },
        Criterion {
            id: 9,
            name: "amplification",
            limit: secs(5),
            run: Box::new(amplification),
        },
        Criterion {
            id: 10,
            name: "t0 selection",
            limit: secs(5),
            run: Box::new(t0_selection),
        },
    ];

    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| (c.run)())).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if took <= c.limit {
                Ok(detail)
            } else {
                Err(format!("{detail}; runtime {took:.2?} over {:?}", c.limit))
            }
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} {}: PASS [{took:.2?}] {detail}", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {}: FAIL [{took:.2?}] {why}", c.id, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
