use subdiff_workbench::config::{RunConfig, SourceChoice, Tolerances};
use subdiff_workbench::output::{emit_plotdata, report_json, PlotData};
use subdiff_workbench::profiles::BuiltinProfile;
use subdiff_workbench::scenario::{scenario_lemma_suite, scenario_roundtrip};

#[test]
fn lemma_suite_passes_and_is_seed_deterministic() {
    let tol = Tolerances::default();
    let rhos = [0.25, 0.5, 1.0];
    let a = scenario_lemma_suite(&rhos, 3, &tol).unwrap();
    let failed: Vec<String> = a.failures().map(|c| c.to_string()).collect();
    assert!(failed.is_empty(), "{failed:?}");
    let b = scenario_lemma_suite(&rhos, 3, &tol).unwrap();
    assert_eq!(report_json(&a), report_json(&b));
    let c = scenario_lemma_suite(&rhos, 4, &tol).unwrap();
    assert_ne!(a.table("random profiles"), c.table("random profiles"));

    let scan = a.table("constant-source scan").unwrap();
    for row in &scan.rows {
        assert_eq!(row[2], 1.0, "argmin at the first mode");
        assert!((row[1] - row[3]).abs() <= 1e-8);
    }
}

#[test]
fn lemma_suite_rejects_bad_order() {
    assert!(scenario_lemma_suite(&[0.5, 1.5], 0, &Tolerances::default()).is_err());
}

#[test]
fn constant_source_round_trip_is_exact() {
    let cfg = RunConfig {
        rho: 0.35,
        t0: 0.3,
        steps: 1024,
        modes: 8,
        points: 64,
        g: SourceChoice::Builtin(BuiltinProfile::Const),
        seed: 5,
        ..RunConfig::default()
    };
    let rep = scenario_roundtrip(&cfg).unwrap();
    assert!(rep.passed(), "{rep}");
    let closed = rep.find("closed-form recovery, worst M").unwrap();
    assert!(closed.measured <= 1e-12);
    assert_eq!(rep.find("nonzero entries for zero data").unwrap().measured, 0.0);
    let by_n = rep.table("error vs N").unwrap();
    assert_eq!(
        by_n.rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
        vec![1.0, 2.0, 4.0, 8.0]
    );
}

#[test]
fn report_plot_data_round_trips() {
    let cfg = RunConfig {
        steps: 512,
        modes: 4,
        points: 32,
        g: SourceChoice::Builtin(BuiltinProfile::OnePlusT),
        ..RunConfig::default()
    };
    let rep = scenario_roundtrip(&cfg).unwrap();
    assert!(rep.passed(), "{rep}");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    emit_plotdata(&PlotData::Report(&rep), &path).unwrap();
    let back: subdiff_workbench::ScenarioReport =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, rep);
}
