use std::process::Command;

use germdyn::cli::report::AnalysisReport;
use germdyn::cli::{parse_germ_spec, run_pipeline, run_stages, Stage, REPORT_SCHEMA};
use germdyn::curve::InnerClass;
use germdyn::orbit::{CaptureStatus, OrbitStatus};
use germdyn::reduce::DirectionKind;
use germdyn::stable::StableSetKind;

const NODE_SADDLE: &str = "F1 = x - x^3\nF2 = y*(1 - x)\norder = 16\nprobes = 6@0.05\n";
const CUSP: &str = "F1 = 0.25*x\nF2 = 0.125*y\ncurve.gamma = (s^2, s^3)\norder = 12\n";
const INVOLUTION: &str = "F1 = x\nF2 = -y\ncurve.gamma = (s^2, s^3)\norder = 12\n";

fn validate(json: &str) {
    let schema: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    let msgs: Vec<String> = match compiled.validate(&v) {
        Ok(()) => Vec::new(),
        Err(errs) => errs.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "schema violations: {msgs:?}");
}

#[test]
fn node_saddle_pipeline() {
    let r = run_pipeline(&parse_germ_spec(NODE_SADDLE).unwrap()).unwrap();
    assert_eq!(r.classification, Some(InnerClass::Parabolic));
    let red = r.reduced.as_ref().unwrap();
    assert_eq!((red.k, red.p), (1, 1));
    let kinds: Vec<_> = r.directions.iter().map(|d| (d.xi.re.round() as i32, d.kind)).collect();
    assert_eq!(kinds, vec![(1, DirectionKind::Node), (-1, DirectionKind::Saddle)]);
    let sets: Vec<_> = r.stable_sets.iter().map(|s| s.kind).collect();
    assert_eq!(sets, vec![StableSetKind::NodeBasin, StableSetKind::ParabolicCurve]);
    let rows = &r.probes.as_ref().unwrap().rows;
    for row in rows.iter().filter(|row| row.source.starts_with("set:")) {
        let want: usize = row.source[4..].parse().unwrap();
        assert_eq!(row.status, OrbitStatus::ConvergedToOrigin);
        assert!(matches!(row.capture.status, CaptureStatus::Assigned { set, .. } if set == want), "{row:?}");
    }
    for row in rows.iter().filter(|row| row.status == OrbitStatus::ConvergedToOrigin) {
        assert!(!matches!(row.capture.status, CaptureStatus::NotConverging { .. }));
    }
    assert!(r.warnings.is_empty(), "{:?}", r.warnings);
}

#[test]
fn hyperbolic_cusp_pipeline() {
    let r = run_pipeline(&parse_germ_spec(CUSP).unwrap()).unwrap();
    assert_eq!(r.classification, Some(InnerClass::HyperbolicAttracting));
    let theta = &r.restriction.as_ref().unwrap().theta;
    assert_eq!(theta[1].re, 0.5);
    let cusp = r.hyperbolic.as_ref().unwrap().check.cusp.clone().unwrap();
    assert_eq!((cusp.q, cusp.p), (3, 2));
    assert_eq!(cusp.power_residual, 0.0);
    assert!(r.stable_sets.is_empty());
}

#[test]
fn rationally_neutral_wrapper() {
    let r = run_pipeline(&parse_germ_spec(INVOLUTION).unwrap()).unwrap();
    assert_eq!(r.classification, Some(InnerClass::RationallyNeutral(2)));
    assert_eq!(r.wrap.as_ref().unwrap().n, 2);
    assert!(r.stable_sets.is_empty());
    assert!(r.warnings.iter().any(|w| w.stage == "reduce" && w.message.contains("identity")), "{:?}", r.warnings);
}

#[test]
fn reports_validate_and_round_trip() {
    for (text, stage) in [
        (NODE_SADDLE, Stage::Probe),
        (NODE_SADDLE, Stage::Classify),
        (NODE_SADDLE, Stage::Reduce),
        (NODE_SADDLE, Stage::Directions),
        (CUSP, Stage::Probe),
        (INVOLUTION, Stage::Probe),
        ("F1 = 0.6*x\nF2 = 0.3*y\nprobes = 4@0.1", Stage::Probe),
    ] {
        let out = run_stages(&parse_germ_spec(text).unwrap(), stage).unwrap();
        let json = serde_json::to_string(&out.report).unwrap();
        validate(&json);
        let back: AnalysisReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, out.report);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_germdyn"))
}

#[test]
fn binary_is_deterministic_and_writes_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("g.germ");
    std::fs::write(&spec, NODE_SADDLE).unwrap();
    let run = |extra: &[&str]| {
        let out = bin().arg("report").arg(&spec).args(extra).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let a = run(&["--seed", "3"]);
    let b = run(&["--seed", "3"]);
    assert_eq!(a, b);
    validate(std::str::from_utf8(&a).unwrap());
    let csv_dir = dir.path().join("plots");
    let json = dir.path().join("r.json");
    run(&["--seed", "3", "--json", json.to_str().unwrap(), "--csv-dir", csv_dir.to_str().unwrap()]);
    assert_eq!(std::fs::read(&json).unwrap(), a);
    let orbit = std::fs::read_to_string(csv_dir.join("orbit_0000.csv")).unwrap();
    assert_eq!(orbit.lines().next().unwrap(), "j,re_x,im_x,re_y,im_y");
    let cap = std::fs::read_to_string(csv_dir.join("capture.csv")).unwrap();
    assert_eq!(cap.lines().next().unwrap(), "id,source,status,direction,set,entry");
    assert!(csv_dir.join("regions.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.germ");
    std::fs::write(&bad, "F1 = x + y^2\n").unwrap();
    let out = bin().arg("classify").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let singular = dir.path().join("sing.germ");
    std::fs::write(&singular, "F1 = x^2\nF2 = y\n").unwrap();
    assert_eq!(bin().arg("classify").arg(&singular).output().unwrap().status.code(), Some(3));

    let good = dir.path().join("ok.germ");
    std::fs::write(&good, NODE_SADDLE).unwrap();
    let out = bin().args(["directions", "--order", "12", "--contact-m", "5"]).arg(&good).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: AnalysisReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.input.order, 12);
    assert_eq!(r.reduced.unwrap().m, 5);
    assert_eq!(r.directions.len(), 2);
    assert!(r.probes.is_none());
    assert_eq!(bin().args(["probe", "--probes", "3@"]).arg(&good).output().unwrap().status.code(), Some(2));
}
