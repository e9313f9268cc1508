use std::path::PathBuf;

use curvb_core::immersion::{parse_spec, ImmersionCase, INEQUALITY_TOL};

fn load(name: &str) -> ImmersionCase {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name);
    parse_spec(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

#[test]
fn shipped_specs_pass() {
    for name in [
        "cylinder.toml",
        "sphere-in-sphere.toml",
        "inline-great-sphere.toml",
        "inline-round-sphere.toml",
    ] {
        let reports = load(name).check_sampled(25, 1, INEQUALITY_TOL).unwrap();
        assert!(reports.iter().all(|r| r.pass), "{name}");
    }
}

#[test]
fn inline_great_sphere_is_an_eigenfunction() {
    for r in load("inline-great-sphere.toml").check_sampled(25, 2, INEQUALITY_TOL).unwrap() {
        assert!((r.delta_f_over_f - 1.0).abs() < 1e-4, "{r:?}");
        assert!((r.chen.lower - 1.0).abs() < 1e-6 && (r.chen.upper - 1.0).abs() < 1e-6);
    }
}

#[test]
fn inline_round_sphere_closes_the_interval() {
    for r in load("inline-round-sphere.toml").check_sampled(25, 3, INEQUALITY_TOL).unwrap() {
        assert!((r.delta_f_over_f - 0.25).abs() < 1e-6);
        assert!((r.chen.upper - r.chen.lower).abs() < 1e-6);
    }
}

#[test]
fn reports_serialize_round_trip() {
    let reports = load("cylinder.toml").check_sampled(3, 0, INEQUALITY_TOL).unwrap();
    let json = serde_json::to_string(&reports).unwrap();
    assert!(json.contains("\"H2\"") && json.contains("\"infK\""));
    let back: Vec<curvb_core::immersion::ExtrinsicReport> = serde_json::from_str(&json).unwrap();
    assert_eq!(back, reports);
}
