use std::path::PathBuf;
use std::process::{Command, Output};

use trailblazer::mdp::GapProfile;
use trailblazer_bench::{parse_profile, read_report, BenchError, MdpSource, Model, ModelSpec, RandomSource};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trailblazer-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn random_source_syntax() {
    let r: RandomSource = "7, 2,3,10".parse().unwrap();
    assert_eq!(
        r,
        RandomSource {
            seed: 7,
            actions: 2,
            branching: 3,
            n_states: 10
        }
    );
    for bad in ["1,2,3", "1,2,3,4,5", "a,2,3,4", ""] {
        assert!(bad.parse::<RandomSource>().is_err(), "{bad}");
    }
}

#[test]
fn profile_syntax() {
    assert_eq!(parse_profile("bounded_gap(0.3)").unwrap(), GapProfile::BoundedGap { min_gap: 0.3 });
    assert_eq!(parse_profile("bounded_gap:0.3").unwrap(), GapProfile::BoundedGap { min_gap: 0.3 });
    assert_eq!(parse_profile(" power_law(3, 1) ").unwrap(), GapProfile::PowerLaw { b: 3.0, c: 1.0 });
    for bad in ["bounded_gap", "bounded_gap(0.3", "power_law(3)", "gauss(1)", "bounded_gap(x)"] {
        assert!(parse_profile(bad).is_err(), "{bad}");
    }
}

#[test]
fn model_spec_builds() {
    let toy = ModelSpec::new(MdpSource::Toy(GapProfile::BoundedGap { min_gap: 0.3 })).with_gamma(0.3);
    assert!(matches!(toy.build().unwrap(), Model::Toy(_)));
    assert_eq!(toy.build().unwrap().gamma(), 0.3);
    let bad_toy = ModelSpec::new(MdpSource::Toy(GapProfile::BoundedGap { min_gap: 1.5 }));
    assert!(matches!(bad_toy.build(), Err(BenchError::Invalid(_))));

    let file = ModelSpec::new(MdpSource::File(data("chain.json")));
    let model = file.build().unwrap();
    assert_eq!(model.gamma(), 0.9);
    assert!(model.truth(0.5).is_some());
    let clash = file.with_gamma(0.5);
    assert_eq!(clash.build().err().map(|e| e.exit_code()), Some(2));
}

#[test]
fn plan_prints_a_record() {
    let path = data("two_arms.json");
    let out = bench(&["plan", "--mdp", path.to_str().unwrap(), "--eps", "0.5", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let record: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(record["seed"], 3);
    assert_eq!(record["success"], true);
    assert!(record["oracle_calls"].as_u64().unwrap() > 0);
}

#[test]
fn exit_codes() {
    let path = data("two_arms.json");
    let file = path.to_str().unwrap();
    // budget exceeded
    assert_eq!(code(&bench(&["plan", "--mdp", file, "--eps", "0.5", "--cap", "10"])), 3);
    // validation: N > S, negative ε, missing file, unknown profile, no source
    assert_eq!(code(&bench(&["plan", "--random", "1,2,6,5", "--eps", "1.5"])), 2);
    assert_eq!(code(&bench(&["plan", "--mdp", file, "--eps", "-1"])), 2);
    assert_eq!(code(&bench(&["plan", "--mdp", "/nonexistent/mdp.json"])), 2);
    assert_eq!(code(&bench(&["plan", "--toy", "gauss(1)"])), 2);
    assert_eq!(code(&bench(&["plan", "--eps", "0.5"])), 2);
    // a single ε cannot be fitted
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("one.csv");
    let out = bench(&["bench", "--mdp", file, "--eps", "0.5", "--trials", "2", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&bench(&["fit", report.to_str().unwrap()])), 2);
}

#[test]
fn bench_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("mc.json");
    let chain = data("chain.json");
    let out = bench(&[
        "bench",
        "--mdp",
        chain.to_str().unwrap(),
        "--planner",
        "monte-carlo",
        "--eps",
        "0.8,0.6,0.4,0.3",
        "--trials",
        "3",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read_report(&report, None).unwrap().len(), 12);
    let out = bench(&["fit", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let fit: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    // plain Monte-Carlo evaluation needs on the order of 1/ε² samples
    let slope = fit["slope"].as_f64().unwrap();
    assert!((1.5..=3.0).contains(&slope), "{slope}");
}

#[test]
fn analyze_reports_difficulty() {
    let out = bench(&["analyze", "--random", "1,2,2,5", "--h-cap", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["near_optimal_sizes"].as_array().unwrap().len(), 3);
    assert!(report["kappa"]["kappa"].as_f64().unwrap() >= 1.0);
    // the toy has no enumerable tree
    assert_eq!(code(&bench(&["analyze", "--toy", "bounded_gap(0.3)"])), 2);
}
