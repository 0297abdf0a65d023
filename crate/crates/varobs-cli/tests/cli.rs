use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use varobs::data::{generate, DatasetConfig, Family, QubitInput, Sampler, TrainingSet};
use varobs::regression::TrainedModel;
use varobs_cli::{exit_code, EXIT_NUMERIC, EXIT_USAGE};

fn varobs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_varobs")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn report_matches_golden_file() {
    let out = varobs(&[
        "report",
        "--model",
        path_str(&golden("ad_model.json")),
        "--family",
        "ad",
        "--points",
        "5",
        "--mu",
        "10",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "alpha,pred,dpred,var,cfi,qfi,ccrb,qcrb");
    let (header, rows) = read_csv(&text);
    let (golden_header, golden_rows) = read_csv(&std::fs::read_to_string(golden("ad_report.csv")).unwrap());
    assert_eq!(header, golden_header);
    assert_eq!(rows.len(), golden_rows.len());
    for (r, g) in rows.iter().zip(&golden_rows) {
        for (a, b) in r.iter().zip(g) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn local_optimal_report_attains_the_quantum_bound() {
    let out = varobs(&["report", "--local-optimal", "--family", "depolarizing", "--points", "7"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 7);
    for r in rows {
        let (var, qfi) = (r[3], r[5]);
        assert!((var - 1.0 / qfi).abs() < 1e-6, "var {var} vs 1/qfi {}", 1.0 / qfi);
    }
}

#[test]
fn generated_dataset_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("d.json");
    let out = varobs(&["generate", "--family", "ad", "--count", "5", "--seed", "42", "--out", path_str(&file)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let loaded = TrainingSet::from_json(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let expected = generate(
        &DatasetConfig::new(Family::AmplitudeDamping { input: QubitInput::Plus }, Sampler::Uniform { count: 5 }).seed(42),
    )
    .unwrap();
    assert_eq!(loaded.len(), 5);
    for (a, b) in loaded.entries.iter().zip(&expected.entries) {
        assert!((0.0..=1.0).contains(&a.label));
        assert!((a.label - b.label).abs() <= 1e-15);
        let diff = a.state.matrix() - b.state.matrix();
        assert!(diff.iter().all(|z| z.norm() <= 1e-15));
    }
}

#[test]
fn ising_ground_states_are_generated() {
    let out = varobs(&["generate", "--family", "ising", "--n", "8", "--count", "10", "--h-min", "0.05", "--h-max", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let set = TrainingSet::from_json_bytes(&out.stdout).unwrap();
    assert_eq!(set.len(), 10);
    assert_eq!(set.n_qubits(), 8);
    assert!((set.entries[0].label - 0.05).abs() < 1e-15 && (set.entries[9].label - 2.0).abs() < 1e-15);
}

#[test]
fn training_writes_reproducible_models() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.json");
    assert_eq!(code(&varobs(&["generate", "--family", "bell", "--count", "6", "--seed", "1", "--out", path_str(&data)])), 0);

    let train = |name: &str, extra: &[&str]| -> (TrainedModel, String) {
        let model = dir.path().join(format!("{name}.json"));
        let mut args = vec!["train", "--data", path_str(&data), "--layers", "1", "--max-iter", "15", "--seed", "7"];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--out", path_str(&model)]);
        let out = varobs(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let history = std::fs::read_to_string(model.with_extension("history.csv")).unwrap();
        (TrainedModel::from_json(&std::fs::read_to_string(&model).unwrap()).unwrap(), history)
    };

    let (a, ha) = train("a", &["--shots", "64"]);
    let (b, hb) = train("b", &["--shots", "64"]);
    assert_eq!(ha, hb);
    assert_eq!(a.theta_star, b.theta_star);
    assert!(ha.starts_with("iteration,cost,evaluations\n"));
    let evaluations: Vec<u64> = ha.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(evaluations.windows(2).all(|w| w[0] < w[1]));

    let (n, _) = train("n", &["--m", "1", "--naimark", "1"]);
    assert_eq!(n.spec.n_qubits, 2);
    assert_eq!(n.spec.extended_qubits(), 3);
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.json");
    assert_eq!(code(&varobs(&["generate", "--family", "ad", "--count", "3", "--out", path_str(&data)])), 0);

    assert_eq!(code(&varobs(&["generate", "--family", "bogus"])), 2);
    assert_eq!(code(&varobs(&["frobnicate"])), 2);
    assert_eq!(code(&varobs(&["train", "--data", path_str(&dir.path().join("missing.json"))])), 2);
    assert_eq!(code(&varobs(&["reproduce", "no-such-preset"])), 2);
    assert_eq!(code(&varobs(&["reproduce", "neg-Tsweep"])), 2);
    let model = golden("ad_model.json");
    assert_eq!(code(&varobs(&["report", "--model", path_str(&model), "--family", "ad", "--points", "0"])), 2);
    // the data file is a dataset, not a model
    assert_eq!(code(&varobs(&["report", "--model", path_str(&data), "--family", "ad"])), 2);
    // an infinite loss weight diverges on the first evaluation
    assert_eq!(code(&varobs(&["train", "--data", path_str(&data), "--w-ls", "1e308", "--max-iter", "2"])), 3);

    let out = varobs(&["reproduce", "closed-forms", "--out-dir", path_str(&dir.path().join("bundle"))]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8(out.stdout).unwrap().lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn numeric_failures_map_to_exit_three() {
    let numeric = [
        varobs::Error::EigenFailure,
        varobs::Error::Singular { null_dim: 1 },
        varobs::Error::Degenerate("gap".into()),
    ];
    for e in numeric {
        assert_eq!(exit_code(&anyhow::Error::new(e)), EXIT_NUMERIC);
    }
    let wrapped = anyhow::Error::new(varobs::Error::EigenFailure).context("while reporting");
    assert_eq!(exit_code(&wrapped), EXIT_NUMERIC);
    assert_eq!(exit_code(&anyhow::Error::new(varobs::Error::InvalidArgument("x".into()))), EXIT_USAGE);
    assert_eq!(exit_code(&anyhow::anyhow!("io")), EXIT_USAGE);
}
