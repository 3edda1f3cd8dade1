use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn carebench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carebench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn run_toy(dir: &Path, extra: &[&str]) -> Output {
    let config = fixture("toy.toml");
    let mut args = vec![
        "run",
        config.to_str().unwrap(),
        "--output-dir",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    carebench(&args)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("experiment.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn help_and_usage_errors() {
    let o = carebench(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("select"));
    assert_eq!(carebench(&[]).status.code(), Some(1));
    assert_eq!(carebench(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        carebench(&["report", "x.json", "--format", "pdf"]).status.code(),
        Some(1)
    );
}

#[test]
fn run_writes_both_reports_with_table_layout() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_toy(dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let md = fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.contains(
        "| Metric | Random Forest | Support Vector Machine | Naïve Bayes | Lazy LWL | Hoeffding tree |"
    ));
    for row in [
        "| Accuracy |",
        "| RMSE |",
        "| ROC |",
        "## Evaluation 2",
        "## Feature selection",
    ] {
        assert!(md.contains(row), "missing {row}");
    }
    let names: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn report_json_matches_the_shipped_schema() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_toy(dir.path(), &[]).status.code(), Some(0));
    let schema: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/report.schema.json")).unwrap(),
    )
    .unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&report).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:#?}");
    assert_eq!(
        report["schema_version"],
        carebench::evaluation::REPORT_SCHEMA_VERSION
    );
}

#[test]
fn same_seed_same_bytes_and_seed_flag_overrides() {
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    assert_eq!(run_toy(a.path(), &[]).status.code(), Some(0));
    assert_eq!(run_toy(b.path(), &["--threads", "3"]).status.code(), Some(0));
    assert_eq!(run_toy(c.path(), &["--seed", "7"]).status.code(), Some(0));
    let read = |d: &Path| fs::read(d.join("report.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn report_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_toy(dir.path(), &[]).status.code(), Some(0));
    let json = dir.path().join("report.json");
    let original = fs::read_to_string(dir.path().join("report.md")).unwrap();

    let o = carebench(&["report", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), original);

    let again = tempfile::tempdir().unwrap();
    let o = carebench(&[
        "report",
        json.to_str().unwrap(),
        "--output-dir",
        again.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(again.path().join("report.md")).unwrap(),
        original
    );

    let o = carebench(&["report", json.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("phase,model,algorithm,n_predictors,accuracy,rmse,weighted_auc\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 5);
}

#[test]
fn bad_report_json_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_toy(dir.path(), &[]).status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();

    let truncated = dir.path().join("truncated.json");
    fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    let o = carebench(&["report", truncated.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());

    let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
    value["evaluation_1"]["k"] = serde_json::json!("ten");
    let mistyped = dir.path().join("mistyped.json");
    fs::write(&mistyped, value.to_string()).unwrap();
    let o = carebench(&["report", mistyped.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("evaluation_1.k"), "{}", stderr(&o));

    let o = carebench(&["report", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_model_report_has_one_column() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("planted.csv");
    let config = write_config(
        dir.path(),
        &format!(
            "[dataset]\npath = {:?}\nclass_column = \"class\"\n[protocol]\nk = 4\nttest_repeats = 1\n\
             [[models]]\nname = \"NB\"\nalgorithm = \"nb\"\n[output]\ndirectory = \"out\"\n",
            data.to_str().unwrap()
        ),
    );
    let o = carebench(&["run", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let md = fs::read_to_string(dir.path().join("out/report.md")).unwrap();
    assert!(md.contains("| Metric | NB |\n| --- | --- |\n"));
}

#[test]
fn missing_dataset_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[dataset]\npath = \"absent.csv\"\n[[models]]\nname = \"NB\"\nalgorithm = \"nb\"\n\
         [output]\ndirectory = \"out\"\n",
    );
    let o = carebench(&["run", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("absent.csv"), "{}", stderr(&o));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[dataset]\npath = \"d.csv\"\n[[models]]\nname = \"x\"\nalgorithm = \"knn\"\n", "algorithm"),
        (
            "[dataset]\npath = \"d.csv\"\n[[models]]\nname = \"x\"\nalgorithm = \"nb\"\n\
             [[models]]\nname = \"x\"\nalgorithm = \"rf\"\n",
            "models[1].name",
        ),
        (
            "[dataset]\npath = \"d.csv\"\n[[models]]\nname = \"x\"\nalgorithm = \"rf\"\nparams = { n_tree = 5 }\n",
            "models[0].params",
        ),
        ("[dataset]\npath = \"d.csv\"\n[protocol]\nk = 1\n[[models]]\nname = \"x\"\nalgorithm = \"nb\"\n", "protocol"),
    ];
    for (body, field) in cases {
        let config = write_config(dir.path(), body);
        let o = carebench(&["run", config.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{body}");
        assert!(stderr(&o).contains(field), "{field}: {}", stderr(&o));
    }
    let o = carebench(&["run", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn select_needs_a_selection_block() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("noise.csv");
    let config = write_config(
        dir.path(),
        &format!(
            "[dataset]\npath = {:?}\n[[models]]\nname = \"NB\"\nalgorithm = \"nb\"\n",
            data.to_str().unwrap()
        ),
    );
    let o = carebench(&["select", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("selection"), "{}", stderr(&o));
}

#[test]
fn select_on_the_noise_fixture_confirms_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("noise_select.toml");
    let o = carebench(&[
        "select",
        config.to_str().unwrap(),
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "confirmed: 0 / 20 (reduction 100.0%)\n");
    let selection: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("selection.json")).unwrap()).unwrap();
    assert_eq!(selection["attributes"].as_array().unwrap().len(), 20);
}

#[test]
fn nothing_confirmed_still_reports_the_first_phase() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("noise.csv");
    let config = write_config(
        dir.path(),
        &format!(
            "[dataset]\npath = {:?}\n[protocol]\nk = 5\nttest_repeats = 1\n\
             [[models]]\nname = \"NB\"\nalgorithm = \"nb\"\n[selection]\nmax_runs = 20\n\
             [output]\ndirectory = \"out\"\n",
            data.to_str().unwrap()
        ),
    );
    let o = carebench(&["run", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap()).unwrap();
    assert!(report.get("evaluation_2").is_none());
    assert!(report["selection"]["error"].is_string());
}
