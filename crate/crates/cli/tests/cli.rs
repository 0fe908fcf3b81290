use std::path::Path;
use std::process::{Command, Output};

fn imgmine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imgmine"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_step_pgm(path: &Path) {
    let mut bytes = b"P5\n16 16\n255\n".to_vec();
    bytes.extend((0..256).map(|i| if i % 16 < 8 { 40u8 } else { 200 }));
    std::fs::write(path, bytes).unwrap();
}

#[test]
fn preprocess_writes_output_and_stage_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let (input, output, dumps) = (
        dir.path().join("in.pgm"),
        dir.path().join("out.pgm"),
        dir.path().join("dumps"),
    );
    write_step_pgm(&input);
    let out = imgmine(&["preprocess", p(&input), p(&output), "--dump-dir", p(&dumps)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(std::fs::read(&output)
        .unwrap()
        .starts_with(b"P5\n16 16\n255\n"));
    let mut names: Vec<String> = std::fs::read_dir(&dumps)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4);
    for (i, n) in names.iter().enumerate() {
        assert!(n.starts_with(&format!("stage{}", i + 1)), "{n}");
    }
}

#[test]
fn preprocess_with_reference_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let (input, output, hist) = (
        dir.path().join("in.pgm"),
        dir.path().join("out.pgm"),
        dir.path().join("h.csv"),
    );
    write_step_pgm(&input);
    let mut csv = String::from("level,count\n");
    for level in 0..256 {
        csv.push_str(&format!("{level},{}\n", u32::from(level == 100)));
    }
    std::fs::write(&hist, csv).unwrap();
    let out = imgmine(&["preprocess", p(&input), p(&output), "--avg-hist", p(&hist)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn missing_input_exits_2() {
    let out = imgmine(&["preprocess", "/nonexistent/in.pgm", "/tmp/never.pgm"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no such input"));
}

#[test]
fn malformed_pgm_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.pgm");
    std::fs::write(&input, b"P2\n1 1\n255\n0").unwrap();
    let out = imgmine(&["preprocess", p(&input), p(&dir.path().join("o.pgm"))]);
    assert_eq!(code(&out), 3);
}

#[test]
fn mine_on_empty_tdb_writes_empty_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let tdb = dir.path().join("empty.csv");
    std::fs::write(&tdb, "tid,label,items\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = imgmine(&[
        "mine",
        "--tdb",
        p(&tdb),
        "--out-dir",
        p(&out_dir),
        "--rules",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for (f, header) in [
        ("mfi_level1.csv", "itemset,support\n"),
        ("mfi_level2.csv", "itemset,support\n"),
        ("rules.csv", "antecedent,class,support,confidence\n"),
    ] {
        assert_eq!(std::fs::read_to_string(out_dir.join(f)).unwrap(), header);
    }
}

#[test]
fn mine_rules_need_labels_and_valid_config() {
    let dir = tempfile::tempdir().unwrap();
    let tdb = dir.path().join("t.csv");
    std::fs::write(&tdb, "tid,label,items\n1,,111;211\n2,,111\n").unwrap();
    let out_dir = dir.path().join("out");
    let unlabeled = imgmine(&[
        "mine",
        "--tdb",
        p(&tdb),
        "--out-dir",
        p(&out_dir),
        "--rules",
    ]);
    assert_eq!(code(&unlabeled), 3);
    let bad_conf = imgmine(&[
        "mine",
        "--tdb",
        p(&tdb),
        "--out-dir",
        p(&out_dir),
        "--minconf",
        "1.01",
    ]);
    assert_eq!(code(&bad_conf), 3);
    assert!(stderr(&bad_conf).contains("minconf"));
}

#[test]
fn config_file_is_read_and_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let tdb = dir.path().join("t.csv");
    std::fs::write(&tdb, "tid,label,items\n1,,111;211\n2,,111\n").unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"minsup": 1.0}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = imgmine(&[
        "mine",
        "--tdb",
        p(&tdb),
        "--out-dir",
        p(&out_dir),
        "--config",
        p(&cfg),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        std::fs::read_to_string(out_dir.join("mfi_level1.csv")).unwrap(),
        "itemset,support\n111,2\n"
    );
    let out = imgmine(&[
        "mine",
        "--tdb",
        p(&tdb),
        "--out-dir",
        p(&out_dir),
        "--config",
        p(&cfg),
        "--minsup",
        "0.5",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read_to_string(out_dir.join("mfi_level1.csv")).unwrap(),
        "itemset,support\n111;211,1\n"
    );
    std::fs::write(&cfg, r#"{"min_sup": 0.2}"#).unwrap();
    let out = imgmine(&[
        "mine",
        "--tdb",
        p(&tdb),
        "--out-dir",
        p(&out_dir),
        "--config",
        p(&cfg),
    ]);
    assert_eq!(code(&out), 3);
}

fn synth_and_train(dir: &Path) -> (String, String) {
    let corpus = dir.join("corpus");
    let out = imgmine(&["synth", "--out-dir", p(&corpus), "--per-class", "6"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest = corpus.join("manifest.csv");
    let model = dir.join("model.json");
    let out = imgmine(&["train", "--manifest", p(&manifest), "--output", p(&model)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    (p(&manifest).to_string(), p(&model).to_string())
}

#[test]
fn train_classify_evaluate_on_training_split() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, model) = synth_and_train(dir.path());
    let preds = dir.path().join("preds.csv");
    let out = imgmine(&[
        "classify",
        "--model",
        &model,
        "--manifest",
        &manifest,
        "--split",
        "train",
        "--output",
        p(&preds),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&preds).unwrap();
    assert!(text.starts_with("path,predicted,fired_rule_count\n"));
    let metrics = dir.path().join("metrics.csv");
    let out = imgmine(&[
        "evaluate",
        "--predictions",
        p(&preds),
        "--manifest",
        &manifest,
        "--output",
        p(&metrics),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(std::fs::read_to_string(&metrics)
        .unwrap()
        .contains("accuracy,100.0\n"));

    // single image, printed to standard output
    let image = Path::new(&manifest)
        .parent()
        .unwrap()
        .join("malignant_000.pgm");
    let out = imgmine(&["classify", "--model", &model, "--image", p(&image)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains(",malignant,"));
}

#[test]
fn model_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (manifest, model) = synth_and_train(dir.path());
    let missing = imgmine(&[
        "classify",
        "--model",
        "/nonexistent/model.json",
        "--manifest",
        &manifest,
    ]);
    assert_eq!(code(&missing), 2);

    let old = dir.path().join("old.json");
    std::fs::write(
        &old,
        std::fs::read_to_string(&model)
            .unwrap()
            .replace("harc-1", "harc-0"),
    )
    .unwrap();
    let out = imgmine(&["classify", "--model", p(&old), "--manifest", &manifest]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("harc-0"));
}

#[test]
fn unreadable_images_are_partial_failures() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    assert_eq!(
        code(&imgmine(&[
            "synth",
            "--out-dir",
            p(&corpus),
            "--per-class",
            "3"
        ])),
        0
    );
    std::fs::remove_file(corpus.join("benign_000.pgm")).unwrap();
    let tdb = dir.path().join("tdb.csv");
    let out = imgmine(&[
        "features",
        "--manifest",
        p(&corpus.join("manifest.csv")),
        "--output",
        p(&tdb),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("benign_000.pgm"));
    let rows = std::fs::read_to_string(&tdb).unwrap().lines().count();
    assert_eq!(rows, 1 + 8);
}

#[test]
fn evaluate_skips_unlabeled_rows() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.csv");
    std::fs::write(
        &manifest,
        "path,label,split\na.pgm,benign,test\nb.pgm,,test\nc.pgm,normal,test\n",
    )
    .unwrap();
    let preds = dir.path().join("p.csv");
    std::fs::write(
        &preds,
        "path,predicted,fired_rule_count\na.pgm,malignant,1\nb.pgm,normal,0\nc.pgm,normal,0\n",
    )
    .unwrap();
    let out = imgmine(&[
        "evaluate",
        "--predictions",
        p(&preds),
        "--manifest",
        p(&manifest),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("b.pgm"));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("(2/2)"), "{text}");
}

#[test]
fn synth_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let read = |d: &Path| std::fs::read(d.join("malignant_001.pgm")).unwrap();
    for (name, seed) in [("a", "7"), ("b", "7"), ("c", "8")] {
        let out = imgmine(&[
            "synth",
            "--out-dir",
            p(&dir.path().join(name)),
            "--per-class",
            "2",
            "--seed",
            seed,
        ]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(read(&dir.path().join("a")), read(&dir.path().join("b")));
    assert_ne!(read(&dir.path().join("a")), read(&dir.path().join("c")));
}
