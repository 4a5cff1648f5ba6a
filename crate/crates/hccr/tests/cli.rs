use std::path::Path;
use std::process::{Command, Output};

use hccr_core::features::InputMode;
use hccr_core::net::{encode_model, init_weights, InputShape, Layer, Model, NetworkSpec, Pipeline};

fn hccr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hccr")).args(args).output().expect("spawn hccr")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {} in\n{}", key, text))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, classes: &str, per_class: &str) {
    let out = hccr(&["synth", "--classes", classes, "--per-class", per_class, "--seed", "3", "--out", p(dir)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}

#[test]
fn exit_codes() {
    assert_eq!(hccr(&[]).status.code(), Some(2));
    assert_eq!(hccr(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(hccr(&["inspect", "--model", "m", "--verbose"]).status.code(), Some(2));
    assert_eq!(hccr(&["--help"]).status.code(), Some(0));
    assert_eq!(hccr(&["--version"]).status.code(), Some(0));

    let bad = hccr(&["train", "--data", "d", "--out", "m", "--epochs", "many"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("--epochs"));
    let bad = hccr(&["train", "--data", "d", "--out", "m", "--net", "resnet"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("--net"));
    // Both data sources at once.
    assert_eq!(hccr(&["eval", "--model", "m", "--data", "d", "--gnt", "g"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.hcrm");
    let out = hccr(&["inspect", "--model", p(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("absent.hcrm"));

    let corrupt = dir.path().join("corrupt.hcrm");
    std::fs::write(&corrupt, b"HCRM\x07\0\0\0garbage").unwrap();
    let out = hccr(&["inspect", "--model", p(&corrupt)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("byte 4"), "{}", stderr(&out));
}

#[test]
fn help_lists_every_flag_with_defaults() {
    let cases: [(&str, &[&str]); 6] = [
        ("synth", &["--classes", "--per-class", "--noise", "--seed", "--out", "[default: 10]", "[default: 200]", "[default: 0.1]"]),
        (
            "train",
            &[
                "--net", "--mode", "--data", "--gnt", "--out", "--epochs", "--batch", "--lr", "--momentum", "--seed",
                "[default: googlenet-small]", "[default: original]", "[default: 20]", "[default: 64]", "[default: 0.01]",
                "[default: 0.9]", "[default: 0]", "original+gabor", "gabor-only", "alexnet-full",
            ],
        ),
        ("eval", &["--model", "--data", "--gnt", "--split", "--seed", "[default: test]"]),
        ("extract", &["--net", "--mode", "--pgm", "--data", "--gnt", "--split", "--out", "[default: original+gabor]"]),
        ("ensemble", &["--model", "--data", "--gnt", "--split", "--seed"]),
        ("inspect", &["--model"]),
    ];
    for (sub, flags) in cases {
        let out = hccr(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0));
        let text = stdout(&out);
        for flag in flags {
            assert!(text.contains(flag), "`{} --help` lacks {}:\n{}", sub, flag, text);
        }
    }
}

#[test]
fn synth_train_eval_inspect_extract_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data, "4", "10");
    assert!(data.join("manifest.tsv").is_file());
    assert!(data.join("train/g00").is_dir() && data.join("test/g03").is_dir());

    let model = dir.path().join("m.hcrm");
    let train = |model: &Path, mode: &str| {
        hccr(&[
            "train", "--net", "googlenet-small", "--mode", mode, "--data", p(&data), "--out", p(model), "--epochs", "2",
            "--batch", "8", "--lr", "0.005", "--seed", "7",
        ])
    };
    let out = train(&model, "original");
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let log = stdout(&out);
    assert!(log.starts_with("config "), "configuration is printed first");
    assert_eq!(log.lines().filter(|l| l.starts_with("1\t") || l.starts_with("2\t")).count(), 2);

    let out = hccr(&["eval", "--model", p(&model), "--data", p(&data), "--split", "test"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = stdout(&out);
    for key in ["top1", "top2", "top5", "top10"] {
        let v: f64 = value(&report, key).parse().unwrap();
        assert!((0.0..=100.0).contains(&v));
    }
    assert!(report.contains("Top1") && report.contains("Top10"));
    assert_eq!(value(&report, "samples"), "8");

    let out = hccr(&["inspect", "--model", p(&model)]);
    assert_eq!(out.status.code(), Some(0));
    let info = stdout(&out);
    assert_eq!(value(&info, "inception_modules"), "4");
    assert_eq!(value(&info, "input"), "1x32x32");
    assert_eq!(value(&info, "file_bytes"), value(&info, "projected_bytes"));
    assert_eq!(std::fs::metadata(&model).unwrap().len().to_string(), value(&info, "file_bytes"));

    let planes = dir.path().join("x.dtns");
    let out = hccr(&["extract", "--data", p(&data), "--split", "test", "--out", p(&planes)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("[8, 9, 32, 32]"));

    let gabor = dir.path().join("g.hcrm");
    assert_eq!(train(&gabor, "original+gabor").status.code(), Some(0));
    let out = hccr(&["ensemble", "--model", p(&model), "--model", p(&gabor), "--data", p(&data)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("member ")).count(), 2);
    assert!(text.contains("ensemble of 2 models"));

    // Class-count mismatch is a data error.
    let other = dir.path().join("other");
    synth(&other, "3", "10");
    assert_eq!(hccr(&["eval", "--model", p(&model), "--data", p(&other)]).status.code(), Some(1));
}

#[test]
fn identical_flags_give_identical_runs() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth(&data, "3", "10");
    let model = dir.path().join("m.hcrm");
    let run = || {
        let out = hccr(&[
            "train", "--data", p(&data), "--out", p(&model), "--epochs", "2", "--batch", "6", "--seed", "11",
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        (stdout(&out), std::fs::read(&model).unwrap())
    };
    let (log_a, bytes_a) = run();
    let (log_b, bytes_b) = run();
    assert_eq!(log_a, log_b);
    assert_eq!(bytes_a, bytes_b);

    let again = dir.path().join("again");
    synth(&again, "3", "10");
    assert_eq!(tree(&data), tree(&again));
}

/// Relative path and contents of every file under `root`, sorted.
fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    assert!(out.len() > 1);
    out
}

#[test]
fn fc_only_model_has_one_weighted_layer() {
    let layers = vec![Layer::Flatten, Layer::FullyConnected { out_features: 5 }, Layer::Softmax];
    let spec = NetworkSpec::new(InputShape::new(1, 4, 4), layers, 5).unwrap();
    let params = init_weights(&spec, 0);
    let model = Model { spec, pipeline: Pipeline { mode: InputMode::Original, target: 4 }, params };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fc.hcrm");
    std::fs::write(&path, encode_model(&model).unwrap()).unwrap();
    let out = hccr(&["inspect", "--model", p(&path)]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let info = stdout(&out);
    assert_eq!(value(&info, "weighted_layers"), "1");
    assert_eq!(value(&info, "inception_modules"), "0");
    assert_eq!(value(&info, "parameters"), "85");
}
