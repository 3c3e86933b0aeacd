//! Drives the `bn` binary through a full synth, train, select, benchmark and
//! ablate cycle on a tiny dataset.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bn"))
        .args(args)
        .output()
        .expect("run bn")
}

fn ok(args: &[&str]) -> String {
    let out = bn(args);
    assert!(
        out.status.success(),
        "bn {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn synth(dir: &Path) {
    fs::write(
        dir.join("spec.toml"),
        "videos = 6\nframes_min = 8\nframes_max = 14\ndim = 4\nlabel_model = \"peaked\"\nseed = 3\n",
    )
    .unwrap();
    ok(&["synth", "--spec", &p(dir, "spec.toml"), "--out", &p(dir, "data")]);
}

fn train(dir: &Path, seed: &str, out: &str) -> String {
    ok(&[
        "train",
        "--preset",
        "BN0",
        "--manifest",
        &p(dir, "data/manifest.txt"),
        "--labels",
        &p(dir, "data/labels.csv"),
        "--seed",
        seed,
        "--out",
        &p(dir, out),
        "--iterations",
        "20",
        "--widths",
        "16,8,4,2",
    ])
}

#[test]
fn full_cycle() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d);
    assert!(d.join("data/features/syn005.bnf").exists());

    let msg = train(d, "7", "model.bnck");
    assert!(msg.contains("20 iterations"), "{msg}");

    let select = |seed: &str, trace: &str| {
        ok(&[
            "select",
            "--model",
            &p(d, "model.bnck"),
            "--features",
            &p(d, "data/features/syn000.bnf"),
            "--batch",
            "5",
            "--seed",
            seed,
            "--trace",
            &p(d, trace),
        ])
    };
    let first = select("7", "t1.csv");
    let frame: usize = first.trim().parse().expect("selected frame index");
    assert_eq!(select("7", "t2.csv"), first);
    let trace = fs::read_to_string(d.join("t1.csv")).unwrap();
    assert_eq!(trace, fs::read_to_string(d.join("t2.csv")).unwrap());
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("pass,position,frame_a,frame_b,summed_f,swapped"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let n = 8; // no video is shorter than frames_min
    assert!(rows.len() >= n * (n - 1));
    assert!(rows.iter().all(|r| r.len() == 6 && (r[5] == "0" || r[5] == "1")));
    assert!(frame < 14);

    let out = ok(&[
        "benchmark",
        "--manifest",
        &p(d, "data/manifest.txt"),
        "--labels",
        &p(d, "data/labels.csv"),
        "--strategy",
        "bn",
        "--model",
        &p(d, "model.bnck"),
        "--out",
        &p(d, "report.csv"),
    ]);
    assert!(out.starts_with("bn: 6 objects"), "{out}");
    let summary = fs::read_to_string(d.join("report.csv")).unwrap();
    assert!(summary.starts_with("strategy,count,mean,median,min,max,cov\nbn,6,"));
    let scores = fs::read_to_string(d.join("report.scores.csv")).unwrap();
    assert_eq!(scores.lines().count(), 7);

    ok(&[
        "ablate",
        "--manifest",
        &p(d, "data/manifest.txt"),
        "--labels",
        &p(d, "data/labels.csv"),
        "--model",
        &p(d, "model.bnck"),
        "--batches",
        "1,3",
        "--out",
        &p(d, "ablate.csv"),
    ]);
    let table = fs::read_to_string(d.join("ablate.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "batch_size,mean_jf,mean_sort_time_ms");
    assert!(rows[1].starts_with("1,") && rows[2].starts_with("3,"));
}

#[test]
fn training_is_reproducible_from_the_command_line() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    synth(d);
    train(d, "1", "a.bnck");
    train(d, "1", "b.bnck");
    train(d, "2", "c.bnck");
    let read = |f: &str| fs::read(d.join(f)).unwrap();
    assert_eq!(read("a.bnck"), read("b.bnck"));
    assert_ne!(read("a.bnck"), read("c.bnck"));
}

#[test]
fn labels_from_performance_matrix() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("perf.csv"),
        "video,object,anno_frame,eval_frame,jf\nv,1,0,0,1.0\nv,1,0,1,0.5\nv,1,1,0,2.0\nv,1,1,1,1.0\n",
    )
    .unwrap();
    ok(&["labels", "--perf", &p(d, "perf.csv"), "--out", &p(d, "y.csv")]);
    let y = fs::read_to_string(d.join("y.csv")).unwrap();
    assert_eq!(y, "video,object,frame,y\nv,1,0,0.75\nv,1,1,1.5\n");
}

#[test]
fn errors_exit_nonzero_with_a_message() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let missing = bn(&["select", "--model", &p(d, "none.bnck"), "--features", &p(d, "none.bnf")]);
    assert!(!missing.status.success());
    let err = String::from_utf8_lossy(&missing.stderr);
    assert!(err.starts_with("error: ") && err.contains("none.bnck"), "{err}");

    synth(d);
    let no_model = bn(&[
        "benchmark",
        "--manifest",
        &p(d, "data/manifest.txt"),
        "--labels",
        &p(d, "data/labels.csv"),
        "--strategy",
        "bn",
        "--out",
        &p(d, "r.csv"),
    ]);
    assert!(!no_model.status.success());
    assert!(String::from_utf8_lossy(&no_model.stderr).contains("--model"));

    let bad_preset = bn(&["train", "--preset", "XYZ", "--manifest", "m", "--out", "o"]);
    assert!(!bad_preset.status.success());

    // A checkpoint trained on 4-dimensional features cannot score 6-dimensional ones.
    train(d, "1", "m.bnck");
    let other = framesort::ingest::VideoFeatures::new("x", 9, 6, vec![0.0; 54]).unwrap();
    framesort::ingest::save_features(&other, d.join("x.bnf")).unwrap();
    let mismatch = bn(&["select", "--model", &p(d, "m.bnck"), "--features", &p(d, "x.bnf")]);
    assert!(!mismatch.status.success());
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("6-dimensional"));
}
