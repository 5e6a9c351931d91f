use std::path::Path;
use std::process::{Command, Output};

fn voxskel(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voxskel"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = voxskel(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn skeletonized_torus_keeps_its_betti_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let made = ok(
        d,
        &["make-shape", "--kind", "thick_torus", "--output", "torus"],
    );
    assert_eq!(made.trim(), r#"{"beta0":1,"beta1":1,"beta2":0,"chi":0}"#);
    ok(
        d,
        &[
            "skeletonize",
            "--input",
            "torus.json",
            "--output",
            "skel",
            "--iters",
            "auto",
        ],
    );
    assert_eq!(ok(d, &["verify", "--input", "skel"]).trim(), made.trim());
}

#[test]
fn verify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &["make-shape", "--kind", "hollow_shell", "--output", "shell"],
    );
    assert_eq!(
        ok(d, &["verify", "--input", "shell"]).trim(),
        r#"{"beta0":1,"beta1":0,"beta2":1,"chi":2}"#
    );
    std::fs::write(
        d.join("empty.json"),
        r#"{"shape":[3,3,3],"dtype":"u8","order":"x-fastest"}"#,
    )
    .unwrap();
    std::fs::write(d.join("empty.raw"), [0u8; 27]).unwrap();
    assert_eq!(
        ok(d, &["verify", "--input", "empty"]).trim(),
        r#"{"beta0":0,"beta1":0,"beta2":0,"chi":0}"#
    );
}

#[test]
fn zero_budget_copies_the_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(
        d,
        &[
            "make-shape",
            "--kind",
            "random_blob",
            "--size",
            "12",
            "--output",
            "blob",
        ],
    );
    ok(
        d,
        &[
            "skeletonize",
            "--input",
            "blob",
            "--output",
            "same",
            "--detector",
            "boolean",
            "--iters",
            "0",
        ],
    );
    assert_eq!(
        std::fs::read(d.join("blob.raw")).unwrap(),
        std::fs::read(d.join("same.raw")).unwrap()
    );
}

#[test]
fn errors_are_one_line_with_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = voxskel(d, &["verify", "--input", "x", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(
        d.join("bad.json"),
        r#"{"shape":[2,2,2],"dtype":"u8","order":"x-fastest"}"#,
    )
    .unwrap();
    std::fs::write(d.join("bad.raw"), [0u8; 7]).unwrap();
    let out = voxskel(d, &["verify", "--input", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(
        err.starts_with("error[format]: ") && err.contains("bad.raw"),
        "{err}"
    );

    let out = voxskel(d, &["census", "--mode", "sampled", "--n", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr)
        .unwrap()
        .starts_with("error[domain]: "));
    let out = voxskel(d, &["--threads", "0", "verify", "--input", "bad"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("cfg.json"),
        r#"{"seed": 3, "make-shape": {"kind": "solid_box", "extent": [4, 3, 2]}}"#,
    )
    .unwrap();
    ok(d, &["--config", "cfg.json", "make-shape", "--output", "a"]);
    let header = std::fs::read_to_string(d.join("a.json")).unwrap();
    assert!(header.contains("[\n    6,\n    5,\n    4\n  ]"), "{header}");
    ok(
        d,
        &[
            "--config",
            "cfg.json",
            "make-shape",
            "--output",
            "b",
            "--kind",
            "line",
        ],
    );
    assert_eq!(
        ok(d, &["verify", "--input", "b"]).trim(),
        r#"{"beta0":1,"beta1":0,"beta2":0,"chi":1}"#
    );
}

#[test]
fn census_and_demo_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let strip = |s: &str| {
        s.lines()
            .filter(|l| !l.contains("elapsed"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let args = ["--seed", "5", "census", "--mode", "sampled", "--n", "20000"];
    assert_eq!(strip(&ok(d, &args)), strip(&ok(d, &args)));

    ok(
        d,
        &[
            "make-shape",
            "--kind",
            "line",
            "--length",
            "4",
            "--output",
            "line",
        ],
    );
    for name in ["t1.csv", "t2.csv"] {
        ok(
            d,
            &[
                "--seed",
                "2",
                "demo-learn",
                "--target",
                "line",
                "--steps",
                "3",
                "--beta",
                "0.1",
                "--out",
                name,
            ],
        );
    }
    let trace = std::fs::read_to_string(d.join("t1.csv")).unwrap();
    assert_eq!(trace, std::fs::read_to_string(d.join("t2.csv")).unwrap());
    assert!(trace.starts_with("step,loss\n0,"));
    assert_eq!(trace.lines().count(), 5);
}
