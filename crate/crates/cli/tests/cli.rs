use std::path::Path;
use std::process::{Command, Output};

use stpef::io::{write_sequence, SEQUENCE_MAGIC};
use stpef::ImageSequence;

fn stpef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stpef"))
        .args(args)
        .env_remove("STPEF_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_whiten_and_score() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out, csv) = (tmp.path().join("tf"), tmp.path().join("w"), tmp.path().join("m.csv"));
    let o = stpef(&[
        "sim",
        "--scenario",
        "tf",
        "--count",
        "2",
        "--size",
        "40",
        "--frames",
        "16",
        "--out",
        p(&data),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(data.join("manifest.json").exists() && data.join("TF_01/seq.iseq").exists());

    let o = stpef(&["whiten", "--config", "3D_SAT", "--in", p(&data), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["residual.iseq", "field.vfld", "run.json"] {
        assert!(out.join("TF_00").join(f).exists(), "{f}");
    }

    let o = stpef(&["metrics", "--pred", p(&out), "--truth", p(&data), "--out", p(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert!(lines[1].starts_with("3D_SAT,TF_00,"));
    assert!(lines[3].starts_with("3D_SAT,aggregate,"));
}

#[test]
fn flow_methods_write_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("tu");
    assert_eq!(
        code(&stpef(&[
            "sim",
            "--scenario",
            "tu",
            "--count",
            "1",
            "--size",
            "40",
            "--frames",
            "12",
            "--out",
            p(&data)
        ])),
        0
    );
    for method in ["lkd", "ac3d", "xcorr2d"] {
        let out = tmp.path().join(method);
        let o = stpef(&[
            "flow",
            "--method",
            method,
            "--in",
            p(&data.join("TU_00/seq.iseq")),
            "--out",
            p(&out),
        ]);
        assert_eq!(code(&o), 0, "{method}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("field.vfld").exists());
        assert!(!out.join("residual.iseq").exists());
        let csv = tmp.path().join(format!("{method}.csv"));
        let o = stpef(&[
            "metrics",
            "--pred",
            p(&out),
            "--truth",
            p(&data.join("TU_00")),
            "--out",
            p(&csv),
        ]);
        assert_eq!(code(&o), 0, "{method}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn response_curve_has_both_models() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("r.csv");
    let o = stpef(&[
        "response",
        "--config",
        "3D_SAT",
        "--v",
        "1,0",
        "--sweep",
        "speed",
        "--msyn",
        "8,11",
        "--steps",
        "2",
        "--out",
        p(&csv),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("msyn_xy,msyn_z,model,mismatch,gain_db"));
    // Two indices, two models, five mismatches each.
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 5);
    assert!(text.contains("\n11,4,target,0,"));
}

#[test]
fn repro_tables_are_thread_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = tmp.path().join(format!("t{threads}"));
        let o = stpef(&[
            "--threads",
            threads,
            "repro",
            "tables",
            "--count",
            "1",
            "--size",
            "48",
            "--out",
            p(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("1"), run("8"));
    for f in ["table2.csv", "table3.csv"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let t3 = std::fs::read_to_string(a.join("table3.csv")).unwrap();
    assert!(t3.starts_with("scenario,method,scr_db,reference\nTF,RAW,"));
}

#[test]
fn whiten_is_thread_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("tl");
    assert_eq!(
        code(&stpef(&[
            "sim",
            "--scenario",
            "tl",
            "--count",
            "1",
            "--size",
            "40",
            "--frames",
            "16",
            "--out",
            p(&data)
        ])),
        0
    );
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = tmp.path().join(format!("w{threads}"));
        let o = Command::new(env!("CARGO_BIN_EXE_stpef"))
            .args(["whiten", "--config", "3D_LAT", "--in", p(&data), "--out", p(&out)])
            .env("STPEF_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((
            std::fs::read(out.join("TL_00/residual.iseq")).unwrap(),
            std::fs::read(out.join("TL_00/field.vfld")).unwrap(),
        ));
    }
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn argument_and_config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert_eq!(code(&stpef(&["sim", "--scenario", "nope", "--out", p(&out)])), 2);
    assert_eq!(
        code(&stpef(&["sim", "--scenario", "tu", "--count", "0", "--out", p(&out)])),
        2
    );
    assert_eq!(
        code(&stpef(&["--threads", "0", "sim", "--scenario", "tu", "--out", p(&out)])),
        2
    );
    assert_eq!(code(&stpef(&["frobnicate"])), 2);

    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "mode = 3d\nMxy = 16\nbogus = 1\n").unwrap();
    let seq = tmp.path().join("s.iseq");
    write_sequence(&seq, &ImageSequence::zeros([16, 16, 8])).unwrap();
    assert_eq!(
        code(&stpef(&[
            "whiten",
            "--config",
            p(&cfg),
            "--in",
            p(&seq),
            "--out",
            p(&out)
        ])),
        2
    );
    // A 2-D estimator cannot drive a multi-frame window.
    assert_eq!(
        code(&stpef(&[
            "whiten",
            "--config",
            "3D_SAT",
            "--mode",
            "2d",
            "--in",
            p(&seq),
            "--out",
            p(&out)
        ])),
        2
    );
}

#[test]
fn io_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let missing = tmp.path().join("missing.iseq");
    assert_eq!(
        code(&stpef(&[
            "whiten",
            "--config",
            "3D_SAT",
            "--in",
            p(&missing),
            "--out",
            p(&out)
        ])),
        3
    );

    let truncated = tmp.path().join("t.iseq");
    let mut bytes = SEQUENCE_MAGIC.to_vec();
    bytes.extend_from_slice(&[0; 6]);
    std::fs::write(&truncated, bytes).unwrap();
    assert_eq!(
        code(&stpef(&[
            "whiten",
            "--config",
            "3D_SAT",
            "--in",
            p(&truncated),
            "--out",
            p(&out)
        ])),
        3
    );

    let garbage = tmp.path().join("g.iseq");
    std::fs::write(&garbage, b"not a sequence at all").unwrap();
    assert_eq!(
        code(&stpef(&[
            "flow",
            "--method",
            "lkd",
            "--in",
            p(&garbage),
            "--out",
            p(&out)
        ])),
        3
    );
}

#[test]
fn overflow_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let seq = tmp.path().join("big.iseq");
    let mut state = 7u64;
    let big = ImageSequence::from_fn([16, 16, 8], |_, _, _| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
        if state >> 63 == 0 {
            3.0e38
        } else {
            -3.0e38
        }
    });
    write_sequence(&seq, &big).unwrap();
    let o = stpef(&[
        "whiten",
        "--config",
        "3D_SAT",
        "--in",
        p(&seq),
        "--out",
        p(&tmp.path().join("o")),
    ]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn single_dataset_set_round_trips_through_metrics() {
    let tmp = tempfile::tempdir().unwrap();
    let (data, out, csv) = (tmp.path().join("tf"), tmp.path().join("f"), tmp.path().join("m.csv"));
    let sim = [
        "sim",
        "--scenario",
        "tf",
        "--count",
        "1",
        "--size",
        "40",
        "--frames",
        "12",
        "--out",
    ];
    assert_eq!(code(&stpef(&[&sim[..], &[p(&data)]].concat())), 0);
    let o = stpef(&["flow", "--method", "lkd", "--in", p(&data), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("TF_00/field.vfld").exists());
    let o = stpef(&["metrics", "--pred", p(&out), "--truth", p(&data), "--out", p(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
