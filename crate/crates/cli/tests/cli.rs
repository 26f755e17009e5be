use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rvf_core::{load_image, save_image, Image, Rgb};

fn rvf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rvf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../bench/testdata/corpus")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn metrics(a: &Path, b: &Path) -> serde_json::Value {
    let out = rvf(&["metrics", s(a), s(b), "--json"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn identical_files_score_zero() {
    let img = sample("chelsea.png");
    let m = metrics(&img, &img);
    assert_eq!(m["mae"], 0.0);
    assert_eq!(m["mse"], 0.0);
    assert_eq!(m["ncd"], 0.0);

    let out = rvf(&["metrics", "--csv", s(&img), s(&img)]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("original,filtered,mae,mse,ncd"));
    assert!(lines.next().unwrap().ends_with(",0,0,0"));
}

#[test]
fn noise_filter_metrics_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let clean = sample("astronaut.png");
    let noisy = dir.path().join("noisy.png");
    let mask = dir.path().join("mask.png");
    let filtered = dir.path().join("filtered.png");
    let out = rvf(&[
        "noise",
        "--phi",
        "0.1",
        "--seed",
        "42",
        "--mask",
        s(&mask),
        s(&clean),
        s(&noisy),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = rvf(&["filter", "--measure", "d1", s(&noisy), s(&filtered)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let before = metrics(&clean, &noisy)["mae"].as_f64().unwrap();
    let after = metrics(&clean, &filtered)["mae"].as_f64().unwrap();
    assert!(after < before, "filtered MAE {after} vs noisy {before}");
    let mask = load_image(&mask).unwrap();
    let hit = mask.pixels().iter().filter(|p| !p.is_zero()).count() as f64;
    let frac = hit / mask.pixels().len() as f64;
    assert!((frac - 0.1).abs() < 0.01, "{frac}");
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let clean = sample("coffee.png");
    let a = dir.path().join("a.ppm");
    let b = dir.path().join("b.ppm");
    for path in [&a, &b] {
        let out = rvf(&["noise", "--phi", "0.2", "--seed", "5", s(&clean), s(path)]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let f1 = dir.path().join("f1.png");
    let f4 = dir.path().join("f4.png");
    let spec = "cfs:C=150,t=4";
    assert!(
        rvf(&["filter", "--threads", "1", "--measure", spec, s(&a), s(&f1)])
            .status
            .success()
    );
    assert!(
        rvf(&["filter", "--threads", "4", "--measure", spec, s(&a), s(&f4)])
            .status
            .success()
    );
    assert_eq!(std::fs::read(&f1).unwrap(), std::fs::read(&f4).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let img = sample("rocket.png");
    let out_path = dir.path().join("o.png");

    let out = rvf(&["filter", "--measure", "nope", s(&img), s(&out_path)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--measure"));

    let out = rvf(&["noise", "--phi", "1.5", s(&img), s(&out_path)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--phi"));

    let out = rvf(&[
        "filter",
        "--measure",
        "d1",
        "--bogus",
        s(&img),
        s(&out_path),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let missing = dir.path().join("missing.png");
    let out = rvf(&["filter", "--measure", "d1", s(&missing), s(&out_path)]);
    assert_eq!(out.status.code(), Some(2));

    let unwritable = dir.path().join("no_such_dir").join("o.png");
    let out = rvf(&["filter", "--measure", "d1", s(&img), s(&unwritable)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!unwritable.exists());

    let black = dir.path().join("black.png");
    save_image(&Image::filled(4, 4, Rgb::BLACK), &black).unwrap();
    let gray = dir.path().join("gray.png");
    save_image(&Image::filled(4, 4, Rgb::new(9, 9, 9)), &gray).unwrap();
    let out = rvf(&["metrics", s(&black), s(&gray)]);
    assert_eq!(out.status.code(), Some(4));

    let small = dir.path().join("small.png");
    save_image(&Image::filled(3, 3, Rgb::new(9, 9, 9)), &small).unwrap();
    let out = rvf(&["metrics", s(&gray), s(&small)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_lists_every_measure() {
    for sub in ["noise", "filter", "metrics", "bench"] {
        let out = rvf(&[sub, "--help"]);
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        for id in rvf_core::MeasureId::ALL {
            assert!(text.contains(id.name()), "{sub} help lacks {id}");
        }
        assert!(text.contains("cfs") && text.contains("C=150,t=4"));
    }
}

#[test]
fn bench_reports_without_timing_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    for name in ["chelsea.png", "ihc.png"] {
        let img = load_image(sample(name)).unwrap();
        let crop = Image::from_fn(48, 48, |r, c| img.get(r, c));
        save_image(&crop, corpus.join(name)).unwrap();
    }
    let config = dir.path().join("bench.conf");
    std::fs::write(&config, "levels = 0.1,0.3\nseed = 7\nno_timing = true\n").unwrap();
    let mut reports = Vec::new();
    for run in ["r1", "r2"] {
        let out_dir = dir.path().join(run);
        let out = rvf(&[
            "bench",
            "--config",
            s(&config),
            "--corpus",
            s(&corpus),
            "--measures",
            "none,d1,cfs:C=150,t=4,ddf",
            "--out",
            s(&out_dir),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        let files: Vec<Vec<u8>> = [
            "effectiveness.csv",
            "efficiency.csv",
            "times.csv",
            "report.md",
        ]
        .iter()
        .map(|f| std::fs::read(out_dir.join(f)).unwrap())
        .collect();
        reports.push(files);
    }
    assert_eq!(reports[0], reports[1]);
    let eff = String::from_utf8(reports[0][0].clone()).unwrap();
    assert!(eff.contains("# base seed: 7"));
    assert!(eff.contains("filter,MAE@10%,MAE@30%,MSE@10%,MSE@30%,NCD@10%,NCD@30%,mean"));
    let rows: Vec<&str> = eff
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    let labels: Vec<&str> = rows.iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(labels, ["none", "d1", "cfs", "ddf"]);
}
