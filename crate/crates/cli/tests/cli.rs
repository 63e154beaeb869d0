use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use netrefine::io::{write_pfm, write_pgm};
use netrefine::{BinaryMask, GridShape, LikelihoodRaster};
use serde_json::Value;

fn netrefine(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netrefine"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn files(dir: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for e in fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        let name = e.file_name().to_string_lossy().into_owned();
        if e.file_type().unwrap().is_dir() {
            for f in files(&e.path()) {
                out.insert(format!("{name}/{f}"));
            }
        } else {
            out.insert(name);
        }
    }
    out
}

fn line_fixture(dir: &Path) {
    // water column on the left, a line leaving it with a 3-pixel gap
    let water = BinaryMask::from_ascii(
        "#...........
         #...........
         #...........",
    )
    .unwrap();
    let truth = BinaryMask::from_ascii(
        "............
         .##########.
         ............",
    )
    .unwrap();
    let gt = BinaryMask::from_ascii(
        "............
         .###...####.
         ............",
    )
    .unwrap();
    write_pgm(dir.join("water.pgm"), &water).unwrap();
    write_pgm(dir.join("truth.pgm"), &truth).unwrap();
    write_pgm(dir.join("gt.pgm"), &gt).unwrap();
}

#[test]
fn metrics_self_comparison_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    line_fixture(dir.path());
    let o = netrefine(
        dir.path(),
        &[
            "metrics",
            "--pred",
            "truth.pgm",
            "--gt",
            "truth.pgm",
            "--r",
            "0,3",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    for block in [&v["r"]["0"], &v["r"]["3"], &v["conventional"]] {
        for k in ["precision", "recall", "f1", "iou"] {
            assert_eq!(block[k], 1.0, "{k} in {block}");
        }
    }
    assert_eq!(v["r"]["3"]["rtp"], 10);
    assert_eq!(v["r"]["3"]["rfp"], 0);
}

#[test]
fn missing_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = netrefine(dir.path(), &["metrics", "--pred", "a.pgm"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("--gt"), "{err}");
    assert!(err.contains("Usage"), "{err}");
    assert!(
        err.contains("--neighborhood"),
        "flag documentation missing: {err}"
    );
    assert_eq!(
        netrefine(dir.path(), &["frobnicate"]).status.code(),
        Some(1)
    );
    assert_eq!(netrefine(dir.path(), &[]).status.code(), Some(1));
}

#[test]
fn help_and_version_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let v = netrefine(dir.path(), &["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
    assert_eq!(
        netrefine(dir.path(), &["refine", "--help"]).status.code(),
        Some(0)
    );
}

#[test]
fn shape_mismatch_exits_three_naming_both_shapes() {
    let dir = tempfile::tempdir().unwrap();
    write_pgm(
        dir.path().join("a.pgm"),
        &BinaryMask::zeros(GridShape::new(4, 4).unwrap()),
    )
    .unwrap();
    write_pgm(
        dir.path().join("b.pgm"),
        &BinaryMask::zeros(GridShape::new(5, 5).unwrap()),
    )
    .unwrap();
    let o = netrefine(dir.path(), &["metrics", "--pred", "a.pgm", "--gt", "b.pgm"]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("4x4") && err.contains("5x5"), "{err}");
}

#[test]
fn io_and_format_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.pgm"), b"P2\n2 2\n255\n0 0 0 0\n").unwrap();
    let o = netrefine(
        dir.path(),
        &["metrics", "--pred", "bad.pgm", "--gt", "bad.pgm"],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = netrefine(
        dir.path(),
        &["metrics", "--pred", "missing.pgm", "--gt", "bad.pgm"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.pgm"));
}

#[test]
fn constraint_violations_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    line_fixture(dir.path());
    let base = [
        "refine",
        "--gt",
        "gt.pgm",
        "--water",
        "water.pgm",
        "--provider",
        "constant:0",
        "--out",
        "o.pgm",
        "--stats",
        "s.json",
    ];
    let mut even_kernel = base.to_vec();
    even_kernel.extend(["--kernel", "4"]);
    assert_eq!(netrefine(dir.path(), &even_kernel).status.code(), Some(3));
    let mut short_schedule = base.to_vec();
    short_schedule.extend(["--alpha", "0.2,0.1", "--iters", "5"]);
    assert_eq!(
        netrefine(dir.path(), &short_schedule).status.code(),
        Some(3)
    );
}

#[test]
fn refine_with_likelihood_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    line_fixture(d);
    let truth = netrefine::io::read_pgm(d.join("truth.pgm")).unwrap();
    fs::create_dir(d.join("lik")).unwrap();
    for i in 0..2 {
        let mut l = LikelihoodRaster::from_mask(&truth, 0.9).unwrap();
        l.set(netrefine::Pixel::new(0, 11), 0.3).unwrap();
        write_pfm(d.join(format!("lik/iter_{i}.pfm")), &l).unwrap();
    }
    let o = netrefine(
        d,
        &[
            "--manifest",
            "run.json",
            "refine",
            "--gt",
            "gt.pgm",
            "--water",
            "water.pgm",
            "--likelihood-dir",
            "lik",
            "--rho",
            "8",
            "--alpha",
            "0.2",
            "--iters",
            "2",
            "--out",
            "refined.pgm",
            "--stats",
            "stats.json",
            "--dump-paths",
            "paths.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        netrefine::io::read_pgm(d.join("refined.pgm")).unwrap(),
        truth
    );
    let stats = json(d.join("stats.json"));
    let first = stats[0].as_object().unwrap();
    let keys: Vec<&str> = first.keys().map(String::as_str).collect();
    assert_eq!(
        keys.into_iter().collect::<BTreeSet<_>>(),
        [
            "iteration",
            "reachable_px",
            "unreachable_px",
            "terminals",
            "instances_solved",
            "instances_unsolvable",
            "pixels_added"
        ]
        .into_iter()
        .collect()
    );
    assert_eq!(first["pixels_added"], 3);
    assert_eq!(first["unreachable_px"], 4);
    let paths = json(d.join("paths.json"));
    // both ends of the stranded segment are terminals
    assert_eq!(paths[0].as_array().unwrap().len(), 2);
    let m = json(d.join("run.json"));
    assert_eq!(m["subcommand"], "refine");
    assert_eq!(m["parameters"]["rho"], 8);
    assert_eq!(m["parameters"]["likelihood_dir"], "lik");
    let inputs = m["inputs"].as_object().unwrap();
    assert!(inputs.contains_key("gt.pgm") && inputs.contains_key("lik/iter_0.pfm"));
    assert_eq!(inputs["gt.pgm"].as_str().unwrap().len(), 64);
    assert!(m["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn synth_refine_analyze_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = netrefine(
        d,
        &[
            "synth",
            "--seed",
            "11",
            "--rows",
            "200",
            "--cols",
            "200",
            "--trunks",
            "4",
            "--gaps",
            "6",
            "--beta",
            "5,12",
            "--out-dir",
            "s",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let removed = json(d.join("s/removed.json"));
    assert!(removed["unreachable_fraction"].as_f64().unwrap() > 0.0);
    let o = netrefine(
        d,
        &[
            "refine",
            "--gt",
            "s/broken.pgm",
            "--water",
            "s/water.pgm",
            "--provider",
            "oracle:truth=s/network.pgm",
            "--rho",
            "40",
            "--out",
            "refined.pgm",
            "--stats",
            "stats.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = netrefine(
        d,
        &[
            "analyze",
            "--network",
            "refined.pgm",
            "--water",
            "s/water.pgm",
            "--out",
            "report.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let report = json(d.join("report.json"));
    assert_eq!(report["unreachable"], 0);
    assert_eq!(report["unreachable_fraction"], 0.0);
    assert_eq!(
        files(d),
        [
            "refined.pgm",
            "report.json",
            "s/broken.pgm",
            "s/network.pgm",
            "s/removed.json",
            "s/water.pgm",
            "stats.json"
        ]
        .into_iter()
        .map(String::from)
        .collect()
    );
}

#[test]
fn outputs_are_reproducible() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let d = dir.path();
        let args = [
            "--manifest",
            "m.json",
            "synth",
            "--seed",
            "4",
            "--rows",
            "160",
            "--cols",
            "160",
            "--gaps",
            "5",
            "--out-dir",
            "s",
        ];
        assert_eq!(netrefine(d, &args).status.code(), Some(0));
        let args = [
            "--manifest",
            "m2.json",
            "roadgap",
            "--gt",
            "s/network.pgm",
            "--seed",
            "2",
            "--gaps",
            "4",
            "--beta",
            "6,10",
            "--points",
            "10",
            "--rho",
            "30",
            "--alpha",
            "0.2",
            "--iters",
            "3",
            "--out-dir",
            "rg",
        ];
        let o = netrefine(d, &args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let (a, b) = (dirs[0].path(), dirs[1].path());
    assert_eq!(files(a), files(b));
    for f in files(a) {
        let (x, y) = (fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap());
        if f.starts_with('m') {
            let (mut x, mut y): (Value, Value) = (
                serde_json::from_slice(&x).unwrap(),
                serde_json::from_slice(&y).unwrap(),
            );
            x["wall_clock_seconds"] = Value::Null;
            y["wall_clock_seconds"] = Value::Null;
            assert_eq!(x, y, "{f}");
        } else {
            assert_eq!(x, y, "{f} differs between runs");
        }
    }
}

#[test]
fn roadgap_reports_trace_and_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(
        netrefine(
            d,
            &[
                "synth",
                "--seed",
                "1",
                "--kind",
                "road",
                "--rows",
                "256",
                "--cols",
                "256",
                "--spacing",
                "48",
                "--out-dir",
                "g"
            ]
        )
        .status
        .code(),
        Some(0)
    );
    let o = netrefine(
        d,
        &[
            "roadgap",
            "--gt",
            "g/network.pgm",
            "--seed",
            "3",
            "--gaps",
            "8",
            "--points",
            "30",
            "--iters",
            "3",
            "--alpha",
            "0.2",
            "--out-dir",
            "out",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = json(d.join("out/trace.json"));
    let trace = trace.as_array().unwrap();
    assert!(trace.len() >= 2);
    assert_eq!(trace[0]["iteration"], 0);
    assert!(trace
        .iter()
        .all(|t| t["total"].is_u64() && t["disconnected"].is_u64()));
    let cmp = json(d.join("out/comparison.json"));
    assert!(cmp["ratio"].as_f64().unwrap() <= 1.05, "{cmp}");
    assert!(cmp["gt_total"].as_u64().unwrap() > 0);
}
