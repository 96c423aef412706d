use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use optspline::image::read_image;
use optspline::kernels::{bspline_kernel, CompactKernel};
use optspline::sampled::SampledFunction;

fn optspline(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_optspline"))
        .args(args)
        .current_dir(dir)
        .env_remove("OPTSPLINE_CORPUS")
        .output()
        .unwrap()
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn sinc_design_reports_hat_snr() {
    let dir = tempfile::tempdir().unwrap();
    let out = optspline(
        &[
            "design", "--degree", "3", "--mode", "sinc", "--out", "opt.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(
        stderr(&out).contains("\"Q\":64"),
        "configuration is printed"
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("opt.report.json")).unwrap())
            .unwrap();
    let db = report["hat_snr_db"].as_f64().unwrap();
    assert!((db - 20.39).abs() < 1.0, "{db}");
    assert!(report["stationarity"].as_f64().unwrap() < 1e-4);
    let kernel = std::fs::read_to_string(dir.path().join("opt.json")).unwrap();
    let meta: serde_json::Value = serde_json::from_str(&kernel).unwrap();
    assert_eq!(meta["metadata"]["problem"]["rho_d"]["values"][1], 0.484);
    CompactKernel::from_json(&kernel).unwrap();
}

#[test]
fn filter_design_recovers_cubic_bspline() {
    let dir = tempfile::tempdir().unwrap();
    let dump = optspline(
        &[
            "kernel-dump",
            "--degree",
            "3",
            "--which",
            "cardinal",
            "--halfwidth",
            "24",
            "--tol",
            "1e-14",
            "--out",
            "cardinal3.csv",
        ],
        dir.path(),
    );
    assert!(dump.status.success(), "{}", stderr(&dump));
    let out = optspline(
        &[
            "design",
            "--degree",
            "3",
            "--mode",
            "filter",
            "--target",
            "cardinal3.csv",
            "--rho-d",
            "0.16666666666666666,0.6666666666666666,0.16666666666666666",
            "--tol",
            "1e-13",
            "--halfwidth",
            "24",
            "--out",
            "b3.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let k = CompactKernel::from_json(&std::fs::read_to_string(dir.path().join("b3.json")).unwrap())
        .unwrap();
    let exact = bspline_kernel(3).unwrap();
    let err = (0..=256)
        .map(|i| (k.eval(i as f64 / 64.0) - exact.eval(i as f64 / 64.0)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing_target = optspline(&["design", "--mode", "filter"], dir.path());
    assert_eq!(missing_target.status.code(), Some(2));
    let bad_flag = optspline(&["design", "--nonsense"], dir.path());
    assert_eq!(bad_flag.status.code(), Some(2));
    let improper = optspline(&["design", "--rho-d", "1,2,1"], dir.path());
    assert_eq!(improper.status.code(), Some(3), "{}", stderr(&improper));
    let missing_file = optspline(
        &["enlarge", "nope.pgm", "out.pgm", "--kernel", "bilinear"],
        dir.path(),
    );
    assert_eq!(
        missing_file.status.code(),
        Some(4),
        "{}",
        stderr(&missing_file)
    );
}

#[test]
fn empty_corpus_prints_header_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("empty")).unwrap();
    let out = optspline(
        &["compare", "--corpus", "empty", "--out", "res.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(5));
    assert_eq!(
        std::fs::read_to_string(dir.path().join("res.csv")).unwrap(),
        "image,method,scenario,psnr_db\n"
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("Overall Average"));
}

#[test]
fn compare_reads_corpus_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_optspline"))
        .args([
            "compare",
            "--scenario",
            "2",
            "--methods",
            "bicubic,bspline3",
            "--out",
            "res.csv",
        ])
        .env("OPTSPLINE_CORPUS", corpus())
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table.contains("Scenario 2") && table.contains("Overall Average"));
    let csv = std::fs::read_to_string(dir.path().join("res.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 2);
    assert!(dir.path().join("res_quantized.csv").exists());
}

#[test]
fn enlarge_doubles_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let src = corpus().join("camera.pgm");
    let out = optspline(
        &["enlarge", "--factor", "2", src.to_str().unwrap(), "big.pgm"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let big = read_image(&dir.path().join("big.pgm")).unwrap();
    assert_eq!((big.width(), big.height()), (512, 512));
}

#[test]
fn cardinal_dump_interpolates() {
    let dir = tempfile::tempdir().unwrap();
    let out = optspline(
        &["kernel-dump", "--degree", "3", "--which", "cardinal"],
        dir.path(),
    );
    assert!(out.status.success());
    let curve = SampledFunction::read_csv(&out.stdout[..]).unwrap();
    assert_eq!(curve.q(), 64);
    assert!((curve.at_integer(0) - 1.0).abs() < 1e-12);
    for n in 1..=16 {
        assert!(curve.at_integer(n).abs() < 1e-9 && curve.at_integer(-n).abs() < 1e-9);
    }
}

#[test]
fn interp_writes_the_spline_curve() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("x.txt"), "offset 0\n0 1 0 -1 0\n").unwrap();
    let out = optspline(
        &[
            "interp", "x.txt", "--kernel", "bspline3", "--q", "8", "--out", "y.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let y = SampledFunction::read_csv(
        std::fs::read_to_string(dir.path().join("y.csv"))
            .unwrap()
            .as_bytes(),
    )
    .unwrap();
    assert!((y.at_integer(1) - 1.0).abs() < 1e-9 && (y.at_integer(3) + 1.0).abs() < 1e-9);
}
