//! End-to-end tests of the statfuse binary.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statfuse::io;
use statfuse::raster::{Band, ImageStack};

use common::random_band;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_statfuse"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scene() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/scene.ppm"))
}

fn write_stack(path: &Path, stack: &ImageStack, maxval: u32) {
    io::write_image(stack, path, maxval).unwrap();
}

/// Random integer-valued test pair: 3-band MS plus an aligned PAN.
fn test_pair(dir: &Path, ratio: usize) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(7777);
    let (lw, lh) = (20, 16);
    let ms_bands: Vec<Band> = (0..3)
        .map(|_| {
            let b = random_band(&mut rng, lw, lh, 0.0, 255.0);
            // integer DN so files round-trip exactly
            Band::new(
                lw,
                lh,
                b.data().iter().map(|v| v.round()).collect(),
                8,
            )
            .unwrap()
        })
        .collect();
    let pan = random_band(&mut rng, lw * ratio, lh * ratio, 0.0, 255.0);
    let pan = Band::new(
        pan.width(),
        pan.height(),
        pan.data().iter().map(|v| v.round()).collect(),
        8,
    )
    .unwrap();
    let ms_path = dir.join("ms.ppm");
    let pan_path = dir.join("pan.pgm");
    write_stack(&ms_path, &ImageStack::new(ms_bands).unwrap(), 255);
    write_stack(&pan_path, &ImageStack::new(vec![pan]).unwrap(), 255);
    (pan_path, ms_path)
}

#[test]
fn fuse_writes_three_band_image_at_pan_size() {
    let dir = tempfile::tempdir().unwrap();
    let (pan, ms) = test_pair(dir.path(), 5);
    let out = dir.path().join("fused.ppm");
    let output = bin()
        .args(["fuse", "--method", "rvs", "--ratio", "5"])
        .arg(&pan)
        .arg(&ms)
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let fused = io::read_image(&out).unwrap();
    assert_eq!(fused.band_count(), 3);
    assert_eq!((fused.width(), fused.height()), (100, 80));
    // per-band timing lines go to stderr
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("band 1 fused"), "{stderr}");
}

#[test]
fn fuse_lcm_ratio_one_reproduces_ms_file() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    let bands: Vec<Band> = (0..3)
        .map(|_| {
            let b = random_band(&mut rng, 12, 9, 0.0, 255.0);
            Band::new(12, 9, b.data().iter().map(|v| v.round()).collect(), 8).unwrap()
        })
        .collect();
    let ms_path = dir.path().join("ms.ppm");
    write_stack(&ms_path, &ImageStack::new(bands.clone()).unwrap(), 255);
    // any PAN of the same size works; LCM at ratio 1 returns MS exactly
    let pan_path = dir.path().join("pan.pgm");
    let pan = random_band(&mut rng, 12, 9, 0.0, 255.0);
    write_stack(&pan_path, &ImageStack::new(vec![pan]).unwrap(), 255);

    let out = dir.path().join("fused.ppm");
    let output = bin()
        .args(["fuse", "--method", "lcm", "--ratio", "1"])
        .arg(&pan_path)
        .arg(&ms_path)
        .arg("-o")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&ms_path).unwrap());
}

#[test]
fn missing_input_exits_one_and_names_the_path() {
    let output = run(&["fuse", "--method", "lmm", "/no/such/pan.pgm", "/no/such/ms.ppm"]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("/no/such/pan.pgm"), "{stderr}");
}

#[test]
fn misaligned_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let (pan, ms) = test_pair(dir.path(), 5);
    let output = bin()
        .args(["fuse", "--method", "lmm", "--ratio", "3"])
        .arg(&pan)
        .arg(&ms)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("ratio 3"), "{stderr}");
}

#[test]
fn usage_error_exits_one() {
    let output = run(&["fuse", "--method"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn evaluate_self_comparison_has_zero_nrmse_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (_, ms) = test_pair(dir.path(), 1);
    let report_path = dir.path().join("report.csv");
    let output = bin()
        .args(["evaluate"])
        .arg(&ms)
        .arg(&ms)
        .arg("-o")
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = std::fs::read_to_string(&report_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // header + 3 ORIGIN rows + 3 FUSED rows
    assert_eq!(lines.len(), 7);
    let fused_rows: Vec<&str> = lines[4..].to_vec();
    for row in fused_rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], "FUSED");
        assert_eq!(fields[5], "0.0000", "NRMSE column: {row}");
    }
}

#[test]
fn evaluate_matches_direct_library_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let (pan, ms) = test_pair(dir.path(), 2);
    let fused_path = dir.path().join("fused.ppm");
    assert!(bin()
        .args(["fuse", "--method", "lmvm", "--ratio", "2"])
        .arg(&pan)
        .arg(&ms)
        .arg("-o")
        .arg(&fused_path)
        .status()
        .unwrap()
        .success());
    let report_path = dir.path().join("report.csv");
    assert!(bin()
        .args(["evaluate"])
        .arg(&fused_path)
        .arg(&ms)
        .arg("-o")
        .arg(&report_path)
        .status()
        .unwrap()
        .success());

    let fused = io::read_image(&fused_path).unwrap();
    let reference = io::read_image(&ms).unwrap();
    let report = statfuse::metrics::evaluate_labeled("FUSED", &fused, &reference, 256).unwrap();
    let expected = statfuse::io::render_report_csv(&report);
    assert_eq!(std::fs::read_to_string(&report_path).unwrap(), expected);
}

#[test]
fn evaluate_rejects_band_count_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let (pan, ms) = test_pair(dir.path(), 1);
    let output = bin().args(["evaluate"]).arg(&pan).arg(&ms).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn compare_method_subset_filters_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (pan, ms) = test_pair(dir.path(), 2);
    let outdir = dir.path().join("out");
    let output = bin()
        .args(["compare"])
        .arg(&pan)
        .arg(&ms)
        .args(["--ratio", "2", "--methods", "lmm,rvs", "--outdir"])
        .arg(&outdir)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = std::fs::read_to_string(outdir.join("report.csv")).unwrap();
    let methods: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert!(methods.contains(&"ORIGIN"));
    assert!(methods.contains(&"LMM"));
    assert!(methods.contains(&"RVS"));
    assert!(!methods.contains(&"LMVM"));
    assert!(!methods.contains(&"LCM"));
    assert!(outdir.join("fused_lmm.ppm").exists());
    assert!(outdir.join("fused_rvs.ppm").exists());
    assert!(!outdir.join("fused_lmvm.ppm").exists());
}

#[test]
fn compare_json_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (pan, ms) = test_pair(dir.path(), 2);
    let outdir = dir.path().join("out");
    assert!(bin()
        .args(["compare"])
        .arg(&pan)
        .arg(&ms)
        .args(["--ratio", "2", "--format", "json", "--outdir"])
        .arg(&outdir)
        .status()
        .unwrap()
        .success());
    let text = std::fs::read_to_string(outdir.join("report.json")).unwrap();
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = rows.as_array().unwrap();
    // 3 ORIGIN + 4 methods x 3 bands
    assert_eq!(rows.len(), 15);
    assert!(rows[0]["SNR"].is_null());
    assert!(rows[4]["CC"].is_number());
}

#[test]
fn synth_equal_weights_pan_is_band_mean() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("synth");
    assert!(bin()
        .args(["synth"])
        .arg(scene())
        .args(["--ratio", "1", "--outdir"])
        .arg(&outdir)
        .status()
        .unwrap()
        .success());
    let reference = io::read_image(scene()).unwrap();
    let pan = io::read_image(outdir.join("pan.pgm")).unwrap();
    for i in 0..reference.width() * reference.height() {
        let mean = (reference.band(0).data()[i]
            + reference.band(1).data()[i]
            + reference.band(2).data()[i])
            / 3.0;
        let stored = (mean.clamp(0.0, 255.0) + 0.5).floor();
        assert_eq!(pan.band(0).data()[i], stored, "pixel {i}");
    }
    // truth file is the reference unchanged
    assert_eq!(
        std::fs::read(outdir.join("truth.ppm")).unwrap(),
        std::fs::read(scene()).unwrap()
    );
}

#[test]
fn synth_ratio_shrinks_ms() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("synth");
    assert!(bin()
        .args(["synth"])
        .arg(scene())
        .args(["--ratio", "4", "--outdir"])
        .arg(&outdir)
        .status()
        .unwrap()
        .success());
    let ms = io::read_image(outdir.join("ms.ppm")).unwrap();
    assert_eq!((ms.width(), ms.height()), (40, 30));
}

#[test]
fn synth_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        assert!(bin()
            .args(["synth"])
            .arg(scene())
            .args(["--ratio", "2", "--seed", "9", "--noise", "1.5", "--outdir"])
            .arg(dir.path().join(sub))
            .status()
            .unwrap()
            .success());
    }
    for name in ["pan.pgm", "ms.ppm", "truth.ppm"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(name)).unwrap(),
            std::fs::read(dir.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn epsilon_env_var_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let (pan, ms) = test_pair(dir.path(), 1);

    // bad value: usage failure
    let output = bin()
        .env("STATFUSE_EPSILON", "not-a-number")
        .args(["fuse", "--method", "lmm"])
        .arg(&pan)
        .arg(&ms)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("STATFUSE_EPSILON"));

    // a huge epsilon degenerates every window, changing the output
    let out_default = dir.path().join("default.ppm");
    let out_env = dir.path().join("env.ppm");
    assert!(bin()
        .args(["fuse", "--method", "lmm"])
        .arg(&pan)
        .arg(&ms)
        .arg("-o")
        .arg(&out_default)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .env("STATFUSE_EPSILON", "1e9")
        .args(["fuse", "--method", "lmm"])
        .arg(&pan)
        .arg(&ms)
        .arg("-o")
        .arg(&out_env)
        .status()
        .unwrap()
        .success());
    assert_ne!(
        std::fs::read(&out_default).unwrap(),
        std::fs::read(&out_env).unwrap()
    );
}

#[test]
fn window_flag_rejects_even_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let (pan, ms) = test_pair(dir.path(), 1);
    let output = bin()
        .args(["fuse", "--method", "lmm", "--window", "4x4"])
        .arg(&pan)
        .arg(&ms)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}
