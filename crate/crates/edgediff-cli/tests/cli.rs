//! End-to-end checks of the command-line interface and its exit codes.

use std::path::Path;
use std::process::Command;

fn edgediff() -> Command {
    Command::new(env!("CARGO_BIN_EXE_edgediff"))
}

fn write_png(path: &Path, shade: u8, size: u32) {
    let img = image::RgbImage::from_fn(size, size, |x, y| {
        let v = shade.saturating_add(((x + y) % 32) as u8);
        image::Rgb([v, v / 2 + 40, 255 - v])
    });
    img.save(path).unwrap();
}

#[test]
fn compare_outputs_scores_and_maps() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.png");
    let b = dir.path().join("b.png");
    write_png(&a, 40, 48);
    write_png(&b, 90, 48);
    let out = dir.path().join("maps");

    let result = edgediff()
        .args([
            "compare",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
            "--model",
            "icamdiff",
            "--edge-aware",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("model=icamdiff variant=edge_aware agg_e="));
    for name in ["delta_e", "delta_i", "delta_c", "delta_h"] {
        assert!(out.join(format!("{name}.png")).exists());
        assert!(out.join(format!("{name}.png.minmax.txt")).exists());
    }
}

#[test]
fn compare_self_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.png");
    write_png(&a, 64, 32);
    let result = edgediff()
        .args(["compare", a.to_str().unwrap(), a.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("agg_e=0.000000"), "stdout: {stdout}");
}

#[test]
fn missing_input_exits_with_input_error() {
    let result = edgediff()
        .args(["compare", "/nonexistent/a.png", "/nonexistent/b.png"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn mismatched_dimensions_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.png");
    let b = dir.path().join("b.png");
    write_png(&a, 40, 32);
    write_png(&b, 40, 48);
    let result = edgediff()
        .args(["compare", a.to_str().unwrap(), b.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn bad_flag_value_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.png");
    write_png(&a, 64, 16);
    let result = edgediff()
        .args([
            "compare",
            a.to_str().unwrap(),
            a.to_str().unwrap(),
            "--set",
            "ppd=not_a_number",
        ])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn sweep_synthetic_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let result = edgediff()
        .args([
            "sweep",
            "--synthetic",
            "--size",
            "48",
            "--tmo",
            "reinhard",
            "--param",
            "desaturation",
            "--values",
            "0.0,0.5",
            "--model",
            "icam02",
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let report = std::fs::read_to_string(out.join("report.tsv")).unwrap();
    // 3 synthetic scenes x 2 values x 1 config, plus header.
    assert_eq!(report.lines().count(), 1 + 6);
}

#[test]
fn csf_dump_emits_curves() {
    let result = edgediff()
        .args(["csf-dump", "--samples", "8", "--max-frequency", "30"])
        .output()
        .unwrap();
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "f\tachromatic\tred_green\tblue_yellow");
    assert_eq!(lines.len(), 9);
    // Flattened achromatic and lowpass chromatic curves start at gain 1.
    let first: Vec<&str> = lines[1].split('\t').collect();
    assert_eq!(first[0], "0.000000");
    assert!(first[1].starts_with("1.0"));
    assert!(first[2].starts_with("1.0"));
}

#[test]
fn config_file_applies_and_cli_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("edgediff.cfg");
    std::fs::write(&cfg_path, "model = idiff\nppd = 45\n").unwrap();
    let a = dir.path().join("a.png");
    write_png(&a, 64, 16);
    let result = edgediff()
        .args([
            "compare",
            a.to_str().unwrap(),
            a.to_str().unwrap(),
            "--config",
            cfg_path.to_str().unwrap(),
            "--baseline",
        ])
        .output()
        .unwrap();
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("model=idiff variant=baseline"), "{stdout}");
}
