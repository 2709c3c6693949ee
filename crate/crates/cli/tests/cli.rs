use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const GEOMETRY: &str = "[geometry]\np = 350.0\nw = 130.0\nh = 400.0\n";
const CHEAP: &str = "[numerics]\ntruncation_n = 2\nbz_nodes = 4\nky_nodes = 8\n";

fn lamella(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamella")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn run_ok(args: &[&str]) {
    let out = lamella(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_height_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[geometry]\np = 350.0\nw = 130.0\n");
    let out = lamella(&["pressure", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("geometry.h"));
}

#[test]
fn schema_violations_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    for (text, field) in [
        (format!("{GEOMETRY}[material]\nkind = \"copper\"\n"), "kind"),
        (format!("{GEOMETRY}[environment]\ntemperature = -1.0\n"), "environment.temperature"),
        (format!("{GEOMETRY}[grid]\nstart = 500.0\nstop = 100.0\n"), "grid.stop"),
    ] {
        let cfg = write(dir.path(), "c.toml", &text);
        let out = lamella(&["lifshitz", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2));
        assert!(String::from_utf8_lossy(&out.stderr).contains(field), "{field}");
    }
}

#[test]
fn ideal_metal_lifshitz_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!(
            "{GEOMETRY}[material]\nplasma_frequency = 1e4\ndissipation_rate = 0.0\nkind = \"plasma\"\n\
             [environment]\ntemperature = 1.0\n[grid]\nstart = 500.0\nstop = 2000.0\ncount = 3\nspacing = \"log\"\n"
        ),
    );
    let out = dir.path().join("l.csv");
    run_ok(&["lifshitz", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let table = rows(&out);
    assert_eq!(table[0], ["d_nm", "pressure_mPa", "numeric_error_mPa"]);
    for row in &table[1..] {
        let d: f64 = row[0].parse().unwrap();
        let p: f64 = row[1].parse().unwrap();
        let ideal = lamella_core::units::to_millipascal(lamella_core::units::ideal_mirror_pressure(d));
        assert!((p / ideal - 1.0).abs() < 5e-3, "d={d}: {p} vs {ideal}");
    }
    assert!(out.with_file_name("l.csv.manifest.json").exists());
}

#[test]
fn solid_film_pfa_equals_lifshitz_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", "[geometry]\np = 350.0\nw = 350.0\nh = 400.0\n");
    let (a, b) = (dir.path().join("pfa.csv"), dir.path().join("lif.csv"));
    run_ok(&["pfa", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    run_ok(&["lifshitz", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("{GEOMETRY}{CHEAP}[grid]\nstart = 600.0\nstop = 800.0\ncount = 2\n"));
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "2"].iter().enumerate() {
        let out = dir.path().join(format!("p{i}.json"));
        run_ok(&[
            "pressure", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
            "--threads", threads, "--format", "json",
        ]);
        outputs.push((std::fs::read(&out).unwrap(), std::fs::read(out.with_file_name(format!("p{i}.json.manifest.json"))).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let v: serde_json::Value = serde_json::from_slice(&outputs[0].0).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    let m: serde_json::Value = serde_json::from_slice(&outputs[0].1).unwrap();
    assert_eq!(m["library_version"], lamella_core::VERSION);
    assert_eq!(m["config_sha256"][0].as_str().unwrap().len(), 64);
    for p in m["points"].as_array().unwrap() {
        assert!(p["relative_error"].as_f64().unwrap() <= 0.02);
    }
}

#[test]
fn compare_with_itself_gives_unit_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("method = \"pfa\"\n{GEOMETRY}"));
    let out = dir.path().join("cmp.csv");
    run_ok(&["compare", "--config", cfg.to_str().unwrap(), cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let table = rows(&out);
    assert_eq!(table[0], ["d_nm", "pfa_mPa", "pfa_2_mPa", "ratio_pfa_pfa_2"]);
    assert!(table[1..].iter().all(|r| r[3] == "1"));
}

#[test]
fn compare_rejects_different_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.toml", GEOMETRY);
    let b = write(dir.path(), "b.toml", "[geometry]\np = 350.0\nw = 130.0\nh = 200.0\n");
    let out = lamella(&["compare", "--config", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("geometry"));
}

#[test]
fn convergence_ladder_of_one_has_no_delta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("method = \"lifshitz\"\n{GEOMETRY}"));
    let out = dir.path().join("conv.csv");
    run_ok(&[
        "convergence", "--knob", "matsubara-cap", "--steps", "1", "--d", "3000",
        "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    let table = rows(&out);
    assert_eq!(table.len(), 2);
    assert_eq!(table[1][0], "matsubara_cap");
    assert_eq!(table[1][5], "");
}

#[test]
fn smooth_reproduces_hand_window() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", &format!("{GEOMETRY}[analysis]\nn_short = 2\nn_long = 2\n"));
    let data = write(
        dir.path(),
        "data.csv",
        "d_nm,pressure_mPa,random_err_mPa,systematic_err_mPa\n300,10,1,0.2\n310,20,2,0.2\n320,5,1,0.2\n",
    );
    let out = dir.path().join("s.csv");
    run_ok(&[
        "smooth", "--input", data.to_str().unwrap(), "--normalize",
        "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(),
    ]);
    let table = rows(&out);
    assert_eq!(table[0].last().unwrap(), "ratio_err");
    assert_eq!(table.len(), 3);
    let p: f64 = table[1][1].parse().unwrap();
    let e: f64 = table[1][2].parse().unwrap();
    assert!((p - 12.0).abs() < 1e-12 && (e - 0.894).abs() < 5e-4);
}

#[test]
fn smooth_rejects_missing_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", GEOMETRY);
    let data = write(dir.path(), "data.csv", "d_nm,pressure_mPa\n300,10\n");
    let out = lamella(&["smooth", "--input", data.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("random_err_mPa"));
}

#[test]
fn shipped_config_is_valid() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml");
    let out = lamella(&["lifshitz", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
