use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn constants() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/na2.toml")
        .canonicalize()
        .unwrap()
}

fn small_config(dir: &Path, extra_laser: &str, extra: &str) -> PathBuf {
    let text = format!(
        r#"constants = "{}"

[thermal]
T_K = 1000.0
max_nu = 2
max_J = 12

[laser]
{extra_laser}
power_W = 3.0e-4
interaction_length_m = 5.0e-5

[scan]
points = 60

[beam]
n_molecules = 300
seed = 5
sigma_v_rel = 0.02
{extra}
"#,
        constants().display()
    );
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn rovodef(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rovodef"))
        .args(args)
        .output()
        .unwrap()
}

fn run_in(dir: &Path, config: &Path, command: &str, out: &str, more: &[&str]) -> Output {
    let out = dir.join(out);
    let mut args = vec![
        command,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(more);
    rovodef(&args)
}

const TUNED: &str = "offset_from_E_el_cm1 = 666.156";

#[test]
fn levels_are_counted_and_weighted() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), TUNED, "");
    let out = run_in(dir.path(), &cfg, "levels", "o", &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(dir.path().join("o/levels.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# rovodef-csv v1"));
    assert_eq!(lines.next(), Some("nu,J,M,energy_cm1,weight"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2 * 12 * 12);

    // Boltzmann sum from the term values, written out by hand
    let (we, wexe, be, ae, d) = (159.125, 0.7254, 0.15471, 0.000873, 5.81e-7);
    let kt = 1.380_649e-23 * 1000.0 / (6.626_070_15e-34 * 299_792_458.0 * 100.0);
    let energy = |nu: f64, j: f64| {
        let x = nu + 0.5;
        let k = j * (j + 1.0);
        we * x - wexe * x * x + (be - ae * x) * k - d * k * k
    };
    let e0 = energy(0.0, 0.0);
    let mut z = 0.0;
    for nu in 0..2 {
        for j in 0..12 {
            z += (2 * j + 1) as f64 * (-(energy(nu as f64, j as f64) - e0) / kt).exp();
        }
    }
    let ground = rows
        .iter()
        .find(|r| r[0] == 0.0 && r[1] == 0.0 && r[2] == 0.0)
        .unwrap();
    assert!(
        (ground[4] * z - 1.0).abs() < 1e-10,
        "ground weight {} vs {}",
        ground[4],
        1.0 / z
    );
}

#[test]
fn missing_constants_file_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(
        &cfg,
        "constants = \"nowhere/na2.toml\"\n[laser]\noffset_from_E_el_cm1 = 666.156\npower_W = 3e-4\nwaist_m = 2.8e-5\n",
    )
    .unwrap();
    let out = run_in(dir.path(), &cfg, "levels", "o", &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nowhere/na2.toml"), "{err}");
    assert!(!dir.path().join("o/levels.csv").exists());
}

#[test]
fn unknown_keys_and_bad_values_are_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), TUNED, "colour = \"blue\"");
    assert_eq!(
        run_in(dir.path(), &cfg, "levels", "o", &[]).status.code(),
        Some(2)
    );
    let cfg = small_config(
        dir.path(),
        "offset_from_E_el_cm1 = 666.156\nomega_cm1 = 18000.0",
        "",
    );
    assert_eq!(
        run_in(dir.path(), &cfg, "levels", "o", &[]).status.code(),
        Some(2)
    );
    let cfg = small_config(dir.path(), TUNED, "v0_m_s = -3.0");
    assert_eq!(
        run_in(dir.path(), &cfg, "levels", "o", &[]).status.code(),
        Some(2)
    );
    let cfg = small_config(dir.path(), TUNED, "");
    assert_eq!(
        run_in(dir.path(), &cfg, "deflect", "o", &["--state", "0,1,5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn resonant_laser_exits_with_physics_code() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "offset_from_E_el_cm1 = 666.138", "");
    let out = run_in(dir.path(), &cfg, "deflect", "o", &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nonresonance"), "{err}");
    let left: Vec<_> = fs::read_dir(dir.path().join("o")).unwrap().collect();
    assert!(left.is_empty(), "partial output left behind");
}

#[test]
fn deflect_reports_the_ground_state() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), TUNED, "");
    let out = run_in(dir.path(), &cfg, "deflect", "o", &["--state", "0,0,0"]);
    assert!(out.status.success());
    let report = String::from_utf8_lossy(&out.stdout);
    assert!(report.contains("e(nu=6, J=1, M=0)"), "{report}");
    assert!(report.contains("recoil reference"));
    assert!(report.contains("Raman-Nath: satisfied"));
    let csv = fs::read_to_string(dir.path().join("o/deflect.csv")).unwrap();
    assert!(csv.starts_with("# rovodef-csv v1\nquantity,value,unit\n"));
}

#[test]
fn empty_window_gives_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), TUNED, "");
    let text = fs::read_to_string(&cfg).unwrap() + "\n[lines]\nwindow_cm1 = 1e-9\n";
    fs::write(&cfg, text).unwrap();
    let out = run_in(dir.path(), &cfg, "lines", "o", &[]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("o/lines.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn lines_include_the_ground_transition() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), TUNED, "");
    let out = run_in(dir.path(), &cfg, "lines", "o", &[]);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.path().join("o/lines.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("0,0,0,6,1,")));
    assert!(String::from_utf8_lossy(&out.stdout).contains("minimum adjacent spacing"));
}

#[test]
fn scan_is_byte_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), TUNED, "");
    assert!(run_in(dir.path(), &cfg, "scan", "a", &[]).status.success());
    assert!(run_in(dir.path(), &cfg, "scan", "b", &[]).status.success());
    let a = fs::read(dir.path().join("a/scan.csv")).unwrap();
    let b = fs::read(dir.path().join("b/scan.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(
        "# rovodef-csv v1\nomega_cm1,state_nu,state_J,state_M,alpha_rad,masked,g_cm1,delta_cm1,upper_nu,upper_J\n"
    ));
}

#[test]
fn beam_is_seeded() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), TUNED, "");
    let dump = ["--dump-trajectories"];
    assert!(run_in(dir.path(), &cfg, "beam", "a", &dump)
        .status
        .success());
    assert!(run_in(dir.path(), &cfg, "beam", "b", &dump)
        .status
        .success());
    assert!(run_in(
        dir.path(),
        &cfg,
        "beam",
        "c",
        &["--dump-trajectories", "--seed", "6"]
    )
    .status
    .success());
    let read = |d: &str| fs::read(dir.path().join(d).join("trajectories.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    let hist = fs::read_to_string(dir.path().join("a/histogram.csv")).unwrap();
    let total: u64 = hist
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 300);
}

#[test]
fn beam_single_state_selection() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), TUNED, "");
    let out = run_in(dir.path(), &cfg, "beam", "o", &["--state", "0,0,0"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let hist = fs::read_to_string(dir.path().join("o/histogram.csv")).unwrap();
    let header = hist.lines().nth(1).unwrap();
    assert_eq!(
        header,
        "bin_lo_rad,bin_hi_rad,count_total,count_state_0_0_0"
    );
}
