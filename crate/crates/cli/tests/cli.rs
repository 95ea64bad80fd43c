use std::path::Path;
use std::process::{Command, Output};

fn qfridge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfridge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header row and data rows of a CSV with a `#` preamble.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let head = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (head, rows)
}

fn col(head: &[String], name: &str) -> usize {
    head.iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn undriven_floquet_has_only_the_static_harmonic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[drive]\namplitude = 0.0\n");
    let text = stdout(&qfridge(&[
        "floquet", "--preset", "sideband", "--config", &cfg,
    ]));
    let (head, rows) = table(&text);
    let k = col(&head, "k");
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[k] == "0"));
}

#[test]
fn driven_floquet_sidebands_peak_at_resonances() {
    let text = stdout(&qfridge(&["floquet", "--preset", "figure67"]));
    let (head, rows) = table(&text);
    let (w, k, a) = (col(&head, "omega"), col(&head, "k"), col(&head, "abs2"));
    let side: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r[k] == "-1")
        .map(|r| (num(&r[w]), num(&r[a])))
        .collect();
    let best = side
        .iter()
        .cloned()
        .fold((0.0, 0.0), |m, p| if p.1 > m.1 { p } else { m });
    assert!((best.0 - 1.0).abs() < 0.02, "argmax at {}", best.0);
    // Second resonance where ω − ω_d hits the other side of the line.
    let local = side
        .windows(3)
        .filter(|s| s[1].1 > s[0].1 && s[1].1 > s[2].1)
        .map(|s| s[1].0)
        .find(|&x| x > 1.5)
        .expect("secondary maximum");
    assert!((local - 1.9).abs() < 0.02, "secondary at {local}");
}

#[test]
fn negative_gamma_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[system]\ngamma = -1.0\n");
    let out = qfridge(&["limits", "--preset", "sideband", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("system.gamma"));
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "[system]\ngama = 1e-5\n");
    let out = qfridge(&["limits", "--preset", "sideband", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gama"));
    assert_eq!(qfridge(&["limits"]).status.code(), Some(2));
    assert_eq!(
        qfridge(&["limits", "--preset", "nope"]).status.code(),
        Some(2)
    );
}

#[test]
fn sideband_limit_matches_closed_form() {
    let text = stdout(&qfridge(&["limits", "--preset", "sideband"]));
    let (head, rows) = table(&text);
    let n = num(&rows[0][col(&head, "occupancy")]);
    let wd = num(&rows[0][col(&head, "omega_d")]);
    assert!((n / 2.5e-5 - 1.0).abs() < 0.05, "n = {n}");
    assert!((wd - 0.999).abs() < 1e-3, "ω_d = {wd}");
}

#[test]
fn spectrum_lines_sit_at_the_sidebands() {
    let text = stdout(&qfridge(&["spectrum", "--preset", "figure67"]));
    let (head, rows) = table(&text);
    let argmax = |name: &str| {
        let (w, c) = (col(&head, "omega"), col(&head, name));
        rows.iter()
            .map(|r| (num(&r[w]), num(&r[c])))
            .fold((0.0, 0.0), |m, p| if p.1 > m.1 { p } else { m })
            .0
    };
    // ω_d = 0.9, ω_m = 0.1, line width 10⁻³.
    assert!((argmax("f_rp") - 1.0).abs() < 1e-3);
    assert!((argmax("f_nrh") - 0.8).abs() < 1e-3);
    assert!(text.contains("# casimir_ratio = "));
}

#[test]
fn validate_passes_on_the_weak_coupling_corner() {
    let dir = tempfile::tempdir().unwrap();
    let out = qfridge(&[
        "validate",
        "--preset",
        "weak-coupling",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{err}");
    for name in ["heat_a", "occupation", "identity", "positivity"] {
        assert!(err.contains(&format!("PASS {name}")), "{err}");
    }
    let csv = std::fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    assert_eq!(table(&csv).1.len(), 4);
}

#[test]
fn validate_rejects_unsupported_scenarios() {
    let out = qfridge(&["validate", "--preset", "figure67"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let a = stdout(&qfridge(&["currents", "--preset", "figure67"]));
    let b = stdout(&qfridge(&["currents", "--preset", "figure67"]));
    assert_eq!(a, b);
}

#[test]
fn header_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = stdout(&qfridge(&[
        "limits", "--preset", "figure67", "--tol", "1e-9",
    ]));
    let body: String = first
        .lines()
        .filter_map(|l| l.strip_prefix("#   "))
        .map(|l| format!("{l}\n"))
        .collect();
    let cfg = write_config(dir.path(), "c.toml", &body);
    let second = stdout(&qfridge(&["limits", "--config", &cfg]));
    assert_eq!(first, second);
    assert!(first.contains("quadrature=1e-9"));
}

#[test]
fn sweep_is_long_format_in_axis_order() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = qfridge(&[
        "sweep",
        "--preset",
        "figure67",
        "--axis",
        "drive.omega_d=0.88:0.9:2",
        "--axis",
        "system.gamma=0.01:0.02:3",
        "--jobs",
        "2",
        "--out",
        d,
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let (head, rows) = table(&csv);
    assert_eq!(
        head,
        [
            "index",
            "drive.omega_d",
            "system.gamma",
            "quantity",
            "value"
        ]
    );
    let occ: Vec<&Vec<String>> = rows.iter().filter(|r| r[3] == "occupancy").collect();
    assert_eq!(occ.len(), 6);
    for (i, r) in occ.iter().enumerate() {
        assert_eq!(r[0], i.to_string());
        assert_eq!(num(&r[1]), [0.88, 0.9][i / 3]);
        assert_eq!(num(&r[2]), [0.01, 0.015, 0.02][i % 3]);
        assert!(num(&r[4]) > 0.0);
    }
    let bad = qfridge(&[
        "sweep",
        "--preset",
        "figure67",
        "--axis",
        "drive.omega_d=0.8",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}
