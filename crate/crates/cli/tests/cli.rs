use std::process::{Command, Output};

use spacemimo_core::geometry::{sample_with_rng, trial_rng};
use spacemimo_core::linkmodel::ApertureRegion;

const BIN: &str = env!("CARGO_BIN_EXE_spacemimo");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

const LINK: [&str; 14] = [
    "--power-watts",
    "10",
    "--bandwidth-hz",
    "1e6",
    "--tx-aperture-m2",
    "2",
    "--rx-aperture-m2",
    "50",
    "--range-m",
    "3.6e7",
    "--wavelength-m",
    "0.0107",
    "--noise-psd-w-per-hz",
    "4e-21",
];

#[test]
fn link_loss_in_db_is_converted() {
    let mut args = vec!["link"];
    args.extend(LINK);
    let base = json(&args);
    args.extend(["--loss-db", "3"]);
    let lossy = json(&args);
    let ratio = lossy["g"].as_f64().unwrap() / base["g"].as_f64().unwrap();
    assert!((ratio - 0.501_187_233_627_272_2).abs() < 1e-12, "{ratio}");
    let gamma = base["gamma"].as_f64().unwrap();
    assert!((gamma - 10.0 / (1e6 * 4e-21)).abs() <= 1e-9 * gamma);
}

#[test]
fn missing_field_is_a_validation_error() {
    let args: Vec<&str> = std::iter::once("link")
        .chain(
            LINK.iter()
                .copied()
                .filter(|a| !a.starts_with("--wavelength") && *a != "0.0107"),
        )
        .collect();
    let out = run(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wavelength_m"));
}

#[test]
fn bad_grid_is_a_validation_error() {
    let out = run(&["tradeoff", "--m", "2", "--eta-db", "0:10:1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn two_step_grid_has_two_rows() {
    let text = stdout(&["tradeoff", "--m", "2", "--eta-db", "0:10:2"]);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eta_db,eta,xi,m,g");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("1.00000000000e1,"));
}

#[test]
fn tradeoff_json_matches_csv() {
    let csv = stdout(&["tradeoff", "--m", "3", "--eta-db", "2:6:3"]);
    let js = json(&[
        "tradeoff", "--m", "3", "--eta-db", "2:6:3", "--format", "json",
    ]);
    let arr = js.as_array().unwrap();
    assert_eq!(arr.len(), 3);
    for (row, obj) in csv.lines().skip(1).zip(arr) {
        let xi: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        let want = obj["xi"].as_f64().unwrap();
        assert!((xi - want).abs() <= 1e-11 * want.abs().max(1e-300));
    }
}

#[test]
fn scenario_file_is_merged_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(
        &path,
        r#"{"m": 4, "c": 8, "gamma": 1e4, "trials": 50, "seed": 3}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let from_file = json(&["mc", "--scenario", p]);
    assert_eq!(from_file["m"], 4);
    assert_eq!(from_file["trials"], 50);
    let overridden = json(&["mc", "--scenario", p, "--m", "2"]);
    assert_eq!(overridden["m"], 2);
    let direct = json(&[
        "mc", "--m", "2", "--c", "8", "--gamma", "1e4", "--trials", "50", "--seed", "3",
    ]);
    assert_eq!(overridden, direct);
}

#[test]
fn unknown_scenario_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, r#"{"m": 4, "bogus": 1}"#).unwrap();
    let out = run(&["mc", "--scenario", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn capacity_reads_a_geometry_file() {
    let dir = tempfile::tempdir().unwrap();
    let region = ApertureRegion::from_ratio(3.0, 1.0, 1.0).unwrap();
    let geom = sample_with_rng(&region, 3, &mut trial_rng(9, 0)).unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(&path, serde_json::to_string(&geom).unwrap()).unwrap();
    let r = json(&[
        "capacity",
        "--geometry",
        path.to_str().unwrap(),
        "--gamma",
        "100",
    ]);
    let eig: Vec<f64> = r["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(eig.len(), 3);
    assert!((eig.iter().sum::<f64>() - 9.0).abs() < 1e-9);
    let xi: f64 = eig.iter().map(|l| (1.0 + 100.0 / 27.0 * l).log2()).sum();
    assert!((r["xi"].as_f64().unwrap() - xi).abs() < 1e-9);
}

#[test]
fn capacity_rejects_point_outside_disc() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(
        &path,
        r#"{"region":{"radius_m":1.0,"wavelength_m":1.0,"range_m":1.0},"tx":[[2.0,0.0]],"rx":[[0.0,0.0]]}"#,
    )
    .unwrap();
    let out = run(&[
        "capacity",
        "--geometry",
        path.to_str().unwrap(),
        "--gamma",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn single_antenna_mc_has_zero_spread() {
    let r = json(&[
        "mc", "--m", "1", "--c", "4", "--gamma", "1e3", "--trials", "20", "--seed", "1",
    ]);
    assert_eq!(r["std_error"].as_f64().unwrap(), 0.0);
    assert!((r["mean_xi"].as_f64().unwrap() - 1001f64.log2()).abs() < 1e-12);
}

#[test]
fn single_trial_is_reproducible() {
    let args = [
        "mc", "--m", "5", "--c", "6", "--snr-db", "30", "--trials", "1", "--seed", "7",
    ];
    assert_eq!(stdout(&args), stdout(&args));
    let other = stdout(&[
        "mc", "--m", "5", "--c", "6", "--snr-db", "30", "--trials", "1", "--seed", "8",
    ]);
    assert_ne!(stdout(&args), other);
}

#[test]
fn eigen_energy_matches_trace() {
    let text = stdout(&["eigen", "--c", "2"]);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("index,singular_value,squared_value,cumulative_energy_fraction")
    );
    let last = lines.last().unwrap();
    let frac: f64 = last.split(',').nth(3).unwrap().parse().unwrap();
    assert!((frac - 1.0).abs() < 1e-12);
    let js = json(&["eigen", "--c", "2", "--format", "json"]);
    let sv = js["singular_values"].as_array().unwrap();
    let energy: f64 = sv.iter().map(|s| s.as_f64().unwrap().powi(2)).sum();
    // |S|² with λ = d = L = 1 and |S| = c
    assert!((energy / 4.0 - 1.0).abs() < 1e-6, "{energy}");
}

#[test]
fn optimal_m_is_non_decreasing() {
    let text = stdout(&["optimal-m", "--eta-db", "-3:30:34", "--m-max", "128"]);
    let rows: Vec<(usize, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 34);
    assert!(rows
        .windows(2)
        .all(|w| w[1].0 >= w[0].0 && w[1].1 >= w[0].1));
    assert_eq!(rows[0], (1, 0.0));
    assert!(rows.last().unwrap().0 > 1);
}

#[test]
fn dof_cap_limits_growth() {
    let free = stdout(&["tradeoff", "--m", "64", "--eta-db", "30:40:2"]);
    let capped = stdout(&["tradeoff", "--m", "64", "--eta-db", "30:40:2", "--dof", "4"]);
    let xi = |t: &str| -> f64 {
        t.lines()
            .nth(2)
            .unwrap()
            .split(',')
            .nth(2)
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(xi(&capped) < xi(&free));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("o.csv");
    let args = [
        "optimal-m",
        "--eta-db",
        "0:10:3",
        "--out",
        path.to_str().unwrap(),
    ];
    assert!(stdout(&args).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert_eq!(written, stdout(&["optimal-m", "--eta-db", "0:10:3"]));
}
