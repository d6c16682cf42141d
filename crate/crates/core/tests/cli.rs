use std::process::{Command, Output};

fn flagflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flagflow"))
        .args(args)
        .env_remove("FLAGFLOW_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn infinity_reports_ten_equilibria() {
    let o = flagflow(&["infinity"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema_version"], 1);
    let eqs = v["equilibria"].as_array().unwrap();
    assert_eq!(eqs.len(), 10);
    assert_eq!(eqs.iter().filter(|e| e["first_octant"] == true).count(), 4);
    for e in eqs {
        assert_eq!(e["eigenvalues"].as_array().unwrap().len(), 3);
        assert!(e["eigenvalues"][0]["re"].is_number() && e["eigenvalues"][0]["im"].is_number());
        assert!(["attractor", "repeller", "saddle", "nonhyperbolic"].contains(&e["stability"].as_str().unwrap()));
        assert!(e["chart"].as_str().unwrap().starts_with('U'));
    }
}

#[test]
fn verify_lines_passes() {
    let o = flagflow(&["verify", "--lines"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 4);
    assert!(checks
        .iter()
        .all(|c| c["passed"] == true && c["value"].as_f64().unwrap() <= 1e-13));
}

#[test]
fn verify_all_passes() {
    let o = flagflow(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn blow_up_exits_two() {
    let o = flagflow(&["integrate", "--system", "poly", "--x0", "1,1,1", "--t-end", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("blow-up"), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("t,x1,x2,x3\n"));
}

#[test]
fn integrate_writes_seventeen_digit_csv() {
    let o = flagflow(&["integrate", "--system", "poly", "--x0", "1,1,1", "--t-end", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let last = out.lines().last().unwrap();
    let cols: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cols[0], 0.1);
    assert!((cols[1] - 2.0).abs() < 1e-7);
    assert!(last.split(',').all(|c| c.contains('e')));
}

#[test]
fn compactified_integration_reports_charts() {
    let o = flagflow(&[
        "integrate",
        "--system",
        "poly",
        "--x0",
        "1,2,3",
        "--compactified",
        "--t-end",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("t,x1,x2,x3,chart,z1,z2,z3\n"));
    // The run starts in the chart with the largest dividing coordinate, y3.
    assert_eq!(out.lines().nth(1).unwrap().split(',').nth(4), Some("U3"));
}

#[test]
fn x0_sign_rules() {
    assert_eq!(
        flagflow(&["integrate", "--system", "ricci", "--x0", "-1,1,1"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        flagflow(&["integrate", "--system", "ricci", "--x0", "0,1,1"])
            .status
            .code(),
        Some(1)
    );
    let o = flagflow(&["integrate", "--system", "poly", "--x0", "-1,0,1", "--t-end", "0.01"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        flagflow(&["integrate", "--system", "ricci", "--x0", "1,1,1", "--compactified"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(flagflow(&["integrate", "--x0", "1,1"]).status.code(), Some(1));
}

#[test]
fn ricci_json_and_csv() {
    let o = flagflow(&["ricci", "--metric", "1,1,1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["ricci"][0].as_f64().unwrap() - 5.0 / 12.0).abs() < 1e-15);
    assert!((v["einstein_constant"].as_f64().unwrap() - 5.0 / 12.0).abs() < 1e-15);
    let o = flagflow(&["ricci", "--metric", "2,2,2"]);
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    let r: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
    assert!((r - 5.0 / 24.0).abs() < 1e-15);
}

#[test]
fn lyapunov_csv_schema() {
    let o = flagflow(&["lyapunov", "--transient-fraction", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "line,chart,lambda1,lambda2,lambda3,t_used,converged"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("2,U1,"));
}

#[test]
fn basin_output_is_byte_identical_for_a_seed() {
    let a = flagflow(&["basin", "--line", "2", "--samples", "12", "--seed", "5"]);
    let b = flagflow(&["basin", "--line", "2", "--samples", "12", "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    for key in [
        "line",
        "epsilon",
        "delta",
        "samples",
        "seed",
        "converged_fraction",
        "max_line_deviation",
        "records",
    ] {
        assert!(!v[key].is_null(), "{key}");
    }
    assert_eq!(v["seed"], 5);
}

#[test]
fn saddle_basin_reports_verification_failure() {
    let o = flagflow(&["basin", "--line", "1", "--samples", "5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("\"converged_fraction\""));
}

#[test]
fn seed_precedence_env_config_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# basin settings\nseed = 21\nsamples = 3\nline = 2\n").unwrap();
    let seed_of = |cmd: &mut Command| -> u64 {
        let o = cmd.output().unwrap();
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["seed"].as_u64().unwrap()
    };
    let bin = env!("CARGO_BIN_EXE_flagflow");
    let base = ["basin", "--samples", "3"];
    assert_eq!(seed_of(Command::new(bin).args(base).env_remove("FLAGFLOW_SEED")), 7);
    assert_eq!(seed_of(Command::new(bin).args(base).env("FLAGFLOW_SEED", "13")), 13);
    let with_cfg = ["basin", "--config", cfg.to_str().unwrap()];
    assert_eq!(seed_of(Command::new(bin).args(with_cfg).env("FLAGFLOW_SEED", "13")), 21);
    let mut with_flag = with_cfg.to_vec();
    with_flag.extend(["--seed", "4"]);
    assert_eq!(
        seed_of(Command::new(bin).args(&with_flag).env("FLAGFLOW_SEED", "13")),
        4
    );
}

#[test]
fn unknown_config_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "sed = 3\n").unwrap();
    let o = flagflow(&["infinity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown key"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eq.csv");
    let o = flagflow(&["infinity", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn plot_emits_svg() {
    let o = flagflow(&["plot", "--per-line", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let svg = stdout(&o);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert_eq!(svg.matches("<circle").count(), 1 + 20);
}

#[test]
fn every_subcommand_names_its_construct() {
    let expect = [
        ("ricci", "Ricci components"),
        ("integrate", "Ricci flow"),
        ("infinity", "Poincare compactification"),
        ("lyapunov", "Lyapunov exponents"),
        ("verify", "Einstein"),
        ("basin", "invariant line"),
        ("plot", "phase portrait"),
    ];
    for (cmd, phrase) in expect {
        let o = flagflow(&[cmd, "--help"]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains(phrase), "{cmd}: {}", stdout(&o));
    }
}

#[test]
fn bad_invocations_exit_one() {
    assert_eq!(flagflow(&[]).status.code(), Some(1));
    assert_eq!(flagflow(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(flagflow(&["basin", "--epsilon", "0.5"]).status.code(), Some(1));
    assert_eq!(flagflow(&["lyapunov", "--charts", "U9"]).status.code(), Some(1));
    assert_eq!(flagflow(&["infinity", "--grid", "3"]).status.code(), Some(1));
}
