//! Golden-file and exit-code tests for the `asymap` command line.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the files under `tests/golden`.

use std::path::{Path, PathBuf};
use std::process::Command;

use asymap::cli::{exit, run, Output};

fn scenario(name: &str) -> String {
    format!("{}/scenarios/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn golden(name: &str, actual: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

fn asymap(args: &[&str]) -> Output {
    let mut argv = vec!["asymap"];
    argv.extend_from_slice(args);
    run(argv)
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", o.stdout))
}

#[test]
fn feasibility_two_bs_load() {
    let o = asymap(&["feasibility", &scenario("two_bs_load"), "--fixed-point", "--rank"]);
    assert_eq!(o.code, exit::FEASIBLE, "{}", o.stderr);
    assert!(o.stderr.is_empty());
    golden("feasibility_two_bs.txt", &o.stdout);

    let o = asymap(&["feasibility", &scenario("two_bs_load"), "--json"]);
    assert_eq!(o.code, exit::FEASIBLE);
    let v = json(&o);
    let m12 = std::f64::consts::LN_2 * 1e6 * 0.5 / (100.0 * 1.8e5);
    assert!((v["rho"].as_f64().unwrap() - m12).abs() < 1e-12);
    assert!((v["rho"].as_f64().unwrap() - 0.01925).abs() < 1e-5);
    assert_eq!(v["verdict"], "feasible");
    golden("feasibility_two_bs.json", &o.stdout);
}

#[test]
fn feasibility_affine_examples() {
    let o = asymap(&["feasibility", &scenario("canonical_affine"), "--fixed-point"]);
    assert_eq!(o.code, exit::FEASIBLE);
    golden("feasibility_affine.txt", &o.stdout);

    let o = asymap(&["feasibility", &scenario("infeasible_affine")]);
    assert_eq!(o.code, exit::INFEASIBLE);
    golden("feasibility_infeasible.txt", &o.stdout);
}

#[test]
fn feasibility_near_critical() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(
        dir.path(),
        "critical.json",
        r#"{"affine": {"matrix": [[0, 1.00000001], [1.00000001, 0]], "u": [1, 1]}, "norm_a": "max", "norm_b": "max"}"#,
    );
    let o = asymap(&["feasibility", &p]);
    assert_eq!(o.code, exit::NEAR_CRITICAL, "{}", o.stdout);
    assert!(o.stdout.contains("verdict: near-critical"));
}

#[test]
fn feasibility_input_errors() {
    let o = asymap(&["feasibility", &scenario("empty_cell")]);
    assert_eq!(o.code, exit::INPUT_ERROR);
    assert!(o.stdout.is_empty());
    assert!(
        o.stderr.contains("base station 1 has no assigned users"),
        "{}",
        o.stderr
    );
    assert!(o.stderr.contains("line 5"), "{}", o.stderr);

    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(
        dir.path(),
        "broken.json",
        "{\n  \"norm_a\": \"max\",\n  \"norm_b\": [\n}",
    );
    let o = asymap(&["feasibility", &p]);
    assert_eq!(o.code, exit::INPUT_ERROR);
    assert!(o.stderr.contains("line 4"), "{}", o.stderr);

    let o = asymap(&["feasibility"]);
    assert_eq!(o.code, exit::INPUT_ERROR);
    let o = asymap(&["bogus", &scenario("two_bs_load")]);
    assert_eq!(o.code, exit::INPUT_ERROR);
}

fn sweep_into(dir: &Path, stem: &str, scenario_name: &str, grid_args: &[&str]) -> (Output, PathBuf, PathBuf) {
    let prefix = dir.join(stem);
    let prefix_s = prefix.to_string_lossy().into_owned();
    let scen = scenario(scenario_name);
    let mut args = vec!["sweep", scen.as_str(), "--out", prefix_s.as_str()];
    args.extend_from_slice(grid_args);
    let o = asymap(&args);
    let (s, p) = asymap::cli::sweep_paths(&prefix);
    (o, s, p)
}

fn normalized(o: &Output, dir: &Path) -> String {
    o.stdout.replace(&*dir.to_string_lossy(), "<out>")
}

#[test]
fn sweep_affine_grid() {
    let dir = tempfile::tempdir().unwrap();
    let (o, sweep_csv, power_csv) = sweep_into(dir.path(), "affine", "canonical_affine", &["--grid", "0.1,2,1e3"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("transition point: 2.00000000000e0"), "{}", o.stdout);
    let csv = std::fs::read_to_string(&sweep_csv).unwrap();
    let utility: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let closed = |p: f64| p / (0.5 * p + 1.0);
    assert_eq!(utility.len(), 3);
    for (u, p) in utility.iter().zip([0.1, 2.0, 1e3]) {
        assert!((u - closed(p)).abs() < 1e-10 * closed(p), "{u} vs {}", closed(p));
    }
    assert!((utility[0] - 0.0952).abs() < 1e-4 && (utility[2] - 1.996).abs() < 1e-3);
    golden("sweep_affine.txt", &normalized(&o, dir.path()));
    golden("sweep_affine_sweep.csv", &csv);
    golden("sweep_affine_power.csv", &std::fs::read_to_string(&power_csv).unwrap());
}

#[test]
fn sweep_two_bs_log_grid() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--pbar-min", "1e-12", "--pbar-max", "1e2", "--points", "15", "--log"];
    let (o, sweep_csv, power_csv) = sweep_into(dir.path(), "load", "two_bs_load", &args);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let csv = std::fs::read_to_string(&sweep_csv).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "p_bar,utility,ee,utility_bound,ee_bound,regime,status"
    );
    assert_eq!(csv.lines().count(), 16);
    assert!(!csv.contains('\r'));
    let p_bars: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(p_bars.windows(2).all(|w| w[0] < w[1]));
    golden("sweep_two_bs.txt", &normalized(&o, dir.path()));
    golden("sweep_two_bs_sweep.csv", &csv);
    golden("sweep_two_bs_power.csv", &std::fs::read_to_string(&power_csv).unwrap());

    let out = dir.path().join("json").to_string_lossy().into_owned();
    let o = asymap(&[
        "sweep",
        &scenario("two_bs_load"),
        "--out",
        &out,
        "--json",
        "--grid",
        "1,10",
    ]);
    assert_eq!(o.code, 0);
    let v = json(&o);
    assert!((v["sup_utility"].as_f64().unwrap() * v["lambda_inf"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn sweep_csv_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--pbar-min", "1e-3", "--pbar-max", "1e4", "--points", "25", "--log"];
    let (_, sa, pa) = sweep_into(a.path(), "run", "three_cell_db", &args);
    let (_, sb, pb) = sweep_into(b.path(), "run", "three_cell_db", &args);
    assert_eq!(std::fs::read(sa).unwrap(), std::fs::read(sb).unwrap());
    assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
}

#[test]
fn sweep_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (o, s, _) = sweep_into(
        dir.path(),
        "x",
        "canonical_affine",
        &["--pbar-min", "1", "--pbar-max", "2", "--points", "1"],
    );
    assert_eq!(o.code, exit::INPUT_ERROR);
    assert!(o.stderr.contains("usage"), "{}", o.stderr);
    assert!(!s.exists());
    let (o, _, _) = sweep_into(
        dir.path(),
        "x",
        "canonical_affine",
        &["--pbar-min", "3", "--pbar-max", "2"],
    );
    assert_eq!(o.code, exit::INPUT_ERROR);
    let (o, _, _) = sweep_into(dir.path(), "x", "canonical_affine", &["--pbar-min", "1"]);
    assert_eq!(o.code, exit::INPUT_ERROR);
}

#[test]
fn eigen_examples() {
    let o = asymap(&["eigen", &scenario("canonical_affine")]);
    assert_eq!(o.code, 0);
    golden("eigen_affine_asymptotic.txt", &o.stdout);

    let o = asymap(&["eigen", &scenario("canonical_affine"), "--target", "mapping", "--json"]);
    assert_eq!(o.code, 0);
    let v = json(&o);
    assert!((v["lambda"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert_eq!(v["fixed_point_in_unit_ball"], false);
    golden("eigen_affine_mapping.json", &o.stdout);

    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(
        dir.path(),
        "sum.json",
        r#"{"affine": {"matrix": [[0, 0.5], [0.5, 0]], "u": [1, 1]}, "norm_a": "sum", "norm_b": "max"}"#,
    );
    let v = json(&asymap(&["eigen", &p, "--json"]));
    assert!((v["lambda"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["x"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["x"][1].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn eigen_load_matches_feasibility() {
    let o = asymap(&["eigen", &scenario("two_bs_load")]);
    assert_eq!(o.code, 0);
    golden("eigen_two_bs.txt", &o.stdout);
    for name in ["two_bs_load", "three_cell_db"] {
        let e = json(&asymap(&["eigen", &scenario(name), "--json"]));
        let f = json(&asymap(&["feasibility", &scenario(name), "--json"]));
        let (l, r) = (e["lambda"].as_f64().unwrap(), f["rho"].as_f64().unwrap());
        assert!((l - r).abs() < 1e-8 * r, "{name}: {l} vs {r}");
    }
}

#[test]
fn eigen_non_convergence_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(
        dir.path(),
        "slow.json",
        r#"{"affine": {"matrix": [[0.1, 0.7, 0.2], [0.3, 0.0, 0.6], [0.5, 0.4, 0.1]], "u": [1, 2, 3]},
            "norm_a": "max", "norm_b": "max", "solver": {"max_iter": 2}}"#,
    );
    let o = asymap(&["eigen", &p, "--target", "mapping"]);
    assert_eq!(o.code, exit::NO_CONVERGENCE, "{}", o.stdout);
    assert!(o.stderr.contains("did not converge"));
}

#[test]
fn check_examples() {
    let o = asymap(&["check", &scenario("two_bs_load"), "--samples", "500", "--seed", "11"]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    golden("check_two_bs.txt", &o.stdout);
    let again = asymap(&["check", &scenario("two_bs_load"), "--samples", "500", "--seed", "11"]);
    assert_eq!(o, again);

    let o = asymap(&["check", &scenario("canonical_affine"), "--json"]);
    assert_eq!(o.code, 0);
    assert_eq!(json(&o)["passed"], true);
    assert_eq!(o, asymap(&["check", &scenario("canonical_affine"), "--json"]));

    let o = asymap(&["check", &scenario("three_cell_db")]);
    assert_eq!(o.code, 0);

    let o = asymap(&["check", &scenario("two_bs_load"), "--samples", "0"]);
    assert_eq!(o.code, exit::INPUT_ERROR);
}

#[test]
fn check_rejects_zero_gain_at_ingestion() {
    let text = std::fs::read_to_string(scenario("two_bs_load"))
        .unwrap()
        .replace("[0.5, 1.0]]", "[0.0, 1.0]]");
    let dir = tempfile::tempdir().unwrap();
    let p = write_scenario(dir.path(), "zero_gain.json", &text);
    let o = asymap(&["check", &p]);
    assert_eq!(o.code, exit::INPUT_ERROR);
    assert!(o.stdout.is_empty());
    assert!(o.stderr.contains("load.gains[1][0]"), "{}", o.stderr);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_asymap");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap();
    let out = code(&["feasibility", &scenario("two_bs_load")]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: feasible"));
    assert_eq!(
        code(&["feasibility", &scenario("infeasible_affine")]).status.code(),
        Some(2)
    );
    let out = code(&["feasibility", &scenario("empty_cell")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("base station 1"));
    assert_eq!(code(&["--help"]).status.code(), Some(0));
}
