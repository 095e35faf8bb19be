use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn thermovisco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thermovisco")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SHORT_STATIONARY: &str = "scenario = \"stationary\"\nn = 33\nT_end = 0.05\nk_trials = 2\n";

#[test]
fn stationary_run_has_zero_drift_and_creates_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", SHORT_STATIONARY);
    let out = dir.path().join("nested/out");
    let o = thermovisco(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(out.join("timeseries.csv")).unwrap();
    let headers = r.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        [
            "t", "E_total", "E_kin", "E_el", "E_th", "drift", "mass_theta", "min_theta", "l2_vx", "l2_uxx",
            "l2_thetax", "cum_vx4", "cum_theta_pow", "cum_thetaxx2", "cum_vxx2", "lq_value", "w12_theta",
            "z_residual", "clamp_count"
        ]
    );
    let drift = headers.iter().position(|h| h == "drift").unwrap();
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert!(rows.len() > 1);
    for row in rows {
        assert_eq!(row[drift].parse::<f64>().unwrap(), 0.0);
    }
    let fin = fs::read_to_string(out.join("final_state.csv")).unwrap();
    assert!(fin.starts_with("x,u,v,theta"));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["theory"]["delta_est"]["provenance"], "estimated");
    assert_eq!(summary["parameters"]["gamma0"]["provenance"], "configured");
    assert_eq!(summary["energy"]["max_abs_drift"]["provenance"], "measured");

    let rep = thermovisco(&["report", out.to_str().unwrap()]);
    assert_eq!(rep.status.code(), Some(0));
    let text = String::from_utf8(rep.stdout).unwrap();
    assert!(text.contains("no blow-up"));
    assert!(text.contains("estimate, not certified"));
}

#[test]
fn out_of_range_alpha_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "scenario = \"coupled\"\nalpha = 1.6\n");
    let o = thermovisco(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn unreadable_config_is_a_config_error() {
    let o = thermovisco(&["run", "--config", "/nonexistent/run.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_names_missing_timeseries() {
    let dir = tempfile::tempdir().unwrap();
    let o = thermovisco(&["report", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("timeseries.csv not found"));
}

#[test]
fn repeated_runs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "scenario = \"coupled\"\nn = 33\nT_end = 0.05\nk_trials = 3\nseed = 11\n",
    );
    let mut outputs = Vec::new();
    for (i, workers) in ["1", "0"].iter().enumerate() {
        let out = dir.path().join(format!("o{i}"));
        let o = thermovisco(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--workers", workers]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push((
            fs::read(out.join("timeseries.csv")).unwrap(),
            fs::read(out.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn blowup_halt_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    // A threshold below the initial norm and a negative rate floor make the detector fire.
    let cfg = write(
        dir.path(),
        "run.toml",
        "scenario = \"coupled\"\nn = 33\nT_end = 0.05\nk_trials = 1\ncadence = 1\n[blowup]\nwindow = 3\nthreshold = 0.0\nrate_min = -1.0\n",
    );
    let o = thermovisco(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn sweep_writes_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        "axis = \"n\"\nvalues = [17, 33]\n[base]\nscenario = \"mms-exp\"\nT_end = 0.02\nk_trials = 1\n",
    );
    let out = dir.path().join("s");
    let o = thermovisco(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mut r = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    assert_eq!(r.records().count(), 2);
    assert!(out.join("point_000/timeseries.csv").is_file());
    assert!(out.join("point_001/summary.json").is_file());

    let empty = write(dir.path(), "empty.toml", "axis = \"delta\"\nvalues = []\n[base]\nscenario = \"coupled\"\n");
    let o = thermovisco(&["sweep", "--config", &empty]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn converge_reports_orders_and_rejects_inexact_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "conv.toml",
        "n_values = [17, 33, 65]\n[base]\nscenario = \"heat-eigenmode\"\nT_end = 0.1\n",
    );
    let o = thermovisco(&["converge", "--config", &cfg, "--out", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let orders: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("c/orders.json")).unwrap()).unwrap();
    let th = orders["order_theta"].as_f64().unwrap();
    assert!((1.8..=2.2).contains(&th), "order {th}");
    assert!(orders["order_u"].is_null());

    let stat = write(dir.path(), "stat.toml", "n_values = [17, 33]\n[base]\nscenario = \"stationary\"\nT_end = 0.01\n");
    let o = thermovisco(&["converge", "--config", &stat, "--out", dir.path().join("d").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("degenerate"));

    let generic = write(dir.path(), "gen.toml", "[base]\nscenario = \"coupled\"\n");
    let o = thermovisco(&["converge", "--config", &generic]);
    assert_eq!(o.status.code(), Some(2));
    let o = thermovisco(&["mms-verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tabulated_laws_resolve_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "gamma.dat", "# xi gamma\n0 1.0\n1 1.05\n10 1.09\n100 1.1\n");
    let cfg = write(
        dir.path(),
        "tab.toml",
        "scenario = \"coupled\"\nn = 33\nT_end = 0.02\nk_trials = 1\ngamma = \"tabulated\"\ngamma_table = \"gamma.dat\"\n",
    );
    let o = thermovisco(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}
