use std::fs;
use std::process::{Command, Output};

use xychain::experiments::{find_fmax, FieldPolicy, Grid1D, SearchOptions};
use xychain::fidelity::{average_fidelity, gamma_fast, FidelityMode};
use xychain::model::{fm_ground_channel, neel_channel};
use xychain::ChainSpec;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xychain")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV document, split into fields (no quoted commas).
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn fidelity_record_matches_library() {
    let csv = stdout(&["fidelity", "--n", "10", "--channel", "neel", "--h", "0.1", "--jt", "6.0"]);
    assert!(csv.starts_with("n,channel,h,jt,mode,fidelity,gamma1,gamma2,gamma3,gamma4,gamma5_re,gamma5_im\n"));
    let row = &rows(&csv)[0];
    let g = gamma_fast(&ChainSpec::afm(10, 0.1).unwrap(), &neel_channel(10).unwrap(), 6.0).unwrap();
    let f = average_fidelity(&g, FidelityMode::Strict);
    assert_eq!(row[5], format!("{:.12}", f).trim_end_matches('0'));
    assert!((num(&row[5]) - 0.909).abs() < 1e-3);
    assert!((num(&row[10]) - g.gamma5.re).abs() < 1e-12);
}

#[test]
fn time_zero_gives_one_half() {
    let csv = stdout(&["fidelity", "--n", "6", "--channel", "neel", "--h", "1.0", "--jt", "0"]);
    assert_eq!(rows(&csv)[0][5], "0.5");
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["fidelity", "--n", "12", "--channel", "2,3,13", "--jt", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("13"));
    assert_eq!(run(&["fidelity", "--n", "4"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--n", "4", "--jt-step", "0"]).status.code(), Some(2));
    assert_eq!(run(&["compare", "--n", "4..6", "--h-policy", "sometimes"]).status.code(), Some(2));
    assert_eq!(run(&["fidelity", "--n", "4", "--jt", "1", "--mode", "fuzzy"]).status.code(), Some(2));
}

#[test]
fn single_point_sweep_equals_fidelity() {
    let sweep =
        stdout(&["sweep", "--n", "8", "--jt-min", "2.5", "--jt-max", "2.5", "--h-min", "0.3", "--h-max", "0.3"]);
    let single = stdout(&["fidelity", "--n", "8", "--h", "0.3", "--jt", "2.5"]);
    assert!(sweep.starts_with("jt,h,fidelity\n"));
    let sweep_rows = rows(&sweep);
    assert_eq!(sweep_rows.len(), 1);
    assert_eq!(sweep_rows[0][2], rows(&single)[0][5]);
}

#[test]
fn sweep_output_is_reproducible_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let base = ["sweep", "--n", "10", "--jt-max", "8", "--format", "json"];
    for (path, workers) in [(&a, "1"), (&b, "4")] {
        let mut args = base.to_vec();
        args.extend(["--workers", workers, "--output", path.to_str().unwrap()]);
        assert!(run(&args).status.success());
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let doc: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(doc["meta"]["command"], "sweep");
    assert_eq!(doc["records"].as_array().unwrap().len(), 161 * 21);
}

#[test]
fn default_sweep_peaks_near_the_reported_point() {
    let csv = stdout(&["sweep", "--n", "10"]);
    let best = rows(&csv).into_iter().map(|r| (num(&r[2]), num(&r[0]), num(&r[1]))).fold((0.0, 0.0, 0.0), |a, b| {
        if b.0 > a.0 {
            b
        } else {
            a
        }
    });
    // the grid maximum sits a little above the 0.909 quoted for Jt = 6, 2h/J = 0.2
    assert!(best.0 > 0.9 && best.0 < 0.94, "{best:?}");
    assert!((best.1 - 6.0).abs() < 0.5);
}

#[test]
fn compare_rows_match_library() {
    let csv = stdout(&["compare", "--n", "7", "--h-policy", "fixed:0.0", "--jt-max", "100"]);
    assert!(csv.starts_with("n,channel,mode,f_max,t_max,h_star\n"));
    let table = rows(&csv);
    assert_eq!(table.len(), 2);
    let window = Grid1D::new(0.0, 100.0, 0.01).unwrap();
    let spec = ChainSpec::afm(7, 0.0).unwrap();
    for (row, pair) in table.iter().zip([fm_ground_channel(7).unwrap(), neel_channel(7).unwrap()]) {
        let r =
            find_fmax(&spec, &pair, &window, FidelityMode::Strict, &FieldPolicy::Fixed(0.0), &SearchOptions::default())
                .unwrap();
        assert!((num(&row[3]) - r.f_max).abs() < 1e-11);
        assert!((num(&row[4]) - r.t_max).abs() < 1e-9);
    }
    assert!(num(&table[1][3]) >= num(&table[0][3]));
}

#[test]
fn tmax_agrees_between_channels_under_optimal_field() {
    let csv = stdout(&["tmax", "--n", "5..6", "--h-policy", "optimal", "--h-step", "0.05"]);
    let table = rows(&csv);
    assert_eq!(table.len(), 4);
    for pair in table.chunks(2) {
        assert_eq!(pair[0][1], "fm");
        assert_eq!(pair[1][1], "neel");
        assert!((num(&pair[0][3]) - num(&pair[1][3])).abs() < 1e-3);
        assert!(num(&pair[0][4]) > 0.999);
    }
}

#[test]
fn ordering_differences_vanish() {
    let out =
        stdout(&["ordering", "--n", "6", "--h", "1.0", "--pattern", "2,3,4", "--pattern", "3,4,5", "--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(doc["meta"]["max_abs_difference"].as_f64().unwrap() < 1e-12);
    let same =
        stdout(&["ordering", "--n", "6", "--h", "1.0", "--pattern", "2,4,6", "--pattern", "2,4,6", "--jt-max", "50"]);
    let table: Vec<Vec<String>> =
        same.lines().skip(1).map(|l| l.rsplitn(2, ',').map(str::to_string).collect()).collect();
    assert!(table.iter().all(|r| r[0] == "0"));
    let mismatched = run(&["ordering", "--n", "6", "--pattern", "2,3", "--pattern", "2,3,4"]);
    assert_eq!(mismatched.status.code(), Some(2));
}

#[test]
fn oracle_check_exit_codes() {
    let ok = run(&["oracle-check", "--n", "2..7", "--draws", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    let table = String::from_utf8(ok.stdout).unwrap();
    assert!(table.lines().skip(1).all(|l| l.ends_with(",true")));

    let strict = run(&["oracle-check", "--n", "4..5", "--draws", "2", "--tol", "1e-16"]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&strict.stdout).contains(",false"));

    assert_eq!(run(&["oracle-check", "--n", "20"]).status.code(), Some(3));
}

#[test]
fn resource_limits_exit_three() {
    let out =
        run(&["sweep", "--n", "4", "--jt-max", "100000", "--jt-step", "0.001", "--h-max", "1", "--h-step", "0.01"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    fs::write(&config, "# peak point\nn = 10\nchannel = neel\nh = 0.1\njt = 6.0\n").unwrap();
    let from_file = stdout(&["fidelity", "--config", config.to_str().unwrap()]);
    let direct = stdout(&["fidelity", "--n", "10", "--h", "0.1", "--jt", "6.0"]);
    assert_eq!(from_file, direct);
    let overridden = stdout(&["--config", config.to_str().unwrap(), "fidelity", "--jt", "0"]);
    assert_eq!(rows(&overridden)[0][5], "0.5");

    fs::write(&config, "not a pair\n").unwrap();
    assert_eq!(run(&["fidelity", "--config", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn numbers_carry_twelve_significant_digits() {
    let csv = stdout(&["fidelity", "--n", "9", "--h", "0.37", "--jt", "3.3"]);
    for field in &rows(&csv)[0][5..] {
        let digits: String =
            field.trim_start_matches('-').split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect();
        assert!(digits.trim_start_matches('0').len() <= 12, "{field}");
    }
}
