use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_blowup-profiler"));
    c.env_remove("BLOWUP_PROFILER_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// `key = value` from a report.
fn value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no '{key}' in\n{report}"))
        .parse()
        .unwrap()
}

fn dir_arg(d: &Path) -> String {
    d.display().to_string()
}

#[test]
fn print_config_round_trips_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("run.cfg");
    std::fs::write(&file, "# d=3 case\nd = 3\nsigma=1 # cubic\ndelta_rule = proportional:0.25\nafter_fold = 0.9\n").unwrap();
    let first = run(&["--config", file.to_str().unwrap(), "--print-config"]);
    assert!(first.status.success());
    let text = stdout(&first);
    assert!(text.contains("d = 3\n") && text.contains("delta_rule = proportional:0.25\n"));

    let echoed = tmp.path().join("echo.cfg");
    std::fs::write(&echoed, &text).unwrap();
    let second = run(&["--config", echoed.to_str().unwrap(), "--print-config"]);
    assert_eq!(stdout(&second), text);

    // flags override the file
    let third = run(&["--config", file.to_str().unwrap(), "--eps", "0.125", "--print-config"]);
    assert!(stdout(&third).contains("eps = 0.125\n"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["solve", "--guess", "1.2;0.85"][..],
        &["solve", "--guess", "1.2"][..],
        &["solve", "--guess", "0,0.85"][..],
        &["--set", "bogus=1", "solve", "--guess", "1.2,0.85"][..],
        &["--xi1", "5", "solve", "--guess", "1.2,0.85"][..],
        &["scan", "--rect", "1.5,0.5,0.1,1.0"][..],
        &["tables", "--row", "table9:1"][..],
        &["--jobs", "0", "kummer-check"][..],
        &[][..],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("bad.cfg");
    std::fs::write(&file, "d = 1\nsigma 2.3\n").unwrap();
    let o = run(&["--config", file.to_str().unwrap(), "--print-config"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn solve_reproduces_first_rows() {
    let o = run(&["solve", "--d", "1", "--sigma", "2.3", "--guess", "1.2,0.85"]);
    assert!(o.status.success());
    let r = stdout(&o);
    assert!((value(&r, "mu") - 1.23204).abs() < 2e-3 && (value(&r, "kappa") - 0.85311).abs() < 2e-3, "{r}");
    assert_eq!(value(&r, "j"), 1.0);
    // 17 significant digits
    assert!(r.lines().any(|l| l.starts_with("mu = ") && l.split('e').next().unwrap().len() == "mu = 1.".len() + 16));

    let o = run(&["solve", "--d", "3", "--sigma", "1", "--guess", "1.9,0.92"]);
    let r = stdout(&o);
    assert!((value(&r, "mu") - 1.88529).abs() < 2e-3 && (value(&r, "kappa") - 0.91737).abs() < 2e-3, "{r}");

    // the same root from the other normalization
    let o = run(&["solve", "--normalization", "amplitude", "--guess", "0.33,0.38"]);
    let q = stdout(&o);
    assert!((value(&q, "mu") - value(&r_d1(), "mu")).abs() < 1e-6, "{q}");
}

fn r_d1() -> String {
    stdout(&run(&["solve", "--guess", "1.2,0.85"]))
}

#[test]
fn divergent_newton_exits_with_one() {
    let o = run(&["solve", "--guess", "3.0,0.05"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged"));
}

#[test]
fn scan_boxes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dir_arg(tmp.path());

    let o = run(&["--output-dir", &out, "scan", "--rect", "1.20,1.26,0.82,0.88"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("roots.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "mu,kappa,residual,j");
    assert_eq!(rows.len(), 2, "{csv}");
    let f: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    assert!((f[0] - 1.23204).abs() < 2e-3 && (f[1] - 0.85311).abs() < 2e-3 && f[3] == 1.0);

    // single worker gives the same bytes
    let tmp1 = tempfile::tempdir().unwrap();
    let o1 = run(&["--jobs", "1", "--output-dir", &dir_arg(tmp1.path()), "scan", "--rect", "1.20,1.26,0.82,0.88"]);
    assert!(o1.status.success());
    assert_eq!(std::fs::read_to_string(tmp1.path().join("roots.csv")).unwrap(), csv);

    let o = run(&["--output-dir", &out, "scan", "--rect", "1.3,1.4,0.6,0.7"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(tmp.path().join("roots.csv")).unwrap(), "mu,kappa,residual,j\n");
    assert_eq!(value(&stdout(&o), "roots"), 0.0);
}

#[test]
fn scan_finds_the_first_five_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["--output-dir", &dir_arg(tmp.path()), "scan", "--rect", "0.5,1.5,0.1,1.0"]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(tmp.path().join("roots.csv")).unwrap();
    let found: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    // rows 1-3 and 5 as printed; row 4 by its computed position
    for (mu, kappa, j) in [(1.23204, 0.85311, 1.0), (0.78308, 0.49323, 2.0), (1.12388, 0.34673, 3.0), (0.88387, 0.26676, 4.0), (1.07947, 0.21643, 5.0)] {
        assert!(
            found.iter().any(|r| (r[0] - mu).abs() < 2e-3 && (r[1] - kappa).abs() < 2e-3 && r[3] == j),
            "row {j} missing from\n{csv}"
        );
    }
    let side = std::fs::read_to_string(tmp.path().join("roots_unreliable.csv")).unwrap();
    assert!(side.starts_with("x0_lo,x0_hi,x1_lo,x1_hi,reason\n"));
}

#[test]
fn branches_reach_their_turning_points() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dir_arg(tmp.path());
    let o = run(&["--output-dir", &out, "--set", "after_fold=0.9", "branch", "--seed", "1.2320,0.8531"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = stdout(&o);
    assert!((value(&r, "eps_star") - 0.06064).abs() < 5e-3, "{r}");

    let o = run(&["--output-dir", &out, "--d", "3", "--sigma", "1", "--set", "after_fold=0.9", "branch", "--seed", "0.84,0.3213"]);
    assert!(o.status.success());
    let r = stdout(&o);
    assert!((value(&r, "eps_star") - 0.24402).abs() < 5e-3, "{r}");
    assert_eq!(value(&r, "j"), 2.0);
}

#[test]
fn resume_from_truncated_file_reproduces_the_next_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dir_arg(tmp.path());
    let o = run(&["--output-dir", &out, "--set", "max_points=7", "branch", "--seed", "1.2320,0.8531"]);
    assert!(o.status.success());
    let path = tmp.path().join("branch.jsonl");
    let full = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = full.lines().collect();
    assert_eq!(lines.len(), 8);

    let cut = tmp.path().join("cut.jsonl");
    std::fs::write(&cut, lines[..5].join("\n") + "\n").unwrap();
    let o = run(&["--set", "max_points=5", "branch", "--resume", cut.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["--set", "max_points=6", "branch", "--resume", cut.to_str().unwrap()]);
    assert!(o.status.success());
    let resumed = std::fs::read_to_string(&cut).unwrap();
    let resumed: Vec<&str> = resumed.lines().collect();
    assert_eq!(resumed.len(), 7);
    assert_eq!(resumed[6], lines[6]);
    assert_eq!(resumed[..6], lines[..6]);
}

fn verdict(args: &[&str]) -> (String, String) {
    let tmp = tempfile::tempdir().unwrap();
    let mut all = vec!["--output-dir", tmp.path().to_str().unwrap()];
    all.extend_from_slice(args);
    let o = run(&all);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(tmp.path().join("verdict.json")).unwrap();
    let csv = std::fs::read_to_string(tmp.path().join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("re,im,is_doublet\n"));
    assert_eq!(csv.lines().filter(|l| l.ends_with(",true")).count(), 2);
    (stdout(&o), json)
}

#[test]
fn spectrum_verdicts_on_the_branches() {
    // first branch, upper part
    let (r, json) = verdict(&["--eps", "0.0298", "spectrum", "--root", "1.2424,0.7711"]);
    assert!(r.contains("verdict = stable") && json.contains("\"verdict\":\"stable\""), "{r}");
    // second branch, upper and lower parts
    let (r, _) = verdict(&["--eps", "0.0294", "spectrum", "--root", "0.7452,0.4535"]);
    assert!(r.contains("verdict = unstable"), "{r}");
    let (r, _) = verdict(&["--eps", "0.03", "spectrum", "--root", "0.3954,0.2077"]);
    assert!(r.contains("verdict = unstable"), "{r}");
    // d = 3, second branch, lower part
    let (r, _) = verdict(&["--d", "3", "--sigma", "1", "--eps", "0.15", "spectrum", "--root", "0.0378,0.1434"]);
    assert!(r.contains("verdict = stable") && value(&r, "kappa") < 0.2, "{r}");
}

#[test]
fn spectrum_over_a_branch_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dir_arg(tmp.path());
    let o = run(&["--output-dir", &out, "--set", "max_points=3", "branch", "--seed", "1.2320,0.8531"]);
    assert!(o.status.success());
    let b = tmp.path().join("branch.jsonl");
    let o = run(&["--output-dir", &out, "spectrum", "--branch", b.to_str().unwrap(), "--every", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = std::fs::read_to_string(tmp.path().join("verdicts.jsonl")).unwrap();
    assert_eq!(v.lines().count(), 2);
    assert!(v.lines().all(|l| l.contains("\"verdict\":\"stable\"")), "{v}");
    let annotated = std::fs::read_to_string(tmp.path().join("branch_stability.jsonl")).unwrap();
    assert_eq!(annotated.matches("\"stability\":\"stable\"").count(), 2);
}

#[test]
fn tables_negative_control() {
    let tmp = tempfile::tempdir().unwrap();
    let good = run(&["tables", "--row", "table1:1"]);
    assert!(good.status.success(), "{}", stdout(&good));
    assert!(stdout(&good).contains("eps_star"));

    let reference = tmp.path().join("ref.csv");
    std::fs::write(&reference, "table,j,eps_star,kappa,mu,kappa_q,omega_q\ntable1,1,0.06064,0.85311,1.23204,0.32669,0.39294\n").unwrap();
    let bad = run(&["tables", "--row", "table1:1", "--reference", reference.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let report = stdout(&bad);
    let failing: Vec<&str> = report.lines().filter(|l| l.ends_with("FAIL")).collect();
    assert_eq!(failing.len(), 1, "{report}");
    assert!(failing[0].contains("omega_q"));
}

#[test]
fn kummer_check_passes() {
    let o = run(&["kummer-check"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.ends_with(" pass")).count(), 3);
}
