//! The `setderiv` binary end to end, on coarse grids.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_setderiv"));
    c.env_remove("SETDERIV_OUT");
    c
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cfg: &Path, out: &Path) -> Output {
    bin().arg("--config").arg(cfg).arg("--out").arg(out).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const STEINER: &str = "\
[experiment]
name = steiner-square
[shape]
kind = square
h = 1/256
[schedule]
t = list(0.1, 0.2)
tol = 0.01
";

#[test]
fn list_and_filter() {
    let o = bin().arg("--list").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 10);
    let o = bin().args(["--list", "--filter", "local-structure"]).output().unwrap();
    let names: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().next().unwrap().to_string()).collect();
    assert_eq!(names, ["local-parallel", "minkowski-convex", "subgraph"]);
    let o = bin().args(["--list", "--filter", "no-such-topic"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
}

#[test]
fn steiner_run_writes_deterministic_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), "s.cfg", STEINER);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = run(&cfg, &a);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(run(&cfg, &b).status.code(), Some(0));
    let csv = std::fs::read(a.join("report.csv")).unwrap();
    assert_eq!(csv, std::fs::read(b.join("report.csv")).unwrap());
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.starts_with("# experiment: steiner-square\n# anchor: local Steiner formula (outer)\n"));
    assert!(csv.contains("\nexperiment,series,param,lhs,rhs,rel_err\n"));
    // closed form for the unit square at t = 0.1
    let closed = 0.4 + std::f64::consts::PI * 0.01;
    let row = csv.lines().find(|l| l.starts_with("steiner-square,area,0.1,")).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[4].parse::<f64>().unwrap(), closed);
    assert!(cols[5].parse::<f64>().unwrap() < 0.01);
    assert!(std::fs::read_to_string(a.join("verdict.txt")).unwrap().ends_with("status = pass\n"));
    assert!(std::fs::read_to_string(a.join("plot.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn env_var_overrides_out() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(dir.path(), "s.cfg", STEINER);
    let env_out = dir.path().join("from-env");
    let o = bin()
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("from-flag"))
        .env("SETDERIV_OUT", &env_out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(env_out.join("report.csv").exists());
    assert!(!dir.path().join("from-flag").exists());
}

#[test]
fn comb_counterexample_is_not_differentiable() {
    let dir = TempDir::new().unwrap();
    let cfg = write_cfg(
        dir.path(),
        "c.cfg",
        "[experiment]\nname = comb-counterexample\n[shape]\nkind = comb\nteeth = 6\nh = 2^-10\nk_from = 2\nk_to = 5\n",
    );
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    for l in csv.lines().filter(|l| l.starts_with("comb-counterexample,M,")) {
        let m: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
        assert!((m - 2.0 / 3.0).abs() < 0.05 * 2.0 / 3.0, "{l}");
    }
    assert!(stdout(&o).contains("check vs empty = not-differentiable"));
}

#[test]
fn errors_have_distinct_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let nonconvex = write_cfg(
        dir.path(),
        "m.cfg",
        "[experiment]\nname = minkowski-convex\n[shape]\nh = 1/64\n[family]\nbody = polygon(0,0, 1,0, 0.2,0.2, 0,1)\n",
    );
    assert_eq!(run(&nonconvex, &out).status.code(), Some(21));
    let unknown = write_cfg(dir.path(), "u.cfg", "[experiment]\nname = nope\n");
    assert_eq!(run(&unknown, &out).status.code(), Some(4));
    let broken = write_cfg(dir.path(), "b.cfg", "[experiment\nname = steiner-square\n");
    assert_eq!(run(&broken, &out).status.code(), Some(3));
    let increasing = write_cfg(dir.path(), "i.cfg", "[experiment]\nname = subgraph\n[schedule]\neps = list(0.1, 0.2)\n");
    assert_eq!(run(&increasing, &out).status.code(), Some(3));
    assert_eq!(run(&dir.path().join("missing.cfg"), &out).status.code(), Some(5));
    assert!(!out.exists());
}

#[test]
fn failed_expectation_exits_one() {
    let dir = TempDir::new().unwrap();
    // a tolerance no grid can meet
    let cfg = write_cfg(dir.path(), "s.cfg", &STEINER.replace("tol = 0.01", "tol = 1e-12"));
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(std::fs::read_to_string(dir.path().join("out/verdict.txt")).unwrap().contains("FAIL"));
}
