use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use ufl_core::instance::{self, Format, UflInstance};
use ufl_core::relaxation::{solve_relaxation, FractionalExport, FractionalSolution};

fn ufl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ufl")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, inst: &UflInstance) -> String {
    let path = dir.join(name);
    instance::write_instance(inst, &path).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn solve_writes_a_reloadable_solution() {
    let dir = tempfile::tempdir().unwrap();
    let inst = UflInstance::new(vec![2.0], vec![vec![3.0]]).unwrap();
    let path = write(dir.path(), "one.txt", &inst);
    let out_path = dir.path().join("frac.json");
    let r = report(&ufl(&["solve", "--instance", &path, "--out", out_path.to_str().unwrap()]));
    assert_eq!(r["result"]["objective"].as_f64().unwrap(), 5.0);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["command"]["command"], "solve");

    let text = fs::read_to_string(&out_path).unwrap();
    let back = FractionalSolution::from_export(&inst, &FractionalExport::from_json(&text).unwrap()).unwrap();
    assert_eq!(back, solve_relaxation(&inst).unwrap());
}

#[test]
fn input_errors_exit_one() {
    let missing = ufl(&["solve", "--instance", "/no/such/file"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());
    assert_eq!(ufl(&["analyze", "--grid-phi", "many"]).status.code(), Some(1));
    assert_eq!(ufl(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(ufl(&["analyze", "--grid-phi", "1"]).status.code(), Some(1));
    assert_eq!(ufl(&["hardness", "--gamma-f", "0.5"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "ufl 1\nfacilities 2\n").unwrap();
    assert_eq!(ufl(&["jms", "--instance", bad.to_str().unwrap()]).status.code(), Some(1));
    let path = write(dir.path(), "i.txt", &instance::generate_euclidean(2, 2, 1).unwrap());
    assert_eq!(ufl(&["round", "--instance", &path, "--gamma", "0.5"]).status.code(), Some(1));
}

#[test]
fn help_and_version_succeed() {
    assert!(ufl(&["--help"]).status.success());
    assert!(ufl(&["--version"]).status.success());
}

#[test]
fn round_report_is_reproducible_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "i.txt", &instance::generate_euclidean(6, 12, 8).unwrap());
    let args = ["round", "--instance", &path, "--gamma", "1.6774", "--trials", "10000", "--seed", "42"];
    let (a, b) = (ufl(&args), ufl(&args));
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a)["result"].clone();
    assert_eq!(r["facility_within_3se"], true);
    assert_eq!(r["connection_below_bound"], true);
    assert_eq!(r["trials"], 10000);
}

#[test]
fn analyze_writes_artifacts_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let (one, two) = (dir.path().join("one"), dir.path().join("two"));
    let base = ["analyze", "--grid-gamma", "60", "--grid-p", "60", "--grid-phi", "40", "--check-beta", "1.78"];
    let mut a: Vec<&str> = base.to_vec();
    a.extend(["--jobs", "1", "--out", one.to_str().unwrap()]);
    let mut b: Vec<&str> = base.to_vec();
    b.extend(["--jobs", "2", "--out", two.to_str().unwrap()]);
    let ra = report(&ufl(&a));
    let rb = report(&ufl(&b));
    assert_eq!(ra["result"], rb["result"]);
    assert_eq!(ra["result"]["check_beta"]["approachable"], true);
    for f in ["frontier.csv", "witness.csv"] {
        assert_eq!(fs::read(one.join(f)).unwrap(), fs::read(two.join(f)).unwrap());
    }
    assert!(fs::read_to_string(one.join("frontier.csv")).unwrap().starts_with("phi,value\n"));
    assert!(fs::read_to_string(one.join("witness.csv")).unwrap().starts_with("q,weight\n"));
    let summary: Value = serde_json::from_str(&fs::read_to_string(one.join("summary.json")).unwrap()).unwrap();
    assert!(summary["result"]["beta_star"].as_f64().unwrap() > 1.4);
}

#[test]
fn analyze_defaults_report_beta_star() {
    let r = report(&ufl(&["analyze"]));
    let beta = r["result"]["beta_star"].as_f64().unwrap();
    assert!((1.478..=1.498).contains(&beta));
    assert_eq!(r["config"]["command"]["grid_phi"], 200);
}

#[test]
fn best_gamma_on_flat_and_degenerate_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write(dir.path(), "flat.txt", &UflInstance::new(vec![1.0], vec![vec![1.0], vec![2.0]]).unwrap());
    let r = report(&ufl(&["best-gamma", "--instance", &flat]))["result"].clone();
    assert!((r["best"]["gamma"].as_f64().unwrap() - 1.463).abs() < 0.006);
    let ratio = r["best"]["ratio"].as_f64().unwrap();
    assert!(ratio <= r["fixed_gamma_0"]["ratio"].as_f64().unwrap().max(1.78));

    let zero = write(dir.path(), "zero.txt", &UflInstance::new(vec![1.0, 2.0], vec![vec![0.0, 0.0]; 3]).unwrap());
    let r = report(&ufl(&["best-gamma", "--instance", &zero]))["result"].clone();
    assert_eq!(r["degenerate_profile"], true);
    assert_eq!(r["best"]["ratio"].as_f64().unwrap(), 1.0);
}

#[test]
fn gen_jms_and_hardness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    report(&ufl(&["gen", "--facilities", "5", "--clients", "9", "--seed", "3", "--out", path.to_str().unwrap()]));
    let inst = instance::read_instance(&path, Format::Native).unwrap();
    assert_eq!(inst, instance::generate_euclidean(5, 9, 3).unwrap());

    let r = report(&ufl(&["jms", "--instance", path.to_str().unwrap()]))["result"].clone();
    assert_eq!(r["assignment"].as_array().unwrap().len(), 9);

    let r = report(&ufl(&["hardness", "--gamma-f", "1.67736"]))["result"].clone();
    assert!((r["gamma_c"].as_f64().unwrap() - 1.3737).abs() < 1e-4);
}
