use std::path::{Path, PathBuf};

use serde_json::Value;
use zetakit::cli::{run_command, run_to_string};

fn data(name: &str) -> String {
    let p: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name);
    p.to_str().unwrap().to_owned()
}

fn report(args: &[&str]) -> Value {
    let mut argv = vec!["zetakit"];
    argv.extend_from_slice(args);
    serde_json::from_str(&run_to_string(argv).unwrap()).unwrap()
}

#[test]
fn report_envelope() {
    let v = report(&["zeta", &data("elliptic_f5.var"), "--B", "6", "--guard", "2", "--bounds", "2,2"]);
    assert_eq!(v["command"], "zeta");
    assert_eq!(v["config"]["B"], 6);
    assert!(v["config"].get("workers").is_none());
    assert_eq!(v["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn exit_codes() {
    assert_eq!(run_command(["zetakit", "zeta"]), 1);
    assert_eq!(run_command(["zetakit", "validate", &data("inhomogeneous.var")]), 2);
    assert_eq!(run_command(["zetakit", "zeta", &data("elliptic_f5.var"), "--B", "0"]), 1);
    assert_eq!(run_command(["zetakit", "moments", &data("legendre_f5.fam"), "--k", "2", "--budget", "2^10"]), 3);
    assert_eq!(run_command(["zetakit", "validate", &data("legendre_f5.fam")]), 0);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let args = ["zetakit", "cycles", "--divisors", "--n", "2", "--q", "3", "--dmax", "3"];
    let text = run_to_string(args).unwrap();
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--out", out.to_str().unwrap()]);
    assert_eq!(run_command(with_out), 0);
    assert_eq!(std::fs::read_to_string(&out).unwrap().trim_end(), text.trim_end());
}
