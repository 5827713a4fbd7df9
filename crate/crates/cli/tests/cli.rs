use std::path::Path;
use std::process::{Command, Output};

use liebsdp::kernel::io::write_matrix;
use liebsdp::kernel::CMatrix;
use liebsdp::random;
use liebsdp::verify::{Function, ProblemSpec};
use liebsdp::RationalExponent;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liebsdp")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_json(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn emit_reports_the_census_and_writes_sdpa() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.dat-s");
    let o = run(&["emit", "--function", "geomean", "--t", "8/13", "--n", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("census: 4×(size 4), 1×(size 2)"));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().nth(1), Some("5"));
    assert_eq!(text.lines().nth(2), Some("4 4 4 4 2"));
}

#[test]
fn emit_lieb_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let k = write_json(dir.path(), "k.json", r#"{"dim": 2, "re": [[1, 0.5], [0.2, 1]], "im": [[0, 0.1], [0, -0.3]]}"#);
    let a = write_json(dir.path(), "a.json", r#"{"dim": 2, "re": [[2, 0.3], [0.3, 1]]}"#);
    let b = write_json(dir.path(), "b.json", r#"{"dim": 2, "re": [[1, 0], [0, 3]], "im": [[0, 0.2], [-0.2, 0]]}"#);
    let out = dir.path().join("l.dat-s");
    let o = run(&["emit", "--function", "lieb", "--t", "1/2", "--K", &k, "--A", &a, "--B", &b, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("census: 1×(size 8), 1×(scalar)"), "{}", stdout(&o));
    assert!(out.exists());
}

#[test]
fn missing_matrix_file_is_an_io_error() {
    let o = run(&["eval", "--function", "geomean", "--t", "1/2", "--A", "/no/such/a.json", "--B", "/no/such/b.json"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/a.json"));
}

#[test]
fn eval_prints_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let i = write_json(dir.path(), "i.json", r#"{"dim": 2, "re": [[1, 0], [0, 1]]}"#);
    let o = run(&["eval", "--function", "geomean", "--t", "1/3", "--A", &i, "--B", &i]);
    assert_eq!(stdout(&o).trim(), "2");
    let o = run(&["eval", "--function", "fidelity", "--A", &i, "--B", &i]);
    assert_eq!(stdout(&o).trim(), "2");

    let a = write_json(dir.path(), "a.json", r#"{"dim": 2, "re": [[1, 0], [0, 4]]}"#);
    let b = write_json(dir.path(), "b.json", r#"{"dim": 2, "re": [[9, 0], [0, 16]]}"#);
    let o = run(&["eval", "--function", "geomean", "--t", "1/2", "--A", &a, "--B", &b, "--solve"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("11"));
    let solver: f64 = lines.next().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((solver - 11.0).abs() < 1e-6);
}

#[test]
fn eval_matches_the_library() {
    let spec = ProblemSpec::new(Function::Lieb, Some(RationalExponent::new(1, 3).unwrap()), 2);
    let inputs = spec.random_inputs(&mut random::rng(17));
    let expect = spec.oracle(&inputs).unwrap();
    let o = run(&["eval", "--function", "lieb", "--t", "1/3", "--random", "17"]);
    let got: f64 = stdout(&o).trim().parse().unwrap();
    assert!((got - expect).abs() <= 1e-11 * expect.abs());

    let dir = tempfile::tempdir().unwrap();
    let k = dir.path().join("k.json");
    write_matrix(&k, &CMatrix::identity(2, 2)).unwrap();
    let o = run(&["eval", "--function", "upsilon", "--t", "1/2", "--K", k.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_is_deterministic() {
    let args = ["verify", "--function", "geomean", "--t", "5/8", "--n", "3", "--trials", "10"];
    let first = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&first).lines().last(), Some("PASS"));
    assert_eq!(stdout(&run(&args)), stdout(&first));

    let o = run(&["verify", "--function", "upsilon", "--t", "-1/2", "--n", "3", "--m", "2", "--trials", "3", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        &["verify", "--function", "geomean", "--t", "7/3"][..],
        &["verify", "--function", "geomean", "--t", "0.5"],
        &["verify", "--function", "geomean", "--t", "3/2", "--mode", "hyp"],
        &["verify", "--function", "tsallis", "--t", "3/2"],
        &["verify", "--function", "nothing", "--t", "1/2"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn count_table() {
    let o = run(&["count", "--qmax", "64"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = |t: &str| {
        text.lines()
            .find(|l| l.split_whitespace().next() == Some(t))
            .unwrap()
            .split_whitespace()
            .map(str::to_string)
            .collect::<Vec<_>>()
    };
    assert_eq!(row("1/2")[2..4], ["1", "0"]);
    assert_eq!(row("8/13")[2..4], ["4", "1"]);
    assert!(text.lines().last().unwrap().ends_with("0 over bound"));
}
