use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_addvar"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn envelope(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

fn report(args: &[&str]) -> (i32, Value) {
    let o = run(args);
    (code(&o), envelope(&o.stdout))
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

fn schema() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json");
    let text = std::fs::read_to_string(path).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(v: &Value) {
    let errors: Vec<String> = schema().iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}\n{v:#}");
}

#[test]
fn certify_passes_for_every_case() {
    for case in ["1", "2", "3", "4", "5"] {
        for mode in ["--symbolic", "--sampled"] {
            let (c, v) = report(&["certify", "--case", case, mode]);
            assert_eq!(c, 0, "case {case} {mode}: {v:#}");
            assert_eq!(v["result"]["stages"].as_array().unwrap().len(), 6);
            assert_valid(&v);
        }
    }
}

#[test]
fn naive_beam_is_rejected_with_a_reason() {
    let path = data("trivbeam.json");
    let (c, v) = report(&["test", "--input", path.to_str().unwrap()]);
    assert_eq!(c, 1);
    assert_eq!(v["status"], "negative");
    assert_eq!(v["result"]["verdict"], "not-additive");
    assert!(v["result"]["message"].as_str().unwrap().contains("not additive"));
    assert_valid(&v);
}

#[test]
fn variational_beam_is_accepted() {
    let path = data("discrtriv.json");
    let (c, v) = report(&["test", "--input", path.to_str().unwrap()]);
    assert_eq!(c, 0);
    let display = v["result"]["lagrangian_display"].as_str().unwrap();
    assert!(display.contains("omega^2*h^4*x[0]^2") && display.contains("h^4*beta*x[0]"), "{display}");
}

#[test]
fn worked_example_from_f_and_h() {
    let (c, v) = report(&[
        "test",
        "--f",
        "-xm1^3/x1^3",
        "--h",
        "-(3*x0^2*(x0^2-1)*xm1*x1 - mu)/((x0^2-1)*x1^3)",
        "--params",
        "mu",
    ]);
    assert_eq!(c, 0, "{v:#}");
    assert_eq!(v["result"]["g"], "xi^3");
    assert_eq!(v["result"]["lagrangian"]["lambda"]["value"], "1");
    assert!(v["result"]["lagrangian_display"].as_str().unwrap().contains("arctanh"));
    assert_valid(&v);
}

#[test]
fn cleared_triple_matches_equation_input() {
    let c = "xm1*x1 - x1/(x0^2+x1^2) + xm1/(x0^2+xm1^2)";
    let (c1, a) = report(&["test", "--a", "x1", "--b", "xm1", "--c", c]);
    let (c2, b) = report(&["test", "--equation", &format!("x1*x2 + xm1*xm2 + {c}")]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a["result"]["structured"], b["result"]["structured"]);
}

#[test]
fn undeclared_parameter_is_an_input_error() {
    let (c, v) = report(&["test", "--equation", "x2 + x[-2] + k*x0", "--params", "mu"]);
    assert_eq!(c, 2);
    assert!(v["error"].as_str().unwrap().contains("k"));
    assert_valid(&v);
}

#[test]
fn two_sources_are_rejected() {
    let (c, v) = report(&["test", "--equation", "x2 + xm2", "--f", "1", "--h", "0"]);
    assert_eq!(c, 2);
    assert_eq!(v["status"], "input-error");
    let (c, _) = report(&["test", "--f", "1"]);
    assert_eq!(c, 2);
}

#[test]
fn non_variational_equation_exits_one() {
    let (c, v) = report(&["test", "--equation", "x2 + xm2 + x1^2"]);
    assert_eq!(c, 1);
    assert_eq!(v["result"]["verdict"], "not-variational");
}

#[test]
fn zero_steps_give_a_single_state() {
    let o = run(&["iterate", "--case", "5", "--alpha", "0", "--beta", "0", "--gamma", "0", "--steps", "0"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines, ["n,x1,x0,xm1,xm2,I,J,V_n", "0,0.01,0.01,0.01,0.01,-0.0002,0.0004,1.0"]);
    let v = envelope(&o.stderr);
    assert_eq!(v["result"]["steps_completed"], 0);
    assert_valid(&v);
}

#[test]
fn orbit_csv_goes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("orbit.csv");
    let (c, v) = report(&["iterate", "--steps", "200", "--out", out.to_str().unwrap()]);
    assert_eq!(c, 0);
    assert_valid(&v);
    let mut r = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 201);
    let i0: f64 = rows[0][5].parse().unwrap();
    let i200: f64 = rows[200][5].parse().unwrap();
    assert!(((i200 - i0) / i0).abs() < 1e-10);
}

#[test]
fn exact_orbit_has_no_drift() {
    let (c, v) = report(&["iterate", "--case", "2", "--alpha", "1/2", "--beta", "1/3", "--gamma", "-1/5", "--steps", "30", "--exact", "--init", "1/3,1/4,-1/5,1/7", "--out", "/dev/null"]);
    assert_eq!(c, 0, "{v:#}");
    assert_eq!(v["result"]["drift"]["exact_zero"], true);
    assert_eq!(v["result"]["mode"], "exact");
}

#[test]
fn backward_undoes_forward() {
    let (_, f) = report(&["iterate", "--steps", "40", "--exact", "--out", "/dev/null"]);
    let end: Vec<String> = f["result"]["final_state"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
    let init = end.join(",");
    let (c, b) = report(&["iterate", "--steps", "40", "--exact", "--backward", "--init", &init, "--out", "/dev/null"]);
    assert_eq!(c, 0);
    assert_eq!(b["result"]["final_state"], serde_json::json!(["1/100", "1/100", "1/100", "1/100"]));
}

#[test]
fn dissipative_volume_law() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("vol.csv");
    let (c, v) = report(&["volume", "--lambda", "999/1000", "--steps", "2000", "--out", out.to_str().unwrap()]);
    assert_eq!(c, 0, "{v:#}");
    assert_valid(&v);
    let lf = v["result"]["log_volume_final"].as_f64().unwrap();
    assert!((lf - 4000.0 * 0.999f64.ln()).abs() < 1e-6);
}

#[test]
fn plot_data_pairs_consecutive_values() {
    let o = run(&["plot-data", "--steps", "3"]);
    assert_eq!(code(&o), 0);
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(r.headers().unwrap(), vec!["n", "x_n", "x_n_plus_1"]);
    let rows: Vec<csv::StringRecord> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for w in rows.windows(2) {
        assert_eq!(w[0][2], w[1][1]);
    }
    assert_valid(&envelope(&o.stderr));
}

#[test]
fn contlim_reports_slope_and_verdict() {
    let (c, v) = report(&["contlim", "--case", "5", "--ladder", "4"]);
    assert_eq!(c, 0, "{v:#}");
    assert_eq!(v["result"]["convergence"]["rungs"].as_array().unwrap().len(), 4);
    let s = v["result"]["convergence"]["slope"].as_f64().unwrap();
    assert!((0.8..=2.5).contains(&s));
    assert_valid(&v);
    let (c, v) = report(&["contlim", "--case", "3", "--ladder", "3", "--collapse"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["integrals"]["conserved"], true);
    assert!(v["result"]["collapse"]["i"]["ratio"].as_f64().is_some());
    assert_valid(&v);
}

#[test]
fn poisson_and_involution() {
    let (c, v) = report(&["poisson", "--case", "1"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["matches_listed_table"], true);
    assert_valid(&v);
    let (c, v) = report(&["involution", "--case", "4", "--alpha", "1", "--beta", "2", "--gamma", "3"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"]["holds"], true);
    assert_valid(&v);
}

#[test]
fn family_and_classify() {
    let (c, v) = report(&["family", "--check", "sampled", "--points", "10"]);
    assert_eq!(c, 0);
    assert_valid(&v);
    let (c, v) = report(&["family", "--params", "1,2,3"]);
    assert_eq!(c, 2, "{v:#}");
    let (c, v) = report(&["classify", "--params", "1,-2,1,3,1,2,5"]);
    assert_eq!(c, 0, "{v:#}");
    assert_eq!(v["result"]["classification"]["case_number"], 2);
    assert_eq!(v["result"]["classification"]["par_map_consistent"], true);
    assert_valid(&v);
}

#[test]
fn el_round_trips_through_the_test() {
    let (c, v) = report(&["el", "--lagrangian", "x0*x1*x2 + x0^2 + x1^2", "--lambda", "2"]);
    assert_eq!(c, 0, "{v:#}");
    assert_eq!(v["result"]["variational_test"]["verdict"], "variational");
    assert_valid(&v);
}

#[test]
fn seed_determines_the_report() {
    let args = ["certify", "--case", "3", "--sampled", "--points", "30", "--compact"];
    let a = without_timing(report(&[&args[..], &["--seed", "7"]].concat()).1);
    let b = without_timing(report(&[&args[..], &["--seed", "7"]].concat()).1);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = without_timing(report(&[&args[..], &["--seed", "8"]].concat()).1);
    assert_eq!(c["seed"], 8);
    assert_eq!(a["status"], c["status"]);
    assert_ne!(a["result"]["stages"][0]["detail"]["seed"], c["result"]["stages"][0]["detail"]["seed"]);
}

#[test]
fn bad_case_is_an_input_error() {
    let (c, v) = report(&["poisson", "--case", "7"]);
    assert_eq!(c, 2);
    assert_valid(&v);
    let (c, _) = report(&["iterate", "--init", "1,2"]);
    assert_eq!(c, 2);
}

#[test]
fn help_describes_every_subcommand() {
    for sub in ["test", "el", "family", "classify", "poisson", "involution", "iterate", "volume", "contlim", "certify", "plot-data"] {
        let o = run(&[sub, "--help"]);
        assert_eq!(code(&o), 0, "{sub}");
        let text = String::from_utf8(o.stdout).unwrap();
        for line in text.lines().filter(|l| l.trim_start().starts_with("--")) {
            let rest = line.trim_start().split_once("  ").map(|(_, r)| r.trim()).unwrap_or("");
            assert!(!rest.is_empty(), "{sub}: undocumented flag {line}");
        }
    }
}

#[test]
fn schema_rejects_inconsistent_reports() {
    let (_, v) = report(&["poisson", "--case", "2"]);
    let s = schema();
    assert!(s.is_valid(&v));
    let mut bad = v.clone();
    bad["exit_code"] = 1.into();
    assert!(!s.is_valid(&bad));
    let mut bad = v.clone();
    bad["result"].as_object_mut().unwrap().remove("table");
    assert!(!s.is_valid(&bad));
    let mut bad = v;
    bad["result"] = Value::Null;
    assert!(!s.is_valid(&bad));
}
