use serde_json::Value;
use std::process::{Command, Output};

fn starq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starq"))
        .current_dir(std::env::temp_dir())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn ho_ground_energy() {
    let o = starq(&["ground-energy", "--system", "ho", "--omega", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "E0 = 0.5\n");
}

#[test]
fn bose_star_product_of_x_and_p() {
    let o = starq(&["star-product", "--statistics", "bose", "x", "p"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "product = x*p + 0.5i*hbar\n");
}

#[test]
fn weyl_suite_reports_groenewold() {
    let o = starq(&["verify", "--suite", "weyl"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("groenewold: -3*hbar^2 PASS"), "{}", stdout(&o));
}

#[test]
fn json_document_shape() {
    let o = starq(&["--json", "ground-energy", "--system", "quadratic", "--a", "1", "--b", "2", "--c", "0.5"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["header"]["tool"], "starq");
    assert_eq!(v["command"], "ground-energy");
    assert_eq!(v["params"]["a"], 1.0);
    let r = &v["results"][0];
    assert_eq!(r["name"], "E0");
    assert!((r["value"].as_f64().unwrap() - 1.75f64.sqrt()).abs() < 1e-4);
    assert_eq!(r["tolerance"], 1e-6);
    assert!(r["route"].as_str().unwrap().starts_with("secant"));
    assert_eq!(r["provenance"], "feynman-kac");
}

#[test]
fn json_is_deterministic() {
    let args = ["--json", "star-exp", "--system", "fermi-driven", "--scheme", "naive", "--omega", "0.7", "--t", "0.4"];
    assert_eq!(starq(&args).stdout, starq(&args).stdout);
}

#[test]
fn mixed_population_is_a_usage_error() {
    let o = starq(&["star-product", "--statistics", "bose", "x", "psi1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mixed"));
}

#[test]
fn parse_error_is_a_usage_error() {
    let o = starq(&["star-product", "--statistics", "bose", "x +", "p"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("column"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = starq(&["frobnicate"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn caustic_is_a_computation_error() {
    let o = starq(&["propagator", "--system", "ho", "--endpoints", "0.3,-0.4", "--t", "3.141592653589793"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("caustic"));
}

#[test]
fn negative_frequency_driven_ground_energy() {
    let o = starq(&["ground-energy", "--system", "fermi-driven", "--omega", "-0.5", "--g", "0.1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "E0 = -0.5\nL = 0.5\n");
}

#[test]
fn fermionic_parity_is_reported() {
    let o = starq(&["star-exp", "--system", "fermi-driven", "--scheme", "naive", "--omega", "0.7"]);
    assert!(stdout(&o).contains("parity = odd"), "{}", stdout(&o));
    let o = starq(&["star-exp", "--system", "fermi-driven", "--scheme", "meticulous", "--omega", "0.7"]);
    assert!(stdout(&o).contains("parity = even"), "{}", stdout(&o));
}

#[test]
fn quadratic_propagator_reports_action_and_maslov() {
    let o = starq(&["propagator", "--system", "quadratic", "--endpoints", "0.3,-0.4", "--t", "2", "--c", "1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("action = "), "{s}");
    assert!(s.contains("maslov = 0"), "{s}");
    let o = starq(&["propagator", "--system", "quadratic", "--endpoints", "0.3,-0.4", "--t", "4", "--c", "0:1;5:1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("caustic"));
}

#[test]
fn hbar_flag_rescales() {
    let o = starq(&["--hbar", "0.5", "ground-energy", "--system", "ho", "--omega", "2"]);
    assert_eq!(stdout(&o), "E0 = 0.5\n");
}

#[test]
fn bad_config_file() {
    let path = std::env::temp_dir().join("starq_bad_config.toml");
    std::fs::write(&path, "hbar = 0\n").unwrap();
    let o = starq(&["--config", path.to_str().unwrap(), "verify", "--suite", "weyl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config line 1"));
}
