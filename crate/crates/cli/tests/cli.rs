use bkdv_cli::commands::parse_emitted;
use bkdv_cli::run;
use bkdv_core::hierarchy::FlowDensities;
use bkdv_core::jet_ring::jet;

fn bkdv(args: &[&str]) -> bkdv_cli::Output {
    run(std::iter::once("bkdv").chain(args.iter().copied()))
}

#[test]
fn emitted_json_roundtrips() {
    let out = bkdv(&["emit", "K1", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let back = parse_emitted(&out.stdout).unwrap();
    assert_eq!(back, jet().poly(FlowDensities::compute(1).unwrap().k[1].clone()));
}

#[test]
fn unknown_expression_fails() {
    let out = bkdv(&["emit", "Z7"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("unknown expression"));
    let out = bkdv(&["free-energy", "--kind", "closed", "--index", "1", "--coords", "star"]);
    assert_eq!(out.code, 1);
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(bkdv(&["flows", "--which", "x", "--n", "1"]).code, 2);
    assert_eq!(bkdv(&["check", "--p", "2", "--sweep", "3"]).code, 2);
    let help = bkdv(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("verify-paper"));
}

#[test]
fn star_restriction_text() {
    let out = bkdv(&["free-energy", "--kind", "open", "--index", "2", "--coords", "star"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let got = bkdv_core::iz_coords::parse_iz(out.stdout.trim()).unwrap();
    assert_eq!(got, bkdv_core::iz_coords::parse_iz(bkdv_core::reference::FO2_STAR).unwrap());
}

#[test]
fn open_free_energy_latex_in_u_coordinates() {
    let out = bkdv(&["emit", "Fo2", "--coords", "ujets", "--format", "latex"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("u_{1}") && out.stdout.contains("\\frac"));
}

#[test]
fn correlator_record() {
    let out = bkdv(&["correlators", "--p", "2", "--spec", "tau:2 sigma:0,1,1", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["value"], v["route_a"]);
    assert_eq!(v["route_a"], v["route_b"]);
    let out = bkdv(&["correlators", "--p", "2", "--spec", "tau:2 sigma:1,1", "--btilde"]);
    assert_eq!(out.stdout.trim_end().rsplit(' ').next(), Some("-1/4"));
    let out = bkdv(&["correlators", "--p", "2", "--spec", "sigma:1,1,1,1", "--order", "3"]);
    assert_eq!(out.code, 1);
}

#[test]
fn sweep_and_virasoro_exit_codes() {
    let out = bkdv(&["check", "--conjecture", "--p", "2", "--sweep", "6", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["nonvanishing"].as_array().unwrap().len(), 0);
    let out = bkdv(&["virasoro", "--m", "-1..1", "--order", "3", "--pmax", "1", "--format", "json"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
    assert_eq!(bkdv(&["virasoro", "--m", "-2"]).code, 1);
}

#[test]
fn verify_only_selected_checks() {
    let out = bkdv(&["verify-paper", "--only", "Fo2,seeds", "--pmax", "1", "--json"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    let ids: Vec<_> = v["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap().to_string()).collect();
    assert_eq!(ids, ["seeds", "Fo2"]);
    // a check that needs a higher order fails instead of silently passing
    let out = bkdv(&["verify-paper", "--only", "Fc2-Fo3", "--pmax", "1"]);
    assert_eq!(out.code, 1);
}

#[test]
fn cache_hit_output_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cold = bkdv(&["loop-solve", "--pmax", "1", "--cache-dir", d, "--format", "json"]);
    let warm = bkdv(&["loop-solve", "--pmax", "1", "--cache-dir", d, "--format", "json"]);
    assert_eq!(cold.code, 0);
    assert_eq!(cold, warm);
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
}
