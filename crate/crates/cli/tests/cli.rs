use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const GP: &str = r#"{ "family": "gross_pitaevskii", "params": {} }"#;

fn gsl(sub: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = out.with_extension("json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_gsl"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .env("GSL_OUT", out)
        .output()
        .unwrap()
}

fn column(csv: &Path, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(j).unwrap().parse().unwrap()).collect()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_EVOLVE: &str = r#"{ "dt": 0.002, "t_end": 2.0, "l_box": 120.0, "n": 512, "edge_margin": 10.0, "snapshot_stride": 250 }"#;

#[test]
fn empty_case_list_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["tw-check", "evolve", "stability", "nsoliton", "dispersion", "monotonicity"] {
        let out = dir.path().join(sub);
        let o = gsl(sub, r#"{ "cases": [] }"#, &out, &[]);
        assert!(o.status.success(), "{sub}: {}", stderr(&o));
        assert!(!out.exists());
    }
}

#[test]
fn tw_check_writes_profile_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tw");
    let cfg = format!(r#"{{ "cases": [ {{ "nonlinearity": {GP}, "speed": 1.0 }} ] }}"#);
    let o = gsl("tw-check", &cfg, &out, &["--jobs", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));

    let report = out.join("tw_check.csv");
    assert!(column(&report, "residual")[0] < 1e-6);
    assert!(column(&report, "gp_deviation")[0] < 1e-8);
    assert!((column(&report, "amplitude")[0] - 0.5).abs() < 1e-12);

    // floats carry 17 significant digits
    let text = fs::read_to_string(out.join("profile_000.csv")).unwrap();
    assert!(text.starts_with("x,eta,v\n"));
    let cell = text.lines().nth(1).unwrap().split(',').next().unwrap();
    let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);

    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["scenario"], "tw-check");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["jobs"], 1);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["versions"]["gsl"], env!("CARGO_PKG_VERSION"));
    assert!(m["artifacts"].as_array().unwrap().iter().any(|a| a == "profile_000.csv"));
}

#[test]
fn dispersion_matches_relation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("disp");
    let cfg = format!(r#"{{ "cases": [ {{ "nonlinearity": {GP}, "xi": [0.5, 1.0, 2.0] }} ] }}"#);
    let o = gsl("dispersion", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let xi = column(&out.join("dispersion.csv"), "xi");
    let measured = column(&out.join("dispersion.csv"), "measured");
    for (x, w) in xi.iter().zip(&measured) {
        let exact = (x.powi(4) + 2.0 * x * x).sqrt();
        assert!(((w - exact) / exact).abs() < 0.01);
    }
}

#[test]
fn noisy_evolve_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"{{ "seed": 7, "cases": [
            {{ "nonlinearity": {GP}, "chain": {{ "speeds": [0.6, 1.0], "centers": [-15.0, 15.0] }},
               "evolve": {SMALL_EVOLVE}, "noise": {{ "norm": 0.01, "width": 15.0 }} }},
            {{ "nonlinearity": {GP}, "chain": {{ "speeds": [0.8], "centers": [0.0] }},
               "evolve": {SMALL_EVOLVE}, "write_snapshots": false }}
        ] }}"#
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(gsl("evolve", &cfg, &a, &["--jobs", "1"]).status.success());
    assert!(gsl("evolve", &cfg, &b, &["--jobs", "2"]).status.success());
    for f in ["evolve.csv", "diagnostics_000.csv", "diagnostics_001.csv", "snapshots_000/snap_00002.bin"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert!(!a.join("snapshots_001").exists());
    assert!(column(&a.join("evolve.csv"), "max_rel_energy_drift")[1] < 1e-8);

    // a different seed changes the noisy case only
    let c = dir.path().join("c");
    assert!(gsl("evolve", &cfg.replace("\"seed\": 7", "\"seed\": 8"), &c, &[]).status.success());
    assert_ne!(fs::read(a.join("diagnostics_000.csv")).unwrap(), fs::read(c.join("diagnostics_000.csv")).unwrap());
}

#[test]
fn stability_and_monotonicity_emit_tracks() {
    let dir = tempfile::tempdir().unwrap();
    let run = format!(
        r#""nonlinearity": {GP}, "chain": {{ "speeds": [0.6, 1.0], "centers": [-15.0, 15.0] }},
           "evolve": {SMALL_EVOLVE}, "noise": {{ "norm": 0.001, "width": 15.0 }}"#
    );
    let out = dir.path().join("stab");
    let o = gsl("stability", &format!(r#"{{ "cases": [ {{ {run} }} ] }}"#), &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = column(&out.join("modulation_000.csv"), "t");
    assert_eq!(t.len(), 2 * 5);
    let gap = column(&out.join("probe_000.csv"), "gap");
    assert!(gap.iter().all(|&g| g == 0.0) && gap.len() == 5);
    assert!(column(&out.join("stability.csv"), "sup_eps_norm")[0] < 0.01);

    let out = dir.path().join("mono");
    let cfg = format!(r#"{{ "cases": [ {{ {run}, "r_primes": [0.0, 5.0], "tau": 0.1 }} ] }}"#);
    let o = gsl("monotonicity", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&out.join("momentum_000.csv"), "p").len(), 2 * 5);
    assert_eq!(column(&out.join("dips_000.csv"), "dip").len(), 2);
}

#[test]
fn nsoliton_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ns");
    let cfg = format!(
        r#"{{ "cases": [ {{ "nonlinearity": {GP},
            "schedule": {{ "speeds": [0.6, 1.0], "offsets": [-12.0, 12.0], "times": [4.0, 6.0, 8.0], "s0": 2.0 }},
            "evolve": {{ "dt": 0.002, "l_box": 120.0, "n": 1024, "edge_margin": 10.0, "scheme": "yoshida4" }} }} ] }}"#
    );
    let o = gsl("nsoliton", &cfg, &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(column(&out.join("pairwise_000.csv"), "distance").len(), 2);
    let s_n = column(&out.join("decay_000.csv"), "s_n");
    assert_eq!(s_n.len(), 3 + 5 + 7);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report_000.json")).unwrap()).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 3);
}

#[test]
fn config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad");

    let o = gsl("tw-check", r#"{ "cases": [ { "nonlinearity": { "family": "gross_pitaevskii", "params": {} }, "sped": 1.0 } ] }"#, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cases[0]"), "{}", stderr(&o));

    let o = gsl("tw-check", &format!(r#"{{ "cases": [ {{ "nonlinearity": {GP}, "speed": 1.5 }} ] }}"#), &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cases[0].speed"), "{}", stderr(&o));

    let o = gsl(
        "evolve",
        &format!(
            r#"{{ "cases": [ {{ "nonlinearity": {GP}, "chain": {{ "speeds": [0.6], "centers": [0.0] }},
                "evolve": {{ "n": 8192, "l_box": 400.0, "dt": 0.001 }} }} ] }}"#
        ),
        &out,
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cases[0].evolve"), "{}", stderr(&o));

    let o = gsl(
        "stability",
        &format!(r#"{{ "cases": [ {{ "nonlinearity": {{ "family": "saturated", "params": {{ "gamma": -1.0 }} }} }} ] }}"#),
        &out,
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cases[0].nonlinearity"), "{}", stderr(&o));

    // nothing is computed or written on a config error
    assert!(!out.exists());
}
