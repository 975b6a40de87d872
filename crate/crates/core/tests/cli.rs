use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn specsing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specsing"))
        .args(args)
        .env_remove("SPECSING_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stdout).expect("valid JSON");
    assert_eq!(v["schema"], "specsing/1");
    v
}

#[test]
fn threshold_reports_exact_and_approximate_gain() {
    let o = specsing(&["threshold", "--eta", "3", "--thickness", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let d = &v["data"];
    assert!((d["g0_approx"].as_f64().unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
    let gap = d["relative_gap"].as_f64().unwrap();
    assert!(gap > 0.0 && gap < 2e-2);
    assert!(d["l_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn threshold_gap_shrinks_up_the_ladder() {
    let gap = |mode: &str| {
        json(&specsing(&["threshold", "--mode", mode]))["data"]["relative_gap"]
            .as_f64()
            .unwrap()
    };
    assert!(gap("20") < 1e-4);
    assert!(gap("20") < gap("2"));
}

#[test]
fn find_nss_without_nonlinearity_matches_threshold_root() {
    let t = json(&specsing(&["threshold", "--mode", "2"]));
    let f = json(&specsing(&["find-nss", "--mode", "2", "--sigma", "0"]));
    let kappa0 = t["data"]["kappa0"].as_f64().unwrap();
    let k0 = t["data"]["K0"].as_f64().unwrap();
    assert!((f["data"]["kappa_star"].as_f64().unwrap() - kappa0).abs() <= 1e-9);
    assert!((f["data"]["K_star"].as_f64().unwrap() - k0).abs() <= 1e-9);
}

#[test]
fn find_nss_with_kerr_needs_more_gain() {
    let f = json(&specsing(&["find-nss", "--sigma", "1e-3", "--closure", "fix-k"]));
    let d = &f["data"];
    assert!(d["g"].as_f64().unwrap() > d["g0"].as_f64().unwrap());
    assert_eq!(d["closure"], "fix_k");
}

#[test]
fn result_table_csv_layout() {
    let o = specsing(&["find-ss", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "eta,kappa_star,K_star,N_plus_re,N_plus_im,intensity,g,g0,residual,iterations"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 10);
    // 17 significant digits
    assert_eq!(row[0], "3.0000000000000000e0");
}

#[test]
fn malformed_config_names_the_key() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "eta = 3\nnonlinearity.sigma = lots").unwrap();
    let o = specsing(&["find-nss", "--config", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("nonlinearity.sigma"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn flags_override_config() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "eta = 2\nthickness_a = 2\nmode = 3").unwrap();
    let path = f.path().to_str().unwrap();
    let a = json(&specsing(&["threshold", "--config", path]));
    assert_eq!(a["data"]["eta"], 2.0);
    assert_eq!(a["data"]["mode"], 3);
    assert_eq!(a["data"]["thickness_a"], 2.0);
    let b = json(&specsing(&["threshold", "--config", path, "--eta", "4"]));
    assert_eq!(b["data"]["eta"], 4.0);
    assert_eq!(b["data"]["mode"], 3);
}

#[test]
fn invalid_values_exit_with_status_two() {
    assert_eq!(specsing(&["threshold", "--eta", "0.9"]).status.code(), Some(2));
    assert_eq!(specsing(&["threshold", "--steps", "3"]).status.code(), Some(2));
    assert_eq!(specsing(&["threshold", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(specsing(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(specsing(&["sweep", "--axis", "mode", "--from", "1.5", "--to", "3", "--points", "3"]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_with_status_three() {
    let o = specsing(&["find-nss", "--sigma", "1e-2", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn intensity_at_threshold_is_zero_with_status_four() {
    let t = json(&specsing(&["threshold"]));
    let g0 = t["data"]["g0"].as_f64().unwrap().to_string();
    let o = specsing(&["intensity", "--sigma", "1e-13", "--gain", &g0]);
    assert_eq!(o.status.code(), Some(4));
    let v = json(&o);
    assert_eq!(v["data"]["below_threshold"], true);
    assert_eq!(v["data"]["intensity_closed_form"], 0.0);
}

#[test]
fn intensity_above_threshold_reports_both_values() {
    let t = json(&specsing(&["threshold", "--mode", "14"]));
    let g = (t["data"]["g0"].as_f64().unwrap() * 1.001).to_string();
    let o = specsing(&["intensity", "--mode", "14", "--sigma", "1e-13", "--gain", &g, "--steps", "8192"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let d = &v["data"];
    assert!(d["relative_gap"].as_f64().unwrap() <= 2e-2);
    let gauge = d["sigma_n_plus_sq"].as_f64().unwrap();
    assert!(gauge > 0.0 && gauge < 0.1);
    assert!(d["singularity"]["residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn empty_sweep_is_header_only() {
    let o = specsing(&["sweep", "--axis", "intensity", "--from", "0", "--to", "1", "--points", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("eta,kappa_star,K_star,"));
    assert!(text.trim_end().ends_with("parameter,status"));
}

#[test]
fn sweep_flags_failed_points() {
    let o = specsing(&[
        "sweep", "--sigma", "1e-3", "--axis", "intensity", "--from", "0", "--to", "1e9", "--points", "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(",ok"));
    assert!(lines[3].contains(",error: "));
}

#[test]
fn field_profile_rows_and_terminal_data() {
    let o = specsing(&["field-profile", "--at-singularity", "--steps", "64", "--mode", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "x,re_psi,im_psi,re_dpsi,im_dpsi");
    assert_eq!(data.len(), 1 + 65);
    let last: Vec<f64> = data[65].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(last[0], 1.0);
    let t = json(&specsing(&["threshold", "--mode", "2"]));
    let k = t["data"]["K0"].as_f64().unwrap();
    // ζ(1) = e^{iK}, ζ′(1) = iK e^{iK}
    assert!((last[1] - k.cos()).abs() < 1e-15 && (last[2] - k.sin()).abs() < 1e-15);
    assert!((last[3] + k * k.sin()).abs() < 1e-14 && (last[4] - k * k.cos()).abs() < 1e-14);
    assert!(text.contains("# N_minus_tilde = "));
}

#[test]
fn field_profile_requires_a_wavenumber() {
    assert_eq!(specsing(&["field-profile"]).status.code(), Some(2));
    let o = specsing(&["field-profile", "--ka", "2.5", "--kappa", "-0.1", "--steps", "16", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["data"]["samples"].as_array().unwrap().len(), 17);
}

#[test]
fn output_is_deterministic_and_can_go_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.json");
    let p2 = dir.path().join("b.json");
    for p in [&p1, &p2] {
        let o = specsing(&["find-nss", "--sigma", "1e-3", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
}

#[test]
fn diagnostics_stay_on_stderr() {
    let o = Command::new(env!("CARGO_BIN_EXE_specsing"))
        .args(["find-nss", "--sigma", "1e-3", "--format", "csv"])
        .env("SPECSING_LOG", "debug")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(!o.stderr.is_empty());
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().count(), 2);
    assert!(!out.contains("DEBUG"));
}

#[test]
fn absorber_mirrors_the_laser() {
    let l = json(&specsing(&["find-nss", "--sigma", "1e-3"]));
    let a = json(&specsing(&["find-nss", "--sigma", "1e-3", "--absorber"]));
    let kl = l["data"]["kappa_star"].as_f64().unwrap();
    let ka = a["data"]["kappa_star"].as_f64().unwrap();
    assert!((kl + ka).abs() < 1e-12);
    assert_eq!(a["data"]["terminal"], "incoming");
}
