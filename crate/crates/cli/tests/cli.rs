//! Configuration resolution and end-to-end command behaviour.

use std::process::Command;

use hvrt_cli::{run_cli, CliError, Config, Source};

fn hvrt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hvrt"))
}

fn args(s: &[&str]) -> Vec<String> {
    s.iter().map(|a| a.to_string()).collect()
}

fn stdout_of(a: &[&str]) -> String {
    let mut out = Vec::new();
    run_cli(&args(a), &mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn empty_file_gives_defaults() {
    let cfg = Config::load("", &[]).unwrap();
    assert_eq!(cfg, Config::defaults());
    assert_eq!(cfg.source("machine.x_m"), Some(Source::Default));
    let m = cfg.machine().unwrap();
    assert!((m.x_m - 6.49).abs() < 0.01 && (m.x_l - 7.06).abs() < 0.01);
    assert_eq!(cfg.num("machine.q_g_max"), 0.25);
}

#[test]
fn canonical_text_round_trips() {
    let text = "[grid]\nx_e = 0.4\n[hvrt]\nv_ov1 = 1.17\ngain_basis = \"stator\"\n\
                [scenario]\nevents = [\"block@0.5\", \"captrip=0.5@1\"]\ndc_p = 0.9\ndc_q = 0.4\n";
    let a = Config::load(text, &args(&["avc.kp=3.5"])).unwrap();
    let b = Config::load(&a.to_canonical(), &[]).unwrap();
    for key in ["grid.x_e", "hvrt.v_ov1", "avc.kp", "scenario.dc_p"] {
        assert_eq!(a.get(key), b.get(key), "{key}");
    }
    assert_eq!(a.to_canonical(), b.to_canonical());
    assert_eq!(a.scenario().unwrap(), b.scenario().unwrap());
    assert_eq!(a.source("avc.kp"), Some(Source::Flag));
    assert_eq!(a.source("grid.x_e"), Some(Source::File));
}

#[test]
fn reactance_override_shows_scr() {
    let cfg = Config::load("[grid]\nx_e = 0.25\n", &[]).unwrap();
    assert_eq!(cfg.grid().unwrap().scr(), 4.0);
    assert!(cfg.to_annotated().contains("# scr = 4.0  (derived)"));
    let by_scr = Config::load("[grid]\nscr = 4\n", &[]).unwrap();
    assert_eq!(by_scr.num("grid.x_e"), 0.25);
    assert!(matches!(
        Config::load("[grid]\nscr = 4\nx_e = 0.25\n", &[]),
        Err(CliError::Schema { .. })
    ));
}

#[test]
fn nameplate_block_converts_once() {
    let cfg = Config::load("[machine]\ni_r_max_amps = 1600\n", &[]).unwrap();
    let i = cfg.num("machine.i_r_max");
    assert!((i - 1.275).abs() < 1e-3, "{i}");
    // The resolved view is per-unit only, so reloading cannot convert again.
    let again = Config::load(&cfg.to_canonical(), &[]).unwrap();
    assert_eq!(again.num("machine.i_r_max"), i);
    assert!(!cfg.to_canonical().contains("amps"));

    let mixed = Config::load("[machine]\ni_r_max_amps = 1600\nx_m = 6.5\n", &[]);
    match mixed {
        Err(CliError::Schema { key, .. }) => assert_eq!(key, "machine.x_m"),
        other => panic!("{other:?}"),
    }
    assert!(Config::load("[machine]\nunits = \"pu\"\nx_m_ohms = 2\n", &[]).is_err());
}

#[test]
fn unknown_keys_are_named() {
    for (text, key) in [
        ("[grid]\nx_ee = 1\n", "grid.x_ee"),
        ("[gird]\nx_e = 1\n", "gird"),
        ("x_e = 1\n", "x_e"),
    ] {
        match Config::load(text, &[]) {
            Err(CliError::Schema { key: k, .. }) => assert_eq!(k, key),
            other => panic!("{text}: {other:?}"),
        }
    }
    assert!(matches!(
        Config::load("", &args(&["hvrt.nope=1"])),
        Err(CliError::Schema { .. })
    ));
    assert!(matches!(
        Config::load("[scenario]\nmethod = \"fast\"\n", &[]),
        Err(CliError::Schema { .. })
    ));
}

#[test]
fn parse_errors_carry_the_line() {
    match Config::load("[grid]\nx_e = 0.5\ng_c = = 1\n", &[]) {
        Err(CliError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

#[test]
fn solve_zero_power_surge() {
    let out = stdout_of(&[
        "solve", "--p", "0", "--q", "0", "--gc", "0.5", "--xe", "0.5",
    ]);
    assert!(out.starts_with("v_p = 1.33333333333\n"), "{out}");
}

#[test]
fn sense_prints_both_derivatives() {
    let out = stdout_of(&["sense", "--p", "0.5", "--q", "-0.2", "--fd"]);
    let get = |k: &str| -> f64 {
        out.lines()
            .find_map(|l| l.strip_prefix(&format!("{k} = ")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("dv_dp") - get("dv_dp_fd")).abs() < 1e-6);
    assert!((get("dv_dq") - get("dv_dq_fd")).abs() < 1e-6);
}

#[test]
fn design_matches_the_operating_table() {
    let out = stdout_of(&["design"]);
    let get = |k: &str| -> f64 {
        out.lines()
            .find_map(|l| l.strip_prefix(&format!("{k} = ")))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!((get("q_total_max") - 0.73).abs() < 0.01);
    assert!((get("q_total_deload_max") - 1.02).abs() < 0.01);
    assert!((get("k1_stator") - 9.6).abs() < 0.1);
    assert!((get("k2_stator") - 3.6).abs() < 0.1);
}

#[test]
fn simulate_is_byte_identical_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[scenario]\nt_end = 1.0\n").unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let status = hvrt()
            .args([
                "simulate",
                "--method",
                "pq",
                "--set",
                "avc.kp=2.5",
                "--config",
            ])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let header = String::from_utf8_lossy(&bytes)
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert!(header.starts_with("t,v_p,p_dfig,q_dfig"));

    // The manifest alone regenerates the file, without the original config.
    std::fs::remove_file(&cfg).unwrap();
    let manifest = dir.path().join("a.csv.manifest.json");
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(&manifest).unwrap()).unwrap();
    assert_eq!(
        m["command"],
        serde_json::json!(["simulate", "--method", "pq"])
    );
    let c = dir.path().join("c.csv");
    let status = hvrt()
        .arg("replay")
        .arg(&manifest)
        .arg("--out")
        .arg(&c)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(bytes, std::fs::read(&c).unwrap());
    assert_eq!(m["output_sha256"], hvrt_cli::output::sha256_hex(&bytes));
}

#[test]
fn no_block_event_keeps_channels_flat() {
    let out = stdout_of(&[
        "--set",
        "scenario.events=",
        "--set",
        "scenario.t_end=0.2",
        "simulate",
    ]);
    let mut lines = out.lines().skip(1);
    let first: Vec<&str> = lines.next().unwrap().split(',').skip(1).collect();
    for l in lines {
        assert_eq!(l.split(',').skip(1).collect::<Vec<_>>(), first);
    }
}

#[test]
fn sweep_reports_collapsed_rows() {
    let out = stdout_of(&[
        "sweep", "--param", "scr", "--values", "1.5,3", "--method", "pq",
    ]);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(
        rows[0],
        "label,status,peak_v_p,settled_v_p,time_to_band,peak_i_r,absorbed_q_energy"
    );
    assert!(rows[1].starts_with("scr=1.5,NoRealSolution,"));
    assert!(rows[2].starts_with("scr=3,ok,"));
}

#[test]
fn exit_codes_and_error_json() {
    let bad_key = hvrt()
        .args(["--set", "grid.nope=1", "design"])
        .output()
        .unwrap();
    assert_eq!(bad_key.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&bad_key.stderr).unwrap();
    assert_eq!(err["error"], "SchemaError");
    assert_eq!(err["key"], "grid.nope");

    let infeasible = hvrt()
        .args(["solve", "--p", "3", "--q", "0"])
        .output()
        .unwrap();
    assert_eq!(infeasible.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&infeasible.stderr).unwrap();
    assert_eq!(err["error"], "NoRealSolution");

    let usage = hvrt()
        .args(["simulate", "--method", "fast"])
        .output()
        .unwrap();
    assert_eq!(usage.status.code(), Some(2));

    let ok = hvrt().arg("--help").output().unwrap();
    assert!(ok.status.success());
}
