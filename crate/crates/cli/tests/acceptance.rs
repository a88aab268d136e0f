//! Acceptance suite: one line per criterion, `[PASS]` or `[FAIL]`, with the
//! measured figures. Set `HVRT_ACCEPTANCE_STRICT=1` to exit nonzero on any failure.

use std::process::{Command, ExitCode};
use std::time::Instant;

use hvrt_cli::run_cli;
use hvrt_core::capability::{pq_from_rotor_current, MachineParams, RotorCurrent};
use hvrt_core::controller::{q_demand, GainBasis};
use hvrt_core::network::{
    quartic_coeffs, sensitivity_p, sensitivity_q, solve_pcc_voltage, GridParams, PccInjection,
};
use hvrt_core::sim::{compare, metrics, run, sweep_scenarios, Method, Scenario, SweepParam};
use hvrt_core::{MachineSi, TimeSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn cli_text(args: &[&str]) -> Result<String, String> {
    let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    run_cli(&args, &mut out).map_err(|e| e.to_string())?;
    Ok(String::from_utf8(out).expect("utf-8 output"))
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .and_then(|v| v.parse().ok())
        .unwrap_or(f64::NAN)
}

fn table_from_nameplate() -> Outcome {
    let start = Instant::now();
    let np = MachineSi::test_system();
    let config = format!(
        "[machine]\nunits = \"si\"\nv_sn_volts = {:?}\np_n_mw = {:?}\nn_units = {:?}\npower_factor = {:?}\n\
         s_c_mva = {:?}\nx_m_ohms = {:?}\nx_l_ohms = {:?}\ni_r_max_amps = {:?}\n\
         q_g_max = 0.25\n[hvrt]\ngain_basis = \"stator\"\n",
        np.v_sn_volts, np.p_n_mw, np.n_units, np.power_factor, np.s_c_mva, np.x_m_ohms, np.x_l_ohms, np.i_r_max_amps
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("si.toml");
    std::fs::write(&path, config).unwrap();
    let text = match cli_text(&["--config", path.to_str().unwrap(), "design"]) {
        Ok(t) => t,
        Err(e) => return outcome(false, e),
    };
    let secs = start.elapsed().as_secs_f64();
    let got = [
        ("Q_s", field(&text, "q_s_max"), 0.48, 0.01),
        ("Q_G", field(&text, "q_total_max"), 0.73, 0.01),
        ("Q_GD", field(&text, "q_total_deload_max"), 1.02, 0.01),
        ("K1", field(&text, "k1_stator"), 9.6, 0.1),
        ("K2", field(&text, "k2_stator"), 3.6, 0.1),
    ];
    let pass = got.iter().all(|(_, v, want, tol)| (v - want).abs() <= *tol) && secs < 1.0;
    let detail = got
        .iter()
        .map(|(n, v, _, _)| format!("{n}={v:.4}"))
        .collect::<Vec<_>>()
        .join(" ");
    outcome(pass, format!("{detail} in {secs:.3}s"))
}

struct Sample {
    grid: GridParams,
    inj: PccInjection,
}

fn admissible(seed: u64, n: usize) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x_e = rng.gen_range(0.1..1.0);
        let g_c = rng.gen_range(0.0..(0.6f64).min(0.95 / x_e));
        let grid = GridParams::new(x_e, 1.0, g_c).unwrap();
        let inj = PccInjection::new(rng.gen_range(0.0..1.2), rng.gen_range(-0.8..0.3)).unwrap();
        if solve_pcc_voltage(&grid, &inj).is_ok() && quartic_coeffs(&grid, &inj).discriminant > 1e-6
        {
            out.push(Sample { grid, inj });
        }
    }
    out
}

fn v_at(grid: &GridParams, p: f64, q: f64) -> f64 {
    solve_pcc_voltage(grid, &PccInjection { p, q })
        .map(|s| s.v_p)
        .unwrap_or(f64::NAN)
}

fn sensitivity_oracle() -> Outcome {
    let start = Instant::now();
    let h = 1e-6;
    let mut worst = 0.0f64;
    for s in admissible(2026, 1000) {
        let (p, q) = (s.inj.p, s.inj.q);
        let fd_p = (v_at(&s.grid, p + h, q) - v_at(&s.grid, p - h, q)) / (2.0 * h);
        let fd_q = (v_at(&s.grid, p, q + h) - v_at(&s.grid, p, q - h)) / (2.0 * h);
        let rel = |a: f64, b: f64| {
            if b == 0.0 {
                a.abs()
            } else {
                ((a - b) / b).abs()
            }
        };
        let ep = rel(sensitivity_p(&s.grid, &s.inj).unwrap_or(f64::NAN), fd_p);
        let eq = rel(sensitivity_q(&s.grid, &s.inj).unwrap_or(f64::NAN), fd_q);
        worst = worst.max(if ep.is_nan() { f64::INFINITY } else { ep });
        worst = worst.max(if eq.is_nan() { f64::INFINITY } else { eq });
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-6 && secs < 5.0,
        format!("worst rel err {worst:.2e} in {secs:.3}s"),
    )
}

fn signs_and_dominance() -> Outcome {
    let mut violations = 0;
    let mut checked = 0;
    for s in admissible(2027, 1000).iter().filter(|s| s.inj.p > 0.0) {
        checked += 1;
        let dp = sensitivity_p(&s.grid, &s.inj).unwrap_or(f64::NAN);
        let dq = sensitivity_q(&s.grid, &s.inj).unwrap_or(f64::NAN);
        let dominated = s.inj.q >= 0.0 || dq.abs() > dp.abs();
        if !(dp < 0.0 && dq > 0.0 && dominated) {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("{violations} violations over {checked} samples"),
    )
}

fn rotor_circle_equivalence() -> Outcome {
    let m = MachineParams::test_system();
    let mut rng = ChaCha8Rng::seed_from_u64(2028);
    let (mut worst_boundary, mut worst_inside) = (0.0f64, f64::NEG_INFINITY);
    for i in 0..10_000 {
        let v = rng.gen_range(0.8..1.3);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = if i % 2 == 0 {
            m.i_r_max
        } else {
            m.i_r_max * rng.gen::<f64>().sqrt()
        };
        let (p, q) = pq_from_rotor_current(
            &m,
            &RotorCurrent {
                i_rd: r * angle.cos(),
                i_rq: r * angle.sin(),
            },
            v,
        );
        // Direct form of the rotor-current circle in the stator P-Q plane.
        let radius = m.x_m * v * m.i_r_max / m.x_l;
        let dq = q + v * v / m.x_l;
        let lhs = (p * p + dq * dq) / (radius * radius) - 1.0;
        if i % 2 == 0 {
            worst_boundary = worst_boundary.max(lhs.abs());
        } else {
            worst_inside = worst_inside.max(lhs);
        }
    }
    outcome(
        worst_boundary < 1e-9 && worst_inside <= 1e-12,
        format!("boundary residual {worst_boundary:.2e}, interior max {worst_inside:.2e}"),
    )
}

fn zero_power_surge() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2029);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x_e = rng.gen_range(0.05..2.0);
        let g_c = rng.gen_range(0.0..0.999 / x_e);
        let grid = GridParams::new(x_e, 1.0, g_c).unwrap();
        let v = v_at(&grid, 0.0, 0.0);
        let closed = 1.0 / (1.0 - g_c * x_e);
        worst = worst.max((v - closed).abs() / closed.max(1.0));
    }
    let cli = cli_text(&[
        "solve", "--p", "0", "--q", "0", "--gc", "0.5", "--xe", "0.5",
    ])
    .map(|t| field(&t, "v_p"))
    .unwrap_or(f64::NAN);
    let cli_ok = (cli - 4.0 / 3.0).abs() < 1e-11;
    outcome(
        worst < 1e-10 && cli_ok,
        format!("worst scaled error {worst:.2e}; CLI v_p = {cli}"),
    )
}

fn method_ordering(runs: &[(Method, Result<TimeSeries, String>, f64)]) -> Outcome {
    let peak = |m: Method| {
        runs.iter()
            .find(|r| r.0 == m)
            .and_then(|r| r.1.as_ref().ok())
            .map(|ts| ts.v_p.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .unwrap_or(f64::NAN)
    };
    let (upf, avc, pq) = (
        peak(Method::UnitPf),
        peak(Method::Avc),
        peak(Method::PqCoordination),
    );
    let slowest = runs.iter().map(|r| r.2).fold(0.0, f64::max);
    let legs = [upf > avc, avc > pq, pq < 1.3, slowest < 10.0];
    outcome(
        legs.iter().all(|l| *l),
        format!(
            "peaks unitpf {upf:.4} avc {avc:.4} pq {pq:.4}; unitpf>avc {} avc>pq {} pq<1.3 {}; slowest run {slowest:.3}s",
            legs[0], legs[1], legs[2]
        ),
    )
}

fn swept(param: SweepParam, values: &[f64]) -> Result<Vec<(String, Scenario)>, String> {
    sweep_scenarios(
        &Scenario::default_study(Method::PqCoordination),
        param,
        values,
    )
    .map_err(|e| e.to_string())
}

fn wind_effect() -> Outcome {
    let rows = swept(SweepParam::Wind, &[8.0, 10.0, 12.0])
        .and_then(|s| compare(&s).map_err(|e| e.to_string()));
    match rows {
        Ok(rows) => {
            let p: Vec<f64> = rows.iter().map(|r| r.peak_v_p).collect();
            outcome(
                p[0] < p[1] && p[1] < p[2],
                format!("peaks 8:{:.4} 10:{:.4} 12:{:.4}", p[0], p[1], p[2]),
            )
        }
        Err(e) => outcome(false, e),
    }
}

fn vov1_effect() -> Outcome {
    let rows = swept(SweepParam::Vov1, &[1.12, 1.15, 1.18])
        .and_then(|s| compare(&s).map_err(|e| e.to_string()));
    match rows {
        Ok(rows) => {
            let s: Vec<f64> = rows.iter().map(|r| r.settled_v_p).collect();
            outcome(
                s[0] <= s[1] && s[1] <= s[2],
                format!("settled 1.12:{:.4} 1.15:{:.4} 1.18:{:.4}", s[0], s[1], s[2]),
            )
        }
        Err(e) => outcome(false, e),
    }
}

/// Every scenario the suite exercises, including one that reaches Stage 2.
fn acceptance_scenarios() -> Vec<(String, Scenario)> {
    let mut all: Vec<(String, Scenario)> = Method::ALL
        .iter()
        .map(|&m| (m.name().to_string(), Scenario::default_study(m)))
        .collect();
    all.extend(swept(SweepParam::Wind, &[8.0, 10.0]).unwrap());
    all.extend(swept(SweepParam::Vov1, &[1.12, 1.18]).unwrap());
    let mut heavy = Scenario::default_study(Method::PqCoordination);
    heavy.grid.g_c = 0.8;
    heavy.dc_q_ratio = 0.8;
    all.push(("heavy-compensation".into(), heavy));
    all
}

fn consistency(runs: &[(String, Scenario, Result<TimeSeries, String>)]) -> Outcome {
    let mut worst_residual = 0.0f64;
    let mut worst_terminal = 0.0f64;
    for (label, _, ts) in runs {
        let Ok(ts) = ts else {
            return outcome(false, format!("{label} failed"));
        };
        for i in 0..ts.len() {
            worst_residual = worst_residual.max(ts.network_residual(i).abs());
        }
        let n = ts.len() - 1;
        let v = solve_pcc_voltage(&ts.grid_at(n), &ts.injection(n))
            .map(|s| s.v_p)
            .unwrap_or(f64::NAN);
        let d = (ts.v_p[n] - v).abs();
        worst_terminal = worst_terminal.max(if d.is_nan() { f64::INFINITY } else { d });
    }
    outcome(
        worst_residual < 1e-8 && worst_terminal < 1e-3,
        format!("max residual {worst_residual:.2e}, terminal mismatch {worst_terminal:.2e}"),
    )
}

fn controller_invariants(runs: &[(String, Scenario, Result<TimeSeries, String>)]) -> Outcome {
    let mut bad = Vec::new();
    let mut stage2 = false;
    for (label, sc, ts) in runs {
        let Ok(ts) = ts else {
            return outcome(false, format!("{label} failed"));
        };
        let m = &sc.machine;
        let q_g_max = sc.hvrt.limits.q_g_max;
        for i in 0..ts.len() {
            // The de-loaded stator limit can never exceed the capacity circle at
            // the deepest allowed de-load of the current MPPT power.
            let p_floor = (1.0 - m.k_de_max) * sc.turbine.mppt_curve(ts.omega_r[i]);
            let q_sd_bound = (m.s_n * m.s_n - p_floor * p_floor).max(0.0).sqrt();
            let ok = ts.i_r[i] <= m.i_r_max + 1e-9
                && ts.q_s_ref[i].abs() <= q_sd_bound + 1e-9
                && ts.q_g_ref[i].abs() <= q_g_max + 1e-12
                && ts.k_de[i] <= m.k_de_max + 1e-12;
            if !ok {
                bad.push(format!("{label}@{}", ts.t[i]));
                break;
            }
        }
        stage2 |= ts.mode.contains(&hvrt_core::Mode::Stage2);
    }
    let mut worst_jump = 0.0f64;
    for v_ov1 in [1.12, 1.15, 1.18] {
        let base = Scenario::default_study(Method::PqCoordination).hvrt;
        let hp = hvrt_core::HvrtParams { v_ov1, ..base }
            .with_limits(base.limits)
            .unwrap();
        assert_eq!(hp.gain_basis, GainBasis::Total);
        for t in [hp.v_ov_min, hp.v_ov1, hp.v_ov_max] {
            worst_jump = worst_jump.max((q_demand(t.next_up(), &hp) - q_demand(t, &hp)).abs());
            worst_jump = worst_jump.max((q_demand(t, &hp) - q_demand(t.next_down(), &hp)).abs());
        }
    }
    outcome(
        bad.is_empty() && worst_jump < 1e-12,
        format!(
            "{} scenarios, violations {:?}, stage 2 reached {stage2}, max Q-V jump {worst_jump:.2e}",
            runs.len(),
            bad
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_hvrt"))
            .args(["simulate", "--method", "pq", "--out"])
            .arg(&path)
            .status();
        if !matches!(status, Ok(s) if s.success()) {
            return outcome(false, "simulate failed".into());
        }
        files.push(std::fs::read(&path).unwrap());
    }
    let same = files[0] == files[1];
    outcome(same, format!("{} bytes, identical {same}", files[0].len()))
}

fn main() -> ExitCode {
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (
            1,
            "design table from nameplate data",
            table_from_nameplate(),
        ),
        (
            2,
            "sensitivities vs finite differences",
            sensitivity_oracle(),
        ),
        (
            3,
            "sensitivity signs and Q dominance",
            signs_and_dominance(),
        ),
        (
            4,
            "rotor-current circle equivalence",
            rotor_circle_equivalence(),
        ),
        (5, "zero-power surge closed form", zero_power_surge()),
    ];

    let timed: Vec<(Method, Result<TimeSeries, String>, f64)> = Method::ALL
        .iter()
        .map(|&m| {
            let start = Instant::now();
            let ts = run(&Scenario::default_study(m)).map_err(|e| e.to_string());
            (m, ts, start.elapsed().as_secs_f64())
        })
        .collect();
    results.push((6, "method ordering", method_ordering(&timed)));
    results.push((7, "wind-speed effect", wind_effect()));
    results.push((8, "V_OV1 effect", vov1_effect()));

    let runs: Vec<(String, Scenario, Result<TimeSeries, String>)> = acceptance_scenarios()
        .into_iter()
        .map(|(label, sc)| {
            let ts = run(&sc).map_err(|e| e.to_string());
            (label, sc, ts)
        })
        .collect();
    results.push((9, "dynamic/algebraic consistency", consistency(&runs)));
    results.push((10, "controller invariants", controller_invariants(&runs)));
    results.push((11, "CLI determinism", determinism()));

    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!("[{tag}] {n:>2} {name}: {}", o.detail);
    }
    // Settled metrics are not a criterion; printed for reference only.
    for (m, ts, _) in &timed {
        if let Ok(ts) = ts {
            let mt = metrics(m.name(), ts);
            println!("       {:<7} settled v_p {:.4}", m.name(), mt.settled_v_p);
        }
    }
    println!(
        "{} of {} criteria pass",
        results.len() - failed,
        results.len()
    );
    let strict = std::env::var("HVRT_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if failed > 0 && strict {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
