//! Command-line surface of the HVRT toolkit.
//!
//! [`run_cli`] parses arguments, resolves the configuration and executes one
//! subcommand. CSV outputs written with `--out` get a sibling
//! `<out>.manifest.json` from which `hvrt replay` regenerates them.

pub mod config;
pub mod error;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use hvrt_core::capability::{capability_grid, linspace, GridAxes};
use hvrt_core::controller::GainBasis;
use hvrt_core::network::{
    sensitivity_p, sensitivity_q, solve_pcc_voltage, GridParams, PccInjection,
};
use hvrt_core::sim::{
    metrics, run, run_all, sweep_scenarios, Method, Metrics, Scenario, SweepParam, CHANNELS,
};

pub use config::{Config, Source, Value};
pub use error::CliError;
use output::{fmt_num, Csv};

#[derive(Debug, Parser)]
#[command(
    name = "hvrt",
    version,
    about = "DFIG HVRT design and phasor simulation after an HVDC block"
)]
pub struct Cli {
    /// Configuration file (sectioned key = value).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Override one configuration key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "p_s")]
    PS,
    #[value(name = "v_s")]
    VS,
    #[value(name = "k_de")]
    KDe,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// PCC voltage for a given farm injection.
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        #[arg(long)]
        xe: Option<f64>,
        #[arg(long)]
        gc: Option<f64>,
        #[arg(long)]
        ve: Option<f64>,
    },
    /// Analytic voltage sensitivities, optionally next to finite differences.
    Sense {
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        #[arg(long, allow_hyphen_values = true)]
        q: f64,
        #[arg(long)]
        xe: Option<f64>,
        #[arg(long)]
        gc: Option<f64>,
        #[arg(long)]
        ve: Option<f64>,
        /// Also print central finite differences.
        #[arg(long)]
        fd: bool,
    },
    /// Capability limits along one axis.
    Capability {
        #[arg(long, value_enum)]
        sweep: Axis,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long, default_value_t = 41)]
        n: usize,
        #[arg(long = "p-s", default_value_t = 1.0)]
        p_s: f64,
        #[arg(long = "v-s", default_value_t = 1.0)]
        v_s: f64,
        #[arg(long = "k-de", default_value_t = 0.0)]
        k_de: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reactive limits and Q-V gains at the rated operating point.
    Design,
    /// One time-domain run.
    Simulate {
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metrics of several methods on the configured scenario.
    Compare {
        #[arg(long, value_delimiter = ',', default_value = "unitpf,avc,pq")]
        methods: Vec<Method>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metrics over a range of one scenario parameter.
    Sweep {
        #[arg(long)]
        param: SweepParam,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        values: Vec<f64>,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Resolved configuration with the source of every value.
    Config,
    /// Regenerate an output from its manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn out(&self) -> Option<&Path> {
        match self {
            Command::Capability { out, .. }
            | Command::Simulate { out, .. }
            | Command::Compare { out, .. }
            | Command::Sweep { out, .. }
            | Command::Replay { out, .. } => out.as_deref(),
            _ => None,
        }
    }
}

/// Entry point shared by the binary and the tests. `args` excludes the
/// program name.
pub fn run_cli(args: &[String], stdout: &mut dyn Write) -> Result<(), CliError> {
    let cli = match Cli::try_parse_from(
        std::iter::once("hvrt".to_string()).chain(args.iter().cloned()),
    ) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            return stdout
                .write_all(e.to_string().as_bytes())
                .map_err(|e| CliError::io("<stdout>", e));
        }
        Err(e) => return Err(CliError::Usage(e.to_string())),
    };

    if let Command::Replay { manifest, out } = &cli.command {
        return replay(manifest, out.as_deref(), stdout);
    }

    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path.display().to_string(), e))?,
        None => String::new(),
    };
    let cfg = Config::load(&text, &cli.set)?;
    let replay_args = strip_args(args, &["--config", "--set", "--out"]);
    execute(&cli.command, &cfg, &replay_args, stdout)
}

fn execute(
    cmd: &Command,
    cfg: &Config,
    replay_args: &[String],
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let text = match cmd {
        Command::Solve { p, q, xe, gc, ve } => solve(cfg, *p, *q, (*xe, *gc, *ve))?,
        Command::Sense {
            p,
            q,
            xe,
            gc,
            ve,
            fd,
        } => sense(cfg, *p, *q, (*xe, *gc, *ve), *fd)?,
        Command::Capability {
            sweep,
            from,
            to,
            n,
            p_s,
            v_s,
            k_de,
            ..
        } => capability(cfg, *sweep, (*from, *to, *n), (*p_s, *v_s, *k_de))?,
        Command::Design => design(cfg)?,
        Command::Simulate { method, .. } => simulate(cfg, *method)?,
        Command::Compare { methods, .. } => compare(cfg, methods)?,
        Command::Sweep {
            param,
            values,
            method,
            ..
        } => sweep(cfg, *param, values, *method)?,
        Command::Config => cfg.to_annotated(),
        Command::Replay { .. } => unreachable!("handled before config resolution"),
    };
    match cmd.out() {
        Some(path) => {
            output::write_file(path, &text)?;
            let m = output::manifest(replay_args, &cfg.to_canonical(), &text);
            let json = serde_json::to_string_pretty(&m).expect("manifest serializes");
            output::write_file(&output::manifest_path(path), &(json + "\n"))?;
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e))?,
    }
    Ok(())
}

/// Drops `flag value` and `flag=value` pairs for the given flags.
fn strip_args(args: &[String], flags: &[&str]) -> Vec<String> {
    let mut kept = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
            continue;
        }
        if flags.contains(&a.as_str()) {
            skip = true;
        } else if !flags.iter().any(|f| a.starts_with(&format!("{f}="))) {
            kept.push(a.clone());
        }
    }
    kept
}

fn replay(manifest: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let io = |e| CliError::io(manifest.display().to_string(), e);
    let text = std::fs::read_to_string(manifest).map_err(io)?;
    let bad = |what: &str| CliError::Usage(format!("{}: {what}", manifest.display()));
    let m: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(&e.to_string()))?;
    let config = m["config"]
        .as_str()
        .ok_or_else(|| bad("missing `config`"))?;
    let mut args: Vec<String> = m["command"]
        .as_array()
        .ok_or_else(|| bad("missing `command`"))?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_string)
                .ok_or_else(|| bad("non-string argument"))
        })
        .collect::<Result<_, _>>()?;
    if let Some(out) = out {
        args.push("--out".into());
        args.push(out.display().to_string());
    }
    let cli = Cli::try_parse_from(std::iter::once("hvrt".to_string()).chain(args.iter().cloned()))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if matches!(cli.command, Command::Replay { .. }) {
        return Err(bad("a manifest cannot replay another replay"));
    }
    let cfg = Config::load(config, &[])?;
    let replay_args = strip_args(&args, &["--out"]);
    execute(&cli.command, &cfg, &replay_args, stdout)
}

fn grid_with(
    cfg: &Config,
    (xe, gc, ve): (Option<f64>, Option<f64>, Option<f64>),
) -> Result<GridParams, CliError> {
    let g = cfg.grid()?;
    Ok(GridParams::new(
        xe.unwrap_or(g.x_e),
        ve.unwrap_or(g.v_e),
        gc.unwrap_or(g.g_c),
    )?)
}

fn kv(out: &mut String, key: &str, value: f64) {
    out.push_str(&format!("{key} = {}\n", fmt_num(value)));
}

fn solve(
    cfg: &Config,
    p: f64,
    q: f64,
    grid: (Option<f64>, Option<f64>, Option<f64>),
) -> Result<String, CliError> {
    let grid = grid_with(cfg, grid)?;
    let sol = solve_pcc_voltage(&grid, &PccInjection::new(p, q)?)?;
    let mut s = String::new();
    kv(&mut s, "v_p", sol.v_p);
    kv(&mut s, "discriminant", sol.discriminant);
    match sol.lower_root {
        Some(v) => kv(&mut s, "lower_root", v),
        None => s.push_str("lower_root = none\n"),
    }
    kv(&mut s, "delta_v_in_phase", sol.delta_v_in_phase);
    kv(&mut s, "delta_v_quadrature", sol.delta_v_quadrature);
    kv(&mut s, "scr", grid.scr());
    Ok(s)
}

fn sense(
    cfg: &Config,
    p: f64,
    q: f64,
    grid: (Option<f64>, Option<f64>, Option<f64>),
    fd: bool,
) -> Result<String, CliError> {
    let grid = grid_with(cfg, grid)?;
    let inj = PccInjection::new(p, q)?;
    let dp = sensitivity_p(&grid, &inj)?;
    let dq = sensitivity_q(&grid, &inj)?;
    let mut s = String::new();
    kv(&mut s, "dv_dp", dp);
    kv(&mut s, "dv_dq", dq);
    kv(&mut s, "dominance_margin", dq.abs() - dp.abs());
    if fd {
        let v = |p: f64, q: f64| -> Result<f64, CliError> {
            Ok(solve_pcc_voltage(&grid, &PccInjection::new(p, q)?)?.v_p)
        };
        let h = 1e-6;
        let fd_p = (v(p + h, q)? - v(p - h, q)?) / (2.0 * h);
        let fd_q = (v(p, q + h)? - v(p, q - h)?) / (2.0 * h);
        kv(&mut s, "dv_dp_fd", fd_p);
        kv(&mut s, "dv_dq_fd", fd_q);
    }
    Ok(s)
}

fn capability(
    cfg: &Config,
    axis: Axis,
    (from, to, n): (Option<f64>, Option<f64>, usize),
    (p_s, v_s, k_de): (f64, f64, f64),
) -> Result<String, CliError> {
    let m = cfg.machine()?;
    let (lo, hi) = match axis {
        Axis::PS => (0.0, 1.0),
        Axis::VS => (0.9, 1.3),
        Axis::KDe => (0.0, m.k_de_max),
    };
    let values = linspace(from.unwrap_or(lo), to.unwrap_or(hi), n);
    let mut axes = GridAxes::single(p_s, v_s, k_de);
    match axis {
        Axis::PS => axes.p_s = values,
        Axis::VS => axes.v_s = values,
        Axis::KDe => axes.k_de = values,
    }
    let mut csv = Csv::new(&hvrt_core::CapabilityRow::CSV_HEADER);
    for row in capability_grid(&m, &axes)? {
        csv.numbers(&row.values());
    }
    Ok(csv.into_string())
}

fn design(cfg: &Config) -> Result<String, CliError> {
    let total = cfg.hvrt(GainBasis::Total)?;
    let stator = cfg.hvrt(GainBasis::Stator)?;
    let l = total.limits;
    let mut s = String::new();
    kv(&mut s, "q_s_max", l.q_s_max);
    kv(&mut s, "q_g_max", l.q_g_max);
    kv(&mut s, "q_total_max", l.q_total_max);
    kv(&mut s, "q_s_deload_max", l.q_s_deload_max);
    kv(&mut s, "q_total_deload_max", l.q_total_deload_max);
    kv(&mut s, "v_ov_min", total.v_ov_min);
    kv(&mut s, "v_ov1", total.v_ov1);
    kv(&mut s, "v_ov_max", total.v_ov_max);
    for hp in [total, stator] {
        let b = hp.gain_basis.name();
        kv(&mut s, &format!("k1_{b}"), hp.k1);
        kv(&mut s, &format!("k2_{b}"), hp.k2);
    }
    Ok(s)
}

fn scenario(cfg: &Config, method: Option<Method>) -> Result<Scenario, CliError> {
    let mut sc = cfg.scenario()?;
    if let Some(m) = method {
        sc.method = m;
    }
    Ok(sc)
}

fn simulate(cfg: &Config, method: Option<Method>) -> Result<String, CliError> {
    let ts = run(&scenario(cfg, method)?)?;
    let header: Vec<&str> = std::iter::once("t").chain(CHANNELS).collect();
    let mut csv = Csv::new(&header);
    let mut row = [0.0; CHANNELS.len() + 1];
    for i in 0..ts.len() {
        row[0] = ts.t[i];
        row[1..].copy_from_slice(&ts.row(i));
        csv.numbers(&row);
    }
    Ok(csv.into_string())
}

fn metric_cells(m: &Metrics) -> Vec<String> {
    vec![
        fmt_num(m.peak_v_p),
        fmt_num(m.settled_v_p),
        m.time_to_band.map(fmt_num).unwrap_or_default(),
        fmt_num(m.peak_i_r),
        fmt_num(m.absorbed_q_energy),
    ]
}

fn compare(cfg: &Config, methods: &[Method]) -> Result<String, CliError> {
    let base = cfg.scenario()?;
    let runs: Vec<(String, Scenario)> = methods
        .iter()
        .map(|&m| (m.name().to_string(), base.with_method(m)))
        .collect();
    let rows = hvrt_core::sim::compare(&runs)?;
    let header: Vec<&str> = Metrics::CSV_HEADER.split(',').collect();
    let mut csv = Csv::new(&header);
    for m in &rows {
        let mut cells = vec![m.label.clone()];
        cells.extend(metric_cells(m));
        csv.row(&cells);
    }
    Ok(csv.into_string())
}

/// Infeasible rows are reported with their error kind instead of aborting.
fn sweep(
    cfg: &Config,
    param: SweepParam,
    values: &[f64],
    method: Option<Method>,
) -> Result<String, CliError> {
    let base = scenario(cfg, method)?;
    let mut header: Vec<&str> = Metrics::CSV_HEADER.split(',').collect();
    header.insert(1, "status");
    let mut csv = Csv::new(&header);

    let mut built = Vec::new();
    for &v in values {
        match sweep_scenarios(&base, param, &[v]) {
            Ok(mut one) => built.push(Ok(one.remove(0))),
            Err(e) => built.push(Err((format!("{}={v}", param.name()), e))),
        }
    }
    let ok: Vec<(String, Scenario)> = built
        .iter()
        .filter_map(|b| b.as_ref().ok().cloned())
        .collect();
    let mut results = run_all(&ok).into_iter();
    for b in built {
        let (label, outcome) = match b {
            Ok((label, _)) => {
                let r = results.next().expect("one result per scenario");
                let m = r.map(|ts| metrics(&label, &ts));
                (label, m)
            }
            Err((label, e)) => (label, Err(e)),
        };
        let mut cells = vec![label];
        match outcome {
            Ok(m) => {
                cells.push("ok".into());
                cells.extend(metric_cells(&m));
            }
            Err(e) => {
                cells.push(e.kind().into());
                cells.extend(std::iter::repeat_n(String::new(), 5));
            }
        }
        csv.row(&cells);
    }
    Ok(csv.into_string())
}
