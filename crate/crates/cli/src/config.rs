//! Sectioned `key = value` configuration with provenance tracking.
//!
//! Every canonical key has a default taken from the core library's test
//! system. Values come from the defaults, a config file, or `--set` flags, in
//! that order of precedence. Machine data may be given either as per-unit
//! constants or as nameplate (SI) data, never both; SI data is converted once
//! while resolving and the resolved view only holds per-unit values.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use hvrt_core::capability::{GscLimit, MachineParams};
use hvrt_core::controller::{AvcSettings, GainBasis, HvrtParams};
use hvrt_core::sim::{default_hvrt, Event, HvdcLoad, Method, Scenario};
use hvrt_core::turbine::CpCurve;
use hvrt_core::{ControllerGains, DynamicsParams, GridParams, MachineSi, PiGains, TurbineParams};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Str(String),
    List(Vec<String>),
}

impl Value {
    fn to_toml(&self) -> String {
        match self {
            Value::Num(x) => format_toml_float(*x),
            Value::Str(s) => format!("{s:?}"),
            Value::List(items) => {
                let quoted: Vec<String> = items.iter().map(|s| format!("{s:?}")).collect();
                format!("[{}]", quoted.join(", "))
            }
        }
    }
}

/// Shortest representation that parses back to the same `f64`, always with a
/// decimal point or exponent so TOML reads it as a float.
fn format_toml_float(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Source {
    Default,
    File,
    Flag,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Flag => "flag",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Num,
    Choice(&'static [&'static str]),
    Events,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Role {
    /// Part of the resolved view, always present.
    Canonical,
    /// Part of the resolved view only when given.
    Optional,
    /// Accepted on input, folded into canonical keys while resolving.
    Input,
}

struct Field {
    key: &'static str,
    kind: Kind,
    role: Role,
}

const fn num(key: &'static str) -> Field {
    Field {
        key,
        kind: Kind::Num,
        role: Role::Canonical,
    }
}

const fn input(key: &'static str) -> Field {
    Field {
        key,
        kind: Kind::Num,
        role: Role::Input,
    }
}

const METHODS: &[&str] = &["unitpf", "avc", "pq"];
const BASES: &[&str] = &["total", "stator"];
const GSC_LIMITS: &[&str] = &["fixed", "capacity", "capacity_approx"];
const UNITS: &[&str] = &["pu", "si"];

/// Per-unit machine keys that conflict with nameplate input.
const MACHINE_PU_KEYS: [&str; 6] = [
    "machine.s_n",
    "machine.s_c",
    "machine.x_m",
    "machine.x_l",
    "machine.x_lr",
    "machine.i_r_max",
];

const MACHINE_SI_KEYS: [&str; 8] = [
    "machine.v_sn_volts",
    "machine.p_n_mw",
    "machine.n_units",
    "machine.power_factor",
    "machine.s_c_mva",
    "machine.x_m_ohms",
    "machine.x_l_ohms",
    "machine.i_r_max_amps",
];

/// Every accepted key, in serialization order.
const SCHEMA: &[Field] = &[
    num("grid.x_e"),
    num("grid.v_e"),
    num("grid.g_c"),
    input("grid.scr"),
    num("machine.s_n"),
    num("machine.s_c"),
    num("machine.x_m"),
    num("machine.x_l"),
    num("machine.x_lr"),
    num("machine.i_r_max"),
    num("machine.k_de_max"),
    Field {
        key: "machine.gsc_limit",
        kind: Kind::Choice(GSC_LIMITS),
        role: Role::Canonical,
    },
    num("machine.q_g_max"),
    Field {
        key: "machine.units",
        kind: Kind::Choice(UNITS),
        role: Role::Input,
    },
    input("machine.v_sn_volts"),
    input("machine.p_n_mw"),
    input("machine.n_units"),
    input("machine.power_factor"),
    input("machine.s_c_mva"),
    input("machine.x_m_ohms"),
    input("machine.x_l_ohms"),
    input("machine.i_r_max_amps"),
    num("turbine.h"),
    num("turbine.v_rate"),
    num("turbine.cut_in"),
    num("turbine.cut_out"),
    num("turbine.k_opt"),
    num("turbine.omega_min"),
    num("turbine.omega_max"),
    num("turbine.cp_c1"),
    num("turbine.cp_c2"),
    num("turbine.cp_c3"),
    num("turbine.cp_c4"),
    num("turbine.cp_c5"),
    num("turbine.cp_c6"),
    num("dynamics.tau_rsc"),
    num("dynamics.tau_gsc"),
    num("dynamics.c_dc"),
    num("pi.rsc_p_kp"),
    num("pi.rsc_p_ki"),
    num("pi.rsc_q_kp"),
    num("pi.rsc_q_ki"),
    num("pi.rsc_i_kp"),
    num("pi.rsc_i_ki"),
    num("pi.gsc_dc_kp"),
    num("pi.gsc_dc_ki"),
    num("pi.gsc_q_kp"),
    num("pi.gsc_q_ki"),
    num("pi.gsc_i_kp"),
    num("pi.gsc_i_ki"),
    num("hvrt.v_ov_min"),
    num("hvrt.v_ov1"),
    num("hvrt.v_ov_max"),
    Field {
        key: "hvrt.gain_basis",
        kind: Kind::Choice(BASES),
        role: Role::Canonical,
    },
    num("hvrt.hysteresis"),
    num("hvrt.release_rate"),
    num("avc.kp"),
    num("avc.ki"),
    num("avc.setpoint"),
    Field {
        key: "scenario.method",
        kind: Kind::Choice(METHODS),
        role: Role::Canonical,
    },
    num("scenario.v_wind"),
    num("scenario.dt"),
    num("scenario.t_end"),
    Field {
        key: "scenario.events",
        kind: Kind::Events,
        role: Role::Canonical,
    },
    Field {
        key: "scenario.dc_p",
        kind: Kind::Num,
        role: Role::Optional,
    },
    Field {
        key: "scenario.dc_q",
        kind: Kind::Num,
        role: Role::Optional,
    },
    num("scenario.dc_q_ratio"),
    num("scenario.block_ramp"),
    num("scenario.measurement_tau"),
];

const SECTIONS: [&str; 8] = [
    "grid", "machine", "turbine", "dynamics", "pi", "hvrt", "avc", "scenario",
];

fn field(key: &str) -> Option<&'static Field> {
    SCHEMA.iter().find(|f| f.key == key)
}

fn defaults() -> BTreeMap<&'static str, Value> {
    let sc = Scenario::default_study(Method::PqCoordination);
    let m = sc.machine;
    let tp = sc.turbine;
    let g = sc.gains;
    let n = Value::Num;
    let (gsc, q_g) = match m.gsc_limit {
        GscLimit::Fixed(q) => ("fixed", q),
        GscLimit::Capacity => ("capacity", 0.0),
        GscLimit::CapacityApprox => ("capacity_approx", 0.0),
    };
    let mut d = BTreeMap::new();
    let pairs: Vec<(&'static str, Value)> = vec![
        ("grid.x_e", n(sc.grid.x_e)),
        ("grid.v_e", n(sc.grid.v_e)),
        ("grid.g_c", n(sc.grid.g_c)),
        ("machine.s_n", n(m.s_n)),
        ("machine.s_c", n(m.s_c)),
        ("machine.x_m", n(m.x_m)),
        ("machine.x_l", n(m.x_l)),
        ("machine.x_lr", n(m.x_lr)),
        ("machine.i_r_max", n(m.i_r_max)),
        ("machine.k_de_max", n(m.k_de_max)),
        ("machine.gsc_limit", Value::Str(gsc.into())),
        ("machine.q_g_max", n(q_g)),
        ("turbine.h", n(tp.h)),
        ("turbine.v_rate", n(tp.v_rate)),
        ("turbine.cut_in", n(tp.cut_in)),
        ("turbine.cut_out", n(tp.cut_out)),
        ("turbine.k_opt", n(tp.k_opt)),
        ("turbine.omega_min", n(tp.omega_min)),
        ("turbine.omega_max", n(tp.omega_max)),
        ("turbine.cp_c1", n(tp.cp.c1)),
        ("turbine.cp_c2", n(tp.cp.c2)),
        ("turbine.cp_c3", n(tp.cp.c3)),
        ("turbine.cp_c4", n(tp.cp.c4)),
        ("turbine.cp_c5", n(tp.cp.c5)),
        ("turbine.cp_c6", n(tp.cp.c6)),
        ("dynamics.tau_rsc", n(sc.dynamics.tau_rsc)),
        ("dynamics.tau_gsc", n(sc.dynamics.tau_gsc)),
        ("dynamics.c_dc", n(sc.dynamics.c_dc)),
        ("pi.rsc_p_kp", n(g.rsc_active_power.kp)),
        ("pi.rsc_p_ki", n(g.rsc_active_power.ki)),
        ("pi.rsc_q_kp", n(g.rsc_reactive_power.kp)),
        ("pi.rsc_q_ki", n(g.rsc_reactive_power.ki)),
        ("pi.rsc_i_kp", n(g.rsc_current.kp)),
        ("pi.rsc_i_ki", n(g.rsc_current.ki)),
        ("pi.gsc_dc_kp", n(g.gsc_dc_voltage.kp)),
        ("pi.gsc_dc_ki", n(g.gsc_dc_voltage.ki)),
        ("pi.gsc_q_kp", n(g.gsc_reactive_power.kp)),
        ("pi.gsc_q_ki", n(g.gsc_reactive_power.ki)),
        ("pi.gsc_i_kp", n(g.gsc_current.kp)),
        ("pi.gsc_i_ki", n(g.gsc_current.ki)),
        ("hvrt.v_ov_min", n(sc.hvrt.v_ov_min)),
        ("hvrt.v_ov1", n(sc.hvrt.v_ov1)),
        ("hvrt.v_ov_max", n(sc.hvrt.v_ov_max)),
        (
            "hvrt.gain_basis",
            Value::Str(sc.hvrt.gain_basis.name().into()),
        ),
        ("hvrt.hysteresis", n(sc.hvrt.hysteresis)),
        ("hvrt.release_rate", n(sc.hvrt.release_rate)),
        ("avc.kp", n(sc.avc.gains.kp)),
        ("avc.ki", n(sc.avc.gains.ki)),
        ("avc.setpoint", n(sc.avc.setpoint)),
        ("scenario.method", Value::Str(sc.method.name().into())),
        ("scenario.v_wind", n(sc.v_wind)),
        ("scenario.dt", n(sc.dt)),
        ("scenario.t_end", n(sc.t_end)),
        (
            "scenario.events",
            Value::List(sc.events.iter().map(|e| e.to_string()).collect()),
        ),
        ("scenario.dc_q_ratio", n(sc.dc_q_ratio)),
        ("scenario.block_ramp", n(sc.block_ramp)),
        ("scenario.measurement_tau", n(sc.measurement_tau)),
    ];
    for (k, v) in pairs {
        d.insert(k, v);
    }
    d
}

/// Fully resolved parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<&'static str, (Value, Source)>,
}

impl Config {
    /// Resolved defaults.
    pub fn defaults() -> Self {
        Config::resolve(BTreeMap::new()).expect("defaults resolve")
    }

    /// Parses config text and applies `key=value` overrides.
    pub fn load(text: &str, overrides: &[String]) -> Result<Self, CliError> {
        let mut raw = parse_document(text)?;
        for o in overrides {
            let (key, value) = parse_override(o)?;
            raw.insert(key, (value, Source::Flag));
        }
        Config::resolve(raw)
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.values.get(key).map(|(v, _)| v)
    }

    pub fn source(&self, key: &str) -> Option<Source> {
        self.values.get(key).map(|(_, s)| *s)
    }

    pub fn num(&self, key: &str) -> f64 {
        match self.get(key) {
            Some(Value::Num(x)) => *x,
            other => panic!("{key} is not a resolved number: {other:?}"),
        }
    }

    fn str(&self, key: &str) -> &str {
        match self.get(key) {
            Some(Value::Str(s)) => s,
            other => panic!("{key} is not a resolved string: {other:?}"),
        }
    }

    /// Sets a canonical key from the command line.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let mut raw: BTreeMap<&'static str, (Value, Source)> = self.values.clone();
        let (k, v) = parse_override(&format!("{key}={value}"))?;
        raw.insert(k, (v, Source::Flag));
        *self = Config::resolve(raw)?;
        Ok(())
    }

    fn resolve(mut raw: BTreeMap<&'static str, (Value, Source)>) -> Result<Self, CliError> {
        let mut values: BTreeMap<&'static str, (Value, Source)> = defaults()
            .into_iter()
            .map(|(k, v)| (k, (v, Source::Default)))
            .collect();

        if let Some((Value::Num(scr), src)) = raw.remove("grid.scr") {
            if raw.contains_key("grid.x_e") {
                return Err(CliError::schema(
                    "grid.scr",
                    "conflicts with grid.x_e; give one of them",
                ));
            }
            if !(scr > 0.0) {
                return Err(CliError::schema("grid.scr", "must be positive"));
            }
            raw.insert("grid.x_e", (Value::Num(1.0 / scr), src));
        }

        resolve_machine(&mut raw)?;

        let dc_p = raw.contains_key("scenario.dc_p");
        let dc_q = raw.contains_key("scenario.dc_q");
        if dc_p != dc_q {
            return Err(CliError::schema(
                if dc_p {
                    "scenario.dc_q"
                } else {
                    "scenario.dc_p"
                },
                "scenario.dc_p and scenario.dc_q must be given together",
            ));
        }

        for (k, v) in raw {
            values.insert(k, v);
        }
        let cfg = Config { values };
        cfg.scenario()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<GridParams, CliError> {
        Ok(GridParams::new(
            self.num("grid.x_e"),
            self.num("grid.v_e"),
            self.num("grid.g_c"),
        )?)
    }

    pub fn machine(&self) -> Result<MachineParams, CliError> {
        let x_m = self.num("machine.x_m");
        let x_l = self.num("machine.x_l");
        let gsc_limit = match self.str("machine.gsc_limit") {
            "capacity" => GscLimit::Capacity,
            "capacity_approx" => GscLimit::CapacityApprox,
            _ => GscLimit::Fixed(self.num("machine.q_g_max")),
        };
        Ok(MachineParams {
            s_n: self.num("machine.s_n"),
            s_c: self.num("machine.s_c"),
            x_m,
            x_ls: x_l - x_m,
            x_l,
            x_lr: self.num("machine.x_lr"),
            r_s: 0.0,
            i_r_max: self.num("machine.i_r_max"),
            k_de_max: self.num("machine.k_de_max"),
            slip: 0.0,
            gsc_limit,
        }
        .validated()?)
    }

    pub fn turbine(&self) -> Result<TurbineParams, CliError> {
        let cp = CpCurve {
            c1: self.num("turbine.cp_c1"),
            c2: self.num("turbine.cp_c2"),
            c3: self.num("turbine.cp_c3"),
            c4: self.num("turbine.cp_c4"),
            c5: self.num("turbine.cp_c5"),
            c6: self.num("turbine.cp_c6"),
        };
        let mut tp = TurbineParams::new(
            self.num("turbine.h"),
            self.num("turbine.v_rate"),
            self.num("turbine.cut_in"),
            self.num("turbine.cut_out"),
            cp,
        )?;
        tp.k_opt = self.num("turbine.k_opt");
        tp.omega_min = self.num("turbine.omega_min");
        tp.omega_max = self.num("turbine.omega_max");
        tp.validate()?;
        Ok(tp)
    }

    pub fn gains(&self) -> ControllerGains {
        let pi = |p: &str| {
            PiGains::new(
                self.num(&format!("pi.{p}_kp")),
                self.num(&format!("pi.{p}_ki")),
            )
        };
        ControllerGains {
            rsc_active_power: pi("rsc_p"),
            rsc_reactive_power: pi("rsc_q"),
            rsc_current: pi("rsc_i"),
            gsc_dc_voltage: pi("gsc_dc"),
            gsc_reactive_power: pi("gsc_q"),
            gsc_current: pi("gsc_i"),
        }
    }

    pub fn gain_basis(&self) -> GainBasis {
        GainBasis::parse(self.str("hvrt.gain_basis")).expect("validated choice")
    }

    /// HVRT parameters with the capability snapshot at P_MPPT = 1, V = 1.
    pub fn hvrt(&self, basis: GainBasis) -> Result<HvrtParams, CliError> {
        let m = self.machine()?;
        let base = default_hvrt(&m, basis)?;
        let mut hp = HvrtParams::new(
            self.num("hvrt.v_ov_min"),
            self.num("hvrt.v_ov1"),
            self.num("hvrt.v_ov_max"),
            basis,
            base.limits,
        )?;
        hp.hysteresis = self.num("hvrt.hysteresis");
        hp.release_rate = self.num("hvrt.release_rate");
        if !(hp.hysteresis >= 0.0 && hp.release_rate > 0.0) {
            return Err(CliError::schema(
                "hvrt.hysteresis",
                "hysteresis must be >= 0 and release_rate > 0",
            ));
        }
        Ok(hp)
    }

    pub fn method(&self) -> Method {
        self.str("scenario.method")
            .parse()
            .expect("validated choice")
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let events = match self.get("scenario.events") {
            Some(Value::List(items)) => items
                .iter()
                .map(|s| s.parse::<Event>())
                .collect::<Result<Vec<_>, _>>()?,
            _ => Vec::new(),
        };
        let dc_pre_block = match (self.get("scenario.dc_p"), self.get("scenario.dc_q")) {
            (Some(Value::Num(p)), Some(Value::Num(q))) => Some(HvdcLoad { p: *p, q: *q }),
            _ => None,
        };
        let dynamics = DynamicsParams {
            tau_rsc: self.num("dynamics.tau_rsc"),
            tau_gsc: self.num("dynamics.tau_gsc"),
            c_dc: self.num("dynamics.c_dc"),
        };
        dynamics.validate()?;
        let sc = Scenario {
            grid: self.grid()?,
            machine: self.machine()?,
            turbine: self.turbine()?,
            gains: self.gains(),
            dynamics,
            hvrt: self.hvrt(self.gain_basis())?,
            avc: AvcSettings {
                gains: PiGains::new(self.num("avc.kp"), self.num("avc.ki")),
                setpoint: self.num("avc.setpoint"),
            },
            method: self.method(),
            v_wind: self.num("scenario.v_wind"),
            events,
            dt: self.num("scenario.dt"),
            t_end: self.num("scenario.t_end"),
            dc_pre_block,
            dc_q_ratio: self.num("scenario.dc_q_ratio"),
            block_ramp: self.num("scenario.block_ramp"),
            measurement_tau: self.num("scenario.measurement_tau"),
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Canonical per-unit text; parsing it yields the same resolved values.
    pub fn to_canonical(&self) -> String {
        self.render(false)
    }

    /// Resolved view with each key's provenance and derived figures as comments.
    pub fn to_annotated(&self) -> String {
        self.render(true)
    }

    fn render(&self, annotate: bool) -> String {
        let mut out = String::new();
        for section in SECTIONS {
            let _ = writeln!(out, "[{section}]");
            for f in SCHEMA
                .iter()
                .filter(|f| f.role != Role::Input && f.key.split('.').next() == Some(section))
            {
                let Some((v, src)) = self.values.get(f.key) else {
                    continue;
                };
                let name = &f.key[section.len() + 1..];
                if annotate {
                    let _ = writeln!(out, "{name} = {}  # {}", v.to_toml(), src.name());
                } else {
                    let _ = writeln!(out, "{name} = {}", v.to_toml());
                }
            }
            if annotate && section == "grid" {
                let _ = writeln!(
                    out,
                    "# scr = {}  (derived)",
                    format_toml_float(1.0 / self.num("grid.x_e"))
                );
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_annotated())
    }
}

/// Converts nameplate input to per-unit keys, rejecting mixed blocks.
fn resolve_machine(raw: &mut BTreeMap<&'static str, (Value, Source)>) -> Result<(), CliError> {
    let units = match raw.remove("machine.units") {
        Some((Value::Str(u), _)) => Some(u),
        _ => None,
    };
    let si_given: Vec<&str> = MACHINE_SI_KEYS
        .iter()
        .copied()
        .filter(|k| raw.contains_key(k))
        .collect();
    let pu_given: Vec<&str> = MACHINE_PU_KEYS
        .iter()
        .copied()
        .filter(|k| raw.contains_key(k))
        .collect();
    let si = match units.as_deref() {
        Some("si") => true,
        Some(_) => {
            if let Some(k) = si_given.first() {
                return Err(CliError::schema(
                    k,
                    "nameplate key given with machine.units = \"pu\"",
                ));
            }
            false
        }
        None => !si_given.is_empty(),
    };
    if !si {
        return Ok(());
    }
    if let Some(k) = pu_given.first() {
        return Err(CliError::schema(
            k,
            "per-unit machine constants cannot be mixed with nameplate (SI) data",
        ));
    }
    let mut np = MachineSi::test_system();
    let mut source = Source::Default;
    for key in MACHINE_SI_KEYS {
        let Some((Value::Num(x), src)) = raw.remove(key) else {
            continue;
        };
        source = source.max(src);
        let slot = match key {
            "machine.v_sn_volts" => &mut np.v_sn_volts,
            "machine.p_n_mw" => &mut np.p_n_mw,
            "machine.n_units" => &mut np.n_units,
            "machine.power_factor" => &mut np.power_factor,
            "machine.s_c_mva" => &mut np.s_c_mva,
            "machine.x_m_ohms" => &mut np.x_m_ohms,
            "machine.x_l_ohms" => &mut np.x_l_ohms,
            _ => &mut np.i_r_max_amps,
        };
        *slot = x;
    }
    let pu = np.to_per_unit()?;
    let source = source.max(Source::File);
    let n = |x: f64| (Value::Num(x), source);
    raw.insert("machine.s_n", n(pu.s_n));
    raw.insert("machine.s_c", n(pu.s_c));
    raw.insert("machine.x_m", n(pu.x_m));
    raw.insert("machine.x_l", n(pu.x_l));
    raw.insert("machine.x_lr", n(pu.x_l - pu.x_m));
    raw.insert("machine.i_r_max", n(pu.i_r_max));
    Ok(())
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_document(text: &str) -> Result<BTreeMap<&'static str, (Value, Source)>, CliError> {
    let doc: toml::Table = toml::from_str(text).map_err(|e| CliError::Parse {
        line: e.span().map(|s| line_of(text, s.start)).unwrap_or(1),
        message: e.message().to_string(),
    })?;
    let mut raw = BTreeMap::new();
    for (section, body) in &doc {
        let toml::Value::Table(body) = body else {
            return Err(CliError::schema(
                section,
                "top-level keys must be inside a [section]",
            ));
        };
        if !SECTIONS.contains(&section.as_str()) {
            return Err(CliError::schema(section, "unknown section"));
        }
        for (name, v) in body {
            let key = format!("{section}.{name}");
            let f = field(&key).ok_or_else(|| CliError::schema(&key, "unknown key"))?;
            raw.insert(f.key, (from_toml(f, v)?, Source::File));
        }
    }
    Ok(raw)
}

fn from_toml(f: &Field, v: &toml::Value) -> Result<Value, CliError> {
    let mismatch = |want: &str| CliError::schema(f.key, &format!("expected {want}"));
    match f.kind {
        Kind::Num => match v {
            toml::Value::Float(x) => Ok(Value::Num(*x)),
            toml::Value::Integer(i) => Ok(Value::Num(*i as f64)),
            _ => Err(mismatch("a number")),
        },
        Kind::Choice(allowed) => match v {
            toml::Value::String(s) => choice(f, allowed, s),
            _ => Err(mismatch("a string")),
        },
        Kind::Events => match v {
            toml::Value::Array(items) => items
                .iter()
                .map(|i| match i {
                    toml::Value::String(s) => event(f, s),
                    _ => Err(mismatch("an array of event strings")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Value::List),
            _ => Err(mismatch("an array of event strings")),
        },
    }
}

fn choice(f: &Field, allowed: &[&str], s: &str) -> Result<Value, CliError> {
    if allowed.contains(&s) {
        Ok(Value::Str(s.to_string()))
    } else {
        Err(CliError::schema(
            f.key,
            &format!("`{s}` is not one of {}", allowed.join(", ")),
        ))
    }
}

fn event(f: &Field, s: &str) -> Result<String, CliError> {
    let ev: Event = s
        .parse()
        .map_err(|_| CliError::schema(f.key, &format!("bad event `{s}`")))?;
    Ok(ev.to_string())
}

fn parse_override(s: &str) -> Result<(&'static str, Value), CliError> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got `{s}`")))?;
    let key = key.trim();
    let value = value.trim();
    let f = field(key).ok_or_else(|| CliError::schema(key, "unknown key"))?;
    let v = match f.kind {
        Kind::Num => value
            .parse::<f64>()
            .map(Value::Num)
            .map_err(|_| CliError::schema(f.key, &format!("`{value}` is not a number")))?,
        Kind::Choice(allowed) => choice(f, allowed, value.trim_matches('"'))?,
        Kind::Events => Value::List(
            value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| event(f, s))
                .collect::<Result<_, _>>()?,
        ),
    };
    Ok((f.key, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_canonical_key_has_a_default() {
        let d = defaults();
        for f in SCHEMA.iter().filter(|f| f.role == Role::Canonical) {
            assert!(d.contains_key(f.key), "{}", f.key);
        }
    }

    #[test]
    fn floats_keep_a_decimal_point() {
        assert_eq!(format_toml_float(3.0), "3.0");
        assert_eq!(format_toml_float(0.1), "0.1");
        assert_eq!(format_toml_float(1e-20), "1e-20");
    }

    #[test]
    fn line_numbers_count_from_one() {
        assert_eq!(line_of("a\nb\nc", 0), 1);
        assert_eq!(line_of("a\nb\nc", 4), 3);
    }
}
