//! Fixed-step scenario engine.
//!
//! The DFIG state is integrated with classical RK4. At every stage the PCC
//! voltage is solved algebraically from the present injections. Controllers
//! are sampled once per step (zero-order hold) and events are applied at step
//! boundaries; the sample at an event time already reflects the event.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capability::{MachineParams, OperatingPoint};
use crate::controller::{
    capability_snapshot, unit_pf_references, AvcController, AvcSettings, GainBasis, HvrtParams,
    Mode, PowerReferences, PqCoordinator, DEFAULT_V_OV1, DEFAULT_V_OV_MAX, DEFAULT_V_OV_MIN,
};
use crate::dynamics::{rotor_quantities, DfigInputs, DfigModel, DfigState, DynamicsParams};
use crate::error::{Error, Result};
use crate::network::{quartic_coeffs, solve_pcc_voltage, GridParams, PccInjection};
use crate::pi::ControllerGains;
use crate::turbine::TurbineParams;

/// Default time for the rectifier's power to fall to zero after a block (s).
pub const DEFAULT_BLOCK_RAMP: f64 = 0.0;

/// Default HVDC reactive consumption as a fraction of its active power.
pub const DEFAULT_DC_Q_RATIO: f64 = 0.5;

/// Time constant of the PCC voltage transducer feeding the controllers (s).
pub const DEFAULT_MEASUREMENT_TAU: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    UnitPf,
    Avc,
    PqCoordination,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::UnitPf, Method::Avc, Method::PqCoordination];

    pub fn name(self) -> &'static str {
        match self {
            Method::UnitPf => "unitpf",
            Method::Avc => "avc",
            Method::PqCoordination => "pq",
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitpf" => Ok(Method::UnitPf),
            "avc" => Ok(Method::Avc),
            "pq" => Ok(Method::PqCoordination),
            other => Err(Error::InvalidParam(format!(
                "unknown method `{other}` (expected unitpf, avc or pq)"
            ))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    DcBipolarBlock,
    /// Disconnects this fraction of the capacitor admittance.
    CapacitorTrip(f64),
    /// New wind speed (m/s).
    WindStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

impl Event {
    pub fn new(t: f64, kind: EventKind) -> Self {
        Event { t, kind }
    }
}

/// Text form: `block@0.5`, `captrip=1.0@1.2`, `wind=8@1.0`.
impl FromStr for Event {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownEvent(s.to_string());
        let (what, at) = s.trim().split_once('@').ok_or_else(unknown)?;
        let t: f64 = at.trim().parse().map_err(|_| unknown())?;
        let (name, arg) = match what.split_once('=') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (what.trim(), None),
        };
        let value =
            |a: Option<&str>| -> Result<f64> { a.and_then(|a| a.parse().ok()).ok_or_else(unknown) };
        let kind = match name {
            "block" if arg.is_none() => EventKind::DcBipolarBlock,
            "captrip" => EventKind::CapacitorTrip(value(arg)?),
            "wind" => EventKind::WindStep(value(arg)?),
            _ => return Err(unknown()),
        };
        Ok(Event { t, kind })
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EventKind::DcBipolarBlock => write!(f, "block@{}", self.t),
            EventKind::CapacitorTrip(x) => write!(f, "captrip={x}@{}", self.t),
            EventKind::WindStep(v) => write!(f, "wind={v}@{}", self.t),
        }
    }
}

/// Active and reactive power drawn from the PCC by the HVDC rectifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HvdcLoad {
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// `v_e` is recomputed by the initializer.
    pub grid: GridParams,
    pub machine: MachineParams,
    pub turbine: TurbineParams,
    pub gains: ControllerGains,
    pub dynamics: DynamicsParams,
    pub hvrt: HvrtParams,
    pub avc: AvcSettings,
    pub method: Method,
    pub v_wind: f64,
    pub events: Vec<Event>,
    pub dt: f64,
    pub t_end: f64,
    /// Pre-block rectifier draw; `None` evacuates the farm's output with
    /// `dc_q_ratio` reactive consumption.
    pub dc_pre_block: Option<HvdcLoad>,
    pub dc_q_ratio: f64,
    /// Time over which the rectifier draw falls to zero after a block (s).
    pub block_ramp: f64,
    /// Voltage transducer lag seen by the controllers (s); 0 samples `v_p` directly.
    pub measurement_tau: f64,
}

/// HVRT parameters with the limits evaluated at rated power and 1 p.u. voltage.
pub fn default_hvrt(machine: &MachineParams, gain_basis: GainBasis) -> Result<HvrtParams> {
    let limits = capability_snapshot(machine, 1.0, 1.0, machine.k_de_max)?;
    HvrtParams::new(
        DEFAULT_V_OV_MIN,
        DEFAULT_V_OV1,
        DEFAULT_V_OV_MAX,
        gain_basis,
        limits,
    )
}

impl Scenario {
    /// SCR 2, 0.5 p.u. capacitor banks, rated wind, DC block at 0.5 s.
    pub fn default_study(method: Method) -> Self {
        let machine = MachineParams::test_system();
        Scenario {
            grid: GridParams::from_scr(2.0, 0.5).expect("valid grid"),
            machine,
            turbine: TurbineParams::default(),
            gains: ControllerGains::default(),
            dynamics: DynamicsParams::default(),
            hvrt: default_hvrt(&machine, GainBasis::Total).expect("valid defaults"),
            avc: AvcSettings::default(),
            method,
            v_wind: 12.0,
            events: vec![Event::new(0.5, EventKind::DcBipolarBlock)],
            dt: 1e-3,
            t_end: 3.0,
            dc_pre_block: None,
            dc_q_ratio: DEFAULT_DC_Q_RATIO,
            block_ramp: DEFAULT_BLOCK_RAMP,
            measurement_tau: DEFAULT_MEASUREMENT_TAU,
        }
    }

    pub fn with_method(&self, method: Method) -> Self {
        Scenario {
            method,
            ..self.clone()
        }
    }

    pub fn model(&self) -> Result<DfigModel> {
        DfigModel::new(self.machine, self.turbine, self.gains, self.dynamics)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.hvrt.check_thresholds()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "dt must be > 0, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "t_end must be >= 0, got {}",
                self.t_end
            )));
        }
        if !(self.block_ramp >= 0.0 && self.dc_q_ratio >= 0.0 && self.measurement_tau >= 0.0) {
            return Err(Error::InvalidParam(
                "block_ramp, dc_q_ratio and measurement_tau must be non-negative".into(),
            ));
        }
        self.turbine.check_wind(self.v_wind)?;
        let mut last = f64::NEG_INFINITY;
        for ev in &self.events {
            if ev.t < last {
                return Err(Error::InvalidParam("events must be sorted by time".into()));
            }
            last = ev.t;
            let k = (ev.t / self.dt).round();
            if !(ev.t >= 0.0) || (k * self.dt - ev.t).abs() > 1e-9 * self.dt.max(ev.t) {
                return Err(Error::InvalidParam(format!(
                    "event time {} is not a multiple of dt = {}",
                    ev.t, self.dt
                )));
            }
            match ev.kind {
                EventKind::CapacitorTrip(x) if !(0.0..=1.0).contains(&x) => {
                    return Err(Error::InvalidParam(format!(
                        "capacitor trip fraction {x} outside [0, 1]"
                    )));
                }
                EventKind::WindStep(v) => self.turbine.check_wind(v)?,
                _ => {}
            }
        }
        Ok(())
    }
}

/// Network-side state that events act on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plant {
    pub grid: GridParams,
    pub hvdc: HvdcLoad,
    pub v_wind: f64,
    /// `(start time, draw at start)` of an ongoing block ramp.
    ramp: Option<(f64, HvdcLoad)>,
    ramp_duration: f64,
}

impl Plant {
    /// Rectifier draw at time `t`.
    pub fn hvdc_at(&self, t: f64) -> HvdcLoad {
        match self.ramp {
            Some((t0, start)) if self.ramp_duration > 0.0 => {
                let f = (1.0 - (t - t0) / self.ramp_duration).clamp(0.0, 1.0);
                HvdcLoad {
                    p: start.p * f,
                    q: start.q * f,
                }
            }
            _ => self.hvdc,
        }
    }

    pub fn injection(&self, x: &DfigState, t: f64) -> Result<PccInjection> {
        let dc = self.hvdc_at(t);
        PccInjection::new(x.p_dfig() - dc.p, x.q_dfig() - dc.q)
    }

    pub fn pcc_voltage(&self, x: &DfigState, t: f64) -> Result<f64> {
        Ok(solve_pcc_voltage(&self.grid, &self.injection(x, t)?)?.v_p)
    }
}

/// Applies one event to the network side.
pub fn apply_event(kind: &EventKind, plant: &mut Plant, t: f64) -> Result<()> {
    match *kind {
        EventKind::DcBipolarBlock => {
            if plant.ramp_duration > 0.0 {
                plant.ramp = Some((t, plant.hvdc));
            }
            plant.hvdc = HvdcLoad { p: 0.0, q: 0.0 };
        }
        EventKind::CapacitorTrip(fraction) => {
            if !(0.0..=1.0).contains(&fraction) {
                return Err(Error::UnknownEvent(format!("captrip={fraction}")));
            }
            plant.grid.g_c *= 1.0 - fraction;
        }
        EventKind::WindStep(v) => plant.v_wind = v,
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    pub state: DfigState,
    /// Grid with the source magnitude that puts the PCC at 1 p.u.
    pub grid: GridParams,
    pub hvdc: HvdcLoad,
}

/// Pre-event operating point with the PCC at exactly 1 p.u.
pub fn init_steady_state(sc: &Scenario) -> Result<InitialCondition> {
    sc.validate()?;
    let model = sc.model()?;
    let state = model.steady_state(sc.v_wind, 1.0)?;
    let hvdc = sc.dc_pre_block.unwrap_or(HvdcLoad {
        p: state.p_dfig(),
        q: sc.dc_q_ratio * state.p_dfig(),
    });
    let x = sc.grid.x_e;
    // Power flowing from the PCC into the grid, capacitor output included.
    let p_out = state.p_dfig() - hvdc.p;
    let q_out = state.q_dfig() - hvdc.q + sc.grid.g_c;
    let v_e = (1.0 - x * q_out).hypot(x * p_out);
    let grid =
        GridParams::new(x, v_e, sc.grid.g_c).map_err(|e| Error::NoFeasibleInit(e.to_string()))?;
    let inj = PccInjection::new(p_out, state.q_dfig() - hvdc.q)
        .map_err(|e| Error::NoFeasibleInit(e.to_string()))?;
    let sol = solve_pcc_voltage(&grid, &inj).map_err(|e| Error::NoFeasibleInit(e.to_string()))?;
    if (sol.v_p - 1.0).abs() > 1e-8 {
        return Err(Error::NoFeasibleInit(format!(
            "1 p.u. at the PCC lies on the low-voltage branch (upper root {:.6})",
            sol.v_p
        )));
    }
    Ok(InitialCondition { state, grid, hvdc })
}

enum Controller {
    UnitPf,
    Avc(AvcController),
    Pq(PqCoordinator),
}

impl Controller {
    fn new(sc: &Scenario) -> Result<Self> {
        Ok(match sc.method {
            Method::UnitPf => Controller::UnitPf,
            Method::Avc => Controller::Avc(AvcController::new(sc.machine, sc.avc)?),
            Method::PqCoordination => Controller::Pq(PqCoordinator::new(sc.machine, sc.hvrt)?),
        })
    }

    fn step(&mut self, v_p: f64, p_mppt: f64, slip: f64, dt: f64) -> Result<PowerReferences> {
        match self {
            Controller::UnitPf => Ok(unit_pf_references(p_mppt)),
            Controller::Avc(c) => c.step(v_p, p_mppt, slip, dt),
            Controller::Pq(c) => Ok(c.step(v_p, p_mppt, slip, dt)?.refs),
        }
    }
}

/// Channel names of [`TimeSeries`] in CSV order, after `t`.
pub const CHANNELS: [&str; 15] = [
    "v_p", "p_dfig", "q_dfig", "omega_r", "v_dc", "i_r", "v_r", "mode", "q_s_ref", "q_g_ref",
    "p_s_ref", "k_de", "p_hvdc", "q_hvdc", "g_c",
];

/// Energy integrals over a run (p.u.·s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBalance {
    pub mechanical_in: f64,
    pub electrical_out: f64,
    pub kinetic_start: f64,
    pub kinetic_end: f64,
    pub dc_link_start: f64,
    pub dc_link_end: f64,
}

impl EnergyBalance {
    /// `E_el - (E_m - ΔE_kin - ΔE_dc)`; zero for a lossless model.
    pub fn residual(&self) -> f64 {
        self.electrical_out
            - (self.mechanical_in
                - (self.kinetic_end - self.kinetic_start)
                - (self.dc_link_end - self.dc_link_start))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub method: Option<Method>,
    pub t: Vec<f64>,
    pub v_p: Vec<f64>,
    pub p_dfig: Vec<f64>,
    pub q_dfig: Vec<f64>,
    pub omega_r: Vec<f64>,
    pub v_dc: Vec<f64>,
    pub i_r: Vec<f64>,
    pub v_r: Vec<f64>,
    pub mode: Vec<Mode>,
    pub q_s_ref: Vec<f64>,
    pub q_g_ref: Vec<f64>,
    pub p_s_ref: Vec<f64>,
    pub k_de: Vec<f64>,
    pub p_hvdc: Vec<f64>,
    pub q_hvdc: Vec<f64>,
    pub g_c: Vec<f64>,
    /// Grid used for the run (source magnitude from the initializer).
    pub x_e: f64,
    pub v_e: f64,
    pub energy: EnergyBalance,
    pub final_state: DfigState,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Row `i` in [`CHANNELS`] order, mode as its index.
    pub fn row(&self, i: usize) -> [f64; 15] {
        [
            self.v_p[i],
            self.p_dfig[i],
            self.q_dfig[i],
            self.omega_r[i],
            self.v_dc[i],
            self.i_r[i],
            self.v_r[i],
            self.mode[i].index() as f64,
            self.q_s_ref[i],
            self.q_g_ref[i],
            self.p_s_ref[i],
            self.k_de[i],
            self.p_hvdc[i],
            self.q_hvdc[i],
            self.g_c[i],
        ]
    }

    /// Net PCC injection at sample `i`.
    pub fn injection(&self, i: usize) -> PccInjection {
        PccInjection {
            p: self.p_dfig[i] - self.p_hvdc[i],
            q: self.q_dfig[i] - self.q_hvdc[i],
        }
    }

    pub fn grid_at(&self, i: usize) -> GridParams {
        GridParams {
            x_e: self.x_e,
            v_e: self.v_e,
            g_c: self.g_c[i],
        }
    }

    /// Residual of the network biquadratic at sample `i`, in the normalised voltage.
    pub fn network_residual(&self, i: usize) -> f64 {
        let coeffs = quartic_coeffs(&self.grid_at(i), &self.injection(i));
        coeffs.residual(self.v_p[i] / self.v_e)
    }

    fn push(
        &mut self,
        t: f64,
        v_p: f64,
        x: &DfigState,
        refs: &PowerReferences,
        rq: (f64, f64),
        plant: &Plant,
    ) {
        let dc = plant.hvdc_at(t);
        self.t.push(t);
        self.v_p.push(v_p);
        self.p_dfig.push(x.p_dfig());
        self.q_dfig.push(x.q_dfig());
        self.omega_r.push(x.omega_r);
        self.v_dc.push(x.v_dc);
        self.i_r.push(rq.0);
        self.v_r.push(rq.1);
        self.mode.push(refs.mode);
        self.q_s_ref.push(refs.q_s_ref);
        self.q_g_ref.push(refs.q_g_ref);
        self.p_s_ref.push(refs.p_s_ref);
        self.k_de.push(refs.k_de);
        self.p_hvdc.push(dc.p);
        self.q_hvdc.push(dc.q);
        self.g_c.push(plant.grid.g_c);
    }
}

/// Integrated quantity count: DFIG states, mechanical and electrical energy,
/// and the measured PCC voltage.
const N_AUG: usize = DfigState::LEN + 3;
const MEAS: usize = DfigState::LEN + 2;

fn augmented_derivative(
    model: &DfigModel,
    tau_meas: f64,
    plant: &Plant,
    refs: &PowerReferences,
    y: &[f64; N_AUG],
    t: f64,
) -> Result<[f64; N_AUG]> {
    let mut xs = [0.0; DfigState::LEN];
    xs.copy_from_slice(&y[..DfigState::LEN]);
    let x = DfigState::from_array(&xs);
    let v_s = plant.pcc_voltage(&x, t)?;
    let dx = model.derivatives(
        &x,
        &DfigInputs {
            refs: *refs,
            v_s,
            v_wind: plant.v_wind,
        },
    );
    let mut out = [0.0; N_AUG];
    out[..DfigState::LEN].copy_from_slice(&dx.to_array());
    out[DfigState::LEN] = model.turbine.aero_power(plant.v_wind, x.omega_r);
    out[DfigState::LEN + 1] = x.p_dfig();
    if tau_meas > 0.0 {
        out[MEAS] = (v_s - y[MEAS]) / tau_meas;
    }
    Ok(out)
}

fn axpy(y: &[f64; N_AUG], h: f64, k: &[f64; N_AUG]) -> [f64; N_AUG] {
    let mut out = *y;
    for (o, d) in out.iter_mut().zip(k) {
        *o += h * d;
    }
    out
}

fn check_bounds(x: &DfigState, model: &DfigModel, t: f64) -> Result<()> {
    let tp = &model.turbine;
    let what = if !x.is_finite() {
        Some("non-finite state".to_string())
    } else if x.omega_r < tp.omega_min || x.omega_r > tp.omega_max {
        Some(format!("rotor speed {:.6} p.u. outside limits", x.omega_r))
    } else if !(x.v_dc > 0.2 && x.v_dc < 2.0) {
        Some(format!(
            "DC-link voltage {:.6} p.u. outside (0.2, 2.0)",
            x.v_dc
        ))
    } else {
        None
    };
    match what {
        Some(what) => Err(Error::NumericBlowup { t, what }),
        None => Ok(()),
    }
}

fn kinetic(model: &DfigModel, x: &DfigState) -> f64 {
    model.turbine.h * x.omega_r * x.omega_r
}

fn dc_energy(model: &DfigModel, x: &DfigState) -> f64 {
    0.5 * model.dynamics.c_dc * x.v_dc * x.v_dc
}

/// Runs a scenario from its steady state.
pub fn run(sc: &Scenario) -> Result<TimeSeries> {
    let init = init_steady_state(sc)?;
    let model = sc.model()?;
    let mut controller = Controller::new(sc)?;
    let mut plant = Plant {
        grid: init.grid,
        hvdc: init.hvdc,
        v_wind: sc.v_wind,
        ramp: None,
        ramp_duration: sc.block_ramp,
    };
    let n = sc.n_steps();
    let dt = sc.dt;
    let m = model.machine;

    let mut series = TimeSeries {
        method: Some(sc.method),
        x_e: init.grid.x_e,
        v_e: init.grid.v_e,
        ..TimeSeries::default()
    };
    let mut y = [0.0; N_AUG];
    y[..DfigState::LEN].copy_from_slice(&init.state.to_array());
    y[MEAS] = 1.0;
    series.energy.kinetic_start = kinetic(&model, &init.state);
    series.energy.dc_link_start = dc_energy(&model, &init.state);

    let mut next_event = 0;
    for k in 0..=n {
        let t = k as f64 * dt;
        while next_event < sc.events.len() && (sc.events[next_event].t / dt).round() as usize == k {
            apply_event(&sc.events[next_event].kind, &mut plant, t).map_err(|e| e.at(t))?;
            next_event += 1;
        }

        let mut xs = [0.0; DfigState::LEN];
        xs.copy_from_slice(&y[..DfigState::LEN]);
        let x = DfigState::from_array(&xs);
        check_bounds(&x, &model, t)?;
        let v_p = plant.pcc_voltage(&x, t).map_err(|e| e.at(t))?;
        let p_mppt = model.turbine.mppt_curve(x.omega_r);
        let v_meas = if sc.measurement_tau > 0.0 {
            y[MEAS]
        } else {
            v_p
        };
        let refs = controller
            .step(v_meas, p_mppt, x.slip(), dt)
            .map_err(|e| e.at(t))?;
        let rq = rotor_quantities(&x, &OperatingPoint::new(x.p_s, x.q_s, v_p), &m)
            .map_err(|e| e.at(t))?;
        series.push(t, v_p, &x, &refs, (rq.i_r_mag, rq.v_r_mag), &plant);

        if k == n {
            series.final_state = x;
            break;
        }
        let f = |y: &[f64; N_AUG], t: f64| {
            augmented_derivative(&model, sc.measurement_tau, &plant, &refs, y, t)
                .map_err(|e| e.at(t))
        };
        let k1 = f(&y, t)?;
        let k2 = f(&axpy(&y, 0.5 * dt, &k1), t + 0.5 * dt)?;
        let k3 = f(&axpy(&y, 0.5 * dt, &k2), t + 0.5 * dt)?;
        let k4 = f(&axpy(&y, dt, &k3), t + dt)?;
        for i in 0..N_AUG {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    series.energy.mechanical_in = y[DfigState::LEN];
    series.energy.electrical_out = y[DfigState::LEN + 1];
    series.energy.kinetic_end = kinetic(&model, &series.final_state);
    series.energy.dc_link_end = dc_energy(&model, &series.final_state);
    Ok(series)
}

/// Summary figures of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub label: String,
    pub peak_v_p: f64,
    /// Mean PCC voltage over the last 0.5 s.
    pub settled_v_p: f64,
    /// First time after which `v_p` stays below 1.1 p.u.; `None` if it never does.
    pub time_to_band: Option<f64>,
    pub peak_i_r: f64,
    /// Integral of the absorbed reactive power (p.u.·s).
    pub absorbed_q_energy: f64,
}

impl Metrics {
    pub const CSV_HEADER: &'static str =
        "label,peak_v_p,settled_v_p,time_to_band,peak_i_r,absorbed_q_energy";
}

/// Upper edge of the normal voltage band used by [`Metrics::time_to_band`].
pub const BAND_LIMIT: f64 = 1.1;

/// Window over which the settled voltage is averaged (s).
pub const SETTLE_WINDOW: f64 = 0.5;

pub fn metrics(label: &str, ts: &TimeSeries) -> Metrics {
    let n = ts.len();
    let t_end = ts.t.last().copied().unwrap_or(0.0);
    let settle: Vec<f64> =
        ts.t.iter()
            .zip(&ts.v_p)
            .filter(|(t, _)| **t >= t_end - SETTLE_WINDOW - 1e-12)
            .map(|(_, v)| *v)
            .collect();
    let settled_v_p = settle.iter().sum::<f64>() / settle.len().max(1) as f64;
    let last_out = ts.v_p.iter().rposition(|v| *v >= BAND_LIMIT);
    let time_to_band = match last_out {
        None if n > 0 => Some(ts.t[0]),
        Some(i) if i + 1 < n => Some(ts.t[i + 1]),
        _ => None,
    };
    let mut absorbed = 0.0;
    for i in 1..n {
        let a = (-ts.q_dfig[i - 1]).max(0.0);
        let b = (-ts.q_dfig[i]).max(0.0);
        absorbed += 0.5 * (a + b) * (ts.t[i] - ts.t[i - 1]);
    }
    Metrics {
        label: label.to_string(),
        peak_v_p: ts.v_p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        settled_v_p,
        time_to_band,
        peak_i_r: ts.i_r.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        absorbed_q_energy: absorbed,
    }
}

/// Runs labelled scenarios concurrently; results keep the input order.
pub fn run_all(scenarios: &[(String, Scenario)]) -> Vec<Result<TimeSeries>> {
    scenarios.par_iter().map(|(_, sc)| run(sc)).collect()
}

/// Runs every scenario and tabulates its metrics.
pub fn compare(scenarios: &[(String, Scenario)]) -> Result<Vec<Metrics>> {
    let dt = scenarios.first().map(|(_, s)| s.dt);
    if scenarios
        .iter()
        .any(|(_, s)| Some(s.dt) != dt || (s.t_end - scenarios[0].1.t_end).abs() > 0.0)
    {
        return Err(Error::InvalidParam(
            "compared scenarios must share dt and t_end".into(),
        ));
    }
    run_all(scenarios)
        .into_iter()
        .zip(scenarios)
        .map(|(r, (label, _))| r.map(|ts| metrics(label, &ts)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    Wind,
    Vov1,
    Scr,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wind" => Ok(SweepParam::Wind),
            "vov1" => Ok(SweepParam::Vov1),
            "scr" => Ok(SweepParam::Scr),
            other => Err(Error::InvalidParam(format!(
                "unknown sweep parameter `{other}` (expected wind, vov1 or scr)"
            ))),
        }
    }
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Wind => "wind",
            SweepParam::Vov1 => "vov1",
            SweepParam::Scr => "scr",
        }
    }
}

/// Copies of `base` with one parameter set to each value, labelled `param=value`.
pub fn sweep_scenarios(
    base: &Scenario,
    param: SweepParam,
    values: &[f64],
) -> Result<Vec<(String, Scenario)>> {
    values
        .iter()
        .map(|&v| {
            let mut sc = base.clone();
            match param {
                SweepParam::Wind => sc.v_wind = v,
                SweepParam::Vov1 => {
                    let hp = &sc.hvrt;
                    sc.hvrt = HvrtParams { v_ov1: v, ..*hp }.with_limits(hp.limits)?;
                }
                SweepParam::Scr => sc.grid = GridParams::from_scr(v, sc.grid.g_c)?,
            }
            Ok((format!("{}={v}", param.name()), sc))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_text_round_trip() {
        for s in ["block@0.5", "captrip=0.5@1.2", "wind=8@1"] {
            let ev: Event = s.parse().unwrap();
            let again: Event = ev.to_string().parse().unwrap();
            assert_eq!(ev, again);
        }
        assert!(matches!(
            "explode@1".parse::<Event>(),
            Err(Error::UnknownEvent(_))
        ));
        assert!(matches!(
            "block".parse::<Event>(),
            Err(Error::UnknownEvent(_))
        ));
    }

    #[test]
    fn default_init_sits_at_one_pu() {
        let sc = Scenario::default_study(Method::UnitPf);
        let init = init_steady_state(&sc).unwrap();
        let plant = Plant {
            grid: init.grid,
            hvdc: init.hvdc,
            v_wind: 12.0,
            ramp: None,
            ramp_duration: 0.0,
        };
        assert!((plant.pcc_voltage(&init.state, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn capacitor_trip_and_block() {
        let sc = Scenario::default_study(Method::UnitPf);
        let init = init_steady_state(&sc).unwrap();
        let mut plant = Plant {
            grid: init.grid,
            hvdc: init.hvdc,
            v_wind: 12.0,
            ramp: None,
            ramp_duration: 0.0,
        };
        apply_event(&EventKind::DcBipolarBlock, &mut plant, 0.5).unwrap();
        assert_eq!(plant.hvdc_at(0.5), HvdcLoad { p: 0.0, q: 0.0 });
        apply_event(&EventKind::CapacitorTrip(1.0), &mut plant, 0.6).unwrap();
        assert_eq!(plant.grid.g_c, 0.0);
    }

    #[test]
    fn misaligned_event_rejected() {
        let mut sc = Scenario::default_study(Method::UnitPf);
        sc.events = vec![Event::new(0.5004, EventKind::DcBipolarBlock)];
        assert!(matches!(sc.validate(), Err(Error::InvalidParam(_))));
    }
}
