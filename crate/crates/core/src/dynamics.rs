//! Reduced-order phasor model of the aggregated DFIG.
//!
//! States: rotor speed, the four outer PI integrators, the stator and GSC
//! power responses and the DC-link voltage. The inner current loops are
//! represented by first-order lags acting on the power commands. Commands
//! are projected onto the capability region before they enter the lags
//! (reactive power first, then active power), and the integrators use
//! conditional integration.

use serde::{Deserialize, Serialize};

use crate::capability::{
    gsc_limit, max_stator_absorption, rotor_current_from_pq, MachineParams, OperatingPoint,
    RotorCurrent,
};
use crate::controller::PowerReferences;
use crate::error::{Error, Result};
use crate::pi::ControllerGains;
use crate::turbine::TurbineParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    /// Stator power response time constant (s).
    pub tau_rsc: f64,
    /// GSC power response time constant (s).
    pub tau_gsc: f64,
    /// DC-link energy constant (s).
    pub c_dc: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        DynamicsParams {
            tau_rsc: 0.02,
            tau_gsc: 0.005,
            c_dc: 0.05,
        }
    }
}

impl DynamicsParams {
    pub fn validate(&self) -> Result<()> {
        if self.tau_rsc > 0.0 && self.tau_gsc > 0.0 && self.c_dc > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParam(
                "converter time constants and DC-link constant must be positive".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DfigState {
    pub omega_r: f64,
    pub rsc_p_int: f64,
    pub rsc_q_int: f64,
    pub gsc_vdc_int: f64,
    pub gsc_q_int: f64,
    /// Stator active power response.
    pub p_s: f64,
    /// Stator reactive power response (signed).
    pub q_s: f64,
    pub p_g: f64,
    pub q_g: f64,
    pub v_dc: f64,
}

impl DfigState {
    pub const LEN: usize = 10;

    pub fn to_array(&self) -> [f64; Self::LEN] {
        [
            self.omega_r,
            self.rsc_p_int,
            self.rsc_q_int,
            self.gsc_vdc_int,
            self.gsc_q_int,
            self.p_s,
            self.q_s,
            self.p_g,
            self.q_g,
            self.v_dc,
        ]
    }

    pub fn from_array(a: &[f64; Self::LEN]) -> Self {
        DfigState {
            omega_r: a[0],
            rsc_p_int: a[1],
            rsc_q_int: a[2],
            gsc_vdc_int: a[3],
            gsc_q_int: a[4],
            p_s: a[5],
            q_s: a[6],
            p_g: a[7],
            q_g: a[8],
            v_dc: a[9],
        }
    }

    pub fn slip(&self) -> f64 {
        1.0 - self.omega_r
    }

    /// Active power injected at the PCC.
    pub fn p_dfig(&self) -> f64 {
        self.p_s + self.p_g
    }

    /// Reactive power injected at the PCC (absorption negative).
    pub fn q_dfig(&self) -> f64 {
        self.q_s + self.q_g
    }

    /// Power the rotor delivers to the DC link, `-s P_s`.
    pub fn p_rotor(&self) -> f64 {
        (self.omega_r - 1.0) * self.p_s
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfigInputs {
    pub refs: PowerReferences,
    /// Stator (PCC) voltage magnitude.
    pub v_s: f64,
    pub v_wind: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DfigModel {
    pub machine: MachineParams,
    pub turbine: TurbineParams,
    pub gains: ControllerGains,
    pub dynamics: DynamicsParams,
}

impl DfigModel {
    pub fn new(
        machine: MachineParams,
        turbine: TurbineParams,
        gains: ControllerGains,
        dynamics: DynamicsParams,
    ) -> Result<Self> {
        machine.validated()?;
        turbine.validate()?;
        dynamics.validate()?;
        Ok(DfigModel {
            machine,
            turbine,
            gains,
            dynamics,
        })
    }

    /// Projects a stator power command onto the capability region at `v_s`.
    pub fn limit_stator(&self, p: f64, q: f64, v_s: f64) -> (f64, f64) {
        let m = &self.machine;
        let offset = m.rotor_circle_offset(v_s);
        let radius = m.rotor_circle_radius(v_s);
        let q_inj_max = (radius - offset).min(m.s_n).max(0.0);
        let q = q.clamp(-max_stator_absorption(m, v_s), q_inj_max);
        let dq = q + offset;
        let p_max = (radius * radius - dq * dq)
            .max(0.0)
            .sqrt()
            .min((m.s_n * m.s_n - q * q).max(0.0).sqrt());
        (p.clamp(0.0, p_max), q)
    }

    /// Projects a GSC power command onto its limits (reactive first).
    pub fn limit_gsc(&self, p: f64, q: f64, state: &DfigState) -> (f64, f64) {
        let m = self.machine.with_slip(state.slip());
        let op = OperatingPoint::new(state.p_s, state.q_s, 1.0);
        let q_lim = gsc_limit(&m, &op).unwrap_or(0.0).min(m.s_c);
        let q = q.clamp(-q_lim, q_lim);
        let p_lim = (m.s_c * m.s_c - q * q).max(0.0).sqrt();
        (p.clamp(-p_lim, p_lim), q)
    }

    /// Time derivative of the state. Total for finite inputs.
    pub fn derivatives(&self, x: &DfigState, u: &DfigInputs) -> DfigState {
        let g = &self.gains;
        let d = &self.dynamics;

        let p_m = self.turbine.aero_power(u.v_wind, x.omega_r);
        let omega = x.omega_r.max(1e-6);
        let d_omega = (p_m - omega * x.p_s) / (2.0 * self.turbine.h * omega);

        let e_p = u.refs.p_s_ref - x.p_s;
        let e_q = u.refs.q_s_ref - x.q_s;
        let raw_p = g.rsc_active_power.output(e_p, x.rsc_p_int);
        let raw_q = g.rsc_reactive_power.output(e_q, x.rsc_q_int);
        let (p_cmd, q_cmd) = self.limit_stator(raw_p, raw_q, u.v_s);

        let e_dc = x.v_dc - 1.0;
        let e_qg = u.refs.q_g_ref - x.q_g;
        let raw_pg = g.gsc_dc_voltage.output(e_dc, x.gsc_vdc_int);
        let raw_qg = g.gsc_reactive_power.output(e_qg, x.gsc_q_int);
        let (pg_cmd, qg_cmd) = self.limit_gsc(raw_pg, raw_qg, x);

        DfigState {
            omega_r: d_omega,
            rsc_p_int: g.rsc_active_power.integral_rate(e_p, raw_p, p_cmd),
            rsc_q_int: g.rsc_reactive_power.integral_rate(e_q, raw_q, q_cmd),
            gsc_vdc_int: g.gsc_dc_voltage.integral_rate(e_dc, raw_pg, pg_cmd),
            gsc_q_int: g.gsc_reactive_power.integral_rate(e_qg, raw_qg, qg_cmd),
            p_s: (p_cmd - x.p_s) / d.tau_rsc,
            q_s: (q_cmd - x.q_s) / d.tau_rsc,
            p_g: (pg_cmd - x.p_g) / d.tau_gsc,
            q_g: (qg_cmd - x.q_g) / d.tau_gsc,
            v_dc: (x.p_rotor() - x.p_g) / (d.c_dc * x.v_dc),
        }
    }

    /// Rotor speed where MPPT stator power balances the aerodynamic power.
    pub fn equilibrium_speed(&self, v_wind: f64) -> Result<f64> {
        let tp = &self.turbine;
        tp.check_wind(v_wind)?;
        let f = |w: f64| tp.aero_power(v_wind, w) - w * tp.mppt_curve(w);
        let (mut lo, mut hi) = (tp.omega_min, tp.omega_max);
        if !(f(lo) > 0.0 && f(hi) < 0.0) {
            return Err(Error::NoFeasibleInit(format!(
                "no rotor-speed equilibrium within [{lo}, {hi}] p.u. at {v_wind} m/s"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        let w = 0.5 * (lo + hi);
        // Rated wind sits exactly on the rated speed; keep it exact.
        if f(1.0) == 0.0 {
            return Ok(1.0);
        }
        Ok(w)
    }

    /// Steady state at MPPT and unit power factor.
    pub fn steady_state(&self, v_wind: f64, v_s: f64) -> Result<DfigState> {
        let omega_r = self.equilibrium_speed(v_wind)?;
        let p_s = self.turbine.mppt_curve(omega_r);
        let (p_lim, _) = self.limit_stator(p_s, 0.0, v_s);
        if p_lim < p_s {
            return Err(Error::NoFeasibleInit(format!(
                "MPPT power {p_s:.6} exceeds the stator capability at V = {v_s:.6}"
            )));
        }
        let p_g = (omega_r - 1.0) * p_s;
        let x = DfigState {
            omega_r,
            rsc_p_int: p_s,
            rsc_q_int: 0.0,
            gsc_vdc_int: p_g,
            gsc_q_int: 0.0,
            p_s,
            q_s: 0.0,
            p_g,
            q_g: 0.0,
            v_dc: 1.0,
        };
        let (pg_lim, _) = self.limit_gsc(p_g, 0.0, &x);
        if pg_lim != p_g {
            return Err(Error::NoFeasibleInit(format!(
                "slip power {p_g:.6} exceeds the grid-side converter rating"
            )));
        }
        Ok(x)
    }
}

/// Free-function form of [`DfigModel::derivatives`].
pub fn state_derivatives(
    model: &DfigModel,
    state: &DfigState,
    refs: &PowerReferences,
    v_s: f64,
    v_wind: f64,
) -> DfigState {
    model.derivatives(
        state,
        &DfigInputs {
            refs: *refs,
            v_s,
            v_wind,
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorQuantities {
    pub i_r: RotorCurrent,
    pub i_r_mag: f64,
    /// Rotor voltage magnitude referred to the stator, `|s| |ψ_r|`.
    pub v_r_mag: f64,
}

/// Quasi-static rotor current and voltage at the operating point.
///
/// `ψ_r = (X_m/X_l) ψ_s + σ X_r i_r` with `ψ_s = V_s` on the d axis and
/// `σ X_r = X_r - X_m^2 / X_l`; derivative terms and the rotor resistance are
/// dropped, leaving `|v_r| = |s| |ψ_r|`.
pub fn rotor_quantities(
    state: &DfigState,
    op: &OperatingPoint,
    m: &MachineParams,
) -> Result<RotorQuantities> {
    let i_r = rotor_current_from_pq(m, op)?;
    let x_r = m.x_lr + m.x_m;
    let sigma_x_r = x_r - m.x_m * m.x_m / m.x_l;
    let psi_d = m.x_m / m.x_l * op.v_s + sigma_x_r * i_r.i_rd;
    let psi_q = sigma_x_r * i_r.i_rq;
    Ok(RotorQuantities {
        i_r,
        i_r_mag: i_r.magnitude(),
        v_r_mag: state.slip().abs() * psi_d.hypot(psi_q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::{unit_pf_references, Mode};
    use approx::assert_relative_eq;

    fn model() -> DfigModel {
        DfigModel::new(
            MachineParams::test_system(),
            TurbineParams::default(),
            ControllerGains::default(),
            DynamicsParams::default(),
        )
        .unwrap()
    }

    fn refs_of(x: &DfigState) -> PowerReferences {
        PowerReferences {
            q_s_ref: x.q_s,
            q_g_ref: x.q_g,
            p_s_ref: x.p_s,
            mode: Mode::Normal,
            k_de: 0.0,
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let mdl = model();
        for v in [8.0, 10.0, 12.0] {
            let x = mdl.steady_state(v, 1.0).unwrap();
            let dx = state_derivatives(&mdl, &x, &refs_of(&x), 1.0, v);
            for (i, d) in dx.to_array().iter().enumerate() {
                assert!(d.abs() < 1e-8, "wind {v}: derivative {i} = {d}");
            }
        }
        let rated = mdl.steady_state(12.0, 1.0).unwrap();
        assert_eq!(rated.omega_r, 1.0);
        assert_eq!(rated.p_s, 1.0);
    }

    #[test]
    fn deloading_accelerates_rotor() {
        let mdl = model();
        let x = mdl.steady_state(12.0, 1.0).unwrap();
        let mut refs = unit_pf_references(0.8);
        refs.k_de = 0.2;
        let dx = state_derivatives(&mdl, &x, &refs, 1.0, 12.0);
        assert!(dx.p_s < 0.0);
        // Speed rises once the stator power has dropped.
        let x2 = DfigState { p_s: 0.8, ..x };
        assert!(state_derivatives(&mdl, &x2, &refs, 1.0, 12.0).omega_r > 0.0);
    }

    #[test]
    fn dc_link_energy_balance() {
        let mdl = model();
        let x = DfigState {
            omega_r: 1.1,
            p_s: 1.0,
            p_g: 0.0,
            v_dc: 1.0,
            ..DfigState::default()
        };
        let dx = state_derivatives(&mdl, &x, &unit_pf_references(1.0), 1.0, 12.0);
        assert_relative_eq!(dx.v_dc, 0.1 / 0.05, epsilon = 1e-12);
    }

    #[test]
    fn stator_projection_respects_both_circles() {
        let mdl = model();
        let m = mdl.machine;
        for &(p, q, v) in &[
            (1.5, -1.5, 1.0),
            (1.0, -0.9, 1.2),
            (0.2, 2.0, 1.0),
            (-0.3, 0.0, 1.1),
        ] {
            let (pc, qc) = mdl.limit_stator(p, q, v);
            assert!(m.rotor_margin(pc, qc, v) >= -1e-12);
            assert!(m.capacity_margin(pc, qc) >= -1e-12);
            assert!(pc >= 0.0);
        }
        assert_eq!(mdl.limit_stator(0.5, -0.2, 1.0), (0.5, -0.2));
    }

    #[test]
    fn rotor_quantities_examples() {
        let m = MachineParams::test_system();
        let x = DfigState {
            omega_r: 1.0,
            ..DfigState::default()
        };
        let rq = rotor_quantities(&x, &OperatingPoint::new(0.0, 0.0, 1.0), &m).unwrap();
        assert_relative_eq!(rq.i_r_mag, 1.0 / m.x_m, epsilon = 1e-12);
        assert_eq!(rq.v_r_mag, 0.0);
        let fast = DfigState { omega_r: 1.1, ..x };
        let rq = rotor_quantities(&fast, &OperatingPoint::new(0.0, 0.0, 1.0), &m).unwrap();
        // At no load the rotor flux equals the stator flux X_m/X_l * V + σX_r * V/X_m = X_r/X_m * V.
        assert_relative_eq!(rq.v_r_mag, 0.1 * (m.x_lr + m.x_m) / m.x_m, epsilon = 1e-12);
    }
}
