//! Comparison controllers: unit power factor and PI voltage control at the PCC.

use serde::{Deserialize, Serialize};

use super::{capability_snapshot, Mode, PowerReferences};
use crate::capability::MachineParams;
use crate::error::{Error, Result};
use crate::pi::PiGains;

/// No reactive support, MPPT active power.
pub fn unit_pf_references(p_mppt: f64) -> PowerReferences {
    PowerReferences {
        q_s_ref: 0.0,
        q_g_ref: 0.0,
        p_s_ref: p_mppt,
        mode: Mode::Normal,
        k_de: 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvcSettings {
    pub gains: PiGains,
    /// PCC voltage setpoint (p.u.).
    pub setpoint: f64,
}

impl Default for AvcSettings {
    fn default() -> Self {
        AvcSettings {
            gains: PiGains::new(2.0, 20.0),
            setpoint: 1.0,
        }
    }
}

/// Discrete PI on `setpoint - v_p` producing a signed total reactive
/// reference, clamped to `±Q_G^max` and split in proportion to the stator and
/// GSC limits. The integrator is frozen while the output is clamped in the
/// direction of the error.
#[derive(Debug, Clone)]
pub struct AvcController {
    machine: MachineParams,
    settings: AvcSettings,
    integral: f64,
}

impl AvcController {
    pub fn new(machine: MachineParams, settings: AvcSettings) -> Result<Self> {
        let g = settings.gains;
        if !(g.kp >= 0.0 && g.ki >= 0.0 && settings.setpoint > 0.0) {
            return Err(Error::InvalidParam(
                "AVC gains must be non-negative and the setpoint positive".into(),
            ));
        }
        Ok(AvcController {
            machine,
            settings,
            integral: 0.0,
        })
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn step(&mut self, v_p: f64, p_mppt: f64, slip: f64, dt: f64) -> Result<PowerReferences> {
        let m = self.machine.with_slip(slip);
        let limits = capability_snapshot(&m, p_mppt, v_p, 0.0)?;
        let q_max = limits.q_total_max;
        let error = self.settings.setpoint - v_p;
        let gains = self.settings.gains;

        let raw = gains.output(error, self.integral);
        let total = raw.clamp(-q_max, q_max);
        self.integral += gains.integral_rate(error, raw, total) * dt;
        self.integral = self.integral.clamp(-q_max, q_max);

        let (q_s_ref, q_g_ref) = if q_max > 0.0 {
            (
                limits.q_s_max / q_max * total,
                limits.q_g_max / q_max * total,
            )
        } else {
            (0.0, 0.0)
        };
        Ok(PowerReferences {
            q_s_ref,
            q_g_ref,
            p_s_ref: p_mppt,
            mode: Mode::Normal,
            k_de: 0.0,
        })
    }
}
