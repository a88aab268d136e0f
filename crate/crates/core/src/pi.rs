//! Proportional-integral loop helpers shared by the converter model and the
//! baseline voltage controller.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiGains {
    pub kp: f64,
    pub ki: f64,
}

impl PiGains {
    pub const fn new(kp: f64, ki: f64) -> Self {
        PiGains { kp, ki }
    }

    pub fn output(&self, error: f64, integral: f64) -> f64 {
        self.kp * error + integral
    }

    /// Integrator rate with conditional integration: the integrator freezes
    /// while the output is saturated and the error pushes further into the
    /// limit.
    pub fn integral_rate(&self, error: f64, unsaturated: f64, saturated: f64) -> f64 {
        let pushing_high = unsaturated > saturated && error > 0.0;
        let pushing_low = unsaturated < saturated && error < 0.0;
        if pushing_high || pushing_low {
            0.0
        } else {
            self.ki * error
        }
    }
}

/// Gains of the six DFIG loops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerGains {
    pub rsc_active_power: PiGains,
    pub rsc_reactive_power: PiGains,
    /// Inner loop; represented by a first-order lag in the phasor model.
    pub rsc_current: PiGains,
    pub gsc_dc_voltage: PiGains,
    pub gsc_reactive_power: PiGains,
    /// Inner loop; represented by a first-order lag in the phasor model.
    pub gsc_current: PiGains,
}

impl ControllerGains {
    pub const fn test_system() -> Self {
        ControllerGains {
            rsc_active_power: PiGains::new(2.0, 20.0),
            rsc_reactive_power: PiGains::new(1.0, 20.0),
            rsc_current: PiGains::new(0.6, 100.0),
            gsc_dc_voltage: PiGains::new(8.0, 400.0),
            gsc_reactive_power: PiGains::new(2.0, 20.0),
            gsc_current: PiGains::new(0.83, 100.0),
        }
    }
}

impl Default for ControllerGains {
    fn default() -> Self {
        ControllerGains::test_system()
    }
}
