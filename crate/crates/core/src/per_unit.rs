//! Conversion of the nameplate (SI) machine data to per-unit.
//!
//! Bases: power = rated active power of one unit of the aggregated farm,
//! voltage = rated line-to-line stator voltage, `ω_1 = 1` p.u. Reactances are
//! referred to `Z_base = V_base^2 / S_base` and the rotor current to
//! `I_base = S_base / (√3 V_base)`. Converter capacity is a farm-level rating
//! and is referred to the farm's rated power.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nameplate data of the aggregated DFIG farm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachineSi {
    /// Rated stator line-to-line voltage (V).
    pub v_sn_volts: f64,
    /// Rated active power of the whole farm (MW).
    pub p_n_mw: f64,
    /// Number of identical units aggregated into the farm.
    pub n_units: f64,
    /// Rated power factor.
    pub power_factor: f64,
    /// Grid-side converter apparent capacity of the farm (MVA).
    pub s_c_mva: f64,
    /// Magnetising reactance of one unit (Ω).
    pub x_m_ohms: f64,
    /// Stator self reactance of one unit (Ω).
    pub x_l_ohms: f64,
    /// Rotor-side converter current limit of one unit (A).
    pub i_r_max_amps: f64,
}

impl MachineSi {
    /// Test-system nameplate: 100 × 1.5 MW units at 690 V.
    pub fn test_system() -> Self {
        MachineSi {
            v_sn_volts: 690.0,
            p_n_mw: 150.0,
            n_units: 100.0,
            power_factor: 0.9,
            s_c_mva: 50.0,
            x_m_ohms: 2.06,
            x_l_ohms: 2.24,
            i_r_max_amps: 1600.0,
        }
    }

    pub fn unit_rating_w(&self) -> f64 {
        self.p_n_mw * 1e6 / self.n_units
    }

    pub fn z_base_ohms(&self) -> f64 {
        self.v_sn_volts * self.v_sn_volts / self.unit_rating_w()
    }

    pub fn i_base_amps(&self) -> f64 {
        self.unit_rating_w() / (3f64.sqrt() * self.v_sn_volts)
    }

    pub fn to_per_unit(&self) -> Result<MachinePerUnit> {
        let positive = [
            ("v_sn_volts", self.v_sn_volts),
            ("p_n_mw", self.p_n_mw),
            ("n_units", self.n_units),
            ("power_factor", self.power_factor),
            ("s_c_mva", self.s_c_mva),
            ("x_m_ohms", self.x_m_ohms),
            ("x_l_ohms", self.x_l_ohms),
            ("i_r_max_amps", self.i_r_max_amps),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.power_factor > 1.0 {
            return Err(Error::InvalidParam(format!(
                "power_factor must be <= 1, got {}",
                self.power_factor
            )));
        }
        let z_base = self.z_base_ohms();
        Ok(MachinePerUnit {
            s_n: 1.0 / self.power_factor,
            s_c: self.s_c_mva / self.p_n_mw,
            x_m: self.x_m_ohms / z_base,
            x_l: self.x_l_ohms / z_base,
            i_r_max: self.i_r_max_amps / self.i_base_amps(),
        })
    }
}

/// Per-unit electrical constants derived from [`MachineSi`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachinePerUnit {
    pub s_n: f64,
    pub s_c: f64,
    pub x_m: f64,
    pub x_l: f64,
    pub i_r_max: f64,
}
