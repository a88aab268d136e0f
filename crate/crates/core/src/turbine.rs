//! Normalised aerodynamics and the MPPT curve.
//!
//! Mechanical power is expressed in p.u. of the unit rating:
//! `P_m = k_aero (v / v_rate)^3 C_p(λ)`, with `λ = λ_opt ω_r v_rate / v` and
//! `k_aero = 1 / C_p(λ_opt)`, so rated wind at rated speed (`ω_r = 1`) gives
//! exactly 1 p.u. The MPPT curve `k_opt ω_r^3` passes through the same point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Analytic power-coefficient curve at zero pitch:
/// `C_p = c1 (c2/λ_i - c3) exp(-c4/λ_i) + c5 λ` with `1/λ_i = 1/λ - c6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CpCurve {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub c5: f64,
    pub c6: f64,
}

impl Default for CpCurve {
    fn default() -> Self {
        CpCurve {
            c1: 0.5176,
            c2: 116.0,
            c3: 5.0,
            c4: 21.0,
            c5: 0.0068,
            c6: 0.035,
        }
    }
}

impl CpCurve {
    pub fn eval(&self, lambda: f64) -> f64 {
        if !(lambda > 0.0) {
            return 0.0;
        }
        let inv = 1.0 / lambda - self.c6;
        if inv <= 0.0 {
            return 0.0;
        }
        let cp = self.c1 * (self.c2 * inv - self.c3) * (-self.c4 * inv).exp() + self.c5 * lambda;
        cp.max(0.0)
    }

    /// Tip-speed ratio maximising the curve, by golden-section search.
    pub fn lambda_opt(&self) -> f64 {
        let (mut a, mut b) = (1.0, 20.0);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        while b - a > 1e-12 {
            if self.eval(c) > self.eval(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - g * (b - a);
            d = a + g * (b - a);
        }
        0.5 * (a + b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbineParams {
    /// Inertia constant (s).
    pub h: f64,
    /// Rated wind speed (m/s).
    pub v_rate: f64,
    pub cut_in: f64,
    pub cut_out: f64,
    /// MPPT curve constant, `P_MPPT = k_opt ω_r^3`.
    pub k_opt: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub cp: CpCurve,
    /// Aerodynamic scaling `1 / C_p(λ_opt)`.
    pub rho_area_term: f64,
    pub lambda_opt: f64,
}

impl TurbineParams {
    pub fn new(h: f64, v_rate: f64, cut_in: f64, cut_out: f64, cp: CpCurve) -> Result<Self> {
        let lambda_opt = cp.lambda_opt();
        let cp_max = cp.eval(lambda_opt);
        let tp = TurbineParams {
            h,
            v_rate,
            cut_in,
            cut_out,
            k_opt: 1.0,
            omega_min: 0.3,
            omega_max: 1.5,
            cp,
            rho_area_term: 1.0 / cp_max,
            lambda_opt,
        };
        tp.validate()?;
        Ok(tp)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParam(what.to_string()));
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad("inertia constant must be positive");
        }
        if !(self.cut_in > 0.0 && self.cut_in < self.v_rate && self.v_rate < self.cut_out) {
            return bad("wind speeds must satisfy 0 < cut_in < v_rate < cut_out");
        }
        if !(self.omega_min > 0.0 && self.omega_min < 1.0 && self.omega_max > 1.0) {
            return bad("rotor speed limits must bracket 1 p.u.");
        }
        if !(self.rho_area_term > 0.0 && self.rho_area_term.is_finite() && self.k_opt > 0.0) {
            return bad("power coefficient curve has no positive maximum");
        }
        Ok(())
    }

    pub fn check_wind(&self, v_wind: f64) -> Result<()> {
        if v_wind >= self.cut_in && v_wind <= self.cut_out {
            Ok(())
        } else {
            Err(Error::OutsideWindRange {
                v_wind,
                cut_in: self.cut_in,
                cut_out: self.cut_out,
            })
        }
    }

    /// Rotor speed at which the tip-speed ratio is optimal.
    pub fn optimal_speed(&self, v_wind: f64) -> f64 {
        v_wind / self.v_rate
    }

    /// Mechanical power without range checking.
    pub fn aero_power(&self, v_wind: f64, omega_r: f64) -> f64 {
        let lambda = self.lambda_opt * omega_r * self.v_rate / v_wind;
        let ratio = v_wind / self.v_rate;
        self.rho_area_term * ratio * ratio * ratio * self.cp.eval(lambda)
    }

    /// MPPT power without range checking.
    pub fn mppt_curve(&self, omega_r: f64) -> f64 {
        (self.k_opt * omega_r * omega_r * omega_r).min(1.0)
    }
}

impl Default for TurbineParams {
    fn default() -> Self {
        TurbineParams::new(4.0, 12.0, 4.0, 25.0, CpCurve::default())
            .expect("default turbine is valid")
    }
}

/// `min(k_opt ω_r^3, 1)`.
pub fn mppt_power(v_wind: f64, omega_r: f64, tp: &TurbineParams) -> Result<f64> {
    tp.check_wind(v_wind)?;
    Ok(tp.mppt_curve(omega_r))
}

pub fn mech_power(v_wind: f64, omega_r: f64, tp: &TurbineParams) -> Result<f64> {
    tp.check_wind(v_wind)?;
    Ok(tp.aero_power(v_wind, omega_r))
}
