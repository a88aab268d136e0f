//! Single-reactance equivalent of the sending-end AC system.
//!
//! The PCC bus connects the wind farm, the rectifier's capacitor banks
//! (admittance `g_c`) and the HVDC converter to an equivalent source `V_e`
//! behind reactance `x_e`. With the source normalised to 1 p.u. the PCC
//! voltage magnitude `V_p` solves the biquadratic
//!
//! ```text
//! a V_p^4 + b V_p^2 + c = 0
//! a = (1 - G_c X_e)^2
//! b = -1 - 2 (1 - G_c X_e) Q X_e
//! c = (P^2 + Q^2) X_e^2
//! ```
//!
//! where `(P, Q)` is the net injection into the PCC (generator convention,
//! `Q < 0` absorbs). A source magnitude other than 1 p.u. is handled by
//! rebasing the voltage to `V_e`: `x_e -> x_e / V_e^2`, `g_c -> g_c V_e^2`,
//! powers unchanged, and the result scaled back by `V_e`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Injections beyond this magnitude (p.u.) are rejected.
pub const INJECTION_CAP: f64 = 10.0;

/// Discriminants in `[-DISCRIMINANT_CLAMP, 0)` are treated as zero.
pub const DISCRIMINANT_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    /// Equivalent grid reactance (p.u.).
    pub x_e: f64,
    /// Equivalent source magnitude (p.u.).
    pub v_e: f64,
    /// Capacitor-bank admittance at the rectifier (p.u.).
    pub g_c: f64,
}

impl GridParams {
    pub fn new(x_e: f64, v_e: f64, g_c: f64) -> Result<Self> {
        let grid = GridParams { x_e, v_e, g_c };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid with `V_e = 1` built from a short-circuit ratio.
    pub fn from_scr(scr: f64, g_c: f64) -> Result<Self> {
        if !(scr > 0.0) {
            return Err(Error::InvalidParam(format!(
                "SCR must be positive, got {scr}"
            )));
        }
        GridParams::new(1.0 / scr, 1.0, g_c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_e > 0.0 && self.x_e.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "x_e must be > 0, got {}",
                self.x_e
            )));
        }
        if !(self.v_e > 0.0 && self.v_e.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "v_e must be > 0, got {}",
                self.v_e
            )));
        }
        if !(self.g_c >= 0.0 && self.g_c.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "g_c must be >= 0, got {}",
                self.g_c
            )));
        }
        Ok(())
    }

    /// True when `g_c x_e < 1` (SCR above the capacitor admittance).
    pub fn is_stiff(&self) -> bool {
        self.g_c * self.x_e < 1.0
    }

    pub fn scr(&self) -> f64 {
        1.0 / self.x_e
    }

    /// Reactance and admittance rebased so the source is 1 p.u.
    fn normalized(&self) -> (f64, f64) {
        let v2 = self.v_e * self.v_e;
        (self.x_e / v2, self.g_c * v2)
    }
}

/// Short-circuit ratio of the sending end, `1 / x_e`.
pub fn scr_of(grid: &GridParams) -> Result<f64> {
    grid.validate()?;
    Ok(grid.scr())
}

/// Capacitor admittance from the compensation capacity at rated PCC voltage.
pub fn gc_from_qc(q_c: f64) -> Result<f64> {
    if !(q_c > 0.0 && q_c.is_finite()) {
        return Err(Error::InvalidParam(format!("q_c must be > 0, got {q_c}")));
    }
    Ok(q_c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PccInjection {
    pub p: f64,
    pub q: f64,
}

impl PccInjection {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let inj = PccInjection { p, q };
        inj.validate()?;
        Ok(inj)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !v.is_finite() || v.abs() > INJECTION_CAP {
                return Err(Error::InvalidParam(format!(
                    "injection {name} = {v} outside +/-{INJECTION_CAP} p.u."
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarticCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub discriminant: f64,
}

impl QuarticCoeffs {
    fn new(a: f64, b: f64, c: f64) -> Self {
        QuarticCoeffs {
            a,
            b,
            c,
            discriminant: b * b - 4.0 * a * c,
        }
    }

    /// `a u^4 + b u^2 + c` for a normalised voltage `u`.
    pub fn residual(&self, u: f64) -> f64 {
        let w = u * u;
        (self.a * w + self.b) * w + self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootBranch {
    /// Larger root: the physical high-voltage profile.
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PccSolution {
    pub v_p: f64,
    pub discriminant: f64,
    pub branch: RootBranch,
    /// Lower-branch root, when it is real and positive. Diagnostics only.
    pub lower_root: Option<f64>,
    /// In-phase voltage deviation from the source (`ΔV_p`).
    pub delta_v_in_phase: f64,
    /// Quadrature voltage component (`δV_p`).
    pub delta_v_quadrature: f64,
}

/// Biquadratic coefficients in the voltage normalised to `V_e`.
pub fn quartic_coeffs(grid: &GridParams, inj: &PccInjection) -> QuarticCoeffs {
    let (x, g) = grid.normalized();
    let k = 1.0 - g * x;
    QuarticCoeffs::new(
        k * k,
        -1.0 - 2.0 * k * inj.q * x,
        (inj.p * inj.p + inj.q * inj.q) * x * x,
    )
}

fn clamped_sqrt_discriminant(coeffs: &QuarticCoeffs) -> Result<f64> {
    let d = coeffs.discriminant;
    if d >= 0.0 {
        Ok(d.sqrt())
    } else if d >= -DISCRIMINANT_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::NoRealSolution { discriminant: d })
    }
}

fn check_inputs(grid: &GridParams, inj: &PccInjection) -> Result<QuarticCoeffs> {
    grid.validate()?;
    inj.validate()?;
    let coeffs = quartic_coeffs(grid, inj);
    if coeffs.a < 1e-14 {
        return Err(Error::DegenerateNetwork);
    }
    Ok(coeffs)
}

/// Normalised upper root `u = V_p / V_e` and the square root of the discriminant.
fn upper_root(coeffs: &QuarticCoeffs) -> Result<(f64, f64)> {
    let sqrt_d = clamped_sqrt_discriminant(coeffs)?;
    let QuarticCoeffs { a, b, c, .. } = *coeffs;
    // Avoid cancellation in -b + sqrt(D) when b > 0.
    let w = if b <= 0.0 {
        (-b + sqrt_d) / (2.0 * a)
    } else if -b - sqrt_d < 0.0 {
        2.0 * c / (-b - sqrt_d)
    } else {
        0.0
    };
    if !(w > 0.0) {
        return Err(Error::NoRealSolution {
            discriminant: coeffs.discriminant,
        });
    }
    Ok((w.sqrt(), sqrt_d))
}

pub fn solve_pcc_voltage(grid: &GridParams, inj: &PccInjection) -> Result<PccSolution> {
    let coeffs = check_inputs(grid, inj)?;
    let (u, sqrt_d) = upper_root(&coeffs)?;
    let w_low = (-coeffs.b - sqrt_d) / (2.0 * coeffs.a);
    let lower_root = (w_low > 0.0 && sqrt_d > 0.0).then(|| w_low.sqrt() * grid.v_e);

    let (x, g) = grid.normalized();
    let quad = inj.p * x;
    let in_phase = -1.0 + (u * u - inj.q * x - u * u * g * x);
    Ok(PccSolution {
        v_p: u * grid.v_e,
        discriminant: coeffs.discriminant,
        branch: RootBranch::Upper,
        lower_root,
        delta_v_in_phase: in_phase * grid.v_e,
        delta_v_quadrature: quad * grid.v_e,
    })
}

fn sensitivity_parts(grid: &GridParams, inj: &PccInjection) -> Result<(QuarticCoeffs, f64, f64)> {
    let coeffs = check_inputs(grid, inj)?;
    let (u, sqrt_d) = upper_root(&coeffs)?;
    if sqrt_d == 0.0 {
        return Err(Error::SingularSensitivity);
    }
    Ok((coeffs, u, sqrt_d))
}

/// `∂V_p / ∂P`; negative for any positive active injection.
pub fn sensitivity_p(grid: &GridParams, inj: &PccInjection) -> Result<f64> {
    let (_, u, sqrt_d) = sensitivity_parts(grid, inj)?;
    let (x, _) = grid.normalized();
    Ok(-grid.v_e * inj.p * x * x / (u * sqrt_d))
}

/// `∂V_p / ∂Q`; positive whenever `g_c x_e < 1`.
pub fn sensitivity_q(grid: &GridParams, inj: &PccInjection) -> Result<f64> {
    let (coeffs, u, sqrt_d) = sensitivity_parts(grid, inj)?;
    let (x, g) = grid.normalized();
    let k = 1.0 - g * x;
    Ok(grid.v_e * k * x * (1.0 + sqrt_d) / (2.0 * coeffs.a * u * sqrt_d))
}

/// `|∂V_p/∂Q| - |∂V_p/∂P|`.
///
/// Strictly positive when `g_c x_e < 1` and `Q <= 0`; outside that region the
/// value is still returned but carries no sign guarantee.
pub fn dominance_margin(grid: &GridParams, inj: &PccInjection) -> Result<f64> {
    Ok(sensitivity_q(grid, inj)?.abs() - sensitivity_p(grid, inj)?.abs())
}

/// Closed form of the dominance margin, `k (1 + √D - √(4ac - (b+1)^2))`
/// with `k = x_e / (2 √a V_p √D)`.
pub fn dominance_margin_closed_form(grid: &GridParams, inj: &PccInjection) -> Result<f64> {
    let (coeffs, u, sqrt_d) = sensitivity_parts(grid, inj)?;
    let (x, _) = grid.normalized();
    let QuarticCoeffs { a, b, c, .. } = coeffs;
    let k = x / (2.0 * a.sqrt() * u * sqrt_d);
    let inner = (4.0 * a * c - (b + 1.0) * (b + 1.0)).max(0.0);
    Ok(grid.v_e * k * (1.0 + sqrt_d - inner.sqrt()))
}
