//! Outer-loop HVRT logic: the Q-V piecewise law, the stage-wise split of the
//! reactive demand between stator and grid-side converter, and the P-V
//! de-loading law. [`coordination`] wraps these in the per-sample state
//! machine; [`baseline`] holds the comparison controllers.

pub mod baseline;
pub mod coordination;

use serde::{Deserialize, Serialize};

use crate::capability::{
    deload_limits, from_absorption, p_ref_from_q_ref, CapabilityLimits, DeloadReference,
    MachineParams, OperatingPoint,
};
use crate::error::{Error, Result};

pub use baseline::{unit_pf_references, AvcController, AvcSettings};
pub use coordination::{CoordinationOutput, CoordinationStatus, PqCoordinator};

/// Default HVRT activation voltage (p.u.).
pub const DEFAULT_V_OV_MIN: f64 = 1.1;
/// Default upper HVRT voltage (p.u.).
pub const DEFAULT_V_OV_MAX: f64 = 1.3;
/// Default de-loading trigger voltage (p.u.).
pub const DEFAULT_V_OV1: f64 = 1.15;
/// Hysteresis below `v_ov_min` before HVRT control is released (p.u.).
pub const DEFAULT_HYSTERESIS: f64 = 0.01;
/// Rate at which a de-loaded active reference returns to MPPT (p.u./s).
pub const DEFAULT_RELEASE_RATE: f64 = 0.5;

/// Which capability span the Q-V slopes are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum GainBasis {
    /// `K_1 = Q_G^max / (V_OV1 - V_OV^min)`, `K_2 = (Q_GD^max - Q_G^max) / (V_OV^max - V_OV1)`.
    #[default]
    Total,
    /// Same formulas with `Q_s^max` in place of `Q_G^max`.
    Stator,
}

impl GainBasis {
    pub fn name(self) -> &'static str {
        match self {
            GainBasis::Total => "total",
            GainBasis::Stator => "stator",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "total" => Some(GainBasis::Total),
            "stator" => Some(GainBasis::Stator),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HvrtParams {
    pub v_ov_min: f64,
    pub v_ov1: f64,
    pub v_ov_max: f64,
    pub k1: f64,
    pub k2: f64,
    pub gain_basis: GainBasis,
    pub limits: CapabilityLimits,
    pub hysteresis: f64,
    pub release_rate: f64,
}

impl HvrtParams {
    /// Parameters with gains derived from `limits`.
    pub fn new(
        v_ov_min: f64,
        v_ov1: f64,
        v_ov_max: f64,
        gain_basis: GainBasis,
        limits: CapabilityLimits,
    ) -> Result<Self> {
        let mut hp = HvrtParams {
            v_ov_min,
            v_ov1,
            v_ov_max,
            k1: 0.0,
            k2: 0.0,
            gain_basis,
            limits,
            hysteresis: DEFAULT_HYSTERESIS,
            release_rate: DEFAULT_RELEASE_RATE,
        };
        (hp.k1, hp.k2) = compute_gains(&limits, &hp)?;
        Ok(hp)
    }

    /// Same thresholds, refreshed capability snapshot and gains.
    pub fn with_limits(&self, limits: CapabilityLimits) -> Result<Self> {
        let mut hp = HvrtParams { limits, ..*self };
        (hp.k1, hp.k2) = compute_gains(&limits, &hp)?;
        Ok(hp)
    }

    pub fn check_thresholds(&self) -> Result<()> {
        let ordered = self.v_ov_min < self.v_ov1 && self.v_ov1 < self.v_ov_max;
        if ordered && self.v_ov_min.is_finite() && self.v_ov_max.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidThresholds)
        }
    }

    /// Voltage band a measurement falls in, without hysteresis.
    pub fn band(&self, v_p: f64) -> Mode {
        if v_p <= self.v_ov_min {
            Mode::Normal
        } else if v_p <= self.v_ov1 {
            Mode::Stage1
        } else if v_p <= self.v_ov_max {
            Mode::Stage2
        } else {
            Mode::Saturated
        }
    }
}

/// Capability limits at the MPPT power and the measured voltage, with the
/// de-loaded figures taken at `k_de`.
///
/// The active power is clipped to what the stator circles admit at `v_s`, so a
/// deep voltage dip does not make the snapshot fail.
pub fn capability_snapshot(
    m: &MachineParams,
    p_mppt: f64,
    v_s: f64,
    k_de: f64,
) -> Result<CapabilityLimits> {
    let p = p_mppt.clamp(0.0, m.s_n.min(m.rotor_circle_radius(v_s)));
    deload_limits(m, &OperatingPoint::new(p, 0.0, v_s), k_de)
}

/// Slopes of the Q-V curve.
pub fn compute_gains(limits: &CapabilityLimits, hp: &HvrtParams) -> Result<(f64, f64)> {
    hp.check_thresholds()?;
    let base = match hp.gain_basis {
        GainBasis::Total => limits.q_total_max,
        GainBasis::Stator => limits.q_s_max,
    };
    let k1 = base / (hp.v_ov1 - hp.v_ov_min);
    let k2 = ((limits.q_total_deload_max - base) / (hp.v_ov_max - hp.v_ov1)).max(0.0);
    Ok((k1, k2))
}

/// Controller mode, ordered along the Q-V curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    Normal,
    Stage1,
    Stage2,
    Saturated,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Normal, Mode::Stage1, Mode::Stage2, Mode::Saturated];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Normal => "Normal",
            Mode::Stage1 => "Stage1",
            Mode::Stage2 => "Stage2",
            Mode::Saturated => "Saturated",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactiveSplit {
    pub q_s_ref: f64,
    pub q_g_ref: f64,
}

impl ReactiveSplit {
    pub const ZERO: ReactiveSplit = ReactiveSplit {
        q_s_ref: 0.0,
        q_g_ref: 0.0,
    };

    pub fn total(&self) -> f64 {
        self.q_s_ref + self.q_g_ref
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerReferences {
    pub q_s_ref: f64,
    pub q_g_ref: f64,
    pub p_s_ref: f64,
    pub mode: Mode,
    pub k_de: f64,
}

/// Total absorption demanded by the Q-V curve (magnitude).
pub fn q_demand(v_p: f64, hp: &HvrtParams) -> f64 {
    let l = &hp.limits;
    match hp.band(v_p) {
        Mode::Normal => 0.0,
        Mode::Stage1 => hp.k1 * (v_p - hp.v_ov_min),
        Mode::Stage2 => (l.q_total_max + hp.k2 * (v_p - hp.v_ov1)).min(l.q_total_deload_max),
        Mode::Saturated => l.q_total_deload_max,
    }
}

/// Stage 1: share the demand in proportion to each source's limit.
pub fn split_stage1(total_q: f64, limits: &CapabilityLimits) -> Result<ReactiveSplit> {
    if total_q > limits.q_total_max + 1e-12 {
        return Err(Error::ExceedsStage1Limit {
            total_q,
            q_total_max: limits.q_total_max,
        });
    }
    if total_q <= 0.0 || limits.q_total_max <= 0.0 {
        return Ok(ReactiveSplit::ZERO);
    }
    let stator_abs = limits.q_s_max / limits.q_total_max * total_q;
    Ok(ReactiveSplit {
        q_s_ref: from_absorption(stator_abs),
        q_g_ref: from_absorption(total_q - stator_abs),
    })
}

/// Stage 2: the converter stays at its limit, the stator takes the increment.
pub fn split_stage2(v_p: f64, hp: &HvrtParams) -> ReactiveSplit {
    let l = &hp.limits;
    let stator_abs = (l.q_s_max + hp.k2 * (v_p - hp.v_ov1)).min(l.q_s_deload_max);
    ReactiveSplit {
        q_s_ref: from_absorption(stator_abs),
        q_g_ref: from_absorption(l.q_g_max),
    }
}

/// Reactive references for the band `v_p` falls in.
pub fn reactive_references(v_p: f64, hp: &HvrtParams) -> Result<ReactiveSplit> {
    match hp.band(v_p) {
        Mode::Normal => Ok(ReactiveSplit::ZERO),
        Mode::Stage1 => split_stage1(q_demand(v_p, hp).min(hp.limits.q_total_max), &hp.limits),
        Mode::Stage2 => Ok(split_stage2(v_p, hp)),
        Mode::Saturated => Ok(ReactiveSplit {
            q_s_ref: from_absorption(hp.limits.q_s_deload_max),
            q_g_ref: from_absorption(hp.limits.q_g_max),
        }),
    }
}

/// Active-power reference of the P-V de-loading curve.
pub fn p_demand(
    v_p: f64,
    p_mppt: f64,
    hp: &HvrtParams,
    m: &MachineParams,
) -> Result<DeloadReference> {
    if !(p_mppt > 0.0) {
        return Err(Error::InvalidParam(format!(
            "p_mppt must be > 0, got {p_mppt}"
        )));
    }
    match hp.band(v_p) {
        Mode::Normal | Mode::Stage1 => Ok(DeloadReference {
            p_s_ref: p_mppt,
            k_de: 0.0,
            binding: None,
            clamped: false,
            q_s_achievable: 0.0,
        }),
        Mode::Stage2 => p_ref_from_q_ref(m, split_stage2(v_p, hp).q_s_ref, v_p, p_mppt),
        Mode::Saturated => Ok(DeloadReference {
            p_s_ref: (1.0 - m.k_de_max) * p_mppt,
            k_de: m.k_de_max,
            binding: None,
            clamped: true,
            q_s_achievable: from_absorption(hp.limits.q_s_deload_max),
        }),
    }
}
