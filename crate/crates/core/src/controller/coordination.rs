//! Sample-by-sample P-Q coordination.
//!
//! Each call re-evaluates the capability at the present voltage and MPPT
//! power, recomputes the Q-V slopes, selects the stage and produces the
//! stator/GSC reactive references together with the de-loaded active
//! reference. HVRT control is entered when `v_p > v_ov_min` and released once
//! `v_p <= v_ov_min - hysteresis`; after release the active reference climbs
//! back to MPPT at `release_rate`.

use serde::{Deserialize, Serialize};

use super::{
    capability_snapshot, p_demand, reactive_references, HvrtParams, Mode, PowerReferences,
    ReactiveSplit,
};
use crate::capability::MachineParams;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoordinationStatus {
    /// Not in HVRT control.
    Idle,
    /// HVRT control active, de-loading margin left.
    Active,
    /// De-loading reached `k_de_max`.
    MaxDeload,
    /// The voltage fell back below the release threshold on this sample.
    VoltageSatisfied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinationOutput {
    pub refs: PowerReferences,
    pub status: CoordinationStatus,
    /// Modes visited on this sample, in order, starting from the previous mode.
    /// Has length one when the mode did not change.
    pub traversed: Vec<Mode>,
    /// Parameters used on this sample, with refreshed limits and gains.
    pub params: HvrtParams,
}

#[derive(Debug, Clone)]
pub struct PqCoordinator {
    machine: MachineParams,
    params: HvrtParams,
    active: bool,
    mode: Mode,
    last_p_ref: Option<f64>,
}

impl PqCoordinator {
    /// `params` supplies thresholds, gain basis, hysteresis and release rate;
    /// its limits are replaced on every step.
    pub fn new(machine: MachineParams, params: HvrtParams) -> Result<Self> {
        params.check_thresholds()?;
        Ok(PqCoordinator {
            machine,
            params,
            active: false,
            mode: Mode::Normal,
            last_p_ref: None,
        })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    pub fn params(&self) -> &HvrtParams {
        &self.params
    }

    /// One controller sample.
    ///
    /// `slip` feeds the GSC limit when it is derived from the converter
    /// capacity; `dt` is the sample period used by the release ramp.
    pub fn step(
        &mut self,
        v_p: f64,
        p_mppt: f64,
        slip: f64,
        dt: f64,
    ) -> Result<CoordinationOutput> {
        let m = self.machine.with_slip(slip);
        let limits = capability_snapshot(&m, p_mppt, v_p, m.k_de_max)?;
        let hp = self.params.with_limits(limits)?;
        self.params = hp;

        let was_active = self.active;
        if !self.active && v_p > hp.v_ov_min {
            self.active = true;
        } else if self.active && v_p <= hp.v_ov_min - hp.hysteresis {
            self.active = false;
        }

        let band = hp.band(v_p);
        let mode = if self.active {
            band.max(Mode::Stage1)
        } else {
            Mode::Normal
        };

        let split = if mode == Mode::Stage1 && band == Mode::Normal {
            // Inside the hysteresis band the demand is zero, but control stays engaged.
            ReactiveSplit::ZERO
        } else if self.active {
            reactive_references(v_p, &hp)?
        } else {
            ReactiveSplit::ZERO
        };

        let target = if self.active {
            p_demand(v_p, p_mppt, &hp, &m)?.p_s_ref
        } else {
            p_mppt
        };
        let floor = (1.0 - m.k_de_max) * p_mppt;
        let p_s_ref = match self.last_p_ref {
            Some(prev) if target > prev => target.min(prev + hp.release_rate * dt),
            _ => target,
        }
        .max(floor);
        self.last_p_ref = Some(p_s_ref);
        let k_de = (1.0 - p_s_ref / p_mppt).clamp(0.0, m.k_de_max);

        let traversed = traversal(self.mode, mode);
        self.mode = mode;

        let status = if was_active && !self.active {
            CoordinationStatus::VoltageSatisfied
        } else if !self.active {
            CoordinationStatus::Idle
        } else if k_de >= m.k_de_max - 1e-12 {
            CoordinationStatus::MaxDeload
        } else {
            CoordinationStatus::Active
        };

        Ok(CoordinationOutput {
            refs: PowerReferences {
                q_s_ref: split.q_s_ref,
                q_g_ref: split.q_g_ref,
                p_s_ref,
                mode,
                k_de,
            },
            status,
            traversed,
            params: hp,
        })
    }
}

/// Modes passed through moving from `from` to `to`, both ends included.
fn traversal(from: Mode, to: Mode) -> Vec<Mode> {
    let (a, b) = (from.index(), to.index());
    if a <= b {
        Mode::ALL[a..=b].to_vec()
    } else {
        Mode::ALL[b..=a].iter().rev().copied().collect()
    }
}
