//! Inductive reactive-power capability of the DFIG.
//!
//! The stator is bounded by two circles in the `(P_s, Q_s)` plane:
//!
//! * rotor current: `P_s^2 + (Q_s + V_s^2/X_l)^2 <= (X_m V_s I_r^max / X_l)^2`
//! * apparent power: `P_s^2 + Q_s^2 <= S_n^2`
//!
//! `Q_s` is signed (generator convention, absorption negative), so the rotor
//! circle is centred on the absorbing side. Limits are reported as absorption
//! magnitudes. All quantities are per-unit on the unit's rated active power,
//! where the amplitude-invariant 3/2 factors disappear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::per_unit::{MachinePerUnit, MachineSi};

/// Tolerance used when a quantity must sit on or inside a circle.
const CIRCLE_TOL: f64 = 1e-12;

/// Absorption magnitude of a signed reactive power.
pub fn to_absorption(q_signed: f64) -> f64 {
    -q_signed
}

/// Signed reactive power for an absorption magnitude.
pub fn from_absorption(q_abs: f64) -> f64 {
    -q_abs
}

/// How the grid-side converter's reactive limit is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GscLimit {
    /// Fixed limit in p.u.
    Fixed(f64),
    /// `sqrt(S_c^2 - (s P_s)^2)`.
    Capacity,
    /// `S_c`, neglecting the slip power through the converter.
    CapacityApprox,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachineParams {
    pub s_n: f64,
    pub s_c: f64,
    pub x_m: f64,
    pub x_ls: f64,
    /// Stator self reactance `x_ls + x_m`.
    pub x_l: f64,
    /// Rotor leakage reactance, used only for the rotor-voltage estimate.
    pub x_lr: f64,
    pub r_s: f64,
    pub i_r_max: f64,
    pub k_de_max: f64,
    pub slip: f64,
    pub gsc_limit: GscLimit,
}

/// Reactive limit of the grid-side converter at the test operating point (p.u.).
pub const TEST_SYSTEM_Q_G_MAX: f64 = 0.25;

/// Largest de-loading coefficient used by the study.
pub const DEFAULT_K_DE_MAX: f64 = 0.2;

impl MachineParams {
    pub fn from_per_unit(pu: &MachinePerUnit) -> Result<Self> {
        let x_ls = pu.x_l - pu.x_m;
        MachineParams {
            s_n: pu.s_n,
            s_c: pu.s_c,
            x_m: pu.x_m,
            x_ls,
            x_l: pu.x_l,
            x_lr: x_ls,
            r_s: 0.0,
            i_r_max: pu.i_r_max,
            k_de_max: DEFAULT_K_DE_MAX,
            slip: 0.0,
            gsc_limit: GscLimit::Fixed(TEST_SYSTEM_Q_G_MAX),
        }
        .validated()
    }

    /// Test-system machine converted from its nameplate.
    pub fn test_system() -> Self {
        let pu = MachineSi::test_system()
            .to_per_unit()
            .expect("nameplate data is valid");
        MachineParams::from_per_unit(&pu).expect("nameplate data is valid")
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |what: &str| Err(Error::InvalidParam(what.to_string()));
        if !(self.x_m > 0.0 && self.x_ls > 0.0 && self.x_lr > 0.0) {
            return bad("reactances must be positive");
        }
        if (self.x_l - (self.x_ls + self.x_m)).abs() > 1e-12 * self.x_l {
            return bad("x_l must equal x_ls + x_m");
        }
        if !(self.s_n >= 1.0) {
            return bad("s_n must be >= 1 on the rated-power base");
        }
        if !(self.s_c > 0.0 && self.i_r_max > 0.0 && self.r_s >= 0.0) {
            return bad("s_c and i_r_max must be positive, r_s non-negative");
        }
        if !(0.0..1.0).contains(&self.k_de_max) {
            return bad("k_de_max must lie in [0, 1)");
        }
        if let GscLimit::Fixed(q) = self.gsc_limit {
            if !(q >= 0.0 && q.is_finite()) {
                return bad("fixed GSC limit must be non-negative");
            }
        }
        if !self.slip.is_finite() {
            return bad("slip must be finite");
        }
        Ok(self)
    }

    pub fn with_slip(mut self, slip: f64) -> Self {
        self.slip = slip;
        self
    }

    /// Centre offset `V_s^2 / X_l` of the rotor-current circle.
    pub fn rotor_circle_offset(&self, v_s: f64) -> f64 {
        v_s * v_s / self.x_l
    }

    /// Radius `X_m V_s I_r^max / X_l` of the rotor-current circle.
    pub fn rotor_circle_radius(&self, v_s: f64) -> f64 {
        self.x_m * v_s * self.i_r_max / self.x_l
    }

    /// Signed distance inside the rotor-current circle (power units; >= 0 feasible).
    pub fn rotor_margin(&self, p_s: f64, q_s: f64, v_s: f64) -> f64 {
        let dq = q_s + self.rotor_circle_offset(v_s);
        self.rotor_circle_radius(v_s) - (p_s * p_s + dq * dq).sqrt()
    }

    /// Signed distance inside the apparent-power circle (>= 0 feasible).
    pub fn capacity_margin(&self, p_s: f64, q_s: f64) -> f64 {
        self.s_n - (p_s * p_s + q_s * q_s).sqrt()
    }
}

impl Default for MachineParams {
    fn default() -> Self {
        MachineParams::test_system()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub p_s: f64,
    /// Signed stator reactive power (absorption negative).
    pub q_s: f64,
    pub v_s: f64,
    pub v_wind: f64,
}

impl OperatingPoint {
    pub fn new(p_s: f64, q_s: f64, v_s: f64) -> Self {
        OperatingPoint {
            p_s,
            q_s,
            v_s,
            v_wind: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatorLimits {
    pub q_s1_max: f64,
    pub q_s2_max: f64,
    pub q_s_max: f64,
}

/// Stator absorption limits at the operating point's active power and voltage.
pub fn stator_limits(m: &MachineParams, op: &OperatingPoint) -> Result<StatorLimits> {
    if !(op.v_s > 0.0) {
        return Err(Error::InvalidParam(format!(
            "v_s must be > 0, got {}",
            op.v_s
        )));
    }
    let p = op.p_s.abs();
    let radius = m.rotor_circle_radius(op.v_s);
    if p > radius + CIRCLE_TOL {
        return Err(Error::InfeasibleActivePower {
            p_s: op.p_s,
            circle: "rotor-current",
            radius,
        });
    }
    if p > m.s_n + CIRCLE_TOL {
        return Err(Error::InfeasibleActivePower {
            p_s: op.p_s,
            circle: "capacity",
            radius: m.s_n,
        });
    }
    let q_s1_max = m.rotor_circle_offset(op.v_s) + (radius * radius - p * p).max(0.0).sqrt();
    let q_s2_max = (m.s_n * m.s_n - p * p).max(0.0).sqrt();
    Ok(StatorLimits {
        q_s1_max,
        q_s2_max,
        q_s_max: q_s1_max.min(q_s2_max),
    })
}

/// Reactive limit of the grid-side converter; uses `m.slip`.
pub fn gsc_limit(m: &MachineParams, op: &OperatingPoint) -> Result<f64> {
    let slip_power = m.slip * op.p_s;
    if slip_power.abs() > m.s_c + CIRCLE_TOL {
        return Err(Error::InfeasibleActivePower {
            p_s: op.p_s,
            circle: "grid-side converter",
            radius: m.s_c,
        });
    }
    Ok(match m.gsc_limit {
        GscLimit::Fixed(q) => q,
        GscLimit::Capacity => (m.s_c * m.s_c - slip_power * slip_power).max(0.0).sqrt(),
        GscLimit::CapacityApprox => m.s_c,
    })
}

/// `Q_G^max = Q_s^max + Q_g^max`.
pub fn total_limit(m: &MachineParams, op: &OperatingPoint) -> Result<f64> {
    Ok(stator_limits(m, op)?.q_s_max + gsc_limit(m, op)?)
}

/// Full capability picture at an operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityLimits {
    pub q_s1_max: f64,
    pub q_s2_max: f64,
    pub q_s_max: f64,
    pub q_g_max: f64,
    /// `Q_G^max`.
    pub q_total_max: f64,
    /// `Q_sD^max`: stator limit after de-loading.
    pub q_s_deload_max: f64,
    /// `Q_GD^max`.
    pub q_total_deload_max: f64,
    /// Active power where the binding stator constraint switches, if any.
    pub p_0: Option<f64>,
}

/// Capability with the stator re-evaluated at `P_s = (1 - k_de) P_MPPT`.
///
/// `op.p_s` is the MPPT power. The GSC limit is taken at the MPPT point.
pub fn deload_limits(
    m: &MachineParams,
    op: &OperatingPoint,
    k_de: f64,
) -> Result<CapabilityLimits> {
    if !(0.0..=m.k_de_max).contains(&k_de) {
        return Err(Error::DeloadOutOfRange {
            k_de,
            k_de_max: m.k_de_max,
        });
    }
    let at_mppt = stator_limits(m, op)?;
    let q_g_max = gsc_limit(m, op)?;
    let deloaded = OperatingPoint {
        p_s: (1.0 - k_de) * op.p_s,
        ..*op
    };
    let q_s_deload_max = stator_limits(m, &deloaded)?.q_s_max;
    Ok(CapabilityLimits {
        q_s1_max: at_mppt.q_s1_max,
        q_s2_max: at_mppt.q_s2_max,
        q_s_max: at_mppt.q_s_max,
        q_g_max,
        q_total_max: at_mppt.q_s_max + q_g_max,
        q_s_deload_max,
        q_total_deload_max: q_s_deload_max + q_g_max,
        p_0: crossover_power(m, op.v_s),
    })
}

/// Active power at which `Q_s1^max = Q_s2^max` on `[0, min(S_n, radius)]`,
/// when the binding stator constraint switches inside that interval.
pub fn crossover_power(m: &MachineParams, v_s: f64) -> Option<f64> {
    let p_hi = m.s_n.min(m.rotor_circle_radius(v_s));
    let gap = |p: f64| {
        stator_limits(m, &OperatingPoint::new(p, 0.0, v_s))
            .map(|l| l.q_s1_max - l.q_s2_max)
            .unwrap_or(f64::NAN)
    };
    let (mut lo, mut hi) = (0.0, p_hi);
    let g_lo = gap(lo);
    let g_hi = gap(hi);
    if !(g_lo * g_hi < 0.0) {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (gap(mid) < 0.0) == (g_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Circle {
    RotorCurrent,
    Capacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeloadReference {
    pub p_s_ref: f64,
    pub k_de: f64,
    /// Circle that limits the active power, `None` when MPPT is feasible.
    pub binding: Option<Circle>,
    /// True when the de-loading coefficient hit `k_de_max`.
    pub clamped: bool,
    /// Signed stator reactive power that is feasible at `p_s_ref`.
    pub q_s_achievable: f64,
}

/// Largest stator active power compatible with a signed reactive reference.
pub fn max_active_power(m: &MachineParams, q_s: f64, v_s: f64) -> Result<(f64, Circle)> {
    let limit = max_stator_absorption(m, v_s);
    if to_absorption(q_s) > limit + CIRCLE_TOL {
        return Err(Error::InfeasibleReactiveDemand {
            q_s_ref: q_s,
            limit,
        });
    }
    let radius = m.rotor_circle_radius(v_s);
    let dq = q_s + m.rotor_circle_offset(v_s);
    let rotor = radius * radius - dq * dq;
    let capacity = m.s_n * m.s_n - q_s * q_s;
    if rotor < -CIRCLE_TOL || capacity < -CIRCLE_TOL {
        return Err(Error::InfeasibleReactiveDemand {
            q_s_ref: q_s,
            limit,
        });
    }
    let p_rotor = rotor.max(0.0).sqrt();
    let p_capacity = capacity.max(0.0).sqrt();
    Ok(if p_rotor < p_capacity {
        (p_rotor, Circle::RotorCurrent)
    } else {
        (p_capacity, Circle::Capacity)
    })
}

/// Largest stator absorption at zero active power.
pub fn max_stator_absorption(m: &MachineParams, v_s: f64) -> f64 {
    (m.rotor_circle_offset(v_s) + m.rotor_circle_radius(v_s)).min(m.s_n)
}

/// Active-power reference that frees enough stator capability for `q_s_ref`.
pub fn p_ref_from_q_ref(
    m: &MachineParams,
    q_s_ref: f64,
    v_s: f64,
    p_mppt: f64,
) -> Result<DeloadReference> {
    if !(v_s > 0.0) {
        return Err(Error::InvalidParam(format!("v_s must be > 0, got {v_s}")));
    }
    if !(p_mppt > 0.0) {
        return Err(Error::InvalidParam(format!(
            "p_mppt must be > 0, got {p_mppt}"
        )));
    }
    let (p_feasible, circle) = max_active_power(m, q_s_ref, v_s)?;
    if p_feasible >= p_mppt {
        return Ok(DeloadReference {
            p_s_ref: p_mppt,
            k_de: 0.0,
            binding: None,
            clamped: false,
            q_s_achievable: q_s_ref,
        });
    }
    let k_de = 1.0 - p_feasible / p_mppt;
    if k_de <= m.k_de_max {
        return Ok(DeloadReference {
            p_s_ref: p_feasible,
            k_de,
            binding: Some(circle),
            clamped: false,
            q_s_achievable: q_s_ref,
        });
    }
    let p_s_ref = (1.0 - m.k_de_max) * p_mppt;
    let q_abs = stator_limits(m, &OperatingPoint::new(p_s_ref, 0.0, v_s))?.q_s_max;
    Ok(DeloadReference {
        p_s_ref,
        k_de: m.k_de_max,
        binding: Some(circle),
        clamped: true,
        q_s_achievable: from_absorption(q_abs.min(to_absorption(q_s_ref))),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorCurrent {
    pub i_rd: f64,
    pub i_rq: f64,
}

impl RotorCurrent {
    pub fn magnitude(&self) -> f64 {
        self.i_rd.hypot(self.i_rq)
    }
}

/// Rotor current under ideal stator-flux orientation.
///
/// With `ψ_s = V_s`, `v_sd = 0`, `v_sq = V_s` and stator resistance neglected,
/// `i_rq = -P_s X_l / (V_s X_m)` and `i_rd = (V_s - X_l Q_abs / V_s) / X_m`,
/// where `Q_abs` is the absorbed stator reactive power.
pub fn rotor_current_from_pq(m: &MachineParams, op: &OperatingPoint) -> Result<RotorCurrent> {
    if !(op.v_s > 0.0) {
        return Err(Error::InvalidParam(format!(
            "v_s must be > 0, got {}",
            op.v_s
        )));
    }
    let q_abs = to_absorption(op.q_s);
    Ok(RotorCurrent {
        i_rd: (op.v_s - m.x_l * q_abs / op.v_s) / m.x_m,
        i_rq: -op.p_s * m.x_l / (op.v_s * m.x_m),
    })
}

/// Inverse of [`rotor_current_from_pq`].
pub fn pq_from_rotor_current(m: &MachineParams, i_r: &RotorCurrent, v_s: f64) -> (f64, f64) {
    let p_s = -i_r.i_rq * v_s * m.x_m / m.x_l;
    let q_abs = (v_s - i_r.i_rd * m.x_m) * v_s / m.x_l;
    (p_s, from_absorption(q_abs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxes {
    /// MPPT active power values.
    pub p_s: Vec<f64>,
    pub v_s: Vec<f64>,
    pub k_de: Vec<f64>,
}

impl GridAxes {
    pub fn single(p_s: f64, v_s: f64, k_de: f64) -> Self {
        GridAxes {
            p_s: vec![p_s],
            v_s: vec![v_s],
            k_de: vec![k_de],
        }
    }
}

/// Evenly spaced values including both ends.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// One row of the capability table. Limits are evaluated at
/// `P_s = (1 - k_de) p_s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityRow {
    pub p_s: f64,
    pub v_s: f64,
    pub k_de: f64,
    pub q_s1_max: f64,
    pub q_s2_max: f64,
    pub q_s_max: f64,
    pub q_g_max: f64,
    pub q_total_max: f64,
}

impl CapabilityRow {
    pub const CSV_HEADER: [&'static str; 8] = [
        "p_s",
        "v_s",
        "k_de",
        "q_s1_max",
        "q_s2_max",
        "q_s_max",
        "q_g_max",
        "q_total_max",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.p_s,
            self.v_s,
            self.k_de,
            self.q_s1_max,
            self.q_s2_max,
            self.q_s_max,
            self.q_g_max,
            self.q_total_max,
        ]
    }
}

/// Rectangular table of limits; `p_s` outermost, `k_de` innermost.
pub fn capability_grid(m: &MachineParams, axes: &GridAxes) -> Result<Vec<CapabilityRow>> {
    let mut rows = Vec::with_capacity(axes.p_s.len() * axes.v_s.len() * axes.k_de.len());
    for &p_s in &axes.p_s {
        for &v_s in &axes.v_s {
            for &k_de in &axes.k_de {
                if !(0.0..=m.k_de_max).contains(&k_de) {
                    return Err(Error::DeloadOutOfRange {
                        k_de,
                        k_de_max: m.k_de_max,
                    });
                }
                let op = OperatingPoint::new((1.0 - k_de) * p_s, 0.0, v_s);
                let stator = stator_limits(m, &op)?;
                let q_g_max = gsc_limit(m, &op)?;
                rows.push(CapabilityRow {
                    p_s,
                    v_s,
                    k_de,
                    q_s1_max: stator.q_s1_max,
                    q_s2_max: stator.q_s2_max,
                    q_s_max: stator.q_s_max,
                    q_g_max,
                    q_total_max: stator.q_s_max + q_g_max,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table1() -> MachineParams {
        MachineParams::test_system()
    }

    #[test]
    fn rated_point_limits() {
        let m = table1();
        let l = stator_limits(&m, &OperatingPoint::new(1.0, 0.0, 1.0)).unwrap();
        assert!((l.q_s_max - 0.48).abs() < 0.01, "{l:?}");
        assert_eq!(l.q_s_max, l.q_s2_max);
    }

    #[test]
    fn capacity_circle_boundary() {
        let m = table1();
        let l = stator_limits(&m, &OperatingPoint::new(m.s_n, 0.0, 1.0)).unwrap();
        assert_eq!(l.q_s2_max, 0.0);
    }

    #[test]
    fn zero_power_rotor_limit() {
        let m = table1();
        let l = stator_limits(&m, &OperatingPoint::new(0.0, 0.0, 1.0)).unwrap();
        let expected = 1.0 / m.x_l + m.x_m * m.i_r_max / m.x_l;
        assert_relative_eq!(l.q_s1_max, expected, epsilon = 1e-14);
        assert!((l.q_s1_max - 1.314).abs() < 2e-3);
    }

    #[test]
    fn active_power_outside_circles_rejected() {
        let m = table1();
        let err = stator_limits(&m, &OperatingPoint::new(1.15, 0.0, 1.0)).unwrap_err();
        assert!(matches!(
            err,
            Error::InfeasibleActivePower {
                circle: "capacity",
                ..
            }
        ));
        let err = stator_limits(&m, &OperatingPoint::new(0.5, 0.0, 0.4)).unwrap_err();
        assert!(matches!(
            err,
            Error::InfeasibleActivePower {
                circle: "rotor-current",
                ..
            }
        ));
    }

    #[test]
    fn gsc_limit_modes() {
        let mut m = table1();
        m.s_c = 0.25;
        m.gsc_limit = GscLimit::Capacity;
        let op = OperatingPoint::new(1.0, 0.0, 1.0);
        assert_eq!(gsc_limit(&m, &op).unwrap(), 0.25);
        assert_eq!(gsc_limit(&m.with_slip(0.25), &op).unwrap(), 0.0);
        m.s_c = 0.3;
        assert_relative_eq!(
            gsc_limit(&m.with_slip(-0.2), &op).unwrap(),
            0.05f64.sqrt(),
            epsilon = 1e-15
        );
        m.gsc_limit = GscLimit::CapacityApprox;
        assert_eq!(gsc_limit(&m.with_slip(-0.2), &op).unwrap(), 0.3);
        m.gsc_limit = GscLimit::Capacity;
        assert!(gsc_limit(&m.with_slip(0.5), &op).is_err());
        assert_eq!(gsc_limit(&table1(), &op).unwrap(), 0.25);
    }

    #[test]
    fn published_capability_values() {
        let m = table1();
        let op = OperatingPoint::new(1.0, 0.0, 1.0);
        let none = deload_limits(&m, &op, 0.0).unwrap();
        assert!((none.q_total_max - 0.73).abs() < 0.01);
        assert_relative_eq!(none.q_total_deload_max, none.q_total_max);
        let full = deload_limits(&m, &op, 0.2).unwrap();
        assert!((full.q_total_deload_max - 1.02).abs() < 0.01, "{full:?}");
        assert!(full.q_total_deload_max >= full.q_total_max);
        assert_relative_eq!(full.q_total_max, full.q_s_max + full.q_g_max);
        assert!(deload_limits(&m, &op, 0.25).is_err());
    }

    #[test]
    fn deload_limit_non_decreasing_in_coefficient() {
        let m = table1();
        let op = OperatingPoint::new(1.0, 0.0, 1.0);
        let mut prev = 0.0;
        for k in [0.0, 0.05, 0.1, 0.15, 0.2] {
            let q = deload_limits(&m, &op, k).unwrap().q_total_deload_max;
            assert!(q >= prev);
            prev = q;
        }
    }

    #[test]
    fn large_demand_is_clamped_at_max_deload() {
        let m = table1();
        let r = p_ref_from_q_ref(&m, -0.9, 1.0, 1.0).unwrap();
        let (p_cap, circle) = max_active_power(&m, -0.9, 1.0).unwrap();
        assert_eq!(circle, Circle::Capacity);
        assert!((p_cap - 0.652).abs() < 1e-3);
        assert!(r.clamped);
        assert_relative_eq!(r.p_s_ref, 0.8, epsilon = 1e-15);
        assert_relative_eq!(r.k_de, 0.2);
        assert!((to_absorption(r.q_s_achievable) - 0.771).abs() < 1e-3);
    }

    #[test]
    fn zero_demand_keeps_mppt() {
        let r = p_ref_from_q_ref(&table1(), 0.0, 1.0, 1.0).unwrap();
        assert_eq!((r.p_s_ref, r.k_de, r.binding), (1.0, 0.0, None));
    }

    #[test]
    fn unreachable_demand_rejected() {
        let err = p_ref_from_q_ref(&table1(), -1.5, 1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleReactiveDemand { .. }));
    }

    #[test]
    fn rotor_current_examples() {
        let m = table1();
        let i0 = rotor_current_from_pq(&m, &OperatingPoint::new(0.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(i0.i_rd, 1.0 / m.x_m);
        assert!((i0.i_rd - 0.154).abs() < 1e-3);
        assert_eq!(i0.i_rq, 0.0);
        let i1 = rotor_current_from_pq(&m, &OperatingPoint::new(1.0, 0.0, 1.0)).unwrap();
        assert!((i1.i_rq + 1.0874).abs() < 1e-3);
        assert!((i1.magnitude() - 1.098).abs() < 1e-3);
        assert!(i1.magnitude() < m.i_r_max);
        assert!(rotor_current_from_pq(&m, &OperatingPoint::new(0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn no_crossover_for_test_machine_but_found_when_rotor_binds() {
        let m = table1();
        assert_eq!(crossover_power(&m, 1.0), None);
        let mut weak = m;
        weak.i_r_max = 1.1;
        let p0 = crossover_power(&weak, 1.0).unwrap();
        let l = stator_limits(&weak, &OperatingPoint::new(p0, 0.0, 1.0)).unwrap();
        assert!((l.q_s1_max - l.q_s2_max).abs() < 1e-9);
        let below = stator_limits(&weak, &OperatingPoint::new(0.5 * p0, 0.0, 1.0)).unwrap();
        assert_eq!(below.q_s_max, below.q_s2_max);
        let above = stator_limits(&weak, &OperatingPoint::new(0.5 * (p0 + 1.0), 0.0, 1.0)).unwrap();
        assert_eq!(above.q_s_max, above.q_s1_max);
    }

    #[test]
    fn single_cell_grid_matches_stator_limits() {
        let m = table1();
        let rows = capability_grid(&m, &GridAxes::single(1.0, 1.0, 0.0)).unwrap();
        assert_eq!(rows.len(), 1);
        let l = stator_limits(&m, &OperatingPoint::new(1.0, 0.0, 1.0)).unwrap();
        assert_eq!(rows[0].q_s_max, l.q_s_max);
        assert_eq!(rows[0].q_s1_max, l.q_s1_max);
    }

    #[test]
    fn grid_voltage_sweep_non_decreasing() {
        let m = table1();
        let axes = GridAxes {
            p_s: vec![0.9],
            v_s: linspace(0.8, 1.3, 26),
            k_de: vec![0.0],
        };
        let rows = capability_grid(&m, &axes).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].q_s_max >= w[0].q_s_max - 1e-15);
            assert!(w[1].q_s1_max >= w[0].q_s1_max);
        }
    }

    #[test]
    fn linspace_ends() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        assert_eq!(linspace(2.0, 3.0, 1), vec![2.0]);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }
}
