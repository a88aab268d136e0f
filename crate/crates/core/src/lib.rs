//! Per-unit phasor simulation and design of P-Q coordinated high-voltage
//! ride-through for DFIG wind farms feeding an HVDC rectifier.
//!
//! * [`network`]: PCC voltage after a DC block, and its sensitivities.
//! * [`capability`]: DFIG reactive limits and de-loading feasibility.
//! * [`controller`]: Q-V / P-V laws, coordination state machine, baselines.
//! * [`turbine`], [`dynamics`]: aerodynamics and the reduced-order DFIG model.
//! * [`sim`]: scenario engine, events and run metrics.

pub mod capability;
pub mod controller;
pub mod dynamics;
pub mod error;
pub mod network;
pub mod per_unit;
pub mod pi;
pub mod sim;
pub mod turbine;

pub use capability::{
    capability_grid, deload_limits, gsc_limit, p_ref_from_q_ref, rotor_current_from_pq,
    stator_limits, total_limit, CapabilityLimits, CapabilityRow, GridAxes, GscLimit, MachineParams,
    OperatingPoint,
};
pub use controller::{
    compute_gains, p_demand, q_demand, split_stage1, split_stage2, GainBasis, HvrtParams, Mode,
    PowerReferences, PqCoordinator,
};
pub use dynamics::{rotor_quantities, DfigModel, DfigState, DynamicsParams};
pub use error::{Error, Result};
pub use network::{
    dominance_margin, gc_from_qc, quartic_coeffs, scr_of, sensitivity_p, sensitivity_q,
    solve_pcc_voltage, GridParams, PccInjection, PccSolution, QuarticCoeffs,
};
pub use per_unit::{MachinePerUnit, MachineSi};
pub use pi::{ControllerGains, PiGains};
pub use sim::{
    compare, init_steady_state, run, Event, EventKind, Method, Metrics, Scenario, TimeSeries,
};
pub use turbine::{mech_power, mppt_power, TurbineParams};
