use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("no real PCC voltage solution (discriminant {discriminant:.3e})")]
    NoRealSolution { discriminant: f64 },

    #[error("degenerate network: g_c * x_e = 1")]
    DegenerateNetwork,

    #[error("voltage sensitivity is singular at zero discriminant")]
    SingularSensitivity,

    #[error("active power {p_s:.6} exceeds the {circle} circle (radius {radius:.6})")]
    InfeasibleActivePower {
        p_s: f64,
        circle: &'static str,
        radius: f64,
    },

    #[error("de-loading coefficient {k_de} outside [0, {k_de_max}]")]
    DeloadOutOfRange { k_de: f64, k_de_max: f64 },

    #[error("reactive demand {q_s_ref:.6} exceeds the stator capability {limit:.6}")]
    InfeasibleReactiveDemand { q_s_ref: f64, limit: f64 },

    #[error("HVRT thresholds must satisfy v_ov_min < v_ov1 < v_ov_max")]
    InvalidThresholds,

    #[error("stage-1 demand {total_q:.6} exceeds Q_G^max {q_total_max:.6}")]
    ExceedsStage1Limit { total_q: f64, q_total_max: f64 },

    #[error("wind speed {v_wind} m/s outside [{cut_in}, {cut_out}]")]
    OutsideWindRange {
        v_wind: f64,
        cut_in: f64,
        cut_out: f64,
    },

    #[error("no feasible pre-block operating point: {0}")]
    NoFeasibleInit(String),

    #[error("numeric blow-up at t = {t:.4} s: {what}")]
    NumericBlowup { t: f64, what: String },

    #[error("unknown event `{0}`")]
    UnknownEvent(String),

    #[error("at t = {t:.4} s: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Short machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParam(_) => "InvalidParam",
            Error::NoRealSolution { .. } => "NoRealSolution",
            Error::DegenerateNetwork => "DegenerateNetwork",
            Error::SingularSensitivity => "SingularSensitivity",
            Error::InfeasibleActivePower { .. } => "InfeasibleActivePower",
            Error::DeloadOutOfRange { .. } => "DeloadOutOfRange",
            Error::InfeasibleReactiveDemand { .. } => "InfeasibleReactiveDemand",
            Error::InvalidThresholds => "InvalidThresholds",
            Error::ExceedsStage1Limit { .. } => "ExceedsStage1Limit",
            Error::OutsideWindRange { .. } => "OutsideWindRange",
            Error::NoFeasibleInit(_) => "NoFeasibleInit",
            Error::NumericBlowup { .. } => "NumericBlowup",
            Error::UnknownEvent(_) => "UnknownEvent",
            Error::AtTime { source, .. } => source.kind(),
        }
    }

    pub(crate) fn at(self, t: f64) -> Error {
        match self {
            e @ Error::AtTime { .. } => e,
            e => Error::AtTime {
                t,
                source: Box::new(e),
            },
        }
    }
}
