use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("derivative order {order} is not supported (max 3)")]
    UnsupportedOrder { order: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("speed {c} is not admissible: no amplitude root in (0, 1)")]
    SpeedNotAdmissible { c: f64 },

    #[error("amplitude {xi} cannot be inverted to a subsonic speed")]
    AmplitudeOutOfRange { xi: f64 },

    #[error("profile integration failed at x = {x}: {reason}")]
    ProfileFailure { x: f64, reason: String },

    #[error("vacuum reached: eta = {eta} >= 1 at x = {x}")]
    Vacuum { x: f64, eta: f64 },

    #[error("vacuum breach while building chain: max eta = {max_eta} at x = {x}")]
    VacuumBreach { x: f64, max_eta: f64 },

    #[error("grid mismatch: {0}")]
    Shape(String),

    #[error("non-finite field value at t = {t}")]
    BlowUp { t: f64 },

    #[error("soliton at x = {center} within {margin} of the box edge at t = {t} (try L_box >= {required_l_box})")]
    BoundaryBreach {
        t: f64,
        center: f64,
        margin: f64,
        required_l_box: f64,
    },

    #[error("integrand does not decay at the box edges ({edge_value:e})")]
    Localization { edge_value: f64 },

    #[error("expected {expected} solitons, found {found}")]
    Detection { expected: usize, found: usize },

    #[error("modulation did not converge after {iterations} iterations (residual {residual:e})")]
    ModulationFailure { iterations: usize, residual: f64 },

    #[error("soliton centers too close: gap {gap}")]
    Separation { gap: f64 },

    #[error("probe at t = {t} is not between tracked centers: {reason}")]
    Probe { t: f64, reason: String },

    #[error("at t = {t}: {source}")]
    AtTime {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at_time(self, t: f64) -> Error {
        Error::AtTime {
            t,
            source: Box::new(self),
        }
    }
}
