use thiserror::Error;

use crate::chart::Chart;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("metric is degenerate or not positive definite at {point:?}")]
    DegenerateMetric { point: Vec<f64> },

    #[error("point {coords:?} lies outside the {chart:?} chart")]
    OutsideDomain { chart: Chart, coords: Vec<f64> },

    #[error("finite-difference step {step:e} is too large for the chart margin {margin:e} at {coords:?}")]
    DomainMargin {
        coords: Vec<f64>,
        step: f64,
        margin: f64,
    },

    #[error("field lives on the {expected:?} chart, point is on the {found:?} chart")]
    ChartMismatch { expected: Chart, found: Chart },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("field has no analytic derivatives")]
    NoAnalyticDerivatives,

    #[error("one-form is not a Killing form of flat space (residual {residual:e})")]
    NotKilling { residual: f64 },

    #[error("boost velocity {v} is not below the speed of light")]
    Superluminal { v: f64 },

    #[error("conformal image of {point:?} is the point at infinity")]
    PoleAtInfinity { point: Vec<f64> },

    #[error("graph is not spacelike at {coords:?} (|df| = {slope})")]
    NotSpacelike { coords: Vec<f64>, slope: f64 },

    #[error("interpolating profile fails the spacelike check at radius {radius} (|f'| = {slope})")]
    ConstructionFailed { radius: f64, slope: f64 },

    #[error("radius sequence does not converge (successive differences {differences:?})")]
    Divergence { differences: Vec<f64> },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
