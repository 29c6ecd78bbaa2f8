//! Numerical toolkit for asymptotically hyperbolic initial data: model charts
//! of hyperbolic space, curvature of metrics given in a chart, energy-momentum
//! surface integrals at infinity, the Lorentz action on energy-momenta,
//! constraint operators, and a parametric simulator for gluing two data sets
//! along half-spaces.

// `!(x > 0.0)` is used on purpose so that NaN fails parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod constraints;
pub mod cutoff;
pub mod error;
pub mod geometry;
pub mod gluing;
pub mod lorentz;
pub mod mass;
pub mod models;
pub mod quadrature;
pub mod scalar;
pub mod tensor;

pub use chart::{Chart, ChartPoint};
pub use error::{Error, Result};
