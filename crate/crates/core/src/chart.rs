//! Coordinate charts and points tagged with the chart they live in.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// The charts supported by the toolkit.
///
/// `HalfSpace` uses `(w¹, …, w^{n−1}, z)` with `z > 0` last. `PoincareBall`
/// uses Cartesian `x` with `|x| < 1`. `Polar` uses `(r, θ₁, …, θ_{n−1})` with
/// hyperspherical angles, `θ₁..θ_{n−2} ∈ (0, π)`. `Euclidean` is an
/// unrestricted Cartesian patch of ℝⁿ (flat space, Minkowski graphs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    HalfSpace,
    PoincareBall,
    Polar,
    Euclidean,
}

impl Chart {
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            Chart::HalfSpace => x.last().is_some_and(|&z| z > 0.0),
            Chart::PoincareBall => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
            Chart::Polar => {
                let n = x.len();
                x[0] > 0.0 && x[1..n.saturating_sub(1)].iter().all(|&t| t > 0.0 && t < PI)
            }
            Chart::Euclidean => true,
        }
    }

    /// Coordinate distance to the chart boundary (infinite for `Euclidean`).
    pub fn margin(&self, x: &[f64]) -> f64 {
        match self {
            Chart::HalfSpace => *x.last().unwrap_or(&0.0),
            Chart::PoincareBall => 1.0 - x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Chart::Polar => {
                let n = x.len();
                x[1..n.saturating_sub(1)]
                    .iter()
                    .fold(x[0], |m, &t| m.min(t).min(PI - t))
            }
            Chart::Euclidean => f64::INFINITY,
        }
    }

    /// Natural length scale of the chart at `x`, used to size
    /// finite-difference steps.
    pub fn local_scale(&self, x: &[f64]) -> f64 {
        match self {
            Chart::HalfSpace | Chart::PoincareBall => self.margin(x),
            Chart::Polar => self.margin(x).min(1.0),
            Chart::Euclidean => 1.0,
        }
    }

    pub fn min_dim(&self) -> usize {
        match self {
            Chart::Euclidean => 1,
            _ => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    chart: Chart,
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart: Chart, coords: Vec<f64>) -> Result<Self> {
        if coords.len() < chart.min_dim() || coords.len() > crate::scalar::MAX_DIM {
            return Err(Error::UnsupportedDimension(coords.len()));
        }
        if !chart.contains(&coords) {
            return Err(Error::OutsideDomain { chart, coords });
        }
        Ok(ChartPoint { chart, coords })
    }

    pub fn half_space(w: &[f64], z: f64) -> Result<Self> {
        let mut coords = w.to_vec();
        coords.push(z);
        Self::new(Chart::HalfSpace, coords)
    }

    pub fn ball(x: &[f64]) -> Result<Self> {
        Self::new(Chart::PoincareBall, x.to_vec())
    }

    pub fn polar(r: f64, angles: &[f64]) -> Result<Self> {
        let mut coords = vec![r];
        coords.extend_from_slice(angles);
        Self::new(Chart::Polar, coords)
    }

    pub fn euclidean(x: &[f64]) -> Result<Self> {
        Self::new(Chart::Euclidean, x.to_vec())
    }

    /// The polar-chart marker for the centre of the ball, where the angles
    /// are meaningless. Stored as `r = 0` with all angles zero.
    pub fn polar_origin(n: usize) -> Self {
        ChartPoint {
            chart: Chart::Polar,
            coords: vec![0.0; n],
        }
    }

    pub fn is_polar_origin(&self) -> bool {
        self.chart == Chart::Polar && self.coords[0] == 0.0
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Unit vector in ℝⁿ for hyperspherical angles `(θ₁, …, θ_{n−1})`:
/// `(cos θ₁, sin θ₁ cos θ₂, …, sin θ₁⋯sin θ_{n−1})`.
pub fn unit_from_angles(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut out = Vec::with_capacity(n);
    let mut prod = 1.0;
    for &t in angles {
        out.push(prod * t.cos());
        prod *= t.sin();
    }
    out.push(prod);
    out
}

/// Inverse of [`unit_from_angles`] for a nonzero vector (normalised first).
pub fn angles_from_vector(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut angles = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let tail: f64 = x[k + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if k + 2 == n {
            angles.push(x[n - 1].atan2(x[n - 2]));
        } else {
            angles.push(tail.atan2(x[k]));
        }
    }
    angles
}
