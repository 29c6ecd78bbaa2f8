//! Lorentz matrices on `ℝ^{1,n}` and their action on energy-momenta and,
//! through null rays `(1, x)`, on the sphere `S^{n−1}` by conformal maps.
//!
//! Index 0 is time; `η = diag(−1, 1, …, 1)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mass::EnergyMomentum;

/// Smallest time component allowed when projecting a null ray back to the
/// sphere.
pub const POLE_TOLERANCE: f64 = 1e-14;

fn eta(n: usize) -> DMatrix<f64> {
    let mut e = DMatrix::identity(n + 1, n + 1);
    e[(0, 0)] = -1.0;
    e
}

/// Proper orthochronous Lorentz matrix of size `(n+1) × (n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzMatrix {
    m: DMatrix<f64>,
}

impl LorentzMatrix {
    /// Accepts `m` if `mᵀηm = η` to `1e−10·max(1, m₀₀²)`, `m₀₀ > 0` and
    /// `det m > 0`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() < 2 {
            return Err(Error::InvalidParameter("Lorentz matrix must be square".into()));
        }
        let l = LorentzMatrix { m };
        let tol = 1e-10 * l.m[(0, 0)].powi(2).max(1.0);
        let defect = l.lorentz_defect();
        if !(defect <= tol) {
            return Err(Error::InvalidParameter(format!(
                "matrix is not Lorentz: |ΛᵀηΛ − η| = {defect:e}"
            )));
        }
        if !(l.m[(0, 0)] > 0.0) || !(l.m.determinant() > 0.0) {
            return Err(Error::InvalidParameter(
                "matrix is not proper orthochronous".into(),
            ));
        }
        Ok(l)
    }

    pub fn identity(n: usize) -> Self {
        LorentzMatrix {
            m: DMatrix::identity(n + 1, n + 1),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Spatial dimension `n`.
    pub fn dim(&self) -> usize {
        self.m.nrows() - 1
    }

    /// `Λ⁻¹ = η Λᵀ η`.
    pub fn inverse(&self) -> Self {
        let e = eta(self.dim());
        LorentzMatrix {
            m: &e * self.m.transpose() * &e,
        }
    }

    /// `self · other`.
    pub fn compose(&self, other: &LorentzMatrix) -> Self {
        LorentzMatrix {
            m: &self.m * &other.m,
        }
    }

    /// `max |ΛᵀηΛ − η|`.
    pub fn lorentz_defect(&self) -> f64 {
        let e = eta(self.dim());
        (self.m.transpose() * &e * &self.m - e).amax()
    }

    /// Time-time entry; equals `γ` for a pure boost.
    pub fn gamma(&self) -> f64 {
        self.m[(0, 0)]
    }
}

/// Boost along a unit direction with speed `v`, `|v| < 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoostParams {
    direction: Vec<f64>,
    v: f64,
}

impl BoostParams {
    pub fn new(direction: Vec<f64>, v: f64) -> Result<Self> {
        let norm: f64 = direction.iter().map(|d| d * d).sum::<f64>().sqrt();
        if direction.len() < 2 || (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "boost direction must be a unit vector (norm {norm})"
            )));
        }
        if !v.is_finite() || v.abs() >= 1.0 {
            return Err(Error::Superluminal { v });
        }
        Ok(BoostParams { direction, v })
    }

    /// Boost along the `k`-th coordinate axis of `ℝⁿ` (0-based).
    pub fn along_axis(n: usize, k: usize, v: f64) -> Result<Self> {
        if k >= n {
            return Err(Error::InvalidParameter(format!("axis {k} out of range for n = {n}")));
        }
        let mut d = vec![0.0; n];
        d[k] = 1.0;
        Self::new(d, v)
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    /// `γ = (1 − v²)^{−1/2}`, factored for accuracy near `v = 1`.
    pub fn gamma(&self) -> f64 {
        1.0 / ((1.0 - self.v) * (1.0 + self.v)).sqrt()
    }
}

/// `Λ⁰₀ = γ`, `Λ⁰_i = Λⁱ₀ = −γ v dᵢ`, `Λⁱ_j = δᵢⱼ + (γ − 1) dᵢ dⱼ`.
///
/// On the sphere this pushes points away from `d`: the cap `d·x ≥ v` is
/// mapped onto the hemisphere `d·x ≥ 0`.
pub fn boost(params: &BoostParams) -> LorentzMatrix {
    let n = params.direction.len();
    let g = params.gamma();
    let v = params.v;
    let d = &params.direction;
    let mut m = DMatrix::identity(n + 1, n + 1);
    m[(0, 0)] = g;
    for i in 0..n {
        m[(0, i + 1)] = -g * v * d[i];
        m[(i + 1, 0)] = -g * v * d[i];
        for j in 0..n {
            m[(i + 1, j + 1)] += (g - 1.0) * d[i] * d[j];
        }
    }
    LorentzMatrix { m }
}

/// Rotation by `π` in the plane spanned by the orthonormal pair
/// `(pole, partner)`: spatial block `I − 2ppᵀ − 2qqᵀ`.
pub fn rotation_pi(pole: &[f64], partner: &[f64]) -> Result<LorentzMatrix> {
    let n = pole.len();
    if partner.len() != n || n < 2 {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: partner.len(),
        });
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    if (dot(pole, pole) - 1.0).abs() > 1e-12
        || (dot(partner, partner) - 1.0).abs() > 1e-12
        || dot(pole, partner).abs() > 1e-12
    {
        return Err(Error::InvalidParameter(
            "rotation axes must be an orthonormal pair".into(),
        ));
    }
    let mut m = DMatrix::identity(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            m[(i + 1, j + 1)] -= 2.0 * (pole[i] * pole[j] + partner[i] * partner[j]);
        }
    }
    Ok(LorentzMatrix { m })
}

/// `diag(1, −1, −1, 1, …, 1)`: the `π`-rotation in the frame where the
/// boost is along `e₁`.
pub fn aligned_rotation_pi(n: usize) -> Result<LorentzMatrix> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut e1 = vec![0.0; n];
    let mut e2 = vec![0.0; n];
    e1[0] = 1.0;
    e2[1] = 1.0;
    rotation_pi(&e1, &e2)
}

/// `Λ⁻¹ R Λ`.
pub fn conjugate_boost(lambda: &LorentzMatrix, r: &LorentzMatrix) -> LorentzMatrix {
    lambda.inverse().compose(r).compose(lambda)
}

/// Conformal action on `S^{n−1}`: `x ↦ y⃗ / y₀` with `y = Λ (1, x)`.
pub fn act_on_sphere(lambda: &LorentzMatrix, x: &[f64]) -> Result<Vec<f64>> {
    let n = lambda.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("point is off the unit sphere (|x| = {norm})")));
    }
    let m = &lambda.m;
    let row = |i: usize| m[(i, 0)] + (0..n).map(|j| m[(i, j + 1)] * x[j]).sum::<f64>();
    let y0 = row(0);
    if !(y0 > POLE_TOLERANCE) {
        return Err(Error::PoleAtInfinity { point: x.to_vec() });
    }
    Ok((1..=n).map(|i| row(i) / y0).collect())
}

/// Boost speed and factor that send the cap of angular radius `ε` onto a
/// hemisphere: `v = cos ε`, `γ = 1/sin ε`.
pub fn cap_velocity(eps: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps <= std::f64::consts::FRAC_PI_2) {
        return Err(Error::InvalidParameter(format!("cap angle {eps} must lie in (0, π/2]")));
    }
    let (s, c) = eps.sin_cos();
    let v = if eps == std::f64::consts::FRAC_PI_2 { 0.0 } else { c };
    Ok((v, 1.0 / s))
}

pub fn act_on_momentum(lambda: &LorentzMatrix, m: &EnergyMomentum) -> Result<EnergyMomentum> {
    if m.dim() != lambda.dim() {
        return Err(Error::DimensionMismatch {
            expected: lambda.dim(),
            found: m.dim(),
        });
    }
    EnergyMomentum::from_vector(&(&lambda.m * m.to_vector()))
}
