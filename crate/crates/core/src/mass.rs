//! Energy-momentum of asymptotically hyperbolic metrics.
//!
//! The charge is the flux of the trace-free Ricci tensor contracted with the
//! dilation field, paired with the static potentials:
//!
//! ```text
//! m_μ = lim_{r→∞} ∫_{S(r)} −V_μ Zʲ (Rⁱ_j − (R/n) δⁱ_j) dσ_i
//! ```
//!
//! with the overall positive constant set to 1. Surfaces are coordinate
//! spheres of the ball model; a schedule radius `r` refers to the polar
//! radius, i.e. the ball sphere `|x| = r/(1 + √(1 + r²))`.

use std::fmt::Write as _;

use nalgebra::DVector;

use crate::chart::{Chart, ChartPoint};
use crate::error::{Error, Result};
use crate::geometry::ricci_from_jet;
use crate::models::{ball_factor, dilation_at, hyperbolic_metric, norm_sq, DecaySpec};
use crate::quadrature::{pairwise_sum, richardson, Hemisphere, SphereQuadrature};
use crate::cutoff::smooth_step;
use crate::scalar::{Scalar, MAX_DIM};
use crate::tensor::{sym_jet, Derivatives, MetricField, SymTensorExpr};

/// A vector `(m₀, m₁, …, m_n)` of `ℝ^{1,n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyMomentum {
    m: Vec<f64>,
}

impl EnergyMomentum {
    pub fn new(m: Vec<f64>) -> Result<Self> {
        if m.len() < 2 {
            return Err(Error::UnsupportedDimension(m.len().saturating_sub(1)));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite energy-momentum {m:?}")));
        }
        Ok(EnergyMomentum { m })
    }

    pub fn zero(n: usize) -> Self {
        EnergyMomentum { m: vec![0.0; n + 1] }
    }

    /// Spatial dimension `n`.
    pub fn dim(&self) -> usize {
        self.m.len() - 1
    }

    pub fn components(&self) -> &[f64] {
        &self.m
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.m)
    }

    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        Self::new(v.as_slice().to_vec())
    }

    pub fn energy(&self) -> f64 {
        self.m[0]
    }

    pub fn spatial(&self) -> &[f64] {
        &self.m[1..]
    }

    pub fn spatial_norm(&self) -> f64 {
        self.spatial().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Minkowski square `q = m₀² − |m⃗|²`.
    pub fn q(&self) -> f64 {
        self.m[0] * self.m[0] - self.spatial().iter().map(|v| v * v).sum::<f64>()
    }

    pub fn scaled(&self, c: f64) -> Self {
        EnergyMomentum {
            m: self.m.iter().map(|v| v * c).collect(),
        }
    }

    pub fn plus(&self, other: &EnergyMomentum) -> Self {
        EnergyMomentum {
            m: self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CausalCharacter {
    Zero,
    TimelikeFuture,
    TimelikePast,
    NullFuture,
    NullPast,
    Spacelike,
}

/// Classifies `m` by `q = m₀² − |m⃗|²` and the sign of `m₀`.
///
/// `m` is `Zero` when every component is at most `tol` in size. Otherwise it
/// is null when `|q| ≤ tol·(m₀² + |m⃗|²)`; the relative test makes the
/// classification invariant under positive rescaling.
pub fn causal_character(m: &EnergyMomentum, tol: f64) -> CausalCharacter {
    if m.max_abs() <= tol {
        return CausalCharacter::Zero;
    }
    let q = m.q();
    let scale = m.components().iter().map(|v| v * v).sum::<f64>();
    let future = m.energy() > 0.0;
    if q.abs() <= tol * scale {
        if future {
            CausalCharacter::NullFuture
        } else {
            CausalCharacter::NullPast
        }
    } else if q > 0.0 {
        if future {
            CausalCharacter::TimelikeFuture
        } else {
            CausalCharacter::TimelikePast
        }
    } else {
        CausalCharacter::Spacelike
    }
}

/// Mass aspect sampled at the nodes of a sphere rule.
#[derive(Debug, Clone, PartialEq)]
pub struct MassAspect {
    values: Vec<f64>,
}

impl MassAspect {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite mass aspect sample".into()));
        }
        Ok(MassAspect { values })
    }

    pub fn sample(quad: &SphereQuadrature, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new((0..quad.len()).map(|i| f(quad.node(i))).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// First-moment pairing: `m₀ = ∫ μ`, `m_i = ∫ μ xⁱ`.
pub fn momentum_from_aspect(aspect: &MassAspect, quad: &SphereQuadrature) -> Result<EnergyMomentum> {
    if aspect.values.len() != quad.len() {
        return Err(Error::DimensionMismatch {
            expected: quad.len(),
            found: aspect.values.len(),
        });
    }
    let n = quad.dim();
    let mut m = Vec::with_capacity(n + 1);
    let mut terms = vec![0.0; quad.len()];
    for c in 0..=n {
        for (i, t) in terms.iter_mut().enumerate() {
            let moment = if c == 0 { 1.0 } else { quad.node(i)[c - 1] };
            *t = quad.weight(i) * aspect.values[i] * moment;
        }
        m.push(pairwise_sum(&terms));
    }
    EnergyMomentum::new(m)
}

/// Relative size of extrapolant gaps treated as round-off.
const DIVERGENCE_FLOOR: f64 = 1e-6;

/// Radii at which sphere integrals are taken.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSchedule {
    radii: Vec<f64>,
}

impl Default for RadiusSchedule {
    /// `r_k = 2^k`, `k = 3..=8`.
    fn default() -> Self {
        RadiusSchedule {
            radii: (3..=8).map(|k| 2f64.powi(k)).collect(),
        }
    }
}

impl RadiusSchedule {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 {
            return Err(Error::InvalidParameter("radius schedule needs two radii".into()));
        }
        if radii[0] <= 0.0 || radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "radii must be positive and strictly increasing".into(),
            ));
        }
        Ok(RadiusSchedule { radii })
    }

    pub fn geometric(first_exponent: i32, last_exponent: i32) -> Result<Self> {
        Self::new((first_exponent..=last_exponent).map(|k| 2f64.powi(k)).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }
}

/// Ball-model radius of the coordinate sphere with polar radius `r`.
pub fn ball_radius(r: f64) -> f64 {
    r / (1.0 + (1.0 + r * r).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassOptions {
    pub derivatives: Derivatives,
    /// Subtract the numerically computed flux of the hyperbolic metric at
    /// the same point. The exact flux of `b` is zero, so this only cancels
    /// round-off shared by both evaluations.
    pub subtract_background: bool,
    /// Fall-off of `g − b`; fixes the leading Richardson exponent
    /// `σ − n/2`. Without it the exponent is 1.
    pub decay: Option<DecaySpec>,
    /// Number of correction terms in the extrapolation.
    pub terms: usize,
}

impl Default for MassOptions {
    fn default() -> Self {
        MassOptions {
            derivatives: Derivatives::Auto,
            subtract_background: true,
            decay: None,
            terms: 2,
        }
    }
}

/// `ν_i Tⁱ_j Zʲ √det g` at a ball point, with `ν = x/|x|`.
fn flux(g: &dyn MetricField, p: &ChartPoint, mode: Derivatives) -> Result<f64> {
    let x = p.coords();
    let n = x.len();
    let jet = sym_jet(g, p, mode)?;
    let (ric, conn) = ricci_from_jet(&jet, x)?;
    let t = ric.trace_free_mixed(&conn.ginv);
    let z = dilation_at(x);
    let rho = norm_sq(x).sqrt();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += x[i] * t[(i, j)] * z[j];
        }
    }
    Ok(s / rho * jet.value.determinant().sqrt())
}

/// Static potentials `V_μ = X_μ` at a ball point, `μ = 0..=n`.
fn kids_at(x: &[f64]) -> Vec<f64> {
    let rho2 = norm_sq(x);
    let d = 1.0 - rho2;
    let mut v = vec![(1.0 + rho2) / d];
    v.extend(x.iter().map(|xi| 2.0 * xi / d));
    v
}

fn integrand_all(g: &dyn MetricField, p: &ChartPoint, opts: &MassOptions) -> Result<Vec<f64>> {
    let mut f = flux(g, p, opts.derivatives)?;
    if opts.subtract_background {
        let b = hyperbolic_metric(Chart::PoincareBall, p.dim())?;
        f -= flux(&b, p, opts.derivatives)?;
    }
    Ok(kids_at(p.coords()).into_iter().map(|v| -v * f).collect())
}

fn check_ball_metric(g: &dyn MetricField) -> Result<()> {
    if g.chart() != Chart::PoincareBall {
        return Err(Error::ChartMismatch {
            expected: Chart::PoincareBall,
            found: g.chart(),
        });
    }
    Ok(())
}

/// Integrand of the mass at a ball point for the potential `V_μ`, as a
/// density with respect to Euclidean area on the coordinate sphere through
/// `p`.
pub fn mass_integrand(g: &dyn MetricField, p: &ChartPoint, mu: usize) -> Result<f64> {
    mass_integrand_with(g, p, mu, &MassOptions::default())
}

pub fn mass_integrand_with(
    g: &dyn MetricField,
    p: &ChartPoint,
    mu: usize,
    opts: &MassOptions,
) -> Result<f64> {
    check_ball_metric(g)?;
    if mu > g.dim() {
        return Err(Error::InvalidParameter(format!("KID index {mu} out of range")));
    }
    if norm_sq(p.coords()) == 0.0 {
        return Err(Error::InvalidParameter("mass integrand needs a point off the centre".into()));
    }
    Ok(integrand_all(g, p, opts)?[mu])
}

/// Sphere integrals at one radius.
pub fn sphere_integral(
    g: &dyn MetricField,
    quad: &SphereQuadrature,
    r: f64,
    opts: &MassOptions,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    check_ball_metric(g)?;
    let n = g.dim();
    if quad.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: quad.dim(),
        });
    }
    let rho = ball_radius(r);
    let area = rho.powi(n as i32 - 1);
    let integral = quad.integrate(n + 1, |u| {
        let x: Vec<f64> = u.iter().map(|v| rho * v).collect();
        let p = ChartPoint::ball(&x)?;
        Ok(integrand_all(g, &p, opts)?.into_iter().map(|v| v * area).collect())
    })?;
    Ok((integral.value, integral.std_error))
}

/// Per-radius record of a mass computation.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusRow {
    pub radius: f64,
    pub values: Vec<f64>,
    pub extrapolants: Vec<f64>,
    pub std_error: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassResult {
    pub m: EnergyMomentum,
    /// Difference of the last two extrapolants, per component.
    pub error: Vec<f64>,
    pub rows: Vec<RadiusRow>,
}

impl MassResult {
    pub fn max_error(&self) -> f64 {
        self.error.iter().fold(0.0, |a, v| a.max(*v))
    }

    /// Convergence table as CSV: `radius,m0..mn,ext0..extn`.
    pub fn to_csv(&self) -> String {
        let k = self.m.components().len();
        let mut out = String::from("radius");
        for c in 0..k {
            let _ = write!(out, ",m{c}");
        }
        for c in 0..k {
            let _ = write!(out, ",ext{c}");
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{}", row.radius);
            for v in row.values.iter().chain(&row.extrapolants) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Extrapolated energy-momentum over the full sphere.
pub fn energy_momentum(
    g: &dyn MetricField,
    quad: &SphereQuadrature,
    sched: &RadiusSchedule,
    opts: &MassOptions,
) -> Result<MassResult> {
    let n = g.dim();
    let p = match opts.decay {
        Some(d) => d.sigma - n as f64 / 2.0,
        None => 1.0,
    };
    let mut values = Vec::with_capacity(sched.radii.len());
    let mut errors = Vec::with_capacity(sched.radii.len());
    for &r in &sched.radii {
        let (v, se) = sphere_integral(g, quad, r, opts)?;
        values.push(v);
        errors.push(se);
    }
    let mut m = Vec::with_capacity(n + 1);
    let mut error = Vec::with_capacity(n + 1);
    let mut ext = Vec::with_capacity(n + 1);
    // gaps below this are round-off in the small components, not divergence
    let scale = values.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
    let floor = DIVERGENCE_FLOOR * scale.max(1.0);
    for c in 0..=n {
        let series: Vec<f64> = values.iter().map(|v| v[c]).collect();
        let e = richardson(&sched.radii, &series, p, opts.terms, floor)?;
        m.push(e.value);
        error.push(e.error);
        ext.push(e.extrapolants);
    }
    let rows = sched
        .radii
        .iter()
        .enumerate()
        .map(|(k, &radius)| RadiusRow {
            radius,
            values: values[k].clone(),
            extrapolants: ext.iter().map(|e| e[k]).collect(),
            std_error: errors[k].clone(),
        })
        .collect();
    Ok(MassResult {
        m: EnergyMomentum::new(m)?,
        error,
        rows,
    })
}

/// The same integral restricted to one hemisphere of the coordinate
/// spheres (`xⁿ > 0` or `xⁿ < 0` in the ball chart).
pub fn hemisphere_energy_momentum(
    g: &dyn MetricField,
    quad: &SphereQuadrature,
    sched: &RadiusSchedule,
    half: Hemisphere,
    opts: &MassOptions,
) -> Result<MassResult> {
    energy_momentum(g, &quad.restrict(half), sched, opts)
}

fn check_family_dim(n: usize) -> Result<()> {
    if (3..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// Schwarzschild–anti-de Sitter `dr²/F + r² h̊`, `F = 1 + r² − 2m r^{2−n}`,
/// written in the ball chart:
/// `g = c (δ + 2m r^{−n} c/F · x xᵀ)` with `c = 4/(1 − |x|²)²`.
/// Only meaningful outside the horizon, where `F > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzschildAds {
    pub dim: usize,
    pub mass: f64,
}

impl SchwarzschildAds {
    pub fn new(n: usize, mass: f64) -> Result<Self> {
        check_family_dim(n)?;
        if !mass.is_finite() {
            return Err(Error::InvalidParameter("mass parameter must be finite".into()));
        }
        Ok(SchwarzschildAds { dim: n, mass })
    }
}

impl SymTensorExpr for SchwarzschildAds {
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart(&self) -> Chart {
        Chart::PoincareBall
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim;
        let c = ball_factor(x);
        let rho2 = norm_sq(x);
        let r = rho2.sqrt() * 2.0 / (S::cst(1.0) - rho2);
        let rn = r.powi(-(n as i32));
        let f = r.square() + 1.0 - r.powi(2 - n as i32) * (2.0 * self.mass);
        let k = rn * c / f * (2.0 * self.mass);
        let mut out = vec![S::cst(0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { S::cst(1.0) } else { S::cst(0.0) };
                out[i * n + j] = c * (delta + k * x[i] * x[j]);
            }
        }
        out
    }
}

/// `g = c (δ + t (1 − |x|²)^σ (1 + a·x) χ S)` on the ball: a perturbation of
/// `b` with `|g − b|_b = O(r^{−σ})`. `χ = 1`, or, with a lower cutoff of
/// width `w`, the smooth step in `−xⁿ/w` that vanishes identically on
/// `xⁿ ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedHyperbolic {
    dim: usize,
    amplitude: f64,
    sigma: f64,
    tilt: Vec<f64>,
    shape: Vec<f64>,
    lower_cutoff: Option<f64>,
}

impl PerturbedHyperbolic {
    /// `shape` is a symmetric `n × n` matrix in row-major order.
    pub fn new(n: usize, amplitude: f64, sigma: f64, tilt: Vec<f64>, shape: Vec<f64>) -> Result<Self> {
        check_family_dim(n)?;
        if tilt.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: tilt.len(),
            });
        }
        if shape.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: shape.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if shape[i * n + j] != shape[j * n + i] {
                    return Err(Error::InvalidParameter("perturbation shape must be symmetric".into()));
                }
            }
        }
        if !(sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("fall-off exponent {sigma} must be positive")));
        }
        Ok(PerturbedHyperbolic {
            dim: n,
            amplitude,
            sigma,
            tilt,
            shape,
            lower_cutoff: None,
        })
    }

    /// Restricts the perturbation to `xⁿ < 0`.
    pub fn supported_below(mut self, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidParameter("cutoff width must be positive".into()));
        }
        self.lower_cutoff = Some(width);
        Ok(self)
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Self {
        PerturbedHyperbolic {
            amplitude,
            ..self.clone()
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl SymTensorExpr for PerturbedHyperbolic {
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart(&self) -> Chart {
        Chart::PoincareBall
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim;
        let c = ball_factor(x);
        let chi = match self.lower_cutoff {
            None => S::cst(1.0),
            Some(w) => smooth_step(-x[n - 1] / w),
        };
        let tilt = (0..n).fold(S::cst(1.0), |acc, i| acc + x[i] * self.tilt[i]);
        let profile =
            (S::cst(1.0) - norm_sq(x)).powf(self.sigma) * tilt * chi * self.amplitude;
        let mut out = vec![S::cst(0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { S::cst(1.0) } else { S::cst(0.0) };
                out[i * n + j] = c * (delta + profile * self.shape[i * n + j]);
            }
        }
        out
    }
}
