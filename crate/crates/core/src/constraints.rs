//! Constraint operator, dominant energy condition, spacelike graphs in
//! Minkowski space, and the operators used to glue initial data while
//! keeping track of the energy condition.
//!
//! Conventions: `ρ = (R − |K|²_g + (tr_g K)² − 2Λ)/2` and
//! `J_j = ∇ⁱ(K_ij − tr_g K g_ij) = gⁱᵏ∇_k K_ij − ∂_j tr_g K`. With the
//! dictionary `ρ ≡ 2μ − 2Λ` and `2 J^i_{CH} = gⁱʲ J_j` these are the energy
//! and momentum densities of Corvino–Huang up to fixed positive factors, so
//! the dominant energy condition reads `ρ ≥ |J|_g` (coupling `κ = 1`).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chart::{Chart, ChartPoint};
use crate::error::{Error, Result};
use crate::geometry::ricci_from_jet;
use crate::models::{hyperbolic_metric, norm_sq};
use crate::quadrature::gauss_legendre;
use crate::scalar::{Scalar, MAX_DIM};
use crate::tensor::{
    covector_jet, sym_jet, Analytic, Blend, Combination, CovectorField, Derivatives, MetricField,
    ScalarField, SymTensor2, SymTensorExpr, SymTensorField, ZeroTensor,
};

/// Cosmological constant of the asymptotically hyperbolic setting,
/// `−n(n−1)/2`.
pub fn hyperbolic_lambda(n: usize) -> f64 {
    let nf = n as f64;
    -nf * (nf - 1.0) / 2.0
}

/// `(g, K)` on a chart region together with a cosmological constant.
#[derive(Clone)]
pub struct InitialDataSet {
    pub metric: Arc<dyn MetricField>,
    pub k: Arc<dyn SymTensorField>,
    pub lambda: f64,
}

impl InitialDataSet {
    pub fn new(metric: Arc<dyn MetricField>, k: Arc<dyn SymTensorField>, lambda: f64) -> Result<Self> {
        if metric.chart() != k.chart() {
            return Err(Error::ChartMismatch {
                expected: metric.chart(),
                found: k.chart(),
            });
        }
        if metric.dim() != k.dim() {
            return Err(Error::DimensionMismatch {
                expected: metric.dim(),
                found: k.dim(),
            });
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter("cosmological constant must be finite".into()));
        }
        Ok(InitialDataSet { metric, k, lambda })
    }

    /// `(g, 0, Λ)`.
    pub fn time_symmetric(metric: Arc<dyn MetricField>, lambda: f64) -> Result<Self> {
        let zero = Arc::new(Analytic(ZeroTensor {
            dim: metric.dim(),
            chart: metric.chart(),
        }));
        Self::new(metric, zero, lambda)
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn chart(&self) -> Chart {
        self.metric.chart()
    }
}

/// Energy density, momentum density and `|J|_g` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintValues {
    pub rho: f64,
    pub j: DVector<f64>,
    pub j_norm: f64,
}

fn covector_norm(ginv: &DMatrix<f64>, j: &DVector<f64>) -> f64 {
    (j.transpose() * ginv * j)[(0, 0)].max(0.0).sqrt()
}

pub fn constraint_operator(data: &InitialDataSet, p: &ChartPoint) -> Result<ConstraintValues> {
    constraint_operator_with(data, p, Derivatives::Auto)
}

pub fn constraint_operator_with(
    data: &InitialDataSet,
    p: &ChartPoint,
    mode: Derivatives,
) -> Result<ConstraintValues> {
    let n = data.dim();
    let x = p.coords();
    let gjet = sym_jet(data.metric.as_ref(), p, mode)?;
    let (ric, conn) = ricci_from_jet(&gjet, x)?;
    let ginv = &conn.ginv;
    let kjet = sym_jet(data.k.as_ref(), p, mode)?;
    let k = &kjet.value;
    let mixed = ginv * k;
    let tr = mixed.trace();
    let norm2 = (&mixed * &mixed).trace();
    let rho = (ric.scalar - norm2 + tr * tr - 2.0 * data.lambda) / 2.0;
    let gamma = &conn.gamma;
    let mut j = DVector::zeros(n);
    for jj in 0..n {
        // gⁱᵏ ∇_k K_ij
        let mut div = 0.0;
        for i in 0..n {
            for kk in 0..n {
                let a = ginv[(i, kk)];
                if a == 0.0 {
                    continue;
                }
                let mut cov = kjet.d1[kk][(i, jj)];
                for l in 0..n {
                    cov -= gamma.get(l, kk, i) * k[(l, jj)] + gamma.get(l, kk, jj) * k[(i, l)];
                }
                div += a * cov;
            }
        }
        // ∂_j (g^{ab} K_ab) with ∂g⁻¹ = −g⁻¹ ∂g g⁻¹
        let dginv = -(ginv * &gjet.d1[jj] * ginv);
        let dtr = dginv.component_mul(k).sum() + ginv.component_mul(&kjet.d1[jj]).sum();
        j[jj] = div - dtr;
    }
    let j_norm = covector_norm(ginv, &j);
    Ok(ConstraintValues { rho, j, j_norm })
}

/// Dominant energy condition `ρ ≥ |J|_g − tol`.
pub fn dec_check(cv: &ConstraintValues, tol: f64) -> bool {
    cv.rho >= cv.j_norm - tol
}

/// `(g, K, Λ = −n(n−1)/2) ↦ (g, K − g, 0)`.
///
/// `J` is unchanged since `∇g = 0`; `ρ` changes by `−(n−1) tr_g K`, so the
/// constraint values are preserved exactly when `tr_g K = 0`, in particular
/// for time-symmetric data.
pub fn ah_to_ae_shift(data: &InitialDataSet) -> Result<InitialDataSet> {
    let n = data.dim();
    let expected = hyperbolic_lambda(n);
    if (data.lambda - expected).abs() > 1e-12 * expected.abs() {
        return Err(Error::InvalidParameter(format!(
            "shift expects Λ = {expected}, found {}",
            data.lambda
        )));
    }
    let k = Combination::new(vec![(1.0, data.k.clone()), (-1.0, data.metric.clone())])?;
    InitialDataSet::new(data.metric.clone(), Arc::new(k), 0.0)
}

/// A time function `t = f(x)` on a region of ℝⁿ whose graph in Minkowski
/// space is a hypersurface. Derivatives are supplied as expressions so that
/// the induced data carry exact jets.
pub trait GraphProfile: Send + Sync {
    fn dim(&self) -> usize;
    fn height(&self, x: &[f64]) -> f64;
    fn gradient<S: Scalar>(&self, x: &[S]) -> Vec<S>;
    /// Row-major `n × n`.
    fn hessian<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

/// Induced metric `δ − ∇f ∇fᵀ`.
pub struct GraphMetric<P>(pub Arc<P>);

/// Second fundamental form `Hess f / √(1 − |∇f|²)` with respect to the
/// future-pointing unit normal.
pub struct GraphSecondForm<P>(pub Arc<P>);

impl<P: GraphProfile> SymTensorExpr for GraphMetric<P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn chart(&self) -> Chart {
        Chart::Euclidean
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.0.dim();
        let df = self.0.gradient(x);
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let d = if i == j { 1.0 } else { 0.0 };
                out.push(-(df[i] * df[j]) + d);
            }
        }
        out
    }
}

impl<P: GraphProfile> SymTensorExpr for GraphSecondForm<P> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn chart(&self) -> Chart {
        Chart::Euclidean
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let df = self.0.gradient(x);
        let lapse = (S::cst(1.0) - norm_sq(&df)).sqrt().recip();
        self.0.hessian(x).into_iter().map(|h| h * lapse).collect()
    }
}

fn slope_at<P: GraphProfile>(profile: &P, x: &[f64]) -> f64 {
    norm_sq(&profile.gradient(x)).sqrt()
}

/// Induced metric and second fundamental form of the graph at `p`.
pub fn graph_data<P: GraphProfile>(profile: &P, p: &ChartPoint) -> Result<(SymTensor2, SymTensor2)> {
    if p.chart() != Chart::Euclidean || p.dim() != profile.dim() {
        return Err(Error::ChartMismatch {
            expected: Chart::Euclidean,
            found: p.chart(),
        });
    }
    let x = p.coords();
    let slope = slope_at(profile, x);
    if !(slope < 1.0) {
        return Err(Error::NotSpacelike {
            coords: x.to_vec(),
            slope,
        });
    }
    let n = x.len();
    let df = profile.gradient(x);
    let hess = profile.hessian(x);
    let lapse = 1.0 / (1.0 - slope * slope).sqrt();
    Ok((
        SymTensor2::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 } - df[i] * df[j]),
        SymTensor2::from_fn(n, |i, j| hess[i * n + j] * lapse),
    ))
}

/// Vacuum data `(δ − ∇f∇fᵀ, Hess f/√(1 − |∇f|²), Λ = 0)` induced on the graph.
pub fn graph_initial_data<P: GraphProfile + 'static>(profile: P) -> Result<InitialDataSet> {
    let p = Arc::new(profile);
    InitialDataSet::new(
        Arc::new(Analytic(GraphMetric(p.clone()))),
        Arc::new(Analytic(GraphSecondForm(p))),
        0.0,
    )
}

fn check_graph_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// `f ≡ c`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantGraph {
    pub dim: usize,
    pub value: f64,
}

impl GraphProfile for ConstantGraph {
    fn dim(&self) -> usize {
        self.dim
    }
    fn height(&self, _x: &[f64]) -> f64 {
        self.value
    }
    fn gradient<S: Scalar>(&self, _x: &[S]) -> Vec<S> {
        vec![S::cst(0.0); self.dim]
    }
    fn hessian<S: Scalar>(&self, _x: &[S]) -> Vec<S> {
        vec![S::cst(0.0); self.dim * self.dim]
    }
}

/// The lower unit hyperboloid `t = −√(1 + |x|²)`.
#[derive(Debug, Clone, Copy)]
pub struct HyperboloidGraph {
    pub dim: usize,
}

fn hyperboloid_gradient<S: Scalar>(x: &[S]) -> Vec<S> {
    let s = (norm_sq(x) + 1.0).sqrt().recip();
    x.iter().map(|&v| -(v * s)).collect()
}

fn hyperboloid_hessian<S: Scalar>(x: &[S]) -> Vec<S> {
    let n = x.len();
    let q = norm_sq(x) + 1.0;
    let s = q.sqrt().recip();
    let s3 = s * s * s;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { q } else { S::cst(0.0) };
            out.push(-((d - x[i] * x[j]) * s3));
        }
    }
    out
}

impl GraphProfile for HyperboloidGraph {
    fn dim(&self) -> usize {
        self.dim
    }
    fn height(&self, x: &[f64]) -> f64 {
        -(1.0 + norm_sq(x)).sqrt()
    }
    fn gradient<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        hyperboloid_gradient(x)
    }
    fn hessian<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        hyperboloid_hessian(x)
    }
}

/// `f(x) = Σ_k a_k sin(ω_k·x + φ_k)` with `Σ |a_k||ω_k| = slope_bound`, so
/// `|∇f| ≤ slope_bound` everywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigGraph {
    dim: usize,
    amplitudes: Vec<f64>,
    frequencies: Vec<Vec<f64>>,
    phases: Vec<f64>,
}

impl TrigGraph {
    pub fn random(n: usize, modes: usize, slope_bound: f64, seed: u64) -> Result<Self> {
        check_graph_dim(n)?;
        if !(slope_bound > 0.0 && slope_bound < 1.0) || modes == 0 {
            return Err(Error::InvalidParameter(
                "trigonometric graph needs modes > 0 and a slope bound in (0, 1)".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amplitudes: Vec<f64> = (0..modes).map(|_| rng.random_range(-1.0..1.0)).collect();
        let frequencies: Vec<Vec<f64>> = (0..modes)
            .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let phases = (0..modes).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        let bound: f64 = amplitudes
            .iter()
            .zip(&frequencies)
            .map(|(a, w)| a.abs() * norm_sq(w).sqrt())
            .sum();
        if bound > 0.0 {
            for a in amplitudes.iter_mut() {
                *a *= slope_bound / bound;
            }
        }
        Ok(TrigGraph {
            dim: n,
            amplitudes,
            frequencies,
            phases,
        })
    }

    fn phase<S: Scalar>(&self, k: usize, x: &[S]) -> S {
        x.iter()
            .zip(&self.frequencies[k])
            .fold(S::cst(self.phases[k]), |acc, (&xi, &w)| acc + xi * w)
    }
}

impl GraphProfile for TrigGraph {
    fn dim(&self) -> usize {
        self.dim
    }
    fn height(&self, x: &[f64]) -> f64 {
        (0..self.amplitudes.len())
            .map(|k| self.amplitudes[k] * self.phase(k, x).sin())
            .sum()
    }
    fn gradient<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut out = vec![S::cst(0.0); self.dim];
        for k in 0..self.amplitudes.len() {
            let c = self.phase(k, x).cos() * self.amplitudes[k];
            for (o, &w) in out.iter_mut().zip(&self.frequencies[k]) {
                *o = *o + c * w;
            }
        }
        out
    }
    fn hessian<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim;
        let mut out = vec![S::cst(0.0); n * n];
        for k in 0..self.amplitudes.len() {
            let s = self.phase(k, x).sin() * -self.amplitudes[k];
            let w = &self.frequencies[k];
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = out[i * n + j] + s * (w[i] * w[j]);
                }
            }
        }
        out
    }
}

/// Radial profile equal to the hyperboloid for `|x| ≤ R + 1` and constant
/// for `|x| ≥ R + 1 + L`.
///
/// The slope is blended, `F′(r) = (1 − s(t)) h′(r)` with `h = −√(1 + r²)`,
/// `t = (r − R − 1)/L` and the quintic smoothstep `s`, so `|F′| ≤ |h′| < 1`
/// throughout; the height past `R + 1` is the integral of `F′`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatingGraph {
    dim: usize,
    inner: f64,
    width: f64,
    plateau: f64,
}

/// Transition width `L` used by [`InterpolatingGraph::new`].
pub const DEFAULT_TRANSITION_WIDTH: f64 = 2.0;

/// Required spacelike margin: `|∇f| ≤ 1 − SPACELIKE_MARGIN`.
pub const SPACELIKE_MARGIN: f64 = 1e-3;

fn quintic_step<S: Scalar>(t: S) -> (S, S) {
    // s = 10t³ − 15t⁴ + 6t⁵, s′ = 30t²(1 − t)²
    let t2 = t.square();
    let s = t2 * t * ((t * 6.0 - 15.0) * t + 10.0);
    let ds = t2 * (S::cst(1.0) - t).square() * 30.0;
    (s, ds)
}

impl InterpolatingGraph {
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        Self::with_width(n, radius, DEFAULT_TRANSITION_WIDTH)
    }

    pub fn with_width(n: usize, radius: f64, width: f64) -> Result<Self> {
        check_graph_dim(n)?;
        if !(radius > 0.0) || !(width > 0.0) || !radius.is_finite() || !width.is_finite() {
            return Err(Error::InvalidParameter(
                "interpolating graph needs R > 0 and a positive transition width".into(),
            ));
        }
        let mut g = InterpolatingGraph {
            dim: n,
            inner: radius + 1.0,
            width,
            plateau: 0.0,
        };
        g.plateau = g.radial_height(g.inner + width);
        g.check_spacelike(4000)?;
        Ok(g)
    }

    /// Constant value taken for `|x| ≥ R + 1 + L`.
    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn outer_radius(&self) -> f64 {
        self.inner + self.width
    }

    /// `(F′, F″)` at radius `r`.
    fn radial_derivatives<S: Scalar>(&self, r: S) -> (S, S) {
        let q = r.square() + 1.0;
        let h1 = -(r / q.sqrt());
        let h2 = -(q.sqrt() * q).recip();
        let rv = r.value();
        if rv <= self.inner {
            (h1, h2)
        } else if rv >= self.inner + self.width {
            (S::cst(0.0), S::cst(0.0))
        } else {
            let t = (r - self.inner) / self.width;
            let (s, ds) = quintic_step(t);
            let keep = S::cst(1.0) - s;
            (keep * h1, keep * h2 - ds * h1 / self.width)
        }
    }

    fn radial_height(&self, r: f64) -> f64 {
        if r <= self.inner {
            return -(1.0 + r * r).sqrt();
        }
        let top = r.min(self.inner + self.width);
        let (nodes, weights) = gauss_legendre(48);
        let half = 0.5 * (top - self.inner);
        let mid = 0.5 * (top + self.inner);
        let integral: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| w * half * self.radial_derivatives(mid + half * t).0)
            .sum();
        -(1.0 + self.inner * self.inner).sqrt() + integral
    }

    /// Largest `|F′|` on a uniform radial grid out to one unit past the
    /// plateau; fails if it comes within the spacelike margin of 1.
    pub fn check_spacelike(&self, samples: usize) -> Result<f64> {
        let top = self.inner + self.width + 1.0;
        let mut worst = 0.0f64;
        for k in 0..=samples {
            let r = top * k as f64 / samples as f64;
            let slope = self.radial_derivatives(r).0.abs();
            if slope > 1.0 - SPACELIKE_MARGIN {
                return Err(Error::ConstructionFailed { radius: r, slope });
            }
            worst = worst.max(slope);
        }
        Ok(worst)
    }
}

impl GraphProfile for InterpolatingGraph {
    fn dim(&self) -> usize {
        self.dim
    }
    fn height(&self, x: &[f64]) -> f64 {
        self.radial_height(norm_sq(x).sqrt())
    }
    fn gradient<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let r = norm_sq(x).sqrt();
        if r.value() <= self.inner {
            return hyperboloid_gradient(x);
        }
        let (d1, _) = self.radial_derivatives(r);
        x.iter().map(|&v| v * d1 / r).collect()
    }
    fn hessian<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim;
        let r = norm_sq(x).sqrt();
        if r.value() <= self.inner {
            return hyperboloid_hessian(x);
        }
        let (d1, d2) = self.radial_derivatives(r);
        let tangential = d1 / r;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let radial = x[i] * x[j] / r.square();
                let d = if i == j { S::cst(1.0) } else { S::cst(0.0) };
                out.push(radial * d2 + (d - radial) * tangential);
            }
        }
        out
    }
}

/// Change of the constraint values, `(δρ, δJ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintDelta {
    pub rho: f64,
    pub j: DVector<f64>,
}

impl ConstraintDelta {
    pub fn max_abs(&self) -> f64 {
        self.j.amax().max(self.rho.abs())
    }
}

/// A perturbation `(δK, δg)` of initial data.
#[derive(Clone)]
pub struct Perturbation {
    pub dk: Arc<dyn SymTensorField>,
    pub dg: Arc<dyn SymTensorField>,
}

fn perturbed(data: &InitialDataSet, delta: &Perturbation, t: f64) -> Result<InitialDataSet> {
    let g = Combination::new(vec![(1.0, data.metric.clone()), (t, delta.dg.clone())])?;
    let k = Combination::new(vec![(1.0, data.k.clone()), (t, delta.dk.clone())])?;
    InitialDataSet::new(Arc::new(g), Arc::new(k), data.lambda)
}

/// `C^W(δK, δg) = C(K + δK, g + δg) − C(K, g) − ½(δg·(J + W), 0)`, with
/// `(δg·Z)_i = δg_ij gʲᵏ Z_k` and `J = J(K, g)`.
pub fn modified_constraint(
    data: &InitialDataSet,
    delta: &Perturbation,
    w: &dyn CovectorField,
    p: &ChartPoint,
) -> Result<ConstraintDelta> {
    modified_constraint_scaled(data, delta, 1.0, w, p, Derivatives::Auto)
}

fn modified_constraint_scaled(
    data: &InitialDataSet,
    delta: &Perturbation,
    t: f64,
    w: &dyn CovectorField,
    p: &ChartPoint,
    mode: Derivatives,
) -> Result<ConstraintDelta> {
    let base = constraint_operator_with(data, p, mode)?;
    let moved = constraint_operator_with(&perturbed(data, delta, t)?, p, mode)?;
    let x = p.coords();
    let ginv = crate::geometry::inverse_metric(&data.metric.value(x), x)?;
    let wv = covector_jet(w, p, mode)?.value;
    let dg = delta.dg.value(x) * t;
    let shift = &dg * (&ginv * (&base.j + wv));
    Ok(ConstraintDelta {
        rho: moved.rho - base.rho,
        j: moved.j - base.j - shift * 0.5,
    })
}

/// Central difference of `t ↦ C^W(t δK, t δg)` at `t = 0` with step `h`;
/// approximates the linearisation `P^W(δK, δg)` with error `O(h²)`.
pub fn linearized_modified_constraint(
    data: &InitialDataSet,
    delta: &Perturbation,
    w: &dyn CovectorField,
    p: &ChartPoint,
    h: f64,
) -> Result<ConstraintDelta> {
    let plus = modified_constraint_scaled(data, delta, h, w, p, Derivatives::Auto)?;
    let minus = modified_constraint_scaled(data, delta, -h, w, p, Derivatives::Auto)?;
    Ok(ConstraintDelta {
        rho: (plus.rho - minus.rho) / (2.0 * h),
        j: (plus.j - minus.j) / (2.0 * h),
    })
}

/// `(δJ, δρ) = χ C(K₁, g₁) + (1 − χ) C(K₂, g₂) − C(K, g) + (0, (δρ)₀)` with
/// `g = χg₁ + (1 − χ)g₂`, `K = χK₁ + (1 − χ)K₂`.
pub fn interpolation_mismatch(
    first: &InitialDataSet,
    second: &InitialDataSet,
    chi: Arc<dyn ScalarField>,
    slack: f64,
    p: &ChartPoint,
) -> Result<ConstraintDelta> {
    if first.lambda != second.lambda {
        return Err(Error::InvalidParameter(
            "interpolated data must share the cosmological constant".into(),
        ));
    }
    let c = chi.value(p.coords());
    let c1 = constraint_operator(first, p)?;
    let c2 = constraint_operator(second, p)?;
    let blend = InitialDataSet::new(
        Arc::new(Blend {
            cutoff: chi.clone(),
            first: first.metric.clone(),
            second: second.metric.clone(),
        }),
        Arc::new(Blend {
            cutoff: chi,
            first: first.k.clone(),
            second: second.k.clone(),
        }),
        first.lambda,
    )?;
    let cb = constraint_operator(&blend, p)?;
    Ok(ConstraintDelta {
        rho: c * c1.rho + (1.0 - c) * c2.rho - cb.rho + slack,
        j: c1.j * c + c2.j * (1.0 - c) - cb.j,
    })
}

/// `(δρ)₀ = c χ(1 − χ) z^σ`.
pub fn slack_function(chi: f64, z: f64, sigma: f64, c: f64) -> f64 {
    c * chi * (1.0 - chi) * z.powf(sigma)
}

/// Right-hand side of the slack inequality,
/// `χ(1 − χ)(|g₁ − g₂|_{g₁}|J₁|_{g₁} + |g₁ − g₂|_{g₂}|J₂|_{g₂})`.
pub fn slack_requirement(
    first: &InitialDataSet,
    second: &InitialDataSet,
    chi: f64,
    p: &ChartPoint,
) -> Result<f64> {
    let x = p.coords();
    let g1 = first.metric.value(x);
    let g2 = second.metric.value(x);
    let diff = SymTensor2::from_matrix(&(&g1 - &g2));
    let i1 = crate::geometry::inverse_metric(&g1, x)?;
    let i2 = crate::geometry::inverse_metric(&g2, x)?;
    let j1 = constraint_operator(first, p)?.j;
    let j2 = constraint_operator(second, p)?.j;
    Ok(chi
        * (1.0 - chi)
        * (diff.norm_with(&i1) * covector_norm(&i1, &j1) + diff.norm_with(&i2) * covector_norm(&i2, &j2)))
}

/// Half-space data `g = (1 + (λz)^σ a(w)) b`, `K = (λz)^σ k(w) b` with
/// seeded smooth coefficients: a member of the rescaled families whose
/// metric differences and momentum densities are `O((λz)^σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaledData {
    dim: usize,
    lambda: f64,
    sigma: f64,
    metric_coeff: [f64; 3],
    k_coeff: [f64; 3],
}

impl RescaledData {
    pub fn random(n: usize, lambda: f64, sigma: f64, seed: u64) -> Result<Self> {
        if !(3..=MAX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(lambda > 0.0) || !(sigma > 0.0) {
            return Err(Error::InvalidParameter("λ and σ must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        Ok(RescaledData {
            dim: n,
            lambda,
            sigma,
            metric_coeff: draw(),
            k_coeff: draw(),
        })
    }

    pub fn initial_data(&self) -> Result<InitialDataSet> {
        InitialDataSet::new(
            Arc::new(Analytic(RescaledPart { data: *self, metric: true })),
            Arc::new(Analytic(RescaledPart { data: *self, metric: false })),
            hyperbolic_lambda(self.dim),
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct RescaledPart {
    data: RescaledData,
    metric: bool,
}

impl SymTensorExpr for RescaledPart {
    fn dim(&self) -> usize {
        self.data.dim
    }
    fn chart(&self) -> Chart {
        Chart::HalfSpace
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.data.dim;
        let z = x[n - 1];
        let c = if self.metric { self.data.metric_coeff } else { self.data.k_coeff };
        let weight = (z * self.data.lambda).powf(self.data.sigma);
        let coeff = (x[0] * c[1]).sin() + (x[1] * c[2]).cos() * 0.5 + c[0];
        let f = weight * coeff;
        let s = if self.metric { f + 1.0 } else { f };
        let b = z.square().recip();
        (0..n * n)
            .map(|k| if k / n == k % n { s * b } else { S::cst(0.0) })
            .collect()
    }
}

/// Slack constant `c = c′ λ^{σ′}`.
pub fn slack_constant(c_prime: f64, lambda: f64, sigma_prime: f64) -> f64 {
    c_prime * lambda.powf(sigma_prime)
}

/// Outcome of checking the slack inequality on a set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackCheck {
    pub holds: bool,
    /// Smallest `(δρ)₀ − requirement` over the grid.
    pub worst_margin: f64,
    /// Smallest `(δρ)₀ / requirement` over points with a positive
    /// requirement; infinite if there are none.
    pub worst_ratio: f64,
    pub points: usize,
}

/// Checks `(δρ)₀ ≥ requirement` at each half-space point.
pub fn check_slack(
    first: &InitialDataSet,
    second: &InitialDataSet,
    chi: &dyn ScalarField,
    sigma: f64,
    c: f64,
    points: &[ChartPoint],
) -> Result<SlackCheck> {
    let mut worst = f64::INFINITY;
    let mut ratio = f64::INFINITY;
    for p in points {
        if p.chart() != Chart::HalfSpace {
            return Err(Error::ChartMismatch {
                expected: Chart::HalfSpace,
                found: p.chart(),
            });
        }
        let x = p.coords();
        let chi_v = chi.value(x);
        let slack = slack_function(chi_v, x[x.len() - 1], sigma, c);
        let need = slack_requirement(first, second, chi_v, p)?;
        worst = worst.min(slack - need);
        if need > 0.0 {
            ratio = ratio.min(slack / need);
        }
    }
    Ok(SlackCheck {
        holds: worst >= 0.0,
        worst_margin: worst,
        worst_ratio: ratio,
        points: points.len(),
    })
}

/// One row of a constraint sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub coords: Vec<f64>,
    pub rho: f64,
    pub j_norm: f64,
    pub dec: bool,
}

pub fn constraint_sweep(data: &InitialDataSet, points: &[ChartPoint], tol: f64) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    points
        .par_iter()
        .map(|p| {
            let cv = constraint_operator(data, p)?;
            Ok(SweepRow {
                coords: p.coords().to_vec(),
                rho: cv.rho,
                j_norm: cv.j_norm,
                dec: dec_check(&cv, tol),
            })
        })
        .collect()
}

/// CSV with columns `x0..x{n−1},rho,j_norm,dec`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let n = rows.first().map_or(0, |r| r.coords.len());
    let mut out = String::new();
    for i in 0..n {
        let _ = write!(out, "x{i},");
    }
    out.push_str("rho,j_norm,dec\n");
    for r in rows {
        for c in &r.coords {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{},{},{}", r.rho, r.j_norm, u8::from(r.dec));
    }
    out
}

/// Hyperbolic data `(b, 0, −n(n−1)/2)` in a model chart.
pub fn hyperbolic_data(chart: Chart, n: usize) -> Result<InitialDataSet> {
    InitialDataSet::time_symmetric(Arc::new(hyperbolic_metric(chart, n)?), hyperbolic_lambda(n))
}

/// Smooth cutoff `χ = step((z − z₀)/w)` in the half-space height.
pub fn height_cutoff(n: usize, start: f64, width: f64) -> Analytic<crate::cutoff::CoordinateStep> {
    Analytic(crate::cutoff::CoordinateStep {
        dim: n,
        chart: Chart::HalfSpace,
        coordinate: n - 1,
        start,
        width,
    })
}
