//! Tensor fields on a chart and their derivative jets.
//!
//! A field either supplies exact derivatives (through [`Analytic`], which
//! evaluates a generic expression on [`Jet`] scalars) or only values, in
//! which case derivatives come from 4th-order central differences.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::chart::{Chart, ChartPoint};
use crate::error::{Error, Result};
use crate::scalar::{Jet, Scalar};

/// Symmetric 2-tensor at a point, stored as its upper triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor2 {
    n: usize,
    upper: Vec<f64>,
}

impl SymTensor2 {
    pub fn zeros(n: usize) -> Self {
        SymTensor2 {
            n,
            upper: vec![0.0; n * (n + 1) / 2],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let k = t.index(i, j);
                t.upper[k] = f(i, j);
            }
        }
        t
    }

    /// Symmetrises `m` by averaging it with its transpose.
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        a * self.n - a * (a + 1) / 2 + b
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.index(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn scale(&self, c: f64) -> Self {
        SymTensor2 {
            n: self.n,
            upper: self.upper.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &SymTensor2) -> Self {
        SymTensor2 {
            n: self.n,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &SymTensor2) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `g^{ij} T_{ij}`.
    pub fn trace_with(&self, ginv: &DMatrix<f64>) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += ginv[(i, j)] * self.get(i, j);
            }
        }
        s
    }

    /// Pointwise norm `|T|_g = (g^{ik} g^{jl} T_{ij} T_{kl})^{1/2}`.
    pub fn norm_with(&self, ginv: &DMatrix<f64>) -> f64 {
        let t = self.to_matrix();
        let raised = ginv * &t * ginv;
        t.component_mul(&raised).sum().max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdStep {
    /// Step as a fraction of the chart's local scale.
    Relative(f64),
    Absolute(f64),
}

impl Default for FdStep {
    fn default() -> Self {
        FdStep::Relative(1e-3)
    }
}

/// How derivatives of fields are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Derivatives {
    /// Exact derivatives when the field has them, finite differences otherwise.
    #[default]
    Auto,
    Analytic,
    FiniteDifference(FdStep),
}

/// Value and first two coordinate derivatives of a symmetric 2-tensor field;
/// `d1[k]` is `∂_k T`, `d2[k][l]` is `∂_k ∂_l T`.
#[derive(Debug, Clone)]
pub struct SymJet {
    pub value: DMatrix<f64>,
    pub d1: Vec<DMatrix<f64>>,
    pub d2: Vec<Vec<DMatrix<f64>>>,
}

impl SymJet {
    pub fn dim(&self) -> usize {
        self.value.nrows()
    }

    pub fn scaled(&self, c: f64) -> SymJet {
        SymJet {
            value: &self.value * c,
            d1: self.d1.iter().map(|m| m * c).collect(),
            d2: self
                .d2
                .iter()
                .map(|row| row.iter().map(|m| m * c).collect())
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &SymJet) {
        self.value += &other.value;
        for (a, b) in self.d1.iter_mut().zip(&other.d1) {
            *a += b;
        }
        for (ra, rb) in self.d2.iter_mut().zip(&other.d2) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += b;
            }
        }
    }

    /// Product rule for `χ T` with a scalar jet `χ`.
    pub fn times_scalar(&self, chi: &ScalarJet) -> SymJet {
        let n = self.d1.len();
        let value = &self.value * chi.value;
        let d1 = (0..n)
            .map(|k| &self.d1[k] * chi.value + &self.value * chi.grad[k])
            .collect();
        let d2 = (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        &self.d2[k][l] * chi.value
                            + &self.d1[k] * chi.grad[l]
                            + &self.d1[l] * chi.grad[k]
                            + &self.value * chi.hess[(k, l)]
                    })
                    .collect()
            })
            .collect();
        SymJet { value, d1, d2 }
    }
}

#[derive(Debug, Clone)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

/// Value and first derivatives of a one-form; `d1[(k, i)] = ∂_k Y_i`.
#[derive(Debug, Clone)]
pub struct CovectorJet {
    pub value: DVector<f64>,
    pub d1: DMatrix<f64>,
}

/// A symmetric 2-tensor field on a chart (metrics, extrinsic curvatures,
/// perturbations).
pub trait SymTensorField: Send + Sync {
    fn dim(&self) -> usize;
    fn chart(&self) -> Chart;
    fn value(&self, x: &[f64]) -> DMatrix<f64>;
    fn analytic_jet(&self, _x: &[f64]) -> Option<SymJet> {
        None
    }
}

/// Metrics are symmetric 2-tensor fields that are positive definite on the
/// chart domain; positivity is checked when the inverse is taken.
pub use self::SymTensorField as MetricField;

pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;
    fn chart(&self) -> Chart;
    fn value(&self, x: &[f64]) -> f64;
    fn analytic_jet(&self, _x: &[f64]) -> Option<ScalarJet> {
        None
    }
}

/// One-form field (lower index).
pub trait CovectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn chart(&self) -> Chart;
    fn value(&self, x: &[f64]) -> DVector<f64>;
    fn analytic_jet(&self, _x: &[f64]) -> Option<CovectorJet> {
        None
    }
}

/// Vector field (upper index). Only values are needed downstream.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;
    fn chart(&self) -> Chart;
    fn value(&self, x: &[f64]) -> DVector<f64>;
}

/// Symmetric tensor written once for any [`Scalar`]; returns the full
/// row-major `n × n` component array.
pub trait SymTensorExpr: Send + Sync {
    fn dim(&self) -> usize;
    fn chart(&self) -> Chart;
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

pub trait ScalarExpr: Send + Sync {
    fn dim(&self) -> usize;
    fn chart(&self) -> Chart;
    fn eval<S: Scalar>(&self, x: &[S]) -> S;
}

pub trait CovectorExpr: Send + Sync {
    fn dim(&self) -> usize;
    fn chart(&self) -> Chart;
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S>;
}

/// Adapter giving an expression exact derivatives through [`Jet`] evaluation.
#[derive(Debug, Clone)]
pub struct Analytic<E>(pub E);

impl<E> Analytic<E> {
    pub fn inner(&self) -> &E {
        &self.0
    }
}

impl<E: SymTensorExpr> SymTensorField for Analytic<E> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn chart(&self) -> Chart {
        self.0.chart()
    }
    fn value(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let c = self.0.components(x);
        DMatrix::from_fn(n, n, |i, j| if i <= j { c[i * n + j] } else { c[j * n + i] })
    }
    fn analytic_jet(&self, x: &[f64]) -> Option<SymJet> {
        let n = x.len();
        let c = self.0.components(&Jet::seed(x));
        let pick = |i: usize, j: usize| if i <= j { &c[i * n + j] } else { &c[j * n + i] };
        Some(SymJet {
            value: DMatrix::from_fn(n, n, |i, j| pick(i, j).v),
            d1: (0..n)
                .map(|k| DMatrix::from_fn(n, n, |i, j| pick(i, j).g[k]))
                .collect(),
            d2: (0..n)
                .map(|k| {
                    (0..n)
                        .map(|l| DMatrix::from_fn(n, n, |i, j| pick(i, j).h[k][l]))
                        .collect()
                })
                .collect(),
        })
    }
}

impl<E: ScalarExpr> ScalarField for Analytic<E> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn chart(&self) -> Chart {
        self.0.chart()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.0.eval(x)
    }
    fn analytic_jet(&self, x: &[f64]) -> Option<ScalarJet> {
        let n = x.len();
        let j = self.0.eval(&Jet::seed(x));
        Some(ScalarJet {
            value: j.v,
            grad: DVector::from_fn(n, |k, _| j.g[k]),
            hess: DMatrix::from_fn(n, n, |k, l| j.h[k][l]),
        })
    }
}

impl<E: CovectorExpr> CovectorField for Analytic<E> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn chart(&self) -> Chart {
        self.0.chart()
    }
    fn value(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_vec(self.0.components(x))
    }
    fn analytic_jet(&self, x: &[f64]) -> Option<CovectorJet> {
        let n = x.len();
        let c = self.0.components(&Jet::seed(x));
        Some(CovectorJet {
            value: DVector::from_fn(n, |i, _| c[i].v),
            d1: DMatrix::from_fn(n, n, |k, i| c[i].g[k]),
        })
    }
}

fn check_point(chart: Chart, dim: usize, p: &ChartPoint) -> Result<()> {
    if p.chart() != chart {
        return Err(Error::ChartMismatch {
            expected: chart,
            found: p.chart(),
        });
    }
    if p.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    if !chart.contains(p.coords()) {
        return Err(Error::OutsideDomain {
            chart,
            coords: p.coords().to_vec(),
        });
    }
    Ok(())
}

fn step_size(chart: Chart, x: &[f64], step: FdStep) -> Result<f64> {
    let h = match step {
        FdStep::Relative(r) => r * chart.local_scale(x),
        FdStep::Absolute(h) => h,
    };
    let margin = chart.margin(x);
    if !(h > 0.0) || margin < 10.0 * h {
        return Err(Error::DomainMargin {
            coords: x.to_vec(),
            step: h,
            margin,
        });
    }
    Ok(h)
}

const D1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

/// Raw 4th-order central-difference jet of a vector-valued function:
/// returns `(f, ∂_k f, ∂_k ∂_l f)` flattened per component.
#[allow(clippy::type_complexity, clippy::needless_range_loop)]
pub(crate) fn fd_jet(
    x: &[f64],
    h: f64,
    order: usize,
    f: impl Fn(&[f64]) -> Vec<f64>,
) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
    let n = x.len();
    let f0 = f(x);
    let m = f0.len();
    let shifted = |offs: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(k, a) in offs {
            y[k] += a * h;
        }
        f(&y)
    };
    let mut d1 = vec![vec![0.0; m]; n];
    let mut d2 = vec![vec![vec![0.0; m]; n]; if order >= 2 { n } else { 0 }];
    for k in 0..n {
        let fp1 = shifted(&[(k, 1.0)]);
        let fm1 = shifted(&[(k, -1.0)]);
        let fp2 = shifted(&[(k, 2.0)]);
        let fm2 = shifted(&[(k, -2.0)]);
        for c in 0..m {
            d1[k][c] = (-fp2[c] + 8.0 * fp1[c] - 8.0 * fm1[c] + fm2[c]) / (12.0 * h);
            if order >= 2 {
                d2[k][k][c] = (-fp2[c] + 16.0 * fp1[c] - 30.0 * f0[c] + 16.0 * fm1[c] - fm2[c])
                    / (12.0 * h * h);
            }
        }
    }
    if order >= 2 {
        for k in 0..n {
            for l in k + 1..n {
                let mut acc = vec![0.0; m];
                for &(a, ca) in &D1 {
                    for &(b, cb) in &D1 {
                        let fv = shifted(&[(k, a), (l, b)]);
                        for c in 0..m {
                            acc[c] += ca * cb * fv[c];
                        }
                    }
                }
                for c in 0..m {
                    let v = acc[c] / (144.0 * h * h);
                    d2[k][l][c] = v;
                    d2[l][k][c] = v;
                }
            }
        }
    }
    (f0, d1, d2)
}

fn fd_sym_jet(field: &dyn SymTensorField, x: &[f64], h: f64) -> SymJet {
    let n = x.len();
    let (f0, d1, d2) = fd_jet(x, h, 2, |y| field.value(y).as_slice().to_vec());
    let mat = |v: &[f64]| {
        let m = DMatrix::from_column_slice(n, n, v);
        (&m + m.transpose()) * 0.5
    };
    SymJet {
        value: mat(&f0),
        d1: d1.iter().map(|v| mat(v)).collect(),
        d2: d2
            .iter()
            .map(|row| row.iter().map(|v| mat(v)).collect())
            .collect(),
    }
}

/// Resolves a symmetric tensor field's jet at `p` according to `mode`.
pub fn sym_jet(field: &dyn SymTensorField, p: &ChartPoint, mode: Derivatives) -> Result<SymJet> {
    check_point(field.chart(), field.dim(), p)?;
    let x = p.coords();
    match mode {
        Derivatives::Analytic => field.analytic_jet(x).ok_or(Error::NoAnalyticDerivatives),
        Derivatives::Auto => match field.analytic_jet(x) {
            Some(j) => Ok(j),
            None => Ok(fd_sym_jet(field, x, step_size(field.chart(), x, FdStep::default())?)),
        },
        Derivatives::FiniteDifference(step) => {
            Ok(fd_sym_jet(field, x, step_size(field.chart(), x, step)?))
        }
    }
}

pub fn scalar_jet(field: &dyn ScalarField, p: &ChartPoint, mode: Derivatives) -> Result<ScalarJet> {
    check_point(field.chart(), field.dim(), p)?;
    let x = p.coords();
    let fd = |step| -> Result<ScalarJet> {
        let h = step_size(field.chart(), x, step)?;
        let n = x.len();
        let (f0, d1, d2) = fd_jet(x, h, 2, |y| vec![field.value(y)]);
        Ok(ScalarJet {
            value: f0[0],
            grad: DVector::from_fn(n, |k, _| d1[k][0]),
            hess: DMatrix::from_fn(n, n, |k, l| d2[k][l][0]),
        })
    };
    match mode {
        Derivatives::Analytic => field.analytic_jet(x).ok_or(Error::NoAnalyticDerivatives),
        Derivatives::Auto => match field.analytic_jet(x) {
            Some(j) => Ok(j),
            None => fd(FdStep::default()),
        },
        Derivatives::FiniteDifference(step) => fd(step),
    }
}

pub fn covector_jet(
    field: &dyn CovectorField,
    p: &ChartPoint,
    mode: Derivatives,
) -> Result<CovectorJet> {
    check_point(field.chart(), field.dim(), p)?;
    let x = p.coords();
    let fd = |step| -> Result<CovectorJet> {
        let h = step_size(field.chart(), x, step)?;
        let n = x.len();
        let (f0, d1, _) = fd_jet(x, h, 1, |y| field.value(y).as_slice().to_vec());
        Ok(CovectorJet {
            value: DVector::from_vec(f0),
            d1: DMatrix::from_fn(n, n, |k, i| d1[k][i]),
        })
    };
    match mode {
        Derivatives::Analytic => field.analytic_jet(x).ok_or(Error::NoAnalyticDerivatives),
        Derivatives::Auto => match field.analytic_jet(x) {
            Some(j) => Ok(j),
            None => fd(FdStep::default()),
        },
        Derivatives::FiniteDifference(step) => fd(step),
    }
}

/// Drops analytic derivatives so that every consumer falls back to finite
/// differences. Used to exercise the FD path on analytic fields.
pub struct ValuesOnly<F: ?Sized>(pub Arc<F>);

impl<F: SymTensorField + ?Sized> SymTensorField for ValuesOnly<F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn chart(&self) -> Chart {
        self.0.chart()
    }
    fn value(&self, x: &[f64]) -> DMatrix<f64> {
        self.0.value(x)
    }
}

/// Identically zero symmetric tensor.
#[derive(Debug, Clone, Copy)]
pub struct ZeroTensor {
    pub dim: usize,
    pub chart: Chart,
}

impl SymTensorExpr for ZeroTensor {
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart(&self) -> Chart {
        self.chart
    }
    fn components<S: Scalar>(&self, _x: &[S]) -> Vec<S> {
        vec![S::cst(0.0); self.dim * self.dim]
    }
}

/// Identically zero one-form.
#[derive(Debug, Clone, Copy)]
pub struct ZeroCovector {
    pub dim: usize,
    pub chart: Chart,
}

impl CovectorExpr for ZeroCovector {
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart(&self) -> Chart {
        self.chart
    }
    fn components<S: Scalar>(&self, _x: &[S]) -> Vec<S> {
        vec![S::cst(0.0); self.dim]
    }
}

/// `Σ cᵢ Tᵢ` for fields on a common chart.
#[derive(Clone)]
pub struct Combination {
    terms: Vec<(f64, Arc<dyn SymTensorField>)>,
}

impl Combination {
    pub fn new(terms: Vec<(f64, Arc<dyn SymTensorField>)>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty combination".into()))?;
        let (dim, chart) = (first.1.dim(), first.1.chart());
        for (_, t) in &terms {
            if t.chart() != chart {
                return Err(Error::ChartMismatch {
                    expected: chart,
                    found: t.chart(),
                });
            }
            if t.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.dim(),
                });
            }
        }
        Ok(Combination { terms })
    }

    pub fn sum(a: Arc<dyn SymTensorField>, b: Arc<dyn SymTensorField>) -> Result<Self> {
        Self::new(vec![(1.0, a), (1.0, b)])
    }
}

impl SymTensorField for Combination {
    fn dim(&self) -> usize {
        self.terms[0].1.dim()
    }
    fn chart(&self) -> Chart {
        self.terms[0].1.chart()
    }
    fn value(&self, x: &[f64]) -> DMatrix<f64> {
        let mut acc = self.terms[0].1.value(x) * self.terms[0].0;
        for (c, t) in &self.terms[1..] {
            acc += t.value(x) * *c;
        }
        acc
    }
    fn analytic_jet(&self, x: &[f64]) -> Option<SymJet> {
        let mut acc = self.terms[0].1.analytic_jet(x)?.scaled(self.terms[0].0);
        for (c, t) in &self.terms[1..] {
            acc.add_assign(&t.analytic_jet(x)?.scaled(*c));
        }
        Some(acc)
    }
}

/// `χ A + (1 − χ) B` for a cutoff `χ`.
#[derive(Clone)]
pub struct Blend {
    pub cutoff: Arc<dyn ScalarField>,
    pub first: Arc<dyn SymTensorField>,
    pub second: Arc<dyn SymTensorField>,
}

impl SymTensorField for Blend {
    fn dim(&self) -> usize {
        self.first.dim()
    }
    fn chart(&self) -> Chart {
        self.first.chart()
    }
    fn value(&self, x: &[f64]) -> DMatrix<f64> {
        let chi = self.cutoff.value(x);
        self.first.value(x) * chi + self.second.value(x) * (1.0 - chi)
    }
    fn analytic_jet(&self, x: &[f64]) -> Option<SymJet> {
        let chi = self.cutoff.analytic_jet(x)?;
        let one_minus = ScalarJet {
            value: 1.0 - chi.value,
            grad: -&chi.grad,
            hess: -&chi.hess,
        };
        let mut out = self.first.analytic_jet(x)?.times_scalar(&chi);
        out.add_assign(&self.second.analytic_jet(x)?.times_scalar(&one_minus));
        Some(out)
    }
}
