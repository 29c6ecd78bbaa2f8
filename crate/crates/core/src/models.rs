//! Explicit models of hyperbolic space: the metric in half-space, ball and
//! polar charts, the isometric transitions between them, the dilation field,
//! and closed-form bases of static potentials and Killing one-forms.
//!
//! All transitions go through the hyperboloid `X ∈ ℝ^{1,n}`,
//! `X₀² − |X⃗|² = 1`, with
//!
//! * half-space: `X₀ = (|w|² + z² + 1)/2z`, `X_i = wⁱ/z`, `X_n = (|w|² + z² − 1)/2z`,
//! * ball: `X₀ = (1 + |x|²)/(1 − |x|²)`, `X⃗ = 2x/(1 − |x|²)`,
//! * polar: `X₀ = √(1 + r²)`, `X⃗ = r θ̂`.
//!
//! With this dictionary the static potentials are the restrictions of the
//! linear functions `X_μ`.

use nalgebra::{DMatrix, DVector};

use crate::chart::{angles_from_vector, unit_from_angles, Chart, ChartPoint};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{christoffel_with, inverse_metric, killing_operator};
use crate::scalar::{Scalar, MAX_DIM};
use crate::tensor::{
    covector_jet, scalar_jet, Analytic, CovectorExpr, CovectorField, Derivatives, ScalarExpr, ScalarField,
    SymTensor2, SymTensorExpr, SymTensorField, VectorField,
};

fn check_dim(n: usize) -> Result<()> {
    if (3..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

pub(crate) fn norm_sq<S: Scalar>(x: &[S]) -> S {
    x.iter().fold(S::cst(0.0), |acc, &v| acc + v * v)
}

/// Conformal factor `4/(1 − |x|²)²` of the ball model.
pub(crate) fn ball_factor<S: Scalar>(x: &[S]) -> S {
    (S::cst(1.0) - norm_sq(x)).square().recip() * 4.0
}

/// Flat metric `δ` on a Euclidean chart.
#[derive(Debug, Clone, Copy)]
pub struct FlatMetric {
    pub dim: usize,
}

impl SymTensorExpr for FlatMetric {
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart(&self) -> Chart {
        Chart::Euclidean
    }
    fn components<S: Scalar>(&self, _x: &[S]) -> Vec<S> {
        let n = self.dim;
        (0..n * n)
            .map(|k| S::cst(if k / n == k % n { 1.0 } else { 0.0 }))
            .collect()
    }
}

pub fn flat_metric(n: usize) -> Analytic<FlatMetric> {
    Analytic(FlatMetric { dim: n })
}

/// The hyperbolic metric `b` in one of the three model charts.
#[derive(Debug, Clone, Copy)]
pub struct HyperbolicMetric {
    chart: Chart,
    dim: usize,
}

impl SymTensorExpr for HyperbolicMetric {
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart(&self) -> Chart {
        self.chart
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim;
        let mut c = vec![S::cst(0.0); n * n];
        match self.chart {
            Chart::HalfSpace => {
                let f = x[n - 1].square().recip();
                for i in 0..n {
                    c[i * n + i] = f;
                }
            }
            Chart::PoincareBall => {
                let f = ball_factor(x);
                for i in 0..n {
                    c[i * n + i] = f;
                }
            }
            Chart::Polar => {
                let r2 = x[0].square();
                c[0] = (r2 + 1.0).recip();
                let mut h = r2;
                for k in 1..n {
                    c[k * n + k] = h;
                    h = h * x[k].sin().square();
                }
            }
            Chart::Euclidean => unreachable!("hyperbolic metric has no Euclidean chart"),
        }
        c
    }
}

pub fn hyperbolic_metric(chart: Chart, n: usize) -> Result<Analytic<HyperbolicMetric>> {
    check_dim(n)?;
    if chart == Chart::Euclidean {
        return Err(Error::InvalidParameter(
            "hyperbolic space has no Euclidean chart".into(),
        ));
    }
    Ok(Analytic(HyperbolicMetric { chart, dim: n }))
}

/// Hyperboloid coordinates `(X₀, X₁, …, X_n)` of a point.
pub fn to_hyperboloid(p: &ChartPoint) -> Result<Vec<f64>> {
    let x = p.coords();
    let n = x.len();
    match p.chart() {
        Chart::HalfSpace => {
            let z = x[n - 1];
            let w2: f64 = x[..n - 1].iter().map(|v| v * v).sum();
            let mut out = vec![(w2 + z * z + 1.0) / (2.0 * z)];
            out.extend(x[..n - 1].iter().map(|w| w / z));
            out.push((w2 + z * z - 1.0) / (2.0 * z));
            Ok(out)
        }
        Chart::PoincareBall => {
            let rho2: f64 = x.iter().map(|v| v * v).sum();
            let d = 1.0 - rho2;
            let mut out = vec![(1.0 + rho2) / d];
            out.extend(x.iter().map(|v| 2.0 * v / d));
            Ok(out)
        }
        Chart::Polar => {
            let r = x[0];
            let mut out = vec![(1.0 + r * r).sqrt()];
            if r == 0.0 {
                out.extend(std::iter::repeat_n(0.0, n));
            } else {
                out.extend(unit_from_angles(&x[1..]).into_iter().map(|u| r * u));
            }
            Ok(out)
        }
        Chart::Euclidean => Err(Error::InvalidParameter(
            "Euclidean chart is not a model of hyperbolic space".into(),
        )),
    }
}

fn half_space_to_ball(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let z = x[n - 1];
    let w2: f64 = x[..n - 1].iter().map(|v| v * v).sum();
    let d = w2 + (1.0 + z) * (1.0 + z);
    let mut out: Vec<f64> = x[..n - 1].iter().map(|w| 2.0 * w / d).collect();
    out.push((w2 + z * z - 1.0) / d);
    out
}

fn ball_to_half_space(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let rho2: f64 = x.iter().map(|v| v * v).sum();
    let shifted: f64 = x[..n - 1].iter().map(|v| v * v).sum::<f64>() + (x[n - 1] - 1.0).powi(2);
    let mut out: Vec<f64> = x[..n - 1].iter().map(|v| 2.0 * v / shifted).collect();
    out.push((1.0 - rho2) / shifted);
    out
}

fn polar_to_half_space(r: f64, unit: &[f64]) -> Vec<f64> {
    let n = unit.len();
    let un = unit[n - 1];
    let x0 = (1.0 + r * r).sqrt();
    // X₀ − X_n, written without cancellation when θ̂ points up
    let diff = if un > 0.0 {
        let perp: f64 = unit[..n - 1].iter().map(|u| u * u).sum();
        (1.0 + r * r * perp) / (x0 + r * un)
    } else {
        x0 - r * un
    };
    let z = 1.0 / diff;
    let mut out: Vec<f64> = unit[..n - 1].iter().map(|u| r * u * z).collect();
    out.push(z);
    out
}

/// Isometric change of chart between the hyperbolic models.
///
/// Mapping the ball centre to `Polar` yields [`ChartPoint::polar_origin`].
pub fn chart_transition(p: &ChartPoint, to: Chart) -> Result<ChartPoint> {
    let n = p.dim();
    let from = p.chart();
    let x = p.coords();
    if from == to {
        return Ok(p.clone());
    }
    let coords = match (from, to) {
        (Chart::Euclidean, _) | (_, Chart::Euclidean) => {
            return Err(Error::InvalidParameter(
                "Euclidean chart is not a model of hyperbolic space".into(),
            ))
        }
        (Chart::HalfSpace, Chart::PoincareBall) => half_space_to_ball(x),
        (Chart::PoincareBall, Chart::HalfSpace) => ball_to_half_space(x),
        (Chart::Polar, Chart::PoincareBall) => {
            let r = x[0];
            if r == 0.0 {
                vec![0.0; n]
            } else {
                let s = r / (1.0 + (1.0 + r * r).sqrt());
                unit_from_angles(&x[1..]).into_iter().map(|u| s * u).collect()
            }
        }
        (Chart::PoincareBall, Chart::Polar) => {
            let rho2: f64 = x.iter().map(|v| v * v).sum();
            if rho2 == 0.0 {
                return Ok(ChartPoint::polar_origin(n));
            }
            let mut out = vec![2.0 * rho2.sqrt() / (1.0 - rho2)];
            out.extend(angles_from_vector(x));
            out
        }
        (Chart::Polar, Chart::HalfSpace) => {
            if x[0] == 0.0 {
                let mut c = vec![0.0; n];
                c[n - 1] = 1.0;
                c
            } else {
                polar_to_half_space(x[0], &unit_from_angles(&x[1..]))
            }
        }
        (Chart::HalfSpace, Chart::Polar) => {
            let big_x = to_hyperboloid(p)?;
            let r: f64 = big_x[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if r == 0.0 {
                return Ok(ChartPoint::polar_origin(n));
            }
            let mut out = vec![r];
            out.extend(angles_from_vector(&big_x[1..]));
            out
        }
        _ => unreachable!(),
    };
    if !coords.iter().all(|v| v.is_finite()) || !to.contains(&coords) {
        return Err(Error::OutsideDomain { chart: to, coords });
    }
    ChartPoint::new(to, coords)
}

/// Static potential `V_(μ)`: a solution of `∇∇V = V b` on hyperbolic space.
///
/// `μ = 0` is `V_(0)`, `μ = i ∈ 1..n−1` is `V_(i) = wⁱ/z`, and `μ = n` is
/// `V_(n)`; in every chart `V_(μ) = X_μ` on the hyperboloid.
#[derive(Debug, Clone, Copy)]
pub struct StaticKid {
    index: usize,
    dim: usize,
    chart: Chart,
}

impl StaticKid {
    pub fn new(index: usize, n: usize) -> Result<Self> {
        check_dim(n)?;
        if index > n {
            return Err(Error::InvalidParameter(format!(
                "static KID index {index} out of range 0..={n}"
            )));
        }
        Ok(StaticKid {
            index,
            dim: n,
            chart: Chart::HalfSpace,
        })
    }

    /// The same potential expressed in another model chart.
    pub fn in_chart(self, chart: Chart) -> Result<Self> {
        if chart == Chart::Euclidean {
            return Err(Error::InvalidParameter(
                "static KIDs live on hyperbolic charts".into(),
            ));
        }
        Ok(StaticKid { chart, ..self })
    }

    pub fn index(&self) -> usize {
        self.index
    }
}

impl ScalarExpr for StaticKid {
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart(&self) -> Chart {
        self.chart
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let n = self.dim;
        let mu = self.index;
        match self.chart {
            Chart::HalfSpace => {
                let z = x[n - 1];
                let w2 = norm_sq(&x[..n - 1]);
                match mu {
                    0 => (w2 + z.square() + 1.0) / (z * 2.0),
                    m if m == n => (w2 + z.square() - 1.0) / (z * 2.0),
                    i => x[i - 1] / z,
                }
            }
            Chart::PoincareBall => {
                let rho2 = norm_sq(x);
                let d = S::cst(1.0) - rho2;
                match mu {
                    0 => (rho2 + 1.0) / d,
                    i => x[i - 1] * 2.0 / d,
                }
            }
            Chart::Polar => {
                let r = x[0];
                if mu == 0 {
                    return (r.square() + 1.0).sqrt();
                }
                // i-th component of the hyperspherical unit vector
                let mut prod = S::cst(1.0);
                for t in &x[1..mu] {
                    prod = prod * t.sin();
                }
                if mu < n {
                    r * prod * x[mu].cos()
                } else {
                    r * prod
                }
            }
            Chart::Euclidean => unreachable!(),
        }
    }
}

pub fn static_kid(index: usize, n: usize) -> Result<Analytic<StaticKid>> {
    Ok(Analytic(StaticKid::new(index, n)?))
}

/// Euclidean Killing one-form of ℝ^{n−1}: `X_i(w) = tᵢ + Ω_{ij} wʲ` with `Ω`
/// antisymmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct EuclideanKilling {
    translation: Vec<f64>,
    linear: DMatrix<f64>,
}

struct AffineForm<'a>(&'a EuclideanKilling);

impl CovectorExpr for AffineForm<'_> {
    fn dim(&self) -> usize {
        self.0.translation.len()
    }
    fn chart(&self) -> Chart {
        Chart::Euclidean
    }
    fn components<S: Scalar>(&self, w: &[S]) -> Vec<S> {
        self.0.eval(w)
    }
}

impl EuclideanKilling {
    /// Rejects affine one-forms whose linear part is not antisymmetric, as
    /// measured by the flat Killing operator.
    pub fn new(translation: Vec<f64>, linear: DMatrix<f64>) -> Result<Self> {
        let m = translation.len();
        if linear.nrows() != m || linear.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: linear.nrows(),
            });
        }
        let candidate = EuclideanKilling {
            translation,
            linear,
        };
        let sample: Vec<f64> = (0..m).map(|k| 0.3 - 0.2 * k as f64).collect();
        let p = ChartPoint::euclidean(&sample)?;
        let residual = killing_operator(&flat_metric(m), &Analytic(AffineForm(&candidate)), &p)?
            .max_abs();
        let scale = 1.0 + candidate.linear.amax();
        if residual > 1e-12 * scale {
            return Err(Error::NotKilling { residual });
        }
        Ok(candidate)
    }

    pub fn translation(t: Vec<f64>) -> Self {
        let m = t.len();
        EuclideanKilling {
            translation: t,
            linear: DMatrix::zeros(m, m),
        }
    }

    /// Infinitesimal rotation in the `(a, b)` plane: `X = w_b dw^a − w_a dw^b`.
    pub fn rotation(m: usize, a: usize, b: usize) -> Self {
        let mut linear = DMatrix::zeros(m, m);
        linear[(a, b)] = 1.0;
        linear[(b, a)] = -1.0;
        EuclideanKilling {
            translation: vec![0.0; m],
            linear,
        }
    }

    fn eval<S: Scalar>(&self, w: &[S]) -> Vec<S> {
        let m = self.translation.len();
        (0..m)
            .map(|i| {
                (0..m).fold(S::cst(self.translation[i]), |acc, j| {
                    acc + w[j] * self.linear[(i, j)]
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KillingKind {
    /// `Y_X = X_i dwⁱ / z²`.
    Euclidean(EuclideanKilling),
    /// `Y_{c,A}`: dilation (`c`) and inversions (`A`) of ℝ^{n−1}.
    DilationInversion { c: f64, a: Vec<f64> },
}

/// Killing one-form of `b` in the half-space chart.
#[derive(Debug, Clone, PartialEq)]
pub struct KillingForm {
    kind: KillingKind,
    dim: usize,
}

impl KillingForm {
    pub fn kind(&self) -> &KillingKind {
        &self.kind
    }
}

impl CovectorExpr for KillingForm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart(&self) -> Chart {
        Chart::HalfSpace
    }
    fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let n = self.dim;
        let z = x[n - 1];
        let w = &x[..n - 1];
        let inv_z2 = z.square().recip();
        match &self.kind {
            KillingKind::Euclidean(xf) => {
                let mut out: Vec<S> = xf.eval(w).into_iter().map(|v| v * inv_z2).collect();
                out.push(S::cst(0.0));
                out
            }
            KillingKind::DilationInversion { c, a } => {
                let aw = (0..n - 1).fold(S::cst(0.0), |acc, j| acc + w[j] * a[j]);
                let w2 = norm_sq(w);
                let mut out: Vec<S> = (0..n - 1)
                    .map(|i| {
                        let bracket = aw * w[i] - w2 * (0.5 * a[i]) + w[i] * *c;
                        bracket * inv_z2 - 0.5 * a[i]
                    })
                    .collect();
                out.push((aw + *c) / z);
                out
            }
        }
    }
}

pub fn killing_form(kind: KillingKind, n: usize) -> Result<Analytic<KillingForm>> {
    check_dim(n)?;
    let m = match &kind {
        KillingKind::Euclidean(x) => x.translation.len(),
        KillingKind::DilationInversion { a, .. } => a.len(),
    };
    if m != n - 1 {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            found: m,
        });
    }
    Ok(Analytic(KillingForm { kind, dim: n }))
}

/// The `n(n+1)/2` generators: translations, rotations, the dilation and the
/// `n − 1` inversions.
pub fn killing_basis(n: usize) -> Result<Vec<Analytic<KillingForm>>> {
    check_dim(n)?;
    let m = n - 1;
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..m {
        let mut t = vec![0.0; m];
        t[i] = 1.0;
        out.push(killing_form(
            KillingKind::Euclidean(EuclideanKilling::translation(t)),
            n,
        )?);
    }
    for a in 0..m {
        for b in a + 1..m {
            out.push(killing_form(
                KillingKind::Euclidean(EuclideanKilling::rotation(m, a, b)),
                n,
            )?);
        }
    }
    out.push(killing_form(
        KillingKind::DilationInversion {
            c: 1.0,
            a: vec![0.0; m],
        },
        n,
    )?);
    for i in 0..m {
        let mut a = vec![0.0; m];
        a[i] = 1.0;
        out.push(killing_form(KillingKind::DilationInversion { c: 0.0, a }, n)?);
    }
    Ok(out)
}

/// Dilation field `Z = (1 − |x|²) xⁱ ∂_i / (1 + |x|²)` of the ball model.
pub fn dilation_field(p: &ChartPoint) -> Result<DVector<f64>> {
    if p.chart() != Chart::PoincareBall {
        return Err(Error::ChartMismatch {
            expected: Chart::PoincareBall,
            found: p.chart(),
        });
    }
    Ok(dilation_at(p.coords()))
}

pub(crate) fn dilation_at(x: &[f64]) -> DVector<f64> {
    let rho2: f64 = x.iter().map(|v| v * v).sum();
    let f = (1.0 - rho2) / (1.0 + rho2);
    DVector::from_iterator(x.len(), x.iter().map(|v| f * v))
}

#[derive(Debug, Clone, Copy)]
pub struct DilationField {
    pub dim: usize,
}

impl VectorField for DilationField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart(&self) -> Chart {
        Chart::PoincareBall
    }
    fn value(&self, x: &[f64]) -> DVector<f64> {
        dilation_at(x)
    }
}

/// Fall-off data: `|g − b|_b = O(r^{−σ})` and the radial decay `s` of gluing
/// corrections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySpec {
    pub sigma: f64,
    pub s: f64,
}

impl DecaySpec {
    pub fn new(n: usize, sigma: f64, s: f64) -> Result<Self> {
        let nf = n as f64;
        if !(s >= nf / 2.0 && s < (nf + 1.0) / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "s = {s} must lie in [{}, {})",
                nf / 2.0,
                (nf + 1.0) / 2.0
            )));
        }
        if !(sigma > (nf - 1.0) / 2.0 + s) {
            return Err(Error::InvalidParameter(format!(
                "σ = {sigma} must exceed (n − 1)/2 + s = {}",
                (nf - 1.0) / 2.0 + s
            )));
        }
        Ok(DecaySpec { sigma, s })
    }

    /// Rate `σ − s` at which glued energy-momenta approach the original.
    pub fn approach_rate(&self) -> f64 {
        self.sigma - self.s
    }
}

/// `|∇∇V − V b|_b` at `p`, with the Christoffel symbols of `b` obtained
/// through `christoffels` and the derivatives of `V` through its own jet.
pub fn kid_residual(v: &dyn ScalarField, p: &ChartPoint, christoffels: Derivatives) -> Result<f64> {
    let b = hyperbolic_metric(p.chart(), p.dim())?;
    let gamma = christoffel_with(&b, p, christoffels)?;
    let jet = scalar_jet(v, p, Derivatives::Auto)?;
    let corr = gamma.contract(&jet.grad);
    let bv = b.value(p.coords());
    let res = SymTensor2::from_fn(p.dim(), |i, j| {
        jet.hess[(i, j)] - corr[(i, j)] - jet.value * bv[(i, j)]
    });
    Ok(res.norm_with(&inverse_metric(&bv, p.coords())?))
}

/// `|∇Y + (∇Y)ᵀ|_b` at `p`.
pub fn killing_residual(y: &dyn CovectorField, p: &ChartPoint, christoffels: Derivatives) -> Result<f64> {
    let b = hyperbolic_metric(p.chart(), p.dim())?;
    let gamma = christoffel_with(&b, p, christoffels)?;
    let jet = covector_jet(y, p, Derivatives::Auto)?;
    let corr = gamma.contract(&jet.value);
    let res = SymTensor2::from_fn(p.dim(), |a, c| jet.d1[(a, c)] + jet.d1[(c, a)] - 2.0 * corr[(a, c)]);
    Ok(res.norm_with(&inverse_metric(&b.value(p.coords()), p.coords())?))
}

/// Seeded half-space points with `|w| ≤ w_radius` (uniform in the ball) and
/// `z` uniform in `z_range`.
pub fn sample_half_space(
    n: usize,
    count: usize,
    seed: u64,
    z_range: (f64, f64),
    w_radius: f64,
) -> Result<Vec<ChartPoint>> {
    check_dim(n)?;
    if !(z_range.0 > 0.0 && z_range.1 > z_range.0) || !(w_radius >= 0.0) {
        return Err(Error::InvalidParameter("invalid sampling box".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut w: Vec<f64> = (0..n - 1).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = norm_sq(&w).sqrt();
            let u: f64 = rng.random();
            let radius = w_radius * u.powf(1.0 / (n - 1) as f64);
            w.iter_mut().for_each(|c| *c *= radius / norm);
            ChartPoint::half_space(&w, rng.random_range(z_range.0..=z_range.1))
        })
        .collect()
}
