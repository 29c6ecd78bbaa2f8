//! Levi-Civita connection, curvature, covariant Hessians and the Killing
//! operator in a single chart.
//!
//! Every quantity is assembled from a metric [`SymJet`], so the same code
//! serves exact (jet) and finite-difference derivatives. Tensors are stored
//! with all indices lowered; raising always goes through the explicit
//! inverse metric.

use nalgebra::{DMatrix, DVector};

use crate::chart::ChartPoint;
use crate::error::{Error, Result};
use crate::tensor::{
    covector_jet, scalar_jet, sym_jet, CovectorField, Derivatives, MetricField, ScalarField,
    SymJet, SymTensor2,
};

/// Christoffel symbols of the second kind, `Γ^k_{ij}`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `Γ^k_{ij} v_k`, contracted on the upper index.
    pub fn contract(&self, v: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| (0..n).map(|k| self.get(k, i, j) * v[k]).sum())
    }
}

/// Inverse of a metric matrix through its Cholesky factor.
pub fn inverse_metric(g: &DMatrix<f64>, point: &[f64]) -> Result<DMatrix<f64>> {
    g.clone()
        .cholesky()
        .map(|c| {
            let inv = c.inverse();
            (&inv + inv.transpose()) * 0.5
        })
        .ok_or_else(|| Error::DegenerateMetric {
            point: point.to_vec(),
        })
}

/// Connection data derived from one metric jet.
pub(crate) struct Connection {
    pub ginv: DMatrix<f64>,
    pub gamma: Christoffel,
    // lowered symbols Γ_{l ij}
    lower: Vec<f64>,
}

impl Connection {
    pub fn from_jet(jet: &SymJet, point: &[f64]) -> Result<Self> {
        let n = jet.dim();
        let ginv = inverse_metric(&jet.value, point)?;
        let mut lower = vec![0.0; n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = 0.5
                        * (jet.d1[i][(j, l)] + jet.d1[j][(i, l)] - jet.d1[l][(i, j)]);
                    lower[(l * n + i) * n + j] = v;
                    lower[(l * n + j) * n + i] = v;
                }
            }
        }
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v: f64 = (0..n)
                        .map(|l| ginv[(k, l)] * lower[(l * n + i) * n + j])
                        .sum();
                    data[(k * n + i) * n + j] = v;
                    data[(k * n + j) * n + i] = v;
                }
            }
        }
        Ok(Connection {
            ginv,
            gamma: Christoffel { n, data },
            lower,
        })
    }

    /// `∂_m Γ^k_{ij}` as a flat array indexed `((m n + k) n + i) n + j`.
    fn gamma_derivatives(&self, jet: &SymJet) -> Vec<f64> {
        let n = jet.dim();
        let ginv = &self.ginv;
        let mut out = vec![0.0; n * n * n * n];
        for m in 0..n {
            // ∂_m g^{ka} = -g^{kb} ∂_m g_{bc} g^{ca}
            let dginv = -(ginv * &jet.d1[m] * ginv);
            for i in 0..n {
                for j in i..n {
                    let dlow: Vec<f64> = (0..n)
                        .map(|l| {
                            0.5 * (jet.d2[m][i][(j, l)] + jet.d2[m][j][(i, l)]
                                - jet.d2[m][l][(i, j)])
                        })
                        .collect();
                    for k in 0..n {
                        let mut v = 0.0;
                        for l in 0..n {
                            v += ginv[(k, l)] * dlow[l]
                                + dginv[(k, l)] * self.lower[(l * n + i) * n + j];
                        }
                        out[((m * n + k) * n + i) * n + j] = v;
                        out[((m * n + k) * n + j) * n + i] = v;
                    }
                }
            }
        }
        out
    }

    fn ricci(&self, jet: &SymJet) -> SymTensor2 {
        let n = jet.dim();
        let dg = self.gamma_derivatives(jet);
        let d = |m: usize, k: usize, i: usize, j: usize| dg[((m * n + k) * n + i) * n + j];
        let g = &self.gamma;
        SymTensor2::from_fn(n, |i, j| {
            let mut r = 0.0;
            for k in 0..n {
                r += d(k, k, i, j) - d(j, k, i, k);
                for l in 0..n {
                    r += g.get(k, k, l) * g.get(l, i, j) - g.get(k, j, l) * g.get(l, i, k);
                }
            }
            r
        })
    }
}

pub fn christoffel(g: &dyn MetricField, p: &ChartPoint) -> Result<Christoffel> {
    christoffel_with(g, p, Derivatives::Auto)
}

pub fn christoffel_with(
    g: &dyn MetricField,
    p: &ChartPoint,
    mode: Derivatives,
) -> Result<Christoffel> {
    let jet = sym_jet(g, p, mode)?;
    Ok(Connection::from_jet(&jet, p.coords())?.gamma)
}

/// Ricci tensor (lowered) with its metric trace.
#[derive(Debug, Clone)]
pub struct Ricci {
    pub tensor: SymTensor2,
    pub scalar: f64,
}

impl Ricci {
    /// The mixed trace-free tensor `R^i_j − (R/n) δ^i_j` as a matrix
    /// indexed `(i, j)`.
    pub fn trace_free_mixed(&self, ginv: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.tensor.dim();
        let mut mixed = ginv * self.tensor.to_matrix();
        for i in 0..n {
            mixed[(i, i)] -= self.scalar / n as f64;
        }
        mixed
    }
}

pub(crate) fn ricci_from_jet(jet: &SymJet, point: &[f64]) -> Result<(Ricci, Connection)> {
    let conn = Connection::from_jet(jet, point)?;
    let tensor = conn.ricci(jet);
    let scalar = tensor.trace_with(&conn.ginv);
    Ok((Ricci { tensor, scalar }, conn))
}

pub fn ricci(g: &dyn MetricField, p: &ChartPoint) -> Result<Ricci> {
    ricci_with(g, p, Derivatives::Auto)
}

pub fn ricci_with(g: &dyn MetricField, p: &ChartPoint, mode: Derivatives) -> Result<Ricci> {
    let jet = sym_jet(g, p, mode)?;
    Ok(ricci_from_jet(&jet, p.coords())?.0)
}

/// `(∇∇N)_{ij} = ∂_i ∂_j N − Γ^k_{ij} ∂_k N`.
pub fn covariant_hessian(
    g: &dyn MetricField,
    field: &dyn ScalarField,
    p: &ChartPoint,
) -> Result<SymTensor2> {
    covariant_hessian_with(g, field, p, Derivatives::Auto)
}

pub fn covariant_hessian_with(
    g: &dyn MetricField,
    field: &dyn ScalarField,
    p: &ChartPoint,
    mode: Derivatives,
) -> Result<SymTensor2> {
    let gamma = christoffel_with(g, p, mode)?;
    let n = scalar_jet(field, p, mode)?;
    let corr = gamma.contract(&n.grad);
    Ok(SymTensor2::from_fn(p.dim(), |i, j| n.hess[(i, j)] - corr[(i, j)]))
}

/// `∇_a Y_b + ∇_b Y_a`.
pub fn killing_operator(
    g: &dyn MetricField,
    y: &dyn CovectorField,
    p: &ChartPoint,
) -> Result<SymTensor2> {
    killing_operator_with(g, y, p, Derivatives::Auto)
}

pub fn killing_operator_with(
    g: &dyn MetricField,
    y: &dyn CovectorField,
    p: &ChartPoint,
    mode: Derivatives,
) -> Result<SymTensor2> {
    let gamma = christoffel_with(g, p, mode)?;
    let yj = covector_jet(y, p, mode)?;
    let corr = gamma.contract(&yj.value);
    Ok(SymTensor2::from_fn(p.dim(), |a, b| {
        yj.d1[(a, b)] + yj.d1[(b, a)] - 2.0 * corr[(a, b)]
    }))
}

/// Metric inverse at a point, for norms of residuals.
pub fn inverse_metric_at(g: &dyn MetricField, p: &ChartPoint) -> Result<DMatrix<f64>> {
    inverse_metric(&g.value(p.coords()), p.coords())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::scalar::Scalar;
    use crate::tensor::{Analytic, CovectorExpr, FdStep, ScalarExpr, SymTensorExpr};

    struct Flat(usize);

    impl SymTensorExpr for Flat {
        fn dim(&self) -> usize {
            self.0
        }
        fn chart(&self) -> Chart {
            Chart::Euclidean
        }
        fn components<S: Scalar>(&self, _x: &[S]) -> Vec<S> {
            let n = self.0;
            (0..n * n)
                .map(|k| S::cst(if k / n == k % n { 1.0 } else { 0.0 }))
                .collect()
        }
    }

    /// Unit round metric on S² in (θ, φ).
    struct RoundSphere;

    impl SymTensorExpr for RoundSphere {
        fn dim(&self) -> usize {
            2
        }
        fn chart(&self) -> Chart {
            Chart::Euclidean
        }
        fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
            vec![S::cst(1.0), S::cst(0.0), S::cst(0.0), x[0].sin().square()]
        }
    }

    struct Rotation;

    impl CovectorExpr for Rotation {
        fn dim(&self) -> usize {
            3
        }
        fn chart(&self) -> Chart {
            Chart::Euclidean
        }
        fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
            vec![-x[1], x[0], S::cst(0.0)]
        }
    }

    struct Linear;

    impl ScalarExpr for Linear {
        fn dim(&self) -> usize {
            3
        }
        fn chart(&self) -> Chart {
            Chart::Euclidean
        }
        fn eval<S: Scalar>(&self, x: &[S]) -> S {
            x[0] * 2.0 - x[1] + x[2] * 0.5 + 3.0
        }
    }

    #[test]
    fn flat_space_has_no_connection() {
        let g = Analytic(Flat(3));
        let p = ChartPoint::euclidean(&[0.4, 1.0, -2.0]).unwrap();
        let gamma = christoffel(&g, &p).unwrap();
        assert!(gamma.data.iter().all(|v| *v == 0.0));
        let r = ricci(&g, &p).unwrap();
        assert_eq!(r.tensor.max_abs(), 0.0);
        assert_eq!(r.scalar, 0.0);
        let h = covariant_hessian(&g, &Analytic(Linear), &p).unwrap();
        assert_eq!(h.max_abs(), 0.0);
        let k = killing_operator(&g, &Analytic(Rotation), &p).unwrap();
        assert_eq!(k.max_abs(), 0.0);
    }

    #[test]
    fn round_sphere_scalar_curvature() {
        let g = Analytic(RoundSphere);
        let p = ChartPoint::euclidean(&[0.9, 0.3]).unwrap();
        let exact = ricci(&g, &p).unwrap();
        assert!((exact.scalar - 2.0).abs() < 1e-12);
        let fd = ricci_with(&g, &p, Derivatives::FiniteDifference(FdStep::Absolute(1e-3))).unwrap();
        assert!((fd.scalar - 2.0).abs() < 1e-6);
    }

    #[test]
    fn degenerate_metric_is_reported() {
        struct Singular;
        impl SymTensorExpr for Singular {
            fn dim(&self) -> usize {
                3
            }
            fn chart(&self) -> Chart {
                Chart::Euclidean
            }
            fn components<S: Scalar>(&self, _x: &[S]) -> Vec<S> {
                let mut c = vec![S::cst(0.0); 9];
                c[0] = S::cst(1.0);
                c[4] = S::cst(1.0);
                c
            }
        }
        let p = ChartPoint::euclidean(&[0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            christoffel(&Analytic(Singular), &p),
            Err(Error::DegenerateMetric { .. })
        ));
    }
}
