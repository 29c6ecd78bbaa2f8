//! Quadrature on unit spheres, pairwise summation and Richardson
//! extrapolation.
//!
//! Rules on `S^{n−1} ⊂ ℝⁿ` are exact products for `n ∈ {3, 4}` and a
//! symmetrised Monte Carlo rule otherwise. Nodes on the two sides of the
//! equator `xⁿ = 0` form disjoint subsets, so hemisphere restrictions are
//! sub-rules and `Upper + Lower = Full` up to summation round-off.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::MAX_DIM;

/// Monte Carlo sample count used by [`SphereQuadrature::standard`].
pub const DEFAULT_MONTE_CARLO_SAMPLES: usize = 1_000_000;

/// Node count parameter used by [`SphereQuadrature::standard`] for product
/// rules.
pub const DEFAULT_RESOLUTION: usize = 24;

/// Sum with `O(log N)` error growth and a fixed association order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().fold(0.0, |a, b| a + b);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; k];
    let mut weights = vec![0.0; k];
    let kf = k as f64;
    for i in 0..k.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (kf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=k {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = kf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[k - 1 - i] = x;
        weights[i] = w;
        weights[k - 1 - i] = w;
    }
    if k % 2 == 1 {
        nodes[k / 2] = 0.0;
    }
    (nodes, weights)
}

/// Area of the unit sphere `S^{n−1} ⊂ ℝⁿ`.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 2.0) * sphere_area(n - 2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hemisphere {
    Full,
    /// `xⁿ > 0`.
    Upper,
    /// `xⁿ < 0`.
    Lower,
}

impl Hemisphere {
    fn keeps(&self, xn: f64) -> bool {
        match self {
            Hemisphere::Full => true,
            Hemisphere::Upper => xn > 0.0,
            Hemisphere::Lower => xn < 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureKind {
    /// Product rule with the given resolution.
    Product { resolution: usize },
    /// Symmetrised Monte Carlo with the given number of base samples.
    MonteCarlo { orbits: usize, seed: u64 },
}

/// Nodes and weights on `S^{n−1}`; `group[i]` identifies the Monte Carlo
/// orbit a node belongs to (used for the standard error).
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    group: Vec<u32>,
    kind: QuadratureKind,
}

/// Integral value and, for Monte Carlo rules, its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: Vec<f64>,
    pub std_error: Option<Vec<f64>>,
}

impl SphereQuadrature {
    /// Product rule for `n ∈ {3, 4}`, Monte Carlo with
    /// [`DEFAULT_MONTE_CARLO_SAMPLES`] points otherwise.
    pub fn standard(n: usize, seed: u64) -> Result<Self> {
        match n {
            3 | 4 => Self::product(n, DEFAULT_RESOLUTION),
            _ => Self::monte_carlo(n, DEFAULT_MONTE_CARLO_SAMPLES, seed),
        }
    }

    /// Product rule on `S²` (`n = 3`) or `S³` (`n = 4`).
    ///
    /// On `S²`: Gauss–Legendre in `u = x³` with `k` nodes on each of
    /// `(−1, 0)` and `(0, 1)`, times `2k` equally spaced azimuths. On `S³`:
    /// Gauss–Chebyshev of the second kind with `2k` nodes in `t = x⁴`
    /// (weight `√(1 − t²)`) times the `S²` rule.
    pub fn product(n: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("resolution must be positive".into()));
        }
        let (gl, gw) = gauss_legendre(k);
        let m = 2 * k;
        let mut s2 = Vec::with_capacity(2 * k * m * 3);
        let mut s2w = Vec::with_capacity(2 * k * m);
        for side in [-1.0, 1.0] {
            for (t, w) in gl.iter().zip(&gw) {
                let u = side * 0.5 * (1.0 + t);
                let s = (1.0 - u * u).sqrt();
                for j in 0..m {
                    let phi = (j as f64 + 0.5) * 2.0 * PI / m as f64;
                    s2.extend_from_slice(&[s * phi.cos(), s * phi.sin(), u]);
                    s2w.push(0.5 * w * 2.0 * PI / m as f64);
                }
            }
        }
        let (nodes, weights) = match n {
            3 => (s2, s2w),
            4 => {
                let q = 2 * k;
                let mut nodes = Vec::with_capacity(q * s2w.len() * 4);
                let mut weights = Vec::with_capacity(q * s2w.len());
                for j in 1..=q {
                    let a = j as f64 * PI / (q as f64 + 1.0);
                    let (sa, t) = a.sin_cos();
                    let wt = PI / (q as f64 + 1.0) * sa * sa;
                    for (y, wy) in s2.chunks(3).zip(&s2w) {
                        nodes.extend_from_slice(&[sa * y[0], sa * y[1], sa * y[2], t]);
                        weights.push(wt * wy);
                    }
                }
                (nodes, weights)
            }
            _ => return Err(Error::UnsupportedDimension(n)),
        };
        let count = weights.len();
        Ok(SphereQuadrature {
            n,
            nodes,
            weights,
            group: (0..count as u32).collect(),
            kind: QuadratureKind::Product { resolution: k },
        })
    }

    /// Monte Carlo rule with at least `samples` points.
    ///
    /// Each Gaussian-normalised base point is expanded over all sign flips
    /// and cyclic shifts of its coordinates, so the rule integrates every
    /// monomial of degree at most 3 exactly.
    pub fn monte_carlo(n: usize, samples: usize, seed: u64) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let orbit = n << n;
        let orbits = samples.div_ceil(orbit).max(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = sphere_area(n) / (orbits * orbit) as f64;
        let mut nodes = Vec::with_capacity(orbits * orbit * n);
        let mut group = Vec::with_capacity(orbits * orbit);
        let mut base = vec![0.0; n];
        for o in 0..orbits {
            let norm = loop {
                for b in base.iter_mut() {
                    *b = rng.sample(StandardNormal);
                }
                let r: f64 = base.iter().map(|v| v * v).sum::<f64>().sqrt();
                if r > 1e-8 {
                    break r;
                }
            };
            for shift in 0..n {
                for signs in 0..(1usize << n) {
                    for i in 0..n {
                        let v = base[(i + shift) % n] / norm;
                        nodes.push(if signs >> i & 1 == 1 { -v } else { v });
                    }
                    group.push(o as u32);
                }
            }
        }
        let count = group.len();
        Ok(SphereQuadrature {
            n,
            nodes,
            weights: vec![w; count],
            group,
            kind: QuadratureKind::MonteCarlo { orbits, seed },
        })
    }

    /// The sub-rule of nodes lying in `half`.
    pub fn restrict(&self, half: Hemisphere) -> SphereQuadrature {
        let n = self.n;
        let mut out = SphereQuadrature {
            n,
            nodes: Vec::new(),
            weights: Vec::new(),
            group: Vec::new(),
            kind: self.kind,
        };
        for i in 0..self.len() {
            let x = self.node(i);
            if half.keeps(x[n - 1]) {
                out.nodes.extend_from_slice(x);
                out.weights.push(self.weights[i]);
                out.group.push(self.group[i]);
            }
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn kind(&self) -> QuadratureKind {
        self.kind
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.n..(i + 1) * self.n]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_weight(&self) -> f64 {
        pairwise_sum(&self.weights)
    }

    /// Integrates a vector-valued function with `m` components. Node
    /// evaluations run in parallel; the reduction order is fixed.
    pub fn integrate<F>(&self, m: usize, f: F) -> Result<Integral>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
    {
        let values: Vec<Vec<f64>> = (0..self.len())
            .into_par_iter()
            .map(|i| f(self.node(i)).map(|v| v.into_iter().map(|c| c * self.weights[i]).collect()))
            .collect::<Result<_>>()?;
        let mut value = vec![0.0; m];
        let mut column = vec![0.0; values.len()];
        for (c, out) in value.iter_mut().enumerate() {
            for (dst, v) in column.iter_mut().zip(&values) {
                *dst = v[c];
            }
            *out = pairwise_sum(&column);
        }
        let std_error = match self.kind {
            QuadratureKind::Product { .. } => None,
            QuadratureKind::MonteCarlo { orbits, .. } => {
                let mut sums = vec![vec![0.0; orbits]; m];
                for (i, v) in values.iter().enumerate() {
                    for c in 0..m {
                        sums[c][self.group[i] as usize] += v[c];
                    }
                }
                let of = orbits as f64;
                Some(
                    sums.iter()
                        .map(|s| {
                            let mean = pairwise_sum(s) / of;
                            let var: f64 =
                                s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (of - 1.0);
                            (var * of).sqrt()
                        })
                        .collect(),
                )
            }
        };
        Ok(Integral { value, std_error })
    }

    pub fn integrate_scalar<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let v: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|i| f(self.node(i)) * self.weights[i])
            .collect();
        pairwise_sum(&v)
    }
}

/// Richardson extrapolation of `values[k] ≈ L + Σ_j a_j r_k^{−(p + j)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub value: f64,
    /// Difference of the last two extrapolants.
    pub error: f64,
    /// Extrapolant after each radius.
    pub extrapolants: Vec<f64>,
}

/// Extrapolates to `r → ∞` using up to `terms` correction exponents
/// `p, p + 1, …`. The `k`-th extrapolant fits the model exactly through the
/// last `min(k, terms) + 1` samples.
///
/// The sequence is declared divergent when the gaps between successive
/// extrapolants grow three times in a row and the last gap exceeds `floor`.
pub fn richardson(
    radii: &[f64],
    values: &[f64],
    p: f64,
    terms: usize,
    floor: f64,
) -> Result<Extrapolation> {
    if radii.len() != values.len() || radii.len() < 2 {
        return Err(Error::InvalidParameter(
            "extrapolation needs at least two radii with matching values".into(),
        ));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
        return Err(Error::InvalidParameter("radii must increase from a positive start".into()));
    }
    if !(p > 0.0) {
        return Err(Error::InvalidParameter(format!("decay exponent {p} must be positive")));
    }
    let mut extrapolants = Vec::with_capacity(values.len());
    for k in 0..values.len() {
        let q = k.min(terms);
        let rows = q + 1;
        let scale = radii[k];
        let a = DMatrix::from_fn(rows, rows, |i, j| {
            if j == 0 {
                1.0
            } else {
                (radii[k - q + i] / scale).powf(-(p + j as f64 - 1.0))
            }
        });
        let b = DVector::from_fn(rows, |i, _| values[k - q + i]);
        let sol = a.lu().solve(&b).ok_or_else(|| {
            Error::InvalidParameter("singular extrapolation system".into())
        })?;
        extrapolants.push(sol[0]);
    }
    let last = extrapolants.len() - 1;
    let value = extrapolants[last];
    let error = (extrapolants[last] - extrapolants[last - 1]).abs();
    let diffs: Vec<f64> = extrapolants.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let d = diffs.len();
    if d >= 3 && diffs[d - 1] > diffs[d - 2] && diffs[d - 2] > diffs[d - 3] && diffs[d - 1] > floor {
        return Err(Error::Divergence { differences: diffs });
    }
    if !value.is_finite() {
        return Err(Error::Divergence { differences: diffs });
    }
    Ok(Extrapolation {
        value,
        error,
        extrapolants,
    })
}
