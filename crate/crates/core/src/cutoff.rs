//! Smooth cutoff functions built from `exp(−1/t)`.

use crate::chart::Chart;
use crate::scalar::Scalar;
use crate::tensor::ScalarExpr;

fn bump<S: Scalar>(t: S) -> S {
    (-t.recip()).exp()
}

/// Smooth step: `0` for `s ≤ 0`, `1` for `s ≥ 1`, and
/// `e(s)/(e(s) + e(1 − s))` with `e(t) = exp(−1/t)` in between. Outside
/// `(0, 1)` the result is an exact constant, derivatives included.
pub fn smooth_step<S: Scalar>(s: S) -> S {
    let v = s.value();
    if v <= 0.0 {
        S::cst(0.0)
    } else if v >= 1.0 {
        S::cst(1.0)
    } else {
        let a = bump(s);
        let b = bump(S::cst(1.0) - s);
        a / (a + b)
    }
}

/// Cutoff `χ(x) = step((x_k − start)/width)` along one coordinate; a negative
/// width reverses the orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateStep {
    pub dim: usize,
    pub chart: Chart,
    pub coordinate: usize,
    pub start: f64,
    pub width: f64,
}

impl ScalarExpr for CoordinateStep {
    fn dim(&self) -> usize {
        self.dim
    }
    fn chart(&self) -> Chart {
        self.chart
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        smooth_step((x[self.coordinate] - self.start) / self.width)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Jet;

    #[test]
    fn step_values() {
        assert_eq!(smooth_step(-1.0), 0.0);
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.5), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert!((smooth_step(0.3) + smooth_step(0.7) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_outside_transition() {
        let j = smooth_step(Jet::variable(-0.2, 0, 1));
        assert_eq!((j.v, j.g[0], j.h[0][0]), (0.0, 0.0, 0.0));
        let j = smooth_step(Jet::variable(0.4, 0, 1));
        assert!(j.g[0] > 0.0);
    }
}
