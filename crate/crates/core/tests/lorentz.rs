use hypmass::chart::unit_from_angles;
use hypmass::lorentz::{
    act_on_sphere, aligned_rotation_pi, boost, cap_velocity, conjugate_boost, BoostParams, LorentzMatrix,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn speeds() -> [f64; 4] {
    [0.0, 0.6, 0.1f64.cos(), 0.001f64.cos()]
}

/// Closed form of `Λ⁻¹RΛ` for a boost along `e₁` and the π-rotation of the
/// `(e₁, e₂)` plane.
fn conjugate_oracle(n: usize, v: f64) -> DMatrix<f64> {
    let g2 = 1.0 / ((1.0 - v) * (1.0 + v));
    let mut m = DMatrix::identity(n + 1, n + 1);
    m[(0, 0)] = g2 * (1.0 + v * v);
    m[(0, 1)] = -2.0 * g2 * v;
    m[(1, 0)] = 2.0 * g2 * v;
    m[(1, 1)] = -g2 * (1.0 + v * v);
    m[(2, 2)] = -1.0;
    m
}

#[test]
fn boosts_preserve_minkowski_metric() {
    for n in 3..=8 {
        for v in speeds() {
            let p = BoostParams::along_axis(n, 0, v).unwrap();
            let g2 = p.gamma().powi(2);
            assert!(boost(&p).lorentz_defect() <= 1e-12 * g2, "n = {n}, v = {v}");
        }
    }
}

#[test]
fn conjugated_boost_matches_closed_form() {
    for n in [3, 5, 8] {
        let r = aligned_rotation_pi(n).unwrap();
        for v in speeds() {
            let p = BoostParams::along_axis(n, 0, v).unwrap();
            let g2 = p.gamma().powi(2);
            let c = conjugate_boost(&boost(&p), &r);
            let diff = (c.matrix() - conjugate_oracle(n, v)).amax();
            assert!(diff <= 1e-12 * g2, "n = {n}, v = {v}: {diff:e}");
        }
    }
}

#[test]
fn collinear_boosts_add_velocities() {
    let pairs = [(0.3, 0.5), (0.9, -0.4), (0.99, 0.99), (-0.7, -0.2)];
    for (a, b) in pairs {
        let la = boost(&BoostParams::along_axis(4, 2, a).unwrap());
        let lb = boost(&BoostParams::along_axis(4, 2, b).unwrap());
        let sum = boost(&BoostParams::along_axis(4, 2, (a + b) / (1.0 + a * b)).unwrap());
        assert!((la.compose(&lb).matrix() - sum.matrix()).amax() < 1e-10);
    }
}

#[test]
fn caps_open_to_hemispheres() {
    for n in [3, 4, 6] {
        for eps in [0.3, 0.1, 0.03] {
            let (v, _) = cap_velocity(eps).unwrap();
            let l = boost(&BoostParams::along_axis(n, n - 1, v).unwrap());
            for k in 0..64 {
                let mut angles = vec![0.7 + 0.03 * k as f64; n - 2];
                angles[n - 3] = 0.1 * k as f64;
                let s = unit_from_angles(&angles);
                let mut x: Vec<f64> = s.iter().map(|c| eps.sin() * c).collect();
                x.push(eps.cos());
                let y = act_on_sphere(&l, &x).unwrap();
                assert!(y[n - 1].abs() < 1e-10, "n = {n}, ε = {eps}: {}", y[n - 1]);
                let norm = y.iter().map(|c| c * c).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn antipode_of_boost_is_pole_free() {
    let l = boost(&BoostParams::along_axis(3, 0, 0.999).unwrap());
    let y = act_on_sphere(&l, &[1.0, 0.0, 0.0]).unwrap();
    assert!((y[0] - 1.0).abs() < 1e-12);
    let y = act_on_sphere(&l, &[-1.0, 0.0, 0.0]).unwrap();
    assert!((y[0] + 1.0).abs() < 1e-12);
}

fn unit(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n).prop_filter_map("degenerate", |d| {
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        (norm > 0.1).then(|| d.iter().map(|v| v / norm).collect())
    })
}

proptest! {
    #[test]
    fn boost_inverse_is_reverse_speed(d in unit(4), v in -0.99..0.99f64) {
        let l = boost(&BoostParams::new(d.clone(), v).unwrap());
        let back = boost(&BoostParams::new(d, -v).unwrap());
        let id = LorentzMatrix::identity(4);
        prop_assert!((l.compose(&back).matrix() - id.matrix()).amax() < 1e-10 * l.gamma().powi(2));
        prop_assert!((l.inverse().matrix() - back.matrix()).amax() < 1e-12 * l.gamma().powi(2));
    }

    #[test]
    fn sphere_action_stays_on_sphere(d in unit(3), x in unit(3), v in -0.999..0.999f64) {
        let l = boost(&BoostParams::new(d, v).unwrap());
        if let Ok(y) = act_on_sphere(&l, &x) {
            let norm = y.iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn boosts_are_lorentz(d in unit(5), v in -0.999..0.999f64) {
        let p = BoostParams::new(d, v).unwrap();
        prop_assert!(boost(&p).lorentz_defect() <= 1e-12 * p.gamma().powi(2));
    }
}
