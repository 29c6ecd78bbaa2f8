use hypmass::lorentz::{act_on_momentum, boost, BoostParams};
use hypmass::mass::{
    causal_character, energy_momentum, hemisphere_energy_momentum, sphere_integral, CausalCharacter,
    EnergyMomentum, MassOptions, PerturbedHyperbolic, RadiusSchedule, SchwarzschildAds,
};
use hypmass::models::hyperbolic_metric;
use hypmass::quadrature::{sphere_area, Hemisphere, SphereQuadrature};
use hypmass::tensor::Analytic;
use hypmass::Chart;
use proptest::prelude::*;

/// Exact radial flux of Schwarzschild-AdS through the sphere of polar radius
/// r, from the warped-product form `dr²/F + r²h̊`:
/// `Tʳ_r = −(n−1)(n−2) m r^{−n}` and `dσ_r = r^{n−1} F^{−1/2} dΩ`.
fn sads_oracle(n: usize, m: f64, r: f64) -> f64 {
    let nf = n as f64;
    let f = 1.0 + r * r - 2.0 * m * r.powf(2.0 - nf);
    let v0 = (1.0 + r * r).sqrt();
    let trr = -(nf - 1.0) * (nf - 2.0) * m * r.powf(-nf);
    -v0 * r * trr * r.powf(nf - 1.0) / f.sqrt() * sphere_area(n)
}

/// `r → ∞` limit of [`sads_oracle`].
fn sads_limit(n: usize, m: f64) -> f64 {
    let nf = n as f64;
    (nf - 1.0) * (nf - 2.0) * m * sphere_area(n)
}

fn sads_mass(n: usize, m: f64) -> EnergyMomentum {
    let quad = SphereQuadrature::product(n, 12).unwrap();
    let g = Analytic(SchwarzschildAds::new(n, m).unwrap());
    energy_momentum(&g, &quad, &RadiusSchedule::default(), &MassOptions::default())
        .unwrap()
        .m
}

#[test]
fn schwarzschild_ads_sphere_values_match_oracle() {
    let n = 3;
    let quad = SphereQuadrature::product(n, 12).unwrap();
    let g = Analytic(SchwarzschildAds::new(n, 1.0).unwrap());
    let res = energy_momentum(&g, &quad, &RadiusSchedule::default(), &MassOptions::default()).unwrap();
    for row in &res.rows {
        let o = sads_oracle(n, 1.0, row.radius);
        assert!((row.values[0] - o).abs() < 1e-8 * o.abs(), "r = {}", row.radius);
    }
    let limit = sads_limit(n, 1.0);
    assert!((res.m.energy() - limit).abs() < 1e-4 * limit);
    assert!(res.m.spatial_norm() < 1e-6);
}

#[test]
fn schwarzschild_ads_mass_is_linear() {
    let one = sads_mass(3, 1.0);
    let two = sads_mass(3, 2.0);
    assert!((two.energy() / one.energy() - 2.0).abs() < 1e-6);
}

#[test]
fn negative_mass_is_timelike_past() {
    let m = sads_mass(3, -1.0);
    assert!(m.energy() < 0.0);
    assert_eq!(causal_character(&m, 1e-6), CausalCharacter::TimelikePast);
}

#[test]
fn hyperbolic_space_has_zero_mass() {
    for n in [3, 4] {
        let quad = SphereQuadrature::product(n, 8).unwrap();
        let b = hyperbolic_metric(Chart::PoincareBall, n).unwrap();
        let res = energy_momentum(&b, &quad, &RadiusSchedule::default(), &MassOptions::default()).unwrap();
        assert!(res.m.max_abs() < 1e-6, "n = {n}: {:?}", res.m);
    }
}

fn test_perturbation(n: usize) -> PerturbedHyperbolic {
    let tilt = (0..n).map(|i| 0.3 - 0.1 * i as f64).collect();
    let shape = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j {
                1.0
            } else {
                0.2 / (1.0 + (i + j) as f64)
            }
        })
        .collect();
    PerturbedHyperbolic::new(n, 0.5, n as f64, tilt, shape).unwrap()
}

#[test]
fn hemispheres_add_up() {
    let n = 3;
    let quad = SphereQuadrature::product(n, 10).unwrap();
    let opts = MassOptions::default();
    let metrics: Vec<Box<dyn hypmass::tensor::MetricField>> = vec![
        Box::new(Analytic(SchwarzschildAds::new(n, 1.0).unwrap())),
        Box::new(Analytic(test_perturbation(n))),
        Box::new(Analytic(test_perturbation(n).supported_below(0.3).unwrap())),
    ];
    for g in &metrics {
        for r in [4.0, 32.0] {
            let (full, _) = sphere_integral(g.as_ref(), &quad, r, &opts).unwrap();
            let (up, _) = sphere_integral(g.as_ref(), &quad.restrict(Hemisphere::Upper), r, &opts).unwrap();
            let (low, _) = sphere_integral(g.as_ref(), &quad.restrict(Hemisphere::Lower), r, &opts).unwrap();
            for c in 0..=n {
                let scale = full[c].abs().max(1.0);
                assert!((up[c] + low[c] - full[c]).abs() < 1e-8 * scale);
            }
        }
    }
}

#[test]
fn lower_perturbation_is_invisible_from_above() {
    let n = 3;
    let quad = SphereQuadrature::product(n, 10).unwrap();
    let g = Analytic(test_perturbation(n).supported_below(0.3).unwrap());
    let sched = RadiusSchedule::default();
    let up = hemisphere_energy_momentum(&g, &quad, &sched, Hemisphere::Upper, &MassOptions::default()).unwrap();
    assert!(up.m.max_abs() < 1e-8);
    let low = hemisphere_energy_momentum(&g, &quad, &sched, Hemisphere::Lower, &MassOptions::default()).unwrap();
    assert!(low.rows[0].values[0].abs() > 1e-6);
}

fn momentum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 4)
}

proptest! {
    #[test]
    fn causal_character_is_scale_invariant(m in momentum(), c in 0.01..100.0f64) {
        let m = EnergyMomentum::new(m).unwrap();
        prop_assume!(m.q().abs() > 1e-6 * m.components().iter().map(|x| x * x).sum::<f64>());
        prop_assert_eq!(causal_character(&m, 1e-9), causal_character(&m.scaled(c), 1e-9));
    }

    #[test]
    fn boosts_preserve_causal_character(m in momentum(), v in -0.95..0.95f64, axis in 0usize..3) {
        let m = EnergyMomentum::new(m).unwrap();
        prop_assume!(m.q().abs() > 1e-3 * m.components().iter().map(|x| x * x).sum::<f64>());
        let l = boost(&BoostParams::along_axis(3, axis, v).unwrap());
        let moved = act_on_momentum(&l, &m).unwrap();
        prop_assert!((moved.q() - m.q()).abs() < 1e-9 * (1.0 + m.q().abs()) / (1.0 - v * v));
        prop_assert_eq!(causal_character(&m, 1e-9), causal_character(&moved, 1e-9));
    }
}
