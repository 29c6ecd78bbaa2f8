//! The subcommands. Each takes a validated [`RunConfig`] and returns an
//! [`Output`]; nothing here touches the filesystem or the clock, so reports
//! are bit-identical for identical configs.

use hypmass::chart::unit_from_angles;
use hypmass::constraints::{
    ah_to_ae_shift, constraint_operator, constraint_sweep, graph_data, graph_initial_data, hyperbolic_data,
    sweep_csv, HyperboloidGraph, InitialDataSet, InterpolatingGraph, TrigGraph,
};
use hypmass::gluing::{epsilon_grid, epsilon_threshold, GluingScenario, MomentumFamily};
use hypmass::lorentz::{act_on_sphere, boost, cap_velocity, BoostParams, LorentzMatrix};
use hypmass::mass::{
    causal_character, energy_momentum, hemisphere_energy_momentum, momentum_from_aspect, CausalCharacter,
    EnergyMomentum, MassAspect, MassOptions, MassResult, PerturbedHyperbolic, RadiusSchedule, SchwarzschildAds,
};
use hypmass::models::{
    hyperbolic_metric, kid_residual, killing_basis, killing_residual, sample_half_space, DecaySpec, StaticKid,
};
use hypmass::quadrature::{sphere_area, Hemisphere, SphereQuadrature};
use hypmass::scalar::Scalar;
use hypmass::tensor::{Analytic, Derivatives, FdStep, MetricField, ScalarExpr, ScalarField};
use hypmass::{Chart, ChartPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{DataFamily, DecayKind, DerivativeMode, HemisphereChoice, MetricFamily};
use crate::{exit, CliError, Output, RunConfig};

/// Tolerance used when classifying energy-momenta.
const CAUSAL_TOL: f64 = 1e-9;

/// Cap-law tolerance of `boost-demo`.
const CAP_LAW_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Mass,
    Verify,
    Glue,
    Constraints,
    BoostDemo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Mass => "mass",
            Command::Verify => "verify",
            Command::Glue => "glue",
            Command::Constraints => "constraints",
            Command::BoostDemo => "boost-demo",
        }
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    cfg.validate()?;
    let (pass, results, tables, fail_code) = match cmd {
        Command::Mass => mass(cfg)?,
        Command::Verify => verify(cfg)?,
        Command::Glue => glue(cfg)?,
        Command::Constraints => constraints(cfg)?,
        Command::BoostDemo => boost_demo(cfg)?,
    };
    let config: Value = serde_json::from_str(&cfg.to_json()).expect("config is valid json");
    let report = json!({
        "command": cmd.name(),
        "config": config,
        "pass": pass,
        "results": results,
    });
    let mut report = serde_json::to_string_pretty(&report).expect("report serialises");
    report.push('\n');
    Ok(Output {
        report,
        tables,
        exit_code: if pass { exit::OK } else { fail_code },
    })
}

type Run = (bool, Value, Vec<(String, String)>, u8);

fn character_name(c: CausalCharacter) -> &'static str {
    match c {
        CausalCharacter::Zero => "zero",
        CausalCharacter::TimelikeFuture => "timelike-future",
        CausalCharacter::TimelikePast => "timelike-past",
        CausalCharacter::NullFuture => "null-future",
        CausalCharacter::NullPast => "null-past",
        CausalCharacter::Spacelike => "spacelike",
    }
}

fn momentum_json(m: &EnergyMomentum) -> Value {
    json!({
        "components": m.components(),
        "q": m.q(),
        "character": character_name(causal_character(m, CAUSAL_TOL)),
    })
}

fn derivatives(mode: DerivativeMode) -> Derivatives {
    match mode {
        DerivativeMode::Auto => Derivatives::Auto,
        DerivativeMode::Analytic => Derivatives::Analytic,
        DerivativeMode::FiniteDifference => Derivatives::FiniteDifference(FdStep::default()),
    }
}

fn quadrature(cfg: &RunConfig) -> Result<SphereQuadrature, CliError> {
    let n = cfg.dim;
    let quad = if n <= 4 {
        SphereQuadrature::product(n, cfg.mass.resolution)?
    } else {
        SphereQuadrature::monte_carlo(n, cfg.mass.monte_carlo_samples, cfg.seed)?
    };
    Ok(quad)
}

fn metric(cfg: &RunConfig) -> Result<Box<dyn MetricField>, CliError> {
    let n = cfg.dim;
    Ok(match &cfg.mass.metric {
        MetricFamily::Hyperbolic => Box::new(hyperbolic_metric(Chart::PoincareBall, n)?),
        MetricFamily::SchwarzschildAds { mass } => Box::new(Analytic(SchwarzschildAds::new(n, *mass)?)),
        MetricFamily::Perturbed {
            amplitude,
            sigma,
            tilt,
            shape,
            lower_cutoff,
        } => {
            let tilt = tilt.clone().unwrap_or_else(|| vec![0.0; n]);
            let shape = shape
                .clone()
                .unwrap_or_else(|| (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect());
            let mut g = PerturbedHyperbolic::new(n, *amplitude, sigma.unwrap_or(n as f64), tilt, shape)?;
            if let Some(w) = lower_cutoff {
                g = g.supported_below(*w)?;
            }
            Box::new(Analytic(g))
        }
        MetricFamily::Aspect { .. } => unreachable!("aspects are paired directly"),
    })
}

fn mass(cfg: &RunConfig) -> Result<Run, CliError> {
    let n = cfg.dim;
    let mc = &cfg.mass;
    let quad = quadrature(cfg)?;
    let half = match mc.hemisphere {
        HemisphereChoice::Full => Hemisphere::Full,
        HemisphereChoice::Upper => Hemisphere::Upper,
        HemisphereChoice::Lower => Hemisphere::Lower,
    };
    if let MetricFamily::Aspect { coefficients } = &mc.metric {
        let quad = quad.restrict(half);
        let aspect = MassAspect::sample(&quad, |x| {
            coefficients[0] + x.iter().zip(&coefficients[1..]).map(|(a, b)| a * b).sum::<f64>()
        })?;
        let m = momentum_from_aspect(&aspect, &quad)?;
        let mut csv = String::new();
        for c in 0..=n {
            csv.push_str(&format!("m{c}{}", if c == n { "\n" } else { "," }));
        }
        let body: Vec<String> = m.components().iter().map(|v| v.to_string()).collect();
        csv.push_str(&body.join(","));
        csv.push('\n');
        let mut results = json!({ "momentum": momentum_json(&m), "nodes": quad.len() });
        // closed form is only available over the whole sphere
        let pass = if half == Hemisphere::Full {
            let area = sphere_area(n);
            let mut expect = vec![coefficients[0] * area];
            expect.extend(coefficients[1..].iter().map(|c| c * area / n as f64));
            let err = m.components().iter().zip(&expect).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            let scale = expect.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            results["closed_form"] = json!(expect);
            results["error"] = json!(err);
            err <= cfg.tol * scale
        } else {
            true
        };
        return Ok((pass, results, vec![("mass.csv".into(), csv)], exit::TOLERANCE));
    }
    let g = metric(cfg)?;
    let opts = MassOptions {
        derivatives: derivatives(mc.derivatives),
        subtract_background: mc.subtract_background,
        decay: mc.decay.map(|[sigma, s]| DecaySpec::new(n, sigma, s)).transpose()?,
        terms: mc.terms,
    };
    let sched = RadiusSchedule::new(mc.radii.clone())?;
    let res: MassResult = match half {
        Hemisphere::Full => energy_momentum(g.as_ref(), &quad, &sched, &opts)?,
        h => hemisphere_energy_momentum(g.as_ref(), &quad, &sched, h, &opts)?,
    };
    let scale = res.m.max_abs().max(1.0);
    let pass = res.max_error() <= cfg.tol * scale;
    let results = json!({
        "momentum": momentum_json(&res.m),
        "error": res.error,
        "max_error": res.max_error(),
        "allowed_error": cfg.tol * scale,
        "nodes": quad.len(),
        // Monte Carlo only: standard error of the sphere integrals at the outermost radius
        "std_error": res.rows.last().and_then(|r| r.std_error.clone()),
    });
    Ok((pass, results, vec![("mass.csv".into(), res.to_csv())], exit::TOLERANCE))
}

/// `V_(μ)` with `0.01 z` added when `μ = 0`; used to check that the KID
/// suite catches a wrong potential.
struct CorruptedKid(StaticKid);

impl ScalarExpr for CorruptedKid {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn chart(&self) -> Chart {
        self.0.chart()
    }
    fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let v = self.0.eval(x);
        if self.0.index() == 0 {
            v + x[self.dim() - 1] * 0.01
        } else {
            v
        }
    }
}

fn suite(pass: bool, details: Value) -> Value {
    let mut v = details;
    v["pass"] = json!(pass);
    v
}

fn verify(cfg: &RunConfig) -> Result<Run, CliError> {
    let n = cfg.dim;
    let vc = &cfg.verify;
    let pts = sample_half_space(n, vc.points, cfg.seed, (vc.z_range[0], vc.z_range[1]), vc.w_radius)?;
    let fd = Derivatives::FiniteDifference(FdStep::Relative(1e-3));

    let (mut exact, mut approx) = (0.0f64, 0.0f64);
    for mu in 0..=n {
        let kid = StaticKid::new(mu, n)?;
        let v: Box<dyn ScalarField> = if vc.corrupt_kid {
            Box::new(Analytic(CorruptedKid(kid)))
        } else {
            Box::new(Analytic(kid))
        };
        for p in &pts {
            exact = exact.max(kid_residual(v.as_ref(), p, Derivatives::Analytic)?);
            approx = approx.max(kid_residual(v.as_ref(), p, fd)?);
        }
    }
    let kid_ok = exact < vc.kid_tol && approx < vc.kid_fd_tol;

    let basis = killing_basis(n)?;
    let mut killing = 0.0f64;
    for y in &basis {
        for p in &pts {
            killing = killing.max(killing_residual(y, p, Derivatives::Analytic)?);
        }
    }
    let killing_ok = killing < vc.killing_tol;

    let (lorentz_ok, lorentz) = lorentz_suite(n, vc.lorentz_tol)?;

    let mut vacuum = 0.0f64;
    for k in 0..vc.graphs as u64 {
        let seed = cfg.seed.wrapping_add(k);
        let data = graph_initial_data(TrigGraph::random(n, 4, 0.85, seed)?)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..20 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let cv = constraint_operator(&data, &ChartPoint::euclidean(&x)?)?;
            vacuum = vacuum.max(cv.rho.abs() + cv.j_norm);
        }
    }
    let hyperboloid = graph_initial_data(HyperboloidGraph { dim: n })?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4b);
    let (mut umbilic, mut hvac) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let p = ChartPoint::euclidean(&x)?;
        let (g, k) = graph_data(&HyperboloidGraph { dim: n }, &p)?;
        umbilic = umbilic.max(k.add(&g).max_abs());
        let cv = constraint_operator(&hyperboloid, &p)?;
        hvac = hvac.max(cv.rho.abs() + cv.j_norm);
    }
    let gc_ok = vacuum < vc.graph_tol && umbilic < vc.graph_tol && hvac < vc.graph_tol;

    let pass = kid_ok && killing_ok && lorentz_ok && gc_ok;
    let results = json!({
        "points": pts.len(),
        "kid": suite(kid_ok, json!({ "analytic_sup": exact, "finite_difference_sup": approx, "corrupted": vc.corrupt_kid })),
        "killing": suite(killing_ok, json!({ "generators": basis.len(), "sup": killing })),
        "lorentz": suite(lorentz_ok, lorentz),
        "gauss_codazzi": suite(gc_ok, json!({
            "graphs": vc.graphs,
            "graph_sup": vacuum,
            "hyperboloid_sup": hvac,
            "umbilic_sup": umbilic,
        })),
    });
    Ok((pass, results, Vec::new(), exit::TOLERANCE))
}

fn cap_boundary(n: usize, eps: f64, k: usize, count: usize) -> Vec<f64> {
    let t = (k as f64 + 0.5) / count as f64;
    let mut angles = vec![std::f64::consts::PI * t; n - 2];
    angles[n - 3] = std::f64::consts::TAU * t;
    let mut x: Vec<f64> = unit_from_angles(&angles).iter().map(|c| eps.sin() * c).collect();
    x.push(eps.cos());
    x
}

fn lorentz_suite(n: usize, tol: f64) -> Result<(bool, Value), CliError> {
    let speeds = [0.0, 0.6, 0.1f64.cos(), 0.001f64.cos()];
    let (mut defect, mut inverse) = (0.0f64, 0.0f64);
    for axis in 0..n {
        for v in speeds {
            let p = BoostParams::along_axis(n, axis, v)?;
            let g2 = p.gamma().powi(2);
            let l = boost(&p);
            defect = defect.max(l.lorentz_defect() / g2);
            let back = boost(&BoostParams::along_axis(n, axis, -v)?);
            inverse = inverse.max((l.compose(&back).matrix() - LorentzMatrix::identity(n).matrix()).amax() / g2);
        }
    }
    let mut addition = 0.0f64;
    for (a, b) in [(0.3, 0.5), (0.9, -0.4), (0.99, 0.99), (-0.7, -0.2)] {
        let la = boost(&BoostParams::along_axis(n, 1, a)?);
        let lb = boost(&BoostParams::along_axis(n, 1, b)?);
        let lab = boost(&BoostParams::along_axis(n, 1, (a + b) / (1.0 + a * b))?);
        addition = addition.max((la.compose(&lb).matrix() - lab.matrix()).amax());
    }
    let mut cap = 0.0f64;
    for eps in [0.3, 0.1, 0.03] {
        let (v, _) = cap_velocity(eps)?;
        let l = boost(&BoostParams::along_axis(n, n - 1, v)?);
        for k in 0..64 {
            let y = act_on_sphere(&l, &cap_boundary(n, eps, k, 64))?;
            cap = cap.max(y[n - 1].abs());
        }
    }
    let ok = defect <= tol && inverse <= 1e2 * tol && addition <= 1e-10 && cap <= CAP_LAW_TOL;
    Ok((
        ok,
        json!({
            "defect_over_gamma_sq": defect,
            "inverse_over_gamma_sq": inverse,
            "addition": addition,
            "cap_law": cap,
        }),
    ))
}

fn glue(cfg: &RunConfig) -> Result<Run, CliError> {
    let n = cfg.dim;
    let gc = &cfg.glue;
    let base = match &gc.base {
        Some(b) => EnergyMomentum::new(b.clone())?,
        None => {
            let mut m = vec![0.0; n + 1];
            m[0] = -1.0;
            m[1] = 2.0;
            EnergyMomentum::new(m)?
        }
    };
    let order = gc.order.unwrap_or(n as f64 / 2.0);
    let family = |seed: u64| -> Result<MomentumFamily, CliError> {
        Ok(match gc.decay {
            DecayKind::Strict => MomentumFamily::strict_o(base.clone(), gc.constant, order, gc.margin, seed)?,
            DecayKind::Exact => MomentumFamily::new(base.clone(), gc.constant, order, seed)?,
            DecayKind::None => MomentumFamily::exact(base.clone()),
        })
    };
    let first = family(cfg.seed)?;
    let second = if gc.independent_corrections {
        family(cfg.seed.wrapping_add(1))?
    } else {
        first.clone()
    };
    let scenario = GluingScenario::new(first, second, epsilon_grid(gc.levels))?;
    let scan = epsilon_threshold(&scenario)?;
    let mut results = json!({
        "base": momentum_json(&base),
        "rate": scenario.first().rate(),
        "grid_points": scan.rows.len(),
        "threshold": scan.threshold,
        "margin": scan.margin,
        "c_eff_sq": scan.c_eff_sq,
        "bound_holds": scan.bound_holds(),
    });
    if scan.threshold.is_none() {
        let bad: Vec<Value> = scan
            .rows
            .iter()
            .filter(|r| r.character != CausalCharacter::TimelikePast)
            .map(|r| json!({ "eps": r.eps, "q": r.q, "character": character_name(r.character) }))
            .collect();
        results["diagnostics"] = json!({
            "message": "no grid epsilon below which every glued momentum is timelike past-pointing",
            "offending_rows": bad,
        });
    }
    let pass = scan.threshold.is_some();
    Ok((pass, results, vec![("glue.csv".into(), scan.to_csv())], exit::TOLERANCE))
}

fn cube_points(n: usize, count: usize, radius: f64, seed: u64) -> Result<Vec<ChartPoint>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..=radius)).collect();
            Ok(ChartPoint::euclidean(&x)?)
        })
        .collect()
}

fn constraints(cfg: &RunConfig) -> Result<Run, CliError> {
    let n = cfg.dim;
    let cc = &cfg.constraints;
    let (data, points): (InitialDataSet, Vec<ChartPoint>) = match &cc.data {
        DataFamily::Hyperbolic => (
            hyperbolic_data(Chart::HalfSpace, n)?,
            sample_half_space(n, cc.points, cfg.seed, (1.0 / cc.radius.max(1.0 + 1e-9), cc.radius.max(1.0 + 1e-9)), cc.radius)?,
        ),
        DataFamily::Hyperboloid => (
            graph_initial_data(HyperboloidGraph { dim: n })?,
            cube_points(n, cc.points, cc.radius, cfg.seed)?,
        ),
        DataFamily::Trig { modes, slope } => (
            graph_initial_data(TrigGraph::random(n, *modes, *slope, cfg.seed)?)?,
            cube_points(n, cc.points, cc.radius, cfg.seed)?,
        ),
        DataFamily::Interpolating { radius } => (
            graph_initial_data(InterpolatingGraph::new(n, *radius)?)?,
            cube_points(n, cc.points, cc.radius, cfg.seed)?,
        ),
    };
    let data = if cc.shift { ah_to_ae_shift(&data)? } else { data };
    let rows = constraint_sweep(&data, &points, cfg.tol)?;
    let failures = rows.iter().filter(|r| !r.dec).count();
    let max_rho = rows.iter().fold(0.0f64, |a, r| a.max(r.rho.abs()));
    let max_j = rows.iter().fold(0.0f64, |a, r| a.max(r.j_norm));
    let min_gap = rows.iter().fold(f64::INFINITY, |a, r| a.min(r.rho - r.j_norm));
    let results = json!({
        "chart": format!("{:?}", data.chart()),
        "lambda": data.lambda,
        "points": rows.len(),
        "dec_failures": failures,
        "max_abs_rho": max_rho,
        "max_j_norm": max_j,
        "min_rho_minus_j": min_gap,
    });
    Ok((failures == 0, results, vec![("constraints.csv".into(), sweep_csv(&rows))], exit::TOLERANCE))
}

fn boost_demo(cfg: &RunConfig) -> Result<Run, CliError> {
    let n = cfg.dim;
    let bc = &cfg.boost_demo;
    let mut csv = String::from("eps,v,gamma,k");
    for i in 0..n {
        csv.push_str(&format!(",y{i}"));
    }
    csv.push_str(",height\n");
    let mut worst = 0.0f64;
    let mut per_eps = Vec::new();
    for &eps in &bc.epsilons {
        let (v, gamma) = cap_velocity(eps)?;
        let l = boost(&BoostParams::along_axis(n, n - 1, v)?);
        let mut height = 0.0f64;
        for k in 0..bc.points {
            let y = act_on_sphere(&l, &cap_boundary(n, eps, k, bc.points))?;
            height = height.max(y[n - 1].abs());
            csv.push_str(&format!("{eps},{v},{gamma},{k}"));
            for c in &y {
                csv.push_str(&format!(",{c}"));
            }
            csv.push_str(&format!(",{}\n", y[n - 1]));
        }
        worst = worst.max(height);
        per_eps.push(json!({ "eps": eps, "v": v, "gamma": gamma, "max_height": height }));
    }
    let results = json!({ "caps": per_eps, "max_height": worst, "tolerance": CAP_LAW_TOL });
    Ok((worst <= CAP_LAW_TOL, results, vec![("boost.csv".into(), csv)], exit::TOLERANCE))
}
