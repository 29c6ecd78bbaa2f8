//! Run configuration. A config file is a UTF-8 JSON object; every field is
//! optional and missing fields take the defaults below. Unknown fields are
//! rejected so that typos do not silently fall back to defaults.
//!
//! ```json
//! {
//!   "dim": 3, "seed": 0, "tol": 1e-4,
//!   "mass": { "metric": { "family": "schwarzschild-ads", "mass": 1.0 } },
//!   "glue": { "decay": "strict", "constant": 1.0 }
//! }
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum ConfigError {
    Parse(serde_json::Error),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(e) => write!(f, "cannot parse config: {e}"),
            ConfigError::Invalid(msg) => write!(f, "invalid config: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub seed: u64,
    /// Pass/fail tolerance of the command; see each command for its meaning.
    pub tol: f64,
    pub mass: MassConfig,
    pub verify: VerifyConfig,
    pub glue: GlueConfig,
    pub constraints: ConstraintsConfig,
    pub boost_demo: BoostDemoConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 3,
            seed: 0,
            tol: 1e-4,
            mass: MassConfig::default(),
            verify: VerifyConfig::default(),
            glue: GlueConfig::default(),
            constraints: ConstraintsConfig::default(),
            boost_demo: BoostDemoConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricFamily {
    Hyperbolic,
    SchwarzschildAds {
        mass: f64,
    },
    /// Mass aspect `μ(x) = c₀ + Σ cᵢ xⁱ` on the unit sphere.
    Aspect {
        coefficients: Vec<f64>,
    },
    /// `b` plus a decaying symmetric perturbation of amplitude `t`.
    Perturbed {
        amplitude: f64,
        sigma: Option<f64>,
        tilt: Option<Vec<f64>>,
        shape: Option<Vec<f64>>,
        lower_cutoff: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Auto,
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HemisphereChoice {
    Full,
    Upper,
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MassConfig {
    pub metric: MetricFamily,
    /// Product-rule resolution for `n ∈ {3, 4}`.
    pub resolution: usize,
    /// Sample count for the Monte Carlo rule used when `n ≥ 5`.
    pub monte_carlo_samples: usize,
    /// Polar radii of the coordinate spheres.
    pub radii: Vec<f64>,
    pub terms: usize,
    pub derivatives: DerivativeMode,
    pub subtract_background: bool,
    pub hemisphere: HemisphereChoice,
    /// `(σ, s)` of the fall-off; fixes the extrapolation exponent.
    pub decay: Option<[f64; 2]>,
}

impl Default for MassConfig {
    fn default() -> Self {
        MassConfig {
            metric: MetricFamily::Hyperbolic,
            resolution: hypmass::quadrature::DEFAULT_RESOLUTION,
            monte_carlo_samples: 100_000,
            radii: (3..=8).map(|k| 2f64.powi(k)).collect(),
            terms: 2,
            derivatives: DerivativeMode::Auto,
            subtract_background: true,
            hemisphere: HemisphereChoice::Full,
            decay: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Half-space sample points for the residual suites.
    pub points: usize,
    pub z_range: [f64; 2],
    pub w_radius: f64,
    pub kid_tol: f64,
    pub kid_fd_tol: f64,
    pub killing_tol: f64,
    pub lorentz_tol: f64,
    pub graphs: usize,
    pub graph_tol: f64,
    /// Adds `0.01 z` to the first static potential. Test hook only.
    pub corrupt_kid: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            points: 1000,
            z_range: [0.1, 10.0],
            w_radius: 10.0,
            kid_tol: 1e-10,
            kid_fd_tol: 1e-6,
            killing_tol: 1e-10,
            lorentz_tol: 1e-12,
            graphs: 10,
            graph_tol: 1e-5,
            corrupt_kid: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayKind {
    /// `δ = C ε^{order + margin}`.
    Strict,
    /// `δ = C ε^{order}`.
    Exact,
    /// No corrections.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlueConfig {
    /// Base momentum `(m₀, m⃗)`; defaults to `(−1, 2, 0, …)`.
    pub base: Option<Vec<f64>>,
    pub decay: DecayKind,
    pub constant: f64,
    /// Correction order `p`; defaults to `n/2`.
    pub order: Option<f64>,
    pub margin: f64,
    pub levels: usize,
    /// Draw the second family's correction direction independently.
    pub independent_corrections: bool,
}

impl Default for GlueConfig {
    fn default() -> Self {
        GlueConfig {
            base: None,
            decay: DecayKind::Strict,
            constant: 1.0,
            order: None,
            margin: hypmass::gluing::DEFAULT_STRICT_O_MARGIN,
            levels: hypmass::gluing::DEFAULT_GRID_LEVELS,
            independent_corrections: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataFamily {
    /// `(b, 0, −n(n−1)/2)` in the half-space chart.
    Hyperbolic,
    /// The lower unit hyperboloid in Minkowski space.
    Hyperboloid,
    /// Seeded trigonometric graph with `|∇f| ≤ slope`.
    Trig { modes: usize, slope: f64 },
    /// Hyperboloid out to `R + 1`, constant from `R + 3`.
    Interpolating { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintsConfig {
    pub data: DataFamily,
    pub points: usize,
    /// Sampling radius for graph coordinates; half-space samples use `|w| ≤ radius`, `z ∈ [1/radius, radius]`.
    pub radius: f64,
    /// Replace `(g, K, Λ)` by `(g, K − g, 0)` before evaluating.
    pub shift: bool,
}

impl Default for ConstraintsConfig {
    fn default() -> Self {
        ConstraintsConfig {
            data: DataFamily::Hyperboloid,
            points: 200,
            radius: 3.0,
            shift: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostDemoConfig {
    pub epsilons: Vec<f64>,
    /// Points on each boundary circle.
    pub points: usize,
}

impl Default for BoostDemoConfig {
    fn default() -> Self {
        BoostDemoConfig {
            epsilons: vec![0.3, 0.1, 0.03],
            points: 16,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(ConfigError::Parse)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let n = self.dim;
        if !(3..=hypmass::scalar::MAX_DIM).contains(&n) {
            return invalid(format!("dim must lie in 3..={}, found {n}", hypmass::scalar::MAX_DIM));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return invalid("tol must be positive");
        }
        let m = &self.mass;
        if m.radii.len() < 2 {
            return invalid("mass.radii needs at least two radii");
        }
        if m.radii[0] <= 0.0 || m.radii.windows(2).any(|w| !(w[1] > w[0])) || m.radii.iter().any(|r| !r.is_finite())
        {
            return invalid("mass.radii must be positive and increasing");
        }
        if m.resolution == 0 || m.resolution > 512 {
            return invalid("mass.resolution must lie in 1..=512");
        }
        if m.monte_carlo_samples == 0 || m.monte_carlo_samples > 50_000_000 {
            return invalid("mass.monte_carlo_samples must lie in 1..=50000000");
        }
        if m.terms == 0 || m.terms > 8 {
            return invalid("mass.terms must lie in 1..=8");
        }
        if let MetricFamily::Aspect { coefficients } = &m.metric {
            if coefficients.len() != n + 1 {
                return invalid(format!("aspect needs {} coefficients", n + 1));
            }
        }
        let v = &self.verify;
        if v.points == 0 || v.points > 100_000 || v.graphs > 1000 {
            return invalid("verify.points must lie in 1..=100000 and verify.graphs in 0..=1000");
        }
        if !(v.z_range[0] > 0.0 && v.z_range[1] > v.z_range[0] && v.z_range[1].is_finite())
            || !(v.w_radius >= 0.0 && v.w_radius.is_finite())
        {
            return invalid("verify sampling box is empty");
        }
        for t in [v.kid_tol, v.kid_fd_tol, v.killing_tol, v.lorentz_tol, v.graph_tol] {
            if !(t > 0.0) {
                return invalid("verify tolerances must be positive");
            }
        }
        let g = &self.glue;
        if g.levels > 40 {
            return invalid("glue.levels must be at most 40");
        }
        if let Some(b) = &g.base {
            if b.len() != n + 1 {
                return invalid(format!("glue.base needs {} components", n + 1));
            }
        }
        let c = &self.constraints;
        if c.points == 0 || c.points > 1_000_000 || !(c.radius > 0.0) || !c.radius.is_finite() {
            return invalid("constraints.points and constraints.radius must be positive");
        }
        let b = &self.boost_demo;
        if b.points == 0 || b.points > 100_000 || b.epsilons.is_empty() {
            return invalid("boost_demo needs points and at least one epsilon");
        }
        Ok(())
    }
}
