//! Energy-momentum bookkeeping for gluing two data sets after conformal
//! boosts: corrected momentum families, the glued momentum
//! `Λ m^{1,ε} + RΛ m^{2,ε}`, its split into the cancelling leading term and
//! a transported remainder, and the scan for the small-`ε` regime where the
//! result is timelike past pointing.

use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lorentz::{boost, cap_velocity, conjugate_boost, rotation_pi, BoostParams, LorentzMatrix};
use crate::mass::{causal_character, CausalCharacter, EnergyMomentum};

/// Default `η` in the model `o(ε^p) ≈ ε^{p+η}`.
pub const DEFAULT_STRICT_O_MARGIN: f64 = 0.1;

/// Number of halvings in [`epsilon_grid`].
pub const DEFAULT_GRID_LEVELS: usize = 20;

/// Tolerance handed to [`causal_character`] during scans.
pub const CAUSAL_TOLERANCE: f64 = 1e-12;

/// `ε_k = (π/4) 2^{−k}`, `k = 0..=levels`, decreasing.
pub fn epsilon_grid(levels: usize) -> Vec<f64> {
    (0..=levels).map(|k| FRAC_PI_4 * 0.5f64.powi(k as i32)).collect()
}

/// `ε ↦ m + δ(ε)` with `δ(ε) = C ε^rate u` for a fixed seeded unit vector
/// `u ∈ ℝ^{1+n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumFamily {
    base: EnergyMomentum,
    constant: f64,
    rate: f64,
    direction: Vec<f64>,
}

impl MomentumFamily {
    pub fn new(base: EnergyMomentum, constant: f64, rate: f64, seed: u64) -> Result<Self> {
        if !(constant >= 0.0) || !constant.is_finite() {
            return Err(Error::InvalidParameter(format!("correction constant {constant} must be ≥ 0")));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter(format!("decay rate {rate} must be positive")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u: Vec<f64> = (0..=base.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().for_each(|x| *x /= norm);
        Ok(MomentumFamily {
            base,
            constant,
            rate,
            direction: u,
        })
    }

    /// `δ ≡ 0`.
    pub fn exact(base: EnergyMomentum) -> Self {
        let mut direction = vec![0.0; base.dim() + 1];
        direction[0] = 1.0;
        MomentumFamily {
            base,
            constant: 0.0,
            rate: 1.0,
            direction,
        }
    }

    /// Corrections of size `o(ε^order)`, realised as `C ε^{order + margin}`.
    pub fn strict_o(base: EnergyMomentum, constant: f64, order: f64, margin: f64, seed: u64) -> Result<Self> {
        if !(margin > 0.0) {
            return Err(Error::InvalidParameter("strict-o margin must be positive".into()));
        }
        Self::new(base, constant, order + margin, seed)
    }

    pub fn base(&self) -> &EnergyMomentum {
        &self.base
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn correction(&self, eps: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.direction.len(),
            self.direction.iter().map(|u| self.constant * eps.powf(self.rate) * u),
        )
    }

    pub fn at(&self, eps: f64) -> Result<EnergyMomentum> {
        EnergyMomentum::from_vector(&(self.base.to_vector() + self.correction(eps)))
    }
}

/// Two families sharing a spacelike or null past-pointing base momentum,
/// and a decreasing `ε` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GluingScenario {
    first: MomentumFamily,
    second: MomentumFamily,
    grid: Vec<f64>,
    pole: Vec<f64>,
    partner: Vec<f64>,
}

fn partner_of(pole: &[f64]) -> Vec<f64> {
    let k = (0..pole.len())
        .min_by(|&a, &b| pole[a].abs().total_cmp(&pole[b].abs()))
        .unwrap_or(0);
    let mut q: Vec<f64> = pole.iter().map(|p| -p * pole[k]).collect();
    q[k] += 1.0;
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.iter().map(|x| x / norm).collect()
}

impl GluingScenario {
    pub fn new(first: MomentumFamily, second: MomentumFamily, grid: Vec<f64>) -> Result<Self> {
        let base = first.base();
        if second.base() != base {
            return Err(Error::InvalidParameter(
                "both families must share the base momentum".into(),
            ));
        }
        if base.dim() < 3 {
            return Err(Error::UnsupportedDimension(base.dim()));
        }
        if !(base.energy() < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "base energy must be negative, found {}",
                base.energy()
            )));
        }
        let spatial = base.spatial_norm();
        let scale: f64 = base.components().iter().map(|x| x * x).sum();
        if base.q() > CAUSAL_TOLERANCE * scale {
            return Err(Error::InvalidParameter(
                "base momentum must be spacelike or null".into(),
            ));
        }
        if grid.is_empty() {
            return Err(Error::InvalidParameter("ε grid is empty".into()));
        }
        for w in grid.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidParameter("ε grid must be strictly decreasing".into()));
            }
        }
        for &e in &grid {
            cap_velocity(e)?;
        }
        let pole: Vec<f64> = base.spatial().iter().map(|x| x / spatial).collect();
        let partner = partner_of(&pole);
        Ok(GluingScenario {
            first,
            second,
            grid,
            pole,
            partner,
        })
    }

    pub fn dim(&self) -> usize {
        self.pole.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn first(&self) -> &MomentumFamily {
        &self.first
    }

    pub fn second(&self) -> &MomentumFamily {
        &self.second
    }

    /// Unit vector `m⃗/|m⃗|` along which both boosts act.
    pub fn pole(&self) -> &[f64] {
        &self.pole
    }

    pub fn boost_params(&self, eps: f64) -> Result<BoostParams> {
        let (v, _) = cap_velocity(eps)?;
        BoostParams::new(self.pole.clone(), v)
    }

    /// `(Λ_ε, R)`.
    pub fn matrices(&self, eps: f64) -> Result<(LorentzMatrix, LorentzMatrix)> {
        let lambda = boost(&self.boost_params(eps)?);
        let r = rotation_pi(&self.pole, &self.partner)?;
        Ok((lambda, r))
    }
}

/// `Λ m^{1,ε} + RΛ m^{2,ε}`.
pub fn glued_momentum(scenario: &GluingScenario, eps: f64) -> Result<EnergyMomentum> {
    let (lambda, r) = scenario.matrices(eps)?;
    let rl = r.compose(&lambda);
    let a = lambda.matrix() * scenario.first.at(eps)?.to_vector();
    let b = rl.matrix() * scenario.second.at(eps)?.to_vector();
    EnergyMomentum::from_vector(&(a + b))
}

/// Leading term and remainder of the glued momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// `2γ(m₀ − v|m⃗|) e₀`.
    pub leading: EnergyMomentum,
    /// `(*) = δ¹ + Λ⁻¹RΛ δ²`; equals `(1 + Λ⁻¹RΛ)δ` when the corrections agree.
    pub remainder: DVector<f64>,
    /// `leading + Λ (*)`.
    pub reconstructed: EnergyMomentum,
}

pub fn cancellation_decomposition(scenario: &GluingScenario, eps: f64) -> Result<Decomposition> {
    let params = scenario.boost_params(eps)?;
    let (lambda, r) = scenario.matrices(eps)?;
    let base = scenario.first.base();
    let gamma = params.gamma();
    let mut leading = vec![0.0; base.dim() + 1];
    leading[0] = 2.0 * gamma * (base.energy() - params.v() * base.spatial_norm());
    let leading = EnergyMomentum::new(leading)?;
    let conj = conjugate_boost(&lambda, &r);
    let remainder = scenario.first.correction(eps) + conj.matrix() * scenario.second.correction(eps);
    let reconstructed = EnergyMomentum::from_vector(&(leading.to_vector() + lambda.matrix() * &remainder))?;
    Ok(Decomposition {
        leading,
        remainder,
        reconstructed,
    })
}

/// `C² ε^{n/2 − 2}`.
pub fn remainder_bound(eps: f64, n: usize, c: f64) -> f64 {
    c * c * eps.powf(n as f64 / 2.0 - 2.0)
}

/// `max_ε ε²(1 + ‖Λ⁻¹RΛ‖)` over the grid, operator norm in the Euclidean
/// structure of `ℝ^{1+n}`. It controls `|(*)| ≤ C·C_M ε^{rate − 2}`.
pub fn conjugation_constant(scenario: &GluingScenario) -> Result<f64> {
    let mut worst = 0.0f64;
    for &eps in scenario.grid() {
        let (lambda, r) = scenario.matrices(eps)?;
        let conj = conjugate_boost(&lambda, &r);
        let op = conj.matrix().clone().singular_values().max();
        worst = worst.max(eps * eps * (1.0 + op));
    }
    Ok(worst)
}

/// `C_eff² = max(C¹, C²)·C_M`, so that
/// `|(*)| ≤ C_eff² ε^{n/2 − 2} ε^{rate − n/2}` on the grid.
pub fn effective_constant_sq(scenario: &GluingScenario) -> Result<f64> {
    let c = scenario.first.constant().max(scenario.second.constant());
    Ok(c * conjugation_constant(scenario)?)
}

/// One grid point of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub eps: f64,
    pub v: f64,
    pub gamma: f64,
    pub momentum: EnergyMomentum,
    pub q: f64,
    pub character: CausalCharacter,
    /// `|(*)|`.
    pub remainder: f64,
    /// `C_eff² ε^{n/2−2} ε^{rate − n/2}` with the slower of the two rates.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub rows: Vec<ScanRow>,
    /// Largest grid `ε₀` such that every grid `ε ≤ ε₀` gives a timelike
    /// past-pointing momentum.
    pub threshold: Option<f64>,
    /// `min q/γ²` over the grid points at or below the threshold.
    pub margin: Option<f64>,
    pub c_eff_sq: f64,
}

impl ScanResult {
    /// Whether `|(*)| ≤ bound` at every grid point.
    pub fn bound_holds(&self) -> bool {
        self.rows.iter().all(|r| r.remainder <= r.bound)
    }

    /// CSV with columns `eps,v,gamma,m0..mn,q,remainder,bound`.
    pub fn to_csv(&self) -> String {
        let n = self.rows.first().map_or(0, |r| r.momentum.dim() + 1);
        let mut out = String::from("eps,v,gamma,");
        for i in 0..n {
            let _ = write!(out, "m{i},");
        }
        out.push_str("q,remainder,bound\n");
        for r in &self.rows {
            let _ = write!(out, "{},{},{},", r.eps, r.v, r.gamma);
            for c in r.momentum.components() {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{},{},{}", r.q, r.remainder, r.bound);
        }
        out
    }
}

/// Evaluates the scenario on its grid and locates the threshold.
pub fn epsilon_threshold(scenario: &GluingScenario) -> Result<ScanResult> {
    use rayon::prelude::*;
    let n = scenario.dim() as f64;
    let c_eff_sq = effective_constant_sq(scenario)?;
    let rate = scenario.first.rate().min(scenario.second.rate());
    let rows: Vec<ScanRow> = scenario
        .grid()
        .par_iter()
        .map(|&eps| {
            let params = scenario.boost_params(eps)?;
            let m = glued_momentum(scenario, eps)?;
            let dec = cancellation_decomposition(scenario, eps)?;
            Ok(ScanRow {
                eps,
                v: params.v(),
                gamma: params.gamma(),
                q: m.q(),
                character: causal_character(&m, CAUSAL_TOLERANCE),
                momentum: m,
                remainder: dec.remainder.norm(),
                bound: remainder_bound(eps, scenario.dim(), c_eff_sq.sqrt()) * eps.powf(rate - n / 2.0),
            })
        })
        .collect::<Result<_>>()?;
    let mut threshold = None;
    let mut margin: Option<f64> = None;
    for row in rows.iter().rev() {
        if row.character != CausalCharacter::TimelikePast {
            break;
        }
        threshold = Some(row.eps);
        let m = row.q / (row.gamma * row.gamma);
        margin = Some(margin.map_or(m, |x| x.min(m)));
    }
    Ok(ScanResult {
        rows,
        threshold,
        margin,
        c_eff_sq,
    })
}
