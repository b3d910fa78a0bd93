//! Perpetuity samplers for `R = Q + M R` and `R* = Q* + M (R*)_+`, the tail
//! constant of `R`, and checks of the moment hypotheses behind the power
//! tails.
//!
//! With `M = 1/λ` and `Q = ξ/λ` for one inter-claim block, the zero-premium
//! ruin probability is exactly `P(R > u)`, and the ruin probability of the
//! chain with constant premium `c*` is exactly `P(R* > u)`.

use std::cmp::Ordering;
use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::moment_m;
use crate::bridge::{eta_integral, BridgeGrid, DEFAULT_BRIDGE_POINTS};
use crate::claims::ClaimDistribution;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::premium::PremiumSchedule;
use crate::rng::{keys, path_stream};
use crate::stats::MeanVar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerpetuityConfig {
    /// Hard cap on the number of series terms.
    pub k_max: u64,
    /// The series stops once `Π M_j` falls below this.
    pub eps_prod: f64,
    pub n_samples: u64,
    pub seed: u64,
    /// Quadrature grid for `η*` in the `R*` sampler.
    pub bridge_points: usize,
}

impl Default for PerpetuityConfig {
    fn default() -> Self {
        Self { k_max: 100_000, eps_prod: 1e-12, n_samples: 1_000_000, seed: 0, bridge_points: DEFAULT_BRIDGE_POINTS }
    }
}

impl PerpetuityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::config("k_max must be at least 1"));
        }
        if !(self.eps_prod > 0.0 && self.eps_prod < 1.0) {
            return Err(Error::config("eps_prod must lie in (0, 1)"));
        }
        if self.n_samples == 0 {
            return Err(Error::config("n_samples must be at least 1"));
        }
        if self.bridge_points < 2 {
            return Err(Error::config("bridge_points must be at least 2"));
        }
        Ok(())
    }
}

/// One block: `θ`, `w_θ`, `λ`, and `M = 1/λ`.
fn draw_block<R: Rng + ?Sized>(rng: &mut R, params: &ModelParams) -> (f64, f64, f64) {
    let theta = rng.sample::<f64, _>(Exp1) / params.alpha();
    let w_theta = theta.sqrt() * rng.sample::<f64, _>(StandardNormal);
    let log_m = -(params.sigma() * w_theta + params.kappa() * theta);
    (theta, w_theta, log_m.exp())
}

/// One pair `(M, Q) = (1/λ, ξ/λ)`. Draws θ, `w_θ`, then ξ.
pub fn sample_mq<R: Rng + ?Sized>(rng: &mut R, params: &ModelParams, claims: &ClaimDistribution) -> (f64, f64) {
    let (_, _, m) = draw_block(rng, params);
    let xi = claims.sample(rng);
    (m, xi * m)
}

/// A truncated series sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSample {
    /// Partial sum of `Q_k Π_{j<k} M_j`.
    pub r: f64,
    /// Running supremum of the partial sums of `Q*_k Π_{j<k} M_j`.
    pub r_star: f64,
    pub terms: u64,
    /// The term cap was reached before the product fell below `eps_prod`.
    pub truncated: bool,
}

/// Builds `R` and `R*` from one shared sequence of blocks.
///
/// Per term the draw order is θ, `w_θ`, the bridge for `η*` (only when
/// `c_star > 0`), then ξ. With `c_star = 0` the draws coincide with
/// [`sample_r`] and `r_star == r`.
pub fn sample_series<R: Rng + ?Sized>(
    rng: &mut R,
    params: &ModelParams,
    claims: &ClaimDistribution,
    c_star: f64,
    cfg: &PerpetuityConfig,
    grid: &mut BridgeGrid,
) -> SeriesSample {
    let premium = PremiumSchedule::Constant { rate: c_star };
    let mut prod = 1.0;
    let mut r = 0.0;
    let mut y_star = 0.0;
    let mut sup = f64::NEG_INFINITY;
    let mut k = 0;
    loop {
        let (theta, w_theta, m) = draw_block(rng, params);
        let eta = if c_star > 0.0 {
            grid.resample(rng, theta, w_theta, cfg.bridge_points);
            eta_integral(grid, &premium, params, 0.0, 0.0)
        } else {
            0.0
        };
        let xi = claims.sample(rng);
        r += prod * xi * m;
        y_star += prod * (xi - eta) * m;
        sup = sup.max(y_star);
        prod *= m;
        k += 1;
        if prod < cfg.eps_prod || k >= cfg.k_max {
            break;
        }
    }
    SeriesSample { r, r_star: sup, terms: k, truncated: prod >= cfg.eps_prod }
}

/// One draw of the perpetuity `R = Q_1 + Σ_{k≥2} Q_k Π_{j<k} M_j`.
pub fn sample_r<R: Rng + ?Sized>(
    rng: &mut R,
    params: &ModelParams,
    claims: &ClaimDistribution,
    cfg: &PerpetuityConfig,
) -> SeriesSample {
    let mut grid = BridgeGrid::with_capacity(0);
    sample_series(rng, params, claims, 0.0, cfg, &mut grid)
}

/// One draw of `R* = sup_n Y*_n` for constant premium `c_star`.
pub fn sample_rstar<R: Rng + ?Sized>(
    rng: &mut R,
    params: &ModelParams,
    claims: &ClaimDistribution,
    c_star: f64,
    cfg: &PerpetuityConfig,
) -> SeriesSample {
    let mut grid = BridgeGrid::with_capacity(cfg.bridge_points);
    sample_series(rng, params, claims, c_star, cfg, &mut grid)
}

/// A batch of series samples, in stream order.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesBatch {
    pub samples: Vec<SeriesSample>,
}

impl SeriesBatch {
    pub fn r_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.r).collect()
    }

    pub fn r_star_values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.r_star).collect()
    }

    pub fn truncated_fraction(&self) -> f64 {
        self.samples.iter().filter(|s| s.truncated).count() as f64 / self.samples.len() as f64
    }
}

fn require_convergent(params: &ModelParams) -> Result<()> {
    params.require_volatile()?;
    if params.beta() > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("the perpetuity diverges unless β > 0, got β = {}", params.beta())))
    }
}

/// `cfg.n_samples` independent series draws; sample `i` uses stream `i`.
pub fn sample_series_batch(
    params: &ModelParams,
    claims: &ClaimDistribution,
    c_star: f64,
    cfg: &PerpetuityConfig,
) -> Result<SeriesBatch> {
    require_convergent(params)?;
    claims.validate()?;
    cfg.validate()?;
    if !(c_star.is_finite() && c_star >= 0.0) {
        return Err(Error::domain(format!("premium rate must be non-negative, got {c_star}")));
    }
    let key = if c_star > 0.0 { keys::PERPETUITY_STAR } else { keys::PERPETUITY };
    let samples = (0..cfg.n_samples)
        .into_par_iter()
        .map_init(
            || BridgeGrid::with_capacity(cfg.bridge_points),
            |grid, i| {
                let mut rng = path_stream(cfg.seed, key, i);
                sample_series(&mut rng, params, claims, c_star, cfg, grid)
            },
        )
        .collect();
    Ok(SeriesBatch { samples })
}

/// `(ξ + R)^β − R^β`, evaluated without cancellation when `ξ ≪ R`.
fn increment_power(xi: f64, r: f64, beta: f64) -> f64 {
    if r > 0.0 {
        r.powf(beta) * (beta * (xi / r).ln_1p()).exp_m1()
    } else {
        xi.powf(beta)
    }
}

/// Monte Carlo estimate of `C_1 = 2α E[(ξ + R)^β − R^β] / (β²σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailConstantEstimate {
    pub c1_hat: f64,
    pub se: f64,
    pub n_samples: u64,
    /// Fraction of `R` draws that hit `k_max`.
    pub truncated_fraction: f64,
}

/// Estimates the tail constant of `R` with a fresh ξ independent of each
/// `R` draw.
pub fn estimate_c1(params: &ModelParams, claims: &ClaimDistribution, cfg: &PerpetuityConfig) -> Result<TailConstantEstimate> {
    require_convergent(params)?;
    cfg.validate()?;
    let beta = params.beta();
    claims.moment(beta)?;
    let draws: Vec<(f64, bool)> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_stream(cfg.seed, keys::TAIL_CONSTANT, i);
            let s = sample_r(&mut rng, params, claims, cfg);
            let xi = claims.sample(&mut rng);
            (increment_power(xi, s.r, beta), s.truncated)
        })
        .collect();
    let mv: MeanVar = draws.iter().map(|d| d.0).collect();
    let truncated = draws.iter().filter(|d| d.1).count();
    let scale = 2.0 * params.alpha() / (beta * beta * params.sigma_sq());
    Ok(TailConstantEstimate {
        c1_hat: scale * mv.mean(),
        se: scale * mv.std_error(),
        n_samples: cfg.n_samples,
        truncated_fraction: truncated as f64 / cfg.n_samples as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    /// Closed-form value or bound, when finite.
    pub value: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldieReport {
    pub beta: f64,
    pub delta: f64,
    /// `√(2α/σ² + β²/4) − β/2`: `E M^{β+δ}` is finite iff `δ` is below it.
    pub delta_bound: f64,
    pub checks: Vec<HypothesisCheck>,
}

impl GoldieReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Evaluates the moment hypotheses for `(M, Q)` with slack `delta`.
pub fn check_goldie_hypotheses(params: &ModelParams, claims: &ClaimDistribution, delta: f64) -> GoldieReport {
    let beta = params.beta();
    let alpha = params.alpha();
    let s2 = params.sigma_sq();
    let positive = beta > 0.0 && beta.is_finite();
    let order = beta + delta;
    let mut checks = Vec::with_capacity(6);

    checks.push(HypothesisCheck { name: "beta > 0", value: Some(beta), passed: positive });

    let m_beta = moment_m(params, beta).ok();
    checks.push(HypothesisCheck {
        name: "E M^beta = 1",
        value: m_beta,
        passed: positive && m_beta.is_some_and(|v| (v - 1.0).abs() <= 1e-12),
    });

    // E M^β (log M)_+ ≤ (βσ² + κ) E θ + σ √(2/π) E √θ, with θ ~ Exp(α).
    let log_bound = (beta * s2 + params.kappa()).abs() / alpha
        + params.sigma() * (2.0 / std::f64::consts::PI).sqrt() * std::f64::consts::PI.sqrt() / (2.0 * alpha.sqrt());
    checks.push(HypothesisCheck {
        name: "E M^beta (log M)_+ < inf",
        value: Some(log_bound),
        passed: positive && log_bound.is_finite(),
    });

    let m_slack = if delta > 0.0 { moment_m(params, order).ok() } else { None };
    checks.push(HypothesisCheck { name: "E M^(beta+delta) < inf", value: m_slack, passed: positive && m_slack.is_some() });

    let xi_slack = if delta > 0.0 && order > 0.0 { claims.moment(order).ok() } else { None };
    checks.push(HypothesisCheck { name: "E xi^(beta+delta) < inf", value: xi_slack, passed: xi_slack.is_some() });

    let q_slack = m_slack.zip(xi_slack).map(|(m, x)| m * x);
    checks.push(HypothesisCheck { name: "E |Q|^(beta+delta) < inf", value: q_slack, passed: positive && q_slack.is_some() });

    let alpha1 = 2.0 * alpha / s2;
    GoldieReport { beta, delta, delta_bound: (alpha1 + beta * beta / 4.0).sqrt() - beta / 2.0, checks }
}

/// Writes the upper `fraction` of `samples`, largest first, as a one-column
/// CSV with header `r`.
pub fn write_tail_csv<W: Write>(mut out: W, samples: &[f64], fraction: f64) -> io::Result<()> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    let keep = ((sorted.len() as f64 * fraction).ceil() as usize).clamp(1.min(sorted.len()), sorted.len());
    writeln!(out, "r")?;
    for r in &sorted[..keep] {
        writeln!(out, "{r}")?;
    }
    Ok(())
}
