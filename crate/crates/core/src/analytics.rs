//! Closed-form tail constants, the exponent root solver and tail-slope
//! fitting of simulated ruin curves.

use serde::{Deserialize, Serialize};

use crate::chain::RuinEstimate;
use crate::claims::ClaimDistribution;
use crate::error::{Error, Result};
use crate::model::ModelParams;

fn require_positive_beta(params: &ModelParams) -> Result<f64> {
    let beta = params.beta();
    if beta > 0.0 && beta.is_finite() {
        Ok(beta)
    } else {
        Err(Error::domain(format!("requires β > 0, got β = {beta}")))
    }
}

/// `ϱ(β) = (β − 1)σ²/(2α)`, defined for `β > 1`.
pub fn varrho(params: &ModelParams) -> Result<f64> {
    let beta = params.beta();
    if !(beta > 1.0) || !beta.is_finite() {
        return Err(Error::domain(format!("ϱ(β) requires β > 1, got β = {beta}")));
    }
    Ok((beta - 1.0) * params.sigma_sq() / (2.0 * params.alpha()))
}

/// The factor `J(β)` of the upper bound `C*(β) = J(β) E ξ^β`.
///
/// Branches are selected on `0 < β ≤ 1`, `1 < β ≤ 2` and `β > 2`.
pub fn j_factor(params: &ModelParams) -> Result<f64> {
    let beta = require_positive_beta(params)?;
    let lead = 2.0 * params.alpha() / (params.sigma_sq() * beta * beta);
    let branch = if beta <= 1.0 {
        1.0
    } else if beta <= 2.0 {
        let rho = varrho(params)?;
        beta * (1.0 + 1.0 / rho)
    } else {
        let rho = varrho(params)?;
        let inner = (1.0 + rho).powf(1.0 / (beta - 1.0)) - 1.0;
        beta * 2f64.powf(beta - 2.0) * (1.0 + inner.powf(1.0 - beta))
    };
    Ok(lead * branch)
}

/// `C*(β) = J(β) E ξ^β`.
pub fn upper_constant(params: &ModelParams, claims: &ClaimDistribution) -> Result<f64> {
    let j = j_factor(params)?;
    Ok(j * claims.moment(params.beta())?)
}

/// `E M^q = 2α / (2α + (β − q) q σ²)` for `M = exp(−σ w_θ − κθ)`, `θ ~ Exp(α)`.
pub fn moment_m(params: &ModelParams, q: f64) -> Result<f64> {
    let two_alpha = 2.0 * params.alpha();
    let denom = two_alpha + (params.beta() - q) * q * params.sigma_sq();
    if denom > 0.0 && denom.is_finite() {
        Ok(two_alpha / denom)
    } else {
        Err(Error::MomentDivergence { order: q, law: "M".to_string() })
    }
}

/// `μ = E M^β log M = βσ²/(2α)`.
pub fn mu(params: &ModelParams) -> Result<f64> {
    let beta = require_positive_beta(params)?;
    Ok(beta * params.sigma_sq() / (2.0 * params.alpha()))
}

/// `β̃ = β − 2γ/σ²`, the exponent with `E (e^{γθ} M)^{β̃} = 1` under an
/// exponentially decaying premium.
pub fn effective_exponent(params: &ModelParams, gamma: f64) -> Result<f64> {
    require_positive_beta(params)?;
    if !gamma.is_finite() || gamma > 0.0 {
        return Err(Error::domain(format!("premium decay must be finite and ≤ 0, got {gamma}")));
    }
    Ok(params.beta() - 2.0 * gamma / params.sigma_sq())
}

/// Root of `moment_fn(q) = 1` inside `bracket` by bisection.
///
/// The bracket must straddle the crossing. Bisection runs to floating-point
/// resolution of `q`, not merely until `|moment_fn(q) − 1|` is small, because
/// the moment curve is flat near its root when `μ` is small.
pub fn solve_exponent<F>(moment_fn: F, bracket: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = bracket;
    let err = Error::Bracketing { lo, hi };
    if !(lo < hi) {
        return Err(err);
    }
    let g = |q: f64| moment_fn(q) - 1.0;
    let (g_lo, g_hi) = (g(lo), g(hi));
    if g_lo.is_nan() || g_hi.is_nan() {
        return Err(err);
    }
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(err);
    }
    let lo_negative = g_lo < 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if (g_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if g(lo).abs() <= g(hi).abs() { lo } else { hi })
}

/// All explicit constants of the upper bound for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub beta: f64,
    /// `None` when `β ≤ 1`, where `ϱ` does not enter `J(β)`.
    pub varrho: Option<f64>,
    pub j_factor: f64,
    pub upper_constant: f64,
    pub mu: f64,
    pub claim_beta_moment: f64,
}

impl BoundsReport {
    pub fn compute(params: &ModelParams, claims: &ClaimDistribution) -> Result<Self> {
        let beta = require_positive_beta(params)?;
        let claim_beta_moment = claims.moment(beta)?;
        let j = j_factor(params)?;
        Ok(Self {
            beta,
            varrho: varrho(params).ok(),
            j_factor: j,
            upper_constant: j * claim_beta_moment,
            mu: mu(params)?,
            claim_beta_moment,
        })
    }
}

/// One point of an estimated ruin curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub u: f64,
    pub psi: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Number of observed ruins, when known.
    pub events: Option<u64>,
}

impl TailPoint {
    /// An exact curve value with no sampling uncertainty.
    pub fn exact(u: f64, psi: f64) -> Self {
        Self { u, psi, ci_lo: psi, ci_hi: psi, events: None }
    }
}

impl From<&RuinEstimate> for TailPoint {
    fn from(e: &RuinEstimate) -> Self {
        Self { u: e.u, psi: e.psi_hat, ci_lo: e.ci_lo, ci_hi: e.ci_hi, events: Some(e.n_ruined) }
    }
}

/// Weighted least-squares fit of `log Ψ̂` against `log u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub u_range: (f64, f64),
    pub n_points: usize,
}

/// Points with fewer ruins than this are dropped from the fit.
pub const MIN_TAIL_EVENTS: u64 = 10;
const MIN_FIT_POINTS: usize = 4;

/// Fits `log Ψ̂ = intercept + slope · log u`.
///
/// Weights are the inverse squared relative half-widths of the confidence
/// intervals; if any usable point has a degenerate interval all points get
/// unit weight.
pub fn fit_tail(curve: &[TailPoint]) -> Result<TailFit> {
    let usable: Vec<&TailPoint> = curve
        .iter()
        .filter(|p| p.u > 0.0 && p.psi > 0.0 && p.u.is_finite())
        .filter(|p| p.events.is_none_or(|k| k >= MIN_TAIL_EVENTS))
        .collect();
    if usable.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData { needed: MIN_FIT_POINTS, got: usable.len() });
    }
    let rel: Vec<f64> = usable.iter().map(|p| (p.ci_hi - p.ci_lo) / (2.0 * p.psi)).collect();
    let weights: Vec<f64> = if rel.iter().all(|r| r.is_finite() && *r > 0.0) {
        rel.iter().map(|r| 1.0 / (r * r)).collect()
    } else {
        vec![1.0; usable.len()]
    };
    let xs: Vec<f64> = usable.iter().map(|p| p.u.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.psi.ln()).collect();

    let sw: f64 = weights.iter().sum();
    let x_bar = weights.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let y_bar = weights.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((w, x), y) in weights.iter().zip(&xs).zip(&ys) {
        sxx += w * (x - x_bar) * (x - x_bar);
        sxy += w * (x - x_bar) * (y - y_bar);
    }
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData { needed: MIN_FIT_POINTS, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let rss: f64 = weights
        .iter()
        .zip(&xs)
        .zip(&ys)
        .map(|((w, x), y)| {
            let r = y - intercept - slope * x;
            w * r * r
        })
        .sum();
    let s2 = rss / (usable.len() - 2) as f64;
    let u_min = usable.iter().map(|p| p.u).fold(f64::INFINITY, f64::min);
    let u_max = usable.iter().map(|p| p.u).fold(f64::NEG_INFINITY, f64::max);
    Ok(TailFit { slope, intercept, stderr: (s2 / sxx).sqrt(), u_range: (u_min, u_max), n_points: usable.len() })
}
