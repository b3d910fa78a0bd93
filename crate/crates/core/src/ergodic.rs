//! Random-coefficient AR(1) processes `x_n = a_n x_{n−1} + b_n` and the
//! descending ladder epochs used to sub-sample the critical (`β = 0`) chain.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::bridge::{eta_integral, BridgeGrid, DEFAULT_BRIDGE_POINTS};
use crate::claims::ClaimDistribution;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::premium::PremiumSchedule;
use crate::rng::{keys, path_stream};
use crate::stats::MeanVar;

/// Draws one i.i.d. coefficient pair `(a_n, b_n)`.
pub type CoefficientSampler = Arc<dyn Fn(&mut dyn RngCore) -> (f64, f64) + Send + Sync>;

#[derive(Clone)]
pub struct ArSpec {
    pub coefficients: CoefficientSampler,
    pub x0: f64,
    /// Moment order `δ ∈ (0, 1]` of the contraction condition.
    pub delta: f64,
    /// Declared `ρ = E|a|^δ`, required to be below one.
    pub rho: f64,
}

impl fmt::Debug for ArSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ArSpec").field("x0", &self.x0).field("delta", &self.delta).field("rho", &self.rho).finish()
    }
}

impl ArSpec {
    pub fn new(coefficients: CoefficientSampler, x0: f64, delta: f64, rho: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::domain(format!("δ must lie in (0, 1], got {delta}")));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::domain(format!("declared ρ must lie in [0, 1), got {rho}")));
        }
        Ok(Self { coefficients, x0, delta, rho })
    }

    /// `a_n ≡ a`, `b_n ≡ b`.
    pub fn constant(a: f64, b: f64, x0: f64) -> Result<Self> {
        Self::new(Arc::new(move |_: &mut dyn RngCore| (a, b)), x0, 1.0, a.abs())
    }

    /// `a_n ≡ a`, `b_n ~ N(0, sd²)`, started at zero.
    pub fn gaussian_noise(a: f64, sd: f64) -> Result<Self> {
        Self::new(
            Arc::new(move |rng: &mut dyn RngCore| {
                let z: f64 = rng.sample(StandardNormal);
                (a, sd * z)
            }),
            0.0,
            1.0,
            a.abs(),
        )
    }

    pub fn draw(&self, rng: &mut dyn RngCore) -> (f64, f64) {
        (self.coefficients)(rng)
    }

    /// Monte Carlo check of `E|a|^δ` against the declared `ρ` (within four
    /// standard errors, and below one) and finiteness of `E|b|^δ`.
    pub fn verify(&self, n: usize, rng: &mut dyn RngCore) -> ContractionCheck {
        let mut a_mv = MeanVar::new();
        let mut b_mv = MeanVar::new();
        for _ in 0..n {
            let (a, b) = self.draw(rng);
            a_mv.push(a.abs().powf(self.delta));
            b_mv.push(b.abs().powf(self.delta));
        }
        let tol = 4.0 * a_mv.std_error() + 1e-12;
        ContractionCheck {
            rho_hat: a_mv.mean(),
            rho_se: a_mv.std_error(),
            b_moment: b_mv.mean(),
            passed: (a_mv.mean() - self.rho).abs() <= tol && self.rho < 1.0 && b_mv.mean().is_finite(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionCheck {
    pub rho_hat: f64,
    pub rho_se: f64,
    pub b_moment: f64,
    pub passed: bool,
}

/// `x_1, …, x_n` of the recursion from `spec.x0`.
pub fn ar_path(spec: &ArSpec, n: usize, rng: &mut dyn RngCore) -> Vec<f64> {
    let mut x = spec.x0;
    (0..n)
        .map(|_| {
            let (a, b) = spec.draw(rng);
            x = a * x + b;
            x
        })
        .collect()
}

/// One draw of the stationary limit `x_∞ = Σ_k π_{k−1} b_k`, truncated once
/// `|π_k| < eps_prod` or after `k_max` terms.
pub fn sample_x_infinity(spec: &ArSpec, k_max: u64, eps_prod: f64, rng: &mut dyn RngCore) -> f64 {
    let mut pi = 1.0;
    let mut sum = 0.0;
    for _ in 0..k_max {
        let (a, b) = spec.draw(rng);
        sum += pi * b;
        pi *= a;
        if pi.abs() < eps_prod {
            break;
        }
    }
    sum
}

/// `N⁻¹ Σ f(x_n)`; `None` for an empty path.
pub fn cesaro_average(f: impl Fn(f64) -> f64, path: &[f64]) -> Option<f64> {
    if path.is_empty() {
        None
    } else {
        Some(path.iter().map(|&x| f(x)).sum::<f64>() / path.len() as f64)
    }
}

/// Bounded uniformly continuous test functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `sin(clamp(x, −π/2, π/2))`.
    ClampedSine,
    /// `min(x², 1) · 1{x ≤ 0}`: positive mass iff `P(x_∞ < 0) > 0`.
    NegativeSquare,
    /// `1 / (1 + e^{−x})`.
    Logistic,
}

impl TestFunction {
    pub const ALL: [TestFunction; 3] = [TestFunction::ClampedSine, TestFunction::NegativeSquare, TestFunction::Logistic];

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::ClampedSine => x.clamp(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2).sin(),
            TestFunction::NegativeSquare => {
                if x <= 0.0 {
                    (x * x).min(1.0)
                } else {
                    0.0
                }
            }
            TestFunction::Logistic => 1.0 / (1.0 + (-x).exp()),
        }
    }
}

/// Descending ladder epochs `t_n = inf{k > t_{n−1} : Σ_{t_{n−1} < j ≤ k} ν_j < 0}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LadderSequence {
    /// `t_1 < t_2 < …` as 1-based indices into the increments.
    pub epochs: Vec<usize>,
    /// The increments ran out before the requested number of epochs.
    pub exhausted: bool,
}

impl LadderSequence {
    /// `ρ_j = t_j − t_{j−1}` with `t_0 = 0`.
    pub fn increments(&self) -> Vec<usize> {
        let mut prev = 0;
        self.epochs
            .iter()
            .map(|&t| {
                let d = t - prev;
                prev = t;
                d
            })
            .collect()
    }
}

/// First `n_epochs` descending ladder epochs of the walk with increments `nu`.
pub fn ladder_epochs(nu: &[f64], n_epochs: usize) -> LadderSequence {
    let mut epochs = Vec::with_capacity(n_epochs);
    let mut block = 0.0;
    for (k, &v) in nu.iter().enumerate() {
        if epochs.len() == n_epochs {
            break;
        }
        block += v;
        if block < 0.0 {
            epochs.push(k + 1);
            block = 0.0;
        }
    }
    let exhausted = epochs.len() < n_epochs;
    LadderSequence { epochs, exhausted }
}

/// First descent time of a standard Gaussian walk, or `None` past `cap`.
pub fn first_descent_time<R: Rng + ?Sized>(rng: &mut R, cap: usize) -> Option<usize> {
    let mut s = 0.0;
    for k in 1..=cap {
        s += rng.sample::<f64, _>(StandardNormal);
        if s < 0.0 {
            return Some(k);
        }
    }
    None
}

/// `√n · P̂(t_1 > n)` for each `n`, from `n_reps` Gaussian walks.
pub fn ladder_tail_profile(ns: &[usize], n_reps: u64, seed: u64) -> Vec<(usize, f64)> {
    let cap = ns.iter().copied().max().unwrap_or(0);
    let times: Vec<Option<usize>> = (0..n_reps)
        .into_par_iter()
        .map(|i| first_descent_time(&mut path_stream(seed, keys::LADDER, i), cap))
        .collect();
    ns.iter()
        .map(|&n| {
            let exceed = times.iter().filter(|t| t.is_none_or(|t| t > n)).count();
            (n, (n as f64).sqrt() * exceed as f64 / n_reps as f64)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CertainRuinReport {
    /// Claim budget per path.
    pub budget: u64,
    /// Fraction of paths whose ladder-sampled capital `x_n = S*_{t_n}` went
    /// negative within the budget.
    pub ruined_fraction: f64,
    /// Fraction of paths with `S*_k < 0` at any claim within the budget.
    pub ruined_any_claim_fraction: f64,
    pub n_paths: u64,
}

/// Ladder-sampled simulation of the critical chain with constant premium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertainRuinConfig {
    pub params: ModelParams,
    pub claims: ClaimDistribution,
    pub c_star: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub bridge_points: usize,
}

impl CertainRuinConfig {
    pub fn new(params: ModelParams, claims: ClaimDistribution, c_star: f64) -> Self {
        Self { params, claims, c_star, n_paths: 1000, seed: 0, bridge_points: DEFAULT_BRIDGE_POINTS }
    }
}

/// One path of `S*_n = λ_n S*_{n−1} + η*_n − ξ_n` with `λ_n = e^{σν_n}`,
/// tracking the ladder epochs of `ν`. Returns whether the ladder-sampled
/// chain and the full chain went negative within `budget` claims.
fn critical_path<R: Rng + ?Sized>(u: f64, cfg: &CertainRuinConfig, budget: u64, rng: &mut R, grid: &mut BridgeGrid) -> (bool, bool) {
    let p = &cfg.params;
    let premium = PremiumSchedule::Constant { rate: cfg.c_star };
    let mut s = u;
    let mut block = 0.0;
    let mut any = false;
    for _ in 0..budget {
        let theta = rng.sample::<f64, _>(Exp1) / p.alpha();
        let nu = theta.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let eta = if cfg.c_star > 0.0 {
            grid.resample(rng, theta, nu, cfg.bridge_points);
            eta_integral(grid, &premium, p, 0.0, 0.0)
        } else {
            0.0
        };
        let xi = cfg.claims.sample(rng);
        s = (p.sigma() * nu + p.kappa() * theta).exp() * s + eta - xi;
        any |= s < 0.0;
        block += nu;
        if block < 0.0 {
            block = 0.0;
            if s < 0.0 {
                return (true, true);
            }
        }
    }
    (false, any)
}

/// Fraction of critical-case paths ruined within `budget` claims.
///
/// Requires `β = 0` (up to rounding) and claims with unbounded support.
pub fn critical_certain_ruin_demo(u: f64, cfg: &CertainRuinConfig, budget: u64) -> Result<CertainRuinReport> {
    cfg.params.require_volatile()?;
    if cfg.params.beta().abs() > 1e-9 {
        return Err(Error::domain(format!("the critical case needs β = 0, got β = {}", cfg.params.beta())));
    }
    if !cfg.claims.has_unbounded_support() {
        return Err(Error::domain("certain ruin needs claims with unbounded support"));
    }
    if !(cfg.c_star.is_finite() && cfg.c_star >= 0.0) {
        return Err(Error::domain("premium rate must be non-negative"));
    }
    if !(u.is_finite() && u >= 0.0) {
        return Err(Error::domain("initial endowment must be non-negative"));
    }
    if cfg.n_paths == 0 || cfg.bridge_points < 2 {
        return Err(Error::config("need at least one path and two bridge points"));
    }
    let (ladder, any) = (0..cfg.n_paths)
        .into_par_iter()
        .map_init(
            || BridgeGrid::with_capacity(cfg.bridge_points),
            |grid, i| critical_path(u, cfg, budget, &mut path_stream(cfg.seed, keys::CERTAIN_RUIN, i), grid),
        )
        .fold(|| (0u64, 0u64), |(l, a), (x, y)| (l + x as u64, a + y as u64))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = cfg.n_paths as f64;
    Ok(CertainRuinReport {
        budget,
        ruined_fraction: ladder as f64 / n,
        ruined_any_claim_fraction: any as f64 / n,
        n_paths: cfg.n_paths,
    })
}
