//! The capital sampled at claim instants, `S_n = λ_n S_{n−1} + η_n − ξ_n`,
//! and Monte Carlo estimation of the ruin probability from it.
//!
//! Ruin can only happen when a claim arrives, so checking `S_n < 0` at jump
//! indices is exact. Paths are censored at a jump horizon, an optional time
//! horizon, or once the capital is so large that further ruin is negligible.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::bridge::{eta_integral, BridgeGrid, DEFAULT_BRIDGE_POINTS};
use crate::claims::ClaimDistribution;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::premium::PremiumSchedule;
use crate::rng::{keys, path_stream};
use crate::stats::{wilson_interval, Z_95};

/// Capital above which a path is declared safe whatever the tolerance;
/// one more multiplication by λ could otherwise overflow.
pub const OVERFLOW_GUARD: f64 = 1e300;

/// One inter-claim block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmbeddedStep {
    pub theta: f64,
    pub w_theta: f64,
    pub lambda: f64,
    pub eta: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub claims: ClaimDistribution,
    pub premium: PremiumSchedule,
    pub n_paths: u64,
    pub max_jumps: u64,
    pub seed: u64,
    pub bridge_points: usize,
    /// Relative ruin mass tolerated when a path is declared safe, see
    /// [`SimConfig::survival_threshold`]. Zero keeps only the overflow guard.
    pub survival_tolerance: f64,
    /// Claims arriving after this absolute time are not simulated.
    pub time_horizon: Option<f64>,
}

impl SimConfig {
    pub fn new(params: ModelParams, claims: ClaimDistribution, premium: PremiumSchedule) -> Self {
        Self {
            params,
            claims,
            premium,
            n_paths: 10_000,
            max_jumps: 10_000,
            seed: 0,
            bridge_points: DEFAULT_BRIDGE_POINTS,
            survival_tolerance: 1e-9,
            time_horizon: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.require_volatile()?;
        self.claims.validate()?;
        self.premium.validate()?;
        if self.n_paths == 0 {
            return Err(Error::config("n_paths must be at least 1"));
        }
        if self.max_jumps == 0 {
            return Err(Error::config("max_jumps must be at least 1"));
        }
        if self.bridge_points < 2 && !(self.bridge_points == 0 && self.premium.is_zero()) {
            return Err(Error::config("bridge_points must be at least 2 (or 0 with the zero premium)"));
        }
        if !(self.survival_tolerance >= 0.0 && self.survival_tolerance < 1.0) {
            return Err(Error::config("survival_tolerance must lie in [0, 1)"));
        }
        if let Some(h) = self.time_horizon {
            if !(h > 0.0) {
                return Err(Error::config("time_horizon must be positive"));
            }
        }
        Ok(())
    }

    /// Capital level above which a path started at `u` is declared safe.
    ///
    /// From capital `s` the remaining ruin probability is at most that of the
    /// zero-premium chain, `P(R > s)`, which scales like `s^{−β}`. Stopping at
    /// `max(u, 1) · tol^{−1/β}` therefore leaves a residual ruin mass of
    /// order `tol · Ψ(u)`. When `β ≤ 0` ruin is certain and no path is ever
    /// declared safe.
    pub fn survival_threshold(&self, u: f64) -> f64 {
        let beta = self.params.beta();
        if !(beta > 0.0) {
            return f64::INFINITY;
        }
        if self.survival_tolerance > 0.0 {
            let t = u.max(1.0) * self.survival_tolerance.powf(-1.0 / beta);
            t.min(OVERFLOW_GUARD)
        } else {
            OVERFLOW_GUARD
        }
    }
}

/// Why a surviving path stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Censoring {
    JumpHorizon,
    TimeHorizon,
    SafeCapital,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathOutcome {
    /// First index with `S_n < 0`.
    Ruined { jump: u64 },
    /// Survived the `jump` simulated claims.
    Censored { jump: u64, reason: Censoring },
}

impl PathOutcome {
    pub fn is_ruined(&self) -> bool {
        matches!(self, PathOutcome::Ruined { .. })
    }
}

/// Per-worker simulator holding the scratch bridge.
#[derive(Debug, Clone)]
pub struct ChainSampler<'a> {
    cfg: &'a SimConfig,
    grid: BridgeGrid,
}

impl<'a> ChainSampler<'a> {
    pub fn new(cfg: &'a SimConfig) -> Self {
        Self { cfg, grid: BridgeGrid::with_capacity(cfg.bridge_points) }
    }

    /// Draws one block. Draw order is θ, `w_θ`, the bridge (skipped when the
    /// premium vanishes from `t_prev` on), then ξ.
    pub fn sample_step<R: Rng + ?Sized>(&mut self, rng: &mut R, t_prev: f64, x_prev: f64) -> EmbeddedStep {
        let p = &self.cfg.params;
        let theta = rng.sample::<f64, _>(Exp1) / p.alpha();
        let w_theta = theta.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let lambda = (p.sigma() * w_theta + p.kappa() * theta).exp();
        let eta = if self.cfg.premium.vanishes_from(t_prev) {
            0.0
        } else {
            self.grid.resample(rng, theta, w_theta, self.cfg.bridge_points);
            eta_integral(&self.grid, &self.cfg.premium, p, t_prev, x_prev)
        };
        let xi = self.cfg.claims.sample(rng);
        EmbeddedStep { theta, w_theta, lambda, eta, xi }
    }

    /// Runs one path from `S_0 = u` until ruin or censoring.
    pub fn run<R: Rng + ?Sized>(&mut self, u: f64, rng: &mut R) -> PathOutcome {
        let safe = self.cfg.survival_threshold(u);
        let horizon = self.cfg.time_horizon.unwrap_or(f64::INFINITY);
        let mut s = u;
        let mut t = 0.0;
        for n in 1..=self.cfg.max_jumps {
            let step = self.sample_step(rng, t, s);
            t += step.theta;
            if t > horizon {
                return PathOutcome::Censored { jump: n - 1, reason: Censoring::TimeHorizon };
            }
            s = step.lambda * s + step.eta - step.xi;
            if s < 0.0 {
                return PathOutcome::Ruined { jump: n };
            }
            if s > safe {
                return PathOutcome::Censored { jump: n, reason: Censoring::SafeCapital };
            }
        }
        PathOutcome::Censored { jump: self.cfg.max_jumps, reason: Censoring::JumpHorizon }
    }

    /// The first `n` blocks and the capital after each, ignoring ruin.
    pub fn trajectory<R: Rng + ?Sized>(&mut self, u: f64, rng: &mut R, n: usize) -> Vec<(EmbeddedStep, f64)> {
        let mut s = u;
        let mut t = 0.0;
        (0..n)
            .map(|_| {
                let step = self.sample_step(rng, t, s);
                t += step.theta;
                s = step.lambda * s + step.eta - step.xi;
                (step, s)
            })
            .collect()
    }
}

/// Draws one block of the chain.
pub fn sample_step<R: Rng + ?Sized>(rng: &mut R, cfg: &SimConfig, t_prev: f64, x_prev: f64) -> EmbeddedStep {
    ChainSampler::new(cfg).sample_step(rng, t_prev, x_prev)
}

/// Simulates one path of the chain from `S_0 = u`.
pub fn simulate_chain<R: Rng + ?Sized>(u: f64, cfg: &SimConfig, rng: &mut R) -> PathOutcome {
    ChainSampler::new(cfg).run(u, rng)
}

/// Ruin frequency among `n_paths` simulated paths.
///
/// Censored paths count as survivors, so `psi_hat` is biased low by the
/// ruin mass beyond the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuinEstimate {
    pub u: f64,
    pub psi_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub n_paths: u64,
    pub n_ruined: u64,
    pub n_censored: u64,
}

impl RuinEstimate {
    pub fn from_counts(u: f64, n_paths: u64, n_ruined: u64, n_censored: u64) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(n_ruined, n_paths, Z_95);
        Self { u, psi_hat: n_ruined as f64 / n_paths as f64, ci_lo, ci_hi, n_paths, n_ruined, n_censored }
    }

    /// Half-width of the confidence interval around `psi_hat`, taking the
    /// larger side.
    pub fn half_width(&self) -> f64 {
        (self.psi_hat - self.ci_lo).max(self.ci_hi - self.psi_hat)
    }
}

fn validate_endowment(u: f64) -> Result<()> {
    if u.is_finite() && u >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("initial endowment must be finite and non-negative, got {u}")))
    }
}

fn estimate_keyed(u: f64, cfg: &SimConfig, key: u64) -> RuinEstimate {
    let (ruined, censored) = (0..cfg.n_paths)
        .into_par_iter()
        .map_init(
            || ChainSampler::new(cfg),
            |sampler, i| {
                let mut rng = path_stream(cfg.seed, key, i);
                sampler.run(u, &mut rng)
            },
        )
        .fold(
            || (0u64, 0u64),
            |(r, c), o| match o {
                PathOutcome::Ruined { .. } => (r + 1, c),
                PathOutcome::Censored { .. } => (r, c + 1),
            },
        )
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    RuinEstimate::from_counts(u, cfg.n_paths, ruined, censored)
}

/// Estimates `Ψ(u)` from `cfg.n_paths` independent paths.
///
/// Path `i` uses its own stream addressed by `(seed, i)`, so the result is
/// bit-identical for any number of worker threads.
pub fn estimate_ruin(u: f64, cfg: &SimConfig) -> Result<RuinEstimate> {
    cfg.validate()?;
    validate_endowment(u)?;
    Ok(estimate_keyed(u, cfg, keys::CURVE))
}

/// One estimate per grid point, each on its own family of streams.
pub fn ruin_curve(u_grid: &[f64], cfg: &SimConfig) -> Result<Vec<RuinEstimate>> {
    cfg.validate()?;
    if u_grid.is_empty() {
        return Err(Error::config("u grid is empty"));
    }
    if u_grid.iter().any(|u| !(u.is_finite() && *u > 0.0)) {
        return Err(Error::config("u grid values must be positive and finite"));
    }
    if u_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("u grid must be strictly increasing"));
    }
    Ok(u_grid
        .iter()
        .enumerate()
        .map(|(g, &u)| estimate_keyed(u, cfg, keys::CURVE + g as u64))
        .collect())
}

pub const CURVE_CSV_HEADER: &str = "u,psi_hat,ci_lo,ci_hi,n_paths,n_ruined,n_censored";

/// Writes a ruin curve as CSV with [`CURVE_CSV_HEADER`].
pub fn write_curve_csv<W: Write>(mut out: W, curve: &[RuinEstimate]) -> io::Result<()> {
    writeln!(out, "{CURVE_CSV_HEADER}")?;
    for e in curve {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.u, e.psi_hat, e.ci_lo, e.ci_hi, e.n_paths, e.n_ruined, e.n_censored
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_beta_cfg(premium: PremiumSchedule) -> SimConfig {
        let params = ModelParams::from_variance(0.1, 0.1, 1.0).unwrap();
        SimConfig::new(params, ClaimDistribution::exponential(1.0).unwrap(), premium)
    }

    #[test]
    fn zero_premium_never_collects() {
        let cfg = unit_beta_cfg(PremiumSchedule::Zero);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = ChainSampler::new(&cfg);
        for _ in 0..10_000 {
            let step = s.sample_step(&mut rng, 0.0, 1.0);
            assert_eq!(step.eta, 0.0);
            assert!(step.lambda > 0.0 && step.theta > 0.0 && step.xi > 0.0);
        }
    }

    #[test]
    fn deterministic_integrand_limit() {
        // σ → 0 with κ = 0: η → cθ.
        let params = ModelParams::from_variance(5e-13, 1e-12, 1.0).unwrap();
        let mut cfg = SimConfig::new(params, ClaimDistribution::exponential(1.0).unwrap(), PremiumSchedule::constant(2.0).unwrap());
        cfg.bridge_points = 256;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let step = sample_step(&mut rng, &cfg, 0.0, 0.0);
            assert!((step.eta - 2.0 * step.theta).abs() < 1e-5 * step.theta.max(1.0));
        }
    }

    #[test]
    fn ruin_at_first_claim_from_zero() {
        let cfg = unit_beta_cfg(PremiumSchedule::Zero);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(simulate_chain(0.0, &cfg, &mut rng), PathOutcome::Ruined { jump: 1 });
        }
        let mut cfg = cfg;
        cfg.n_paths = 2000;
        let e = estimate_ruin(0.0, &cfg).unwrap();
        assert_eq!(e.psi_hat, 1.0);
        assert_eq!(e.n_censored, 0);
    }

    #[test]
    fn huge_endowment_survives() {
        let mut cfg = unit_beta_cfg(PremiumSchedule::Zero);
        cfg.max_jumps = 1000;
        cfg.survival_tolerance = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            assert!(!simulate_chain(1e15, &cfg, &mut rng).is_ruined());
        }
    }

    #[test]
    fn same_stream_same_outcome() {
        let cfg = unit_beta_cfg(PremiumSchedule::constant(1.0).unwrap());
        for i in 0..50 {
            let a = simulate_chain(5.0, &cfg, &mut path_stream(9, 0, i));
            let b = simulate_chain(5.0, &cfg, &mut path_stream(9, 0, i));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn recursion_matches_closed_form() {
        let cfg = unit_beta_cfg(PremiumSchedule::exponential(1.0, -0.01).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let u = 7.5;
            let traj = ChainSampler::new(&cfg).trajectory(u, &mut rng, 1000);
            let mut log_e = 0.0;
            let mut acc = 0.0;
            for (step, s_rec) in &traj {
                log_e += step.lambda.ln();
                acc += (step.eta - step.xi) * (-log_e).exp();
                let s_closed = log_e.exp() * (u + acc);
                let scale = s_closed.abs().max(log_e.exp());
                assert!((s_rec - s_closed).abs() <= 1e-9 * scale, "{s_rec} vs {s_closed}");
            }
        }
    }

    #[test]
    fn survival_threshold_behaviour() {
        let cfg = unit_beta_cfg(PremiumSchedule::Zero);
        assert!((cfg.survival_threshold(320.0) / (320.0 * 1e9) - 1.0).abs() < 1e-9);
        assert!((cfg.survival_threshold(0.0) / 1e9 - 1.0).abs() < 1e-9);
        let mut no_tol = cfg.clone();
        no_tol.survival_tolerance = 0.0;
        assert_eq!(no_tol.survival_threshold(5.0), OVERFLOW_GUARD);
        let mut certain = cfg.clone();
        certain.params = ModelParams::from_variance(0.025, 0.1, 1.0).unwrap();
        assert_eq!(certain.survival_threshold(5.0), f64::INFINITY);
    }

    #[test]
    fn config_validation() {
        let mut cfg = unit_beta_cfg(PremiumSchedule::constant(1.0).unwrap());
        cfg.bridge_points = 0;
        assert!(cfg.validate().is_err());
        cfg.premium = PremiumSchedule::Zero;
        assert!(cfg.validate().is_ok());
        cfg.n_paths = 0;
        assert!(cfg.validate().is_err());
        let cfg = unit_beta_cfg(PremiumSchedule::Zero);
        assert!(ruin_curve(&[], &cfg).is_err());
        assert!(ruin_curve(&[2.0, 1.0], &cfg).is_err());
        assert!(ruin_curve(&[0.0, 1.0], &cfg).is_err());
        assert!(estimate_ruin(-1.0, &cfg).is_err());
    }

    #[test]
    fn estimate_invariants() {
        let mut cfg = unit_beta_cfg(PremiumSchedule::constant(0.5).unwrap());
        cfg.n_paths = 3000;
        cfg.max_jumps = 200;
        let curve = ruin_curve(&[1.0, 10.0], &cfg).unwrap();
        assert_eq!(curve.len(), 2);
        for e in &curve {
            assert!(0.0 <= e.ci_lo && e.ci_lo <= e.psi_hat && e.psi_hat <= e.ci_hi && e.ci_hi <= 1.0);
            assert_eq!(e.n_ruined + e.n_censored, e.n_paths);
            assert_eq!(e.psi_hat, e.n_ruined as f64 / e.n_paths as f64);
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &[RuinEstimate::from_counts(20.0, 4, 1, 3)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("u,psi_hat,ci_lo,ci_hi,n_paths,n_ruined,n_censored"));
        assert!(lines.next().unwrap().starts_with("20,0.25,"));
    }
}
