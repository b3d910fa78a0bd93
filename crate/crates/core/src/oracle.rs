//! Brute-force time stepping of the continuous-time capital process, used
//! only to validate the claim-instant chain.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{estimate_ruin, RuinEstimate, SimConfig};
use crate::claims::ClaimDistribution;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::premium::PremiumSchedule;
use crate::rng::{keys, path_stream};
use crate::stats::two_proportion_z;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleConfig {
    pub params: ModelParams,
    pub claims: ClaimDistribution,
    pub premium: PremiumSchedule,
    pub dt: f64,
    pub t_max: f64,
    pub n_paths: u64,
    pub seed: u64,
}

impl OracleConfig {
    /// Defaults: `dt = 10⁻³/α`, `t_max = 20/α`, 10⁴ paths.
    pub fn new(params: ModelParams, claims: ClaimDistribution, premium: PremiumSchedule) -> Self {
        let alpha = params.alpha();
        Self { params, claims, premium, dt: 1e-3 / alpha, t_max: 20.0 / alpha, n_paths: 10_000, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        self.claims.validate()?;
        self.premium.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt must be positive"));
        }
        if !(self.t_max > self.dt && self.t_max.is_finite()) {
            return Err(Error::config("t_max must exceed dt"));
        }
        if self.n_paths == 0 {
            return Err(Error::config("n_paths must be at least 1"));
        }
        Ok(())
    }

    /// Chain configuration estimating the same finite-horizon probability.
    pub fn matching_chain(&self) -> SimConfig {
        let mut chain = SimConfig::new(self.params, self.claims, self.premium);
        chain.n_paths = self.n_paths;
        chain.seed = self.seed;
        chain.time_horizon = Some(self.t_max);
        chain.max_jumps = jump_coverage(self.params.alpha() * self.t_max);
        chain
    }
}

/// A jump budget that the Poisson count over the horizon exceeds with
/// negligible probability.
fn jump_coverage(mean_jumps: f64) -> u64 {
    (mean_jumps + 10.0 * mean_jumps.sqrt() + 10.0).ceil() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RuinEvent {
    pub time: f64,
    /// Whether ruin happened at a claim instant rather than during diffusion.
    pub at_jump: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleOutcome {
    pub ruin: Option<RuinEvent>,
    pub final_time: f64,
    pub final_capital: f64,
    pub n_jumps: u64,
}

/// Simulates one path on the grid of step `dt`, with claim instants
/// inserted as extra grid points.
///
/// Between claims the homogeneous part uses the exact log-normal factor
/// `e^{κh + σΔw}`; the premium enters by the left-point rule with a
/// half-step growth correction `c_t h e^{a h / 2}`. Draw order: the first
/// inter-arrival time, then per step one normal, and at each claim ξ
/// followed by the next inter-arrival time.
pub fn simulate_path<R: Rng + ?Sized>(u: f64, cfg: &OracleConfig, rng: &mut R) -> OracleOutcome {
    let p = &cfg.params;
    let (kappa, sigma, a) = (p.kappa(), p.sigma(), p.a());
    let inter_arrival = |rng: &mut R| rng.sample::<f64, _>(Exp1) / p.alpha();
    let mut x = u;
    let mut t = 0.0;
    let mut n_jumps = 0;
    let mut next_jump = inter_arrival(rng);
    let done = |ruin, t, x, n_jumps| OracleOutcome { ruin, final_time: t, final_capital: x, n_jumps };
    while t < cfg.t_max {
        let jump_now = next_jump <= (t + cfg.dt).min(cfg.t_max);
        let target = if jump_now { next_jump } else { (t + cfg.dt).min(cfg.t_max) };
        let h = target - t;
        if h > 0.0 {
            let dw = h.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let c = cfg.premium.rate(t, x);
            x = (kappa * h + sigma * dw).exp() * x + c * h * (0.5 * a * h).exp();
        }
        t = target;
        if x < 0.0 {
            return done(Some(RuinEvent { time: t, at_jump: false }), t, x, n_jumps);
        }
        if jump_now {
            x -= cfg.claims.sample(rng);
            n_jumps += 1;
            if x < 0.0 {
                return done(Some(RuinEvent { time: t, at_jump: true }), t, x, n_jumps);
            }
            next_jump = t + inter_arrival(rng);
        }
    }
    done(None, t, x, n_jumps)
}

/// Finite-horizon ruin frequency from the oracle.
pub fn estimate_oracle_ruin(u: f64, cfg: &OracleConfig) -> Result<RuinEstimate> {
    cfg.validate()?;
    if !(u.is_finite() && u >= 0.0) {
        return Err(Error::domain(format!("initial endowment must be non-negative, got {u}")));
    }
    let ruined = (0..cfg.n_paths)
        .into_par_iter()
        .filter(|&i| simulate_path(u, cfg, &mut path_stream(cfg.seed, keys::ORACLE, i)).ruin.is_some())
        .count() as u64;
    Ok(RuinEstimate::from_counts(u, cfg.n_paths, ruined, cfg.n_paths - ruined))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub u: f64,
    pub psi_chain: f64,
    pub psi_oracle: f64,
    /// Pooled two-proportion statistic, chain minus oracle.
    pub z: f64,
}

fn check_matched(oracle: &OracleConfig, chain: &SimConfig) -> Result<()> {
    let mismatch = |what: &str| Err(Error::ConfigMismatch(what.to_string()));
    if oracle.params != chain.params {
        return mismatch("model parameters differ");
    }
    if oracle.claims != chain.claims {
        return mismatch("claim laws differ");
    }
    if oracle.premium != chain.premium {
        return mismatch("premium schedules differ");
    }
    if chain.time_horizon != Some(oracle.t_max) {
        return mismatch("the chain must be censored at the oracle time horizon");
    }
    if chain.max_jumps < jump_coverage(oracle.params.alpha() * oracle.t_max) {
        return mismatch("the chain jump budget does not cover the oracle horizon");
    }
    Ok(())
}

fn compare(u: f64, oracle: &OracleConfig, chain: &SimConfig) -> Result<ComparisonReport> {
    let c = estimate_ruin(u, chain)?;
    let o = estimate_oracle_ruin(u, oracle)?;
    Ok(ComparisonReport {
        u,
        psi_chain: c.psi_hat,
        psi_oracle: o.psi_hat,
        z: two_proportion_z(c.n_ruined, c.n_paths, o.n_ruined, o.n_paths),
    })
}

/// Estimates the same finite-horizon ruin probability with the chain and the
/// oracle and reports the two-sample z statistic.
pub fn compare_with_chain(u: f64, oracle_cfg: &OracleConfig, chain_cfg: &SimConfig) -> Result<ComparisonReport> {
    check_matched(oracle_cfg, chain_cfg)?;
    compare(u, oracle_cfg, chain_cfg)
}

/// As [`compare_with_chain`], but the oracle runs with `σ` scaled by
/// `sigma_factor` after the configurations were checked. A negative control
/// for the comparison.
pub fn compare_with_perturbed_oracle(
    u: f64,
    oracle_cfg: &OracleConfig,
    chain_cfg: &SimConfig,
    sigma_factor: f64,
) -> Result<ComparisonReport> {
    check_matched(oracle_cfg, chain_cfg)?;
    let mut perturbed = oracle_cfg.clone();
    perturbed.params = oracle_cfg.params.with_sigma_scaled(sigma_factor)?;
    compare(u, &perturbed, chain_cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cramer_lundberg_path_is_piecewise_linear() {
        let params = ModelParams::degenerate(0.0, 0.0, 1.0).unwrap();
        let mut cfg = OracleConfig::new(params, ClaimDistribution::constant(0.5).unwrap(), PremiumSchedule::constant(1.0).unwrap());
        cfg.t_max = 7.0;
        cfg.dt = 0.01;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let out = simulate_path(10.0, &cfg, &mut rng);
            assert!(out.ruin.is_none());
            let expected = 10.0 + 1.0 * 7.0 - 0.5 * out.n_jumps as f64;
            assert!((out.final_capital - expected).abs() < 1e-9, "{out:?}");
        }
    }

    #[test]
    fn small_claims_keep_capital_nonnegative() {
        let params = ModelParams::from_variance(0.1, 0.1, 1.0).unwrap();
        let mut cfg = OracleConfig::new(params, ClaimDistribution::constant(1e-3).unwrap(), PremiumSchedule::Zero);
        cfg.t_max = 1.0;
        cfg.dt = 1e-3;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let out = simulate_path(1.0, &cfg, &mut rng);
            assert!(out.ruin.is_none() && out.final_capital >= 0.0);
        }
    }

    #[test]
    fn ruin_only_at_claims() {
        let params = ModelParams::from_variance(0.1, 0.1, 1.0).unwrap();
        let mut cfg = OracleConfig::new(params, ClaimDistribution::exponential(1.0).unwrap(), PremiumSchedule::capped_state(1.0, 2.0).unwrap());
        cfg.t_max = 5.0;
        cfg.dt = 0.01;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut ruins = 0;
        for _ in 0..20_000 {
            if let Some(ev) = simulate_path(0.5, &cfg, &mut rng).ruin {
                assert!(ev.at_jump);
                ruins += 1;
            }
        }
        assert!(ruins > 1000);
    }

    #[test]
    fn mismatched_configs_are_rejected() {
        let params = ModelParams::from_variance(0.1, 0.1, 1.0).unwrap();
        let oracle = OracleConfig::new(params, ClaimDistribution::exponential(1.0).unwrap(), PremiumSchedule::Zero);
        let mut chain = oracle.matching_chain();
        assert!(check_matched(&oracle, &chain).is_ok());
        chain.params = ModelParams::from_variance(0.1, 0.2, 1.0).unwrap();
        assert!(matches!(compare_with_chain(1.0, &oracle, &chain), Err(Error::ConfigMismatch(_))));
        let mut chain = oracle.matching_chain();
        chain.time_horizon = None;
        assert!(matches!(compare_with_chain(1.0, &oracle, &chain), Err(Error::ConfigMismatch(_))));
        let mut chain = oracle.matching_chain();
        chain.max_jumps = 5;
        assert!(matches!(compare_with_chain(1.0, &oracle, &chain), Err(Error::ConfigMismatch(_))));
    }
}
