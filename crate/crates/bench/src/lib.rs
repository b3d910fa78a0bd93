//! Shared fixtures for the benchmarks.

use ruinlab::{ClaimDistribution, ModelParams, OracleConfig, PerpetuityConfig, PremiumSchedule, SimConfig};

/// `β = 1`: `a = 0.1`, `σ² = 0.1`, `α = 1`.
pub fn unit_beta() -> ModelParams {
    ModelParams::from_variance(0.1, 0.1, 1.0).expect("valid parameters")
}

pub fn exp_claims() -> ClaimDistribution {
    ClaimDistribution::exponential(1.0).expect("valid claims")
}

pub fn chain_config(premium: PremiumSchedule, n_paths: u64) -> SimConfig {
    let mut cfg = SimConfig::new(unit_beta(), exp_claims(), premium);
    cfg.n_paths = n_paths;
    cfg.seed = 1;
    cfg
}

pub fn perpetuity_config(n_samples: u64) -> PerpetuityConfig {
    PerpetuityConfig { n_samples, seed: 1, ..Default::default() }
}

/// Short-horizon oracle so one path stays in the microsecond range.
pub fn oracle_config() -> OracleConfig {
    let mut cfg = OracleConfig::new(unit_beta(), exp_claims(), PremiumSchedule::Constant { rate: 1.0 });
    cfg.t_max = 1.0;
    cfg.dt = 1e-3;
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        chain_config(PremiumSchedule::Zero, 10).validate().unwrap();
        perpetuity_config(10).validate().unwrap();
        oracle_config().validate().unwrap();
        assert_eq!(unit_beta().beta(), 1.0);
    }
}
