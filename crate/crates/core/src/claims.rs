//! Claim-size laws.

use rand::Rng;
use rand_distr::{Exp1, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Law of a single claim `ξ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClaimDistribution {
    Exponential { mean: f64 },
    /// Classical Pareto: `P(ξ > x) = (scale/x)^shape` for `x ≥ scale`.
    Pareto { shape: f64, scale: f64 },
    #[serde(rename = "lognormal")]
    LogNormal { meanlog: f64, sdlog: f64 },
    Constant { value: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ClaimDistribution {
    pub fn exponential(mean: f64) -> Result<Self> {
        let d = Self::Exponential { mean };
        d.validate()?;
        Ok(d)
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        let d = Self::Pareto { shape, scale };
        d.validate()?;
        Ok(d)
    }

    pub fn lognormal(meanlog: f64, sdlog: f64) -> Result<Self> {
        let d = Self::LogNormal { meanlog, sdlog };
        d.validate()?;
        Ok(d)
    }

    pub fn constant(value: f64) -> Result<Self> {
        let d = Self::Constant { value };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Exponential { mean } => positive("exponential mean", mean),
            Self::Pareto { shape, scale } => {
                positive("pareto shape", shape)?;
                positive("pareto scale", scale)
            }
            Self::LogNormal { meanlog, sdlog } => {
                if !meanlog.is_finite() {
                    return Err(Error::domain(format!("lognormal meanlog must be finite, got {meanlog}")));
                }
                positive("lognormal sdlog", sdlog)
            }
            Self::Constant { value } => positive("constant claim", value),
        }
    }

    /// Supremum of the orders with a finite moment, if any.
    pub fn moment_limit(&self) -> Option<f64> {
        match *self {
            Self::Pareto { shape, .. } => Some(shape),
            _ => None,
        }
    }

    /// `P(ξ > z) > 0` for every `z`.
    pub fn has_unbounded_support(&self) -> bool {
        !matches!(self, Self::Constant { .. })
    }

    /// `E ξ^q` in closed form.
    pub fn moment(&self, q: f64) -> Result<f64> {
        if !(q >= 0.0) || !q.is_finite() {
            return Err(Error::domain(format!("moment order must be finite and non-negative, got {q}")));
        }
        match *self {
            Self::Exponential { mean } => Ok((q * mean.ln() + ln_gamma(q + 1.0)).exp()),
            Self::Pareto { shape, scale } => {
                if q >= shape {
                    Err(Error::MomentDivergence { order: q, law: format!("pareto(shape={shape})") })
                } else {
                    Ok(shape * scale.powf(q) / (shape - q))
                }
            }
            Self::LogNormal { meanlog, sdlog } => Ok((q * meanlog + 0.5 * q * q * sdlog * sdlog).exp()),
            Self::Constant { value } => Ok(value.powf(q)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Exponential { mean } => mean * rng.sample::<f64, _>(Exp1),
            Self::Pareto { shape, scale } => {
                let u: f64 = rng.sample(Open01);
                scale * u.powf(-1.0 / shape)
            }
            Self::LogNormal { meanlog, sdlog } => {
                let z: f64 = rng.sample(StandardNormal);
                (meanlog + sdlog * z).exp()
            }
            Self::Constant { value } => value,
        }
    }
}

/// `E ξ^q` for the given law.
pub fn claim_moment(dist: &ClaimDistribution, q: f64) -> Result<f64> {
    dist.moment(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::MeanVar;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Composite Simpson on `[lo, hi]` with `n` (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let mut s = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn exponential_moment_matches_quadrature() {
        // Substituting x = t² keeps the integrand smooth at the origin.
        let m = 2.0;
        let q = 1.5;
        let quad = simpson(|t: f64| {
            let x = t * t;
            x.powf(q) * (-x / m).exp() / m * 2.0 * t
        }, 0.0, 20.0, 200_000);
        assert!((quad - 3.759942411946).abs() < 1e-9, "{quad}");
        let closed = ClaimDistribution::exponential(m).unwrap().moment(q).unwrap();
        assert!((closed - quad).abs() < 1e-9, "{closed} vs {quad}");
    }

    #[test]
    fn closed_form_moments() {
        let e = ClaimDistribution::exponential(1.0).unwrap();
        assert!((e.moment(1.0).unwrap() - 1.0).abs() < 1e-14);
        let c = ClaimDistribution::constant(2.0).unwrap();
        assert_eq!(c.moment(3.0).unwrap(), 8.0);
        assert_eq!(c.moment(0.0).unwrap(), 1.0);
    }

    #[test]
    fn pareto_moment_boundary() {
        let p = ClaimDistribution::pareto(2.05, 1.0).unwrap();
        assert!(p.moment(2.0).is_ok());
        assert!(matches!(p.moment(2.1), Err(Error::MomentDivergence { .. })));
        assert!(matches!(p.moment(2.05), Err(Error::MomentDivergence { .. })));
        assert_eq!(p.moment_limit(), Some(2.05));
    }

    #[test]
    fn validation() {
        assert!(ClaimDistribution::exponential(0.0).is_err());
        assert!(ClaimDistribution::pareto(1.0, -1.0).is_err());
        assert!(ClaimDistribution::lognormal(-3.0, 0.5).is_ok());
        assert!(ClaimDistribution::lognormal(0.0, 0.0).is_err());
        assert!(ClaimDistribution::constant(f64::INFINITY).is_err());
    }

    #[test]
    fn sample_moments_within_four_standard_errors() {
        let laws = [
            (ClaimDistribution::exponential(1.5).unwrap(), [0.5, 1.0, 2.0]),
            (ClaimDistribution::pareto(5.0, 0.7).unwrap(), [0.5, 1.0, 2.0]),
            (ClaimDistribution::lognormal(-0.2, 0.6).unwrap(), [0.5, 1.0, 2.0]),
            (ClaimDistribution::constant(0.3).unwrap(), [0.5, 1.0, 2.0]),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (law, orders) in laws {
            let draws: Vec<f64> = (0..1_000_000).map(|_| law.sample(&mut rng)).collect();
            assert!(draws.iter().all(|&x| x > 0.0));
            for q in orders {
                let mv: MeanVar = draws.iter().map(|x| x.powf(q)).collect();
                let exact = law.moment(q).unwrap();
                let tol = 4.0 * mv.std_error() + 1e-12 * exact;
                assert!((mv.mean() - exact).abs() <= tol, "{law:?} q={q}: {} vs {exact}", mv.mean());
            }
        }
    }

    #[test]
    fn serde_shape() {
        let d: ClaimDistribution = serde_json::from_str(r#"{"kind":"pareto","shape":2.5,"scale":1.0}"#).unwrap();
        assert_eq!(d, ClaimDistribution::Pareto { shape: 2.5, scale: 1.0 });
        let d: ClaimDistribution = serde_json::from_str(r#"{"kind":"lognormal","meanlog":0.0,"sdlog":0.5}"#).unwrap();
        assert_eq!(d, ClaimDistribution::LogNormal { meanlog: 0.0, sdlog: 0.5 });
    }
}
