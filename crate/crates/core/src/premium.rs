//! Premium-rate schedules `c_t`, all bounded by a maximal rate `c*`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PremiumSchedule {
    Zero,
    Constant { rate: f64 },
    /// `c_t = rate · e^{γ t}` with `γ ≤ 0`.
    Exponential { rate: f64, gamma: f64 },
    /// `c_t = rate · min(1, X_t / scale)`, clipped to `[0, rate]`.
    CappedState { rate: f64, scale: f64 },
}

impl PremiumSchedule {
    pub fn constant(rate: f64) -> Result<Self> {
        let s = Self::Constant { rate };
        s.validate()?;
        Ok(s)
    }

    pub fn exponential(rate: f64, gamma: f64) -> Result<Self> {
        let s = Self::Exponential { rate, gamma };
        s.validate()?;
        Ok(s)
    }

    pub fn capped_state(rate: f64, scale: f64) -> Result<Self> {
        let s = Self::CappedState { rate, scale };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let rate_ok = |r: f64| {
            if r.is_finite() && r >= 0.0 {
                Ok(())
            } else {
                Err(Error::domain(format!("premium rate must be finite and non-negative, got {r}")))
            }
        };
        match *self {
            Self::Zero => Ok(()),
            Self::Constant { rate } => rate_ok(rate),
            Self::Exponential { rate, gamma } => {
                rate_ok(rate)?;
                if gamma.is_finite() && gamma <= 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!(
                        "premium decay exponent must be finite and non-positive, got {gamma} (use the zero schedule for γ = −∞)"
                    )))
                }
            }
            Self::CappedState { rate, scale } => {
                rate_ok(rate)?;
                if scale.is_finite() && scale > 0.0 {
                    Ok(())
                } else {
                    Err(Error::domain(format!("capped premium scale must be positive, got {scale}")))
                }
            }
        }
    }

    /// The bound `c*`.
    pub fn cap(&self) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Constant { rate } | Self::Exponential { rate, .. } | Self::CappedState { rate, .. } => rate,
        }
    }

    /// `c_t` at absolute time `t` for current capital `x`.
    pub fn rate(&self, t: f64, x: f64) -> f64 {
        match *self {
            Self::Zero => 0.0,
            Self::Constant { rate } => rate,
            Self::Exponential { rate, gamma } => rate * (gamma * t).exp(),
            Self::CappedState { rate, scale } => (rate * (x / scale).min(1.0)).clamp(0.0, rate),
        }
    }

    /// True when `c_s = 0` for every `s ≥ t`, whatever the capital.
    pub fn vanishes_from(&self, t: f64) -> bool {
        match *self {
            Self::Zero => true,
            Self::Constant { rate } | Self::CappedState { rate, .. } => rate == 0.0,
            Self::Exponential { rate, gamma } => rate * (gamma * t).exp() == 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vanishes_from(0.0)
    }

    /// True when the rate does not depend on the capital.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Self::CappedState { .. })
    }
}

/// `c_t` for the given schedule.
pub fn premium_rate(sched: &PremiumSchedule, t: f64, x: f64) -> f64 {
    sched.rate(t, x)
}
