//! Analysis parameters and the approximation ratios they certify.
//!
//! None of these values steer the candidate-and-argmin algorithms; they are
//! validated, echoed into reports, and turned into the ratio the analysis
//! promises for a given closest-fair factor `gamma` and fair-correlation
//! factor `eta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Approximation factor of the reference correlation-clustering routine.
pub const RHO_REFERENCE: f64 = 1.4371;

/// Fair-correlation factor obtained by composing a `gamma`-close fair step
/// with a `rho`-approximate correlation clustering.
pub fn eta(gamma: f64, rho: f64) -> f64 {
    gamma * rho + gamma + rho
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameworkParams {
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
    /// Streaming only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
}

impl FrameworkParams {
    /// Offline defaults: `c = 3`, `alpha = 3/(10(rho+1))`,
    /// `beta = 2/(5(gamma+1)(rho+1))`.
    pub fn offline(gamma: f64, rho: f64) -> FrameworkParams {
        FrameworkParams {
            alpha: 3.0 / (10.0 * (rho + 1.0)),
            beta: 2.0 / (5.0 * (gamma + 1.0) * (rho + 1.0)),
            c: 3.0,
            s: None,
            g: None,
        }
    }

    /// Streaming defaults: `s = 4`, `c = 3` and the smallest admissible `g`.
    pub fn streaming(gamma: f64, rho: f64) -> FrameworkParams {
        let g1 = 100.0 * 4.0 / 3.0 * (gamma + 1.0) * 216.0 * (rho + 1.0) / 23.0;
        let g2 = 100.0 * 6.0 * (gamma + 1.0) * 72.0 * (rho + 1.0) / 5.0;
        FrameworkParams {
            alpha: 1.0 / (6.0 * (rho + 1.0)),
            beta: 1.0 / (72.0 * (gamma + 1.0) * (rho + 1.0)),
            c: 3.0,
            s: Some(4.0),
            g: Some(g1.max(g2)),
        }
    }

    pub fn with_g(mut self, g: f64) -> FrameworkParams {
        self.g = Some(g);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Argument(format!("{what} (got {self:?})")));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if !(self.c > 1.0 && self.c.is_finite()) {
            return bad("c must exceed 1");
        }
        match (self.s, self.g) {
            (None, None) => Ok(()),
            (Some(s), Some(g)) => {
                if s.is_nan() || s <= 1.0 {
                    return bad("s must exceed 1");
                }
                if !(g > s && g.is_finite()) {
                    return bad("g must exceed s");
                }
                if (s * self.c - s - 2.0 * self.c).is_nan() || s * self.c - s - 2.0 * self.c <= 0.0 {
                    return bad("s*c - s - 2c must be positive");
                }
                Ok(())
            }
            _ => bad("s and g must be given together"),
        }
    }

    /// Ratio of the offline candidate framework.
    pub fn offline_ratio(&self, gamma: f64, eta: f64) -> f64 {
        let (a, b, c) = (self.alpha, self.beta, self.c);
        [
            1.0 + 3.0 * (eta + 1.0) * a,
            gamma + 2.0 - (gamma + 1.0) * b,
            gamma + 2.0 - 2.0 * a / c,
            gamma + 2.0 + (gamma + 1.0) * b / (c - 1.0) - 2.0 * (1.0 - 1.0 / c) * a,
        ]
        .into_iter()
        .fold(f64::MIN, f64::max)
    }

    /// Ratio of the sampled single-pass variant, before the `(1+e)/(1-e)`
    /// evaluation loss.
    pub fn streaming_ratio(&self, gamma: f64, eta: f64) -> Result<f64> {
        self.validate()?;
        let (Some(s), Some(g)) = (self.s, self.g) else {
            return Err(Error::Argument("streaming ratio needs s and g".into()));
        };
        let (a, b, c) = (self.alpha, self.beta, self.c);
        Ok([
            gamma + 2.0 - (gamma + 1.0) * b,
            gamma + 2.0 + (gamma + 1.0) * (b * (g - s) + s) / (g * (s - 1.0)) - 2.0 * a / c,
            gamma + 2.0 + (gamma + 1.0) * (b * (g * (2.0 * c + s) - s * c) + s * c) / (g * (c * s - s - 2.0 * c))
                - 2.0 * (1.0 - 1.0 / s - 1.0 / c) * a,
            1.0 + 3.0 * (eta + 1.0) * a,
        ]
        .into_iter()
        .fold(f64::MIN, f64::max))
    }
}

/// Constants of the streaming k-median analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMedianParams {
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub epsilon1: f64,
}

impl KMedianParams {
    /// `beta = 0.015`, `alpha = 8 beta (beta+1)/(1-beta)`,
    /// `delta = 1/(1e6 (gamma+1))`, `epsilon = epsilon1 = 1e-7`.
    pub fn reference(gamma: f64) -> KMedianParams {
        let beta = 0.015;
        KMedianParams {
            alpha: 8.0 * beta * (beta + 1.0) / (1.0 - beta),
            beta,
            delta: 1.0 / (1e6 * (gamma + 1.0)),
            epsilon: 1e-7,
            epsilon1: 1e-7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.alpha, self.beta);
        if !(a > 0.0 && b > 0.0 && b < 1.0 && self.epsilon > 0.0 && self.epsilon1 > 0.0 && self.delta >= 0.0) {
            return Err(Error::Argument(format!("k-median constants out of range: {self:?}")));
        }
        if a / 2.0 <= 2.0 * b * (1.0 + b) / (1.0 - b) {
            return Err(Error::Argument("alpha/2 must exceed 2 beta (1+beta)/(1-beta)".into()));
        }
        Ok(())
    }

    /// `(1+epsilon)(r+epsilon1)` with the vanishing term dropped.
    pub fn ratio(&self, gamma: f64, rho: f64) -> Result<f64> {
        self.validate()?;
        let (a, b, d) = (self.alpha, self.beta, self.delta);
        let r = [
            2.0 + gamma - (b - d) * (1.0 + gamma),
            2.0 + d + gamma * (1.0 + b + d) - a * b / (2.0 * (b + 1.0)) + 2.0 * b * b / (1.0 - b),
            1.0 + 3.0 * (gamma + 1.0) * (rho + 1.0) * a,
        ]
        .into_iter()
        .fold(f64::MIN, f64::max);
        Ok((1.0 + self.epsilon) * (r + self.epsilon1))
    }
}

/// Tuned constants for the three two-color regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Equal color counts, `gamma = 1`.
    #[serde(rename = "paper-1to1")]
    Balanced,
    /// Ratio `1:p`, `gamma = 17`.
    #[serde(rename = "paper-1top")]
    OneToP,
    /// Ratio `p:q`, `gamma = 33`.
    #[serde(rename = "paper-ptoq")]
    PToQ,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Balanced, Preset::OneToP, Preset::PToQ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Balanced => "paper-1to1",
            Preset::OneToP => "paper-1top",
            Preset::PToQ => "paper-ptoq",
        }
    }

    pub fn gamma(self) -> f64 {
        match self {
            Preset::Balanced => 1.0,
            Preset::OneToP => 17.0,
            Preset::PToQ => 33.0,
        }
    }

    pub fn offline(self) -> FrameworkParams {
        let (alpha, beta, c) = match self {
            Preset::Balanced => (0.129835, 0.050115, 2.6237),
            Preset::OneToP => (0.135970, 0.005765, 2.6161),
            Preset::PToQ => (0.136393, 0.003407, 2.8742),
        };
        FrameworkParams {
            alpha,
            beta,
            c,
            s: None,
            g: None,
        }
    }

    pub fn streaming(self) -> FrameworkParams {
        let (alpha, beta) = match self {
            Preset::Balanced => (0.13181506, 0.03626050),
            Preset::OneToP => (0.13620638, 0.00415431),
            Preset::PToQ => (0.13647381, 0.00219897),
        };
        FrameworkParams {
            alpha,
            beta,
            c: 3.270833,
            s: Some(10.0),
            g: Some(100000.0),
        }
    }

    pub fn kmedian(self) -> KMedianParams {
        KMedianParams::reference(self.gamma())
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown preset {s:?}")))
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
