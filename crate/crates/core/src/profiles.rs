//! Built-in initial-datum families.

use serde::{Deserialize, Serialize};

use crate::exponents::{ParamError, Params};
use crate::grid::{GridError, RadialGrid, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InitialDatum {
    /// `u₀ ≡ A`.
    Flat { amplitude: f64 },
    /// `u₀(r) = A·min(1, r^{−2/(q−m)})`, so the decay constant is exactly `A`.
    CappedPower { amplitude: f64 },
    /// `u₀ = 1` on `[0, R]`, zero outside.
    Indicator { radius: f64 },
    /// `u₀(r) = A·exp(−r²/(2σ²))`.
    Gaussian { amplitude: f64, sigma: f64 },
}

impl InitialDatum {
    pub fn name(&self) -> &'static str {
        match self {
            InitialDatum::Flat { .. } => "flat",
            InitialDatum::CappedPower { .. } => "capped-power",
            InitialDatum::Indicator { .. } => "indicator",
            InitialDatum::Gaussian { .. } => "gaussian",
        }
    }

    /// Profile as a function of the radius.
    pub fn profile(&self, params: &Params) -> Result<impl Fn(f64) -> f64, ParamError> {
        let decay = match self {
            InitialDatum::CappedPower { .. } => params.derive()?.decay,
            _ => 0.0,
        };
        let datum = *self;
        Ok(move |r: f64| match datum {
            InitialDatum::Flat { amplitude } => amplitude,
            InitialDatum::CappedPower { amplitude } => {
                if r <= 1.0 {
                    amplitude
                } else {
                    amplitude * r.powf(-decay)
                }
            }
            InitialDatum::Indicator { radius } => {
                if r <= radius {
                    1.0
                } else {
                    0.0
                }
            }
            InitialDatum::Gaussian { amplitude, sigma } => {
                amplitude * (-(r * r) / (2.0 * sigma * sigma)).exp()
            }
        })
    }

    pub fn sample(&self, grid: &RadialGrid, params: &Params) -> Result<State, InitialDatumError> {
        let f = self.profile(params)?;
        Ok(grid.sample(0.0, f)?)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InitialDatumError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn capped_power_uses_decay_exponent() {
        let p = Params::validate(1.0, 0.5, 0.75).unwrap();
        let f = InitialDatum::CappedPower { amplitude: 2.0 }
            .profile(&p)
            .unwrap();
        assert_eq!(f(0.5), 2.0);
        assert_eq!(f(2.0), 2.0 / 256.0);
    }

    #[test]
    fn capped_power_needs_rate_regime() {
        let p = Params::validate_positivity(1.0, 0.5, 0.5).unwrap();
        assert!(InitialDatum::CappedPower { amplitude: 1.0 }
            .profile(&p)
            .is_err());
        let f = InitialDatum::Indicator { radius: 1.0 }.profile(&p).unwrap();
        assert_eq!((f(1.0), f(1.01)), (1.0, 0.0));
    }
}
