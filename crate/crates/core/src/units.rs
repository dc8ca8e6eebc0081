//! Physical constants and conversions between dimensionless ratios and
//! natural-unit parameters.

use crate::error::{Error, Result};

/// Action and energy-per-temperature units. Natural units are the default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub hbar: f64,
    pub kb: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self::NATURAL
    }
}

impl Constants {
    pub const NATURAL: Constants = Constants { hbar: 1.0, kb: 1.0 };

    /// SI values (J s, J/K).
    pub const SI: Constants = Constants {
        hbar: 1.054_571_817e-34,
        kb: 1.380_649e-23,
    };

    pub fn new(hbar: f64, kb: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::param("hbar", hbar, "must be positive and finite"));
        }
        if !(kb > 0.0 && kb.is_finite()) {
            return Err(Error::param("kb", kb, "must be positive and finite"));
        }
        Ok(Self { hbar, kb })
    }

    /// Thermal energy `k_B T`.
    #[inline]
    pub fn thermal_energy(&self, temperature: f64) -> f64 {
        self.kb * temperature
    }

    /// `k_B T / (hbar omega)`.
    pub fn reduced_temperature(&self, temperature: f64, frequency: f64) -> f64 {
        self.kb * temperature / (self.hbar * frequency)
    }

    /// Inverse of [`Constants::reduced_temperature`].
    pub fn temperature_from_reduced(&self, reduced: f64, frequency: f64) -> f64 {
        reduced * self.hbar * frequency / self.kb
    }
}

/// Entropy display conversion; all computation stays in nats.
pub fn nats_to_bits(s: f64) -> f64 {
    s / std::f64::consts::LN_2
}
