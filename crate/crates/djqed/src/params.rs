//! Device parameters: qutrit–cavity couplings with their detunings, and
//! the dissipation rates of the open-system model.
//!
//! All couplings, detunings, and rates are angular (rad/s). Constructors
//! taking ordinary frequencies or inverse times convert explicitly.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Couplings of each qutrit to the cavity and the detuning knobs.
///
/// `g01`/`g12` drive the resonant transition of the active segment;
/// `g01_spurious`/`g12_spurious` are the strengths of the off-resonant
/// leakage terms. The dimensionless knobs set the detunings:
/// `delta01 = b0 · g01_spurious` (positive) and
/// `delta12 = −b1 · g12_spurious` (negative).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub g01: f64,
    pub g01_spurious: f64,
    pub g12: f64,
    pub g12_spurious: f64,
    pub b0: f64,
    pub b1: f64,
}

impl CouplingParams {
    /// Standard device relations from a single coupling strength given as
    /// an ordinary frequency: `g01 = g`, `g12 = √2·g`, spurious strengths
    /// equal to their resonant counterparts.
    pub fn from_g_over_2pi_mhz(g_mhz: f64, b0: f64, b1: f64) -> Result<Self> {
        let g = TAU * g_mhz * 1e6;
        let p = Self {
            g01: g,
            g01_spurious: g,
            g12: 2.0f64.sqrt() * g,
            g12_spurious: 2.0f64.sqrt() * g,
            b0,
            b1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("g01", self.g01),
            ("g01_spurious", self.g01_spurious),
            ("g12", self.g12),
            ("g12_spurious", self.g12_spurious),
            ("b0", self.b0),
            ("b1", self.b1),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::BadParameter { detail: format!("{name} is not finite") });
            }
        }
        if self.g01 <= 0.0 || self.g12 <= 0.0 {
            return Err(Error::BadParameter {
                detail: "resonant couplings must be positive".into(),
            });
        }
        if self.g01_spurious < 0.0 || self.g12_spurious < 0.0 {
            return Err(Error::BadParameter {
                detail: "spurious couplings must be nonnegative".into(),
            });
        }
        if self.b0 <= 0.0 || self.b1 <= 0.0 {
            return Err(Error::BadParameter { detail: "b0 and b1 must be positive".into() });
        }
        Ok(())
    }

    /// Detuning of the 0↔1 leakage term, `b0 · g01_spurious` (rad/s, > 0).
    pub fn delta01(&self) -> f64 {
        self.b0 * self.g01_spurious
    }

    /// Detuning of the 1↔2 leakage term, `−b1 · g12_spurious` (rad/s, < 0).
    pub fn delta12(&self) -> f64 {
        -self.b1 * self.g12_spurious
    }

    pub fn with_b0(mut self, b0: f64) -> Self {
        self.b0 = b0;
        self
    }

    /// Copy with the leakage terms switched off; detunings collapse to
    /// zero with them.
    pub fn without_spurious(mut self) -> Self {
        self.g01_spurious = 0.0;
        self.g12_spurious = 0.0;
        self
    }

    /// Fastest angular frequency in the model, which bounds the
    /// integrator step.
    pub fn max_angular_frequency(&self) -> f64 {
        self.delta01()
            .abs()
            .max(self.delta12().abs())
            .max(self.g01)
            .max(self.g12)
    }
}

impl Default for CouplingParams {
    /// Operating point used throughout: `g/2π = 15 MHz`, `b0 = 24`,
    /// `b1 = 10`.
    fn default() -> Self {
        Self::from_g_over_2pi_mhz(15.0, 24.0, 10.0).expect("valid defaults")
    }
}

/// Dissipation rates (rad-free, 1/s), identical across the three qutrits:
/// cavity decay `kappa`, qutrit relaxation `gamma21` (2→1), `gamma20`
/// (2→0), `gamma10` (1→0), and pure dephasing of levels 2 and 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    pub kappa: f64,
    pub gamma21: f64,
    pub gamma20: f64,
    pub gamma10: f64,
    pub gamma_phi2: f64,
    pub gamma_phi1: f64,
}

impl NoiseParams {
    /// Rates from inverse times in microseconds, mirroring how device
    /// lifetimes are usually quoted.
    pub fn from_inverse_times_us(
        kappa_inv_us: f64,
        gamma21_inv_us: f64,
        gamma20_inv_us: f64,
        gamma10_inv_us: f64,
        gamma_phi2_inv_us: f64,
        gamma_phi1_inv_us: f64,
    ) -> Result<Self> {
        let rate = |name: &str, inv_us: f64| -> Result<f64> {
            if inv_us.is_finite() && inv_us > 0.0 {
                Ok(1.0 / (inv_us * 1e-6))
            } else {
                Err(Error::BadParameter {
                    detail: format!("{name} must be a positive time in microseconds, got {inv_us}"),
                })
            }
        };
        Ok(Self {
            kappa: rate("kappa_inv_us", kappa_inv_us)?,
            gamma21: rate("gamma21_inv_us", gamma21_inv_us)?,
            gamma20: rate("gamma20_inv_us", gamma20_inv_us)?,
            gamma10: rate("gamma10_inv_us", gamma10_inv_us)?,
            gamma_phi2: rate("gamma_phi2_inv_us", gamma_phi2_inv_us)?,
            gamma_phi1: rate("gamma_phi1_inv_us", gamma_phi1_inv_us)?,
        })
    }

    /// Closed-system limit.
    pub fn zero() -> Self {
        Self {
            kappa: 0.0,
            gamma21: 0.0,
            gamma20: 0.0,
            gamma10: 0.0,
            gamma_phi2: 0.0,
            gamma_phi1: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("kappa", self.kappa),
            ("gamma21", self.gamma21),
            ("gamma20", self.gamma20),
            ("gamma10", self.gamma10),
            ("gamma_phi2", self.gamma_phi2),
            ("gamma_phi1", self.gamma_phi1),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::BadParameter {
                    detail: format!("rate {name} must be finite and nonnegative, got {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.kappa == 0.0
            && self.gamma21 == 0.0
            && self.gamma20 == 0.0
            && self.gamma10 == 0.0
            && self.gamma_phi2 == 0.0
            && self.gamma_phi1 == 0.0
    }
}

impl Default for NoiseParams {
    /// Reference lifetimes: `κ⁻¹ = 5 μs`, `γ21⁻¹ = 15 μs`, `γ20⁻¹ =
    /// 150 μs`, `γ10⁻¹ = 20 μs`, dephasing times both 10 μs.
    fn default() -> Self {
        Self::from_inverse_times_us(5.0, 15.0, 150.0, 20.0, 10.0, 10.0).expect("valid defaults")
    }
}
