//! Run configuration: a JSON file with unit-suffixed field names, plus
//! the command-line overrides layered on top of it.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use djqed::lindblad::{default_b0_sweep, SimConfig, DEFAULT_PHOTON_CUTOFF};
use djqed::params::{CouplingParams, NoiseParams};

use crate::Failure;

/// Either one working point or a sweep grid; a bare number and a list
/// are both accepted in the file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum B0Spec {
    Single(f64),
    Sweep(Vec<f64>),
}

impl B0Spec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::Single(v) => vec![*v],
            Self::Sweep(v) => v.clone(),
        }
    }
}

/// Decoherence channels given as inverse rates, matching how such
/// numbers are usually quoted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub kappa_inv_us: f64,
    pub gamma21_inv_us: f64,
    pub gamma20_inv_us: f64,
    pub gamma10_inv_us: f64,
    pub gamma_phi2_inv_us: f64,
    pub gamma_phi1_inv_us: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            kappa_inv_us: 5.0,
            gamma21_inv_us: 15.0,
            gamma20_inv_us: 150.0,
            gamma10_inv_us: 20.0,
            gamma_phi2_inv_us: 10.0,
            gamma_phi1_inv_us: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Coupling strength as an ordinary frequency; converted to rad/s
    /// internally so the 2π never hides in the numbers.
    pub g_over_2pi_mhz: f64,
    pub b0: B0Spec,
    pub b1: f64,
    pub noise: NoiseConfig,
    pub photon_cutoff: usize,
    pub dt_override_s: Option<f64>,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            g_over_2pi_mhz: 15.0,
            b0: B0Spec::Sweep(default_b0_sweep()),
            b1: 10.0,
            noise: NoiseConfig::default(),
            photon_cutoff: DEFAULT_PHOTON_CUTOFF,
            dt_override_s: None,
            output_path: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::validation(format!("cannot read {}: {e}", path.display())))?;
        let config: Self = serde_json::from_str(&text)
            .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Field-level checks so a bad file names the offending entry
    /// instead of failing deep inside a run.
    pub fn validate(&self) -> Result<(), Failure> {
        let positive = |name: &str, value: f64| -> Result<(), Failure> {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Failure::validation(format!("{name} must be positive, got {value}")))
            }
        };
        positive("g_over_2pi_mhz", self.g_over_2pi_mhz)?;
        positive("b1", self.b1)?;
        positive("noise.kappa_inv_us", self.noise.kappa_inv_us)?;
        positive("noise.gamma21_inv_us", self.noise.gamma21_inv_us)?;
        positive("noise.gamma20_inv_us", self.noise.gamma20_inv_us)?;
        positive("noise.gamma10_inv_us", self.noise.gamma10_inv_us)?;
        positive("noise.gamma_phi2_inv_us", self.noise.gamma_phi2_inv_us)?;
        positive("noise.gamma_phi1_inv_us", self.noise.gamma_phi1_inv_us)?;
        let b0_values = self.b0.values();
        if b0_values.is_empty() {
            return Err(Failure::validation("b0 sweep list is empty"));
        }
        for (i, &b0) in b0_values.iter().enumerate() {
            positive(&format!("b0[{i}]"), b0)?;
        }
        if self.photon_cutoff < DEFAULT_PHOTON_CUTOFF {
            return Err(Failure::validation(format!(
                "photon_cutoff must be at least {DEFAULT_PHOTON_CUTOFF}, got {}",
                self.photon_cutoff
            )));
        }
        if let Some(dt) = self.dt_override_s {
            positive("dt_override_s", dt)?;
        }
        Ok(())
    }

    pub fn coupling_params(&self, b0: f64) -> Result<CouplingParams, Failure> {
        Ok(CouplingParams::from_g_over_2pi_mhz(self.g_over_2pi_mhz, b0, self.b1)?)
    }

    pub fn noise_params(&self) -> Result<NoiseParams, Failure> {
        let n = &self.noise;
        Ok(NoiseParams::from_inverse_times_us(
            n.kappa_inv_us,
            n.gamma21_inv_us,
            n.gamma20_inv_us,
            n.gamma10_inv_us,
            n.gamma_phi2_inv_us,
            n.gamma_phi1_inv_us,
        )?)
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig { photon_cutoff: self.photon_cutoff, dt_override: self.dt_override_s }
    }
}

/// Flag overrides shared by the simulation commands; `dt` arrives in
/// nanoseconds and is stored in seconds.
pub struct Overrides {
    pub b0: Option<Vec<f64>>,
    pub cutoff: Option<usize>,
    pub dt_ns: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn effective_config(path: Option<&Path>, over: &Overrides) -> Result<RunConfig, Failure> {
    let mut config = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(b0) = &over.b0 {
        config.b0 = if b0.len() == 1 {
            B0Spec::Single(b0[0])
        } else {
            B0Spec::Sweep(b0.clone())
        };
    }
    if let Some(cutoff) = over.cutoff {
        config.photon_cutoff = cutoff;
    }
    if let Some(dt_ns) = over.dt_ns {
        config.dt_override_s = Some(dt_ns * 1e-9);
    }
    if let Some(out) = &over.out {
        config.output_path = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}
