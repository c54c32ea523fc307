use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary frequency in MHz → angular frequency in rad/µs.
#[inline]
pub fn mhz_to_rad_per_us(f_mhz: f64) -> f64 {
    TAU * f_mhz
}

#[inline]
pub fn rad_per_us_to_mhz(w: f64) -> f64 {
    w / TAU
}

/// The on-disk parameter set. Frequencies are ordinary frequencies in MHz
/// (a value `x` stands for `2π × x MHz`), times are in µs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(rename = "Na")]
    pub na: u64,
    #[serde(rename = "g_m_MHz")]
    pub g_m_mhz: f64,
    #[serde(rename = "g_o_MHz")]
    pub g_o_mhz: f64,
    #[serde(rename = "Omega1_max_MHz")]
    pub omega1_max_mhz: f64,
    #[serde(rename = "Omega2_max_MHz")]
    pub omega2_max_mhz: f64,
    #[serde(rename = "Delta_MHz")]
    pub delta_r1_mhz: f64,
    #[serde(rename = "delta_MHz")]
    pub delta_e_mhz: f64,
    #[serde(rename = "g_MHz")]
    pub g_mhz: f64,
    #[serde(rename = "kappa_o_MHz")]
    pub kappa_o_mhz: f64,
    #[serde(rename = "kappa_m_MHz")]
    pub kappa_m_mhz: f64,
    #[serde(rename = "Gamma0_MHz")]
    pub gamma0_mhz: f64,
    #[serde(rename = "T_us")]
    pub t_us: f64,
    #[serde(rename = "N_excitations")]
    pub n_excitations: usize,
}

impl ParamsFile {
    /// Every key, in file order.
    pub const KEYS: [&'static str; 13] = [
        "Na",
        "g_m_MHz",
        "g_o_MHz",
        "Omega1_max_MHz",
        "Omega2_max_MHz",
        "Delta_MHz",
        "delta_MHz",
        "g_MHz",
        "kappa_o_MHz",
        "kappa_m_MHz",
        "Gamma0_MHz",
        "T_us",
        "N_excitations",
    ];

    /// 600-atom superatom with the rates used for the reference transfer
    /// (peak Rabi frequencies set to the collective couplings).
    pub fn reference() -> Self {
        let na = 600u64;
        let sqrt_na = (na as f64).sqrt();
        Self {
            na,
            g_m_mhz: 0.182,
            g_o_mhz: 0.206,
            omega1_max_mhz: sqrt_na * 0.182,
            omega2_max_mhz: sqrt_na * 0.206,
            delta_r1_mhz: 70.5,
            delta_e_mhz: 88.6,
            g_mhz: 0.282,
            kappa_o_mhz: 0.0034,
            kappa_m_mhz: 0.002,
            gamma0_mhz: 0.0036,
            t_us: 8.2,
            n_excitations: 5,
        }
    }

    pub fn to_params(&self) -> Result<PhysicalParams> {
        let p = PhysicalParams {
            na: self.na,
            g_m: mhz_to_rad_per_us(self.g_m_mhz),
            g_o: mhz_to_rad_per_us(self.g_o_mhz),
            omega1_max: mhz_to_rad_per_us(self.omega1_max_mhz),
            omega2_max: mhz_to_rad_per_us(self.omega2_max_mhz),
            detuning_r1: mhz_to_rad_per_us(self.delta_r1_mhz),
            detuning_e: mhz_to_rad_per_us(self.delta_e_mhz),
            g: mhz_to_rad_per_us(self.g_mhz),
            kappa_o: mhz_to_rad_per_us(self.kappa_o_mhz),
            kappa_m: mhz_to_rad_per_us(self.kappa_m_mhz),
            gamma0: mhz_to_rad_per_us(self.gamma0_mhz),
            duration: self.t_us,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Physical parameters with every frequency held in rad/µs and times in µs.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalParams {
    pub na: u64,
    pub g_m: f64,
    pub g_o: f64,
    pub omega1_max: f64,
    pub omega2_max: f64,
    /// Δ, detuning of the `|g⟩ → |r1⟩` leg.
    pub detuning_r1: f64,
    /// δ, detuning of the `|r2⟩ → |e⟩` leg.
    pub detuning_e: f64,
    /// Peak FSL coupling of the sin/cos schedule.
    pub g: f64,
    pub kappa_o: f64,
    pub kappa_m: f64,
    pub gamma0: f64,
    /// Pump duration T in µs.
    pub duration: f64,
}

impl PhysicalParams {
    pub fn reference() -> Self {
        ParamsFile::reference().to_params().expect("reference parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.na == 0 {
            return Err(Error::domain("Na must be at least 1"));
        }
        let fields = [
            ("g_m", self.g_m),
            ("g_o", self.g_o),
            ("Omega1_max", self.omega1_max),
            ("Omega2_max", self.omega2_max),
            ("Delta", self.detuning_r1),
            ("delta", self.detuning_e),
            ("g", self.g),
            ("kappa_o", self.kappa_o),
            ("kappa_m", self.kappa_m),
            ("Gamma0", self.gamma0),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        if !self.duration.is_finite() || self.duration <= 0.0 {
            return Err(Error::domain(format!("T must be positive, got {} µs", self.duration)));
        }
        Ok(())
    }

    pub fn with_duration(&self, duration: f64) -> Self {
        Self { duration, ..self.clone() }
    }

    /// Copy with all three dissipation rates set to zero.
    pub fn closed(&self) -> Self {
        Self { kappa_o: 0.0, kappa_m: 0.0, gamma0: 0.0, ..self.clone() }
    }

    /// Back to the on-disk representation.
    pub fn to_file(&self, n_excitations: usize) -> ParamsFile {
        ParamsFile {
            na: self.na,
            g_m_mhz: rad_per_us_to_mhz(self.g_m),
            g_o_mhz: rad_per_us_to_mhz(self.g_o),
            omega1_max_mhz: rad_per_us_to_mhz(self.omega1_max),
            omega2_max_mhz: rad_per_us_to_mhz(self.omega2_max),
            delta_r1_mhz: rad_per_us_to_mhz(self.detuning_r1),
            delta_e_mhz: rad_per_us_to_mhz(self.detuning_e),
            g_mhz: rad_per_us_to_mhz(self.g),
            kappa_o_mhz: rad_per_us_to_mhz(self.kappa_o),
            kappa_m_mhz: rad_per_us_to_mhz(self.kappa_m),
            gamma0_mhz: rad_per_us_to_mhz(self.gamma0),
            t_us: self.duration,
            n_excitations,
        }
    }
}
