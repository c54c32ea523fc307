use std::fs;

use clap::Args;
use fslt_core::model::ParamsFile;

use crate::CliError;

/// Load a parameter file, or the built-in reference set for `defaults`.
///
/// Every key must be present; unknown keys are rejected by name.
pub fn load_params(source: &str) -> Result<ParamsFile, CliError> {
    if source == "defaults" {
        return Ok(ParamsFile::reference());
    }
    let text = fs::read_to_string(source).map_err(|e| CliError::Config(format!("cannot read {source}: {e}")))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{source}: {}", e.message())))
}

/// Model parameters given on the command line; each replaces the value
/// from the config file.
#[derive(Args, Clone, Debug, Default)]
pub struct ParamOverrides {
    /// Number of atoms in the superatom
    #[arg(long = "Na", value_name = "COUNT")]
    pub na: Option<u64>,
    /// Single-atom microwave coupling g_m [MHz, ordinary frequency]
    #[arg(long = "g-m-MHz", value_name = "MHZ")]
    pub g_m_mhz: Option<f64>,
    /// Single-atom optical coupling g_o [MHz]
    #[arg(long = "g-o-MHz", value_name = "MHZ")]
    pub g_o_mhz: Option<f64>,
    /// Peak Rabi frequency Omega1 of the g-r1 leg [MHz]
    #[arg(long = "Omega1-max-MHz", value_name = "MHZ")]
    pub omega1_max_mhz: Option<f64>,
    /// Peak Rabi frequency Omega2 of the r2-e leg [MHz]
    #[arg(long = "Omega2-max-MHz", value_name = "MHZ")]
    pub omega2_max_mhz: Option<f64>,
    /// Detuning Delta of the g-r1 leg [MHz]
    #[arg(long = "Delta-MHz", value_name = "MHZ")]
    pub delta_r1_mhz: Option<f64>,
    /// Detuning delta of the r2-e leg [MHz]
    #[arg(long = "delta-MHz", value_name = "MHZ")]
    pub delta_e_mhz: Option<f64>,
    /// Peak lattice coupling g of the sin/cos pump [MHz]
    #[arg(long = "g-MHz", value_name = "MHZ")]
    pub g_mhz: Option<f64>,
    /// Optical cavity decay rate kappa_o [MHz]
    #[arg(long = "kappa-o-MHz", value_name = "MHZ")]
    pub kappa_o_mhz: Option<f64>,
    /// Microwave resonator decay rate kappa_m [MHz]
    #[arg(long = "kappa-m-MHz", value_name = "MHZ")]
    pub kappa_m_mhz: Option<f64>,
    /// Superatom decay rate Gamma0 [MHz]
    #[arg(long = "Gamma0-MHz", value_name = "MHZ")]
    pub gamma0_mhz: Option<f64>,
    /// Pump duration T [µs]
    #[arg(long = "T-us", visible_alias = "T", value_name = "US")]
    pub t_us: Option<f64>,
    /// Photon number N initially in the microwave resonator
    #[arg(long = "N", value_name = "COUNT")]
    pub n_excitations: Option<usize>,
}

impl ParamOverrides {
    pub fn apply(&self, file: &mut ParamsFile) {
        fn set<T: Copy>(slot: &mut T, value: Option<T>) {
            if let Some(v) = value {
                *slot = v;
            }
        }
        set(&mut file.na, self.na);
        set(&mut file.g_m_mhz, self.g_m_mhz);
        set(&mut file.g_o_mhz, self.g_o_mhz);
        set(&mut file.omega1_max_mhz, self.omega1_max_mhz);
        set(&mut file.omega2_max_mhz, self.omega2_max_mhz);
        set(&mut file.delta_r1_mhz, self.delta_r1_mhz);
        set(&mut file.delta_e_mhz, self.delta_e_mhz);
        set(&mut file.g_mhz, self.g_mhz);
        set(&mut file.kappa_o_mhz, self.kappa_o_mhz);
        set(&mut file.kappa_m_mhz, self.kappa_m_mhz);
        set(&mut file.gamma0_mhz, self.gamma0_mhz);
        set(&mut file.t_us, self.t_us);
        set(&mut file.n_excitations, self.n_excitations);
    }
}
