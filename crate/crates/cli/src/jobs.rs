use clap::Args;
use fslt_core::experiments::{
    critical_durations, disorder_sweep, fidelity_heatmap, linear_grid, run_transfer_with,
    validate_adiabatic_elimination, validate_blockade, DisorderOptions, TransferOptions, DEFAULT_ETA_GRID,
    DISORDER_STEPS,
};
use fslt_core::model::{blockade_radius, ParamsFile};
use fslt_core::output::format_sig12;
use fslt_core::spectral::{
    chain_spectrum_trajectory, flat_band_levels, phase_classify, spectrum_table, zero_mode_analytic,
};
use fslt_core::{Cell, ChainModel, Error, PulseSchedule, Table};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOpts {
    /// Number of sampled times in [0, T]
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeOpts {
    /// Coupling ratio Gm/Go (dimensionless); `inf` for Go = 0
    #[arg(long, default_value = "1", value_parser = parse_ratio)]
    #[serde(with = "ratio_text")]
    pub ratio: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferOpts {
    /// RK4 step count over [0, T]; default T/20000, refined for long pulses
    #[arg(long)]
    pub steps: Option<usize>,
    /// Number of recorded intervals
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderOpts {
    /// Relative error bound eta applied to both envelopes (comma-separated list)
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ETA_GRID)]
    pub eta: Vec<f64>,
    /// Monte Carlo samples per eta
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    /// Master seed of the sample streams
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// RK4 steps per sample over [0, T]
    #[arg(long, default_value_t = DISORDER_STEPS)]
    pub steps: usize,
    /// Also run every sample with both errors negated
    #[arg(long)]
    pub mirrored: bool,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapOpts {
    /// Smallest photon number
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    /// Largest photon number
    #[arg(long, default_value_t = 32)]
    pub n_max: usize,
    /// Photon-number step
    #[arg(long, default_value_t = 2)]
    pub n_step: usize,
    /// Shortest pump duration [µs]
    #[arg(long = "t-min-us", default_value_t = 1.0)]
    pub t_min_us: f64,
    /// Longest pump duration [µs]
    #[arg(long = "t-max-us", default_value_t = 150.0)]
    pub t_max_us: f64,
    /// Duration step [µs]
    #[arg(long = "t-step-us", default_value_t = 1.0)]
    pub t_step_us: f64,
    /// Include cavity and superatom losses
    #[arg(long)]
    pub dissipative: bool,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalOpts {
    /// Start of the duration scan [µs]
    #[arg(long = "t-min-us", default_value_t = 0.05)]
    pub t_min_us: f64,
    /// End of the duration scan [µs]
    #[arg(long = "t-max-us", default_value_t = 25.0)]
    pub t_max_us: f64,
    /// Scan resolution, at most 0.05 [µs]
    #[arg(long = "resolution-us", default_value_t = 0.05)]
    pub resolution_us: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminationOpts {
    /// Photon cutoff per mode of the single-atom models
    #[arg(long, default_value_t = 1)]
    pub n_max: usize,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockadeOpts {
    /// Single-atom drive coupling [MHz]
    #[arg(long = "drive-MHz", default_value_t = 0.5)]
    pub drive_mhz: f64,
    /// Pair interaction shift V [MHz]
    #[arg(long = "V-MHz", default_value_t = 500.0)]
    pub interaction_mhz: f64,
}

#[derive(Args, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusOpts {
    /// van der Waals coefficient C6 [MHz µm^6]
    #[arg(long = "C6-MHz-um6")]
    pub c6_mhz_um6: f64,
}

/// A fully specified run, as recorded in a manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "options", rename_all = "kebab-case")]
pub enum Job {
    Spectrum(SpectrumOpts),
    ZeroMode(ZeroModeOpts),
    Transfer(TransferOpts),
    Dissipative(TransferOpts),
    Disorder(DisorderOpts),
    Heatmap(HeatmapOpts),
    CriticalT(CriticalOpts),
    ValidateElimination(EliminationOpts),
    ValidateBlockade(BlockadeOpts),
    BlockadeRadius(RadiusOpts),
}

pub struct Outcome {
    pub table: Table,
    pub summary: String,
    pub seed: Option<u64>,
}

fn parse_ratio(s: &str) -> Result<f64, String> {
    let r: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if r >= 0.0 && !r.is_nan() {
        Ok(r)
    } else {
        Err(format!("ratio must be non-negative, got {s}"))
    }
}

mod ratio_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_ratio(&text).map_err(serde::de::Error::custom)
    }
}

fn kv(key: &str, value: f64) -> String {
    format!("{key}={}", format_sig12(value))
}

impl Job {
    /// Stem of the output files and the summary prefix.
    pub fn name(&self) -> &'static str {
        match self {
            Job::Spectrum(_) => "spectrum",
            Job::ZeroMode(_) => "zero-mode",
            Job::Transfer(_) => "transfer",
            Job::Dissipative(_) => "dissipative",
            Job::Disorder(_) => "disorder",
            Job::Heatmap(_) => "heatmap",
            Job::CriticalT(_) => "critical-t",
            Job::ValidateElimination(_) => "validate-elimination",
            Job::ValidateBlockade(_) => "validate-blockade",
            Job::BlockadeRadius(_) => "blockade-radius",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Job::Disorder(o) => Some(o.seed),
            _ => None,
        }
    }

    pub fn run(&self, file: &ParamsFile, workers: usize) -> Result<Outcome, CliError> {
        let params = file.to_params()?;
        let n = file.n_excitations;
        let (table, summary) = match self {
            Job::Spectrum(o) => {
                let schedule = PulseSchedule::sin_cos(params.g, params.duration)?;
                let snaps = chain_spectrum_trajectory(n, &schedule, o.samples)?;
                let flat = flat_band_levels(n, params.g);
                let deviation = snaps
                    .iter()
                    .flat_map(|s| s.eigenvalues.iter().zip(&flat).map(|(a, b)| (a - b).abs()))
                    .fold(0.0f64, f64::max);
                let gap = snaps
                    .iter()
                    .flat_map(|s| s.eigenvalues.iter().copied().filter(|e| *e > 1e-9 * params.g))
                    .fold(f64::INFINITY, f64::min);
                let summary = format!(
                    "{} {} {}",
                    kv("samples", snaps.len() as f64),
                    kv("max_flat_band_deviation_rad_per_us", deviation),
                    kv("gap_rad_per_us", gap)
                );
                (spectrum_table(&snaps), summary)
            }
            Job::ZeroMode(o) => {
                let (gm, go) = if o.ratio.is_infinite() { (1.0, 0.0) } else { (o.ratio, 1.0) };
                let mode = zero_mode_analytic(n, gm, go)?;
                let class = phase_classify(&ChainModel::new(n, gm, go));
                let summary = format!(
                    "argmax_site={} {} winding={} raw_sign={}",
                    mode.argmax_site(),
                    kv("center_site", mode.center_site),
                    class.winding,
                    class.raw_sign
                );
                (mode.table(), summary)
            }
            Job::Transfer(o) | Job::Dissipative(o) => {
                let dissipative = matches!(self, Job::Dissipative(_));
                let opts = TransferOptions { steps: o.steps, samples: o.samples, ..TransferOptions::default() };
                let r = run_transfer_with(&params, n, params.duration, dissipative, opts)?;
                let traj = &r.trajectory;
                let (peak_i, peak) = traj
                    .n_optical
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best });
                let mut summary = format!(
                    "{} {} {} {}",
                    kv("final_n_optical", r.final_n_optical),
                    kv("fidelity", r.fidelity),
                    kv("P0", traj.p0(traj.len() - 1)),
                    kv("drift", traj.drift)
                );
                if dissipative {
                    summary =
                        format!("{summary} {} {}", kv("peak_n_optical", peak), kv("peak_t_us", traj.times[peak_i]));
                }
                (traj.to_table(), summary)
            }
            Job::Disorder(o) => {
                let etas: Vec<(f64, f64)> = o.eta.iter().map(|&e| (e, e)).collect();
                let opts =
                    DisorderOptions { samples: o.samples, seed: o.seed, workers, steps: o.steps, mirrored: o.mirrored };
                let sweep = disorder_sweep(&params, n, &etas, opts)?;
                let means: Vec<String> = o
                    .eta
                    .iter()
                    .zip(&sweep.values)
                    .map(|(e, v)| format!("{}:{}", format_sig12(*e), format_sig12(v[0])))
                    .collect();
                let lo = sweep.values.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
                let hi = sweep.values.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
                let summary = format!(
                    "samples={} seed={} mean_n_optical_by_eta={} {}",
                    o.samples,
                    o.seed,
                    means.join(";"),
                    kv("spread", hi - lo)
                );
                (sweep.to_table(), summary)
            }
            Job::Heatmap(o) => {
                if o.n_step == 0 || o.n_min > o.n_max {
                    return Err(Error::InvalidGrid(format!(
                        "N grid {}..={} step {} is empty",
                        o.n_min, o.n_max, o.n_step
                    ))
                    .into());
                }
                let ns: Vec<usize> = (o.n_min..=o.n_max).step_by(o.n_step).collect();
                let ts = linear_grid(o.t_min_us, o.t_max_us, o.t_step_us)?;
                let sweep = fidelity_heatmap(&params, &ns, &ts, o.dissipative, workers)?;
                let worst = sweep.row_maxima().into_iter().fold(f64::INFINITY, f64::min);
                let summary = format!("cells={} {}", ns.len() * ts.len(), kv("min_row_max_fidelity", worst));
                (sweep.to_table(), summary)
            }
            Job::CriticalT(o) => {
                let scan = critical_durations(&params, n, o.t_min_us, o.t_max_us, o.resolution_us, workers)?;
                let list = |xs: &[f64]| xs.iter().map(|&x| format_sig12(x)).collect::<Vec<_>>().join(";");
                let summary = format!("maxima_us={} theoretical_us={}", list(&scan.maxima), list(&scan.theoretical));
                (scan.to_table(), summary)
            }
            Job::ValidateElimination(o) => {
                let r = validate_adiabatic_elimination(&params, o.n_max)?;
                if r.warning {
                    eprintln!("warning: detuning ratios below 10, the effective model may not apply");
                }
                let mut table =
                    Table::new(["max_deviation", "Delta_over_Omega1", "delta_over_Omega2", "warning", "steps"]);
                table.push(vec![
                    Cell::Float(r.max_deviation),
                    Cell::Float(r.detuning_ratios.0),
                    Cell::Float(r.detuning_ratios.1),
                    Cell::from(r.warning),
                    Cell::from(r.steps),
                ]);
                (table, format!("{} warning={}", kv("max_deviation", r.max_deviation), r.warning))
            }
            Job::ValidateBlockade(o) => {
                let r = validate_blockade(o.drive_mhz, o.interaction_mhz)?;
                let ratio = r.enhancement_ratio.unwrap_or(f64::NAN);
                let mut table = Table::new([
                    "drive_MHz",
                    "V_MHz",
                    "enhancement_ratio",
                    "double_excitation_max",
                    "single_excitation_max",
                ]);
                table.push(vec![
                    Cell::Float(o.drive_mhz),
                    Cell::Float(o.interaction_mhz),
                    Cell::Float(ratio),
                    Cell::Float(r.double_excitation_max),
                    Cell::Float(r.single_excitation_max),
                ]);
                (
                    table,
                    format!(
                        "{} {}",
                        kv("enhancement_ratio", ratio),
                        kv("double_excitation_max", r.double_excitation_max)
                    ),
                )
            }
            Job::BlockadeRadius(o) => {
                let r = blockade_radius(o.c6_mhz_um6, file.delta_r1_mhz, file.na, file.g_m_mhz, file.omega1_max_mhz)?;
                let mut table = Table::new(["C6_MHz_um6", "blockade_radius_um"]);
                table.push(vec![Cell::Float(o.c6_mhz_um6), Cell::Float(r)]);
                (table, kv("blockade_radius_um", r))
            }
        };
        Ok(Outcome { table, summary: format!("{} {summary}", self.name()), seed: self.seed() })
    }
}
