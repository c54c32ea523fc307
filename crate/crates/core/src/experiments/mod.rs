//! Scenario runners: single transfers, fringe scans, disorder Monte Carlo,
//! fidelity heatmaps and model-validation harnesses.

mod sweeps;
mod validation;

use std::f64::consts::TAU;

use crate::dynamics::{
    collapse_operators, propagate_lindblad, propagate_schrodinger, steps_for_norm_tolerance, DensityMatrix,
    Propagation, PureState, Trajectory, DEFAULT_STEPS,
};
use crate::error::{Error, Result};
use crate::fockspace::CompositeBasis;
use crate::model::{jc_drive, CouplingScales, PhysicalParams, PulseSchedule};
use crate::output::{Cell, Table};

pub use sweeps::{
    default_heatmap_grid, disorder_monte_carlo, disorder_sweep, fidelity_heatmap, DisorderOptions, DisorderPoint,
    DisorderSample, SweepAxes, SweepResult, DEFAULT_ETA_GRID, DISORDER_STEPS,
};
pub use validation::{validate_adiabatic_elimination, validate_blockade, BlockadeReport, EliminationReport};

/// Outcome of one pump cycle starting from `|0, N, G⟩`.
#[derive(Clone, Debug)]
pub struct TransferResult {
    pub n: usize,
    /// µs
    pub duration: f64,
    pub dissipative: bool,
    pub final_n_optical: f64,
    /// Population of site `2N + 1` at `T`.
    pub fidelity: f64,
    pub trajectory: Trajectory,
}

/// Integration settings of a transfer, on top of the physics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferOptions {
    pub scales: CouplingScales,
    /// Fixed step count; `None` picks [`default_steps`].
    pub steps: Option<usize>,
    pub samples: usize,
    pub snapshots: usize,
    pub track_eigenbasis: bool,
}

impl Default for TransferOptions {
    fn default() -> Self {
        Self { scales: CouplingScales::default(), steps: None, samples: 500, snapshots: 0, track_eigenbasis: true }
    }
}

impl TransferOptions {
    /// Only the final state is of interest.
    pub fn final_only() -> Self {
        Self { samples: 1, track_eigenbasis: false, ..Self::default() }
    }
}

/// `T/20000`, refined further when the predicted RK4 norm loss over long
/// pulses on large lattices would exceed 1e-8.
pub fn default_steps(g: f64, n: usize, duration: f64) -> usize {
    DEFAULT_STEPS.max(steps_for_norm_tolerance(duration, g * (n.max(1) as f64).sqrt(), 1e-8))
}

/// Run one transfer with the sin/cos schedule of peak `params.g`.
pub fn run_transfer(params: &PhysicalParams, n: usize, duration: f64, dissipative: bool) -> Result<TransferResult> {
    run_transfer_with(params, n, duration, dissipative, TransferOptions::default())
}

pub fn run_transfer_with(
    params: &PhysicalParams,
    n: usize,
    duration: f64,
    dissipative: bool,
    options: TransferOptions,
) -> Result<TransferResult> {
    params.validate()?;
    let schedule = PulseSchedule::sin_cos(params.g, duration)?;
    let steps = options.steps.unwrap_or_else(|| default_steps(params.g, n, duration));
    let prop = Propagation::new(duration)
        .with_steps(steps)
        .with_samples(options.samples)
        .with_snapshots(options.snapshots)
        .tracking(options.track_eigenbasis);
    let trajectory = if dissipative {
        let basis = CompositeBasis::all_sectors(n);
        let h = jc_drive(schedule, options.scales, &basis);
        let rho0 = DensityMatrix::from_pure(&PureState::microwave_fock(&basis));
        propagate_lindblad(&h, &rho0, &collapse_operators(params, &basis), prop)?
    } else {
        let basis = CompositeBasis::fixed_sector(n);
        let h = jc_drive(schedule, options.scales, &basis);
        propagate_schrodinger(&h, &PureState::microwave_fock(&basis), prop)?
    };
    Ok(TransferResult {
        n,
        duration,
        dissipative,
        final_n_optical: trajectory.final_n_optical(),
        fidelity: trajectory.fidelity(),
        trajectory,
    })
}

/// A fidelity scan over pump durations.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalDurations {
    pub n: usize,
    /// `(T, fidelity)` on the scan grid.
    pub scan: Vec<(f64, f64)>,
    /// Interior local maxima of the fidelity, in µs.
    pub maxima: Vec<f64>,
    /// `2nπ/g` inside the scanned range.
    pub theoretical: Vec<f64>,
}

impl CriticalDurations {
    /// Fidelity at a grid point returned in `maxima`.
    pub fn fidelity_at(&self, t: f64) -> Option<f64> {
        self.scan.iter().find(|(x, _)| *x == t).map(|&(_, f)| f)
    }

    /// The maximum nearest to `t`.
    pub fn nearest_maximum(&self, t: f64) -> Option<f64> {
        self.maxima.iter().copied().min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs()))
    }

    /// `kind, T_us, fidelity` with `kind` one of `scan`, `maximum`, `theory`.
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["kind", "T_us", "fidelity"]);
        for &(t, f) in &self.scan {
            table.push(vec![Cell::Text("scan".into()), Cell::Float(t), Cell::Float(f)]);
        }
        for &t in &self.maxima {
            let f = self.fidelity_at(t).unwrap_or(f64::NAN);
            table.push(vec![Cell::Text("maximum".into()), Cell::Float(t), Cell::Float(f)]);
        }
        for &t in &self.theoretical {
            table.push(vec![Cell::Text("theory".into()), Cell::Float(t), Cell::Float(f64::NAN)]);
        }
        table
    }
}

/// Equally spaced grid `start, start + step, …` up to `end` (inclusive,
/// with round-off slack). Points are computed as `start + i·step`.
pub fn linear_grid(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite() && start.is_finite() && end.is_finite()) || end < start {
        return Err(Error::InvalidGrid(format!("cannot build grid from {start} to {end} in steps of {step}")));
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Interior strict-left local maxima of a sampled curve.
pub fn local_maxima(points: &[(f64, f64)]) -> Vec<f64> {
    points.windows(3).filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1).map(|w| w[1].0).collect()
}

/// Scan the unitary fidelity over `T ∈ [t_min, t_max]` and report its local
/// maxima next to the area-theorem grid `gT = 2nπ`.
pub fn critical_durations(
    params: &PhysicalParams,
    n: usize,
    t_min: f64,
    t_max: f64,
    resolution: f64,
    workers: usize,
) -> Result<CriticalDurations> {
    if !(resolution > 0.0 && resolution <= 0.05) {
        return Err(Error::InvalidGrid(format!("resolution must lie in (0, 0.05] µs, got {resolution}")));
    }
    if t_min.is_nan() || t_min <= 0.0 || t_max <= t_min {
        return Err(Error::InvalidGrid(format!("empty duration range [{t_min}, {t_max}]")));
    }
    let grid = linear_grid(t_min, t_max, resolution)?;
    let fidelities = sweeps::parallel_map(workers, &grid, |&t| {
        run_transfer_with(params, n, t, false, TransferOptions::final_only()).map(|r| r.fidelity)
    })?;
    let scan: Vec<(f64, f64)> = grid.into_iter().zip(fidelities).collect();
    let period = TAU / params.g;
    let theoretical = (1..).map(|k| k as f64 * period).skip_while(|&t| t < t_min).take_while(|&t| t <= t_max).collect();
    Ok(CriticalDurations { n, maxima: local_maxima(&scan), scan, theoretical })
}

/// The reference dissipative run and its photon-number extremum.
#[derive(Clone, Debug)]
pub struct DissipativeBenchmark {
    pub trajectory: Trajectory,
    pub final_n_optical: f64,
    pub peak_n_optical: f64,
    /// µs
    pub peak_time: f64,
}

/// Full Lindblad transfer at `params.duration`.
pub fn dissipative_benchmark(params: &PhysicalParams, n: usize) -> Result<DissipativeBenchmark> {
    let result = run_transfer(params, n, params.duration, true)?;
    let traj = result.trajectory;
    let (i, &peak) =
        traj.n_optical.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("trajectory has samples");
    Ok(DissipativeBenchmark {
        final_n_optical: result.final_n_optical,
        peak_n_optical: peak,
        peak_time: traj.times[i],
        trajectory: traj,
    })
}

/// Ratio `‖ψ(h) - ψ(h/2)‖ / ‖ψ(h/2) - ψ(h/4)‖` of final unitary states, which
/// tends to 16 for a fourth-order method.
pub fn step_halving_ratio(params: &PhysicalParams, n: usize, duration: f64, base_steps: usize) -> Result<f64> {
    let finals = [base_steps, 2 * base_steps, 4 * base_steps]
        .iter()
        .map(|&steps| {
            let opts = TransferOptions { steps: Some(steps), ..TransferOptions::final_only() };
            let r = run_transfer_with(params, n, duration, false, opts)?;
            match r.trajectory.final_state {
                crate::dynamics::StateRecord::Pure(p) => Ok(p.amplitudes().clone()),
                crate::dynamics::StateRecord::Mixed(_) => unreachable!("unitary run"),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((&finals[0] - &finals[1]).norm() / (&finals[1] - &finals[2]).norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sudden_limit_freezes_the_state() {
        let r = run_transfer(&PhysicalParams::reference(), 5, 0.01, false).unwrap();
        assert!(r.final_n_optical < 1e-3);
        assert!(r.fidelity < 1e-6);
    }

    #[test]
    fn zero_duration_is_rejected() {
        assert!(run_transfer(&PhysicalParams::reference(), 5, 0.0, false).is_err());
    }

    #[test]
    fn grid_and_maxima_helpers() {
        let g = linear_grid(1.0, 2.0, 0.25).unwrap();
        assert_eq!(g, vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert_eq!(linear_grid(5.0, 5.0, 0.1).unwrap(), vec![5.0]);
        assert!(linear_grid(2.0, 1.0, 0.1).is_err());
        let pts = [(0.0, 1.0), (1.0, 2.0), (2.0, 1.5), (3.0, 3.0), (4.0, 3.0), (5.0, 0.0)];
        assert_eq!(local_maxima(&pts), vec![1.0, 3.0]);
    }

    #[test]
    fn critical_scan_validates_inputs() {
        let p = PhysicalParams::reference();
        assert!(critical_durations(&p, 5, 1.0, 2.0, 0.1, 1).is_err());
        assert!(critical_durations(&p, 5, 3.0, 2.0, 0.05, 1).is_err());
    }

    #[test]
    fn theoretical_grid_is_multiples_of_period() {
        let p = PhysicalParams::reference();
        let c = critical_durations(&p, 2, 3.5, 3.6, 0.05, 1).unwrap();
        assert_eq!(c.theoretical.len(), 1);
        assert!((c.theoretical[0] - 3.546).abs() < 1e-3);
    }

    #[test]
    fn dissipation_never_helps() {
        let p = PhysicalParams::reference();
        let closed = run_transfer_with(&p, 3, 8.2, false, TransferOptions::final_only()).unwrap();
        let open =
            run_transfer_with(&p, 3, 8.2, true, TransferOptions { steps: Some(2000), ..TransferOptions::final_only() })
                .unwrap();
        assert!(open.fidelity <= closed.fidelity);
    }
}
