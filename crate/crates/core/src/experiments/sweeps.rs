use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{default_steps, run_transfer_with, TransferOptions};
use crate::dynamics::steps_for_norm_tolerance;
use crate::error::{Error, Result};
use crate::model::{CouplingScales, PhysicalParams};
use crate::output::{Cell, Table};

/// Step count of each Monte Carlo sample, `T/2000`.
pub const DISORDER_STEPS: usize = 2000;

/// The η grid of the robustness study.
pub const DEFAULT_ETA_GRID: [f64; 4] = [0.001, 0.01, 0.05, 0.1];

/// Map `f` over `items` on `workers` threads (0 = all cores). Output order
/// follows input order regardless of scheduling.
pub(crate) fn parallel_map<T, R, F>(workers: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

/// Relative coupling errors of one Monte Carlo sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisorderSample {
    pub eps1: f64,
    pub eps2: f64,
}

impl DisorderSample {
    /// Sample `index` of the stream rooted at `master_seed`: ChaCha8 keyed by
    /// the seed, stream number `index`, two uniforms mapped onto `[-η, η]`.
    pub fn draw(master_seed: u64, index: u64, eta1: f64, eta2: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(index);
        let (u1, u2): (f64, f64) = (rng.random(), rng.random());
        Self { eps1: eta1 * (2.0 * u1 - 1.0), eps2: eta2 * (2.0 * u2 - 1.0) }
    }

    pub fn mirrored(self) -> Self {
        Self { eps1: -self.eps1, eps2: -self.eps2 }
    }

    pub fn scales(self) -> CouplingScales {
        CouplingScales::from_errors(self.eps1, self.eps2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DisorderOptions {
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub steps: usize,
    /// Also run every sample with `(ε1, ε2) → (-ε1, -ε2)`.
    pub mirrored: bool,
}

impl Default for DisorderOptions {
    fn default() -> Self {
        Self { samples: 1001, seed: 42, workers: 0, steps: DISORDER_STEPS, mirrored: false }
    }
}

/// Monte Carlo estimate at one `(η1, η2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderPoint {
    pub eta1: f64,
    pub eta2: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    /// Final optical photon number of each sample, in sample order.
    pub values: Vec<f64>,
    /// Mean over the mirrored samples, when requested.
    pub mirrored_mean: Option<f64>,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Mean final optical photon number of dissipative transfers with random
/// envelope errors `ε_i ~ U[-η_i, η_i]`.
pub fn disorder_monte_carlo(
    params: &PhysicalParams,
    n: usize,
    eta1: f64,
    eta2: f64,
    options: DisorderOptions,
) -> Result<DisorderPoint> {
    if options.samples < 1 {
        return Err(Error::InvalidGrid("Monte Carlo needs at least one sample".into()));
    }
    for eta in [eta1, eta2] {
        if !(0.0..=0.5).contains(&eta) {
            return Err(Error::InvalidGrid(format!("η must lie in [0, 0.5], got {eta}")));
        }
    }
    let mut samples: Vec<DisorderSample> =
        (0..options.samples as u64).map(|i| DisorderSample::draw(options.seed, i, eta1, eta2)).collect();
    if options.mirrored {
        let mirror: Vec<_> = samples.iter().map(|s| s.mirrored()).collect();
        samples.extend(mirror);
    }
    let transfer = |s: &DisorderSample| {
        let opts = TransferOptions { scales: s.scales(), steps: Some(options.steps), ..TransferOptions::final_only() };
        run_transfer_with(params, n, params.duration, true, opts).map(|r| r.final_n_optical)
    };
    let all = if eta1 == 0.0 && eta2 == 0.0 {
        // every sample is the unperturbed run
        vec![transfer(&samples[0])?; samples.len()]
    } else {
        parallel_map(options.workers, &samples, transfer)?
    };
    let (values, mirrored) = all.split_at(options.samples);
    let (mean, stderr) = mean_and_stderr(values);
    Ok(DisorderPoint {
        eta1,
        eta2,
        mean,
        stderr,
        samples: options.samples,
        seed: options.seed,
        values: values.to_vec(),
        mirrored_mean: options.mirrored.then(|| mean_and_stderr(mirrored).0),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepAxes {
    /// One row per `(η1, η2)`.
    Disorder { eta: Vec<(f64, f64)> },
    /// Rows follow `n`, columns follow `t_us`.
    Heatmap { n: Vec<usize>, t_us: Vec<f64> },
}

/// Aggregate result of a sweep, reproducible from its inputs and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub axes: SweepAxes,
    pub values: Vec<Vec<f64>>,
    /// Standard errors aligned with `values`; empty for deterministic sweeps.
    pub stderr: Vec<Vec<f64>>,
    pub sample_count: usize,
    pub master_seed: u64,
}

impl SweepResult {
    /// Disorder: `eta1, eta2, mean_n_optical, stderr, samples, seed`.
    /// Heatmap: `N, T_us, fidelity` in N-major order.
    pub fn to_table(&self) -> Table {
        match &self.axes {
            SweepAxes::Disorder { eta } => {
                let mut t = Table::new(["eta1", "eta2", "mean_n_optical", "stderr", "samples", "seed"]);
                for (i, &(e1, e2)) in eta.iter().enumerate() {
                    t.push(vec![
                        Cell::Float(e1),
                        Cell::Float(e2),
                        Cell::Float(self.values[i][0]),
                        Cell::Float(self.stderr[i][0]),
                        Cell::from(self.sample_count),
                        Cell::from(self.master_seed),
                    ]);
                }
                t
            }
            SweepAxes::Heatmap { n, t_us } => {
                let mut t = Table::new(["N", "T_us", "fidelity"]);
                for (i, &nn) in n.iter().enumerate() {
                    for (j, &tt) in t_us.iter().enumerate() {
                        t.push(vec![Cell::from(nn), Cell::Float(tt), Cell::Float(self.values[i][j])]);
                    }
                }
                t
            }
        }
    }

    /// Largest value in each row.
    pub fn row_maxima(&self) -> Vec<f64> {
        self.values.iter().map(|r| r.iter().cloned().fold(f64::NEG_INFINITY, f64::max)).collect()
    }
}

/// [`disorder_monte_carlo`] at each `(η1, η2)`; every grid point reuses the
/// same uniforms, so differences between points are not sampling noise.
pub fn disorder_sweep(
    params: &PhysicalParams,
    n: usize,
    etas: &[(f64, f64)],
    options: DisorderOptions,
) -> Result<SweepResult> {
    if etas.is_empty() {
        return Err(Error::InvalidGrid("η grid is empty".into()));
    }
    let points =
        etas.iter().map(|&(e1, e2)| disorder_monte_carlo(params, n, e1, e2, options)).collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axes: SweepAxes::Disorder { eta: etas.to_vec() },
        values: points.iter().map(|p| vec![p.mean]).collect(),
        stderr: points.iter().map(|p| vec![p.stderr]).collect(),
        sample_count: options.samples,
        master_seed: options.seed,
    })
}

/// `N ∈ {2, 4, …, 32}` and `T ∈ {1, 2, …, 150}` µs.
pub fn default_heatmap_grid() -> (Vec<usize>, Vec<f64>) {
    ((2..=32).step_by(2).collect(), (1..=150).map(f64::from).collect())
}

/// Fidelity (last-site population at `T`) for every `(N, T)`.
pub fn fidelity_heatmap(
    params: &PhysicalParams,
    ns: &[usize],
    ts: &[f64],
    dissipative: bool,
    workers: usize,
) -> Result<SweepResult> {
    if ns.is_empty() || ts.is_empty() {
        return Err(Error::InvalidGrid("heatmap grids must be non-empty".into()));
    }
    if let Some(t) = ts.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::InvalidGrid(format!("durations must be positive, got {t}")));
    }
    let cells: Vec<(usize, f64)> = ns.iter().flat_map(|&n| ts.iter().map(move |&t| (n, t))).collect();
    let fidelities = parallel_map(workers, &cells, |&(n, t)| {
        let steps = if dissipative {
            DISORDER_STEPS.max(steps_for_norm_tolerance(t, 2.0 * params.g * (n.max(1) as f64).sqrt(), 1e-8))
        } else {
            default_steps(params.g, n, t)
        };
        let opts = TransferOptions { steps: Some(steps), ..TransferOptions::final_only() };
        run_transfer_with(params, n, t, dissipative, opts).map(|r| r.fidelity)
    })?;
    Ok(SweepResult {
        axes: SweepAxes::Heatmap { n: ns.to_vec(), t_us: ts.to_vec() },
        values: fidelities.chunks(ts.len()).map(<[f64]>::to_vec).collect(),
        stderr: Vec::new(),
        sample_count: 1,
        master_seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible_and_bounded() {
        for i in 0..100 {
            let a = DisorderSample::draw(7, i, 0.1, 0.2);
            assert_eq!(a, DisorderSample::draw(7, i, 0.1, 0.2));
            assert!(a.eps1.abs() <= 0.1 && a.eps2.abs() <= 0.2);
        }
        assert_ne!(DisorderSample::draw(7, 0, 0.1, 0.1), DisorderSample::draw(7, 1, 0.1, 0.1));
        assert_ne!(DisorderSample::draw(7, 0, 0.1, 0.1), DisorderSample::draw(8, 0, 0.1, 0.1));
        // common random numbers: same uniforms, scaled by η
        let a = DisorderSample::draw(3, 5, 0.01, 0.01);
        let b = DisorderSample::draw(3, 5, 0.1, 0.1);
        assert!((b.eps1 - 10.0 * a.eps1).abs() < 1e-15);
    }

    #[test]
    fn monte_carlo_is_deterministic_across_worker_counts() {
        let p = PhysicalParams::reference();
        let opts = DisorderOptions { samples: 6, seed: 11, workers: 1, steps: 400, mirrored: false };
        let a = disorder_monte_carlo(&p, 2, 0.1, 0.1, opts).unwrap();
        let b = disorder_monte_carlo(&p, 2, 0.1, 0.1, DisorderOptions { workers: 3, ..opts }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values.len(), 6);
    }

    #[test]
    fn monte_carlo_validates_inputs() {
        let p = PhysicalParams::reference();
        let opts = DisorderOptions { samples: 0, ..DisorderOptions::default() };
        assert!(disorder_monte_carlo(&p, 2, 0.1, 0.1, opts).is_err());
        assert!(disorder_monte_carlo(&p, 2, 0.6, 0.1, DisorderOptions::default()).is_err());
    }

    #[test]
    fn zero_width_distribution_gives_unperturbed_value() {
        let p = PhysicalParams::reference();
        let opts = DisorderOptions { samples: 3, steps: 400, ..DisorderOptions::default() };
        let point = disorder_monte_carlo(&p, 2, 0.0, 0.0, opts).unwrap();
        let direct = run_transfer_with(
            &p,
            2,
            p.duration,
            true,
            TransferOptions { steps: Some(400), ..TransferOptions::final_only() },
        )
        .unwrap();
        assert_eq!(point.mean, direct.final_n_optical);
        assert_eq!(point.stderr, 0.0);
    }

    #[test]
    fn heatmap_layout_is_n_major() {
        let p = PhysicalParams::reference();
        let r = fidelity_heatmap(&p, &[2, 3], &[0.01, 1.0, 2.0], false, 1).unwrap();
        let csv = r.to_table().to_csv();
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], "N,T_us,fidelity");
        assert!(rows[1].starts_with("2,0.01,"));
        assert!(rows[4].starts_with("3,0.01,"));
        assert!(r.values[0][0] < 1e-6);
        assert!(fidelity_heatmap(&p, &[], &[1.0], false, 1).is_err());
        assert!(fidelity_heatmap(&p, &[2], &[0.0], false, 1).is_err());
    }

    #[test]
    fn disorder_table_layout() {
        let r = SweepResult {
            axes: SweepAxes::Disorder { eta: vec![(0.1, 0.1)] },
            values: vec![vec![4.33]],
            stderr: vec![vec![0.002]],
            sample_count: 1001,
            master_seed: 42,
        };
        assert_eq!(r.to_table().to_csv(), "eta1,eta2,mean_n_optical,stderr,samples,seed\n0.1,0.1,4.33,0.002,1001,42\n");
    }
}
