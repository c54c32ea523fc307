//! Eigenstructure of the JC/FSL models: flat bands, bright and dark modes,
//! the zero-energy defect state and the winding-number classification.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::OperatorMatrix;
use crate::model::{fsl_chain_hamiltonian, ChainModel, PulseSchedule};
use crate::output::{Cell, Table};

/// Eigen-decomposition of a Hamiltonian at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSnapshot {
    pub t: f64,
    /// Ascending, rad/µs.
    pub eigenvalues: Vec<f64>,
    /// Column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: DMatrix<Complex64>,
}

impl SpectrumSnapshot {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> DVector<Complex64> {
        self.eigenvectors.column(k).into_owned()
    }
}

/// Tolerance on `max |H - H†|` below which a matrix counts as Hermitian.
fn hermitian_tolerance(h: &DMatrix<Complex64>) -> f64 {
    let scale = h.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    1e-12 * scale
}

/// Diagonalize `h`. With `previous`, eigenvectors are rotated (phases, and
/// Procrustes inside degenerate clusters) to maximize overlap with it;
/// without, each vector's largest component is made real positive.
pub fn instantaneous_spectrum<B>(
    h: &OperatorMatrix<B>,
    t: f64,
    previous: Option<&SpectrumSnapshot>,
) -> Result<SpectrumSnapshot> {
    let m = h.entries();
    let deviation = h.hermiticity_deviation();
    if deviation > hermitian_tolerance(m) {
        return Err(Error::NotHermitian { deviation });
    }
    if let Some(p) = previous {
        if p.dim() != h.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), found: h.dim() });
        }
    }
    let d = h.dim();
    if d == 0 {
        return Ok(SpectrumSnapshot { t, eigenvalues: Vec::new(), eigenvectors: DMatrix::zeros(0, 0) });
    }
    // symmetrize so round-off in the input cannot leak into the eigensolver
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }

    match previous {
        None => {
            for k in 0..d {
                fix_phase_by_largest(&mut vectors, k);
            }
        }
        Some(prev) => align_to_previous(&eigenvalues, &mut vectors, prev),
    }
    Ok(SpectrumSnapshot { t, eigenvalues, eigenvectors: vectors })
}

fn fix_phase_by_largest(vectors: &mut DMatrix<Complex64>, k: usize) {
    let col = vectors.column(k);
    let max = col.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if max == 0.0 {
        return;
    }
    // first component within round-off of the maximum, so ties resolve stably
    let pivot = col.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).expect("non-empty column");
    let phase = col[pivot].conj() / col[pivot].norm();
    for z in vectors.column_mut(k).iter_mut() {
        *z *= phase;
    }
}

fn degenerate_clusters(eigenvalues: &[f64]) -> Vec<std::ops::Range<usize>> {
    let scale = eigenvalues.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let tol = 1e-9 * scale;
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..=eigenvalues.len() {
        if k == eigenvalues.len() || eigenvalues[k] - eigenvalues[k - 1] > tol {
            clusters.push(start..k);
            start = k;
        }
    }
    clusters
}

fn align_to_previous(eigenvalues: &[f64], vectors: &mut DMatrix<Complex64>, prev: &SpectrumSnapshot) {
    for cluster in degenerate_clusters(eigenvalues) {
        let width = cluster.len();
        let new_block = vectors.columns(cluster.start, width).into_owned();
        let old_block = prev.eigenvectors.columns(cluster.start, width);
        let overlap = old_block.adjoint() * &new_block;
        if overlap.norm() < 1e-12 {
            for k in cluster {
                fix_phase_by_largest(vectors, k);
            }
            continue;
        }
        // maximize Re tr(overlap · U) over unitary U
        let svd = overlap.svd(true, true);
        let (w, x_adj) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
        let rotation = x_adj.adjoint() * w.adjoint();
        let aligned = new_block * rotation;
        vectors.columns_mut(cluster.start, width).copy_from(&aligned);
    }
}

/// Chained snapshots of the N-excitation chain under a schedule, sampled at
/// `samples` equally spaced times on `[0, T]` (both ends included).
pub fn chain_spectrum_trajectory(n: usize, schedule: &PulseSchedule, samples: usize) -> Result<Vec<SpectrumSnapshot>> {
    if samples < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 time samples, got {samples}")));
    }
    let mut out: Vec<SpectrumSnapshot> = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = schedule.duration * i as f64 / (samples - 1) as f64;
        let (gm, go) = schedule.envelopes(t)?;
        let (_, h) = fsl_chain_hamiltonian(n, gm, go);
        let snap = instantaneous_spectrum(&h, t, out.last())?;
        out.push(snap);
    }
    Ok(out)
}

/// Analytic flat-band spectrum `{0, ±g√j : j = 1..N}`, ascending.
pub fn flat_band_levels(n: usize, g: f64) -> Vec<f64> {
    let mut levels: Vec<f64> = (1..=n).rev().map(|j| -g * (j as f64).sqrt()).collect();
    levels.push(0.0);
    levels.extend((1..=n).map(|j| g * (j as f64).sqrt()));
    levels
}

/// `t_us, k, eigenvalue_rad_per_us`, with `k` the ascending level index.
pub fn spectrum_table(snapshots: &[SpectrumSnapshot]) -> Table {
    let mut table = Table::new(["t_us", "k", "eigenvalue_rad_per_us"]);
    for s in snapshots {
        for (k, &e) in s.eigenvalues.iter().enumerate() {
            table.push(vec![Cell::Float(s.t), Cell::from(k), Cell::Float(e)]);
        }
    }
    table
}

/// Mode coefficients as `(microwave, optical)` pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BrightDark {
    pub bright: (f64, f64),
    pub dark: (f64, f64),
}

/// `B = (Gm b + Go a)/G`, `D = (Go b - Gm a)/G`.
pub fn bright_dark_coefficients(gm: f64, go: f64) -> Result<BrightDark> {
    let big_g = gm.hypot(go);
    if big_g == 0.0 || !big_g.is_finite() {
        return Err(Error::domain("bright/dark modes need a non-zero coupling"));
    }
    Ok(BrightDark { bright: (gm / big_g, go / big_g), dark: (go / big_g, -gm / big_g) })
}

/// The zero-energy eigenstate of the chain in site order.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroMode {
    /// Real amplitudes on sites `1..=2N+1` (index 0 is site 1).
    pub amplitudes: Vec<f64>,
    /// `2 j* + 1` from [`defect_center`].
    pub center_site: f64,
}

impl ZeroMode {
    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a * a).collect()
    }

    /// Most populated site, 1-based. The first one wins a tie.
    pub fn argmax_site(&self) -> usize {
        let pops = self.populations();
        let max = pops.iter().cloned().fold(0.0f64, f64::max);
        pops.iter().position(|&p| p >= max * (1.0 - 1e-12)).map_or(1, |i| i + 1)
    }

    pub fn table(&self) -> Table {
        let mut table = Table::new(["site", "amplitude", "population"]);
        for (i, &a) in self.amplitudes.iter().enumerate() {
            table.push(vec![Cell::from(i + 1), Cell::Float(a), Cell::Float(a * a)]);
        }
        table
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Closed-form zero mode: on site `2j+1`,
/// `√C(N,j) (Go/G)^{N-j} (-Gm/G)^j`, zero on even sites.
pub fn zero_mode_analytic(n: usize, gm: f64, go: f64) -> Result<ZeroMode> {
    let big_g = gm.hypot(go);
    if big_g == 0.0 || !big_g.is_finite() {
        return Err(Error::domain("zero mode needs a non-zero coupling"));
    }
    let (c, s) = (go / big_g, -gm / big_g);
    let mut amplitudes = vec![0.0; 2 * n + 1];
    for j in 0..=n {
        let magnitude = (0.5 * ln_binomial(n, j)).exp() * c.abs().powi((n - j) as i32) * s.abs().powi(j as i32);
        let negative = (c < 0.0 && (n - j) % 2 == 1) ^ (s < 0.0 && j % 2 == 1);
        amplitudes[2 * j] = if negative { -magnitude } else { magnitude };
    }
    Ok(ZeroMode { amplitudes, center_site: 2.0 * defect_center(n, gm, go) + 1.0 })
}

/// Centre `j*` of the zero mode: the mean of its binomial distribution,
/// `N Gm² / (Gm² + Go²)`. With `Go = 0` the mode sits at `j* = N`.
pub fn defect_center(n: usize, gm: f64, go: f64) -> f64 {
    if go == 0.0 {
        return n as f64;
    }
    let r2 = (gm / go).powi(2);
    n as f64 * r2 / (1.0 + r2)
}

/// Winding number of a chain, with the raw sign of `∏u² - ∏v²` kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseClass {
    /// 1 for the nontrivial phase (and the boundary), 0 for the trivial one.
    pub winding: u8,
    pub raw_sign: i8,
}

/// `W = 1 - sign(∏u² - ∏v²)` folded onto `{0, 1}`.
///
/// Products are compared in log space; differences within a few ulps per
/// factor count as the boundary.
pub fn phase_classify(chain: &ChainModel) -> PhaseClass {
    fn log_product(xs: &[f64]) -> Option<f64> {
        xs.iter().try_fold(0.0, |acc, &x| (x != 0.0).then(|| acc + 2.0 * x.abs().ln()))
    }
    let raw_sign = match (log_product(&chain.u), log_product(&chain.v)) {
        (None, None) => 0,
        (None, Some(_)) => -1,
        (Some(_), None) => 1,
        (Some(lu), Some(lv)) => {
            let tol = 8.0 * f64::EPSILON * (chain.n.max(1) as f64) * (1.0 + lu.abs().max(lv.abs()));
            let diff = lu - lv;
            if diff.abs() <= tol {
                0
            } else if diff > 0.0 {
                1
            } else {
                -1
            }
        }
    };
    PhaseClass { winding: if raw_sign == 1 { 0 } else { 1 }, raw_sign }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{AtomLevel, BasisState, CompositeBasis};
    use crate::model::superatom_jc_hamiltonian;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    const G: f64 = TAU * 0.282;

    #[test]
    fn flat_bands_of_n5_chain() {
        let schedule = PulseSchedule::sin_cos(G, 8.2).unwrap();
        let expected = flat_band_levels(5, G);
        for s in chain_spectrum_trajectory(5, &schedule, 200).unwrap() {
            for (e, x) in s.eigenvalues.iter().zip(&expected) {
                assert!((e - x).abs() < 1e-10 * G, "t={} {e} vs {x}", s.t);
            }
        }
    }

    #[test]
    fn single_excitation_limit() {
        let (_, h) = fsl_chain_hamiltonian(1, G, 0.0);
        let s = instantaneous_spectrum(&h, 0.0, None).unwrap();
        let expected = [-G, 0.0, G];
        for (e, x) in s.eigenvalues.iter().zip(expected) {
            assert!((e - x).abs() < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let b = CompositeBasis::fixed_sector(1);
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let h = OperatorMatrix::new(b, m);
        assert!(matches!(instantaneous_spectrum(&h, 0.0, None), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn phase_fixing_makes_largest_component_real_positive() {
        let (_, h) = fsl_chain_hamiltonian(4, 0.7, 1.3);
        let s = instantaneous_spectrum(&h, 0.0, None).unwrap();
        for k in 0..s.dim() {
            let v = s.eigenvector(k);
            let (idx, _) =
                v.iter()
                    .enumerate()
                    .fold((0, 0.0), |acc, (i, z)| if z.norm() > acc.1 + 1e-9 { (i, z.norm()) } else { acc });
            assert!(v[idx].re > 0.0 && v[idx].im.abs() < 1e-12);
        }
    }

    #[test]
    fn continuity_keeps_consecutive_overlaps_high() {
        let schedule = PulseSchedule::sin_cos(G, 8.2).unwrap();
        let snaps = chain_spectrum_trajectory(5, &schedule, 2001).unwrap();
        for pair in snaps.windows(2) {
            for k in 0..pair[0].dim() {
                let o = pair[0].eigenvector(k).dotc(&pair[1].eigenvector(k)).norm();
                assert!(o > 0.99, "k={k} t={} overlap {o}", pair[1].t);
            }
        }
    }

    #[test]
    fn degenerate_levels_are_aligned_by_procrustes() {
        // every sector contributes a zero eigenvalue, giving a degenerate cluster
        let b = CompositeBasis::all_sectors(2);
        let h0 = superatom_jc_hamiltonian(0.3, 1.0, &b);
        let h1 = superatom_jc_hamiltonian(0.31, 0.999, &b);
        let s0 = instantaneous_spectrum(&h0, 0.0, None).unwrap();
        let s1 = instantaneous_spectrum(&h1, 0.1, Some(&s0)).unwrap();
        for k in 0..s0.dim() {
            let o = s0.eigenvector(k).dotc(&s1.eigenvector(k));
            assert!(o.re > 0.99, "k={k} overlap {o}");
        }
    }

    #[test]
    fn bright_and_dark_modes() {
        let bd = bright_dark_coefficients(0.0, 2.0).unwrap();
        assert_eq!(bd.bright, (0.0, 1.0));
        assert_eq!(bd.dark, (1.0, 0.0));
        let bd = bright_dark_coefficients(1.0, 1.0).unwrap();
        assert!((bd.bright.0 - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((bd.bright.1 - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(bright_dark_coefficients(0.0, 0.0).is_err());
    }

    #[test]
    fn dark_state_decouples_from_the_atom() {
        let (gm, go) = (0.8, 1.9);
        let b = CompositeBasis::all_sectors(1);
        let h = superatom_jc_hamiltonian(gm, go, &b);
        let bd = bright_dark_coefficients(gm, go).unwrap();
        let mut dark = DVector::zeros(b.len());
        dark[b.index_of(&BasisState::new(0, 1, AtomLevel::G)).unwrap()] = Complex64::new(bd.dark.0, 0.0);
        dark[b.index_of(&BasisState::new(1, 0, AtomLevel::G)).unwrap()] = Complex64::new(bd.dark.1, 0.0);
        let r = b.index_of(&BasisState::new(0, 0, AtomLevel::R)).unwrap();
        assert!(h.apply(&dark)[r].norm() < 1e-15);
    }

    #[test]
    fn zero_mode_limits() {
        let z = zero_mode_analytic(5, 0.0, 1.0).unwrap();
        assert_eq!(z.amplitudes[0], 1.0);
        assert!(z.amplitudes[1..].iter().all(|&a| a == 0.0));
        assert_eq!(z.argmax_site(), 1);

        let z = zero_mode_analytic(2, 1.0, 1.0).unwrap();
        let p = z.populations();
        for (site, expected) in [(1, 0.25), (3, 0.5), (5, 0.25)] {
            assert!((p[site - 1] - expected).abs() < 1e-15);
        }
        assert!(zero_mode_analytic(3, 0.0, 0.0).is_err());
    }

    #[test]
    fn zero_mode_is_annihilated_by_chain() {
        for n in 1..=10 {
            let (_, h) = fsl_chain_hamiltonian(n, 0.6, 1.1);
            let z = zero_mode_analytic(n, 0.6, 1.1).unwrap();
            let v = DVector::from_iterator(z.amplitudes.len(), z.amplitudes.iter().map(|&a| Complex64::new(a, 0.0)));
            assert!(h.apply(&v).norm() < 1e-13);
        }
    }

    #[test]
    fn defect_center_values() {
        assert_eq!(defect_center(6, 1.0, 1.0), 3.0);
        assert_eq!(defect_center(5, 0.0, 1.0), 0.0);
        assert_eq!(defect_center(5, 1.0, 0.0), 5.0);
        // Gm/Go = 2 puts the centre at j* = 4, the argmax of the populations
        assert!((defect_center(5, 2.0, 1.0) - 4.0).abs() < 1e-15);
        assert_eq!(zero_mode_analytic(5, 2.0, 1.0).unwrap().argmax_site(), 9);
    }

    #[test]
    fn phase_classification() {
        let chain = ChainModel { n: 2, u: vec![2.0, 2.0], v: vec![1.0, 1.0] };
        assert_eq!(phase_classify(&chain), PhaseClass { winding: 0, raw_sign: 1 });
        for n in 1..=12 {
            let g = std::f64::consts::FRAC_1_SQRT_2;
            let c = phase_classify(&ChainModel::new(n, g, g));
            assert_eq!(c, PhaseClass { winding: 1, raw_sign: 0 });
        }
        let schedule = PulseSchedule::sin_cos(G, 8.2).unwrap();
        let (gm, go) = schedule.envelopes(4.1).unwrap();
        assert_eq!(phase_classify(&ChainModel::new(5, gm, go)).raw_sign, 0);
        let (gm, go) = schedule.envelopes(4.0).unwrap();
        assert_eq!(phase_classify(&ChainModel::new(5, gm, go)).winding, 1);
        let (gm, go) = schedule.envelopes(4.2).unwrap();
        assert_eq!(phase_classify(&ChainModel::new(5, gm, go)).winding, 0);
        assert_eq!(phase_classify(&ChainModel::new(3, 0.0, 0.0)).raw_sign, 0);
        assert_eq!(phase_classify(&ChainModel::new(3, 0.0, 1.0)).winding, 1);
    }

    #[test]
    fn csv_layouts() {
        let z = zero_mode_analytic(1, 0.0, 1.0).unwrap();
        assert_eq!(z.table().to_csv(), "site,amplitude,population\n1,1,1\n2,0,0\n3,0,0\n");
        let (_, h) = fsl_chain_hamiltonian(1, 1.0, 0.0);
        let s = instantaneous_spectrum(&h, 0.5, None).unwrap();
        assert!(spectrum_table(&[s]).to_csv().starts_with("t_us,k,eigenvalue_rad_per_us\n0.5,0,-1\n"));
    }

    proptest! {
        #[test]
        fn zero_mode_is_normalized_and_odd_only(n in 0usize..30, gm in 0.0f64..5.0, go in 0.01f64..5.0) {
            let z = zero_mode_analytic(n, gm, go).unwrap();
            let norm: f64 = z.populations().iter().sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            prop_assert!(z.amplitudes.iter().skip(1).step_by(2).all(|&a| a == 0.0));
            if gm > 0.0 {
                for j in 0..n {
                    let (a, b) = (z.amplitudes[2 * j], z.amplitudes[2 * j + 2]);
                    prop_assert!(a * b <= 0.0);
                }
            }
        }

        #[test]
        fn smallest_positive_level_is_g(n in 1usize..8, theta in 0.0f64..std::f64::consts::FRAC_PI_2) {
            let (gm, go) = (G * theta.sin(), G * theta.cos());
            let (_, h) = fsl_chain_hamiltonian(n, gm, go);
            let s = instantaneous_spectrum(&h, 0.0, None).unwrap();
            prop_assert!((s.eigenvalues[n + 1] - G).abs() < 1e-10 * G);
            prop_assert!(s.eigenvalues[n].abs() < 1e-10 * G);
        }
    }
}
