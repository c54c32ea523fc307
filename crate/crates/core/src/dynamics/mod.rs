//! Time propagation of pure states and density matrices, and the observables
//! recorded along the way.

mod lindblad;
mod rk4;

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{
    annihilation, atom_lowering, site_index, AtomLevel, BasisState, CompositeBasis, Mode, OperatorMatrix,
};
use crate::model::{PhysicalParams, TimeDependentHamiltonian};
use crate::output::{Cell, Table};
use crate::spectral::{instantaneous_spectrum, SpectrumSnapshot};

pub use rk4::{integrate_schrodinger, steps_for_norm_tolerance, DRIFT_LIMIT};

pub const DEFAULT_STEPS: usize = 20_000;
pub const DEFAULT_SAMPLES: usize = 500;

/// A state vector over a basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    basis: Arc<CompositeBasis>,
    amplitudes: DVector<Complex64>,
}

impl PureState {
    pub fn new(basis: Arc<CompositeBasis>, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::DimensionMismatch { expected: basis.len(), found: amplitudes.len() });
        }
        Ok(Self { basis, amplitudes })
    }

    /// The basis vector `|state⟩`.
    pub fn basis_state(basis: &Arc<CompositeBasis>, state: BasisState) -> Result<Self> {
        let i = basis.index_of(&state).ok_or_else(|| Error::domain(format!("{state} is not in the basis")))?;
        let mut amplitudes = DVector::zeros(basis.len());
        amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(Self { basis: Arc::clone(basis), amplitudes })
    }

    /// All photons in the microwave resonator: `|0, N, G⟩`.
    pub fn microwave_fock(basis: &Arc<CompositeBasis>) -> Self {
        Self::basis_state(basis, BasisState::new(0, basis.excitations(), AtomLevel::G)).expect("always retained")
    }

    pub fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }
}

/// A density matrix over a basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: Arc<CompositeBasis>,
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Checks shape and Hermiticity (to 1e-10); trace and positivity are
    /// left to the caller.
    pub fn new(basis: Arc<CompositeBasis>, entries: DMatrix<Complex64>) -> Result<Self> {
        let d = basis.len();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: entries.nrows() });
        }
        let rho = Self { basis, entries };
        let deviation = rho.hermiticity_deviation();
        if deviation > 1e-10 {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let a = psi.amplitudes();
        Self { basis: Arc::clone(psi.basis()), entries: a * a.adjoint() }
    }

    pub fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let h = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        h.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Anything observables can be read from.
pub trait QuantumState {
    fn basis(&self) -> &Arc<CompositeBasis>;
    /// Populations of the basis states.
    fn diagonal(&self) -> Vec<f64>;
    /// `⟨φ|ρ|φ⟩` with `φ` supported on the ordinals `range`.
    fn population_of(&self, range: Range<usize>, phi: &DVector<Complex64>) -> f64;
}

impl QuantumState for PureState {
    fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    fn diagonal(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    fn population_of(&self, range: Range<usize>, phi: &DVector<Complex64>) -> f64 {
        let part = self.amplitudes.rows(range.start, range.len());
        phi.dotc(&part).norm_sqr()
    }
}

impl QuantumState for DensityMatrix {
    fn basis(&self) -> &Arc<CompositeBasis> {
        &self.basis
    }

    fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|z| z.re).collect()
    }

    fn population_of(&self, range: Range<usize>, phi: &DVector<Complex64>) -> f64 {
        let block = self.entries.view((range.start, range.start), (range.len(), range.len()));
        phi.dotc(&(block * phi)).re
    }
}

/// Diagonal observables of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct Observables {
    pub n_optical: f64,
    pub n_microwave: f64,
    pub atom_excitation: f64,
    /// Top-sector populations in site order (index 0 is site 1).
    pub site_populations: Vec<f64>,
    /// Population outside the top sector.
    pub leaked_weight: f64,
}

fn observables_from_diagonal(basis: &CompositeBasis, diag: &[f64]) -> Observables {
    let n = basis.excitations();
    let mut obs = Observables {
        n_optical: 0.0,
        n_microwave: 0.0,
        atom_excitation: 0.0,
        site_populations: vec![0.0; 2 * n + 1],
        leaked_weight: 0.0,
    };
    for (s, &p) in basis.states().iter().zip(diag) {
        obs.n_optical += s.n_opt as f64 * p;
        obs.n_microwave += s.n_mw as f64 * p;
        obs.atom_excitation += s.atom.excitation() as f64 * p;
        match site_index(*s, n) {
            Ok(site) => obs.site_populations[site - 1] = p,
            Err(_) => obs.leaked_weight += p,
        }
    }
    obs
}

/// `⟨â†â⟩`, `⟨b̂†b̂⟩`, `⟨|R⟩⟨R|⟩`, the FSL site profile and leaked weight.
pub fn observables<S: QuantumState>(state: &S) -> Observables {
    observables_from_diagonal(state.basis(), &state.diagonal())
}

/// `|⟨φ_k|ψ⟩|²` (or `⟨φ_k|ρ|φ_k⟩`) for every level of `snapshot`, which
/// may span the whole basis or just its top sector.
pub fn eigen_populations<S: QuantumState>(state: &S, snapshot: &SpectrumSnapshot) -> Result<Vec<f64>> {
    let basis = state.basis();
    let range = if snapshot.dim() == basis.len() {
        0..basis.len()
    } else if snapshot.dim() == basis.top_sector().len() {
        basis.top_sector()
    } else {
        return Err(Error::DimensionMismatch { expected: basis.len(), found: snapshot.dim() });
    };
    Ok((0..snapshot.dim()).map(|k| state.population_of(range.clone(), &snapshot.eigenvector(k))).collect())
}

/// A collapse operator `c = √rate · op`.
#[derive(Clone, Debug)]
pub struct CollapseOperator {
    pub label: &'static str,
    /// Decay rate in rad/µs.
    pub rate: f64,
    pub operator: OperatorMatrix,
}

impl CollapseOperator {
    pub fn new(label: &'static str, rate: f64, operator: OperatorMatrix) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::domain(format!("rate of {label} must be non-negative, got {rate}")));
        }
        Ok(Self { label, rate, operator })
    }
}

/// Superatom decay `√Γ0 |G⟩⟨R|` and cavity losses `√κo â`, `√κm b̂`.
pub fn collapse_operators(params: &PhysicalParams, basis: &Arc<CompositeBasis>) -> Vec<CollapseOperator> {
    vec![
        CollapseOperator { label: "Gamma0", rate: params.gamma0, operator: atom_lowering(basis) },
        CollapseOperator { label: "kappa_o", rate: params.kappa_o, operator: annihilation(Mode::Optical, basis) },
        CollapseOperator { label: "kappa_m", rate: params.kappa_m, operator: annihilation(Mode::Microwave, basis) },
    ]
}

/// Step count, recording cadence and what to record.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Propagation {
    /// µs
    pub duration: f64,
    pub steps: usize,
    /// Number of recorded intervals; `samples + 1` rows when it divides `steps`.
    pub samples: usize,
    /// Number of full-state snapshots kept (besides the final state).
    pub snapshots: usize,
    /// Record `P0`, `P±1` against the continuity-tracked top-sector eigenbasis.
    pub track_eigenbasis: bool,
}

impl Propagation {
    pub fn new(duration: f64) -> Self {
        Self { duration, steps: DEFAULT_STEPS, samples: DEFAULT_SAMPLES, snapshots: 0, track_eigenbasis: true }
    }

    pub fn with_steps(self, steps: usize) -> Self {
        Self { steps, ..self }
    }

    pub fn with_samples(self, samples: usize) -> Self {
        Self { samples, ..self }
    }

    pub fn with_snapshots(self, snapshots: usize) -> Self {
        Self { snapshots, ..self }
    }

    pub fn tracking(self, track_eigenbasis: bool) -> Self {
        Self { track_eigenbasis, ..self }
    }

    pub fn step(&self) -> f64 {
        self.duration / self.steps as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::domain(format!("duration must be positive, got {} µs", self.duration)));
        }
        if self.steps == 0 {
            return Err(Error::domain("step count must be positive"));
        }
        Ok(())
    }

    fn stride(&self) -> usize {
        self.steps.div_ceil(self.samples.max(1)).max(1)
    }

    fn snapshot_stride(&self) -> Option<usize> {
        (self.snapshots > 0).then(|| self.steps.div_ceil(self.snapshots).max(1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StateRecord {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateRecord {
    pub fn observables(&self) -> Observables {
        match self {
            StateRecord::Pure(s) => observables(s),
            StateRecord::Mixed(s) => observables(s),
        }
    }
}

/// Observables sampled on a time grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub excitations: usize,
    pub times: Vec<f64>,
    pub n_optical: Vec<f64>,
    pub n_microwave: Vec<f64>,
    pub atom_excitation: Vec<f64>,
    pub site_populations: Vec<Vec<f64>>,
    pub leaked_weight: Vec<f64>,
    /// Populations of every top-sector eigenstate, ascending in energy;
    /// empty rows when the eigenbasis is not tracked.
    pub eigen_populations: Vec<Vec<f64>>,
    pub snapshots: Vec<(f64, StateRecord)>,
    pub final_state: StateRecord,
    /// `|‖ψ(T)‖ - ‖ψ(0)‖|` or `|tr ρ(T) - tr ρ(0)|`.
    pub drift: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn level(&self, i: usize, offset: isize) -> f64 {
        let row = &self.eigen_populations[i];
        let idx = self.excitations as isize + offset;
        if row.is_empty() {
            f64::NAN
        } else if idx < 0 || idx as usize >= row.len() {
            0.0
        } else {
            row[idx as usize]
        }
    }

    /// Zero-mode population at sample `i`.
    pub fn p0(&self, i: usize) -> f64 {
        self.level(i, 0)
    }

    pub fn p_plus1(&self, i: usize) -> f64 {
        self.level(i, 1)
    }

    pub fn p_minus1(&self, i: usize) -> f64 {
        self.level(i, -1)
    }

    pub fn final_n_optical(&self) -> f64 {
        *self.n_optical.last().expect("trajectory has samples")
    }

    /// Population of the last FSL site at the final time.
    pub fn fidelity(&self) -> f64 {
        *self.site_populations.last().and_then(|p| p.last()).expect("trajectory has samples")
    }

    /// `t_us, n_optical, n_microwave, atom_excitation, P0, Pp1, Pm1,
    /// site_1 … site_{2N+1}, leaked_weight`
    pub fn to_table(&self) -> Table {
        let sites = 2 * self.excitations + 1;
        let mut header: Vec<String> =
            ["t_us", "n_optical", "n_microwave", "atom_excitation", "P0", "Pp1", "Pm1"].map(String::from).to_vec();
        header.extend((1..=sites).map(|s| format!("site_{s}")));
        header.push("leaked_weight".into());
        let mut table = Table::new(header);
        for i in 0..self.len() {
            let mut row = vec![
                Cell::Float(self.times[i]),
                Cell::Float(self.n_optical[i]),
                Cell::Float(self.n_microwave[i]),
                Cell::Float(self.atom_excitation[i]),
                Cell::Float(self.p0(i)),
                Cell::Float(self.p_plus1(i)),
                Cell::Float(self.p_minus1(i)),
            ];
            row.extend(self.site_populations[i].iter().map(|&p| Cell::Float(p)));
            row.push(Cell::Float(self.leaked_weight[i]));
            table.push(row);
        }
        table
    }
}

/// Top-sector restriction of `H(t)`, in site order.
fn top_sector_matrix(h: &TimeDependentHamiltonian, t: f64) -> OperatorMatrix {
    let basis = h.basis();
    let top = basis.top_sector();
    let d = top.len();
    let mut m = DMatrix::zeros(d, d);
    for term in h.terms() {
        let c = (term.coefficient)(t);
        for &(r, col, v) in term.operator.entries() {
            if top.contains(&r) && top.contains(&col) {
                m[(r - top.start, col - top.start)] += c * v;
            }
        }
    }
    OperatorMatrix::new(CompositeBasis::fixed_sector(basis.excitations()), m)
}

struct Recorder<'a> {
    h: &'a TimeDependentHamiltonian,
    options: Propagation,
    stride: usize,
    snapshot_stride: Option<usize>,
    previous: Option<SpectrumSnapshot>,
    traj: Trajectory,
}

impl<'a> Recorder<'a> {
    fn new(h: &'a TimeDependentHamiltonian, options: Propagation, initial: StateRecord) -> Self {
        Self {
            h,
            options,
            stride: options.stride(),
            snapshot_stride: options.snapshot_stride(),
            previous: None,
            traj: Trajectory {
                excitations: h.basis().excitations(),
                times: Vec::new(),
                n_optical: Vec::new(),
                n_microwave: Vec::new(),
                atom_excitation: Vec::new(),
                site_populations: Vec::new(),
                leaked_weight: Vec::new(),
                eigen_populations: Vec::new(),
                snapshots: Vec::new(),
                final_state: initial,
                drift: 0.0,
            },
        }
    }

    fn wants(&self, i: usize) -> bool {
        i % self.stride == 0 || i == self.options.steps
    }

    fn wants_snapshot(&self, i: usize) -> bool {
        self.snapshot_stride.is_some_and(|s| i % s == 0 && i != 0)
    }

    fn record<S: QuantumState>(&mut self, t: f64, state: &S) -> Result<()> {
        let obs = observables(state);
        self.traj.times.push(t);
        self.traj.n_optical.push(obs.n_optical);
        self.traj.n_microwave.push(obs.n_microwave);
        self.traj.atom_excitation.push(obs.atom_excitation);
        self.traj.site_populations.push(obs.site_populations);
        self.traj.leaked_weight.push(obs.leaked_weight);
        if self.options.track_eigenbasis {
            let h_top = top_sector_matrix(self.h, t);
            let snap = instantaneous_spectrum(&h_top, t, self.previous.as_ref())?;
            self.traj.eigen_populations.push(eigen_populations(state, &snap)?);
            self.previous = Some(snap);
        } else {
            self.traj.eigen_populations.push(Vec::new());
        }
        Ok(())
    }
}

/// RK4 integration of `i dψ/dt = H(t) ψ` from `psi0` over `[0, T]`.
pub fn propagate_schrodinger(
    h: &TimeDependentHamiltonian,
    psi0: &PureState,
    options: Propagation,
) -> Result<Trajectory> {
    options.validate()?;
    if psi0.basis().as_ref() != h.basis().as_ref() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: psi0.basis().len() });
    }
    let basis = Arc::clone(h.basis());
    let mut rec = Recorder::new(h, options, StateRecord::Pure(psi0.clone()));
    let amps: Vec<Complex64> = psi0.amplitudes().iter().copied().collect();
    let final_amps = integrate_schrodinger(h, &amps, options.duration, options.steps, |i, t, psi| {
        let (want, snap) = (rec.wants(i), rec.wants_snapshot(i));
        if want || snap {
            let state = PureState { basis: Arc::clone(&basis), amplitudes: DVector::from_column_slice(psi) };
            if want {
                rec.record(t, &state)?;
            }
            if snap {
                rec.traj.snapshots.push((t, StateRecord::Pure(state)));
            }
        }
        Ok(())
    })?;
    let final_state = PureState { basis, amplitudes: DVector::from_vec(final_amps) };
    rec.traj.drift = (final_state.norm() - psi0.norm()).abs();
    rec.traj.final_state = StateRecord::Pure(final_state);
    Ok(rec.traj)
}

/// Packed block state viewed through the kernel that owns its layout.
struct BlockView<'k, 'h> {
    kernel: &'k lindblad::LindbladKernel<'h>,
    basis: &'k Arc<CompositeBasis>,
    packed: &'k [Complex64],
}

impl QuantumState for BlockView<'_, '_> {
    fn basis(&self) -> &Arc<CompositeBasis> {
        self.basis
    }

    fn diagonal(&self) -> Vec<f64> {
        self.kernel.diagonal(self.packed)
    }

    fn population_of(&self, range: Range<usize>, phi: &DVector<Complex64>) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, i) in range.clone().enumerate() {
            for (b, j) in range.clone().enumerate() {
                acc += phi[a].conj() * self.kernel.element(self.packed, i, j) * phi[b];
            }
        }
        acc.re
    }
}

fn to_density(
    kernel: &lindblad::LindbladKernel<'_>,
    basis: &Arc<CompositeBasis>,
    packed: &[Complex64],
) -> DensityMatrix {
    let d = basis.len();
    let dense = kernel.unpack(packed);
    DensityMatrix { basis: Arc::clone(basis), entries: DMatrix::from_row_slice(d, d, &dense) }
}

/// RK4 integration of the Lindblad equation
/// `dρ/dt = -i[H, ρ] + Σ_c (c ρ c† - {c†c, ρ}/2)`.
pub fn propagate_lindblad(
    h: &TimeDependentHamiltonian,
    rho0: &DensityMatrix,
    collapse: &[CollapseOperator],
    options: Propagation,
) -> Result<Trajectory> {
    options.validate()?;
    if rho0.basis().as_ref() != h.basis().as_ref() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho0.basis().len() });
    }
    for c in collapse {
        if c.operator.is_sector_leaking() && c.rate > 0.0 {
            return Err(Error::SectorLeaking(c.label.to_string()));
        }
    }
    let basis = Arc::clone(h.basis());
    let d = basis.len();
    let ops: Vec<_> = collapse
        .iter()
        .filter(|c| c.rate > 0.0)
        .map(|c| c.operator.to_sparse().scaled(Complex64::new(c.rate.sqrt(), 0.0)))
        .collect();
    let dense0: Vec<Complex64> = (0..d * d).map(|i| rho0.entries()[(i / d, i % d)]).collect();
    let mut kernel = lindblad::LindbladKernel::new(h, &ops, &dense0);
    let packed0 = kernel.pack(&dense0);

    let mut rec = Recorder::new(h, options, StateRecord::Mixed(rho0.clone()));
    let final_packed = kernel.integrate(packed0, options.duration, options.steps, |k, i, t, rho| {
        if rec.wants(i) {
            rec.record(t, &BlockView { kernel: k, basis: &basis, packed: rho })?;
        }
        if rec.wants_snapshot(i) {
            rec.traj.snapshots.push((t, StateRecord::Mixed(to_density(k, &basis, rho))));
        }
        Ok(())
    })?;
    let final_rho = to_density(&kernel, &basis, &final_packed);
    rec.traj.drift = (final_rho.trace() - rho0.trace()).abs();
    rec.traj.final_state = StateRecord::Mixed(final_rho);
    Ok(rec.traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{jc_drive, CouplingScales, PulseSchedule};
    use crate::spectral::zero_mode_analytic;
    use std::f64::consts::TAU;

    const G: f64 = TAU * 0.282;

    fn reference_drive(duration: f64, basis: &Arc<CompositeBasis>) -> TimeDependentHamiltonian {
        jc_drive(PulseSchedule::sin_cos(G, duration).unwrap(), CouplingScales::default(), basis)
    }

    #[test]
    fn observables_of_fock_states() {
        let b = CompositeBasis::fixed_sector(5);
        let o = observables(&PureState::microwave_fock(&b));
        assert_eq!((o.n_optical, o.n_microwave, o.atom_excitation), (0.0, 5.0, 0.0));
        assert_eq!(o.site_populations[0], 1.0);
        let o = observables(&PureState::basis_state(&b, BasisState::new(5, 0, AtomLevel::G)).unwrap());
        assert_eq!((o.n_optical, o.n_microwave), (5.0, 0.0));
        assert_eq!(o.site_populations[10], 1.0);
    }

    #[test]
    fn zero_mode_at_symmetric_point_has_half_the_photons_optical() {
        let b = CompositeBasis::fixed_sector(5);
        let z = zero_mode_analytic(5, 1.0, 1.0).unwrap();
        let amps = DVector::from_iterator(11, z.amplitudes.iter().map(|&a| Complex64::new(a, 0.0)));
        let o = observables(&PureState::new(b, amps).unwrap());
        assert!((o.n_optical - 2.5).abs() < 1e-14);
        assert!(o.atom_excitation.abs() < 1e-30);
    }

    #[test]
    fn zero_hamiltonian_keeps_observables_constant() {
        let b = CompositeBasis::fixed_sector(3);
        let h = TimeDependentHamiltonian::zero(Arc::clone(&b));
        let traj =
            propagate_schrodinger(&h, &PureState::microwave_fock(&b), Propagation::new(1.0).with_steps(100)).unwrap();
        assert!(traj.n_microwave.iter().all(|&n| n == 3.0));
        assert_eq!(traj.len(), 101);
    }

    #[test]
    fn initial_state_is_the_zero_mode() {
        let b = CompositeBasis::fixed_sector(5);
        let h = reference_drive(8.2, &b);
        let traj = propagate_schrodinger(
            &h,
            &PureState::microwave_fock(&b),
            Propagation::new(8.2).with_steps(2000).with_samples(100),
        )
        .unwrap();
        assert!((traj.p0(0) - 1.0).abs() < 1e-12);
        for row in &traj.eigen_populations {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn eigen_populations_rejects_wrong_dimension() {
        let b = CompositeBasis::all_sectors(2);
        let (_, h) = crate::model::fsl_chain_hamiltonian(1, 1.0, 1.0);
        let snap = instantaneous_spectrum(&h, 0.0, None).unwrap();
        let err = eigen_populations(&PureState::microwave_fock(&b), &snap).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn leaking_collapse_operator_is_rejected() {
        let b = CompositeBasis::fixed_sector(2);
        let h = reference_drive(1.0, &b);
        let rho = DensityMatrix::from_pure(&PureState::microwave_fock(&b));
        let mut p = PhysicalParams::reference();
        p.kappa_m = 0.1;
        let err = propagate_lindblad(&h, &rho, &collapse_operators(&p, &b), Propagation::new(1.0)).unwrap_err();
        assert!(matches!(err, Error::SectorLeaking(_)));
    }

    #[test]
    fn closed_lindblad_matches_schrodinger() {
        let n = 3;
        let full = CompositeBasis::all_sectors(n);
        let fixed = CompositeBasis::fixed_sector(n);
        let opts = Propagation::new(8.2).with_steps(4000).with_samples(40);
        let unitary =
            propagate_schrodinger(&reference_drive(8.2, &fixed), &PureState::microwave_fock(&fixed), opts).unwrap();
        let rho = DensityMatrix::from_pure(&PureState::microwave_fock(&full));
        let closed = collapse_operators(&PhysicalParams::reference().closed(), &full);
        let mixed = propagate_lindblad(&reference_drive(8.2, &full), &rho, &closed, opts).unwrap();
        for i in 0..unitary.len() {
            assert!((unitary.n_optical[i] - mixed.n_optical[i]).abs() < 1e-8);
            assert!((unitary.p0(i) - mixed.p0(i)).abs() < 1e-8);
            for (a, b) in unitary.site_populations[i].iter().zip(&mixed.site_populations[i]) {
                assert!((a - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn damped_cavity_decays_exponentially() {
        let b = CompositeBasis::all_sectors(1);
        let h = TimeDependentHamiltonian::zero(Arc::clone(&b));
        let rho = DensityMatrix::from_pure(&PureState::basis_state(&b, BasisState::new(0, 1, AtomLevel::G)).unwrap());
        let kappa = TAU * 0.002;
        let ops = vec![CollapseOperator::new("kappa_m", kappa, annihilation(Mode::Microwave, &b)).unwrap()];
        let traj = propagate_lindblad(&h, &rho, &ops, Propagation::new(8.2).with_steps(1000).with_samples(50)).unwrap();
        for (t, n) in traj.times.iter().zip(&traj.n_microwave) {
            assert!((n - (-kappa * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn trajectory_table_header() {
        let b = CompositeBasis::fixed_sector(1);
        let h = reference_drive(1.0, &b);
        let traj = propagate_schrodinger(
            &h,
            &PureState::microwave_fock(&b),
            Propagation::new(1.0).with_steps(100).with_samples(2),
        )
        .unwrap();
        let csv = traj.to_table().to_csv();
        assert!(csv.starts_with("t_us,n_optical,n_microwave,atom_excitation,P0,Pp1,Pm1,site_1,site_2,site_3,leaked_weight\n0,0,1,0,1,0,0,1,0,0,0\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
