//! Single-atom four-level models: the full four-wave-mixing Hamiltonian in
//! the interaction picture and its adiabatically eliminated two-photon form.
//!
//! Only used to validate the elimination with a few photons per mode.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;

use super::drive::{DriveTerm, HilbertBasis, TimeDependentHamiltonian};
use super::params::PhysicalParams;
use crate::error::{Error, Result};
use crate::fockspace::OperatorMatrix;
use crate::sparse::SparseOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AtomicLevel {
    /// `|g⟩`
    Ground,
    /// `|r1⟩`, far detuned by Δ
    Rydberg1,
    /// `|r2⟩`, the Rydberg level that forms the superatom excitation
    Rydberg2,
    /// `|e⟩`, far detuned by δ
    Intermediate,
}

impl AtomicLevel {
    pub const ALL: [AtomicLevel; 4] =
        [AtomicLevel::Ground, AtomicLevel::Rydberg1, AtomicLevel::Rydberg2, AtomicLevel::Intermediate];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AtomicState {
    pub level: AtomicLevel,
    pub n_opt: usize,
    pub n_mw: usize,
}

/// `{g, r1, r2, e} ⊗ {0..=n_max} ⊗ {0..=n_max}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourLevelBasis {
    n_max: usize,
    states: Vec<AtomicState>,
}

impl FourLevelBasis {
    pub fn new(n_max: usize) -> Result<Arc<Self>> {
        if n_max == 0 {
            return Err(Error::domain("mode truncation must keep at least one photon"));
        }
        let mut states = Vec::new();
        for level in AtomicLevel::ALL {
            for n_opt in 0..=n_max {
                for n_mw in 0..=n_max {
                    states.push(AtomicState { level, n_opt, n_mw });
                }
            }
        }
        Ok(Arc::new(Self { n_max, states }))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn states(&self) -> &[AtomicState] {
        &self.states
    }

    pub fn index_of(&self, s: AtomicState) -> Option<usize> {
        if s.n_opt > self.n_max || s.n_mw > self.n_max {
            return None;
        }
        let level = AtomicLevel::ALL.iter().position(|&l| l == s.level)?;
        let per_mode = self.n_max + 1;
        Some((level * per_mode + s.n_opt) * per_mode + s.n_mw)
    }
}

impl HilbertBasis for FourLevelBasis {
    fn dim(&self) -> usize {
        self.states.len()
    }
}

#[derive(Clone, Copy)]
enum Photon {
    None,
    LowerOptical,
    LowerMicrowave,
}

/// `|to⟩⟨from| ⊗ (1 | â | b̂)`
fn transition(basis: &FourLevelBasis, to: AtomicLevel, from: AtomicLevel, photon: Photon) -> SparseOperator {
    let mut entries = Vec::new();
    for (col, s) in basis.states().iter().enumerate() {
        if s.level != from {
            continue;
        }
        let (n_opt, n_mw, amp) = match photon {
            Photon::None => (s.n_opt, s.n_mw, 1.0),
            Photon::LowerOptical if s.n_opt > 0 => (s.n_opt - 1, s.n_mw, (s.n_opt as f64).sqrt()),
            Photon::LowerMicrowave if s.n_mw > 0 => (s.n_opt, s.n_mw - 1, (s.n_mw as f64).sqrt()),
            _ => continue,
        };
        if let Some(row) = basis.index_of(AtomicState { level: to, n_opt, n_mw }) {
            entries.push((row, col, Complex64::new(amp, 0.0)));
        }
    }
    SparseOperator::new(basis.dim(), entries)
}

fn pump_phase(t: f64, duration: f64) -> (f64, f64) {
    (FRAC_PI_2 * t.clamp(0.0, duration) / duration).sin_cos()
}

/// Full four-level Hamiltonian
/// `Ω1/2 |g⟩⟨r1| e^{iΔt} + g_m |r2⟩⟨r1| b̂ e^{iΔt} + Ω2/2 |e⟩⟨r2| e^{iδt} + g_o |e⟩⟨g| â e^{iδt} + H.c.`
/// with `Ω1(t) = Ω1m sin(πt/2T)`, `Ω2(t) = Ω2m cos(πt/2T)`.
pub fn full_single_atom_drive(
    params: &PhysicalParams,
    basis: &Arc<FourLevelBasis>,
) -> TimeDependentHamiltonian<FourLevelBasis> {
    use AtomicLevel::*;
    let p = params.clone();
    let x1 = transition(basis, Ground, Rydberg1, Photon::None);
    let x2 = transition(basis, Rydberg2, Rydberg1, Photon::LowerMicrowave);
    let x3 = transition(basis, Intermediate, Rydberg2, Photon::None);
    let x4 = transition(basis, Intermediate, Ground, Photon::LowerOptical);

    let big = p.detuning_r1;
    let small = p.detuning_e;
    let dur = p.duration;
    let (o1, o2, gm, go) = (p.omega1_max, p.omega2_max, p.g_m, p.g_o);

    let c1 = move |t: f64| Complex64::from_polar(0.5 * o1 * pump_phase(t, dur).0, big * t);
    let c2 = move |t: f64| Complex64::from_polar(gm, big * t);
    let c3 = move |t: f64| Complex64::from_polar(0.5 * o2 * pump_phase(t, dur).1, small * t);
    let c4 = move |t: f64| Complex64::from_polar(go, small * t);

    let mut terms = Vec::with_capacity(8);
    for (op, coeff) in [
        (x1, Arc::new(c1) as Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
        (x2, Arc::new(c2)),
        (x3, Arc::new(c3)),
        (x4, Arc::new(c4)),
    ] {
        let adj = op.adjoint();
        let conj = Arc::clone(&coeff);
        terms.push(DriveTerm { coefficient: coeff, operator: op });
        terms.push(DriveTerm { coefficient: Arc::new(move |t| conj(t).conj()), operator: adj });
    }
    TimeDependentHamiltonian::new(Arc::clone(basis), terms)
}

/// Snapshot of [`full_single_atom_drive`] at time `t`.
pub fn full_single_atom_hamiltonian(
    params: &PhysicalParams,
    t: f64,
    basis: &Arc<FourLevelBasis>,
) -> OperatorMatrix<FourLevelBasis> {
    full_single_atom_drive(params, basis).matrix_at(t)
}

/// Adiabatically eliminated Hamiltonian
/// `(g_m Ω1/2Δ) |r2⟩⟨g| b̂ + (g_o Ω2/2δ) |r2⟩⟨g| â + H.c.`, Stark shifts omitted.
pub fn effective_single_atom_drive(
    params: &PhysicalParams,
    basis: &Arc<FourLevelBasis>,
) -> Result<TimeDependentHamiltonian<FourLevelBasis>> {
    use AtomicLevel::*;
    if params.detuning_r1 <= 0.0 || params.detuning_e <= 0.0 {
        return Err(Error::domain("adiabatic elimination needs strictly positive detunings"));
    }
    let (m_pref, o_pref) = effective_prefactors(params);
    let dur = params.duration;
    let ym = transition(basis, Rydberg2, Ground, Photon::LowerMicrowave);
    let yo = transition(basis, Rydberg2, Ground, Photon::LowerOptical);
    let hm = hermitian_part(&ym);
    let ho = hermitian_part(&yo);
    Ok(TimeDependentHamiltonian::new(
        Arc::clone(basis),
        vec![
            DriveTerm::real(move |t| m_pref * pump_phase(t, dur).0, hm),
            DriveTerm::real(move |t| o_pref * pump_phase(t, dur).1, ho),
        ],
    ))
}

/// Snapshot of [`effective_single_atom_drive`] at time `t`.
pub fn effective_single_atom_hamiltonian(
    params: &PhysicalParams,
    t: f64,
    basis: &Arc<FourLevelBasis>,
) -> Result<OperatorMatrix<FourLevelBasis>> {
    Ok(effective_single_atom_drive(params, basis)?.matrix_at(t))
}

/// Peak two-photon couplings `(g_m Ω1m / 2Δ, g_o Ω2m / 2δ)` in rad/µs.
pub fn effective_prefactors(params: &PhysicalParams) -> (f64, f64) {
    (
        params.g_m * params.omega1_max / (2.0 * params.detuning_r1),
        params.g_o * params.omega2_max / (2.0 * params.detuning_e),
    )
}

fn hermitian_part(op: &SparseOperator) -> SparseOperator {
    let mut entries = op.entries().to_vec();
    entries.extend(op.adjoint().entries().iter().copied());
    SparseOperator::new(op.dim(), entries)
}
