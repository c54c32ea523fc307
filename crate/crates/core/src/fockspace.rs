//! Truncated Hilbert space of two bosonic modes plus a two-level superatom.
//!
//! States are labelled `|n_opt, n_mw, G/R⟩`. The total excitation of a state
//! is `k = n_opt + n_mw + m` with `m = 1` for the collective Rydberg level
//! `R`. Inside a fixed excitation sector the states form a one-dimensional
//! Fock-state lattice (FSL) with `2k + 1` sites:
//!
//! ```text
//! site 2j+1  <->  |j,   k-j, G⟩     j = 0..=k
//! site 2j    <->  |j-1, k-j, R⟩     j = 1..=k
//! ```
//!
//! Bases are ordered sector-major (ascending `k`) and by site inside each
//! sector, so sector `k` occupies the contiguous ordinals `k²..(k+1)²` of an
//! [`SectorMode::AllSectorsUpTo`] basis.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::{Cell, Table};
use crate::sparse::SparseOperator;

/// Superatom level: collective ground `G` or singly excited Rydberg `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AtomLevel {
    G,
    R,
}

impl AtomLevel {
    /// Excitation carried by the atom (0 for `G`, 1 for `R`).
    pub fn excitation(self) -> usize {
        match self {
            AtomLevel::G => 0,
            AtomLevel::R => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AtomLevel::G => "G",
            AtomLevel::R => "R",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub n_opt: usize,
    pub n_mw: usize,
    pub atom: AtomLevel,
}

impl BasisState {
    pub const fn new(n_opt: usize, n_mw: usize, atom: AtomLevel) -> Self {
        Self { n_opt, n_mw, atom }
    }

    pub fn excitation(&self) -> usize {
        self.n_opt + self.n_mw + self.atom.excitation()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}⟩", self.n_opt, self.n_mw, self.atom.label())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectorMode {
    /// Only the `N`-excitation sector (`2N + 1` states). Enough for unitary
    /// runs, since the JC Hamiltonian conserves excitation.
    FixedSector,
    /// Every sector `k = 0..=N` (`(N + 1)²` states). Required whenever
    /// excitation-lowering collapse operators act.
    AllSectorsUpTo,
}

/// The optical (`â`) or microwave (`b̂`) cavity mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Optical,
    Microwave,
}

/// FSL site (1-based) of `state` inside the `n`-excitation sector.
pub fn site_index(state: BasisState, n: usize) -> Result<usize> {
    if state.excitation() != n {
        return Err(Error::NotAnFslSite { n_opt: state.n_opt, n_mw: state.n_mw, atom: state.atom.label(), sector: n });
    }
    Ok(match state.atom {
        AtomLevel::G => 2 * state.n_opt + 1,
        AtomLevel::R => 2 * (state.n_opt + 1),
    })
}

/// Inverse of [`site_index`].
pub fn state_of_site(site: usize, n: usize) -> Result<BasisState> {
    if site == 0 || site > 2 * n + 1 {
        return Err(Error::domain(format!("site {site} outside [1, {}] for the {n}-excitation sector", 2 * n + 1)));
    }
    Ok(if site % 2 == 1 {
        let j = (site - 1) / 2;
        BasisState::new(j, n - j, AtomLevel::G)
    } else {
        let j = site / 2;
        BasisState::new(j - 1, n - j, AtomLevel::R)
    })
}

/// Ordered enumeration of the retained basis states with a reverse index.
#[derive(Clone, Debug)]
pub struct CompositeBasis {
    n: usize,
    mode: SectorMode,
    states: Vec<BasisState>,
    index: HashMap<BasisState, usize>,
}

impl PartialEq for CompositeBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.mode == other.mode
    }
}

impl CompositeBasis {
    pub fn new(n: usize, mode: SectorMode) -> Self {
        let sectors = match mode {
            SectorMode::FixedSector => n..n + 1,
            SectorMode::AllSectorsUpTo => 0..n + 1,
        };
        let states: Vec<BasisState> =
            sectors.flat_map(|k| (1..=2 * k + 1).map(move |s| state_of_site(s, k).expect("site in range"))).collect();
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Self { n, mode, states, index }
    }

    pub fn fixed_sector(n: usize) -> Arc<Self> {
        Arc::new(Self::new(n, SectorMode::FixedSector))
    }

    pub fn all_sectors(n: usize) -> Arc<Self> {
        Arc::new(Self::new(n, SectorMode::AllSectorsUpTo))
    }

    /// Highest retained excitation number.
    pub fn excitations(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> SectorMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    pub fn state(&self, ordinal: usize) -> BasisState {
        self.states[ordinal]
    }

    pub fn index_of(&self, state: &BasisState) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Lowest retained sector.
    pub fn min_sector(&self) -> usize {
        match self.mode {
            SectorMode::FixedSector => self.n,
            SectorMode::AllSectorsUpTo => 0,
        }
    }

    /// Ordinals of sector `k`; empty when the sector is not retained.
    pub fn sector_range(&self, k: usize) -> Range<usize> {
        match self.mode {
            SectorMode::FixedSector if k == self.n => 0..self.states.len(),
            SectorMode::FixedSector => 0..0,
            SectorMode::AllSectorsUpTo if k <= self.n => k * k..(k + 1) * (k + 1),
            SectorMode::AllSectorsUpTo => 0..0,
        }
    }

    /// Ordinals of the top (`N`-excitation) sector, in FSL-site order.
    pub fn top_sector(&self) -> Range<usize> {
        self.sector_range(self.n)
    }

    /// Ordinal of the given site of the top sector.
    pub fn ordinal_of_site(&self, site: usize) -> Result<usize> {
        let state = state_of_site(site, self.n)?;
        Ok(self.index_of(&state).expect("top sector is always retained"))
    }

    /// Basis dump with columns `ordinal, n_opt, n_mw, atom, sector, site`.
    pub fn table(&self) -> Table {
        let mut t = Table::new(["ordinal", "n_opt", "n_mw", "atom", "sector", "site"]);
        for (i, s) in self.states.iter().enumerate() {
            let k = s.excitation();
            t.push(vec![
                Cell::Int(i as i64),
                Cell::Int(s.n_opt as i64),
                Cell::Int(s.n_mw as i64),
                Cell::Text(s.atom.label().into()),
                Cell::Int(k as i64),
                Cell::Int(site_index(*s, k).expect("state in its own sector") as i64),
            ]);
        }
        t
    }
}

/// Dense complex matrix tied to the basis it acts on.
///
/// Hamiltonians carry angular frequencies in rad/µs; ladder operators are
/// dimensionless.
#[derive(Clone, Debug)]
pub struct OperatorMatrix<B = CompositeBasis> {
    basis: Arc<B>,
    entries: DMatrix<Complex64>,
    sector_leaking: bool,
}

impl<B> OperatorMatrix<B> {
    pub fn new(basis: Arc<B>, entries: DMatrix<Complex64>) -> Self {
        assert!(entries.is_square(), "operator matrix must be square");
        Self { basis, entries, sector_leaking: false }
    }

    pub fn basis(&self) -> &Arc<B> {
        &self.basis
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Set when the operator maps retained states outside a fixed sector;
    /// such operators are rejected by the master-equation propagator.
    pub fn is_sector_leaking(&self) -> bool {
        self.sector_leaking
    }

    pub(crate) fn with_leaking(mut self, leaking: bool) -> Self {
        self.sector_leaking = leaking;
        self
    }

    pub fn adjoint(&self) -> Self {
        Self { basis: Arc::clone(&self.basis), entries: self.entries.adjoint(), sector_leaking: self.sector_leaking }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            entries: &self.entries * &rhs.entries,
            sector_leaking: self.sector_leaking || rhs.sector_leaking,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            entries: &self.entries * Complex64::new(factor, 0.0),
            sector_leaking: self.sector_leaking,
        }
    }

    /// `max |H - H†|` over all entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.entries[(r, c)] - self.entries[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() < tol
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.entries * v
    }

    /// `⟨ψ|O|ψ⟩`
    pub fn expectation(&self, psi: &DVector<Complex64>) -> Complex64 {
        psi.dotc(&(&self.entries * psi))
    }

    pub fn to_sparse(&self) -> SparseOperator {
        SparseOperator::from_dense(&self.entries)
    }
}

fn operator_from_map(
    basis: &Arc<CompositeBasis>,
    f: impl Fn(BasisState) -> Option<(BasisState, f64)>,
) -> (DMatrix<Complex64>, bool) {
    let d = basis.len();
    let mut m = DMatrix::zeros(d, d);
    let mut leaked = false;
    for (col, &s) in basis.states().iter().enumerate() {
        if let Some((target, amp)) = f(s) {
            match basis.index_of(&target) {
                Some(row) => m[(row, col)] += Complex64::new(amp, 0.0),
                None => leaked = true,
            }
        }
    }
    (m, leaked)
}

/// Bosonic annihilation operator `â` (optical) or `b̂` (microwave).
///
/// On a [`SectorMode::FixedSector`] basis every image leaves the sector, so
/// the result is the zero matrix flagged as sector-leaking.
pub fn annihilation(mode: Mode, basis: &Arc<CompositeBasis>) -> OperatorMatrix {
    let (m, _) = operator_from_map(basis, |s| {
        let n = match mode {
            Mode::Optical => s.n_opt,
            Mode::Microwave => s.n_mw,
        };
        if n == 0 {
            return None;
        }
        let target = match mode {
            Mode::Optical => BasisState::new(s.n_opt - 1, s.n_mw, s.atom),
            Mode::Microwave => BasisState::new(s.n_opt, s.n_mw - 1, s.atom),
        };
        Some((target, (n as f64).sqrt()))
    });
    OperatorMatrix::new(Arc::clone(basis), m).with_leaking(basis.mode() == SectorMode::FixedSector)
}

/// Bosonic creation operator; images beyond the truncation are dropped.
pub fn creation(mode: Mode, basis: &Arc<CompositeBasis>) -> OperatorMatrix {
    let (m, leaked) = operator_from_map(basis, |s| {
        let target = match mode {
            Mode::Optical => BasisState::new(s.n_opt + 1, s.n_mw, s.atom),
            Mode::Microwave => BasisState::new(s.n_opt, s.n_mw + 1, s.atom),
        };
        let n = match mode {
            Mode::Optical => target.n_opt,
            Mode::Microwave => target.n_mw,
        };
        Some((target, (n as f64).sqrt()))
    });
    OperatorMatrix::new(Arc::clone(basis), m).with_leaking(leaked)
}

/// Superatom lowering `|G⟩⟨R| ⊗ 1`.
pub fn atom_lowering(basis: &Arc<CompositeBasis>) -> OperatorMatrix {
    let (m, _) = operator_from_map(basis, |s| match s.atom {
        AtomLevel::R => Some((BasisState::new(s.n_opt, s.n_mw, AtomLevel::G), 1.0)),
        AtomLevel::G => None,
    });
    OperatorMatrix::new(Arc::clone(basis), m).with_leaking(basis.mode() == SectorMode::FixedSector)
}

/// Superatom raising `|R⟩⟨G| ⊗ 1`; the excitation is moved out of the
/// retained space when no matching state exists.
pub fn atom_raising(basis: &Arc<CompositeBasis>) -> OperatorMatrix {
    let (m, leaked) = operator_from_map(basis, |s| match s.atom {
        AtomLevel::G => Some((BasisState::new(s.n_opt, s.n_mw, AtomLevel::R), 1.0)),
        AtomLevel::R => None,
    });
    OperatorMatrix::new(Arc::clone(basis), m).with_leaking(leaked)
}

fn diagonal(basis: &Arc<CompositeBasis>, f: impl Fn(&BasisState) -> f64) -> OperatorMatrix {
    let diag = DVector::from_iterator(basis.len(), basis.states().iter().map(|s| Complex64::new(f(s), 0.0)));
    OperatorMatrix::new(Arc::clone(basis), DMatrix::from_diagonal(&diag))
}

/// Photon-number operator `â†â` or `b̂†b̂`, built exactly as a diagonal.
pub fn number(mode: Mode, basis: &Arc<CompositeBasis>) -> OperatorMatrix {
    diagonal(basis, |s| match mode {
        Mode::Optical => s.n_opt as f64,
        Mode::Microwave => s.n_mw as f64,
    })
}

/// Projector `|R⟩⟨R|` onto the excited superatom.
pub fn atom_excitation(basis: &Arc<CompositeBasis>) -> OperatorMatrix {
    diagonal(basis, |s| s.atom.excitation() as f64)
}

/// Total excitation `â†â + b̂†b̂ + |R⟩⟨R|`.
pub fn total_excitation(basis: &Arc<CompositeBasis>) -> OperatorMatrix {
    diagonal(basis, |s| s.excitation() as f64)
}
