//! Dual-mode Jaynes–Cummings Hamiltonian of the superatom and its
//! Fock-state-lattice chain form.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::drive::{DriveTerm, TimeDependentHamiltonian};
use super::schedule::PulseSchedule;
use crate::fockspace::{AtomLevel, BasisState, CompositeBasis, OperatorMatrix};
use crate::sparse::SparseOperator;

/// `H = Gm |R⟩⟨G| b̂ + Go |R⟩⟨G| â + H.c.` on any [`CompositeBasis`].
///
/// Conserves total excitation, so it is block diagonal in the sectors.
pub fn superatom_jc_hamiltonian(gm: f64, go: f64, basis: &Arc<CompositeBasis>) -> OperatorMatrix {
    let d = basis.len();
    let mut h = DMatrix::zeros(d, d);
    for (col, s) in basis.states().iter().enumerate() {
        if s.atom != AtomLevel::G {
            continue;
        }
        // microwave absorption |n1, n2, G⟩ -> |n1, n2-1, R⟩
        if s.n_mw > 0 {
            let target = BasisState::new(s.n_opt, s.n_mw - 1, AtomLevel::R);
            if let Some(row) = basis.index_of(&target) {
                let amp = Complex64::new(gm * (s.n_mw as f64).sqrt(), 0.0);
                h[(row, col)] += amp;
                h[(col, row)] += amp.conj();
            }
        }
        // optical absorption |n1, n2, G⟩ -> |n1-1, n2, R⟩
        if s.n_opt > 0 {
            let target = BasisState::new(s.n_opt - 1, s.n_mw, AtomLevel::R);
            if let Some(row) = basis.index_of(&target) {
                let amp = Complex64::new(go * (s.n_opt as f64).sqrt(), 0.0);
                h[(row, col)] += amp;
                h[(col, row)] += amp.conj();
            }
        }
    }
    OperatorMatrix::new(Arc::clone(basis), h)
}

/// Hopping rates of the extended SSH chain for one excitation sector.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainModel {
    pub n: usize,
    /// `u_j = Gm √(N - j + 1)`, coupling sites `2j-1 ↔ 2j`.
    pub u: Vec<f64>,
    /// `v_j = Go √j`, coupling sites `2j ↔ 2j+1`.
    pub v: Vec<f64>,
}

impl ChainModel {
    pub fn new(n: usize, gm: f64, go: f64) -> Self {
        let u = (1..=n).map(|j| gm * ((n - j + 1) as f64).sqrt()).collect();
        let v = (1..=n).map(|j| go * (j as f64).sqrt()).collect();
        Self { n, u, v }
    }

    pub fn sites(&self) -> usize {
        2 * self.n + 1
    }

    /// Bond strengths from left to right: `u_1, v_1, u_2, v_2, …`.
    pub fn hopping_sequence(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).flat_map(|(&u, &v)| [u, v]).collect()
    }

    /// Tridiagonal real-symmetric matrix in site order.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let d = self.sites();
        let mut h = DMatrix::zeros(d, d);
        for (bond, w) in self.hopping_sequence().into_iter().enumerate() {
            h[(bond, bond + 1)] = Complex64::new(w, 0.0);
            h[(bond + 1, bond)] = Complex64::new(w, 0.0);
        }
        h
    }
}

/// Chain Hamiltonian on the `2N + 1` FSL sites. The returned operator lives
/// on the fixed-sector basis, whose ordinal order is the site order.
pub fn fsl_chain_hamiltonian(n: usize, gm: f64, go: f64) -> (ChainModel, OperatorMatrix) {
    let chain = ChainModel::new(n, gm, go);
    let m = chain.matrix();
    (chain, OperatorMatrix::new(CompositeBasis::fixed_sector(n), m))
}

/// Independent relative errors on the two envelope peaks, as
/// `Gm → (1 + ε₁) Gm`, `Go → (1 + ε₂) Go`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingScales {
    pub microwave: f64,
    pub optical: f64,
}

impl Default for CouplingScales {
    fn default() -> Self {
        Self { microwave: 1.0, optical: 1.0 }
    }
}

impl CouplingScales {
    pub fn from_errors(eps_microwave: f64, eps_optical: f64) -> Self {
        Self { microwave: 1.0 + eps_microwave, optical: 1.0 + eps_optical }
    }
}

/// The JC Hamiltonian driven by a pulse schedule: `Gm(t) A_m + Go(t) A_o`.
pub fn jc_drive(
    schedule: PulseSchedule,
    scales: CouplingScales,
    basis: &Arc<CompositeBasis>,
) -> TimeDependentHamiltonian {
    let a_m = superatom_jc_hamiltonian(1.0, 0.0, basis).to_sparse();
    let a_o = superatom_jc_hamiltonian(0.0, 1.0, basis).to_sparse();
    scheduled(schedule, scales, Arc::clone(basis), a_m, a_o)
}

/// The chain Hamiltonian driven by a pulse schedule.
pub fn chain_drive(schedule: PulseSchedule, scales: CouplingScales, n: usize) -> TimeDependentHamiltonian {
    let (_, a_m) = fsl_chain_hamiltonian(n, 1.0, 0.0);
    let (_, a_o) = fsl_chain_hamiltonian(n, 0.0, 1.0);
    scheduled(schedule, scales, CompositeBasis::fixed_sector(n), a_m.to_sparse(), a_o.to_sparse())
}

fn scheduled(
    schedule: PulseSchedule,
    scales: CouplingScales,
    basis: Arc<CompositeBasis>,
    a_m: SparseOperator,
    a_o: SparseOperator,
) -> TimeDependentHamiltonian {
    let sm = scales.microwave;
    let so = scales.optical;
    TimeDependentHamiltonian::new(
        basis,
        vec![
            DriveTerm::real(move |t| sm * schedule.envelopes_clamped(t).0, a_m),
            DriveTerm::real(move |t| so * schedule.envelopes_clamped(t).1, a_o),
        ],
    )
}
