//! Collective enhancement of a blockaded ensemble and the two-atom blockade
//! model used to check it.

use std::sync::Arc;

use num_complex::Complex64;

use super::drive::{DriveTerm, HilbertBasis, TimeDependentHamiltonian};
use super::params::mhz_to_rad_per_us;
use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// `√Na · g_single`, in whatever frequency unit `g_single` carries.
pub fn collective_coupling(na: u64, g_single: f64) -> Result<f64> {
    if na == 0 {
        return Err(Error::domain("Na must be at least 1"));
    }
    Ok((na as f64).sqrt() * g_single)
}

/// Collective blockade radius `R_b = (Δ C6 / (√Na g_m Ω1))^{1/6}` in µm.
///
/// `c6_mhz_um6` is in MHz·µm⁶ and the frequencies are ordinary MHz; the 2π
/// factors cancel between numerator and denominator.
pub fn blockade_radius(c6_mhz_um6: f64, delta_mhz: f64, na: u64, g_m_mhz: f64, omega1_mhz: f64) -> Result<f64> {
    for (name, v) in [("C6", c6_mhz_um6), ("Delta", delta_mhz), ("g_m", g_m_mhz), ("Omega1", omega1_mhz)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    let denominator = collective_coupling(na, mhz_to_rad_per_us(g_m_mhz))? * mhz_to_rad_per_us(omega1_mhz);
    if denominator == 0.0 {
        return Err(Error::domain("blockade radius denominator vanishes"));
    }
    let numerator = mhz_to_rad_per_us(delta_mhz) * mhz_to_rad_per_us(c6_mhz_um6);
    Ok((numerator / denominator).powf(1.0 / 6.0))
}

/// Product basis of `atoms` two-level atoms `{g, r2}`; state `s` has atom
/// `i` excited iff bit `i` of `s` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnsembleBasis {
    atoms: usize,
}

impl EnsembleBasis {
    pub const MAX_ATOMS: usize = 2;

    pub fn new(atoms: usize) -> Result<Arc<Self>> {
        if atoms == 0 || atoms > Self::MAX_ATOMS {
            return Err(Error::domain(format!("ensemble model supports 1 or 2 atoms, got {atoms}")));
        }
        Ok(Arc::new(Self { atoms }))
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn excitations(&self, state: usize) -> u32 {
        state.count_ones()
    }

    /// Index of the all-ground state.
    pub fn ground(&self) -> usize {
        0
    }
}

impl HilbertBasis for EnsembleBasis {
    fn dim(&self) -> usize {
        1 << self.atoms
    }
}

/// `H = drive Σ_i (|r2⟩⟨g|_i + H.c.) + V Σ_{i<k} n_i n_k`, static.
pub fn ensemble_hamiltonian(
    basis: &Arc<EnsembleBasis>,
    drive: f64,
    interaction: f64,
) -> TimeDependentHamiltonian<EnsembleBasis> {
    let d = basis.dim();
    let mut flips = Vec::new();
    let mut shifts = Vec::new();
    for s in 0..d {
        for i in 0..basis.atoms() {
            if s & (1 << i) == 0 {
                let up = s | (1 << i);
                flips.push((up, s, Complex64::new(1.0, 0.0)));
                flips.push((s, up, Complex64::new(1.0, 0.0)));
            }
        }
        let n = basis.excitations(s) as f64;
        let pairs = n * (n - 1.0) / 2.0;
        if pairs > 0.0 {
            shifts.push((s, s, Complex64::new(pairs, 0.0)));
        }
    }
    TimeDependentHamiltonian::new(
        Arc::clone(basis),
        vec![
            DriveTerm::real(move |_| drive, SparseOperator::new(d, flips)),
            DriveTerm::real(move |_| interaction, SparseOperator::new(d, shifts)),
        ],
    )
}
