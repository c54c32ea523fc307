//! Hamiltonians, pulse schedules and physical parameters.

pub mod atomic;
pub mod collective;
pub mod drive;
pub mod hamiltonian;
pub mod params;
pub mod schedule;

pub use atomic::{
    effective_prefactors, effective_single_atom_drive, effective_single_atom_hamiltonian, full_single_atom_drive,
    full_single_atom_hamiltonian, AtomicLevel, AtomicState, FourLevelBasis,
};
pub use collective::{blockade_radius, collective_coupling, ensemble_hamiltonian, EnsembleBasis};
pub use drive::{Coefficient, DriveTerm, HilbertBasis, TimeDependentHamiltonian};
pub use hamiltonian::{
    chain_drive, fsl_chain_hamiltonian, jc_drive, superatom_jc_hamiltonian, ChainModel, CouplingScales,
};
pub use params::{mhz_to_rad_per_us, rad_per_us_to_mhz, ParamsFile, PhysicalParams};
pub use schedule::{PulseFamily, PulseSchedule};
