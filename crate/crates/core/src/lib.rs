//! Fock-state-lattice simulation of topological microwave-to-optical photon
//! conversion with a Rydberg superatom.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod fockspace;
pub mod model;
pub mod output;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};
pub use fockspace::{AtomLevel, BasisState, CompositeBasis, Mode, OperatorMatrix, SectorMode};
pub use model::{ChainModel, PhysicalParams, PulseSchedule};
pub use output::{Cell, Table};
