//! Workloads shared by the criterion benches.

use fslt_core::experiments::{run_transfer_with, TransferOptions};
use fslt_core::{PhysicalParams, Result};

/// Final optical photon number of one reference pump cycle with a fixed
/// step count.
pub fn transfer(n: usize, duration: f64, dissipative: bool, steps: usize) -> Result<f64> {
    let opts = TransferOptions { steps: Some(steps), ..TransferOptions::final_only() };
    run_transfer_with(&PhysicalParams::reference(), n, duration, dissipative, opts).map(|r| r.final_n_optical)
}
