use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::dynamics::integrate_schrodinger;
use crate::error::{Error, Result};
use crate::model::{
    effective_single_atom_drive, ensemble_hamiltonian, full_single_atom_drive, mhz_to_rad_per_us, AtomicLevel,
    AtomicState, EnsembleBasis, FourLevelBasis, HilbertBasis, PhysicalParams, TimeDependentHamiltonian,
};

/// Largest phase advance per RK4 step allowed on the fastest frequency.
const PHASE_PER_STEP: f64 = 0.02;

/// Full four-level model against its adiabatically eliminated form.
#[derive(Clone, Debug, PartialEq)]
pub struct EliminationReport {
    /// `max_t max_s |p_full(s, t) - p_eff(s, t)|` over the `g` and `r2` states.
    pub max_deviation: f64,
    /// `(Δ/Ω1m, δ/Ω2m)`
    pub detuning_ratios: (f64, f64),
    /// Set when either ratio is below 10.
    pub warning: bool,
    pub steps: usize,
}

fn record_populations<B: HilbertBasis>(
    h: &TimeDependentHamiltonian<B>,
    psi0: &[Complex64],
    duration: f64,
    steps: usize,
    every: usize,
    shared: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    integrate_schrodinger(h, psi0, duration, steps, |i, _, psi| {
        if i % every == 0 || i == steps {
            rows.push(shared.iter().map(|&k| psi[k].norm_sqr()).collect());
        }
        Ok(())
    })?;
    Ok(rows)
}

/// Propagate both single-atom models from `|g; 0_opt, 1_mw⟩` over one pump
/// period with `n_max` photons per mode and compare populations.
pub fn validate_adiabatic_elimination(params: &PhysicalParams, n_max: usize) -> Result<EliminationReport> {
    params.validate()?;
    let basis = FourLevelBasis::new(n_max)?;
    let full = full_single_atom_drive(params, &basis);
    let effective = effective_single_atom_drive(params, &basis)?;

    let ratio = |det: f64, omega: f64| if omega > 0.0 { det / omega } else { f64::INFINITY };
    let detuning_ratios = (ratio(params.detuning_r1, params.omega1_max), ratio(params.detuning_e, params.omega2_max));

    let fastest = [params.detuning_r1, params.detuning_e, params.omega1_max, params.omega2_max]
        .into_iter()
        .fold(0.0f64, f64::max);
    let steps = 20_000usize.max((fastest * params.duration / PHASE_PER_STEP).ceil() as usize);

    let d = basis.dim();
    let mut psi0 = vec![Complex64::new(0.0, 0.0); d];
    let start = basis.index_of(AtomicState { level: AtomicLevel::Ground, n_opt: 0, n_mw: 1 }).expect("n_max ≥ 1");
    psi0[start] = Complex64::new(1.0, 0.0);
    let shared: Vec<usize> = basis
        .states()
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s.level, AtomicLevel::Ground | AtomicLevel::Rydberg2))
        .map(|(i, _)| i)
        .collect();

    let every = (steps / 4000).max(1);
    let a = record_populations(&full, &psi0, params.duration, steps, every, &shared)?;
    let b = record_populations(&effective, &psi0, params.duration, steps, every, &shared)?;
    let max_deviation =
        a.iter().zip(&b).flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs())).fold(0.0f64, f64::max);
    Ok(EliminationReport {
        max_deviation,
        detuning_ratios,
        warning: detuning_ratios.0 < 10.0 || detuning_ratios.1 < 10.0,
        steps,
    })
}

/// Two blockaded atoms against one atom under the same drive.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockadeReport {
    /// Pair Rabi frequency over single-atom Rabi frequency; `None` when
    /// there is no drive.
    pub enhancement_ratio: Option<f64>,
    /// Peak population of `|r2 r2⟩`.
    pub double_excitation_max: f64,
    /// Peak single-atom excitation, for comparison with the pair.
    pub single_excitation_max: f64,
}

/// First time the ground-state population bottoms out inside `(0, window]`,
/// refined by a parabola through the three samples around the minimum.
fn ground_minimum(times: &[f64], ground: &[f64]) -> f64 {
    let (i, _) = ground.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty series");
    if i == 0 || i + 1 >= ground.len() {
        return times[i];
    }
    let (y0, y1, y2) = (ground[i - 1], ground[i], ground[i + 1]);
    let h = times[i + 1] - times[i];
    let denom = y0 - 2.0 * y1 + y2;
    if denom.abs() < f64::MIN_POSITIVE {
        return times[i];
    }
    times[i] + 0.5 * h * (y0 - y2) / denom
}

/// Drive one and two `{g, r2}` atoms with coupling `drive` and pair shift
/// `interaction` (both ordinary MHz), and compare their Rabi frequencies.
pub fn validate_blockade(drive_mhz: f64, interaction_mhz: f64) -> Result<BlockadeReport> {
    if !(drive_mhz.is_finite() && drive_mhz >= 0.0) {
        return Err(Error::domain(format!("drive must be non-negative, got {drive_mhz}")));
    }
    if !(interaction_mhz.is_finite() && interaction_mhz >= 0.0) {
        return Err(Error::domain(format!("interaction must be non-negative, got {interaction_mhz}")));
    }
    let drive = mhz_to_rad_per_us(drive_mhz);
    let shift = mhz_to_rad_per_us(interaction_mhz);
    if drive == 0.0 {
        return Ok(BlockadeReport { enhancement_ratio: None, double_excitation_max: 0.0, single_excitation_max: 0.0 });
    }
    // the single atom empties its ground state at π/(2·drive); look a bit beyond
    let window = 1.5 * FRAC_PI_2 / drive;
    let steps = 20_000usize.max((drive.max(shift) * window / PHASE_PER_STEP).ceil() as usize);

    let run = |atoms: usize| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let basis = EnsembleBasis::new(atoms)?;
        let h = ensemble_hamiltonian(&basis, drive, shift);
        let mut psi0 = vec![Complex64::new(0.0, 0.0); basis.dim()];
        psi0[basis.ground()] = Complex64::new(1.0, 0.0);
        let top = basis.dim() - 1;
        let (mut times, mut ground, mut top_pop) = (Vec::new(), Vec::new(), Vec::new());
        integrate_schrodinger(&h, &psi0, window, steps, |_, t, psi| {
            times.push(t);
            ground.push(psi[0].norm_sqr());
            top_pop.push(psi[top].norm_sqr());
            Ok(())
        })?;
        Ok((times, ground, top_pop))
    };
    let (t1, g1, e1) = run(1)?;
    let (t2, g2, e2) = run(2)?;
    let ratio = ground_minimum(&t1, &g1) / ground_minimum(&t2, &g2);
    Ok(BlockadeReport {
        enhancement_ratio: Some(ratio),
        double_excitation_max: e2.iter().cloned().fold(0.0, f64::max),
        single_excitation_max: e1.iter().cloned().fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_refines_minimum() {
        let times: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = times.iter().map(|t| (t - 0.43).powi(2)).collect();
        assert!((ground_minimum(&times, &ys) - 0.43).abs() < 1e-12);
    }

    #[test]
    fn undriven_blockade_has_no_dynamics() {
        let r = validate_blockade(0.0, 10.0).unwrap();
        assert_eq!(r.enhancement_ratio, None);
        assert_eq!(r.double_excitation_max, 0.0);
        assert!(validate_blockade(1.0, -1.0).is_err());
    }

    #[test]
    fn independent_atoms_share_the_single_rate() {
        let r = validate_blockade(0.5, 0.0).unwrap();
        assert!((r.enhancement_ratio.unwrap() - 1.0).abs() < 1e-3);
        // product state: p_rr = p_r², peaking at 1 with the single atom
        assert!((r.double_excitation_max - r.single_excitation_max.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn undriven_atom_models_agree() {
        let mut p = PhysicalParams::reference();
        p.omega1_max = 0.0;
        p.omega2_max = 0.0;
        let r = validate_adiabatic_elimination(&p, 1).unwrap();
        assert_eq!(r.max_deviation, 0.0);
    }
}
