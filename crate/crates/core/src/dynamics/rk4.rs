//! Classical fourth-order Runge–Kutta for `i dψ/dt = H(t) ψ`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{HilbertBasis, TimeDependentHamiltonian};

/// Norm and trace drift above this are reported as a numerical error.
pub const DRIFT_LIMIT: f64 = 1e-6;

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// `out = -i H(t) psi`
fn derivative<B: HilbertBasis>(h: &TimeDependentHamiltonian<B>, t: f64, psi: &[Complex64], out: &mut [Complex64]) {
    h.apply(t, psi, out);
    for z in out.iter_mut() {
        *z *= MINUS_I;
    }
}

fn norm(psi: &[Complex64]) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrate from `t = 0` to `duration` in `steps` equal steps, calling
/// `observe(i, t_i, ψ(t_i))` for every `i` in `0..=steps`.
///
/// The state is never renormalized. A final norm drift above
/// [`DRIFT_LIMIT`] is an error.
pub fn integrate_schrodinger<B: HilbertBasis>(
    h: &TimeDependentHamiltonian<B>,
    psi0: &[Complex64],
    duration: f64,
    steps: usize,
    mut observe: impl FnMut(usize, f64, &[Complex64]) -> Result<()>,
) -> Result<Vec<Complex64>> {
    let d = h.dim();
    if psi0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi0.len() });
    }
    if steps == 0 || !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::domain(format!("need a positive duration and step count, got T={duration}, steps={steps}")));
    }
    let dt = duration / steps as f64;
    let half = Complex64::new(0.5 * dt, 0.0);
    let full = Complex64::new(dt, 0.0);
    let sixth = dt / 6.0;

    let mut psi = psi0.to_vec();
    let norm0 = norm(&psi);
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; d], vec![zero; d], vec![zero; d], vec![zero; d], vec![zero; d]);

    observe(0, 0.0, &psi)?;
    for i in 0..steps {
        let t = duration * i as f64 / steps as f64;
        derivative(h, t, &psi, &mut k1);
        for j in 0..d {
            tmp[j] = psi[j] + half * k1[j];
        }
        derivative(h, t + 0.5 * dt, &tmp, &mut k2);
        for j in 0..d {
            tmp[j] = psi[j] + half * k2[j];
        }
        derivative(h, t + 0.5 * dt, &tmp, &mut k3);
        for j in 0..d {
            tmp[j] = psi[j] + full * k3[j];
        }
        derivative(h, t + dt, &tmp, &mut k4);
        for j in 0..d {
            psi[j] += (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]) * sixth;
        }
        let t_next = duration * (i + 1) as f64 / steps as f64;
        observe(i + 1, t_next, &psi)?;
    }
    let drift = (norm(&psi) - norm0).abs();
    if drift > DRIFT_LIMIT {
        return Err(Error::NormDrift { drift, limit: DRIFT_LIMIT });
    }
    Ok(psi)
}

/// Smallest step count for which the predicted RK4 norm loss over
/// `duration` stays below `tolerance`, given the spectral radius of `H`.
///
/// One RK4 step damps an eigencomponent with phase `x = h λ` by
/// `1 - x⁶/144 + O(x⁸)`.
pub fn steps_for_norm_tolerance(duration: f64, spectral_radius: f64, tolerance: f64) -> usize {
    let phase = duration * spectral_radius;
    if phase == 0.0 {
        return 1;
    }
    (phase.powi(6) / (144.0 * tolerance)).powf(0.2).ceil() as usize
}
