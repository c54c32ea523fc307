//! Block-sparse RK4 integrator for the Lindblad master equation.
//!
//! The density matrix is stored as blocks `ρ_kl` between excitation sectors.
//! An excitation-conserving Hamiltonian keeps each block in place and a
//! collapse operator lowering the excitation by `s` feeds block
//! `(k+s, l+s)` into `(k, l)`:
//!
//! ```text
//! dρ_kl/dt = -i (H_k ρ_kl - ρ_kl H_l†) + Σ_c C_k ρ_{k+s,l+s} C_l†
//! ```
//!
//! with `H_k = H(t)|_k - (i/2) Σ_c (c†c)|_k`. Only blocks reachable from the
//! initial state are stored. When an operator does not respect the sector
//! structure the whole space is treated as one block.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::CompositeBasis;
use crate::model::TimeDependentHamiltonian;
use crate::sparse::SparseOperator;

use super::rk4::DRIFT_LIMIT;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Entries of an operator between two sectors, in sector-local indices.
type LocalEntries = Vec<(usize, usize, Complex64)>;

#[derive(Clone, Debug)]
struct Block {
    k: usize,
    l: usize,
    rows: usize,
    cols: usize,
    offset: usize,
    /// `(jump index, source block)` pairs feeding this block.
    sources: Vec<(usize, usize)>,
}

#[derive(Clone, Debug)]
struct SectorHamiltonian {
    /// Sparsity pattern shared by every term and the decay part.
    pattern: Vec<(usize, usize)>,
    /// For each pattern entry, the `(term, value)` contributions.
    weights: Vec<Vec<(usize, Complex64)>>,
    /// `Σ c†c` on the pattern.
    decay: Vec<Complex64>,
}

#[derive(Clone, Debug)]
struct Jump {
    shift: usize,
    /// Indexed by target sector; entries map `target + shift → target`.
    by_target: Vec<LocalEntries>,
}

/// Precomputed block structure and operator slices.
pub(crate) struct LindbladKernel<'a> {
    h: &'a TimeDependentHamiltonian,
    sectors: Vec<Range<usize>>,
    sector_of: Vec<usize>,
    hamiltonians: Vec<SectorHamiltonian>,
    jumps: Vec<Jump>,
    blocks: Vec<Block>,
    block_index: HashMap<(usize, usize), usize>,
    len: usize,
    // scratch
    coeffs: Vec<Complex64>,
    heff: Vec<Vec<Complex64>>,
    scratch: Vec<Complex64>,
}

/// Per-term coefficients of one matrix element plus its constant part.
type MergedEntry = (Vec<(usize, Complex64)>, Complex64);

fn sector_partition(basis: &CompositeBasis) -> Vec<Range<usize>> {
    (basis.min_sector()..=basis.excitations()).map(|k| basis.sector_range(k)).collect()
}

fn respects_sectors(sector_of: &[usize], h: &TimeDependentHamiltonian, collapse: &[SparseOperator]) -> bool {
    let h_ok = h.terms().iter().all(|t| t.operator.entries().iter().all(|&(r, c, _)| sector_of[r] == sector_of[c]));
    let c_ok = collapse.iter().all(|op| {
        let mut shift = None;
        op.entries().iter().all(|&(r, c, _)| {
            let (sr, sc) = (sector_of[r], sector_of[c]);
            if sc < sr {
                return false;
            }
            *shift.get_or_insert(sc - sr) == sc - sr
        })
    });
    h_ok && c_ok
}

impl<'a> LindbladKernel<'a> {
    /// `collapse` holds `c = √rate · op`. `initial` is the dense `ρ(0)`.
    pub(crate) fn new(h: &'a TimeDependentHamiltonian, collapse: &[SparseOperator], initial: &[Complex64]) -> Self {
        let basis = h.basis();
        let d = basis.len();
        let mut sectors = sector_partition(basis);
        let mut sector_of = vec![0; d];
        for (s, r) in sectors.iter().enumerate() {
            for i in r.clone() {
                sector_of[i] = s;
            }
        }
        if !respects_sectors(&sector_of, h, collapse) {
            sectors = std::iter::once(0..d).collect();
            sector_of = vec![0; d];
        }
        let n_sec = sectors.len();
        let local = |i: usize| i - sectors[sector_of[i]].start;

        // Σ c†c, block diagonal because every c has a uniform sector shift
        let mut decay: Vec<BTreeMap<(usize, usize), Complex64>> = vec![BTreeMap::new(); n_sec];
        for op in collapse {
            let mut by_row: BTreeMap<usize, Vec<(usize, Complex64)>> = BTreeMap::new();
            for &(r, c, v) in op.entries() {
                by_row.entry(r).or_default().push((c, v));
            }
            for entries in by_row.values() {
                for &(i, a) in entries {
                    for &(j, b) in entries {
                        let s = sector_of[i];
                        *decay[s].entry((local(i), local(j))).or_insert(ZERO) += a.conj() * b;
                    }
                }
            }
        }

        let mut hamiltonians = Vec::with_capacity(n_sec);
        for (s, decay_s) in decay.into_iter().enumerate() {
            let mut map: BTreeMap<(usize, usize), MergedEntry> = BTreeMap::new();
            for (ti, term) in h.terms().iter().enumerate() {
                for &(r, c, v) in term.operator.entries() {
                    if sector_of[r] == s {
                        map.entry((local(r), local(c))).or_insert((Vec::new(), ZERO)).0.push((ti, v));
                    }
                }
            }
            for (key, v) in decay_s {
                map.entry(key).or_insert((Vec::new(), ZERO)).1 += v;
            }
            let mut sh = SectorHamiltonian { pattern: Vec::new(), weights: Vec::new(), decay: Vec::new() };
            for (key, (w, dcy)) in map {
                sh.pattern.push(key);
                sh.weights.push(w);
                sh.decay.push(dcy);
            }
            hamiltonians.push(sh);
        }

        let mut jumps = Vec::new();
        for op in collapse {
            let Some(&(r0, c0, _)) = op.entries().first() else { continue };
            let shift = sector_of[c0] - sector_of[r0];
            let mut by_target = vec![Vec::new(); n_sec];
            for &(r, c, v) in op.entries() {
                by_target[sector_of[r]].push((local(r), local(c), v));
            }
            jumps.push(Jump { shift, by_target });
        }

        // blocks present initially, closed under the jump maps
        let mut active = std::collections::BTreeSet::new();
        for r in 0..d {
            for c in 0..d {
                if initial[r * d + c] != ZERO {
                    active.insert((sector_of[r], sector_of[c]));
                }
            }
        }
        let mut frontier: Vec<(usize, usize)> = active.iter().copied().collect();
        while let Some((k, l)) = frontier.pop() {
            for j in &jumps {
                if j.shift > 0 && k >= j.shift && l >= j.shift {
                    let target = (k - j.shift, l - j.shift);
                    if active.insert(target) {
                        frontier.push(target);
                    }
                }
            }
        }

        let mut blocks = Vec::new();
        let mut block_index = HashMap::new();
        let mut offset = 0;
        for &(k, l) in &active {
            let (rows, cols) = (sectors[k].len(), sectors[l].len());
            block_index.insert((k, l), blocks.len());
            blocks.push(Block { k, l, rows, cols, offset, sources: Vec::new() });
            offset += rows * cols;
        }
        for block in &mut blocks {
            let (k, l) = (block.k, block.l);
            for (ji, j) in jumps.iter().enumerate() {
                if let Some(&src) = block_index.get(&(k + j.shift, l + j.shift)) {
                    block.sources.push((ji, src));
                }
            }
        }
        let max_sector = sectors.iter().map(|r| r.len()).max().unwrap_or(0);
        let heff = hamiltonians.iter().map(|s| vec![ZERO; s.pattern.len()]).collect();
        Self {
            h,
            sectors,
            sector_of,
            hamiltonians,
            jumps,
            blocks,
            block_index,
            len: offset,
            coeffs: vec![ZERO; h.terms().len()],
            heff,
            scratch: vec![ZERO; max_sector * max_sector],
        }
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.len
    }

    #[cfg(test)]
    pub(crate) fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Gather the stored blocks out of a dense row-major `ρ`.
    pub(crate) fn pack(&self, dense: &[Complex64]) -> Vec<Complex64> {
        let d = self.sector_of.len();
        let mut out = vec![ZERO; self.len];
        for b in &self.blocks {
            let (rk, rl) = (&self.sectors[b.k], &self.sectors[b.l]);
            for (i, r) in rk.clone().enumerate() {
                for (j, c) in rl.clone().enumerate() {
                    out[b.offset + i * b.cols + j] = dense[r * d + c];
                }
            }
        }
        out
    }

    /// Dense row-major `ρ` from packed blocks.
    pub(crate) fn unpack(&self, packed: &[Complex64]) -> Vec<Complex64> {
        let d = self.sector_of.len();
        let mut out = vec![ZERO; d * d];
        for b in &self.blocks {
            let (rk, rl) = (&self.sectors[b.k], &self.sectors[b.l]);
            for (i, r) in rk.clone().enumerate() {
                for (j, c) in rl.clone().enumerate() {
                    out[r * d + c] = packed[b.offset + i * b.cols + j];
                }
            }
        }
        out
    }

    /// `ρ_ij` from packed storage (zero for blocks that are not stored).
    pub(crate) fn element(&self, packed: &[Complex64], i: usize, j: usize) -> Complex64 {
        let (k, l) = (self.sector_of[i], self.sector_of[j]);
        match self.block_index.get(&(k, l)) {
            Some(&b) => {
                let blk = &self.blocks[b];
                packed[blk.offset + (i - self.sectors[k].start) * blk.cols + (j - self.sectors[l].start)]
            }
            None => ZERO,
        }
    }

    /// Real diagonal of `ρ`.
    pub(crate) fn diagonal(&self, packed: &[Complex64]) -> Vec<f64> {
        (0..self.sector_of.len()).map(|i| self.element(packed, i, i).re).collect()
    }

    pub(crate) fn trace(&self, packed: &[Complex64]) -> f64 {
        self.diagonal(packed).iter().sum()
    }

    fn prepare(&mut self, t: f64) {
        for (c, term) in self.coeffs.iter_mut().zip(self.h.terms()) {
            *c = (term.coefficient)(t);
        }
        for (s, sh) in self.hamiltonians.iter().enumerate() {
            for (e, w) in sh.weights.iter().enumerate() {
                let mut v = -0.5 * I * sh.decay[e];
                for &(ti, a) in w {
                    v += self.coeffs[ti] * a;
                }
                self.heff[s][e] = v;
            }
        }
    }

    /// `out = dρ/dt` at time `t`.
    pub(crate) fn derivative(&mut self, t: f64, rho: &[Complex64], out: &mut [Complex64]) {
        self.prepare(t);
        for b in &self.blocks {
            let (rows, cols) = (b.rows, b.cols);
            let dst = &mut out[b.offset..b.offset + rows * cols];
            dst.iter_mut().for_each(|z| *z = ZERO);
            let src = &rho[b.offset..b.offset + rows * cols];

            // -i H_k ρ_kl
            for (e, &(r, c)) in self.hamiltonians[b.k].pattern.iter().enumerate() {
                let a = -I * self.heff[b.k][e];
                let (dr, sr) = (r * cols, c * cols);
                for j in 0..cols {
                    dst[dr + j] += a * src[sr + j];
                }
            }
            // +i ρ_kl H_l†: (ρ H†)[r, c] = Σ_j ρ[r, j] conj(H[c, j])
            for (e, &(c, j)) in self.hamiltonians[b.l].pattern.iter().enumerate() {
                let a = I * self.heff[b.l][e].conj();
                for r in 0..rows {
                    dst[r * cols + c] += a * src[r * cols + j];
                }
            }
            // Σ C_k ρ_{k+s,l+s} C_l†
            for &(ji, sb) in &b.sources {
                let jump = &self.jumps[ji];
                let source = &self.blocks[sb];
                let scols = source.cols;
                let srho = &rho[source.offset..source.offset + source.rows * scols];
                let x = &mut self.scratch[..rows * scols];
                x.iter_mut().for_each(|z| *z = ZERO);
                for &(r, c, v) in &jump.by_target[b.k] {
                    for j in 0..scols {
                        x[r * scols + j] += v * srho[c * scols + j];
                    }
                }
                for &(c, j, v) in &jump.by_target[b.l] {
                    let vc = v.conj();
                    for r in 0..rows {
                        dst[r * cols + c] += x[r * scols + j] * vc;
                    }
                }
            }
        }
    }

    /// RK4 from 0 to `duration`, calling `observe(i, t_i, ρ_packed)` at
    /// every step boundary. Trace drift above the limit is an error.
    pub(crate) fn integrate(
        &mut self,
        rho0: Vec<Complex64>,
        duration: f64,
        steps: usize,
        mut observe: impl FnMut(&Self, usize, f64, &[Complex64]) -> Result<()>,
    ) -> Result<Vec<Complex64>> {
        if steps == 0 || !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::domain(format!(
                "need a positive duration and step count, got T={duration}, steps={steps}"
            )));
        }
        let n = self.len;
        let dt = duration / steps as f64;
        let mut rho = rho0;
        let trace0 = self.trace(&rho);
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
            (vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n], vec![ZERO; n]);
        observe(self, 0, 0.0, &rho)?;
        for i in 0..steps {
            let t = duration * i as f64 / steps as f64;
            self.derivative(t, &rho, &mut k1);
            for j in 0..n {
                tmp[j] = rho[j] + k1[j] * (0.5 * dt);
            }
            self.derivative(t + 0.5 * dt, &tmp, &mut k2);
            for j in 0..n {
                tmp[j] = rho[j] + k2[j] * (0.5 * dt);
            }
            self.derivative(t + 0.5 * dt, &tmp, &mut k3);
            for j in 0..n {
                tmp[j] = rho[j] + k3[j] * dt;
            }
            self.derivative(t + dt, &tmp, &mut k4);
            let sixth = dt / 6.0;
            for j in 0..n {
                rho[j] += (k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]) * sixth;
            }
            observe(self, i + 1, duration * (i + 1) as f64 / steps as f64, &rho)?;
        }
        let drift = (self.trace(&rho) - trace0).abs();
        if drift > DRIFT_LIMIT {
            return Err(Error::TraceDrift { drift, limit: DRIFT_LIMIT });
        }
        Ok(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{annihilation, atom_lowering, AtomLevel, BasisState, Mode};
    use crate::model::{jc_drive, CouplingScales, PulseSchedule};
    use nalgebra::DMatrix;
    use std::sync::Arc;

    fn pure_dense(basis: &CompositeBasis, state: BasisState) -> Vec<Complex64> {
        let d = basis.len();
        let i = basis.index_of(&state).unwrap();
        let mut rho = vec![ZERO; d * d];
        rho[i * d + i] = Complex64::new(1.0, 0.0);
        rho
    }

    /// Dense `dρ/dt` straight from the master equation.
    fn dense_rhs(h: &DMatrix<Complex64>, cs: &[DMatrix<Complex64>], rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut out = -(h * rho - rho * h) * I;
        for c in cs {
            let cd = c.adjoint();
            out += c * rho * &cd - (&cd * c * rho + rho * &cd * c) * Complex64::new(0.5, 0.0);
        }
        out
    }

    #[test]
    fn derivative_matches_dense_master_equation() {
        let basis = CompositeBasis::all_sectors(3);
        let schedule = PulseSchedule::sin_cos(1.2, 5.0).unwrap();
        let h = jc_drive(schedule, CouplingScales::default(), &basis);
        let cs: Vec<DMatrix<Complex64>> = vec![
            atom_lowering(&basis).scaled(0.3).into_entries(),
            annihilation(Mode::Optical, &basis).scaled(0.2).into_entries(),
            annihilation(Mode::Microwave, &basis).scaled(0.45).into_entries(),
        ];
        let sparse: Vec<SparseOperator> = cs.iter().map(SparseOperator::from_dense).collect();
        // a generic Hermitian state with every block populated
        let d = basis.len();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = Complex64::new(((r * 7 + c * 3) % 11) as f64 / 11.0, ((r + 2 * c) % 5) as f64 / 7.0);
            }
        }
        let rho = &m * m.adjoint();
        let rho = &rho / rho.trace();
        let row_major: Vec<Complex64> = (0..d * d).map(|i| rho[(i / d, i % d)]).collect();

        let mut kernel = LindbladKernel::new(&h, &sparse, &row_major);
        assert_eq!(kernel.block_count(), 16);
        let packed = kernel.pack(&row_major);
        let mut out = vec![ZERO; kernel.len()];
        let t = 1.7;
        kernel.derivative(t, &packed, &mut out);
        let got = kernel.unpack(&out);
        let expected = dense_rhs(h.matrix_at(t).entries(), &cs, &rho);
        for r in 0..d {
            for c in 0..d {
                assert!((got[r * d + c] - expected[(r, c)]).norm() < 1e-13, "({r},{c})");
            }
        }
    }

    #[test]
    fn pure_start_keeps_only_diagonal_blocks() {
        let basis = CompositeBasis::all_sectors(5);
        let h = TimeDependentHamiltonian::zero(Arc::clone(&basis));
        let c = vec![annihilation(Mode::Microwave, &basis).to_sparse()];
        let rho0 = pure_dense(&basis, BasisState::new(0, 5, AtomLevel::G));
        let kernel = LindbladKernel::new(&h, &c, &rho0);
        assert_eq!(kernel.block_count(), 6);
        assert_eq!(kernel.len(), 1 + 9 + 25 + 49 + 81 + 121);
    }

    #[test]
    fn non_conserving_operator_falls_back_to_one_block() {
        let basis = CompositeBasis::all_sectors(2);
        let up = crate::fockspace::creation(Mode::Optical, &basis).to_sparse();
        let h = TimeDependentHamiltonian::new(
            Arc::clone(&basis),
            vec![crate::model::DriveTerm::real(
                |_| 1.0,
                SparseOperator::new(basis.len(), {
                    let mut e = up.entries().to_vec();
                    e.extend(up.adjoint().entries().iter().copied());
                    e
                }),
            )],
        );
        let rho0 = pure_dense(&basis, BasisState::new(0, 0, AtomLevel::G));
        let kernel = LindbladKernel::new(&h, &[], &rho0);
        assert_eq!(kernel.block_count(), 1);
        assert_eq!(kernel.len(), 81);
    }
}
