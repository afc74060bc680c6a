//! Krylov diagonalization over imaginary-time states, assembled from the
//! per-step energies and norm estimates alone.
//!
//! With `c^(k) = <Phi^(k)|e^{-2 dbeta H}|Phi^(k)>` and
//! `log n^(l) = -1/2 sum_{k<l} log c^(k)`, the normalized states satisfy
//! `<Phi^(l)|Phi^(l')> = n^(l) n^(l') / (n^(m))^2` with `m = (l + l') / 2`, and
//! `<Phi^(l)|H|Phi^(l')>` is that overlap times `E^(m)`. All norms are handled
//! in the reference-shifted form `c~ = e^{2 dbeta E0} c`, which leaves the
//! matrices unchanged and keeps them finite.

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

/// Pairwise overlap above which a Krylov vector is rejected.
pub const ADMIT_OVERLAP: f64 = 0.999;
/// Largest Krylov subspace kept.
pub const MAX_VECTORS: usize = 5;
/// Overlap eigenvalues below this are dropped.
pub const DROP_EIGENVALUE: f64 = 1e-8;
/// Overlap eigenvalues above this mark physically relevant directions.
pub const RELEVANT_EIGENVALUE: f64 = 0.01;
/// Weight on a relevant direction that flags an eigenpair as physical.
pub const PHYSICAL_WEIGHT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormEstimator {
    /// `c ~ 1 - 2 dbeta E`.
    FirstOrder,
    /// `c ~ e^{-2 dbeta E}`.
    EnergyShifted,
    /// `c~ ~ e^{-2 dbeta (E - E0)}`.
    ReferenceShifted,
}

impl core::str::FromStr for NormEstimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first_order" => Ok(NormEstimator::FirstOrder),
            "energy_shifted" => Ok(NormEstimator::EnergyShifted),
            "reference_shifted" => Ok(NormEstimator::ReferenceShifted),
            _ => Err(Error::InvalidArgument("unknown norm estimator")),
        }
    }
}

/// Where each step's norm factor comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormSource {
    Estimate(NormEstimator),
    /// Values recorded with [`KrylovHistory::set_exact_c`].
    Exact,
}

/// The raw estimate of `c` (or `c~` for the reference-shifted form).
pub fn norm_estimate(energy: f64, dbeta: f64, e0: f64, variant: NormEstimator) -> Result<f64> {
    match variant {
        NormEstimator::FirstOrder => {
            let c = 1.0 - 2.0 * dbeta * energy;
            if !(c > 0.0) {
                return Err(Error::NonPositiveNorm { value: c });
            }
            Ok(c)
        }
        NormEstimator::EnergyShifted => Ok((-2.0 * dbeta * energy).exp()),
        NormEstimator::ReferenceShifted => Ok((-2.0 * dbeta * (energy - e0)).exp()),
    }
}

fn log_c_tilde(energy: f64, dbeta: f64, e0: f64, variant: NormEstimator) -> Result<f64> {
    match variant {
        NormEstimator::FirstOrder => Ok(norm_estimate(energy, dbeta, e0, variant)?.ln() + 2.0 * dbeta * e0),
        NormEstimator::EnergyShifted | NormEstimator::ReferenceShifted => Ok(-2.0 * dbeta * (energy - e0)),
    }
}

/// Energies `E^(l)` of a trajectory, contiguous from `l = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrylovHistory {
    pub dbeta: f64,
    pub e0: f64,
    energies: Vec<f64>,
    exact_c: Vec<Option<f64>>,
}

impl KrylovHistory {
    /// History starting at `E^(0)`, which also becomes the reference `E0`.
    pub fn new(dbeta: f64, e_initial: f64) -> Self {
        KrylovHistory { dbeta, e0: e_initial, energies: alloc::vec![e_initial], exact_c: alloc::vec![None] }
    }

    pub fn with_reference(dbeta: f64, e0: f64) -> Self {
        KrylovHistory { dbeta, e0, energies: Vec::new(), exact_c: Vec::new() }
    }

    pub fn push(&mut self, energy: f64) {
        self.energies.push(energy);
        self.exact_c.push(None);
    }

    /// Records the exact `c^(l-1)` of the step that led to the latest
    /// state (stored against its starting step).
    pub fn set_exact_c(&mut self, ell: usize, c: f64) -> Result<()> {
        let slot =
            self.exact_c.get_mut(ell).ok_or(Error::IndexOutOfRange { index: ell, bound: self.energies.len() })?;
        *slot = Some(c);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Latest step first, stepping back by two.
    pub fn grid(&self) -> Vec<usize> {
        match self.energies.len() {
            0 => Vec::new(),
            n => (0..n).rev().step_by(2).collect(),
        }
    }

    fn log_ct(&self, k: usize, source: NormSource) -> Result<f64> {
        match source {
            NormSource::Estimate(v) => log_c_tilde(self.energies[k], self.dbeta, self.e0, v),
            NormSource::Exact => {
                let c = self.exact_c[k].ok_or(Error::InvalidArgument("exact norm not recorded"))?;
                Ok(c.ln() + 2.0 * self.dbeta * self.e0)
            }
        }
    }

    /// `log n^(l)` for `l = 0..=upto`.
    fn log_norms(&self, upto: usize, source: NormSource) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(upto + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for k in 0..upto {
            acc -= 0.5 * self.log_ct(k, source)?;
            out.push(acc);
        }
        Ok(out)
    }
}

/// Overlap and Hamiltonian matrices over the Krylov states `indices`.
pub fn build_krylov_matrices(
    hist: &KrylovHistory,
    indices: &[usize],
    source: NormSource,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    build_krylov_matrices_observed(hist, indices, source, &hist.energies)
}

/// As [`build_krylov_matrices`], but the Hamiltonian matrix takes its
/// midpoint expectation values from `observed` instead of the propagated
/// energies. With a folded propagator this gives the FS-QLanczos matrices of
/// the original operator.
pub fn build_krylov_matrices_observed(
    hist: &KrylovHistory,
    indices: &[usize],
    source: NormSource,
    observed: &[f64],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = indices.len();
    let top = indices.iter().copied().max().unwrap_or(0);
    if top >= hist.len() || observed.len() < hist.len() {
        return Err(Error::IndexOutOfRange { index: top.max(observed.len()), bound: hist.len() });
    }
    let ln = hist.log_norms(top, source)?;
    let mut s = DMatrix::zeros(n, n);
    let mut h = DMatrix::zeros(n, n);
    for (a, &l) in indices.iter().enumerate() {
        for (b, &lp) in indices.iter().enumerate() {
            if (l + lp) % 2 != 0 {
                return Err(Error::MissingMidpoint { ell: l.max(lp) });
            }
            let m = (l + lp) / 2;
            let v = if l == lp { 1.0 } else { (ln[l] + ln[lp] - 2.0 * ln[m]).exp() };
            s[(a, b)] = v;
            h[(a, b)] = v * observed[m];
        }
    }
    Ok((s, h))
}

#[derive(Clone, Debug, PartialEq)]
pub struct QlanczosResult {
    /// Positions of admitted vectors; the first is always the newest.
    pub selected_indices: Vec<usize>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub physical_flags: Vec<bool>,
    /// Largest squared component on a physically relevant direction.
    pub eigvec_weights: Vec<f64>,
}

impl QlanczosResult {
    pub fn lowest_physical(&self) -> Option<f64> {
        self.eigenvalues.iter().zip(&self.physical_flags).find(|(_, f)| **f).map(|(e, _)| *e)
    }

    pub fn physical(&self) -> Vec<f64> {
        self.eigenvalues.iter().zip(&self.physical_flags).filter(|(_, f)| **f).map(|(e, _)| *e).collect()
    }
}

/// Stabilized solve with the default subspace cap.
pub fn stabilized_solve(s: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<QlanczosResult> {
    stabilized_solve_capped(s, h, MAX_VECTORS)
}

/// Admits vectors in the given order (newest first) while their overlap with
/// every admitted vector stays below [`ADMIT_OVERLAP`], up to `cap` of them,
/// then diagonalizes `H` in the Löwdin-orthonormalized subspace.
pub fn stabilized_solve_capped(s: &DMatrix<f64>, h: &DMatrix<f64>, cap: usize) -> Result<QlanczosResult> {
    let n = s.nrows();
    if s.ncols() != n || h.nrows() != n || h.ncols() != n {
        return Err(Error::InvalidArgument("overlap and Hamiltonian must be square and equal in size"));
    }
    if n == 0 || cap == 0 {
        return Err(Error::InvalidArgument("no Krylov vectors"));
    }
    let mut sel: Vec<usize> = Vec::new();
    for i in 0..n {
        if sel.len() == cap {
            break;
        }
        if sel.iter().all(|&j| s[(i, j)].abs() < ADMIT_OVERLAP) {
            sel.push(i);
        }
    }
    let k = sel.len();
    let ss = DMatrix::from_fn(k, k, |a, b| s[(sel[a], sel[b])]);
    let hs = DMatrix::from_fn(k, k, |a, b| h[(sel[a], sel[b])]);
    let (eta, u) = sym_eigen(&ss);
    let keep: Vec<usize> = (0..k).filter(|&i| eta[i] >= DROP_EIGENVALUE).collect();
    if keep.is_empty() {
        return Err(Error::SingularOverlap { min_eigenvalue: eta.last().copied().unwrap_or(0.0) });
    }
    let mut x = DMatrix::zeros(k, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        x.set_column(c, &(u.column(i) / eta[i].sqrt()));
    }
    let hp = x.transpose() * hs * &x;
    let (values, y) = sym_eigen(&hp);
    let mut weights = Vec::with_capacity(values.len());
    for col in 0..values.len() {
        let w = keep
            .iter()
            .enumerate()
            .filter(|(_, &i)| eta[i] > RELEVANT_EIGENVALUE)
            .map(|(r, _)| y[(r, col)] * y[(r, col)])
            .fold(0.0f64, f64::max);
        weights.push(w);
    }
    Ok(QlanczosResult {
        selected_indices: sel,
        eigenvalues: values,
        physical_flags: weights.iter().map(|&w| w > PHYSICAL_WEIGHT).collect(),
        eigvec_weights: weights,
    })
}

/// QLanczos on the same-parity grid ending at the latest step. The returned
/// `selected_indices` are step numbers.
pub fn qlanczos(hist: &KrylovHistory, source: NormSource) -> Result<QlanczosResult> {
    qlanczos_observed(hist, source, &hist.energies)
}

/// QLanczos whose Hamiltonian matrix uses `observed` midpoint values.
pub fn qlanczos_observed(hist: &KrylovHistory, source: NormSource, observed: &[f64]) -> Result<QlanczosResult> {
    let grid = hist.grid();
    let (s, h) = build_krylov_matrices_observed(hist, &grid, source, observed)?;
    let mut res = stabilized_solve(&s, &h)?;
    res.selected_indices = res.selected_indices.iter().map(|&i| grid[i]).collect();
    Ok(res)
}
