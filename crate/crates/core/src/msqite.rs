//! Model-space QITE.
//!
//! A set of states is propagated together. Each step builds the first-order
//! overlap of the evolved space, `S~ = S - 2 dbeta (H - (E_I + E_J) S / 2)`,
//! and its Löwdin transform `d = S~^{-1/2}`. The state-specific variant fits
//! one generator per state against `sum_J d_JI e^{-dbeta (H - E_J)} |Phi_J>`;
//! the state-averaged variant fits one generator for the whole space.
//!
//! Model-space matrices are taken as real: the imaginary parts of `S_IJ` and
//! `H_IJ` vanish for real Hamiltonians and real-generator pools, and are
//! discarded otherwise.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fermion::OperatorPool;
use crate::linalg::{generalized_eigen, inv_sqrt_spd};
use crate::pauli::PauliSum;
use crate::qite::{apply_product, solve_blocks, without_identity, Tangent};
use crate::qlanczos::{stabilized_solve_capped, QlanczosResult, MAX_VECTORS};
use crate::state::{dot, StateVector};

/// Overlap eigenvalue cutoff for the effective-Hamiltonian solve.
pub const OVERLAP_CUTOFF: f64 = 1e-10;

/// `H + lambda (S^2 - s(s+1))`.
pub fn shift_hamiltonian_spin(h: &PauliSum, s2: &PauliSum, lambda: f64, s: f64) -> Result<PauliSum> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument("spin-shift lambda must be non-negative"));
    }
    if !(s >= 0.0) || (2.0 * s).fract() != 0.0 {
        return Err(Error::InvalidArgument("target spin must be a non-negative half-integer"));
    }
    let shifted = s2.shifted(-s * (s + 1.0)).scale(Complex64::new(lambda, 0.0));
    h.add(&shifted)
}

/// Löwdin transform of the first-order propagated overlap.
pub fn lowdin_d(s: &DMatrix<f64>, h: &DMatrix<f64>, e: &[f64], dbeta: f64) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    if s.ncols() != n || h.nrows() != n || h.ncols() != n || e.len() != n {
        return Err(Error::InvalidArgument("model-space matrices have inconsistent sizes"));
    }
    let st = DMatrix::from_fn(n, n, |i, j| s[(i, j)] - 2.0 * dbeta * (h[(i, j)] - 0.5 * (e[i] + e[j]) * s[(i, j)]));
    inv_sqrt_spd(&st)
}

/// Ascending eigenvalues of `H c = S c e`.
pub fn effective_spectrum(h: &DMatrix<f64>, s: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(generalized_eigen(h, s, OVERLAP_CUTOFF)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MsqiteMode {
    StateSpecific,
    StateAveraged,
}

impl core::str::FromStr for MsqiteMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "state_specific" => Ok(MsqiteMode::StateSpecific),
            "state_averaged" => Ok(MsqiteMode::StateAveraged),
            _ => Err(Error::InvalidArgument("unknown model-space mode")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MsqiteConfig {
    pub dbeta: f64,
    pub beta_max: f64,
    pub mode: MsqiteMode,
    pub reg: f64,
    pub grad_tol: f64,
    pub pool: OperatorPool,
    pub s2: Option<PauliSum>,
    /// `(lambda, s)`; requires `s2`.
    pub spin_shift: Option<(f64, f64)>,
    /// Keep the `d`-coupling term of the state-specific gradient.
    pub orthogonality_term: bool,
}

impl MsqiteConfig {
    pub fn new(pool: OperatorPool, dbeta: f64, mode: MsqiteMode) -> Self {
        MsqiteConfig {
            dbeta,
            beta_max: 20.0,
            mode,
            reg: 0.0,
            grad_tol: 1e-6,
            pool,
            s2: None,
            spin_shift: None,
            orthogonality_term: true,
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let mut q = crate::qite::QiteConfig::new(self.pool.clone(), self.dbeta);
        q.beta_max = self.beta_max;
        q.reg = self.reg;
        q.grad_tol = self.grad_tol;
        q.s2 = self.s2.clone();
        q.validate(n_qubits)?;
        if self.spin_shift.is_some() && self.s2.is_none() {
            return Err(Error::InvalidArgument("spin shift needs the S^2 operator"));
        }
        Ok(())
    }
}

/// States with their overlap and Hamiltonian matrices.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    pub states: Vec<StateVector>,
    pub energies: Vec<f64>,
    pub s: DMatrix<f64>,
    pub h: DMatrix<f64>,
}

impl ModelSpace {
    pub fn new(states: Vec<StateVector>, h: &PauliSum) -> Result<ModelSpace> {
        let n = states.len();
        if n == 0 {
            return Err(Error::InvalidArgument("model space needs at least one state"));
        }
        let hs: Vec<StateVector> = states.iter().map(|s| s.apply(h)).collect::<Result<_>>()?;
        let mut sm = DMatrix::zeros(n, n);
        let mut hm = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let sv = dot(states[i].amplitudes(), states[j].amplitudes()).re;
                let hv = 0.5
                    * (dot(states[i].amplitudes(), hs[j].amplitudes()).re
                        + dot(hs[i].amplitudes(), states[j].amplitudes()).re);
                sm[(i, j)] = sv;
                sm[(j, i)] = sv;
                hm[(i, j)] = hv;
                hm[(j, i)] = hv;
            }
        }
        let energies = (0..n).map(|i| hm[(i, i)]).collect();
        Ok(ModelSpace { states, energies, s: sm, h: hm })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Largest `|S_IJ|` with `I != J`.
    pub fn max_offdiag_overlap(&self) -> f64 {
        let n = self.len();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.s[(i, j)].abs());
                }
            }
        }
        m
    }
}

/// Per-step record of a model-space run.
#[derive(Clone, Debug, PartialEq)]
pub struct MsStepReport {
    pub ell: usize,
    pub beta: f64,
    /// `<Phi_I|H|Phi_I>` with the unshifted Hamiltonian.
    pub energies: Vec<f64>,
    pub s2: Vec<Option<f64>>,
    pub grad_norms: Vec<f64>,
    pub a_norms: Vec<f64>,
    /// Spectrum of the unshifted Hamiltonian in the current space.
    pub effective: Vec<f64>,
    pub max_offdiag_overlap: f64,
}

/// Matrices recorded at one step for the Krylov extension.
#[derive(Clone, Debug, PartialEq)]
pub struct MsRecord {
    pub s: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub energies: Vec<f64>,
    /// `d` of the step leaving this record (absent for the latest).
    pub d: Option<DMatrix<f64>>,
}

/// History of model-space matrices and `d` transforms.
#[derive(Clone, Debug, PartialEq)]
pub struct DMatrixHistory {
    pub dbeta: f64,
    pub e0: f64,
    pub records: Vec<MsRecord>,
}

impl DMatrixHistory {
    pub fn new(dbeta: f64, e0: f64) -> Self {
        DMatrixHistory { dbeta, e0, records: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `d~_JI = d_JI e^{dbeta (E_J - E0)}` at step `ell`.
    pub fn d_tilde(&self, ell: usize) -> Result<DMatrix<f64>> {
        let rec = self.records.get(ell).ok_or(Error::MissingMidpoint { ell })?;
        let d = rec.d.as_ref().ok_or(Error::MissingMidpoint { ell })?;
        let n = d.nrows();
        Ok(DMatrix::from_fn(n, n, |j, i| d[(j, i)] * (self.dbeta * (rec.energies[j] - self.e0)).exp()))
    }

    /// `d~^(from) d~^(from+1) ... d~^(to)`, identity when `from > to`.
    fn product(&self, from: usize, to: usize, n: usize) -> Result<DMatrix<f64>> {
        let mut p = DMatrix::identity(n, n);
        if from > to {
            return Ok(p);
        }
        for k in from..=to {
            p *= self.d_tilde(k)?;
        }
        Ok(p)
    }

    /// Same-parity grid ending at the latest step, newest first.
    pub fn grid(&self) -> Vec<usize> {
        match self.records.len() {
            0 => Vec::new(),
            n => (0..n).rev().step_by(2).collect(),
        }
    }
}

/// Overlap and Hamiltonian over the Krylov model space of steps `indices`;
/// rows and columns are ordered `(ell, I)` with `I` fastest.
pub fn ms_qlanczos_matrices(hist: &DMatrixHistory, indices: &[usize]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = hist.records.first().map(|r| r.s.nrows()).ok_or(Error::InvalidArgument("empty history"))?;
    let k = indices.len();
    let mut big_s = DMatrix::zeros(k * n, k * n);
    let mut big_h = DMatrix::zeros(k * n, k * n);
    for (a, &la) in indices.iter().enumerate() {
        for (b, &lb) in indices.iter().enumerate() {
            let (l, lp, flip) = if la >= lb { (la, lb, false) } else { (lb, la, true) };
            if (l + lp) % 2 != 0 {
                return Err(Error::MissingMidpoint { ell: l });
            }
            let m = (l + lp) / 2;
            let rec = hist.records.get(m).ok_or(Error::MissingMidpoint { ell: m })?;
            let ls = if l > m { hist.product(m, l - 1, n)? } else { DMatrix::identity(n, n) };
            let rs = if m > lp {
                hist.product(lp, m - 1, n)?.try_inverse().ok_or(Error::SingularOverlap { min_eigenvalue: 0.0 })?
            } else {
                DMatrix::identity(n, n)
            };
            let sb = ls.transpose() * &rec.s * &rs;
            let hb = ls.transpose() * &rec.h * &rs;
            let (sb, hb) = if flip { (sb.transpose(), hb.transpose()) } else { (sb, hb) };
            big_s.view_mut((a * n, b * n), (n, n)).copy_from(&sb);
            big_h.view_mut((a * n, b * n), (n, n)).copy_from(&hb);
        }
    }
    Ok((big_s, big_h))
}

/// Stabilized MS-QLanczos on the same-parity grid ending at the latest step.
pub fn ms_qlanczos(hist: &DMatrixHistory) -> Result<QlanczosResult> {
    let grid = hist.grid();
    let (s, h) = ms_qlanczos_matrices(hist, &grid)?;
    let n = hist.records[0].s.nrows();
    stabilized_solve_capped(&s, &h, MAX_VECTORS * n)
}

struct Analysis {
    d: DMatrix<f64>,
    tangents: Vec<Tangent>,
    rs: Vec<DVector<f64>>,
    grad_norms: Vec<f64>,
}

/// Stepwise model-space driver.
pub struct Msqite {
    h: PauliSum,
    h_prop: PauliSum,
    h_prop_traceless: PauliSum,
    cfg: MsqiteConfig,
    space: ModelSpace,
    analysis: Analysis,
    history: DMatrixHistory,
    ell: usize,
    last: MsStepReport,
}

impl Msqite {
    pub fn new(init: Vec<StateVector>, h: &PauliSum, cfg: MsqiteConfig) -> Result<Msqite> {
        let n_qubits = init.first().map(|s| s.n_qubits()).ok_or(Error::InvalidArgument("no initial states"))?;
        cfg.validate(n_qubits)?;
        if h.n_qubits() != n_qubits {
            return Err(Error::QubitMismatch { left: h.n_qubits(), right: n_qubits });
        }
        let mut states = Vec::with_capacity(init.len());
        for mut s in init {
            if s.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch { left: s.n_qubits(), right: n_qubits });
            }
            s.normalize()?;
            states.push(s);
        }
        let h_prop = match (cfg.spin_shift, &cfg.s2) {
            (Some((lambda, s)), Some(s2)) => shift_hamiltonian_spin(h, s2, lambda, s)?,
            _ => h.clone(),
        };
        let h_prop_traceless = without_identity(&h_prop);
        let space = ModelSpace::new(states, &h_prop)?;
        let e0 = space.energies.iter().sum::<f64>() / space.len() as f64;
        let analysis = Self::analyze(&space, &h_prop_traceless, &cfg)?;
        let mut history = DMatrixHistory::new(cfg.dbeta, e0);
        history.records.push(MsRecord {
            s: space.s.clone(),
            h: space.h.clone(),
            energies: space.energies.clone(),
            d: None,
        });
        let mut run = Msqite {
            h: h.clone(),
            h_prop,
            h_prop_traceless,
            cfg,
            space,
            analysis,
            history,
            ell: 0,
            last: MsStepReport {
                ell: 0,
                beta: 0.0,
                energies: Vec::new(),
                s2: Vec::new(),
                grad_norms: Vec::new(),
                a_norms: Vec::new(),
                effective: Vec::new(),
                max_offdiag_overlap: 0.0,
            },
        };
        let n = run.space.len();
        run.last = run.make_report(vec![0.0; n])?;
        Ok(run)
    }

    fn analyze(space: &ModelSpace, h_traceless: &PauliSum, cfg: &MsqiteConfig) -> Result<Analysis> {
        let n = space.len();
        let d = lowdin_d(&space.s, &space.h, &space.energies, cfg.dbeta)?;
        let mut tangents = Vec::with_capacity(n);
        let mut rs = Vec::with_capacity(n);
        let mut grad_norms = Vec::with_capacity(n);
        let inv = 1.0 / cfg.dbeta;
        for i in 0..n {
            let phi = &space.states[i];
            let t = Tangent::new(phi, &cfg.pool.generators);
            let mut w = phi.apply(h_traceless)?.into_amplitudes();
            if cfg.orthogonality_term && cfg.mode == MsqiteMode::StateSpecific {
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let f = d[(j, i)] * inv;
                    for (wk, pk) in w.iter_mut().zip(space.states[j].amplitudes()) {
                        *wk -= pk * f;
                    }
                }
            }
            let r = t.project(&w);
            grad_norms.push(t.gradient(&r).norm());
            tangents.push(t);
            rs.push(r);
        }
        if cfg.mode == MsqiteMode::StateAveraged {
            let total = tangents
                .iter()
                .zip(&rs)
                .fold(DVector::zeros(cfg.pool.len()), |acc: DVector<f64>, (t, r)| acc + t.gradient(r));
            let norm = total.norm();
            for g in grad_norms.iter_mut() {
                *g = norm;
            }
        }
        Ok(Analysis { d, tangents, rs, grad_norms })
    }

    fn make_report(&self, a_norms: Vec<f64>) -> Result<MsStepReport> {
        let sp = &self.space;
        let n = sp.len();
        let mut h_orig = DMatrix::zeros(n, n);
        let hs: Vec<StateVector> = sp.states.iter().map(|s| s.apply(&self.h)).collect::<Result<_>>()?;
        for i in 0..n {
            for j in 0..n {
                h_orig[(i, j)] = 0.5
                    * (dot(sp.states[i].amplitudes(), hs[j].amplitudes()).re
                        + dot(hs[i].amplitudes(), sp.states[j].amplitudes()).re);
            }
        }
        let effective = effective_spectrum(&h_orig, &sp.s)?;
        let s2 = sp
            .states
            .iter()
            .map(|st| self.cfg.s2.as_ref().map(|op| st.expectation(op)).transpose())
            .collect::<Result<_>>()?;
        Ok(MsStepReport {
            ell: self.ell,
            beta: self.ell as f64 * self.cfg.dbeta,
            energies: (0..n).map(|i| h_orig[(i, i)]).collect(),
            s2,
            grad_norms: self.analysis.grad_norms.clone(),
            a_norms,
            effective,
            max_offdiag_overlap: sp.max_offdiag_overlap(),
        })
    }

    pub fn space(&self) -> &ModelSpace {
        &self.space
    }

    pub fn history(&self) -> &DMatrixHistory {
        &self.history
    }

    /// The propagated Hamiltonian (spin-shifted when configured).
    pub fn propagator_hamiltonian(&self) -> &PauliSum {
        &self.h_prop
    }

    pub fn report(&self) -> &MsStepReport {
        &self.last
    }

    /// `d` for the current space.
    pub fn d(&self) -> &DMatrix<f64> {
        &self.analysis.d
    }

    pub fn is_converged(&self) -> bool {
        self.last.grad_norms.iter().all(|&g| g < self.cfg.grad_tol)
    }

    pub fn is_done(&self) -> bool {
        self.is_converged() || self.last.beta >= self.cfg.beta_max - 1e-9 * self.cfg.dbeta
    }

    pub fn step(&mut self) -> Result<MsStepReport> {
        let n = self.space.len();
        let p = self.cfg.pool.len();
        let an = &self.analysis;
        let amplitudes: Vec<DVector<f64>> = match self.cfg.mode {
            MsqiteMode::StateSpecific => {
                (0..n).map(|i| solve_blocks(&[(&an.tangents[i].g, &an.rs[i])], p, self.cfg.reg)).collect()
            }
            MsqiteMode::StateAveraged => {
                let blocks: Vec<(&DMatrix<f64>, &DVector<f64>)> =
                    an.tangents.iter().zip(&an.rs).map(|(t, r)| (&t.g, r)).collect();
                vec![solve_blocks(&blocks, p, self.cfg.reg); n]
            }
        };
        let mut states = self.space.states.clone();
        for (s, a) in states.iter_mut().zip(&amplitudes) {
            apply_product(s, &self.cfg.pool.generators, a, self.cfg.dbeta);
            s.normalize()?;
        }
        let space = ModelSpace::new(states, &self.h_prop)?;
        let analysis = Self::analyze(&space, &self.h_prop_traceless, &self.cfg)?;
        if let Some(last) = self.history.records.last_mut() {
            last.d = Some(self.analysis.d.clone());
        }
        self.history.records.push(MsRecord {
            s: space.s.clone(),
            h: space.h.clone(),
            energies: space.energies.clone(),
            d: None,
        });
        self.space = space;
        self.analysis = analysis;
        self.ell += 1;
        self.last = self.make_report(amplitudes.iter().map(|a| a.norm()).collect())?;
        Ok(self.last.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_is_identity_for_matched_energies() {
        let s = DMatrix::identity(2, 2);
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.5]);
        let d = lowdin_d(&s, &h, &[-1.0, 0.5], 0.1).unwrap();
        assert!((d - DMatrix::<f64>::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn d_for_offdiagonal_coupling() {
        let s = DMatrix::identity(2, 2);
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 0.1, 0.1, 0.0]);
        let d = lowdin_d(&s, &h, &[0.0, 0.0], 0.1).unwrap();
        // S~ = [[1, -0.02], [-0.02, 1]] has eigenvalues 0.98, 1.02 on (1,1), (1,-1)
        let a = 0.5 * (1.0 / 0.98f64.sqrt() + 1.0 / 1.02f64.sqrt());
        let b = 0.5 * (1.0 / 0.98f64.sqrt() - 1.0 / 1.02f64.sqrt());
        let expect = DMatrix::from_row_slice(2, 2, &[a, b, b, a]);
        assert!((d - expect).norm() < 1e-12);
    }

    #[test]
    fn d_rejects_indefinite() {
        let s = DMatrix::identity(2, 2);
        let h = DMatrix::from_row_slice(2, 2, &[0.0, 10.0, 10.0, 0.0]);
        assert!(matches!(lowdin_d(&s, &h, &[0.0, 0.0], 0.1), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn spin_shift_validation() {
        let h = PauliSum::zero(2).unwrap();
        let s2 = PauliSum::zero(2).unwrap();
        assert!(shift_hamiltonian_spin(&h, &s2, -0.5, 0.0).is_err());
        assert!(shift_hamiltonian_spin(&h, &s2, 0.5, 0.3).is_err());
        let r = shift_hamiltonian_spin(&h, &s2, 0.5, 1.0).unwrap();
        assert_eq!(r, PauliSum::identity(2, -1.0).unwrap());
    }
}
