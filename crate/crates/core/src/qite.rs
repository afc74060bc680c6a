//! Single-state QITE: metric, gradient, amplitude solve and Trotterized step.
//!
//! For a state `|Phi>` and pool `{sigma_mu}` the tangent columns
//! `g_mu = sigma_mu |Phi>` are stored as a real `2R x P` matrix `G` holding the
//! real parts of the nonzero rows on top of the imaginary parts. Then
//! `M = 2 G^T G` and every gradient used here has the form `b = 2 G^T r` for a
//! vector `r` derived from `H|Phi>` (and, in the model-space case, from the
//! other states). The amplitude solve works on `G` directly and picks the
//! cheaper of the `P x P` metric and the `2R x 2R` kernel `G G^T`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::exact::exact_ite;
use crate::fermion::OperatorPool;
use crate::linalg::{solve_amplitudes, sym_eigen};
use crate::pauli::{i_pow, PauliString, PauliSum};
use crate::state::StateVector;

/// Right-hand side of the linear system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BVariant {
    /// `b = Im <Phi|[H, sigma]|Phi>`.
    Commutator,
    /// `b = (2 / sqrt c) Im <Phi|H sigma|Phi>` with `c = 1 - 2 dbeta <H>`.
    Legacy,
}

impl core::str::FromStr for BVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "commutator" => Ok(BVariant::Commutator),
            "legacy" => Ok(BVariant::Legacy),
            _ => Err(Error::InvalidArgument("unknown b variant")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QiteConfig {
    pub dbeta: f64,
    pub beta_max: f64,
    pub b_variant: BVariant,
    pub reg: f64,
    pub grad_tol: f64,
    pub pool: OperatorPool,
    /// Reported per step when present.
    pub s2: Option<PauliSum>,
    /// Compute the per-step fidelity error against the exact propagator.
    pub track_fidelity: bool,
}

impl QiteConfig {
    pub fn new(pool: OperatorPool, dbeta: f64) -> Self {
        QiteConfig {
            dbeta,
            beta_max: 20.0,
            b_variant: BVariant::Commutator,
            reg: 0.0,
            grad_tol: 1e-6,
            pool,
            s2: None,
            track_fidelity: false,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        if !(self.dbeta > 0.0) || !self.dbeta.is_finite() {
            return Err(Error::InvalidArgument("dbeta must be positive"));
        }
        if !(self.beta_max >= self.dbeta) {
            return Err(Error::InvalidArgument("beta_max must be at least dbeta"));
        }
        if !(self.reg >= 0.0) {
            return Err(Error::InvalidArgument("reg must be non-negative"));
        }
        if !(self.grad_tol >= 0.0) {
            return Err(Error::InvalidArgument("grad_tol must be non-negative"));
        }
        if self.pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        if self.pool.n_qubits != n_qubits {
            return Err(Error::QubitMismatch { left: self.pool.n_qubits, right: n_qubits });
        }
        if let Some(s2) = &self.s2 {
            if s2.n_qubits() != n_qubits {
                return Err(Error::QubitMismatch { left: s2.n_qubits(), right: n_qubits });
            }
        }
        Ok(())
    }
}

/// One row of a QITE trace. Row `ell` describes the state after `ell` steps.
#[derive(Clone, Debug, PartialEq)]
pub struct StepReport {
    pub ell: usize,
    pub beta: f64,
    pub energy: f64,
    pub grad_norm: f64,
    pub fidelity_f: Option<f64>,
    pub s2: Option<f64>,
    /// Norm of the amplitudes applied to reach this row (0 for the first).
    pub a_norm: f64,
}

/// Tangent columns `sigma_mu |Phi>` restricted to the rows they touch.
#[derive(Clone, Debug)]
pub(crate) struct Tangent {
    pub rows: Vec<usize>,
    /// `2R x P`: real parts over imaginary parts.
    pub g: DMatrix<f64>,
}

impl Tangent {
    pub fn new(state: &StateVector, pool: &[PauliString]) -> Tangent {
        let amps = state.amplitudes();
        let dim = amps.len();
        let support: Vec<usize> = (0..dim).filter(|&i| amps[i] != Complex64::new(0.0, 0.0)).collect();
        let mut mark = vec![false; dim];
        for s in pool {
            let x = s.x as usize;
            for &i in &support {
                mark[i ^ x] = true;
            }
        }
        let rows: Vec<usize> = (0..dim).filter(|&i| mark[i]).collect();
        let mut pos = vec![usize::MAX; dim];
        for (r, &i) in rows.iter().enumerate() {
            pos[i] = r;
        }
        let nr = rows.len();
        let mut g = DMatrix::zeros(2 * nr, pool.len());
        let fill = |s: &PauliString, col: &mut [f64]| {
            let base = i_pow(s.y_count());
            let x = s.x as usize;
            let z = s.z as usize;
            for &i in &support {
                let mut v = base * amps[i];
                if (i & z).count_ones() % 2 == 1 {
                    v = -v;
                }
                let r = pos[i ^ x];
                col[r] = v.re;
                col[nr + r] = v.im;
            }
        };
        let h = 2 * nr;
        if h > 0 {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                g.as_mut_slice().par_chunks_mut(h).zip(pool.par_iter()).for_each(|(col, s)| fill(s, col));
            }
            #[cfg(not(feature = "parallel"))]
            for (col, s) in g.as_mut_slice().chunks_mut(h).zip(pool) {
                fill(s, col);
            }
        }
        Tangent { rows, g }
    }

    /// `r` such that `2 G^T r` is the vector `2 Im <w|sigma_mu Phi>`.
    pub fn project(&self, w: &[Complex64]) -> DVector<f64> {
        let nr = self.rows.len();
        let mut r = DVector::zeros(2 * nr);
        for (k, &i) in self.rows.iter().enumerate() {
            r[k] = -w[i].im;
            r[nr + k] = w[i].re;
        }
        r
    }

    pub fn metric(&self) -> DMatrix<f64> {
        self.g.tr_mul(&self.g) * 2.0
    }

    pub fn gradient(&self, r: &DVector<f64>) -> DVector<f64> {
        self.g.tr_mul(r) * 2.0
    }
}

/// Solves `(sum M_k) a = -(sum b_k)` in the least-squares sense for stacked
/// blocks with `M_k = 2 G_k^T G_k` and `b_k = 2 G_k^T r_k`.
pub(crate) fn solve_blocks(blocks: &[(&DMatrix<f64>, &DVector<f64>)], n_params: usize, reg: f64) -> DVector<f64> {
    let total_rows: usize = blocks.iter().map(|(g, _)| g.nrows()).sum();
    if total_rows == 0 || n_params == 0 {
        return DVector::zeros(n_params);
    }
    if n_params <= total_rows {
        let mut m = DMatrix::zeros(n_params, n_params);
        let mut b = DVector::zeros(n_params);
        for (g, r) in blocks {
            m += g.tr_mul(g) * 2.0;
            b += g.tr_mul(r) * 2.0;
        }
        return solve_amplitudes(&m, &b, reg);
    }
    let mut g = DMatrix::zeros(total_rows, n_params);
    let mut r = DVector::zeros(total_rows);
    let mut at = 0;
    for (gk, rk) in blocks {
        g.view_mut((at, 0), (gk.nrows(), n_params)).copy_from(gk);
        r.rows_mut(at, rk.len()).copy_from(rk);
        at += gk.nrows();
    }
    let k = &g * g.transpose();
    let (values, vectors) = sym_eigen(&k);
    let lmax = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut coef = DVector::zeros(total_rows);
    if lmax == 0.0 {
        return DVector::zeros(n_params);
    }
    for (idx, &l) in values.iter().enumerate() {
        let w = if reg > 0.0 {
            4.0 * l / (4.0 * l * l + reg)
        } else if l.abs() > 1e-8 * lmax {
            1.0 / l
        } else {
            continue;
        };
        let u = vectors.column(idx);
        coef.axpy(w * u.dot(&r), &u, 1.0);
    }
    -(g.tr_mul(&coef))
}

/// Applies `prod_mu exp(-i theta_mu sigma_mu)` with `mu = 0` acting first.
pub(crate) fn apply_product(state: &mut StateVector, pool: &[PauliString], a: &DVector<f64>, dbeta: f64) {
    for (s, &am) in pool.iter().zip(a.iter()) {
        state.rotate(s, dbeta * am);
    }
}

/// `H` with its identity component removed.
pub(crate) fn without_identity(h: &PauliSum) -> PauliSum {
    let mut out = h.clone();
    let c = h.constant();
    if c != Complex64::new(0.0, 0.0) {
        out.add_string(PauliString::IDENTITY, -c);
    }
    out
}

fn check(state: &StateVector, h: &PauliSum, pool: &OperatorPool) -> Result<()> {
    if h.n_qubits() != state.n_qubits() {
        return Err(Error::QubitMismatch { left: h.n_qubits(), right: state.n_qubits() });
    }
    if pool.n_qubits != state.n_qubits() {
        return Err(Error::QubitMismatch { left: pool.n_qubits, right: state.n_qubits() });
    }
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    Ok(())
}

/// `M_{mu nu} = 2 Re <Phi|sigma_mu sigma_nu|Phi>`.
pub fn build_m(state: &StateVector, pool: &OperatorPool) -> Result<DMatrix<f64>> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut m = Tangent::new(state, &pool.generators).metric();
    // sigma^2 = 1 on a normalized state
    m.fill_diagonal(2.0);
    Ok(m)
}

/// Gradient vector for the chosen variant.
pub fn build_b(
    state: &StateVector,
    h: &PauliSum,
    pool: &OperatorPool,
    variant: BVariant,
    dbeta: f64,
) -> Result<DVector<f64>> {
    check(state, h, pool)?;
    let t = Tangent::new(state, &pool.generators);
    let r = rhs(state, h, &without_identity(h), &t, variant, dbeta)?;
    Ok(t.gradient(&r))
}

fn rhs(
    state: &StateVector,
    h: &PauliSum,
    h_traceless: &PauliSum,
    t: &Tangent,
    variant: BVariant,
    dbeta: f64,
) -> Result<DVector<f64>> {
    match variant {
        BVariant::Commutator => Ok(t.project(state.apply(h_traceless)?.amplitudes())),
        BVariant::Legacy => {
            let hp = state.apply(h)?;
            let e = crate::state::dot(state.amplitudes(), hp.amplitudes()).re;
            let c = 1.0 - 2.0 * dbeta * e;
            if !(c > 0.0) {
                return Err(Error::NonPositiveNorm { value: c });
            }
            Ok(t.project(hp.amplitudes()) / c.sqrt())
        }
    }
}

/// `|| e^{-dbeta H}|Phi> / sqrt c - prod exp(-i dbeta a_mu sigma_mu) |Phi> ||^2`.
pub fn step_fidelity_f(state: &StateVector, h: &PauliSum, a: &DVector<f64>, cfg: &QiteConfig) -> Result<f64> {
    if a.len() != cfg.pool.len() {
        return Err(Error::InvalidArgument("amplitude count does not match the pool"));
    }
    let mut u = state.clone();
    apply_product(&mut u, &cfg.pool.generators, a, cfg.dbeta);
    let target = if h.traceless_norm_bound() == 0.0 {
        let mut s = state.clone();
        s.normalize()?;
        s
    } else {
        exact_ite(state, h, cfg.dbeta)?.0
    };
    Ok(target.amplitudes().iter().zip(u.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum())
}

struct Analysis {
    energy: f64,
    tangent: Tangent,
    r: DVector<f64>,
    grad_norm: f64,
}

/// Stepwise QITE driver.
pub struct Qite {
    h: PauliSum,
    h_traceless: PauliSum,
    cfg: QiteConfig,
    state: StateVector,
    analysis: Analysis,
    ell: usize,
    last: StepReport,
    last_amplitudes: DVector<f64>,
}

impl Qite {
    pub fn new(init: &StateVector, h: &PauliSum, cfg: QiteConfig) -> Result<Qite> {
        cfg.validate(init.n_qubits())?;
        check(init, h, &cfg.pool)?;
        let mut state = init.clone();
        state.normalize()?;
        let h_traceless = without_identity(h);
        let analysis = Self::analyze(&state, h, &h_traceless, &cfg)?;
        let s2 = cfg.s2.as_ref().map(|op| state.expectation(op)).transpose()?;
        let last = StepReport {
            ell: 0,
            beta: 0.0,
            energy: analysis.energy,
            grad_norm: analysis.grad_norm,
            fidelity_f: None,
            s2,
            a_norm: 0.0,
        };
        let n = cfg.pool.len();
        Ok(Qite { h: h.clone(), h_traceless, cfg, state, analysis, ell: 0, last, last_amplitudes: DVector::zeros(n) })
    }

    fn analyze(state: &StateVector, h: &PauliSum, h_traceless: &PauliSum, cfg: &QiteConfig) -> Result<Analysis> {
        let energy = state.expectation(h)?;
        let tangent = Tangent::new(state, &cfg.pool.generators);
        let r = rhs(state, h, h_traceless, &tangent, cfg.b_variant, cfg.dbeta)?;
        let grad_norm = tangent.gradient(&r).norm();
        Ok(Analysis { energy, tangent, r, grad_norm })
    }

    pub fn config(&self) -> &QiteConfig {
        &self.cfg
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    /// Report for the current state.
    pub fn report(&self) -> &StepReport {
        &self.last
    }

    /// Amplitudes applied by the most recent step.
    pub fn last_amplitudes(&self) -> &DVector<f64> {
        &self.last_amplitudes
    }

    /// Amplitudes the next step would apply.
    pub fn amplitudes(&self) -> DVector<f64> {
        solve_blocks(&[(&self.analysis.tangent.g, &self.analysis.r)], self.cfg.pool.len(), self.cfg.reg)
    }

    pub fn is_converged(&self) -> bool {
        self.last.grad_norm < self.cfg.grad_tol
    }

    /// True once the gradient threshold or `beta_max` is reached.
    pub fn is_done(&self) -> bool {
        self.is_converged() || self.last.beta >= self.cfg.beta_max - 1e-9 * self.cfg.dbeta
    }

    pub fn step(&mut self) -> Result<StepReport> {
        let a = self.amplitudes();
        let mut next = self.state.clone();
        apply_product(&mut next, &self.cfg.pool.generators, &a, self.cfg.dbeta);
        let fidelity_f =
            if self.cfg.track_fidelity { Some(step_fidelity_f(&self.state, &self.h, &a, &self.cfg)?) } else { None };
        next.normalize()?;
        let analysis = Self::analyze(&next, &self.h, &self.h_traceless, &self.cfg)?;
        let s2 = self.cfg.s2.as_ref().map(|op| next.expectation(op)).transpose()?;
        self.ell += 1;
        self.last = StepReport {
            ell: self.ell,
            beta: self.ell as f64 * self.cfg.dbeta,
            energy: analysis.energy,
            grad_norm: analysis.grad_norm,
            fidelity_f,
            s2,
            a_norm: a.norm(),
        };
        self.state = next;
        self.analysis = analysis;
        self.last_amplitudes = a;
        Ok(self.last.clone())
    }
}

/// One step from `state`; returns the new state and its report.
pub fn qite_step(state: &StateVector, h: &PauliSum, cfg: &QiteConfig) -> Result<(StateVector, StepReport)> {
    let mut q = Qite::new(state, h, cfg.clone())?;
    let rep = q.step()?;
    Ok((q.state, rep))
}

/// Result of [`run_qite`].
#[derive(Clone, Debug)]
pub struct QiteTrace {
    pub reports: Vec<StepReport>,
    pub final_state: StateVector,
}

impl QiteTrace {
    /// `E^(ell)` for every row.
    pub fn energies(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.energy).collect()
    }
}

/// Iterates until `beta_max` or `|b| < grad_tol`.
pub fn run_qite(init: &StateVector, h: &PauliSum, cfg: &QiteConfig) -> Result<QiteTrace> {
    let mut q = Qite::new(init, h, cfg.clone())?;
    let mut reports = vec![q.report().clone()];
    while !q.is_done() {
        reports.push(q.step()?);
    }
    Ok(QiteTrace { reports, final_state: q.state })
}
