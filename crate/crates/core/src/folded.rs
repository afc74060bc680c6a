//! Folded-spectrum QITE: imaginary-time evolution under `(H - omega)^2`.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::qite::{Qite, QiteConfig, StepReport};
use crate::state::StateVector;

/// `(H - omega)^2`, expanded and merged.
pub fn fold_hamiltonian(h: &PauliSum, omega: f64) -> Result<PauliSum> {
    if !h.is_hermitian(1e-12) {
        return Err(Error::NotHermitian);
    }
    let shifted = h.shifted(-omega);
    shifted.mul(&shifted)?.into_hermitian(1e-10)
}

#[derive(Clone, Debug)]
pub struct FoldedConfig {
    pub omega: f64,
    /// Step in the folded imaginary time, in a.u.^2.
    pub dbeta2: f64,
    /// Remaining QITE settings; its `dbeta` is replaced by `dbeta2` and its
    /// `beta_max` is measured in the folded time.
    pub inner: QiteConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldedReport {
    /// Row of the underlying run; its `energy` is `<(H - omega)^2>` and its
    /// `beta` is the folded time.
    pub step: StepReport,
    /// `<H>`.
    pub energy: f64,
    pub beta2: f64,
    pub beta: f64,
}

impl FoldedReport {
    pub fn folded_residual(&self) -> f64 {
        self.step.energy
    }
}

/// Stepwise folded-spectrum driver.
pub struct Fsqite {
    h: PauliSum,
    inner: Qite,
}

impl Fsqite {
    pub fn new(init: &StateVector, h: &PauliSum, cfg: FoldedConfig) -> Result<Fsqite> {
        if !(cfg.dbeta2 > 0.0) || !cfg.omega.is_finite() {
            return Err(Error::InvalidArgument("dbeta2 must be positive and omega finite"));
        }
        let folded = fold_hamiltonian(h, cfg.omega)?;
        let mut inner_cfg = cfg.inner;
        inner_cfg.dbeta = cfg.dbeta2;
        let inner = Qite::new(init, &folded, inner_cfg)?;
        Ok(Fsqite { h: h.clone(), inner })
    }

    fn wrap(&self, step: StepReport) -> Result<FoldedReport> {
        let energy = self.inner.state().expectation(&self.h)?;
        Ok(FoldedReport { beta2: step.beta, beta: step.beta.sqrt(), energy, step })
    }

    pub fn report(&self) -> Result<FoldedReport> {
        self.wrap(self.inner.report().clone())
    }

    pub fn state(&self) -> &StateVector {
        self.inner.state()
    }

    pub fn is_done(&self) -> bool {
        self.inner.is_done()
    }

    pub fn step(&mut self) -> Result<FoldedReport> {
        let rep = self.inner.step()?;
        self.wrap(rep)
    }
}

/// Runs the folded propagation until its convergence or time limit.
pub fn run_fsqite(init: &StateVector, h: &PauliSum, cfg: FoldedConfig) -> Result<(Vec<FoldedReport>, StateVector)> {
    let mut run = Fsqite::new(init, h, cfg)?;
    let mut out = alloc::vec![run.report()?];
    while !run.is_done() {
        out.push(run.step()?);
    }
    Ok((out, run.state().clone()))
}
