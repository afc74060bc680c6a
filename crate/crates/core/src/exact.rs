//! Reference propagators and spectra: Taylor-series imaginary-time evolution
//! and dense diagonalization.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::state::{apply_sum_into, StateVector};

/// Default qubit ceiling for dense diagonalization.
pub const DENSE_LIMIT: usize = 14;

const SERIES_TOL: f64 = 1e-14;
const SERIES_CAP: usize = 400;
/// Terms larger than this multiple of the result would swamp its precision.
const SERIES_GROWTH_LIMIT: f64 = 1e6;

/// `e^{-tau (H - E)} |psi> / norm` with `E = <psi|H|psi>`, together with
/// `c = <psi|e^{-2 tau H}|psi>`.
pub fn exact_ite(state: &StateVector, h: &PauliSum, tau: f64) -> Result<(StateVector, f64)> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument("imaginary time step must be positive"));
    }
    if h.n_qubits() != state.n_qubits() {
        return Err(Error::QubitMismatch { left: h.n_qubits(), right: state.n_qubits() });
    }
    let mut psi = state.clone();
    psi.normalize()?;
    let energy = psi.expectation(h)?;
    let radius = h.traceless_norm_bound() + (h.constant().re - energy).abs();

    let dim = psi.dim();
    let mut term: Vec<Complex64> = psi.amplitudes().to_vec();
    let mut sum = term.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    let mut largest = 1.0f64;
    let mut converged = false;
    for k in 1..=SERIES_CAP {
        apply_sum_into(h, &term, &mut scratch);
        let f = -tau / k as f64;
        let mut tn = 0.0;
        for i in 0..dim {
            let v = (scratch[i] - term[i] * energy) * f;
            term[i] = v;
            sum[i] += v;
            tn += v.norm_sqr();
        }
        let tn = tn.sqrt();
        let sn = sum.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        largest = largest.max(tn);
        if largest > SERIES_GROWTH_LIMIT * sn {
            return Err(Error::SeriesNotConverged { terms: k });
        }
        if tn <= SERIES_TOL * sn && k as f64 >= tau * radius {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SeriesNotConverged { terms: SERIES_CAP });
    }
    let mut out = StateVector::from_raw(state.n_qubits(), sum)?;
    let norm = out.normalize()?;
    let c = (-2.0 * tau * energy).exp() * norm * norm;
    Ok((out, c))
}

/// [`exact_ite`] over `tau` split into sub-steps short enough for the series.
/// The returned `c` is the product of the sub-step factors.
pub fn exact_ite_composed(state: &StateVector, h: &PauliSum, tau: f64) -> Result<(StateVector, f64)> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument("imaginary time step must be positive"));
    }
    let radius = h.traceless_norm_bound().max(1e-300);
    let mut pieces = ((tau * radius) / 2.0).ceil().max(1.0) as usize;
    loop {
        let dt = tau / pieces as f64;
        let mut psi = state.clone();
        let mut log_c = 0.0;
        let mut failed = false;
        for _ in 0..pieces {
            match exact_ite(&psi, h, dt) {
                Ok((next, c)) => {
                    psi = next;
                    log_c += c.ln();
                }
                Err(Error::SeriesNotConverged { .. }) => {
                    failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !failed {
            return Ok((psi, log_c.exp()));
        }
        if pieces > 1 << 20 {
            return Err(Error::SeriesNotConverged { terms: SERIES_CAP });
        }
        pieces *= 2;
    }
}

/// Computational basis indices with fixed alpha (even qubit) and beta (odd
/// qubit) occupation counts.
pub fn sector_basis(n_qubits: usize, n_alpha: usize, n_beta: usize) -> Vec<usize> {
    let even: u64 = (0..n_qubits).step_by(2).map(|q| 1u64 << q).sum();
    (0..1usize << n_qubits)
        .filter(|&i| {
            let i = i as u64;
            (i & even).count_ones() as usize == n_alpha && (i & !even).count_ones() as usize == n_beta
        })
        .collect()
}

/// Eigenpairs of an operator restricted to a list of basis indices.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub n_qubits: usize,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns are eigenvectors over `basis`.
    pub eigenvectors: DMatrix<Complex64>,
    pub basis: Vec<usize>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvector `k` embedded in the full register.
    pub fn vector(&self, k: usize) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n_qubits];
        for (r, &i) in self.basis.iter().enumerate() {
            amps[i] = self.eigenvectors[(r, k)];
        }
        StateVector::from_raw(self.n_qubits, amps).expect("dimension fixed at construction")
    }

    /// `|| H v_k - lambda_k v_k ||`.
    pub fn residual(&self, h: &PauliSum, k: usize) -> Result<f64> {
        let v = self.vector(k);
        let hv = v.apply(h)?;
        Ok(hv
            .amplitudes()
            .iter()
            .zip(v.amplitudes())
            .map(|(a, b)| (a - b * self.eigenvalues[k]).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// `<v_k|op|v_k>` for every eigenvector.
    pub fn expectations(&self, op: &PauliSum) -> Result<Vec<f64>> {
        (0..self.len()).map(|k| self.vector(k).expectation(op)).collect()
    }
}

fn is_real_operator(h: &PauliSum) -> bool {
    h.iter().all(|(s, c)| if s.y_count() % 2 == 0 { c.im == 0.0 } else { c.re == 0.0 })
}

/// Full spectrum of `h`.
pub fn exact_diag(h: &PauliSum) -> Result<SpectralDecomposition> {
    let n = h.n_qubits();
    if n > DENSE_LIMIT {
        return Err(Error::DenseLimit { n_qubits: n, limit: DENSE_LIMIT });
    }
    exact_diag_sector(h, &(0..1usize << n).collect::<Vec<_>>())
}

/// Spectrum of `h` projected onto the span of `basis`. Exact when `h` leaves
/// that span invariant.
pub fn exact_diag_sector(h: &PauliSum, basis: &[usize]) -> Result<SpectralDecomposition> {
    let n = h.n_qubits();
    if n > 26 {
        return Err(Error::DenseLimit { n_qubits: n, limit: 26 });
    }
    let full = 1usize << n;
    let dim = basis.len();
    if dim > 1 << DENSE_LIMIT {
        return Err(Error::DenseLimit { n_qubits: n, limit: DENSE_LIMIT });
    }
    if !h.is_hermitian(1e-12) {
        return Err(Error::NotHermitian);
    }
    let mut pos = vec![usize::MAX; full];
    for (r, &i) in basis.iter().enumerate() {
        if i >= full {
            return Err(Error::IndexOutOfRange { index: i, bound: full });
        }
        pos[i] = r;
    }
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for (col, &i) in basis.iter().enumerate() {
        for (s, c) in h.iter() {
            let (j, ph) = s.apply_to_basis(i);
            let row = pos[j];
            if row != usize::MAX {
                m[(row, col)] += ph * *c;
            }
        }
    }
    let (eigenvalues, eigenvectors) = if is_real_operator(h) {
        let re = m.map(|c| c.re);
        let (vals, vecs) = crate::linalg::sym_eigen(&re);
        (vals, vecs.map(|v| Complex64::new(v, 0.0)))
    } else {
        crate::linalg::herm_eigen(&m)
    };
    Ok(SpectralDecomposition { n_qubits: n, eigenvalues, eigenvectors, basis: basis.to_vec() })
}
