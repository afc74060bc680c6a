//! Dense statevectors. Qubit `q` is bit `q` of the amplitude index, so the
//! rightmost character of a printed ket is qubit 0.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent once std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::pauli::{i_pow, PauliString, PauliSum, PauliTerm};

/// Largest register a dense statevector is allowed to allocate.
pub const MAX_STATE_QUBITS: usize = 26;

/// Recipe for an initial state.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateSpec {
    /// Single occupation pattern.
    Determinant(u64),
    /// `(|a> + (-1)^s |b>) / sqrt 2`.
    Pair { a: u64, b: u64, s: u32 },
}

/// Parses a ket label such as `0011` into its basis index.
pub fn parse_bits(text: &str, n_qubits: usize) -> Result<u64> {
    if text.len() != n_qubits {
        return Err(Error::InvalidArgument("bitstring length does not match qubit count"));
    }
    let mut v = 0u64;
    for ch in text.chars() {
        v <<= 1;
        match ch {
            '0' => {}
            '1' => v |= 1,
            _ => return Err(Error::InvalidArgument("bitstring may only contain 0 and 1")),
        }
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_STATE_QUBITS {
        return Err(Error::InvalidArgument("statevector qubit count out of range"));
    }
    Ok(())
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: u64) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index as usize >= dim || (n_qubits < 64 && index >> n_qubits != 0) {
            return Err(Error::IndexOutOfRange { index: index as usize, bound: dim });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Normalized copy of the given amplitudes.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::InvalidArgument("amplitude count is not 2^n"));
        }
        let mut s = StateVector { n_qubits, amps };
        s.normalize()?;
        Ok(s)
    }

    /// Amplitudes taken verbatim, without normalization.
    pub fn from_raw(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::InvalidArgument("amplitude count is not 2^n"));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn prepare(n_qubits: usize, spec: StateSpec) -> Result<Self> {
        match spec {
            StateSpec::Determinant(bits) => Self::basis(n_qubits, bits),
            StateSpec::Pair { a, b, s } => {
                if a == b {
                    return Err(Error::InvalidArgument("open-shell pair needs two distinct patterns"));
                }
                if a.count_ones() != b.count_ones() {
                    return Err(Error::InvalidArgument("open-shell pair patterns differ in particle number"));
                }
                let mut st = Self::basis(n_qubits, a)?;
                Self::basis(n_qubits, b)?;
                let h = 1.0 / 2f64.sqrt();
                let sign = if s % 2 == 0 { h } else { -h };
                st.amps[a as usize] = Complex64::new(h, 0.0);
                st.amps[b as usize] = Complex64::new(sign, 0.0);
                Ok(st)
            }
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) -> Result<f64> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument("state has zero or non-finite norm"));
        }
        let inv = 1.0 / n;
        for c in &mut self.amps {
            *c *= inv;
        }
        Ok(n)
    }

    fn check_same(&self, other: &StateVector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(dot(&self.amps, &other.amps))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// `op |self>` without normalization.
    pub fn apply(&self, op: &PauliSum) -> Result<StateVector> {
        if op.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch { left: op.n_qubits(), right: self.n_qubits });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        apply_sum_into(op, &self.amps, &mut out);
        Ok(StateVector { n_qubits: self.n_qubits, amps: out })
    }

    /// `sigma |self>` for a bare string.
    pub fn apply_string(&self, s: &PauliString) -> StateVector {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        apply_string_into(s, &self.amps, &mut out);
        StateVector { n_qubits: self.n_qubits, amps: out }
    }

    /// `<self|op|self>` real part. Hermitian operators only.
    pub fn expectation(&self, op: &PauliSum) -> Result<f64> {
        Ok(braket(self, Some(op), self)?.re)
    }

    /// In-place `exp(-i theta sigma)`.
    pub fn rotate(&mut self, s: &PauliString, theta: f64) {
        rotate_in_place(&mut self.amps, s, theta);
    }

    /// Returns `exp(-i theta sigma) |self>`. The term must carry coefficient 1.
    pub fn apply_pauli_rotation(&self, sigma: &PauliTerm, theta: f64) -> Result<StateVector> {
        if sigma.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch { left: sigma.n_qubits, right: self.n_qubits });
        }
        if sigma.coeff != Complex64::new(1.0, 0.0) {
            return Err(Error::NonUnitCoefficient);
        }
        let mut out = self.clone();
        out.rotate(&sigma.string, theta);
        Ok(out)
    }
}

/// `<bra|op|ket>`, or `<bra|ket>` when `op` is `None`.
pub fn braket(bra: &StateVector, op: Option<&PauliSum>, ket: &StateVector) -> Result<Complex64> {
    bra.check_same(ket)?;
    match op {
        None => Ok(dot(&bra.amps, &ket.amps)),
        Some(h) => {
            let hk = ket.apply(h)?;
            Ok(dot(&bra.amps, &hk.amps))
        }
    }
}

/// `sum conj(a_i) b_i` in index order.
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        acc += x.conj() * y;
    }
    acc
}

/// `out += sigma * amps`.
pub fn apply_string_add(s: &PauliString, coeff: Complex64, amps: &[Complex64], out: &mut [Complex64]) {
    let base = coeff * i_pow(s.y_count());
    let x = s.x as usize;
    let z = s.z as usize;
    for (i, a) in amps.iter().enumerate() {
        if *a == Complex64::new(0.0, 0.0) {
            continue;
        }
        let v = base * a;
        if (i & z).count_ones() % 2 == 0 {
            out[i ^ x] += v;
        } else {
            out[i ^ x] -= v;
        }
    }
}

/// `out = sigma * amps`.
pub fn apply_string_into(s: &PauliString, amps: &[Complex64], out: &mut [Complex64]) {
    let base = i_pow(s.y_count());
    let x = s.x as usize;
    let z = s.z as usize;
    for (i, a) in amps.iter().enumerate() {
        let v = base * a;
        out[i ^ x] = if (i & z).count_ones() % 2 == 0 { v } else { -v };
    }
}

/// `out = op * amps`.
pub fn apply_sum_into(op: &PauliSum, amps: &[Complex64], out: &mut [Complex64]) {
    for c in out.iter_mut() {
        *c = Complex64::new(0.0, 0.0);
    }
    for (s, c) in op.iter() {
        apply_string_add(s, *c, amps, out);
    }
}

/// `amps <- cos(theta) amps - i sin(theta) sigma amps`.
pub fn rotate_in_place(amps: &mut [Complex64], s: &PauliString, theta: f64) {
    if theta == 0.0 {
        return;
    }
    let (sn, cs) = theta.sin_cos();
    // -i sin(theta) * i^y
    let f = Complex64::new(0.0, -sn) * i_pow(s.y_count());
    let x = s.x as usize;
    let z = s.z as usize;
    let sign = |i: usize| if (i & z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    if x == 0 {
        for (i, a) in amps.iter_mut().enumerate() {
            *a *= Complex64::new(cs, 0.0) + f * sign(i);
        }
        return;
    }
    for i in 0..amps.len() {
        let j = i ^ x;
        if j < i {
            continue;
        }
        let ai = amps[i];
        let aj = amps[j];
        // (sigma psi)[j] = sign(i) ph psi[i], (sigma psi)[i] = sign(j) ph psi[j]
        amps[i] = ai * cs + f * sign(j) * aj;
        amps[j] = aj * cs + f * sign(i) * ai;
    }
}
