//! Pauli strings in symplectic form and sparse weighted sums of them.
//!
//! A string is stored as a pair of bit masks. Bit `q` of `x` marks an X or Y
//! on qubit `q`, bit `q` of `z` marks a Z or Y. The operator represented by a
//! string is the Hermitian product `i^{|x & z|} X^x Z^z`, so a Y on a qubit is
//! exactly `i X Z` there and every string squares to the identity.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Coefficients with modulus below this are removed from every sum.
pub const DROP_TOL: f64 = 1e-12;

/// Largest register a string can address.
pub const MAX_QUBITS: usize = 64;

const PHASES: [Complex64; 4] =
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)];

/// `i^k` for `k` taken modulo 4.
#[inline]
pub fn i_pow(k: u32) -> Complex64 {
    PHASES[(k & 3) as usize]
}

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Unweighted Pauli string. Field order gives the canonical `(z, x)` ordering.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub z: u64,
    pub x: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { z: 0, x: 0 };

    pub const fn new(x: u64, z: u64) -> Self {
        PauliString { z, x }
    }

    pub fn single(op: Pauli, qubit: usize) -> Self {
        let bit = 1u64 << qubit;
        match op {
            Pauli::I => Self::IDENTITY,
            Pauli::X => Self::new(bit, 0),
            Pauli::Y => Self::new(bit, bit),
            Pauli::Z => Self::new(0, bit),
        }
    }

    /// Builds a string from `(letter, qubit)` pairs. Repeated qubits multiply
    /// and the resulting phase is returned alongside.
    pub fn from_ops(ops: &[(Pauli, usize)]) -> (u32, Self) {
        ops.iter().fold((0, Self::IDENTITY), |(k, acc), &(op, q)| {
            let (k2, s) = acc.mul(&Self::single(op, q));
            (k + k2, s)
        })
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let bit = 1u64 << qubit;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Number of Y factors.
    #[inline]
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Qubits on which the string acts non-trivially.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> u32 {
        self.support().count_ones()
    }

    /// Highest qubit index touched, or `None` for the identity.
    pub fn max_qubit(&self) -> Option<usize> {
        let s = self.support();
        if s == 0 {
            None
        } else {
            Some(63 - s.leading_zeros() as usize)
        }
    }

    #[inline]
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Product `self * other = i^k * result`, returning `(k mod 4, result)`.
    #[inline]
    pub fn mul(&self, other: &PauliString) -> (u32, PauliString) {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // i^{y1} X^x1 Z^z1 i^{y2} X^x2 Z^z2 = i^{y1+y2} (-1)^{|z1 x2|} X^x Z^z
        // and X^x Z^z = i^{-y} (string with masks x, z).
        let y3 = (x & z).count_ones();
        let sign = 2 * (self.z & other.x).count_ones();
        let k = self.y_count() + other.y_count() + sign + 4 * 64 - y3;
        (k & 3, PauliString { z, x })
    }

    /// Action on a computational basis state: `sigma |i> = phase * |i ^ x>`.
    #[inline]
    pub fn apply_to_basis(&self, index: usize) -> (usize, Complex64) {
        let parity = ((index as u64) & self.z).count_ones();
        (index ^ self.x as usize, i_pow(self.y_count() + 2 * parity))
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn to_dense(&self, n_qubits: usize) -> DMatrix<Complex64> {
        let dim = 1usize << n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (row, ph) = self.apply_to_basis(col);
            m[(row, col)] = ph;
        }
        m
    }

    /// Display over `n_qubits`, qubit 0 leftmost.
    pub fn label(&self, n_qubits: usize) -> alloc::string::String {
        (0..n_qubits).map(|q| self.get(q).letter()).collect()
    }
}

impl fmt::Display for PauliString {
    /// Sparse form `X0 Z2`; the identity prints as `I`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("I");
        }
        let mut first = true;
        for q in 0..MAX_QUBITS {
            let p = self.get(q);
            if p != Pauli::I {
                if !first {
                    f.write_str(" ")?;
                }
                write!(f, "{}{}", p.letter(), q)?;
                first = false;
            }
        }
        Ok(())
    }
}

fn check_width(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::InvalidArgument("qubit count must be in 1..=64"));
    }
    Ok(())
}

fn check_fits(s: &PauliString, n_qubits: usize) -> Result<()> {
    match s.max_qubit() {
        Some(q) if q >= n_qubits => Err(Error::IndexOutOfRange { index: q, bound: n_qubits }),
        _ => Ok(()),
    }
}

/// A weighted Pauli string on a fixed register.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliTerm {
    pub n_qubits: usize,
    pub string: PauliString,
    pub coeff: Complex64,
}

impl PauliTerm {
    pub fn new(n_qubits: usize, string: PauliString, coeff: Complex64) -> Result<Self> {
        check_width(n_qubits)?;
        check_fits(&string, n_qubits)?;
        Ok(PauliTerm { n_qubits, string, coeff })
    }

    /// Unit-coefficient term from `(letter, qubit)` pairs.
    pub fn from_ops(n_qubits: usize, ops: &[(Pauli, usize)]) -> Result<Self> {
        let (k, s) = PauliString::from_ops(ops);
        Self::new(n_qubits, s, i_pow(k))
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, PauliString::IDENTITY, Complex64::new(1.0, 0.0))
    }

    pub fn mul(&self, other: &PauliTerm) -> Result<PauliTerm> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        let (k, s) = self.string.mul(&other.string);
        Ok(PauliTerm { n_qubits: self.n_qubits, string: s, coeff: self.coeff * other.coeff * i_pow(k) })
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        self.string.to_dense(self.n_qubits) * self.coeff
    }
}

/// Sparse sum of Pauli strings with merged, pruned coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(PauliSum { n_qubits, terms: BTreeMap::new() })
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Result<Self> {
        let mut s = Self::zero(n_qubits)?;
        s.add_string(PauliString::IDENTITY, Complex64::new(coeff, 0.0));
        Ok(s)
    }

    pub fn from_term(term: &PauliTerm) -> Self {
        let mut s = PauliSum { n_qubits: term.n_qubits, terms: BTreeMap::new() };
        s.add_string(term.string, term.coeff);
        s
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut s = Self::zero(n_qubits)?;
        for (p, c) in terms {
            check_fits(&p, n_qubits)?;
            s.add_string(p, c);
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical `(z, x)` order.
    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn terms(&self) -> impl Iterator<Item = PauliTerm> + '_ {
        self.terms.iter().map(move |(s, c)| PauliTerm { n_qubits: self.n_qubits, string: *s, coeff: *c })
    }

    pub fn coeff(&self, s: &PauliString) -> Complex64 {
        self.terms.get(s).copied().unwrap_or_default()
    }

    /// Coefficient of the identity string.
    pub fn constant(&self) -> Complex64 {
        self.coeff(&PauliString::IDENTITY)
    }

    /// Adds `c * s`, merging with any existing entry and pruning below
    /// [`DROP_TOL`]. The string is assumed to fit the register.
    pub fn add_string(&mut self, s: PauliString, c: Complex64) {
        let entry = self.terms.entry(s).or_default();
        *entry += c;
        if entry.norm() < DROP_TOL {
            self.terms.remove(&s);
        }
    }

    pub fn add_term(&mut self, t: &PauliTerm) -> Result<()> {
        self.check_same(t.n_qubits)?;
        self.add_string(t.string, t.coeff);
        Ok(())
    }

    fn check_same(&self, n: usize) -> Result<()> {
        if self.n_qubits != n {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: n });
        }
        Ok(())
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other.n_qubits)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_string(*s, *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, f: Complex64) -> PauliSum {
        let mut out = PauliSum { n_qubits: self.n_qubits, terms: BTreeMap::new() };
        for (s, c) in &self.terms {
            out.add_string(*s, *c * f);
        }
        out
    }

    /// Adds `c * I`.
    pub fn shifted(&self, c: f64) -> PauliSum {
        let mut out = self.clone();
        out.add_string(PauliString::IDENTITY, Complex64::new(c, 0.0));
        out
    }

    /// Operator product `self * other`, expanded and merged.
    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        self.check_same(other.n_qubits)?;
        // accumulate without pruning so cancellations are decided on the total
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (s1, c1) in &self.terms {
            for (s2, c2) in &other.terms {
                let (k, s) = s1.mul(s2);
                *acc.entry(s).or_default() += *c1 * *c2 * i_pow(k);
            }
        }
        Ok(Self::pruned(self.n_qubits, acc))
    }

    fn pruned(n_qubits: usize, acc: BTreeMap<PauliString, Complex64>) -> PauliSum {
        let terms = acc.into_iter().filter(|(_, c)| c.norm() >= DROP_TOL).collect();
        PauliSum { n_qubits, terms }
    }

    pub fn mul_term(&self, t: &PauliTerm) -> Result<PauliSum> {
        self.mul(&PauliSum::from_term(t))
    }

    /// `[self, s]`. Commuting pairs are skipped; every anticommuting pair
    /// contributes `2 c_m sigma_m s`.
    pub fn commutator(&self, s: &PauliTerm) -> Result<PauliSum> {
        self.check_same(s.n_qubits)?;
        let mut acc: BTreeMap<PauliString, Complex64> = BTreeMap::new();
        for (hs, hc) in &self.terms {
            if hs.commutes_with(&s.string) {
                continue;
            }
            let (k, p) = hs.mul(&s.string);
            *acc.entry(p).or_default() += *hc * s.coeff * i_pow(k) * 2.0;
        }
        Ok(Self::pruned(self.n_qubits, acc))
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> PauliSum {
        PauliSum { n_qubits: self.n_qubits, terms: self.terms.iter().map(|(s, c)| (*s, c.conj())).collect() }
    }

    /// True when every coefficient is real to within `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// Drops imaginary parts below `tol`; fails if a larger one is present.
    pub fn into_hermitian(self, tol: f64) -> Result<PauliSum> {
        if !self.is_hermitian(tol) {
            return Err(Error::NotHermitian);
        }
        let terms = self
            .terms
            .into_iter()
            .map(|(s, c)| (s, Complex64::new(c.re, 0.0)))
            .filter(|(_, c)| c.norm() >= DROP_TOL)
            .collect();
        Ok(PauliSum { n_qubits: self.n_qubits, terms })
    }

    /// Sum of coefficient moduli, excluding the identity. Bounds the spectral
    /// radius of the traceless part.
    pub fn traceless_norm_bound(&self) -> f64 {
        self.terms.iter().filter(|(s, _)| !s.is_identity()).map(|(_, c)| c.norm()).sum()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (s, c) in &self.terms {
            for col in 0..dim {
                let (row, ph) = s.apply_to_basis(col);
                m[(row, col)] += ph * *c;
            }
        }
        m
    }

    /// Strings in canonical order.
    pub fn strings(&self) -> Vec<PauliString> {
        self.terms.keys().copied().collect()
    }
}

/// `[h, s]` for a sum and a single term.
pub fn commutator(h: &PauliSum, s: &PauliTerm) -> Result<PauliSum> {
    h.commutator(s)
}
