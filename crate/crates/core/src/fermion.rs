//! Molecular integrals, the Jordan–Wigner map and the operators built from it.
//!
//! Spin orbitals are interleaved: spatial orbital `P` owns qubit `2P` (alpha)
//! and `2P + 1` (beta). Qubit `j` carries a Z string over all qubits `< j`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{i_pow, PauliString, PauliSum, DROP_TOL};

/// Spin-orbital index of spatial orbital `p` with spin 0 (alpha) or 1 (beta).
#[inline]
pub fn spin_orbital(p: usize, spin: usize) -> usize {
    2 * p + spin
}

/// One- and two-electron integrals over spatial orbitals, in Hartree.
///
/// `g2` is stored in chemist order `(pr|qs)` and kept 8-fold symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOrbitalIntegrals {
    pub n_spatial: usize,
    pub n_electrons: usize,
    pub ms2: i32,
    pub e_core: f64,
    h1: Vec<f64>,
    g2: Vec<f64>,
}

impl SpinOrbitalIntegrals {
    pub fn new(n_spatial: usize, n_electrons: usize, ms2: i32) -> Result<Self> {
        if n_spatial == 0 || 2 * n_spatial > crate::pauli::MAX_QUBITS {
            return Err(Error::InvalidArgument("orbital count must be in 1..=32"));
        }
        if n_electrons > 2 * n_spatial {
            return Err(Error::InvalidArgument("more electrons than spin orbitals"));
        }
        if (n_electrons as i32 + ms2) % 2 != 0 || ms2.unsigned_abs() as usize > n_electrons {
            return Err(Error::InvalidArgument("MS2 inconsistent with electron count"));
        }
        Ok(SpinOrbitalIntegrals {
            n_spatial,
            n_electrons,
            ms2,
            e_core: 0.0,
            h1: vec![0.0; n_spatial * n_spatial],
            g2: vec![0.0; n_spatial.pow(4)],
        })
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_spatial
    }

    /// Alpha and beta electron counts.
    pub fn n_alpha_beta(&self) -> (usize, usize) {
        let n = self.n_electrons as i32;
        (((n + self.ms2) / 2) as usize, ((n - self.ms2) / 2) as usize)
    }

    #[inline]
    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h1[p * self.n_spatial + q]
    }

    /// `(pr|qs)`.
    #[inline]
    pub fn g(&self, p: usize, r: usize, q: usize, s: usize) -> f64 {
        let n = self.n_spatial;
        self.g2[((p * n + r) * n + q) * n + s]
    }

    fn check(&self, idx: &[usize]) -> Result<()> {
        for &i in idx {
            if i >= self.n_spatial {
                return Err(Error::IndexOutOfRange { index: i, bound: self.n_spatial });
            }
        }
        Ok(())
    }

    /// Sets `h_pq = h_qp = value`.
    pub fn set_h(&mut self, p: usize, q: usize, value: f64) -> Result<()> {
        self.check(&[p, q])?;
        let n = self.n_spatial;
        self.h1[p * n + q] = value;
        self.h1[q * n + p] = value;
        Ok(())
    }

    /// Sets `(pr|qs)` and all of its permutational partners.
    pub fn set_g(&mut self, p: usize, r: usize, q: usize, s: usize, value: f64) -> Result<()> {
        self.check(&[p, r, q, s])?;
        let n = self.n_spatial;
        for (a, b, c, d) in [
            (p, r, q, s),
            (r, p, q, s),
            (p, r, s, q),
            (r, p, s, q),
            (q, s, p, r),
            (s, q, p, r),
            (q, s, r, p),
            (s, q, r, p),
        ] {
            self.g2[((a * n + b) * n + c) * n + d] = value;
        }
        Ok(())
    }

    /// Spin-orbital one-electron integral.
    pub fn h_spin(&self, p: usize, q: usize) -> f64 {
        if p % 2 != q % 2 {
            return 0.0;
        }
        self.h(p / 2, q / 2)
    }

    /// Spin-orbital `(pr|qs)`.
    pub fn g_spin(&self, p: usize, r: usize, q: usize, s: usize) -> f64 {
        if p % 2 != r % 2 || q % 2 != s % 2 {
            return 0.0;
        }
        self.g(p / 2, r / 2, q / 2, s / 2)
    }

    /// Occupation bitstring of the aufbau determinant (lowest alpha and beta
    /// spatial orbitals filled).
    pub fn reference_occupation(&self) -> u64 {
        let (na, nb) = self.n_alpha_beta();
        let mut bits = 0u64;
        for p in 0..na {
            bits |= 1 << spin_orbital(p, 0);
        }
        for p in 0..nb {
            bits |= 1 << spin_orbital(p, 1);
        }
        bits
    }
}

/// A creation (`dagger`) or annihilation operator on one spin orbital.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }
    pub fn annihilate(mode: usize) -> Self {
        Ladder { mode, dagger: false }
    }
}

/// Unpruned accumulator; pruning happens once on the finished sum so that
/// intermediate cancellations cannot drop terms early.
#[derive(Default)]
struct Acc(BTreeMap<PauliString, Complex64>);

impl Acc {
    fn add(&mut self, s: PauliString, c: Complex64) {
        *self.0.entry(s).or_default() += c;
    }

    fn finish(self, n_qubits: usize) -> Result<PauliSum> {
        PauliSum::from_terms(n_qubits, self.0.into_iter().filter(|(_, c)| c.norm() >= DROP_TOL))
    }
}

/// Images of one ladder operator: two strings with coefficients `1/2` and `-+ i/2`.
fn ladder_image(l: Ladder) -> [(PauliString, Complex64); 2] {
    let bit = 1u64 << l.mode;
    let below = bit - 1;
    let x = PauliString::new(bit, below);
    let y = PauliString::new(bit, below | bit);
    let yc = if l.dagger { Complex64::new(0.0, -0.5) } else { Complex64::new(0.0, 0.5) };
    [(x, Complex64::new(0.5, 0.0)), (y, yc)]
}

/// Expands `coeff * prod(ops)` (leftmost operator applied last) into `acc`.
fn expand_product(acc: &mut Acc, coeff: Complex64, ops: &[Ladder]) {
    let mut partial: Vec<(PauliString, Complex64)> = vec![(PauliString::IDENTITY, coeff)];
    for &l in ops {
        let img = ladder_image(l);
        let mut next = Vec::with_capacity(partial.len() * 2);
        for (s, c) in &partial {
            for (t, d) in &img {
                let (k, p) = s.mul(t);
                next.push((p, *c * *d * i_pow(k)));
            }
        }
        partial = next;
    }
    for (s, c) in partial {
        acc.add(s, c);
    }
}

fn check_modes(ops: &[Ladder], n_modes: usize) -> Result<()> {
    if n_modes == 0 || n_modes > crate::pauli::MAX_QUBITS {
        return Err(Error::InvalidArgument("mode count must be in 1..=64"));
    }
    for l in ops {
        if l.mode >= n_modes {
            return Err(Error::IndexOutOfRange { index: l.mode, bound: n_modes });
        }
    }
    Ok(())
}

/// Jordan–Wigner image of `coeff * ops[0] ops[1] ...` on `n_modes` qubits.
pub fn jordan_wigner(coeff: Complex64, ops: &[Ladder], n_modes: usize) -> Result<PauliSum> {
    check_modes(ops, n_modes)?;
    let mut acc = Acc::default();
    expand_product(&mut acc, coeff, ops);
    acc.finish(n_modes)
}

/// Jordan–Wigner image of a sum of weighted ladder products.
pub fn jordan_wigner_sum(terms: &[(Complex64, Vec<Ladder>)], n_modes: usize) -> Result<PauliSum> {
    let mut acc = Acc::default();
    for (c, ops) in terms {
        check_modes(ops, n_modes)?;
        expand_product(&mut acc, *c, ops);
    }
    acc.finish(n_modes)
}

/// Qubit Hamiltonian `sum h_pq a+p a_q + 1/2 sum (pr|qs) a+p a+q a_s a_r + E_core`.
pub fn build_hamiltonian(ints: &SpinOrbitalIntegrals) -> Result<PauliSum> {
    let n = ints.n_qubits();
    let mut acc = Acc::default();
    acc.add(PauliString::IDENTITY, Complex64::new(ints.e_core, 0.0));
    for p in 0..n {
        for q in 0..n {
            let v = ints.h_spin(p, q);
            if v != 0.0 {
                expand_product(&mut acc, Complex64::new(v, 0.0), &[Ladder::create(p), Ladder::annihilate(q)]);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            if p == q {
                continue;
            }
            for r in 0..n {
                for s in 0..n {
                    if r == s {
                        continue;
                    }
                    let v = ints.g_spin(p, r, q, s);
                    if v == 0.0 {
                        continue;
                    }
                    expand_product(
                        &mut acc,
                        Complex64::new(0.5 * v, 0.0),
                        &[Ladder::create(p), Ladder::create(q), Ladder::annihilate(s), Ladder::annihilate(r)],
                    );
                }
            }
        }
    }
    acc.finish(n)?.into_hermitian(1e-10)
}

/// Spin and particle-number operators on `2 * n_spatial` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinOperators {
    pub s2: PauliSum,
    pub sz: PauliSum,
    pub number: PauliSum,
}

pub fn build_spin_ops(n_spatial: usize) -> Result<SpinOperators> {
    if n_spatial == 0 {
        return Err(Error::InvalidArgument("need at least one spatial orbital"));
    }
    let n = 2 * n_spatial;
    let one = Complex64::new(1.0, 0.0);
    let half = Complex64::new(0.5, 0.0);

    let number_terms: Vec<_> = (0..n).map(|p| (one, vec![Ladder::create(p), Ladder::annihilate(p)])).collect();
    let number = jordan_wigner_sum(&number_terms, n)?;

    let sz_terms: Vec<_> = (0..n_spatial)
        .flat_map(|p| {
            let a = spin_orbital(p, 0);
            let b = spin_orbital(p, 1);
            [
                (half, vec![Ladder::create(a), Ladder::annihilate(a)]),
                (-half, vec![Ladder::create(b), Ladder::annihilate(b)]),
            ]
        })
        .collect();
    let sz = jordan_wigner_sum(&sz_terms, n)?;

    let plus_terms: Vec<_> = (0..n_spatial)
        .map(|p| (one, vec![Ladder::create(spin_orbital(p, 0)), Ladder::annihilate(spin_orbital(p, 1))]))
        .collect();
    let s_plus = jordan_wigner_sum(&plus_terms, n)?;
    let s_minus = s_plus.adjoint();

    // S^2 = S- S+ + Sz^2 + Sz
    let s2 = s_minus.mul(&s_plus)?.add(&sz.mul(&sz)?)?.add(&sz)?.into_hermitian(1e-12)?;
    Ok(SpinOperators { s2, sz, number })
}

/// Source of a pool entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PoolKind {
    Uccsd,
    Uccgsd,
    Hamiltonian,
}

impl PoolKind {
    pub fn name(self) -> &'static str {
        match self {
            PoolKind::Uccsd => "uccsd",
            PoolKind::Uccgsd => "uccgsd",
            PoolKind::Hamiltonian => "hamiltonian",
        }
    }
}

impl core::str::FromStr for PoolKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uccsd" => Ok(PoolKind::Uccsd),
            "uccgsd" => Ok(PoolKind::Uccgsd),
            "hamiltonian" => Ok(PoolKind::Hamiltonian),
            _ => Err(Error::InvalidArgument("unknown pool kind")),
        }
    }
}

/// Ordered, duplicate-free list of Hermitian Pauli generators.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPool {
    pub n_qubits: usize,
    pub generators: Vec<PauliString>,
    pub provenance: Vec<PoolKind>,
    /// Largest integral magnitude that produced the entry (Hamiltonian pools only).
    pub source_magnitude: Vec<Option<f64>>,
}

impl OperatorPool {
    pub fn new(n_qubits: usize) -> Self {
        OperatorPool { n_qubits, generators: Vec::new(), provenance: Vec::new(), source_magnitude: Vec::new() }
    }

    /// Pool from explicit strings; duplicates and the identity are dropped.
    pub fn from_strings(n_qubits: usize, kind: PoolKind, strings: &[PauliString]) -> Result<Self> {
        let mut pool = OperatorPool::new(n_qubits);
        let mut seen = BTreeMap::new();
        for s in strings {
            if let Some(q) = s.max_qubit() {
                if q >= n_qubits {
                    return Err(Error::IndexOutOfRange { index: q, bound: n_qubits });
                }
            }
            pool.push(&mut seen, *s, kind, None);
        }
        Ok(pool)
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    fn push(
        &mut self,
        seen: &mut BTreeMap<PauliString, usize>,
        s: PauliString,
        kind: PoolKind,
        magnitude: Option<f64>,
    ) {
        if s.is_identity() {
            return;
        }
        match seen.get(&s) {
            Some(&i) => {
                if let (Some(old), Some(new)) = (self.source_magnitude[i], magnitude) {
                    if new > old {
                        self.source_magnitude[i] = Some(new);
                    }
                }
            }
            None => {
                seen.insert(s, self.generators.len());
                self.generators.push(s);
                self.provenance.push(kind);
                self.source_magnitude.push(magnitude);
            }
        }
    }

    pub fn string_set(&self) -> BTreeSet<PauliString> {
        self.generators.iter().copied().collect()
    }
}

/// A fermionic anti-Hermitian generator `T - T^dagger` with its qubit image
/// `i (T - T^dagger)`.
#[derive(Clone, Debug)]
pub struct FermionGenerator {
    pub ops: Vec<Ladder>,
    pub magnitude: Option<f64>,
    pub image: PauliSum,
}

fn adjoint_ops(ops: &[Ladder]) -> Vec<Ladder> {
    ops.iter().rev().map(|l| Ladder { mode: l.mode, dagger: !l.dagger }).collect()
}

fn generator(ops: Vec<Ladder>, magnitude: Option<f64>, n: usize) -> Result<FermionGenerator> {
    let i = Complex64::new(0.0, 1.0);
    let adj = adjoint_ops(&ops);
    let image = jordan_wigner_sum(&[(i, ops.clone()), (-i, adj)], n)?.into_hermitian(1e-12)?;
    Ok(FermionGenerator { ops, magnitude, image })
}

fn single(p: usize, q: usize) -> Vec<Ladder> {
    vec![Ladder::create(p), Ladder::annihilate(q)]
}

fn double(p: usize, q: usize, r: usize, s: usize) -> Vec<Ladder> {
    // a+p a+q a_s a_r
    vec![Ladder::create(p), Ladder::create(q), Ladder::annihilate(s), Ladder::annihilate(r)]
}

#[inline]
fn spin(p: usize) -> usize {
    p % 2
}

/// The fermionic generators behind [`build_pool`], in pool order.
pub fn fermion_generators(kind: PoolKind, ints: &SpinOrbitalIntegrals, epsilon: f64) -> Result<Vec<FermionGenerator>> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidArgument("epsilon must be non-negative"));
    }
    let n = ints.n_qubits();
    let mut out = Vec::new();
    match kind {
        PoolKind::Uccsd => {
            let occ_bits = ints.reference_occupation();
            let occ: Vec<usize> = (0..n).filter(|p| occ_bits >> p & 1 == 1).collect();
            let vir: Vec<usize> = (0..n).filter(|p| occ_bits >> p & 1 == 0).collect();
            for &i in &occ {
                for &a in &vir {
                    if spin(i) == spin(a) {
                        out.push(generator(single(a, i), None, n)?);
                    }
                }
            }
            for (x, &i) in occ.iter().enumerate() {
                for &j in &occ[x + 1..] {
                    for (y, &a) in vir.iter().enumerate() {
                        for &b in &vir[y + 1..] {
                            if spin(i) + spin(j) == spin(a) + spin(b) {
                                // a+a a+b a_j a_i
                                out.push(generator(double(a, b, i, j), None, n)?);
                            }
                        }
                    }
                }
            }
        }
        PoolKind::Uccgsd => {
            for p in 0..n {
                for q in 0..p {
                    if spin(p) == spin(q) {
                        out.push(generator(single(p, q), None, n)?);
                    }
                }
            }
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (p + 1..n).map(move |q| (p, q))).collect();
            for (x, &(p, q)) in pairs.iter().enumerate() {
                for &(r, s) in &pairs[..x] {
                    if spin(p) + spin(q) == spin(r) + spin(s) {
                        out.push(generator(double(p, q, r, s), None, n)?);
                    }
                }
            }
        }
        PoolKind::Hamiltonian => {
            for p in 0..n {
                for q in 0..n {
                    let v = ints.h_spin(p, q);
                    if p != q && v.abs() > epsilon && v != 0.0 {
                        out.push(generator(single(p, q), Some(v.abs()), n)?);
                    }
                }
            }
            for p in 0..n {
                for q in 0..n {
                    for r in 0..n {
                        for s in 0..n {
                            if p == q || r == s || (p == r && q == s) || (p == s && q == r) {
                                continue;
                            }
                            let v = ints.g_spin(p, r, q, s);
                            if v.abs() > epsilon && v != 0.0 {
                                out.push(generator(double(p, q, r, s), Some(v.abs()), n)?);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Pauli-string pool for the given ansatz. `epsilon` screens Hamiltonian
/// terms by integral magnitude and is ignored for the UCC pools.
pub fn build_pool(kind: PoolKind, ints: &SpinOrbitalIntegrals, epsilon: f64) -> Result<OperatorPool> {
    let gens = fermion_generators(kind, ints, epsilon)?;
    let mut pool = OperatorPool::new(ints.n_qubits());
    let mut seen = BTreeMap::new();
    for g in &gens {
        for s in g.image.strings() {
            pool.push(&mut seen, s, kind, g.magnitude);
        }
    }
    Ok(pool)
}

/// Pool size for each screening threshold, from a single unscreened build.
pub fn pool_size_profile(ints: &SpinOrbitalIntegrals, thresholds: &[f64]) -> Result<Vec<(f64, usize)>> {
    let full = build_pool(PoolKind::Hamiltonian, ints, 0.0)?;
    Ok(thresholds
        .iter()
        .map(|&eps| {
            let count = full.source_magnitude.iter().filter(|m| m.is_some_and(|v| v > eps)).count();
            (eps, count)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Pauli, PauliTerm};
    use nalgebra::DMatrix;

    fn dense_ladder(mode: usize, n: usize, dagger: bool) -> DMatrix<Complex64> {
        // explicit construction on occupation strings, independent of the Pauli route
        let dim = 1 << n;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let occupied = col >> mode & 1 == 1;
            if occupied == dagger {
                continue;
            }
            let sign = if (col & ((1 << mode) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(col ^ (1 << mode), col)] = Complex64::new(sign, 0.0);
        }
        m
    }

    fn dense_product(ops: &[Ladder], n: usize) -> DMatrix<Complex64> {
        ops.iter().fold(DMatrix::identity(1 << n, 1 << n), |acc, l| acc * dense_ladder(l.mode, n, l.dagger))
    }

    #[test]
    fn number_operator_image() {
        let img = jordan_wigner(Complex64::new(1.0, 0.0), &[Ladder::create(0), Ladder::annihilate(0)], 1).unwrap();
        assert_eq!(img.len(), 2);
        assert!((img.constant() - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((img.coeff(&PauliString::single(Pauli::Z, 0)) - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn antihermitian_single_image() {
        let one = Complex64::new(1.0, 0.0);
        let img = jordan_wigner_sum(&[(one, single(0, 1)), (-one, single(1, 0))], 2).unwrap();
        let x0y1 = PauliString::from_ops(&[(Pauli::X, 0), (Pauli::Y, 1)]).1;
        let y0x1 = PauliString::from_ops(&[(Pauli::Y, 0), (Pauli::X, 1)]).1;
        assert_eq!(img.len(), 2);
        assert!((img.coeff(&x0y1) - Complex64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((img.coeff(&y0x1) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
        let dense = dense_product(&single(0, 1), 2) - dense_product(&single(1, 0), 2);
        assert!((dense - img.to_dense()).norm() < 1e-14);
    }

    #[test]
    fn pair_number_image() {
        let ops = [Ladder::create(0), Ladder::create(1), Ladder::annihilate(1), Ladder::annihilate(0)];
        let img = jordan_wigner(Complex64::new(1.0, 0.0), &ops, 2).unwrap();
        let z0 = PauliSum::from_term(&PauliTerm::from_ops(2, &[(Pauli::Z, 0)]).unwrap());
        let z1 = PauliSum::from_term(&PauliTerm::from_ops(2, &[(Pauli::Z, 1)]).unwrap());
        let id = PauliSum::identity(2, 1.0).unwrap();
        let expect = id.sub(&z0).unwrap().mul(&id.sub(&z1).unwrap()).unwrap().scale(Complex64::new(0.25, 0.0));
        assert_eq!(img, expect);
        assert!((img.to_dense() - dense_product(&ops, 2)).norm() < 1e-14);
    }

    #[test]
    fn ladder_images_match_dense_construction() {
        for n in 1..=4 {
            for mode in 0..n {
                for dagger in [false, true] {
                    let img = jordan_wigner(Complex64::new(1.0, 0.0), &[Ladder { mode, dagger }], n).unwrap();
                    assert!((img.to_dense() - dense_ladder(mode, n, dagger)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn mode_out_of_range() {
        let r = jordan_wigner(Complex64::new(1.0, 0.0), &[Ladder::create(4)], 4);
        assert!(matches!(r, Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn core_energy_only() {
        let mut ints = SpinOrbitalIntegrals::new(2, 2, 0).unwrap();
        ints.e_core = 0.7;
        let h = build_hamiltonian(&ints).unwrap();
        assert_eq!(h, PauliSum::identity(4, 0.7).unwrap());
    }

    #[test]
    fn spin_expectations_on_determinants() {
        let ops = build_spin_ops(2).unwrap();
        let s2 = ops.s2.to_dense();
        let diag = |idx: usize| s2[(idx, idx)].re;
        assert!(diag(0b0011).abs() < 1e-14);
        assert!((diag(0b0101) - 2.0).abs() < 1e-14);
        // (|0110> +- |1001>)/sqrt2: the '+' combination is the m_s = 0 triplet here
        let v = |sign: f64| {
            let mut v = nalgebra::DVector::<Complex64>::zeros(16);
            v[0b0110] = Complex64::new(1.0 / 2f64.sqrt(), 0.0);
            v[0b1001] = Complex64::new(sign / 2f64.sqrt(), 0.0);
            (v.adjoint() * &s2 * &v)[(0, 0)].re
        };
        assert!((v(1.0) - 2.0).abs() < 1e-14);
        assert!(v(-1.0).abs() < 1e-14);
    }

    #[test]
    fn spin_ops_are_hermitian() {
        let ops = build_spin_ops(3).unwrap();
        for op in [&ops.s2, &ops.sz, &ops.number] {
            assert!(op.is_hermitian(0.0));
        }
    }

    #[test]
    fn uccsd_pool_for_two_orbitals() {
        let ints = SpinOrbitalIntegrals::new(2, 2, 0).unwrap();
        let gens = fermion_generators(PoolKind::Uccsd, &ints, 0.0).unwrap();
        assert_eq!(gens.len(), 3);
        let counts: Vec<usize> = gens.iter().map(|g| g.image.len()).collect();
        assert_eq!(counts, [2, 2, 8]);
        let pool = build_pool(PoolKind::Uccsd, &ints, 0.0).unwrap();
        assert_eq!(pool.len(), 12);
    }

    #[test]
    fn infinite_epsilon_screens_everything() {
        let mut ints = SpinOrbitalIntegrals::new(2, 2, 0).unwrap();
        ints.set_h(0, 1, 0.3).unwrap();
        ints.set_g(0, 1, 0, 1, 0.2).unwrap();
        let pool = build_pool(PoolKind::Hamiltonian, &ints, f64::INFINITY).unwrap();
        assert!(pool.is_empty());
        assert!(matches!(build_pool(PoolKind::Hamiltonian, &ints, -1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn pool_entries_are_traceless_and_unique() {
        let mut ints = SpinOrbitalIntegrals::new(3, 2, 0).unwrap();
        ints.set_h(0, 2, 0.1).unwrap();
        let pool = build_pool(PoolKind::Uccgsd, &ints, 0.0).unwrap();
        assert!(pool.generators.iter().all(|s| !s.is_identity()));
        assert_eq!(pool.string_set().len(), pool.len());
    }
}
