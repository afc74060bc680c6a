//! Dense reference constructions shared by the integration tests. None of
//! these go through the library's own matrix builders.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use qite_core::{Pauli, PauliString, PauliSum, SpinOrbitalIntegrals, StateVector};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn letter_matrix(p: Pauli) -> [[Complex64; 2]; 2] {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, -i], [i, z]],
        Pauli::Z => [[o, z], [z, -o]],
    }
}

/// Tensor product of single-qubit matrices, qubit 0 least significant.
pub fn dense_string(s: &PauliString, n: usize) -> DMatrix<Complex64> {
    let letters: Vec<_> = (0..n).map(|q| letter_matrix(s.get(q))).collect();
    let dim = 1 << n;
    DMatrix::from_fn(dim, dim, |r, col| {
        letters.iter().enumerate().fold(c(1.0, 0.0), |acc, (q, m)| acc * m[r >> q & 1][col >> q & 1])
    })
}

pub fn dense_sum(h: &PauliSum) -> DMatrix<Complex64> {
    let n = h.n_qubits();
    let mut m = DMatrix::zeros(1 << n, 1 << n);
    for (s, &coef) in h.iter() {
        m += dense_string(s, n) * coef;
    }
    m
}

pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Fermionic annihilator on occupation-number states, sign from the modes
/// below `j`.
pub fn annihilator(j: usize, n: usize) -> DMatrix<Complex64> {
    let dim = 1 << n;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        if i >> j & 1 == 1 {
            let sign = if (i & ((1 << j) - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(i ^ (1 << j), i)] = c(sign, 0.0);
        }
    }
    m
}

/// Electronic Hamiltonian assembled from dense ladder matrices.
pub fn dense_hamiltonian(ints: &SpinOrbitalIntegrals) -> DMatrix<Complex64> {
    let n = ints.n_qubits();
    let dim = 1 << n;
    let a: Vec<_> = (0..n).map(|j| annihilator(j, n)).collect();
    let ad: Vec<_> = a.iter().map(|m| m.adjoint()).collect();
    let mut h = DMatrix::<Complex64>::identity(dim, dim) * c(ints.e_core, 0.0);
    let same = |p: usize, q: usize| p % 2 == q % 2;
    for p in 0..n {
        for q in 0..n {
            if same(p, q) {
                h += &ad[p] * &a[q] * c(ints.h(p / 2, q / 2), 0.0);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    if !(same(p, r) && same(q, s)) {
                        continue;
                    }
                    let v = ints.g(p / 2, r / 2, q / 2, s / 2);
                    if v != 0.0 {
                        h += &ad[p] * &ad[q] * &a[s] * &a[r] * c(0.5 * v, 0.0);
                    }
                }
            }
        }
    }
    h
}

pub fn dense_apply(m: &DMatrix<Complex64>, s: &StateVector) -> DVector<Complex64> {
    m * DVector::from_column_slice(s.amplitudes())
}

/// `e^{-tau H}|psi>` normalized, summed as a Taylor series.
pub fn dense_ite(h: &PauliSum, psi: &StateVector, tau: f64) -> DVector<Complex64> {
    let m = dense_sum(h);
    let mut term = DVector::from_column_slice(psi.amplitudes());
    let mut out = term.clone();
    for k in 1..120 {
        term = &m * term * c(-tau / k as f64, 0.0);
        out += &term;
    }
    let norm = out.norm();
    out / c(norm, 0.0)
}

/// Eigenpairs of a real symmetric matrix from its real Schur form, ascending.
pub fn schur_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let (q, t) = nalgebra::linalg::Schur::new(m.clone()).unpack();
    for r in 0..n {
        for col in 0..n {
            assert!(r == col || t[(r, col)].abs() < 1e-9, "Schur form not diagonal");
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| t[(a, a)].total_cmp(&t[(b, b)]));
    let vals = order.iter().map(|&i| t[(i, i)]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, k| q[(r, order[k])]);
    (vals, vecs)
}

pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

pub fn string_strategy(n: usize) -> impl Strategy<Value = PauliString> {
    (0..1u64 << n, 0..1u64 << n).prop_map(|(x, z)| PauliString::new(x, z))
}

pub fn coeff_strategy() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| c(re, im))
}

pub fn sum_strategy(n: usize, max_terms: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((string_strategy(n), coeff_strategy()), 1..=max_terms)
        .prop_map(move |t| PauliSum::from_terms(n, t).unwrap())
}

/// Random Hermitian operator with real coefficients.
pub fn hermitian_strategy(n: usize, max_terms: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((string_strategy(n), -1.0..1.0f64), 1..=max_terms)
        .prop_map(move |t| PauliSum::from_terms(n, t.into_iter().map(|(s, v)| (s, c(v, 0.0)))).unwrap())
}

pub fn state_strategy(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(coeff_strategy(), 1 << n)
        .prop_filter("nonzero", |v| v.iter().map(|x| x.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(move |v| StateVector::from_amplitudes(n, v).unwrap())
}

pub fn real_state_strategy(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec(-1.0..1.0f64, 1 << n)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(move |v| StateVector::from_amplitudes(n, v.into_iter().map(|x| c(x, 0.0)).collect()).unwrap())
}

/// Random integrals with the full permutational symmetry and a few nonzero
/// two-electron entries.
pub fn integrals_strategy(max_spatial: usize) -> impl Strategy<Value = SpinOrbitalIntegrals> {
    (1..=max_spatial).prop_flat_map(|ns| {
        let h = prop::collection::vec(-1.0..1.0f64, ns * ns);
        let g = prop::collection::vec(((0..ns, 0..ns, 0..ns, 0..ns), -0.5..0.5f64), 0..8);
        (Just(ns), h, g, -1.0..1.0f64).prop_map(|(ns, h, g, core)| {
            let mut ints = SpinOrbitalIntegrals::new(ns, ns, ns as i32 % 2).unwrap();
            ints.e_core = core;
            for p in 0..ns {
                for q in 0..=p {
                    ints.set_h(p, q, h[p * ns + q]).unwrap();
                }
            }
            for ((p, r, q, s), v) in g {
                ints.set_g(p, r, q, s, v).unwrap();
            }
            ints
        })
    })
}
