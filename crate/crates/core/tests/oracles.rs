mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qite_core::exact::exact_ite;
use qite_core::linalg::solve_amplitudes;
use qite_core::msqite::{effective_spectrum, lowdin_d};
use qite_core::qite::{build_b, build_m};
use qite_core::qlanczos::qlanczos;
use qite_core::state::braket;
use qite_core::{
    fold_hamiltonian, run_qite, BVariant, KrylovHistory, NormSource, OperatorPool, PauliString, PauliSum, PoolKind,
    QiteConfig, StateVector,
};

fn all_strings(n: usize) -> Vec<PauliString> {
    (0..1u64 << n).flat_map(|x| (0..1u64 << n).map(move |z| PauliString::new(x, z))).collect()
}

fn rotation_pool(n: usize) -> OperatorPool {
    let odd_y: Vec<_> = all_strings(n).into_iter().filter(|s| s.y_count() % 2 == 1).collect();
    OperatorPool::from_strings(n, PoolKind::Uccgsd, &odd_y).unwrap()
}

fn complete_pool(n: usize) -> OperatorPool {
    OperatorPool::from_strings(n, PoolKind::Uccgsd, &all_strings(n)).unwrap()
}

fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    schur_eigen(&((m + m.transpose()) * 0.5)).0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_ite_matches_dense_propagator(h in hermitian_strategy(3, 8), psi in state_strategy(3), tau in 0.01..1.0f64) {
        let (out, cval) = exact_ite(&psi, &h, tau).unwrap();
        let expect = dense_ite(&h, &psi, tau);
        prop_assert!((1.0 - fidelity(out.amplitudes(), expect.as_slice())).abs() < 1e-10);
        // c = <psi| e^{-2 tau H} |psi> = |e^{-tau H} psi|^2, from a plain Taylor series
        let m = dense_sum(&h);
        let mut term = DVector::from_column_slice(psi.amplitudes());
        let mut acc = term.clone();
        for k in 1..60 {
            term = &m * term * c(-tau / k as f64, 0.0);
            acc += &term;
        }
        let cexp = acc.norm_squared();
        prop_assert!((cval - cexp).abs() < 1e-10 * cexp);
    }

    #[test]
    fn exact_ite_energy_never_rises(h in hermitian_strategy(3, 8), psi in state_strategy(3), tau in 0.01..0.5f64) {
        let mut s = psi;
        let mut e = s.expectation(&h).unwrap();
        for _ in 0..10 {
            s = exact_ite(&s, &h, tau).unwrap().0;
            let next = s.expectation(&h).unwrap();
            prop_assert!(next <= e + 1e-12);
            e = next;
        }
    }

    #[test]
    fn exact_ite_composes(h in hermitian_strategy(3, 8), psi in state_strategy(3), t1 in 0.01..0.5f64, t2 in 0.01..0.5f64) {
        let whole = exact_ite(&psi, &h, t1 + t2).unwrap().0;
        let split = exact_ite(&exact_ite(&psi, &h, t1).unwrap().0, &h, t2).unwrap().0;
        prop_assert!((1.0 - whole.fidelity(&split).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn hermitian_expectation_is_real(h in hermitian_strategy(4, 10), psi in state_strategy(4)) {
        prop_assert!(braket(&psi, Some(&h), &psi).unwrap().im.abs() < 1e-12);
    }

    #[test]
    fn commutator_gradient_ignores_identity_shift(
        h in hermitian_strategy(2, 6), psi in state_strategy(2), shift in -50.0..50.0f64,
    ) {
        let pool = complete_pool(2);
        let b = build_b(&psi, &h, &pool, BVariant::Commutator, 0.1).unwrap();
        let bs = build_b(&psi, &h.shifted(shift), &pool, BVariant::Commutator, 0.1).unwrap();
        prop_assert_eq!(b, bs);
    }

    #[test]
    fn legacy_gradient_carries_inverse_root_norm(
        h in hermitian_strategy(2, 6), psi in state_strategy(2), shift in -5.0..0.0f64,
    ) {
        let dbeta = 0.05;
        let pool = complete_pool(2);
        let hs = h.shifted(shift);
        let e = psi.expectation(&hs).unwrap();
        let cval = 1.0 - 2.0 * dbeta * e;
        prop_assume!(cval > 0.05);
        let commutator = build_b(&psi, &hs, &pool, BVariant::Commutator, dbeta).unwrap();
        let legacy = build_b(&psi, &hs, &pool, BVariant::Legacy, dbeta).unwrap();
        prop_assert!((legacy - commutator / cval.sqrt()).norm() < 1e-10);
    }

    #[test]
    fn metric_is_positive_semidefinite(psi in state_strategy(3), picks in prop::collection::vec(string_strategy(3), 1..20)) {
        let pool = OperatorPool::from_strings(3, PoolKind::Uccgsd, &picks).unwrap();
        prop_assume!(!pool.is_empty());
        let m = build_m(&psi, &pool).unwrap();
        prop_assert!(sym_eigenvalues(&m)[0] >= -1e-10);
        // M_{mu nu} = 2 Re <psi|sigma_mu sigma_nu|psi>
        for (i, a) in pool.generators.iter().enumerate() {
            for (j, b) in pool.generators.iter().enumerate() {
                let d = dense_string(a, 3) * dense_string(b, 3);
                let v = DVector::from_column_slice(psi.amplitudes());
                let expect = 2.0 * (v.adjoint() * d * &v)[(0, 0)].re;
                prop_assert!((m[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn amplitudes_minimize_the_residual(
        rows in prop::collection::vec(-1.0..1.0f64, 12), b in prop::collection::vec(-1.0..1.0f64, 4),
        delta in prop::collection::vec(-0.1..0.1f64, 4),
    ) {
        // rank-deficient M = G^T G with G 3x4
        let g = DMatrix::from_row_slice(3, 4, &rows);
        let m = g.transpose() * &g;
        let b = DVector::from_vec(b);
        let a = solve_amplitudes(&m, &b, 0.0);
        let best = (&m * &a + &b).norm();
        let moved = (&m * (&a + DVector::from_vec(delta)) + &b).norm();
        prop_assert!(best <= moved + 1e-10);
    }

    #[test]
    fn qite_runs_are_reproducible(h in hermitian_strategy(2, 6), psi in real_state_strategy(2)) {
        let mut cfg = QiteConfig::new(rotation_pool(2), 0.1);
        cfg.beta_max = 1.0;
        cfg.track_fidelity = true;
        let a = run_qite(&psi, &h, &cfg).unwrap();
        let b = run_qite(&psi, &h, &cfg).unwrap();
        prop_assert_eq!(a.reports, b.reports);
    }

    #[test]
    fn folding_identity(h in hermitian_strategy(3, 8), omega in -3.0..3.0f64) {
        let lhs = fold_hamiltonian(&h, omega)
            .unwrap()
            .add(&h.scale(num_complex::Complex64::new(2.0 * omega, 0.0)))
            .unwrap()
            .shifted(-omega * omega);
        let rhs = fold_hamiltonian(&h, 0.0).unwrap();
        let diff = lhs.sub(&rhs).unwrap();
        prop_assert!(diff.iter().all(|(_, v)| v.norm() < 1e-10));
        prop_assert!(max_abs(&(dense_sum(&rhs) - dense_sum(&h) * dense_sum(&h))) < 1e-12);
    }

    #[test]
    fn folded_residual_never_rises(h in hermitian_strategy(3, 8), psi in state_strategy(3), omega in -2.0..2.0f64) {
        let f = fold_hamiltonian(&h, omega).unwrap();
        let mut s = psi;
        let mut r = s.expectation(&f).unwrap();
        for _ in 0..10 {
            s = exact_ite(&s, &f, 0.05).unwrap().0;
            let next = s.expectation(&f).unwrap();
            prop_assert!(next <= r + 1e-12);
            r = next;
        }
    }

    #[test]
    fn lowdin_d_orthonormalizes_propagated_overlap(
        raw in prop::collection::vec(-1.0..1.0f64, 9), hraw in prop::collection::vec(-1.0..1.0f64, 9), dbeta in 0.01..0.1f64,
    ) {
        let a = DMatrix::from_row_slice(3, 3, &raw);
        let s = &a * a.transpose() + DMatrix::identity(3, 3);
        let hm = DMatrix::from_row_slice(3, 3, &hraw);
        let h = (&hm + hm.transpose()) * 0.5;
        let e: Vec<f64> = (0..3).map(|i| h[(i, i)] / s[(i, i)]).collect();
        let st = DMatrix::from_fn(3, 3, |i, j| s[(i, j)] - 2.0 * dbeta * (h[(i, j)] - 0.5 * (e[i] + e[j]) * s[(i, j)]));
        prop_assume!(sym_eigenvalues(&st)[0] > 1e-3);
        let d = lowdin_d(&s, &h, &e, dbeta).unwrap();
        prop_assert!((d.transpose() * st * &d - DMatrix::identity(3, 3)).abs().max() < 1e-10);
    }

    #[test]
    fn effective_spectrum_ignores_basis_mixing(
        h in hermitian_strategy(3, 8),
        states in prop::collection::vec(real_state_strategy(3), 3),
        mix in prop::collection::vec(-1.0..1.0f64, 9),
    ) {
        let hd = dense_sum(&h);
        let v: Vec<DVector<num_complex::Complex64>> = states.iter().map(|s| DVector::from_column_slice(s.amplitudes())).collect();
        let s = DMatrix::from_fn(3, 3, |i, j| v[i].dotc(&v[j]).re);
        prop_assume!(sym_eigenvalues(&s)[0] > 1e-3);
        let hm = DMatrix::from_fn(3, 3, |i, j| (v[i].adjoint() * &hd * &v[j])[(0, 0)].re);
        let q = DMatrix::from_row_slice(3, 3, &mix).qr().q();
        let before = effective_spectrum(&hm, &s).unwrap();
        let after = effective_spectrum(&(q.transpose() * &hm * &q), &(q.transpose() * &s * &q)).unwrap();
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

/// Exact imaginary-time trajectory and the matching Krylov history.
fn exact_trajectory(h: &PauliSum, psi: &StateVector, dbeta: f64, steps: usize) -> (Vec<StateVector>, KrylovHistory) {
    let mut states = vec![psi.clone()];
    let mut hist = KrylovHistory::new(dbeta, psi.expectation(h).unwrap());
    for ell in 0..steps {
        let (next, cval) = exact_ite(&states[ell], h, dbeta).unwrap();
        hist.push(next.expectation(h).unwrap());
        hist.set_exact_c(ell, cval).unwrap();
        states.push(next);
    }
    (states, hist)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn qlanczos_with_exact_norms_matches_overlaps(
        h in hermitian_strategy(2, 8), psi in state_strategy(2), steps in 1usize..12,
    ) {
        let dbeta = 0.1;
        let (states, hist) = exact_trajectory(&h, &psi, dbeta, steps);
        let res = qlanczos(&hist, NormSource::Exact).unwrap();
        prop_assert_eq!(res.selected_indices[0], steps);

        let sel = &res.selected_indices;
        let k = sel.len();
        let hd = dense_sum(&h);
        let v: Vec<_> = sel.iter().map(|&l| DVector::from_column_slice(states[l].amplitudes())).collect();
        let s = DMatrix::from_fn(k, k, |i, j| v[i].dotc(&v[j]).re);
        let hm = DMatrix::from_fn(k, k, |i, j| (v[i].adjoint() * &hd * &v[j])[(0, 0)].re);
        let (eta, u) = schur_eigen(&s);
        let keep: Vec<usize> = (0..k).filter(|&i| eta[i] >= 1e-8).collect();
        // rounding in S is amplified by 1/sqrt(eta) in the eigenvalues
        prop_assume!(keep.iter().all(|&i| eta[i] > 1e-5));
        let x = DMatrix::from_fn(k, keep.len(), |r, col| u[(r, keep[col])] / eta[keep[col]].sqrt());
        let expect = sym_eigenvalues(&(x.transpose() * hm * &x));
        prop_assert_eq!(expect.len(), res.eigenvalues.len());
        for (a, b) in expect.iter().zip(&res.eigenvalues) {
            prop_assert!((a - b).abs() < 1e-8, "{} vs {}", a, b);
        }
    }

    #[test]
    fn qlanczos_lowest_is_below_current_energy(h in hermitian_strategy(3, 8), psi in state_strategy(3), steps in 1usize..16) {
        let (_, hist) = exact_trajectory(&h, &psi, 0.1, steps);
        let res = qlanczos(&hist, NormSource::Exact).unwrap();
        if let Some(low) = res.lowest_physical() {
            prop_assert!(low <= hist.energies()[steps] + 1e-9);
        }
        prop_assert!(res.eigenvalues[0] <= hist.energies()[steps] + 1e-9);
    }
}

#[test]
fn one_qubit_step_error_is_second_order() {
    // Complete one-qubit pool, so the only error is the product-formula one.
    let h = PauliSum::from_terms(
        1,
        [
            (PauliString::new(0, 1), c(0.7, 0.0)),
            (PauliString::new(1, 0), c(-0.4, 0.0)),
            (PauliString::new(1, 1), c(0.25, 0.0)),
        ],
    )
    .unwrap();
    let psi = StateVector::from_amplitudes(1, vec![c(0.6, 0.1), c(-0.3, 0.7)]).unwrap();
    let pool = complete_pool(1);
    let f = |dbeta: f64| {
        let mut cfg = QiteConfig::new(pool.clone(), dbeta);
        cfg.beta_max = dbeta;
        cfg.track_fidelity = true;
        let trace = run_qite(&psi, &h, &cfg).unwrap();
        trace.reports[1].fidelity_f.unwrap()
    };
    let mut last = f(0.2);
    for dbeta in [0.1, 0.05, 0.025] {
        let now = f(dbeta);
        assert!(last / now >= 4.0, "F({}) = {last}, F({dbeta}) = {now}", 2.0 * dbeta);
        last = now;
    }
}
