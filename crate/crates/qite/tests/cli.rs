use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::DMatrix;
use num_complex::Complex64;
use qite::fcidump::read_fcidump;
use qite_core::build_hamiltonian;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn qite(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qite")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn summary(dir: &Path) -> BTreeMap<String, String> {
    fs::read_to_string(dir.join("summary.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once(" = ").unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn real(s: &BTreeMap<String, String>, key: &str) -> f64 {
    s.get(key).unwrap_or_else(|| panic!("summary has no {key}")).parse().unwrap()
}

/// Lowest eigenvalues in the (n_alpha, n_beta) block, by brute dense
/// diagonalization of the full qubit matrix.
fn dense_sector_spectrum(fcidump: &str) -> Vec<f64> {
    let ints = read_fcidump(&fixture(fcidump)).unwrap();
    let h = build_hamiltonian(&ints).unwrap();
    let full: DMatrix<Complex64> = h.to_dense();
    let (na, nb) = ints.n_alpha_beta();
    let idx: Vec<usize> = (0..full.nrows())
        .filter(|&i| {
            let even = (0..ints.n_qubits()).step_by(2).filter(|q| i >> q & 1 == 1).count();
            let odd = (1..ints.n_qubits()).step_by(2).filter(|q| i >> q & 1 == 1).count();
            (even, odd) == (na, nb)
        })
        .collect();
    let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])]);
    let mut e: Vec<f64> = block.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn h2_qite_reaches_ground_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "h2.cfg",
        &format!("hamiltonian = {}\ndbeta = 0.1\noutput = {}\n", fixture("h2_sto6g.fcidump").display(), out.display()),
    );
    let r = qite(&["run", cfg.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let s = summary(&out);
    let e0 = dense_sector_spectrum("h2_sto6g.fcidump")[0];
    assert!((real(&s, "exact_0") - e0).abs() < 1e-9);
    assert!((real(&s, "energy_0") - e0).abs() < 1e-3);
    assert_eq!(s["status"], "ok");
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("ell,beta,state,energy,s2,grad_norm,a_norm,fidelity_F\n"));
}

#[test]
fn h4_state_specific_msqite_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "h4.cfg",
        &format!(
            "hamiltonian = {}\nmethod = msqite\nmode = state_specific\npool = hamiltonian\nstates = 00001111 00110011\noutput = {}\n",
            fixture("h4_square_sto6g.fcidump").display(),
            out.display()
        ),
    );
    let r = qite(&["run", cfg.to_str().unwrap()]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let s = summary(&out);
    let singlets = [-1.932645377, -1.781254223];
    for (i, e) in singlets.iter().enumerate() {
        assert!((real(&s, &format!("exact_{i}")) - e).abs() < 1e-8);
        assert!(real(&s, &format!("error_{i}")).abs() < 1e-6);
    }
}

#[test]
fn unknown_key_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "bad.cfg",
        &format!(
            "hamiltonian = {}\nfrobnicate = 3\noutput = {}\n",
            fixture("h2_sto6g.fcidump").display(),
            out.display()
        ),
    );
    let r = qite(&["run", cfg.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());
    assert!(String::from_utf8_lossy(&r.stderr).contains("frobnicate"));
}

#[test]
fn missing_input_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "c.cfg", &format!("hamiltonian = nope.fcidump\noutput = {}\n", out.display()));
    assert_eq!(qite(&["run", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn numerical_abort_exits_1_with_partial_trace() {
    // legacy b with c = 1 - 2 dbeta E <= 0 on the first step
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    fs::write(dir.path().join("h.txt"), "10 Z0\n0.5 X0\n").unwrap();
    fs::write(dir.path().join("pool.txt"), "1 Y0\n").unwrap();
    let cfg = write_config(
        dir.path(),
        "c.cfg",
        &format!(
            "hamiltonian = h.txt\nformat = pauli\nn_qubits = 1\npool = file\npool_file = pool.txt\nstates = 0\nb_variant = legacy\ndbeta = 0.1\noutput = {}\n",
            out.display()
        ),
    );
    let r = qite(&["run", cfg.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    let s = summary(&out);
    assert!(s["status"].starts_with("aborted"));
    assert!(fs::read_to_string(out.join("trace.csv")).unwrap().starts_with("ell,beta,"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let cfg = write_config(
            dir.path(),
            &format!("{name}.cfg"),
            &format!(
                "hamiltonian = {}\nmethod = msqite\nstates = 0011 pair(0110,1001,1)\nqlanczos = on\nbeta_max = 3\noutput = {}\n",
                fixture("heh_plus_sto6g.fcidump").display(),
                out.display()
            ),
        );
        assert!(qite(&["run", cfg.to_str().unwrap()]).status.success());
        (fs::read(out.join("trace.csv")).unwrap(), fs::read(out.join("summary.txt")).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn qlanczos_columns_fill_in() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        "c.cfg",
        &format!(
            "hamiltonian = {}\nqlanczos = on\nnorm_estimator = exact\nbeta_max = 1\noutput = {}\n",
            fixture("h2_sto6g.fcidump").display(),
            out.display()
        ),
    );
    assert!(qite(&["run", cfg.to_str().unwrap()]).status.success());
    let s = summary(&out);
    assert_eq!(s["qlanczos_failures"], "0");
    assert!(real(&s, "qlanczos_lowest") <= real(&s, "energy_0") + 1e-10);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let last: Vec<&str> = trace.lines().last().unwrap().split(',').collect();
    assert_eq!(last.len(), 13);
    assert!(!last[8].is_empty());
}

#[test]
fn exactdiag_single_z() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("z.txt");
    fs::write(&h, "1 Z0\n").unwrap();
    let r = qite(&["exactdiag", h.to_str().unwrap(), "--format", "pauli", "--n-qubits", "1", "-k", "2"]);
    assert!(r.status.success());
    assert_eq!(String::from_utf8(r.stdout).unwrap(), "k,energy\n0,-1\n1,1\n");
}

#[test]
fn exactdiag_h4_spectrum_and_spin() {
    let r = qite(&["exactdiag", fixture("h4_square_sto6g.fcidump").to_str().unwrap(), "-k", "8"]);
    assert!(r.status.success());
    let text = String::from_utf8(r.stdout).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().any(|(e, _)| (e + 1.932645).abs() < 1e-5));
    assert!(rows.windows(2).all(|w| w[0].0 <= w[1].0));
    for (_, s2) in rows {
        let s = ((4.0 * s2 + 1.0).sqrt() - 1.0) / 2.0;
        assert!((2.0 * s - (2.0 * s).round()).abs() < 1e-6, "non-integral spin from <S^2> = {s2}");
    }
}

#[test]
fn pool_stats_counts_shrink_with_epsilon() {
    let r = qite(&["pool-stats", fixture("h4_square_sto6g.fcidump").to_str().unwrap(), "--epsilon", "0,0.01,0.1"]);
    assert!(r.status.success());
    let text = String::from_utf8(r.stdout).unwrap();
    let counts: Vec<usize> = text
        .lines()
        .skip_while(|l| !l.starts_with("epsilon"))
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts.len(), 3);
    assert!(counts.windows(2).all(|w| w[0] >= w[1]));
    assert!(text.contains("uccgsd,"));
}
