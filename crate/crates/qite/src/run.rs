//! Batch driver behind `qite run`.

use std::fs;
use std::path::Path;

use qite_core::exact::DENSE_LIMIT;
use qite_core::folded::Fsqite;
use qite_core::msqite::ms_qlanczos;
use qite_core::qlanczos::{qlanczos, qlanczos_observed, MAX_VECTORS};
use qite_core::{
    build_hamiltonian, build_pool, build_spin_ops, exact_diag_sector, exact_ite, fold_hamiltonian, sector_basis,
    FoldedConfig, KrylovHistory, Msqite, MsqiteConfig, NormSource, OperatorPool, PauliSum, PoolKind, Qite, QiteConfig,
    QlanczosResult, SpectralDecomposition, SpinOperators, SpinOrbitalIntegrals, StateSpec, StateVector,
};

use crate::config::{HamiltonianSource, Method, PoolSpec, RunConfig, StateText};
use crate::error::{Error, Result};
use crate::fcidump::read_fcidump;
use crate::format::csv;
use crate::pauli_text::{parse_pool, read_pauli_text, read_text};

/// Everything a run needs, loaded and validated.
pub struct Problem {
    pub h: PauliSum,
    pub n_qubits: usize,
    pub ints: Option<SpinOrbitalIntegrals>,
    pub spin: Option<SpinOperators>,
    pub pool: OperatorPool,
    pub states: Vec<StateVector>,
}

fn as_spec(t: &StateText, n_qubits: usize) -> Result<StateSpec> {
    let (spec, width) = match *t {
        StateText::Bits { bits, width } => (StateSpec::Determinant(bits), width),
        StateText::Pair { a, b, width, s } => (StateSpec::Pair { a, b, s }, width),
    };
    if width != n_qubits {
        return Err(Error::Config(format!("state bitstrings need {n_qubits} digits, got {width}")));
    }
    Ok(spec)
}

impl Problem {
    pub fn load(cfg: &RunConfig) -> Result<Problem> {
        let (h, ints) = match &cfg.hamiltonian {
            HamiltonianSource::Fcidump(p) => {
                let ints = read_fcidump(p)?;
                (build_hamiltonian(&ints)?, Some(ints))
            }
            HamiltonianSource::Pauli { path, n_qubits, .. } => {
                let h = read_pauli_text(path, *n_qubits)?;
                if !h.is_hermitian(1e-12) {
                    return Err(Error::Config(format!("{}: operator is not Hermitian", path.display())));
                }
                (h, None)
            }
        };
        let n_qubits = h.n_qubits();
        let spin = if n_qubits % 2 == 0 { Some(build_spin_ops(n_qubits / 2)?) } else { None };
        let pool = match &cfg.pool {
            PoolSpec::File(p) => parse_pool(&read_text(p)?, n_qubits, PoolKind::Uccgsd)?,
            PoolSpec::Built(kind) => {
                let ints = match (&ints, &cfg.hamiltonian) {
                    (Some(i), _) => i.clone(),
                    (None, HamiltonianSource::Pauli { electrons, .. }) => {
                        if n_qubits % 2 != 0 {
                            return Err(Error::Config("fermionic pools need an even qubit count".into()));
                        }
                        let (ne, ms2) = electrons.unwrap_or((0, 0));
                        SpinOrbitalIntegrals::new(n_qubits / 2, ne, ms2).map_err(|e| Error::Config(e.to_string()))?
                    }
                    (None, HamiltonianSource::Fcidump(_)) => unreachable!("fcidump always yields integrals"),
                };
                build_pool(*kind, &ints, cfg.epsilon)?
            }
        };
        if pool.is_empty() {
            return Err(Error::Config("the pool is empty at this epsilon".into()));
        }
        let states = if cfg.states.is_empty() {
            let occ = match &ints {
                Some(i) => i.reference_occupation(),
                None => return Err(Error::Config("the pauli format needs explicit states".into())),
            };
            vec![StateVector::basis(n_qubits, occ)?]
        } else {
            cfg.states
                .iter()
                .map(|t| as_spec(t, n_qubits).and_then(|s| Ok(StateVector::prepare(n_qubits, s)?)))
                .collect::<Result<_>>()?
        };
        if cfg.spin_shift.is_some() && spin.is_none() {
            return Err(Error::Config("the spin shift needs an even qubit count".into()));
        }
        Ok(Problem { h, n_qubits, ints, spin, pool, states })
    }

    fn s2(&self) -> Option<PauliSum> {
        self.spin.as_ref().map(|s| s.s2.clone())
    }
}

/// Exact eigenpairs comparable with the run: restricted to the particle
/// sector shared by the initial states and, when they share a spin, to that
/// spin (or the spin-shift target).
pub struct Reference {
    pub spectrum: SpectralDecomposition,
    /// Indices into `spectrum`, ascending in energy.
    pub selected: Vec<usize>,
    pub spin_label: Option<f64>,
}

fn shared_sector(states: &[StateVector]) -> Option<(usize, usize)> {
    let even: u64 = (0..64).step_by(2).map(|q| 1u64 << q).sum();
    let mut sector = None;
    for st in states {
        for (i, a) in st.amplitudes().iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let i = i as u64;
            let here = ((i & even).count_ones() as usize, (i & !even).count_ones() as usize);
            match sector {
                None => sector = Some(here),
                Some(s) if s != here => return None,
                _ => {}
            }
        }
    }
    sector
}

impl Reference {
    pub fn compute(p: &Problem, cfg: &RunConfig) -> Result<Option<Reference>> {
        let basis: Vec<usize> = match shared_sector(&p.states) {
            Some((na, nb)) if p.spin.is_some() => sector_basis(p.n_qubits, na, nb),
            _ if p.n_qubits <= DENSE_LIMIT => (0..1usize << p.n_qubits).collect(),
            _ => return Ok(None),
        };
        if basis.len() > 1 << DENSE_LIMIT {
            return Ok(None);
        }
        let spectrum = exact_diag_sector(&p.h, &basis)?;
        let mut spin_label = None;
        let mut selected: Vec<usize> = (0..spectrum.len()).collect();
        if let Some(spin) = &p.spin {
            let target = match cfg.spin_shift {
                Some((_, s)) => Some(s * (s + 1.0)),
                None => {
                    let v: Vec<f64> =
                        p.states.iter().map(|s| s.expectation(&spin.s2)).collect::<std::result::Result<_, _>>()?;
                    let first = v[0];
                    let integral = ((4.0 * first + 1.0).sqrt() - 1.0) / 2.0;
                    let pure = v.iter().all(|x| (x - first).abs() < 1e-8) && (2.0 * integral).fract().abs() < 1e-6;
                    pure.then_some(first)
                }
            };
            if let Some(t) = target {
                let s2 = spectrum.expectations(&spin.s2)?;
                selected.retain(|&k| (s2[k] - t).abs() < 1e-3);
                spin_label = Some(t);
            }
        }
        Ok(Some(Reference { spectrum, selected, spin_label }))
    }

    pub fn energy(&self, k: usize) -> Option<f64> {
        self.selected.get(k).map(|&i| self.spectrum.eigenvalues[i])
    }

    /// Selected eigenpair nearest `omega`.
    pub fn nearest(&self, omega: f64) -> Option<usize> {
        self.selected.iter().copied().min_by(|&a, &b| {
            let da = (self.spectrum.eigenvalues[a] - omega).abs();
            let db = (self.spectrum.eigenvalues[b] - omega).abs();
            da.total_cmp(&db)
        })
    }
}

/// A finished (or aborted) run, ready to write.
pub struct Outcome {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
    pub failure: Option<Error>,
}

impl Outcome {
    fn new(header: Vec<String>) -> Self {
        Outcome { header, rows: Vec::new(), summary: Vec::new(), failure: None }
    }

    fn put(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.summary.push((key.into(), value.into()));
    }

    fn put_real(&mut self, key: impl Into<String>, value: f64) {
        self.put(key, csv(value));
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |source| Error::Io { path: dir.to_path_buf(), source };
        fs::create_dir_all(dir).map_err(io)?;
        let trace = dir.join("trace.csv");
        let mut w = ::csv::Writer::from_path(&trace).map_err(|e| Error::Config(format!("{}: {e}", trace.display())))?;
        w.write_record(&self.header).map_err(|e| Error::Config(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| Error::Config(e.to_string()))?;
        }
        w.flush().map_err(|source| Error::Io { path: trace.clone(), source })?;
        let mut text = String::new();
        for (k, v) in &self.summary {
            text.push_str(&format!("{k} = {v}\n"));
        }
        if let Some(e) = &self.failure {
            text.push_str(&format!("status = aborted: {e}\n"));
        } else {
            text.push_str("status = ok\n");
        }
        let summary = dir.join("summary.txt");
        fs::write(&summary, text).map_err(|source| Error::Io { path: summary, source })
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(csv).unwrap_or_default()
}

fn eig_cells(res: &Option<QlanczosResult>, width: usize) -> Vec<String> {
    let vals = res.as_ref().map(|r| r.physical()).unwrap_or_default();
    (0..width).map(|k| opt(vals.get(k).copied())).collect()
}

fn numbered(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |k| format!("{prefix}_{k}"))
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn common_summary(out: &mut Outcome, cfg: &RunConfig, p: &Problem) {
    let method = match cfg.method {
        Method::Qite => "qite",
        Method::Fsqite => "fsqite",
        Method::Msqite => "msqite",
    };
    out.put("method", method);
    out.put("n_qubits", p.n_qubits.to_string());
    out.put("hamiltonian_terms", p.h.len().to_string());
    let kinds: std::collections::BTreeSet<&str> = p.pool.provenance.iter().map(|k| k.name()).collect();
    out.put("pool", kinds.into_iter().collect::<Vec<_>>().join("+"));
    out.put("pool_size", p.pool.len().to_string());
}

fn record_failure<T>(out: &mut Outcome, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            out.failure = Some(e);
            None
        }
    }
}

fn run_qite(cfg: &RunConfig, p: &Problem, reference: &Option<Reference>) -> Result<Outcome> {
    let mut qcfg = QiteConfig::new(p.pool.clone(), cfg.step);
    qcfg.beta_max = cfg.beta_max;
    qcfg.b_variant = cfg.b_variant;
    qcfg.reg = cfg.reg;
    qcfg.grad_tol = cfg.grad_tol;
    qcfg.s2 = p.s2();
    qcfg.track_fidelity = cfg.track_fidelity;
    let mut cols = header(&["ell", "beta", "state", "energy", "s2", "grad_norm", "a_norm", "fidelity_F"]);
    if cfg.qlanczos.is_some() {
        cols.extend(numbered("qlanczos", MAX_VECTORS));
    }
    let mut out = Outcome::new(cols);
    common_summary(&mut out, cfg, p);
    let Some(mut run) = record_failure(&mut out, Qite::new(&p.states[0], &p.h, qcfg).map_err(Error::from)) else {
        return Ok(out);
    };

    let mut hist = KrylovHistory::new(cfg.step, run.report().energy);
    let mut ql: Option<QlanczosResult> = None;
    let mut ql_failures = 0usize;
    loop {
        if let Some(source) = cfg.qlanczos {
            ql = match qlanczos(&hist, source) {
                Ok(r) => Some(r),
                Err(_) => {
                    ql_failures += 1;
                    None
                }
            };
        }
        let r = run.report().clone();
        let mut row = vec![
            r.ell.to_string(),
            csv(r.beta),
            "0".into(),
            csv(r.energy),
            opt(r.s2),
            csv(r.grad_norm),
            csv(r.a_norm),
            opt(r.fidelity_f),
        ];
        if cfg.qlanczos.is_some() {
            row.extend(eig_cells(&ql, MAX_VECTORS));
        }
        out.rows.push(row);
        if run.is_done() {
            break;
        }
        let exact_c = match cfg.qlanczos {
            Some(NormSource::Exact) => {
                match record_failure(&mut out, exact_ite(run.state(), &p.h, cfg.step).map_err(Error::from)) {
                    Some((_, c)) => Some(c),
                    None => break,
                }
            }
            _ => None,
        };
        let ell = r.ell;
        let Some(next) = record_failure(&mut out, run.step().map_err(Error::from)) else { break };
        hist.push(next.energy);
        if let Some(c) = exact_c {
            hist.set_exact_c(ell, c)?;
        }
    }

    let last = run.report();
    out.put("steps", last.ell.to_string());
    out.put_real("beta", last.beta);
    out.put("converged", run.is_converged().to_string());
    out.put_real("energy_0", last.energy);
    if let Some(s2) = last.s2 {
        out.put_real("s2_0", s2);
    }
    out.put_real("grad_norm_0", last.grad_norm);
    let ql_low = ql.as_ref().and_then(|r| r.lowest_physical());
    if let Some(e) = ql_low {
        out.put_real("qlanczos_lowest", e);
    }
    if cfg.qlanczos.is_some() {
        out.put("qlanczos_failures", ql_failures.to_string());
    }
    if let Some(rf) = reference {
        if let Some(e0) = rf.energy(0) {
            out.put_real("exact_0", e0);
            out.put_real("error_0", last.energy - e0);
            if let Some(e) = ql_low {
                out.put_real("qlanczos_error", e - e0);
            }
        }
    }
    Ok(out)
}

fn run_fsqite(cfg: &RunConfig, p: &Problem, reference: &Option<Reference>) -> Result<Outcome> {
    let omega = cfg.omega.expect("validated");
    let mut inner = QiteConfig::new(p.pool.clone(), cfg.step);
    inner.beta_max = cfg.beta_max;
    inner.b_variant = cfg.b_variant;
    inner.reg = cfg.reg;
    inner.grad_tol = cfg.grad_tol;
    inner.s2 = p.s2();
    inner.track_fidelity = cfg.track_fidelity;
    let folded = fold_hamiltonian(&p.h, omega)?;
    let mut cols =
        header(&["ell", "beta", "beta2", "state", "energy", "folded", "s2", "grad_norm", "a_norm", "fidelity_F"]);
    if cfg.qlanczos.is_some() {
        cols.extend(numbered("qlanczos", MAX_VECTORS));
    }
    let mut out = Outcome::new(cols);
    common_summary(&mut out, cfg, p);
    out.put_real("omega", omega);
    let started = Fsqite::new(&p.states[0], &p.h, FoldedConfig { omega, dbeta2: cfg.step, inner });
    let Some(mut run) = record_failure(&mut out, started.map_err(Error::from)) else {
        return Ok(out);
    };

    let first = run.report()?;
    let mut hist = KrylovHistory::new(cfg.step, first.folded_residual());
    let mut observed = vec![first.energy];
    let mut ql = None;
    let mut ql_failures = 0usize;
    loop {
        let r = run.report()?;
        if let Some(src) = cfg.qlanczos {
            ql = match qlanczos_observed(&hist, src, &observed) {
                Ok(v) => Some(v),
                Err(_) => {
                    ql_failures += 1;
                    None
                }
            };
        }
        let mut row = vec![
            r.step.ell.to_string(),
            csv(r.beta),
            csv(r.beta2),
            "0".into(),
            csv(r.energy),
            csv(r.folded_residual()),
            opt(r.step.s2),
            csv(r.step.grad_norm),
            csv(r.step.a_norm),
            opt(r.step.fidelity_f),
        ];
        if cfg.qlanczos.is_some() {
            row.extend(eig_cells(&ql, MAX_VECTORS));
        }
        out.rows.push(row);
        if run.is_done() {
            break;
        }
        let exact_c = match cfg.qlanczos {
            Some(NormSource::Exact) => {
                match record_failure(&mut out, exact_ite(run.state(), &folded, cfg.step).map_err(Error::from)) {
                    Some((_, c)) => Some(c),
                    None => break,
                }
            }
            _ => None,
        };
        let ell = r.step.ell;
        let Some(next) = record_failure(&mut out, run.step().map_err(Error::from)) else { break };
        hist.push(next.folded_residual());
        observed.push(next.energy);
        if let Some(c) = exact_c {
            hist.set_exact_c(ell, c)?;
        }
    }

    let last = run.report()?;
    out.put("steps", last.step.ell.to_string());
    out.put_real("beta2", last.beta2);
    out.put("converged", (last.step.grad_norm < cfg.grad_tol).to_string());
    out.put_real("energy_0", last.energy);
    out.put_real("folded_0", last.folded_residual());
    if let Some(s2) = last.step.s2 {
        out.put_real("s2_0", s2);
    }
    if let Some(e) = ql.as_ref().and_then(|r| r.lowest_physical()) {
        out.put_real("qlanczos_lowest", e);
    }
    if cfg.qlanczos.is_some() {
        out.put("qlanczos_failures", ql_failures.to_string());
    }
    if let Some(rf) = reference {
        if let Some(k) = rf.nearest(omega) {
            let e = rf.spectrum.eigenvalues[k];
            out.put_real("exact_0", e);
            out.put_real("error_0", last.energy - e);
            out.put_real("fidelity_0", run.state().fidelity(&rf.spectrum.vector(k))?);
        }
    }
    Ok(out)
}

fn run_msqite(cfg: &RunConfig, p: &Problem, reference: &Option<Reference>) -> Result<Outcome> {
    let n = p.states.len();
    let mut mcfg = MsqiteConfig::new(p.pool.clone(), cfg.step, cfg.mode);
    mcfg.beta_max = cfg.beta_max;
    mcfg.reg = cfg.reg;
    mcfg.grad_tol = cfg.grad_tol;
    mcfg.s2 = p.s2();
    mcfg.spin_shift = cfg.spin_shift;
    mcfg.orthogonality_term = cfg.orthogonality_term;
    let width = MAX_VECTORS * n;
    let mut cols = header(&["ell", "beta", "state", "energy", "s2", "grad_norm", "a_norm", "max_offdiag_overlap"]);
    cols.extend(numbered("effective", n));
    if cfg.qlanczos.is_some() {
        cols.extend(numbered("msqlanczos", width));
    }
    let mut out = Outcome::new(cols);
    common_summary(&mut out, cfg, p);
    out.put("n_states", n.to_string());
    let Some(mut run) = record_failure(&mut out, Msqite::new(p.states.clone(), &p.h, mcfg).map_err(Error::from)) else {
        return Ok(out);
    };

    let mut ql = None;
    let mut ql_failures = 0usize;
    loop {
        if cfg.qlanczos.is_some() {
            ql = match ms_qlanczos(run.history()) {
                Ok(v) => Some(v),
                Err(_) => {
                    ql_failures += 1;
                    None
                }
            };
        }
        let r = run.report().clone();
        let mut tail: Vec<String> = r.effective.iter().map(|&e| csv(e)).collect();
        if cfg.qlanczos.is_some() {
            tail.extend(eig_cells(&ql, width));
        }
        for i in 0..n {
            let mut row = vec![
                r.ell.to_string(),
                csv(r.beta),
                i.to_string(),
                csv(r.energies[i]),
                opt(r.s2[i]),
                csv(r.grad_norms[i]),
                csv(r.a_norms[i]),
                csv(r.max_offdiag_overlap),
            ];
            row.extend(tail.iter().cloned());
            out.rows.push(row);
        }
        if run.is_done() {
            break;
        }
        if record_failure(&mut out, run.step().map_err(Error::from)).is_none() {
            break;
        }
    }

    let last = run.report();
    out.put("steps", last.ell.to_string());
    out.put_real("beta", last.beta);
    out.put("converged", run.is_converged().to_string());
    out.put_real("max_offdiag_overlap", last.max_offdiag_overlap);
    for i in 0..n {
        out.put_real(format!("energy_{i}"), last.energies[i]);
        if let Some(s2) = last.s2[i] {
            out.put_real(format!("s2_{i}"), s2);
        }
        out.put_real(format!("effective_{i}"), last.effective[i]);
    }
    let ql_vals = ql.as_ref().map(|r| r.physical()).unwrap_or_default();
    for (k, e) in ql_vals.iter().enumerate().take(n) {
        out.put_real(format!("msqlanczos_{k}"), *e);
    }
    if cfg.qlanczos.is_some() {
        out.put("qlanczos_failures", ql_failures.to_string());
    }
    if let Some(rf) = reference {
        if let Some(s) = rf.spin_label {
            out.put_real("reference_s2", s);
        }
        for i in 0..n {
            if let Some(e) = rf.energy(i) {
                out.put_real(format!("exact_{i}"), e);
                out.put_real(format!("error_{i}"), last.effective[i] - e);
            }
        }
    }
    Ok(out)
}

/// Loads, runs and writes. Configuration and input problems are reported
/// before the output directory is touched; a numerical abort still writes
/// the partial trace and a summary naming the failure.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let p = Problem::load(cfg)?;
    let reference = Reference::compute(&p, cfg)?;
    let out = match cfg.method {
        Method::Qite => run_qite(cfg, &p, &reference)?,
        Method::Fsqite => run_fsqite(cfg, &p, &reference)?,
        Method::Msqite => run_msqite(cfg, &p, &reference)?,
    };
    out.write(&cfg.output)?;
    Ok(out)
}
