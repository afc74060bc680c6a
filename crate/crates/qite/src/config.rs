//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` comments, no sections. Every key is checked
//! against [`KEYS`] and every value is parsed before a run touches the
//! Hamiltonian, so a bad file fails fast with exit status 2. Relative paths
//! resolve against the directory of the configuration file.
//!
//! | key | value | default |
//! |---|---|---|
//! | `hamiltonian` | path | required |
//! | `format` | `fcidump` or `pauli` | `fcidump` |
//! | `n_qubits` | qubit count, `pauli` format only | |
//! | `n_electrons`, `ms2` | electron count and `2 m_s`, `pauli` format with the `uccsd` pool | |
//! | `method` | `qite`, `fsqite`, `msqite` | `qite` |
//! | `mode` | `state_specific`, `state_averaged` | `state_specific` |
//! | `pool` | `uccsd`, `uccgsd`, `hamiltonian`, `file` | `uccgsd` |
//! | `pool_file` | Pauli text listing, with `pool = file` | |
//! | `epsilon` | Hamiltonian-pool screening threshold, Hartree | `0` |
//! | `dbeta` | imaginary-time step, a.u. (`qite`, `msqite`) | `0.1` |
//! | `dbeta2` | folded step, a.u.^2 (`fsqite`) | `0.05` |
//! | `omega` | target energy, Hartree (`fsqite`) | required for `fsqite` |
//! | `beta_max` | time limit, a.u. (a.u.^2 for `fsqite`) | `20` |
//! | `b_variant` | `commutator`, `legacy` | `commutator` |
//! | `reg` | Tikhonov parameter of the amplitude solve | `0` |
//! | `grad_tol` | stop once every gradient norm is below this | `1e-6` |
//! | `states` | initial states, e.g. `0011 pair(0110,1001,1)` | reference determinant |
//! | `n_states` | must equal the number of `states` when given | |
//! | `spin_shift_lambda`, `spin_shift_s` | spin-shift strength (Hartree) and target `s` | off |
//! | `orthogonality_term` | `true`, `false` | `true` |
//! | `qlanczos` | `on`, `off` | `off` |
//! | `norm_estimator` | `exact`, `energy_shifted`, `reference_shifted`, `first_order` | `energy_shifted` |
//! | `track_fidelity` | `true`, `false` | `false` |
//! | `output` | output directory | required |
//!
//! Bitstrings list qubit 0 on the right and must have one digit per qubit.
//! `pair(a,b,s)` is `(|a> + (-1)^s |b>) / sqrt 2`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qite_core::{BVariant, MsqiteMode, NormEstimator, NormSource, PoolKind};

use crate::error::{Error, Result};

pub const KEYS: &[&str] = &[
    "hamiltonian",
    "format",
    "n_qubits",
    "n_electrons",
    "ms2",
    "method",
    "mode",
    "pool",
    "pool_file",
    "epsilon",
    "dbeta",
    "dbeta2",
    "omega",
    "beta_max",
    "b_variant",
    "reg",
    "grad_tol",
    "states",
    "n_states",
    "spin_shift_lambda",
    "spin_shift_s",
    "orthogonality_term",
    "qlanczos",
    "norm_estimator",
    "track_fidelity",
    "output",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Qite,
    Fsqite,
    Msqite,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HamiltonianSource {
    Fcidump(PathBuf),
    Pauli { path: PathBuf, n_qubits: usize, electrons: Option<(usize, i32)> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum PoolSpec {
    Built(PoolKind),
    File(PathBuf),
}

/// Initial state as written; the width is checked once the qubit count is known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateText {
    Bits { bits: u64, width: usize },
    Pair { a: u64, b: u64, width: usize, s: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub hamiltonian: HamiltonianSource,
    pub method: Method,
    pub mode: MsqiteMode,
    pub pool: PoolSpec,
    pub epsilon: f64,
    /// `dbeta`, or `dbeta2` for the folded method.
    pub step: f64,
    pub omega: Option<f64>,
    pub beta_max: f64,
    pub b_variant: BVariant,
    pub reg: f64,
    pub grad_tol: f64,
    pub states: Vec<StateText>,
    pub spin_shift: Option<(f64, f64)>,
    pub orthogonality_term: bool,
    pub qlanczos: Option<NormSource>,
    pub track_fidelity: bool,
    pub output: PathBuf,
}

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => {
                v.parse::<T>().map(Some).map_err(|_| cfg_err(line, format!("{key}: expected {what}, got {v:?}")))
            }
        }
    }

    fn real(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(Some(x)),
                _ => Err(cfg_err(line, format!("{key}: expected a finite number, got {v:?}"))),
            },
        }
    }

    fn word<T>(&mut self, key: &str, options: &[(&str, T)]) -> Result<Option<T>>
    where
        T: Copy,
    {
        match self.take(key) {
            None => Ok(None),
            Some((line, v)) => options.iter().find(|(w, _)| *w == v).map(|(_, t)| Some(*t)).ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(w, _)| *w).collect();
                cfg_err(line, format!("{key}: expected one of {}, got {v:?}", names.join(", ")))
            }),
        }
    }

    fn flag(&mut self, key: &str) -> Result<Option<bool>> {
        self.word(key, &[("true", true), ("false", false)])
    }
}

fn bits_of(tok: &str, line: usize) -> Result<(u64, usize)> {
    if tok.is_empty() || tok.len() > 64 || !tok.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(cfg_err(line, format!("states: {tok:?} is not a bitstring")));
    }
    Ok((u64::from_str_radix(tok, 2).expect("checked digits"), tok.len()))
}

/// Splits on whitespace outside parentheses.
fn split_states(v: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for ch in v.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if ch.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else if !ch.is_whitespace() {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_state(tok: &str, line: usize) -> Result<StateText> {
    if let Some(inner) = tok.strip_prefix("pair(").and_then(|t| t.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 3 {
            return Err(cfg_err(line, format!("states: {tok:?} must be pair(a,b,s)")));
        }
        let (a, wa) = bits_of(parts[0], line)?;
        let (b, wb) = bits_of(parts[1], line)?;
        if wa != wb {
            return Err(cfg_err(line, format!("states: {tok:?} has patterns of different length")));
        }
        let s: u32 = parts[2].parse().map_err(|_| cfg_err(line, format!("states: bad sign index in {tok:?}")))?;
        return Ok(StateText::Pair { a, b, width: wa, s });
    }
    let (bits, width) = bits_of(tok, line)?;
    Ok(StateText::Bits { bits, width })
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<RunConfig> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| cfg_err(line, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            if !KEYS.contains(&key) {
                return Err(cfg_err(line, format!("unknown key {key:?}")));
            }
            if value.is_empty() {
                return Err(cfg_err(line, format!("{key} has no value")));
            }
            if let Some((first, _)) = map.insert(key.to_string(), (line, value.to_string())) {
                return Err(cfg_err(line, format!("{key} already set on line {first}")));
            }
        }
        let mut e = Entries { map };
        let path = |v: String| -> PathBuf {
            let p = PathBuf::from(v);
            if p.is_absolute() {
                p
            } else {
                base.join(p)
            }
        };

        let (_, ham) = e.take("hamiltonian").ok_or_else(|| Error::Config("missing key \"hamiltonian\"".into()))?;
        let format = e.word("format", &[("fcidump", false), ("pauli", true)])?.unwrap_or(false);
        let n_qubits: Option<usize> = e.parse("n_qubits", "a qubit count")?;
        let n_electrons: Option<usize> = e.parse("n_electrons", "an electron count")?;
        let ms2: Option<i32> = e.parse("ms2", "an integer")?;
        let hamiltonian = if format {
            let n = n_qubits.ok_or_else(|| Error::Config("pauli format needs n_qubits".into()))?;
            if n == 0 || n > qite_core::state::MAX_STATE_QUBITS {
                return Err(Error::Config(format!("n_qubits must be in 1..={}", qite_core::state::MAX_STATE_QUBITS)));
            }
            let electrons = match (n_electrons, ms2) {
                (Some(ne), Some(m)) => Some((ne, m)),
                (None, None) => None,
                _ => return Err(Error::Config("n_electrons and ms2 go together".into())),
            };
            HamiltonianSource::Pauli { path: path(ham), n_qubits: n, electrons }
        } else {
            if n_qubits.is_some() || n_electrons.is_some() || ms2.is_some() {
                return Err(Error::Config("n_qubits, n_electrons and ms2 apply to the pauli format only".into()));
            }
            HamiltonianSource::Fcidump(path(ham))
        };

        let method = e
            .word("method", &[("qite", Method::Qite), ("fsqite", Method::Fsqite), ("msqite", Method::Msqite)])?
            .unwrap_or(Method::Qite);
        let mode_given = e.map.contains_key("mode");
        let mode = e
            .word(
                "mode",
                &[("state_specific", MsqiteMode::StateSpecific), ("state_averaged", MsqiteMode::StateAveraged)],
            )?
            .unwrap_or(MsqiteMode::StateSpecific);
        let pool_word = e.word(
            "pool",
            &[
                ("uccsd", Some(PoolKind::Uccsd)),
                ("uccgsd", Some(PoolKind::Uccgsd)),
                ("hamiltonian", Some(PoolKind::Hamiltonian)),
                ("file", None),
            ],
        )?;
        let pool_file = e.take("pool_file");
        let pool = match (pool_word, pool_file) {
            (Some(None), Some((_, p))) => PoolSpec::File(path(p)),
            (Some(None), None) => return Err(Error::Config("pool = file needs pool_file".into())),
            (_, Some((line, _))) => return Err(cfg_err(line, "pool_file needs pool = file")),
            (Some(Some(k)), None) => PoolSpec::Built(k),
            (None, None) => PoolSpec::Built(PoolKind::Uccgsd),
        };
        if let (HamiltonianSource::Pauli { electrons, .. }, PoolSpec::Built(kind)) = (&hamiltonian, &pool) {
            match kind {
                PoolKind::Hamiltonian => {
                    return Err(Error::Config("the hamiltonian pool needs integrals; use the fcidump format".into()))
                }
                PoolKind::Uccsd if electrons.is_none() => {
                    return Err(Error::Config("the uccsd pool with the pauli format needs n_electrons and ms2".into()))
                }
                _ => {}
            }
        }
        let epsilon = e.real("epsilon")?.unwrap_or(0.0);
        if epsilon < 0.0 {
            return Err(Error::Config("epsilon must be non-negative".into()));
        }

        let dbeta = e.real("dbeta")?;
        let dbeta2 = e.real("dbeta2")?;
        let omega = e.real("omega")?;
        let step = match method {
            Method::Fsqite => {
                if dbeta.is_some() {
                    return Err(Error::Config("fsqite takes dbeta2, not dbeta".into()));
                }
                if omega.is_none() {
                    return Err(Error::Config("fsqite needs omega".into()));
                }
                dbeta2.unwrap_or(0.05)
            }
            _ => {
                if dbeta2.is_some() || omega.is_some() {
                    return Err(Error::Config("dbeta2 and omega apply to fsqite only".into()));
                }
                dbeta.unwrap_or(0.1)
            }
        };
        if !(step > 0.0) {
            return Err(Error::Config("the time step must be positive".into()));
        }
        let beta_max = e.real("beta_max")?.unwrap_or(20.0);
        if !(beta_max >= step) {
            return Err(Error::Config("beta_max must be at least one step".into()));
        }
        let b_variant = e
            .word("b_variant", &[("commutator", BVariant::Commutator), ("legacy", BVariant::Legacy)])?
            .unwrap_or(BVariant::Commutator);
        let reg = e.real("reg")?.unwrap_or(0.0);
        let grad_tol = e.real("grad_tol")?.unwrap_or(1e-6);
        if reg < 0.0 || grad_tol < 0.0 {
            return Err(Error::Config("reg and grad_tol must be non-negative".into()));
        }

        let states = match e.take("states") {
            None => Vec::new(),
            Some((line, v)) => split_states(&v).iter().map(|t| parse_state(t, line)).collect::<Result<_>>()?,
        };
        if let Some((line, v)) = e.take("n_states") {
            let n: usize = v.parse().map_err(|_| cfg_err(line, format!("n_states: expected a count, got {v:?}")))?;
            if n != states.len().max(1) {
                return Err(cfg_err(line, format!("n_states = {n} but {} states are listed", states.len())));
            }
        }
        match method {
            Method::Msqite if states.is_empty() => return Err(Error::Config("msqite needs states".into())),
            Method::Qite | Method::Fsqite if states.len() > 1 => {
                return Err(Error::Config("qite and fsqite take a single initial state".into()))
            }
            Method::Qite | Method::Fsqite if mode_given => {
                return Err(Error::Config("mode applies to msqite only".into()))
            }
            _ => {}
        }

        let lambda = e.real("spin_shift_lambda")?;
        let target_s = e.real("spin_shift_s")?;
        let spin_shift = match (lambda, target_s) {
            (None, None) => None,
            (Some(l), s) => {
                if method != Method::Msqite {
                    return Err(Error::Config("the spin shift applies to msqite only".into()));
                }
                let s = s.unwrap_or(0.0);
                if l < 0.0 || s < 0.0 || (2.0 * s).fract() != 0.0 {
                    return Err(Error::Config("spin_shift_lambda must be >= 0 and spin_shift_s a half-integer".into()));
                }
                Some((l, s))
            }
            (None, Some(_)) => return Err(Error::Config("spin_shift_s needs spin_shift_lambda".into())),
        };
        let orthogonality_term = e.flag("orthogonality_term")?.unwrap_or(true);
        let ql = e.word("qlanczos", &[("on", true), ("off", false)])?.unwrap_or(false);
        let estimator = e.word(
            "norm_estimator",
            &[
                ("exact", NormSource::Exact),
                ("energy_shifted", NormSource::Estimate(NormEstimator::EnergyShifted)),
                ("reference_shifted", NormSource::Estimate(NormEstimator::ReferenceShifted)),
                ("first_order", NormSource::Estimate(NormEstimator::FirstOrder)),
            ],
        )?;
        if estimator.is_some() && !ql {
            return Err(Error::Config("norm_estimator needs qlanczos = on".into()));
        }
        if method == Method::Msqite && estimator.is_some() {
            return Err(Error::Config("MS-QLanczos uses the d-matrix history; norm_estimator does not apply".into()));
        }
        let qlanczos = ql.then(|| estimator.unwrap_or(NormSource::Estimate(NormEstimator::EnergyShifted)));
        let track_fidelity = e.flag("track_fidelity")?.unwrap_or(false);
        if track_fidelity && method == Method::Msqite {
            return Err(Error::Config("track_fidelity applies to qite and fsqite".into()));
        }
        let (_, out) = e.take("output").ok_or_else(|| Error::Config("missing key \"output\"".into()))?;

        debug_assert!(e.map.is_empty(), "every known key is consumed");
        Ok(RunConfig {
            hamiltonian,
            method,
            mode,
            pool,
            epsilon,
            step,
            omega,
            beta_max,
            b_variant,
            reg,
            grad_tol,
            states,
            spin_shift,
            orthogonality_term,
            qlanczos,
            track_fidelity,
            output: path(out),
        })
    }

    pub fn read(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        RunConfig::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}
