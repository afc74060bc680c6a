//! Line-oriented Pauli text.
//!
//! Each line is `<coeff> <P><q> <P><q> ...` with `P` one of `X`, `Y`, `Z` and
//! `q` a zero-based qubit; a bare coefficient is the identity. Coefficients
//! are real numbers or `(re,im)` pairs. `#` starts a comment. Repeated
//! strings are summed.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use qite_core::{OperatorPool, Pauli, PauliString, PauliSum, PoolKind};

use crate::error::{Error, Result};
use crate::format::{fmt_sig, PAULI_DIGITS};

fn parse_real(tok: &str, line: usize) -> Result<f64> {
    tok.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("bad coefficient {tok:?}")))
}

fn parse_coeff(tok: &str, line: usize) -> Result<Complex64> {
    match tok.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        Some(inner) => {
            let (re, im) = inner
                .split_once(',')
                .ok_or_else(|| Error::parse(line, format!("complex coefficient needs `(re,im)`: {tok:?}")))?;
            Ok(Complex64::new(parse_real(re.trim(), line)?, parse_real(im.trim(), line)?))
        }
        None => Ok(Complex64::new(parse_real(tok, line)?, 0.0)),
    }
}

fn parse_op(tok: &str, n_qubits: usize, line: usize) -> Result<(Pauli, usize)> {
    let mut chars = tok.chars();
    let op = match chars.next().map(|c| c.to_ascii_uppercase()) {
        Some('X') => Pauli::X,
        Some('Y') => Pauli::Y,
        Some('Z') => Pauli::Z,
        _ => return Err(Error::parse(line, format!("bad Pauli factor {tok:?}"))),
    };
    let q: usize = chars.as_str().parse().map_err(|_| Error::parse(line, format!("bad qubit index in {tok:?}")))?;
    if q >= n_qubits {
        return Err(Error::parse(line, format!("qubit {q} out of range for {n_qubits} qubits")));
    }
    Ok((op, q))
}

/// One parsed line: coefficient, string and the comment text, if any.
fn parse_line(raw: &str, n_qubits: usize, line: usize) -> Result<Option<(Complex64, PauliString, Option<String>)>> {
    let (body, comment) = match raw.split_once('#') {
        Some((b, c)) => (b, Some(c.trim().to_string())),
        None => (raw, None),
    };
    let mut toks = body.split_whitespace();
    let Some(first) = toks.next() else { return Ok(None) };
    let coeff = parse_coeff(first, line)?;
    let mut ops = Vec::new();
    let mut used = 0u64;
    for tok in toks {
        let (op, q) = parse_op(tok, n_qubits, line)?;
        if used & (1 << q) != 0 {
            return Err(Error::parse(line, format!("qubit {q} appears twice")));
        }
        used |= 1 << q;
        ops.push((op, q));
    }
    // distinct qubits: the product picks up no phase
    let (_, s) = PauliString::from_ops(&ops);
    Ok(Some((coeff, s, comment)))
}

pub fn parse_pauli_text(text: &str, n_qubits: usize) -> Result<PauliSum> {
    let mut sum = PauliSum::zero(n_qubits)?;
    for (k, raw) in text.lines().enumerate() {
        if let Some((c, s, _)) = parse_line(raw, n_qubits, k + 1)? {
            sum.add_string(s, c);
        }
    }
    Ok(sum)
}

fn write_coeff(out: &mut String, c: Complex64) {
    if c.im == 0.0 {
        out.push_str(&fmt_sig(c.re, PAULI_DIGITS));
    } else {
        let _ = write!(out, "({},{})", fmt_sig(c.re, PAULI_DIGITS), fmt_sig(c.im, PAULI_DIGITS));
    }
}

fn write_string(out: &mut String, s: &PauliString) {
    if !s.is_identity() {
        let _ = write!(out, " {s}");
    }
}

/// Canonical text: one term per line in `(z, x)` order.
pub fn write_pauli_text(sum: &PauliSum) -> String {
    let mut out = String::new();
    for (s, c) in sum.iter() {
        write_coeff(&mut out, *c);
        write_string(&mut out, s);
        out.push('\n');
    }
    out
}

/// Pool listing in pool order, each line tagged with its provenance and,
/// for Hamiltonian pools, the integral magnitude that produced it.
pub fn write_pool(pool: &OperatorPool) -> String {
    let mut out = String::new();
    for ((s, kind), mag) in pool.generators.iter().zip(&pool.provenance).zip(&pool.source_magnitude) {
        out.push('1');
        write_string(&mut out, s);
        let _ = write!(out, " # {}", kind.name());
        if let Some(m) = mag {
            let _ = write!(out, " {}", fmt_sig(*m, PAULI_DIGITS));
        }
        out.push('\n');
    }
    out
}

/// Reads a pool listing. Coefficients are ignored; a leading provenance
/// word in the comment is kept, otherwise `default_kind` is used.
pub fn parse_pool(text: &str, n_qubits: usize, default_kind: PoolKind) -> Result<OperatorPool> {
    let mut pool = OperatorPool::new(n_qubits);
    let mut strings = Vec::new();
    let mut kinds = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let Some((_, s, comment)) = parse_line(raw, n_qubits, k + 1)? else { continue };
        if s.is_identity() {
            return Err(Error::parse(k + 1, "identity is not a valid generator"));
        }
        let kind = comment
            .as_deref()
            .and_then(|c| c.split_whitespace().next())
            .and_then(|w| w.parse::<PoolKind>().ok())
            .unwrap_or(default_kind);
        strings.push(s);
        kinds.push(kind);
    }
    let mut seen = std::collections::BTreeSet::new();
    for (s, kind) in strings.into_iter().zip(kinds) {
        if seen.insert(s) {
            pool.generators.push(s);
            pool.provenance.push(kind);
            pool.source_magnitude.push(None);
        }
    }
    if pool.is_empty() {
        return Err(Error::Numerical(qite_core::Error::EmptyPool));
    }
    Ok(pool)
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn read_pauli_text(path: &Path, n_qubits: usize) -> Result<PauliSum> {
    parse_pauli_text(&read_text(path)?, n_qubits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_term() {
        let s = parse_pauli_text("0.5 X0 Z2", 3).unwrap();
        assert_eq!(s.len(), 1);
        let (_, want) = PauliString::from_ops(&[(Pauli::X, 0), (Pauli::Z, 2)]);
        assert_eq!(s.coeff(&want), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn cancellation() {
        assert!(parse_pauli_text("1.0 Z0\n-1.0 Z0\n", 1).unwrap().is_empty());
    }

    #[test]
    fn qubit_order_does_not_matter() {
        assert_eq!(parse_pauli_text("0.25 Y1 Y0", 2).unwrap(), parse_pauli_text("0.25 Y0 Y1", 2).unwrap());
    }

    #[test]
    fn identity_and_complex() {
        let s = parse_pauli_text("# header\n-1.5\n(0,0.5) Y0\n\n", 1).unwrap();
        assert_eq!(s.constant(), Complex64::new(-1.5, 0.0));
        assert_eq!(s.coeff(&PauliString::single(Pauli::Y, 0)), Complex64::new(0.0, 0.5));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["0.5 X3", "0.5 W0", "abc Z0", "0.5 X0 Z0", "(1,2 Z0", "0.5 Xa"] {
            assert!(matches!(parse_pauli_text(bad, 3), Err(Error::Parse { line: 1, .. })), "{bad}");
        }
    }

    #[test]
    fn writer_is_canonical() {
        let text = "0.1 X1\n-0.7\n0.2 Z0\n(0.3,-0.4) Y0 X1\n";
        let written = write_pauli_text(&parse_pauli_text(text, 2).unwrap());
        assert_eq!(written, "-0.7\n0.1 X1\n0.2 Z0\n(0.3,-0.4) Y0 X1\n");
        assert_eq!(write_pauli_text(&parse_pauli_text(&written, 2).unwrap()), written);
    }

    #[test]
    fn pool_listing_round_trip() {
        let text = "1 X0 Y1 # uccgsd\n1 Y0 X1 # hamiltonian 0.25\n1 X0 Y1\n";
        let pool = parse_pool(text, 2, PoolKind::Uccsd).unwrap();
        assert_eq!(pool.len(), 2);
        assert_eq!(pool.provenance, vec![PoolKind::Uccgsd, PoolKind::Hamiltonian]);
        let again = parse_pool(&write_pool(&pool), 2, PoolKind::Uccsd).unwrap();
        assert_eq!(again.generators, pool.generators);
        assert!(parse_pool("1\n", 2, PoolKind::Uccsd).is_err());
    }
}
