//! FCIDUMP reader.
//!
//! The namelist header must define `NORB`, `NELEC` and `MS2`; other keys are
//! ignored. Each data line is `value i a j b` with 1-based spatial indices:
//! `i a 0 0` is `h_ia`, `0 0 0 0` the core energy and anything else `(ia|jb)`.

use std::path::Path;

use qite_core::SpinOrbitalIntegrals;

use crate::error::{Error, Result};

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    tok.replace(['D', 'd'], "e")
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(line, format!("not a number: {tok:?}")))
}

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i32,
    end_line: usize,
}

fn parse_header(lines: &[&str]) -> Result<Header> {
    let mut text = String::new();
    let mut end_line = None;
    for (k, l) in lines.iter().enumerate() {
        let up = l.to_ascii_uppercase();
        if let Some(pos) = up.find("&END").or_else(|| up.trim().eq("/").then_some(0)) {
            text.push_str(&l[..pos]);
            end_line = Some(k);
            break;
        }
        text.push_str(l);
        text.push(' ');
    }
    let end_line = end_line.ok_or_else(|| Error::parse(1, "namelist header not terminated by &END"))?;
    let body = text.trim_start();
    let body = body
        .strip_prefix("&FCI")
        .or_else(|| body.strip_prefix("&fci"))
        .ok_or_else(|| Error::parse(1, "missing &FCI header"))?;

    let mut entries: Vec<(String, Vec<String>)> = Vec::new();
    for tok in body.replace(',', " ").split_whitespace() {
        if let Some((k, v)) = tok.split_once('=') {
            let mut vals = Vec::new();
            if !v.is_empty() {
                vals.push(v.to_string());
            }
            entries.push((k.to_ascii_uppercase(), vals));
        } else if let Some(last) = entries.last_mut() {
            last.1.push(tok.to_string());
        } else {
            return Err(Error::parse(1, format!("unexpected header token {tok:?}")));
        }
    }
    let get = |key: &str| -> Result<&str> {
        entries
            .iter()
            .find(|(k, _)| k == key)
            .and_then(|(_, v)| v.first())
            .map(|s| s.as_str())
            .ok_or_else(|| Error::parse(1, format!("header is missing {key}")))
    };
    let int = |key: &str| -> Result<i64> {
        let v = get(key)?;
        v.parse::<i64>().map_err(|_| Error::parse(1, format!("{key} is not an integer: {v:?}")))
    };
    let norb = int("NORB")?;
    let nelec = int("NELEC")?;
    let ms2 = int("MS2")?;
    if norb <= 0 || nelec < 0 {
        return Err(Error::parse(1, "NORB must be positive and NELEC non-negative"));
    }
    Ok(Header { norb: norb as usize, nelec: nelec as usize, ms2: ms2 as i32, end_line })
}

/// Parses FCIDUMP text.
pub fn parse_fcidump(text: &str) -> Result<SpinOrbitalIntegrals> {
    let lines: Vec<&str> = text.lines().collect();
    let hdr = parse_header(&lines)?;
    let mut ints =
        SpinOrbitalIntegrals::new(hdr.norb, hdr.nelec, hdr.ms2).map_err(|e| Error::parse(1, e.to_string()))?;
    for (k, l) in lines.iter().enumerate().skip(hdr.end_line + 1) {
        let line = k + 1;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        if toks.len() != 5 {
            return Err(Error::parse(line, "expected `value i a j b`"));
        }
        let v = parse_value(toks[0], line)?;
        let mut idx = [0usize; 4];
        for (slot, t) in idx.iter_mut().zip(&toks[1..]) {
            let i: usize = t.parse().map_err(|_| Error::parse(line, format!("bad index {t:?}")))?;
            if i > hdr.norb {
                return Err(Error::parse(line, format!("index {i} exceeds NORB = {}", hdr.norb)));
            }
            *slot = i;
        }
        let range = |line| Error::parse(line, "index out of range");
        match idx {
            [0, 0, 0, 0] => ints.e_core = v,
            [i, a, 0, 0] if i > 0 && a > 0 => ints.set_h(i - 1, a - 1, v).map_err(|_| range(line))?,
            [i, a, j, b] if i > 0 && a > 0 && j > 0 && b > 0 => {
                ints.set_g(i - 1, a - 1, j - 1, b - 1, v).map_err(|_| range(line))?
            }
            _ => return Err(Error::parse(line, "unsupported index pattern")),
        }
    }
    Ok(ints)
}

pub fn read_fcidump(path: &Path) -> Result<SpinOrbitalIntegrals> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_fcidump(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = " &FCI NORB=2,NELEC=2,MS2=0,\n  ORBSYM=1,1,\n  ISYM=1,\n &END\n";

    #[test]
    fn one_body_and_core() {
        let ints = parse_fcidump(&format!("{HEAD}1.5 1 1 0 0\n0.7 0 0 0 0\n-0.25 2 1 0 0\n")).unwrap();
        assert_eq!(ints.h(0, 0), 1.5);
        assert_eq!(ints.h(0, 1), -0.25);
        assert_eq!(ints.h(1, 0), -0.25);
        assert_eq!(ints.e_core, 0.7);
    }

    #[test]
    fn two_body_symmetrized() {
        let ints = parse_fcidump(&format!("{HEAD}0.3 2 1 1 1\n")).unwrap();
        for (p, r, q, s) in [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)] {
            assert_eq!(ints.g(p, r, q, s), 0.3);
        }
        assert_eq!(ints.g(1, 1, 0, 0), 0.0);
    }

    #[test]
    fn fortran_exponent() {
        let ints = parse_fcidump(&format!("{HEAD}1.0D-2 1 1 0 0\n")).unwrap();
        assert_eq!(ints.h(0, 0), 0.01);
    }

    #[test]
    fn header_errors() {
        assert!(parse_fcidump(" &FCI NORB=2,MS2=0,\n &END\n").is_err());
        assert!(parse_fcidump(" &FCI NORB=2,NELEC=2,MS2=0,\n").is_err());
    }

    #[test]
    fn data_errors() {
        assert!(matches!(parse_fcidump(&format!("{HEAD}1.0 3 1 0 0\n")), Err(Error::Parse { line: 5, .. })));
        assert!(matches!(parse_fcidump(&format!("{HEAD}abc 1 1 0 0\n")), Err(Error::Parse { line: 5, .. })));
        assert!(parse_fcidump(&format!("{HEAD}1.0 1 0 1 0\n")).is_err());
    }
}
