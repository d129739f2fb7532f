//! Plain-text file formats: integer sets, family files with provenance
//! headers, hypergraph triple lists, basis files, and matching
//! certificates.
//!
//! All formats are line-oriented. Lines starting with `#` carry
//! metadata; a set reader ignores them, so family and basis files double
//! as set files. Writers always emit sorted content, readers are
//! lenient about order and re-validate everything they load.

use std::path::Path;

use crate::arith::PrimeTable;
use crate::basis::{Basis, MatchingCertificate};
use crate::constructions::{FamilySpec, LinearHypergraph};
use crate::error::{Error, Result};
use crate::property::IntegerSet;

/// Parses a set from text: one positive decimal per line, `#` lines and
/// blank lines ignored. Duplicates and zeros are rejected.
pub fn parse_set_text(text: &str) -> Result<IntegerSet> {
    let mut elements = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: u64 = line.parse().map_err(|_| {
            Error::Parse(format!("line {}: expected a positive integer, got '{line}'", lineno + 1))
        })?;
        elements.push(value);
    }
    IntegerSet::new(elements)
}

/// Reads a set file from disk. See [`parse_set_text`].
pub fn read_set_file(path: &Path) -> Result<IntegerSet> {
    parse_set_text(&std::fs::read_to_string(path)?)
}

/// Renders a family file: a provenance header followed by one element
/// per line in increasing order.
pub fn format_family_file(spec: &FamilySpec, set: &IntegerSet) -> String {
    let mut out = format!(
        "# n={} h={} seed={} cut={}\n",
        spec.n,
        spec.h,
        spec.seed,
        spec.cut.label(spec.n)
    );
    for &x in set.elements() {
        out.push_str(&x.to_string());
        out.push('\n');
    }
    out
}

/// Renders a hypergraph file: one triple per line, three space-separated
/// primes in increasing order.
pub fn format_hypergraph_file(g: &LinearHypergraph) -> String {
    let mut out = String::new();
    for t in &g.triples {
        out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
    }
    out
}

/// Parses a hypergraph from text: one triple per line, `#` and blank
/// lines ignored. Triple members may appear in any order; the vertex set
/// is the union of all members. Linearity is re-validated.
pub fn parse_hypergraph_text(text: &str) -> Result<LinearHypergraph> {
    let mut triples: Vec<[u64; 3]> = Vec::new();
    let mut vertices: Vec<u64> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!(
                "line {}: expected three space-separated integers, got '{line}'",
                lineno + 1
            )));
        }
        let mut t = [0u64; 3];
        for (slot, part) in t.iter_mut().zip(&parts) {
            *slot = part.parse().map_err(|_| {
                Error::Parse(format!(
                    "line {}: expected a positive integer, got '{part}'",
                    lineno + 1
                ))
            })?;
        }
        t.sort_unstable();
        if t[0] == t[1] || t[1] == t[2] {
            return Err(Error::Parse(format!(
                "line {}: triple members must be distinct",
                lineno + 1
            )));
        }
        vertices.extend_from_slice(&t);
        triples.push(t);
    }
    triples.sort_unstable();
    vertices.sort_unstable();
    vertices.dedup();
    let g = LinearHypergraph { vertices, triples };
    g.validate_linear()?;
    Ok(g)
}

/// Reads a hypergraph file from disk. See [`parse_hypergraph_text`].
pub fn read_hypergraph_file(path: &Path) -> Result<LinearHypergraph> {
    parse_hypergraph_text(&std::fs::read_to_string(path)?)
}

/// Renders a basis file: `# n=… h=… size=… verified=true` followed by
/// one element per line. Only verified bases are written.
pub fn format_basis_file(basis: &Basis) -> Result<String> {
    if !basis.coverage_verified() {
        return Err(Error::InvalidArgument(
            "refusing to write a basis without verified coverage".into(),
        ));
    }
    let mut out = format!(
        "# n={} h={} size={} verified=true\n",
        basis.universe(),
        basis.order(),
        basis.len()
    );
    for &b in basis.elements() {
        out.push_str(&b.to_string());
        out.push('\n');
    }
    Ok(out)
}

fn header_fields(line: &str) -> Result<Vec<(String, String)>> {
    let body = line.trim_start_matches('#').trim();
    let mut fields = Vec::new();
    for token in body.split_whitespace() {
        let (key, value) = token.split_once('=').ok_or_else(|| {
            Error::Parse(format!("malformed header token '{token}', expected key=value"))
        })?;
        fields.push((key.to_string(), value.to_string()));
    }
    Ok(fields)
}

fn header_u64(fields: &[(String, String)], key: &str) -> Result<u64> {
    let raw = fields
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse(format!("header is missing '{key}='")))?;
    raw.parse()
        .map_err(|_| Error::Parse(format!("header field '{key}' is not an integer: '{raw}'")))
}

/// Parses a basis file and re-verifies its coverage from scratch. A file
/// whose elements do not actually cover the stated universe is rejected,
/// whatever its header claims.
pub fn parse_basis_text(text: &str, table: &PrimeTable) -> Result<Basis> {
    let mut lines = text.lines();
    let header = loop {
        match lines.next() {
            Some(l) if l.trim().is_empty() => continue,
            Some(l) if l.trim_start().starts_with('#') => break l.to_string(),
            Some(l) => {
                return Err(Error::Parse(format!(
                    "expected a basis header line starting with '#', got '{l}'"
                )))
            }
            None => return Err(Error::Parse("empty basis file".into())),
        }
    };
    let fields = header_fields(&header)?;
    let n = header_u64(&fields, "n")?;
    let h = header_u64(&fields, "h")?;
    let size = header_u64(&fields, "size")?;
    let verified = fields
        .iter()
        .find(|(k, _)| k == "verified")
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse("header is missing 'verified='".into()))?;
    if verified != "true" {
        return Err(Error::Parse(format!(
            "only verified bases are accepted, header says verified={verified}"
        )));
    }
    let h: u32 = h
        .try_into()
        .map_err(|_| Error::Parse(format!("order {h} is out of range")))?;

    let mut elements = Vec::new();
    for (lineno, raw) in lines.enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let value: u64 = line.parse().map_err(|_| {
            Error::Parse(format!("line {}: expected a positive integer, got '{line}'", lineno + 2))
        })?;
        elements.push(value);
    }
    if elements.len() as u64 != size {
        return Err(Error::Parse(format!(
            "header claims size={size} but the file lists {} elements",
            elements.len()
        )));
    }
    elements.sort_unstable();
    let basis = Basis::from_parts(h, n, elements, table)?;
    if !basis.coverage_verified() {
        return Err(Error::Parse(
            "basis file claims verified coverage, but re-verification failed".into(),
        ));
    }
    Ok(basis)
}

/// Reads a basis file from disk. See [`parse_basis_text`].
pub fn read_basis_file(path: &Path, table: &PrimeTable) -> Result<Basis> {
    parse_basis_text(&std::fs::read_to_string(path)?, table)
}

/// Renders a matching certificate: one `a b` pair per line, then a
/// trailing `# unmatched: …` comment listing any uncovered elements.
pub fn format_certificate_file(cert: &MatchingCertificate) -> String {
    let mut out = String::new();
    for &(a, b) in &cert.pairs {
        out.push_str(&format!("{a} {b}\n"));
    }
    let tail = cert
        .unmatched
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    out.push_str(&format!("# unmatched: {tail}\n"));
    out
}

/// Writes text to a file, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}
