//! The `.dgm` text format: one atom per line, `birth death [mass]`, `#`
//! comments, whitespace separated.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{HalfPlanePoint, PersistenceMeasure};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDiagram {
    pub measure: PersistenceMeasure,
    /// Lines whose death was infinite.
    pub dropped_infinite: usize,
    /// Lines with `death == birth` (zero persistence).
    pub dropped_diagonal: usize,
}

pub fn parse_dgm(text: &str) -> Result<ParsedDiagram> {
    let mut measure = PersistenceMeasure::empty();
    let mut dropped_infinite = 0;
    let mut dropped_diagonal = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: lineno + 1,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(err(format!(
                "expected `birth death [mass]`, got {} fields",
                fields.len()
            )));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(format!("not a number: {s:?}")))
        };
        let birth = num(fields[0])?;
        let death = num(fields[1])?;
        let mass = match fields.get(2) {
            Some(s) => num(s)?,
            None => 1.0,
        };
        if !birth.is_finite() {
            return Err(err("birth must be finite".into()));
        }
        if death == f64::INFINITY {
            dropped_infinite += 1;
            continue;
        }
        if death == birth {
            dropped_diagonal += 1;
            continue;
        }
        let point = HalfPlanePoint::new(birth, death).map_err(|e| err(e.to_string()))?;
        if !mass.is_finite() || mass < 0.0 {
            return Err(err(format!("invalid mass {mass}")));
        }
        if mass > 0.0 {
            measure.push_unchecked(point, mass);
        }
    }
    Ok(ParsedDiagram {
        measure,
        dropped_infinite,
        dropped_diagonal,
    })
}

/// Serializes with shortest round-trip float formatting. The mass column is
/// omitted for unit-mass atoms.
pub fn write_dgm(mu: &PersistenceMeasure) -> String {
    let mut out = String::new();
    for a in mu.atoms() {
        let (b, d) = (a.point.birth(), a.point.death());
        if a.mass == 1.0 {
            let _ = writeln!(out, "{b:?} {d:?}");
        } else {
            let _ = writeln!(out, "{b:?} {d:?} {:?}", a.mass);
        }
    }
    out
}

pub fn read_dgm_file(path: impl AsRef<Path>) -> Result<ParsedDiagram> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let parsed = parse_dgm(&text)?;
    if parsed.dropped_infinite > 0 {
        log::info!(
            "{}: dropped {} infinite points",
            path.display(),
            parsed.dropped_infinite
        );
    }
    Ok(parsed)
}

pub fn write_dgm_file(path: impl AsRef<Path>, mu: &PersistenceMeasure) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_dgm(mu)).map_err(|e| Error::io(path, e))
}

/// Reads every `*.dgm` file of a directory, in file-name order.
pub fn read_dgm_dir(dir: impl AsRef<Path>) -> Result<Vec<PersistenceMeasure>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "dgm"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| read_dgm_file(p).map(|d| d.measure))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_comments_defaults_and_infinite_points() {
        let text = "# header\n0 1\n0.5 2.5 0.25 # trailing\n\n1 inf\n2 2\n";
        let parsed = parse_dgm(text).unwrap();
        assert_eq!(parsed.dropped_infinite, 1);
        assert_eq!(parsed.dropped_diagonal, 1);
        let atoms = parsed.measure.atoms();
        assert_eq!(atoms.len(), 2);
        assert_eq!(atoms[0].mass, 1.0);
        assert_eq!(atoms[1].mass, 0.25);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(matches!(parse_dgm("1\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_dgm("0 1\n1 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_dgm("0 x\n").is_err());
        assert!(parse_dgm("0 1 -2\n").is_err());
        assert!(parse_dgm("0 1 1 1\n").is_err());
    }

    proptest! {
        #[test]
        fn dgm_round_trip(triples in prop::collection::vec(
            (-1e3f64..1e3, 1e-6f64..1e3, prop_oneof![Just(1.0), 1e-9f64..10.0]), 0..30)
        ) {
            let mu = PersistenceMeasure::from_triples(
                &triples.iter().map(|&(b, l, m)| (b, b + l, m)).collect::<Vec<_>>(),
            ).unwrap();
            let back = parse_dgm(&write_dgm(&mu)).unwrap().measure;
            prop_assert_eq!(back, mu);
        }
    }
}
