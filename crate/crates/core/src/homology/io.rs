use std::path::Path;

use super::Point3;
use crate::error::{Error, Result};

/// Parses a point cloud: one point per line, 2 or 3 whitespace-separated
/// coordinates (planar points get `z = 0`). Blank lines and `#` comments are
/// ignored; all points must have the same dimension.
pub fn parse_points(text: &str) -> Result<Vec<Point3>> {
    let mut out = Vec::new();
    let mut dim = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        let coords = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| parse_err(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if !(2..=3).contains(&coords.len()) {
            return Err(parse_err(format!("expected 2 or 3 coordinates, got {}", coords.len())));
        }
        if *dim.get_or_insert(coords.len()) != coords.len() {
            return Err(parse_err("mixed point dimensions".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(parse_err("non-finite coordinate".into()));
        }
        out.push([coords[0], coords[1], coords.get(2).copied().unwrap_or(0.0)]);
    }
    Ok(out)
}

/// Writes three coordinates per line with round-trip precision.
pub fn write_points(points: &[Point3]) -> String {
    let mut s = String::new();
    for p in points {
        s.push_str(&format!("{:?} {:?} {:?}\n", p[0], p[1], p[2]));
    }
    s
}

pub fn read_points_file(path: impl AsRef<Path>) -> Result<Vec<Point3>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_points(&text)
}

pub fn write_points_file(path: impl AsRef<Path>, points: &[Point3]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_points(points)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_points_are_padded() {
        let pts = parse_points("# cloud\n0 1\n2.5 -3 # tail\n\n").unwrap();
        assert_eq!(pts, vec![[0.0, 1.0, 0.0], [2.5, -3.0, 0.0]]);
    }

    #[test]
    fn round_trip() {
        let pts = vec![[0.1, 1.0 / 3.0, -2e-300], [5.0, 6.0, 7.0]];
        assert_eq!(parse_points(&write_points(&pts)).unwrap(), pts);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert!(matches!(parse_points("0 0\n1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_points("0 0\n1 1 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_points("0 x\n"), Err(Error::Parse { line: 1, .. })));
    }
}
