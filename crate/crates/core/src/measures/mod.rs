//! Persistence measures: weighted point sets on the open half-plane
//! `{(birth, death) : death > birth}`.
//!
//! A persistence diagram is the special case where every atom has unit mass;
//! averaging `n` diagrams gives the empirical expected persistence diagram,
//! whose atoms carry mass `1/n` (or a multiple of it after merging).

mod histogram;
mod io;

use std::collections::HashMap;

pub use histogram::{to_histogram, GridHistogram, GridSpec};
pub use io::{parse_dgm, read_dgm_dir, read_dgm_file, write_dgm, write_dgm_file, ParsedDiagram};

use crate::error::{Error, Result};

/// A point `(birth, death)` of the open half-plane above the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlanePoint {
    birth: f64,
    death: f64,
}

impl HalfPlanePoint {
    pub fn new(birth: f64, death: f64) -> Result<Self> {
        if !birth.is_finite() || !death.is_finite() {
            return Err(Error::InvalidPoint {
                birth,
                death,
                reason: "coordinates must be finite",
            });
        }
        if death <= birth {
            return Err(Error::InvalidPoint {
                birth,
                death,
                reason: "death must exceed birth",
            });
        }
        Ok(HalfPlanePoint { birth, death })
    }

    pub fn birth(&self) -> f64 {
        self.birth
    }

    pub fn death(&self) -> f64 {
        self.death
    }

    /// Euclidean distance to the diagonal, `(death - birth) / sqrt(2)`.
    pub fn persistence(&self) -> f64 {
        (self.death - self.birth) / std::f64::consts::SQRT_2
    }

    pub fn distance(&self, other: &HalfPlanePoint) -> f64 {
        (self.birth - other.birth).hypot(self.death - other.death)
    }

    pub fn coords(&self) -> [f64; 2] {
        [self.birth, self.death]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub point: HalfPlanePoint,
    pub mass: f64,
}

/// A finite nonnegative measure on the open half-plane, stored as a list of
/// atoms with strictly positive mass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PersistenceMeasure {
    atoms: Vec<Atom>,
}

impl PersistenceMeasure {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a measure from `(point, mass)` pairs. Zero masses are dropped;
    /// negative or non-finite masses are rejected.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (HalfPlanePoint, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (point, mass) in atoms {
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidMass(mass));
            }
            if mass > 0.0 {
                out.push(Atom { point, mass });
            }
        }
        Ok(PersistenceMeasure { atoms: out })
    }

    /// A persistence diagram: every point with unit mass.
    pub fn diagram(points: impl IntoIterator<Item = HalfPlanePoint>) -> Self {
        PersistenceMeasure {
            atoms: points
                .into_iter()
                .map(|point| Atom { point, mass: 1.0 })
                .collect(),
        }
    }

    /// Convenience constructor from raw `(birth, death, mass)` triples.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        let atoms = triples
            .iter()
            .map(|&(b, d, m)| HalfPlanePoint::new(b, d).map(|p| (p, m)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_atoms(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// `sum_i mass_i * persistence_i^p`; for `p = 0` this is the total mass.
    pub fn total_persistence(&self, p: f64) -> f64 {
        total_persistence(self, p)
    }

    /// Multiplies every mass by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_atoms(self.atoms.iter().map(|a| (a.point, a.mass * factor)))
    }

    /// Merges atoms with bit-identical coordinates, keeping first-seen order.
    pub fn merged(&self) -> Self {
        let mut index: HashMap<(u64, u64), usize> = HashMap::with_capacity(self.atoms.len());
        let mut atoms: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            let key = coord_key(&atom.point);
            match index.get(&key) {
                Some(&i) => atoms[i].mass += atom.mass,
                None => {
                    index.insert(key, atoms.len());
                    atoms.push(*atom);
                }
            }
        }
        PersistenceMeasure { atoms }
    }

    /// Whether two measures are equal as measures (same mass at every point),
    /// up to `tol` on the masses.
    pub fn approx_eq_as_measure(&self, other: &PersistenceMeasure, tol: f64) -> bool {
        let mut masses: HashMap<(u64, u64), f64> = HashMap::new();
        for a in &self.atoms {
            *masses.entry(coord_key(&a.point)).or_default() += a.mass;
        }
        for a in &other.atoms {
            *masses.entry(coord_key(&a.point)).or_default() -= a.mass;
        }
        masses.values().all(|m| m.abs() <= tol)
    }

    /// Atoms sorted by decreasing persistence (ties keep input order).
    pub fn by_persistence_desc(&self) -> Vec<Atom> {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| b.point.persistence().total_cmp(&a.point.persistence()));
        atoms
    }

    pub(crate) fn push_unchecked(&mut self, point: HalfPlanePoint, mass: f64) {
        debug_assert!(mass > 0.0);
        self.atoms.push(Atom { point, mass });
    }
}

fn coord_key(p: &HalfPlanePoint) -> (u64, u64) {
    // +0.0 and -0.0 compare equal as coordinates.
    let norm = |x: f64| if x == 0.0 { 0.0f64 } else { x };
    (norm(p.birth).to_bits(), norm(p.death).to_bits())
}

pub fn total_persistence(mu: &PersistenceMeasure, p: f64) -> f64 {
    if p == 0.0 {
        return mu.total_mass();
    }
    mu.atoms
        .iter()
        .map(|a| a.mass * a.point.persistence().powf(p))
        .sum()
}

/// The empirical expected persistence diagram `(1/n) sum_i mu_i`, with atoms
/// at identical coordinates merged.
pub fn empirical_epd(diagrams: &[PersistenceMeasure]) -> Result<PersistenceMeasure> {
    if diagrams.is_empty() {
        return Err(Error::NoDiagrams);
    }
    let weight = 1.0 / diagrams.len() as f64;
    let mut out = PersistenceMeasure::empty();
    for mu in diagrams {
        for a in &mu.atoms {
            out.push_unchecked(a.point, a.mass * weight);
        }
    }
    Ok(out.merged())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(b: f64, d: f64) -> HalfPlanePoint {
        HalfPlanePoint::new(b, d).unwrap()
    }

    #[test]
    fn rejects_points_on_or_below_diagonal() {
        assert!(HalfPlanePoint::new(1.0, 1.0).is_err());
        assert!(HalfPlanePoint::new(2.0, 1.0).is_err());
        assert!(HalfPlanePoint::new(0.0, f64::INFINITY).is_err());
        assert!(HalfPlanePoint::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn persistence_is_distance_to_diagonal() {
        let x = pt(0.0, 2.0);
        assert_abs_diff_eq!(x.persistence(), 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn total_persistence_examples() {
        let mu = PersistenceMeasure::diagram([pt(0.0, 2.0)]);
        assert_abs_diff_eq!(mu.total_persistence(2.0), 2.0, epsilon = 1e-12);
        assert_eq!(PersistenceMeasure::empty().total_persistence(1.5), 0.0);

        let mu = PersistenceMeasure::from_triples(&[(0.0, 2.0, 1.0), (1.0, 2.0, 0.5)]).unwrap();
        let expected = 2f64.sqrt() + 0.5 / 2f64.sqrt();
        assert_abs_diff_eq!(mu.total_persistence(1.0), expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 1.76777, epsilon = 1e-5);
        assert_abs_diff_eq!(mu.total_persistence(0.0), 1.5);
    }

    #[test]
    fn zero_masses_dropped_negative_rejected() {
        let mu = PersistenceMeasure::from_triples(&[(0.0, 1.0, 0.0), (0.0, 2.0, 1.0)]).unwrap();
        assert_eq!(mu.len(), 1);
        assert!(PersistenceMeasure::from_triples(&[(0.0, 1.0, -1.0)]).is_err());
    }

    #[test]
    fn empirical_epd_examples() {
        assert!(matches!(empirical_epd(&[]), Err(Error::NoDiagrams)));

        let d02 = PersistenceMeasure::diagram([pt(0.0, 2.0)]);
        let d04 = PersistenceMeasure::diagram([pt(0.0, 4.0)]);
        assert_eq!(empirical_epd(std::slice::from_ref(&d02)).unwrap(), d02);

        let avg = empirical_epd(&[d02.clone(), d04]).unwrap();
        let want = PersistenceMeasure::from_triples(&[(0.0, 2.0, 0.5), (0.0, 4.0, 0.5)]).unwrap();
        assert!(avg.approx_eq_as_measure(&want, 1e-15));

        let two = PersistenceMeasure::diagram([pt(0.0, 2.0), pt(1.0, 3.0)]);
        let avg = empirical_epd(&[d02, two]).unwrap();
        assert_eq!(avg.len(), 2);
        assert_eq!(avg.atoms()[0].mass, 1.0);
        assert_eq!(avg.atoms()[1].mass, 0.5);
    }

    #[test]
    fn merging_treats_signed_zero_as_equal() {
        let mu = PersistenceMeasure::diagram([pt(0.0, 1.0), pt(-0.0, 1.0)]).merged();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.atoms()[0].mass, 2.0);
    }
}
