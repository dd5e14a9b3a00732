//! Quantization of persistence measures with a codebook of `k` centroids,
//! the diagonal acting as an implicit `(k+1)`-th centroid.

mod center;
mod margin;
mod online;
mod weighted;

use std::fmt;
use std::str::FromStr;

pub use center::{p_center, smallest_enclosing_circle, Circle};
pub use margin::{boundary_distance, margin_profile};
pub use online::{default_batch_size, lloyd_no_diagonal, online_quantize, top_persistence_init, update_step, OnlineOptions};
pub use weighted::{persistence_quantile, weighted_codebook, WeightedOptions};

use crate::error::{Error, Result};
use crate::measures::{HalfPlanePoint, PersistenceMeasure};

/// Centroids are never placed closer than this to the diagonal.
pub const MIN_CENTROID_PERSISTENCE: f64 = 1e-9;

/// A transport exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinite)
        } else if p >= 1.0 && p.is_finite() {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::param(format!("exponent must be in [1, inf], got {p}")))
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Exponent::Infinite),
            t => Exponent::new(t.parse().map_err(|_| Error::param(format!("bad exponent {s:?}")))?),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

/// Ordered centroids above the diagonal. The order breaks ties between
/// equidistant centroids in favor of the earlier one.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    centroids: Vec<HalfPlanePoint>,
}

/// The cell of a point: a centroid index (0-based) or the diagonal cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Centroid(usize),
    Diagonal,
}

impl Codebook {
    pub fn new(centroids: Vec<HalfPlanePoint>) -> Self {
        Codebook { centroids }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Ok(Codebook::new(
            pairs.iter().map(|&(b, d)| HalfPlanePoint::new(b, d)).collect::<Result<_>>()?,
        ))
    }

    pub fn centroids(&self) -> &[HalfPlanePoint] {
        &self.centroids
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    /// The cell of `x`, with the diagonal cell enabled.
    pub fn assign(&self, x: &HalfPlanePoint) -> Cell {
        assign_with(self, x, true)
    }
}

fn sq(x: &HalfPlanePoint, c: &HalfPlanePoint) -> f64 {
    let (db, dd) = (x.birth() - c.birth(), x.death() - c.death());
    db * db + dd * dd
}

fn pers_sq(x: &HalfPlanePoint) -> f64 {
    let l = x.death() - x.birth();
    0.5 * l * l
}

/// Nearest centroid with ties to the smaller index; the diagonal comes last
/// and wins only when strictly closer. Without the diagonal cell every
/// point goes to a centroid (the codebook must be nonempty).
pub(crate) fn assign_with(c: &Codebook, x: &HalfPlanePoint, diagonal: bool) -> Cell {
    let mut best = if diagonal { pers_sq(x) } else { f64::INFINITY };
    let mut cell = Cell::Diagonal;
    for (j, cj) in c.centroids.iter().enumerate() {
        let d = sq(x, cj);
        let better = match cell {
            Cell::Diagonal => d <= best,
            Cell::Centroid(_) => d < best,
        };
        if better {
            best = d;
            cell = Cell::Centroid(j);
        }
    }
    cell
}

/// The cell of `x` for codebook `c`.
pub fn assign_cell(c: &Codebook, x: &HalfPlanePoint) -> Cell {
    c.assign(x)
}

/// Cell of every atom of `mu`.
pub fn assign_all(c: &Codebook, mu: &PersistenceMeasure) -> Vec<Cell> {
    mu.atoms().iter().map(|a| c.assign(&a.point)).collect()
}

/// The optimal masses `m_j = mu(V_j(c))` for the centroids.
pub fn optimal_weights(c: &Codebook, mu: &PersistenceMeasure) -> Vec<f64> {
    let mut w = vec![0.0; c.k()];
    for a in mu.atoms() {
        if let Cell::Centroid(j) = c.assign(&a.point) {
            w[j] += a.mass;
        }
    }
    w
}

/// `sum_j m_j delta_{c_j}` with the optimal weights (empty cells omitted).
pub fn quantized_measure(c: &Codebook, mu: &PersistenceMeasure) -> PersistenceMeasure {
    let w = optimal_weights(c, mu);
    PersistenceMeasure::from_atoms(c.centroids.iter().copied().zip(w)).expect("nonnegative weights")
}

/// `sum_j int_{V_j} |x - c_j|^p dmu`, the `p`-th power of the distortion.
pub fn distortion_pow(c: &Codebook, mu: &PersistenceMeasure, p: f64) -> f64 {
    mu.atoms()
        .iter()
        .map(|a| {
            let d2 = match c.assign(&a.point) {
                Cell::Centroid(j) => sq(&a.point, &c.centroids[j]),
                Cell::Diagonal => pers_sq(&a.point),
            };
            a.mass * crate::transport::pow_from_sq(d2, p)
        })
        .sum()
}

/// Distortion `R_{k,p}(c)` of `mu`; for `p = inf` the largest distance from
/// a support point to its nearest centroid or the diagonal.
pub fn distortion(c: &Codebook, mu: &PersistenceMeasure, p: Exponent) -> f64 {
    match p {
        Exponent::Finite(p) => distortion_pow(c, mu, p).powf(1.0 / p),
        Exponent::Infinite => mu
            .atoms()
            .iter()
            .map(|a| {
                let d2 = c.centroids.iter().map(|cj| sq(&a.point, cj)).fold(pers_sq(&a.point), f64::min);
                d2.sqrt()
            })
            .fold(0.0, f64::max),
    }
}

/// Projects a point onto the closed region `persistence >= MIN_CENTROID_PERSISTENCE`.
pub(crate) fn clamp_above_diagonal(b: f64, d: f64) -> HalfPlanePoint {
    if let Ok(p) = HalfPlanePoint::new(b, d) {
        if p.persistence() >= MIN_CENTROID_PERSISTENCE {
            return p;
        }
    }
    // Move along the normal of the diagonal.
    let mid = 0.5 * (b + d);
    let half = MIN_CENTROID_PERSISTENCE / std::f64::consts::SQRT_2;
    let mut scale = 1.0;
    loop {
        if let Ok(p) = HalfPlanePoint::new(mid - half * scale, mid + half * scale) {
            if p.persistence() >= MIN_CENTROID_PERSISTENCE {
                return p;
            }
        }
        scale *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pt(b: f64, d: f64) -> HalfPlanePoint {
        HalfPlanePoint::new(b, d).unwrap()
    }

    #[test]
    fn assignment_examples() {
        let c = Codebook::from_pairs(&[(0.0, 2.0)]).unwrap();
        assert_eq!(assign_cell(&c, &pt(0.0, 1.9)), Cell::Centroid(0));
        assert_eq!(assign_cell(&c, &pt(0.9, 1.0)), Cell::Diagonal);
        let c2 = Codebook::from_pairs(&[(0.0, 2.0), (0.0, 4.0)]).unwrap();
        assert_eq!(assign_cell(&c2, &pt(0.0, 3.0)), Cell::Centroid(0));
    }

    #[test]
    fn diagonal_loses_ties() {
        // |x - c|^2 = 0.5 = persistence(x)^2.
        let c = Codebook::from_pairs(&[(0.0, 2.0)]).unwrap();
        let x = pt(0.5, 1.5);
        assert_eq!(sq(&x, &c.centroids()[0]), pers_sq(&x));
        assert_eq!(c.assign(&x), Cell::Centroid(0));
        assert_eq!(c.assign(&pt(0.0, 1.0)), Cell::Diagonal);
    }

    #[test]
    fn weights_and_distortion() {
        let mu = PersistenceMeasure::from_triples(&[(0.0, 2.0, 1.0), (0.0, 4.0, 1.0)]).unwrap();
        let c = Codebook::from_pairs(&[(0.0, 2.0), (0.0, 4.0)]).unwrap();
        assert_eq!(optimal_weights(&c, &mu), vec![1.0, 1.0]);
        assert_eq!(distortion(&c, &mu, Exponent::Finite(2.0)), 0.0);
        assert_eq!(distortion(&c, &mu, Exponent::Infinite), 0.0);
        assert_eq!(distortion(&c, &PersistenceMeasure::empty(), Exponent::Finite(2.0)), 0.0);

        let near = PersistenceMeasure::from_triples(&[(1.0, 1.1, 2.0)]).unwrap();
        assert_eq!(optimal_weights(&c, &near), vec![0.0, 0.0]);
        assert!(quantized_measure(&c, &near).is_empty());
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinite);
        assert_eq!("2".parse::<Exponent>().unwrap(), Exponent::Finite(2.0));
        assert!("0.5".parse::<Exponent>().is_err());
        assert_eq!(Exponent::Infinite.to_string(), "inf");
    }

    #[test]
    fn clamping_projects_onto_the_margin() {
        let p = clamp_above_diagonal(1.0, 0.5);
        assert!(p.persistence() >= MIN_CENTROID_PERSISTENCE);
        assert_abs_diff_eq!(p.birth() + p.death(), 1.5, epsilon = 1e-12);
        assert_eq!(clamp_above_diagonal(0.0, 1.0), pt(0.0, 1.0));
    }
}
