use std::collections::VecDeque;

use super::{Endpoint, PlanEntry, TransportPlan};
use crate::error::{Error, Result};
use crate::measures::{HalfPlanePoint, PersistenceMeasure};

const UNIT_MASS_TOL: f64 = 1e-9;

/// Unit copies of the atoms: `(atom index, point)`.
fn expand_units(mu: &PersistenceMeasure) -> Result<Vec<(usize, HalfPlanePoint)>> {
    let mut out = Vec::new();
    for (i, a) in mu.atoms().iter().enumerate() {
        let k = a.mass.round();
        if (a.mass - k).abs() > UNIT_MASS_TOL || k < 1.0 {
            return Err(Error::NonIntegerMass(a.mass));
        }
        out.extend(std::iter::repeat_n((i, a.point), k as usize));
    }
    Ok(out)
}

fn dist(a: &HalfPlanePoint, b: &HalfPlanePoint) -> f64 {
    a.distance(b)
}

/// Threshold graph: left = A ∪ {diagonal copies for B}, right = B ∪
/// {diagonal copies for A}. Left vertex `a < na` is a point of A; `na + j`
/// is the diagonal copy facing `b_j`. Right vertex `j < nb` is `b_j`;
/// `nb + i` is the diagonal copy facing `a_i`.
struct ThresholdGraph<'a> {
    a: &'a [(usize, HalfPlanePoint)],
    b: &'a [(usize, HalfPlanePoint)],
    r: f64,
}

impl ThresholdGraph<'_> {
    fn n(&self) -> usize {
        self.a.len() + self.b.len()
    }

    fn neighbors(&self, left: usize, out: &mut Vec<usize>) {
        out.clear();
        let (na, nb) = (self.a.len(), self.b.len());
        if left < na {
            let pa = &self.a[left].1;
            for (j, (_, pb)) in self.b.iter().enumerate() {
                if dist(pa, pb) <= self.r {
                    out.push(j);
                }
            }
            if pa.persistence() <= self.r {
                out.push(nb + left);
            }
        } else {
            let j = left - na;
            if self.b[j].1.persistence() <= self.r {
                out.push(j);
            }
            out.extend(nb..nb + na);
        }
    }

    /// Hopcroft-Karp; returns `match_left[l] = right vertex`.
    fn max_matching(&self) -> (usize, Vec<usize>) {
        const FREE: usize = usize::MAX;
        let n = self.n();
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|l| {
                let mut v = Vec::new();
                self.neighbors(l, &mut v);
                v
            })
            .collect();
        let mut match_l = vec![FREE; n];
        let mut match_r = vec![FREE; n];
        let mut dist = vec![0usize; n];
        let mut size = 0;
        loop {
            // BFS layers from free left vertices.
            let mut queue = VecDeque::new();
            for l in 0..n {
                if match_l[l] == FREE {
                    dist[l] = 0;
                    queue.push_back(l);
                } else {
                    dist[l] = usize::MAX;
                }
            }
            let mut found = false;
            while let Some(l) = queue.pop_front() {
                for &r in &adj[l] {
                    let l2 = match_r[r];
                    if l2 == FREE {
                        found = true;
                    } else if dist[l2] == usize::MAX {
                        dist[l2] = dist[l] + 1;
                        queue.push_back(l2);
                    }
                }
            }
            if !found {
                break;
            }
            let mut it = vec![0usize; n];
            for l in 0..n {
                if match_l[l] == FREE && augment(l, &adj, &mut match_l, &mut match_r, &mut dist, &mut it) {
                    size += 1;
                }
            }
        }
        (size, match_l)
    }
}

fn augment(
    l: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
    it: &mut [usize],
) -> bool {
    while it[l] < adj[l].len() {
        let r = adj[l][it[l]];
        it[l] += 1;
        let l2 = match_r[r];
        if l2 == usize::MAX || (dist[l2] == dist[l] + 1 && augment(l2, adj, match_l, match_r, dist, it)) {
            match_l[l] = r;
            match_r[r] = l;
            return true;
        }
    }
    dist[l] = usize::MAX;
    false
}

/// Whether a perfect matching of the diagrams (diagonal allowed) exists with
/// every matched pair at distance at most `r`.
pub fn threshold_matching_exists(mu: &PersistenceMeasure, nu: &PersistenceMeasure, r: f64) -> Result<bool> {
    let a = expand_units(mu)?;
    let b = expand_units(nu)?;
    let g = ThresholdGraph { a: &a, b: &b, r };
    Ok(g.max_matching().0 == g.n())
}

/// Bottleneck distance (`OT_inf`) between two diagrams, computed exactly by
/// binary search over the candidate distances with a maximum-matching
/// feasibility test. Masses must be positive integers.
pub fn bottleneck_distance(mu: &PersistenceMeasure, nu: &PersistenceMeasure) -> Result<(f64, TransportPlan)> {
    let a = expand_units(mu)?;
    let b = expand_units(nu)?;

    let mut candidates: Vec<f64> = Vec::with_capacity(a.len() * b.len() + a.len() + b.len() + 1);
    candidates.push(0.0);
    for (_, pa) in &a {
        candidates.push(pa.persistence());
        candidates.extend(b.iter().map(|(_, pb)| dist(pa, pb)));
    }
    candidates.extend(b.iter().map(|(_, pb)| pb.persistence()));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    // The largest candidate is always feasible (every point to the diagonal).
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let g = ThresholdGraph {
            a: &a,
            b: &b,
            r: candidates[mid],
        };
        if g.max_matching().0 == g.n() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let value = candidates[lo];

    let g = ThresholdGraph { a: &a, b: &b, r: value };
    let (_, match_l) = g.max_matching();
    let (na, nb) = (a.len(), b.len());
    let mut pairs: Vec<PlanEntry> = Vec::new();
    let mut push = |source: Endpoint, target: Endpoint| {
        if let Some(e) = pairs.iter_mut().find(|e| e.source == source && e.target == target) {
            e.mass += 1.0;
        } else {
            pairs.push(PlanEntry { source, target, mass: 1.0 });
        }
    };
    let mut max_cost = 0.0f64;
    for (l, &r) in match_l.iter().enumerate() {
        if l < na {
            let (ia, pa) = a[l];
            if r < nb {
                max_cost = max_cost.max(dist(&pa, &b[r].1));
                push(Endpoint::Atom(ia), Endpoint::Atom(b[r].0));
            } else {
                max_cost = max_cost.max(pa.persistence());
                push(Endpoint::Atom(ia), Endpoint::Diagonal);
            }
        } else if r < nb {
            max_cost = max_cost.max(b[r].1.persistence());
            push(Endpoint::Diagonal, Endpoint::Atom(b[r].0));
        }
    }
    debug_assert_eq!(max_cost, value);
    Ok((
        value,
        TransportPlan {
            pairs,
            cost_p: max_cost,
            p: f64::INFINITY,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dgm(points: &[(f64, f64)]) -> PersistenceMeasure {
        PersistenceMeasure::diagram(points.iter().map(|&(b, d)| HalfPlanePoint::new(b, d).unwrap()))
    }

    #[test]
    fn self_distance_is_zero() {
        let mu = dgm(&[(0.0, 1.0), (0.5, 3.0), (0.5, 3.0)]);
        assert_eq!(bottleneck_distance(&mu, &mu).unwrap().0, 0.0);
    }

    #[test]
    fn short_point_goes_to_diagonal() {
        let (v, plan) = bottleneck_distance(&dgm(&[(0.0, 1.0), (0.0, 4.0)]), &dgm(&[(0.0, 4.0)])).unwrap();
        assert_abs_diff_eq!(v, 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert!(plan
            .pairs
            .iter()
            .any(|e| e.source == Endpoint::Atom(0) && e.target == Endpoint::Diagonal));
    }

    #[test]
    fn rejects_fractional_masses() {
        let mu = PersistenceMeasure::from_triples(&[(0.0, 1.0, 0.5)]).unwrap();
        assert!(matches!(bottleneck_distance(&mu, &mu), Err(Error::NonIntegerMass(_))));
        let mu = PersistenceMeasure::from_triples(&[(0.0, 1.0, 2.0)]).unwrap();
        assert_eq!(bottleneck_distance(&mu, &mu).unwrap().0, 0.0);
    }

    #[test]
    fn empty_diagrams() {
        let e = PersistenceMeasure::empty();
        assert_eq!(bottleneck_distance(&e, &e).unwrap().0, 0.0);
        let (v, _) = bottleneck_distance(&dgm(&[(0.0, 2.0)]), &e).unwrap();
        assert_abs_diff_eq!(v, 2f64.sqrt(), epsilon = 1e-15);
    }
}
