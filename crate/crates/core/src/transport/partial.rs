//! Exact partial transport restricted to useful arcs.
//!
//! Moving mass between atoms `x` and `y` costs more than sending both to
//! the diagonal whenever `d(x, y)^p > d(x, diag)^p + d(y, diag)^p`, so no
//! optimal plan uses such a pair. The remaining "admissible" pairs are
//! enumerated with a birth-sorted index split by persistence scale. Small
//! problems get every admissible arc at once; large ones start from the
//! cheapest few arcs per atom and add admissible arcs with negative reduced
//! cost until none is left, which certifies optimality.

use super::network_simplex::NetworkSimplex;
use super::{dist_sq, pers_sq, pow_from_sq};
use crate::measures::HalfPlanePoint;

/// Above this many admissible pairs, arcs are generated lazily.
const ARC_BUDGET: usize = 3_000_000;
/// Initial arcs kept per atom, and arcs added per atom and round.
const PER_ATOM: usize = 8;

struct Band {
    max_diag: f64,
    births: Vec<f64>,
    idx: Vec<u32>,
}

/// Birth-sorted index of the target atoms, one band per persistence octave.
struct PairIndex<'a> {
    points: &'a [HalfPlanePoint],
    diag: &'a [f64],
    bands: Vec<Band>,
    p: f64,
}

impl<'a> PairIndex<'a> {
    fn new(points: &'a [HalfPlanePoint], diag: &'a [f64], p: f64) -> Self {
        let mut groups: std::collections::BTreeMap<i32, Vec<u32>> = Default::default();
        for (j, q) in points.iter().enumerate() {
            let octave = q.persistence().log2().floor().clamp(-1100.0, 1100.0) as i32;
            groups.entry(octave).or_default().push(j as u32);
        }
        let bands = groups
            .into_values()
            .map(|mut idx| {
                idx.sort_by(|&a, &b| points[a as usize].birth().total_cmp(&points[b as usize].birth()));
                Band {
                    max_diag: idx.iter().map(|&j| diag[j as usize]).fold(0.0, f64::max),
                    births: idx.iter().map(|&j| points[j as usize].birth()).collect(),
                    idx,
                }
            })
            .collect();
        PairIndex { points, diag, bands, p }
    }

    /// Calls `f(j, cost)` for every admissible target of `x`.
    fn for_each(&self, x: &HalfPlanePoint, x_diag: f64, mut f: impl FnMut(usize, f64)) {
        for band in &self.bands {
            let r = (x_diag + band.max_diag).powf(1.0 / self.p) * (1.0 + 1e-12);
            let lo = band.births.partition_point(|&b| b < x.birth() - r);
            for (k, &b) in band.births[lo..].iter().enumerate() {
                if b > x.birth() + r {
                    break;
                }
                let j = band.idx[lo + k] as usize;
                let y = &self.points[j];
                if (y.death() - x.death()).abs() > r {
                    continue;
                }
                let c = pow_from_sq(dist_sq(x, y), self.p);
                if c <= x_diag + self.diag[j] {
                    f(j, c);
                }
            }
        }
    }
}

/// Keeps the `k` smallest `(cost, index)` pairs.
fn push_best(best: &mut Vec<(f64, u32)>, k: usize, c: f64, j: u32) {
    if best.len() == k && c >= best[k - 1].0 {
        return;
    }
    let pos = best.partition_point(|&(b, _)| b <= c);
    best.insert(pos, (c, j));
    best.truncate(k);
}

/// Optimal flows `(i, j, f)` between atoms `x` (supplies `sx`) and `y`
/// (demands `sy`), where index `x.len()` / `y.len()` is the diagonal.
pub(super) fn solve(x: &[HalfPlanePoint], sx: &[i64], y: &[HalfPlanePoint], sy: &[i64], p: f64) -> Vec<(usize, usize, i64)> {
    solve_with_budget(x, sx, y, sy, p, ARC_BUDGET)
}

fn solve_with_budget(
    x: &[HalfPlanePoint],
    sx: &[i64],
    y: &[HalfPlanePoint],
    sy: &[i64],
    p: f64,
    budget: usize,
) -> Vec<(usize, usize, i64)> {
    let (n, m) = (x.len(), y.len());
    let dx: Vec<f64> = x.iter().map(|a| pow_from_sq(pers_sq(a), p)).collect();
    let dy: Vec<f64> = y.iter().map(|b| pow_from_sq(pers_sq(b), p)).collect();
    let mut supply = sx.to_vec();
    let mut demand = sy.to_vec();
    supply.push(sy.iter().sum());
    demand.push(sx.iter().sum());

    let max_dx = dx.iter().copied().fold(0.0, f64::max);
    let max_dy = dy.iter().copied().fold(0.0, f64::max);
    let mut ns = NetworkSimplex::new(&supply, &demand, max_dx + max_dy);
    for (i, &c) in dx.iter().enumerate() {
        ns.add_arc(i, m, c);
    }
    for (j, &c) in dy.iter().enumerate() {
        ns.add_arc(n, j, c);
    }
    ns.add_arc(n, m, 0.0);
    if sx.iter().chain(sy).all(|&s| s > 0) {
        ns.start_from_sinks();
    }

    let index = PairIndex::new(y, &dy, p);
    let mut admissible = 0usize;
    for (i, a) in x.iter().enumerate() {
        index.for_each(a, dx[i], |_, _| admissible += 1);
    }

    if admissible <= budget {
        for (i, a) in x.iter().enumerate() {
            index.for_each(a, dx[i], |j, c| ns.add_arc(i, j, c));
        }
        ns.run();
        return ns.flows();
    }

    log::debug!("partial transport {n}x{m}: {admissible} admissible pairs, generating arcs lazily");
    let mut col_best: Vec<Vec<(f64, u32)>> = vec![Vec::new(); m];
    let mut row_best = Vec::with_capacity(PER_ATOM);
    let mut present = std::collections::HashSet::new();
    for (i, a) in x.iter().enumerate() {
        row_best.clear();
        index.for_each(a, dx[i], |j, c| {
            push_best(&mut row_best, PER_ATOM, c, j as u32);
            push_best(&mut col_best[j], PER_ATOM, c, i as u32);
        });
        for &(c, j) in &row_best {
            if present.insert((i as u32, j)) {
                ns.add_arc(i, j as usize, c);
            }
        }
    }
    for (j, best) in col_best.iter().enumerate() {
        for &(c, i) in best {
            if present.insert((i, j as u32)) {
                ns.add_arc(i as usize, j, c);
            }
        }
    }
    drop(present);
    drop(col_best);

    for round in 1.. {
        ns.run();
        let tol = ns.tolerance();
        let mut added = 0usize;
        let mut violators = Vec::with_capacity(PER_ATOM);
        for (i, a) in x.iter().enumerate() {
            violators.clear();
            index.for_each(a, dx[i], |j, c| {
                let r = ns.reduced_cost(i, j, c);
                if r < -tol {
                    push_best(&mut violators, PER_ATOM, r, j as u32);
                }
            });
            for &(_, j) in &violators {
                let c = pow_from_sq(dist_sq(a, &y[j as usize]), p);
                ns.add_arc(i, j as usize, c);
                added += 1;
            }
        }
        log::debug!("round {round}: {} arcs, {added} added", ns.n_arcs());
        if added == 0 {
            break;
        }
    }
    debug_assert!(ns.is_feasible());
    ns.flows()
}
