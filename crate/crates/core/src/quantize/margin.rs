//! Distance from a point to the boundary set `N(c)` where two cells of the
//! codebook partition meet.
//!
//! Work is done in rotated coordinates `u = (b + d)/sqrt(2)`,
//! `v = (d - b)/sqrt(2)`, so the diagonal is `v = 0` and a point's distance
//! to it is `v`. The boundary between two centroid cells lies on their
//! perpendicular bisector; the boundary between a centroid `(cu, cv)` and the
//! diagonal cell lies on the parabola `v = ((u - cu)^2 + cv^2) / (2 cv)`.
//! Each piece is restricted to where its two cells are both nearest.

use std::f64::consts::FRAC_1_SQRT_2;

use super::{Cell, Codebook};
use crate::measures::{HalfPlanePoint, PersistenceMeasure};

type Pt = [f64; 2];

fn rot(p: &HalfPlanePoint) -> Pt {
    [(p.birth() + p.death()) * FRAC_1_SQRT_2, (p.death() - p.birth()) * FRAC_1_SQRT_2]
}

fn dot(a: Pt, b: Pt) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Sorted disjoint closed intervals (endpoints may be infinite).
#[derive(Debug, Clone, PartialEq)]
struct IntervalSet(Vec<(f64, f64)>);

impl IntervalSet {
    fn all() -> Self {
        IntervalSet(vec![(f64::NEG_INFINITY, f64::INFINITY)])
    }

    fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        for &(a0, a1) in &self.0 {
            for &(b0, b1) in &other.0 {
                let (lo, hi) = (a0.max(b0), a1.min(b1));
                if lo <= hi {
                    out.push((lo, hi));
                }
            }
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        IntervalSet(out)
    }

    /// `{s : a s^2 + b s + c <= 0}`.
    fn quadratic_le_zero(a: f64, b: f64, c: f64) -> IntervalSet {
        let scale = a.abs().max(b.abs()).max(c.abs());
        if scale == 0.0 {
            return IntervalSet::all();
        }
        if a.abs() <= 1e-14 * scale {
            return IntervalSet::linear_le_zero(b, c);
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return if a > 0.0 { IntervalSet(Vec::new()) } else { IntervalSet::all() };
        }
        // Stable roots.
        let sq = disc.sqrt();
        let qq = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
        let (mut r1, mut r2) = (qq / a, if qq != 0.0 { c / qq } else { -b / (2.0 * a) });
        if r1 > r2 {
            std::mem::swap(&mut r1, &mut r2);
        }
        if a > 0.0 {
            IntervalSet(vec![(r1, r2)])
        } else {
            IntervalSet(vec![(f64::NEG_INFINITY, r1), (r2, f64::INFINITY)])
        }
    }

    /// `{s : b s + c <= 0}`.
    fn linear_le_zero(b: f64, c: f64) -> IntervalSet {
        if b == 0.0 {
            return if c <= 0.0 { IntervalSet::all() } else { IntervalSet(Vec::new()) };
        }
        let r = -c / b;
        if b > 0.0 {
            IntervalSet(vec![(f64::NEG_INFINITY, r)])
        } else {
            IntervalSet(vec![(r, f64::INFINITY)])
        }
    }
}

/// Real roots of `a3 w^3 + a1 w + a0` with `a3 > 0`, by bisection on its
/// monotone pieces.
fn depressed_cubic_roots(a3: f64, a1: f64, a0: f64) -> Vec<f64> {
    let h = |w: f64| (a3 * w * w + a1) * w + a0;
    let bound = 1.0 + (a1 / a3).abs().max((a0 / a3).abs());
    let mut cuts = vec![-bound];
    if a1 < 0.0 {
        let c = (-a1 / (3.0 * a3)).sqrt();
        cuts.extend([-c, c]);
    }
    cuts.push(bound);
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (h(lo), h(hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        let rising = flo < 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (h(mid) < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

fn bisector_piece(cs: &[Pt], j: usize, l: usize, x: Pt) -> Option<f64> {
    let (cj, cl) = (cs[j], cs[l]);
    let diff = [cl[0] - cj[0], cl[1] - cj[1]];
    let len = dot(diff, diff).sqrt();
    if len == 0.0 {
        return None;
    }
    let e = [-diff[1] / len, diff[0] / len];
    let m = [0.5 * (cj[0] + cl[0]), 0.5 * (cj[1] + cl[1])];
    // y(s) = m + s e.
    let mut set = IntervalSet::all();
    for (mi, cm) in cs.iter().enumerate() {
        if mi == j || mi == l {
            continue;
        }
        // 2 y.(cm - cj) <= |cm|^2 - |cj|^2
        let g = [cm[0] - cj[0], cm[1] - cj[1]];
        let rhs = dot(*cm, *cm) - dot(cj, cj);
        set = set.intersect(&IntervalSet::linear_le_zero(2.0 * dot(e, g), 2.0 * dot(m, g) - rhs));
    }
    // |y - cj|^2 - yv^2 <= 0, and yv >= 0.
    let w = [m[0] - cj[0], m[1] - cj[1]];
    let qa = dot(e, e) - e[1] * e[1];
    let qb = 2.0 * dot(w, e) - 2.0 * m[1] * e[1];
    let qc = dot(w, w) - m[1] * m[1];
    set = set.intersect(&IntervalSet::quadratic_le_zero(qa, qb, qc));
    set = set.intersect(&IntervalSet::linear_le_zero(-e[1], -m[1]));

    let s_star = dot([x[0] - m[0], x[1] - m[1]], e);
    set.0
        .iter()
        .map(|&(lo, hi)| {
            let s = s_star.clamp(lo, hi);
            let y = [m[0] + s * e[0], m[1] + s * e[1]];
            ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
        })
        .reduce(f64::min)
}

fn parabola_piece(cs: &[Pt], j: usize, x: Pt) -> Option<f64> {
    let [cu, cv] = cs[j];
    // Parametrize by w = u - cu: y(w) = (cu + w, (w^2 + cv^2) / (2 cv)).
    let mut set = IntervalSet::all();
    for (mi, cm) in cs.iter().enumerate() {
        if mi == j {
            continue;
        }
        let g = [cm[0] - cs[j][0], cm[1] - cs[j][1]];
        let rhs = dot(*cm, *cm) - dot(cs[j], cs[j]);
        // 2 (cu + w) g0 + 2 v(w) g1 - rhs <= 0
        let a = g[1] / cv;
        let b = 2.0 * g[0];
        let c = 2.0 * cu * g[0] + g[1] * cv - rhs;
        set = set.intersect(&IntervalSet::quadratic_le_zero(a, b, c));
    }
    if set.0.is_empty() {
        return None;
    }
    let point = |w: f64| [cu + w, (w * w + cv * cv) / (2.0 * cv)];
    let dist = |w: f64| {
        let y = point(w);
        ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
    };
    let roots = depressed_cubic_roots(1.0 / (2.0 * cv * cv), 1.5 - x[1] / cv, cu - x[0]);
    set.0
        .iter()
        .map(|&(lo, hi)| {
            let mut best = f64::INFINITY;
            for w in [lo, hi] {
                if w.is_finite() {
                    best = best.min(dist(w));
                }
            }
            for &w in &roots {
                if w >= lo && w <= hi {
                    best = best.min(dist(w));
                }
            }
            best
        })
        .reduce(f64::min)
}

/// Distance from `x` to the boundary set of the partition induced by `c`
/// (infinite when the codebook is empty).
pub fn boundary_distance(c: &Codebook, x: &HalfPlanePoint) -> f64 {
    let cs: Vec<Pt> = c.centroids().iter().map(rot).collect();
    let xr = rot(x);
    // A repeated centroid has an empty cell and its twin's whole cell is
    // boundary.
    if let Cell::Centroid(j) = c.assign(x) {
        if cs[j + 1..].contains(&cs[j]) {
            return 0.0;
        }
    }
    let mut best = f64::INFINITY;
    for j in 0..cs.len() {
        for l in j + 1..cs.len() {
            if let Some(d) = bisector_piece(&cs, j, l, xr) {
                best = best.min(d);
            }
        }
        if let Some(d) = parabola_piece(&cs, j, xr) {
            best = best.min(d);
        }
    }
    best
}

/// `(t, mass of the t-neighborhood of N(c))` for each radius.
pub fn margin_profile(epd: &PersistenceMeasure, c: &Codebook, radii: &[f64]) -> Vec<(f64, f64)> {
    let dists: Vec<(f64, f64)> = epd.atoms().iter().map(|a| (boundary_distance(c, &a.point), a.mass)).collect();
    radii
        .iter()
        .map(|&t| (t, dists.iter().filter(|(d, _)| *d <= t).map(|(_, m)| m).sum()))
        .collect()
}
