//! Independent reference implementations used as test oracles. They favor
//! obviousness over speed: exhaustive enumeration, textbook reduction,
//! brute-force geometry and plain Monte Carlo.

#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::HashMap;

use epdq::generators::{sample_triangle_diagram, stream_rng, TriangleModelParams};
use epdq::homology::Filtration;
use epdq::measures::{HalfPlanePoint, PersistenceMeasure};
use rand::Rng;

/// Unit copies of the atoms of a diagram with integer masses.
pub fn unit_points(mu: &PersistenceMeasure) -> Vec<HalfPlanePoint> {
    let mut out = Vec::new();
    for a in mu.atoms() {
        let k = a.mass.round() as usize;
        assert!((a.mass - k as f64).abs() < 1e-12, "oracle needs integer masses");
        out.extend(std::iter::repeat_n(a.point, k));
    }
    out
}

/// Calls `visit` with every partial matching of `a` into `b`: entry `i` is
/// `Some(j)` when `a[i]` is matched to `b[j]` and `None` when it goes to the
/// diagonal. Unmatched points of `b` go to the diagonal.
pub fn for_each_partial_matching(na: usize, nb: usize, visit: &mut impl FnMut(&[Option<usize>])) {
    fn rec(i: usize, na: usize, used: &mut Vec<bool>, cur: &mut Vec<Option<usize>>, visit: &mut impl FnMut(&[Option<usize>])) {
        if i == na {
            visit(cur);
            return;
        }
        cur.push(None);
        rec(i + 1, na, used, cur, visit);
        cur.pop();
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                cur.push(Some(j));
                rec(i + 1, na, used, cur, visit);
                cur.pop();
                used[j] = false;
            }
        }
    }
    rec(0, na, &mut vec![false; nb], &mut Vec::new(), visit);
}

fn matching_costs(a: &[HalfPlanePoint], b: &[HalfPlanePoint], m: &[Option<usize>]) -> Vec<f64> {
    let mut costs = Vec::new();
    let mut hit = vec![false; b.len()];
    for (i, t) in m.iter().enumerate() {
        match t {
            Some(j) => {
                hit[*j] = true;
                costs.push(a[i].distance(&b[*j]));
            }
            None => costs.push(a[i].persistence()),
        }
    }
    for (j, h) in hit.iter().enumerate() {
        if !h {
            costs.push(b[j].persistence());
        }
    }
    costs
}

/// `OT_p^p` between unit-mass diagrams by exhaustive enumeration.
pub fn brute_ot_pow(mu: &PersistenceMeasure, nu: &PersistenceMeasure, p: f64) -> f64 {
    let (a, b) = (unit_points(mu), unit_points(nu));
    let mut best = f64::INFINITY;
    for_each_partial_matching(a.len(), b.len(), &mut |m| {
        let c: f64 = matching_costs(&a, &b, m).iter().map(|d| d.powf(p)).sum();
        best = best.min(c);
    });
    best
}

/// Bottleneck distance between unit-mass diagrams by exhaustive enumeration.
pub fn brute_bottleneck(mu: &PersistenceMeasure, nu: &PersistenceMeasure) -> f64 {
    let (a, b) = (unit_points(mu), unit_points(nu));
    let mut best = f64::INFINITY;
    for_each_partial_matching(a.len(), b.len(), &mut |m| {
        let c = matching_costs(&a, &b, m).into_iter().fold(0.0, f64::max);
        best = best.min(c);
    });
    best
}

/// Finite `(birth, death)` pairs with `death > birth` in dimension `dim`,
/// by the textbook left-to-right column reduction of the full boundary
/// matrix (no clearing, no cohomology). Sorted.
pub fn naive_pairs(f: &Filtration, dim: usize) -> Vec<(f64, f64)> {
    let simplices = f.simplices();
    let index: HashMap<Vec<u32>, usize> = simplices.iter().enumerate().map(|(i, s)| (s.vertices().to_vec(), i)).collect();
    let mut columns: Vec<Vec<usize>> = simplices
        .iter()
        .map(|s| {
            let v = s.vertices();
            if v.len() == 1 {
                return Vec::new();
            }
            let mut col: Vec<usize> = (0..v.len())
                .map(|skip| {
                    let face: Vec<u32> = v.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, x)| *x).collect();
                    index[&face]
                })
                .collect();
            col.sort_unstable();
            col
        })
        .collect();
    let mut owner_of_low: HashMap<usize, usize> = HashMap::new();
    let mut pairs = Vec::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match owner_of_low.get(&low) {
                Some(&k) => {
                    let other = columns[k].clone();
                    let mut merged: Vec<usize> = Vec::new();
                    let (mut x, mut y) = (0, 0);
                    let col = &columns[j];
                    while x < col.len() || y < other.len() {
                        if y == other.len() || (x < col.len() && col[x] < other[y]) {
                            merged.push(col[x]);
                            x += 1;
                        } else if x == col.len() || other[y] < col[x] {
                            merged.push(other[y]);
                            y += 1;
                        } else {
                            x += 1;
                            y += 1;
                        }
                    }
                    columns[j] = merged;
                }
                None => {
                    owner_of_low.insert(low, j);
                    if simplices[low].dim() == dim {
                        let (b, d) = (simplices[low].value, simplices[j].value);
                        if d > b {
                            pairs.push((b, d));
                        }
                    }
                    break;
                }
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    pairs
}

/// Circles through two (diametral) or three (circumscribed) input points
/// that enclose every point, as `(center, radius)`.
pub fn enclosing_candidate_circles(points: &[[f64; 2]]) -> Vec<([f64; 2], f64)> {
    let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let encloses = |c: [f64; 2], r: f64| points.iter().all(|&p| d(p, c) <= r * (1.0 + 1e-12) + 1e-12);
    let n = points.len();
    let mut out = Vec::new();
    if n == 1 {
        return vec![(points[0], 0.0)];
    }
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i], points[j]);
            let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
            let r = d(a, b) / 2.0;
            if encloses(c, r) {
                out.push((c, r));
            }
            for k in j + 1..n {
                let cpt = points[k];
                // Solve |x - a|^2 = |x - b|^2 = |x - c|^2 as a 2x2 system.
                let (a11, a12) = (2.0 * (b[0] - a[0]), 2.0 * (b[1] - a[1]));
                let (a21, a22) = (2.0 * (cpt[0] - a[0]), 2.0 * (cpt[1] - a[1]));
                let r1 = b[0] * b[0] + b[1] * b[1] - a[0] * a[0] - a[1] * a[1];
                let r2 = cpt[0] * cpt[0] + cpt[1] * cpt[1] - a[0] * a[0] - a[1] * a[1];
                let det = a11 * a22 - a12 * a21;
                if det.abs() < 1e-12 {
                    continue;
                }
                let c = [(r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det];
                let r = d(a, c).max(d(b, c)).max(d(cpt, c));
                if encloses(c, r) {
                    out.push((c, r));
                }
            }
        }
    }
    out
}

/// Monte-Carlo mean and standard error of the number of triangle-model
/// atoms falling in each rectangle `[r1, r2] x [s1, s2]`.
pub fn monte_carlo_rect_counts(
    params: &TriangleModelParams,
    rects: &[(f64, f64, f64, f64)],
    draws: usize,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut sum = vec![0.0; rects.len()];
    let mut sum_sq = vec![0.0; rects.len()];
    let mut rng = stream_rng(seed, 0xC0FFEE);
    for _ in 0..draws {
        let d = sample_triangle_diagram(params, &mut rng);
        for (k, &(r1, r2, s1, s2)) in rects.iter().enumerate() {
            let c = d
                .atoms()
                .iter()
                .filter(|a| {
                    let (b, e) = (a.point.birth(), a.point.death());
                    b >= r1 && b <= r2 && e >= s1 && e <= s2
                })
                .map(|a| a.mass)
                .sum::<f64>();
            sum[k] += c;
            sum_sq[k] += c * c;
        }
    }
    let n = draws as f64;
    sum.iter()
        .zip(&sum_sq)
        .map(|(s, q)| {
            let mean = s / n;
            let var = ((q / n - mean * mean) * n / (n - 1.0)).max(0.0);
            (mean, (var / n).sqrt())
        })
        .collect()
}

/// A unit-mass diagram of at most `max_points` points with births in
/// `[0, 4)` and lifetimes in `(0.05, 3)`.
pub fn random_diagram(rng: &mut impl Rng, max_points: usize) -> PersistenceMeasure {
    let n = rng.random_range(0..=max_points);
    PersistenceMeasure::diagram((0..n).map(|_| {
        let b: f64 = rng.random_range(0.0..4.0);
        HalfPlanePoint::new(b, b + rng.random_range(0.05..3.0)).unwrap()
    }))
}

/// A measure with fractional masses in `(0.1, 2)`.
pub fn random_measure(rng: &mut impl Rng, max_points: usize) -> PersistenceMeasure {
    let n = rng.random_range(0..=max_points);
    PersistenceMeasure::from_atoms((0..n).map(|_| {
        let b: f64 = rng.random_range(0.0..3.0);
        let p = HalfPlanePoint::new(b, b + rng.random_range(0.05..2.5)).unwrap();
        (p, rng.random_range(0.1..2.0))
    }))
    .unwrap()
}

/// A random point of `A_L`: `|u| <= L/2` and `0 < v <= L` in the rotated
/// coordinates `u = (b + d)/sqrt 2`, `v = (d - b)/sqrt 2`.
pub fn random_point_in_ball(rng: &mut impl Rng, l: f64) -> HalfPlanePoint {
    loop {
        let u = rng.random_range(-0.5 * l..=0.5 * l);
        let v = rng.random_range(0.0..=l);
        let s = std::f64::consts::SQRT_2;
        if let Ok(p) = HalfPlanePoint::new((u - v) / s, (u + v) / s) {
            let (pu, pv) = ((p.birth() + p.death()) / s, (p.death() - p.birth()) / s);
            if pu.abs() <= 0.5 * l && pv <= l {
                return p;
            }
        }
    }
}

/// A measure shaped like an empirical EPD: masses are multiples of `1/n`
/// for a random `n` in `1..=12`.
pub fn random_epd_measure(rng: &mut impl Rng, max_points: usize) -> PersistenceMeasure {
    let n_diagrams = rng.random_range(1..=12u32);
    let n = rng.random_range(0..=max_points);
    PersistenceMeasure::from_atoms((0..n).map(|_| {
        let b: f64 = rng.random_range(0.0..3.0);
        let p = HalfPlanePoint::new(b, b + rng.random_range(0.05..2.5)).unwrap();
        (p, rng.random_range(1..=2 * n_diagrams) as f64 / n_diagrams as f64)
    }))
    .unwrap()
}

/// Random rectangles `(r1, r2, s1, s2)` inside `[0, 1] x [0, 2]` whose
/// closed-form EPD mass is at least `min_mass`, so a Monte-Carlo comparison
/// has something to count.
pub fn random_rectangles(rng: &mut impl Rng, count: usize, min_mass: f64) -> Vec<(f64, f64, f64, f64)> {
    let mut out = Vec::new();
    while out.len() < count {
        let (mut r1, mut r2): (f64, f64) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let (mut s1, mut s2): (f64, f64) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
        if r1 > r2 {
            std::mem::swap(&mut r1, &mut r2);
        }
        if s1 > s2 {
            std::mem::swap(&mut s1, &mut s2);
        }
        if epdq::generators::closed_form_epd_rect(r1, r2, s1, s2).unwrap() >= min_mass {
            out.push((r1, r2, s1, s2));
        }
    }
    out
}
