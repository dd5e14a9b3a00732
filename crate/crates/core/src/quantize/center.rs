use rand::seq::SliceRandom;
use rand::SeedableRng;

use super::Exponent;
use crate::error::{Error, Result};

/// A circle in the `(birth, death)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Circle {
    fn contains(&self, p: &[f64; 2]) -> bool {
        let d = ((p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2)).sqrt();
        d <= self.radius * (1.0 + 1e-12) + 1e-300
    }

    fn from_two(a: &[f64; 2], b: &[f64; 2]) -> Circle {
        let center = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let radius = 0.5 * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        Circle { center, radius }
    }

    /// Circumcircle, or the diametral circle of the farthest pair when the
    /// points are collinear.
    fn from_three(a: &[f64; 2], b: &[f64; 2], c: &[f64; 2]) -> Circle {
        let (bx, by) = (b[0] - a[0], b[1] - a[1]);
        let (cx, cy) = (c[0] - a[0], c[1] - a[1]);
        let det = 2.0 * (bx * cy - by * cx);
        let scale = (bx * bx + by * by).max(cx * cx + cy * cy);
        if det.abs() <= 1e-14 * scale {
            let pairs = [Circle::from_two(a, b), Circle::from_two(a, c), Circle::from_two(b, c)];
            return pairs.into_iter().max_by(|x, y| x.radius.total_cmp(&y.radius)).unwrap();
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / det;
        let uy = (bx * c2 - cx * b2) / det;
        let center = [a[0] + ux, a[1] + uy];
        let radius = [a, b, c]
            .iter()
            .map(|p| ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        Circle { center, radius }
    }
}

/// Smallest circle enclosing `points` (Welzl's algorithm, move-to-front
/// form, on a fixed pseudo-random permutation so results are reproducible).
pub fn smallest_enclosing_circle(points: &[[f64; 2]]) -> Result<Circle> {
    if points.is_empty() {
        return Err(Error::EmptyInput("point set"));
    }
    let mut pts = points.to_vec();
    pts.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(0x5ec));
    let mut c = Circle {
        center: pts[0],
        radius: 0.0,
    };
    for i in 1..pts.len() {
        if c.contains(&pts[i]) {
            continue;
        }
        c = Circle {
            center: pts[i],
            radius: 0.0,
        };
        for j in 0..i {
            if c.contains(&pts[j]) {
                continue;
            }
            c = Circle::from_two(&pts[i], &pts[j]);
            for k in 0..j {
                if !c.contains(&pts[k]) {
                    c = Circle::from_three(&pts[i], &pts[j], &pts[k]);
                }
            }
        }
    }
    Ok(c)
}

fn objective(y: [f64; 2], pts: &[([f64; 2], f64)], p: f64) -> f64 {
    pts.iter()
        .map(|(x, m)| m * ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2)).powf(0.5 * p))
        .sum()
}

fn gradient(y: [f64; 2], pts: &[([f64; 2], f64)], p: f64) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (x, m) in pts {
        let (dx, dy) = (y[0] - x[0], y[1] - x[1]);
        let r2 = dx * dx + dy * dy;
        if r2 == 0.0 {
            continue;
        }
        let w = m * p * r2.powf(0.5 * p - 1.0);
        g[0] += w * dx;
        g[1] += w * dy;
    }
    g
}

/// Minimizes `sum m |y - x|^p` by gradient descent with Barzilai-Borwein
/// trial steps and Armijo backtracking, from the weighted mean.
fn descend(pts: &[([f64; 2], f64)], p: f64, start: [f64; 2]) -> [f64; 2] {
    const GRAD_TOL: f64 = 1e-9;
    const MAX_ITER: usize = 10_000;
    let mut y = start;
    let mut f = objective(y, pts, p);
    let mut g = gradient(y, pts, p);
    let spread = pts
        .iter()
        .map(|(x, _)| ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt())
        .fold(0.0, f64::max);
    let gnorm = |g: [f64; 2]| (g[0] * g[0] + g[1] * g[1]).sqrt();
    let mut step = if gnorm(g) > 0.0 { spread.max(1e-12) / gnorm(g) } else { 0.0 };
    for _ in 0..MAX_ITER {
        let gn = gnorm(g);
        if gn <= GRAD_TOL || step == 0.0 {
            break;
        }
        let mut t = step;
        let (y_new, f_new) = loop {
            let cand = [y[0] - t * g[0], y[1] - t * g[1]];
            let fc = objective(cand, pts, p);
            if fc <= f - 1e-4 * t * gn * gn {
                break (cand, fc);
            }
            t *= 0.5;
            if t * gn < 1e-16 * (1.0 + y[0].abs() + y[1].abs()) {
                return y;
            }
        };
        let g_new = gradient(y_new, pts, p);
        let s = [y_new[0] - y[0], y_new[1] - y[1]];
        let dg = [g_new[0] - g[0], g_new[1] - g[1]];
        let sy = s[0] * dg[0] + s[1] * dg[1];
        step = if sy > 0.0 { (s[0] * s[0] + s[1] * s[1]) / sy } else { 2.0 * t };
        y = y_new;
        f = f_new;
        g = g_new;
    }
    y
}

/// The `p`-center of a weighted point set: the minimizer of
/// `sum m_i |y - x_i|^p`; for `p = inf`, the center of the smallest circle
/// enclosing the points of positive mass.
pub fn p_center(points: &[([f64; 2], f64)], p: Exponent) -> Result<[f64; 2]> {
    let pts: Vec<([f64; 2], f64)> = points.iter().copied().filter(|&(_, m)| m > 0.0).collect();
    if pts.is_empty() {
        return Err(Error::EmptyInput("cell"));
    }
    let total: f64 = pts.iter().map(|(_, m)| m).sum();
    let mean = [
        pts.iter().map(|(x, m)| m * x[0]).sum::<f64>() / total,
        pts.iter().map(|(x, m)| m * x[1]).sum::<f64>() / total,
    ];
    match p {
        Exponent::Finite(2.0) => Ok(mean),
        Exponent::Finite(p) => Ok(descend(&pts, p, mean)),
        Exponent::Infinite => {
            let support: Vec<[f64; 2]> = pts.iter().map(|(x, _)| *x).collect();
            Ok(smallest_enclosing_circle(&support)?.center)
        }
    }
}
