//! Optimal partial transport between persistence measures.
//!
//! Mass may be moved between atoms or created/destroyed on the diagonal at a
//! cost equal to the distance to the diagonal. For finite `p` the problem is
//! turned into a balanced transportation problem by giving each side a
//! diagonal sink holding the other side's total mass, and solved exactly with
//! a network simplex on integer-scaled masses.

mod bottleneck;
mod multiscale;
mod network_simplex;
mod partial;

pub use bottleneck::{bottleneck_distance, threshold_matching_exists};
pub use multiscale::multiscale_upper_bound;

use crate::error::{Error, Result};
use crate::measures::{GridHistogram, HalfPlanePoint, PersistenceMeasure};

/// One side of a transport pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Atom(usize),
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanEntry {
    pub source: Endpoint,
    pub target: Endpoint,
    pub mass: f64,
}

/// A coupling between two measures augmented with the diagonal.
///
/// `cost_p` is `sum mass * dist^p` for finite `p`; for the bottleneck plan
/// (`p = inf`) it is the largest distance in the support.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub pairs: Vec<PlanEntry>,
    pub cost_p: f64,
    pub p: f64,
}

impl TransportPlan {
    fn empty(p: f64) -> Self {
        TransportPlan {
            pairs: Vec::new(),
            cost_p: 0.0,
            p,
        }
    }

    /// Mass leaving each source atom.
    pub fn source_marginals(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for e in &self.pairs {
            if let Endpoint::Atom(i) = e.source {
                out[i] += e.mass;
            }
        }
        out
    }

    /// Mass arriving at each target atom.
    pub fn target_marginals(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for e in &self.pairs {
            if let Endpoint::Atom(j) = e.target {
                out[j] += e.mass;
            }
        }
        out
    }

    /// Recomputes `sum mass * dist^p` from the pairs.
    pub fn recompute_cost(&self, mu: &PersistenceMeasure, nu: &PersistenceMeasure) -> f64 {
        self.pairs
            .iter()
            .map(|e| e.mass * pair_cost(mu, nu, e.source, e.target, self.p))
            .sum()
    }
}

fn pair_cost(mu: &PersistenceMeasure, nu: &PersistenceMeasure, s: Endpoint, t: Endpoint, p: f64) -> f64 {
    let point = |m: &PersistenceMeasure, i: usize| m.atoms()[i].point;
    match (s, t) {
        (Endpoint::Atom(i), Endpoint::Atom(j)) => {
            pow_from_sq(dist_sq(&point(mu, i), &point(nu, j)), p)
        }
        (Endpoint::Atom(i), Endpoint::Diagonal) => pow_from_sq(pers_sq(&point(mu, i)), p),
        (Endpoint::Diagonal, Endpoint::Atom(j)) => pow_from_sq(pers_sq(&point(nu, j)), p),
        (Endpoint::Diagonal, Endpoint::Diagonal) => 0.0,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TransportOptions {
    /// Resolution used to turn masses into integers when they are not
    /// multiples of a common denominator.
    pub mass_precision: f64,
}

impl Default for TransportOptions {
    fn default() -> Self {
        TransportOptions {
            mass_precision: 1e-9,
        }
    }
}

pub(crate) fn dist_sq(a: &HalfPlanePoint, b: &HalfPlanePoint) -> f64 {
    let db = a.birth() - b.birth();
    let dd = a.death() - b.death();
    db * db + dd * dd
}

pub(crate) fn pers_sq(a: &HalfPlanePoint) -> f64 {
    let l = a.death() - a.birth();
    0.5 * l * l
}

/// `sqrt(d2)^p`, with exact shortcuts for `p = 1, 2`.
pub(crate) fn pow_from_sq(d2: f64, p: f64) -> f64 {
    if p == 2.0 {
        d2
    } else if p == 1.0 {
        d2.sqrt()
    } else {
        d2.powf(0.5 * p)
    }
}

/// `OT_p(mu, nu)` for `1 <= p < inf`, with an optimal plan.
pub fn ot_distance(
    mu: &PersistenceMeasure,
    nu: &PersistenceMeasure,
    p: f64,
) -> Result<(f64, TransportPlan)> {
    ot_distance_with(mu, nu, p, &TransportOptions::default())
}

pub fn ot_distance_with(
    mu: &PersistenceMeasure,
    nu: &PersistenceMeasure,
    p: f64,
    opts: &TransportOptions,
) -> Result<(f64, TransportPlan)> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::param(format!("transport exponent must be in [1, inf), got {p}")));
    }
    if !(opts.mass_precision > 0.0) {
        return Err(Error::param("mass precision must be positive"));
    }
    let (n, m) = (mu.len(), nu.len());
    if n == 0 && m == 0 {
        return Ok((0.0, TransportPlan::empty(p)));
    }

    let scale = mass_scale(
        mu.atoms().iter().chain(nu.atoms()).map(|a| a.mass),
        opts.mass_precision,
    );
    let to_int = |x: f64| (x * scale).round() as i64;
    let supply: Vec<i64> = mu.atoms().iter().map(|a| to_int(a.mass)).collect();
    let demand: Vec<i64> = nu.atoms().iter().map(|a| to_int(a.mass)).collect();

    let xs: Vec<HalfPlanePoint> = mu.atoms().iter().map(|a| a.point).collect();
    let ys: Vec<HalfPlanePoint> = nu.atoms().iter().map(|a| a.point).collect();
    let flows = partial::solve(&xs, &supply[..n], &ys, &demand[..m], p);
    let mut pairs = Vec::with_capacity(flows.len());
    let mut cost_p = 0.0;
    for (i, j, f) in flows {
        if i == n && j == m {
            continue;
        }
        let source = if i < n { Endpoint::Atom(i) } else { Endpoint::Diagonal };
        let target = if j < m { Endpoint::Atom(j) } else { Endpoint::Diagonal };
        let mass = f as f64 / scale;
        cost_p += mass * pair_cost(mu, nu, source, target, p);
        pairs.push(PlanEntry { source, target, mass });
    }
    let cost_p = cost_p.max(0.0);
    Ok((cost_p.powf(1.0 / p), TransportPlan { pairs, cost_p, p }))
}

/// Integer scale for the masses: the least common denominator when every
/// mass is (to 1e-14) a fraction with denominator at most 10^6 and the scaled
/// totals stay small, otherwise `1 / precision`.
fn mass_scale(masses: impl Iterator<Item = f64>, precision: f64) -> f64 {
    const MAX_SCALED_TOTAL: f64 = 1e15;
    let fallback = (1.0 / precision).round().max(1.0);
    let mut lcm: u64 = 1;
    let mut total = 0.0;
    for m in masses {
        total += m;
        let Some(d) = denominator(m) else {
            return fallback;
        };
        lcm = lcm / gcd(lcm, d) * d;
        if lcm as f64 > 1e12 {
            return fallback;
        }
    }
    if total * lcm as f64 > MAX_SCALED_TOTAL {
        return fallback;
    }
    lcm as f64
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Denominator of the best continued-fraction approximation of `x` with
/// denominator <= 10^6, if it matches `x` to 1e-14 relative.
fn denominator(x: f64) -> Option<u64> {
    const MAX_DEN: f64 = 1e6;
    let tol = 1e-14 * x.abs().max(1.0);
    let (mut h0, mut h1) = (0.0f64, 1.0f64);
    let (mut k0, mut k1) = (1.0f64, 0.0f64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let h2 = a * h1 + h0;
        let k2 = a * k1 + k0;
        if k2 > MAX_DEN {
            return None;
        }
        if (x - h2 / k2).abs() <= tol {
            return Some(k2 as u64);
        }
        let frac = r - a;
        if frac <= 0.0 {
            return None;
        }
        r = 1.0 / frac;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

/// `OT_p` between two histograms on the same grid, computed on their
/// cell-center atomizations.
pub fn histogram_ot(a: &GridHistogram, b: &GridHistogram, p: f64) -> Result<f64> {
    if a.spec() != b.spec() {
        return Err(Error::GridMismatch);
    }
    Ok(ot_distance(&a.atomize(), &b.atomize(), p)?.0)
}
