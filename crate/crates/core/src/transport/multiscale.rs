//! Multiscale upper bound on `OT_p^p` for measures supported in the
//! l1-ball `A_L`.
//!
//! In rotated coordinates `u = (birth + death)/sqrt(2)` (along the diagonal)
//! and `v = (death - birth)/sqrt(2)` (persistence), `A_L` above the diagonal
//! is the box `|u| <= L/2, 0 < v <= L`. Band `B_k` holds the points with
//! `v in (L 2^-(k+1), L 2^-k]`; it is tiled by squares of side
//! `L 2^-(k+1) 2^-j` at refinement level `j`.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::measures::PersistenceMeasure;

struct Located {
    band: u32,
    u: f64,
    v: f64,
    mass: f64,
    // +1 for mu, -1 for nu.
    sign: f64,
}

fn band_of(v: f64, l: f64) -> u32 {
    let mut k = (l / v).log2().floor().max(0.0) as i64;
    while k > 0 && v > l * (-(k as f64)).exp2() {
        k -= 1;
    }
    while v <= l * (-(k as f64 + 1.0)).exp2() {
        k += 1;
    }
    k as u32
}

/// Evaluates the right-hand side
///
/// `2^{p/2} L^p sum_k 2^{-kp} ( 2^{-Jp} min(mu(B_k), nu(B_k)) + c_p |mu(B_k) - nu(B_k)|
///   + sum_{1<=j<=J} 2^{-jp} sum_{S in S_{k,j-1}} |mu(S) - nu(S)| )`
///
/// with `c_p = 2^{-p/2} (1 + 1/(2^p - 1))`. Only bands holding mass of either
/// measure contribute.
pub fn multiscale_upper_bound(
    mu: &PersistenceMeasure,
    nu: &PersistenceMeasure,
    p: f64,
    depth: u32,
    l: f64,
) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::param(format!("exponent must be in [1, inf), got {p}")));
    }
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::param("L must be positive"));
    }
    let tol = 1e-12 * l;
    let mut located = Vec::with_capacity(mu.len() + nu.len());
    for (measure, sign) in [(mu, 1.0), (nu, -1.0)] {
        for a in measure.atoms() {
            let (b, d) = (a.point.birth(), a.point.death());
            let u = (b + d) / SQRT_2;
            let v = (d - b) / SQRT_2;
            if u.abs() > 0.5 * l + tol || v > l + tol {
                return Err(Error::OutsideSupportBall(l));
            }
            let v = v.min(l);
            let u = u.clamp(-0.5 * l, 0.5 * l);
            located.push(Located {
                band: band_of(v, l),
                u,
                v,
                mass: a.mass,
                sign,
            });
        }
    }

    let mut bands: BTreeMap<u32, Vec<&Located>> = BTreeMap::new();
    for x in &located {
        bands.entry(x.band).or_default().push(x);
    }

    let c_p = (-0.5 * p).exp2() * (1.0 + 1.0 / (p.exp2() - 1.0));
    let mut total = 0.0;
    for (&k, atoms) in &bands {
        let band_lo = l * (-(k as f64) - 1.0).exp2();
        let mu_k: f64 = atoms.iter().filter(|x| x.sign > 0.0).map(|x| x.mass).sum();
        let nu_k: f64 = atoms.iter().filter(|x| x.sign < 0.0).map(|x| x.mass).sum();
        let mut term = (-(depth as f64) * p).exp2() * mu_k.min(nu_k) + c_p * (mu_k - nu_k).abs();

        for j in 1..=depth {
            let level = j - 1;
            let side = band_lo * (-(level as f64)).exp2();
            let nu_cells = 1u64 << (k + 1 + level);
            let nv_cells = 1u64 << level;
            let mut diff: HashMap<(u64, u64), f64> = HashMap::new();
            for x in atoms {
                let iu = (((x.u + 0.5 * l) / side).floor().max(0.0) as u64).min(nu_cells - 1);
                let iv = (((x.v - band_lo) / side).floor().max(0.0) as u64).min(nv_cells - 1);
                *diff.entry((iu, iv)).or_default() += x.sign * x.mass;
            }
            let sum: f64 = diff.values().map(|d| d.abs()).sum();
            term += (-(j as f64) * p).exp2() * sum;
        }
        total += (-(k as f64) * p).exp2() * term;
    }
    Ok((0.5 * p).exp2() * l.powf(p) * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn band_boundaries_are_half_open_below() {
        assert_eq!(band_of(1.0, 1.0), 0);
        assert_eq!(band_of(0.5, 1.0), 1);
        assert_eq!(band_of(0.500001, 1.0), 0);
        assert_eq!(band_of(0.25, 1.0), 2);
        assert_eq!(band_of(0.3, 1.0), 1);
    }

    #[test]
    fn equal_measures_leave_only_the_resolution_term() {
        // Atoms at persistence 0.6 (band 0) and 0.2 (band 2) with L = 1.
        let mu = PersistenceMeasure::from_triples(&[
            (-0.3, -0.3 + 0.6 * SQRT_2, 2.0),
            (0.1, 0.1 + 0.2 * SQRT_2, 0.5),
        ])
        .unwrap();
        for p in [1.0, 2.0] {
            for depth in 0..4 {
                let got = multiscale_upper_bound(&mu, &mu, p, depth, 1.0).unwrap();
                let want = (0.5 * p).exp2()
                    * (-(depth as f64) * p).exp2()
                    * (2.0 + (-2.0 * p).exp2() * 0.5);
                assert_relative_eq!(got, want, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn rejects_support_outside_the_ball() {
        let mu = PersistenceMeasure::from_triples(&[(0.0, 2.0, 1.0)]).unwrap();
        assert!(matches!(
            multiscale_upper_bound(&mu, &mu, 2.0, 1, 1.0),
            Err(Error::OutsideSupportBall(_))
        ));
        assert!(multiscale_upper_bound(&mu, &mu, 2.0, 1, 3.0).is_ok());
    }
}
