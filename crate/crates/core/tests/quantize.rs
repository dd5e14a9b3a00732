#[path = "common/oracles.rs"]
mod oracles;

use epdq::generators::stream_rng;
use epdq::measures::{HalfPlanePoint, PersistenceMeasure};
use epdq::quantize::{
    assign_all, assign_cell, distortion, distortion_pow, optimal_weights, p_center, quantized_measure,
    smallest_enclosing_circle, Cell, Codebook, Exponent,
};
use epdq::transport::ot_distance;
use oracles::{enclosing_candidate_circles, random_epd_measure, random_measure};
use proptest::prelude::*;
use rand::Rng;

fn random_codebook(rng: &mut impl Rng, k: usize) -> Codebook {
    Codebook::new(
        (0..k)
            .map(|_| {
                let b: f64 = rng.random_range(0.0..3.0);
                HalfPlanePoint::new(b, b + rng.random_range(0.1..2.5)).unwrap()
            })
            .collect(),
    )
}

fn with_weights(c: &Codebook, w: &[f64]) -> PersistenceMeasure {
    PersistenceMeasure::from_atoms(c.centroids().iter().copied().zip(w.iter().copied())).unwrap()
}

#[test]
fn optimal_weights_beat_random_weights() {
    let mut rng = stream_rng(21, 0);
    for _ in 0..40 {
        let mu = random_epd_measure(&mut rng, 8);
        let k = rng.random_range(1..=3);
        let c = random_codebook(&mut rng, k);
        let p = [1.0, 2.0, 3.0][rng.random_range(0..3)];
        let best = ot_distance(&with_weights(&c, &optimal_weights(&c, &mu)), &mu, p).unwrap().0.powf(p);
        for _ in 0..20 {
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..3.0)).collect();
            let other = ot_distance(&with_weights(&c, &w), &mu, p).unwrap().0.powf(p);
            assert!(best <= other + 1e-9, "{best} > {other}");
        }
    }
}

#[test]
fn distortion_is_transport_to_the_quantized_measure() {
    let mut rng = stream_rng(22, 0);
    for _ in 0..60 {
        let mu = random_epd_measure(&mut rng, 10);
        let k = rng.random_range(1..=4);
        let c = random_codebook(&mut rng, k);
        for p in [1.0, 2.0, 2.5] {
            let lhs = distortion_pow(&c, &mu, p);
            let rhs = ot_distance(&quantized_measure(&c, &mu), &mu, p).unwrap().0.powf(p);
            assert!((lhs - rhs).abs() <= 1e-9, "p={p}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn distortion_identity_with_arbitrary_masses_up_to_mass_resolution() {
    // Masses without a small common denominator are rounded to multiples of
    // 1e-9 before solving, so each atom may carry 5e-10 of misplaced mass.
    let mut rng = stream_rng(27, 0);
    for _ in 0..60 {
        let mu = random_measure(&mut rng, 10);
        let k = rng.random_range(1..=4);
        let c = random_codebook(&mut rng, k);
        let lhs = distortion_pow(&c, &mu, 2.0);
        let rhs = ot_distance(&quantized_measure(&c, &mu), &mu, 2.0).unwrap().0.powi(2);
        let max_cost = mu.atoms().iter().map(|a| a.point.persistence().powi(2)).fold(0.0, f64::max);
        let slack = 1e-9 * (mu.len() + k) as f64 * max_cost + 1e-12;
        assert!((lhs - rhs).abs() <= slack, "{lhs} vs {rhs}");
    }
}

#[test]
fn cell_assignment_partitions_the_support() {
    let mut rng = stream_rng(23, 0);
    for _ in 0..50 {
        let mu = random_measure(&mut rng, 12);
        let c = random_codebook(&mut rng, 3);
        let cells = assign_all(&c, &mu);
        assert_eq!(cells.len(), mu.len());
        for (a, cell) in mu.atoms().iter().zip(&cells) {
            // The cell is a nearest site, and no earlier site is as close.
            let d = |cell: Cell| match cell {
                Cell::Centroid(j) => a.point.distance(&c.centroids()[j]),
                Cell::Diagonal => a.point.persistence(),
            };
            let here = d(*cell);
            for (j, cj) in c.centroids().iter().enumerate() {
                let dj = a.point.distance(cj);
                assert!(here <= dj);
                if let Cell::Centroid(i) = cell {
                    if j < *i {
                        assert!(dj > here);
                    }
                }
            }
            assert!(here <= a.point.persistence());
            assert_eq!(assign_cell(&c, &a.point), *cell);
        }
        let total: f64 = optimal_weights(&c, &mu).iter().sum();
        let diag: f64 = mu.atoms().iter().zip(&cells).filter(|(_, c)| **c == Cell::Diagonal).map(|(a, _)| a.mass).sum();
        assert!((total + diag - mu.total_mass()).abs() < 1e-12);
    }
}

#[test]
fn a_lloyd_sweep_never_increases_distortion() {
    let mut rng = stream_rng(24, 0);
    for _ in 0..50 {
        let mu = random_measure(&mut rng, 15);
        let c = random_codebook(&mut rng, 3);
        let cells = assign_all(&c, &mu);
        let moved: Vec<HalfPlanePoint> = c
            .centroids()
            .iter()
            .enumerate()
            .map(|(j, cj)| {
                let pts: Vec<([f64; 2], f64)> = mu
                    .atoms()
                    .iter()
                    .zip(&cells)
                    .filter(|(_, cell)| **cell == Cell::Centroid(j))
                    .map(|(a, _)| (a.point.coords(), a.mass))
                    .collect();
                if pts.is_empty() {
                    *cj
                } else {
                    let x = p_center(&pts, Exponent::Finite(2.0)).unwrap();
                    HalfPlanePoint::new(x[0], x[1]).unwrap()
                }
            })
            .collect();
        let before = distortion_pow(&c, &mu, 2.0);
        let after = distortion_pow(&Codebook::new(moved), &mu, 2.0);
        assert!(after <= before + 1e-12);
    }
}

#[test]
fn optimal_codebooks_use_every_cell() {
    // Grid search over pairs of centroids for a three-atom measure.
    let mu = PersistenceMeasure::from_triples(&[(0.0, 2.0, 1.0), (0.2, 2.4, 1.0), (1.5, 4.0, 1.0)]).unwrap();
    let grid: Vec<HalfPlanePoint> = (0..=24)
        .flat_map(|i| (0..=24).map(move |j| (i as f64 * 0.1, 1.5 + j as f64 * 0.1)))
        .filter_map(|(b, d)| HalfPlanePoint::new(b, d).ok())
        .collect();
    let mut best = (f64::INFINITY, None);
    for (i, a) in grid.iter().enumerate() {
        for b in &grid[i + 1..] {
            let c = Codebook::new(vec![*a, *b]);
            let r = distortion_pow(&c, &mu, 2.0);
            if r < best.0 {
                best = (r, Some(c));
            }
        }
    }
    let c = best.1.unwrap();
    assert!(optimal_weights(&c, &mu).iter().all(|&m| m > 0.0));
    assert_ne!(c.centroids()[0], c.centroids()[1]);
}

#[test]
fn welzl_beats_every_brute_force_circle() {
    let mut rng = stream_rng(25, 0);
    for _ in 0..200 {
        let n = rng.random_range(1..=10);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-5..=5) as f64, rng.random_range(-5..=5) as f64]).collect();
        let circle = smallest_enclosing_circle(&pts).unwrap();
        for (_, r) in enclosing_candidate_circles(&pts) {
            assert!(circle.radius <= r * (1.0 + 1e-12), "{} > {r}", circle.radius);
        }
    }
}

#[test]
fn p4_center_is_a_local_minimum() {
    let mut rng = stream_rng(26, 0);
    for _ in 0..5 {
        let pts: Vec<([f64; 2], f64)> = (0..5).map(|_| ([rng.random_range(0.0..2.0), rng.random_range(2.0..4.0)], rng.random_range(0.5..1.5))).collect();
        let x = p_center(&pts, Exponent::Finite(4.0)).unwrap();
        let f = |y: [f64; 2]| pts.iter().map(|(q, m)| m * ((q[0] - y[0]).powi(2) + (q[1] - y[1]).powi(2)).powi(2)).sum::<f64>();
        let fx = f(x);
        for _ in 0..10_000 {
            let y = [x[0] + rng.random_range(-1e-3..1e-3), x[1] + rng.random_range(-1e-3..1e-3)];
            assert!(fx <= f(y) + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distortion_is_zero_on_its_own_support(pts in prop::collection::vec((0.0..3.0f64, 0.1..2.0f64), 1..5)) {
        let points: Vec<HalfPlanePoint> = pts.iter().map(|&(b, l)| HalfPlanePoint::new(b, b + l).unwrap()).collect();
        let mu = PersistenceMeasure::diagram(points.clone());
        let c = Codebook::new(points);
        prop_assert_eq!(distortion(&c, &mu, Exponent::Finite(2.0)), 0.0);
        prop_assert_eq!(distortion(&c, &mu, Exponent::Infinite), 0.0);
    }

    #[test]
    fn bottleneck_distortion_is_the_worst_nearest_site(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 1);
        let mu = random_measure(&mut rng, 10);
        let c = random_codebook(&mut rng, 2);
        let want = mu
            .atoms()
            .iter()
            .map(|a| c.centroids().iter().map(|x| a.point.distance(x)).fold(a.point.persistence(), f64::min))
            .fold(0.0, f64::max);
        let got = distortion(&c, &mu, Exponent::Infinite);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
    }
}
