use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng as _;

use super::{assign_with, Cell, Codebook};
use crate::error::{Error, Result};
use crate::generators::stream_rng;
use crate::measures::{HalfPlanePoint, PersistenceMeasure};

/// Settings of the weighted-codebook baseline.
#[derive(Debug, Clone)]
pub struct WeightedOptions {
    pub k: usize,
    /// Number of points drawn from the pooled support.
    pub n_subsample: usize,
    /// Exponent applied to persistence before weighting.
    pub q: f64,
    pub quantile_lo: f64,
    pub quantile_hi: f64,
    pub seed: u64,
    /// Starting centroids for Lloyd; `None` takes the `k` most persistent
    /// sampled points.
    pub init: Option<Codebook>,
}

impl WeightedOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        WeightedOptions {
            k,
            n_subsample: 10_000,
            q: 1.0,
            quantile_lo: 0.05,
            quantile_hi: 0.95,
            seed,
            init: None,
        }
    }
}

/// Linear-interpolation quantile of `values` (sorted in place).
pub fn persistence_quantile(values: &mut [f64], q: f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let h = q.clamp(0.0, 1.0) * (values.len() - 1) as f64;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    values[lo] + (h - lo as f64) * (values[hi] - values[lo])
}

const LLOYD_MAX_ITER: usize = 200;
const LLOYD_REL_TOL: f64 = 1e-7;

fn lloyd(points: &[HalfPlanePoint], init: Codebook) -> Codebook {
    let mut c = init;
    let mut prev = f64::INFINITY;
    for _ in 0..LLOYD_MAX_ITER {
        let mut sums = vec![[0.0f64; 3]; c.k()];
        let mut cost = 0.0;
        for x in points {
            if let Cell::Centroid(j) = assign_with(&c, x, false) {
                let cj = c.centroids()[j];
                cost += (x.birth() - cj.birth()).powi(2) + (x.death() - cj.death()).powi(2);
                sums[j][0] += x.birth();
                sums[j][1] += x.death();
                sums[j][2] += 1.0;
            }
        }
        let next = Codebook::new(
            c.centroids()
                .iter()
                .zip(&sums)
                .map(|(cj, s)| {
                    if s[2] == 0.0 {
                        *cj
                    } else {
                        super::clamp_above_diagonal(s[0] / s[2], s[1] / s[2])
                    }
                })
                .collect(),
        );
        let done = (prev - cost).abs() <= LLOYD_REL_TOL * prev.max(f64::MIN_POSITIVE) || next == c;
        c = next;
        prev = cost;
        if done {
            break;
        }
    }
    c
}

/// Baseline: draw points from the pooled supports with probability
/// `w(x) = clamp((pers(x)^q - lambda) / (theta - lambda), 0, 1)`, where
/// `lambda`, `theta` are the low and high quantiles of `pers^q`, then run
/// k-means (no diagonal cell) on the sample. Degenerate weights fall back to
/// uniform sampling.
pub fn weighted_codebook(diagrams: &[PersistenceMeasure], opts: &WeightedOptions) -> Result<Codebook> {
    let support: Vec<HalfPlanePoint> = diagrams.iter().flat_map(|d| d.atoms().iter().map(|a| a.point)).collect();
    if support.is_empty() {
        return Err(Error::EmptyInput("pooled diagram support"));
    }
    if opts.k == 0 || opts.n_subsample == 0 {
        return Err(Error::param("k and the subsample size must be positive"));
    }
    let scores: Vec<f64> = support.iter().map(|x| x.persistence().powf(opts.q)).collect();
    let mut sorted = scores.clone();
    let lambda = persistence_quantile(&mut sorted, opts.quantile_lo);
    let theta = persistence_quantile(&mut sorted, opts.quantile_hi);
    let weights: Vec<f64> = if theta > lambda {
        scores.iter().map(|s| ((s - lambda) / (theta - lambda)).clamp(0.0, 1.0)).collect()
    } else {
        vec![0.0; scores.len()]
    };

    let mut rng = stream_rng(opts.seed, 0);
    let sample: Vec<HalfPlanePoint> = match WeightedIndex::new(&weights) {
        Ok(dist) => (0..opts.n_subsample).map(|_| support[dist.sample(&mut rng)]).collect(),
        Err(_) => {
            log::warn!("all sampling weights are zero (lambda = {lambda}, theta = {theta}); sampling uniformly");
            (0..opts.n_subsample).map(|_| support[rng.random_range(0..support.len())]).collect()
        }
    };

    let init = match &opts.init {
        Some(c) => c.clone(),
        None => {
            let mut pts = sample.clone();
            pts.sort_by(|a, b| b.persistence().total_cmp(&a.persistence()));
            pts.dedup();
            if pts.len() < opts.k {
                return Err(Error::param(format!("k = {} exceeds the distinct sampled points", opts.k)));
            }
            Codebook::new(pts[..opts.k].to_vec())
        }
    };
    if init.k() != opts.k {
        return Err(Error::param("initial codebook size differs from k"));
    }
    Ok(lloyd(&sample, init))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let mut v = vec![3.0, 1.0, 2.0, 4.0];
        assert_eq!(persistence_quantile(&mut v, 0.0), 1.0);
        assert_eq!(persistence_quantile(&mut v, 1.0), 4.0);
        assert_eq!(persistence_quantile(&mut v, 0.5), 2.5);
    }

    #[test]
    fn constant_persistence_falls_back_to_uniform() {
        let mu = PersistenceMeasure::from_triples(&[(0.0, 1.0, 1.0), (1.0, 2.0, 1.0), (2.0, 3.0, 1.0)]).unwrap();
        let opts = WeightedOptions { n_subsample: 100, ..WeightedOptions::new(1, 3) };
        let c = weighted_codebook(&[mu], &opts).unwrap();
        // Uniform sample of three points: the centroid sits near their mean.
        assert!((c.centroids()[0].birth() - 1.0).abs() < 0.3);
    }

    #[test]
    fn low_persistence_points_are_never_sampled() {
        let mut triples = vec![(0.5, 0.51, 1.0); 50];
        triples.extend(vec![(0.0, 2.0, 1.0); 50]);
        triples.push((0.0, 1.0, 1.0));
        let mu = PersistenceMeasure::from_triples(&triples).unwrap();
        let opts = WeightedOptions { n_subsample: 500, ..WeightedOptions::new(1, 9) };
        let c = weighted_codebook(&[mu], &opts).unwrap();
        assert!(c.centroids()[0].persistence() > 0.5);
    }
}
