use super::{assign_with, clamp_above_diagonal, p_center, Cell, Codebook, Exponent};
use crate::error::{Error, Result};
use crate::measures::{empirical_epd, PersistenceMeasure};

/// Settings shared by [`online_quantize`] and [`lloyd_no_diagonal`].
#[derive(Debug, Clone)]
pub struct OnlineOptions {
    pub k: usize,
    pub p: Exponent,
    /// Diagrams per batch; `None` uses [`default_batch_size`].
    pub batch_size: Option<usize>,
    /// Starting codebook; `None` takes the `k` most persistent points of the
    /// first diagram.
    pub init: Option<Codebook>,
    /// Feed the two halves of each batch separately to the update.
    pub split_batches: bool,
}

impl OnlineOptions {
    pub fn new(k: usize, p: Exponent) -> Self {
        OnlineOptions {
            k,
            p,
            batch_size: None,
            init: None,
            split_batches: false,
        }
    }
}

/// `ceil(ln n)`, at least 2 and at most `n`.
pub fn default_batch_size(n: usize) -> usize {
    ((n as f64).ln().ceil() as usize).max(2).min(n.max(1))
}

/// The `k` atoms of largest persistence of `mu` (ties keep diagram order).
pub fn top_persistence_init(mu: &PersistenceMeasure, k: usize) -> Result<Codebook> {
    let atoms = mu.by_persistence_desc();
    if atoms.len() < k {
        return Err(Error::param(format!(
            "k = {k} exceeds the {} points available for initialization",
            atoms.len()
        )));
    }
    Ok(Codebook::new(atoms[..k].iter().map(|a| a.point).collect()))
}

fn update(t: usize, c: &Codebook, mu: &PersistenceMeasure, mu2: &PersistenceMeasure, p: Exponent, diagonal: bool) -> Codebook {
    let k = c.k();
    let mut cells: Vec<Vec<([f64; 2], f64)>> = vec![Vec::new(); k];
    for a in mu.atoms() {
        if let Cell::Centroid(j) = assign_with(c, &a.point, diagonal) {
            cells[j].push((a.point.coords(), a.mass));
        }
    }
    let mut mass2 = vec![0.0; k];
    for a in mu2.atoms() {
        if let Cell::Centroid(j) = assign_with(c, &a.point, diagonal) {
            mass2[j] += a.mass;
        }
    }
    let step = 1.0 / (t as f64 + 1.0);
    let centroids = c
        .centroids()
        .iter()
        .enumerate()
        .map(|(j, cj)| {
            let m1: f64 = cells[j].iter().map(|(_, m)| m).sum();
            if m1 <= 0.0 || mass2[j] <= 0.0 {
                return *cj;
            }
            let Ok(v) = p_center(&cells[j], p) else {
                return *cj;
            };
            let r = m1 / mass2[j] * step;
            clamp_above_diagonal(cj.birth() - r * (cj.birth() - v[0]), cj.death() - r * (cj.death() - v[1]))
        })
        .collect();
    Codebook::new(centroids)
}

/// One update `c_j <- c_j - (mu(V_j) / mu2(V_j)) (c_j - v_p(c, mu)_j) / (t + 1)`.
/// Centroids whose cell is empty under either measure stay put.
pub fn update_step(t: usize, c: &Codebook, mu: &PersistenceMeasure, mu2: &PersistenceMeasure, p: Exponent) -> Codebook {
    update(t, c, mu, mu2, p, true)
}

fn average(diagrams: &[PersistenceMeasure], normalizer: f64) -> Result<PersistenceMeasure> {
    let mean = empirical_epd(diagrams)?;
    mean.scaled(diagrams.len() as f64 / normalizer)
}

fn run(diagrams: &[PersistenceMeasure], opts: &OnlineOptions, diagonal: bool) -> Result<Codebook> {
    let n = diagrams.len();
    if n == 0 {
        return Err(Error::NoDiagrams);
    }
    let batch = opts.batch_size.unwrap_or_else(|| default_batch_size(n));
    if batch == 0 || batch > n {
        return Err(Error::param(format!("batch size {batch} must be in 1..={n}")));
    }
    if opts.split_batches && batch < 2 {
        return Err(Error::param("split batches need at least 2 diagrams per batch"));
    }
    let init = match &opts.init {
        Some(c) => c.clone(),
        None => top_persistence_init(&diagrams[0], opts.k)?,
    };
    if init.k() != opts.k {
        return Err(Error::param(format!("initial codebook has {} centroids, expected {}", init.k(), opts.k)));
    }
    if opts.k == 0 {
        return Ok(init);
    }
    let mut c = init;
    for t in 0..n / batch {
        let b = &diagrams[t * batch..(t + 1) * batch];
        c = if opts.split_batches {
            let (h1, h2) = b.split_at(batch / 2);
            let half = 0.5 * batch as f64;
            update(t, &c, &average(h1, half)?, &average(h2, half)?, opts.p, diagonal)
        } else {
            let mean = empirical_epd(b)?;
            update(t, &c, &mean, &mean, opts.p, diagonal)
        };
    }
    Ok(c)
}

/// Online quantization of the expected diagram of `diagrams`: consecutive
/// batches update the codebook with step `1 / (t + 1)`.
pub fn online_quantize(diagrams: &[PersistenceMeasure], opts: &OnlineOptions) -> Result<Codebook> {
    run(diagrams, opts, true)
}

/// The same algorithm without the diagonal cell: every point belongs to its
/// nearest centroid.
pub fn lloyd_no_diagonal(diagrams: &[PersistenceMeasure], opts: &OnlineOptions) -> Result<Codebook> {
    run(diagrams, opts, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn two_atoms() -> PersistenceMeasure {
        PersistenceMeasure::from_triples(&[(0.0, 2.0, 1.0), (0.0, 4.0, 1.0)]).unwrap()
    }

    #[test]
    fn first_step_moves_to_the_mean() {
        let c = Codebook::from_pairs(&[(0.0, 2.5)]).unwrap();
        let mu = two_atoms();
        let p2 = Exponent::Finite(2.0);
        let c1 = update_step(0, &c, &mu, &mu, p2);
        assert_eq!(c1.centroids()[0].coords(), [0.0, 3.0]);
        let c9 = update_step(9, &c, &mu, &mu, p2);
        assert_abs_diff_eq!(c9.centroids()[0].death(), 2.55, epsilon = 1e-15);
        assert_eq!(update_step(0, &c1, &mu, &mu, p2), c1);
    }

    #[test]
    fn identical_diagrams_are_a_fixed_point() {
        let mu = two_atoms();
        let diagrams = vec![mu.clone(); 7];
        let mut opts = OnlineOptions::new(2, Exponent::Finite(2.0));
        let init = top_persistence_init(&mu, 2).unwrap();
        for split in [false, true] {
            opts.split_batches = split;
            assert_eq!(online_quantize(&diagrams, &opts).unwrap(), init);
            assert_eq!(lloyd_no_diagonal(&diagrams, &opts).unwrap(), init);
        }
    }

    #[test]
    fn single_batch_is_one_update() {
        let d1 = PersistenceMeasure::from_triples(&[(0.0, 2.0, 1.0), (0.1, 0.2, 1.0)]).unwrap();
        let d2 = PersistenceMeasure::from_triples(&[(0.0, 4.0, 1.0), (0.0, 1.0, 1.0)]).unwrap();
        let diagrams = vec![d1, d2];
        let init = Codebook::from_pairs(&[(0.0, 2.5)]).unwrap();
        let opts = OnlineOptions {
            batch_size: Some(2),
            init: Some(init.clone()),
            ..OnlineOptions::new(1, Exponent::Finite(2.0))
        };
        let mean = empirical_epd(&diagrams).unwrap();
        let want = update_step(0, &init, &mean, &mean, Exponent::Finite(2.0));
        assert_eq!(online_quantize(&diagrams, &opts).unwrap(), want);
    }

    #[test]
    fn rejects_bad_settings() {
        let diagrams = vec![two_atoms()];
        assert!(online_quantize(&[], &OnlineOptions::new(1, Exponent::Infinite)).is_err());
        assert!(online_quantize(&diagrams, &OnlineOptions::new(3, Exponent::Infinite)).is_err());
        let opts = OnlineOptions {
            batch_size: Some(2),
            ..OnlineOptions::new(1, Exponent::Infinite)
        };
        assert!(online_quantize(&diagrams, &opts).is_err());
    }

    #[test]
    fn batch_size_defaults() {
        assert_eq!(default_batch_size(1), 1);
        assert_eq!(default_batch_size(5), 2);
        assert_eq!(default_batch_size(60), 5);
        assert_eq!(default_batch_size(1000), 7);
    }
}
