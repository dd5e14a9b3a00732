use epdq::generators::stream_rng;
use epdq::measures::{empirical_epd, HalfPlanePoint, PersistenceMeasure};
use epdq::quantize::{
    distortion, lloyd_no_diagonal, online_quantize, persistence_quantile, top_persistence_init, weighted_codebook,
    Codebook, Exponent, OnlineOptions, WeightedOptions,
};

use super::{par_try_map, torus_h1_diagram, TorusDiagramParams};
use crate::error::{CliError, CliResult};
use crate::records::{Experiment, ExperimentRecord, ValueKind};

/// The codebook constructions being compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantizationMethod {
    /// Online quantization with the diagonal cell, `p = 2`.
    Ot2,
    /// Online quantization with the diagonal cell, `p = inf`.
    OtInf,
    /// The same updates without the diagonal cell, `p = 2`.
    W2,
    /// Persistence-weighted subsampling followed by k-means.
    Weighted,
}

impl QuantizationMethod {
    pub const ALL: [QuantizationMethod; 4] = [Self::Ot2, Self::OtInf, Self::W2, Self::Weighted];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Ot2 => "OT_2",
            Self::OtInf => "OT_inf",
            Self::W2 => "W_2",
            Self::Weighted => "weighted",
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuantizationConfig {
    pub k_list: Vec<usize>,
    /// Diagrams per repetition.
    pub n: usize,
    pub reps: usize,
    /// `None` uses `ceil(ln n)`.
    pub batch_size: Option<usize>,
    pub split_batches: bool,
    pub seed: u64,
    pub diagram: TorusDiagramParams,
    /// Subsample size of the weighted-codebook baseline.
    pub weighted_subsample: usize,
    /// Codebook size at which the cluster report is produced.
    pub report_k: usize,
}

impl Default for QuantizationConfig {
    fn default() -> Self {
        QuantizationConfig {
            k_list: (1..=5).collect(),
            n: 60,
            reps: 10,
            batch_size: None,
            split_batches: false,
            seed: 0,
            diagram: TorusDiagramParams::desk(250.0),
            weighted_subsample: 10_000,
            report_k: 2,
        }
    }
}

/// Where one method's codebook sits relative to the two most persistent
/// clusters of the empirical EPD.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodPlacement {
    pub method: &'static str,
    pub centroids: Vec<[f64; 2]>,
    /// Index of the nearest cluster mean, per centroid.
    pub nearest_cluster: Vec<usize>,
    /// Centroids whose persistence is below the clustering threshold.
    pub in_low_persistence_region: usize,
}

impl MethodPlacement {
    /// Every cluster has a centroid nearest to it.
    pub fn covers_both_clusters(&self) -> bool {
        self.nearest_cluster.contains(&0) && self.nearest_cluster.contains(&1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub rep: usize,
    /// Persistence threshold (median over atoms) above which points are
    /// clustered.
    pub threshold: f64,
    pub cluster_means: [[f64; 2]; 2],
    pub cluster_masses: [f64; 2],
    pub placements: Vec<MethodPlacement>,
}

impl ClusterReport {
    pub fn placement(&self, method: QuantizationMethod) -> Option<&MethodPlacement> {
        self.placements.iter().find(|p| p.method == method.name())
    }
}

#[derive(Debug, Clone)]
pub struct QuantizationOutput {
    pub records: Vec<ExperimentRecord>,
    pub reports: Vec<ClusterReport>,
}

impl QuantizationOutput {
    /// Mean over repetitions of one method's distortion at `k`.
    pub fn mean(&self, method: QuantizationMethod, k: usize, kind: ValueKind) -> Option<f64> {
        let v: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.method == method.name() && r.n_or_k == k as u64 && r.value_kind == kind)
            .map(|r| r.value)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Smallest distortion over repetitions.
    pub fn best(&self, method: QuantizationMethod, k: usize, kind: ValueKind) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| r.method == method.name() && r.n_or_k == k as u64 && r.value_kind == kind)
            .map(|r| r.value)
            .min_by(f64::total_cmp)
    }
}

const GROUP_BASE: u64 = 0x8000_0000;

/// Cluster means, cluster masses and the label of each point.
pub type TwoMeans = ([[f64; 2]; 2], [f64; 2], Vec<usize>);

/// Mass-weighted 2-means in the plane. Starts from the first point and the
/// point farthest from it; returns the two means, their masses and the
/// label of every point.
pub fn two_means(points: &[([f64; 2], f64)]) -> Option<TwoMeans> {
    if points.len() < 2 {
        return None;
    }
    let d2 = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    let first = points[0].0;
    let far = points.iter().map(|p| p.0).max_by(|a, b| d2(*a, first).total_cmp(&d2(*b, first)))?;
    if d2(far, first) == 0.0 {
        return None;
    }
    let mut means = [first, far];
    let mut labels = vec![usize::MAX; points.len()];
    for _ in 0..1000 {
        let new: Vec<usize> = points.iter().map(|p| usize::from(d2(p.0, means[1]) < d2(p.0, means[0]))).collect();
        if new == labels {
            break;
        }
        labels = new;
        let mut acc = [[0.0; 3]; 2];
        for (p, &l) in points.iter().zip(&labels) {
            acc[l][0] += p.1 * p.0[0];
            acc[l][1] += p.1 * p.0[1];
            acc[l][2] += p.1;
        }
        for (m, a) in means.iter_mut().zip(&acc) {
            if a[2] > 0.0 {
                *m = [a[0] / a[2], a[1] / a[2]];
            }
        }
    }
    let mut masses = [0.0; 2];
    for (p, &l) in points.iter().zip(&labels) {
        masses[l] += p.1;
    }
    Some((means, masses, labels))
}

fn cluster_report(rep: usize, epd: &PersistenceMeasure, codebooks: &[(QuantizationMethod, Codebook)]) -> Option<ClusterReport> {
    let mut pers: Vec<f64> = epd.atoms().iter().map(|a| a.point.persistence()).collect();
    let threshold = persistence_quantile(&mut pers, 0.5);
    let mut high: Vec<([f64; 2], f64)> = epd
        .atoms()
        .iter()
        .filter(|a| a.point.persistence() > threshold)
        .map(|a| (a.point.coords(), a.mass))
        .collect();
    // Start 2-means from the most persistent point.
    high.sort_by(|a, b| {
        let pa = a.0[1] - a.0[0];
        let pb = b.0[1] - b.0[0];
        pb.total_cmp(&pa)
    });
    let (means, masses, _) = two_means(&high)?;
    let d2 = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
    let placements = codebooks
        .iter()
        .map(|(m, c)| {
            let centroids: Vec<[f64; 2]> = c.centroids().iter().map(HalfPlanePoint::coords).collect();
            MethodPlacement {
                method: m.name(),
                nearest_cluster: centroids.iter().map(|&x| usize::from(d2(x, means[1]) < d2(x, means[0]))).collect(),
                in_low_persistence_region: c.centroids().iter().filter(|x| x.persistence() <= threshold).count(),
                centroids,
            }
        })
        .collect();
    Some(ClusterReport {
        rep,
        threshold,
        cluster_means: means,
        cluster_masses: masses,
        placements,
    })
}

struct RepResult {
    records: Vec<ExperimentRecord>,
    report: Option<ClusterReport>,
}

/// For each repetition: draw `n` torus diagrams, run every method for every
/// `k` from the shared initialization (the `k` most persistent points of the
/// first diagram), and record the empirical distortions for `p = 2` and
/// `p = inf` against the empirical EPD.
pub fn run_quantization(cfg: &QuantizationConfig) -> CliResult<QuantizationOutput> {
    if cfg.k_list.is_empty() || cfg.k_list.iter().any(|&k| k == 0 || k > 8) {
        return Err(CliError::usage("k values must lie in 1..=8"));
    }
    if cfg.n == 0 || cfg.reps == 0 || cfg.reps as u64 >= GROUP_BASE {
        return Err(CliError::usage("n and reps must be positive"));
    }
    let draws = par_try_map(cfg.reps * cfg.n, |j| -> CliResult<PersistenceMeasure> {
        let (rep, i) = (j / cfg.n, j % cfg.n);
        let mut rng = stream_rng(cfg.seed, ((GROUP_BASE | rep as u64) << 32) | i as u64);
        Ok(torus_h1_diagram(&cfg.diagram, &mut rng)?.1)
    })?;

    let results = par_try_map(cfg.reps, |rep| -> CliResult<RepResult> {
        let diagrams = &draws[rep * cfg.n..(rep + 1) * cfg.n];
        let epd = empirical_epd(diagrams)?.merged();
        let mut records = Vec::new();
        let mut report = None;
        for &k in &cfg.k_list {
            let init = top_persistence_init(&diagrams[0], k)?;
            let mut codebooks = Vec::new();
            for method in QuantizationMethod::ALL {
                let online = |p: Exponent| OnlineOptions {
                    k,
                    p,
                    batch_size: cfg.batch_size,
                    init: Some(init.clone()),
                    split_batches: cfg.split_batches,
                };
                let c = match method {
                    QuantizationMethod::Ot2 => online_quantize(diagrams, &online(Exponent::Finite(2.0)))?,
                    QuantizationMethod::OtInf => online_quantize(diagrams, &online(Exponent::Infinite))?,
                    QuantizationMethod::W2 => lloyd_no_diagonal(diagrams, &online(Exponent::Finite(2.0)))?,
                    QuantizationMethod::Weighted => {
                        let mut o = WeightedOptions::new(k, cfg.seed ^ ((rep as u64) << 16 | k as u64));
                        o.n_subsample = cfg.weighted_subsample;
                        o.init = Some(init.clone());
                        weighted_codebook(diagrams, &o)?
                    }
                };
                for (kind, p) in [
                    (ValueKind::DistortionP, Exponent::Finite(2.0)),
                    (ValueKind::DistortionInf, Exponent::Infinite),
                ] {
                    records.push(ExperimentRecord {
                        experiment: Experiment::Quantization,
                        method: method.name().to_string(),
                        n_or_k: k as u64,
                        rep: rep as u64,
                        seed: cfg.seed,
                        value: distortion(&c, &epd, p),
                        value_kind: kind,
                    });
                }
                codebooks.push((method, c));
            }
            if k == cfg.report_k {
                report = cluster_report(rep, &epd, &codebooks);
            }
        }
        Ok(RepResult { records, report })
    })?;

    let mut out = QuantizationOutput {
        records: Vec::new(),
        reports: Vec::new(),
    };
    for r in results {
        out.records.extend(r.records);
        out.reports.extend(r.report);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_means_separates_blobs() {
        let pts: Vec<([f64; 2], f64)> = vec![
            ([0.0, 1.0], 1.0),
            ([0.1, 1.0], 1.0),
            ([5.0, 9.0], 1.0),
            ([5.2, 9.0], 3.0),
        ];
        let (means, masses, labels) = two_means(&pts).unwrap();
        assert_eq!(labels, vec![0, 0, 1, 1]);
        assert!((means[0][0] - 0.05).abs() < 1e-12);
        assert!((means[1][0] - 5.15).abs() < 1e-12);
        assert_eq!(masses, [2.0, 4.0]);
    }

    #[test]
    fn two_means_needs_two_distinct_points() {
        assert!(two_means(&[([0.0, 1.0], 1.0)]).is_none());
        assert!(two_means(&[([0.0, 1.0], 1.0), ([0.0, 1.0], 2.0)]).is_none());
    }
}
