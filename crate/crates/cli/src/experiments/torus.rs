use epdq::generators::{sample_torus_cloud, stream_rng, Rng, TorusParams};
use epdq::homology::{cech_filtration, diameter, persistence_pairs, Point3};
use epdq::measures::{empirical_epd, PersistenceMeasure};
use epdq::transport::ot_distance;

use super::{par_try_map, ConvergenceOutput};
use crate::error::{CliError, CliResult};
use crate::records::{Experiment, ExperimentRecord, ValueKind};

/// Random torus and the Čech cutoff used to turn it into an H1 diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusDiagramParams {
    pub torus: TorusParams,
    /// Filtration cutoff as a fraction of the cloud's diameter.
    pub radius_fraction: f64,
}

impl TorusDiagramParams {
    /// Torus radii 5 and 2 with jitter 0.1, `cloud_size` points on average.
    pub fn desk(cloud_size: f64) -> Self {
        TorusDiagramParams {
            torus: TorusParams {
                mean_points: cloud_size,
                ..TorusParams::default()
            },
            radius_fraction: 0.4,
        }
    }
}

/// Samples a cloud and returns it with its finite H1 Čech diagram.
pub fn torus_h1_diagram(params: &TorusDiagramParams, rng: &mut Rng) -> CliResult<(Vec<Point3>, PersistenceMeasure)> {
    let (points, _, _) = sample_torus_cloud(&params.torus, rng)?;
    let max_radius = params.radius_fraction * diameter(&points);
    if points.len() < 3 || !(max_radius > 0.0) {
        return Ok((points, PersistenceMeasure::empty()));
    }
    let f = cech_filtration(&points, max_radius)?;
    let h1 = persistence_pairs(&f, 1)?;
    if h1.dropped_infinite > 0 {
        log::debug!("{} infinite H1 classes dropped", h1.dropped_infinite);
    }
    Ok((points, h1.diagram))
}

/// Settings of the torus convergence run.
#[derive(Debug, Clone)]
pub struct TorusConfig {
    pub n_list: Vec<usize>,
    /// Size of the reference sample is `2 * n_max`.
    pub n_max: usize,
    pub reps: usize,
    pub p: f64,
    pub seed: u64,
    pub diagram: TorusDiagramParams,
}

impl Default for TorusConfig {
    fn default() -> Self {
        TorusConfig {
            n_list: vec![10, 22, 46, 100],
            n_max: 100,
            reps: 5,
            p: 2.0,
            seed: 0,
            diagram: TorusDiagramParams::desk(250.0),
        }
    }
}

pub const METHOD_RAW: &str = "raw";
const PROXY_GROUP: u64 = 0xFFFF_FFFF;

fn stream(group: u64, i: usize) -> u64 {
    (group << 32) | i as u64
}

/// Within a repetition the samples are nested: the estimate at `n` averages
/// the first `n` diagrams of that repetition. The reference is the empirical
/// EPD of `2 * n_max` diagrams drawn on a separate stream.
pub fn run_convergence_torus(cfg: &TorusConfig) -> CliResult<ConvergenceOutput> {
    if cfg.n_list.is_empty() || cfg.n_list.windows(2).any(|w| w[0] >= w[1]) || cfg.n_list[0] == 0 {
        return Err(CliError::usage("n list must be positive and strictly increasing"));
    }
    let largest = *cfg.n_list.last().expect("nonempty");
    if largest > cfg.n_max {
        return Err(CliError::usage(format!(
            "n = {largest} exceeds n_max = {}; the reference sample would overlap the estimate",
            cfg.n_max
        )));
    }
    if cfg.reps == 0 || cfg.reps as u64 >= PROXY_GROUP {
        return Err(CliError::usage("reps must be positive"));
    }
    let draw = |group: u64, i: usize| -> CliResult<PersistenceMeasure> {
        let mut rng = stream_rng(cfg.seed, stream(group, i));
        Ok(torus_h1_diagram(&cfg.diagram, &mut rng)?.1)
    };

    let proxy_diagrams = par_try_map(2 * cfg.n_max, |i| draw(PROXY_GROUP, i))?;
    let proxy = empirical_epd(&proxy_diagrams)?.merged();
    log::info!("reference EPD: {} atoms, mass {:.3}", proxy.len(), proxy.total_mass());

    let per_rep = par_try_map(cfg.reps * largest, |j| draw((j / largest) as u64, j % largest))?;
    let jobs: Vec<(usize, usize)> = (0..cfg.reps).flat_map(|r| (0..cfg.n_list.len()).map(move |i| (r, i))).collect();
    let values = par_try_map(jobs.len(), |j| -> CliResult<f64> {
        let (rep, n_idx) = jobs[j];
        let n = cfg.n_list[n_idx];
        let start = rep * largest;
        let epd = empirical_epd(&per_rep[start..start + n])?.merged();
        let v = ot_distance(&epd, &proxy, cfg.p)?.0.powf(cfg.p);
        log::debug!("torus rep {rep} n {n}: {v:e}");
        Ok(v)
    })?;

    let records = jobs
        .iter()
        .zip(values)
        .map(|(&(rep, n_idx), value)| ExperimentRecord {
            experiment: Experiment::ConvergenceTorus,
            method: METHOD_RAW.to_string(),
            n_or_k: cfg.n_list[n_idx] as u64,
            rep: rep as u64,
            seed: cfg.seed,
            value,
            value_kind: ValueKind::OtPowP,
        })
        .collect();
    Ok(ConvergenceOutput::new(records))
}
