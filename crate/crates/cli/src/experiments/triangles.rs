use epdq::generators::{closed_form_epd_histogram, sample_triangle_diagram, stream_rng, NLaw, TriangleModelParams};
use epdq::measures::{empirical_epd, to_histogram, GridSpec, PersistenceMeasure};
use epdq::transport::{histogram_ot, ot_distance};

use super::{par_try_map, ConvergenceOutput};
use crate::error::{CliError, CliResult};
use crate::records::{Experiment, ExperimentRecord, ValueKind};

/// Settings of the triangle-model convergence run.
#[derive(Debug, Clone)]
pub struct TrianglesConfig {
    pub n_list: Vec<usize>,
    pub reps: usize,
    /// Bins per axis of the grid on `[0, 1] x [0, 2]`.
    pub bins: usize,
    pub p: f64,
    pub seed: u64,
    pub n_law: NLaw,
    /// Also measure the distance from the raw empirical EPD (no binning of
    /// the sample) to the binned closed form.
    pub with_raw: bool,
}

impl Default for TrianglesConfig {
    fn default() -> Self {
        TrianglesConfig {
            n_list: vec![10, 21, 46, 100, 215, 464, 1000],
            reps: 20,
            bins: 50,
            p: 2.0,
            seed: 0,
            // E[N] = 10 matches the constant of the closed-form density.
            n_law: NLaw { min: 0, max: 20 },
            with_raw: true,
        }
    }
}

pub const METHOD_HISTOGRAM: &str = "histogram";
pub const METHOD_RAW: &str = "raw";

/// For each `(n, rep)`: average `n` triangle-model diagrams, bin the result
/// and record `OT_p^p` to the binned closed-form EPD.
pub fn run_convergence_triangles(cfg: &TrianglesConfig) -> CliResult<ConvergenceOutput> {
    if cfg.n_list.is_empty() || cfg.n_list.windows(2).any(|w| w[0] >= w[1]) || cfg.n_list[0] == 0 {
        return Err(CliError::usage("n list must be positive and strictly increasing"));
    }
    if cfg.reps == 0 || cfg.bins == 0 {
        return Err(CliError::usage("reps and bins must be positive"));
    }
    if cfg.n_list.len() > 1 << 16 {
        return Err(CliError::usage("at most 65536 sample sizes"));
    }
    let n_mean = cfg.n_law.mean();
    if (n_mean - 10.0).abs() > 1e-12 {
        log::warn!("N law {:?} has mean {n_mean}; the closed form assumes mean 10", cfg.n_law);
    }
    let spec = GridSpec::unit_triangle_window(cfg.bins);
    let truth = closed_form_epd_histogram(&spec);
    let truth_atoms = truth.atomize();
    let params = TriangleModelParams { n_law: cfg.n_law };
    let jobs: Vec<(usize, usize)> = (0..cfg.reps).flat_map(|rep| (0..cfg.n_list.len()).map(move |i| (rep, i))).collect();

    let values = par_try_map(jobs.len(), |j| -> CliResult<(f64, Option<f64>)> {
        let (rep, n_idx) = jobs[j];
        let n = cfg.n_list[n_idx];
        let mut rng = stream_rng(cfg.seed, ((rep as u64) << 16) | n_idx as u64);
        let diagrams: Vec<PersistenceMeasure> = (0..n).map(|_| sample_triangle_diagram(&params, &mut rng)).collect();
        let epd = empirical_epd(&diagrams)?;
        let (hist, _) = to_histogram(&epd, &spec, false)?;
        let binned = histogram_ot(&hist, &truth, cfg.p)?.powf(cfg.p);
        let raw = if cfg.with_raw {
            Some(ot_distance(&epd.merged(), &truth_atoms, cfg.p)?.0.powf(cfg.p))
        } else {
            None
        };
        log::debug!("triangles rep {rep} n {n}: {binned:e}");
        Ok((binned, raw))
    })?;

    let mut records = Vec::new();
    for (&(rep, n_idx), &(binned, raw)) in jobs.iter().zip(&values) {
        let mut push = |method: &str, value: f64| {
            records.push(ExperimentRecord {
                experiment: Experiment::ConvergenceTriangles,
                method: method.to_string(),
                n_or_k: cfg.n_list[n_idx] as u64,
                rep: rep as u64,
                seed: cfg.seed,
                value,
                value_kind: ValueKind::OtPowP,
            })
        };
        push(METHOD_HISTOGRAM, binned);
        if let Some(v) = raw {
            push(METHOD_RAW, v);
        }
    }
    Ok(ConvergenceOutput::new(records))
}
