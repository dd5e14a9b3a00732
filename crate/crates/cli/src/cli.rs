//! Argument definitions and subcommand dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use epdq::generators::{sample_triangle_diagram, stream_rng, NLaw, TorusParams, TriangleModelParams};
use epdq::homology::{cech_filtration, diameter, persistence_pairs, read_points_file, write_points_file};
use epdq::measures::{empirical_epd, read_dgm_dir, read_dgm_file, write_dgm, write_dgm_file, PersistenceMeasure};
use epdq::quantize::{
    distortion, lloyd_no_diagonal, online_quantize, quantized_measure, top_persistence_init, weighted_codebook,
    Codebook, Exponent, OnlineOptions, WeightedOptions,
};
use epdq::transport::{bottleneck_distance, ot_distance};
use rayon::prelude::*;

use crate::error::{CliError, CliResult};
use crate::experiments::{
    run_convergence_torus, run_convergence_triangles, run_quantization, torus_h1_diagram, ConvergenceOutput,
    QuantizationConfig, QuantizationMethod, TorusConfig, TorusDiagramParams, TrianglesConfig,
};
use crate::plot::{plot, PlotKind};
use crate::records::{records_to_string, ExperimentRecord};

#[derive(Debug, Parser)]
#[command(name = "epdq", version, about = "Expected persistence diagrams: transport, estimation and quantization")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base seed of every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file or directory; standard output when omitted where that
    /// makes sense.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Transport exponent: a number >= 1 or `inf`.
    #[arg(long, global = true, default_value = "2", value_parser = parse_exponent)]
    pub p: Exponent,
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse().map_err(|e: epdq::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample diagrams (and point clouds) into a directory.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Average a directory of diagrams into an empirical EPD.
    Epd {
        /// Directory of `.dgm` files.
        input: PathBuf,
    },
    /// OT_p distance between two `.dgm` files (`--p inf` for bottleneck).
    Dist { a: PathBuf, b: PathBuf },
    /// Quantize a diagram sample (directory) or a single measure (file).
    Quantize(QuantizeArgs),
    /// Čech persistence diagram of a point cloud.
    Homology(HomologyArgs),
    /// Run an experiment and write its CSV.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Render an experiment CSV as SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum, default_value = "loglog")]
        kind: PlotKind,
    },
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Triangle-model diagrams.
    Triangles {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        n_min: u32,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
    },
    /// Torus point clouds and their H1 Čech diagrams.
    Torus {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[command(flatten)]
        torus: TorusArgs,
    },
}

#[derive(Debug, Args, Clone, Copy)]
pub struct TorusArgs {
    /// Mean number of points per cloud.
    #[arg(long, default_value_t = 250.0)]
    pub cloud_size: f64,
    #[arg(long, default_value_t = 5.0)]
    pub r1: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r2: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Čech cutoff as a fraction of the cloud diameter.
    #[arg(long, default_value_t = 0.4)]
    pub radius_fraction: f64,
}

impl TorusArgs {
    fn params(&self) -> TorusDiagramParams {
        TorusDiagramParams {
            torus: TorusParams {
                mean_points: self.cloud_size,
                r1: self.r1,
                r2: self.r2,
                epsilon: self.epsilon,
            },
            radius_fraction: self.radius_fraction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantizeMethod {
    /// Online quantization with the diagonal cell.
    Ot,
    /// Online updates without the diagonal cell.
    W2,
    /// Persistence-weighted subsampling and k-means.
    Weighted,
}

#[derive(Debug, Args)]
pub struct QuantizeArgs {
    /// A directory of `.dgm` files or a single `.dgm` file.
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "ot")]
    pub method: QuantizeMethod,
    /// Diagrams per batch (default `ceil(ln n)`).
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// Feed the two halves of each batch separately.
    #[arg(long)]
    pub split: bool,
    /// Updates performed when the input is a single measure.
    #[arg(long, default_value_t = 50)]
    pub iterations: usize,
}

#[derive(Debug, Args)]
pub struct HomologyArgs {
    pub points: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Filtration cutoff; overrides `--radius-fraction`.
    #[arg(long)]
    pub max_radius: Option<f64>,
    #[arg(long, default_value_t = 0.4)]
    pub radius_fraction: f64,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCommand {
    /// OT distance of the binned empirical EPD to the closed form.
    ConvergenceTriangles {
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 21, 46, 100, 215, 464, 1000])]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        n_min: u32,
        #[arg(long, default_value_t = 20)]
        n_max: u32,
        /// Skip the unbinned estimate.
        #[arg(long)]
        no_raw: bool,
    },
    /// OT distance of torus EPD estimates to a larger reference sample.
    ConvergenceTorus {
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 22, 46, 100])]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        n_max: usize,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[command(flatten)]
        torus: TorusArgs,
    },
    /// Distortion of the codebook methods on torus diagrams.
    Quantization {
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 5])]
        k_list: Vec<usize>,
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        split: bool,
        #[arg(long, default_value_t = 10_000)]
        subsample: usize,
        #[command(flatten)]
        torus: TorusArgs,
    },
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.common.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be positive"));
        }
        // A pool can only be installed once per process; later calls keep it.
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("global thread pool already initialized");
        }
    }
    let c = &cli.common;
    match &cli.command {
        Command::Gen(g) => gen(c, g),
        Command::Epd { input } => {
            let diagrams = read_dgm_dir(input)?;
            let epd = empirical_epd(&diagrams)?.merged();
            emit(c.out.as_deref(), &write_dgm(&epd))
        }
        Command::Dist { a, b } => {
            let a = read_dgm_file(a)?.measure;
            let b = read_dgm_file(b)?.measure;
            let v = match c.p {
                Exponent::Infinite => bottleneck_distance(&a, &b)?.0,
                Exponent::Finite(p) => ot_distance(&a, &b, p)?.0,
            };
            emit(c.out.as_deref(), &format!("{v:.16e}\n"))
        }
        Command::Quantize(q) => quantize(c, q),
        Command::Homology(h) => {
            let points = read_points_file(&h.points)?;
            if points.is_empty() {
                return Err(epdq::Error::EmptyInput("point cloud").into());
            }
            let r = h.max_radius.unwrap_or(h.radius_fraction * diameter(&points));
            let dgm = if r > 0.0 {
                let f = cech_filtration(&points, r)?;
                let res = persistence_pairs(&f, h.dim)?;
                log::info!("{} infinite classes dropped", res.dropped_infinite);
                res.diagram
            } else {
                PersistenceMeasure::empty()
            };
            emit(c.out.as_deref(), &write_dgm(&dgm))
        }
        Command::Experiment(e) => experiment(c, e),
        Command::Plot { csv, kind } => {
            let out = c.out.as_deref().ok_or_else(|| CliError::usage("plot needs --out"))?;
            plot(csv, *kind, out)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn out_dir(c: &Common) -> CliResult<&Path> {
    let dir = c.out.as_deref().ok_or_else(|| CliError::usage("gen needs --out <directory>"))?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    Ok(dir)
}

fn gen(c: &Common, g: &GenCommand) -> CliResult<()> {
    match g {
        GenCommand::Triangles { count, n_min, n_max } => {
            let params = TriangleModelParams {
                n_law: NLaw::new(*n_min, *n_max).map_err(|e| CliError::usage(e.to_string()))?,
            };
            let dir = out_dir(c)?;
            for i in 0..*count {
                let mut rng = stream_rng(c.seed, i as u64);
                let d = sample_triangle_diagram(&params, &mut rng);
                write_dgm_file(dir.join(format!("triangles_{i:05}.dgm")), &d)?;
            }
            Ok(())
        }
        GenCommand::Torus { count, torus } => {
            let params = torus.params();
            params.torus.validate().map_err(|e| CliError::usage(e.to_string()))?;
            let dir = out_dir(c)?;
            (0..*count).into_par_iter().try_for_each(|i| -> CliResult<()> {
                let mut rng = stream_rng(c.seed, i as u64);
                let (points, d) = torus_h1_diagram(&params, &mut rng)?;
                write_points_file(dir.join(format!("torus_{i:05}.xyz")), &points)?;
                write_dgm_file(dir.join(format!("torus_{i:05}.dgm")), &d)?;
                Ok(())
            })
        }
    }
}

fn quantize(c: &Common, q: &QuantizeArgs) -> CliResult<()> {
    let (diagrams, batch) = if q.input.is_dir() {
        (read_dgm_dir(&q.input)?, q.batch_size)
    } else {
        // A single measure: every batch is that measure.
        let mu = read_dgm_file(&q.input)?.measure;
        (vec![mu; q.iterations.max(1)], Some(q.batch_size.unwrap_or(1)))
    };
    if diagrams.is_empty() {
        return Err(epdq::Error::NoDiagrams.into());
    }
    let init = top_persistence_init(&diagrams[0], q.k)?;
    let opts = OnlineOptions {
        k: q.k,
        p: c.p,
        batch_size: batch,
        init: Some(init.clone()),
        split_batches: q.split,
    };
    let codebook: Codebook = match q.method {
        QuantizeMethod::Ot => online_quantize(&diagrams, &opts)?,
        QuantizeMethod::W2 => lloyd_no_diagonal(&diagrams, &opts)?,
        QuantizeMethod::Weighted => {
            let mut w = WeightedOptions::new(q.k, c.seed);
            w.init = Some(init);
            weighted_codebook(&diagrams, &w)?
        }
    };
    let epd = empirical_epd(&diagrams)?;
    log::info!("distortion (p = {}): {:e}", c.p, distortion(&codebook, &epd, c.p));
    emit(c.out.as_deref(), &write_dgm(&quantized_measure(&codebook, &epd)))
}

fn write_records(c: &Common, records: &[ExperimentRecord]) -> CliResult<()> {
    let text = records_to_string(records).map_err(|message| CliError::Csv {
        path: c.out.clone().unwrap_or_else(|| "<stdout>".into()),
        message,
    })?;
    emit(c.out.as_deref(), &text)
}

/// Summary lines go to stdout when the CSV goes to a file, else to stderr.
fn summary(c: &Common, line: &str) {
    if c.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn report_fits(c: &Common, out: &ConvergenceOutput) {
    for (method, fit) in &out.regressions {
        match fit {
            Some(s) => summary(c, &format!("{method}: slope {:.4}, intercept {:.4}, r2 {:.4}, {} points", s.slope, s.intercept, s.r2, s.n_points)),
            None => summary(c, &format!("{method}: not enough points for a fit")),
        }
    }
}

fn finite_p(c: &Common) -> CliResult<f64> {
    match c.p {
        Exponent::Finite(p) => Ok(p),
        Exponent::Infinite => Err(CliError::usage("convergence experiments need a finite --p")),
    }
}

fn experiment(c: &Common, e: &ExperimentCommand) -> CliResult<()> {
    match e {
        ExperimentCommand::ConvergenceTriangles {
            n_list,
            reps,
            bins,
            n_min,
            n_max,
            no_raw,
        } => {
            let cfg = TrianglesConfig {
                n_list: n_list.clone(),
                reps: *reps,
                bins: *bins,
                p: finite_p(c)?,
                seed: c.seed,
                n_law: NLaw::new(*n_min, *n_max).map_err(|e| CliError::usage(e.to_string()))?,
                with_raw: !*no_raw,
            };
            let out = run_convergence_triangles(&cfg)?;
            write_records(c, &out.records)?;
            report_fits(c, &out);
            Ok(())
        }
        ExperimentCommand::ConvergenceTorus {
            n_list,
            n_max,
            reps,
            torus,
        } => {
            let cfg = TorusConfig {
                n_list: n_list.clone(),
                n_max: *n_max,
                reps: *reps,
                p: finite_p(c)?,
                seed: c.seed,
                diagram: torus.params(),
            };
            let out = run_convergence_torus(&cfg)?;
            write_records(c, &out.records)?;
            report_fits(c, &out);
            Ok(())
        }
        ExperimentCommand::Quantization {
            k_list,
            n,
            reps,
            batch_size,
            split,
            subsample,
            torus,
        } => {
            let cfg = QuantizationConfig {
                k_list: k_list.clone(),
                n: *n,
                reps: *reps,
                batch_size: *batch_size,
                split_batches: *split,
                seed: c.seed,
                diagram: torus.params(),
                weighted_subsample: *subsample,
                ..QuantizationConfig::default()
            };
            let out = run_quantization(&cfg)?;
            write_records(c, &out.records)?;
            for r in &out.reports {
                let covered: Vec<String> = QuantizationMethod::ALL
                    .iter()
                    .filter_map(|m| r.placement(*m))
                    .map(|p| format!("{} {}/{}", p.method, if p.covers_both_clusters() { "both" } else { "one" }, p.in_low_persistence_region))
                    .collect();
                summary(c, &format!("rep {}: clusters covered / centroids near diagonal: {}", r.rep, covered.join(", ")));
            }
            Ok(())
        }
    }
}
