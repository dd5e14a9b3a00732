//! Desk-scale reruns of the convergence and quantization experiments.
//!
//! Every random draw comes from a ChaCha stream derived from the base seed
//! and the draw's coordinates in the experiment, so results do not depend
//! on the number of worker threads.

mod quantization;
mod torus;
mod triangles;

pub use quantization::{
    run_quantization, two_means, ClusterReport, QuantizationConfig, QuantizationMethod, QuantizationOutput,
};
pub use torus::{run_convergence_torus, torus_h1_diagram, TorusConfig, TorusDiagramParams};
pub use triangles::{run_convergence_triangles, TrianglesConfig};

use rayon::prelude::*;

use crate::records::ExperimentRecord;
use crate::regression::RegressionSummary;

/// Records of a convergence experiment and the fit of its main method.
#[derive(Debug, Clone)]
pub struct ConvergenceOutput {
    pub records: Vec<ExperimentRecord>,
    /// Fit per method, in the order the methods first appear.
    pub regressions: Vec<(String, Option<RegressionSummary>)>,
}

impl ConvergenceOutput {
    pub(crate) fn new(records: Vec<ExperimentRecord>) -> Self {
        let mut methods: Vec<String> = Vec::new();
        for r in &records {
            if !methods.contains(&r.method) {
                methods.push(r.method.clone());
            }
        }
        let regressions = methods
            .into_iter()
            .map(|m| {
                let fit = crate::regression::loglog_regression(records.iter().filter(|r| r.method == m));
                (m, fit)
            })
            .collect();
        ConvergenceOutput { records, regressions }
    }

    pub fn regression(&self, method: &str) -> Option<RegressionSummary> {
        self.regressions.iter().find(|(m, _)| m == method).and_then(|(_, s)| *s)
    }
}

/// Order-preserving parallel map over `0..n`, stopping at the first error.
pub(crate) fn par_try_map<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}
