//! Random models: a triangle-complex model whose expected diagram has a
//! closed form, and point clouds sampled on a torus.

mod rng;
mod torus;
mod triangles;

pub use rng::{stream_rng, Rng};
pub use torus::{sample_torus_cloud, TorusParams};
pub use triangles::{
    beta13_cdf, closed_form_epd_histogram, closed_form_epd_histogram_for, closed_form_epd_rect,
    closed_form_epd_rect_for, sample_beta13, sample_triangle_diagram,
    NLaw, TriangleModelParams,
};
