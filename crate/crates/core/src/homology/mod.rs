//! Čech filtrations of small point clouds and their persistence in
//! dimensions 0 and 1.

mod filtration;
mod io;
mod reduction;

pub use filtration::{cech_filtration, edge_radius, triangle_radius, Filtration, Point3, Simplex};
pub use io::{parse_points, read_points_file, write_points, write_points_file};
pub use reduction::{pair_indices, persistence_diagrams, persistence_pairs, PairIndices, PersistenceResult};

/// Largest pairwise distance in a cloud (0 for fewer than two points).
pub fn diameter(points: &[Point3]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(2.0 * edge_radius(a, b));
        }
    }
    best
}
