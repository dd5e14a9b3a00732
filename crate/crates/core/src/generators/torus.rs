use std::f64::consts::TAU;

use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::homology::Point3;

/// Random torus: `Poisson(mean_points)` points on a torus whose radii are
/// drawn uniformly from `[r1 - epsilon, r1 + epsilon]` and
/// `[r2 - epsilon, r2 + epsilon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusParams {
    pub mean_points: f64,
    pub r1: f64,
    pub r2: f64,
    pub epsilon: f64,
}

impl TorusParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mean_points.is_finite()
            && self.mean_points >= 0.0
            && self.epsilon >= 0.0
            && self.r2 - self.epsilon > 0.0
            && self.r1 - self.epsilon > self.r2 + self.epsilon;
        if ok {
            Ok(())
        } else {
            Err(Error::param(format!("invalid torus parameters {self:?}")))
        }
    }
}

impl Default for TorusParams {
    fn default() -> Self {
        TorusParams {
            mean_points: 2000.0,
            r1: 5.0,
            r2: 2.0,
            epsilon: 0.1,
        }
    }
}

/// Samples the cloud uniformly with respect to surface area. Returns the
/// points with the radii used.
pub fn sample_torus_cloud(params: &TorusParams, rng: &mut impl rand::Rng) -> Result<(Vec<Point3>, f64, f64)> {
    params.validate()?;
    let m = if params.mean_points > 0.0 {
        Poisson::new(params.mean_points)
            .map_err(|e| Error::param(e.to_string()))?
            .sample(rng) as usize
    } else {
        0
    };
    let e = params.epsilon;
    let big = if e > 0.0 { rng.random_range(params.r1 - e..=params.r1 + e) } else { params.r1 };
    let small = if e > 0.0 { rng.random_range(params.r2 - e..=params.r2 + e) } else { params.r2 };
    let mut points = Vec::with_capacity(m);
    for _ in 0..m {
        let phi = rng.random::<f64>() * TAU;
        // Area element is proportional to big + small cos(theta).
        let theta = loop {
            let theta = rng.random::<f64>() * TAU;
            let accept = rng.random::<f64>() * (big + small);
            if accept < big + small * theta.cos() {
                break theta;
            }
        };
        let ring = big + small * theta.cos();
        points.push([ring * phi.cos(), ring * phi.sin(), small * theta.sin()]);
    }
    Ok((points, big, small))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::stream_rng;

    #[test]
    fn points_lie_on_the_surface() {
        let params = TorusParams { mean_points: 500.0, ..Default::default() };
        let (pts, big, small) = sample_torus_cloud(&params, &mut stream_rng(3, 0)).unwrap();
        assert!(!pts.is_empty());
        assert!((4.9..=5.1).contains(&big) && (1.9..=2.1).contains(&small));
        for [x, y, z] in pts {
            let q = ((x * x + y * y).sqrt() - big).powi(2) + z * z;
            assert!((q - small * small).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_mean_gives_empty_cloud() {
        let params = TorusParams { mean_points: 0.0, ..Default::default() };
        assert!(sample_torus_cloud(&params, &mut stream_rng(3, 0)).unwrap().0.is_empty());
    }

    #[test]
    fn rejects_self_intersecting_torus() {
        let params = TorusParams { r1: 2.0, r2: 2.0, ..Default::default() };
        assert!(sample_torus_cloud(&params, &mut stream_rng(3, 0)).is_err());
    }
}
