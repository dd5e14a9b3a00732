use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A point of `R^2` or `R^3`; planar clouds use `z = 0`.
pub type Point3 = [f64; 3];

/// A vertex, edge or triangle with its Čech filtration value (the radius of
/// the smallest ball enclosing its vertices).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Simplex {
    vertices: [u32; 3],
    dim: u8,
    pub value: f64,
}

impl Simplex {
    pub fn vertex(v: u32) -> Self {
        Simplex {
            vertices: [v, 0, 0],
            dim: 0,
            value: 0.0,
        }
    }

    pub(crate) fn new(vertices: &[u32], value: f64) -> Self {
        let mut v = [0u32; 3];
        v[..vertices.len()].copy_from_slice(vertices);
        v[..vertices.len()].sort_unstable();
        Simplex {
            vertices: v,
            dim: (vertices.len() - 1) as u8,
            value,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Sorted vertex indices.
    pub fn vertices(&self) -> &[u32] {
        &self.vertices[..=self.dim as usize]
    }

    /// Filtration order: value, then dimension, then lexicographic vertices.
    pub fn filtration_cmp(&self, other: &Simplex) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.dim.cmp(&other.dim))
            .then_with(|| self.vertices().cmp(other.vertices()))
    }
}

/// All simplices of dimension <= 2 with value <= `max_radius`, in filtration
/// order.
#[derive(Debug, Clone)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    n_vertices: usize,
    max_radius: f64,
}

impl Filtration {
    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn max_radius(&self) -> f64 {
        self.max_radius
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Builds a filtration from explicit simplices, checking that it is a
    /// valid filtration order (faces present and not later than cofaces).
    pub fn from_simplices(mut simplices: Vec<Simplex>, max_radius: f64) -> Result<Self> {
        simplices.sort_by(Simplex::filtration_cmp);
        let n_vertices = simplices.iter().filter(|s| s.dim == 0).count();
        let f = Filtration {
            simplices,
            n_vertices,
            max_radius,
        };
        let index = f.index();
        for (pos, s) in f.simplices.iter().enumerate() {
            for face in boundary(s) {
                match index.get(&face) {
                    Some(&fpos) if fpos < pos => {}
                    _ => return Err(Error::param("simplex appears before one of its faces")),
                }
            }
        }
        Ok(f)
    }

    pub(crate) fn index(&self) -> std::collections::HashMap<Vec<u32>, usize> {
        self.simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.vertices().to_vec(), i))
            .collect()
    }
}

/// Codimension-one faces, as sorted vertex lists.
pub(crate) fn boundary(s: &Simplex) -> Vec<Vec<u32>> {
    let v = s.vertices();
    if v.len() == 1 {
        return Vec::new();
    }
    (0..v.len())
        .map(|skip| {
            v.iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect()
}

fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm_sq(a: &Point3) -> f64 {
    a[0] * a[0] + a[1] * a[1] + a[2] * a[2]
}

fn cross(a: &Point3, b: &Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Radius of the smallest ball enclosing an edge: half its length.
pub fn edge_radius(a: &Point3, b: &Point3) -> f64 {
    0.5 * norm_sq(&sub(a, b)).sqrt()
}

/// Radius of the smallest ball enclosing three points: the circumradius for
/// an acute triangle, half the longest edge otherwise.
pub fn triangle_radius(a: &Point3, b: &Point3, c: &Point3) -> f64 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let bc = sub(c, b);
    let (x, y, z) = (norm_sq(&ab), norm_sq(&ac), norm_sq(&bc));
    let longest = x.max(y).max(z);
    if 2.0 * longest >= x + y + z {
        // Right or obtuse (or degenerate).
        return 0.5 * longest.sqrt();
    }
    let area2 = norm_sq(&cross(&ab, &ac));
    // R = |ab| |ac| |bc| / (2 |ab x ac|); never below half the longest edge.
    ((x * y * z / area2).sqrt() * 0.5).max(0.5 * longest.sqrt())
}

/// The Čech filtration of `points` truncated at `max_radius`.
pub fn cech_filtration(points: &[Point3], max_radius: f64) -> Result<Filtration> {
    if points.is_empty() {
        return Err(Error::EmptyInput("point cloud"));
    }
    if !(max_radius > 0.0) || max_radius.is_nan() {
        return Err(Error::param("max_radius must be positive"));
    }
    if points.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::param("point coordinates must be finite"));
    }
    let n = points.len();
    let mut simplices: Vec<Simplex> = (0..n as u32).map(Simplex::vertex).collect();

    // Neighbor lists with j > i.
    let mut nbrs: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let r = edge_radius(&points[i], &points[j]);
            if r <= max_radius {
                simplices.push(Simplex::new(&[i as u32, j as u32], r));
                nbrs[i].push(j as u32);
            }
        }
    }
    for i in 0..n {
        for (a, &j) in nbrs[i].iter().enumerate() {
            for &k in &nbrs[i][a + 1..] {
                if nbrs[j as usize].binary_search(&k).is_err() {
                    continue;
                }
                let r = triangle_radius(&points[i], &points[j as usize], &points[k as usize]);
                if r <= max_radius {
                    simplices.push(Simplex::new(&[i as u32, j, k], r));
                }
            }
        }
    }
    simplices.sort_unstable_by(Simplex::filtration_cmp);
    Ok(Filtration {
        simplices,
        n_vertices: n,
        max_radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn edge_value_is_half_length() {
        let f = cech_filtration(&[[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]], 10.0).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.simplices()[2].dim(), 1);
        assert_eq!(f.simplices()[2].value, 1.0);
    }

    #[test]
    fn equilateral_triangle_uses_circumradius() {
        let s = 1.7;
        let pts = [[0.0, 0.0, 0.0], [s, 0.0, 0.0], [0.5 * s, 0.5 * 3f64.sqrt() * s, 0.0]];
        let r = triangle_radius(&pts[0], &pts[1], &pts[2]);
        assert_abs_diff_eq!(r, s / 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn right_triangle_uses_hypotenuse() {
        let r = triangle_radius(&[0.0, 0.0, 0.0], &[3.0, 0.0, 0.0], &[0.0, 4.0, 0.0]);
        assert_eq!(r, 2.5);
        let obtuse = triangle_radius(&[0.0, 0.0, 0.0], &[4.0, 0.0, 0.0], &[2.0, 0.5, 0.0]);
        assert_eq!(obtuse, 2.0);
    }

    #[test]
    fn circumradius_in_three_dimensions() {
        // Equilateral triangle tilted out of the xy-plane.
        let pts = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let side = 2f64.sqrt();
        assert_abs_diff_eq!(
            triangle_radius(&pts[0], &pts[1], &pts[2]),
            side / 3f64.sqrt(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn filtration_is_sorted_and_truncated() {
        let pts: Vec<Point3> = (0..6).map(|i| [i as f64, (i * i) as f64 * 0.1, 0.0]).collect();
        let f = cech_filtration(&pts, 1.2).unwrap();
        assert!(f.simplices().iter().all(|s| s.value <= 1.2));
        assert!(f
            .simplices()
            .windows(2)
            .all(|w| w[0].filtration_cmp(&w[1]) != Ordering::Greater));
        assert!(Filtration::from_simplices(f.simplices().to_vec(), 1.2).is_ok());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(cech_filtration(&[], 1.0), Err(Error::EmptyInput(_))));
        assert!(cech_filtration(&[[0.0; 3]], 0.0).is_err());
        assert!(cech_filtration(&[[f64::NAN, 0.0, 0.0]], 1.0).is_err());
    }
}
