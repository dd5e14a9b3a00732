//! Persistence pairs in dimensions 0 and 1 by matrix reduction over Z/2.
//!
//! The coboundary matrix is reduced column by column in reverse filtration
//! order (persistent cohomology), with clearing: an edge already paired as
//! the death of a 0-dimensional class is never reduced as a 1-cochain. The
//! resulting pairs are the same as those of the boundary-matrix reduction.

use std::collections::HashMap;

use super::filtration::Filtration;
use crate::error::{Error, Result};
use crate::measures::{HalfPlanePoint, PersistenceMeasure};

const NONE: u32 = u32::MAX;

/// A diagram computed from a filtration, with bookkeeping of what was
/// discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceResult {
    /// Finite pairs with positive persistence, unit mass each.
    pub diagram: PersistenceMeasure,
    /// Classes still alive at `max_radius`.
    pub dropped_infinite: usize,
    /// Pairs with `birth == death`.
    pub dropped_zero: usize,
}

impl PersistenceResult {
    /// Number of finite pairs, including the zero-persistence ones.
    pub fn finite_pairs(&self) -> usize {
        self.diagram.len() + self.dropped_zero
    }
}

/// Raw pairs as filtration positions `(birth, Some(death))`, or
/// `(birth, None)` for classes that never die.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairIndices {
    pub dim0: Vec<(usize, Option<usize>)>,
    pub dim1: Vec<(usize, Option<usize>)>,
}

/// Compressed sparse lists: `items[offsets[i]..offsets[i+1]]`.
struct Csr {
    offsets: Vec<u32>,
    items: Vec<u32>,
}

impl Csr {
    fn row(&self, i: usize) -> &[u32] {
        &self.items[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    /// Builds lists from `(row, item)` pairs given in increasing item order,
    /// so every list comes out sorted.
    fn build(n_rows: usize, pairs: impl Iterator<Item = (usize, u32)> + Clone) -> Self {
        let mut counts = vec![0u32; n_rows + 1];
        for (r, _) in pairs.clone() {
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut items = vec![0u32; counts[n_rows] as usize];
        for (r, it) in pairs {
            items[fill[r] as usize] = it;
            fill[r] += 1;
        }
        Csr {
            offsets: counts,
            items,
        }
    }
}

enum EdgeIndex {
    Dense { n: usize, pos: Vec<u32> },
    Sparse(HashMap<(u32, u32), u32>),
}

impl EdgeIndex {
    fn new(n: usize) -> Self {
        if n <= 4096 {
            EdgeIndex::Dense {
                n,
                pos: vec![NONE; n * n],
            }
        } else {
            EdgeIndex::Sparse(HashMap::new())
        }
    }

    fn insert(&mut self, a: u32, b: u32, p: u32) {
        match self {
            EdgeIndex::Dense { n, pos } => pos[a as usize * *n + b as usize] = p,
            EdgeIndex::Sparse(m) => {
                m.insert((a, b), p);
            }
        }
    }

    fn get(&self, a: u32, b: u32) -> u32 {
        match self {
            EdgeIndex::Dense { n, pos } => pos[a as usize * *n + b as usize],
            EdgeIndex::Sparse(m) => m.get(&(a, b)).copied().unwrap_or(NONE),
        }
    }
}

/// Symmetric difference of two sorted lists.
fn add_columns(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
}

/// Reduces the coboundary columns of `cells` (filtration positions, in
/// decreasing order), skipping cleared ones. The pivot of a column is its
/// earliest coface. Returns `(cell, Some(pivot))` pairs and essential cells,
/// and marks pivots in `paired`. Only columns that needed additions are
/// stored; the others are read back from the coboundary lists.
fn reduce_cochains<'a>(
    cells: &[u32],
    coboundary: impl Fn(u32) -> &'a [u32],
    cleared: &[bool],
    paired: &mut [bool],
) -> Vec<(usize, Option<usize>)> {
    let mut owner = vec![NONE; paired.len()];
    let mut reduced: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut out = Vec::new();
    let mut col = Vec::new();
    let mut scratch = Vec::new();
    for &cell in cells.iter().rev() {
        if cleared[cell as usize] {
            continue;
        }
        let original = coboundary(cell);
        let mut modified = false;
        loop {
            let current: &[u32] = if modified { &col } else { original };
            let Some(&pivot) = current.first() else {
                out.push((cell as usize, None));
                break;
            };
            let other = owner[pivot as usize];
            if other == NONE {
                owner[pivot as usize] = cell;
                paired[pivot as usize] = true;
                out.push((cell as usize, Some(pivot as usize)));
                if modified {
                    reduced.insert(cell, std::mem::take(&mut col));
                }
                break;
            }
            let other_col = reduced.get(&other).map_or_else(|| coboundary(other), Vec::as_slice);
            add_columns(current, other_col, &mut scratch);
            std::mem::swap(&mut col, &mut scratch);
            modified = true;
        }
    }
    out
}

/// Persistence pairs in dimensions 0 and 1, as filtration positions.
pub fn pair_indices(f: &Filtration) -> PairIndices {
    let simplices = f.simplices();
    let n_total = simplices.len();
    let n_vertices = simplices
        .iter()
        .filter(|s| s.dim() == 0)
        .map(|s| s.vertices()[0] as usize + 1)
        .max()
        .unwrap_or(0);

    let mut vertex_pos = vec![NONE; n_vertices];
    let mut edges: Vec<u32> = Vec::new();
    let mut vertices: Vec<u32> = Vec::new();
    let mut edge_index = EdgeIndex::new(n_vertices);
    let mut n_triangles = 0usize;
    for (pos, s) in simplices.iter().enumerate() {
        let v = s.vertices();
        match s.dim() {
            0 => {
                vertex_pos[v[0] as usize] = pos as u32;
                vertices.push(pos as u32);
            }
            1 => {
                edge_index.insert(v[0], v[1], pos as u32);
                edges.push(pos as u32);
            }
            _ => n_triangles += 1,
        }
    }

    // Coboundaries: vertex -> incident edges, edge -> cofacet triangles,
    // both listed in filtration order.
    let vertex_cob = Csr::build(
        n_total,
        simplices.iter().enumerate().filter(|(_, s)| s.dim() == 1).flat_map(|(pos, s)| {
            let v = s.vertices();
            [(v[0] as usize, pos as u32), (v[1] as usize, pos as u32)]
        }),
    );
    let mut tri_pairs: Vec<(usize, u32)> = Vec::with_capacity(3 * n_triangles);
    for (pos, s) in simplices.iter().enumerate().filter(|(_, s)| s.dim() == 2) {
        let v = s.vertices();
        for (a, b) in [(v[0], v[1]), (v[0], v[2]), (v[1], v[2])] {
            let e = edge_index.get(a, b);
            debug_assert_ne!(e, NONE, "triangle without its edge");
            tri_pairs.push((e as usize, pos as u32));
        }
    }
    let edge_cob = Csr::build(n_total, tri_pairs.iter().copied());
    drop(tri_pairs);

    let mut paired = vec![false; n_total];
    let no_clear = vec![false; n_total];
    let vertex_of_pos: HashMap<u32, u32> = vertex_pos
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != NONE)
        .map(|(v, &p)| (p, v as u32))
        .collect();
    let dim0 = reduce_cochains(
        &vertices,
        |pos| vertex_cob.row(vertex_of_pos[&pos] as usize),
        &no_clear,
        &mut paired,
    );
    // Clearing: edges that killed a component are not 1-cocycle candidates.
    let cleared = paired.clone();
    let dim1 = reduce_cochains(
        &edges,
        |pos| edge_cob.row(pos as usize),
        &cleared,
        &mut paired,
    );
    PairIndices { dim0, dim1 }
}

fn to_result(f: &Filtration, pairs: &[(usize, Option<usize>)]) -> PersistenceResult {
    let s = f.simplices();
    let mut diagram = PersistenceMeasure::empty();
    let mut dropped_infinite = 0;
    let mut dropped_zero = 0;
    for &(b, d) in pairs {
        match d {
            None => dropped_infinite += 1,
            Some(d) => {
                let (birth, death) = (s[b].value, s[d].value);
                match HalfPlanePoint::new(birth, death) {
                    Ok(p) => diagram.push_unchecked(p, 1.0),
                    Err(_) => dropped_zero += 1,
                }
            }
        }
    }
    // Deterministic output order: by (birth, death).
    let mut atoms: Vec<_> = diagram.atoms().to_vec();
    atoms.sort_by(|a, b| {
        a.point
            .birth()
            .total_cmp(&b.point.birth())
            .then(a.point.death().total_cmp(&b.point.death()))
    });
    PersistenceResult {
        diagram: PersistenceMeasure::from_atoms(atoms.into_iter().map(|a| (a.point, a.mass)))
            .expect("unit masses"),
        dropped_infinite,
        dropped_zero,
    }
}

/// Diagrams in dimensions 0 and 1.
pub fn persistence_diagrams(f: &Filtration) -> [PersistenceResult; 2] {
    let pairs = pair_indices(f);
    [to_result(f, &pairs.dim0), to_result(f, &pairs.dim1)]
}

/// The diagram of dimension `dim` (0 or 1): finite pairs with positive
/// persistence; infinite and zero-length bars are counted and dropped.
pub fn persistence_pairs(f: &Filtration, dim: usize) -> Result<PersistenceResult> {
    if dim > 1 {
        return Err(Error::param(format!("homology dimension {dim} not supported (0 or 1)")));
    }
    let [h0, h1] = persistence_diagrams(f);
    Ok(if dim == 0 { h0 } else { h1 })
}

#[cfg(test)]
mod tests {
    use super::super::filtration::cech_filtration;
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn equilateral_triangle_has_one_loop() {
        let s = 2.0;
        let pts = [[0.0, 0.0, 0.0], [s, 0.0, 0.0], [0.5 * s, 0.5 * 3f64.sqrt() * s, 0.0]];
        let f = cech_filtration(&pts, 10.0).unwrap();
        let h1 = persistence_pairs(&f, 1).unwrap();
        assert_eq!(h1.diagram.len(), 1);
        let p = h1.diagram.atoms()[0].point;
        assert_abs_diff_eq!(p.birth(), s / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.death(), s / 3f64.sqrt(), epsilon = 1e-12);

        let h0 = persistence_pairs(&f, 0).unwrap();
        assert_eq!(h0.dropped_infinite, 1);
        // Two merges at s/2, one surviving component.
        assert_eq!(h0.finite_pairs(), 2);
    }

    #[test]
    fn isolated_points_have_no_finite_pairs() {
        let pts: Vec<_> = (0..5).map(|i| [10.0 * i as f64, 0.0, 0.0]).collect();
        let f = cech_filtration(&pts, 1.0).unwrap();
        let h0 = persistence_pairs(&f, 0).unwrap();
        assert_eq!(h0.finite_pairs(), 0);
        assert_eq!(h0.dropped_infinite, 5);
        assert!(persistence_pairs(&f, 1).unwrap().diagram.is_empty());
    }

    #[test]
    fn square_loop_born_at_half_side() {
        // Unit square: loop born at 0.5, filled at sqrt(2)/2 (right triangles).
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let f = cech_filtration(&pts, 5.0).unwrap();
        let h1 = persistence_pairs(&f, 1).unwrap();
        assert_eq!(h1.diagram.len(), 1);
        let p = h1.diagram.atoms()[0].point;
        assert_eq!(p.birth(), 0.5);
        assert_abs_diff_eq!(p.death(), 0.5 * 2f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn truncated_loop_is_infinite() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let f = cech_filtration(&pts, 0.6).unwrap();
        let h1 = persistence_pairs(&f, 1).unwrap();
        assert!(h1.diagram.is_empty());
        assert_eq!(h1.dropped_infinite, 1);
    }

    #[test]
    fn rejects_higher_dimensions() {
        let f = cech_filtration(&[[0.0; 3]], 1.0).unwrap();
        assert!(persistence_pairs(&f, 2).is_err());
    }

    #[test]
    fn column_addition_is_symmetric_difference() {
        let mut out = Vec::new();
        add_columns(&[1, 3, 5, 7], &[3, 4, 7, 9], &mut out);
        assert_eq!(out, vec![1, 4, 5, 9]);
    }
}
