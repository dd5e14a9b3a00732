use super::{HalfPlanePoint, PersistenceMeasure};
use crate::error::{Error, Result};

/// Geometry of a regular grid over the `(birth, death)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub bins: (usize, usize),
}

impl GridSpec {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), bins: (usize, usize)) -> Result<Self> {
        let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.0 < r.1;
        if !ok(x_range) || !ok(y_range) {
            return Err(Error::param("grid ranges must be finite with lo < hi"));
        }
        if bins.0 == 0 || bins.1 == 0 {
            return Err(Error::param("grid must have at least one bin per axis"));
        }
        Ok(GridSpec {
            x_range,
            y_range,
            bins,
        })
    }

    /// The `[0,1] x [0,2]` window with `bins x bins` cells.
    pub fn unit_triangle_window(bins: usize) -> Self {
        GridSpec::new((0.0, 1.0), (0.0, 2.0), (bins, bins)).expect("valid window")
    }

    pub fn cell_width(&self) -> (f64, f64) {
        (
            (self.x_range.1 - self.x_range.0) / self.bins.0 as f64,
            (self.y_range.1 - self.y_range.0) / self.bins.1 as f64,
        )
    }

    pub fn n_cells(&self) -> usize {
        self.bins.0 * self.bins.1
    }

    /// Cell bounds `((x_lo, x_hi), (y_lo, y_hi))`.
    pub fn cell_bounds(&self, ix: usize, iy: usize) -> ((f64, f64), (f64, f64)) {
        let (wx, wy) = self.cell_width();
        let x0 = self.x_range.0 + wx * ix as f64;
        let y0 = self.y_range.0 + wy * iy as f64;
        let x1 = if ix + 1 == self.bins.0 {
            self.x_range.1
        } else {
            x0 + wx
        };
        let y1 = if iy + 1 == self.bins.1 {
            self.y_range.1
        } else {
            y0 + wy
        };
        ((x0, x1), (y0, y1))
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        let ((x0, x1), (y0, y1)) = self.cell_bounds(ix, iy);
        (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    }

    /// Index of the cell containing `(x, y)`, half-open `[lo, hi)` except the
    /// last cell along each axis which is closed.
    pub fn locate(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        Some((
            axis_bin(x, self.x_range, self.bins.0)?,
            axis_bin(y, self.y_range, self.bins.1)?,
        ))
    }
}

fn axis_bin(v: f64, (lo, hi): (f64, f64), n: usize) -> Option<usize> {
    if !(v >= lo && v <= hi) {
        return None;
    }
    if v == hi {
        return Some(n - 1);
    }
    let w = (hi - lo) / n as f64;
    let mut i = (((v - lo) / w).floor() as usize).min(n - 1);
    // Guard against rounding in the division placing v one cell off.
    let lo_edge = |i: usize| lo + w * i as f64;
    while i > 0 && v < lo_edge(i) {
        i -= 1;
    }
    while i + 1 < n && v >= lo_edge(i + 1) {
        i += 1;
    }
    Some(i)
}

/// Cell masses on a [`GridSpec`], indexed `(ix, iy)` from the lower-left
/// corner.
#[derive(Debug, Clone, PartialEq)]
pub struct GridHistogram {
    spec: GridSpec,
    cells: Vec<f64>,
}

impl GridHistogram {
    pub fn zeros(spec: GridSpec) -> Self {
        GridHistogram {
            spec,
            cells: vec![0.0; spec.n_cells()],
        }
    }

    pub fn from_cells(spec: GridSpec, cells: Vec<f64>) -> Result<Self> {
        if cells.len() != spec.n_cells() {
            return Err(Error::GridMismatch);
        }
        if let Some(&m) = cells.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidMass(m));
        }
        Ok(GridHistogram { spec, cells })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.cells[ix * self.spec.bins.1 + iy]
    }

    pub(crate) fn add(&mut self, ix: usize, iy: usize, mass: f64) {
        self.cells[ix * self.spec.bins.1 + iy] += mass;
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn total_mass(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// The measure with one atom per nonzero cell, placed at the cell center.
    ///
    /// Cells whose center is on or below the diagonal have no representative
    /// in the half-plane; their mass is treated as lying on the diagonal and
    /// is omitted (it can be created or destroyed at zero cost).
    pub fn atomize(&self) -> PersistenceMeasure {
        let mut mu = PersistenceMeasure::empty();
        for ix in 0..self.spec.bins.0 {
            for iy in 0..self.spec.bins.1 {
                let m = self.get(ix, iy);
                if m <= 0.0 {
                    continue;
                }
                let (cx, cy) = self.spec.cell_center(ix, iy);
                if let Ok(p) = HalfPlanePoint::new(cx, cy) {
                    mu.push_unchecked(p, m);
                }
            }
        }
        mu
    }

    /// Sums `factor x factor` blocks of cells into a coarser grid.
    pub fn coarsen(&self, factor: usize) -> Result<GridHistogram> {
        let (nx, ny) = self.spec.bins;
        if factor == 0 || nx % factor != 0 || ny % factor != 0 {
            return Err(Error::param("coarsening factor must divide both bin counts"));
        }
        let spec = GridSpec::new(
            self.spec.x_range,
            self.spec.y_range,
            (nx / factor, ny / factor),
        )?;
        let mut out = GridHistogram::zeros(spec);
        for ix in 0..nx {
            for iy in 0..ny {
                out.add(ix / factor, iy / factor, self.get(ix, iy));
            }
        }
        Ok(out)
    }
}

/// Bins `mu` onto `spec`. Atoms outside the window are an error unless
/// `clip` is set, in which case they are dropped with a warning. Returns the
/// histogram and the number of clipped atoms.
pub fn to_histogram(
    mu: &PersistenceMeasure,
    spec: &GridSpec,
    clip: bool,
) -> Result<(GridHistogram, usize)> {
    let mut hist = GridHistogram::zeros(*spec);
    let mut clipped = 0;
    for a in mu.atoms() {
        let (b, d) = (a.point.birth(), a.point.death());
        match spec.locate(b, d) {
            Some((ix, iy)) => hist.add(ix, iy, a.mass),
            None if clip => clipped += 1,
            None => return Err(Error::OutOfWindow { birth: b, death: d }),
        }
    }
    if clipped > 0 {
        log::warn!("{clipped} atoms outside the histogram window were clipped");
    }
    Ok((hist, clipped))
}
