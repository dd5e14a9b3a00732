
use crate::error::{Error, Result};
use crate::measures::{GridHistogram, GridSpec};
use crate::measures::{HalfPlanePoint, PersistenceMeasure};

/// Discrete uniform law on `{min..=max}` for the number of triangles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NLaw {
    pub min: u32,
    pub max: u32,
}

impl NLaw {
    pub fn new(min: u32, max: u32) -> Result<Self> {
        if max < min {
            return Err(Error::param(format!("empty N range {min}..={max}")));
        }
        Ok(NLaw { min, max })
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.min as f64 + self.max as f64)
    }
}

impl Default for NLaw {
    fn default() -> Self {
        NLaw { min: 1, max: 20 }
    }
}

/// Parameters of the triangle model. Edge values are uniform on `[0, 1]`
/// and the interior offset `V` follows Beta(1, 3).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TriangleModelParams {
    pub n_law: NLaw,
}

/// Beta(1, 3) by inverse CDF, `v = 1 - (1 - u)^(1/3)`, never returning 0.
pub fn sample_beta13(rng: &mut impl rand::Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        let v = 1.0 - (1.0 - u).cbrt();
        if v > 0.0 {
            return v;
        }
    }
}

/// CDF of Beta(1, 3), clamped outside `[0, 1]`.
pub fn beta13_cdf(v: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if v >= 1.0 {
        1.0
    } else {
        1.0 - (1.0 - v).powi(3)
    }
}

/// One diagram of the model: `N` unit atoms `(b, b + V)`, `b` the largest
/// of three uniform edge values.
pub fn sample_triangle_diagram(params: &TriangleModelParams, rng: &mut impl rand::Rng) -> PersistenceMeasure {
    let n = rng.random_range(params.n_law.min..=params.n_law.max);
    let mut points = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let b = (0..3).map(|_| rng.random::<f64>()).fold(0.0, f64::max);
        // A draw so small that b + v rounds to b is redrawn.
        let p = loop {
            if let Ok(p) = HalfPlanePoint::new(b, b + sample_beta13(rng)) {
                break p;
            }
        };
        points.push(p);
    }
    PersistenceMeasure::diagram(points)
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Expected mass of `[x0, x1] x [y0, y1]` (births by deaths) under the
/// model with `E[N] = 10`: `30 * int t^2 P(y0 - t <= V <= y1 - t) dt`.
/// Any rectangle is accepted; the part below the diagonal carries no mass.
fn rect_mass(x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (a, b) = (x0.max(0.0), x1.min(1.0));
    if b <= a || y1 <= y0 {
        return 0.0;
    }
    let f = |t: f64| 30.0 * t * t * (beta13_cdf(y1 - t) - beta13_cdf(y0 - t));
    // Split where the clamped CDF has kinks.
    let mut cuts = vec![a, b];
    for k in [y0, y0 - 1.0, y1, y1 - 1.0] {
        if k > a && k < b {
            cuts.push(k);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let tol = 1e-8 / (cuts.len() - 1) as f64;
    cuts.windows(2).map(|w| adaptive_simpson(f, w[0], w[1], tol)).sum()
}

/// Expected number of model atoms with birth in `[r1, r2]` and death in
/// `[s1, s2]`, for `N` with mean 10.
pub fn closed_form_epd_rect(r1: f64, r2: f64, s1: f64, s2: f64) -> Result<f64> {
    if [r1, r2, s1, s2].iter().any(|x| !x.is_finite()) || r2 < r1 || s2 < s1 {
        return Err(Error::param(format!(
            "rectangle [{r1}, {r2}] x [{s1}, {s2}] needs r1 <= r2 and s1 <= s2"
        )));
    }
    Ok(rect_mass(r1, r2, s1, s2))
}

/// The closed-form expected diagram integrated over each grid cell.
pub fn closed_form_epd_histogram(spec: &GridSpec) -> GridHistogram {
    let mut h = GridHistogram::zeros(*spec);
    for ix in 0..spec.bins.0 {
        for iy in 0..spec.bins.1 {
            let ((x0, x1), (y0, y1)) = spec.cell_bounds(ix, iy);
            h.add(ix, iy, rect_mass(x0, x1, y0, y1));
        }
    }
    h
}

/// [`closed_form_epd_rect`] rescaled to an arbitrary law of `N`. The
/// expected diagram is linear in `E[N]`, so this is the mean-10 value times
/// `E[N] / 10`.
pub fn closed_form_epd_rect_for(law: &NLaw, r1: f64, r2: f64, s1: f64, s2: f64) -> Result<f64> {
    Ok(closed_form_epd_rect(r1, r2, s1, s2)? * law.mean() / 10.0)
}

/// [`closed_form_epd_histogram`] rescaled to an arbitrary law of `N`.
pub fn closed_form_epd_histogram_for(law: &NLaw, spec: &GridSpec) -> GridHistogram {
    let scale = law.mean() / 10.0;
    let cells = closed_form_epd_histogram(spec).cells().iter().map(|m| m * scale).collect();
    GridHistogram::from_cells(*spec, cells).expect("scaled cells stay valid")
}
