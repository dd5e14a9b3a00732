//! Self-contained SVG figures: log-log convergence curves and grouped bars.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::records::{read_csv_file, ExperimentRecord, ValueKind};
use crate::regression::{loglog_regression, per_n_stats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    Loglog,
    Bars,
}

const WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Methods in order of first appearance.
fn methods(records: &[ExperimentRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        if !out.contains(&r.method) {
            out.push(r.method.clone());
        }
    }
    out
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    top: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64), top: f64) -> Self {
        let pad = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x0, x1) = pad(x);
        let (y0, y1) = pad(y);
        Frame { x0, x1, y0, y1, top }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN.0 + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN.0 - MARGIN.1)
    }

    fn py(&self, y: f64) -> f64 {
        let h = PANEL_HEIGHT - MARGIN.2 - MARGIN.3;
        self.top + MARGIN.2 + (1.0 - (y - self.y0) / (self.y1 - self.y0)) * h
    }

    fn axes(&self, svg: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (l, r) = (MARGIN.0, WIDTH - MARGIN.1);
        let (t, b) = (self.top + MARGIN.2, self.top + PANEL_HEIGHT - MARGIN.3);
        let _ = writeln!(svg, r#"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, r - l, b - t);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#, (l + r) / 2.0, self.top + 20.0, escape(title));
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#, (l + r) / 2.0, b + 38.0, escape(xlabel));
        let _ = writeln!(svg, r#"<text x="16" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 16 {:.2})">{}</text>"#, (t + b) / 2.0, (t + b) / 2.0, escape(ylabel));
    }
}

fn log10_ticks(lo: f64, hi: f64) -> Vec<i32> {
    (lo.floor() as i32..=hi.ceil() as i32).filter(|&e| (e as f64) >= lo - 1e-12 && (e as f64) <= hi + 1e-12).collect()
}

/// Mean ± std per `n` on log-log axes, one series per method, with the
/// least-squares line of `log(mean)` against `log(n)`.
pub fn loglog_svg(records: &[ExperimentRecord]) -> CliResult<String> {
    let records: Vec<&ExperimentRecord> = records.iter().filter(|r| r.value_kind == ValueKind::OtPowP).collect();
    let owned: Vec<ExperimentRecord> = records.iter().map(|r| (*r).clone()).collect();
    let names = methods(&owned);
    let mut series = Vec::new();
    for m in &names {
        let group: Vec<&ExperimentRecord> = owned.iter().filter(|r| &r.method == m).collect();
        let stats: Vec<_> = per_n_stats(group.iter().copied()).into_iter().filter(|s| s.0 > 0 && s.1 > 0.0).collect();
        let fit = loglog_regression(group.iter().copied());
        series.push((m.clone(), stats, fit));
    }
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().map(|st| ((st.0 as f64).log10(), st.1.log10()))).collect();
    if pts.is_empty() {
        return Err(CliError::usage("no positive ot_p_pow_p values to plot"));
    }
    let xr = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.0), a.1.max(p.0)));
    let mut yr = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| (a.0.min(p.1), a.1.max(p.1)));
    for s in &series {
        for st in &s.1 {
            yr.1 = yr.1.max((st.1 + st.2).log10());
        }
    }
    let span = |r: (f64, f64)| (r.0 - 0.05 * (r.1 - r.0).max(0.1), r.1 + 0.05 * (r.1 - r.0).max(0.1));
    let f = Frame::new(span(xr), span(yr), 0.0);

    let mut svg = header(PANEL_HEIGHT + 20.0 * series.len() as f64);
    f.axes(&mut svg, "Convergence of the empirical EPD", "n", "OT_p^p (mean ± std)");
    for e in log10_ticks(f.x0, f.x1) {
        tick_x(&mut svg, &f, e as f64, &format!("1e{e}"));
    }
    for e in log10_ticks(f.y0, f.y1) {
        tick_y(&mut svg, &f, e as f64, &format!("1e{e}"));
    }
    let bottom = f.py(f.y0);
    for (i, (name, stats, fit)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for &(n, mean, std, _) in stats {
            let x = f.px((n as f64).log10());
            let y = f.py(mean.log10());
            let hi = f.py((mean + std).log10());
            let lo = if mean - std > 0.0 { f.py((mean - std).log10()).min(bottom) } else { bottom };
            let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{lo:.2}" x2="{x:.2}" y2="{hi:.2}" stroke="{color}"/>"#);
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
        let label = match fit {
            Some(s) => {
                // log10 mean = (intercept + slope ln n) / ln 10
                let at = |lx: f64| (s.intercept + s.slope * lx * std::f64::consts::LN_10) / std::f64::consts::LN_10;
                let _ = writeln!(
                    svg,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="5,3"/>"#,
                    f.px(xr.0),
                    f.py(at(xr.0)),
                    f.px(xr.1),
                    f.py(at(xr.1))
                );
                format!("{name}: slope {:.12} intercept {:.12} r2 {:.6} ({} points)", s.slope, s.intercept, s.r2, s.n_points)
            }
            None => format!("{name}: no fit"),
        };
        let _ = writeln!(
            svg,
            r#"<text class="fit" x="{:.2}" y="{:.2}" font-size="12" fill="{color}">{}</text>"#,
            MARGIN.0,
            PANEL_HEIGHT + 14.0 + 20.0 * i as f64,
            escape(&label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Grouped bars of mean distortion against `k`, one panel per value kind.
pub fn bars_svg(records: &[ExperimentRecord]) -> CliResult<String> {
    let mut kinds: Vec<ValueKind> = records.iter().map(|r| r.value_kind).filter(|k| *k != ValueKind::OtPowP).collect();
    kinds.sort();
    kinds.dedup();
    if kinds.is_empty() {
        return Err(CliError::usage("no distortion records to plot"));
    }
    let names = methods(records);
    let mut svg = header(PANEL_HEIGHT * kinds.len() as f64 + 20.0);
    for (panel, kind) in kinds.iter().enumerate() {
        // (k, method) -> values
        let mut cells: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
        for k in records.iter().filter(|r| r.value_kind == *kind).map(|r| r.n_or_k) {
            cells.entry(k).or_default();
        }
        for (k, row) in cells.iter_mut() {
            for m in &names {
                let v: Vec<f64> = records
                    .iter()
                    .filter(|r| r.value_kind == *kind && r.n_or_k == *k && &r.method == m)
                    .map(|r| r.value)
                    .collect();
                let (mean, std) = mean_std(&v);
                row.push((mean, std));
            }
        }
        let ymax = cells.values().flatten().map(|(m, s)| m + s).fold(0.0, f64::max);
        let f = Frame::new((0.0, cells.len() as f64), (0.0, if ymax > 0.0 { ymax * 1.05 } else { 1.0 }), PANEL_HEIGHT * panel as f64);
        f.axes(&mut svg, &format!("Mean {kind}"), "k", kind.as_str());
        for i in 0..=4 {
            let y = f.y1 * i as f64 / 4.0;
            tick_y(&mut svg, &f, y, &format!("{y:.3}"));
        }
        let group_w = f.px(1.0) - f.px(0.0);
        let bar_w = 0.8 * group_w / names.len().max(1) as f64;
        for (g, (k, row)) in cells.iter().enumerate() {
            tick_x(&mut svg, &f, g as f64 + 0.5, &k.to_string());
            for (j, &(mean, std)) in row.iter().enumerate() {
                if !mean.is_finite() {
                    continue;
                }
                let color = COLORS[j % COLORS.len()];
                let x = f.px(g as f64) + 0.1 * group_w + bar_w * j as f64;
                let (top, base) = (f.py(mean), f.py(0.0));
                let _ = writeln!(svg, r#"<rect x="{x:.2}" y="{top:.2}" width="{bar_w:.2}" height="{:.2}" fill="{color}"/>"#, base - top);
                let cx = x + bar_w / 2.0;
                let _ = writeln!(svg, r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="black"/>"#, f.py((mean - std).max(0.0)), f.py(mean + std));
            }
        }
        for (j, m) in names.iter().enumerate() {
            let x = WIDTH - MARGIN.1 - 110.0;
            let y = f.top + MARGIN.2 + 16.0 + 16.0 * j as f64;
            let _ = writeln!(svg, r#"<rect x="{x:.2}" y="{:.2}" width="10" height="10" fill="{}"/>"#, y - 9.0, COLORS[j % COLORS.len()]);
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{y:.2}" font-size="12">{}</text>"#, x + 14.0, escape(m));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var.sqrt())
}

fn header(height: f64) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height:.0}\" viewBox=\"0 0 {WIDTH} {height:.0}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn tick_x(svg: &mut String, f: &Frame, x: f64, label: &str) {
    let (px, b) = (f.px(x), f.top + PANEL_HEIGHT - MARGIN.3);
    let _ = writeln!(svg, r#"<line x1="{px:.2}" y1="{b:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, b + 5.0);
    let _ = writeln!(svg, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#, b + 18.0, escape(label));
}

fn tick_y(svg: &mut String, f: &Frame, y: f64, label: &str) {
    let (py, l) = (f.py(y), MARGIN.0);
    let _ = writeln!(svg, r#"<line x1="{:.2}" y1="{py:.2}" x2="{l:.2}" y2="{py:.2}" stroke="black"/>"#, l - 5.0);
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"#, l - 8.0, py + 4.0, escape(label));
}

/// Reads `csv`, renders the figure and writes it to `out`. Nothing is
/// written when the input is empty or malformed.
pub fn plot(csv: &Path, kind: PlotKind, out: &Path) -> CliResult<()> {
    let records = read_csv_file(csv)?;
    if records.is_empty() {
        return Err(CliError::Csv {
            path: csv.to_path_buf(),
            message: "no records".into(),
        });
    }
    let svg = match kind {
        PlotKind::Loglog => loglog_svg(&records)?,
        PlotKind::Bars => bars_svg(&records)?,
    };
    std::fs::write(out, svg).map_err(|e| CliError::io(out, e))
}
