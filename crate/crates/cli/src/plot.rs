//! Minimal SVG line plots, one panel per plotted quantity.

use std::fmt::Write;

use crate::config::Experiment;
use crate::experiment::{Row, Table};

const W: f64 = 640.0;
const PANEL_H: f64 = 360.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 30.0, 50.0); // left, right, top, bottom
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

struct Curve {
    label: String,
    dashed: bool,
    color: usize,
    pts: Vec<(f64, f64)>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(vals: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = vals
            .map(|v| if log { v.log10() } else { v })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi, log }
    }

    /// Position in [0, 1].
    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                if self.log {
                    10f64.powf(t)
                } else {
                    t
                }
            })
            .collect()
    }
}

fn x_of(e: Experiment, r: &Row) -> f64 {
    if e == Experiment::Fig4 {
        r.point.beta_delta
    } else {
        r.point.k_db
    }
}

fn curve_key(e: Experiment, r: &Row) -> String {
    if e == Experiment::Fig4 {
        format!("K={} dB", r.point.k_db)
    } else {
        format!("βΔ={}, θΔ={}°", r.point.beta_delta, r.point.theta_delta_deg)
    }
}

fn curves(table: &Table, quantity: Option<&str>) -> Vec<Curve> {
    let plotted: Vec<(usize, &str)> = table
        .value_columns
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.ends_with("std_error"))
        .map(|(i, c)| (i, *c))
        .collect();
    let mut keys: Vec<String> = Vec::new();
    let mut out: Vec<Curve> = Vec::new();
    for r in table.rows.iter().filter(|r| r.quantity == quantity) {
        let key = curve_key(table.experiment, r);
        let ki = keys.iter().position(|k| *k == key).unwrap_or_else(|| {
            keys.push(key.clone());
            keys.len() - 1
        });
        for &(ci, col) in &plotted {
            let Some(y) = r.values[ci] else { continue };
            let label = format!("{key} {col}");
            let idx = match out.iter().position(|c| c.label == label) {
                Some(i) => i,
                None => {
                    out.push(Curve {
                        label,
                        dashed: col.starts_with("mc"),
                        color: ki,
                        pts: Vec::new(),
                    });
                    out.len() - 1
                }
            };
            out[idx].pts.push((x_of(table.experiment, r), y));
        }
    }
    out
}

fn panel(svg: &mut String, table: &Table, quantity: Option<&str>, y0: f64) {
    let cs = curves(table, quantity);
    let log_x = table.experiment == Experiment::Fig4;
    let xa = Axis::fit(cs.iter().flat_map(|c| c.pts.iter().map(|p| p.0)), log_x);
    let ya = Axis::fit(cs.iter().flat_map(|c| c.pts.iter().map(|p| p.1)), false);
    let (l, r, t, b) = MARGIN;
    let (pw, ph) = (W - l - r, PANEL_H - t - b);
    let px = |x: f64| l + xa.frac(x) * pw;
    let py = |y: f64| y0 + t + (1.0 - ya.frac(y)) * ph;
    let _ = writeln!(
        svg,
        r##"<rect x="{l}" y="{}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>"##,
        y0 + t
    );
    for v in xa.ticks() {
        let x = px(v);
        let _ = writeln!(
            svg,
            r##"<text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"##,
            y0 + t + ph + 16.0,
            tick_label(v)
        );
    }
    for v in ya.ticks() {
        let y = py(v);
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"##,
            l - 6.0,
            y + 4.0,
            tick_label(v)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{l}" x2="{:.1}" y1="{y:.1}" y2="{y:.1}" stroke="#ddd"/>"##,
            l + pw
        );
    }
    let xlabel = if log_x { "beta_delta" } else { "K (dB)" };
    let _ = writeln!(
        svg,
        r##"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{xlabel}</text>"##,
        l + pw / 2.0,
        y0 + PANEL_H - 12.0
    );
    if let Some(q) = quantity {
        let _ = writeln!(
            svg,
            r##"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{q}</text>"##,
            l + pw / 2.0,
            y0 + t - 10.0
        );
    }
    for (i, c) in cs.iter().enumerate() {
        let color = COLORS[c.color % COLORS.len()];
        let path: Vec<String> = c.pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let dash = if c.dashed { r#" stroke-dasharray="5,4""# } else { "" };
        let _ = writeln!(
            svg,
            r##"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"{dash}/>"##,
            path.join(" ")
        );
        let ly = y0 + t + 14.0 + 14.0 * i as f64;
        let _ = writeln!(
            svg,
            r##"<line x1="{:.1}" x2="{:.1}" y1="{ly:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="1.6"{dash}/><text x="{:.1}" y="{:.1}" font-size="10">{}</text>"##,
            l + 8.0,
            l + 30.0,
            l + 34.0,
            ly + 3.5,
            escape(&c.label)
        );
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(table: &Table) -> String {
    let mut quantities: Vec<Option<&str>> = Vec::new();
    for r in &table.rows {
        if !quantities.contains(&r.quantity) {
            quantities.push(r.quantity);
        }
    }
    let h = PANEL_H * quantities.len().max(1) as f64;
    let mut svg = format!(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{h}" viewBox="0 0 {W} {h}" font-family="sans-serif">"#
    );
    svg.push('\n');
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, q) in quantities.iter().enumerate() {
        panel(&mut svg, table, *q, PANEL_H * i as f64);
    }
    svg.push_str("</svg>\n");
    svg
}
