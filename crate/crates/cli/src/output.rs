//! Output assembly: ordered series records with provenance metadata, written
//! as CSV (metadata in `#` comment lines), JSON (ordered column array), or a
//! minimal static SVG line plot for quick visual checks. CSV and JSON are the
//! authoritative formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::{bail, Result};

/// Schema version stamped into every output; bump when column layouts change.
pub const SCHEMA_VERSION: &str = "v1";

/// An ordered table of x values with named y columns plus metadata.
#[derive(Debug, Clone)]
pub struct SeriesRecord {
    pub x_name: String,
    pub x: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    /// Non-numeric per-row annotations (e.g. convergence flags); appended
    /// after the numeric columns.
    pub flags: Vec<(String, Vec<String>)>,
    pub metadata: BTreeMap<String, String>,
}

impl SeriesRecord {
    pub fn new(x_name: &str, x: Vec<f64>) -> Self {
        Self {
            x_name: x_name.to_string(),
            x,
            columns: Vec::new(),
            flags: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) {
        assert_eq!(values.len(), self.x.len(), "column {name} length mismatch");
        self.columns.push((name.to_string(), values));
    }

    pub fn push_flag_column(&mut self, name: &str, values: Vec<String>) {
        assert_eq!(values.len(), self.x.len(), "column {name} length mismatch");
        self.flags.push((name.to_string(), values));
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.to_string(), value.to_string());
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let mut header = vec![self.x_name.clone()];
        header.extend(self.columns.iter().map(|(n, _)| n.clone()));
        header.extend(self.flags.iter().map(|(n, _)| n.clone()));
        let _ = writeln!(out, "{}", header.join(","));
        for i in 0..self.x.len() {
            let mut row = vec![fmt_num(self.x[i])];
            for (_, col) in &self.columns {
                row.push(fmt_num(col[i]));
            }
            for (_, col) in &self.flags {
                row.push(col[i].clone());
            }
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut columns = vec![serde_json::json!({
            "name": self.x_name,
            "values": self.x,
        })];
        for (name, values) in &self.columns {
            columns.push(serde_json::json!({ "name": name, "values": values }));
        }
        for (name, values) in &self.flags {
            columns.push(serde_json::json!({ "name": name, "values": values }));
        }
        let doc = serde_json::json!({
            "metadata": self.metadata,
            "columns": columns,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("json serialization");
        text.push('\n');
        text
    }

    /// Static line plot of up to two numeric columns against x.
    pub fn to_svg(&self) -> Result<String> {
        if self.columns.is_empty() {
            bail!("svg output needs at least one numeric column");
        }
        if self.columns.len() > 2 {
            bail!("svg output supports at most two series, found {}", self.columns.len());
        }
        if self.x.len() < 2 {
            bail!("svg output needs at least two points");
        }
        Ok(render_svg(self))
    }
}

/// ≥ 12 significant digits for every numeric output.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.12e}")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const SVG_W: f64 = 720.0;
const SVG_H: f64 = 480.0;
const MARGIN_L: f64 = 72.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 56.0;
const SERIES_COLORS: [&str; 2] = ["#1f77b4", "#d62728"];

fn axis_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn render_svg(record: &SeriesRecord) -> String {
    let (x_lo, x_hi) = axis_range(record.x.iter().copied());
    let (y_lo, y_hi) = axis_range(record.columns.iter().flat_map(|(_, c)| c.iter().copied()));
    let plot_w = SVG_W - MARGIN_L - MARGIN_R;
    let plot_h = SVG_H - MARGIN_T - MARGIN_B;
    let sx = move |v: f64| MARGIN_L + (v - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = move |v: f64| MARGIN_T + (1.0 - (v - y_lo) / (y_hi - y_lo)) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_W}" height="{SVG_H}" viewBox="0 0 {SVG_W} {SVG_H}">"#
    );
    let _ = writeln!(svg, "<desc>");
    for (k, v) in &record.metadata {
        let _ = writeln!(svg, "{k}: {v}", v = xml_escape(v));
    }
    let _ = writeln!(svg, "</desc>");
    let _ = writeln!(svg, r#"<rect width="{SVG_W}" height="{SVG_H}" fill="white"/>"#);

    // axes
    let x0 = MARGIN_L;
    let y0 = SVG_H - MARGIN_B;
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#,
        SVG_W - MARGIN_R
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{x0}" y1="{MARGIN_T}" x2="{x0}" y2="{y0}" stroke="black"/>"#
    );

    // ticks
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let xv = x_lo + frac * (x_hi - x_lo);
        let xp = sx(xv);
        let _ = writeln!(
            svg,
            r#"<line x1="{xp:.2}" y1="{y0}" x2="{xp:.2}" y2="{}" stroke="black"/>"#,
            y0 + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{xp:.2}" y="{}" font-size="12" text-anchor="middle">{xv:.3}</text>"#,
            y0 + 20.0
        );
        let yv = y_lo + frac * (y_hi - y_lo);
        let yp = sy(yv);
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{yp:.2}" x2="{x0}" y2="{yp:.2}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" font-size="12" text-anchor="end">{yv:.4}</text>"#,
            x0 - 8.0,
            yp + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_L + plot_w / 2.0,
        SVG_H - 12.0,
        record.x_name
    );

    // series
    for (idx, (name, col)) in record.columns.iter().enumerate() {
        let color = SERIES_COLORS[idx];
        let mut path = String::new();
        for (x, y) in record.x.iter().zip(col) {
            if !path.is_empty() {
                path.push(' ');
            }
            let _ = write!(path, "{:.2},{:.2}", sx(*x), sy(*y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        let ly = MARGIN_T + 16.0 + 18.0 * idx as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly:.2}" x2="{}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            SVG_W - MARGIN_R - 140.0,
            SVG_W - MARGIN_R - 116.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.2}" font-size="12">{name}</text>"#,
            SVG_W - MARGIN_R - 110.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
