//! Tabular, JSON and SVG emitters plus run manifests.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
    Svg,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Svg => "svg",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "svg" => Ok(OutputFormat::Svg),
            _ => Err(Error::UnknownName {
                kind: "output format",
                name: s.to_string(),
                available: "csv, json, svg".to_string(),
            }),
        }
    }
}

/// Record of one invocation, written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters,
            tool_version: TOOL_VERSION.to_string(),
            seed,
            outputs: Vec::new(),
        }
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e16) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// CSV table whose first line names the schema version.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: &'static str, header: &[&'static str]) -> Self {
        Table {
            schema,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
        Ok(format!("# schema: {}\n{}", self.schema, String::from_utf8_lossy(&body)))
    }
}

/// Reads a table written by [`Table::to_csv`]; returns the schema line and records.
pub fn parse_csv(text: &str) -> Result<(String, Vec<String>, Vec<Vec<String>>)> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let schema = first
        .strip_prefix("# schema: ")
        .ok_or_else(|| Error::Invalid("missing schema line".into()))?
        .to_string();
    let mut r = csv::ReaderBuilder::new().from_reader(rest.as_bytes());
    let io = |e: csv::Error| Error::Invalid(format!("csv: {e}"));
    let header = r.headers().map_err(io)?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()).map_err(io))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok((schema, header, rows))
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit<'a>(points: impl Iterator<Item = &'a (f64, f64)>) -> Frame {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in points.filter(|p| p.0.is_finite() && p.1.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn svg_open(out: &mut String, title: &str, x_label: &str, y_label: &str, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (v, x, y, anchor) in [
        (frame.x0, frame.px(frame.x0), HEIGHT - MARGIN + 16.0, "start"),
        (frame.x1, frame.px(frame.x1), HEIGHT - MARGIN + 16.0, "end"),
        (frame.y0, MARGIN - 4.0, frame.py(frame.y0), "end"),
        (frame.y1, MARGIN - 4.0, frame.py(frame.y1) + 4.0, "end"),
    ] {
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{y:.1}" font-size="10" text-anchor="{anchor}">{v:.3}</text>"#);
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of several series sharing one frame.
pub fn svg_lines(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let frame = Frame::fit(series.iter().flat_map(|s| s.points.iter()));
    let mut out = String::new();
    svg_open(&mut out, title, x_label, y_label, &frame);
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            escape(&s.name),
            pts.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" fill="{color}">{}</text>"#,
            MARGIN + 8.0,
            MARGIN + 14.0 + 14.0 * k as f64,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Unbounded region drawn as the polygon through its finite vertices,
/// extended to the plot edge. Exact vertex coordinates are kept in
/// `data-vertices` for round-trip checks.
pub fn svg_region(title: &str, vertices: &[(f64, f64)]) -> String {
    let reach = vertices.iter().flat_map(|v| [v.0, v.1]).fold(1.0, f64::max) * 1.5;
    let (first, last) = (vertices[0], vertices[vertices.len() - 1]);
    let mut outline = vec![(first.0, reach)];
    outline.extend_from_slice(vertices);
    outline.push((reach, last.1));
    outline.push((reach, reach));
    let frame = Frame::fit([(0.0, 0.0), (reach, reach)].iter());
    let mut out = String::new();
    svg_open(&mut out, title, "C1 (bits)", "C2 (bits)", &frame);
    let pts: Vec<String> = outline
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    let exact: Vec<String> = vertices.iter().map(|&(x, y)| format!("{},{}", fmt_f64(x), fmt_f64(y))).collect();
    let _ = writeln!(
        out,
        r##"<polygon data-vertices="{}" fill="#1f77b4" fill-opacity="0.25" stroke="#1f77b4" points="{}"/>"##,
        exact.join(" "),
        pts.join(" ")
    );
    for (k, &(x, y)) in vertices.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3"/><text x="{:.2}" y="{:.2}" font-size="11">P{}</text>"#,
            frame.px(x),
            frame.py(y),
            frame.px(x) + 5.0,
            frame.py(y) - 5.0,
            vertices.len() - k
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Vertices stored in an SVG written by [`svg_region`].
pub fn svg_region_vertices(svg: &str) -> Option<Vec<(f64, f64)>> {
    let start = svg.find("data-vertices=\"")? + "data-vertices=\"".len();
    let end = start + svg[start..].find('"')?;
    svg[start..end]
        .split_whitespace()
        .map(|pair| {
            let (x, y) = pair.split_once(',')?;
            Some((x.parse().ok()?, y.parse().ok()?))
        })
        .collect()
}
