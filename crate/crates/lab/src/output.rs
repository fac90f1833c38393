//! CSV, JSON and SVG emission.
//!
//! Every CSV starts with `# config: <json>` (the resolved configuration
//! including the seed) and may carry further `# key: <json>` comment lines
//! before the header row. Numbers are written with 12 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{LabError, LabResult};
use crate::experiments::{Model, ResultRow, ResultTable};
use crate::format::{round_sig, sig};

pub const RESULT_HEADER: [&str; 7] = ["model", "N", "T", "p_fail", "stderr", "trials", "seconds"];

/// Rectangular table of preformatted cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Recursively round every float in a JSON tree to 12 significant digits.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn compact(value: &Value) -> String {
    let mut v = value.clone();
    round_json(&mut v);
    serde_json::to_string(&v).expect("JSON value serialises")
}

/// CSV text with `# key: json` comment lines before the header.
pub fn csv_text(comments: &[(&str, &Value)], table: &Table) -> String {
    let mut out = String::new();
    for (key, value) in comments {
        writeln!(out, "# {key}: {}", compact(value)).unwrap();
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row).expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 cells"));
    out
}

pub fn result_table(table: &ResultTable) -> Table {
    let mut t = Table::new(RESULT_HEADER);
    for r in &table.rows {
        t.push(vec![
            r.model.name().to_string(),
            r.n.to_string(),
            sig(r.t),
            sig(r.p_fail),
            sig(r.stderr),
            r.trials.to_string(),
            sig(r.seconds),
        ]);
    }
    t
}

pub fn result_csv(table: &ResultTable, extra: &[(&str, &Value)]) -> String {
    let null = Value::Null;
    let mut comments = vec![("config", table.config.as_ref().unwrap_or(&null))];
    comments.extend_from_slice(extra);
    csv_text(&comments, &result_table(table))
}

/// Parse a result CSV back into a table. Failure counts are recovered from
/// `p_fail · trials` and the standard errors recomputed, so a written table
/// reads back identical.
pub fn read_result_csv(text: &str, path: &Path) -> LabResult<ResultTable> {
    let mut config = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        if let Some(json) = line.strip_prefix("# config: ") {
            let v: Value = serde_json::from_str(json).map_err(|e| LabError::parse(path, format!("config header: {e}")))?;
            config = (!v.is_null()).then_some(v);
        }
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| LabError::parse(path, e.to_string()))?.clone();
    if header.iter().ne(RESULT_HEADER) {
        return Err(LabError::parse(path, format!("expected header {}", RESULT_HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| LabError::parse(path, e.to_string()))?;
        let bad = |field: &str| LabError::parse(path, format!("row {}: invalid {field}", k + 1));
        let model: Model = record[0].parse().map_err(|_| bad("model"))?;
        let n: usize = record[1].parse().map_err(|_| bad("N"))?;
        let t: f64 = record[2].parse().map_err(|_| bad("T"))?;
        let p: f64 = record[3].parse().map_err(|_| bad("p_fail"))?;
        let trials: usize = record[5].parse().map_err(|_| bad("trials"))?;
        let seconds: f64 = record[6].parse().map_err(|_| bad("seconds"))?;
        if !(0.0..=1.0).contains(&p) || trials == 0 {
            return Err(bad("p_fail or trials"));
        }
        let failures = (p * trials as f64).round() as usize;
        rows.push(ResultRow::new(model, n, t, failures, trials, seconds));
    }
    Ok(ResultTable { config, rows })
}

/// `{"config": ..., "rows": [...]}` with rows mirroring the CSV columns.
pub fn result_json(table: &ResultTable, extra: &[(&str, &Value)]) -> String {
    let mut v = serde_json::json!({ "config": table.config, "rows": table.rows });
    for (k, e) in extra {
        v[*k] = (*e).clone();
    }
    round_json(&mut v);
    serde_json::to_string_pretty(&v).expect("JSON value serialises") + "\n"
}

/// Output formats of a result table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

pub fn write_file(path: &Path, contents: &str) -> LabResult<()> {
    std::fs::write(path, contents).map_err(|e| LabError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> LabResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))
}

/// Write `results.{csv,json,svg}` into `dir`. The SVG marks `marker` (the
/// configured critical temperature) when given.
pub fn emit_results(
    table: &ResultTable,
    dir: &Path,
    formats: &[Format],
    marker: Option<f64>,
    extra: &[(&str, &Value)],
) -> LabResult<Vec<PathBuf>> {
    if table.rows.is_empty() {
        return Err(LabError::Config("cannot emit an empty result table".into()));
    }
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for &f in formats {
        let (name, text) = match f {
            Format::Csv => ("results.csv", result_csv(table, extra)),
            Format::Json => ("results.json", result_json(table, extra)),
            Format::Svg => ("results.svg", failure_plot(table, marker).render()),
        };
        let path = dir.join(name);
        write_file(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

/// One curve: `(x, y, y error)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64, f64)>,
}

/// Minimal line plot with error bars and dashed reference lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Dashed vertical lines `(x, label)`.
    pub vlines: Vec<(f64, String)>,
    /// Dashed horizontal lines `(y, label)`.
    pub hlines: Vec<(f64, String)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// About five round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw * (1.0 - 1e-9)).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| round_sig(k as f64 * step)).collect()
}

impl Plot {
    pub fn render(&self) -> String {
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).chain(self.vlines.iter().map(|v| v.0));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().flat_map(|p| [p.1 - p.2, p.1 + p.2]))
            .chain(self.hlines.iter().map(|h| h.0));
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;
        let f = |v: f64| format!("{v:.2}");

        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, f(LEFT + pw / 2.0), escape(&self.title)).unwrap();
        writeln!(s, r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#, f(LEFT), f(TOP), f(pw), f(ph)).unwrap();
        for t in ticks(x0, x1) {
            let x = px(t);
            writeln!(s, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/>"#, f(x), f(TOP + ph), f(TOP + ph + 5.0)).unwrap();
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, f(x), f(TOP + ph + 19.0), sig(t)).unwrap();
        }
        for t in ticks(y0, y1) {
            let y = py(t);
            writeln!(s, r#"<line x1="{1}" y1="{0}" x2="{2}" y2="{0}" stroke="black"/>"#, f(y), f(LEFT - 5.0), f(LEFT)).unwrap();
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, f(LEFT - 8.0), f(y + 4.0), sig(t)).unwrap();
        }
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, f(LEFT + pw / 2.0), f(HEIGHT - 12.0), escape(&self.x_label)).unwrap();
        writeln!(
            s,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            f(TOP + ph / 2.0),
            escape(&self.y_label)
        )
        .unwrap();
        for (x, label) in &self.vlines {
            let x = px(*x);
            writeln!(s, r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#555" stroke-dasharray="6,4"/>"##, f(x), f(TOP), f(TOP + ph)).unwrap();
            writeln!(s, r##"<text x="{}" y="{}" fill="#555">{}</text>"##, f(x + 4.0), f(TOP + 14.0), escape(label)).unwrap();
        }
        for (y, label) in &self.hlines {
            let y = py(*y);
            writeln!(s, r##"<line x1="{1}" y1="{0}" x2="{2}" y2="{0}" stroke="#555" stroke-dasharray="6,4"/>"##, f(y), f(LEFT), f(LEFT + pw)).unwrap();
            writeln!(s, r##"<text x="{}" y="{}" fill="#555">{}</text>"##, f(LEFT + 4.0), f(y - 4.0), escape(label)).unwrap();
        }
        for (k, series) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = series.points.iter().map(|p| format!("{},{}", f(px(p.0)), f(py(p.1)))).collect();
            writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" ")).unwrap();
            for &(x, y, e) in &series.points {
                if e > 0.0 {
                    writeln!(s, r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="{color}"/>"#, f(px(x)), f(py(y - e)), f(py(y + e))).unwrap();
                }
                writeln!(s, r#"<circle cx="{}" cy="{}" r="2.5" fill="{color}"/>"#, f(px(x)), f(py(y))).unwrap();
            }
            let ly = TOP + 10.0 + 18.0 * k as f64;
            let lx = LEFT + pw + 12.0;
            writeln!(s, r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="{color}" stroke-width="2"/>"#, f(lx), f(ly), f(lx + 20.0)).unwrap();
            writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, f(lx + 26.0), f(ly + 4.0), escape(&series.label)).unwrap();
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Failure probability against temperature, one curve per size.
pub fn failure_plot(table: &ResultTable, marker: Option<f64>) -> Plot {
    let model = table.rows.first().map_or("", |r| r.model.name());
    Plot {
        title: format!("MWPM logical error probability ({model})"),
        x_label: "T".into(),
        y_label: "p_fail".into(),
        series: table
            .sizes()
            .into_iter()
            .map(|n| Series {
                label: format!("N = {n}"),
                points: table.curve(n).iter().map(|r| (r.t, r.p_fail, r.stderr)).collect(),
            })
            .collect(),
        vlines: marker.map(|t| (t, format!("T = {}", sig(t)))).into_iter().collect(),
        hlines: Vec::new(),
    }
}

/// Gate fidelity against temperature with the `F = 1/4` floor and a `Tc`
/// marker.
pub fn fidelity_plot(title: &str, series: Vec<Series>, tc: f64) -> Plot {
    Plot {
        title: title.into(),
        x_label: "T".into(),
        y_label: "F".into(),
        series,
        vlines: vec![(tc, format!("Tc = {}", sig(round_sig(tc * 1e3) / 1e3)))],
        hlines: vec![(0.25, "F = 1/4".into())],
    }
}
