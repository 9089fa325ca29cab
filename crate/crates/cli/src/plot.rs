//! Static SVG rendering of trajectory CSV files.
//!
//! Columns named `label[j]` are grouped into one heatmap per label (time across, cell
//! index up); every other column becomes a polyline in a shared line chart. Output
//! depends only on the table, so identical inputs give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write;

use posmild::solver::CsvTable;

const WIDTH: f64 = 800.0;
const PANEL: f64 = 320.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 36.0;
const MAX_COLUMNS: usize = 240;
const MAX_ROWS: usize = 120;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const RAMP: [(f64, [f64; 3]); 5] = [
    (0.0, [68.0, 1.0, 84.0]),
    (0.25, [59.0, 82.0, 139.0]),
    (0.5, [33.0, 145.0, 140.0]),
    (0.75, [94.0, 201.0, 98.0]),
    (1.0, [253.0, 231.0, 37.0]),
];

enum Panel {
    Lines(Vec<(String, usize)>),
    Heatmap(String, Vec<usize>),
}

fn panels(labels: &[String]) -> Vec<Panel> {
    let mut lines = Vec::new();
    let mut grids: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut order = Vec::new();
    for (c, label) in labels.iter().enumerate() {
        match label.strip_suffix(']').and_then(|s| s.split_once('[')) {
            Some((name, _)) => {
                if !grids.contains_key(name) {
                    order.push(name.to_string());
                }
                grids.entry(name.to_string()).or_default().push(c);
            }
            None => lines.push((label.clone(), c)),
        }
    }
    let mut out = Vec::new();
    if !lines.is_empty() {
        out.push(Panel::Lines(lines));
    }
    for name in order {
        let cols = grids.remove(&name).unwrap_or_default();
        out.push(Panel::Heatmap(name, cols));
    }
    out
}

fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if (1e-2..1e4).contains(&x.abs()) {
        format!("{x:.3}")
    } else {
        format!("{x:.2e}")
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn color(u: f64) -> String {
    let u = if u.is_finite() { u.clamp(0.0, 1.0) } else { 0.0 };
    let k = RAMP.windows(2).position(|w| u <= w[1].0).unwrap_or(RAMP.len() - 2);
    let (a, b) = (RAMP[k], RAMP[k + 1]);
    let s = (u - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|i| (a.1[i] + s * (b.1[i] - a.1[i])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Evenly spaced indices into `0..n`, at most `max` of them.
fn thin(n: usize, max: usize) -> Vec<usize> {
    if n <= max {
        return (0..n).collect();
    }
    (0..max).map(|i| i * (n - 1) / (max - 1)).collect()
}

struct Frame {
    top: f64,
    x0: f64,
    x1: f64,
    t: (f64, f64),
}

impl Frame {
    fn plot_width(&self) -> f64 {
        self.x1 - self.x0
    }

    fn x(&self, t: f64) -> f64 {
        self.x0 + (t - self.t.0) / (self.t.1 - self.t.0) * self.plot_width()
    }

    fn bottom(&self) -> f64 {
        self.top + PANEL - MARGIN_Y
    }

    fn axes(&self, svg: &mut String, title: &str, y_lo: &str, y_hi: &str) {
        let (top, bottom) = (self.top + MARGIN_Y, self.bottom());
        let _ = writeln!(
            svg,
            r##"<rect x="{:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            self.x0,
            self.plot_width(),
            bottom - top
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="14">{title}</text>"#, self.x0, top - 10.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y_hi}</text>"#,
            self.x0 - 6.0,
            top + 10.0
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{bottom:.2}" text-anchor="end">{y_lo}</text>"#, self.x0 - 6.0);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            self.x0,
            bottom + 16.0,
            num(self.t.0)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">t = {}</text>"#,
            self.x1,
            bottom + 16.0,
            num(self.t.1)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn line_panel(svg: &mut String, frame: &Frame, table: &CsvTable, series: &[(String, usize)]) {
    let (lo, hi) = range(series.iter().flat_map(|(_, c)| table.rows.iter().map(move |r| r[*c])));
    let (top, bottom) = (frame.top + MARGIN_Y, frame.bottom());
    frame.axes(svg, "trajectory", &num(lo), &num(hi));
    for (k, (label, c)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let mut points = String::new();
        for (t, row) in table.times.iter().zip(&table.rows) {
            if !row[*c].is_finite() {
                continue;
            }
            let y = bottom - (row[*c] - lo) / (hi - lo) * (bottom - top);
            let _ = write!(points, "{:.2},{:.2} ", frame.x(*t), y);
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            points.trim_end()
        );
        let ly = top + 14.0 + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="3"/>"#,
            frame.x1 + 12.0,
            frame.x1 + 32.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            frame.x1 + 38.0,
            ly + 4.0,
            escape(label)
        );
    }
}

fn heatmap_panel(svg: &mut String, frame: &Frame, table: &CsvTable, name: &str, cols: &[usize]) {
    let (lo, hi) = range(cols.iter().flat_map(|c| table.rows.iter().map(move |r| r[*c])));
    let (top, bottom) = (frame.top + MARGIN_Y, frame.bottom());
    frame.axes(svg, &format!("{} (cell index up)", escape(name)), "0", &(cols.len() - 1).to_string());
    let steps = thin(table.times.len(), MAX_COLUMNS);
    let cells = thin(cols.len(), MAX_ROWS);
    let cell_h = (bottom - top) / cells.len() as f64;
    for (s, &i) in steps.iter().enumerate() {
        let x_start = frame.x(table.times[i]);
        let x_end = match steps.get(s + 1) {
            Some(&next) => frame.x(table.times[next]),
            None => frame.x1,
        };
        let w = (x_end - x_start).max(0.5);
        for (r, &j) in cells.iter().enumerate() {
            let v = table.rows[i][cols[j]];
            let y = bottom - (r + 1) as f64 * cell_h;
            let _ = writeln!(
                svg,
                r#"<rect x="{x_start:.2}" y="{y:.2}" width="{w:.2}" height="{cell_h:.2}" fill="{}"/>"#,
                color((v - lo) / (hi - lo))
            );
        }
    }
    // Colour bar.
    let bar_x = frame.x1 + 16.0;
    for k in 0..20 {
        let y = bottom - (k + 1) as f64 * (bottom - top) / 20.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{bar_x:.2}" y="{y:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            (bottom - top) / 20.0,
            color((k as f64 + 0.5) / 20.0)
        );
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, bar_x + 22.0, top + 10.0, num(hi));
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{bottom:.2}">{}</text>"#, bar_x + 22.0, num(lo));
}

pub fn render(table: &CsvTable) -> String {
    let panels = panels(&table.labels);
    let height = PANEL * panels.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let t = range(table.times.iter().copied());
    for (k, panel) in panels.iter().enumerate() {
        let frame = Frame {
            top: k as f64 * PANEL,
            x0: MARGIN_LEFT,
            x1: WIDTH - MARGIN_RIGHT,
            t,
        };
        match panel {
            Panel::Lines(series) => line_panel(&mut svg, &frame, table, series),
            Panel::Heatmap(name, cols) => heatmap_panel(&mut svg, &frame, table, name, cols),
        }
    }
    svg.push_str("</svg>\n");
    svg
}
