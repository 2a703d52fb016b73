//! CSV tables and minimal SVG plots.

use std::fmt::Write as _;
use std::io::{self, Write};

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 || x.is_nan() || x.is_infinite() {
        return format!("{x}");
    }
    let magnitude = x.abs();
    if (1e-4..1e15).contains(&magnitude) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Number(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(x) => Some(*x),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Number(x)
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

/// Column table with a `#`-prefixed header block.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.header.push((key.into(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_number().unwrap_or(f64::NAN)).collect())
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        for (key, value) in &self.header {
            writeln!(out, "# {key}: {value}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad"];

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

/// Range padded so that a constant series still spans a box.
fn span(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return None;
    }
    if hi > lo {
        Some((lo, hi))
    } else {
        let pad = if lo == 0.0 { 1.0 } else { 0.5 * lo.abs() };
        Some((lo - pad, hi + pad))
    }
}

fn axes(s: &mut String, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) {
    let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for (value, px, anchor) in [(x.0, x0, "start"), (x.1, x1, "end")] {
        let _ = writeln!(
            s,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="{anchor}">{}</text>"#,
            y0 + 16.0,
            format_tick(value)
        );
    }
    for (value, py) in [(y.0, y0), (y.1, y1 + 10.0)] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{py:.1}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            format_tick(value)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_owned()
    } else if (1e-2..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.3e}")
    }
}

pub struct LinePlot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x: &'a [f64],
    pub series: Vec<(&'a str, Vec<f64>)>,
}

impl LinePlot<'_> {
    /// Non-finite samples break the polyline.
    pub fn to_svg(&self) -> String {
        let mut s = svg_open(self.title);
        let xr = span(self.x.iter().copied()).unwrap_or((0.0, 1.0));
        let yr = span(self.series.iter().flat_map(|(_, ys)| ys.iter().copied())).unwrap_or((0.0, 1.0));
        axes(&mut s, self.x_label, self.y_label, xr, yr);
        let px = |x: f64| MARGIN_LEFT + (x - xr.0) / (xr.1 - xr.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT);
        let py = |y: f64| HEIGHT - MARGIN_BOTTOM - (y - yr.0) / (yr.1 - yr.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);
        for (k, (name, ys)) in self.series.iter().enumerate() {
            let colour = PALETTE[k % PALETTE.len()];
            let mut runs: Vec<Vec<String>> = vec![Vec::new()];
            for (&x, &y) in self.x.iter().zip(ys) {
                if x.is_finite() && y.is_finite() {
                    runs.last_mut().unwrap().push(format!("{:.2},{:.2}", px(x), py(y)));
                } else if !runs.last().unwrap().is_empty() {
                    runs.push(Vec::new());
                }
            }
            for run in runs.iter().filter(|r| !r.is_empty()) {
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
                    run.join(" ")
                );
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" fill="{colour}">{}</text>"#,
                MARGIN_LEFT + 8.0,
                MARGIN_TOP + 16.0 + 14.0 * k as f64,
                escape(name)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Blue below zero, white at zero, red above; symmetric in `limit`.
pub fn diverging_colour(value: f64, limit: f64) -> String {
    let t = if limit > 0.0 { (value / limit).clamp(-1.0, 1.0) } else { 0.0 };
    let fade = |c: f64| (255.0 - (255.0 - c) * t.abs()).round() as u8;
    let (r, g, b) = if t < 0.0 {
        (fade(33.0), fade(102.0), fade(172.0))
    } else {
        (fade(178.0), fade(24.0), fade(43.0))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

pub struct Heatmap<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `y` outer.
    pub values: &'a [f64],
}

impl Heatmap<'_> {
    pub fn to_svg(&self) -> String {
        let mut s = svg_open(self.title);
        let limit = self.values.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { m });
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let (cw, ch) = (plot_w / self.nx as f64, plot_h / self.ny as f64);
        for j in 0..self.ny {
            for i in 0..self.nx {
                let v = self.values[j * self.nx + i];
                let colour = if v.is_finite() { diverging_colour(v, limit) } else { "#808080".to_owned() };
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{colour}"/>"#,
                    MARGIN_LEFT + i as f64 * cw,
                    HEIGHT - MARGIN_BOTTOM - (j + 1) as f64 * ch,
                    cw + 0.05,
                    ch + 0.05
                );
            }
        }
        axes(&mut s, self.x_label, self.y_label, self.x_range, self.y_range);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">|max| = {}</text>"#,
            WIDTH - MARGIN_RIGHT,
            MARGIN_TOP - 6.0,
            format_tick(limit)
        );
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1 + 0.2, 1.0 / 3.0, 1e-17, -2.5e20, 123456.789, 5e-324, 0.0, -0.0] {
            assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(1.5e-7), "1.5e-7");
    }

    #[test]
    fn colour_map_is_centred() {
        assert_eq!(diverging_colour(0.0, 1.0), "#ffffff");
        assert_eq!(diverging_colour(1.0, 1.0), "#b2182b");
        assert_eq!(diverging_colour(-1.0, 1.0), "#2166ac");
    }
}
