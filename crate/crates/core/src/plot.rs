//! Minimal SVG 1.1 charts: polylines with error bars, bar charts and
//! heatmaps. Output is a standalone document string.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// A named line. Points are `(x, y, error)`; an error of 0 draws no bar.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64, f64)>,
}

impl Series {
    pub fn new(name: &str, points: Vec<(f64, f64, f64)>) -> Self {
        Series {
            name: name.to_string(),
            points,
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        W / 2.0,
        escape(title),
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 10.0,
        escape(x_label),
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(y_label),
    );
}

fn nice_max(v: f64) -> f64 {
    if v <= 0.0 || !v.is_finite() {
        return 1.0;
    }
    let mag = 10f64.powf(v.log10().floor());
    for m in [1.0, 2.0, 5.0, 10.0] {
        if v <= m * mag {
            return m * mag;
        }
    }
    10.0 * mag
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 1e4 {
        format!("{:.0}k", v / 1e3)
    } else if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn y_axis(out: &mut String, y_max: f64) {
    let (x0, x1) = (LEFT, W - RIGHT);
    for i in 0..=4 {
        let v = y_max * i as f64 / 4.0;
        let y = H - BOTTOM - (H - TOP - BOTTOM) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r##"<line x1="{x0}" y1="{y:.1}" x2="{x1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            x0 - 6.0,
            y + 4.0,
            fmt_tick(v)
        );
    }
    let _ = writeln!(
        out,
        r#"<line x1="{x0}" y1="{}" x2="{x0}" y2="{}" stroke="black"/><line x1="{x0}" y1="{}" x2="{x1}" y2="{}" stroke="black"/>"#,
        TOP,
        H - BOTTOM,
        H - BOTTOM,
        H - BOTTOM
    );
}

pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut x_min, mut x_max, mut y_top) = (f64::INFINITY, f64::NEG_INFINITY, 0f64);
    for &(x, y, e) in all {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_top = y_top.max(y + e);
    }
    if !x_min.is_finite() {
        (x_min, x_max) = (0.0, 1.0);
    }
    if x_max <= x_min {
        x_max = x_min + 1.0;
    }
    let y_max = nice_max(y_top);
    y_axis(&mut out, y_max);
    let px = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - y / y_max * (H - TOP - BOTTOM);
    for i in 0..=4 {
        let x = x_min + (x_max - x_min) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            px(x),
            H - BOTTOM + 16.0,
            fmt_tick(x)
        );
    }
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y, _)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
        for &(x, y, e) in s.points.iter().filter(|p| p.2 > 0.0) {
            let _ = writeln!(
                out,
                r#"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="{color}"/>"#,
                px(x),
                py((y - e).max(0.0)),
                py(y + e)
            );
        }
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="12" height="4" fill="{color}"/><text x="{}" y="{}">{}</text>"#,
            LEFT + 12.0,
            ly - 6.0,
            LEFT + 30.0,
            ly,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn bar_chart(title: &str, x_label: &str, y_label: &str, labels: &[String], values: &[f64]) -> String {
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    let y_max = nice_max(values.iter().copied().fold(0.0, f64::max));
    y_axis(&mut out, y_max);
    let n = values.len().max(1) as f64;
    let slot = (W - LEFT - RIGHT) / n;
    for (i, (&v, label)) in values.iter().zip(labels).enumerate() {
        let h = v.max(0.0) / y_max * (H - TOP - BOTTOM);
        let x = LEFT + slot * i as f64;
        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="#1f77b4"/><text x="{:.1}" y="{}" text-anchor="middle">{}</text><text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"##,
            x + slot * 0.1,
            H - BOTTOM - h,
            slot * 0.8,
            x + slot / 2.0,
            H - BOTTOM + 16.0,
            escape(label),
            x + slot / 2.0,
            H - BOTTOM - h - 4.0,
            fmt_tick(v)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Rows run top to bottom. Cells are shaded relative to the largest entry
/// of their own row.
pub fn heatmap(title: &str, x_label: &str, y_label: &str, col_labels: &[String], row_labels: &[String], rows: &[[f64; 8]]) -> String {
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    let cols = col_labels.len().max(1) as f64;
    let nrows = rows.len().max(1) as f64;
    let cw = (W - LEFT - RIGHT) / cols;
    let ch = (H - TOP - BOTTOM) / nrows;
    for (r, row) in rows.iter().enumerate() {
        let max = row.iter().copied().fold(0.0, f64::max);
        for (c, &v) in row.iter().enumerate().take(col_labels.len()) {
            let level = if max > 0.0 { v / max } else { 0.0 };
            let shade = (255.0 * (1.0 - level)).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{cw:.1}" height="{ch:.1}" fill="rgb({shade},{shade},255)" stroke="white"/>"#,
                LEFT + cw * c as f64,
                TOP + ch * r as f64
            );
        }
        if let Some(label) = row_labels.get(r) {
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                LEFT - 6.0,
                TOP + ch * (r as f64 + 0.5) + 4.0,
                escape(label)
            );
        }
    }
    for (c, label) in col_labels.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            LEFT + cw * (c as f64 + 0.5),
            H - BOTTOM + 16.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}
