//! Minimal SVG line plots with a logarithmic y axis.

use std::fmt::Write as _;
use std::path::Path;

use super::emit::write_atomic;
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD_L: f64 = 70.0;
const PAD_R: f64 = 150.0;
const PAD_T: f64 = 40.0;
const PAD_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#555555"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render series to SVG text. Non-positive or non-finite y values are skipped.
pub fn render_log_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let pts = || series.iter().flat_map(|s| s.x.iter().zip(&s.y)).filter(|(x, y)| x.is_finite() && y.is_finite() && **y > 0.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (&x, &y) in pts() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |x: f64| PAD_L + (x - x0) / (x1 - x0) * (W - PAD_L - PAD_R);
    let py = |ly: f64| H - PAD_B - (ly - y0) / (y1 - y0) * (H - PAD_T - PAD_B);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (PAD_L + W - PAD_R) / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{PAD_L}" y="{PAD_T}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - PAD_L - PAD_R,
        H - PAD_T - PAD_B
    );
    for d in (y0 as i32)..=(y1 as i32) {
        let y = py(d as f64);
        let _ = writeln!(s, r##"<line x1="{PAD_L}" x2="{}" y1="{y}" y2="{y}" stroke="#ddd"/>"##, W - PAD_R);
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">1e{d}</text>"#, PAD_L - 6.0, y + 4.0);
    }
    let mut xs: Vec<f64> = pts().map(|(x, _)| *x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    for x in xs {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(x), H - PAD_B + 16.0, x);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (PAD_L + W - PAD_R) / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (PAD_T + H - PAD_B) / 2.0,
        escape(ylabel)
    );
    for (i, ser) in series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        let path: Vec<String> = ser
            .x
            .iter()
            .zip(&ser.y)
            .filter(|(x, y)| x.is_finite() && y.is_finite() && **y > 0.0)
            .map(|(&x, &y)| format!("{:.2},{:.2}", px(x), py(y.log10())))
            .collect();
        if !path.is_empty() {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#, path.join(" "));
            for p in &path {
                let (a, b) = p.split_once(',').unwrap();
                let _ = writeln!(s, r#"<circle cx="{a}" cy="{b}" r="3" fill="{c}"/>"#);
            }
        }
        let ly = PAD_T + 10.0 + 18.0 * i as f64;
        let lx = W - PAD_R + 10.0;
        let _ = writeln!(s, r#"<line x1="{lx}" x2="{}" y1="{ly}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_log_plot(path: &Path, title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> Result<()> {
    write_atomic(path, render_log_plot(title, xlabel, ylabel, series).as_bytes())
}
