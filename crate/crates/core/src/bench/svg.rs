use std::fmt::Write as _;
use std::path::Path;

use super::{BenchError, Heatmap, LabeledSeries};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: [f64; 4] = [40.0, 150.0, 60.0, 80.0]; // top, right, bottom, left
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axis_labels(out: &mut String, x_label: &str, y_label: &str) {
    let [top, right, bottom, left] = MARGIN;
    let cx = left + (WIDTH - left - right) / 2.0;
    let cy = top + (HEIGHT - top - bottom) / 2.0;
    let _ = writeln!(out, r#"<text x="{cx}" y="{}" text-anchor="middle">{}</text>"#, HEIGHT - 15.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="20" y="{cy}" text-anchor="middle" transform="rotate(-90 20 {cy})">{}</text>"#,
        escape(y_label)
    );
}

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / n as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= n as f64).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

/// Mean-per-round line chart with a ±1 std band for each series.
pub fn line_chart_svg(series: &[LabeledSeries], title: &str, x_label: &str, y_label: &str) -> String {
    let [top, right, bottom, left] = MARGIN;
    let (pw, ph) = (WIDTH - left - right, HEIGHT - top - bottom);
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.round as f64);
        x1 = x1.max(p.round as f64);
        y0 = y0.min(p.mean - p.std);
        y1 = y1.max(p.mean + p.std);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = (y1 - y0) * 0.05;
    let (y0, y1) = (y0 - pad, y1 + pad);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (y1 - y) / (y1 - y0) * ph;

    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(out, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in nice_ticks(x0, x1, 8) {
        let x = sx(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/>"#,
            top + ph,
            top + ph + 5.0
        );
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{t}</text>"#, top + ph + 18.0);
    }
    for t in nice_ticks(y0, y1, 6) {
        let y = sy(t);
        let _ = writeln!(out, r##"<line x1="{left}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/>"##, left + pw);
        let _ =
            writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, y + 4.0, fmt_tick(t));
    }
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.points.is_empty() {
            continue;
        }
        let upper: Vec<String> =
            s.points.iter().map(|p| format!("{:.1},{:.1}", sx(p.round as f64), sy(p.mean + p.std))).collect();
        let lower: Vec<String> =
            s.points.iter().rev().map(|p| format!("{:.1},{:.1}", sx(p.round as f64), sy(p.mean - p.std))).collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> =
            s.points.iter().map(|p| format!("{:.1},{:.1}", sx(p.round as f64), sy(p.mean))).collect();
        let _ =
            writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" "));
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="3"/>"#,
            lx + 18.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 24.0, ly + 4.0, escape(&s.label));
    }
    axis_labels(&mut out, x_label, y_label);
    out.push_str("</svg>\n");
    out
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// ε on the horizontal axis, K on the vertical, mean cumulative reward as colour.
pub fn heatmap_svg(map: &Heatmap, title: &str) -> String {
    let [top, right, bottom, left] = MARGIN;
    let (pw, ph) = (WIDTH - left - right, HEIGHT - top - bottom);
    let (ne, nk) = (map.eps_values.len().max(1), map.k_values.len().max(1));
    let (cw, ch) = (pw / ne as f64, ph / nk as f64);
    let vals = map.cells.iter().map(|c| c.mean_cumulative_reward);
    let lo = vals.clone().fold(f64::INFINITY, f64::min);
    let hi = vals.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let best = (!map.cells.is_empty()).then(|| map.best());

    let mut out = String::new();
    header(&mut out, title);
    for c in &map.cells {
        let i = map.eps_values.iter().position(|&e| e == c.epsilon).unwrap_or(0);
        let j = map.k_values.iter().position(|&k| k == c.k).unwrap_or(0);
        let x = left + i as f64 * cw;
        let y = top + (nk - 1 - j) as f64 * ch;
        let u = (c.mean_cumulative_reward - lo) / span;
        let (r, g, b) = ((255.0 * (1.0 - u)) as u8, (90.0 + 120.0 * u) as u8, (80.0 + 100.0 * u) as u8);
        let stroke = if best == Some(c) { r#" stroke="black" stroke-width="3""# } else { "" };
        let _ = writeln!(
            out,
            r#"<rect x="{x:.1}" y="{y:.1}" width="{cw:.1}" height="{ch:.1}" fill="rgb({r},{g},{b})"{stroke}/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{:.2}</text>"#,
            x + cw / 2.0,
            y + ch / 2.0 + 4.0,
            c.mean_cumulative_reward
        );
    }
    for (i, e) in map.eps_values.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{e}</text>"#,
            left + (i as f64 + 0.5) * cw,
            top + ph + 18.0
        );
    }
    for (j, k) in map.k_values.iter().enumerate() {
        let y = top + (nk - 1 - j) as f64 * ch + ch / 2.0 + 4.0;
        let _ = writeln!(out, r#"<text x="{}" y="{y:.1}" text-anchor="end">{k}</text>"#, left - 6.0);
    }
    axis_labels(&mut out, "epsilon", "K");
    out.push_str("</svg>\n");
    out
}

pub fn write_svg(svg: &str, path: impl AsRef<Path>) -> Result<(), BenchError> {
    let path = path.as_ref();
    std::fs::write(path, svg).map_err(|e| BenchError::io(path, e))
}
