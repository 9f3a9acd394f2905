//! SVG heat maps of vertex functions.
//!
//! Each face is filled with the color of the mean of its four vertex values.
//! The map has 256 steps over `[min u, max u]`: step `k` runs linearly from
//! blue `#3b4cc0` (k = 0) through white `#f7f7f7` (k = 128) to red `#b40426`
//! (k = 255). A constant function uses step 0 everywhere.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use dca_core::QuadLattice;

const LOW: [f64; 3] = [59.0, 76.0, 192.0];
const MID: [f64; 3] = [247.0, 247.0, 247.0];
const HIGH: [f64; 3] = [180.0, 4.0, 38.0];
const SIZE: f64 = 800.0;

/// RGB color of step `k` in `0..256`.
pub fn colormap(k: u8) -> [u8; 3] {
    let (a, b, t) = if k < 128 { (LOW, MID, k as f64 / 128.0) } else { (MID, HIGH, (k as f64 - 128.0) / 127.0) };
    [0, 1, 2].map(|i| (a[i] + t * (b[i] - a[i])).round() as u8)
}

/// Step index of `v` on `[lo, hi]`.
pub fn color_step(v: f64, lo: f64, hi: f64) -> u8 {
    if hi <= lo {
        return 0;
    }
    ((v - lo) / (hi - lo) * 256.0).floor().clamp(0.0, 255.0) as u8
}

pub fn render_svg(l: &QuadLattice, u: &[f64], labels: bool) -> String {
    let pts = l.points();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let s = SIZE / span;
    let pad = 40.0;
    let (w, h) = ((x1 - x0) * s + 2.0 * pad, (y1 - y0) * s + 2.0 * pad);
    let map = |x: f64, y: f64| (pad + (x - x0) * s, pad + (y1 - y) * s);
    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"##
    );
    let _ = writeln!(out, r##"<g stroke="#404040" stroke-width="0.5">"##);
    for face in l.faces() {
        let v = face.vertices();
        let mean = v.iter().map(|&i| u[i]).sum::<f64>() / 4.0;
        let c = colormap(color_step(mean, lo, hi));
        let pts: Vec<String> = v
            .iter()
            .map(|&i| {
                let (x, y) = map(pts[i].x, pts[i].y);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(out, r##"<polygon points="{}" fill="rgb({},{},{})"/>"##, pts.join(" "), c[0], c[1], c[2]);
    }
    let _ = writeln!(out, "</g>");
    if labels {
        let _ = writeln!(out, r##"<g font-family="sans-serif" font-size="12" fill="black">"##);
        for (i, p) in pts.iter().enumerate() {
            let (x, y) = map(p.x, p.y);
            let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="2"/>"##);
            let _ = writeln!(out, r##"<text x="{:.2}" y="{:.2}">{}</text>"##, x + 4.0, y - 4.0, label(u[i]));
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

/// Up to four decimals, trailing zeros trimmed.
fn label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

pub fn emit_svg(l: &QuadLattice, u: &[f64], labels: bool, path: impl AsRef<Path>) -> io::Result<()> {
    std::fs::write(path, render_svg(l, u, labels))
}
