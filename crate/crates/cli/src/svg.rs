//! Disk plot of the trajectory tails.

use std::fmt::Write;

use polybounds_core::C64;

/// One tail of a family member, in sample order.
pub struct Tail {
    pub points: Vec<C64>,
    /// Tail running into the loop (`true`) or leaving it.
    pub leading: bool,
}

const SIZE: f64 = 600.0;
const LEADING: &str = "#c0392b";
const TRAILING: &str = "#2471a3";

fn to_px(p: C64) -> (f64, f64) {
    let half = SIZE / 2.0;
    (half + p.re * half / 1.1, half - p.im * half / 1.1)
}

fn polyline(out: &mut String, points: &[C64], color: &str, opacity: f64) {
    if points.len() < 2 {
        return;
    }
    let coords: Vec<String> = points
        .iter()
        .map(|&p| {
            let (x, y) = to_px(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="{color}" stroke-width="0.8" stroke-opacity="{opacity}" points="{}"/>"#,
        coords.join(" ")
    );
}

/// Unit circle, tails (mirror images fainter) and the optional crystal point.
pub fn render(title: &str, tails: &[Tail], crystal: Option<C64>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (cx, cy) = to_px(C64::new(0.0, 0.0));
    let r = SIZE / 2.0 / 1.1;
    let _ = writeln!(
        out,
        r#"<circle cx="{cx}" cy="{cy}" r="{r:.2}" fill="none" stroke="black" stroke-width="1.2"/>"#
    );
    for tail in tails {
        let color = if tail.leading { LEADING } else { TRAILING };
        let mirrored: Vec<C64> = tail.points.iter().map(|p| p.conj()).collect();
        polyline(&mut out, &mirrored, color, 0.35);
        polyline(&mut out, &tail.points, color, 0.9);
    }
    if let Some(p) = crystal {
        let (x, y) = to_px(p);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="14" font-family="sans-serif">c1</text>"#,
            x + 6.0,
            y - 6.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="10" y="20" font-size="14" font-family="sans-serif">{title}</text>"#
    );
    out.push_str("</svg>\n");
    out
}
