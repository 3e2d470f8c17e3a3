use std::fmt::Write;

use super::PageResult;
use crate::inkml::format_number;

fn hsl(hue: f64, lightness: f64) -> String {
    format!("hsl({},90%,{}%)", hue.round() as i64, lightness.round() as i64)
}

fn num(v: f64) -> String {
    format_number(v).unwrap_or_else(|| "0".into())
}

/// SVG of the page ink: within each word, stroke hues run from red (first)
/// to violet (last); each stroke's segments go from dark to light.
/// `background` is an optional image href drawn underneath.
pub fn svg_overlay(result: &PageResult, width: u32, height: u32, background: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    if let Some(href) = background {
        let href = href.replace('&', "&amp;").replace('"', "&quot;").replace('<', "&lt;");
        let _ = writeln!(s, r#"  <image x="0" y="0" width="{width}" height="{height}" xlink:href="{href}"/>"#);
    }
    let strokes = result.ink.strokes();
    for (wi, rec) in result.records.iter().enumerate() {
        if rec.strokes.is_empty() {
            continue;
        }
        let _ = writeln!(s, r#"  <g id="word-{wi}" fill="none" stroke-linecap="round" stroke-width="2">"#);
        let k = rec.strokes.len();
        for (si, stroke) in strokes[rec.strokes.clone()].iter().enumerate() {
            let hue = if k > 1 { 270.0 * si as f64 / (k - 1) as f64 } else { 0.0 };
            let pts = stroke.points();
            if pts.len() == 1 {
                let _ = writeln!(
                    s,
                    r#"    <circle cx="{}" cy="{}" r="1" fill="{}"/>"#,
                    num(pts[0].x),
                    num(pts[0].y),
                    hsl(hue, 30.0)
                );
                continue;
            }
            let segs = pts.len() - 1;
            for (i, w) in pts.windows(2).enumerate() {
                let light = if segs > 1 { 30.0 + 40.0 * i as f64 / (segs - 1) as f64 } else { 30.0 };
                let _ = writeln!(
                    s,
                    r#"    <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}"/>"#,
                    num(w[0].x),
                    num(w[0].y),
                    num(w[1].x),
                    num(w[1].y),
                    hsl(hue, light)
                );
            }
        }
        s.push_str("  </g>\n");
    }
    s.push_str("</svg>\n");
    s
}
