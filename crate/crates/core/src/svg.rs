//! Minimal SVG emission for 2D projections of value clouds.

use std::fmt::Write;

/// Number with 9 significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{:.8e}", x);
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let mant = mant.trim_end_matches('0').trim_end_matches('.');
    if exp == "0" { mant.to_string() } else { format!("{mant}e{exp}") }
}

#[derive(Clone, Debug, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Scatter points in value space.
    pub points: Vec<(f64, f64)>,
    /// Polylines in value space.
    pub curves: Vec<Vec<(f64, f64)>>,
}

impl Plot {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let all = self.points.iter().chain(self.curves.iter().flatten());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return (-1.0, 1.0, -1.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            let w = (hi - lo).max(1e-3);
            (lo - 0.08 * w, hi + 0.08 * w)
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        (x0, x1, y0, y1)
    }

    /// SVG document in value-space coordinates (y flipped so that it points
    /// up) with a fitted viewBox.
    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let (w, h) = (x1 - x0, y1 - y0);
        let r = 0.006 * w.max(h);
        let stroke = 0.003 * w.max(h);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="640" height="480" preserveAspectRatio="none">"#,
            num(x0),
            num(-y1),
            num(w),
            num(h)
        );
        let _ = writeln!(out, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(out, "<desc>x: {}; y: {}</desc>", escape(&self.x_label), escape(&self.y_label));
        let _ = writeln!(
            out,
            r#"<g stroke="gray" stroke-width="{}"><line x1="{}" y1="0" x2="{}" y2="0"/><line x1="0" y1="{}" x2="0" y2="{}"/></g>"#,
            num(stroke / 2.0),
            num(x0),
            num(x1),
            num(-y1),
            num(-y0)
        );
        let _ = writeln!(out, r#"<g fill="steelblue">"#);
        for &(x, y) in &self.points {
            let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}"/>"#, num(x), num(-y), num(r));
        }
        let _ = writeln!(out, "</g>");
        for c in &self.curves {
            let pts: Vec<String> = c.iter().map(|&(x, y)| format!("{},{}", num(x), num(-y))).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="crimson" stroke-width="{}" points="{}"/>"#,
                num(stroke),
                pts.join(" ")
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
