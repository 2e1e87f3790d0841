//! Minimal deterministic SVG line plots.

use std::fmt::Write as _;

use crate::report::fmt_num;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const PAD: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Debug, Default)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    series: Vec<(String, Vec<(f64, f64)>)>,
}

impl LinePlot {
    pub fn new(title: impl Into<String>, x_label: impl Into<String>, y_label: impl Into<String>) -> Self {
        LinePlot { title: title.into(), x_label: x_label.into(), y_label: y_label.into(), series: Vec::new() }
    }

    /// Adds a series; non-finite points are dropped.
    pub fn series(mut self, name: impl Into<String>, x: &[f64], y: &[f64]) -> Self {
        let pts = x.iter().zip(y).filter(|(a, b)| a.is_finite() && b.is_finite()).map(|(a, b)| (*a, *b)).collect();
        self.series.push((name.into(), pts));
        self
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (_, pts) in &self.series {
            for &(x, y) in pts {
                b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
            }
        }
        if !b.0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        if b.1 == b.0 {
            b.1 = b.0 + 1.0;
        }
        if b.3 == b.2 {
            b = (b.0, b.1, b.2 - 0.5, b.3 + 0.5);
        }
        b
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * PAD);
        let py = |y: f64| HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * PAD);
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(
            s,
            r#"<polyline points="{PAD},{PAD} {PAD},{b} {r},{b}" fill="none" stroke="black"/>"#,
            b = HEIGHT - PAD,
            r = WIDTH - PAD
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#, WIDTH / 2.0, HEIGHT - 10.0, escape(&self.x_label));
        let _ = writeln!(s, r#"<text x="12" y="{}" font-size="11" transform="rotate(-90 12 {})">{}</text>"#, HEIGHT / 2.0, HEIGHT / 2.0, escape(&self.y_label));
        for (v, x, anchor) in [(x0, PAD, "start"), (x1, WIDTH - PAD, "end")] {
            let _ = writeln!(s, r#"<text x="{x}" y="{}" text-anchor="{anchor}" font-size="10">{}</text>"#, HEIGHT - PAD + 14.0, fmt_num(v));
        }
        for (v, y) in [(y0, HEIGHT - PAD), (y1, PAD)] {
            let _ = writeln!(s, r#"<text x="{}" y="{y}" text-anchor="end" font-size="10">{}</text>"#, PAD - 4.0, fmt_num(v));
        }
        for (k, (name, pts)) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
            let ly = PAD + 14.0 * k as f64;
            let _ = writeln!(s, r#"<text x="{}" y="{ly}" fill="{color}" font-size="11" text-anchor="end">{}</text>"#, WIDTH - PAD, escape(name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_is_deterministic() {
        let p = LinePlot::new("cosh <theta>", "s", "value").series("a", &[0.0, 1.0, 2.0], &[1.0, f64::NAN, 3.0]);
        let a = p.render();
        assert_eq!(a, p.render());
        assert!(a.contains("&lt;theta&gt;"));
        assert_eq!(a.matches("<polyline").count(), 2);
    }
}
