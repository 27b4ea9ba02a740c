//! Minimal static SVG charts: horizontal bars, scatter points and polylines.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 110.0;
const MARGIN: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"11\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

/// Horizontal bar chart, first bar on top.
pub fn bar_chart(title: &str, bars: &[(String, f64)]) -> String {
    let mut out = header(title);
    let max = bars.iter().map(|b| b.1).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let slot = (HEIGHT - 2.0 * MARGIN) / bars.len().max(1) as f64;
    let span = WIDTH - MARGIN_LEFT - MARGIN;
    for (k, (label, v)) in bars.iter().enumerate() {
        let y = MARGIN + k as f64 * slot;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n<rect x=\"{MARGIN_LEFT}\" y=\"{:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#3b6ea5\"/>",
            MARGIN_LEFT - 6.0,
            y + slot * 0.7,
            escape(label),
            y + slot * 0.1,
            span * v.max(0.0) / max,
            slot * 0.8
        );
    }
    out.push_str("</svg>\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    /// Colour position in [0, 1], light to dark.
    pub shade: f64,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let range = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, hi + 0.5)
            }
        };
        let (x0, x1) = range(&mut xs.clone());
        let (y0, y1) = range(&mut ys.clone());
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str) {
        let _ = writeln!(
            out,
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
             <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN}\" x2=\"{MARGIN_LEFT}\" y2=\"{b}\" stroke=\"black\"/>\n\
             <text x=\"{cx}\" y=\"{ly}\" text-anchor=\"middle\">{xl}</text>\n\
             <text x=\"14\" y=\"{cy}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {cy})\">{yl}</text>\n\
             <text x=\"{MARGIN_LEFT}\" y=\"{ly}\">{x0:.2}</text>\n<text x=\"{r}\" y=\"{ly}\" text-anchor=\"end\">{x1:.2}</text>\n\
             <text x=\"{tx}\" y=\"{b}\" text-anchor=\"end\">{y0:.2}</text>\n<text x=\"{tx}\" y=\"{t}\" text-anchor=\"end\">{y1:.2}</text>",
            b = HEIGHT - MARGIN,
            r = WIDTH - MARGIN,
            t = MARGIN + 8.0,
            cx = (MARGIN_LEFT + WIDTH - MARGIN) / 2.0,
            cy = HEIGHT / 2.0,
            ly = HEIGHT - MARGIN + 16.0,
            tx = MARGIN_LEFT - 4.0,
            xl = escape(x_label),
            yl = escape(y_label),
            x0 = self.x0,
            x1 = self.x1,
            y0 = self.y0,
            y1 = self.y1,
        );
    }
}

fn shade_colour(s: f64) -> String {
    let s = s.clamp(0.0, 1.0);
    let c = |light: f64, dark: f64| (light + s * (dark - light)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(190.0, 20.0), c(215.0, 50.0), c(240.0, 120.0))
}

/// Scatter plot with an optional overlaid polyline.
pub fn scatter(title: &str, x_label: &str, y_label: &str, points: &[Point], line: &[(f64, f64)]) -> String {
    let frame = Frame::new(
        points.iter().map(|p| p.x).chain(line.iter().map(|l| l.0)),
        points.iter().map(|p| p.y).chain(line.iter().map(|l| l.1)),
    );
    let mut out = header(title);
    frame.axes(&mut out, x_label, y_label);
    for p in points {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"{}\"/>",
            frame.px(p.x),
            frame.py(p.y),
            shade_colour(p.shade)
        );
    }
    if !line.is_empty() {
        let pts: Vec<String> = line.iter().map(|&(x, y)| format!("{:.1},{:.1}", frame.px(x), frame.py(y))).collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\"/>",
            pts.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One row of points per label, x the attribution, colour the feature quantile.
pub fn beeswarm(title: &str, rows: &[(String, Vec<(f64, f64)>)]) -> String {
    let xs = rows.iter().flat_map(|r| r.1.iter().map(|p| p.0));
    let frame = Frame::new(xs.clone(), std::iter::once(0.0).chain(std::iter::once(rows.len() as f64)));
    let mut out = header(title);
    frame.axes(&mut out, "SHAP value", "");
    for (k, (label, pts)) in rows.iter().enumerate() {
        let yc = rows.len() as f64 - k as f64 - 0.5;
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            MARGIN_LEFT - 6.0,
            frame.py(yc) + 4.0,
            escape(label)
        );
        for (i, &(x, q)) in pts.iter().enumerate() {
            // Deterministic vertical jitter.
            let jitter = ((i * 37 % 17) as f64 / 16.0 - 0.5) * 0.6;
            let _ = writeln!(
                out,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2\" fill=\"{}\"/>",
                frame.px(x),
                frame.py(yc + jitter),
                shade_colour(q)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
