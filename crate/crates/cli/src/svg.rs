//! Minimal SVG trajectory plot: one polyline per agent, a circle where it
//! starts and a triangle where it ends, axes with tick labels.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 520.0;
const MARGIN: f64 = 64.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Tick spacing of 1, 2 or 5 times a power of ten giving about `target` ticks.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let base = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * base)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * base)
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = tick_step(hi - lo, 5.0);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    y0: f64,
    scale: f64,
}

impl Frame {
    /// Equal scaling on both axes so that directions are not distorted.
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> (Self, [f64; 4]) {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for (x, y) in points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        if xmin > xmax {
            (xmin, xmax, ymin, ymax) = (-1.0, 1.0, -1.0, 1.0);
        }
        let span = (xmax - xmin).max(ymax - ymin).max(1e-9) * 1.08;
        let (cx, cy) = (0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
        let plot_w = WIDTH - 2.0 * MARGIN;
        let plot_h = HEIGHT - 2.0 * MARGIN;
        let scale = plot_w.min(plot_h) / span;
        let half_w = 0.5 * plot_w / scale;
        let half_h = 0.5 * plot_h / scale;
        let bounds = [cx - half_w, cx + half_w, cy - half_h, cy + half_h];
        (
            Self {
                x0: bounds[0],
                y0: bounds[2],
                scale,
            },
            bounds,
        )
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) * self.scale
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) * self.scale
    }
}

/// Renders stacked states `(x₁, y₁, …)`, one per sample, as an SVG document.
pub fn render(title: &str, states: &[Vec<f64>]) -> String {
    let agents = states.first().map_or(0, |s| s.len() / 2);
    let finite = states
        .iter()
        .flat_map(|s| s.chunks_exact(2))
        .filter(|p| p[0].is_finite() && p[1].is_finite())
        .map(|p| (p[0], p[1]));
    let (frame, [xmin, xmax, ymin, ymax]) = Frame::fit(finite);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        MARGIN / 2.0,
        escape(title)
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r##"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        right - left,
        bottom - top
    );
    for x in ticks(xmin, xmax) {
        let p = frame.px(x);
        let _ = writeln!(
            out,
            r##"<line x1="{p:.2}" y1="{bottom}" x2="{p:.2}" y2="{}" stroke="#444"/><text x="{p:.2}" y="{}" text-anchor="middle">{}</text>"##,
            bottom + 5.0,
            bottom + 18.0,
            tick_label(x)
        );
    }
    for y in ticks(ymin, ymax) {
        let p = frame.py(y);
        let _ = writeln!(
            out,
            r##"<line x1="{}" y1="{p:.2}" x2="{left}" y2="{p:.2}" stroke="#444"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            left - 5.0,
            left - 8.0,
            p + 4.0,
            tick_label(y)
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">x</text>"#, WIDTH / 2.0, HEIGHT - 18.0);
    let _ = writeln!(out, r#"<text x="18" y="{}" text-anchor="middle">y</text>"#, HEIGHT / 2.0);

    let _ = writeln!(
        out,
        r#"<clipPath id="plot"><rect x="{left}" y="{top}" width="{}" height="{}"/></clipPath>"#,
        right - left,
        bottom - top
    );
    for agent in 0..agents {
        let color = PALETTE[agent % PALETTE.len()];
        let path: Vec<(f64, f64)> = states
            .iter()
            .map(|s| (s[2 * agent], s[2 * agent + 1]))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| (frame.px(x), frame.py(y)))
            .collect();
        let Some((&(sx, sy), &(ex, ey))) = path.first().zip(path.last()) else {
            continue;
        };
        let points: Vec<String> = path.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            out,
            r#"<polyline clip-path="url(#plot)" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            out,
            r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="5" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        let _ = writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"/>"#,
            ex,
            ey - 6.0,
            ex - 5.5,
            ey + 4.0,
            ex + 5.5,
            ey + 4.0
        );
        let ly = top + 16.0 * (agent as f64 + 1.0);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" fill="{color}">agent {}</text>"#,
            right + 6.0,
            agent + 1
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_steps() {
        assert_eq!(tick_step(10.0, 5.0), 2.0);
        assert_eq!(tick_step(4.0, 5.0), 1.0);
        assert_eq!(tick_step(0.3, 5.0), 0.1);
        assert_eq!(ticks(-2.1, 2.1), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(tick_label(0.5), "0.5");
        assert_eq!(tick_label(-2.0), "-2");
        assert_eq!(tick_label(2.5e6), "2.5e6");
    }

    #[test]
    fn markers_and_paths() {
        let states = vec![vec![0.0, 0.0, 2.0, 0.0], vec![0.5, 0.0, 1.5, 0.0], vec![1.0, 0.0, 1.0, 0.0]];
        let svg = render("a < b", &states);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<polygon").count(), 2);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains(">agent 2<"));
    }

    #[test]
    fn skips_non_finite_samples() {
        let states = vec![vec![0.0, 0.0, 1.0, 1.0], vec![f64::INFINITY, 0.0, 1.0, 1.0]];
        let svg = render("t", &states);
        assert!(!svg.contains("inf") && !svg.contains("NaN"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
