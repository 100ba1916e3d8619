//! Minimal presentational SVG: scatter/line plots and heatmaps.

use std::fmt::Write as _;

use crate::criticality::ScalingFit;

const W: f64 = 640.0;
const H: f64 = 440.0;
const M: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
    log: bool,
}

impl Axes {
    fn fit(points: impl Iterator<Item = (f64, f64)>, log: bool) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for (x, y) in points {
            let (x, y) = if log { (x.log10(), y.log10()) } else { (x, y) };
            if x.is_finite() && y.is_finite() {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if x0 > x1 {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |a: f64, b: f64| if b > a { (b - a) * 0.05 } else { 0.5 };
        let (px, py) = (pad(x0, x1), pad(y0, y1));
        Self {
            x: (x0 - px, x1 + px),
            y: (y0 - py, y1 + py),
            log,
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (x, y) = if self.log { (x.log10(), y.log10()) } else { (x, y) };
        let sx = M + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * M);
        let sy = H - M - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * M);
        (sx, sy)
    }
}

fn frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str, axes: &Axes) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<rect x="{M}" y="{M}" width="{}" height="{}" fill="none" stroke="black"/>
<text x="{}" y="30" text-anchor="middle" font-size="14">{title}</text>
<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>
<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{ylabel}</text>
"#,
        W - 2.0 * M,
        H - 2.0 * M,
        W / 2.0,
        W / 2.0,
        H - 15.0,
        H / 2.0,
        H / 2.0
    );
    let label = |v: f64| if axes.log { format!("1e{v:.1}") } else { format!("{v:.3}") };
    for (v, anchor, x, y) in [
        (axes.x.0, "start", M, H - M + 15.0),
        (axes.x.1, "end", W - M, H - M + 15.0),
    ] {
        let _ = writeln!(out, r#"<text x="{x}" y="{y}" text-anchor="{anchor}">{}</text>"#, label(v));
    }
    for (v, y) in [(axes.y.0, H - M), (axes.y.1, M + 10.0)] {
        let _ = writeln!(out, r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#, M - 4.0, label(v));
    }
}

/// Log-log scatter with an optional power-law fit line over its window.
pub fn loglog(title: &str, xlabel: &str, ylabel: &str, points: &[(f64, f64)], fit: Option<&ScalingFit>) -> String {
    let usable: Vec<(f64, f64)> = points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0).collect();
    let axes = Axes::fit(usable.iter().copied(), true);
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, &axes);
    for &(x, y) in &usable {
        let (sx, sy) = axes.map(x, y);
        let _ = writeln!(out, r#"<circle cx="{sx:.2}" cy="{sy:.2}" r="3" fill="{}"/>"#, PALETTE[0]);
    }
    if let Some(f) = fit {
        let at = |x: f64| (f.log_amplitude + f.exponent * x.ln()).exp();
        let (a, b) = (axes.map(f.window.0, at(f.window.0)), axes.map(f.window.1, at(f.window.1)));
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="1.5"/>
<text x="{}" y="{}" text-anchor="end">slope {:.3}</text>"#,
            a.0,
            a.1,
            b.0,
            b.1,
            W - M - 5.0,
            M + 15.0,
            f.exponent
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Linear-axis line plot of several named series.
pub fn lines(title: &str, xlabel: &str, ylabel: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let axes = Axes::fit(series.iter().flat_map(|s| s.1.iter().copied()), false);
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, &axes);
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (sx, sy) = axes.map(x, y);
                format!("{sx:.2},{sy:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>
<text x="{}" y="{}" fill="{color}">{name}</text>"#,
            path.join(" "),
            M + 8.0,
            M + 16.0 * (k + 1) as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap of `values[row][col]` with rows along y; at most `max_cells` per
/// axis are drawn (nearest-sample decimation).
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, values: &[Vec<f64>], max_cells: usize) -> String {
    let rows = values.len();
    let cols = values.first().map_or(0, Vec::len);
    let axes = Axes {
        x: (0.0, 1.0),
        y: (0.0, 1.0),
        log: false,
    };
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, &axes);
    if rows == 0 || cols == 0 {
        out.push_str("</svg>\n");
        return out;
    }
    let (nr, nc) = (rows.min(max_cells), cols.min(max_cells));
    let vmax = values.iter().flatten().copied().fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
    let (cw, ch) = ((W - 2.0 * M) / nc as f64, (H - 2.0 * M) / nr as f64);
    for r in 0..nr {
        let src_r = r * rows / nr;
        for c in 0..nc {
            let v = values[src_r][c * cols / nc] / vmax;
            let level = (255.0 * (1.0 - v.clamp(0.0, 1.0))) as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb(255,{level},{level})"/>"#,
                M + c as f64 * cw,
                M + r as f64 * ch,
                cw + 0.3,
                ch + 0.3
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_are_closed() {
        let fit = ScalingFit {
            exponent: -1.5,
            log_amplitude: 0.0,
            r_squared: 1.0,
            window: (1e-6, 1e-4),
            n_points: 3,
        };
        let a = loglog("t", "x", "y", &[(1e-6, 1.0), (1e-5, 2.0), (0.0, 1.0)], Some(&fit));
        let b = lines("t", "x", "y", &[("s".into(), vec![(0.0, 1.0), (1.0, 2.0)])]);
        let c = heatmap("t", "x", "y", &[vec![0.0, 1.0], vec![2.0, 3.0]], 10);
        for doc in [a, b, c] {
            assert!(doc.starts_with("<svg") && doc.trim_end().ends_with("</svg>"));
            assert!(!doc.contains("NaN"));
        }
    }
}
