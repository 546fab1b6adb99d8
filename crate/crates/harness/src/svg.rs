//! Self-contained SVG line plots for the experiment reports.
//!
//! Two chart styles: log-log rate plots (decade grid) and linear time
//! traces. No external assets; everything is inline markup sized for a
//! 720x540 viewport.

use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
    pub markers: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, dashed: false, markers: true }
    }

    pub fn fit(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points, dashed: true, markers: false }
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

const W: f64 = 720.0;
const H: f64 = 540.0;
const ML: f64 = 70.0;
const MR: f64 = 20.0;
const MT: f64 = 40.0;
const MB: f64 = 50.0;

impl Frame {
    fn px(&self, x: f64) -> f64 {
        ML + (x - self.x0) / (self.x1 - self.x0) * (W - ML - MR)
    }

    fn py(&self, y: f64) -> f64 {
        H - MB - (y - self.y0) / (self.y1 - self.y0) * (H - MT - MB)
    }
}

fn bounds(series: &[Series], log: bool) -> Frame {
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            let (x, y) = if log { (x.log10(), y.log10()) } else { (x, y) };
            if x.is_finite() && y.is_finite() {
                x0 = x0.min(x);
                x1 = x1.max(x);
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let (dx, dy) = (0.06 * (x1 - x0), 0.08 * (y1 - y0));
    Frame { x0: x0 - dx, x1: x1 + dx, y0: y0 - dy, y1: y1 + dy }
}

fn ticks(a: f64, b: f64, log: bool) -> Vec<f64> {
    if log {
        let lo = a.ceil() as i64;
        let hi = b.floor() as i64;
        if lo <= hi && (hi - lo) <= 12 {
            return (lo..=hi).map(|k| k as f64).collect();
        }
    }
    let span = b - a;
    let step = 10f64.powf(span.log10().floor());
    let step = if span / step > 6.0 {
        step * 2.0
    } else if span / step < 3.0 {
        step / 2.0
    } else {
        step
    };
    let mut t = (a / step).ceil() * step;
    let mut out = Vec::new();
    while t <= b + 1e-12 * span {
        out.push(t);
        t += step;
    }
    out
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{v:.0}")
    } else if v == 0.0 {
        "0".into()
    } else if v.abs() >= 0.01 && v.abs() < 10000.0 {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

fn render(title: &str, xlabel: &str, ylabel: &str, series: &[Series], log: bool) -> String {
    let f = bounds(series, log);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        W / 2.0,
        title
    );
    for tx in ticks(f.x0, f.x1, log) {
        let px = f.px(tx);
        let _ = writeln!(
            s,
            "<line x1=\"{px:.1}\" y1=\"{MT}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#e0e0e0\"/>",
            H - MB
        );
        let _ = writeln!(
            s,
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">{}</text>",
            H - MB + 16.0,
            tick_label(tx, log)
        );
    }
    for ty in ticks(f.y0, f.y1, log) {
        let py = f.py(ty);
        let _ = writeln!(
            s,
            "<line x1=\"{ML}\" y1=\"{py:.1}\" x2=\"{:.1}\" y2=\"{py:.1}\" stroke=\"#e0e0e0\"/>",
            W - MR
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"11\">{}</text>",
            ML - 6.0,
            py + 4.0,
            tick_label(ty, log)
        );
    }
    let _ = writeln!(
        s,
        "<rect x=\"{ML}\" y=\"{MT}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>",
        W - ML - MR,
        H - MT - MB
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">{}</text>",
        W / 2.0,
        H - 12.0,
        xlabel
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 {:.1})\">{}</text>",
        H / 2.0,
        H / 2.0,
        ylabel
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for (j, &(x, y)) in ser.points.iter().enumerate() {
            let (x, y) = if log { (x.log10(), y.log10()) } else { (x, y) };
            if !x.is_finite() || !y.is_finite() {
                continue;
            }
            let _ = write!(path, "{}{:.1},{:.1} ", if j == 0 { "M" } else { "L" }, f.px(x), f.py(y));
        }
        let dash = if ser.dashed { " stroke-dasharray=\"6,4\"" } else { "" };
        let _ = writeln!(
            s,
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>"
        );
        if ser.markers {
            for &(x, y) in &ser.points {
                let (x, y) = if log { (x.log10(), y.log10()) } else { (x, y) };
                if x.is_finite() && y.is_finite() {
                    let _ = writeln!(
                        s,
                        "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>",
                        f.px(x),
                        f.py(y)
                    );
                }
            }
        }
        let ly = MT + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
            ML + 10.0,
            ML + 34.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\">{}</text>",
            ML + 40.0,
            ly + 4.0,
            ser.label
        );
    }
    let _ = writeln!(s, "</svg>");
    s
}

pub fn write_loglog(
    path: impl AsRef<Path>,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
) -> Result<()> {
    std::fs::write(path, render(title, xlabel, ylabel, series, true))?;
    Ok(())
}

pub fn write_linear(
    path: impl AsRef<Path>,
    title: &str,
    xlabel: &str,
    ylabel: &str,
    series: &[Series],
) -> Result<()> {
    std::fs::write(path, render(title, xlabel, ylabel, series, false))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rendering_is_self_contained_markup() {
        let s = vec![
            Series::line("data", vec![(0.1, 0.3), (0.05, 0.21), (0.025, 0.15)]),
            Series::fit("fit", vec![(0.1, 0.3), (0.025, 0.15)]),
        ];
        let svg = render("rate", "eps", "value", &s, true);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(!svg.contains("http://") || svg.contains("xmlns"));
    }

    #[test]
    fn degenerate_ranges_do_not_panic() {
        let s = vec![Series::line("flat", vec![(1.0, 2.0), (1.0, 2.0)])];
        let svg = render("t", "x", "y", &s, false);
        assert!(svg.contains("</svg>"));
    }
}
