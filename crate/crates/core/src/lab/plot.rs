//! Standalone SVG line plots. Each file embeds its data as a CSV comment.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub color: &'a str,
    pub dashed: bool,
}

#[derive(Clone, Copy)]
pub enum Axes {
    Linear,
    LogLog,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    axes: Axes,
}

impl Frame {
    fn tx(&self, v: f64) -> f64 {
        LEFT + (v - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }
    fn ty(&self, v: f64) -> f64 {
        H - BOTTOM - (v - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
    fn map(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        match self.axes {
            Axes::Linear => Some((x, y)),
            Axes::LogLog if x > 0.0 && y > 0.0 => Some((x.log10(), y.log10())),
            Axes::LogLog => None,
        }
    }
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn label_for(v: f64, axes: Axes) -> String {
    match axes {
        Axes::Linear => format!("{v:.3}"),
        Axes::LogLog => format!("1e{}", v.round() as i64),
    }
}

fn ticks(lo: f64, hi: f64, axes: Axes) -> Vec<f64> {
    match axes {
        Axes::LogLog => {
            let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
            let step = ((b - a) / 6).max(1);
            (a..=b).step_by(step as usize).map(|k| k as f64).collect()
        }
        Axes::Linear => (0..=4).map(|k| lo + (hi - lo) * k as f64 / 4.0).collect(),
    }
}

/// Render `series` in one frame.
pub fn render(title: &str, x_label: &str, y_label: &str, axes: Axes, series: &[Series<'_>]) -> String {
    let mut pts: Vec<Vec<(f64, f64)>> = Vec::new();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    let probe = Frame {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
        axes,
    };
    for s in series {
        let p: Vec<(f64, f64)> = s
            .x
            .iter()
            .zip(s.y)
            .filter_map(|(&x, &y)| probe.map(x, y))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        for &(x, y) in &p {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        pts.push(p);
    }
    let (x0, x1) = span(x0, x1);
    let (y0, y1) = span(y0, y1);
    let f = Frame { x0, x1, y0, y1, axes };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    out.push_str("<!-- data\nseries,x,y\n");
    for s in series {
        for (x, y) in s.x.iter().zip(s.y) {
            let _ = writeln!(out, "{},{x},{y}", s.label);
        }
    }
    out.push_str("-->\n");
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let (bx0, bx1, by0, by1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{bx0}" y="{by0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        bx1 - bx0,
        by1 - by0
    );
    for t in ticks(x0, x1, axes) {
        let x = f.tx(t);
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{by1}" x2="{x:.2}" y2="{}" stroke="black"/>"#, by1 + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, by1 + 18.0, label_for(t, axes));
    }
    for t in ticks(y0, y1, axes) {
        let y = f.ty(t);
        let _ = writeln!(out, r#"<line x1="{}" y1="{y:.2}" x2="{bx0}" y2="{y:.2}" stroke="black"/>"#, bx0 - 5.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, bx0 - 8.0, y + 4.0, label_for(t, axes));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (k, (s, p)) in series.iter().zip(&pts).enumerate() {
        if p.is_empty() {
            continue;
        }
        let mut path = String::new();
        for &(x, y) in p {
            let _ = write!(path, "{:.2},{:.2} ", f.tx(x), f.ty(y));
        }
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
            path.trim_end(),
            s.color
        );
        let ly = TOP + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}"{dash}/><text x="{}" y="{}">{}</text>"#,
            bx1 - 150.0,
            bx1 - 125.0,
            s.color,
            bx1 - 120.0,
            ly + 4.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tail mass against t on log-log axes with a t^-n guide through the first positive sample.
pub fn tail_loglog(title: &str, times: &[f64], tail: &[f64], n: usize) -> String {
    let pos: Vec<(f64, f64)> = times.iter().zip(tail).filter(|(t, v)| **t > 0.0 && **v > 0.0).map(|(t, v)| (*t, *v)).collect();
    let (gx, gy): (Vec<f64>, Vec<f64>) = match (pos.first(), pos.last()) {
        (Some(&(ta, va)), Some(&(tb, _))) => {
            let g = |t: f64| va * (t / ta).powi(-(n as i32));
            (vec![ta, tb], vec![g(ta), g(tb)])
        }
        _ => (Vec::new(), Vec::new()),
    };
    let guide = format!("t^-{n}");
    render(
        title,
        "t",
        "tail mass",
        Axes::LogLog,
        &[
            Series {
                label: "tail",
                x: times,
                y: tail,
                color: "#1f77b4",
                dashed: false,
            },
            Series {
                label: &guide,
                x: &gx,
                y: &gy,
                color: "#d62728",
                dashed: true,
            },
        ],
    )
}

/// Observable expectation against its monotone envelope.
pub fn envelope(title: &str, times: &[f64], lhs: &[f64], rhs: &[f64]) -> String {
    render(
        title,
        "t",
        "expectation",
        Axes::Linear,
        &[
            Series {
                label: "<A_s(t)>",
                x: times,
                y: lhs,
                color: "#1f77b4",
                dashed: false,
            },
            Series {
                label: "envelope",
                x: times,
                y: rhs,
                color: "#d62728",
                dashed: true,
            },
        ],
    )
}
