//! Minimal SVG 1.1 emission: line charts and heat grids rendered by direct
//! path construction. Output is deterministic for identical inputs.

use std::fmt::Write;

const WIDTH: f64 = 840.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn fmt(x: f64) -> String {
    format!("{x:.3}")
}

fn tick_label(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.abs() >= 0.01 && x.abs() < 10_000.0 {
        let s = format!("{x:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.2e}")
    }
}

fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT
            + (v - self.x_lo) / (self.x_hi - self.x_lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }
    fn y(&self, v: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (v - self.y_lo) / (self.y_hi - self.y_lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="28" font-family="sans-serif" font-size="18" text-anchor="middle">{title}</text>"#,
        WIDTH / 2.0
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        x1 - x0,
        y0 - y1
    );
    for t in ticks(frame.x_lo, frame.x_hi, 6) {
        let px = frame.x(t);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{y0}" x2="{}" y2="{}" stroke="black"/>"#,
            fmt(px),
            fmt(px),
            fmt(y0 + 6.0)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            fmt(px),
            fmt(y0 + 22.0),
            tick_label(t)
        );
    }
    for t in ticks(frame.y_lo, frame.y_hi, 5) {
        let py = frame.y(t);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{x0}" y2="{}" stroke="black"/>"#,
            fmt(x0 - 6.0),
            fmt(py),
            fmt(py)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{}</text>"#,
            fmt(x0 - 10.0),
            fmt(py + 4.0),
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{x_label}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        out,
        r#"<text x="22" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 22 {})">{y_label}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

/// Line chart with one polyline per series and a legend.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut all = series.iter().flat_map(|s| s.points.iter());
    let first = all.next().copied().unwrap_or((0.0, 0.0));
    let mut x_lo = first.0;
    let mut x_hi = first.0;
    let mut y_lo = first.1;
    let mut y_hi = first.1;
    for &(x, y) in series.iter().flat_map(|s| s.points.iter()) {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi == y_lo {
        y_hi = y_lo + 1.0;
    }
    let pad = 0.05 * (y_hi - y_lo);
    let frame = Frame {
        x_lo,
        x_hi,
        y_lo: y_lo - pad,
        y_hi: y_hi + pad,
    };

    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for &(x, y) in &s.points {
            let _ = write!(path, "{},{} ", fmt(frame.x(x)), fmt(frame.y(y)));
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.trim_end()
        );
        let ly = MARGIN_TOP + 18.0 * i as f64 + 14.0;
        let lx = MARGIN_LEFT + 14.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 26.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 32.0,
            ly + 4.0,
            s.name
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heat grid over an irregular rectangular lattice of cell centers.
pub fn heat_grid(
    title: &str,
    x_label: &str,
    y_label: &str,
    xs: &[f64],
    ys: &[f64],
    values: &[Vec<Option<f64>>],
) -> String {
    let finite: Vec<f64> = values
        .iter()
        .flat_map(|row| row.iter().flatten().copied())
        .collect();
    let v_lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let v_hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (v_hi - v_lo).max(1e-300);

    let frame = Frame {
        x_lo: 0.0,
        x_hi: xs.len() as f64,
        y_lo: 0.0,
        y_hi: ys.len() as f64,
    };

    let mut out = String::new();
    header(&mut out, title);
    for (j, row) in values.iter().enumerate() {
        for (i, v) in row.iter().enumerate() {
            let Some(v) = v else { continue };
            let t = (v - v_lo) / span;
            // blue → white → red
            let (r, g, b) = if t < 0.5 {
                let s = t * 2.0;
                (
                    (90.0 + 165.0 * s) as u8,
                    (120.0 + 135.0 * s) as u8,
                    (200.0 + 55.0 * s) as u8,
                )
            } else {
                let s = (t - 0.5) * 2.0;
                (255, (255.0 - 170.0 * s) as u8, (255.0 - 200.0 * s) as u8)
            };
            let x = frame.x(i as f64);
            let y = frame.y(j as f64 + 1.0);
            let w = frame.x(i as f64 + 1.0) - x;
            let h = frame.y(j as f64) - y;
            let _ = writeln!(
                out,
                r##"<rect x="{}" y="{}" width="{}" height="{}" fill="rgb({r},{g},{b})"/>"##,
                fmt(x),
                fmt(y),
                fmt(w),
                fmt(h)
            );
        }
    }
    // frame + index labels at a few positions
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = writeln!(
        out,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black" stroke-width="1"/>"#,
        x1 - x0,
        y0 - y1
    );
    let label_stride_x = (xs.len() / 6).max(1);
    for (i, &x) in xs.iter().enumerate().step_by(label_stride_x) {
        let px = frame.x(i as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            fmt(px),
            fmt(y0 + 18.0),
            tick_label(x)
        );
    }
    let label_stride_y = (ys.len() / 6).max(1);
    for (j, &y) in ys.iter().enumerate().step_by(label_stride_y) {
        let py = frame.y(j as f64 + 0.5);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            fmt(x0 - 8.0),
            fmt(py + 4.0),
            tick_label(y)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">{x_label}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        out,
        r#"<text x="22" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 22 {})">{y_label}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">range {} to {}</text>"#,
        x0,
        y1 - 8.0,
        tick_label(v_lo),
        tick_label(v_hi)
    );
    out.push_str("</svg>\n");
    out
}
