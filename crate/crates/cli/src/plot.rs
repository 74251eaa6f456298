//! Self-contained SVG plots.

use std::fmt::Write;

use angleform_core::TrajectoryRecord;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn color(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (H - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str, y_ticks: bool) {
    let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (l + r) / 2.0,
        H - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(ylabel)
    );
    for i in 0..=4 {
        let x = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{}</text>"#,
            f.px(x),
            b + 16.0,
            tick(x, f.x1 - f.x0)
        );
        if y_ticks {
            let y = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
                l - 4.0,
                f.py(y) + 4.0,
                tick(y, f.y1 - f.y0)
            );
        }
    }
}

/// Tick label; values tiny relative to the axis range print as 0.
fn tick(v: f64, range: f64) -> String {
    if v.abs() <= 1e-9 * range.abs() {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{}", (v * 100.0).round() / 100.0)
    }
}

fn legend(out: &mut String, names: &[(String, &str)]) {
    for (idx, (name, c)) in names.iter().enumerate() {
        let y = TOP + 14.0 + 16.0 * idx as f64;
        let x = W - RIGHT - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{c}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 20.0,
            x + 26.0,
            y + 4.0,
            escape(name)
        );
    }
}

/// Series on a log₁₀ y axis; non-positive or non-finite samples break the
/// line.
pub fn log_line_plot(
    title: &str,
    ylabel: &str,
    times: &[f64],
    series: &[(String, Vec<f64>)],
) -> String {
    let logs: Vec<Vec<Option<f64>>> = series
        .iter()
        .map(|(_, ys)| {
            ys.iter()
                .map(|&y| (y > 0.0 && y.is_finite()).then(|| y.log10()))
                .collect()
        })
        .collect();
    let all = logs.iter().flatten().flatten().copied();
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    let (lo, hi) = if lo.is_finite() {
        (lo.floor(), hi.ceil().max(lo.floor() + 1.0))
    } else {
        (-1.0, 0.0)
    };
    let f = Frame {
        x0: times.first().copied().unwrap_or(0.0),
        x1: times.last().copied().filter(|&t| t > 0.0).unwrap_or(1.0),
        y0: lo,
        y1: hi,
    };
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, "t [s]", ylabel, false);
    let step = ((hi - lo) / 8.0).ceil().max(1.0);
    let mut e = lo;
    while e <= hi {
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">1e{}</text>"##,
            W - RIGHT,
            LEFT - 4.0,
            f.py(e) + 4.0,
            e as i64,
            y = f.py(e)
        );
        e += step;
    }
    // thin the polyline to at most ~2000 points per series
    let stride = (times.len() / 2000).max(1);
    for (idx, ys) in logs.iter().enumerate() {
        let mut d = String::new();
        let mut pen_down = false;
        for (k, (t, y)) in times.iter().zip(ys).enumerate() {
            if k % stride != 0 && k + 1 != times.len() {
                continue;
            }
            match y {
                Some(y) => {
                    let _ = write!(
                        d,
                        "{}{:.1},{:.1} ",
                        if pen_down { "L" } else { "M" },
                        f.px(*t),
                        f.py(*y)
                    );
                    pen_down = true;
                }
                None => pen_down = false,
            }
        }
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            d.trim_end(),
            color(idx)
        );
    }
    let names: Vec<(String, &str)> = series
        .iter()
        .enumerate()
        .map(|(i, (n, _))| (n.clone(), color(i)))
        .collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    out
}

/// Agent paths with open start markers, filled end markers and the final
/// sensing edges in grey.
pub fn trajectory_plot(title: &str, rec: &TrajectoryRecord, edges: &[(usize, usize)]) -> String {
    let pts = rec.states.iter().flat_map(|c| c.iter().copied());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for p in pts {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    // equal aspect ratio
    let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
    let span = ((x1 - x0) / pw).max((y1 - y0) / ph).max(1e-9) * 1.1;
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let f = Frame {
        x0: cx - span * pw / 2.0,
        x1: cx + span * pw / 2.0,
        y0: cy - span * ph / 2.0,
        y1: cy + span * ph / 2.0,
    };
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, "x [m]", "y [m]", true);
    let last = rec.last_state();
    for &(a, b) in edges {
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#999" stroke-dasharray="4 3"/>"##,
            f.px(last[a].x),
            f.py(last[a].y),
            f.px(last[b].x),
            f.py(last[b].y)
        );
    }
    let n = last.len();
    let stride = (rec.len() / 2000).max(1);
    for k in 0..n {
        let mut d = String::new();
        for (idx, c) in rec.states.iter().enumerate() {
            if idx % stride != 0 && idx + 1 != rec.len() {
                continue;
            }
            let _ = write!(
                d,
                "{}{:.1},{:.1} ",
                if idx == 0 { "M" } else { "L" },
                f.px(c[k].x),
                f.py(c[k].y)
            );
        }
        let c = color(k);
        let s = rec.states[0][k];
        let e = last[k];
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
        let _ = writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="white" stroke="{c}" stroke-width="1.5"/>"#,
            f.px(s.x),
            f.py(s.y)
        );
        let _ = writeln!(
            out,
            r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{c}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            f.px(e.x),
            f.py(e.y),
            f.px(e.x) + 6.0,
            f.py(e.y) - 6.0,
            k + 1
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Grouped bars: for each label, the fitted value next to the reference.
pub fn rate_bars(
    title: &str,
    labels: &[String],
    fitted: &[Option<f64>],
    reference: &[f64],
    ref_name: &str,
) -> String {
    let top = fitted
        .iter()
        .flatten()
        .chain(reference)
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max)
        .max(1e-3)
        * 1.15;
    let f = Frame {
        x0: 0.0,
        x1: labels.len().max(1) as f64,
        y0: 0.0,
        y1: top,
    };
    let mut out = String::new();
    open(&mut out, title);
    let (l, r, t, b) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">rate [1/s]</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0
    );
    for i in 0..=4 {
        let v = top * i as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            f.py(v) + 4.0,
            tick(v, top)
        );
    }
    let slot = (W - LEFT - RIGHT) / labels.len().max(1) as f64;
    let bar = slot * 0.3;
    for (idx, label) in labels.iter().enumerate() {
        let xc = LEFT + slot * (idx as f64 + 0.5);
        for (j, (v, c)) in [(fitted[idx], color(0)), (Some(reference[idx]), color(1))]
            .into_iter()
            .enumerate()
        {
            if let Some(v) = v.filter(|v| v.is_finite()) {
                let x = xc - bar + j as f64 * bar;
                let _ = writeln!(
                    out,
                    r#"<rect x="{x:.1}" y="{:.1}" width="{bar:.1}" height="{:.1}" fill="{c}"/>"#,
                    f.py(v),
                    f.py(0.0) - f.py(v)
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{xc:.1}" y="{}" text-anchor="middle">{}</text>"#,
            b + 16.0,
            escape(label)
        );
    }
    legend(
        &mut out,
        &[
            ("fitted".to_string(), color(0)),
            (ref_name.to_string(), color(1)),
        ],
    );
    out.push_str("</svg>\n");
    out
}
