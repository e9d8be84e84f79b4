//! Self-contained SVG charts: line charts (optionally log-scaled) and
//! grouped bar charts.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

/// Maps data values to pixels, linearly or by decades.
#[derive(Clone, Copy, Debug)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub px_lo: f64,
    pub px_hi: f64,
    pub log: bool,
}

impl Axis {
    /// Covers `values`; a log axis snaps to whole decades.
    pub fn fit(values: impl IntoIterator<Item = f64>, px_lo: f64, px_hi: f64, log: bool) -> Axis {
        let vals: Vec<f64> = values.into_iter().filter(|v| v.is_finite() && (!log || *v > 0.0)).collect();
        let (mut lo, mut hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if vals.is_empty() {
            (lo, hi) = if log { (0.1, 1.0) } else { (0.0, 1.0) };
        }
        if log {
            lo = 10f64.powf(lo.log10().floor());
            hi = 10f64.powf(hi.log10().ceil());
            if hi <= lo {
                hi = lo * 10.0;
            }
        } else {
            lo = lo.min(0.0);
            if hi <= lo {
                hi = lo + 1.0;
            }
        }
        Axis { lo, hi, px_lo, px_hi, log }
    }

    pub fn map(&self, v: f64) -> f64 {
        let f = if self.log {
            (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10())
        } else {
            (v - self.lo) / (self.hi - self.lo)
        };
        self.px_lo + f * (self.px_hi - self.px_lo)
    }

    pub fn ticks(&self) -> Vec<f64> {
        if self.log {
            let (a, b) = (self.lo.log10().round() as i32, self.hi.log10().round() as i32);
            (a..=b).map(|e| 10f64.powi(e)).collect()
        } else {
            (0..=5).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 5.0).collect()
        }
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{}", v.log10().round() as i32)
    } else if v.abs() >= 1000.0 || v == v.trunc() {
        format!("{v}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, (LEFT + W - RIGHT) / 2.0, escape(title)).unwrap();
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (LEFT + W - RIGHT) / 2.0, H - 15.0, escape(x_label)).unwrap();
    writeln!(
        out,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        escape(y_label)
    )
    .unwrap();
}

fn y_axis(out: &mut String, y: &Axis) {
    for t in y.ticks() {
        let py = y.map(t);
        writeln!(out, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="#ddd"/>"##, W - RIGHT).unwrap();
        writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, tick_label(t, y.log)).unwrap();
    }
    writeln!(out, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#, H - BOTTOM).unwrap();
    writeln!(out, r#"<line x1="{LEFT}" y1="{0}" x2="{1}" y2="{0}" stroke="black"/>"#, H - BOTTOM, W - RIGHT).unwrap();
}

fn legend(out: &mut String, names: &[String]) {
    for (i, n) in names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = W - RIGHT + 12.0;
        writeln!(out, r#"<rect x="{x}" y="{}" width="12" height="12" fill="{}"/>"#, y - 10.0, PALETTE[i % PALETTE.len()]).unwrap();
        writeln!(out, r#"<text x="{}" y="{y}">{}</text>"#, x + 18.0, escape(n)).unwrap();
    }
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Line chart with one polyline per series.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], log_x: bool, log_y: bool) -> String {
    let x = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), LEFT, W - RIGHT, log_x);
    let y = Axis::fit(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), H - BOTTOM, TOP, log_y);
    let mut out = String::new();
    header(&mut out, title, x_label, y_label);
    y_axis(&mut out, &y);
    for t in x.ticks() {
        writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, x.map(t), H - BOTTOM + 16.0, tick_label(t, log_x)).unwrap();
    }
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| (!log_x || p.0 > 0.0) && (!log_y || p.1 > 0.0))
            .map(|p| format!("{:.2},{:.2}", x.map(p.0), y.map(p.1)))
            .collect();
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#,
            PALETTE[i % PALETTE.len()],
            pts.join(" ")
        )
        .unwrap();
    }
    legend(&mut out, &series.iter().map(|s| s.name.clone()).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Grouped bars: `values[s][g]` is series `s` in group `g`; `None` leaves a
/// gap. `reference` draws a dashed horizontal line (e.g. ratio 1.0).
pub fn bar_chart(
    title: &str,
    y_label: &str,
    groups: &[String],
    series: &[String],
    values: &[Vec<Option<f64>>],
    log_y: bool,
    reference: Option<f64>,
) -> String {
    let all = values.iter().flatten().flatten().copied().chain(reference);
    let y = Axis::fit(all, H - BOTTOM, TOP, log_y);
    let mut out = String::new();
    header(&mut out, title, "", y_label);
    y_axis(&mut out, &y);
    let span = (W - RIGHT - LEFT) / groups.len().max(1) as f64;
    let bar = span * 0.8 / series.len().max(1) as f64;
    let base = if log_y { H - BOTTOM } else { y.map(0.0) };
    for (g, name) in groups.iter().enumerate() {
        let gx = LEFT + span * g as f64;
        writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, gx + span / 2.0, H - BOTTOM + 16.0, escape(name)).unwrap();
        for (s, vals) in values.iter().enumerate() {
            let Some(v) = vals.get(g).copied().flatten() else { continue };
            if log_y && v <= 0.0 {
                continue;
            }
            let top = y.map(v);
            writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{}: {v}</title></rect>"#,
                gx + span * 0.1 + bar * s as f64,
                top.min(base),
                bar,
                (base - top).abs(),
                PALETTE[s % PALETTE.len()],
                escape(&series[s])
            )
            .unwrap();
        }
    }
    if let Some(r) = reference {
        let py = y.map(r);
        writeln!(out, r#"<line x1="{LEFT}" y1="{py:.2}" x2="{}" y2="{py:.2}" stroke="black" stroke-dasharray="6 4"/>"#, W - RIGHT).unwrap();
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}
