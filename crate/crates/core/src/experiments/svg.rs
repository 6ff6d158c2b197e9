//! Standalone SVG charts for the sweep outputs.

use std::fmt::Write;

use super::{CollapsibilitySetting, Example1Output, SweepRow};
use crate::estimators::MethodId;

const PANEL_W: f64 = 260.0;
const PANEL_H: f64 = 200.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_T: f64 = 34.0;
const GAP_X: f64 = 72.0;
const GAP_Y: f64 = 70.0;
const LEGEND_H: f64 = 40.0;

fn color(method: MethodId) -> &'static str {
    match method {
        MethodId::AteBaseline => "#555555",
        MethodId::RctReference => "#1b9e77",
        MethodId::FullObservational => "#d95f02",
        MethodId::ConditionalOffset => "#7570b3",
        MethodId::MarginalOffset => "#e7298a",
        MethodId::ConstrainedOffset => "#1f78b4",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Rounds to a short decimal for labels.
fn label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

struct Panel {
    x: f64,
    y: f64,
    xlim: (f64, f64),
    ylim: (f64, f64),
    x_ticks: bool,
}

impl Panel {
    fn px(&self, v: f64) -> f64 {
        self.x + (v - self.xlim.0) / (self.xlim.1 - self.xlim.0) * PANEL_W
    }

    fn py(&self, v: f64) -> f64 {
        self.y + PANEL_H - (v - self.ylim.0) / (self.ylim.1 - self.ylim.0) * PANEL_H
    }

    fn frame(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (x, y) = (self.x, self.y);
        let _ = writeln!(
            out,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#000"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
            x + PANEL_W / 2.0,
            y - 8.0,
            escape(title)
        );
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = self.xlim.0 + f * (self.xlim.1 - self.xlim.0);
            let yv = self.ylim.0 + f * (self.ylim.1 - self.ylim.0);
            let (tx, ty) = (self.px(xv), self.py(yv));
            if self.x_ticks {
                let _ = writeln!(
                    out,
                    r##"<line x1="{tx:.2}" y1="{:.2}" x2="{tx:.2}" y2="{:.2}" stroke="#000"/><text x="{tx:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"##,
                    y + PANEL_H,
                    y + PANEL_H + 4.0,
                    y + PANEL_H + 15.0,
                    label(xv)
                );
            }
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{ty:.2}" x2="{x:.2}" y2="{ty:.2}" stroke="#000"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"##,
                x - 4.0,
                x - 6.0,
                ty + 3.0,
                label(yv)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{}</text>"#,
            x + PANEL_W / 2.0,
            y + PANEL_H + 32.0,
            escape(xlabel)
        );
        let (lx, ly) = (x - 44.0, y + PANEL_H / 2.0);
        let _ = writeln!(
            out,
            r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" font-size="11" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
            escape(ylabel)
        );
    }
}

fn document(cols: usize, rows: usize, body: &str) -> String {
    let w = MARGIN_L + cols as f64 * (PANEL_W + GAP_X);
    let h = LEGEND_H + MARGIN_T + rows as f64 * (PANEL_H + GAP_Y);
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n{body}</svg>\n"
    )
}

fn panel_origin(col: usize, row: usize) -> (f64, f64) {
    (
        MARGIN_L + col as f64 * (PANEL_W + GAP_X),
        LEGEND_H + MARGIN_T + row as f64 * (PANEL_H + GAP_Y),
    )
}

fn legend(out: &mut String, entries: &[(&str, &str)]) {
    let mut x = MARGIN_L;
    for (name, c) in entries {
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="12" width="14" height="4" fill="{c}"/><text x="{:.2}" y="18" font-size="11">{}</text>"#,
            x + 18.0,
            escape(name)
        );
        x += 30.0 + 7.0 * name.len() as f64;
    }
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.iter().any(|o| o.to_bits() == v.to_bits()) {
            out.push(v);
        }
    }
    out
}

/// PEHE against `beta_x`, one panel per odds-ratio and, for coupled sweeps,
/// one panel row per `alpha`. The region under the ATE baseline curve is
/// shaded: a method below it beats the baseline.
pub fn sweep_svg(rows: &[SweepRow]) -> String {
    let ors = distinct(rows.iter().map(|r| r.or_u));
    let alphas: Vec<Option<f64>> = {
        let mut v: Vec<Option<f64>> = Vec::new();
        for a in rows.iter().map(|r| r.alpha) {
            if !v.contains(&a) {
                v.push(a);
            }
        }
        v
    };
    let methods: Vec<MethodId> = MethodId::ALL
        .into_iter()
        .filter(|m| rows.iter().any(|r| r.method == *m))
        .collect();
    let mut body = String::new();
    legend(
        &mut body,
        &methods
            .iter()
            .map(|m| (m.as_str(), color(*m)))
            .collect::<Vec<_>>(),
    );

    for (ri, alpha) in alphas.iter().enumerate() {
        for (ci, or) in ors.iter().enumerate() {
            let cell: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.or_u.to_bits() == or.to_bits() && r.alpha == *alpha)
                .collect();
            let (x, y) = panel_origin(ci, ri);
            let xlim = range(cell.iter().map(|r| r.beta_x));
            let (_, ymax) = range(cell.iter().filter_map(|r| r.pehe));
            let panel = Panel {
                x,
                y,
                xlim,
                ylim: (0.0, ymax.max(1e-6) * 1.05),
                x_ticks: true,
            };
            let series = |m: MethodId| -> Vec<(f64, f64)> {
                cell.iter()
                    .filter(|r| r.method == m)
                    .filter_map(|r| r.pehe.map(|p| (r.beta_x, p)))
                    .collect()
            };
            let base = series(MethodId::AteBaseline);
            if base.len() > 1 {
                let mut pts = format!("{:.2},{:.2}", panel.px(base[0].0), panel.py(0.0));
                for (bx, p) in &base {
                    let _ = write!(pts, " {:.2},{:.2}", panel.px(*bx), panel.py(*p));
                }
                let _ = write!(
                    pts,
                    " {:.2},{:.2}",
                    panel.px(base[base.len() - 1].0),
                    panel.py(0.0)
                );
                let _ = writeln!(
                    body,
                    r##"<polygon points="{pts}" fill="#cccccc" fill-opacity="0.5"/>"##
                );
            }
            for m in &methods {
                let pts: Vec<String> = series(*m)
                    .iter()
                    .map(|(bx, p)| format!("{:.2},{:.2}", panel.px(*bx), panel.py(*p)))
                    .collect();
                if !pts.is_empty() {
                    let _ = writeln!(
                        body,
                        r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.6"/>"#,
                        pts.join(" "),
                        color(*m)
                    );
                }
            }
            let title = match alpha {
                Some(a) => format!("OR_u = {}, alpha = {}", label(*or), label(*a)),
                None => format!("OR_u = {}", label(*or)),
            };
            panel.frame(&mut body, &title, "beta_x", "PEHE");
        }
    }
    document(ors.len().max(1), alphas.len().max(1), &body)
}

fn heat(v: f64) -> String {
    // White to dark blue.
    let v = v.clamp(0.0, 1.0);
    let r = (247.0 - 239.0 * v).round();
    let g = (251.0 - 203.0 * v).round();
    let b = (255.0 - 148.0 * v).round();
    format!("rgb({r},{g},{b})")
}

/// Log-likelihood surface per odds-ratio with the fitted solutions marked.
pub fn example1_svg(out: &Example1Output) -> String {
    let marks = [
        (MethodId::RctReference, "#1b9e77"),
        (MethodId::FullObservational, "#d95f02"),
        (MethodId::ConditionalOffset, "#7570b3"),
    ];
    let mut body = String::new();
    legend(
        &mut body,
        &marks
            .iter()
            .map(|(m, c)| (m.as_str(), *c))
            .collect::<Vec<_>>(),
    );
    for (ci, s) in out.contours.iter().enumerate() {
        let (x, y) = panel_origin(ci, 0);
        let panel = Panel {
            x,
            y,
            xlim: (s.beta0[0], s.beta0[s.beta0.len() - 1]),
            ylim: (s.beta_t[0], s.beta_t[s.beta_t.len() - 1]),
            x_ticks: true,
        };
        let (lo, hi) = range(s.values.iter().copied());
        let dx = (panel.xlim.1 - panel.xlim.0) / (s.beta0.len() - 1) as f64;
        let dy = (panel.ylim.1 - panel.ylim.0) / (s.beta_t.len() - 1) as f64;
        for (i, b0) in s.beta0.iter().enumerate() {
            for (j, bt) in s.beta_t.iter().enumerate() {
                // Square root stretches the region near the maximum.
                let shade = 1.0 - ((hi - s.at(i, j)) / (hi - lo)).sqrt();
                let x0 = panel.px((b0 - dx / 2.0).max(panel.xlim.0));
                let x1 = panel.px((b0 + dx / 2.0).min(panel.xlim.1));
                let y0 = panel.py((bt + dy / 2.0).min(panel.ylim.1));
                let y1 = panel.py((bt - dy / 2.0).max(panel.ylim.0));
                let _ = writeln!(
                    body,
                    r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}" shape-rendering="crispEdges"/>"#,
                    x1 - x0,
                    y1 - y0,
                    heat(shade)
                );
            }
        }
        for (m, c) in marks {
            let fit = out
                .rows
                .iter()
                .find(|r| r.method == m && r.or_u.to_bits() == s.or_u.to_bits())
                .and_then(|r| r.fit);
            if let Some([b0, bt, _]) = fit {
                let _ = writeln!(
                    body,
                    r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{c}" stroke="#000"/>"##,
                    panel.px(b0),
                    panel.py(bt)
                );
            }
        }
        panel.frame(
            &mut body,
            &format!("OR_u = {}", label(s.or_u)),
            "beta0",
            "beta_t",
        );
    }
    document(out.contours.len().max(1), 1, &body)
}

/// Stratum and pooled outcome probabilities per arm for each setting.
pub fn collapsibility_svg(settings: &[CollapsibilitySetting]) -> String {
    let mut body = String::new();
    legend(
        &mut body,
        &[("untreated", "#999999"), ("treated", "#1f78b4")],
    );
    for (ci, s) in settings.iter().enumerate() {
        let (x, y) = panel_origin(ci, 0);
        let panel = Panel {
            x,
            y,
            xlim: (0.0, 3.0),
            ylim: (0.0, 1.0),
            x_ticks: false,
        };
        let groups = [
            ("x=0", s.rows[0].pi0_x, s.rows[0].pi1_x),
            ("x=1", s.rows[1].pi0_x, s.rows[1].pi1_x),
            ("pooled", s.rows[0].pi0, s.rows[0].pi1),
        ];
        for (g, (name, p0, p1)) in groups.iter().enumerate() {
            for (k, (p, c)) in [(p0, "#999999"), (p1, "#1f78b4")].into_iter().enumerate() {
                let left = g as f64 + 0.15 + 0.35 * k as f64;
                let _ = writeln!(
                    body,
                    r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{c}"/>"#,
                    panel.px(left),
                    panel.py(*p),
                    panel.px(left + 0.35) - panel.px(left),
                    panel.py(0.0) - panel.py(*p)
                );
            }
            let _ = writeln!(
                body,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{name}</text>"#,
                panel.px(g as f64 + 0.5),
                y + PANEL_H + 15.0
            );
        }
        let title = format!(
            "{}: beta_t = {}, gamma = {}",
            s.label,
            label(s.rows[0].beta_t),
            label(s.rows[0].gamma_t)
        );
        panel.frame(&mut body, &title, "", "P(y=1 | do(t))");
    }
    document(settings.len().max(1), 1, &body)
}
