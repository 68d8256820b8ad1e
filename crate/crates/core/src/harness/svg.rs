//! Minimal static SVG line plots of training trajectories.

use std::fmt::Write as _;

use crate::harness::format::num;
use crate::train::{Split, TrainRecord, TrainRow};

const WIDTH: f64 = 720.0;
const PANEL_HEIGHT: f64 = 200.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const PANEL_GAP: f64 = 40.0;
const TOP: f64 = 40.0;

const SPLITS: [(Split, &str, &str); 3] = [
    (Split::Train, "#1f77b4", "2,3"),
    (Split::Val, "#2ca02c", "8,4"),
    (Split::Test, "#d62728", ""),
];

type Metric = (&'static str, fn(&TrainRow) -> f64);

const METRICS: [Metric; 3] = [
    ("loss", |r| r.loss),
    ("acc", |r| r.acc),
    ("norm", |r| r.norm),
];

/// One panel per metric against epoch; one polyline per (metric, split):
/// train dotted, val dashed, test solid.
pub fn train_plot(record: &TrainRecord, title: &str) -> String {
    let height = TOP + METRICS.len() as f64 * (PANEL_HEIGHT + PANEL_GAP);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN_LEFT}" y="18" font-size="14">{}</text>"#,
        escape(title)
    );
    for (i, (split, color, dash)) in SPLITS.iter().enumerate() {
        let x = WIDTH - 230.0 + 75.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{x}" y1="14" x2="{}" y2="14" stroke="{color}" stroke-width="2" stroke-dasharray="{dash}"/><text x="{}" y="18">{split}</text>"#,
            x + 25.0,
            x + 30.0
        );
    }

    let max_epoch = record
        .rows
        .iter()
        .map(|r| r.epoch)
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    for (p, (name, get)) in METRICS.iter().enumerate() {
        let top = TOP + p as f64 * (PANEL_HEIGHT + PANEL_GAP);
        let values: Vec<f64> = record
            .rows
            .iter()
            .map(get)
            .filter(|v| v.is_finite())
            .collect();
        let (mut lo, mut hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let sx = |e: f64| MARGIN_LEFT + plot_w * e / max_epoch;
        let sy = |v: f64| top + PANEL_HEIGHT * (hi - v) / (hi - lo);
        let bottom = top + PANEL_HEIGHT;
        let _ = writeln!(
            out,
            r#"<g data-metric="{name}"><line x1="{MARGIN_LEFT}" y1="{bottom}" x2="{}" y2="{bottom}" stroke="black"/><line x1="{MARGIN_LEFT}" y1="{top}" x2="{MARGIN_LEFT}" y2="{bottom}" stroke="black"/>"#,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 4.0,
            top + 4.0,
            num(hi)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{bottom}" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 4.0,
            num(lo)
        );
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN_LEFT}" y="{}">0</text>"#,
            bottom + 14.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">epoch {}</text>"#,
            MARGIN_LEFT + plot_w,
            bottom + 14.0,
            max_epoch
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="13">{name}</text>"#,
            MARGIN_LEFT + 6.0,
            top - 6.0
        );
        for (split, color, dash) in SPLITS {
            let points: Vec<String> = record
                .series(split)
                .filter(|r| get(r).is_finite())
                .map(|r| format!("{:.2},{:.2}", sx(r.epoch as f64), sy(get(r))))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline data-metric="{name}" data-split="{split}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="{dash}" points="{}"/>"#,
                points.join(" ")
            );
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
