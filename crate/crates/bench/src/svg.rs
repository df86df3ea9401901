//! SVG 1.1 rendering of tracks and learning curves.
//!
//! Tracks use a fixed viewport of 1000×400 px: `x_px = 10 x` and
//! `y_px = 250 − 10 y`, so the 100-unit track fills the width and world
//! height 0 sits 150 px above the bottom edge.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use acl_core::procgen::{StumpTrackSpec, Terrain, TerrainSpec};
use acl_core::stats::{mean, std_error, RunGroup};

pub const TRACK_WIDTH_PX: f64 = 1000.0;
pub const TRACK_HEIGHT_PX: f64 = 400.0;
pub const PX_PER_UNIT: f64 = 10.0;
pub const BASELINE_PX: f64 = 250.0;
/// Drawn width of a stump, in world units.
pub const STUMP_WIDTH: f64 = 1.0;

pub fn x_px(x: f64) -> f64 {
    PX_PER_UNIT * x
}

pub fn y_px(y: f64) -> f64 {
    BASELINE_PX - PX_PER_UNIT * y
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn header(s: &mut String, w: f64, h: f64) {
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn points(xy: impl Iterator<Item = (f64, f64)>) -> String {
    xy.map(|(x, y)| format!("{x:.2},{y:.2}")).collect::<Vec<_>>().join(" ")
}

/// Ceiling height under `x`, linearly interpolated between columns.
fn ceiling_at(spec: &TerrainSpec, ceiling: &[f64], x: f64) -> f64 {
    let step = spec.column_x(1);
    let f = (x / step).clamp(0.0, (ceiling.len() - 1) as f64);
    let i = (f.floor() as usize).min(ceiling.len().saturating_sub(2));
    let t = f - i as f64;
    ceiling[i] * (1.0 - t) + ceiling[(i + 1).min(ceiling.len() - 1)] * t
}

/// Parkour track: water band, ground and ceiling polylines, and creepers
/// hanging from the ceiling.
pub fn render_terrain(spec: &TerrainSpec, terrain: &Terrain) -> String {
    let mut s = String::new();
    header(&mut s, TRACK_WIDTH_PX, TRACK_HEIGHT_PX);
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{TRACK_WIDTH_PX}" height="{TRACK_HEIGHT_PX}" fill="#ffffff"/>"##);
    let top = y_px(terrain.water_y);
    let _ = writeln!(
        s,
        r##"<rect id="water" x="0" y="{top:.2}" width="{TRACK_WIDTH_PX}" height="{:.2}" fill="#4a90d9" fill-opacity="0.35"/>"##,
        (TRACK_HEIGHT_PX - top).max(0.0)
    );
    let xs = (0..terrain.ground.len()).map(|i| x_px(spec.column_x(i)));
    let _ = writeln!(
        s,
        r##"<polyline id="ground" points="{}" fill="none" stroke="#6b4226" stroke-width="2"/>"##,
        points(xs.clone().zip(terrain.ground.iter().map(|y| y_px(*y))))
    );
    let _ = writeln!(
        s,
        r##"<polyline id="ceiling" points="{}" fill="none" stroke="#555555" stroke-width="2"/>"##,
        points(xs.zip(terrain.ceiling.iter().map(|y| y_px(*y))))
    );
    let _ = writeln!(s, r##"<g id="creepers" fill="#3c8d2f">"##);
    for c in &terrain.creepers {
        let anchor = ceiling_at(spec, &terrain.ceiling, c.x + c.w / 2.0);
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
            x_px(c.x),
            y_px(anchor),
            PX_PER_UNIT * c.w,
            PX_PER_UNIT * c.h
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

/// Stump Tracks: flat ground at height 0 and one rectangle per stump.
pub fn render_stumps(track: &StumpTrackSpec) -> String {
    let mut s = String::new();
    header(&mut s, TRACK_WIDTH_PX, TRACK_HEIGHT_PX);
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{TRACK_WIDTH_PX}" height="{TRACK_HEIGHT_PX}" fill="#ffffff"/>"##);
    let g = y_px(0.0);
    let _ = writeln!(
        s,
        r##"<line id="ground" x1="0" y1="{g:.2}" x2="{TRACK_WIDTH_PX}" y2="{g:.2}" stroke="#6b4226" stroke-width="2"/>"##
    );
    let _ = writeln!(s, r##"<g id="stumps" fill="#8b5a2b">"##);
    for st in &track.stumps {
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}"/>"#,
            x_px(st.x - STUMP_WIDTH / 2.0),
            y_px(st.h),
            PX_PER_UNIT * STUMP_WIDTH,
            PX_PER_UNIT * st.h
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

const PLOT_W: f64 = 800.0;
const PLOT_H: f64 = 500.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 20.0;
const MARGIN_B: f64 = 50.0;

/// Mean percentage of mastered test tasks against episodes, one line per
/// group with a band of ± one standard error.
pub fn render_curves(groups: &BTreeMap<String, RunGroup>, title: &str) -> String {
    let max_ep = groups.values().filter_map(|g| g.episodes.last().copied()).max().unwrap_or(1).max(1) as f64;
    let (pw, ph) = (PLOT_W - MARGIN_L - MARGIN_R, PLOT_H - MARGIN_T - MARGIN_B);
    let px = |ep: f64| MARGIN_L + pw * ep / max_ep;
    let py = |pct: f64| MARGIN_T + ph * (1.0 - pct.clamp(0.0, 100.0) / 100.0);

    let mut s = String::new();
    header(&mut s, PLOT_W, PLOT_H);
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{PLOT_W}" height="{PLOT_H}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="14" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(s, r##"<g id="axes" stroke="#000000" stroke-width="1" font-family="sans-serif" font-size="11">"##);
    let _ = writeln!(s, r#"<line x1="{MARGIN_L}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#, py(0.0), px(max_ep), py(0.0));
    let _ = writeln!(s, r#"<line x1="{MARGIN_L}" y1="{:.2}" x2="{MARGIN_L}" y2="{:.2}"/>"#, py(0.0), py(100.0));
    for k in 0..=4 {
        let pct = 25.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" stroke="none" text-anchor="end">{pct}</text>"#,
            MARGIN_L - 6.0,
            py(pct) + 4.0
        );
        let ep = max_ep * k as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" stroke="none" text-anchor="middle">{ep:.0}</text>"#,
            px(ep),
            py(0.0) + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" stroke="none" text-anchor="middle">episodes</text>"#,
        MARGIN_L + pw / 2.0,
        PLOT_H - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.2}" stroke="none" text-anchor="middle" transform="rotate(-90 14 {:.2})">% mastered</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0
    );
    let _ = writeln!(s, "</g>");

    for (i, (name, g)) in groups.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let stats: Vec<(f64, f64, f64)> = (0..g.episodes.len())
            .map(|j| {
                let col = g.column(j);
                let se = if col.len() > 1 { std_error(&col) } else { 0.0 };
                (g.episodes[j] as f64, mean(&col), se)
            })
            .collect();
        let upper = stats.iter().map(|(e, m, se)| (px(*e), py(m + se)));
        let lower = stats.iter().rev().map(|(e, m, se)| (px(*e), py(m - se)));
        let id = escape(name);
        let _ = writeln!(
            s,
            r#"<polygon id="band-{id}" points="{}" fill="{color}" fill-opacity="0.2" stroke="none"/>"#,
            points(upper.chain(lower))
        );
        let _ = writeln!(
            s,
            r#"<polyline id="mean-{id}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            points(stats.iter().map(|(e, m, _)| (px(*e), py(*m))))
        );
        let ly = MARGIN_T + 10.0 + 18.0 * i as f64;
        let lx = PLOT_W - MARGIN_R + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{id} (n={})</text>"#,
            lx + 26.0,
            ly + 4.0,
            g.runs.len()
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn viewport_transform() {
        assert_eq!((x_px(0.0), y_px(0.0)), (0.0, 250.0));
        assert_eq!((x_px(100.0), y_px(-10.0)), (1000.0, 350.0));
    }

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b&\"c\">"), "a&lt;b&amp;&quot;c&quot;&gt;");
    }
}
