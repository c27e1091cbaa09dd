//! SVG output: repertoire heatmaps, path maps and single-linkage drawings.
//!
//! Mechanism coordinates are y-up; every drawing flips y.

use std::fmt::Write;

use linkevo_core::fitness::FitnessKind;
use linkevo_core::kinematics::{Linkage, PathTrace, FIRST_JOINT, FIRST_STATIC, MOTOR};
use linkevo_core::prototyping::DownsampledMap;
use linkevo_core::Point;

/// Side of one display cell in SVG user units.
pub const CELL: f64 = 100.0;
const MARGIN: f64 = 40.0;

const RAMP: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

/// Colour for `t` in [0, 1], dark (worst) to yellow (best).
pub fn ramp(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (RAMP.len() - 1) as f64;
    let i = (x.floor() as usize).min(RAMP.len() - 2);
    let f = x - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    let mix = |p: f64, q: f64| (p + (q - p) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

/// Scale that makes a path of the given bounding-box extent span one cell.
pub fn path_scale(extent: f64) -> Option<f64> {
    (extent > 0.0 && extent.is_finite()).then(|| CELL / extent)
}

fn open(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
}

fn grid_frame(out: &mut String, map: &DownsampledMap, labels: (&str, &str)) {
    let (w, h) = (map.cols as f64 * CELL, map.rows as f64 * CELL);
    for c in 0..=map.cols {
        let x = MARGIN + c as f64 * CELL;
        let _ = writeln!(out, r##"<line x1="{x}" y1="{MARGIN}" x2="{x}" y2="{}" stroke="#ccc"/>"##, MARGIN + h);
    }
    for r in 0..=map.rows {
        let y = MARGIN + r as f64 * CELL;
        let _ = writeln!(out, r##"<line x1="{MARGIN}" y1="{y}" x2="{}" y2="{y}" stroke="#ccc"/>"##, MARGIN + w);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#, MARGIN + w / 2.0, MARGIN + h + 28.0, escape(labels.0));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" font-size="14" transform="rotate(-90 14 {})">{}</text>"#,
        MARGIN + h / 2.0,
        MARGIN + h / 2.0,
        escape(labels.1)
    );
}

/// Top-left corner of a display cell; row 0 is drawn at the bottom.
fn cell_origin(map: &DownsampledMap, row: usize, col: usize) -> (f64, f64) {
    (MARGIN + col as f64 * CELL, MARGIN + (map.rows - 1 - row) as f64 * CELL)
}

/// Cells coloured by their elite's fitness (best = yellow). Empty cells
/// stay blank.
pub fn heatmap(map: &DownsampledMap, kind: FitnessKind, labels: (&str, &str)) -> String {
    let scores: Vec<f64> = map.populated().map(|c| kind.score(c.elite.fitness)).collect();
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (w, h) = (map.cols as f64 * CELL + 2.0 * MARGIN, map.rows as f64 * CELL + 2.0 * MARGIN + 20.0);
    let mut out = String::new();
    open(&mut out, w, h);
    for c in map.populated() {
        let (x, y) = cell_origin(map, c.row, c.col);
        let t = if hi > lo { (kind.score(c.elite.fitness) - lo) / (hi - lo) } else { 1.0 };
        let _ = writeln!(
            out,
            r#"<rect class="cell" data-row="{}" data-col="{}" data-fitness="{}" x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{}"/>"#,
            c.row,
            c.col,
            c.elite.fitness,
            ramp(t)
        );
    }
    grid_frame(&mut out, map, labels);
    if !scores.is_empty() {
        let best = map.populated().map(|c| c.elite.fitness).fold(None, |b: Option<f64>, f| match b {
            Some(b) if kind.score(b) >= kind.score(f) => Some(b),
            _ => Some(f),
        });
        let _ = writeln!(
            out,
            r#"<text x="{MARGIN}" y="24" font-size="13">{} best {:.3}</text>"#,
            kind.name(),
            best.unwrap_or_default()
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Each display cell's foot path, scaled to span its cell, with the scale
/// factor written in the cell's bottom-right corner.
pub fn paths(map: &DownsampledMap, labels: (&str, &str)) -> String {
    let (w, h) = (map.cols as f64 * CELL + 2.0 * MARGIN, map.rows as f64 * CELL + 2.0 * MARGIN + 20.0);
    let mut out = String::new();
    open(&mut out, w, h);
    grid_frame(&mut out, map, labels);
    for c in map.populated() {
        let (x0, y0) = cell_origin(map, c.row, c.col);
        let (lo, hi) = bounds(c.foot_path.iter());
        let centre = (lo + hi) * 0.5;
        let scale = path_scale(c.extent);
        let k = scale.unwrap_or(0.0);
        let mut pts: Vec<String> = c
            .foot_path
            .iter()
            .map(|p| {
                let q = (*p - centre) * k;
                format!("{:.3},{:.3}", x0 + CELL / 2.0 + q.x, y0 + CELL / 2.0 - q.y)
            })
            .collect();
        if c.elite.error_count == 0 && pts.len() > 2 {
            pts.push(pts[0].clone());
        }
        let _ = writeln!(
            out,
            r##"<polyline class="path" data-row="{}" data-col="{}" data-fitness="{}" points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.5"/>"##,
            c.row,
            c.col,
            c.elite.fitness,
            pts.join(" ")
        );
        let label = scale.map_or_else(|| "n/a".to_string(), |s| format!("{s:.2}"));
        let _ = writeln!(
            out,
            r##"<text class="scale" data-scale="{}" x="{}" y="{}" text-anchor="end" font-size="10" fill="#555">{label}</text>"##,
            scale.unwrap_or(0.0),
            x0 + CELL - 3.0,
            y0 + CELL - 3.0
        );
    }
    out.push_str("</svg>\n");
    out
}

fn bounds<'a>(pts: impl Iterator<Item = &'a Point>) -> (Point, Point) {
    pts.fold(
        (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y))),
    )
}

/// The linkage at `step` (or its first feasible step), every moving node's
/// trajectory, and the foot path in bold.
pub fn linkage(l: &Linkage, t: &PathTrace, step: Option<usize>, caption: &str) -> String {
    const SIZE: f64 = 600.0;
    let all = t.positions.iter().flatten().flatten().chain(l.static_nodes.iter()).chain(std::iter::once(&Point::ORIGIN));
    let (lo, hi) = bounds(all);
    let extent = (hi.x - lo.x).max(hi.y - lo.y).max(1.0);
    let k = (SIZE - 2.0 * MARGIN) / extent;
    let tx = |p: Point| (MARGIN + (p.x - lo.x) * k, SIZE - MARGIN - (p.y - lo.y) * k);
    let mut out = String::new();
    open(&mut out, SIZE, SIZE + 30.0);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="24" font-size="13">{}</text>"#, escape(caption));

    for node in 0..l.node_count() {
        if !t.moving.get(node).copied().unwrap_or(false) || node == t.foot_index {
            continue;
        }
        let pts: Vec<String> = t.positions.iter().filter_map(|s| s[node]).map(|p| fmt_pt(tx(p))).collect();
        let _ = writeln!(out, r##"<polyline class="trajectory" points="{}" fill="none" stroke="#bbb" stroke-width="0.8"/>"##, pts.join(" "));
    }
    let mut foot: Vec<String> = t.foot_path.iter().map(|&p| fmt_pt(tx(p))).collect();
    if t.is_closed() && foot.len() > 2 {
        foot.push(foot[0].clone());
    }
    let _ = writeln!(out, r##"<polyline class="foot-path" points="{}" fill="none" stroke="#c0392b" stroke-width="2"/>"##, foot.join(" "));

    let shown = step.filter(|&s| s < t.steps && t.feasible[s]).or_else(|| t.feasible.iter().position(|&f| f));
    if let Some(s) = shown {
        let pos = &t.positions[s];
        for (i, b) in l.beams().iter().enumerate() {
            if let (Some(a), Some(c)) = (pos[b.a], pos[b.b]) {
                let ((x1, y1), (x2, y2)) = (tx(a), tx(c));
                let _ = writeln!(
                    out,
                    r##"<line class="beam" data-beam="{i}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#333" stroke-width="3" stroke-linecap="round"/>"##
                );
            }
        }
        for (node, p) in pos.iter().enumerate() {
            let Some(p) = p else { continue };
            let (x, y) = tx(*p);
            let (class, fill) = match node {
                MOTOR => ("motor", "#2c3e50"),
                n if (FIRST_STATIC..FIRST_JOINT).contains(&n) => ("static", "#7f8c8d"),
                n if n == t.foot_index => ("foot", "#c0392b"),
                _ => ("joint", "#ffffff"),
            };
            let _ = writeln!(out, r##"<circle class="{class}" data-node="{node}" cx="{x:.3}" cy="{y:.3}" r="4" fill="{fill}" stroke="#333"/>"##);
        }
    }
    out.push_str("</svg>\n");
    out
}

fn fmt_pt((x, y): (f64, f64)) -> String {
    format!("{x:.3},{y:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
