//! SVG emitters for factor planes and dendrograms.
//!
//! Output is plain SVG 1.1 text built deterministically: the same inputs
//! produce byte-identical documents. Factor planes keep one unit length on
//! both axes (equal aspect), so displays built from the same space line up
//! exactly even when supplementary points widen the view.

use corana::ca::FactorSpace;
use corana::seqclust::Dendrogram;

use crate::error::CliError;

/// What to draw on a factor plane.
#[derive(Debug, Clone)]
pub struct PlaneRender {
    /// Horizontal factor, 0-based.
    pub factor_x: usize,
    /// Vertical factor, 0-based.
    pub factor_y: usize,
    pub show_rows: bool,
    pub show_cols: bool,
    /// Supplementary points: label plus full factor coordinates.
    pub supplementary: Vec<(String, Vec<f64>)>,
    /// Point sets larger than this render as unlabelled dots.
    pub label_limit: usize,
    pub width: u32,
    pub height: u32,
}

impl Default for PlaneRender {
    fn default() -> Self {
        PlaneRender {
            factor_x: 0,
            factor_y: 1,
            show_rows: true,
            show_cols: true,
            supplementary: Vec::new(),
            label_limit: 40,
            width: 640,
            height: 640,
        }
    }
}

const MARGIN: f64 = 48.0;

fn px(v: f64) -> String {
    format!("{v:.2}")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Render a factor plane as a standalone SVG document.
///
/// `overlays`, when given, sizes the active row glyphs: radii grow
/// monotonically with the overlay value (area-proportional).
pub fn emit_plane_svg(
    space: &FactorSpace,
    render: &PlaneRender,
    overlays: Option<&[f64]>,
) -> Result<String, CliError> {
    let n = space.n_factors();
    if render.factor_x >= n || render.factor_y >= n {
        return Err(CliError::input(
            "plot",
            format!(
                "factor pair ({}, {}) out of range: space has {} factors",
                render.factor_x + 1,
                render.factor_y + 1,
                n
            ),
        ));
    }
    if render.factor_x == render.factor_y {
        return Err(CliError::input("plot", "plane factors must differ"));
    }
    if let Some(sizes) = overlays {
        if sizes.len() != space.row_labels().len() {
            return Err(CliError::input(
                "plot",
                format!(
                    "overlay has {} values for {} rows",
                    sizes.len(),
                    space.row_labels().len()
                ),
            ));
        }
        if sizes.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(CliError::input("plot", "overlay values must be non-negative"));
        }
    }
    for (label, coords) in &render.supplementary {
        if coords.len() < n {
            return Err(CliError::input(
                "plot",
                format!("supplementary point `{label}` has {} coordinates, space has {n} factors", coords.len()),
            ));
        }
    }

    let (fx, fy) = (render.factor_x, render.factor_y);
    let mut points: Vec<(String, f64, f64, &'static str)> = Vec::new();
    if render.show_rows {
        for (i, label) in space.row_labels().iter().enumerate() {
            points.push((
                label.clone(),
                space.row_coords()[(i, fx)],
                space.row_coords()[(i, fy)],
                "row",
            ));
        }
    }
    if render.show_cols {
        for (j, label) in space.col_labels().iter().enumerate() {
            points.push((
                label.clone(),
                space.col_coords()[(j, fx)],
                space.col_coords()[(j, fy)],
                "col",
            ));
        }
    }
    for (label, coords) in &render.supplementary {
        points.push((label.clone(), coords[fx], coords[fy], "sup"));
    }

    let extent = points
        .iter()
        .flat_map(|(_, x, y, _)| [x.abs(), y.abs()])
        .fold(0.0_f64, f64::max)
        .max(1e-9);
    let (w, h) = (render.width as f64, render.height as f64);
    let scale = ((w.min(h) / 2.0) - MARGIN) / extent;
    let (cx, cy) = (w / 2.0, h / 2.0);
    let to_px = |x: f64, y: f64| (cx + x * scale, cy - y * scale);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        render.width, render.height, render.width, render.height
    ));
    svg.push_str(&format!(
        "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        render.width, render.height
    ));

    // Axes through the origin, annotated with percent inertia.
    let x_pct = 100.0 * space.inertia_explained(fx);
    let y_pct = 100.0 * space.inertia_explained(fy);
    svg.push_str("<g class=\"axes\" stroke=\"#999999\" stroke-width=\"1\">\n");
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        px(MARGIN / 2.0),
        px(cy),
        px(w - MARGIN / 2.0),
        px(cy)
    ));
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>\n",
        px(cx),
        px(MARGIN / 2.0),
        px(cx),
        px(h - MARGIN / 2.0)
    ));
    svg.push_str("</g>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\" fill=\"#333333\">Factor {} ({:.1}%)</text>\n",
        px(w - MARGIN / 2.0),
        px(cy - 6.0),
        fx + 1,
        x_pct
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"start\" fill=\"#333333\" transform=\"rotate(-90 {} {})\">Factor {} ({:.1}%)</text>\n",
        px(cx + 6.0),
        px(MARGIN / 2.0 + 10.0),
        px(cx + 6.0),
        px(MARGIN / 2.0 + 10.0),
        fy + 1,
        y_pct
    ));

    let overlay_max = overlays
        .map(|v| v.iter().fold(0.0_f64, |a, &b| a.max(b)))
        .unwrap_or(0.0);
    let counts = [
        points.iter().filter(|p| p.3 == "row").count(),
        points.iter().filter(|p| p.3 == "col").count(),
        points.iter().filter(|p| p.3 == "sup").count(),
    ];
    let labelled = |set: &str| -> bool {
        let size = match set {
            "row" => counts[0],
            "col" => counts[1],
            _ => counts[2],
        };
        size <= render.label_limit
    };

    let mut row_seen = 0usize;
    for (label, x, y, set) in &points {
        let (sx, sy) = to_px(*x, *y);
        match *set {
            "row" => {
                let r = match overlays {
                    Some(sizes) if overlay_max > 0.0 => {
                        3.0 + 12.0 * (sizes[row_seen] / overlay_max).sqrt()
                    }
                    _ => 4.0,
                };
                row_seen += 1;
                svg.push_str(&format!(
                    "<circle class=\"pt row\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#1f77b4\" fill-opacity=\"0.75\"/>\n",
                    px(sx),
                    px(sy),
                    px(r)
                ));
            }
            "col" => {
                svg.push_str(&format!(
                    "<rect class=\"pt col\" x=\"{}\" y=\"{}\" width=\"7\" height=\"7\" fill=\"#d62728\"/>\n",
                    px(sx - 3.5),
                    px(sy - 3.5)
                ));
            }
            _ => {
                svg.push_str(&format!(
                    "<circle class=\"pt sup\" cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\"/>\n",
                    px(sx),
                    px(sy)
                ));
            }
        }
        if labelled(set) {
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"10\" fill=\"#333333\">{}</text>\n",
                px(sx + 6.0),
                px(sy + 3.0),
                xml_escape(label)
            ));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Render a dendrogram as SVG: leaves on the baseline in sequence order,
/// merge brackets at heights proportional to their levels.
pub fn emit_dendrogram_svg(d: &Dendrogram) -> String {
    let n = d.n_leaves();
    let width = (2.0 * MARGIN + 28.0 * (n.max(2) - 1) as f64).max(320.0);
    let height = 420.0;
    let baseline = height - MARGIN;
    let top = MARGIN;
    let max_level = d.root_level().max(1e-12);
    let leaf_x = |i: usize| MARGIN + 28.0 * i as f64;
    let level_y = |level: f64| baseline - (level / max_level) * (baseline - top);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = width.ceil(),
        h = height
    ));
    svg.push_str(&format!(
        "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        width.ceil(),
        height
    ));

    // Active segment -> (center x, y of its current top).
    let mut active: Vec<((usize, usize), (f64, f64))> = (0..n)
        .map(|i| ((i, i + 1), (leaf_x(i), baseline)))
        .collect();
    svg.push_str("<g class=\"tree\" stroke=\"#333333\" stroke-width=\"1.2\" fill=\"none\">\n");
    for merge in d.merges() {
        let li = active
            .iter()
            .position(|(seg, _)| *seg == (merge.left.start, merge.left.end))
            .expect("left segment active");
        let (_, (lx, ly)) = active.remove(li);
        let ri = active
            .iter()
            .position(|(seg, _)| *seg == (merge.right.start, merge.right.end))
            .expect("right segment active");
        let (_, (rx, ry)) = active.remove(ri);
        let y = level_y(merge.level);
        svg.push_str(&format!(
            "<path d=\"M {} {} V {} H {} V {}\"/>\n",
            px(lx),
            px(ly),
            px(y),
            px(rx),
            px(ry)
        ));
        active.insert(
            li,
            (
                (merge.left.start, merge.right.end),
                ((lx + rx) / 2.0, y),
            ),
        );
    }
    svg.push_str("</g>\n");

    for (i, label) in d.leaves().iter().enumerate() {
        let x = leaf_x(i);
        svg.push_str(&format!(
            "<text class=\"leaf\" font-size=\"10\" fill=\"#333333\" text-anchor=\"end\" transform=\"rotate(-60 {x} {y})\" x=\"{x}\" y=\"{y}\">{label}</text>\n",
            x = px(x),
            y = px(baseline + 14.0),
            label = xml_escape(label)
        ));
    }
    // Level scale on the left edge.
    svg.push_str(&format!(
        "<text font-size=\"10\" fill=\"#666666\" x=\"4\" y=\"{}\">{:.3}</text>\n",
        px(top),
        max_level
    ));
    svg.push_str(&format!(
        "<text font-size=\"10\" fill=\"#666666\" x=\"4\" y=\"{}\">0</text>\n",
        px(baseline)
    ));
    svg.push_str("</svg>\n");
    svg
}
