//! Static SVG figures: the similarity heatmap and the suite dendrogram.

use std::fmt::Write;

use crate::coverage::{leaf_order, Dendrogram, SimilarityMatrix};

const CELL: f64 = 56.0;
const LABEL_SPACE: f64 = 96.0;
const FONT: &str = "font-family=\"sans-serif\"";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Linear white-to-navy ramp over [0, 1].
fn color(value: f64) -> String {
    let t = value.clamp(0.0, 1.0);
    let (lo, hi) = ((255.0, 255.0, 255.0), (8.0, 48.0, 107.0));
    let mix = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(lo.0, hi.0), mix(lo.1, hi.1), mix(lo.2, hi.2))
}

/// Heatmap with rows and columns in `order`, each cell annotated with its
/// value to two decimals.
pub fn similarity_heatmap_svg(sim: &SimilarityMatrix, order: &[usize]) -> String {
    let m = order.len();
    let ids = sim.suite_ids();
    let values = sim.values();
    let size = LABEL_SPACE + CELL * m as f64;
    let legend_w = 24.0;
    let width = size + 40.0 + legend_w + 40.0;
    let height = size + 20.0;
    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    )
    .unwrap();
    writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    for (c, &j) in order.iter().enumerate() {
        let x = LABEL_SPACE + CELL * (c as f64 + 0.5);
        writeln!(
            svg,
            "<text x=\"{x}\" y=\"{}\" {FONT} font-size=\"11\" text-anchor=\"start\" transform=\"rotate(-45 {x} {})\">{}</text>",
            LABEL_SPACE - 6.0,
            LABEL_SPACE - 6.0,
            escape(&ids[j])
        )
        .unwrap();
    }
    for (r, &i) in order.iter().enumerate() {
        let y = LABEL_SPACE + CELL * r as f64;
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"11\" text-anchor=\"end\">{}</text>",
            LABEL_SPACE - 6.0,
            y + CELL * 0.5 + 4.0,
            escape(&ids[i])
        )
        .unwrap();
        for (c, &j) in order.iter().enumerate() {
            let v = values[i][j];
            let x = LABEL_SPACE + CELL * c as f64;
            writeln!(
                svg,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL}\" height=\"{CELL}\" fill=\"{}\" stroke=\"#999999\" stroke-width=\"0.5\"/>",
                color(v)
            )
            .unwrap();
            let ink = if v > 0.55 { "white" } else { "black" };
            writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"12\" text-anchor=\"middle\" fill=\"{ink}\">{v:.2}</text>",
                x + CELL * 0.5,
                y + CELL * 0.5 + 4.0
            )
            .unwrap();
        }
    }
    // color bar
    let bar_x = size + 40.0;
    let steps = 20;
    let step_h = CELL * m as f64 / steps as f64;
    for s in 0..steps {
        let v = 1.0 - (s as f64 + 0.5) / steps as f64;
        writeln!(
            svg,
            "<rect x=\"{bar_x}\" y=\"{}\" width=\"{legend_w}\" height=\"{step_h}\" fill=\"{}\"/>",
            LABEL_SPACE + step_h * s as f64,
            color(v)
        )
        .unwrap();
    }
    for (label, y) in [("1", LABEL_SPACE + 4.0), ("0", LABEL_SPACE + CELL * m as f64)] {
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{y}\" {FONT} font-size=\"10\">{label}</text>",
            bar_x + legend_w + 4.0
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// Horizontal-leaf dendrogram; leaves along the bottom in leaf order, merge
/// heights on a linear [0, max distance] axis.
pub fn dendrogram_svg(dendrogram: &Dendrogram) -> String {
    let m = dendrogram.leaf_ids.len();
    let order = leaf_order(dendrogram);
    let spacing = 80.0;
    let plot_h = 240.0;
    let (left, top, bottom) = (60.0, 20.0, 70.0);
    let width = left + spacing * m as f64 + 20.0;
    let height = top + plot_h + bottom;
    let max_h = dendrogram
        .merges
        .iter()
        .map(|mg| mg.distance)
        .fold(0.0f64, f64::max)
        .max(1e-12);

    let mut x_of = vec![0.0; 2 * m - 1];
    for (pos, &leaf) in order.iter().enumerate() {
        x_of[leaf] = left + spacing * (pos as f64 + 0.5);
    }
    let y_of = |h: f64| top + plot_h * (1.0 - h / max_h);

    let mut svg = String::new();
    writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    )
    .unwrap();
    writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>").unwrap();
    // axis
    writeln!(
        svg,
        "<line x1=\"{}\" y1=\"{top}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        left - 10.0,
        left - 10.0,
        top + plot_h
    )
    .unwrap();
    for tick in 0..=4 {
        let h = max_h * tick as f64 / 4.0;
        let y = y_of(h);
        writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" {FONT} font-size=\"10\" text-anchor=\"end\">{h:.2}</text>",
            left - 14.0,
            y + 3.0
        )
        .unwrap();
    }
    for (t, merge) in dendrogram.merges.iter().enumerate() {
        let node = m + t;
        let (xl, xr) = (x_of[merge.left], x_of[merge.right]);
        let (yl, yr) = (
            y_of(dendrogram.height(merge.left)),
            y_of(dendrogram.height(merge.right)),
        );
        let y = y_of(merge.distance);
        writeln!(
            svg,
            "<path d=\"M{xl} {yl} V{y} H{xr} V{yr}\" fill=\"none\" stroke=\"#08306b\" stroke-width=\"1.5\"/>"
        )
        .unwrap();
        x_of[node] = (xl + xr) / 2.0;
    }
    for &leaf in &order {
        let x = x_of[leaf];
        writeln!(
            svg,
            "<text x=\"{x}\" y=\"{}\" {FONT} font-size=\"11\" text-anchor=\"end\" transform=\"rotate(-45 {x} {})\">{}</text>",
            top + plot_h + 14.0,
            top + plot_h + 14.0,
            escape(&dendrogram.leaf_ids[leaf])
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
