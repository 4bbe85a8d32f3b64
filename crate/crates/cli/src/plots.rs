//! Minimal SVG renderings of the box summaries and occupancy grids.

use std::fmt::Write as _;

use poetics_core::stats::TukeySummary;
use poetics_core::OccupancyGrid;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Horizontal box plots of poem length, one row per style.
pub fn boxplot_svg(title: &str, rows: &[(String, TukeySummary<f64>)]) -> String {
    const LEFT: f64 = 170.0;
    const WIDTH: f64 = 560.0;
    const ROW: f64 = 28.0;
    const TOP: f64 = 40.0;

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, s) in rows {
        lo = lo.min(s.whisker_low).min(s.outliers.first().copied().unwrap_or(f64::INFINITY));
        hi = hi.max(s.whisker_high).max(s.outliers.last().copied().unwrap_or(f64::NEG_INFINITY));
    }
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    lo = lo.min(0.0);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x = |v: f64| LEFT + (v - lo) / span * WIDTH;
    let height = TOP + ROW * rows.len() as f64 + 40.0;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{height:.0}" font-family="sans-serif" font-size="12">"#,
        LEFT + WIDTH + 30.0
    );
    let _ = writeln!(svg, r#"<text x="10" y="20" font-size="14">{}</text>"#, escape(title));
    for (i, (style, s)) in rows.iter().enumerate() {
        let y = TOP + ROW * i as f64 + ROW / 2.0;
        let half = ROW * 0.3;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{} (n={})</text>"#,
            LEFT - 8.0,
            y + 4.0,
            escape(style),
            s.n
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black"/>"#,
            x(s.whisker_low),
            x(s.whisker_high)
        );
        let _ = writeln!(
            svg,
            r##"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="#9ecae1" stroke="black"/>"##,
            x(s.q1),
            y - half,
            (x(s.q3) - x(s.q1)).max(1.0),
            2.0 * half
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{m:.1}" y1="{:.1}" x2="{m:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>"#,
            y - half,
            y + half,
            m = x(s.median)
        );
        for o in &s.outliers {
            let _ = writeln!(svg, r#"<circle cx="{:.1}" cy="{y:.1}" r="2.5" fill="none" stroke="black"/>"#, x(*o));
        }
    }
    let axis_y = TOP + ROW * rows.len() as f64 + 10.0;
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT:.1}" y1="{axis_y:.1}" x2="{:.1}" y2="{axis_y:.1}" stroke="black"/>"#,
        LEFT + WIDTH
    );
    for k in 0..=4 {
        let v = lo + span * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.0}</text>"#,
            x(v),
            axis_y + 16.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Grayscale heatmap, darker where more poems have ink.
pub fn heatmap_svg(title: &str, grid: &OccupancyGrid) -> String {
    const CELL: f64 = 6.0;
    const TOP: f64 = 30.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" font-family="sans-serif" font-size="12">"#,
        CELL * grid.cols as f64 + 20.0,
        TOP + CELL * grid.rows as f64 + 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="10" y="20" font-size="14">{} (n={})</text>"#,
        escape(title),
        grid.poems
    );
    let _ = writeln!(
        svg,
        r##"<rect x="10" y="{TOP}" width="{:.0}" height="{:.0}" fill="white" stroke="#ccc"/>"##,
        CELL * grid.cols as f64,
        CELL * grid.rows as f64
    );
    for (r, row) in grid.cells.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if *v > 0.0 {
                let _ = writeln!(
                    svg,
                    r#"<rect x="{:.0}" y="{:.0}" width="{CELL}" height="{CELL}" fill="black" fill-opacity="{v:.3}"/>"#,
                    10.0 + CELL * c as f64,
                    TOP + CELL * r as f64
                );
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
