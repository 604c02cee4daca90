//! CSV table and SVG bar chart for a classifier comparison.

use std::fmt::Write as _;

use super::compare::{ComparisonRow, ComparisonTable};
use crate::models::ModelKind;

pub const REPORT_HEADER: &str = "kind,accuracy,mae";

pub fn report_csv(table: &ComparisonTable) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for row in &table.rows {
        let _ = writeln!(out, "{},{:.4},{:.4}", row.kind, row.accuracy, row.mae);
    }
    out
}

pub fn parse_report_csv(text: &str) -> Result<ComparisonTable, String> {
    let mut lines = text.lines();
    if lines.next() != Some(REPORT_HEADER) {
        return Err(format!("report must start with {REPORT_HEADER:?}"));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
        let err = || format!("report line {}: {line:?}", i + 2);
        let mut parts = line.split(',');
        let (Some(kind), Some(acc), Some(mae), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(err());
        };
        rows.push(ComparisonRow {
            kind: kind.parse::<ModelKind>().map_err(|_| err())?,
            accuracy: acc.parse().map_err(|_| err())?,
            mae: mae.parse().map_err(|_| err())?,
        });
    }
    Ok(ComparisonTable::new(rows))
}

const WIDTH: f64 = 640.0;
const LEFT: f64 = 120.0;
const RIGHT: f64 = 60.0;
const TOP: f64 = 48.0;
const BAR: f64 = 26.0;
const GAP: f64 = 10.0;

/// Horizontal accuracy bars on a fixed 0..1 axis, best first. Output bytes
/// depend only on the table and country.
pub fn accuracy_svg(table: &ComparisonTable, country: &str) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let n = table.rows.len() as f64;
    let plot_h = n * (BAR + GAP) + GAP;
    let height = TOP + plot_h + 40.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{height:.0}" viewBox="0 0 {WIDTH:.0} {height:.0}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="28" text-anchor="middle" font-size="16">Accuracy comparison for {country}</text>"#,
        WIDTH / 2.0
    );
    for tick in 0..=4 {
        let v = f64::from(tick) / 4.0;
        let x = LEFT + v * plot_w;
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.1}" y1="{TOP:.1}" x2="{x:.1}" y2="{:.1}" stroke="#cccccc"/>"##,
            TOP + plot_h
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{v:.2}</text>"#,
            TOP + plot_h + 18.0
        );
    }
    for (i, row) in table.rows.iter().enumerate() {
        let y = TOP + GAP + i as f64 * (BAR + GAP);
        let w = row.accuracy.clamp(0.0, 1.0) * plot_w;
        let fill = if row.kind == ModelKind::Forest { "#2b6cb0" } else { "#90a4ae" };
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + BAR * 0.7,
            row.kind
        );
        let _ = writeln!(
            svg,
            r#"<rect class="bar" data-kind="{}" x="{LEFT:.1}" y="{y:.1}" width="{w:.1}" height="{BAR:.1}" fill="{fill}"/>"#,
            row.kind
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}">{:.4}</text>"#,
            LEFT + w + 6.0,
            y + BAR * 0.7,
            row.accuracy
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// The report CSV and SVG figure for one country.
pub fn render_report(table: &ComparisonTable, country: &str) -> (String, String) {
    (report_csv(table), accuracy_svg(table, country))
}
