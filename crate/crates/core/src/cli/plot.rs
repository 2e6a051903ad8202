//! Flat SVG scatter plot of note embeddings and the per-note regression table.

use std::fmt::Write as _;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
/// Fraction of the viewport left empty on each side.
pub const MARGIN: f64 = 0.05;

/// A labelled point in embedding space.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPoint {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Axis range; a zero-width range becomes the unit interval centred on it.
fn range(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo > 0.0 {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

/// Maps the bounding box of the points onto the viewport minus margins,
/// y axis pointing up.
pub fn project(points: &[LabeledPoint]) -> Vec<(f64, f64)> {
    let (x0, x1) = range(points.iter().map(|p| p.x));
    let (y0, y1) = range(points.iter().map(|p| p.y));
    let (mx, my) = (MARGIN * WIDTH, MARGIN * HEIGHT);
    let (w, h) = (WIDTH - 2.0 * mx, HEIGHT - 2.0 * my);
    points
        .iter()
        .map(|p| (mx + (p.x - x0) / (x1 - x0) * w, HEIGHT - my - (p.y - y0) / (y1 - y0) * h))
        .collect()
}

pub fn render_svg(title: &str, points: &[LabeledPoint]) -> String {
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )
    .unwrap();
    writeln!(svg, "<title>{}</title>", escape(title)).unwrap();
    writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white" stroke="none"/>"#).unwrap();
    writeln!(
        svg,
        r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#bbbbbb"/>"##,
        MARGIN * WIDTH,
        MARGIN * HEIGHT,
        WIDTH * (1.0 - 2.0 * MARGIN),
        HEIGHT * (1.0 - 2.0 * MARGIN)
    )
    .unwrap();
    for (point, (px, py)) in points.iter().zip(project(points)) {
        writeln!(
            svg,
            r##"<g class="note"><circle cx="{px:.3}" cy="{py:.3}" r="3" fill="#1f4e79"/><text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12">{}</text></g>"##,
            px + 5.0,
            py - 5.0,
            escape(&point.label)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

/// `token,pitch,e1..ed,fitted` rows, one per vocabulary note.
pub fn points_csv(tokens: &[&str], pitches: &[i32], rows: &[Vec<f64>], fitted: &[f64]) -> String {
    let dim = rows.first().map_or(0, Vec::len);
    let mut out = String::from("token,pitch");
    for k in 1..=dim {
        write!(out, ",e{k}").unwrap();
    }
    out.push_str(",fitted\n");
    for (((token, pitch), row), fit) in tokens.iter().zip(pitches).zip(rows).zip(fitted) {
        write!(out, "{token},{pitch}").unwrap();
        for v in row {
            write!(out, ",{v:.6}").unwrap();
        }
        writeln!(out, ",{fit:.6}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(label: &str, x: f64, y: f64) -> LabeledPoint {
        LabeledPoint { label: label.into(), x, y }
    }

    #[test]
    fn corners_hit_the_margins() {
        let coords = project(&[pt("a", -1.0, 2.0), pt("b", 3.0, 6.0)]);
        assert_eq!(coords[0], (32.0, 456.0));
        assert_eq!(coords[1], (608.0, 24.0));
    }

    #[test]
    fn degenerate_box_falls_back() {
        let coords = project(&[pt("a", 1.0, 1.0), pt("b", 1.0, 1.0)]);
        assert_eq!(coords[0], coords[1]);
        assert_eq!(coords[0], (320.0, 240.0));
        let svg = render_svg("t", &[pt("a", 1.0, 1.0), pt("b", 1.0, 1.0)]);
        assert_eq!(svg.matches(r#"cx="320.000" cy="240.000""#).count(), 2);
    }

    #[test]
    fn labels_are_escaped() {
        let svg = render_svg("a<b", &[pt("C#4", 0.0, 0.0), pt("x&y", 1.0, 1.0)]);
        assert!(svg.contains("<title>a&lt;b</title>"));
        assert!(svg.contains(">x&amp;y</text>"));
        assert_eq!(svg.matches("<text").count(), 2);
    }

    #[test]
    fn points_table() {
        let csv = points_csv(&["C4", "D4"], &[60, 62], &[vec![0.5, -0.25], vec![1.0, 0.0]], &[60.1, 61.9]);
        assert_eq!(
            csv,
            "token,pitch,e1,e2,fitted\nC4,60,0.500000,-0.250000,60.100000\nD4,62,1.000000,0.000000,61.900000\n"
        );
    }
}
