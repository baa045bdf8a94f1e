//! Minimal static SVG charts: polylines and a rectangular heatmap.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

pub struct Line<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart of one or more series sharing axes. `y_range` fixes the
/// vertical axis; otherwise it spans the data.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    lines: &[Line<'_>],
    y_range: Option<(f64, f64)>,
) -> String {
    let (x0, x1) = bounds(lines.iter().flat_map(|l| l.points.iter().map(|p| p.0)));
    let (y0, y1) = y_range.unwrap_or_else(|| bounds(lines.iter().flat_map(|l| l.points.iter().map(|p| p.1))));
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, title);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for (v, anchor_x) in [(x0, MARGIN), (x1, WIDTH - MARGIN)] {
        let _ = writeln!(
            out,
            r#"<text x="{anchor_x}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN + 16.0,
            tick(v)
        );
    }
    for (v, anchor_y) in [(y0, HEIGHT - MARGIN), (y1, MARGIN)] {
        let _ =
            writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, anchor_y + 4.0, tick(v));
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (k, line) in lines.iter().enumerate() {
        let mut pts = String::new();
        for &(x, y) in &line.points {
            let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y.clamp(y0, y1)));
        }
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1" points="{}"/>"#,
            line.color,
            pts.trim_end()
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
            WIDTH - MARGIN + 4.0,
            MARGIN + 14.0 * (k as f64 + 1.0),
            line.color,
            escape(line.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn tick(v: f64) -> String {
    crate::series::fmt_sig(v).chars().take(8).collect()
}

/// Diverging colour for `v` in `[-1, 1]`: blue below zero, white at zero,
/// red above.
pub fn diverging_color(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let fade = |f: f64| (255.0 * (1.0 - f.abs())).round() as u8;
    if v < 0.0 {
        format!("rgb({},{},255)", fade(v), fade(v))
    } else {
        format!("rgb(255,{},{})", fade(v), fade(v))
    }
}

/// Heatmap over a grid with `rows` (drawn bottom to top) and `cols` (left to
/// right). `values` is row-major; missing cells are grey.
pub fn heatmap(
    title: &str,
    col_label: &str,
    row_label: &str,
    cols: &[f64],
    rows: &[f64],
    values: &[Option<f64>],
) -> String {
    assert_eq!(values.len(), rows.len() * cols.len());
    let cw = (WIDTH - 2.0 * MARGIN) / cols.len().max(1) as f64;
    let rh = (HEIGHT - 2.0 * MARGIN) / rows.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, title);
    for (i, _) in rows.iter().enumerate() {
        for (j, _) in cols.iter().enumerate() {
            let fill = values[i * cols.len() + j].map_or_else(|| "rgb(160,160,160)".to_string(), diverging_color);
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                MARGIN + j as f64 * cw,
                HEIGHT - MARGIN - (i as f64 + 1.0) * rh,
                cw,
                rh
            );
        }
    }
    if let (Some(c0), Some(c1)) = (cols.first(), cols.last()) {
        let _ = writeln!(out, r#"<text x="{MARGIN}" y="{}">{}</text>"#, HEIGHT - MARGIN + 16.0, tick(*c0));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN,
            HEIGHT - MARGIN + 16.0,
            tick(*c1)
        );
    }
    if let (Some(r0), Some(r1)) = (rows.first(), rows.last()) {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            HEIGHT - MARGIN,
            tick(*r0)
        );
        let _ =
            writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, MARGIN - 4.0, MARGIN + 10.0, tick(*r1));
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(col_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(row_label)
    );
    out.push_str("</svg>\n");
    out
}
