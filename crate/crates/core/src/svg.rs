//! SVG rendering of correlation circles.

use std::fmt::Write;

use crate::stats::CorrelationCircle;

const PANEL: f64 = 420.0;
const SCALE: f64 = 160.0;

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// One panel per circle, side by side. Inside each panel a group maps data
/// units to pixels, so the unit circle is drawn with `r="1"`.
pub fn render_circles(panels: &[(&str, &CorrelationCircle)]) -> String {
    let width = PANEL * panels.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL}" viewBox="0 0 {width} {PANEL}" font-family="sans-serif" font-size="12">"#
    );
    s.push_str(
        "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"7\" markerHeight=\"7\" orient=\"auto-start-reverse\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#1f4e79\"/></marker></defs>\n",
    );
    for (p, (title, circle)) in panels.iter().enumerate() {
        let cx = PANEL * p as f64 + PANEL / 2.0;
        let cy = PANEL / 2.0;
        let _ = writeln!(s, r#"<g class="panel">"#);
        let _ = writeln!(
            s,
            r#"<text x="{cx}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            escape(title)
        );
        let _ = writeln!(
            s,
            r#"<g transform="translate({cx} {cy}) scale({SCALE} {neg})" fill="none" stroke-width="1.2">"#,
            neg = -SCALE
        );
        let _ = writeln!(
            s,
            "<circle cx=\"0\" cy=\"0\" r=\"1\" stroke=\"#555\" vector-effect=\"non-scaling-stroke\"/>"
        );
        let _ = writeln!(
            s,
            "<line class=\"axis\" x1=\"-1.1\" y1=\"0\" x2=\"1.1\" y2=\"0\" stroke=\"#999\" stroke-dasharray=\"4 3\" vector-effect=\"non-scaling-stroke\"/>"
        );
        let _ = writeln!(
            s,
            "<line class=\"axis\" x1=\"0\" y1=\"-1.1\" x2=\"0\" y2=\"1.1\" stroke=\"#999\" stroke-dasharray=\"4 3\" vector-effect=\"non-scaling-stroke\"/>"
        );
        for v in &circle.variables {
            let _ = writeln!(
                s,
                "<line class=\"arrow\" x1=\"0\" y1=\"0\" x2=\"{:.6}\" y2=\"{:.6}\" stroke=\"#1f4e79\" marker-end=\"url(#head)\" vector-effect=\"non-scaling-stroke\"/>",
                v.x, v.y
            );
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="start">C1</text>"#,
            cx + 1.12 * SCALE,
            cy - 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">C2</text>"#,
            cx,
            cy - 1.14 * SCALE
        );
        for v in &circle.variables {
            let (tx, ty) = (cx + v.x * SCALE * 1.06, cy - v.y * SCALE * 1.06);
            let anchor = if v.x < 0.0 { "end" } else { "start" };
            let _ = writeln!(
                s,
                r#"<text class="label" x="{tx:.1}" y="{ty:.1}" text-anchor="{anchor}">{}</text>"#,
                escape(&v.label)
            );
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}
