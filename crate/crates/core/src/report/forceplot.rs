use std::cmp::Ordering;
use std::fmt::Write;

use super::Report;

/// Total SVG width in pixels.
pub const FORCE_PLOT_WIDTH: f64 = 900.0;
/// Left edge of the value axis.
pub const PLOT_LEFT: f64 = 40.0;
/// Width of the value axis.
pub const PLOT_WIDTH: f64 = 820.0;

const PANEL_HEIGHT: f64 = 120.0;
const BAR_Y: f64 = 42.0;
const BAR_HEIGHT: f64 = 26.0;
const MIN_LABEL_WIDTH: f64 = 48.0;

struct Bar<'a> {
    name: &'a str,
    phi: f64,
    from: f64,
    to: f64,
}

/// Renders one stacked panel per output.
///
/// Positive contributions are laid from the base value rightwards, largest
/// first, and negative ones from the end of the positive run back down to the
/// prediction. Every panel carries its axis bounds as `data-*` attributes so the
/// pixel geometry can be mapped back to values.
pub fn render_force_plot(report: &Report) -> String {
    let e = &report.explanation;
    let outputs = e.output_dim();
    let height = PANEL_HEIGHT * outputs as f64 + 30.0;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{FORCE_PLOT_WIDTH:.0}" height="{height:.0}" viewBox="0 0 {FORCE_PLOT_WIDTH:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{PLOT_LEFT:.0}" y="18" font-size="13">{} attribution, {} estimator, {}</text>"#,
        e.method,
        e.estimator.name(),
        escape(&report.instance_label)
    );
    for k in 0..outputs {
        let name = report.output_names.get(k).map(String::as_str).unwrap_or("output");
        panel(&mut svg, report, k, name, 30.0 + PANEL_HEIGHT * k as f64);
    }
    svg.push_str("</svg>\n");
    svg
}

fn panel(svg: &mut String, report: &Report, k: usize, output: &str, top: f64) {
    let e = &report.explanation;
    let base = e.base_values[k];
    let pred = e.prediction[k];

    let mut order: Vec<usize> = (0..e.n_features()).filter(|&i| e.phi[k][i] != 0.0).collect();
    order.sort_by(|&a, &b| {
        e.phi[k][b]
            .abs()
            .partial_cmp(&e.phi[k][a].abs())
            .unwrap_or(Ordering::Equal)
            .then_with(|| e.feature_names[a].cmp(&e.feature_names[b]))
    });

    let mut bars = Vec::with_capacity(order.len());
    let mut cursor = base;
    for &i in order.iter().filter(|&&i| e.phi[k][i] > 0.0) {
        bars.push(Bar {
            name: &e.feature_names[i],
            phi: e.phi[k][i],
            from: cursor,
            to: cursor + e.phi[k][i],
        });
        cursor += e.phi[k][i];
    }
    let peak = cursor;
    for &i in order.iter().filter(|&&i| e.phi[k][i] < 0.0) {
        bars.push(Bar {
            name: &e.feature_names[i],
            phi: e.phi[k][i],
            from: cursor + e.phi[k][i],
            to: cursor,
        });
        cursor += e.phi[k][i];
    }

    let mut lo = base.min(pred).min(peak).min(cursor);
    let mut hi = base.max(pred).max(peak).max(cursor);
    let span = hi - lo;
    if span > 0.0 {
        lo -= 0.05 * span;
        hi += 0.05 * span;
    } else {
        lo -= 0.5;
        hi += 0.5;
    }
    let px = |v: f64| PLOT_LEFT + (v - lo) / (hi - lo) * PLOT_WIDTH;

    let _ = writeln!(
        svg,
        r#"<g class="panel" data-output="{}" data-axis-lo="{lo:?}" data-axis-hi="{hi:?}" data-base="{base:?}" data-pred="{pred:?}" data-x0="{PLOT_LEFT:.0}" data-axis-width="{PLOT_WIDTH:.0}" transform="translate(0,{top:.0})">"#,
        escape(output)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{PLOT_LEFT:.0}" y="14" font-weight="bold">{}</text><text x="{:.0}" y="14" text-anchor="end">base {base:.4}  f(x) {pred:.4}</text>"#,
        escape(output),
        PLOT_LEFT + PLOT_WIDTH
    );
    let axis_y = BAR_Y + BAR_HEIGHT + 6.0;
    let _ = writeln!(
        svg,
        r##"<line class="axis" x1="{PLOT_LEFT:.3}" y1="{axis_y:.0}" x2="{:.3}" y2="{axis_y:.0}" stroke="#888"/>"##,
        PLOT_LEFT + PLOT_WIDTH
    );
    for (value, anchor) in [(lo, "start"), (hi, "end")] {
        let _ = writeln!(
            svg,
            r##"<text x="{:.3}" y="{:.0}" text-anchor="{anchor}" fill="#555">{value:.4}</text>"##,
            px(value),
            axis_y + 14.0
        );
    }

    for bar in &bars {
        let (class, fill) = if bar.phi > 0.0 {
            ("bar pos", "#d6336c")
        } else {
            ("bar neg", "#1c7ed6")
        };
        let x = px(bar.from);
        let w = px(bar.to) - x;
        let _ = writeln!(
            svg,
            r##"<rect class="{class}" data-feature="{}" data-phi="{:?}" x="{x:.3}" y="{BAR_Y:.0}" width="{w:.3}" height="{BAR_HEIGHT:.0}" fill="{fill}" stroke="#fff" stroke-width="0.5"><title>{} = {:.4} (φ {:+.4})</title></rect>"##,
            escape(bar.name),
            bar.phi,
            escape(bar.name),
            e.instance[e.feature_names.iter().position(|n| n == bar.name).unwrap_or(0)],
            bar.phi
        );
        if w >= MIN_LABEL_WIDTH {
            let _ = writeln!(
                svg,
                r##"<text x="{:.3}" y="{:.0}" text-anchor="middle" fill="#fff">{}</text>"##,
                x + w / 2.0,
                BAR_Y + BAR_HEIGHT / 2.0 + 4.0,
                escape(bar.name)
            );
        }
    }

    let bx = px(base);
    let _ = writeln!(
        svg,
        r##"<line class="base" x1="{bx:.3}" y1="{:.0}" x2="{bx:.3}" y2="{:.0}" stroke="#333" stroke-dasharray="3,2"/><text x="{bx:.3}" y="{:.0}" text-anchor="middle">base</text>"##,
        BAR_Y - 10.0,
        axis_y,
        BAR_Y - 13.0
    );
    let fx = px(pred);
    let _ = writeln!(
        svg,
        r##"<path class="prediction" d="M {fx:.3} {axis_y:.0} l -5 8 l 10 0 z" fill="#333"/><text x="{fx:.3}" y="{:.0}" text-anchor="middle" font-weight="bold">f(x)</text>"##,
        axis_y + 28.0
    );
    svg.push_str("</g>\n");
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
