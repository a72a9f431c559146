//! Minimal hand-rolled SVG line plot of optimizer convergence.
//!
//! No plotting dependency: the output is a fixed 800x500 canvas with a
//! log-scale relative-error axis, one polyline per method and a legend.

use std::fmt::Write as _;

use crate::opt::{MethodKind, OptTrace};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Smallest relative error the plot resolves; values below are clamped.
const FLOOR: f64 = 1e-16;

fn color(method: MethodKind) -> &'static str {
    match method {
        MethodKind::GradientDescent => "#1f77b4",
        MethodKind::GaussNewton => "#d62728",
        MethodKind::NaturalPG => "#2ca02c",
    }
}

fn label(method: MethodKind) -> &'static str {
    match method {
        MethodKind::GradientDescent => "gradient",
        MethodKind::GaussNewton => "Gauss-Newton",
        MethodKind::NaturalPG => "natural gradient",
    }
}

/// Renders relative error against iteration for each trace.
///
/// Rows without a reference error are skipped; errors are clamped below at
/// `1e-16` so exact convergence still plots. Traces with no plottable rows
/// contribute only a legend entry.
pub fn render_rel_err_svg(traces: &[(MethodKind, &OptTrace)]) -> String {
    let series: Vec<(MethodKind, Vec<(f64, f64)>)> = traces
        .iter()
        .map(|(method, trace)| {
            let pts = trace
                .records
                .iter()
                .filter_map(|rec| {
                    rec.rel_err
                        .map(|e| (rec.iter as f64, e.max(FLOOR).log10()))
                })
                .collect();
            (*method, pts)
        })
        .collect();

    let x_max = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.0))
        .fold(1.0_f64, f64::max);
    let (mut y_min, mut y_max) = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().map(|p| p.1))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| {
            (lo.min(y), hi.max(y))
        });
    if !y_min.is_finite() || !y_max.is_finite() {
        y_min = -16.0;
        y_max = 0.0;
    }
    let y_lo = y_min.floor();
    let y_hi = (y_max.ceil() + f64::from(y_max.ceil() == y_max.floor())).min(y_lo + 40.0);

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_pos = |x: f64| MARGIN_LEFT + x / x_max * plot_w;
    let y_pos = |y: f64| MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">Convergence to the \
         optimal cost</text>",
        MARGIN_LEFT + plot_w / 2.0
    );

    // Horizontal grid lines and tick labels at integer powers of ten.
    let span = (y_hi - y_lo).max(1.0);
    let stride = (span / 8.0).ceil().max(1.0) as i64;
    let mut tick = y_lo as i64;
    while tick <= y_hi as i64 {
        let y = y_pos(tick as f64);
        let _ = writeln!(
            out,
            "<line x1=\"{MARGIN_LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\"/>",
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1e{tick}</text>",
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
        tick += stride;
    }

    // X ticks at roughly eight round positions.
    let x_stride = nice_stride(x_max);
    let mut x = 0.0;
    while x <= x_max + 0.5 * x_stride {
        let xp = x_pos(x.min(x_max));
        let _ = writeln!(
            out,
            "<line x1=\"{xp:.2}\" y1=\"{:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>",
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        );
        let _ = writeln!(
            out,
            "<text x=\"{xp:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x:.0}</text>",
            MARGIN_TOP + plot_h + 18.0
        );
        x += x_stride;
    }

    // Axis frame and labels.
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">iteration</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.2})\">relative cost error</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    // One polyline per method.
    for (method, pts) in &series {
        if pts.is_empty() {
            continue;
        }
        let mut coords = String::new();
        for (x, y) in pts {
            let _ = write!(coords, "{:.2},{:.2} ", x_pos(*x), y_pos(*y));
        }
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"/>",
            coords.trim_end(),
            color(*method)
        );
    }

    // Legend in the top-right corner of the plot area.
    for (idx, (method, _)) in series.iter().enumerate() {
        let ly = MARGIN_TOP + 14.0 + 18.0 * idx as f64;
        let lx = MARGIN_LEFT + plot_w - 160.0;
        let _ = writeln!(
            out,
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{}\" \
             stroke-width=\"2\"/>",
            lx + 24.0,
            color(*method)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            lx + 30.0,
            ly + 4.0,
            label(*method)
        );
    }

    out.push_str("</svg>\n");
    out
}

/// Round tick spacing (1, 2, 5 times a power of ten) giving at most ten ticks.
fn nice_stride(span: f64) -> f64 {
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    (step * mag).max(1.0)
}
