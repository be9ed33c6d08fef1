//! Minimal self-contained SVG line+marker plots.
//!
//! The figures are verification aids, not the data product (that is the CSV
//! next to them), so the plotter stays deliberately small: linear axes with
//! five ticks, polylines, three marker shapes, and a legend. No external
//! renderer, stylesheet, or font is referenced; any SVG viewer shows the
//! file as-is.
//!
//! When every finite ordinate is positive and the values span more than
//! three decades, the y axis switches to log10 (the label says so) —
//! adaptive error curves shrink geometrically and would otherwise collapse
//! onto the axis.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 22.0;
const MARGIN_TOP: f64 = 44.0;
const MARGIN_BOTTOM: f64 = 58.0;

/// Fixed series palette (colorblind-safe defaults).
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Decades of spread beyond which the y axis switches to log10.
const LOG_SWITCH_RATIO: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Marker {
    Circle,
    Square,
    None,
}

/// One plotted series: points in data coordinates plus styling.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub marker: Marker,
    pub dashed: bool,
    /// Draw the connecting polyline (false = markers only).
    pub line: bool,
}

impl Series {
    pub fn new(label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.to_string(),
            points,
            marker: Marker::Circle,
            dashed: false,
            line: true,
        }
    }

    pub fn marker(mut self, marker: Marker) -> Self {
        self.marker = marker;
        self
    }

    pub fn dashed(mut self) -> Self {
        self.dashed = true;
        self
    }

    pub fn markers_only(mut self) -> Self {
        self.line = false;
        self
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(1e-3..1e4).contains(&a) {
        return format!("{v:.1e}");
    }
    let mut s = format!("{v:.4}");
    while s.contains('.') && (s.ends_with('0') || s.ends_with('.')) {
        s.pop();
    }
    s
}

/// (min, max) over finite values, padded so flat data stays visible.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        return (0.0, 1.0); // no finite data: arbitrary frame
    }
    if lo == hi {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

/// Render a complete standalone SVG document.
pub fn render_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    // Decide on the y transform before computing ranges.
    let finite_y: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|&(_, y)| y))
        .filter(|y| y.is_finite())
        .collect();
    let log_y = !finite_y.is_empty() && finite_y.iter().all(|&y| y > 0.0) && {
        let (lo, hi) = finite_y
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &y| {
                (l.min(y), h.max(y))
            });
        hi / lo > LOG_SWITCH_RATIO
    };
    let ty = |y: f64| if log_y { y.log10() } else { y };
    let ylabel_full = if log_y {
        format!("log10 {ylabel}")
    } else {
        ylabel.to_string()
    };

    let (x_lo, x_hi) = padded_range(series.iter().flat_map(|s| s.points.iter().map(|&(x, _)| x)));
    let (y_lo, y_hi) = padded_range(series.iter().flat_map(|s| {
        s.points
            .iter()
            .filter(|p| p.1.is_finite())
            .map(|&(_, y)| ty(y))
    }));

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_TOP + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"26\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\" fill=\"#222\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );

    // Grid and ticks (five per axis).
    for t in 0..=4 {
        let f = t as f64 / 4.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let xp = px(xv);
        let yp = py(yv);
        let _ = writeln!(
            svg,
            "<line x1=\"{xp:.1}\" y1=\"{:.1}\" x2=\"{xp:.1}\" y2=\"{:.1}\" stroke=\"#e5e5e5\"/>",
            MARGIN_TOP,
            MARGIN_TOP + plot_h
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{:.1}\" y1=\"{yp:.1}\" x2=\"{:.1}\" y2=\"{yp:.1}\" stroke=\"#e5e5e5\"/>",
            MARGIN_LEFT,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            "<text x=\"{xp:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\" fill=\"#444\">{}</text>",
            MARGIN_TOP + plot_h + 16.0,
            fmt_tick(xv)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\" fill=\"#444\">{}</text>",
            MARGIN_LEFT - 6.0,
            yp + 4.0,
            fmt_tick(yv)
        );
    }

    // Axes frame.
    let _ = writeln!(
        svg,
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" fill=\"#222\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" fill=\"#222\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&ylabel_full)
    );

    // Series.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| (px(x), py(ty(y))))
            .collect();
        if s.line && pts.len() > 1 {
            let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{x:.1},{y:.1}")).collect();
            let dash = if s.dashed {
                " stroke-dasharray=\"7 4\""
            } else {
                ""
            };
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"1.8\"{dash}/>",
                coords.join(" ")
            );
        }
        for &(x, y) in &pts {
            match s.marker {
                Marker::Circle => {
                    let _ = writeln!(
                        svg,
                        "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"3.5\" fill=\"{color}\"/>"
                    );
                }
                Marker::Square => {
                    let _ = writeln!(
                        svg,
                        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"6\" height=\"6\" \
                         fill=\"{color}\"/>",
                        x - 3.0,
                        y - 3.0
                    );
                }
                Marker::None => {}
            }
        }
    }

    // Legend (top-right, inside the frame).
    let legend_x = MARGIN_LEFT + plot_w - 208.0;
    let legend_y = MARGIN_TOP + 10.0;
    let _ = writeln!(
        svg,
        "<rect x=\"{legend_x:.1}\" y=\"{legend_y:.1}\" width=\"200\" height=\"{:.1}\" \
         fill=\"#ffffff\" fill-opacity=\"0.85\" stroke=\"#999\"/>",
        series.len() as f64 * 18.0 + 8.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let row_y = legend_y + 17.0 + i as f64 * 18.0;
        if s.line {
            let dash = if s.dashed {
                " stroke-dasharray=\"7 4\""
            } else {
                ""
            };
            let _ = writeln!(
                svg,
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{color}\" \
                 stroke-width=\"1.8\"{dash}/>",
                legend_x + 8.0,
                row_y - 4.0,
                legend_x + 36.0,
                row_y - 4.0
            );
        }
        if s.marker != Marker::None {
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3.5\" fill=\"{color}\"/>",
                legend_x + 22.0,
                row_y - 4.0
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{row_y:.1}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"#222\">{}</text>",
            legend_x + 42.0,
            escape(&s.label)
        );
    }

    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_a_standalone_svg_document() {
        let s = vec![
            Series::new("linear", vec![(0.0, 1.0), (1.0, 2.0), (2.0, 3.0)]),
            Series::new("dots", vec![(0.0, 2.0), (1.0, 1.0)])
                .markers_only()
                .marker(Marker::Square),
        ];
        let svg = render_plot("demo", "x", "y", &s);
        assert!(svg.starts_with("<svg "));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("<rect"));
        assert!(svg.contains("xmlns=\"http://www.w3.org/2000/svg\""));
        let external_refs = svg.matches("http").count();
        assert_eq!(
            external_refs, 1,
            "only the xmlns namespace may reference a URL"
        );
    }

    #[test]
    fn non_finite_points_are_dropped_not_rendered() {
        let s = vec![Series::new(
            "curve",
            vec![(1.0, f64::INFINITY), (2.0, 0.5), (3.0, 0.25)],
        )];
        let svg = render_plot("demo", "x", "y", &s);
        assert!(!svg.contains("inf"));
        assert!(svg.contains("<circle"));
    }

    #[test]
    fn wide_positive_spread_switches_to_log_axis() {
        let s = vec![Series::new(
            "decay",
            vec![(1.0, 1e6), (2.0, 1.0), (3.0, 1e-3)],
        )];
        let svg = render_plot("demo", "k", "error", &s);
        assert!(svg.contains("log10 error"));
        let flat = vec![Series::new("flat", vec![(1.0, 1.0), (2.0, 1.1)])];
        let svg = render_plot("demo", "k", "error", &flat);
        assert!(!svg.contains("log10"));
    }
}
