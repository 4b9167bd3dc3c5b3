//! Minimal self-contained SVG scatter plot with an optional fit line.

use std::fs;
use std::path::Path;

use geopers_core::statistics::FitResult;

use crate::errors::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 48.0;

/// Renders `points` as a scatter plot, the fit as a straight line across
/// the x-range, with axes, ticks, and a slope annotation.
pub fn scatter_with_fit(
    points: &[(f64, f64)],
    fit: Option<&FitResult>,
    x_label: &str,
    y_label: &str,
    title: &str,
) -> String {
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"20\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));

    if points.is_empty() {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">no data</text>\n",
            WIDTH / 2.0,
            HEIGHT / 2.0
        ));
        svg.push_str("</svg>\n");
        return svg;
    }

    let (mut x_lo, mut x_hi) = min_max(points.iter().map(|p| p.0));
    let (mut y_lo, mut y_hi) = min_max(points.iter().map(|p| p.1));
    if x_hi == x_lo {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if y_hi == y_lo {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let pad_x = 0.05 * (x_hi - x_lo);
    let pad_y = 0.05 * (y_hi - y_lo);
    x_lo -= pad_x;
    x_hi += pad_x;
    y_lo -= pad_y;
    y_hi += pad_y;

    let sx = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R);
    let sy = |y: f64| HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);

    // frame
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    ));

    // ticks
    for i in 0..=4 {
        let fx = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let fy = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
        let px = sx(fx);
        let py = sy(fy);
        svg.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{}\" x2=\"{px:.1}\" y2=\"{}\" stroke=\"black\"/>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{}\" text-anchor=\"middle\">{fx:.3}</text>\n",
            HEIGHT - MARGIN_B + 18.0
        ));
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py:.1}\" x2=\"{MARGIN_L}\" y2=\"{py:.1}\" stroke=\"black\"/>\n",
            MARGIN_L - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{fy:.3}</text>\n",
            MARGIN_L - 8.0,
            py + 4.0
        ));
    }

    // axis labels
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        escape(y_label)
    ));

    for &(x, y) in points {
        svg.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"#336699\" fill-opacity=\"0.6\"/>\n",
            sx(x),
            sy(y)
        ));
    }

    if let Some(fit) = fit {
        let y0 = fit.intercept + fit.slope * x_lo;
        let y1 = fit.intercept + fit.slope * x_hi;
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#cc3333\" stroke-width=\"1.5\"/>\n",
            sx(x_lo),
            sy(y0),
            sx(x_hi),
            sy(y1)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"#cc3333\">slope {:.4}, intercept {:.4}</text>\n",
            MARGIN_L + 8.0,
            MARGIN_T + 16.0,
            fit.slope,
            fit.intercept
        ));
    }

    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(
    path: &Path,
    points: &[(f64, f64)],
    fit: Option<&FitResult>,
    x_label: &str,
    y_label: &str,
    title: &str,
) -> Result<(), CliError> {
    fs::write(path, scatter_with_fit(points, fit, x_label, y_label, title))
        .map_err(|e| CliError::io(path, e))
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
