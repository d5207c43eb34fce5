//! Minimal in-repo SVG plotting for the growth diagnostics: log M(r) against
//! log r with the fitted slope and an optional reference slope line. Pure
//! path/text generation, no rendering dependencies.

use crate::verify::GrowthTable;

const W: f64 = 480.0;
const H: f64 = 360.0;
const MARGIN: f64 = 52.0;

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        MARGIN + (v - self.x_lo) / (self.x_hi - self.x_lo) * (W - 2.0 * MARGIN)
    }
    fn y(&self, v: f64) -> f64 {
        H - MARGIN - (v - self.y_lo) / (self.y_hi - self.y_lo) * (H - 2.0 * MARGIN)
    }
}

/// Renders the log-log growth plot. `alpha_ref` draws a second slope line
/// (the closed-form exponent of the parameter set, when one is configured).
pub fn growth_plot(table: &GrowthTable, alpha_ref: Option<f64>) -> String {
    let pts: Vec<(f64, f64)> = table
        .radii
        .iter()
        .zip(&table.m_values)
        .filter(|(_, &m)| m > 0.0)
        .map(|(&r, &m)| (r.ln(), m.ln()))
        .collect();

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    if pts.is_empty() {
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">no positive M(r) values</text>\n</svg>\n",
            W / 2.0,
            H / 2.0
        ));
        return s;
    }

    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x_lo = x_lo.min(x);
        x_hi = x_hi.max(x);
        y_lo = y_lo.min(y);
        y_hi = y_hi.max(y);
    }
    let pad_x = 0.08 * (x_hi - x_lo).max(1e-9);
    let pad_y = 0.12 * (y_hi - y_lo).max(1e-9);
    let f = Frame {
        x_lo: x_lo - pad_x,
        x_hi: x_hi + pad_x,
        y_lo: y_lo - pad_y,
        y_hi: y_hi + pad_y,
    };

    // axes
    s.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n",
        MARGIN,
        MARGIN,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\">log r</text>\n",
        W / 2.0,
        H - 14.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 16 {})\">log M(r)</text>\n",
        H / 2.0,
        H / 2.0
    ));

    // tick labels at the data points
    for &(x, y) in &pts {
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"9\">{:.2}</text>\n",
            f.x(x),
            H - MARGIN + 14.0,
            x
        ));
        let _ = y;
    }

    // fitted slope line through the centroid
    let cx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let cy = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let line = |slope: f64, color: &str, dash: &str| -> String {
        let y_at = |x: f64| cy + slope * (x - cx);
        format!(
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>\n",
            f.x(f.x_lo),
            f.y(y_at(f.x_lo)),
            f.x(f.x_hi),
            f.y(y_at(f.x_hi))
        )
    };
    s.push_str(&line(table.alpha_fit, "#1f77b4", ""));
    if let Some(a) = alpha_ref {
        s.push_str(&line(a, "#d62728", " stroke-dasharray=\"6 4\""));
    }

    // data points
    for &(x, y) in &pts {
        s.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3.5\" fill=\"black\"/>\n",
            f.x(x),
            f.y(y)
        ));
    }

    // legend
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" fill=\"#1f77b4\">alpha_fit = {:.4}</text>\n",
        MARGIN + 8.0,
        MARGIN + 16.0,
        table.alpha_fit
    ));
    if let Some(a) = alpha_ref {
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"11\" fill=\"#d62728\">alpha(params) = {:.4}</text>\n",
            MARGIN + 8.0,
            MARGIN + 30.0,
            a
        ));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn plot_contains_points_and_lines() {
        let table = GrowthTable {
            anchor: Point::new(0.0, 0.0),
            radii: vec![0.0625, 0.125, 0.25],
            m_values: vec![0.0625, 0.125, 0.25],
            theta_emp: vec![],
            alpha_fit: 1.0,
            alpha_floor: f64::INFINITY,
        };
        let svg = growth_plot(&table, Some(0.9));
        assert!(svg.starts_with("<svg"));
        assert!(svg.matches("<circle").count() == 3);
        assert!(svg.contains("alpha_fit = 1.0000"));
        assert!(svg.contains("alpha(params) = 0.9000"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
