//! Minimal SVG charts for experiment curves and metric reports.

use std::fmt::Write as _;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 180.0;
const MARGIN_T: f64 = 48.0;
const MARGIN_B: f64 = 56.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !xmin.is_finite() {
        return ((0.0, 1.0), (0.0, 1.0));
    }
    if (xmax - xmin).abs() < 1e-12 {
        xmax = xmin + 1.0;
    }
    if (ymax - ymin).abs() < 1e-12 {
        ymax = ymin + 1.0;
    }
    let ypad = 0.05 * (ymax - ymin);
    (
        (xmin, xmax),
        ((ymin - ypad).min(0.0).max(ymin - ypad), ymax + ypad),
    )
}

fn svg_header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"monospace\" font-size=\"13\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Multi-series line chart.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let ((xmin, xmax), (ymin, ymax)) = bounds(series);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * plot_w;
    let sy = |y: f64| MARGIN_T + plot_h - (y - ymin) / (ymax - ymin) * plot_h;

    let mut out = String::new();
    svg_header(&mut out, title);
    // axes
    let _ = write!(
        out,
        "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>\n",
        MARGIN_T + plot_h,
        MARGIN_L + plot_w,
        MARGIN_T + plot_h,
        MARGIN_T + plot_h,
    );
    // ticks
    for i in 0..=5 {
        let fx = xmin + (xmax - xmin) * i as f64 / 5.0;
        let fy = ymin + (ymax - ymin) * i as f64 / 5.0;
        let _ = write!(
            out,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
             <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n\
             <line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n",
            sx(fx),
            MARGIN_T + plot_h + 18.0,
            trim_number(fx),
            MARGIN_L - 8.0,
            sy(fy) + 4.0,
            trim_number(fy),
            sy(fy),
            MARGIN_L + plot_w,
            sy(fy),
        );
    }
    let _ = write!(
        out,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n\
         <text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(x_label),
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        escape(y_label),
    );
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            path.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                out,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"{color}\"/>",
                sx(x),
                sy(y)
            );
        }
        let ly = MARGIN_T + 16.0 * i as f64;
        let _ = write!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            MARGIN_L + plot_w + 12.0,
            ly,
            MARGIN_L + plot_w + 30.0,
            ly + 11.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Horizontal bar chart for metric,value pairs.
pub fn bar_chart(title: &str, bars: &[(String, f64)]) -> String {
    let mut out = String::new();
    svg_header(&mut out, title);
    let max = bars.iter().map(|(_, v)| v.abs()).fold(1e-12, f64::max);
    let plot_w = WIDTH - 320.0;
    let row_h = ((HEIGHT - MARGIN_T - MARGIN_B) / bars.len().max(1) as f64).min(28.0);
    for (i, (name, value)) in bars.iter().enumerate() {
        let y = MARGIN_T + i as f64 * row_h;
        let w = (value.abs() / max) * plot_w;
        let color = PALETTE[i % PALETTE.len()];
        let _ = write!(
            out,
            "<text x=\"250\" y=\"{}\" text-anchor=\"end\">{}</text>\n\
             <rect x=\"260\" y=\"{}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\">{}</text>\n",
            y + row_h * 0.7,
            escape(name),
            y + row_h * 0.15,
            w.max(1.0),
            row_h * 0.7,
            260.0 + w.max(1.0) + 6.0,
            y + row_h * 0.7,
            trim_number(*value),
        );
    }
    out.push_str("</svg>\n");
    out
}

fn trim_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a >= 1000.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.4}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_is_valid_svg_with_all_series() {
        let series = vec![
            Series {
                name: "mu=120".into(),
                points: vec![(0.8, 56.0), (4.0, 80.0), (8.0, 100.0)],
            },
            Series {
                name: "mu=240".into(),
                points: vec![(0.8, 50.0), (4.0, 70.0), (8.0, 90.0)],
            },
        ];
        let svg = line_chart("waiting time", "fp (%)", "wait (s)", &series);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("mu=120"));
        assert!(svg.contains("wait (s)"));
    }

    #[test]
    fn bar_chart_handles_escaping_and_zero() {
        let svg = bar_chart(
            "metrics",
            &[("kl<joint>".into(), 0.62), ("cosine".into(), 0.0)],
        );
        assert!(svg.contains("kl&lt;joint&gt;"));
        assert_eq!(svg.matches("<rect").count(), 3); // background + 2 bars
    }
}
