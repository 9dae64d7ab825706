//! Minimal hand-written SVG line charts with a log-scale y axis.
//!
//! The CSV traces are the canonical artifact; these plots exist so a run's
//! convergence behaviour can be eyeballed without external tooling. Output
//! is a plain string built deterministically from the data.

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 780.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 450.0;

const PALETTE: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }

    /// Points that can appear on a log axis.
    fn positive(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().filter(|&(x, y)| x.is_finite() && y > 0.0 && y.is_finite())
    }
}

/// Renders `series` as polylines over a log10 y axis with decade gridlines.
/// Points with nonpositive or non-finite `y` are dropped.
pub fn log_line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for (x, y) in s.positive() {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    if !x_min.is_finite() {
        (x_min, x_max, y_min, y_max) = (0.0, 1.0, 1.0, 10.0);
    }
    if x_max == x_min {
        x_max = x_min + 1.0;
    }
    let mut p_lo = y_min.log10().floor() as i32;
    let mut p_hi = y_max.log10().ceil() as i32;
    if p_hi == p_lo {
        p_lo -= 1;
        p_hi += 1;
    }

    let x_of = |x: f64| LEFT + (x - x_min) / (x_max - x_min) * (RIGHT - LEFT);
    let y_of = |y: f64| {
        let t = (y.log10() - f64::from(p_lo)) / f64::from(p_hi - p_lo);
        BOTTOM - t * (BOTTOM - TOP)
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">{title}</text>\n",
        (LEFT + RIGHT) / 2.0
    ));
    out.push_str(&format!(
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.0}\" height=\"{:.0}\" fill=\"none\" \
         stroke=\"black\"/>\n",
        RIGHT - LEFT,
        BOTTOM - TOP
    ));

    for p in p_lo..=p_hi {
        let y = y_of(10f64.powi(p));
        out.push_str(&format!(
            "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{RIGHT}\" y2=\"{y:.2}\" \
             stroke=\"#cccccc\" stroke-width=\"0.5\"/>\n"
        ));
        out.push_str(&format!(
            "<text x=\"{:.0}\" y=\"{:.2}\" text-anchor=\"end\">1e{p}</text>\n",
            LEFT - 6.0,
            y + 4.0
        ));
    }
    for k in 0..=4 {
        let x = x_min + (x_max - x_min) * f64::from(k) / 4.0;
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.0}\" text-anchor=\"middle\">{x:.0}</text>\n",
            x_of(x),
            BOTTOM + 18.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\">{x_label}</text>\n",
        (LEFT + RIGHT) / 2.0,
        BOTTOM + 38.0
    ));
    out.push_str(&format!(
        "<text x=\"16\" y=\"{:.0}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 16 {:.0})\">{y_label}</text>\n",
        (TOP + BOTTOM) / 2.0,
        (TOP + BOTTOM) / 2.0
    ));

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> =
            s.positive().map(|(x, y)| format!("{:.2},{:.2}", x_of(x), y_of(y))).collect();
        if !coords.is_empty() {
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" \
                 stroke-width=\"1.5\"/>\n",
                coords.join(" ")
            ));
        }
        let ly = TOP + 16.0 + 16.0 * k as f64;
        out.push_str(&format!(
            "<line x1=\"{:.0}\" y1=\"{ly:.0}\" x2=\"{:.0}\" y2=\"{ly:.0}\" stroke=\"{color}\" \
             stroke-width=\"1.5\"/>\n",
            LEFT + 10.0,
            LEFT + 34.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.0}\" y=\"{:.2}\">{}</text>\n",
            LEFT + 40.0,
            ly + 4.0,
            s.label
        ));
    }
    out.push_str("</svg>\n");
    out
}
