//! Hand-written SVG plots and CSV tables for reports.
//!
//! Output is a pure function of the input numbers so repeated runs produce the
//! same bytes.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            points,
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn map(self, v: f64) -> Option<f64> {
        match self {
            Scale::Linear => v.is_finite().then_some(v),
            Scale::Log => (v > 0.0 && v.is_finite()).then(|| v.log10()),
        }
    }
}

/// Line plot with optional log axes. Non-plottable points are skipped.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series], x_scale: Scale, y_scale: Scale) -> String {
    let mapped: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter_map(|&(x, y)| Some((x_scale.map(x)?, y_scale.map(y)?)))
                .collect()
        })
        .collect();
    let all = mapped.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = header();
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let tick = |v: f64, scale: Scale| match scale {
        Scale::Linear => format!("{v:.3}"),
        Scale::Log => format!("1e{v:.1}"),
    };
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x0 + t * (x1 - x0);
        let yv = y0 + t * (y1 - y0);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#,
            px(xv),
            HEIGHT - MARGIN + 16.0,
            tick(xv, x_scale)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#,
            MARGIN - 4.0,
            py(yv) + 4.0,
            tick(yv, y_scale)
        );
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (k, (pts, ser)) in mapped.iter().zip(series).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        for &(x, y) in pts {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, px(x), py(y));
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            MARGIN + 16.0 + 16.0 * k as f64,
            escape(&ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn header() -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

const DISK_SIZE: f64 = 480.0;

fn disk_xy(x: f64, y: f64) -> (f64, f64) {
    let c = DISK_SIZE / 2.0;
    let r = c - 20.0;
    (c + x * r, c - y * r)
}

/// Closed polygons (Euclidean vertex lists) drawn inside the unit circle.
pub fn disk_plot(title: &str, polygons: &[Vec<(f64, f64)>], points: &[(f64, f64)]) -> String {
    let c = DISK_SIZE / 2.0;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{DISK_SIZE}\" height=\"{DISK_SIZE}\" viewBox=\"0 0 {DISK_SIZE} {DISK_SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let _ = writeln!(s, r#"<text x="{c}" y="14" text-anchor="middle" font-size="13">{}</text>"#, escape(title));
    let _ = writeln!(s, r##"<circle cx="{c}" cy="{c}" r="{}" fill="none" stroke="#444"/>"##, c - 20.0);
    for (k, poly) in polygons.iter().enumerate() {
        let pts: Vec<String> = poly
            .iter()
            .map(|&(x, y)| {
                let (a, b) = disk_xy(x, y);
                format!("{a:.2},{b:.2}")
            })
            .collect();
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(s, r#"<polygon fill="{color}" fill-opacity="0.15" stroke="{color}" points="{}"/>"#, pts.join(" "));
    }
    for &(x, y) in points {
        let (a, b) = disk_xy(x, y);
        let _ = writeln!(s, r#"<circle cx="{a:.2}" cy="{b:.2}" r="2" fill="black"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

/// Square cells of side `cell` (Euclidean) centered at `(x, y)`, colored by
/// `value` on a linear scale between the finite extremes.
pub fn heatmap(title: &str, samples: &[(f64, f64, f64)], cell: f64) -> String {
    let finite: Vec<f64> = samples.iter().map(|s| s.2).filter(|v| v.is_finite()).collect();
    let lo = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let c = DISK_SIZE / 2.0;
    let side = cell * (c - 20.0);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{DISK_SIZE}\" height=\"{DISK_SIZE}\" viewBox=\"0 0 {DISK_SIZE} {DISK_SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    let _ = writeln!(s, r#"<text x="{c}" y="14" text-anchor="middle" font-size="13">{} [{lo:.3}, {hi:.3}]</text>"#, escape(title));
    for &(x, y, v) in samples {
        let (a, b) = disk_xy(x, y);
        let fill = if v.is_finite() {
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            let red = (255.0 * t).round() as u8;
            let blue = (255.0 * (1.0 - t)).round() as u8;
            format!("rgb({red},64,{blue})")
        } else {
            "black".to_string()
        };
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{side:.2}" height="{side:.2}" fill="{fill}"/>"#,
            a - side / 2.0,
            b - side / 2.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// CSV text with a header row.
pub fn csv_table<I>(headers: &[&str], rows: I) -> Result<String, csv::Error>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(headers)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
