//! Minimal SVG rendering: line charts, heatmaps, scatter plots.
//!
//! Every mark embeds its source values as `data-*` attributes so emitted
//! plots can be checked against their backing CSVs.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 48.0;

const PALETTE: [&str; 12] = [
    "#4269d0", "#efb118", "#ff725c", "#6cc5b0", "#3ca951", "#ff8ab7", "#a463f2", "#97bbf5",
    "#9c6b4e", "#9498a0", "#c26d1b", "#2c4a7e",
];

pub fn class_color(class: usize) -> &'static str {
    PALETTE[class % PALETTE.len()]
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn from_ranges(xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> Frame {
        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        for x in xs {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
        }
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for y in ys {
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
        if !x_min.is_finite() {
            x_min = 0.0;
            x_max = 1.0;
        }
        if !y_min.is_finite() {
            y_min = 0.0;
            y_max = 1.0;
        }
        if (x_max - x_min).abs() < 1e-12 {
            x_min -= 0.5;
            x_max += 0.5;
        }
        if (y_max - y_min).abs() < 1e-12 {
            y_min -= 0.5;
            y_max += 0.5;
        }
        let pad_y = 0.05 * (y_max - y_min);
        Frame {
            x_min,
            x_max,
            y_min: y_min - pad_y,
            y_max: y_max + pad_y,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    )
}

fn axes(frame: &Frame, x_label: &str, y_label: &str) -> String {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let mut out = format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"#333\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"#333\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n\
         <text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label),
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
    for i in 0..=4 {
        let fx = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0;
        let fy = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\" fill=\"#555\">{}</text>\n",
            frame.px(fx),
            y0 + 16.0,
            fmt_tick(fx)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"10\" fill=\"#555\">{}</text>\n",
            x0 - 6.0,
            frame.py(fy) + 3.0,
            fmt_tick(fy)
        ));
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a >= 1000.0 || a < 0.001 {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Multi-series line chart.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> String {
    let frame = Frame::from_ranges(
        series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.0)),
        series.iter().flat_map(|(_, pts)| pts.iter().map(|p| p.1)),
    );
    let mut out = svg_open(title);
    out.push_str(&axes(&frame, x_label, y_label));
    for (si, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        for &(x, y) in pts {
            out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.2\" fill=\"{color}\" data-series=\"{}\" data-x=\"{x}\" data-y=\"{y}\"/>\n",
                frame.px(x),
                frame.py(y),
                escape(name)
            ));
        }
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n",
            WIDTH - MARGIN_RIGHT - 150.0,
            MARGIN_TOP + 16.0 * si as f64,
            WIDTH - MARGIN_RIGHT - 136.0,
            MARGIN_TOP + 9.0 + 16.0 * si as f64,
            escape(name)
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn heat_color(v: f64) -> String {
    // Three-stop ramp: deep blue -> teal -> yellow.
    let v = v.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let (r, g, b) = if v < 0.5 {
        let t = v / 0.5;
        (lerp(40.0, 60.0, t), lerp(50.0, 170.0, t), lerp(115.0, 160.0, t))
    } else {
        let t = (v - 0.5) / 0.5;
        (lerp(60.0, 250.0, t), lerp(170.0, 220.0, t), lerp(160.0, 60.0, t))
    };
    format!("rgb({},{},{})", r as u8, g as u8, b as u8)
}

/// Row-labeled heatmap; values are expected in [0, 1].
pub fn heatmap(
    title: &str,
    row_labels: &[String],
    col_labels: &[String],
    matrix: &[Vec<f64>],
) -> String {
    let mut out = svg_open(title);
    let rows = matrix.len().max(1);
    let cols = col_labels.len().max(1);
    let cell_w = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / cols as f64;
    let cell_h = (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM) / rows as f64;
    for (r, row) in matrix.iter().enumerate() {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"10\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            MARGIN_TOP + (r as f64 + 0.6) * cell_h,
            escape(row_labels.get(r).map(String::as_str).unwrap_or("")),
        ));
        for (c, &v) in row.iter().enumerate() {
            out.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" data-row=\"{r}\" data-col=\"{c}\" data-value=\"{v}\"/>\n",
                MARGIN_LEFT + c as f64 * cell_w,
                MARGIN_TOP + r as f64 * cell_h,
                cell_w,
                cell_h,
                heat_color(v)
            ));
        }
    }
    for (c, label) in col_labels.iter().enumerate() {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
            MARGIN_LEFT + (c as f64 + 0.5) * cell_w,
            HEIGHT - MARGIN_BOTTOM + 14.0,
            escape(label)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// 2-D scatter colored by class; `outlined` marks entries (delimiters,
/// open-set examples) with a dark ring.
pub fn scatter(
    title: &str,
    points: &[[f64; 2]],
    classes: &[usize],
    outlined: &[bool],
) -> String {
    let frame = Frame::from_ranges(points.iter().map(|p| p[0]), points.iter().map(|p| p[1]));
    let mut out = svg_open(title);
    out.push_str(&axes(&frame, "pc1", "pc2"));
    for (i, p) in points.iter().enumerate() {
        let color = class_color(classes[i]);
        let stroke = if outlined[i] { "#111" } else { "none" };
        out.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\" fill-opacity=\"0.75\" stroke=\"{stroke}\" stroke-width=\"1.2\" data-class=\"{}\" data-x=\"{}\" data-y=\"{}\"/>\n",
            frame.px(p[0]),
            frame.py(p[1]),
            classes[i],
            p[0],
            p[1]
        ));
    }
    out.push_str("</svg>\n");
    out
}
