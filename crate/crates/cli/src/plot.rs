//! Minimal self-contained SVG emission: histograms with overlay curves,
//! line/scatter charts and rectangular heatmaps. Plot output is best effort;
//! failures are logged and never abort a run.

use std::path::Path;

/// Plot payload produced by experiments.
#[derive(Debug, Clone)]
pub enum PlotSpec {
    /// Histogram of `values` with an optional reference curve (x, density).
    Histogram {
        name: String,
        title: String,
        values: Vec<f64>,
        bins: usize,
        overlay: Vec<(f64, f64)>,
    },
    /// One or more labelled series drawn as polylines over a shared frame.
    Lines {
        name: String,
        title: String,
        series: Vec<(String, Vec<(f64, f64)>)>,
        log_y: bool,
    },
    /// Row-major rectangular heatmap.
    Heatmap {
        name: String,
        title: String,
        xs: Vec<f64>,
        ys: Vec<f64>,
        values: Vec<f64>,
    },
}

impl PlotSpec {
    pub fn name(&self) -> &str {
        match self {
            PlotSpec::Histogram { name, .. } => name,
            PlotSpec::Lines { name, .. } => name,
            PlotSpec::Heatmap { name, .. } => name,
        }
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 48.0;

/// Renders every plot into `dir`, returning the files written. Failures are
/// reported on stderr and skipped.
pub fn emit_plots(plots: &[PlotSpec], dir: &Path) -> Vec<std::path::PathBuf> {
    let mut written = Vec::new();
    if plots.is_empty() {
        eprintln!("warning: no plot payloads; nothing to draw");
        return written;
    }
    for plot in plots {
        let path = dir.join(format!("{}.svg", plot.name()));
        match render(plot) {
            Ok(svg) => match std::fs::write(&path, svg) {
                Ok(()) => written.push(path),
                Err(e) => eprintln!("warning: could not write {}: {e}", path.display()),
            },
            Err(e) => eprintln!("warning: could not render {}: {e}", plot.name()),
        }
    }
    written
}

fn render(plot: &PlotSpec) -> Result<String, String> {
    match plot {
        PlotSpec::Histogram { title, values, bins, overlay, .. } => {
            render_histogram(title, values, *bins, overlay)
        }
        PlotSpec::Lines { title, series, log_y, .. } => render_lines(title, series, *log_y),
        PlotSpec::Heatmap { title, xs, ys, values, .. } => render_heatmap(title, xs, ys, values),
    }
}

struct Frame {
    x_lo: f64,
    x_hi: f64,
    y_lo: f64,
    y_hi: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_lo) / (self.x_hi - self.x_lo).max(1e-300) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y_lo) / (self.y_hi - self.y_lo).max(1e-300) * (H - 2.0 * MARGIN)
    }
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        xml_escape(title)
    )
}

fn axes(frame: &Frame) -> String {
    let mut s = format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
        MARGIN,
        MARGIN,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = frame.x_lo + t * (frame.x_hi - frame.x_lo);
        let yv = frame.y_lo + t * (frame.y_hi - frame.y_lo);
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{:.3}</text>\n",
            frame.px(xv),
            H - MARGIN + 16.0,
            xv
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{:.3}</text>\n",
            MARGIN - 6.0,
            frame.py(yv) + 3.0,
            yv
        ));
    }
    s
}

fn polyline(points: impl Iterator<Item = (f64, f64)>, frame: &Frame, color: &str) -> String {
    let pts: Vec<String> = points
        .map(|(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
        .collect();
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
        pts.join(" ")
    )
}

fn render_histogram(
    title: &str,
    values: &[f64],
    bins: usize,
    overlay: &[(f64, f64)],
) -> Result<String, String> {
    if values.is_empty() {
        return Err("empty sample".to_string());
    }
    let bins = bins.max(4);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let width = span / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let norm = 1.0 / (values.len() as f64 * width);
    let max_density = counts
        .iter()
        .map(|&c| c as f64 * norm)
        .fold(0.0f64, f64::max)
        .max(overlay.iter().map(|p| p.1).fold(0.0, f64::max));
    let frame = Frame { x_lo: lo, x_hi: hi, y_lo: 0.0, y_hi: max_density * 1.08 + 1e-12 };
    let mut svg = header(title);
    for (b, &c) in counts.iter().enumerate() {
        let x0 = lo + b as f64 * width;
        let density = c as f64 * norm;
        let px0 = frame.px(x0);
        let px1 = frame.px(x0 + width);
        let py = frame.py(density);
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#7aa6d6\" stroke=\"#35567f\" stroke-width=\"0.5\"/>\n",
            px0,
            py,
            (px1 - px0).max(0.5),
            (H - MARGIN - py).max(0.0)
        ));
    }
    if !overlay.is_empty() {
        svg.push_str(&polyline(overlay.iter().cloned(), &frame, "#c23b22"));
    }
    svg.push_str(&axes(&frame));
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn render_lines(
    title: &str,
    series: &[(String, Vec<(f64, f64)>)],
    log_y: bool,
) -> Result<String, String> {
    if series.iter().all(|(_, pts)| pts.is_empty()) {
        return Err("no points".to_string());
    }
    let transform = |y: f64| if log_y { y.max(1e-300).log10() } else { y };
    let mut x_lo = f64::INFINITY;
    let mut x_hi = f64::NEG_INFINITY;
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for (_, pts) in series {
        for &(x, y) in pts {
            let y = transform(y);
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if y_lo == y_hi {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    let frame = Frame { x_lo, x_hi, y_lo, y_hi };
    let palette = ["#35567f", "#c23b22", "#3c8031", "#8440a3", "#a56d23"];
    let mut svg = header(title);
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = palette[i % palette.len()];
        svg.push_str(&polyline(
            pts.iter().map(|&(x, y)| (x, transform(y))),
            &frame,
            color,
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            MARGIN + 8.0,
            MARGIN + 14.0 + 14.0 * i as f64,
            xml_escape(label)
        ));
    }
    svg.push_str(&axes(&frame));
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn render_heatmap(title: &str, xs: &[f64], ys: &[f64], values: &[f64]) -> Result<String, String> {
    if xs.is_empty() || ys.is_empty() || values.len() != xs.len() * ys.len() {
        return Err(format!(
            "heatmap shape mismatch: {} x {} vs {} values",
            xs.len(),
            ys.len(),
            values.len()
        ));
    }
    let v_lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let v_hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (v_hi - v_lo).max(1e-300);
    let cell_w = (W - 2.0 * MARGIN) / xs.len() as f64;
    let cell_h = (H - 2.0 * MARGIN) / ys.len() as f64;
    let mut svg = header(title);
    for (iy, _) in ys.iter().enumerate() {
        for (ix, _) in xs.iter().enumerate() {
            let v = values[iy * xs.len() + ix];
            let t = ((v - v_lo) / span).clamp(0.0, 1.0);
            let r = (255.0 * t) as u8;
            let g = (64.0 + 96.0 * (1.0 - t)) as u8;
            let b = (255.0 * (1.0 - t)) as u8;
            svg.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({r},{g},{b})\"/>\n",
                MARGIN + ix as f64 * cell_w,
                H - MARGIN - (iy as f64 + 1.0) * cell_h,
                cell_w + 0.5,
                cell_h + 0.5,
            ));
        }
    }
    let frame = Frame {
        x_lo: xs[0],
        x_hi: *xs.last().unwrap(),
        y_lo: ys[0],
        y_hi: *ys.last().unwrap(),
    };
    svg.push_str(&axes(&frame));
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
