//! Self-contained SVG output: line charts with error bars for experiment
//! results and the Chimera-grid layout rendering of reversal masks.

use crate::chimera::{ChimeraTopology, Embedding};
use crate::error::{Error, Result};
use crate::gauge::SpinReversalMask;

/// One plotted line.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
    /// Optional symmetric error bar per point.
    pub errors: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ChartOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: usize,
    pub height: usize,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            width: 640,
            height: 420,
        }
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#bcbd22", "#2ca02c", "#d62728", "#e377c2", "#8c564b"];

/// Default series color cycle (blue, yellow, green, red, magenta, brown).
pub fn palette_color(index: usize) -> &'static str {
    PALETTE[index % PALETTE.len()]
}

fn fmt(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (0.001..10000.0).contains(&a) {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        if s.is_empty() {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{v:.2e}")
    }
}

/// Simple line chart; each series drawn as a polyline with optional
/// one-standard-deviation error bars.
pub fn line_chart(series: &[Series], opts: &ChartOptions) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::invalid("nothing to plot"));
    }
    let (ml, mr, mt, mb) = (64.0, 16.0, 36.0, 48.0);
    let w = opts.width as f64;
    let h = opts.height as f64;
    let plot_w = w - ml - mr;
    let plot_h = h - mt - mb;

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for (i, &(x, y)) in s.points.iter().enumerate() {
            let e = s.errors.as_ref().map(|e| e[i]).unwrap_or(0.0);
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y - e);
            y_max = y_max.max(y + e);
        }
    }
    if x_min == x_max {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let y_pad = (y_max - y_min) * 0.05;
    y_min -= y_pad;
    y_max += y_pad;

    let sx = move |x: f64| ml + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = move |y: f64| mt + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">\n",
        opts.width, opts.height, opts.width, opts.height
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        opts.width, opts.height
    ));
    if !opts.title.is_empty() {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
            w / 2.0,
            xml_escape(&opts.title)
        ));
    }
    // axes
    out.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb
    ));
    out.push_str(&format!("<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n", h - mb));
    // ticks
    let ticks = 5;
    for i in 0..=ticks {
        let fx = x_min + (x_max - x_min) * i as f64 / ticks as f64;
        let px = sx(fx);
        out.push_str(&format!(
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n",
            h - mb,
            h - mb + 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{px}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            h - mb + 16.0,
            fmt(fx)
        ));
        let fy = y_min + (y_max - y_min) * i as f64 / ticks as f64;
        let py = sy(fy);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{ml}\" y2=\"{py}\" stroke=\"black\"/>\n",
            ml - 4.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            ml - 7.0,
            py + 4.0,
            fmt(fy)
        ));
    }
    if !opts.x_label.is_empty() {
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            ml + plot_w / 2.0,
            h - 10.0,
            xml_escape(&opts.x_label)
        ));
    }
    if !opts.y_label.is_empty() {
        out.push_str(&format!(
            "<text x=\"14\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
            mt + plot_h / 2.0,
            mt + plot_h / 2.0,
            xml_escape(&opts.y_label)
        ));
    }
    // series
    for s in series {
        if s.points.is_empty() {
            continue;
        }
        if let Some(errors) = &s.errors {
            for (&(x, y), &e) in s.points.iter().zip(errors) {
                if e > 0.0 {
                    let px = sx(x);
                    out.push_str(&format!(
                        "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"1\"/>\n",
                        sy(y - e),
                        sy(y + e),
                        s.color
                    ));
                }
            }
        }
        let path: Vec<String> =
            s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n",
            path.join(" "),
            s.color
        ));
        for &(x, y) in &s.points {
            out.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"{}\"/>\n",
                sx(x),
                sy(y),
                s.color
            ));
        }
    }
    // legend
    let mut ly = mt + 6.0;
    for s in series {
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
            w - mr - 130.0,
            w - mr - 110.0,
            s.color
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            w - mr - 105.0,
            ly + 4.0,
            xml_escape(&s.label)
        ));
        ly += 16.0;
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Chimera grid with in-use qubits colored by mask bit (blue = reversed,
/// red = not reversed) and idle qubits gray. The mask addresses the
/// embedding's compact frame.
pub fn chimera_layout(
    topo: &ChimeraTopology,
    emb: &Embedding,
    mask: &SpinReversalMask,
) -> Result<String> {
    let active = emb.active_qubits();
    if mask.len() != active.len() {
        return Err(Error::LengthMismatch { expected: active.len(), actual: mask.len() });
    }
    let t = topo.shore();
    let node_gap = 16.0;
    let shore_gap = 34.0;
    let cell_pad = 18.0;
    let cell_w = shore_gap + 2.0 * cell_pad;
    let cell_h = (t - 1) as f64 * node_gap + 2.0 * cell_pad;
    let margin = 24.0;
    let width = margin * 2.0 + topo.cols() as f64 * cell_w;
    let height = margin * 2.0 + topo.rows() as f64 * cell_h + 30.0;

    let center = |id: usize| -> (f64, f64) {
        let (r, c, side, k) = topo.coords(id);
        let x = margin + c as f64 * cell_w + cell_pad + side as f64 * shore_gap;
        let y = margin + r as f64 * cell_h + cell_pad + k as f64 * node_gap;
        (x, y)
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"white\"/>\n"
    ));
    for (a, b) in topo.edges() {
        let (x1, y1) = center(a);
        let (x2, y2) = center(b);
        out.push_str(&format!(
            "<line x1=\"{x1:.1}\" y1=\"{y1:.1}\" x2=\"{x2:.1}\" y2=\"{y2:.1}\" stroke=\"#e6e6e6\" stroke-width=\"0.8\"/>\n"
        ));
    }
    for id in 0..topo.qubit_count() {
        let (x, y) = center(id);
        let fill = match active.binary_search(&id) {
            Ok(pos) => {
                if mask.get(pos) {
                    "#1f77b4"
                } else {
                    "#d62728"
                }
            }
            Err(_) => "#c8c8c8",
        };
        out.push_str(&format!("<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"4\" fill=\"{fill}\"/>\n"));
    }
    let legend_y = height - 14.0;
    for (dx, color, label) in [
        (0.0, "#1f77b4", "reversed"),
        (110.0, "#d62728", "not reversed"),
        (250.0, "#c8c8c8", "idle"),
    ] {
        out.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{legend_y:.1}\" r=\"4\" fill=\"{color}\"/>\n",
            margin + dx
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{label}</text>\n",
            margin + dx + 9.0,
            legend_y + 4.0
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chimera::embed_complete;

    #[test]
    fn chart_contains_series_and_labels() {
        let series = vec![Series {
            label: "p_G = 0.5".to_string(),
            color: palette_color(2).to_string(),
            points: vec![(0.0, 1.0), (0.5, -1.0), (1.0, 0.25)],
            errors: Some(vec![0.1, 0.2, 0.05]),
        }];
        let opts = ChartOptions {
            title: "sweep".into(),
            x_label: "p_s".into(),
            y_label: "diff".into(),
            ..Default::default()
        };
        let svg = line_chart(&series, &opts).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.contains("p_G = 0.5"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(line_chart(&[], &opts).is_err());
    }

    #[test]
    fn layout_colors_follow_mask() {
        let topo = ChimeraTopology::new(2, 2, 4).unwrap();
        let emb = embed_complete(6, &topo).unwrap();
        let n = emb.active_qubits().len();
        let all_false = SpinReversalMask::all_false(n);
        let svg = chimera_layout(&topo, &emb, &all_false).unwrap();
        // only the legend dot is blue when nothing is reversed
        assert_eq!(svg.matches("#1f77b4").count(), 1);
        assert_eq!(svg.matches("#d62728").count(), n + 1);
        assert!(svg.contains("#c8c8c8"));

        let all_true = SpinReversalMask::all_true(n);
        let svg = chimera_layout(&topo, &emb, &all_true).unwrap();
        assert_eq!(svg.matches("#1f77b4").count(), n + 1);
        let wrong = SpinReversalMask::all_false(n + 1);
        assert!(chimera_layout(&topo, &emb, &wrong).is_err());
    }
}
