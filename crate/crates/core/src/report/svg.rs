use std::fmt::Write;

use crate::cwt::CoherenceField;
use crate::longmemory::{Clustering, ConnectivityResult, LogscaleDiagram};

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";

/// Blue-to-yellow ramp for values in `[0, 1]`.
fn ramp(v: f64) -> String {
    const STOPS: [(f64, [f64; 3]); 5] = [
        (0.0, [48.0, 18.0, 130.0]),
        (0.25, [45.0, 95.0, 170.0]),
        (0.5, [33.0, 150.0, 140.0]),
        (0.75, [120.0, 200.0, 80.0]),
        (1.0, [250.0, 230.0, 35.0]),
    ];
    let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
    let k = STOPS.iter().position(|(x, _)| *x >= v).unwrap_or(4).max(1);
    let ((x0, c0), (x1, c1)) = (STOPS[k - 1], STOPS[k]);
    let f = (v - x0) / (x1 - x0);
    let ch = |i: usize| (c0[i] + f * (c1[i] - c0[i])).round() as u8;
    format!("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2))
}

/// Diverging ramp for correlations in `[-1, 1]`.
fn diverging(v: f64) -> String {
    let v = if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 };
    let (r, g, b) = if v >= 0.0 {
        (255.0 - 75.0 * v, 255.0 - 205.0 * v, 255.0 - 215.0 * v)
    } else {
        let a = -v;
        (255.0 - 215.0 * a, 255.0 - 155.0 * a, 255.0 - 55.0 * a)
    };
    format!("#{:02x}{:02x}{:02x}", r.round() as u8, g.round() as u8, b.round() as u8)
}

fn open(width: f64, height: f64, title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"0 0 {width:.0} {height:.0}\">"
    );
    let _ = writeln!(s, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"16\" text-anchor=\"middle\" {FONT} font-weight=\"bold\">{}</text>",
        width / 2.0,
        escape(title)
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Coherence heatmap with time on x, period (log scale, short periods on
/// top) on y, the region outside the cone of influence washed out, black
/// contours around significant cells and phase arrows every `arrow_every`
/// displayed cells where coherence is high.
pub fn coherence_svg(field: &CoherenceField, title: &str, arrow_every: usize) -> String {
    let n = field.len();
    let ns = field.scales.len();
    // Cap the number of drawn columns; each drawn column averages a block of times.
    let cols = n.min(400);
    let block = n.div_ceil(cols);
    let cols = n.div_ceil(block);
    let (cell_w, cell_h) = (2.0, 3.0);
    let (left, top) = (60.0, 30.0);
    let width = left + cols as f64 * cell_w + 20.0;
    let height = top + ns as f64 * cell_h + 40.0;
    let mut s = open(width, height, title);

    for si in 0..ns {
        for c in 0..cols {
            let range = c * block..((c + 1) * block).min(n);
            let len = range.len() as f64;
            let r2 = range.clone().map(|t| field.r2[si][t]).sum::<f64>() / len;
            let x = left + c as f64 * cell_w;
            let y = top + si as f64 * cell_h;
            let _ = writeln!(
                s,
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell_w}\" height=\"{cell_h}\" fill=\"{}\"/>",
                ramp(r2)
            );
            let mid = (range.start + range.end - 1) / 2;
            if !field.inside_coi(si, mid) {
                let _ = writeln!(
                    s,
                    "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell_w}\" height=\"{cell_h}\" fill=\"white\" fill-opacity=\"0.55\"/>"
                );
            }
            if let Some(mask) = &field.sig_mask {
                if mask[si][mid] {
                    let _ = writeln!(
                        s,
                        "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"1\" height=\"1\" fill=\"black\"/>",
                        x + 0.5,
                        y + 1.0
                    );
                }
            }
        }
    }

    let every = arrow_every.max(1);
    for si in (every / 2..ns).step_by(every) {
        for c in (every / 2..cols).step_by(every * 2) {
            let t = (c * block + ((c + 1) * block).min(n) - 1) / 2;
            if field.r2[si][t] < 0.5 {
                continue;
            }
            let phi = field.phase[si][t];
            let (cx, cy) = (left + (c as f64 + 0.5) * cell_w, top + (si as f64 + 0.5) * cell_h);
            let len = 6.0;
            let (dx, dy) = (len * phi.cos(), -len * phi.sin());
            let _ = writeln!(
                s,
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\" stroke-width=\"0.8\"/>",
                cx - dx / 2.0,
                cy - dy / 2.0,
                cx + dx / 2.0,
                cy + dy / 2.0
            );
            let _ = writeln!(
                s,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"1\" fill=\"black\"/>",
                cx + dx / 2.0,
                cy + dy / 2.0
            );
        }
    }

    // Period axis labels at powers of two.
    let mut p = 2.0f64;
    while p <= field.periods[ns - 1] * 1.0001 {
        if let Some(si) = (0..ns).min_by(|&a, &b| {
            (field.periods[a].log2() - p.log2())
                .abs()
                .total_cmp(&(field.periods[b].log2() - p.log2()).abs())
        }) {
            if (field.periods[si].log2() - p.log2()).abs() < 0.1 {
                let y = top + (si as f64 + 0.5) * cell_h;
                let _ = writeln!(
                    s,
                    "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" {FONT}>{p:.0}</text>",
                    left - 4.0,
                    y + 4.0
                );
            }
        }
        p *= 2.0;
    }
    let _ = writeln!(
        s,
        "<text x=\"12\" y=\"{:.1}\" {FONT} transform=\"rotate(-90 12 {:.1})\">period</text>",
        top + ns as f64 * cell_h / 2.0,
        top + ns as f64 * cell_h / 2.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" {FONT}>time (0 to {})</text>",
        left + cols as f64 * cell_w / 2.0,
        height - 12.0,
        n - 1
    );
    s.push_str("</svg>\n");
    s
}

/// Logscale diagram: eta per octave with interval whiskers, the fitted line
/// and the fitting range shaded.
pub fn logscale_svg(diagram: &LogscaleDiagram, title: &str) -> String {
    let (width, height) = (480.0, 340.0);
    let (left, right, top, bottom) = (60.0, 20.0, 30.0, 40.0);
    let mut s = open(width, height, title);
    let jmin = *diagram.octaves.first().unwrap_or(&1) as f64 - 0.5;
    let jmax = *diagram.octaves.last().unwrap_or(&1) as f64 + 0.5;
    let finite = |v: &f64| v.is_finite();
    let lo = diagram
        .ci_low
        .iter()
        .filter(|v| finite(v))
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = diagram
        .ci_high
        .iter()
        .filter(|v| finite(v))
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() && hi > lo {
        (lo, hi)
    } else {
        (-1.0, 1.0)
    };
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let px = |j: f64| left + (j - jmin) / (jmax - jmin) * (width - left - right);
    let py = |v: f64| top + (hi - v) / (hi - lo) * (height - top - bottom);

    let fit = &diagram.fit;
    let _ = writeln!(
        s,
        "<rect x=\"{:.1}\" y=\"{top}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"#e8eef8\"/>",
        px(fit.j1 as f64 - 0.5),
        px(fit.j2 as f64 + 0.5) - px(fit.j1 as f64 - 0.5),
        height - top - bottom
    );
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>",
        height - bottom,
        width - right,
        height - bottom
    );
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{:.1}\" stroke=\"black\"/>",
        height - bottom
    );
    for i in 0..diagram.octaves.len() {
        let j = diagram.octaves[i] as f64;
        if !diagram.eta[i].is_finite() {
            continue;
        }
        let _ = writeln!(
            s,
            "<line x1=\"{0:.1}\" y1=\"{1:.1}\" x2=\"{0:.1}\" y2=\"{2:.1}\" stroke=\"#555\"/>",
            px(j),
            py(diagram.ci_low[i].max(lo)),
            py(diagram.ci_high[i].min(hi))
        );
        let _ = writeln!(
            s,
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"#1f4e9a\"/>",
            px(j),
            py(diagram.eta[i])
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" {FONT}>{}</text>",
            px(j),
            height - bottom + 14.0,
            diagram.octaves[i]
        );
    }
    if fit.slope.is_finite() {
        let (a, b) = (fit.j1 as f64, fit.j2 as f64);
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#c0392b\" stroke-width=\"1.5\"/>",
            px(a),
            py(fit.slope * a + fit.intercept),
            px(b),
            py(fit.slope * b + fit.intercept)
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" {FONT}>H = {:.3} (se {:.3})</text>",
            left + 8.0,
            top + 14.0,
            fit.hurst,
            fit.std_err
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" {FONT}>octave j</text>",
        (left + width - right) / 2.0,
        height - 8.0
    );
    let _ = writeln!(
        s,
        "<text x=\"14\" y=\"{0:.1}\" {FONT} transform=\"rotate(-90 14 {0:.1})\">log2 variance</text>",
        (top + height - bottom) / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Connectivity matrix heatmap with rows and columns in dendrogram order.
pub fn connectivity_svg(names: &[String], result: &ConnectivityResult, clustering: &Clustering, title: &str) -> String {
    let p = names.len();
    let cell = 24.0;
    let label_w = 8.0 * names.iter().map(|n| n.len()).max().unwrap_or(4) as f64 + 10.0;
    let (left, top) = (label_w, 30.0 + label_w);
    let width = left + p as f64 * cell + 20.0;
    let height = top + p as f64 * cell + 20.0;
    let mut s = open(width, height, title);
    let order = &clustering.leaf_order;
    for (r, &i) in order.iter().enumerate() {
        let y = top + r as f64 * cell;
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" {FONT}>{}</text>",
            left - 4.0,
            y + cell / 2.0 + 4.0,
            escape(&names[i])
        );
        let x = left + r as f64 * cell + cell / 2.0;
        let _ = writeln!(
            s,
            "<text x=\"{x:.1}\" y=\"{:.1}\" {FONT} transform=\"rotate(-90 {x:.1} {:.1})\">{}</text>",
            top - 4.0,
            top - 4.0,
            escape(&names[i])
        );
        for (c, &l) in order.iter().enumerate() {
            let v = result.f[i][l];
            let x = left + c as f64 * cell;
            let _ = writeln!(
                s,
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{cell}\" height=\"{cell}\" fill=\"{}\" stroke=\"white\"/>",
                diverging(v)
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"8\">{v:.2}</text>",
                x + cell / 2.0,
                y + cell / 2.0 + 3.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
