//! Minimal SVG figures: persistence diagrams, sweep curves and boxplots.

use std::fmt::Write as _;

use crate::homology::PersistenceDiagram;
use crate::inference::{BootstrapResult, FiveNumber, SweepResult};

const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];
const PANEL: f64 = 260.0;
const MARGIN: f64 = 45.0;

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(lo: f64, hi: f64, log: bool) -> Self {
        let (lo, hi) = if log { (lo.ln(), hi.ln()) } else { (lo, hi) };
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { lo, hi, log }
    }

    fn padded(values: &[f64], log: bool) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let a = Self::new(lo, hi, log);
        let pad = 0.05 * (a.hi - a.lo);
        Self {
            lo: a.lo - pad,
            hi: a.hi + pad,
            log,
        }
    }

    /// Fraction along the axis.
    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.ln() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    x: Axis,
    y: Axis,
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        self.x0 + self.x.frac(v) * PANEL
    }

    fn py(&self, v: f64) -> f64 {
        self.y0 + PANEL - self.y.frac(v) * PANEL
    }

    fn draw(&self, s: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (x0, y0) = (self.x0, self.y0);
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{PANEL}" height="{PANEL}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{title}</text>"#,
            x0 + PANEL / 2.0,
            y0 - 8.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11">{xlabel}</text>"#,
            x0 + PANEL / 2.0,
            y0 + PANEL + 32.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="11" transform="rotate(-90 {:.2} {:.2})">{ylabel}</text>"#,
            x0 - 32.0,
            y0 + PANEL / 2.0,
            x0 - 32.0,
            y0 + PANEL / 2.0
        );
        for (axis, horizontal) in [(&self.x, true), (&self.y, false)] {
            for i in 0..=4 {
                let t = axis.lo + (axis.hi - axis.lo) * i as f64 / 4.0;
                let v = if axis.log { t.exp() } else { t };
                let label = if axis.log { format!("{v:.3}") } else { format!("{v:.2}") };
                if horizontal {
                    let x = self.px(v);
                    let _ = writeln!(
                        s,
                        r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle" font-size="9">{label}</text>"#,
                        y0 + PANEL + 14.0
                    );
                } else {
                    let y = self.py(v);
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="9">{label}</text>"#,
                        x0 - 4.0,
                        y + 3.0
                    );
                }
            }
        }
    }
}

fn open(width: f64, height: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    s
}

/// Birth/death scatter with the diagonal; essential classes drawn as
/// triangles on the cap line.
pub fn diagram_svg(pd: &PersistenceDiagram) -> String {
    let size = PANEL + 2.0 * MARGIN + 40.0;
    let mut s = open(size, size);
    let f = Frame {
        x0: MARGIN + 20.0,
        y0: MARGIN,
        x: Axis::new(0.0, pd.cap, false),
        y: Axis::new(0.0, pd.cap, false),
    };
    f.draw(&mut s, "persistence diagram", "birth", "death");
    let _ = writeln!(
        s,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        f.px(0.0),
        f.py(0.0),
        f.px(pd.cap),
        f.py(pd.cap)
    );
    for feat in &pd.features {
        let c = COLORS[feat.dim.min(2)];
        let (x, y) = (f.px(feat.birth), f.py(feat.death));
        if feat.essential {
            let _ = writeln!(
                s,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{c}"/>"#,
                x,
                y - 4.0,
                x - 4.0,
                y + 3.0,
                x + 4.0,
                y + 3.0
            );
        } else {
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{c}" fill-opacity="0.8"/>"#);
        }
    }
    for d in 0..=pd.max_dim.min(2) {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{}">H{d}</text>"#,
            f.x0 + 8.0,
            f.y0 + 14.0 + 13.0 * d as f64,
            COLORS[d]
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Three panels of mean total persistence against SNR (log axis).
pub fn sweep_svg(res: &SweepResult) -> String {
    let width = 3.0 * (PANEL + 2.0 * MARGIN) + 20.0;
    let mut s = open(width, PANEL + 2.0 * MARGIN + 30.0);
    for d in 0..3 {
        let means = res.means(d);
        let f = Frame {
            x0: MARGIN + 20.0 + d as f64 * (PANEL + 2.0 * MARGIN),
            y0: MARGIN,
            x: Axis::padded(&res.snr_grid, true),
            y: Axis::padded(means, false),
        };
        f.draw(&mut s, &format!("mean P{d}"), "SNR", &format!("P{d}"));
        let pts: Vec<String> = res
            .snr_grid
            .iter()
            .zip(means)
            .map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            pts.join(" "),
            COLORS[d]
        );
        for (&x, &y) in res.snr_grid.iter().zip(means) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#, f.px(x), f.py(y), COLORS[d]);
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Side-by-side boxplots of the two groups' bootstrap means, one panel per
/// homology dimension.
pub fn bootstrap_svg(res: &BootstrapResult, dims: usize) -> String {
    let dims = dims.clamp(1, 3);
    let width = dims as f64 * (PANEL + 2.0 * MARGIN) + 20.0;
    let mut s = open(width, PANEL + 2.0 * MARGIN + 30.0);
    for d in 0..dims {
        let boxes: Vec<FiveNumber> = res.groups.iter().map(|g| g.summary(d)).collect();
        let extent: Vec<f64> = boxes.iter().flat_map(|b| [b.min, b.max]).collect();
        let f = Frame {
            x0: MARGIN + 20.0 + d as f64 * (PANEL + 2.0 * MARGIN),
            y0: MARGIN,
            x: Axis::new(0.0, 3.0, false),
            y: Axis::padded(&extent, false),
        };
        f.draw(&mut s, &format!("bootstrap mean P{d}"), "", &format!("P{d}"));
        for (g, (b, group)) in boxes.iter().zip(&res.groups).enumerate() {
            let cx = f.px(g as f64 + 1.0);
            let (half, c) = (PANEL / 10.0, COLORS[g]);
            let _ = writeln!(
                s,
                r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="{c}"/>"#,
                f.py(b.min),
                f.py(b.max)
            );
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="white" stroke="{c}"/>"#,
                cx - half,
                f.py(b.q3),
                2.0 * half,
                (f.py(b.q1) - f.py(b.q3)).max(0.5)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{c}" stroke-width="2"/>"#,
                cx - half,
                f.py(b.median),
                cx + half,
                f.py(b.median)
            );
            let _ = writeln!(
                s,
                r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="9">{}</text>"#,
                f.y0 + PANEL + 24.0,
                group.label
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
