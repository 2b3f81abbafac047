//! Standalone SVG figures with axes, labels and a legend.

use std::fmt::Write;

const W: f64 = 720.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

pub enum Mark {
    /// polyline; `NaN` points break the line
    Line(Vec<(f64, f64)>),
    Dots(Vec<(f64, f64)>),
    /// horizontal or arbitrary segments
    Segments(Vec<((f64, f64), (f64, f64))>),
    /// filled region between two curves over shared abscissae
    Band(Vec<(f64, f64, f64)>),
    /// vertical bands `[x0, x1]` over the full height
    Spans(Vec<(f64, f64)>),
}

pub struct Series {
    pub label: String,
    pub color: String,
    pub mark: Mark,
}

pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub series: Vec<Series>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![lo];
    }
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Figure {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, label: &str, color: &str, mark: Mark) {
        self.series.push(Series {
            label: label.into(),
            color: color.into(),
            mark,
        });
    }

    /// Ranges spanning the finite data, padded by 3%.
    pub fn fit(&mut self) {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for s in &self.series {
            match &s.mark {
                Mark::Line(p) | Mark::Dots(p) => p.iter().for_each(|&(x, y)| {
                    xs.push(x);
                    ys.push(y)
                }),
                Mark::Segments(v) => v.iter().for_each(|&(a, b)| {
                    xs.extend([a.0, b.0]);
                    ys.extend([a.1, b.1])
                }),
                Mark::Band(v) => v.iter().for_each(|&(x, a, b)| {
                    xs.push(x);
                    ys.extend([a, b])
                }),
                Mark::Spans(v) => v.iter().for_each(|&(a, b)| xs.extend([a, b])),
            }
        }
        let span = |v: &[f64], d: (f64, f64)| {
            let f: Vec<f64> = v.iter().copied().filter(|x| x.is_finite()).collect();
            if f.is_empty() {
                return d;
            }
            let lo = f.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let pad = if hi > lo { 0.03 * (hi - lo) } else { 0.5 };
            (lo - pad, hi + pad)
        };
        self.x_range = span(&xs, self.x_range);
        self.y_range = span(&ys, self.y_range);
    }

    pub fn render(&self) -> String {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;
        let mut o = String::new();
        let _ = writeln!(
            o,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(o, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(o, r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#);
        let _ = writeln!(o, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#, LEFT + pw / 2.0, esc(&self.title));
        let _ = writeln!(o, r#"<g clip-path="url(#plot)">"#);
        for s in &self.series {
            let c = &s.color;
            match &s.mark {
                Mark::Spans(v) => {
                    for &(a, b) in v {
                        let (l, r) = (sx(a), sx(b));
                        let _ = writeln!(
                            o,
                            r#"<rect x="{:.2}" y="{TOP}" width="{:.2}" height="{ph}" fill="{c}" fill-opacity="0.18"/>"#,
                            l.min(r),
                            (r - l).abs().max(0.8)
                        );
                    }
                }
                Mark::Band(v) => {
                    let mut d = String::new();
                    for (i, &(x, a, _)) in v.iter().enumerate() {
                        let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, sx(x), sy(a));
                    }
                    for &(x, _, b) in v.iter().rev() {
                        let _ = write!(d, "L{:.2},{:.2} ", sx(x), sy(b));
                    }
                    let _ = writeln!(o, r#"<path d="{}Z" fill="{c}" fill-opacity="0.35" stroke="{c}" stroke-width="0.8"/>"#, d);
                }
                Mark::Line(p) => {
                    let mut d = String::new();
                    let mut pen = false;
                    for &(x, y) in p {
                        if !(x.is_finite() && y.is_finite()) {
                            pen = false;
                            continue;
                        }
                        let _ = write!(d, "{}{:.2},{:.2} ", if pen { "L" } else { "M" }, sx(x), sy(y));
                        pen = true;
                    }
                    let _ = writeln!(o, r#"<path d="{}" fill="none" stroke="{c}" stroke-width="1.4"/>"#, d.trim_end());
                }
                Mark::Dots(p) => {
                    for &(x, y) in p.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                        let _ = writeln!(o, r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{c}"/>"#, sx(x), sy(y));
                    }
                }
                Mark::Segments(v) => {
                    for &((ax, ay), (bx, by)) in v {
                        let _ = writeln!(
                            o,
                            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{c}" stroke-width="2.2"/>"#,
                            sx(ax),
                            sy(ay),
                            sx(bx),
                            sy(by)
                        );
                    }
                }
            }
        }
        let _ = writeln!(o, "</g>");
        let _ = writeln!(o, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for t in ticks(x0, x1) {
            let x = sx(t);
            let _ = writeln!(o, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
            let _ = writeln!(o, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, label(t));
        }
        for t in ticks(y0, y1) {
            let y = sy(t);
            let _ = writeln!(o, r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0);
            let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, label(t));
        }
        let _ = writeln!(o, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 14.0, esc(&self.x_label));
        let _ = writeln!(
            o,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            esc(&self.y_label)
        );
        let lx = W - RIGHT + 14.0;
        for (i, s) in self.series.iter().enumerate() {
            let y = TOP + 12.0 + 18.0 * i as f64;
            let _ = writeln!(o, r#"<rect x="{lx:.1}" y="{:.1}" width="14" height="10" fill="{}"/>"#, y - 9.0, s.color);
            let _ = writeln!(o, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, lx + 20.0, esc(&s.label));
        }
        o.push_str("</svg>\n");
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_and_inside() {
        let t = ticks(0.03, 0.97);
        assert!(t.len() >= 3 && t.len() <= 7);
        assert!(t.iter().all(|&v| (0.03..=0.97).contains(&v)));
        assert_eq!(ticks(1.0, 1.0), vec![1.0]);
    }

    #[test]
    fn render_has_axes_and_legend() {
        let mut f = Figure::new("a < b", "x", "y");
        f.push("line", PALETTE[0], Mark::Line(vec![(0.0, 0.0), (f64::NAN, 1.0), (1.0, 1.0)]));
        f.push("spans", PALETTE[1], Mark::Spans(vec![(0.2, 0.3)]));
        f.fit();
        let s = f.render();
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a &lt; b"));
        assert!(s.contains(">line</text>") && s.contains(">spans</text>"));
        assert_eq!(s, f.render());
    }
}
