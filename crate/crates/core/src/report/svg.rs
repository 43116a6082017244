//! Static SVG renderings of the plot tables. Deliberately bare: axes with
//! min/max tick labels, polylines, rectangles and dots.

use std::fmt::Write;

use ndarray::ArrayView2;

use super::{Isoline, PdfOverlay};
use crate::select::SweepRow;
use crate::validation::ScoreRow;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Canvas {
    x: (f64, f64),
    y: (f64, f64),
    body: String,
}

impl Canvas {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Canvas { x: widen(x), y: widen(y), body: String::new() }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    fn polyline(&mut self, pts: impl Iterator<Item = (f64, f64)>, color: &str, width: f64, closed: bool) {
        let coords: Vec<String> = pts.map(|(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y))).collect();
        let tag = if closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            self.body,
            r#"<{tag} points="{}" fill="none" stroke="{color}" stroke-width="{width}"/>"#,
            coords.join(" ")
        );
    }

    fn rect(&mut self, x0: f64, x1: f64, y: f64, color: &str) {
        let (l, r, top, base) = (self.px(x0), self.px(x1), self.py(y), self.py(self.y.0));
        let _ = writeln!(
            self.body,
            r#"<rect x="{l:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.35" stroke="none"/>"#,
            r - l,
            base - top
        );
    }

    fn dot(&mut self, x: f64, y: f64, r: f64, color: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{r}" fill="{color}"/>"#,
            self.px(x),
            self.py(y)
        );
    }

    fn finish(self, title: &str, xlabel: &str, ylabel: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
        let _ = writeln!(s, r#"<path d="M{l},{t} L{l},{b} L{r},{b}" fill="none" stroke="black"/>"#);
        let text = |s: &mut String, x: f64, y: f64, anchor: &str, v: &str| {
            let _ = writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" font-size="11" font-family="sans-serif" text-anchor="{anchor}">{v}</text>"#);
        };
        text(&mut s, W / 2.0, 24.0, "middle", title);
        text(&mut s, W / 2.0, H - 12.0, "middle", xlabel);
        text(&mut s, 12.0, H / 2.0, "start", ylabel);
        text(&mut s, l, b + 14.0, "middle", &format!("{:.4}", self.x.0));
        text(&mut s, r, b + 14.0, "middle", &format!("{:.4}", self.x.1));
        text(&mut s, l - 4.0, b, "end", &format!("{:.4}", self.y.0));
        text(&mut s, l - 4.0, t + 4.0, "end", &format!("{:.4}", self.y.1));
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Density histogram with the mixture (black) and weighted component curves.
pub fn overlay_svg(o: &PdfOverlay, xlabel: &str) -> String {
    let ymax = range(o.bins.iter().map(|b| b.density).chain(o.mixture.iter().copied())).1;
    let mut c = Canvas::new((o.grid[0], o.grid[o.grid.len() - 1]), (0.0, ymax * 1.05));
    for b in &o.bins {
        c.rect(b.left, b.right, b.density, "#888888");
    }
    for (j, comp) in o.components.iter().enumerate() {
        c.polyline(o.grid.iter().copied().zip(comp.iter().copied()), PALETTE[j % PALETTE.len()], 1.0, false);
    }
    c.polyline(o.grid.iter().copied().zip(o.mixture.iter().copied()), "black", 2.0, false);
    c.finish("histogram and fitted mixture", xlabel, "density")
}

/// BIC against component count; failed entries are left out.
pub fn bic_svg(rows: &[SweepRow]) -> String {
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.bic.map(|b| (r.k as f64, b))).collect();
    let mut c = Canvas::new(range(pts.iter().map(|p| p.0)), range(pts.iter().map(|p| p.1)));
    c.polyline(pts.iter().copied(), PALETTE[0], 1.5, false);
    for &(x, y) in &pts {
        c.dot(x, y, 3.0, PALETTE[0]);
    }
    c.finish("BIC by number of components", "k", "BIC")
}

/// Data points (grey) and per-component ellipses.
pub fn ellipses_svg(lines: &[Isoline], data: Option<ArrayView2<f64>>, xlabel: &str, ylabel: &str) -> String {
    let xs = lines.iter().flat_map(|l| l.points.iter().map(|p| p[0]));
    let ys = lines.iter().flat_map(|l| l.points.iter().map(|p| p[1]));
    let (mut xr, mut yr) = (range(xs), range(ys));
    if let Some(d) = data {
        let dx = range(d.column(0).iter().copied());
        let dy = range(d.column(1).iter().copied());
        xr = (xr.0.min(dx.0), xr.1.max(dx.1));
        yr = (yr.0.min(dy.0), yr.1.max(dy.1));
    }
    let mut c = Canvas::new(xr, yr);
    if let Some(d) = data {
        for row in d.rows() {
            c.dot(row[0], row[1], 1.5, "#aaaaaa");
        }
    }
    for l in lines {
        let color = PALETTE[l.component % PALETTE.len()];
        c.polyline(l.points.iter().map(|p| (p[0], p[1])), color, 1.5, true);
        c.dot(l.mean[0], l.mean[1], 3.0, color);
    }
    c.finish("mixture components", xlabel, ylabel)
}

/// Fold scores against subsample size.
pub fn scores_svg(rows: &[ScoreRow]) -> String {
    let pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.score.map(|s| (r.size as f64, s))).collect();
    let yr = range(pts.iter().map(|p| p.1));
    let mut c = Canvas::new(range(pts.iter().map(|p| p.0)), (yr.0.min(0.0), 1.0));
    for &(x, y) in &pts {
        c.dot(x, y, 2.0, PALETTE[0]);
    }
    c.finish("cross-validation scores", "dataset size", "adjusted Rand index")
}
