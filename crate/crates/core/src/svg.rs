//! Minimal deterministic SVG emission for report figures.
//!
//! Writes plain shape elements with fixed 3-decimal coordinates so the
//! same inputs always produce byte-identical files. World coordinates go
//! in unchanged; the viewBox flips the y axis so north is up.

use std::fmt::Write as _;

/// An SVG document in world coordinates. Bounds grow as shapes are
/// added; the final viewBox pads them by ten percent.
pub struct SvgDoc {
    body: String,
    min: [f64; 2],
    max: [f64; 2],
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

impl SvgDoc {
    pub fn new() -> Self {
        SvgDoc {
            body: String::new(),
            min: [f64::INFINITY; 2],
            max: [f64::NEG_INFINITY; 2],
        }
    }

    fn cover(&mut self, x: f64, y: f64) {
        self.min[0] = self.min[0].min(x);
        self.min[1] = self.min[1].min(y);
        self.max[0] = self.max[0].max(x);
        self.max[1] = self.max[1].max(y);
    }

    /// Stroked open polyline through world points.
    pub fn polyline(&mut self, points: &[[f64; 2]], color: &str, width: f64) {
        if points.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, p) in points.iter().enumerate() {
            self.cover(p[0], p[1]);
            let _ = write!(
                d,
                "{}{},{}",
                if i == 0 { "" } else { " " },
                fmt(p[0]),
                fmt(-p[1])
            );
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{d}" fill="none" stroke="{color}" stroke-width="{}"/>"#,
            fmt(width)
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, color: &str) {
        self.cover(x - r, y - r);
        self.cover(x + r, y + r);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{color}"/>"#,
            fmt(x),
            fmt(-y),
            fmt(r)
        );
    }

    pub fn line(&mut self, a: [f64; 2], b: [f64; 2], color: &str, width: f64) {
        self.cover(a[0], a[1]);
        self.cover(b[0], b[1]);
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="{}"/>"#,
            fmt(a[0]),
            fmt(-a[1]),
            fmt(b[0]),
            fmt(-b[1]),
            fmt(width)
        );
    }

    /// Axis-aligned filled rectangle given two opposite world corners.
    pub fn rect(&mut self, lo: [f64; 2], hi: [f64; 2], color: &str) {
        self.cover(lo[0], lo[1]);
        self.cover(hi[0], hi[1]);
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#,
            fmt(lo[0]),
            fmt(-hi[1]),
            fmt(hi[0] - lo[0]),
            fmt(hi[1] - lo[1])
        );
    }

    /// Small annotation text anchored at a world point.
    pub fn text(&mut self, x: f64, y: f64, size: f64, content: &str) {
        self.cover(x, y);
        let escaped = content
            .replace('&', "&amp;")
            .replace('<', "&lt;")
            .replace('>', "&gt;");
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{}" font-family="monospace">{escaped}</text>"#,
            fmt(x),
            fmt(-y),
            fmt(size)
        );
    }

    /// Final document with a padded viewBox around everything drawn.
    pub fn finish(self) -> String {
        let (min, max) = if self.min[0].is_finite() {
            (self.min, self.max)
        } else {
            ([0.0, 0.0], [1.0, 1.0])
        };
        let pad = 0.1 * ((max[0] - min[0]).max(max[1] - min[1])).max(1.0);
        let x = min[0] - pad;
        let y = -(max[1] + pad);
        let w = max[0] - min[0] + 2.0 * pad;
        let h = max[1] - min[1] + 2.0 * pad;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"800\" height=\"{}\">\n{}</svg>\n",
            fmt(x),
            fmt(y),
            fmt(w),
            fmt(h),
            fmt(800.0 * h / w),
            self.body
        )
    }
}

impl Default for SvgDoc {
    fn default() -> Self {
        SvgDoc::new()
    }
}

/// Stable color palette for plotted sets, cycled by index.
pub fn palette(i: usize) -> &'static str {
    const COLORS: [&str; 6] = [
        "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
    ];
    COLORS[i % COLORS.len()]
}
