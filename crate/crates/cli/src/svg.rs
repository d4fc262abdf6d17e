//! Deterministic SVG rendering of a deployment: rasterized cells colored
//! by owner, the target outline, AP/FC/centroid glyphs (solid for strong
//! nodes, hollow for weak ones) and AP-to-FC connection segments.
//!
//! No plotting library: the file is assembled from fixed-precision
//! strings, so identical inputs produce byte-identical output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use httl_core::geom::Point;
use httl_core::voronoi::owner;
use httl_core::{CellMoments, Deployment, Scenario};

use crate::error::CliError;

const CANVAS: f64 = 720.0;
const PAD: f64 = 20.0;

struct Frame {
    min: Point,
    scale: f64,
    height: f64,
}

impl Frame {
    fn new(s: &Scenario) -> Frame {
        let bb = s.omega().bounding_box();
        let extent = bb.width().max(bb.height());
        Frame { min: bb.min, scale: (CANVAS - 2.0 * PAD) / extent, height: bb.height() }
    }

    fn x(&self, wx: f64) -> f64 {
        PAD + (wx - self.min.x) * self.scale
    }

    // SVG y grows downward; world y grows upward.
    fn y(&self, wy: f64) -> f64 {
        PAD + (self.height - (wy - self.min.y)) * self.scale
    }
}

/// Fixed palette: evenly spaced hues, one per AP index.
fn cell_color(n: usize, total: usize) -> String {
    let h = 360.0 * n as f64 / total.max(1) as f64;
    let (s, v) = (0.62, 0.85);
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    format!(
        "#{:02x}{:02x}{:02x}",
        ((r + m) * 255.0).round() as u8,
        ((g + m) * 255.0).round() as u8,
        ((b + m) * 255.0).round() as u8
    )
}

fn star_path(cx: f64, cy: f64, radius: f64) -> String {
    let mut d = String::new();
    for k in 0..10 {
        let r = if k % 2 == 0 { radius } else { radius * 0.42 };
        let angle = std::f64::consts::PI * (-0.5 + k as f64 / 5.0);
        let px = cx + r * angle.cos();
        let py = cy + r * angle.sin();
        let _ = write!(d, "{}{:.2} {:.2}", if k == 0 { "M" } else { "L" }, px, py);
    }
    d.push('Z');
    d
}

/// Renders the deployment to SVG text.
pub fn deployment_svg(s: &Scenario, d: &Deployment, m: &CellMoments, raster: usize) -> String {
    let frame = Frame::new(s);
    let bb = s.omega().bounding_box();
    let n_aps = s.n_aps();
    let strong_ap = |n: usize| s.style().map(|st| st.strong_aps.contains(&n)).unwrap_or(true);
    let strong_fc = |i: usize| s.style().map(|st| st.strong_fcs.contains(&i)).unwrap_or(true);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{c}\" height=\"{c}\" viewBox=\"0 0 {c} {c}\">",
        c = CANVAS
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Cell raster: midpoint grid over the bounding box, row runs merged.
    let dx = bb.width() / raster as f64;
    let dy = bb.height() / raster as f64;
    svg.push_str("<g stroke=\"none\" fill-opacity=\"0.35\">\n");
    for iy in 0..raster {
        let wy = bb.min.y + (iy as f64 + 0.5) * dy;
        let mut run: Option<(usize, usize, usize)> = None; // (owner, start, end)
        let flush = |svg: &mut String, run: &Option<(usize, usize, usize)>| {
            if let Some((own, start, end)) = run {
                let x0 = bb.min.x + *start as f64 * dx;
                let x1 = bb.min.x + (*end + 1) as f64 * dx;
                let _ = writeln!(
                    svg,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                    frame.x(x0),
                    frame.y(wy + 0.5 * dy),
                    (x1 - x0) * frame.scale,
                    dy * frame.scale,
                    cell_color(*own, n_aps)
                );
            }
        };
        for ix in 0..raster {
            let w = Point::new(bb.min.x + (ix as f64 + 0.5) * dx, wy);
            if s.omega().contains(w) {
                let own = owner(s, d, w);
                match run {
                    Some((o, start, _)) if o == own => run = Some((o, start, ix)),
                    other => {
                        flush(&mut svg, &other);
                        run = Some((own, ix, ix));
                    }
                }
            } else {
                flush(&mut svg, &run);
                run = None;
            }
        }
        flush(&mut svg, &run);
    }
    svg.push_str("</g>\n");

    // Target region outline.
    let pts: Vec<String> = s
        .omega()
        .vertices()
        .iter()
        .map(|v| format!("{:.2},{:.2}", frame.x(v.x), frame.y(v.y)))
        .collect();
    let _ = writeln!(
        svg,
        "<polygon points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>",
        pts.join(" ")
    );

    // AP -> FC connection segments.
    svg.push_str("<g stroke=\"#555555\" stroke-width=\"0.8\" stroke-dasharray=\"4 3\">\n");
    for n in 0..n_aps {
        let q = d.q[d.t[n]];
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\"/>",
            frame.x(d.p[n].x),
            frame.y(d.p[n].y),
            frame.x(q.x),
            frame.y(q.y)
        );
    }
    svg.push_str("</g>\n");

    // Cell centroids as crosses.
    svg.push_str("<g stroke-width=\"1.6\">\n");
    let arm = 5.0;
    for n in 0..n_aps {
        if let Some(c) = m.c[n] {
            let (cx, cy) = (frame.x(c.x), frame.y(c.y));
            let color = cell_color(n, n_aps);
            let _ = writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\"/>",
                cx - arm, cy, cx + arm, cy, color
            );
            let _ = writeln!(
                svg,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\"/>",
                cx, cy - arm, cx, cy + arm, color
            );
        }
    }
    svg.push_str("</g>\n");

    // AP glyphs: circles, solid for strong nodes, hollow for weak ones.
    for n in 0..n_aps {
        let color = cell_color(n, n_aps);
        let (fill, stroke) = if strong_ap(n) { (color.as_str(), "black") } else { ("white", color.as_str()) };
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"6\" fill=\"{}\" stroke=\"{}\" stroke-width=\"1.2\"/>",
            frame.x(d.p[n].x),
            frame.y(d.p[n].y),
            fill,
            stroke
        );
    }

    // FC glyphs: five-pointed stars.
    for (i, q) in d.q.iter().enumerate() {
        let (fill, stroke) = if strong_fc(i) { ("#222222", "black") } else { ("white", "#222222") };
        let _ = writeln!(
            svg,
            "<path d=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"1.2\"/>",
            star_path(frame.x(q.x), frame.y(q.y), 12.0),
            fill,
            stroke
        );
    }

    svg.push_str("</svg>\n");
    svg
}

/// Writes the rendered deployment to `path`.
pub fn emit_deployment_svg(
    s: &Scenario,
    d: &Deployment,
    m: &CellMoments,
    raster: usize,
    path: &Path,
) -> Result<(), CliError> {
    fs::write(path, deployment_svg(s, d, m, raster))
        .map_err(CliError::io(path.display().to_string()))
}
