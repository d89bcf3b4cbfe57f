//! Deterministic SVG rendering of placements, route trees and conduits.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::route::{Conduit, Orientation, RouteTree};
use crate::seqpair::Placement;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvgOptions {
    /// Pixels per micrometer.
    pub scale: f64,
    pub margin: f64,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            scale: 40.0,
            margin: 1.0,
        }
    }
}

const NET_COLORS: [&str; 8] = [
    "#c0392b", "#2980b9", "#27ae60", "#8e44ad", "#d35400", "#16a085", "#7f8c8d", "#f39c12",
];

/// Renders blocks as labeled rects, trees as one polyline per edge colored
/// per net, and conduits as translucent bands. Output is byte-identical for
/// identical inputs.
pub fn render_svg(
    placement: &Placement,
    trees: &[RouteTree],
    conduits: &[Conduit],
    opts: &SvgOptions,
) -> String {
    let m = opts.margin;
    let w = (placement.width + 2.0 * m) * opts.scale;
    let h = (placement.height + 2.0 * m) * opts.scale;
    // SVG y grows downward; flip about the canvas.
    let tx = |x: f64| (x + m) * opts.scale;
    let ty = |y: f64| (placement.height + m - y) * opts.scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.2}" height="{h:.2}" viewBox="0 0 {w:.2} {h:.2}">"#
    );
    let _ = writeln!(
        out,
        r##"  <rect x="0" y="0" width="{w:.2}" height="{h:.2}" fill="#fdfdf8"/>"##
    );
    let _ = writeln!(
        out,
        r##"  <rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#999" stroke-dasharray="4 3"/>"##,
        tx(0.0),
        ty(placement.height),
        placement.width * opts.scale,
        placement.height * opts.scale
    );

    for (id, r) in &placement.rects {
        let _ = writeln!(
            out,
            r##"  <rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#d7e3f4" stroke="#33506e" stroke-width="1"/>"##,
            tx(r.x),
            ty(r.y + r.h),
            r.w * opts.scale,
            r.h * opts.scale
        );
        let _ = writeln!(
            out,
            r#"  <text x="{:.3}" y="{:.3}" font-size="{:.2}" font-family="monospace" text-anchor="middle">{}</text>"#,
            tx(r.x + r.w / 2.0),
            ty(r.y + r.h / 2.0) + 0.1 * opts.scale,
            0.3 * opts.scale,
            id
        );
    }

    for c in conduits {
        let (x, y, cw, ch) = match c.orientation {
            Orientation::Horizontal => (
                c.span.0,
                c.cross - c.width / 2.0,
                c.span.1 - c.span.0,
                c.width,
            ),
            Orientation::Vertical => (
                c.cross - c.width / 2.0,
                c.span.0,
                c.width,
                c.span.1 - c.span.0,
            ),
        };
        let _ = writeln!(
            out,
            r##"  <rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="#f6b26b" fill-opacity="0.35" stroke="none"/>"##,
            tx(x),
            ty(y + ch),
            cw * opts.scale,
            ch * opts.scale
        );
    }

    for (ni, tree) in trees.iter().enumerate() {
        let color = NET_COLORS[ni % NET_COLORS.len()];
        for &(a, b) in &tree.edges {
            let (pa, pb) = (&tree.vertices[a], &tree.vertices[b]);
            let _ = writeln!(
                out,
                r#"  <polyline points="{:.3},{:.3} {:.3},{:.3}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                tx(pa.x),
                ty(pa.y),
                tx(pb.x),
                ty(pb.y),
                color
            );
        }
        for v in &tree.vertices {
            let _ = writeln!(
                out,
                r#"  <circle cx="{:.3}" cy="{:.3}" r="2" fill="{}"/>"#,
                tx(v.x),
                ty(v.y),
                color
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_svg(
    placement: &Placement,
    trees: &[RouteTree],
    conduits: &[Conduit],
    opts: &SvgOptions,
    path: &Path,
) -> Result<()> {
    std::fs::write(path, render_svg(placement, trees, conduits, opts))?;
    Ok(())
}
