//! Static SVG drawings of nets and their dual trees. Output depends only on
//! the canonical net, so it is byte-stable.

use std::f64::consts::{PI, TAU};
use std::fmt::Write;

use crate::netcomb::{AnalyzedNet, DualTree, EdgeId, TreeNode, Vertex};

const SIZE: f64 = 260.0;
const CENTER: f64 = 130.0;
const RADIUS: f64 = 100.0;
const POSITIVE_FILL: &str = "#f3d9a4";
const NEGATIVE_FILL: &str = "#b9d3ec";

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000".into()
    } else {
        s
    }
}

struct Disk {
    n: usize,
}

impl Disk {
    fn angle(&self, v: Vertex) -> f64 {
        TAU * (v % self.n) as f64 / self.n as f64
    }

    fn point(&self, v: Vertex, scale: f64) -> (f64, f64) {
        let a = self.angle(v);
        (CENTER + scale * RADIUS * a.cos(), CENTER - scale * RADIUS * a.sin())
    }

    /// Path segment from `from` to `to` along `e`, assuming the pen is at `from`.
    fn segment(&self, e: EdgeId, from: Vertex, to: Vertex) -> String {
        let (x, y) = self.point(to, 1.0);
        match e {
            EdgeId::Arc(_) => {
                // Anticlockwise on the page is sweep flag 0.
                let forward = to % self.n == (from + 1) % self.n;
                let sweep = if forward { 0 } else { 1 };
                format!("A {r} {r} 0 0 {sweep} {} {}", num(x), num(y), r = num(RADIUS))
            }
            _ => {
                let delta = {
                    let d = (self.angle(to) - self.angle(from)).rem_euclid(TAU);
                    d.min(TAU - d)
                };
                if (delta - PI).abs() < 1e-9 {
                    return format!("L {} {}", num(x), num(y));
                }
                // Geodesic: the circle orthogonal to the boundary through both ends.
                let r = RADIUS * (delta / 2.0).tan();
                let (px, py) = self.point(from, 1.0);
                let mid = {
                    let (a, b) = (self.angle(from), self.angle(to));
                    let m = a + ((b - a).rem_euclid(TAU)) / 2.0;
                    if (b - a).rem_euclid(TAU) > PI { m + PI } else { m }
                };
                let dist = RADIUS / (delta / 2.0).cos();
                let (cx, cy) = (CENTER + dist * mid.cos(), CENTER - dist * mid.sin());
                let cross = (px - cx) * (y - cy) - (py - cy) * (x - cx);
                let sweep = if cross > 0.0 { 1 } else { 0 };
                format!("A {} {} 0 0 {sweep} {} {}", num(r), num(r), num(x), num(y))
            }
        }
    }
}

/// The net in the closed disk: unit circle, numbered vertices, chords as
/// geodesics, inside faces coloured by parity with the distinguished face
/// hatched. Mirrors are omitted.
pub fn render_net_svg(net: &AnalyzedNet) -> String {
    let disk = Disk {
        n: net.net.vertex_count(),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
        s = SIZE
    );
    let _ = writeln!(out, "<title>net {}</title>", net.net);
    let _ = writeln!(out, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    out.push_str(concat!(
        r#"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)">"#,
        r##"<line x1="0" y1="0" x2="0" y2="6" stroke="#555" stroke-width="1.2"/></pattern></defs>"##,
        "\n"
    ));
    for face in net.complex.inside_faces() {
        let start = face.boundary[0].from;
        let (x, y) = disk.point(start, 1.0);
        let mut d = format!("M {} {}", num(x), num(y));
        for de in &face.boundary {
            d.push(' ');
            d.push_str(&disk.segment(de.edge, de.from, de.to));
        }
        d.push_str(" Z");
        let fill = if net.parity[face.id] > 0 { POSITIVE_FILL } else { NEGATIVE_FILL };
        let _ = writeln!(out, r#"<path d="{d}" fill="{fill}" stroke="none"/>"#);
        if face.id == net.distinguished.g0 {
            let _ = writeln!(out, r#"<path d="{d}" fill="url(#hatch)" stroke="none"/>"#);
        }
    }
    let _ = writeln!(
        out,
        r##"<circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="#222" stroke-width="1.5"/>"##,
        c = num(CENTER),
        r = num(RADIUS)
    );
    for &(a, b) in net.net.matching() {
        let (x, y) = disk.point(a, 1.0);
        let seg = disk.segment(EdgeId::chord(a, b), a, b);
        let _ = writeln!(
            out,
            r##"<path d="M {} {} {seg}" fill="none" stroke="#222" stroke-width="1.5"/>"##,
            num(x),
            num(y)
        );
    }
    for v in 1..=disk.n {
        let (x, y) = disk.point(v, 1.0);
        let (lx, ly) = disk.point(v, 1.14);
        let _ = writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="3" fill="#222"/><text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle" dominant-baseline="middle">{v}</text>"##,
            num(x),
            num(y),
            num(lx),
            num(ly)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn node_label(node: TreeNode) -> String {
    match node {
        TreeNode::Face(f) => format!("G{f}"),
        TreeNode::Arc(k) => format!("t{k}"),
    }
}

/// A rooted tree drawn in layers, children in edge-label order, with each
/// tree edge labelled by the net edge it crosses.
pub fn render_tree_svg(tree: &DualTree) -> String {
    let n = tree.node_count();
    let mut depth = vec![0usize; n];
    let mut x = vec![0.0f64; n];
    let mut next_leaf = 0.0;
    // Post-order placement: leaves left to right, parents centred.
    fn place(t: &DualTree, u: usize, dep: usize, depth: &mut [usize], x: &mut [f64], next: &mut f64) {
        depth[u] = dep;
        let kids = t.children(u);
        if kids.is_empty() {
            x[u] = *next;
            *next += 1.0;
            return;
        }
        for &(_, c) in kids {
            place(t, c, dep + 1, depth, x, next);
        }
        x[u] = (x[kids[0].1] + x[kids[kids.len() - 1].1]) / 2.0;
    }
    place(tree, tree.root(), 0, &mut depth, &mut x, &mut next_leaf);
    let levels = depth.iter().max().copied().unwrap_or(0) + 1;
    let (dx, dy, margin) = (48.0, 60.0, 30.0);
    let width = margin * 2.0 + dx * (next_leaf - 1.0).max(0.0);
    let height = margin * 2.0 + dy * (levels - 1) as f64;
    let pos = |u: usize| (margin + dx * x[u], margin + dy * depth[u] as f64);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = num(width),
        h = num(height)
    );
    let _ = writeln!(
        out,
        r#"<rect width="{}" height="{}" fill="white"/>"#,
        num(width),
        num(height)
    );
    for u in 0..n {
        for &(e, c) in tree.children(u) {
            let (x1, y1) = pos(u);
            let (x2, y2) = pos(c);
            let _ = writeln!(
                out,
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#444"/><text x="{}" y="{}" font-family="sans-serif" font-size="9" fill="#a33" text-anchor="middle">{e}</text>"##,
                num(x1),
                num(y1),
                num(x2),
                num(y2),
                num((x1 + x2) / 2.0 + 4.0),
                num((y1 + y2) / 2.0)
            );
        }
    }
    for u in 0..n {
        let (cx, cy) = pos(u);
        let fill = match tree.node(u) {
            TreeNode::Face(_) => "#f3d9a4",
            TreeNode::Arc(_) => "#ffffff",
        };
        let _ = writeln!(
            out,
            r##"<circle cx="{}" cy="{}" r="12" fill="{fill}" stroke="#222"/><text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle" dominant-baseline="middle">{}</text>"##,
            num(cx),
            num(cy),
            num(cx),
            num(cy),
            node_label(tree.node(u))
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcomb::{enumerate_nets, NetClass};

    #[test]
    fn byte_stable_and_complete() {
        for net in enumerate_nets(4).unwrap() {
            let a = AnalyzedNet::new(&net).unwrap();
            let svg = render_net_svg(&a);
            assert_eq!(svg, render_net_svg(&AnalyzedNet::new(&net).unwrap()));
            assert_eq!(svg.matches("<path d=\"M").count(), 4 + 1 + 3);
            assert_eq!(svg.matches("<text").count(), 6);
            assert!(!svg.contains("NaN"));
            let tree = render_tree_svg(&a.s_hat);
            assert_eq!(tree.matches("<circle").count(), 4 + 6);
        }
    }

    #[test]
    fn diameter_is_a_line() {
        let net = AnalyzedNet::new(&NetClass::new(4, [(1, 4), (2, 3), (5, 6)]).unwrap()).unwrap();
        let svg = render_net_svg(&net);
        assert!(svg.contains(" L "));
    }
}
