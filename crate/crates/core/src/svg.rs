//! SVG drawings of a pruned complex in the Klein or Poincaré disk.
//!
//! Kept edges are blue (inside A), orange (inside B) or green (A to B);
//! pruned edges are red and dashed. Higher-dimensional complexes are drawn
//! through the orthogonal projection of the Klein ball onto its first two
//! axes, which keeps chords straight.

use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::models::norm_sq;
use crate::power::DelaunayComplex;
use crate::scores::Group;

pub const COLOR_A: &str = "#1f77b4";
pub const COLOR_B: &str = "#ff7f0e";
pub const COLOR_HETEROGENEOUS: &str = "#2ca02c";
pub const COLOR_PRUNED: &str = "#d62728";

const SIZE: f64 = 600.0;
const RADIUS: f64 = 280.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    #[default]
    Klein,
    Poincare,
}

impl FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "klein" => Ok(View::Klein),
            "poincare" => Ok(View::Poincare),
            other => Err(Error::Parse(format!("unknown view '{other}' (klein or poincare)"))),
        }
    }
}

fn planar(klein: &[f64], view: View) -> [f64; 2] {
    let p = [klein[0], klein.get(1).copied().unwrap_or(0.0)];
    match view {
        View::Klein => p,
        View::Poincare => {
            let s = 1.0 / (1.0 + (1.0 - norm_sq(&p)).max(0.0).sqrt());
            [s * p[0], s * p[1]]
        }
    }
}

fn screen(p: [f64; 2]) -> [f64; 2] {
    [SIZE / 2.0 + RADIUS * p[0], SIZE / 2.0 - RADIUS * p[1]]
}

/// Path data for the geodesic between two disk points in `view`.
fn geodesic_path(p: [f64; 2], q: [f64; 2], view: View) -> String {
    let (sp, sq) = (screen(p), screen(q));
    let line = format!("M{:.6} {:.6} L{:.6} {:.6}", sp[0], sp[1], sq[0], sq[1]);
    if view == View::Klein {
        return line;
    }
    // circle orthogonal to the unit circle: 2<c,p> = |p|^2 + 1, same for q
    let det = 2.0 * (p[0] * q[1] - p[1] * q[0]);
    if det.abs() < 1e-12 {
        return line;
    }
    let bp = norm_sq(&p) + 1.0;
    let bq = norm_sq(&q) + 1.0;
    let c = [(bp * q[1] - bq * p[1]) / det, (bq * p[0] - bp * q[0]) / det];
    let r = (norm_sq(&c) - 1.0).max(0.0).sqrt();
    if !r.is_finite() || r > 1e6 {
        return line;
    }
    let sc = screen(c);
    let cross = (sp[0] - sc[0]) * (sq[1] - sc[1]) - (sp[1] - sc[1]) * (sq[0] - sc[0]);
    let sweep = u8::from(cross > 0.0);
    format!(
        "M{:.6} {:.6} A{:.6} {:.6} 0 0 {sweep} {:.6} {:.6}",
        sp[0],
        sp[1],
        RADIUS * r,
        RADIUS * r,
        sq[0],
        sq[1]
    )
}

/// Deterministic SVG document for `complex`; `labels` is indexed by source index.
pub fn render_svg(complex: &DelaunayComplex, labels: &[Group], view: View) -> String {
    let mut points: Vec<Option<[f64; 2]>> = vec![None; labels.len()];
    for s in &complex.sites {
        // invert the lifting centre s = p / (2 sqrt(1 - |p|^2))
        let c = &s.center;
        let k = 1.0 / (0.25 + norm_sq(c)).sqrt();
        let klein: Vec<f64> = c.iter().map(|x| x * k).collect();
        if s.source_index < points.len() {
            points[s.source_index] = Some(planar(&klein, view));
        }
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r##"<circle cx="{:.6}" cy="{:.6}" r="{RADIUS:.6}" fill="none" stroke="#000000" stroke-width="1"/>"##,
        SIZE / 2.0,
        SIZE / 2.0
    );
    let _ = writeln!(out, r#"<g fill="none" stroke-width="1.5">"#);
    for e in &complex.edges {
        let (Some(p), Some(q)) = (points[e.a], points[e.b]) else {
            continue;
        };
        let (color, dash) = if !e.kept {
            (COLOR_PRUNED, r#" stroke-dasharray="4 3""#)
        } else {
            match (labels[e.a], labels[e.b]) {
                (Group::A, Group::A) => (COLOR_A, ""),
                (Group::B, Group::B) => (COLOR_B, ""),
                _ => (COLOR_HETEROGENEOUS, ""),
            }
        };
        let _ = writeln!(
            out,
            r#"<path class="edge" data-a="{}" data-b="{}" d="{}" stroke="{color}"{dash}/>"#,
            e.a,
            e.b,
            geodesic_path(p, q, view)
        );
    }
    let _ = writeln!(out, "</g>");
    for (i, p) in points.iter().enumerate() {
        let Some(p) = p else { continue };
        let s = screen(*p);
        let color = match labels[i] {
            Group::A => COLOR_A,
            Group::B => COLOR_B,
        };
        let _ = writeln!(
            out,
            r#"<circle class="vertex" data-id="{i}" cx="{:.6}" cy="{:.6}" r="3" fill="{color}"/>"#,
            s[0],
            s[1]
        );
    }
    out.push_str("</svg>\n");
    out
}
