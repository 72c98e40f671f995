//! SVG rendering of 2-D coverings and sandwich certificates: a fixed
//! 1000x1000 viewBox scaled to the ambient outer radius, one closed path
//! per covering element plus the target and ambient outlines.

use crate::bodies::{ConvexBody, Representation};
use crate::macbeath::{mac_as_hpoly, Covering, MacbeathRegion};
use crate::{Error, Result};
use nalgebra::DVector;
use std::fmt::Write as _;

struct Frame {
    scale: f64,
}

impl Frame {
    fn map(&self, p: &DVector<f64>) -> (f64, f64) {
        (500.0 + p[0] * self.scale, 500.0 - p[1] * self.scale)
    }
}

fn path_from(points: &[DVector<f64>], frame: &Frame, style: &str) -> String {
    let mut d = String::new();
    for (i, p) in points.iter().enumerate() {
        let (x, y) = frame.map(p);
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(d, "{cmd}{x:.3},{y:.3} ");
    }
    format!("<path d=\"{}Z\" {} />\n", d, style)
}

/// Ordered boundary polygon of a convex region star-shaped about `center`.
fn radial_polygon(
    center: &DVector<f64>,
    gauge_at: impl Fn(&DVector<f64>) -> f64,
    segments: usize,
) -> Vec<DVector<f64>> {
    (0..segments)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / segments as f64;
            let u = DVector::from_column_slice(&[a.cos(), a.sin()]);
            let g = gauge_at(&u);
            center + u / g.max(1e-12)
        })
        .collect()
}

fn body_outline(body: &ConvexBody, segments: usize) -> Vec<DVector<f64>> {
    radial_polygon(&DVector::zeros(2), |u| body.gauge(u), segments)
}

fn element_polygon(region: &MacbeathRegion<'_>) -> Vec<DVector<f64>> {
    if let Some(h) = region.body.as_hpolytope() {
        let mac = mac_as_hpoly(&h, &region.center, region.scale);
        if let Ok(mut verts) = mac.vertices(2) {
            if verts.len() >= 3 {
                // order by angle about the center
                verts.sort_by(|a, b| {
                    let aa = (a[1] - region.center[1]).atan2(a[0] - region.center[0]);
                    let ab = (b[1] - region.center[1]).atan2(b[0] - region.center[0]);
                    aa.partial_cmp(&ab).unwrap()
                });
                return verts;
            }
        }
    }
    radial_polygon(&region.center, |u| region.gauge_at(&(&region.center + u)), 48)
}

/// Renders a 2-D covering: exactly `elements + 2` closed paths (each
/// element, the target outline, the ambient outline).
pub fn render_covering(cov: &Covering) -> Result<String> {
    if cov.ambient.dim() != 2 {
        return Err(Error::UnsupportedRepresentation("svg rendering above dimension 2"));
    }
    let frame = Frame {
        scale: 480.0 / cov.ambient.outer_radius(),
    };
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\">\n",
    );
    for i in 0..cov.elements.len() {
        let region = cov.element_region(i);
        let poly = element_polygon(&region);
        out.push_str(&path_from(
            &poly,
            &frame,
            "fill=\"#4477aa\" fill-opacity=\"0.18\" stroke=\"#4477aa\" stroke-width=\"0.6\"",
        ));
    }
    out.push_str(&path_from(
        &body_outline(&cov.target, 256),
        &frame,
        "fill=\"none\" stroke=\"#222222\" stroke-width=\"2\"",
    ));
    out.push_str(&path_from(
        &body_outline(&cov.ambient, 256),
        &frame,
        "fill=\"none\" stroke=\"#cc3311\" stroke-width=\"2\" stroke-dasharray=\"8 4\"",
    ));
    out.push_str("</svg>\n");
    Ok(out)
}

/// Renders the sandwich `K <= P <= (1+eps) K` for 2-D bodies.
pub fn render_sandwich(body: &ConvexBody, polytope: &ConvexBody, eps: f64) -> Result<String> {
    if body.dim() != 2 {
        return Err(Error::UnsupportedRepresentation("svg rendering above dimension 2"));
    }
    let Representation::VPolytope(v) = polytope.rep() else {
        return Err(Error::input("sandwich rendering needs a V-polytope"));
    };
    let frame = Frame {
        scale: 480.0 / ((1.0 + eps) * body.outer_radius()),
    };
    let mut out = String::from(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 1000\">\n",
    );
    let mut verts = v.vertices.clone();
    verts.sort_by(|a, b| a[1].atan2(a[0]).partial_cmp(&b[1].atan2(b[0])).unwrap());
    out.push_str(&path_from(
        &verts,
        &frame,
        "fill=\"#4477aa\" fill-opacity=\"0.25\" stroke=\"#4477aa\" stroke-width=\"1.5\"",
    ));
    out.push_str(&path_from(
        &body_outline(body, 256),
        &frame,
        "fill=\"none\" stroke=\"#222222\" stroke-width=\"2\"",
    ));
    out.push_str(&path_from(
        &body_outline(&body.scale(1.0 + eps), 256),
        &frame,
        "fill=\"none\" stroke=\"#cc3311\" stroke-width=\"2\" stroke-dasharray=\"8 4\"",
    ));
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macbeath::hitting_to_cover;

    #[test]
    fn path_count_matches_contract() {
        let ambient = ConvexBody::cube(2, 1.1).unwrap();
        let hits = vec![
            (DVector::from_column_slice(&[0.0, 0.0]), 0usize),
            (DVector::from_column_slice(&[0.5, 0.2]), 1usize),
            (DVector::from_column_slice(&[-0.3, -0.6]), 0usize),
        ];
        let (cov, _) = hitting_to_cover(&ambient, &hits, 2.0, 0.1).unwrap();
        let svg = render_covering(&cov).unwrap();
        let paths = svg.matches("<path").count();
        assert_eq!(paths, cov.elements.len() + 2);
        assert_eq!(svg.matches("Z\"").count(), paths);
        // deterministic output
        assert_eq!(svg, render_covering(&cov).unwrap());
    }
}
