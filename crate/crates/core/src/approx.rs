//! Banach-Mazur polytope approximation.
//!
//! The convex hull of the centers of a `(c, eps')`-covering of
//! `K(1 + eps/c)` is sandwiched as `K < P < (1+eps) K`, with
//! `eps' = (1+eps)/(1+eps/c) - 1`. The pipeline fixes `c = 2`: any c >= 2
//! works and the smallest c keeps the inner scaling mild.

use crate::bodies::{ConvexBody, Representation};
use crate::enumerate::{enumerate_cover_verified, EnumeratorConfig};
use crate::hull::convex_hull;
use crate::macbeath::CoveringReport;
use crate::{Error, Result};
use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Output of the approximation pipeline.
#[derive(Debug, Clone)]
pub struct BanachMazurResult {
    /// The approximating polytope (V-representation, extreme points only
    /// for n <= 4).
    pub polytope: ConvexBody,
    pub vertex_count: usize,
    pub covering_size: usize,
    pub covering_report: CoveringReport,
}

/// Builds `P = conv(centers)` from a verified covering of `K(1 + eps/2)`.
pub fn banach_mazur_polytope(
    body: &ConvexBody,
    eps: f64,
    config: &EnumeratorConfig,
    verify_samples: usize,
    coverage_target: f64,
) -> Result<BanachMazurResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::input("banach-mazur approximation needs 0 < eps < 1"));
    }
    let c = 2.0;
    let mut config = config.clone();
    config.c = c;
    let eps_inner = (1.0 + eps) / (1.0 + eps / c) - 1.0;
    let inflated = body.scale(1.0 + eps / c);
    let (covering, covering_report) =
        enumerate_cover_verified(&inflated, eps_inner, &config, verify_samples, coverage_target)?;
    let centers: Vec<DVector<f64>> = covering.elements.iter().map(|e| e.center.clone()).collect();
    let n = body.dim();
    let (vertices, r, r_outer) = if n <= 4 {
        let hull = convex_hull(&centers)?;
        let verts = hull.vertex_points(&centers);
        let r = hull
            .merged_facets()
            .into_iter()
            .map(|(_, o)| o)
            .fold(f64::INFINITY, f64::min);
        let r_outer = verts.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        (verts, r, r_outer)
    } else {
        // no exact hull above dimension 4: keep the center cloud and trust
        // the verified covering for the inner radius
        let r_outer = centers.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        (centers, body.inner_radius(), r_outer)
    };
    let polytope = ConvexBody::vpolytope(vertices, r, r_outer)?;
    let vertex_count = match polytope.rep() {
        Representation::VPolytope(v) => v.vertices.len(),
        _ => unreachable!(),
    };
    Ok(BanachMazurResult {
        polytope,
        vertex_count,
        covering_size: covering.elements.len(),
        covering_report,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichReport {
    /// Every vertex of P has gauge at most `1 + eps` (exact).
    pub outer_pass: bool,
    pub outer_worst_gauge: f64,
    /// `K <= P`; exact via support functions against P's facets when the
    /// hull is available, sampled boundary directions otherwise.
    pub inner_pass: bool,
    pub inner_method: String,
    /// Worst violation `support_K(u) - offset` over P's facets (exact
    /// route) or worst gauge excess of a boundary point (sampled route).
    pub inner_worst_violation: f64,
    pub witness_direction: Option<Vec<f64>>,
    pub vertex_count: usize,
}

impl SandwichReport {
    pub fn pass(&self) -> bool {
        self.outer_pass && self.inner_pass
    }
}

/// Certifies `K <= P <= (1+eps) K`.
pub fn verify_sandwich<R: Rng>(
    body: &ConvexBody,
    polytope: &ConvexBody,
    eps: f64,
    rng: &mut R,
    samples: usize,
) -> Result<SandwichReport> {
    let Representation::VPolytope(v) = polytope.rep() else {
        return Err(Error::input("sandwich verification needs a V-polytope"));
    };
    let n = body.dim();
    let mut outer_worst = 0.0f64;
    for vert in &v.vertices {
        outer_worst = outer_worst.max(body.gauge(vert));
    }
    let outer_tol = 1e-9;
    let outer_pass = outer_worst <= 1.0 + eps + outer_tol;

    let inner_pass;
    let mut inner_worst = f64::NEG_INFINITY;
    let mut witness = None;
    let inner_method;
    if n <= 4 {
        inner_method = "exact-support-vs-facets".to_string();
        let hull = convex_hull(&v.vertices)?;
        for (u, o) in hull.merged_facets() {
            let sup = body.support_value(&u);
            let viol = sup - o;
            if viol > inner_worst {
                inner_worst = viol;
                if viol > 1e-9 * o.abs().max(1.0) {
                    witness = Some(u.iter().copied().collect());
                }
            }
        }
        inner_pass = inner_worst <= 1e-9;
    } else {
        inner_method = "sampled-boundary-directions".to_string();
        for _ in 0..samples {
            let u = crate::rng::unit_direction(rng, n);
            let p = body.boundary_ray(&u)?;
            let g = polytope.gauge(&p);
            let viol = g - 1.0;
            if viol > inner_worst {
                inner_worst = viol;
                if viol > 1e-9 {
                    witness = Some(u.iter().copied().collect());
                }
            }
        }
        inner_pass = inner_worst <= 1e-9;
    }

    Ok(SandwichReport {
        outer_pass,
        outer_worst_gauge: outer_worst,
        inner_pass,
        inner_method,
        inner_worst_violation: inner_worst,
        witness_direction: witness,
        vertex_count: v.vertices.len(),
    })
}
