//! Test-body generators with honestly computed centering radii. Shared by
//! the property suites, the acceptance tests and the CLI lemma runner.

use crate::bodies::ConvexBody;
use crate::hull::convex_hull;
use crate::Result;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Random bounded H-polytope about the origin: axis facets guarantee
/// boundedness, extra random facets shape it. Radii are exact (min facet
/// distance / max vertex norm).
pub fn random_hpolytope<R: Rng>(rng: &mut R, dim: usize, extra_facets: usize) -> Result<ConvexBody> {
    let mut normals = Vec::new();
    let mut offsets = Vec::new();
    for j in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = DVector::zeros(dim);
            e[j] = s;
            normals.push(e);
            offsets.push(rng.random_range(0.8..1.6));
        }
    }
    for _ in 0..extra_facets {
        normals.push(crate::rng::unit_direction(rng, dim));
        offsets.push(rng.random_range(0.8..1.6));
    }
    let h = crate::bodies::HPolytope::new(normals.clone(), offsets.clone());
    let verts = h.vertices(dim)?;
    // keep the representation irredundant: a facet must be tight at `dim`
    // vertices
    let mut keep_normals = Vec::new();
    let mut keep_offsets = Vec::new();
    for (a, &b) in normals.iter().zip(&offsets) {
        let tight = verts
            .iter()
            .filter(|v| (a.dot(v) - b).abs() < 1e-9 * b.abs().max(1.0))
            .count();
        if tight >= dim {
            keep_normals.push(a.clone());
            keep_offsets.push(b);
        }
    }
    let r = keep_offsets.iter().cloned().fold(f64::INFINITY, f64::min);
    let r_outer = verts.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    ConvexBody::hpolytope(keep_normals, keep_offsets, r, r_outer)
}

/// Random V-polytope: scaled axis vertices for interiority plus random
/// direction vertices. Radii from the hull facets.
pub fn random_vpolytope<R: Rng>(rng: &mut R, dim: usize, extra_vertices: usize) -> Result<ConvexBody> {
    let mut pts = Vec::new();
    for j in 0..dim {
        for s in [1.0f64, -1.0] {
            let mut e = DVector::zeros(dim);
            e[j] = s * rng.random_range(0.7..1.5);
            pts.push(e);
        }
    }
    for _ in 0..extra_vertices {
        let u = crate::rng::unit_direction(rng, dim);
        pts.push(u * rng.random_range(0.7..1.5));
    }
    let hull = convex_hull(&pts)?;
    let verts = hull.vertex_points(&pts);
    let r = hull
        .merged_facets()
        .into_iter()
        .map(|(_, o)| o)
        .fold(f64::INFINITY, f64::min);
    let r_outer = verts.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    ConvexBody::vpolytope(verts, r, r_outer)
}

/// Random origin-centered ellipsoid with semi-axes in [0.63, 1.58].
pub fn random_ellipsoid<R: Rng>(rng: &mut R, dim: usize) -> Result<ConvexBody> {
    // random rotation via QR of a gaussian matrix
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        rng.sample::<f64, _>(rand_distr::StandardNormal)
    });
    let qr = g.qr();
    let q = qr.q();
    let eigs: Vec<f64> = (0..dim).map(|_| rng.random_range(0.4..2.5)).collect();
    let d = DMatrix::from_diagonal(&DVector::from_vec(eigs.clone()));
    let shape = &q * d * q.transpose();
    // symmetrize against roundoff
    let shape = (&shape + shape.transpose()) * 0.5;
    let lam_max = eigs.iter().cloned().fold(0.0f64, f64::max);
    let lam_min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    ConvexBody::ellipsoid(DVector::zeros(dim), shape, 1.0 / lam_max.sqrt(), 1.0 / lam_min.sqrt())
}

/// The fixed ellipse `x^2/4 + y^2 <= 1` (or its 3-d analogue).
pub fn standard_ellipsoid(dim: usize) -> Result<ConvexBody> {
    let mut diag = vec![1.0; dim];
    diag[0] = 0.25;
    let shape = DMatrix::from_diagonal(&DVector::from_vec(diag));
    ConvexBody::ellipsoid(DVector::zeros(dim), shape, 1.0, 2.0)
}

/// Named body pool for the lemma suites at a given dimension: cube, ball,
/// ellipse, l1 ball, and seeded random polytopes in both representations.
pub fn standard_suite(dim: usize, seed: u64) -> Vec<(String, ConvexBody)> {
    let mut rng = crate::rng::derive(seed, &[0x0b0d, dim as u64]);
    vec![
        ("cube".into(), ConvexBody::cube(dim, 1.0).unwrap()),
        ("ball".into(), ConvexBody::ball(dim, 1.0).unwrap()),
        ("ellipsoid".into(), standard_ellipsoid(dim).unwrap()),
        ("l1-ball".into(), ConvexBody::lp_ball(dim, 1.0, 1.0).unwrap()),
        (
            "random-hpoly".into(),
            random_hpolytope(&mut rng, dim, 2 * dim).unwrap(),
        ),
        (
            "random-vpoly".into(),
            random_vpolytope(&mut rng, dim, 3 * dim).unwrap(),
        ),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_produce_valid_bodies() {
        let mut rng = crate::rng::root(77);
        for dim in [2usize, 3] {
            for _ in 0..20 {
                let h = random_hpolytope(&mut rng, dim, 2 * dim).unwrap();
                let v = random_vpolytope(&mut rng, dim, 3 * dim).unwrap();
                let e = random_ellipsoid(&mut rng, dim).unwrap();
                for body in [&h, &v, &e] {
                    // constructor already validates centering; poke gauges
                    let u = crate::rng::unit_direction(&mut rng, dim);
                    let p = body.boundary_ray(&u).unwrap();
                    assert!((body.gauge(&p) - 1.0).abs() < 1e-9);
                }
            }
        }
        assert_eq!(standard_suite(2, 1).len(), 6);
        assert_eq!(standard_suite(3, 1).len(), 6);
    }
}
