//! Exact volumes, cap volumes, slice areas and slice centroids for the
//! bodies that admit them (polytopes via hull triangulation, balls and
//! ellipsoids via closed forms). These are the oracles the property suites
//! compare Monte Carlo estimates and inequality margins against; callers
//! fall back to sampling when `None` comes back.

use crate::bodies::{unit_ball_volume, ConvexBody, HPolytope, Hyperplane, Representation};
use crate::hull::convex_hull;
use crate::macbeath::mac_as_hpoly;
use nalgebra::{DMatrix, DVector};

/// Exact volume of an H-polytope (bounded) by vertex enumeration and hull
/// triangulation; `None` when the region is empty or lower dimensional.
pub fn hpoly_volume(h: &HPolytope, dim: usize) -> Option<f64> {
    let verts = h.vertices(dim).ok()?;
    if verts.len() < dim + 1 {
        return if verts.is_empty() { Some(0.0) } else { None };
    }
    match convex_hull(&verts) {
        Ok(hull) => Some(hull.volume(&verts)),
        // degenerate: touches in a face only
        Err(_) => Some(0.0),
    }
}

/// Exact body volume where a closed form or triangulation exists.
pub fn body_volume(body: &ConvexBody) -> Option<f64> {
    let n = body.dim();
    match body.rep() {
        Representation::HPolytope(h) => hpoly_volume(h, n),
        Representation::VPolytope(v) => {
            let hull = convex_hull(&v.vertices).ok()?;
            Some(hull.volume(&v.vertices))
        }
        Representation::Ellipsoid(e) => {
            let det = e.shape.determinant();
            Some(unit_ball_volume(n) / det.sqrt())
        }
        Representation::LpBall(b) => {
            let r = b.radius;
            if b.p.is_infinite() {
                Some((2.0 * r).powi(n as i32))
            } else if (b.p - 1.0).abs() < 1e-12 {
                let fact: f64 = (1..=n).map(|k| k as f64).product();
                Some(2.0f64.powi(n as i32) * r.powi(n as i32) / fact)
            } else if (b.p - 2.0).abs() < 1e-12 {
                Some(unit_ball_volume(n) * r.powi(n as i32))
            } else {
                None
            }
        }
        Representation::Affine(a) => {
            let det = a.matrix.determinant().abs();
            Some(det * body_volume(&a.inner)?)
        }
        _ => None,
    }
}

/// n-volume of the spherical cap of the radius-`rad` ball beyond the plane
/// at signed distance `d` from the center (d may be negative).
pub fn ball_cap_volume(n: usize, rad: f64, d: f64) -> f64 {
    if d >= rad {
        return 0.0;
    }
    if d <= -rad {
        return unit_ball_volume(n) * rad.powi(n as i32);
    }
    let t = d / rad;
    let unit = match n {
        2 => t.acos() - t * (1.0 - t * t).sqrt(),
        3 => {
            let h = 1.0 - t;
            std::f64::consts::PI * h * h * (3.0 - h) / 3.0
        }
        _ => return f64::NAN,
    };
    unit * rad.powi(n as i32)
}

/// Cholesky factor L with `shape = L L^T`.
fn chol(shape: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    shape.clone().cholesky().map(|c| c.l())
}

/// Exact volume of the cap `{x in K : normal . x >= offset}`.
pub fn cap_volume(body: &ConvexBody, base: &Hyperplane) -> Option<f64> {
    let n = body.dim();
    if let Some(h) = body.as_hpolytope() {
        let clipped = h.clip(-base.normal().clone(), -base.offset());
        return hpoly_volume(&clipped, n);
    }
    if let Representation::Ellipsoid(e) = body.rep() {
        if n > 3 {
            return None;
        }
        // map to the unit ball: u = L^T (x - c); the plane normal maps to
        // L^{-1} normal with offset shifted by the center term
        let l = chol(&e.shape)?;
        let lt_inv = l.transpose().try_inverse()?;
        // x = c + (L^T)^{-1} u ; normal.x >= o  <=>  (L^{-1} normal).u >= o - normal.c
        let n_u = l.clone().try_inverse()? * base.normal();
        let o_u = base.offset() - base.normal().dot(&e.center);
        let d = o_u / n_u.norm();
        let det_scale = lt_inv.determinant().abs();
        return Some(det_scale * ball_cap_volume(n, 1.0, d));
    }
    None
}

/// Exact volume of the Macbeath region `M^scale(center)` of the body.
pub fn macbeath_volume(body: &ConvexBody, center: &DVector<f64>, scale: f64) -> Option<f64> {
    let n = body.dim();
    if let Some(h) = body.as_hpolytope() {
        let mac = mac_as_hpoly(&h, center, scale);
        return hpoly_volume(&mac, n);
    }
    if let Representation::Ellipsoid(e) = body.rep() {
        if n > 3 {
            return None;
        }
        // unit-ball picture: the region is the lens of two unit balls with
        // centers 0 and 2w, w = L^T (x - c); the lens is two caps at
        // distance |w| from each center
        let l = chol(&e.shape)?;
        let w = l.transpose() * (center - &e.center);
        let d = w.norm();
        if d >= 1.0 {
            return Some(0.0);
        }
        let lens = 2.0 * ball_cap_volume(n, 1.0, d);
        let det_scale = 1.0 / e.shape.determinant().sqrt();
        return Some(scale.powi(n as i32) * lens * det_scale);
    }
    None
}

/// `(n-1)`-measure of the slice `K cap {normal . x = offset}` and its
/// centroid.
pub fn slice_area_centroid(body: &ConvexBody, base: &Hyperplane) -> Option<(f64, DVector<f64>)> {
    let n = body.dim();
    let u = base.normal();
    let basis = crate::caps::orthonormal_complement(u);
    let origin_on_plane = u * base.offset();
    if let Some(h) = body.as_hpolytope() {
        // reduced (n-1)-dim H-polytope: A (x0 + V w) <= b
        let reduced = HPolytope::new(
            h.normals
                .iter()
                .map(|a| DVector::from_fn(n - 1, |j, _| a.dot(&basis[j])))
                .collect(),
            h.normals
                .iter()
                .zip(&h.offsets)
                .map(|(a, &b)| b - a.dot(&origin_on_plane))
                .collect(),
        );
        if n == 2 {
            // interval bounds on the line
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (a, &b) in reduced.normals.iter().zip(&reduced.offsets) {
                let coef = a[0];
                if coef.abs() < 1e-14 {
                    if b < 0.0 {
                        return Some((0.0, origin_on_plane));
                    }
                    continue;
                }
                let bound = b / coef;
                if coef > 0.0 {
                    hi = hi.min(bound);
                } else {
                    lo = lo.max(bound);
                }
            }
            if hi <= lo {
                return Some((0.0, origin_on_plane));
            }
            let mid = 0.5 * (lo + hi);
            return Some((hi - lo, &origin_on_plane + &basis[0] * mid));
        }
        let verts = reduced.vertices(n - 1).ok()?;
        if verts.len() < n {
            return Some((0.0, origin_on_plane));
        }
        let hull = convex_hull(&verts).ok()?;
        let area = hull.volume(&verts);
        let c_red = hull.centroid(&verts);
        let mut c = origin_on_plane.clone();
        for (j, b) in basis.iter().enumerate() {
            c += b * c_red[j];
        }
        return Some((area, c));
    }
    if let Representation::Ellipsoid(e) = body.rep() {
        // ellipsoidal slice: substitute x = x0 + V w into the quadratic
        let q = &e.shape;
        let x0 = &origin_on_plane - &e.center;
        let vqv = DMatrix::from_fn(n - 1, n - 1, |r, c| basis[r].dot(&(q * &basis[c])));
        let vqx = DVector::from_fn(n - 1, |j, _| basis[j].dot(&(q * &x0)));
        let inv = vqv.clone().try_inverse()?;
        let w_star = -(&inv * &vqx);
        let f_min = x0.dot(&(q * &x0)) + 2.0 * vqx.dot(&w_star) + w_star.dot(&(&vqv * &w_star));
        let rho2 = 1.0 - f_min;
        if rho2 <= 0.0 {
            return Some((0.0, origin_on_plane));
        }
        let area = unit_ball_volume(n - 1) * rho2.powf((n as f64 - 1.0) / 2.0)
            / vqv.determinant().sqrt();
        let mut c = origin_on_plane.clone() ;
        for (j, b) in basis.iter().enumerate() {
            c += b * w_star[j];
        }
        return Some((area, c));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::ConvexBody;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    #[test]
    fn volumes_of_standard_bodies() {
        let sq = ConvexBody::cube(2, 1.0).unwrap();
        assert!((body_volume(&sq).unwrap() - 4.0).abs() < 1e-9);
        let cube = ConvexBody::cube(3, 1.0).unwrap();
        assert!((body_volume(&cube).unwrap() - 8.0).abs() < 1e-9);
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        assert!((body_volume(&disk).unwrap() - std::f64::consts::PI).abs() < 1e-12);
        let l1 = ConvexBody::lp_ball(3, 1.0, 2.0).unwrap();
        assert!((body_volume(&l1).unwrap() - 8.0 * 8.0 / 6.0).abs() < 1e-9);
    }

    #[test]
    fn cap_volumes_against_closed_forms() {
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let plane = Hyperplane::new(dv(&[1.0, 0.0]), 0.5).unwrap();
        let v = cap_volume(&disk, &plane).unwrap();
        let want = (0.5f64).acos() - 0.5 * (0.75f64).sqrt();
        assert!((v - want).abs() < 1e-12);
        // square cap {x >= 0.5}: area 1 x 2 / 2 ... the strip [0.5,1]x[-1,1]
        let sq = ConvexBody::cube(2, 1.0).unwrap();
        let v = cap_volume(&sq, &plane).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        // ball cap in 3d
        let ball = ConvexBody::ball(3, 1.0).unwrap();
        let plane3 = Hyperplane::new(dv(&[0.0, 0.0, 1.0]), 0.25).unwrap();
        let v = cap_volume(&ball, &plane3).unwrap();
        let h: f64 = 0.75;
        let want = std::f64::consts::PI * h * h * (3.0 - h) / 3.0;
        assert!((v - want).abs() < 1e-12);
    }

    #[test]
    fn macbeath_volume_lens() {
        // disk, center (0.5, 0): lens of two unit disks at distance 1
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let v = macbeath_volume(&disk, &dv(&[0.5, 0.0]), 1.0).unwrap();
        let want = 2.0 * ball_cap_volume(2, 1.0, 0.5);
        assert!((v - want).abs() < 1e-12);
        // shrink scales area by lambda^2
        let v5 = macbeath_volume(&disk, &dv(&[0.5, 0.0]), 0.2).unwrap();
        assert!((v5 - want * 0.04).abs() < 1e-12);
        // square: M^1((0.5,0)) = [0,1]x[-1,1]
        let sq = ConvexBody::cube(2, 1.0).unwrap();
        let v = macbeath_volume(&sq, &dv(&[0.5, 0.0]), 1.0).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        // cross-check ellipsoid lens against Monte Carlo
        let ell = ConvexBody::ellipsoid(
            dv(&[0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.25, 0.1, 0.1, 1.0]),
            0.9,
            2.1,
        )
        .unwrap();
        let center = dv(&[0.8, 0.1]);
        let exact = macbeath_volume(&ell, &center, 0.5).unwrap();
        let mut rng = crate::rng::root(3);
        let region = crate::macbeath::MacbeathRegion::new(&ell, center.clone(), 0.5);
        let mut hits = 0usize;
        let trials = 200_000usize;
        let half = 2.2;
        for _ in 0..trials {
            let x = crate::rng::box_point(&mut rng, 2, half);
            if region.gauge_at(&x) <= 1.0 {
                hits += 1;
            }
        }
        let box_vol = (2.0 * half) * (2.0 * half);
        let mc = hits as f64 / trials as f64 * box_vol;
        let se = box_vol * ((hits as f64 / trials as f64) * (1.0 - hits as f64 / trials as f64) / trials as f64).sqrt();
        assert!((exact - mc).abs() < 4.0 * se, "exact {exact} mc {mc} se {se}");
    }

    #[test]
    fn slice_areas() {
        let sq = ConvexBody::cube(2, 1.0).unwrap();
        let plane = Hyperplane::new(dv(&[1.0, 0.0]), 0.5).unwrap();
        let (len, c) = slice_area_centroid(&sq, &plane).unwrap();
        assert!((len - 2.0).abs() < 1e-9);
        assert!((c - dv(&[0.5, 0.0])).norm() < 1e-9);
        let ball = ConvexBody::ball(3, 1.0).unwrap();
        let plane3 = Hyperplane::new(dv(&[0.0, 0.0, 1.0]), 0.6).unwrap();
        let (area, c) = slice_area_centroid(&ball, &plane3).unwrap();
        assert!((area - std::f64::consts::PI * 0.64).abs() < 1e-9);
        assert!((c - dv(&[0.0, 0.0, 0.6])).norm() < 1e-9);
        let cube = ConvexBody::cube(3, 1.0).unwrap();
        let diag = dv(&[1.0, 1.0, 1.0]).normalize();
        let pl = Hyperplane::new(diag.clone(), 1e-8).unwrap();
        let (area, _) = slice_area_centroid(&cube, &pl).unwrap();
        // regular hexagon with circumradius sqrt(2): area (3 sqrt(3)/2) R^2
        let hexagon = 1.5 * 3.0f64.sqrt() * 2.0;
        assert!((area - hexagon).abs() < 1e-6, "area {area} want {hexagon}");
    }
}
