//! Caps, widths, ray distances and the sampling primitives built on them.
//!
//! A cap is the part of a body beyond a hyperplane that avoids the origin.
//! Its relative width `dist(h1,h0)/dist(O,h0)` and the relative ray distance
//! `ray(p)` are the affine-invariant depth measures everything else is
//! phrased in: layering, representative caps, shell sampling.

use crate::bodies::{ConvexBody, Hyperplane, Real};
use crate::lp::{self, Constraint, LpOutcome};
use crate::{Error, Result};
use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A cap of `body` cut by `base` (h1), with its parallel supporting plane
/// (h0) and an apex on the far boundary.
#[derive(Debug, Clone)]
pub struct Cap<'a> {
    pub body: &'a ConvexBody,
    pub base: Hyperplane,
    pub support: Hyperplane,
    pub apex: DVector<f64>,
    pub absolute_width: f64,
    pub relative_width: f64,
}

/// Result of expanding a cap: either a proper cap or the whole body (the
/// translated base reached the origin or beyond).
#[derive(Debug, Clone)]
pub enum Expanded<'a> {
    Cap(Cap<'a>),
    FullBody,
}

impl<'a> Expanded<'a> {
    /// Containment for points of the ambient body (a full-body expansion
    /// contains all of them).
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        match self {
            Expanded::FullBody => true,
            Expanded::Cap(c) => c.contains(x),
        }
    }

    pub fn as_cap(&self) -> Option<&Cap<'a>> {
        match self {
            Expanded::Cap(c) => Some(c),
            Expanded::FullBody => None,
        }
    }
}

impl<'a> Cap<'a> {
    /// Point lies in the cap: in the body and on the far side of the base.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.body.contains_unchecked(x) && self.base.eval(x) >= -1e-12 * self.base.offset()
    }

    /// JSON certificate form `{normal, offset, abs_width, rel_width, apex}`.
    pub fn to_json(&self) -> CapJson {
        CapJson {
            normal: self.base.normal().iter().map(|&v| Real(v)).collect(),
            offset: Real(self.base.offset()),
            abs_width: Real(self.absolute_width),
            rel_width: Real(self.relative_width),
            apex: self.apex.iter().map(|&v| Real(v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapJson {
    pub normal: Vec<Real>,
    pub offset: Real,
    pub abs_width: Real,
    pub rel_width: Real,
    pub apex: Vec<Real>,
}

/// Cap cut from the body by a plane, on the side away from the origin.
pub fn cap_from_plane<'a>(body: &'a ConvexBody, plane: Hyperplane) -> Result<Cap<'a>> {
    let (value, support) = body.support(plane.normal())?;
    if plane.offset() >= value - 1e-12 * value.abs().max(1.0) {
        return Err(Error::EmptyCap {
            offset: plane.offset(),
            support: value,
        });
    }
    let apex = body.support_point(plane.normal())?;
    let absolute_width = value - plane.offset();
    Ok(Cap {
        body,
        base: plane,
        support,
        apex,
        absolute_width,
        relative_width: absolute_width / value,
    })
}

/// Relative ray distance of `p`: `1 - gauge(p)` inside, `1 - 1/gauge(p)`
/// outside (both along the ray through `p`).
pub fn ray_distance(body: &ConvexBody, p: &DVector<f64>) -> Result<f64> {
    if p.norm() < 1e-14 {
        return Err(Error::input("ray distance of the origin is undefined"));
    }
    let g = body.gauge(p);
    Ok(if g <= 1.0 { 1.0 - g } else { 1.0 - 1.0 / g })
}

/// The minimum-width cap containing an interior point `p`: cut at `p`
/// parallel to a supporting plane at the radial boundary point of `p`.
pub fn min_width_cap<'a>(body: &'a ConvexBody, p: &DVector<f64>) -> Result<Cap<'a>> {
    if p.norm() < 1e-14 {
        return Err(Error::input("min width cap needs p != O"));
    }
    let g = body.gauge(p);
    if g >= 1.0 {
        return Err(Error::input("min width cap needs an interior point"));
    }
    let (support_plane, _p0) = body.supporting_plane_at(p)?;
    let base = Hyperplane::new(support_plane.normal().clone(), support_plane.normal().dot(p))?;
    cap_from_plane(body, base)
}

/// Cap expansion: base translated toward the origin so the absolute width
/// scales by `lambda`. Crossing the origin flags the full body.
pub fn expand_cap<'a>(cap: &Cap<'a>, lambda: f64) -> Result<Expanded<'a>> {
    if lambda < 1.0 {
        return Err(Error::input("cap expansion needs lambda >= 1"));
    }
    let new_width = lambda * cap.absolute_width;
    let new_offset = cap.support.offset() - new_width;
    if new_offset <= 1e-12 * cap.support.offset() {
        return Ok(Expanded::FullBody);
    }
    let base = Hyperplane::new(cap.base.normal().clone(), new_offset)?;
    Ok(Expanded::Cap(cap_from_plane(cap.body, base)?))
}

/// The eps-representative cap of `z in K*`: scale the boundary point of
/// `K*` along `Oz` out to exterior ray distance eps; the polar hyperplane
/// of that point cuts the cap (its width is exactly eps).
#[derive(Debug, Clone)]
pub struct RepresentativeCap<'a> {
    pub cap: Cap<'a>,
    pub source_point: DVector<f64>,
    pub epsilon: f64,
}

pub fn representative_cap<'a>(
    body: &'a ConvexBody,
    polar_body: &ConvexBody,
    z: &DVector<f64>,
    eps: f64,
) -> Result<RepresentativeCap<'a>> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::input("representative cap needs 0 < eps < 1/2"));
    }
    if z.norm() < 1e-14 {
        return Err(Error::input("representative cap needs z != O"));
    }
    let boundary = polar_body.boundary_ray(z)?;
    let z_hat = boundary / (1.0 - eps);
    let plane = Hyperplane::new(z_hat.clone(), 1.0)?;
    let cap = cap_from_plane(body, plane)?;
    Ok(RepresentativeCap {
        cap,
        source_point: z.clone(),
        epsilon: eps,
    })
}

/// Point in the shell `K \ s K` via the two-stage scheme: a uniform point
/// of `K` fixes the ray, then the gauge is drawn uniformly on the segment
/// of that ray inside the shell.
pub(crate) fn shell_sample_scaled<R: Rng>(
    body: &ConvexBody,
    inner_scale: f64,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let p = body.uniform_sample(rng)?;
    let g = body.gauge(&p);
    let boundary = if g < 1e-12 {
        // measure-zero center hit: take a sphere direction instead
        let u = crate::rng::unit_direction(rng, body.dim());
        body.boundary_ray(&u)?
    } else {
        &p / g
    };
    let lo = inner_scale.clamp(0.0, 1.0);
    let t = rng.random_range(lo..=1.0);
    Ok(boundary * t)
}

/// Shell `Lambda_K(eps) = K \ (1 - 4 eps) K` sample.
pub fn shell_sample<R: Rng>(body: &ConvexBody, eps: f64, rng: &mut R) -> Result<DVector<f64>> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::input("shell sampling needs 0 < eps < 1/4"));
    }
    shell_sample_scaled(body, 1.0 - 4.0 * eps, rng)
}

/// Uniform point in a cap: rejection from the slab between base and
/// support planes crossed with the bounding box, hit-and-run fallback
/// seeded from the midpoint of the apex segment inside the cap.
pub fn cap_sample<R: Rng>(body: &ConvexBody, cap: &Cap<'_>, rng: &mut R) -> Result<DVector<f64>> {
    let n = body.dim();
    let u = cap.base.normal();
    let o1 = cap.base.offset();
    let o0 = cap.support.offset();
    let basis = orthonormal_complement(u);
    let half = body.outer_radius();
    let budget = body.oracle().rejection_budget;
    let mut accepted_any = false;
    for trial in 0..budget {
        let s = rng.random_range(o1..=o0);
        let mut x = u * s;
        for b in &basis {
            x += b * rng.random_range(-half..=half);
        }
        if body.contains_unchecked(&x) {
            accepted_any = true;
            if cap.base.eval(&x) >= 0.0 {
                return Ok(x);
            }
        }
        // after 2% of the budget without a single in-body hit the slab is
        // degenerate; bail to hit-and-run early
        if trial > budget / 50 && !accepted_any {
            break;
        }
    }
    // hit-and-run inside the cap
    let start = {
        let t = o1 / cap.support.normal().dot(&cap.apex);
        let entry = &cap.apex * t;
        (&entry + &cap.apex) * 0.5
    };
    if !cap.contains(&start) {
        return Err(Error::SamplingFailure {
            acceptance: 0.0,
            proposals: budget,
        });
    }
    let mut x = start;
    let steps = body.oracle().burn_in_factor * n * n;
    let inside = |y: &DVector<f64>| body.contains_unchecked(y) && cap.base.eval(y) >= 0.0;
    for _ in 0..steps {
        let dir = crate::rng::unit_direction(rng, n);
        let mut t_hi = 2.0 * body.outer_radius();
        let mut t_lo = -2.0 * body.outer_radius();
        // chord by bisection against the cap predicate
        let mut hi = t_hi;
        let mut lo = 0.0;
        if !inside(&(&x + &dir * hi)) {
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if inside(&(&x + &dir * mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            t_hi = lo;
        }
        let mut hi2 = t_lo;
        let mut lo2 = 0.0;
        if !inside(&(&x + &dir * hi2)) {
            for _ in 0..50 {
                let mid = 0.5 * (lo2 + hi2);
                if inside(&(&x + &dir * mid)) {
                    lo2 = mid;
                } else {
                    hi2 = mid;
                }
            }
            t_lo = lo2;
        }
        let t = rng.random_range(t_lo..=t_hi);
        x += &dir * (t * (1.0 - 1e-12));
    }
    Ok(x)
}

/// lambda-similarity: `c1 <= c2^lambda` and `c2 <= c1^lambda`. Exact LP
/// route for bodies with an H-form, sampled containment otherwise.
pub fn similar_caps<R: Rng>(
    c1: &Cap<'_>,
    c2: &Cap<'_>,
    lambda: f64,
    rng: &mut R,
) -> Result<bool> {
    Ok(cap_subset(c1, c2, lambda, rng)? && cap_subset(c2, c1, lambda, rng)?)
}

/// `inner <= outer^lambda`.
fn cap_subset<R: Rng>(
    inner: &Cap<'_>,
    outer: &Cap<'_>,
    lambda: f64,
    rng: &mut R,
) -> Result<bool> {
    let expanded = expand_cap(outer, lambda)?;
    let Expanded::Cap(exp) = expanded else {
        return Ok(true);
    };
    if let Some(h) = inner.body.as_hpolytope() {
        // min of the expanded base functional over the inner cap
        let cons = {
            let mut cons = h.constraints();
            cons.push(Constraint::new(
                -inner.base.normal().clone(),
                -inner.base.offset(),
            ));
            cons
        };
        return match lp::minimize(exp.base.normal(), &cons) {
            LpOutcome::Optimal { value, .. } => {
                Ok(value >= exp.base.offset() - 1e-9 * exp.base.offset().abs().max(1.0))
            }
            LpOutcome::Infeasible => Ok(true), // empty inner cap
            LpOutcome::Unbounded => Err(Error::input("unbounded cap")),
        };
    }
    for _ in 0..1_000 {
        let x = cap_sample(inner.body, inner, rng)?;
        if !exp.contains(&x) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Orthonormal basis of the complement of `u` (unit), by Gram-Schmidt over
/// the standard basis, deterministic.
pub(crate) fn orthonormal_complement(u: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = u.len();
    let mut basis: Vec<DVector<f64>> = vec![u.clone()];
    for j in 0..n {
        if basis.len() == n {
            break;
        }
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        for b in &basis {
            let proj = e.dot(b);
            e -= b * proj;
        }
        let len = e.norm();
        if len > 1e-9 {
            basis.push(e / len);
        }
    }
    basis.remove(0);
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn disk() -> ConvexBody {
        ConvexBody::ball(2, 1.0).unwrap()
    }

    fn square() -> ConvexBody {
        ConvexBody::cube(2, 1.0).unwrap()
    }

    #[test]
    fn cap_construction_examples() {
        let d = disk();
        let cap = cap_from_plane(&d, Hyperplane::new(dv(&[1.0, 0.0]), 0.6).unwrap()).unwrap();
        assert!((cap.absolute_width - 0.4).abs() < 1e-12);
        assert!((cap.relative_width - 0.4).abs() < 1e-12);

        let sq = square();
        let cap = cap_from_plane(&sq, Hyperplane::new(dv(&[1.0, 0.0]), 0.5).unwrap()).unwrap();
        assert!((cap.relative_width - 0.5).abs() < 1e-9);
        assert!((cap.apex[0] - 1.0).abs() < 1e-9);

        // ellipse x^2/4 + y^2 <= 1: support along x is 2
        let ellipse = ConvexBody::ellipsoid(
            dv(&[0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0]),
            1.0,
            2.0,
        )
        .unwrap();
        let cap = cap_from_plane(&ellipse, Hyperplane::new(dv(&[1.0, 0.0]), 1.0).unwrap()).unwrap();
        assert!((cap.relative_width - 0.5).abs() < 1e-12);

        // plane missing the body
        let miss = cap_from_plane(&d, Hyperplane::new(dv(&[1.0, 0.0]), 1.5).unwrap());
        assert!(matches!(miss, Err(Error::EmptyCap { .. })));
    }

    #[test]
    fn ray_distance_examples() {
        let d = disk();
        assert!((ray_distance(&d, &dv(&[0.5, 0.0])).unwrap() - 0.5).abs() < 1e-12);
        assert!((ray_distance(&d, &dv(&[2.0, 0.0])).unwrap() - 0.5).abs() < 1e-12);
        let sq = square();
        assert!((ray_distance(&sq, &dv(&[0.75, 0.75])).unwrap() - 0.25).abs() < 1e-12);
        assert!(ray_distance(&d, &dv(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn min_width_cap_examples() {
        let d = disk();
        let cap = min_width_cap(&d, &dv(&[0.5, 0.0])).unwrap();
        assert!((cap.relative_width - 0.5).abs() < 1e-9);
        assert!((cap.base.offset() - 0.5).abs() < 1e-9);
        let sq = square();
        let cap = min_width_cap(&sq, &dv(&[0.0, 0.9])).unwrap();
        assert!((cap.relative_width - 0.1).abs() < 1e-9);
        assert!((cap.base.normal() - dv(&[0.0, 1.0])).norm() < 1e-9);
        // smooth ellipse: two code paths agree
        let ellipse = ConvexBody::ellipsoid(
            dv(&[0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0]),
            1.0,
            2.0,
        )
        .unwrap();
        let mut rng = crate::rng::root(3);
        for _ in 0..50 {
            let p = ellipse.uniform_sample(&mut rng).unwrap();
            if p.norm() < 1e-6 {
                continue;
            }
            let cap = min_width_cap(&ellipse, &p).unwrap();
            let ray = ray_distance(&ellipse, &p).unwrap();
            assert!(
                (cap.relative_width - ray).abs() < 1e-9,
                "width {} vs ray {}",
                cap.relative_width,
                ray
            );
        }
    }

    #[test]
    fn expansion_examples() {
        let d = disk();
        let cap = cap_from_plane(&d, Hyperplane::new(dv(&[1.0, 0.0]), 0.8).unwrap()).unwrap();
        match expand_cap(&cap, 2.0).unwrap() {
            Expanded::Cap(c) => assert!((c.absolute_width - 0.4).abs() < 1e-12),
            Expanded::FullBody => panic!("should stay proper"),
        }
        match expand_cap(&cap, 1.0).unwrap() {
            Expanded::Cap(c) => {
                assert!((c.base.offset() - cap.base.offset()).abs() < 1e-12);
                assert!((c.absolute_width - cap.absolute_width).abs() < 1e-12);
            }
            Expanded::FullBody => panic!(),
        }
        let wide = cap_from_plane(&d, Hyperplane::new(dv(&[1.0, 0.0]), 0.4).unwrap()).unwrap();
        assert!((wide.relative_width - 0.6).abs() < 1e-12);
        assert!(matches!(expand_cap(&wide, 2.0).unwrap(), Expanded::FullBody));
    }

    #[test]
    fn representative_cap_examples() {
        // self-dual unit disk: z = (0.5, 0), eps = 0.1 -> cap at x = 0.9
        let d = disk();
        let dpolar = d.polar().unwrap();
        let rep = representative_cap(&d, &dpolar, &dv(&[0.5, 0.0]), 0.1).unwrap();
        assert!((rep.cap.base.offset() - 0.9).abs() < 1e-9);
        assert!((rep.cap.relative_width - 0.1).abs() < 1e-9);

        // square with diamond polar: axis-aligned z gives an axis cap
        let sq = square();
        let sq_polar = sq.polar().unwrap();
        let rep = representative_cap(&sq, &sq_polar, &dv(&[0.4, 0.0]), 0.1).unwrap();
        assert!((rep.cap.relative_width - 0.1).abs() < 1e-6);
        assert!((rep.cap.base.normal() - dv(&[1.0, 0.0])).norm() < 1e-9);

        // invariant sweep: width equals eps across random bodies and rays
        let mut rng = crate::rng::root(17);
        use rand::Rng as _;
        for trial in 0..100 {
            let body = if trial % 2 == 0 {
                square()
            } else {
                ConvexBody::ball(2, 1.0).unwrap()
            };
            let polar = body.polar().unwrap();
            let z = crate::rng::unit_direction(&mut rng, 2) * rng.random_range(0.05..0.9);
            let eps = rng.random_range(0.01..0.2);
            let rep = representative_cap(&body, &polar, &z, eps).unwrap();
            assert!(
                (rep.cap.relative_width / eps - 1.0).abs() < 1e-6,
                "width {} eps {}",
                rep.cap.relative_width,
                eps
            );
        }
    }

    #[test]
    fn shell_sampling() {
        let d = disk();
        let mut rng = crate::rng::root(23);
        let mut angles = [0usize; 8];
        for _ in 0..10_000 {
            let x = shell_sample(&d, 0.1, &mut rng).unwrap();
            let g = d.gauge(&x);
            assert!((0.6 - 1e-9..=1.0 + 1e-9).contains(&g), "gauge {g}");
            let a = x[1].atan2(x[0]);
            let bin = (((a + std::f64::consts::PI) / (2.0 * std::f64::consts::PI) * 8.0) as usize).min(7);
            angles[bin] += 1;
        }
        // chi-square uniformity over 8 angular bins, 7 dof: reject only
        // beyond the 0.999 quantile (24.32)
        let expected = 10_000.0 / 8.0;
        let chi2: f64 = angles.iter().map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        }).sum();
        assert!(chi2 < 24.32, "chi2 {chi2}: {angles:?}");

        let sq = square();
        for _ in 0..1_000 {
            let x = shell_sample(&sq, 0.05, &mut rng).unwrap();
            let g = sq.gauge(&x);
            assert!((0.8 - 1e-9..=1.0 + 1e-9).contains(&g));
        }
        assert!(shell_sample(&d, 0.3, &mut rng).is_err());
    }

    #[test]
    fn cap_sampling() {
        let d = disk();
        let mut rng = crate::rng::root(29);
        let cap = cap_from_plane(&d, Hyperplane::new(dv(&[1.0, 0.0]), 0.5).unwrap()).unwrap();
        for _ in 0..2_000 {
            let x = cap_sample(&d, &cap, &mut rng).unwrap();
            assert!(d.contains_unchecked(&x));
            assert!(x[0] >= 0.5 - 1e-9);
        }
        // square cap {x >= 0}: mean of the x coordinate is 1/2
        let sq = square();
        let cap = cap_from_plane(&sq, Hyperplane::new(dv(&[1.0, 0.0]), 1e-9).unwrap()).unwrap();
        let mut mean = 0.0;
        let n = 10_000;
        for _ in 0..n {
            mean += cap_sample(&sq, &cap, &mut rng).unwrap()[0];
        }
        mean /= n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
        // thin cap stress: stays feasible
        let thin = cap_from_plane(&d, Hyperplane::new(dv(&[0.0, 1.0]), 0.99).unwrap()).unwrap();
        for _ in 0..100 {
            let x = cap_sample(&d, &thin, &mut rng).unwrap();
            assert!(thin.contains(&x));
        }
    }

    #[test]
    fn similarity_cases() {
        let sq = square();
        let mut rng = crate::rng::root(31);
        let c1 = cap_from_plane(&sq, Hyperplane::new(dv(&[1.0, 0.0]), 0.9).unwrap()).unwrap();
        assert!(similar_caps(&c1, &c1, 1.0, &mut rng).unwrap());
        let c2 = cap_from_plane(&sq, Hyperplane::new(dv(&[1.0, 0.0]), 0.8).unwrap()).unwrap();
        assert!(similar_caps(&c1, &c2, 2.0, &mut rng).unwrap());
        // orthogonal thin caps: (0.95, 0) is in one and far from the other
        let c3 = cap_from_plane(&sq, Hyperplane::new(dv(&[0.0, 1.0]), 0.9).unwrap()).unwrap();
        assert!(!similar_caps(&c1, &c3, 1.0, &mut rng).unwrap());
    }

    #[test]
    fn cap_json_round_trip() {
        let sq = square();
        let cap = cap_from_plane(&sq, Hyperplane::new(dv(&[1.0, 0.0]), 0.25).unwrap()).unwrap();
        let text = serde_json::to_string(&cap.to_json()).unwrap();
        let back: CapJson = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert!((back.rel_width.0 - 0.75).abs() < 1e-12);
        assert!((back.apex[0].0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn complement_is_orthonormal() {
        let u = dv(&[0.6, 0.8, 0.0]).normalize();
        let basis = orthonormal_complement(&u);
        assert_eq!(basis.len(), 2);
        for b in &basis {
            assert!((b.norm() - 1.0).abs() < 1e-12);
            assert!(b.dot(&u).abs() < 1e-12);
        }
        assert!(basis[0].dot(&basis[1]).abs() < 1e-12);
    }
}
