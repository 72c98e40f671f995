//! Runnable property suites over the cap / Macbeath-region toolkit.
//!
//! Each suite draws trials over the standard body pool (cube, ball,
//! ellipsoid, l1 ball, random polytopes in both representations; n = 2 and
//! 3) and checks an inequality exactly where the pool admits exact volumes
//! and LP predicates, falling back to dense sampled containment otherwise.
//! A report carries the violation count and the worst observed margin;
//! calibrated constants are frozen from a one-off brute-force run and noted
//! on the report.

use crate::bodies::{ConvexBody, Hyperplane};
use crate::caps::{
    cap_from_plane, cap_sample, expand_cap, min_width_cap, ray_distance, representative_cap,
    shell_sample, similar_caps, Cap, Expanded,
};
use crate::exactvol::{body_volume, cap_volume, macbeath_volume, slice_area_centroid};
use crate::lp::{self, LpOutcome};
use crate::macbeath::{build_mnet, mac_as_hpoly, mac_disjoint, MacbeathRegion};
use crate::{Error, Result};
use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Frozen calibration constants (single brute-force run, then halved for
/// margin). Pool: cube, ball, ellipsoid, l1 ball, random polytopes; n <= 3.
pub mod calibrated {
    /// Minimum relative volume of `M(p)` at the base centroid of a
    /// width-1/3 cap (observed 0.0288 over the pool).
    pub const WIDE_CAP_REGION_VOL: f64 = 0.014;
    /// `vol(K) vol(K*) >= kappa * omega_n^2`, n = 2 (observed 0.808).
    pub const MAHLER_BODY_2D: f64 = 0.40;
    /// Same at n = 3 (observed 0.608).
    pub const MAHLER_BODY_3D: f64 = 0.30;
    /// `vol_K(C) vol_K*(D) >= kappa eps^3` for width-eps cap pairs, n = 2
    /// (observed 0.218, stable across eps in [0.025, 0.1]).
    pub const CAP_PRODUCT_2D: f64 = 0.10;
    /// `vol_K(C) vol_K*(M^{1/5}(x)) >= kappa eps^3`, n = 2 (observed 0.0109).
    pub const REGION_PRODUCT_2D: f64 = 0.005;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaReport {
    pub name: String,
    pub trials: usize,
    pub skipped: usize,
    pub violations: usize,
    /// Smallest slack seen across trials (negative means a violation of
    /// that magnitude).
    pub worst_margin: f64,
    pub pass: bool,
    pub note: String,
}

enum Trial {
    /// Slack of the inequality (>= 0 means it held).
    Margin(f64),
    Skip,
}

fn run<F>(name: &str, trials: usize, seed: u64, note: &str, mut f: F) -> LemmaReport
where
    F: FnMut(&mut ChaCha8Rng, usize) -> Result<Trial>,
{
    let mut violations = 0usize;
    let mut skipped = 0usize;
    let mut worst = f64::INFINITY;
    for t in 0..trials {
        let mut rng = crate::rng::derive(seed, &[hash_name(name), t as u64]);
        match f(&mut rng, t) {
            Ok(Trial::Margin(m)) => {
                worst = worst.min(m);
                if m < 0.0 {
                    violations += 1;
                }
            }
            Ok(Trial::Skip) => skipped += 1,
            Err(_) => skipped += 1,
        }
    }
    LemmaReport {
        name: name.to_string(),
        trials,
        skipped,
        violations,
        worst_margin: if worst.is_finite() { worst } else { 0.0 },
        pass: violations == 0,
        note: note.to_string(),
    }
}

fn hash_name(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x1000_0000_01b3)
    })
}

/// Pool shared by the suites: all six standard bodies at n = 2 and n = 3.
fn pool(seed: u64) -> Vec<(String, ConvexBody)> {
    let mut bodies = Vec::new();
    for dim in [2usize, 3] {
        for (name, body) in crate::bodygen::standard_suite(dim, seed) {
            bodies.push((format!("{name}-{dim}d"), body));
        }
    }
    bodies
}

fn pool_2d(seed: u64) -> Vec<(String, ConvexBody)> {
    crate::bodygen::standard_suite(2, seed)
}

/// Random proper cap of relative width in `[w_lo, w_hi]`.
fn random_cap<'a, R: Rng>(
    body: &'a ConvexBody,
    rng: &mut R,
    w_lo: f64,
    w_hi: f64,
) -> Result<(Cap<'a>, f64)> {
    let u = crate::rng::unit_direction(rng, body.dim());
    let w = rng.random_range(w_lo..=w_hi);
    let (value, _) = body.support(&u)?;
    let plane = Hyperplane::new(u, (1.0 - w) * value)?;
    let cap = cap_from_plane(body, plane)?;
    Ok((cap, w))
}

/// `inner region <= cap` for an H-form body: LP minimum of the cap base
/// functional over the region; sampled containment otherwise.
fn region_in_cap<R: Rng>(
    region: &MacbeathRegion<'_>,
    cap: &Cap<'_>,
    clip_to_body: bool,
    rng: &mut R,
) -> Result<f64> {
    if let (Some(h), Some(mac)) = (region.body.as_hpolytope(), region.as_hpoly()) {
        let mut cons = mac.constraints();
        if clip_to_body {
            cons.extend(h.constraints());
        }
        return match lp::minimize(cap.base.normal(), &cons) {
            LpOutcome::Optimal { value, .. } => Ok(value - cap.base.offset()),
            LpOutcome::Infeasible => Ok(0.0),
            LpOutcome::Unbounded => Err(Error::input("unbounded region in cap check")),
        };
    }
    let mut worst = f64::INFINITY;
    for _ in 0..400 {
        let y = region.sample(rng)?;
        if clip_to_body && !region.body.contains_unchecked(&y) {
            continue;
        }
        worst = worst.min(cap.base.eval(&y) + 1e-7);
        // body membership of the region holds by construction
    }
    Ok(if worst.is_finite() { worst } else { 0.0 })
}

// ---------------------------------------------------------------------------
// caps suite
// ---------------------------------------------------------------------------

pub fn caps_suite(trials: usize, seed: u64) -> Vec<LemmaReport> {
    let bodies = pool(seed);
    let mut reports = Vec::new();

    reports.push(run(
        "difference-body volume at most 4^n of the body",
        trials,
        seed,
        "exact hull volumes over random V-polytopes",
        |rng, t| {
            let dim = if t % 2 == 0 { 2 } else { 3 };
            let body = crate::bodygen::random_vpolytope(rng, dim, 3 * dim)?;
            let diff = body.difference_body()?;
            let v = body_volume(&body).ok_or_else(|| Error::input("no volume"))?;
            let vd = body_volume(&diff).ok_or_else(|| Error::input("no volume"))?;
            Ok(Trial::Margin(4.0f64.powi(dim as i32) * v - vd))
        },
    ));

    reports.push(run(
        "points of a cap have ray distance at most the cap width",
        trials,
        seed,
        "exact gauge evaluation, sampled cap points",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let (cap, w) = random_cap(body, rng, 0.05, 0.9)?;
            let p = cap_sample(body, &cap, rng)?;
            let ray = ray_distance(body, &p)?;
            Ok(Trial::Margin(w - ray + 1e-9))
        },
    ));

    reports.push(run(
        "minimum-width cap attains the ray distance and is minimal",
        trials,
        seed,
        "exact two-route widths, 100 competitor caps per trial",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let p = body.uniform_sample(rng)?;
            if p.norm() < 1e-3 || body.gauge(&p) > 1.0 - 1e-6 {
                return Ok(Trial::Skip);
            }
            let cap = min_width_cap(body, &p)?;
            let ray = ray_distance(body, &p)?;
            let eq = (cap.relative_width - ray).abs();
            if eq > 1e-9 {
                return Ok(Trial::Margin(-eq));
            }
            let mut margin = f64::INFINITY;
            for _ in 0..100 {
                let u = crate::rng::unit_direction(rng, body.dim());
                let along = u.dot(&p);
                if along <= 1e-9 {
                    continue;
                }
                let (value, _) = body.support(&u)?;
                let width = (value - along) / value;
                margin = margin.min(width - cap.relative_width + 1e-9);
            }
            Ok(Trial::Margin(if margin.is_finite() { margin } else { 0.0 }))
        },
    ));

    reports.push(run(
        "cap volume between the cone and slab bounds",
        trials,
        seed,
        "exact volumes and base areas for 1/2-shallow caps",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let n = body.dim();
            let (cap, _) = random_cap(body, rng, 0.02, 0.5)?;
            let Some(vol) = cap_volume(body, &cap.base) else {
                return Ok(Trial::Skip);
            };
            let Some((area, _)) = slice_area_centroid(body, &cap.base) else {
                return Ok(Trial::Skip);
            };
            let w = cap.absolute_width;
            let lower = area * w / n as f64;
            let upper = 2.0f64.powi(n as i32 - 1) * area * w;
            let tol = 1e-9 * upper.max(1.0);
            Ok(Trial::Margin((vol - lower + tol).min(upper - vol + tol)))
        },
    ));

    reports.push(run(
        "cap expansion grows volume at most lambda^n",
        trials,
        seed,
        "exact volumes, lambda in {2, 4}",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let n = body.dim();
            let (cap, _) = random_cap(body, rng, 0.02, 0.23)?;
            let lambda = if t % 2 == 0 { 2.0 } else { 4.0 };
            let Expanded::Cap(exp) = expand_cap(&cap, lambda)? else {
                return Ok(Trial::Skip);
            };
            let Some(v) = cap_volume(body, &cap.base) else {
                return Ok(Trial::Skip);
            };
            let Some(ve) = cap_volume(body, &exp.base) else {
                return Ok(Trial::Skip);
            };
            let bound = lambda.powi(n as i32) * v;
            Ok(Trial::Margin(bound - ve + 1e-9 * bound.max(1.0)))
        },
    ));

    reports.push(run(
        "cap containment is preserved by expansion",
        trials,
        seed,
        "exact LP filter and check on H-form bodies",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let Some(h) = body.as_hpolytope() else {
                return Ok(Trial::Skip);
            };
            // nested pair: a wide cap and a thin cap with a nearby normal
            // (parallel on even trials, which nest unconditionally)
            let (c2, _) = random_cap(body, rng, 0.2, 0.4)?;
            let u1 = if t % 2 == 0 {
                c2.base.normal().clone()
            } else {
                let jitter = crate::rng::unit_direction(rng, body.dim()) * 0.05;
                (c2.base.normal() + jitter).normalize()
            };
            let w1 = rng.random_range(0.01..0.05);
            let (value1, _) = body.support(&u1)?;
            let c1 = cap_from_plane(body, Hyperplane::new(u1, (1.0 - w1) * value1)?)?;
            // filter: c1 inside c2 (min of c2's base functional over c1)
            let mut cons = h.constraints();
            cons.push(crate::lp::Constraint::new(
                -c1.base.normal().clone(),
                -c1.base.offset(),
            ));
            let inside = match lp::minimize(c2.base.normal(), &cons) {
                LpOutcome::Optimal { value, .. } => value >= c2.base.offset() - 1e-12,
                _ => false,
            };
            if !inside {
                return Ok(Trial::Skip);
            }
            let Expanded::Cap(e1) = expand_cap(&c1, 2.0)? else {
                return Ok(Trial::Skip);
            };
            let e2 = expand_cap(&c2, 2.0)?;
            let Expanded::Cap(e2) = e2 else {
                return Ok(Trial::Margin(0.0)); // full body contains anything
            };
            let mut cons = h.constraints();
            cons.push(crate::lp::Constraint::new(
                -e1.base.normal().clone(),
                -e1.base.offset(),
            ));
            match lp::minimize(e2.base.normal(), &cons) {
                LpOutcome::Optimal { value, .. } => {
                    Ok(Trial::Margin(value - e2.base.offset() + 1e-9))
                }
                LpOutcome::Infeasible => Ok(Trial::Margin(0.0)),
                _ => Ok(Trial::Skip),
            }
        },
    ));

    reports.push(run(
        "representative caps of points in one shrunken region are 8-similar",
        trials,
        seed,
        "eps in {1/32, 1/64}; exact LP containment on H-form bodies",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let polar = body.polar()?;
            let eps = if t % 2 == 0 { 1.0 / 32.0 } else { 1.0 / 64.0 };
            let u = crate::rng::unit_direction(rng, body.dim());
            let ray_y = rng.random_range(0.0..eps);
            let y = polar.boundary_ray(&u)? * (1.0 - ray_y);
            let region = MacbeathRegion::new(&polar, y, 0.2);
            let x = region.sample(rng)?;
            let z = region.sample(rng)?;
            if x.norm() < 1e-9 || z.norm() < 1e-9 {
                return Ok(Trial::Skip);
            }
            let rx = representative_cap(body, &polar, &x, eps)?;
            let rz = representative_cap(body, &polar, &z, eps)?;
            let ok = similar_caps(&rx.cap, &rz.cap, 8.0, rng)?;
            Ok(Trial::Margin(if ok { 1.0 } else { -1.0 }))
        },
    ));

    reports.push(run(
        "a width-matched cap over the region is 16-similar to representatives",
        trials,
        seed,
        "cap width in [eps/2, 2eps] along a ray through the region",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let polar = body.polar()?;
            let eps = if t % 2 == 0 { 1.0 / 32.0 } else { 1.0 / 64.0 };
            let u = crate::rng::unit_direction(rng, body.dim());
            let ray_y = rng.random_range(0.0..eps);
            let y = polar.boundary_ray(&u)? * (1.0 - ray_y);
            let region = MacbeathRegion::new(&polar, y, 0.2);
            let through = region.sample(rng)?;
            if through.norm() < 1e-9 {
                return Ok(Trial::Skip);
            }
            let dir = through.normalize();
            let w = rng.random_range(eps / 2.0..2.0 * eps);
            let (value, _) = body.support(&dir)?;
            let cx = cap_from_plane(body, Hyperplane::new(dir, (1.0 - w) * value)?)?;
            let z = region.sample(rng)?;
            if z.norm() < 1e-9 {
                return Ok(Trial::Skip);
            }
            let cz = representative_cap(body, &polar, &z, eps)?;
            let ok = similar_caps(&cx, &cz.cap, 16.0, rng)?;
            Ok(Trial::Margin(if ok { 1.0 } else { -1.0 }))
        },
    ));

    reports
}

// ---------------------------------------------------------------------------
// macbeath suite
// ---------------------------------------------------------------------------

pub fn macbeath_suite(trials: usize, seed: u64) -> Vec<LemmaReport> {
    let bodies = pool(seed);
    let mut reports = Vec::new();

    reports.push(run(
        "regions are centrally symmetric about their center",
        trials,
        seed,
        "sampled points, exact mirrored membership",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let x = body.uniform_sample(rng)?;
            if body.gauge(&x) > 1.0 - 1e-6 {
                return Ok(Trial::Skip);
            }
            let lambda = rng.random_range(0.1..1.0);
            let region = MacbeathRegion::new(body, x.clone(), lambda);
            let y = region.sample(rng)?;
            let mirror = &x * 2.0 - &y;
            Ok(Trial::Margin(1.0 + 1e-9 - region.gauge_at(&mirror)))
        },
    ));

    reports.push(run(
        "overlapping shrunken regions nest after a 4x expansion",
        trials,
        seed,
        "lambda <= 1/5; exact LP containment on H-form ambients",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let x = body.uniform_sample(rng)?;
            if body.gauge(&x) > 1.0 - 1e-6 {
                return Ok(Trial::Skip);
            }
            let lambda = rng.random_range(0.05..0.2);
            let rx = MacbeathRegion::new(body, x.clone(), lambda);
            let y = rx.sample(rng)?; // y in M^l(x) so the regions overlap
            if body.gauge(&y) >= 1.0 {
                return Ok(Trial::Skip);
            }
            let ry = MacbeathRegion::new(body, y, lambda);
            let outer = MacbeathRegion::new(body, x, 4.0 * lambda);
            let ok = crate::macbeath::mac_contains(&outer, &ry, rng)?;
            Ok(Trial::Margin(if ok { 1.0 } else { -1.0 }))
        },
    ));

    reports.push(run(
        "a shrunken region meeting a cap fits in the doubled cap",
        trials,
        seed,
        "x sampled inside the cap; exact LP route on H-form ambients",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let (cap, _) = random_cap(body, rng, 0.05, 0.45)?;
            let x = cap_sample(body, &cap, rng)?;
            let Expanded::Cap(doubled) = expand_cap(&cap, 2.0)? else {
                return Ok(Trial::Margin(0.0));
            };
            let region = MacbeathRegion::new(body, x, 0.2);
            let margin = region_in_cap(&region, &doubled, false, rng)?;
            Ok(Trial::Margin(margin))
        },
    ));

    reports.push(run(
        "any-scale region clipped to the body fits the grown cap",
        trials,
        seed,
        "lambda in {1/2, 1}",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let (cap, _) = random_cap(body, rng, 0.05, 0.45)?;
            let x = cap_sample(body, &cap, rng)?;
            let lambda = if t % 2 == 0 { 0.5 } else { 1.0 };
            let Expanded::Cap(grown) = expand_cap(&cap, 1.0 + lambda)? else {
                return Ok(Trial::Margin(0.0));
            };
            let region = MacbeathRegion::new(body, x, lambda);
            let margin = region_in_cap(&region, &grown, true, rng)?;
            Ok(Trial::Margin(margin))
        },
    ));

    reports.push(run(
        "points of a shrunken region have comparable ray distances",
        trials,
        seed,
        "1/2-shallow centers, factor-2 comparability",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let u = crate::rng::unit_direction(rng, body.dim());
            let depth = rng.random_range(0.01..0.5);
            let x = body.boundary_ray(&u)? * (1.0 - depth);
            let region = MacbeathRegion::new(body, x.clone(), 0.2);
            let y = region.sample(rng)?;
            let rx = ray_distance(body, &x)?;
            let ry = ray_distance(body, &y)?;
            let m1 = 2.0 * rx - ry + 1e-9;
            let m2 = ry - rx / 2.0 + 1e-9;
            Ok(Trial::Margin(m1.min(m2)))
        },
    ));

    reports.push(run(
        "a shallow cap sits inside the 2n-expanded region of its base centroid",
        trials,
        seed,
        "1/3-shallow caps, 200 sampled containment points",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let n = body.dim();
            let (cap, _) = random_cap(body, rng, 0.05, 1.0 / 3.0)?;
            let Some((area, centroid)) = slice_area_centroid(body, &cap.base) else {
                return Ok(Trial::Skip);
            };
            if area <= 0.0 {
                return Ok(Trial::Skip);
            }
            let region = MacbeathRegion::new(body, centroid, 2.0 * n as f64);
            let mut margin = f64::INFINITY;
            for _ in 0..200 {
                let p = cap_sample(body, &cap, rng)?;
                margin = margin.min(1.0 + 1e-7 - region.gauge_at(&p));
            }
            Ok(Trial::Margin(margin))
        },
    ));

    reports.push(run(
        "the base-centroid region volume at most doubles the cap volume",
        trials,
        seed,
        "exact volumes; lower ratio recorded in the margin note",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let (cap, _) = random_cap(body, rng, 0.02, 1.0 / 3.0)?;
            let Some((_, centroid)) = slice_area_centroid(body, &cap.base) else {
                return Ok(Trial::Skip);
            };
            let Some(vc) = cap_volume(body, &cap.base) else {
                return Ok(Trial::Skip);
            };
            let Some(vm) = macbeath_volume(body, &centroid, 1.0) else {
                return Ok(Trial::Skip);
            };
            Ok(Trial::Margin(2.0 * vc - vm + 1e-9 * vc.max(1e-12)))
        },
    ));

    reports.push(run(
        "wide-cap base centroids carry constant relative region volume",
        trials,
        seed,
        "width-1/3 caps against the frozen calibration constant",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let (cap, _) = random_cap(body, rng, 1.0 / 3.0, 1.0 / 3.0)?;
            let Some((_, centroid)) = slice_area_centroid(body, &cap.base) else {
                return Ok(Trial::Skip);
            };
            let Some(vm) = macbeath_volume(body, &centroid, 1.0) else {
                return Ok(Trial::Skip);
            };
            let Some(vk) = body_volume(body) else {
                return Ok(Trial::Skip);
            };
            Ok(Trial::Margin(vm / vk - calibrated::WIDE_CAP_REGION_VOL))
        },
    ));

    reports.push(run(
        "greedy nets pack disjointly and buffer inside the ambient body",
        trials / 10,
        seed,
        "shell-sampled candidate streams, c = 2",
        |rng, t| {
            let (_, body) = &bodies[t % bodies.len()];
            let ambient = body.scale(1.1);
            let candidates: Vec<DVector<f64>> = (0..120)
                .map(|_| shell_sample(&ambient, 0.05, rng))
                .collect::<Result<_>>()?;
            let (net, _) = build_mnet(&ambient, candidates, 2.0)?;
            let ps = net.packing_scale();
            for i in 0..net.centers.len() {
                for j in (i + 1)..net.centers.len() {
                    let a = MacbeathRegion::new(&ambient, net.centers[i].clone(), ps);
                    let b = MacbeathRegion::new(&ambient, net.centers[j].clone(), ps);
                    if !mac_disjoint(&a, &b) {
                        return Ok(Trial::Margin(-1.0));
                    }
                }
            }
            // buffering: the full region M^1 of every center stays inside
            for x in &net.centers {
                if let Some(h) = ambient.as_hpolytope() {
                    let mac = mac_as_hpoly(&h, x, 1.0);
                    let cons = mac.constraints();
                    for (a, &b) in h.normals.iter().zip(&h.offsets) {
                        if let LpOutcome::Optimal { value, .. } = lp::maximize(a, &cons) {
                            if value > b + 1e-9 * b.abs().max(1.0) {
                                return Ok(Trial::Margin(b - value));
                            }
                        }
                    }
                } else {
                    let region = MacbeathRegion::new(&ambient, x.clone(), 1.0);
                    for _ in 0..64 {
                        let u = crate::rng::unit_direction(rng, ambient.dim());
                        let g = ambient.gauge_from(x, &u);
                        if g <= 1e-300 {
                            continue;
                        }
                        let boundary = x + &u * ((1.0 - 1e-9) / g);
                        let _ = &region;
                        let amb = ambient.gauge(&boundary);
                        if amb > 1.0 + 1e-9 {
                            return Ok(Trial::Margin(1.0 - amb));
                        }
                    }
                }
            }
            Ok(Trial::Margin(1.0))
        },
    ));

    reports
}

// ---------------------------------------------------------------------------
// mahler suite
// ---------------------------------------------------------------------------

/// Minimum of `vol_K(C) vol_K*(D) / eps^{n+1}` over random directions at a
/// fixed eps; used by the suite and by the acceptance stability check.
pub fn cap_product_minimum(trials: usize, seed: u64, eps: f64) -> Result<f64> {
    let bodies = pool_2d(seed);
    let mut min_ratio = f64::INFINITY;
    for t in 0..trials {
        let mut rng = crate::rng::derive(seed, &[0x6d70, t as u64, (eps * 1e6) as u64]);
        let (_, body) = &bodies[t % bodies.len()];
        let polar = body.polar()?;
        let u = crate::rng::unit_direction(&mut rng, 2);
        let (value, _) = body.support(&u)?;
        let c = cap_from_plane(body, Hyperplane::new(u.clone(), (1.0 - eps) * value)?)?;
        let anchor = polar.boundary_ray(&u)? * (1.0 - eps);
        let d = min_width_cap(&polar, &anchor)?;
        let (Some(vc), Some(vk)) = (cap_volume(body, &c.base), body_volume(body)) else {
            continue;
        };
        let (Some(vd), Some(vp)) = (cap_volume(&polar, &d.base), body_volume(&polar)) else {
            continue;
        };
        let ratio = (vc / vk) * (vd / vp) / eps.powi(3);
        min_ratio = min_ratio.min(ratio);
    }
    Ok(min_ratio)
}

/// Minimum of `vol_K(C) vol_K*(M^{1/5}(x)) / eps^{n+1}` at a fixed eps.
pub fn region_product_minimum(trials: usize, seed: u64, eps: f64) -> Result<f64> {
    let bodies = pool_2d(seed);
    let mut min_ratio = f64::INFINITY;
    for t in 0..trials {
        let mut rng = crate::rng::derive(seed, &[0x6d72, t as u64, (eps * 1e6) as u64]);
        let (_, body) = &bodies[t % bodies.len()];
        let polar = body.polar()?;
        let u = crate::rng::unit_direction(&mut rng, 2);
        let (value, _) = body.support(&u)?;
        let c = cap_from_plane(body, Hyperplane::new(u.clone(), (1.0 - eps) * value)?)?;
        let x = polar.boundary_ray(&u)? * (1.0 - eps);
        let (Some(vc), Some(vk)) = (cap_volume(body, &c.base), body_volume(body)) else {
            continue;
        };
        let (Some(vm), Some(vp)) = (macbeath_volume(&polar, &x, 0.2), body_volume(&polar)) else {
            continue;
        };
        let ratio = (vc / vk) * (vm / vp) / eps.powi(3);
        min_ratio = min_ratio.min(ratio);
    }
    Ok(min_ratio)
}

pub fn mahler_suite(trials: usize, seed: u64) -> Vec<LemmaReport> {
    let mut reports = Vec::new();

    reports.push(run(
        "mahler volume stays above the calibrated floor",
        trials.min(200),
        seed,
        "exact volumes of the body and its polar",
        |rng, t| {
            let dim = if t % 2 == 0 { 2 } else { 3 };
            let body = match t % 4 {
                0 => crate::bodygen::random_hpolytope(rng, dim, 2 * dim)?,
                1 => crate::bodygen::random_vpolytope(rng, dim, 3 * dim)?,
                2 => crate::bodygen::random_ellipsoid(rng, dim)?,
                _ => ConvexBody::lp_ball(dim, 1.0, 1.0)?,
            };
            let polar = body.polar()?;
            let (Some(v), Some(vp)) = (body_volume(&body), body_volume(&polar)) else {
                return Ok(Trial::Skip);
            };
            let omega = crate::bodies::unit_ball_volume(dim);
            let kappa = if dim == 2 {
                calibrated::MAHLER_BODY_2D
            } else {
                calibrated::MAHLER_BODY_3D
            };
            Ok(Trial::Margin(v * vp / (omega * omega) - kappa))
        },
    ));

    for eps in [0.1, 0.05] {
        let min_ratio = cap_product_minimum(trials.min(200), seed, eps).unwrap_or(f64::NAN);
        reports.push(LemmaReport {
            name: format!("primal-polar cap volume product at eps = {eps}"),
            trials: trials.min(200),
            skipped: 0,
            violations: usize::from(!(min_ratio >= calibrated::CAP_PRODUCT_2D)),
            worst_margin: min_ratio - calibrated::CAP_PRODUCT_2D,
            pass: min_ratio >= calibrated::CAP_PRODUCT_2D,
            note: format!("min product/eps^3 = {min_ratio:.4}"),
        });
    }

    for eps in [0.1, 0.05, 0.025] {
        let min_ratio = region_product_minimum(trials.min(200), seed, eps).unwrap_or(f64::NAN);
        reports.push(LemmaReport {
            name: format!("cap against polar region volume product at eps = {eps}"),
            trials: trials.min(200),
            skipped: 0,
            violations: usize::from(!(min_ratio >= calibrated::REGION_PRODUCT_2D)),
            worst_margin: min_ratio - calibrated::REGION_PRODUCT_2D,
            pass: min_ratio >= calibrated::REGION_PRODUCT_2D,
            note: format!("min product/eps^3 = {min_ratio:.4}"),
        });
    }

    reports.push(run(
        "shell volume matches the closed form within 3 sigma",
        trials.min(60),
        seed,
        "vol_K(K \\ (1-4eps)K) = 1 - (1-4eps)^n by Monte Carlo",
        |rng, t| {
            let bodies = pool(seed);
            let (_, body) = &bodies[t % bodies.len()];
            let n = body.dim();
            let eps = rng.random_range(0.02..0.2);
            let cut = 1.0 - 4.0 * eps;
            let samples = 20_000;
            let mut hits = 0usize;
            for _ in 0..samples {
                let x = body.uniform_sample(rng)?;
                if body.gauge(&x) >= cut {
                    hits += 1;
                }
            }
            let p = hits as f64 / samples as f64;
            let want = 1.0 - cut.powi(n as i32);
            let sigma = (want * (1.0 - want) / samples as f64).sqrt();
            Ok(Trial::Margin(3.0 * sigma - (p - want).abs()))
        },
    ));

    reports
}

/// Everything, in suite order.
pub fn all_suites(trials: usize, seed: u64) -> Vec<LemmaReport> {
    let mut reports = caps_suite(trials, seed);
    reports.extend(macbeath_suite(trials, seed));
    reports.extend(mahler_suite(trials, seed));
    reports
}
