//! Convex body representations and the oracle surface.
//!
//! A [`ConvexBody`] is a well-centered body: the origin is interior and the
//! centering radii satisfy `r B <= K <= r' B` (Euclidean balls). All native
//! representations answer membership, gauge and support queries exactly
//! (closed form or LP); affine images and computed polars route through
//! deterministic bisection honoring [`OracleConfig`] tolerances.
//!
//! Bodies are immutable after construction. Every operation is pure given
//! its rng handle, so values may be shared freely across threads.

use crate::hull::convex_hull;
use crate::lp::{self, Constraint, LpOutcome};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Relative slack used by exact membership predicates.
const MEMB_EPS: f64 = 1e-12;

/// A hyperplane `normal . x = offset` with unit normal and positive offset
/// (the plane never passes through the origin).
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: DVector<f64>,
    offset: f64,
}

impl Hyperplane {
    pub fn new(normal: DVector<f64>, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if len < 1e-12 {
            return Err(Error::input("hyperplane normal is zero"));
        }
        let mut normal = normal / len;
        let mut offset = offset / len;
        if offset < 0.0 {
            normal = -normal;
            offset = -offset;
        }
        if offset <= 1e-12 {
            return Err(Error::input("hyperplane passes through the origin"));
        }
        Ok(Hyperplane { normal, offset })
    }

    pub fn normal(&self) -> &DVector<f64> {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed evaluation `normal . x - offset`.
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }
}

/// Tolerances of the weak-oracle contract.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Weak-membership slack (Euclidean), must stay below `r/100`.
    pub membership_tolerance: f64,
    /// Relative termination tolerance of boundary bisection.
    pub ray_search_tolerance: f64,
    pub max_bisection_steps: u32,
    /// Rejection proposals before sampling gives up.
    pub rejection_budget: usize,
    /// Hit-and-run burn-in is `factor * n^2` steps.
    pub burn_in_factor: usize,
    /// Permit polar bodies represented through the support oracle.
    pub allow_polar_fallback: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            membership_tolerance: 1e-7,
            ray_search_tolerance: 1e-12,
            max_bisection_steps: 80,
            rejection_budget: 1_000_000,
            burn_in_factor: 10,
            allow_polar_fallback: true,
        }
    }
}

/// H-polytope `{x : normals[i] . x <= offsets[i]}`.
///
/// Raw form: offsets may have any sign (Macbeath regions of polytopes are
/// expressed this way). As a [`ConvexBody`] representation all offsets must
/// be positive so the origin is strictly inside.
#[derive(Debug, Clone)]
pub struct HPolytope {
    pub normals: Vec<DVector<f64>>,
    pub offsets: Vec<f64>,
}

impl HPolytope {
    pub fn new(normals: Vec<DVector<f64>>, offsets: Vec<f64>) -> Self {
        assert_eq!(normals.len(), offsets.len());
        HPolytope { normals, offsets }
    }

    pub fn constraints(&self) -> Vec<Constraint> {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, &b)| Constraint::new(a.clone(), b))
            .collect()
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(a, &b)| a.dot(x) <= b + tol)
    }

    /// Adds the halfspace `a . x <= b`.
    pub fn clip(&self, a: DVector<f64>, b: f64) -> HPolytope {
        let mut normals = self.normals.clone();
        let mut offsets = self.offsets.clone();
        normals.push(a);
        offsets.push(b);
        HPolytope { normals, offsets }
    }

    /// Vertex enumeration over facet subsets; assumes boundedness.
    pub fn vertices(&self, dim: usize) -> Result<Vec<DVector<f64>>> {
        let m = self.normals.len();
        if m < dim {
            return Err(Error::input("too few facets for a bounded polytope"));
        }
        let scale = self.offsets.iter().fold(1.0f64, |s, &b| s.max(b.abs()));
        let tol = 1e-9 * scale;
        let mut verts: Vec<DVector<f64>> = Vec::new();
        let mut idx = vec![0usize; dim];
        let mut count: u64 = 0;
        self.vertex_rec(0, 0, dim, &mut idx, tol, &mut verts, &mut count)?;
        Ok(verts)
    }

    #[allow(clippy::too_many_arguments)]
    fn vertex_rec(
        &self,
        start: usize,
        k: usize,
        dim: usize,
        idx: &mut Vec<usize>,
        tol: f64,
        verts: &mut Vec<DVector<f64>>,
        count: &mut u64,
    ) -> Result<()> {
        if k == dim {
            *count += 1;
            if *count > 5_000_000 {
                return Err(Error::BudgetExceeded("vertex enumeration".into()));
            }
            let a = DMatrix::from_fn(dim, dim, |r, c| self.normals[idx[r]][c]);
            let b = DVector::from_fn(dim, |r, _| self.offsets[idx[r]]);
            if let Some(x) = a.lu().solve(&b) {
                if x.iter().all(|v| v.is_finite())
                    && self.contains(&x, tol)
                    && !verts.iter().any(|v| (v - &x).norm() < 1e-8)
                {
                    verts.push(x);
                }
            }
            return Ok(());
        }
        for i in start..self.normals.len() {
            idx[k] = i;
            self.vertex_rec(i + 1, k + 1, dim, idx, tol, verts, count)?;
        }
        Ok(())
    }
}

/// V-polytope: convex hull of a vertex list.
#[derive(Debug, Clone)]
pub struct VPolytope {
    pub vertices: Vec<DVector<f64>>,
}

/// Ellipsoid `{x : (x - center)^T shape (x - center) <= 1}` with SPD shape.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    pub center: DVector<f64>,
    pub shape: DMatrix<f64>,
    inv_shape: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(center: DVector<f64>, shape: DMatrix<f64>) -> Result<Self> {
        if shape.clone().cholesky().is_none() {
            return Err(Error::input("ellipsoid shape matrix is not positive definite"));
        }
        let inv_shape = shape
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::input("ellipsoid shape matrix is singular"))?;
        Ok(Ellipsoid { center, shape, inv_shape })
    }

    pub fn inv_shape(&self) -> &DMatrix<f64> {
        &self.inv_shape
    }
}

/// `l_p` ball of a given radius; `p = f64::INFINITY` is the cube.
#[derive(Debug, Clone)]
pub struct LpBall {
    pub p: f64,
    pub radius: f64,
}

impl LpBall {
    pub fn norm(&self, x: &DVector<f64>) -> f64 {
        lp_norm(x, self.p)
    }

    pub fn conjugate_exponent(&self) -> f64 {
        conjugate(self.p)
    }
}

pub(crate) fn lp_norm(x: &DVector<f64>, p: f64) -> f64 {
    if p.is_infinite() {
        x.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else if (p - 1.0).abs() < 1e-12 {
        x.iter().map(|v| v.abs()).sum()
    } else {
        x.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

fn conjugate(p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else if (p - 1.0).abs() < 1e-12 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

/// Invertible affine image `{M u + t : u in inner}`.
#[derive(Debug, Clone)]
pub struct AffineBody {
    pub inner: Box<ConvexBody>,
    pub matrix: DMatrix<f64>,
    pub shift: DVector<f64>,
    inv_matrix: DMatrix<f64>,
}

impl AffineBody {
    pub fn pull_back(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.inv_matrix * (x - &self.shift)
    }
}

/// Origin-centered Macbeath region `lambda ((K - x) cap (x - K))` of a
/// parent body; used as a norm body by the lattice pipeline.
#[derive(Debug, Clone)]
pub struct MacbeathBody {
    pub parent: Box<ConvexBody>,
    pub center: DVector<f64>,
    pub scale: f64,
}

#[derive(Debug, Clone)]
pub enum Representation {
    HPolytope(HPolytope),
    VPolytope(VPolytope),
    Ellipsoid(Ellipsoid),
    LpBall(LpBall),
    Affine(AffineBody),
    /// Computed polar of the inner body: gauge and support swap roles.
    Polar(Box<ConvexBody>),
    /// Computed Macbeath norm body.
    Macbeath(MacbeathBody),
}

/// A well-centered convex body with its oracle configuration.
#[derive(Debug, Clone)]
pub struct ConvexBody {
    rep: Representation,
    dim: usize,
    inner_radius: f64,
    outer_radius: f64,
    oracle: OracleConfig,
}

impl ConvexBody {
    /// Validates the centering invariants:
    /// origin interior, `0 < r <= r'`, sampled directions within `[r, r']`,
    /// H-polytope offsets positive, `delta <= r/100`.
    pub fn new(
        rep: Representation,
        inner_radius: f64,
        outer_radius: f64,
        oracle: OracleConfig,
    ) -> Result<Self> {
        let dim = rep_dim(&rep)?;
        if dim < 2 {
            return Err(Error::input("dimension must be at least 2"));
        }
        if !(inner_radius > 0.0) || !(outer_radius >= inner_radius) {
            return Err(Error::input("need 0 < r <= r_outer"));
        }
        if oracle.membership_tolerance > inner_radius / 100.0 {
            return Err(Error::input("membership tolerance must satisfy delta <= r/100"));
        }
        if let Representation::HPolytope(h) = &rep {
            if h.offsets.iter().any(|&b| b <= 0.0) {
                return Err(Error::input("H-polytope offsets must be positive (origin interior)"));
            }
        }
        let body = ConvexBody {
            rep,
            dim,
            inner_radius,
            outer_radius,
            oracle,
        };
        body.check_centering()?;
        Ok(body)
    }

    fn check_centering(&self) -> Result<()> {
        if self.gauge(&DVector::zeros(self.dim)) > 1e-9
            || !self.contains_unchecked(&DVector::zeros(self.dim))
        {
            return Err(Error::input("origin is not interior"));
        }
        let mut rng = crate::rng::derive(0x6f72_6163, &[self.dim as u64]);
        let slack = 1e-7 * self.outer_radius;
        let mut dirs: Vec<DVector<f64>> = Vec::new();
        for j in 0..self.dim {
            let mut e = DVector::zeros(self.dim);
            e[j] = 1.0;
            dirs.push(e.clone());
            dirs.push(-e);
        }
        for _ in 0..32 {
            dirs.push(crate::rng::unit_direction(&mut rng, self.dim));
        }
        for u in dirs {
            let p = self.boundary_ray(&u)?;
            let d = p.norm();
            if d < self.inner_radius - slack || d > self.outer_radius + slack {
                return Err(Error::input(format!(
                    "centering violated: boundary distance {d} outside [{}, {}]",
                    self.inner_radius, self.outer_radius
                )));
            }
        }
        Ok(())
    }

    pub fn rep(&self) -> &Representation {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn outer_radius(&self) -> f64 {
        self.outer_radius
    }

    pub fn oracle(&self) -> &OracleConfig {
        &self.oracle
    }

    /// Exact H-form when one is available without approximation.
    pub fn as_hpolytope(&self) -> Option<HPolytope> {
        match &self.rep {
            Representation::HPolytope(h) => Some(h.clone()),
            Representation::VPolytope(v) => {
                let hull = convex_hull(&v.vertices).ok()?;
                let (normals, offsets) = hull.merged_facets().into_iter().unzip();
                Some(HPolytope::new(normals, offsets))
            }
            Representation::LpBall(b) if b.p.is_infinite() => {
                let mut normals = Vec::new();
                let mut offsets = Vec::new();
                for j in 0..self.dim {
                    for s in [-1.0, 1.0] {
                        let mut e = DVector::zeros(self.dim);
                        e[j] = s;
                        normals.push(e);
                        offsets.push(b.radius);
                    }
                }
                Some(HPolytope::new(normals, offsets))
            }
            Representation::LpBall(b) if (b.p - 1.0).abs() < 1e-12 => {
                let mut normals = Vec::new();
                let mut offsets = Vec::new();
                for mask in 0..(1usize << self.dim) {
                    let v = DVector::from_fn(self.dim, |j, _| {
                        if mask >> j & 1 == 1 {
                            1.0
                        } else {
                            -1.0
                        }
                    });
                    normals.push(v);
                    offsets.push(b.radius);
                }
                Some(HPolytope::new(normals, offsets))
            }
            _ => None,
        }
    }

    pub fn membership(&self, x: &DVector<f64>) -> Result<bool> {
        if x.len() != self.dim {
            return Err(Error::input(format!(
                "point dimension {} does not match body dimension {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("point has non-finite coordinates"));
        }
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &DVector<f64>) -> bool {
        match &self.rep {
            Representation::HPolytope(h) => {
                let tol = MEMB_EPS * self.outer_radius.max(1.0);
                h.contains(x, tol)
            }
            Representation::Affine(a) => a.inner.contains_unchecked(&a.pull_back(x)),
            Representation::Macbeath(m) => {
                let fwd = &m.center + (x / m.scale);
                let bwd = &m.center - (x / m.scale);
                m.parent.contains_unchecked(&fwd) && m.parent.contains_unchecked(&bwd)
            }
            _ => self.gauge(x) <= 1.0 + MEMB_EPS,
        }
    }

    /// Minkowski gauge `inf { s >= 0 : x in s K }`.
    pub fn gauge(&self, x: &DVector<f64>) -> f64 {
        assert_eq!(x.len(), self.dim, "gauge: dimension mismatch");
        let norm = x.norm();
        if norm == 0.0 {
            return 0.0;
        }
        match &self.rep {
            Representation::HPolytope(h) => h
                .normals
                .iter()
                .zip(&h.offsets)
                .fold(0.0f64, |g, (a, &b)| g.max(a.dot(x) / b)),
            Representation::VPolytope(v) => {
                let cons: Vec<Constraint> = v
                    .vertices
                    .iter()
                    .map(|vert| Constraint::new(vert.clone(), 1.0))
                    .collect();
                match lp::maximize(x, &cons) {
                    LpOutcome::Optimal { value, .. } => value.max(0.0),
                    // unbounded dual: the origin is not interior, the gauge
                    // diverges along this direction
                    _ => f64::INFINITY,
                }
            }
            Representation::Ellipsoid(e) => gauge_quadratic(&e.shape, &e.center, x),
            Representation::LpBall(b) => b.norm(x) / b.radius,
            Representation::Affine(_) => {
                // bisection bracket from the centering radii
                let mut lo = norm / self.outer_radius;
                let mut hi = norm / self.inner_radius;
                for _ in 0..self.oracle.max_bisection_steps {
                    if (hi - lo) <= self.oracle.ray_search_tolerance * hi {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    if self.contains_unchecked(&(x / mid)) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
            Representation::Polar(inner) => inner.support_value(x),
            Representation::Macbeath(m) => {
                let g1 = m.parent.gauge_from(&m.center, &(x / m.scale));
                let g2 = m.parent.gauge_from(&m.center, &(-x / m.scale));
                g1.max(g2)
            }
        }
    }

    /// Gauge of `K` about an interior basepoint: `inf { s : base + w/s in K }`.
    pub(crate) fn gauge_from(&self, base: &DVector<f64>, w: &DVector<f64>) -> f64 {
        if w.norm() == 0.0 {
            return 0.0;
        }
        match &self.rep {
            Representation::HPolytope(h) => {
                let mut g = 0.0f64;
                for (a, &b) in h.normals.iter().zip(&h.offsets) {
                    let slack = b - a.dot(base);
                    let num = a.dot(w);
                    if num > 0.0 {
                        g = g.max(num / slack.max(1e-300));
                    }
                }
                g
            }
            Representation::VPolytope(v) => {
                let cons: Vec<Constraint> = v
                    .vertices
                    .iter()
                    .map(|vert| Constraint::new(vert - base, 1.0))
                    .collect();
                match lp::maximize(w, &cons) {
                    LpOutcome::Optimal { value, .. } => value.max(0.0),
                    // base point not interior
                    _ => f64::INFINITY,
                }
            }
            Representation::Ellipsoid(e) => {
                let center = &e.center - base;
                gauge_quadratic(&e.shape, &center, w)
            }
            Representation::Affine(a) => {
                let base_in = a.pull_back(base);
                let w_in = &a.inv_matrix * w;
                a.inner.gauge_from(&base_in, &w_in)
            }
            Representation::Macbeath(m) => {
                let b1 = &m.center + (base / m.scale);
                let b2 = &m.center - (base / m.scale);
                let g1 = m.parent.gauge_from(&b1, &(w / m.scale));
                let g2 = m.parent.gauge_from(&b2, &(-w / m.scale));
                g1.max(g2)
            }
            // LpBall and Polar: deterministic bisection on the exact
            // membership predicate along the ray base + t w.
            _ => {
                let mut hi_t = (self.outer_radius + base.norm()) / w.norm() * 1.001 + 1e-12;
                if !self.contains_unchecked(&(base + w * hi_t)) {
                    let mut lo_t = 0.0;
                    for _ in 0..(self.oracle.max_bisection_steps + 40) {
                        let mid = 0.5 * (lo_t + hi_t);
                        if self.contains_unchecked(&(base + w * mid)) {
                            lo_t = mid;
                        } else {
                            hi_t = mid;
                        }
                    }
                    hi_t = lo_t.max(1e-300);
                }
                1.0 / hi_t
            }
        }
    }

    /// Intersection of the ray `{t * direction : t >= 0}` with the boundary.
    pub fn boundary_ray(&self, direction: &DVector<f64>) -> Result<DVector<f64>> {
        if direction.norm() < 1e-14 {
            return Err(Error::input("boundary_ray: zero direction"));
        }
        let g = self.gauge(direction);
        Ok(direction / g)
    }

    /// Bare support value `max_{x in K} <direction, x>`.
    pub fn support_value(&self, direction: &DVector<f64>) -> f64 {
        match &self.rep {
            Representation::HPolytope(h) => {
                match lp::maximize(direction, &h.constraints()) {
                    LpOutcome::Optimal { value, .. } => value,
                    _ => unreachable!("support of a bounded polytope"),
                }
            }
            Representation::VPolytope(v) => v
                .vertices
                .iter()
                .map(|x| direction.dot(x))
                .fold(f64::NEG_INFINITY, f64::max),
            Representation::Ellipsoid(e) => {
                let q = &e.inv_shape * direction;
                direction.dot(&e.center) + direction.dot(&q).max(0.0).sqrt()
            }
            Representation::LpBall(b) => b.radius * lp_norm(direction, conjugate(b.p)),
            Representation::Affine(a) => {
                let d_in = a.matrix.transpose() * direction;
                direction.dot(&a.shift) + a.inner.support_value(&d_in)
            }
            Representation::Polar(inner) => inner.gauge(direction),
            Representation::Macbeath(m) => match m.parent.as_hpolytope() {
                Some(parent_h) => {
                    let mac = crate::macbeath::mac_as_hpoly(&parent_h, &m.center, m.scale);
                    let shifted = HPolytope::new(
                        mac.normals.clone(),
                        mac.normals
                            .iter()
                            .zip(&mac.offsets)
                            .map(|(a, &b)| b - a.dot(&m.center))
                            .collect(),
                    );
                    match lp::maximize(direction, &shifted.constraints()) {
                        LpOutcome::Optimal { value, .. } => value,
                        _ => unreachable!("support of a bounded region"),
                    }
                }
                None => {
                    // supremum over the intersection is not closed form;
                    // callers needing exact support use polytope parents
                    panic!("support of a Macbeath norm body over a non-polytope parent")
                }
            },
        }
    }

    /// Support value and supporting hyperplane in a direction.
    pub fn support(&self, direction: &DVector<f64>) -> Result<(f64, Hyperplane)> {
        if direction.norm() < 1e-14 {
            return Err(Error::input("support: zero direction"));
        }
        let value = self.support_value(direction);
        let plane = Hyperplane::new(direction.clone(), value)?;
        Ok((value, plane))
    }

    /// A boundary point attaining the support value, with deterministic
    /// tie-breaks (lexicographic over vertices, smallest active index).
    pub fn support_point(&self, direction: &DVector<f64>) -> Result<DVector<f64>> {
        if direction.norm() < 1e-14 {
            return Err(Error::input("support_point: zero direction"));
        }
        match &self.rep {
            Representation::HPolytope(h) => match lp::maximize(direction, &h.constraints()) {
                LpOutcome::Optimal { x, .. } => Ok(DVector::from_column_slice(&x)),
                _ => unreachable!(),
            },
            Representation::VPolytope(v) => {
                let mut best: Option<&DVector<f64>> = None;
                let mut best_val = f64::NEG_INFINITY;
                for vert in &v.vertices {
                    let val = direction.dot(vert);
                    let better = val > best_val + 1e-12
                        || (val > best_val - 1e-12
                            && best.is_none_or(|b| lex_less(vert, b)));
                    if better {
                        best_val = val.max(best_val);
                        best = Some(vert);
                    }
                }
                Ok(best.expect("nonempty vertex list").clone())
            }
            Representation::Ellipsoid(e) => {
                let q = &e.inv_shape * direction;
                let denom = direction.dot(&q).max(1e-300).sqrt();
                Ok(&e.center + q / denom)
            }
            Representation::LpBall(b) => Ok(lpball_support_point(b, direction)),
            Representation::Affine(a) => {
                let d_in = a.matrix.transpose() * direction;
                let p_in = a.inner.support_point(&d_in)?;
                Ok(&a.matrix * p_in + &a.shift)
            }
            Representation::Polar(inner) => {
                let p0 = inner.boundary_ray(direction)?;
                let (plane, _) = inner.supporting_plane_at(&p0)?;
                Ok(plane.normal() / plane.offset())
            }
            Representation::Macbeath(m) => {
                let parent_h = m
                    .parent
                    .as_hpolytope()
                    .ok_or(Error::UnsupportedRepresentation("macbeath support point"))?;
                let mac = crate::macbeath::mac_as_hpoly(&parent_h, &m.center, m.scale);
                let shifted = HPolytope::new(
                    mac.normals.clone(),
                    mac.normals
                        .iter()
                        .zip(&mac.offsets)
                        .map(|(a, &b)| b - a.dot(&m.center))
                        .collect(),
                );
                match lp::maximize(direction, &shifted.constraints()) {
                    LpOutcome::Optimal { x, .. } => Ok(DVector::from_column_slice(&x)),
                    _ => unreachable!(),
                }
            }
        }
    }

    /// Supporting hyperplane at a boundary point (the point is first
    /// projected radially onto the boundary). Nonsmooth points resolve to
    /// the lexicographically smallest unit normal among active facets.
    pub fn supporting_plane_at(&self, point: &DVector<f64>) -> Result<(Hyperplane, DVector<f64>)> {
        let g = self.gauge(point);
        if g < 1e-12 {
            return Err(Error::input("supporting plane at the origin is undefined"));
        }
        let p0 = point / g;
        let plane = match &self.rep {
            Representation::HPolytope(h) => {
                let mut best: Option<(DVector<f64>, f64)> = None;
                for (a, &b) in h.normals.iter().zip(&h.offsets) {
                    let ratio = a.dot(&p0) / b;
                    if ratio > 1.0 - 1e-9 {
                        let len = a.norm();
                        let cand = (a / len, b / len);
                        let better = match &best {
                            None => true,
                            Some((bn, _)) => lex_less(&cand.0, bn),
                        };
                        if better {
                            best = Some(cand);
                        }
                    }
                }
                let (n, o) = best.ok_or_else(|| Error::input("no active facet at boundary point"))?;
                Hyperplane::new(n, o)?
            }
            Representation::VPolytope(v) => {
                // optimal dual solution of the gauge LP is a supporting
                // functional: <y, p0> = 1, <y, v_i> <= 1
                let cons: Vec<Constraint> = v
                    .vertices
                    .iter()
                    .map(|vert| Constraint::new(vert.clone(), 1.0))
                    .collect();
                match lp::maximize(&p0, &cons) {
                    LpOutcome::Optimal { x, .. } => {
                        let y = DVector::from_column_slice(&x);
                        Hyperplane::new(y, 1.0)?
                    }
                    _ => unreachable!(),
                }
            }
            Representation::Ellipsoid(e) => {
                let n = &e.shape * (&p0 - &e.center);
                let o = n.dot(&p0);
                Hyperplane::new(n, o)?
            }
            Representation::LpBall(b) => {
                let n = lpball_subgradient(b, &p0);
                let o = n.dot(&p0);
                Hyperplane::new(n, o)?
            }
            Representation::Affine(a) => {
                let u0 = a.pull_back(&p0);
                let (inner_plane, _) = a.inner.supporting_plane_at(&u0)?;
                let n = a.inv_matrix.transpose() * inner_plane.normal();
                let o = n.dot(&p0);
                Hyperplane::new(n, o)?
            }
            Representation::Polar(inner) => {
                let xstar = inner.support_point(&p0)?;
                Hyperplane::new(xstar, 1.0)?
            }
            Representation::Macbeath(m) => {
                let parent_h = m
                    .parent
                    .as_hpolytope()
                    .ok_or(Error::UnsupportedRepresentation("macbeath supporting plane"))?;
                let mac = crate::macbeath::mac_as_hpoly(&parent_h, &m.center, m.scale);
                let shifted = HPolytope::new(
                    mac.normals.clone(),
                    mac.normals
                        .iter()
                        .zip(&mac.offsets)
                        .map(|(a, &b)| b - a.dot(&m.center))
                        .collect(),
                );
                let mut best: Option<(DVector<f64>, f64)> = None;
                for (a, &b) in shifted.normals.iter().zip(&shifted.offsets) {
                    if a.dot(&p0) / b > 1.0 - 1e-9 {
                        let len = a.norm();
                        let cand = (a / len, b / len);
                        if best.as_ref().is_none_or(|(bn, _)| lex_less(&cand.0, bn)) {
                            best = Some(cand);
                        }
                    }
                }
                let (n, o) = best.ok_or_else(|| Error::input("no active facet"))?;
                Hyperplane::new(n, o)?
            }
        };
        Ok((plane, p0))
    }

    /// Polar body `K* = {u : <u, v> <= 1 for all v in K}`.
    ///
    /// Exact swaps for polytopes, origin-centered ellipsoids and `l_p`
    /// balls; otherwise a support-oracle polar (if allowed).
    pub fn polar(&self) -> Result<ConvexBody> {
        let r = 1.0 / self.outer_radius;
        let r_out = 1.0 / self.inner_radius;
        let mut oracle = self.oracle.clone();
        oracle.membership_tolerance = oracle.membership_tolerance.min(r / 100.0);
        match &self.rep {
            Representation::HPolytope(h) => {
                let mut pts: Vec<DVector<f64>> = h
                    .normals
                    .iter()
                    .zip(&h.offsets)
                    .map(|(a, &b)| a / b)
                    .collect();
                if self.dim <= 4 {
                    if let Ok(hl) = convex_hull(&pts) {
                        pts = hl.vertex_points(&pts);
                    }
                }
                ConvexBody::new(
                    Representation::VPolytope(VPolytope { vertices: pts }),
                    r,
                    r_out,
                    oracle,
                )
            }
            Representation::VPolytope(v) => {
                let mut verts = v.vertices.clone();
                if self.dim <= 4 {
                    if let Ok(hl) = convex_hull(&verts) {
                        verts = hl.vertex_points(&verts);
                    }
                }
                let offsets = vec![1.0; verts.len()];
                ConvexBody::new(
                    Representation::HPolytope(HPolytope::new(verts, offsets)),
                    r,
                    r_out,
                    oracle,
                )
            }
            Representation::Ellipsoid(e) if e.center.norm() < 1e-12 => ConvexBody::new(
                Representation::Ellipsoid(Ellipsoid::new(
                    DVector::zeros(self.dim),
                    e.inv_shape.clone(),
                )?),
                r,
                r_out,
                oracle,
            ),
            Representation::LpBall(b) => {
                let polar_ball = LpBall {
                    p: conjugate(b.p),
                    radius: 1.0 / b.radius,
                };
                let body = ConvexBody {
                    rep: Representation::LpBall(polar_ball),
                    dim: self.dim,
                    inner_radius: r,
                    outer_radius: r_out,
                    oracle,
                };
                body.check_centering()?;
                Ok(body)
            }
            Representation::Polar(inner) => Ok(inner.as_ref().clone()),
            _ => {
                if !self.oracle.allow_polar_fallback {
                    return Err(Error::UnsupportedRepresentation(
                        "exact polar (oracle fallback disabled)",
                    ));
                }
                ConvexBody::new(
                    Representation::Polar(Box::new(self.clone())),
                    r,
                    r_out,
                    oracle,
                )
            }
        }
    }

    /// Difference body `K + (-K)` for V-polytopes.
    pub fn difference_body(&self) -> Result<ConvexBody> {
        let Representation::VPolytope(v) = &self.rep else {
            return Err(Error::UnsupportedRepresentation(
                "difference body needs a V-representation",
            ));
        };
        let mut pts = Vec::with_capacity(v.vertices.len() * v.vertices.len());
        for a in &v.vertices {
            for b in &v.vertices {
                pts.push(a - b);
            }
        }
        let verts = if self.dim <= 4 {
            let hl = convex_hull(&pts)?;
            hl.vertex_points(&pts)
        } else {
            pts
        };
        ConvexBody::new(
            Representation::VPolytope(VPolytope { vertices: verts }),
            2.0 * self.inner_radius,
            2.0 * self.outer_radius,
            self.oracle.clone(),
        )
    }

    /// Uniform scaling about the origin.
    pub fn scale(&self, s: f64) -> ConvexBody {
        assert!(s > 0.0, "scale factor must be positive");
        let rep = match &self.rep {
            Representation::HPolytope(h) => Representation::HPolytope(HPolytope::new(
                h.normals.clone(),
                h.offsets.iter().map(|b| b * s).collect(),
            )),
            Representation::VPolytope(v) => Representation::VPolytope(VPolytope {
                vertices: v.vertices.iter().map(|p| p * s).collect(),
            }),
            Representation::Ellipsoid(e) => Representation::Ellipsoid(
                Ellipsoid::new(&e.center * s, &e.shape / (s * s)).expect("scaled SPD stays SPD"),
            ),
            Representation::LpBall(b) => Representation::LpBall(LpBall {
                p: b.p,
                radius: b.radius * s,
            }),
            Representation::Affine(a) => Representation::Affine(AffineBody {
                inner: a.inner.clone(),
                matrix: &a.matrix * s,
                shift: &a.shift * s,
                inv_matrix: &a.inv_matrix / s,
            }),
            Representation::Polar(inner) => Representation::Polar(Box::new(inner.scale(1.0 / s))),
            Representation::Macbeath(m) => Representation::Macbeath(MacbeathBody {
                parent: m.parent.clone(),
                center: m.center.clone(),
                scale: m.scale * s,
            }),
        };
        ConvexBody {
            rep,
            dim: self.dim,
            inner_radius: self.inner_radius * s,
            outer_radius: self.outer_radius * s,
            oracle: self.oracle.clone(),
        }
    }

    /// `K - p` for an interior point `p`, with honest recomputed radii.
    pub fn translate_to_origin(&self, p: &DVector<f64>) -> Result<ConvexBody> {
        if !self.contains_unchecked(p) {
            return Err(Error::input("translation point is not inside the body"));
        }
        let r_new = self.distance_to_boundary_lower(p)?;
        if r_new <= 0.0 {
            return Err(Error::input("translation point is too close to the boundary"));
        }
        let r_out_new = self.outer_radius + p.norm();
        let mut oracle = self.oracle.clone();
        oracle.membership_tolerance = oracle.membership_tolerance.min(r_new / 100.0);
        let rep = match &self.rep {
            Representation::HPolytope(h) => Representation::HPolytope(HPolytope::new(
                h.normals.clone(),
                h.normals
                    .iter()
                    .zip(&h.offsets)
                    .map(|(a, &b)| b - a.dot(p))
                    .collect(),
            )),
            Representation::VPolytope(v) => Representation::VPolytope(VPolytope {
                vertices: v.vertices.iter().map(|x| x - p).collect(),
            }),
            Representation::Ellipsoid(e) => Representation::Ellipsoid(Ellipsoid::new(
                &e.center - p,
                e.shape.clone(),
            )?),
            other => {
                let ident = DMatrix::identity(self.dim, self.dim);
                Representation::Affine(AffineBody {
                    inner: Box::new(ConvexBody {
                        rep: other.clone(),
                        dim: self.dim,
                        inner_radius: self.inner_radius,
                        outer_radius: self.outer_radius,
                        oracle: self.oracle.clone(),
                    }),
                    matrix: ident.clone(),
                    shift: -p.clone(),
                    inv_matrix: ident,
                })
            }
        };
        ConvexBody::new(rep, r_new, r_out_new, oracle)
    }

    /// Certified lower bound on the Euclidean distance from an interior
    /// point to the boundary.
    fn distance_to_boundary_lower(&self, p: &DVector<f64>) -> Result<f64> {
        match &self.rep {
            Representation::HPolytope(h) => Ok(h
                .normals
                .iter()
                .zip(&h.offsets)
                .map(|(a, &b)| (b - a.dot(p)) / a.norm())
                .fold(f64::INFINITY, f64::min)),
            Representation::VPolytope(v) => {
                let hull = convex_hull(&v.vertices)?;
                Ok(hull
                    .merged_facets()
                    .into_iter()
                    .map(|(n, o)| o - n.dot(p))
                    .fold(f64::INFINITY, f64::min))
            }
            Representation::Ellipsoid(e) => {
                let d = p - &e.center;
                let h = d.dot(&(&e.shape * &d)).max(0.0).sqrt();
                let eigs = e.shape.clone().symmetric_eigenvalues();
                let lam_max = eigs.iter().fold(0.0f64, |m, &v| m.max(v));
                Ok((1.0 - h) / lam_max.sqrt())
            }
            Representation::LpBall(b) => {
                let n = self.dim as f64;
                let inradius = if b.p >= 2.0 {
                    1.0
                } else {
                    n.powf(0.5 - 1.0 / b.p)
                };
                Ok((b.radius - b.norm(p)) * inradius.min(1.0))
            }
            _ => {
                // generic bound: K contains p + (1-gauge(p)) K, which holds
                // a ball of radius (1-gauge(p)) r
                Ok((1.0 - self.gauge(p)).max(0.0) * self.inner_radius)
            }
        }
    }

    /// Uniform point in the body: exact rejection from the bounding box for
    /// n <= 3, hit-and-run with burn-in for n >= 4.
    pub fn uniform_sample<R: Rng>(&self, rng: &mut R) -> Result<DVector<f64>> {
        if self.dim <= 3 {
            let budget = self.oracle.rejection_budget;
            for _ in 0..budget {
                let x = crate::rng::box_point(rng, self.dim, self.outer_radius);
                if self.contains_unchecked(&x) {
                    return Ok(x);
                }
            }
            Err(Error::SamplingFailure {
                acceptance: 1.0 / budget as f64,
                proposals: budget,
            })
        } else {
            let steps = self.oracle.burn_in_factor * self.dim * self.dim;
            let mut x = DVector::zeros(self.dim);
            for _ in 0..steps {
                let u = crate::rng::unit_direction(rng, self.dim);
                let t_pos = self.chord_extent(&x, &u);
                let t_neg = self.chord_extent(&x, &(-u.clone()));
                let t = rng.random_range(-t_neg..=t_pos);
                x += &u * (t * (1.0 - 1e-12));
            }
            Ok(x)
        }
    }

    /// Largest `t` with `x + t u` inside the body.
    pub(crate) fn chord_extent(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        if let Representation::HPolytope(h) = &self.rep {
            let mut t = f64::INFINITY;
            for (a, &b) in h.normals.iter().zip(&h.offsets) {
                let du = a.dot(u);
                if du > 1e-14 {
                    t = t.min((b - a.dot(x)) / du);
                }
            }
            return t.max(0.0);
        }
        let g = self.gauge_from(x, u);
        if g <= 1e-300 {
            0.0
        } else {
            1.0 / g
        }
    }

    /// Monte Carlo volume by rejection from the bounding box; returns the
    /// estimate with its binomial standard error.
    pub fn estimate_volume<R: Rng>(&self, rng: &mut R, samples: usize) -> (f64, f64) {
        assert!(samples >= 1_000, "volume estimation needs >= 1e3 samples");
        let box_vol = (2.0 * self.outer_radius).powi(self.dim as i32);
        let mut hits = 0usize;
        for _ in 0..samples {
            let x = crate::rng::box_point(rng, self.dim, self.outer_radius);
            if self.contains_unchecked(&x) {
                hits += 1;
            }
        }
        let p = hits as f64 / samples as f64;
        let stderr = (p * (1.0 - p) / samples as f64).sqrt();
        (box_vol * p, box_vol * stderr)
    }

    /// Kovner-Besicovitch ratio `vol(K cap -K) / vol(K)` by Monte Carlo.
    pub fn kb_ratio<R: Rng>(&self, rng: &mut R, samples: usize) -> Result<f64> {
        assert!(samples >= 1_000, "kb_ratio needs >= 1e3 samples");
        let mut hits = 0usize;
        for _ in 0..samples {
            let x = self.uniform_sample(rng)?;
            if self.contains_unchecked(&(-x)) {
                hits += 1;
            }
        }
        Ok(hits as f64 / samples as f64)
    }

    /// Sample mean of uniform draws.
    pub fn estimate_centroid<R: Rng>(&self, rng: &mut R, samples: usize) -> Result<DVector<f64>> {
        assert!(samples >= 1_000, "centroid estimation needs >= 1e3 samples");
        let mut acc = DVector::zeros(self.dim);
        for _ in 0..samples {
            acc += self.uniform_sample(rng)?;
        }
        Ok(acc / samples as f64)
    }

    /// Well-centeredness certificate: `kb_ratio >= factor * 2^-n`.
    pub fn certify_well_centered<R: Rng>(
        &self,
        rng: &mut R,
        samples: usize,
        factor: f64,
    ) -> Result<(f64, bool)> {
        let ratio = self.kb_ratio(rng, samples)?;
        let threshold = factor * 2.0f64.powi(-(self.dim as i32));
        Ok((ratio, ratio >= threshold))
    }
}

fn rep_dim(rep: &Representation) -> Result<usize> {
    let dim = match rep {
        Representation::HPolytope(h) => {
            h.normals.first().map(|a| a.len()).ok_or_else(|| Error::input("empty H-polytope"))?
        }
        Representation::VPolytope(v) => {
            v.vertices.first().map(|p| p.len()).ok_or_else(|| Error::input("empty V-polytope"))?
        }
        Representation::Ellipsoid(e) => e.center.len(),
        Representation::LpBall(_) => {
            return Err(Error::input(
                "lp ball dimension is ambiguous; construct via ConvexBody::lp_ball",
            ))
        }
        Representation::Affine(a) => a.shift.len(),
        Representation::Polar(b) => b.dim(),
        Representation::Macbeath(m) => m.center.len(),
    };
    Ok(dim)
}

/// Gauge of a (shifted) ellipsoid: largest `u >= 0` with
/// `(u x - center)^T q (u x - center) <= 1`, returned as `1/u`.
fn gauge_quadratic(q: &DMatrix<f64>, center: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let qx = q * x;
    let a = x.dot(&qx);
    if a <= 0.0 {
        return 0.0;
    }
    let b = -2.0 * center.dot(&qx);
    let c = center.dot(&(q * center)) - 1.0;
    let disc = (b * b - 4.0 * a * c).max(0.0);
    let u_max = (-b + disc.sqrt()) / (2.0 * a);
    if u_max <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / u_max
    }
}

fn lex_less(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    for (x, y) in a.iter().zip(b.iter()) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    false
}

fn lpball_support_point(b: &LpBall, d: &DVector<f64>) -> DVector<f64> {
    let n = d.len();
    if b.p.is_infinite() {
        return DVector::from_fn(n, |j, _| b.radius * sgn(d[j]));
    }
    if (b.p - 1.0).abs() < 1e-12 {
        let mut best = 0usize;
        for j in 1..n {
            if d[j].abs() > d[best].abs() + 1e-15 {
                best = j;
            }
        }
        let mut x = DVector::zeros(n);
        x[best] = b.radius * sgn(d[best]);
        return x;
    }
    let q = conjugate(b.p);
    let dq = lp_norm(d, q);
    DVector::from_fn(n, |j, _| {
        b.radius * sgn(d[j]) * (d[j].abs() / dq).powf(q / b.p)
    })
}

fn lpball_subgradient(b: &LpBall, x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    if b.p.is_infinite() {
        let mut best = 0usize;
        for j in 1..n {
            if x[j].abs() > x[best].abs() + 1e-15 {
                best = j;
            }
        }
        let mut g = DVector::zeros(n);
        g[best] = sgn_pos(x[best]);
        g
    } else if (b.p - 1.0).abs() < 1e-12 {
        DVector::from_fn(n, |j, _| sgn_pos(x[j]))
    } else {
        DVector::from_fn(n, |j, _| sgn(x[j]) * x[j].abs().powf(b.p - 1.0))
    }
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn sgn_pos(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Volume of the n-dimensional Euclidean unit ball via the exact
/// half-integer Gamma recurrence.
pub fn unit_ball_volume(n: usize) -> f64 {
    // Gamma(m/2) for integer m >= 1
    fn gamma_half(m: u32) -> f64 {
        match m {
            1 => std::f64::consts::PI.sqrt(),
            2 => 1.0,
            _ => (m as f64 / 2.0 - 1.0) * gamma_half(m - 2),
        }
    }
    std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n as u32 + 2)
}

// ---------------------------------------------------------------------------
// convenience constructors
// ---------------------------------------------------------------------------

impl ConvexBody {
    pub fn hpolytope(normals: Vec<DVector<f64>>, offsets: Vec<f64>, r: f64, r_outer: f64) -> Result<Self> {
        ConvexBody::new(
            Representation::HPolytope(HPolytope::new(normals, offsets)),
            r,
            r_outer,
            OracleConfig::default(),
        )
    }

    pub fn vpolytope(vertices: Vec<DVector<f64>>, r: f64, r_outer: f64) -> Result<Self> {
        ConvexBody::new(
            Representation::VPolytope(VPolytope { vertices }),
            r,
            r_outer,
            OracleConfig::default(),
        )
    }

    pub fn ellipsoid(center: DVector<f64>, shape: DMatrix<f64>, r: f64, r_outer: f64) -> Result<Self> {
        ConvexBody::new(
            Representation::Ellipsoid(Ellipsoid::new(center, shape)?),
            r,
            r_outer,
            OracleConfig::default(),
        )
    }

    /// `l_p` ball; the representation alone does not carry the dimension,
    /// so it is passed explicitly.
    pub fn lp_ball(dim: usize, p: f64, radius: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::input("lp ball needs p >= 1"));
        }
        if !(radius > 0.0) {
            return Err(Error::input("lp ball needs a positive radius"));
        }
        if dim < 2 {
            return Err(Error::input("dimension must be at least 2"));
        }
        let n = dim as f64;
        // inradius/circumradius of the unit p-ball in Euclidean terms
        let (r, r_outer) = if p >= 2.0 {
            (radius, radius * n.powf(0.5 - 1.0 / p))
        } else {
            (radius * n.powf(0.5 - 1.0 / p), radius)
        };
        let body = ConvexBody {
            rep: Representation::LpBall(LpBall { p, radius }),
            dim,
            inner_radius: r,
            outer_radius: r_outer,
            oracle: OracleConfig::default(),
        };
        body.check_centering()?;
        Ok(body)
    }

    pub fn affine_image(inner: ConvexBody, matrix: DMatrix<f64>, shift: DVector<f64>, r: f64, r_outer: f64) -> Result<Self> {
        let inv_matrix = matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::input("affine map must be invertible"))?;
        ConvexBody::new(
            Representation::Affine(AffineBody {
                inner: Box::new(inner),
                matrix,
                shift,
                inv_matrix,
            }),
            r,
            r_outer,
            OracleConfig::default(),
        )
    }

    /// Euclidean ball of a given radius.
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        ConvexBody::ellipsoid(
            DVector::zeros(dim),
            DMatrix::identity(dim, dim) / (radius * radius),
            radius,
            radius,
        )
    }

    /// Axis-aligned cube `[-half, half]^n`.
    pub fn cube(dim: usize, half: f64) -> Result<Self> {
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for j in 0..dim {
            for s in [1.0, -1.0] {
                let mut e = DVector::zeros(dim);
                e[j] = s;
                normals.push(e);
                offsets.push(half);
            }
        }
        ConvexBody::hpolytope(normals, offsets, half, half * (dim as f64).sqrt())
    }

    /// Origin-centered Macbeath norm body `lambda((K - x) cap (x - K))` for
    /// an interior point `x` of `parent`.
    ///
    /// The outer radius is tightened to the Euclidean norm of the
    /// piece-support bounding box, which scales with the region rather than
    /// the parent; the lattice enumeration boxes depend on it directly.
    pub fn macbeath_norm_body(parent: &ConvexBody, center: &DVector<f64>, scale: f64) -> Result<Self> {
        let g = parent.gauge(center);
        if g >= 1.0 {
            return Err(Error::input("macbeath center must be interior"));
        }
        let region = crate::macbeath::MacbeathRegion::new(parent, center.clone(), scale);
        let half = region.bounding_halfwidths();
        let r_outer = half.norm().min(scale * (parent.outer_radius() + center.norm()));
        if let Some(h) = parent.as_hpolytope() {
            let mac = crate::macbeath::mac_as_hpoly(&h, center, scale);
            let shifted = HPolytope::new(
                mac.normals.clone(),
                mac.normals
                    .iter()
                    .zip(&mac.offsets)
                    .map(|(a, &b)| b - a.dot(center))
                    .collect(),
            );
            let r = shifted
                .normals
                .iter()
                .zip(&shifted.offsets)
                .map(|(a, &b)| b / a.norm())
                .fold(f64::INFINITY, f64::min)
                .min(r_outer);
            let mut oracle = parent.oracle().clone();
            oracle.membership_tolerance = oracle.membership_tolerance.min(r / 100.0);
            return ConvexBody::new(Representation::HPolytope(shifted), r, r_outer, oracle);
        }
        let r = (scale * (1.0 - g) * parent.inner_radius()).min(r_outer);
        let mut oracle = parent.oracle().clone();
        oracle.membership_tolerance = oracle.membership_tolerance.min(r / 100.0);
        ConvexBody::new(
            Representation::Macbeath(MacbeathBody {
                parent: Box::new(parent.clone()),
                center: center.clone(),
                scale,
            }),
            r,
            r_outer,
            oracle,
        )
    }
}

// ---------------------------------------------------------------------------
// JSON body specs
// ---------------------------------------------------------------------------

/// Real number in a body spec: accepts JSON numbers or decimal strings,
/// always emits numbers (shortest round-trip form).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Real(v)),
            Raw::Text(t) => {
                if t == "inf" {
                    return Ok(Real(f64::INFINITY));
                }
                t.parse::<f64>()
                    .map(Real)
                    .map_err(|e| serde::de::Error::custom(format!("bad decimal string: {e}")))
            }
        }
    }
}

fn reals(v: &DVector<f64>) -> Vec<Real> {
    v.iter().map(|&x| Real(x)).collect()
}

fn real_rows(m: &DMatrix<f64>) -> Vec<Vec<Real>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| Real(m[(r, c)])).collect())
        .collect()
}

fn vector(v: &[Real]) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|r| r.0))
}

fn matrix(rows: &[Vec<Real>]) -> Result<DMatrix<f64>> {
    let nr = rows.len();
    let nc = rows.first().map(|r| r.len()).unwrap_or(0);
    if rows.iter().any(|r| r.len() != nc) {
        return Err(Error::input("ragged matrix in body spec"));
    }
    Ok(DMatrix::from_fn(nr, nc, |r, c| rows[r][c].0))
}

/// Serializable body spec mirroring the JSON schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum BodySpec {
    Hpoly {
        normals: Vec<Vec<Real>>,
        offsets: Vec<Real>,
        r: Real,
        r_outer: Real,
    },
    Vpoly {
        vertices: Vec<Vec<Real>>,
        r: Real,
        r_outer: Real,
    },
    Ellipsoid {
        center: Vec<Real>,
        shape: Vec<Vec<Real>>,
        r: Real,
        r_outer: Real,
    },
    Lpball {
        p: Real,
        radius: Real,
        dim: usize,
        r: Real,
        r_outer: Real,
    },
    Affine {
        inner: Box<BodySpec>,
        matrix: Vec<Vec<Real>>,
        shift: Vec<Real>,
        r: Real,
        r_outer: Real,
    },
    /// Computed polar form; accepted on input for round-trips.
    Polar {
        inner: Box<BodySpec>,
        r: Real,
        r_outer: Real,
    },
}

impl BodySpec {
    pub fn from_body(body: &ConvexBody) -> Result<BodySpec> {
        let r = Real(body.inner_radius);
        let r_outer = Real(body.outer_radius);
        Ok(match &body.rep {
            Representation::HPolytope(h) => BodySpec::Hpoly {
                normals: h.normals.iter().map(reals).collect(),
                offsets: h.offsets.iter().map(|&b| Real(b)).collect(),
                r,
                r_outer,
            },
            Representation::VPolytope(v) => BodySpec::Vpoly {
                vertices: v.vertices.iter().map(reals).collect(),
                r,
                r_outer,
            },
            Representation::Ellipsoid(e) => BodySpec::Ellipsoid {
                center: reals(&e.center),
                shape: real_rows(&e.shape),
                r,
                r_outer,
            },
            Representation::LpBall(b) => BodySpec::Lpball {
                p: Real(b.p),
                radius: Real(b.radius),
                dim: body.dim,
                r,
                r_outer,
            },
            Representation::Affine(a) => BodySpec::Affine {
                inner: Box::new(BodySpec::from_body(&a.inner)?),
                matrix: real_rows(&a.matrix),
                shift: reals(&a.shift),
                r,
                r_outer,
            },
            Representation::Polar(inner) => BodySpec::Polar {
                inner: Box::new(BodySpec::from_body(inner)?),
                r,
                r_outer,
            },
            Representation::Macbeath(_) => {
                return Err(Error::UnsupportedRepresentation("serializing a Macbeath norm body"))
            }
        })
    }

    pub fn to_body(&self, oracle: OracleConfig) -> Result<ConvexBody> {
        match self {
            BodySpec::Hpoly { normals, offsets, r, r_outer } => ConvexBody::new(
                Representation::HPolytope(HPolytope::new(
                    normals.iter().map(|row| vector(row)).collect(),
                    offsets.iter().map(|b| b.0).collect(),
                )),
                r.0,
                r_outer.0,
                oracle,
            ),
            BodySpec::Vpoly { vertices, r, r_outer } => ConvexBody::new(
                Representation::VPolytope(VPolytope {
                    vertices: vertices.iter().map(|row| vector(row)).collect(),
                }),
                r.0,
                r_outer.0,
                oracle,
            ),
            BodySpec::Ellipsoid { center, shape, r, r_outer } => ConvexBody::new(
                Representation::Ellipsoid(Ellipsoid::new(vector(center), matrix(shape)?)?),
                r.0,
                r_outer.0,
                oracle,
            ),
            BodySpec::Lpball { p, radius, dim, r, r_outer } => {
                if !(p.0 >= 1.0) {
                    return Err(Error::input("lp ball needs p >= 1"));
                }
                if *dim < 2 {
                    return Err(Error::input("dimension must be at least 2"));
                }
                let body = ConvexBody {
                    rep: Representation::LpBall(LpBall { p: p.0, radius: radius.0 }),
                    dim: *dim,
                    inner_radius: r.0,
                    outer_radius: r_outer.0,
                    oracle,
                };
                body.check_centering()?;
                Ok(body)
            }
            BodySpec::Affine { inner, matrix: m, shift, r, r_outer } => {
                let inner_body = inner.to_body(oracle.clone())?;
                let mat = matrix(m)?;
                let inv_matrix = mat
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::input("affine map must be invertible"))?;
                ConvexBody::new(
                    Representation::Affine(AffineBody {
                        inner: Box::new(inner_body),
                        matrix: mat,
                        shift: vector(shift),
                        inv_matrix,
                    }),
                    r.0,
                    r_outer.0,
                    oracle,
                )
            }
            BodySpec::Polar { inner, r, r_outer } => {
                let inner_body = inner.to_body(oracle.clone())?;
                ConvexBody::new(
                    Representation::Polar(Box::new(inner_body)),
                    r.0,
                    r_outer.0,
                    oracle,
                )
            }
        }
    }
}

pub fn body_to_json(body: &ConvexBody) -> Result<String> {
    Ok(serde_json::to_string_pretty(&BodySpec::from_body(body)?)?)
}

pub fn body_from_json(text: &str) -> Result<ConvexBody> {
    let spec: BodySpec = serde_json::from_str(text)?;
    spec.to_body(OracleConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn square() -> ConvexBody {
        ConvexBody::cube(2, 1.0).unwrap()
    }

    fn triangle() -> ConvexBody {
        // (-1,-1), (2,-1), (-1,2); centroid is the origin
        ConvexBody::vpolytope(
            vec![dv(&[-1.0, -1.0]), dv(&[2.0, -1.0]), dv(&[-1.0, 2.0])],
            0.5,
            3.0,
        )
        .unwrap()
    }

    #[test]
    fn membership_examples() {
        let sq = square();
        assert!(sq.membership(&dv(&[0.5, 0.5])).unwrap());
        assert!(!sq.membership(&dv(&[1.5, 0.0])).unwrap());
        // frozen oracle: sign check of the three half-plane inequalities
        // y >= -1, x >= -1, x + y <= 1 at (0.9, 0) -> inside
        assert!(triangle().membership(&dv(&[0.9, 0.0])).unwrap());
        assert!(sq.membership(&dv(&[0.5])).is_err());
    }

    #[test]
    fn gauge_examples() {
        let sq = square();
        assert!((sq.gauge(&dv(&[0.5, 0.0])) - 0.5).abs() < 1e-12);
        assert_eq!(sq.gauge(&dv(&[0.0, 0.0])), 0.0);
        let ellipse = ConvexBody::ellipsoid(
            dv(&[0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.0, 1.0]),
            1.0,
            2.0,
        )
        .unwrap();
        assert!((ellipse.gauge(&dv(&[2.0, 0.0])) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_ray_examples() {
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let p = disk.boundary_ray(&dv(&[0.0, 1.0])).unwrap();
        assert!((p - dv(&[0.0, 1.0])).norm() < 1e-12);
        let sq = square();
        let diag = dv(&[1.0, 1.0]).normalize();
        let p = sq.boundary_ray(&diag).unwrap();
        assert!((p - dv(&[1.0, 1.0])).norm() < 1e-12);
        assert!(disk.boundary_ray(&dv(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn support_examples() {
        let sq = square();
        let (v, plane) = sq.support(&dv(&[1.0, 0.0])).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
        assert!((plane.offset() - 1.0).abs() < 1e-9);
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let (v, _) = disk.support(&dv(&[0.6, 0.8])).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let vp = ConvexBody::vpolytope(
            vec![dv(&[2.0, 0.0]), dv(&[0.0, 3.0]), dv(&[-1.0, -1.0])],
            0.4,
            3.2,
        )
        .unwrap();
        let (v, _) = vp.support(&dv(&[0.0, 1.0])).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
        let apex = vp.support_point(&dv(&[0.0, 1.0])).unwrap();
        assert!((apex - dv(&[0.0, 3.0])).norm() < 1e-9);
    }

    #[test]
    fn polar_examples() {
        // cube <-> cross-polytope
        let sq = square();
        let polar = sq.polar().unwrap();
        let Representation::VPolytope(v) = polar.rep() else {
            panic!("expected V-polytope polar");
        };
        assert_eq!(v.vertices.len(), 4);
        for vert in &v.vertices {
            assert!((vert.norm() - 1.0).abs() < 1e-12);
            assert!((vert[0].abs() - 1.0).abs() < 1e-12 || (vert[1].abs() - 1.0).abs() < 1e-12);
        }
        let ball2 = ConvexBody::ball(2, 2.0).unwrap();
        let half = ball2.polar().unwrap();
        assert!((half.gauge(&dv(&[0.5, 0.0])) - 1.0).abs() < 1e-12);

        // frozen oracle: double polar of the triangle returns its vertices
        let tri = triangle();
        let back = tri.polar().unwrap().polar().unwrap();
        let Representation::VPolytope(v) = back.rep() else {
            panic!("expected V-polytope");
        };
        let mut got: Vec<(f64, f64)> = v.vertices.iter().map(|p| (p[0], p[1])).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let want = [(-1.0, -1.0), (-1.0, 2.0), (2.0, -1.0)];
        assert_eq!(got.len(), 3);
        for (g, w) in got.iter().zip(want.iter()) {
            assert!((g.0 - w.0).abs() < 1e-9 && (g.1 - w.1).abs() < 1e-9);
        }
    }

    #[test]
    fn difference_body_examples() {
        let sqv = ConvexBody::vpolytope(
            vec![dv(&[-1.0, -1.0]), dv(&[1.0, -1.0]), dv(&[1.0, 1.0]), dv(&[-1.0, 1.0])],
            1.0,
            1.5,
        )
        .unwrap();
        let diff = sqv.difference_body().unwrap();
        assert!((diff.gauge(&dv(&[2.0, 0.0])) - 1.0).abs() < 1e-12);
        assert!((diff.gauge(&dv(&[2.0, 2.0])) - 1.0).abs() < 1e-12);

        // frozen oracle (vertex-enumerated Minkowski sum): the difference
        // body of a unit right triangle is a hexagon of area 3, i.e. six
        // times the triangle area
        let tri = ConvexBody::vpolytope(
            vec![dv(&[-0.25, -0.25]), dv(&[0.75, -0.25]), dv(&[-0.25, 0.75])],
            0.1,
            1.2,
        )
        .unwrap();
        let diff = tri.difference_body().unwrap();
        let Representation::VPolytope(v) = diff.rep() else {
            panic!()
        };
        assert_eq!(v.vertices.len(), 6);
        let hull = convex_hull(&v.vertices).unwrap();
        assert!((hull.volume(&v.vertices) - 3.0).abs() < 1e-9);

        // thin box doubles its side lengths
        let thin = ConvexBody::vpolytope(
            vec![dv(&[-1.0, -0.01]), dv(&[1.0, -0.01]), dv(&[1.0, 0.01]), dv(&[-1.0, 0.01])],
            0.01,
            1.1,
        )
        .unwrap();
        let d = thin.difference_body().unwrap();
        assert!((d.gauge(&dv(&[2.0, 0.0])) - 1.0).abs() < 1e-9);
        assert!((d.gauge(&dv(&[0.0, 0.02])) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn unit_ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn lp_ball_gauge_and_membership() {
        let b1 = ConvexBody::lp_ball(2, 1.0, 1.0).unwrap();
        assert!((b1.gauge(&dv(&[0.5, 0.5])) - 1.0).abs() < 1e-12);
        let binf = ConvexBody::lp_ball(2, f64::INFINITY, 1.0).unwrap();
        assert!((binf.gauge(&dv(&[0.5, 1.0])) - 1.0).abs() < 1e-12);
        let b3 = ConvexBody::lp_ball(3, 3.0, 2.0).unwrap();
        let x = dv(&[1.0, 1.0, 1.0]);
        assert!((b3.gauge(&x) - lp_norm(&x, 3.0) / 2.0).abs() < 1e-12);
        // polar round trip: gauge in K* equals support in K
        let p = b3.polar().unwrap();
        assert!((p.gauge(&x) - b3.support_value(&x)).abs() < 1e-9);
    }

    #[test]
    fn affine_image_gauge_via_bisection() {
        // ellipse as affine image of the unit disk: x^2/4 + y^2 <= 1
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let body = ConvexBody::affine_image(disk, m, dv(&[0.0, 0.0]), 1.0, 2.0).unwrap();
        assert!(body.membership(&dv(&[1.9, 0.0])).unwrap());
        assert!(!body.membership(&dv(&[2.1, 0.0])).unwrap());
        assert!((body.gauge(&dv(&[2.0, 0.0])) - 1.0).abs() < 1e-9);
        assert!((body.gauge(&dv(&[0.0, 0.5])) - 0.5).abs() < 1e-9);
        let (v, _) = body.support(&dv(&[1.0, 0.0])).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sampling_moments() {
        let mut rng = crate::rng::root(42);
        let sq = square();
        let n = 100_000;
        let mut mean = dv(&[0.0, 0.0]);
        for _ in 0..n {
            mean += sq.uniform_sample(&mut rng).unwrap();
        }
        mean /= n as f64;
        assert!(mean[0].abs() < 0.02 && mean[1].abs() < 0.02);

        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let mut inside = 0;
        for _ in 0..n {
            let x = disk.uniform_sample(&mut rng).unwrap();
            if x.norm() <= 0.5 {
                inside += 1;
            }
        }
        let frac = inside as f64 / n as f64;
        assert!((frac - 0.25).abs() < 0.01, "frac {frac}");
    }

    #[test]
    fn triangle_centroid_oracle() {
        // independent oracle: centroid of a simplex is the vertex average
        let tri = triangle();
        let exact = dv(&[0.0, 0.0]); // ((-1+2-1)/3, (-1-1+2)/3)
        let mut rng = crate::rng::root(7);
        let c = tri.estimate_centroid(&mut rng, 100_000).unwrap();
        assert!((c - exact).norm() < 0.02);
    }

    #[test]
    fn volume_and_kb() {
        let mut rng = crate::rng::root(9);
        let sq = square();
        let (vol, se) = sq.estimate_volume(&mut rng, 50_000);
        assert!((vol - 4.0).abs() < 3.0 * se.max(1e-6) + 1e-9);
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let (vol, se) = disk.estimate_volume(&mut rng, 100_000);
        assert!((vol - std::f64::consts::PI).abs() < 3.0 * se);
        // symmetric body: ratio 1
        let kb = sq.kb_ratio(&mut rng, 20_000).unwrap();
        assert!(kb > 0.999);
        // triangle about centroid: exact ratio 2/3
        let tri = triangle();
        let kb = tri.kb_ratio(&mut rng, 100_000).unwrap();
        assert!((kb - 2.0 / 3.0).abs() < 0.01, "kb {kb}");
        // square with origin near a corner: intersection is the box
        // [-0.1,0.1]^2, exact ratio 0.04/4 = 0.01
        let skew = ConvexBody::hpolytope(
            vec![dv(&[1.0, 0.0]), dv(&[-1.0, 0.0]), dv(&[0.0, 1.0]), dv(&[0.0, -1.0])],
            vec![1.9, 0.1, 1.9, 0.1],
            0.1,
            1.9 * 1.5,
        )
        .unwrap();
        let kb = skew.kb_ratio(&mut rng, 50_000).unwrap();
        assert!((kb - 0.01).abs() < 0.005, "kb {kb}");
    }

    #[test]
    fn ellipse_centroid_offset() {
        let shifted = ConvexBody::ellipsoid(
            dv(&[0.3, 0.0]),
            DMatrix::identity(2, 2),
            0.7,
            1.3,
        )
        .unwrap();
        let mut rng = crate::rng::root(13);
        let c = shifted.estimate_centroid(&mut rng, 100_000).unwrap();
        assert!((c - dv(&[0.3, 0.0])).norm() < 0.02);
    }

    #[test]
    fn body_spec_round_trip() {
        let bodies = vec![
            square(),
            triangle(),
            ConvexBody::ball(2, 1.0).unwrap(),
            ConvexBody::lp_ball(2, 1.0, 2.0).unwrap(),
        ];
        for b in bodies {
            let text = body_to_json(&b).unwrap();
            let back = body_from_json(&text).unwrap();
            let text2 = body_to_json(&back).unwrap();
            assert_eq!(text, text2);
            let mut rng = crate::rng::root(1);
            for _ in 0..50 {
                let x = crate::rng::box_point(&mut rng, 2, b.outer_radius());
                assert_eq!(b.contains_unchecked(&x), back.contains_unchecked(&x));
            }
        }
        // decimal strings parse too
        let spec = r#"{"type":"lpball","p":"inf","radius":"1.0","dim":2,"r":"1.0","r_outer":"1.4142135623730951"}"#;
        let b = body_from_json(spec).unwrap();
        assert!((b.gauge(&dv(&[1.0, 1.0])) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centering_validation_rejects_bad_radii() {
        let err = ConvexBody::hpolytope(
            vec![dv(&[1.0, 0.0]), dv(&[-1.0, 0.0]), dv(&[0.0, 1.0]), dv(&[0.0, -1.0])],
            vec![1.0; 4],
            1.2, // inner radius exceeds the true inradius
            2.0,
        );
        assert!(err.is_err());
        let err = ConvexBody::hpolytope(
            vec![dv(&[1.0, 0.0]), dv(&[-1.0, 0.0]), dv(&[0.0, 1.0]), dv(&[0.0, -1.0])],
            vec![1.0, -0.5, 1.0, 1.0],
            0.2,
            2.0,
        );
        assert!(err.is_err(), "negative offset must be rejected");
    }

    #[test]
    fn translate_to_origin_recenters() {
        let sq = square();
        let moved = sq.translate_to_origin(&dv(&[0.5, 0.0])).unwrap();
        assert!((moved.gauge(&dv(&[0.5, 0.0])) - 1.0).abs() < 1e-12);
        assert!((moved.inner_radius() - 0.5).abs() < 1e-12);
        let ball = ConvexBody::ball(2, 0.8).unwrap();
        let shifted = ConvexBody::ellipsoid(
            dv(&[0.2, 0.1]),
            DMatrix::identity(2, 2) / 0.64,
            0.5,
            1.1,
        )
        .unwrap();
        let back = shifted.translate_to_origin(&dv(&[0.2, 0.1])).unwrap();
        for dir in [dv(&[1.0, 0.0]), dv(&[0.3, -0.4])] {
            assert!((back.gauge(&dir) - ball.gauge(&dir)).abs() < 1e-9);
        }
    }

    #[test]
    fn bodies_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ConvexBody>();
        assert_send_sync::<Hyperplane>();
        assert_send_sync::<crate::macbeath::Covering>();
    }

    #[test]
    fn macbeath_norm_body_gauge() {
        // square ambient, center (0.5, 0): M^1 is [0,1]x[-1,1], so the
        // origin-centered norm body is [-0.5,0.5]x[-1,1]
        let sq = square();
        let m = ConvexBody::macbeath_norm_body(&sq, &dv(&[0.5, 0.0]), 1.0).unwrap();
        assert!(m.membership(&dv(&[0.49, 0.9])).unwrap());
        assert!(!m.membership(&dv(&[0.51, 0.0])).unwrap());
        assert!((m.gauge(&dv(&[0.5, 0.0])) - 1.0).abs() < 1e-12);
        assert!((m.gauge(&dv(&[0.0, 1.0])) - 1.0).abs() < 1e-12);
        // ellipsoid parent goes through the closed-form quadratic path
        let disk = ConvexBody::ball(2, 1.0).unwrap();
        let m = ConvexBody::macbeath_norm_body(&disk, &dv(&[0.5, 0.0]), 1.0).unwrap();
        assert!((m.gauge(&dv(&[0.5, 0.0])) - 1.0).abs() < 1e-9);
        let y = dv(&[0.2, 0.3]);
        assert!((m.gauge(&y) - m.gauge(&(-y.clone()))).abs() < 1e-12);
    }
}
