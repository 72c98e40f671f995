//! Macbeath regions, MNets and coverings.
//!
//! The Macbeath region of `x` in `K` at scale `lambda` is
//! `M^lambda(x) = x + lambda ((K - x) cap (x - K))`, the largest centrally
//! symmetric body centered at `x` inside `K`, scaled about `x`. Shrunken
//! Macbeath regions behave like metric balls: a maximal set of points with
//! disjoint `1/(4c)`-regions (an MNet) yields a covering by the `1/c`-regions
//! whose `c`-expansions stay inside the ambient body.
//!
//! Disjointness and containment are decided exactly for H-polytope ambients
//! (LP feasibility / per-facet maximization). Other ambients use a
//! conservative scheme: a common point search by alternating radial clamps,
//! and separation certificates built from the support functions of the two
//! defining pieces `x + lambda(K - x)` and `x + lambda(x - K)`. When neither
//! route decides, the check reports "not disjoint".

use crate::bodies::{BodySpec, ConvexBody, HPolytope, OracleConfig};
use crate::lp::{self, LpOutcome};
use crate::{Error, Result};
use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// View of a Macbeath region `M^scale(center)` of an ambient body.
#[derive(Debug, Clone)]
pub struct MacbeathRegion<'a> {
    pub body: &'a ConvexBody,
    pub center: DVector<f64>,
    pub scale: f64,
}

impl<'a> MacbeathRegion<'a> {
    pub fn new(body: &'a ConvexBody, center: DVector<f64>, scale: f64) -> Self {
        assert!(scale > 0.0);
        MacbeathRegion { body, center, scale }
    }

    /// Gauge of `y - center` in the region; <= 1 means membership.
    pub fn gauge_at(&self, y: &DVector<f64>) -> f64 {
        let w = (y - &self.center) / self.scale;
        let g1 = self.body.gauge_from(&self.center, &w);
        let g2 = self.body.gauge_from(&self.center, &(-w));
        g1.max(g2)
    }

    /// Exact H-form when the ambient has one.
    pub fn as_hpoly(&self) -> Option<HPolytope> {
        self.body
            .as_hpolytope()
            .map(|h| mac_as_hpoly(&h, &self.center, self.scale))
    }

    /// Half-widths of an axis-aligned bounding box about the center, from
    /// the support functions of the two defining pieces.
    pub fn bounding_halfwidths(&self) -> DVector<f64> {
        let n = self.body.dim();
        DVector::from_fn(n, |j, _| {
            let mut e = DVector::zeros(n);
            e[j] = 1.0;
            let up = self.piece_support_bound(&e);
            e[j] = -1.0;
            let dn = self.piece_support_bound(&e);
            up.max(dn).max(1e-15)
        })
    }

    /// Upper bound on `sup over M of <u, y - center>` via the two pieces.
    fn piece_support_bound(&self, u: &DVector<f64>) -> f64 {
        let cx = u.dot(&self.center);
        let sup_fwd = self.body.support_value(u);
        let sup_bwd = self.body.support_value(&(-u.clone()));
        // piece x + s(K - x):  s (sup_K(u) - <u,x>);  piece x + s(x - K):  s (<u,x> + sup_K(-u))
        let a = self.scale * (sup_fwd - cx);
        let b = self.scale * (cx + sup_bwd);
        a.min(b)
    }

    /// Lower bound on `inf over M of <u, y - center>` (= -bound of -u).
    fn piece_inf_bound(&self, u: &DVector<f64>) -> f64 {
        -self.piece_support_bound(&(-u.clone()))
    }

    /// Ball of this radius about the center is inside the region.
    pub fn inner_ball_radius(&self) -> f64 {
        let g = self.body.gauge(&self.center);
        self.scale * (1.0 - g).max(0.0) * self.body.inner_radius()
    }

    /// The region is inside the ball of this radius about the center.
    pub fn outer_ball_radius(&self) -> f64 {
        self.scale * (self.body.outer_radius() + self.center.norm())
    }

    /// Radial clamp of `y` into the region (toward the center).
    fn clamp(&self, y: &DVector<f64>) -> DVector<f64> {
        let g = self.gauge_at(y);
        if g <= 1.0 {
            y.clone()
        } else {
            &self.center + (y - &self.center) / g
        }
    }

    /// Rejection sample from the bounding box, hit-and-run fallback.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<DVector<f64>> {
        let n = self.body.dim();
        let half = self.bounding_halfwidths();
        let budget = 50_000usize;
        for _ in 0..budget {
            let y = &self.center
                + DVector::from_fn(n, |j, _| rng.random_range(-half[j]..=half[j]));
            if self.gauge_at(&y) <= 1.0 {
                return Ok(y);
            }
        }
        // hit-and-run inside the region from its center
        let mut x = self.center.clone();
        let steps = self.body.oracle().burn_in_factor * n * n;
        for _ in 0..steps {
            let u = crate::rng::unit_direction(rng, n);
            let t_pos = self.chord(&x, &u);
            let t_neg = self.chord(&x, &(-u.clone()));
            let t = rng.random_range(-t_neg..=t_pos);
            x += &u * (t * (1.0 - 1e-12));
        }
        Ok(x)
    }

    fn chord(&self, y: &DVector<f64>, u: &DVector<f64>) -> f64 {
        // largest t with y + t u in the region, via bisection on the gauge
        let hi0 = 2.0 * self.outer_ball_radius() / u.norm();
        let inside = |t: f64| {
            let p = y + u * t;
            self.gauge_at(&p) <= 1.0
        };
        if inside(hi0) {
            return hi0;
        }
        let (mut lo, mut hi) = (0.0, hi0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if inside(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Membership `y in M^lambda(x)`: both reflected pullbacks lie in the body.
pub fn mac_membership(region: &MacbeathRegion<'_>, y: &DVector<f64>) -> bool {
    let w = (y - &region.center) / region.scale;
    let fwd = &region.center + &w;
    let bwd = &region.center - &w;
    region.body.contains_unchecked(&fwd) && region.body.contains_unchecked(&bwd)
}

/// Exact H-form of `M^lambda(x)` for an H-polytope ambient: each facet
/// `<a, y> <= b` contributes `<a, y> <= lb + (1-l)<a, x>` and
/// `<-a, y> <= lb - (1+l)<a, x>`.
pub fn mac_as_hpoly(body: &HPolytope, x: &DVector<f64>, lambda: f64) -> HPolytope {
    let mut normals = Vec::with_capacity(2 * body.normals.len());
    let mut offsets = Vec::with_capacity(2 * body.normals.len());
    for (a, &b) in body.normals.iter().zip(&body.offsets) {
        let ax = a.dot(x);
        normals.push(a.clone());
        offsets.push(lambda * b + (1.0 - lambda) * ax);
        normals.push(-a.clone());
        offsets.push(lambda * b - (1.0 + lambda) * ax);
    }
    HPolytope::new(normals, offsets)
}

/// Disjointness of two Macbeath regions of the same ambient body.
///
/// Exact (LP feasibility, closed-region convention) for H-polytope
/// ambients. Otherwise conservative: certified separation or a found
/// common point decide; ambiguity reports "not disjoint".
pub fn mac_disjoint(m1: &MacbeathRegion<'_>, m2: &MacbeathRegion<'_>) -> bool {
    debug_assert!(std::ptr::eq(m1.body, m2.body) || m1.body.dim() == m2.body.dim());
    // ball screens
    let d = (&m1.center - &m2.center).norm();
    if d > m1.outer_ball_radius() + m2.outer_ball_radius() {
        return true;
    }
    if d < m1.inner_ball_radius() + m2.inner_ball_radius() {
        return false;
    }
    if let (Some(h1), Some(h2)) = (m1.as_hpoly(), m2.as_hpoly()) {
        let mut cons = h1.constraints();
        cons.extend(h2.constraints());
        return lp::feasible_point(&cons).is_none();
    }
    // common-point search: alternating radial clamps
    let mut p = m1.center.clone();
    for _ in 0..64 {
        let q = m2.clamp(&p);
        if m1.gauge_at(&q) <= 1.0 {
            return false;
        }
        let p_next = m1.clamp(&q);
        if m2.gauge_at(&p_next) <= 1.0 {
            return false;
        }
        if (&p_next - &p).norm() < 1e-12 {
            p = p_next;
            break;
        }
        p = p_next;
    }
    // separation certificate from piece supports
    let mut dirs = Vec::new();
    if d > 1e-12 {
        dirs.push((&m2.center - &m1.center) / d);
    }
    let q = m2.clamp(&p);
    let gap = (&q - &p).norm();
    if gap > 1e-12 {
        dirs.push((&q - &p) / gap);
    }
    for u in dirs {
        let ub1 = u.dot(&m1.center) + m1.piece_support_bound(&u);
        let lb2 = u.dot(&m2.center) + m2.piece_inf_bound(&u);
        if ub1 < lb2 - 1e-12 {
            return true;
        }
        let ub2 = u.dot(&m2.center) + m2.piece_support_bound(&u);
        let lb1 = u.dot(&m1.center) + m1.piece_inf_bound(&u);
        if ub2 < lb1 - 1e-12 {
            return true;
        }
    }
    // undecided: conservative
    false
}

/// Containment `inner <= outer`; exact per-facet LP for H-polytope
/// ambients, sampled otherwise.
pub fn mac_contains<R: Rng>(
    outer: &MacbeathRegion<'_>,
    inner: &MacbeathRegion<'_>,
    rng: &mut R,
) -> Result<bool> {
    if let (Some(ho), Some(hi)) = (outer.as_hpoly(), inner.as_hpoly()) {
        let scale = ho.offsets.iter().fold(1.0f64, |m, &b| m.max(b.abs()));
        let inner_cons = hi.constraints();
        for (g, &h) in ho.normals.iter().zip(&ho.offsets) {
            match lp::maximize(g, &inner_cons) {
                LpOutcome::Optimal { value, .. } => {
                    if value > h + 1e-9 * scale.max(1.0) {
                        return Ok(false);
                    }
                }
                LpOutcome::Infeasible => return Ok(true), // empty inner region
                LpOutcome::Unbounded => return Err(Error::input("unbounded macbeath region")),
            }
        }
        return Ok(true);
    }
    for _ in 0..1_000 {
        let y = inner.sample(rng)?;
        if outer.gauge_at(&y) > 1.0 + 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A maximal (relative to the candidate stream) set of points whose
/// `1/(4c)`-scaled regions are pairwise disjoint.
#[derive(Debug, Clone)]
pub struct MNet {
    pub ambient: ConvexBody,
    pub centers: Vec<DVector<f64>>,
    pub c: f64,
}

impl MNet {
    pub fn packing_scale(&self) -> f64 {
        1.0 / (4.0 * self.c)
    }

    pub fn covering_scale(&self) -> f64 {
        1.0 / self.c
    }
}

/// Greedy MNet over a finite candidate stream: accept a candidate iff its
/// shrunken region is disjoint from all accepted ones. Returns the net and
/// the number of candidates skipped for lying outside the ambient body.
pub fn build_mnet(
    ambient: &ConvexBody,
    candidates: impl IntoIterator<Item = DVector<f64>>,
    c: f64,
) -> Result<(MNet, usize)> {
    if c < 2.0 {
        return Err(Error::precondition("MNet requires c >= 2"));
    }
    let lambda = 1.0 / (4.0 * c);
    let mut centers: Vec<DVector<f64>> = Vec::new();
    let mut skipped = 0usize;
    for cand in candidates {
        if ambient.gauge(&cand) >= 1.0 {
            skipped += 1;
            continue;
        }
        let region = MacbeathRegion::new(ambient, cand.clone(), lambda);
        let disjoint = centers.iter().all(|x| {
            let other = MacbeathRegion::new(ambient, x.clone(), lambda);
            mac_disjoint(&region, &other)
        });
        if disjoint {
            centers.push(cand);
        }
    }
    Ok((
        MNet {
            ambient: ambient.clone(),
            centers,
            c,
        },
        skipped,
    ))
}

/// One element of a covering: the Macbeath region `M^scale(center)` of the
/// ambient body, tagged with the layer that produced it.
#[derive(Debug, Clone)]
pub struct CoverElement {
    pub center: DVector<f64>,
    pub scale: f64,
    pub layer: usize,
}

/// A `(c, eps)`-covering of `target` by Macbeath regions of `ambient`.
#[derive(Debug, Clone)]
pub struct Covering {
    pub ambient: ConvexBody,
    pub target: ConvexBody,
    pub c: f64,
    pub eps: f64,
    pub elements: Vec<CoverElement>,
    /// Present when the covering came from an MNet; enables the packing check.
    pub packing_scale: Option<f64>,
}

impl Covering {
    pub fn element_region<'a>(&'a self, i: usize) -> MacbeathRegion<'a> {
        let e = &self.elements[i];
        MacbeathRegion::new(&self.ambient, e.center.clone(), e.scale)
    }

    /// Membership of `x` in element `i` without constructing a region view;
    /// `scratch` holds the reflected pullbacks (hot path of coverage
    /// verification).
    fn element_contains(&self, i: usize, x: &DVector<f64>, scratch: &mut (DVector<f64>, DVector<f64>)) -> bool {
        let e = &self.elements[i];
        let (fwd, bwd) = scratch;
        for j in 0..x.len() {
            let w = (x[j] - e.center[j]) / e.scale;
            fwd[j] = e.center[j] + w;
            bwd[j] = e.center[j] - w;
        }
        self.ambient.contains_unchecked(fwd) && self.ambient.contains_unchecked(bwd)
    }
}

/// Covering elements `M^{1/c}(y)` for hitting-set points `y`; points
/// outside the ambient interior are rejected. Tags carry the layer index.
pub fn hitting_to_cover(
    ambient: &ConvexBody,
    hits: &[(DVector<f64>, usize)],
    c: f64,
    eps: f64,
) -> Result<(Covering, usize)> {
    if c < 2.0 {
        return Err(Error::precondition("covering requires c >= 2"));
    }
    let scale = 1.0 / c;
    let mut elements = Vec::with_capacity(hits.len());
    let mut rejected = 0usize;
    for (y, layer) in hits {
        if ambient.gauge(y) >= 1.0 {
            rejected += 1;
            continue;
        }
        elements.push(CoverElement {
            center: y.clone(),
            scale,
            layer: *layer,
        });
    }
    let target = ambient.scale(1.0 / (1.0 + eps));
    Ok((
        Covering {
            ambient: ambient.clone(),
            target,
            c,
            eps,
            elements,
            packing_scale: None,
        },
        rejected,
    ))
}

impl MNet {
    /// The `1/c`-scaled covering associated with this net.
    pub fn to_covering(&self, eps: f64) -> Covering {
        let elements = self
            .centers
            .iter()
            .map(|x| CoverElement {
                center: x.clone(),
                scale: self.covering_scale(),
                layer: 0,
            })
            .collect();
        Covering {
            ambient: self.ambient.clone(),
            target: self.ambient.scale(1.0 / (1.0 + eps)),
            c: self.c,
            eps,
            elements,
            packing_scale: Some(self.packing_scale()),
        }
    }
}

/// Verification report for a covering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringReport {
    pub samples: usize,
    pub coverage_rate: f64,
    pub coverage_target: f64,
    pub coverage_pass: bool,
    pub buffering_pass: bool,
    /// Worst gauge of a probed expansion boundary point in the ambient
    /// body; > 1 indicates a violation.
    pub buffering_worst: f64,
    /// None when no MNet provenance is attached.
    pub packing_pass: Option<bool>,
    pub element_count: usize,
    pub layer_histogram: Vec<usize>,
    pub uncovered_witness: Option<Vec<f64>>,
}

impl CoveringReport {
    pub fn pass(&self) -> bool {
        self.coverage_pass && self.buffering_pass && self.packing_pass.unwrap_or(true)
    }
}

/// Checks coverage of the target (sampled), buffering of every element's
/// `c`-expansion (exact for expansions that stay Macbeath-contained, LP for
/// H-polytope ambients otherwise, boundary probes always), and packing when
/// MNet provenance is present.
pub fn verify_covering<R: Rng>(
    cov: &Covering,
    rng: &mut R,
    samples: usize,
    coverage_target: f64,
) -> Result<CoveringReport> {
    assert!(samples >= 1_000, "verification needs >= 1e3 samples");
    let n = cov.ambient.dim();

    // (i) coverage of the target: scan layer buckets wide-first with a
    // bounding-ball quick reject per element
    let max_layer = cov.elements.iter().map(|e| e.layer).max().unwrap_or(0);
    let mut histogram = vec![0usize; max_layer + 1];
    for e in &cov.elements {
        histogram[e.layer] += 1;
    }
    let mut order: Vec<usize> = (0..cov.elements.len()).collect();
    order.sort_by(|&a, &b| {
        cov.elements[b]
            .layer
            .cmp(&cov.elements[a].layer)
            .then(a.cmp(&b))
    });
    let reach: Vec<f64> = (0..cov.elements.len())
        .map(|i| cov.element_region(i).outer_ball_radius())
        .collect();

    let mut covered = 0usize;
    let mut witness: Option<Vec<f64>> = None;
    let mut scratch = (DVector::zeros(n), DVector::zeros(n));
    for _ in 0..samples {
        let x = cov.target.uniform_sample(rng)?;
        let mut hit = false;
        for &i in &order {
            let e = &cov.elements[i];
            let mut dist2 = 0.0;
            for j in 0..n {
                let d = x[j] - e.center[j];
                dist2 += d * d;
            }
            if dist2 > reach[i] * reach[i] {
                continue;
            }
            if cov.element_contains(i, &x, &mut scratch) {
                hit = true;
                break;
            }
        }
        if hit {
            covered += 1;
        } else if witness.is_none() {
            witness = Some(x.iter().copied().collect());
        }
    }
    let coverage_rate = covered as f64 / samples as f64;

    // (ii) buffering: expansions with c*scale <= 1 are Macbeath regions and
    // sit inside the ambient by definition; probe boundary directions to
    // catch construction bugs, and run the exact LP route when c*scale > 1.
    let mut buffering_pass = true;
    let mut buffering_worst = 0.0f64;
    let mut probe_rng = crate::rng::derive(0xb0ff, &[samples as u64]);
    let probe_dirs: Vec<DVector<f64>> = (0..16)
        .map(|_| crate::rng::unit_direction(&mut probe_rng, n))
        .collect();
    for e in &cov.elements {
        let exp_scale = cov.c * e.scale;
        let region = MacbeathRegion::new(&cov.ambient, e.center.clone(), exp_scale);
        for u in &probe_dirs {
            let g = region.body.gauge_from(&region.center, &(u / region.scale));
            if g <= 1e-300 {
                continue;
            }
            let boundary = &e.center + u * ((1.0 - 1e-9) / g);
            let amb_gauge = cov.ambient.gauge(&boundary);
            buffering_worst = buffering_worst.max(amb_gauge);
            if amb_gauge > 1.0 + 1e-9 {
                buffering_pass = false;
            }
        }
        if exp_scale > 1.0 + 1e-12 {
            match cov.ambient.as_hpolytope() {
                Some(amb_h) => {
                    let mac = mac_as_hpoly(&amb_h, &e.center, exp_scale);
                    let cons = mac.constraints();
                    for (a, &b) in amb_h.normals.iter().zip(&amb_h.offsets) {
                        if let LpOutcome::Optimal { value, .. } = lp::maximize(a, &cons) {
                            if value > b + 1e-9 * b.abs().max(1.0) {
                                buffering_pass = false;
                            }
                        }
                    }
                }
                None => {
                    for _ in 0..200 {
                        let y = region.sample(rng)?;
                        let g = cov.ambient.gauge(&y);
                        buffering_worst = buffering_worst.max(g);
                        if g > 1.0 + 1e-9 {
                            buffering_pass = false;
                        }
                    }
                }
            }
        }
    }

    // (iii) packing, only with MNet provenance
    let packing_pass = cov.packing_scale.map(|ps| {
        let regions: Vec<MacbeathRegion<'_>> = cov
            .elements
            .iter()
            .map(|e| MacbeathRegion::new(&cov.ambient, e.center.clone(), ps))
            .collect();
        for i in 0..regions.len() {
            for j in (i + 1)..regions.len() {
                if !mac_disjoint(&regions[i], &regions[j]) {
                    return false;
                }
            }
        }
        true
    });

    Ok(CoveringReport {
        samples,
        coverage_rate,
        coverage_target,
        coverage_pass: coverage_rate >= coverage_target,
        buffering_pass,
        buffering_worst,
        packing_pass,
        element_count: cov.elements.len(),
        layer_histogram: histogram,
        uncovered_witness: witness,
    })
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverElementJson {
    pub center: Vec<crate::bodies::Real>,
    pub scale: crate::bodies::Real,
    pub layer: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringJson {
    pub ambient: BodySpec,
    pub c: crate::bodies::Real,
    pub eps: crate::bodies::Real,
    pub elements: Vec<CoverElementJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub packing_scale: Option<crate::bodies::Real>,
}

impl CoveringJson {
    pub fn from_covering(cov: &Covering) -> Result<Self> {
        Ok(CoveringJson {
            ambient: BodySpec::from_body(&cov.ambient)?,
            c: crate::bodies::Real(cov.c),
            eps: crate::bodies::Real(cov.eps),
            elements: cov
                .elements
                .iter()
                .map(|e| CoverElementJson {
                    center: e.center.iter().map(|&v| crate::bodies::Real(v)).collect(),
                    scale: crate::bodies::Real(e.scale),
                    layer: e.layer,
                })
                .collect(),
            packing_scale: cov.packing_scale.map(crate::bodies::Real),
        })
    }

    pub fn to_covering(&self, oracle: OracleConfig) -> Result<Covering> {
        let ambient = self.ambient.to_body(oracle)?;
        let eps = self.eps.0;
        if !(eps > 0.0) {
            return Err(Error::input("covering eps must be positive"));
        }
        let target = ambient.scale(1.0 / (1.0 + eps));
        Ok(Covering {
            target,
            ambient,
            c: self.c.0,
            eps,
            elements: self
                .elements
                .iter()
                .map(|e| CoverElement {
                    center: DVector::from_iterator(e.center.len(), e.center.iter().map(|r| r.0)),
                    scale: e.scale.0,
                    layer: e.layer,
                })
                .collect(),
            packing_scale: self.packing_scale.map(|r| r.0),
        })
    }
}

pub fn covering_to_json(cov: &Covering) -> Result<String> {
    Ok(serde_json::to_string_pretty(&CoveringJson::from_covering(cov)?)?)
}

pub fn covering_from_json(text: &str) -> Result<Covering> {
    let spec: CoveringJson = serde_json::from_str(text)?;
    spec.to_covering(OracleConfig::default())
}
