//! Lattices and covering-boosted closest vector / integer programming.
//!
//! The desk-scale baseline is an exact enumerator (Babai start plus a
//! certified coefficient box), which doubles as the 2-gap inner solver of
//! the boosting pipeline: a verified `(2, eps)`-covering of the norm body
//! turns gap queries under the full norm into gap queries under the
//! centrally symmetric element norms, and a multiplicative binary search
//! over the radius yields a `(1+eps)`-approximate closest vector.

use crate::bodies::{BodySpec, ConvexBody, OracleConfig, Real};
use crate::enumerate::{enumerate_cover_verified, EnumeratorConfig};
use crate::macbeath::{Covering, CoveringReport};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Integer-combination lattice of a nonsingular basis (columns).
#[derive(Debug, Clone)]
pub struct Lattice {
    basis: DMatrix<f64>,
    inv_basis: DMatrix<f64>,
    inv_row_norms: Vec<f64>,
    det: f64,
}

impl Lattice {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if basis.nrows() != basis.ncols() {
            return Err(Error::input("lattice basis must be square"));
        }
        let det = basis.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::input("lattice basis is singular"));
        }
        let inv_basis = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::input("lattice basis is singular"))?;
        let inv_row_norms = (0..basis.ncols()).map(|i| inv_basis.row(i).norm()).collect();
        Ok(Lattice {
            basis,
            inv_basis,
            inv_row_norms,
            det,
        })
    }

    /// Standard integer lattice Z^n.
    pub fn integer(dim: usize) -> Self {
        Lattice::new(DMatrix::identity(dim, dim)).expect("identity is nonsingular")
    }

    /// Basis from row vectors (each row one basis vector).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|row| row.len() != n) {
            return Err(Error::input("lattice basis must be square"));
        }
        Lattice::new(DMatrix::from_fn(n, n, |r, c| rows[c][r]))
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn determinant(&self) -> f64 {
        self.det
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn point(&self, coeffs: &[i64]) -> DVector<f64> {
        let z = DVector::from_iterator(coeffs.len(), coeffs.iter().map(|&c| c as f64));
        &self.basis * z
    }

    /// Real coefficients of an arbitrary point.
    pub fn coefficients(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.inv_basis * x
    }

    fn inv_row_norms(&self) -> &[f64] {
        &self.inv_row_norms
    }
}

/// A CVP instance: find the lattice vector closest to `target` under the
/// gauge of `norm_body`.
#[derive(Debug, Clone)]
pub struct CvpInstance {
    pub lattice: Lattice,
    pub target: DVector<f64>,
    pub norm_body: ConvexBody,
    pub eps: f64,
}

#[derive(Debug, Clone)]
pub struct CvpSolution {
    pub point: DVector<f64>,
    pub coefficients: Vec<i64>,
    pub distance: f64,
}

/// Gap answer: a lattice vector within the stated bound, or a certificate
/// that none lies within the certified radius.
#[derive(Debug, Clone)]
pub enum GapCvpAnswer {
    Found {
        point: DVector<f64>,
        coefficients: Vec<i64>,
        bound: f64,
    },
    Empty {
        certified_radius: f64,
    },
}

const ENUM_BUDGET: u64 = 40_000_000;

/// Enumerates lattice points within gauge distance `radius_cap` of
/// `target`, returning the closest (coefficient-lexicographic tie-break),
/// or the Babai point when the cap excludes everything.
fn enumerate_best(
    lattice: &Lattice,
    target: &DVector<f64>,
    norm: &ConvexBody,
    radius_cap: Option<f64>,
) -> Result<Option<CvpSolution>> {
    let n = lattice.dim();
    let y_star = lattice.coefficients(target);
    let rounded: Vec<i64> = y_star.iter().map(|v| v.round() as i64).collect();
    let babai = lattice.point(&rounded);
    let babai_dist = norm.gauge(&(&babai - target));
    let radius = match radius_cap {
        Some(cap) => cap.min(babai_dist).max(0.0),
        None => babai_dist,
    };
    if radius == 0.0 && babai_dist == 0.0 {
        return Ok(Some(CvpSolution {
            point: babai,
            coefficients: rounded,
            distance: 0.0,
        }));
    }
    // points with gauge <= radius lie in radius * r' Euclidean ball
    let eucl = radius * norm.outer_radius();
    let rows = lattice.inv_row_norms();
    let mut lows = Vec::with_capacity(n);
    let mut highs = Vec::with_capacity(n);
    let mut total: u64 = 1;
    for i in 0..n {
        let half = eucl * rows[i] + 1e-9;
        let lo = (y_star[i] - half).ceil() as i64;
        let hi = (y_star[i] + half).floor() as i64;
        if hi < lo {
            // empty box: only the cap can exclude the babai point
            return Ok(match radius_cap {
                Some(cap) if babai_dist <= cap => Some(CvpSolution {
                    point: babai,
                    coefficients: rounded,
                    distance: babai_dist,
                }),
                Some(_) => None,
                None => Some(CvpSolution {
                    point: babai,
                    coefficients: rounded,
                    distance: babai_dist,
                }),
            });
        }
        total = total.saturating_mul((hi - lo + 1) as u64);
        lows.push(lo);
        highs.push(hi);
    }
    if total > ENUM_BUDGET {
        return Err(Error::BudgetExceeded(format!(
            "cvp enumeration box of {total} points"
        )));
    }
    let mut best: Option<CvpSolution> = None;
    let mut z = lows.clone();
    // incremental point updates: bumping coordinate i adds basis column i
    let columns: Vec<DVector<f64>> = (0..n).map(|i| lattice.basis.column(i).into_owned()).collect();
    let mut point = lattice.point(&z);
    let mut diff = &point - target;
    'outer: loop {
        let dist = norm.gauge(&diff);
        let acceptable = radius_cap.is_none_or(|cap| dist <= cap + 1e-12);
        if acceptable {
            let better = match &best {
                None => true,
                Some(b) => {
                    dist < b.distance - 1e-12
                        || ((dist - b.distance).abs() <= 1e-12 && z < b.coefficients)
                }
            };
            if better {
                best = Some(CvpSolution {
                    point: point.clone(),
                    coefficients: z.clone(),
                    distance: dist,
                });
            }
        }
        for i in 0..n {
            z[i] += 1;
            if z[i] <= highs[i] {
                point += &columns[i];
                diff += &columns[i];
                continue 'outer;
            }
            z[i] = lows[i];
            let span = (highs[i] - lows[i]) as f64;
            point.axpy(-span, &columns[i], 1.0);
            diff.axpy(-span, &columns[i], 1.0);
        }
        break;
    }
    // babai point may sit outside the box when the cap shrank it
    if let Some(cap) = radius_cap {
        if babai_dist <= cap + 1e-12 {
            let better = match &best {
                None => true,
                Some(b) => babai_dist < b.distance - 1e-12,
            };
            if better {
                best = Some(CvpSolution {
                    point: babai,
                    coefficients: rounded,
                    distance: babai_dist,
                });
            }
        }
    }
    Ok(best)
}

/// Exact CVP by certified enumeration; refuses dimensions above 4.
pub fn exact_cvp(inst: &CvpInstance) -> Result<CvpSolution> {
    if inst.lattice.dim() > 4 {
        return Err(Error::BudgetExceeded(
            "exact enumeration is limited to n <= 4".into(),
        ));
    }
    enumerate_best(&inst.lattice, &inst.target, &inst.norm_body, None)?
        .ok_or_else(|| Error::input("unreachable: unconstrained search always finds babai"))
}

/// Inner solver interface of the boosting reduction: report a lattice
/// vector within twice the query radius whenever one lies within it.
pub trait TwoGapSolver {
    fn query(
        &self,
        lattice: &Lattice,
        target: &DVector<f64>,
        norm: &ConvexBody,
        radius: f64,
    ) -> Result<Option<CvpSolution>>;
}

/// The exact enumerator used as the inner solver (it exceeds the 2-gap
/// contract by returning the true minimizer within `2 * radius`).
#[derive(Debug, Default)]
pub struct ExactEnumerationSolver;

impl TwoGapSolver for ExactEnumerationSolver {
    fn query(
        &self,
        lattice: &Lattice,
        target: &DVector<f64>,
        norm: &ConvexBody,
        radius: f64,
    ) -> Result<Option<CvpSolution>> {
        enumerate_best(lattice, target, norm, Some(2.0 * radius))
    }
}

/// A covering that passed verification, with the per-element norm bodies
/// precomputed for gap queries.
pub struct VerifiedCovering {
    pub covering: Covering,
    pub report: CoveringReport,
    norm_bodies: Vec<ConvexBody>,
}

impl VerifiedCovering {
    pub fn new(covering: Covering, report: CoveringReport) -> Result<Self> {
        if !report.pass() {
            return Err(Error::VerificationFailed(
                "gap queries need a covering that passed verification".into(),
            ));
        }
        if covering.c < 2.0 {
            return Err(Error::precondition("boosting needs a (c >= 2, eps)-covering"));
        }
        let norm_bodies = covering
            .elements
            .iter()
            .map(|e| ConvexBody::macbeath_norm_body(&covering.ambient, &e.center, e.scale))
            .collect::<Result<Vec<_>>>()?;
        Ok(VerifiedCovering {
            covering,
            report,
            norm_bodies,
        })
    }

    pub fn len(&self) -> usize {
        self.norm_bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norm_bodies.is_empty()
    }
}

/// Covering-boosted gap CVP: queries the inner solver once per covering
/// element (by index; the first find wins) at target `t + gamma a` under
/// the element norm. A find is sound at bound `gamma (1 + eps)`; if every
/// query misses, no lattice vector lies within `gamma`.
pub fn gap_cvp(
    inst: &CvpInstance,
    gamma: f64,
    cover: &VerifiedCovering,
    inner: &dyn TwoGapSolver,
) -> Result<GapCvpAnswer> {
    if !(gamma > 0.0) {
        return Err(Error::input("gap radius must be positive"));
    }
    if cover.covering.target.dim() != inst.norm_body.dim() {
        return Err(Error::precondition("covering dimension mismatch"));
    }
    for (element, norm) in cover.covering.elements.iter().zip(&cover.norm_bodies) {
        let shifted_target = &inst.target + &element.center * gamma;
        if let Some(sol) = inner.query(&inst.lattice, &shifted_target, norm, gamma)? {
            if sol.distance <= 2.0 * gamma + 1e-12 {
                return Ok(GapCvpAnswer::Found {
                    point: sol.point,
                    coefficients: sol.coefficients,
                    bound: gamma * (1.0 + cover.covering.eps),
                });
            }
        }
    }
    Ok(GapCvpAnswer::Empty {
        certified_radius: gamma,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvpOutcome {
    pub point: Vec<f64>,
    pub coefficients: Vec<i64>,
    pub distance: f64,
    /// Proven bound `gamma (1+eps_cover)` at the final accepted radius.
    pub bound: f64,
    pub gap_queries: usize,
    pub covering_elements: usize,
    pub covering_coverage: f64,
}

impl CvpOutcome {
    pub fn point_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.point)
    }
}

/// Binary-search `(1+eps)`-approximate CVP over one verified
/// `(2, eps/7)`-covering of the norm body.
///
/// The bracket starts at the Babai distance and shrinks geometrically until
/// `hi <= lo (1 + eps/4)`; combined with the covering slack `eps/7` the end
/// factor stays below `1 + eps`.
pub fn approx_cvp(
    inst: &CvpInstance,
    config: &EnumeratorConfig,
    verify_samples: usize,
    coverage_target: f64,
) -> Result<CvpOutcome> {
    if !(inst.eps > 0.0 && inst.eps <= 1.0) {
        return Err(Error::input("approx cvp needs 0 < eps <= 1"));
    }
    if inst.lattice.dim() > 4 {
        return Err(Error::BudgetExceeded(
            "inner enumeration solver is limited to n <= 4".into(),
        ));
    }
    let cover = enumerate_cover_verified_for_cvp(
        &inst.norm_body,
        inst.eps,
        config,
        verify_samples,
        coverage_target,
    )?;
    approx_cvp_with_cover(inst, &cover)
}

/// The `(2, eps/7)`-covering of a norm body used by the boosting pipeline,
/// verified and packaged for gap queries. The `eps/7` slack combined with
/// the `1 + eps/4` bracket keeps the end-to-end factor below `1 + eps`.
///
/// The enumerator is Monte Carlo: when verification rejects a draw, the
/// sampling constant is doubled and the construction re-run (three
/// attempts, deterministic seed schedule) before the failure surfaces.
pub fn enumerate_cover_verified_for_cvp(
    norm_body: &ConvexBody,
    eps: f64,
    config: &EnumeratorConfig,
    verify_samples: usize,
    coverage_target: f64,
) -> Result<VerifiedCovering> {
    let mut cover_config = config.clone();
    cover_config.c = 2.0;
    let mut last_err = None;
    for attempt in 0..3 {
        match enumerate_cover_verified(
            norm_body,
            eps / 7.0,
            &cover_config,
            verify_samples,
            coverage_target,
        ) {
            Ok((covering, report)) => return VerifiedCovering::new(covering, report),
            Err(e @ Error::VerificationFailed(_)) => {
                last_err = Some(e);
                cover_config.sample_factor *= 2.0;
                cover_config.seed = cover_config.seed.wrapping_add(0x9e37 + attempt);
            }
            Err(other) => return Err(other),
        }
    }
    Err(last_err.expect("retries imply a stored failure"))
}

/// The binary search of [`approx_cvp`] over a prebuilt verified covering of
/// the norm body at accuracy `eps/7`; lets callers share coverings across
/// instances with the same norm.
pub fn approx_cvp_with_cover(inst: &CvpInstance, cover: &VerifiedCovering) -> Result<CvpOutcome> {
    let eps = inst.eps;
    let solver = ExactEnumerationSolver;

    // Babai bracket
    let y_star = inst.lattice.coefficients(&inst.target);
    let rounded: Vec<i64> = y_star.iter().map(|v| v.round() as i64).collect();
    let babai = inst.lattice.point(&rounded);
    let babai_dist = inst.norm_body.gauge(&(&babai - &inst.target));
    if babai_dist <= 1e-14 {
        return Ok(CvpOutcome {
            point: babai.iter().copied().collect(),
            coefficients: rounded,
            distance: 0.0,
            bound: 0.0,
            gap_queries: 0,
            covering_elements: cover.len(),
            covering_coverage: cover.report.coverage_rate,
        });
    }

    let mut best = CvpSolution {
        point: babai,
        coefficients: rounded,
        distance: babai_dist,
    };
    let mut bound = babai_dist;
    let mut hi = babai_dist;
    let mut lo = babai_dist * 2.0f64.powi(-40);
    let mut certified_lo = 0.0f64;
    let step = 1.0 + eps / 4.0;
    // binary-search step budget: bracket ratio 2^40 shrinks geometrically
    let cap = 96 + 4 * (1.0 / eps).log2().ceil().max(0.0) as usize;
    let mut queries = 0usize;
    while hi / lo.max(certified_lo) > step && queries < cap {
        let mid = (hi * lo.max(certified_lo)).sqrt();
        queries += 1;
        match gap_cvp(inst, mid, cover, &solver)? {
            GapCvpAnswer::Found {
                point,
                coefficients,
                bound: b,
            } => {
                let dist = inst.norm_body.gauge(&(&point - &inst.target));
                if dist < best.distance {
                    best = CvpSolution {
                        point,
                        coefficients,
                        distance: dist,
                    };
                }
                bound = bound.min(b);
                hi = mid;
            }
            GapCvpAnswer::Empty { certified_radius } => {
                certified_lo = certified_lo.max(certified_radius);
                lo = mid;
            }
        }
    }
    assert!(queries <= cap, "binary search exceeded its step budget");
    Ok(CvpOutcome {
        point: best.point.iter().copied().collect(),
        coefficients: best.coefficients,
        distance: best.distance,
        bound,
        gap_queries: queries,
        covering_elements: cover.len(),
        covering_coverage: cover.report.coverage_rate,
    })
}

/// A convex region anywhere in space: an origin-centered shape plus a
/// translation. Feasible set of the integer program is `shape + offset`.
#[derive(Debug, Clone)]
pub struct OffsetBody {
    pub shape: ConvexBody,
    pub offset: DVector<f64>,
}

impl OffsetBody {
    pub fn centered(shape: ConvexBody) -> Self {
        let offset = DVector::zeros(shape.dim());
        OffsetBody { shape, offset }
    }

    pub fn new(shape: ConvexBody, offset: DVector<f64>) -> Result<Self> {
        if offset.len() != shape.dim() {
            return Err(Error::input("offset dimension mismatch"));
        }
        Ok(OffsetBody { shape, offset })
    }

    pub fn contains(&self, x: &DVector<f64>) -> bool {
        self.shape.contains_unchecked(&(x - &self.offset))
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }
}

/// Approximate integer programming answer.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "answer", rename_all = "lowercase")]
pub enum IpAnswer {
    Found {
        point: Vec<f64>,
        coefficients: Vec<i64>,
        /// Gauge distance of the point from the approximate centroid in the
        /// recentered norm; <= 1 certifies membership in K itself.
        distance: f64,
        /// Set when the distance lies in (1, 1+eps]: the point is only
        /// guaranteed inside the expansion, not K.
        margin: bool,
        /// The approximate centroid the expansion is taken about.
        center: Vec<f64>,
    },
    Empty,
}

/// Dadush-style reduction: recenter at an approximate centroid, solve one
/// `(1+eps)`-CVP under the induced norm, accept iff the distance is within
/// `1 + eps`.
pub fn approx_ip(
    region: &OffsetBody,
    lattice: &Lattice,
    eps: f64,
    config: &EnumeratorConfig,
    centroid_samples: usize,
    verify_samples: usize,
    coverage_target: f64,
) -> Result<IpAnswer> {
    if lattice.dim() > 4 {
        return Err(Error::BudgetExceeded("approx ip is limited to n <= 4".into()));
    }
    if lattice.dim() != region.dim() {
        return Err(Error::input("body and lattice dimensions differ"));
    }
    let mut rng = crate::rng::derive(config.seed, &[0x6970]);
    let centroid_shape = region.shape.estimate_centroid(&mut rng, centroid_samples)?;
    let norm_body = region.shape.translate_to_origin(&centroid_shape)?;
    let p = &centroid_shape + &region.offset;
    let inst = CvpInstance {
        lattice: lattice.clone(),
        target: p,
        norm_body,
        eps,
    };
    let outcome = approx_cvp(&inst, config, verify_samples, coverage_target)?;
    if outcome.distance <= 1.0 + eps {
        Ok(IpAnswer::Found {
            margin: outcome.distance > 1.0,
            point: outcome.point,
            coefficients: outcome.coefficients,
            distance: outcome.distance,
            center: inst.target.iter().copied().collect(),
        })
    } else {
        Ok(IpAnswer::Empty)
    }
}

/// JSON form of an IP region: a body spec with an optional offset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OffsetBodyJson {
    pub shape: BodySpec,
    #[serde(default)]
    pub offset: Vec<Real>,
}

impl OffsetBodyJson {
    pub fn to_region(&self, oracle: OracleConfig) -> Result<OffsetBody> {
        let shape = self.shape.to_body(oracle)?;
        let offset = if self.offset.is_empty() {
            DVector::zeros(shape.dim())
        } else {
            DVector::from_iterator(self.offset.len(), self.offset.iter().map(|r| r.0))
        };
        OffsetBody::new(shape, offset)
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

/// Instance spec: basis rows are the lattice basis vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvpInstanceJson {
    pub basis: Vec<Vec<Real>>,
    pub target: Vec<Real>,
    pub norm: BodySpec,
    pub eps: Real,
}

impl CvpInstanceJson {
    pub fn to_instance(&self, oracle: OracleConfig) -> Result<CvpInstance> {
        let n = self.basis.len();
        if self.basis.iter().any(|row| row.len() != n) {
            return Err(Error::input("lattice basis must be square"));
        }
        let basis = DMatrix::from_fn(n, n, |r, c| self.basis[c][r].0);
        let lattice = Lattice::new(basis)?;
        let target = DVector::from_iterator(self.target.len(), self.target.iter().map(|r| r.0));
        if target.len() != n {
            return Err(Error::input("target dimension mismatch"));
        }
        let norm_body = self.norm.to_body(oracle)?;
        if norm_body.dim() != n {
            return Err(Error::input("norm body dimension mismatch"));
        }
        Ok(CvpInstance {
            lattice,
            target,
            norm_body,
            eps: self.eps.0,
        })
    }

    pub fn from_instance(inst: &CvpInstance) -> Result<Self> {
        let n = inst.lattice.dim();
        Ok(CvpInstanceJson {
            basis: (0..n)
                .map(|c| (0..n).map(|r| Real(inst.lattice.basis()[(r, c)])).collect())
                .collect(),
            target: inst.target.iter().map(|&v| Real(v)).collect(),
            norm: BodySpec::from_body(&inst.norm_body)?,
            eps: Real(inst.eps),
        })
    }
}
