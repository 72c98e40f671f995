//! Acceptance suite: one test per criterion, each printing a single
//! pass/fail line (run with `--nocapture` to see them). Tolerances and
//! thresholds are pinned here, not configurable.
//!
//! 1. property suites green at 500 trials within 5 minutes
//! 2. covering-size exponent fits on the disk (0.5 +- 0.2) and the 3-ball
//!    (1.0 +- 0.25) with every covering verified at 1e5 samples, 15 minutes
//! 3. polytope sandwich certificates for disk and square at eps 0.1 / 0.05
//!    with the frozen vertex-count constant
//! 4. 200 random CVP instances within factor (1+eps) of exact, gap answers
//!    consistent with the exact oracle, 10 minutes
//! 5. 100 random IP instances against a brute-force integer scan, margin
//!    cases flagged, soundness always
//! 6. primal-polar cap volume product above the frozen floor, stable as
//!    eps halves
//! 7. byte-identical covering and answer JSON under a fixed seed

use cvxcover::bodies::ConvexBody;
use cvxcover::enumerate::{scaling_experiment, EnumeratorConfig};
use cvxcover::lattice::{
    approx_cvp_with_cover, approx_ip, enumerate_cover_verified_for_cvp, exact_cvp, gap_cvp,
    CvpInstance, ExactEnumerationSolver, GapCvpAnswer, IpAnswer, Lattice, OffsetBody,
    VerifiedCovering,
};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use std::time::Instant;

fn line(n: usize, pass: bool, detail: &str) {
    println!("[{}] criterion {}: {}", if pass { "PASS" } else { "FAIL" }, n, detail);
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_1_lemma_suites() {
    let t0 = Instant::now();
    let reports = cvxcover::lemmas::all_suites(500, 2026);
    let violations: usize = reports.iter().map(|r| r.violations).sum();
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.name.as_str())
        .collect();
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = failed.is_empty() && elapsed < 300.0;
    line(
        1,
        pass,
        &format!(
            "{} checks, {violations} violations, {elapsed:.0}s (budget 300s){}{}",
            reports.len(),
            if failed.is_empty() { "" } else { "; failed: " },
            failed.join(", ")
        ),
    );
}

#[test]
fn criterion_2_covering_exponent() {
    let t0 = Instant::now();
    let config = EnumeratorConfig::default().with_seed(2026);
    let eps_list = [0.08, 0.04, 0.02, 0.01];

    let disk = ConvexBody::ball(2, 1.0).unwrap();
    let exp2 = scaling_experiment(&disk, &eps_list, &config, 100_000, 0.999).unwrap();
    let slope2 = exp2.slope.unwrap();

    let ball = ConvexBody::ball(3, 1.0).unwrap();
    let exp3 = scaling_experiment(&ball, &eps_list, &config, 100_000, 0.999).unwrap();
    let slope3 = exp3.slope.unwrap();

    let elapsed = t0.elapsed().as_secs_f64();
    let pass = (slope2 - 0.5).abs() <= 0.2 && (slope3 - 1.0).abs() <= 0.25 && elapsed < 900.0;
    line(
        2,
        pass,
        &format!(
            "disk slope {slope2:.3} (0.5 +- 0.2), ball slope {slope3:.3} (1.0 +- 0.25), \
             all coverings verified at 1e5 samples, {elapsed:.0}s (budget 900s)"
        ),
    );
}

#[test]
fn criterion_3_banach_mazur_sandwich() {
    // frozen after one calibration run: vertex count <= A'' eps^{-1/2} log2(1/eps)
    const VERTEX_CONSTANT: f64 = 8.0;
    let config = EnumeratorConfig::default().with_seed(2026);
    let mut detail = String::new();
    let mut pass = true;
    for (name, body) in [
        ("disk", ConvexBody::ball(2, 1.0).unwrap()),
        ("square", ConvexBody::cube(2, 1.0).unwrap()),
    ] {
        for eps in [0.1, 0.05] {
            let result =
                cvxcover::approx::banach_mazur_polytope(&body, eps, &config, 50_000, 0.999)
                    .unwrap();
            let mut rng = cvxcover::rng::derive(2026, &[3]);
            let report =
                cvxcover::approx::verify_sandwich(&body, &result.polytope, eps, &mut rng, 10_000)
                    .unwrap();
            let bound = VERTEX_CONSTANT * eps.powf(-0.5) * (1.0 / eps).log2();
            let ok = report.pass() && (result.vertex_count as f64) <= bound;
            pass &= ok;
            detail.push_str(&format!(
                "{name} eps={eps}: {} vertices (bound {bound:.0}), outer {}, inner {} ({}); ",
                result.vertex_count,
                report.outer_pass,
                report.inner_pass,
                report.inner_method
            ));
        }
    }
    line(3, pass, detail.trim_end_matches("; "));
}

fn norm_body_for(family: usize, dim: usize, rng: &mut impl Rng) -> ConvexBody {
    match family {
        0 => ConvexBody::lp_ball(dim, f64::INFINITY, 1.0).unwrap(),
        1 => ConvexBody::lp_ball(dim, 1.0, 1.0).unwrap(),
        2 => cvxcover::bodygen::random_hpolytope(rng, dim, 2 * dim).unwrap(),
        _ => cvxcover::bodygen::standard_ellipsoid(dim).unwrap(),
    }
}

fn random_lattice(dim: usize, rng: &mut impl Rng) -> Lattice {
    loop {
        if rng.random_bool(0.4) {
            return Lattice::integer(dim);
        }
        let basis = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-3.0f64..3.0));
        if basis.determinant().abs() >= 0.5 {
            return Lattice::new(basis).unwrap();
        }
    }
}

#[test]
fn criterion_4_cvp_correctness() {
    let t0 = Instant::now();
    let mut rng = cvxcover::rng::derive(2026, &[4]);
    let mut config = EnumeratorConfig::default().with_seed(2026);
    config.sample_factor = 4.0; // coverage stays complete at the cvp accuracies

    // covering cache for the fixed norm families, keyed by (family, dim, eps)
    let mut cache: std::collections::BTreeMap<(usize, usize, u64), VerifiedCovering> =
        std::collections::BTreeMap::new();

    let mut checked = 0usize;
    let mut ratio_failures = 0usize;
    let mut worst_ratio = 1.0f64;
    let mut sweep_points = 0usize;
    let mut sweep_failures = 0usize;
    let mut monotone_violations = 0usize;

    let total_instances = 200usize;
    for k in 0..total_instances {
        let dim = if k % 10 < 7 { 2 } else { 3 };
        let family = k % 4;
        let norm_body = norm_body_for(family, dim, &mut rng);
        let lattice = random_lattice(dim, &mut rng);
        let target = DVector::from_fn(dim, |_, _| rng.random_range(-4.0..4.0));
        let mut dist_prev = f64::INFINITY;
        for (ei, eps) in [0.25, 0.1].into_iter().enumerate() {
            let inst = CvpInstance {
                lattice: lattice.clone(),
                target: target.clone(),
                norm_body: norm_body.clone(),
                eps,
            };
            let exact = exact_cvp(&inst).unwrap();
            let cover = if family == 2 {
                enumerate_cover_verified_for_cvp(&inst.norm_body, eps, &config, 20_000, 0.999)
                    .unwrap()
            } else {
                let key = (family, dim, ei as u64);
                if let std::collections::btree_map::Entry::Vacant(e) = cache.entry(key) {
                    let c = enumerate_cover_verified_for_cvp(
                        &inst.norm_body,
                        eps,
                        &config,
                        20_000,
                        0.999,
                    )
                    .unwrap();
                    e.insert(c);
                }
                cache.remove(&key).unwrap()
            };
            let outcome = approx_cvp_with_cover(&inst, &cover).unwrap();
            checked += 1;
            if exact.distance > 1e-12 {
                let ratio = outcome.distance / exact.distance;
                worst_ratio = worst_ratio.max(ratio);
                if ratio > 1.0 + eps + 1e-9 {
                    ratio_failures += 1;
                }
            } else if outcome.distance > 1e-9 {
                ratio_failures += 1;
            }
            if ei == 1 && outcome.distance > dist_prev + 1e-9 {
                monotone_violations += 1;
            }
            dist_prev = outcome.distance;

            // gap-answer consistency sweep on a subset
            if k % 5 == 0 && exact.distance > 1e-9 {
                let solver = ExactEnumerationSolver;
                for (gamma, expect_found) in [
                    (0.5 * exact.distance, false),
                    (1.3 * exact.distance, true),
                ] {
                    sweep_points += 1;
                    match gap_cvp(&inst, gamma, &cover, &solver).unwrap() {
                        GapCvpAnswer::Found { point, bound, .. } => {
                            let d = inst.norm_body.gauge(&(point - &inst.target));
                            if !expect_found || d > bound + 1e-9 {
                                sweep_failures += 1;
                            }
                        }
                        GapCvpAnswer::Empty { certified_radius } => {
                            if expect_found || certified_radius >= exact.distance {
                                sweep_failures += 1;
                            }
                        }
                    }
                }
            }
            // keep shared coverings cached
            if family != 2 {
                cache.insert((family, dim, ei as u64), cover);
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let pass =
        ratio_failures == 0 && sweep_failures == 0 && monotone_violations == 0 && elapsed < 600.0;
    line(
        4,
        pass,
        &format!(
            "{checked} runs over {total_instances} instances: {ratio_failures} ratio failures \
             (worst {worst_ratio:.4}), {sweep_failures}/{sweep_points} sweep inconsistencies, \
             {monotone_violations} eps-monotonicity exceptions, {elapsed:.0}s (budget 600s)"
        ),
    );
}

#[test]
fn criterion_5_integer_programming() {
    let t0 = Instant::now();
    let mut rng = cvxcover::rng::derive(2026, &[5]);
    let config = EnumeratorConfig::default().with_seed(2026);
    let eps = 0.1;
    let mut margin_flagged = 0usize;
    let mut disagreements = 0usize;
    let mut soundness_failures = 0usize;
    let total = 100usize;
    for k in 0..total {
        // random box or ellipse placed near the lattice scale
        let shape = if k % 2 == 0 {
            let hx = rng.random_range(0.25..1.2);
            let hy = rng.random_range(0.25..1.2);
            ConvexBody::hpolytope(
                vec![
                    DVector::from_column_slice(&[1.0, 0.0]),
                    DVector::from_column_slice(&[-1.0, 0.0]),
                    DVector::from_column_slice(&[0.0, 1.0]),
                    DVector::from_column_slice(&[0.0, -1.0]),
                ],
                vec![hx, hx, hy, hy],
                hx.min(hy),
                (hx * hx + hy * hy).sqrt(),
            )
            .unwrap()
        } else {
            cvxcover::bodygen::random_ellipsoid(&mut rng, 2).unwrap()
        };
        let offset = DVector::from_fn(2, |_, _| rng.random_range(-3.0..3.0));
        let region = OffsetBody::new(shape, offset).unwrap();
        let lattice = random_lattice(2, &mut rng);

        // brute-force scan: any lattice point inside the region?
        let reach = region.shape.outer_radius() + 1e-9;
        let center_coeffs = lattice.coefficients(&region.offset);
        let mut brute_nonempty = false;
        let half: Vec<i64> = (0..2)
            .map(|i| (reach * lattice_inv_row(&lattice, i) + 1.0).ceil() as i64)
            .collect();
        for dz0 in -half[0]..=half[0] {
            for dz1 in -half[1]..=half[1] {
                let z = vec![
                    center_coeffs[0].round() as i64 + dz0,
                    center_coeffs[1].round() as i64 + dz1,
                ];
                if region.contains(&lattice.point(&z)) {
                    brute_nonempty = true;
                }
            }
        }

        let answer = approx_ip(&region, &lattice, eps, &config, 20_000, 10_000, 0.999).unwrap();
        match answer {
            IpAnswer::Found { point, distance, margin, center, .. } => {
                let p = DVector::from_column_slice(&point);
                let c = DVector::from_column_slice(&center);
                // soundness against the returned recentering point: the
                // point lies in c + (1+eps)(K - c)
                let recentered_shape = region
                    .shape
                    .translate_to_origin(&(&c - &region.offset))
                    .unwrap();
                let shape_gauge = recentered_shape.gauge(&(&p - &c));
                if shape_gauge > (1.0 + eps) * (1.0 + 1e-9) {
                    soundness_failures += 1;
                }
                if (distance - shape_gauge).abs() > 1e-6 {
                    soundness_failures += 1;
                }
                if margin {
                    margin_flagged += 1;
                } else if !brute_nonempty {
                    // an unflagged Found claims a true feasible point
                    disagreements += 1;
                }
            }
            IpAnswer::Empty => {
                if brute_nonempty {
                    disagreements += 1;
                }
            }
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let pass = disagreements == 0 && soundness_failures == 0;
    line(
        5,
        pass,
        &format!(
            "{total} instances: {disagreements} disagreements with the brute-force scan, \
             {margin_flagged} margin-flagged, {soundness_failures} soundness failures, {elapsed:.0}s"
        ),
    );
}

fn lattice_inv_row(lattice: &Lattice, _i: usize) -> f64 {
    // conservative: spectral bound via the largest inverse row norm
    let b = lattice.basis();
    let inv = b.clone().try_inverse().unwrap();
    (0..b.nrows()).map(|r| inv.row(r).norm()).fold(0.0, f64::max)
}

#[test]
fn criterion_6_mahler_product_floor() {
    let kappa = cvxcover::lemmas::calibrated::CAP_PRODUCT_2D;
    let min_01 = cvxcover::lemmas::cap_product_minimum(200, 2026, 0.1).unwrap();
    let min_005 = cvxcover::lemmas::cap_product_minimum(200, 2026, 0.05).unwrap();
    let pass = min_01 >= kappa && min_005 >= kappa && min_005 >= min_01 / 2.0;
    line(
        6,
        pass,
        &format!(
            "min product/eps^3: {min_01:.4} at eps 0.1, {min_005:.4} at eps 0.05 \
             (floor {kappa}, halving tolerance 2x)"
        ),
    );
}

#[test]
fn criterion_7_determinism() {
    let disk = ConvexBody::ball(2, 1.0).unwrap();
    let config = EnumeratorConfig::default().with_seed(424242);
    let c1 = cvxcover::enumerate::enumerate_cover(&disk, 0.1, &config).unwrap();
    let c2 = cvxcover::enumerate::enumerate_cover(&disk, 0.1, &config).unwrap();
    let j1 = cvxcover::macbeath::covering_to_json(&c1).unwrap();
    let j2 = cvxcover::macbeath::covering_to_json(&c2).unwrap();

    let inst = CvpInstance {
        lattice: Lattice::integer(2),
        target: DVector::from_column_slice(&[0.4, 0.3]),
        norm_body: ConvexBody::lp_ball(2, f64::INFINITY, 1.0).unwrap(),
        eps: 0.1,
    };
    let a1 = cvxcover::lattice::approx_cvp(&inst, &config, 10_000, 0.999).unwrap();
    let a2 = cvxcover::lattice::approx_cvp(&inst, &config, 10_000, 0.999).unwrap();
    let s1 = serde_json::to_string(&a1).unwrap();
    let s2 = serde_json::to_string(&a2).unwrap();

    let pass = j1 == j2 && s1 == s2;
    line(
        7,
        pass,
        &format!(
            "covering JSON identical: {}, answer JSON identical: {}",
            j1 == j2,
            s1 == s2
        ),
    );
}
