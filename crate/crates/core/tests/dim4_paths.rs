//! Exercises the n >= 4 code paths: hit-and-run sampling, exact CVP at the
//! top of the desk-scale range, refusal above it, and the remaining spec
//! examples that need dimension 3 volume machinery.

use cvxcover::bodies::ConvexBody;
use cvxcover::exactvol::body_volume;
use cvxcover::lattice::{exact_cvp, CvpInstance, Lattice};
use nalgebra::DVector;

#[test]
fn hit_and_run_moments_in_4d() {
    let cube = ConvexBody::cube(4, 1.0).unwrap();
    let mut rng = cvxcover::rng::root(61);
    let n = 20_000;
    let mut mean = DVector::zeros(4);
    let mut second = DVector::zeros(4);
    for _ in 0..n {
        let x = cube.uniform_sample(&mut rng).unwrap();
        assert!(cube.membership(&x).unwrap());
        mean += &x;
        second += x.component_mul(&x);
    }
    mean /= n as f64;
    second /= n as f64;
    for j in 0..4 {
        assert!(mean[j].abs() < 0.02, "mean[{j}] = {}", mean[j]);
        // uniform on [-1,1]: second moment 1/3
        assert!((second[j] - 1.0 / 3.0).abs() < 0.02, "var[{j}] = {}", second[j]);
    }

    // ball: chord extents via the quadratic gauge
    let ball = ConvexBody::ball(4, 1.0).unwrap();
    let mut inside_half = 0usize;
    let m = 10_000;
    for _ in 0..m {
        let x = ball.uniform_sample(&mut rng).unwrap();
        assert!(ball.membership(&x).unwrap());
        if x.norm() <= 0.5_f64.powf(0.25) {
            inside_half += 1;
        }
    }
    // radius 2^{-1/4} encloses half the 4-ball volume
    let frac = inside_half as f64 / m as f64;
    assert!((frac - 0.5).abs() < 0.03, "half-volume fraction {frac}");
}

#[test]
fn exact_cvp_at_dimension_four_and_refusal_above() {
    let inst = CvpInstance {
        lattice: Lattice::integer(4),
        target: DVector::from_column_slice(&[0.4, -0.3, 0.2, 0.45]),
        norm_body: ConvexBody::lp_ball(4, f64::INFINITY, 1.0).unwrap(),
        eps: 0.1,
    };
    let sol = exact_cvp(&inst).unwrap();
    assert_eq!(sol.coefficients, vec![0, 0, 0, 0]);
    assert!((sol.distance - 0.45).abs() < 1e-12);

    let inst5 = CvpInstance {
        lattice: Lattice::integer(5),
        target: DVector::zeros(5),
        norm_body: ConvexBody::lp_ball(5, f64::INFINITY, 1.0).unwrap(),
        eps: 0.1,
    };
    assert!(matches!(
        exact_cvp(&inst5),
        Err(cvxcover::Error::BudgetExceeded(_))
    ));
}

#[test]
fn monte_carlo_volume_matches_exact_triangulation_3d() {
    let mut rng = cvxcover::rng::root(67);
    for _ in 0..10 {
        let body = cvxcover::bodygen::random_hpolytope(&mut rng, 3, 6).unwrap();
        let exact = body_volume(&body).unwrap();
        let (mc, se) = body.estimate_volume(&mut rng, 60_000);
        assert!(
            (mc - exact).abs() <= 3.0 * se,
            "mc {mc} vs exact {exact} (se {se})"
        );
    }
}

#[test]
fn square_covering_at_eps_005_verifies() {
    let square = ConvexBody::cube(2, 1.0).unwrap();
    let config = cvxcover::enumerate::EnumeratorConfig::default().with_seed(31);
    let (covering, report) =
        cvxcover::enumerate::enumerate_cover_verified(&square, 0.05, &config, 50_000, 0.999)
            .unwrap();
    assert!(report.pass(), "{report:?}");
    assert!(covering.elements.len() <= config.size_bound(2, 0.05));
}
