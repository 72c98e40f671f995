//! Regenerates the observed minima behind `lemmas::calibrated`. Run once
//! after changing the body pool or the volume machinery, then refresh the
//! frozen constants (about half the observed minimum each).

use cvxcover::bodies::{unit_ball_volume, ConvexBody};
use cvxcover::exactvol::{body_volume, macbeath_volume, slice_area_centroid};
use cvxcover::lemmas::{cap_product_minimum, region_product_minimum};

fn main() {
    // wide-cap region volume floor over the pool, width-1/3 caps
    let mut wide_min = f64::INFINITY;
    for dim in [2usize, 3] {
        for (name, body) in cvxcover::bodygen::standard_suite(dim, 11) {
            let mut rng = cvxcover::rng::root(4 + dim as u64);
            for _ in 0..500 {
                let u = cvxcover::rng::unit_direction(&mut rng, dim);
                let (value, _) = body.support(&u).unwrap();
                let plane = cvxcover::bodies::Hyperplane::new(u, (1.0 - 1.0/3.0) * value).unwrap();
                let Some((_, centroid)) = slice_area_centroid(&body, &plane) else { continue };
                let (Some(vm), Some(vk)) = (macbeath_volume(&body, &centroid, 1.0), body_volume(&body)) else { continue };
                let r = vm / vk;
                if r < wide_min { wide_min = r; println!("wide min {r:.5} at {name}-{dim}d"); }
            }
        }
    }
    println!("WIDE_CAP_REGION_VOL observed min = {wide_min:.6}");

    // body mahler floors
    for dim in [2usize, 3] {
        let mut m = f64::INFINITY;
        let mut rng = cvxcover::rng::root(21 + dim as u64);
        for t in 0..600 {
            let body = match t % 4 {
                0 => cvxcover::bodygen::random_hpolytope(&mut rng, dim, 2 * dim).unwrap(),
                1 => cvxcover::bodygen::random_vpolytope(&mut rng, dim, 3 * dim).unwrap(),
                2 => cvxcover::bodygen::random_ellipsoid(&mut rng, dim).unwrap(),
                _ => ConvexBody::lp_ball(dim, 1.0, 1.0).unwrap(),
            };
            let polar = body.polar().unwrap();
            let (Some(v), Some(vp)) = (body_volume(&body), body_volume(&polar)) else { continue };
            let omega = unit_ball_volume(dim);
            m = m.min(v * vp / (omega * omega));
        }
        println!("MAHLER_BODY_{dim}D observed min = {m:.6}");
    }

    for eps in [0.1, 0.05, 0.025] {
        let m = cap_product_minimum(400, 11, eps).unwrap();
        println!("CAP_PRODUCT eps={eps}: min = {m:.6}");
    }
    for eps in [0.1, 0.05, 0.025] {
        let m = region_product_minimum(400, 11, eps).unwrap();
        println!("REGION_PRODUCT eps={eps}: min = {m:.6}");
    }
}
