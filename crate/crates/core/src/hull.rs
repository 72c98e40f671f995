//! Incremental convex hull in dimension 2..=4.
//!
//! Beneath-beyond with simplicial facets. Horizon ridges are recovered by
//! multiplicity counting (a ridge interior to the visible region appears in
//! exactly two visible facets, a horizon ridge in one), which keeps the
//! bookkeeping free of explicit adjacency. Inputs sitting on a facet plane
//! within tolerance are never promoted to vertices, so grids and midpoints
//! collapse to the true extreme set.

use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct HullFacet {
    /// Outward unit normal.
    pub normal: DVector<f64>,
    /// Plane offset: `normal . x = offset` on the facet.
    pub offset: f64,
    /// Indices of the n points spanning this simplicial facet.
    pub points: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Hull {
    pub dim: usize,
    /// Indices of extreme input points, sorted ascending.
    pub vertices: Vec<usize>,
    /// Simplicial facets; coplanar ones are merged by [`Hull::merged_facets`].
    pub facets: Vec<HullFacet>,
    interior: DVector<f64>,
}

/// Unit normal of the hyperplane through `pts` (n points in dimension n),
/// via generalized cross product of the span vectors.
fn plane_normal(pts: &[&DVector<f64>]) -> Option<DVector<f64>> {
    let n = pts[0].len();
    debug_assert_eq!(pts.len(), n);
    let spans: Vec<DVector<f64>> = (1..n).map(|i| pts[i] - pts[0]).collect();
    let mut normal = DVector::zeros(n);
    for j in 0..n {
        // minor: drop column j
        let minor = DMatrix::from_fn(n - 1, n - 1, |r, c| {
            let col = if c < j { c } else { c + 1 };
            spans[r][col]
        });
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        normal[j] = sign * minor.determinant();
    }
    let len = normal.norm();
    if len < 1e-13 {
        return None;
    }
    Some(normal / len)
}

fn make_facet(points: Vec<usize>, all: &[DVector<f64>], interior: &DVector<f64>) -> Option<HullFacet> {
    let refs: Vec<&DVector<f64>> = points.iter().map(|&i| &all[i]).collect();
    let mut normal = plane_normal(&refs)?;
    let mut offset = normal.dot(refs[0]);
    if normal.dot(interior) > offset {
        normal = -normal;
        offset = -offset;
    }
    if offset - normal.dot(interior) < 1e-13 {
        return None; // interior point on the plane: degenerate
    }
    Some(HullFacet { normal, offset, points })
}

/// Greedy affinely-independent seed: start from the lexicographic minimum,
/// then repeatedly take the point farthest from the current affine span.
fn initial_simplex(points: &[DVector<f64>], tol: f64) -> Result<Vec<usize>> {
    let n = points[0].len();
    let first = (0..points.len())
        .min_by(|&a, &b| {
            points[a]
                .iter()
                .zip(points[b].iter())
                .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();
    let mut chosen = vec![first];
    // orthonormal basis of the current affine span
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while chosen.len() < n + 1 {
        let p0 = &points[chosen[0]];
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            let mut d = p - p0;
            for b in &basis {
                let proj = d.dot(b);
                d -= b * proj;
            }
            let dist = d.norm();
            if best.is_none_or(|(_, bd)| dist > bd) {
                best = Some((i, dist));
            }
        }
        match best {
            Some((i, dist)) if dist > tol => {
                let mut d = &points[i] - p0;
                for b in &basis {
                    let proj = d.dot(b);
                    d -= b * proj;
                }
                basis.push(d.normalize());
                chosen.push(i);
            }
            _ => {
                return Err(Error::input(
                    "convex hull input is degenerate (not full-dimensional)",
                ))
            }
        }
    }
    Ok(chosen)
}

pub fn convex_hull(points: &[DVector<f64>]) -> Result<Hull> {
    if points.is_empty() {
        return Err(Error::input("convex hull of empty point set"));
    }
    let n = points[0].len();
    if !(2..=4).contains(&n) {
        return Err(Error::UnsupportedRepresentation("convex hull above dimension 4"));
    }
    let scale = points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, &v| m.max(v.abs()));
    let tol = 1e-9 * scale.max(1.0);
    let seed = initial_simplex(points, tol * 10.0)?;
    let interior =
        seed.iter().map(|&i| &points[i]).fold(DVector::zeros(n), |acc, p| acc + p) / (n as f64 + 1.0);

    let mut facets: Vec<HullFacet> = Vec::new();
    for leave_out in 0..=n {
        let pts: Vec<usize> = seed
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != leave_out)
            .map(|(_, &i)| i)
            .collect();
        let facet = make_facet(pts, points, &interior)
            .ok_or_else(|| Error::input("degenerate initial simplex facet"))?;
        facets.push(facet);
    }

    for (idx, p) in points.iter().enumerate() {
        if seed.contains(&idx) {
            continue;
        }
        let visible: Vec<usize> = facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.normal.dot(p) > f.offset + tol)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        // ridge -> multiplicity among visible facets
        let mut ridges: HashMap<Vec<usize>, usize> = HashMap::new();
        for &fi in &visible {
            let pts = &facets[fi].points;
            for drop in 0..pts.len() {
                let mut ridge: Vec<usize> = pts
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != drop)
                    .map(|(_, &v)| v)
                    .collect();
                ridge.sort_unstable();
                *ridges.entry(ridge).or_insert(0) += 1;
            }
        }
        let mut new_facets = Vec::new();
        let mut ok = true;
        let mut horizon: Vec<&Vec<usize>> = ridges
            .iter()
            .filter(|(_, &c)| c == 1)
            .map(|(r, _)| r)
            .collect();
        horizon.sort();
        for ridge in horizon {
            let mut pts = ridge.clone();
            pts.push(idx);
            match make_facet(pts, points, &interior) {
                Some(f) => new_facets.push(f),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue; // numerically flat update; point is (near-)redundant
        }
        let mut keep = Vec::with_capacity(facets.len());
        for (i, f) in facets.drain(..).enumerate() {
            if !visible.contains(&i) {
                keep.push(f);
            }
        }
        keep.extend(new_facets);
        facets = keep;
    }

    let mut vertices: Vec<usize> = facets.iter().flat_map(|f| f.points.iter().copied()).collect();
    vertices.sort_unstable();
    vertices.dedup();
    Ok(Hull {
        dim: n,
        vertices,
        facets,
        interior,
    })
}

impl Hull {
    /// Deduplicated facet planes `(unit normal, offset)`; this is the
    /// irredundant H-representation of the hull.
    pub fn merged_facets(&self) -> Vec<(DVector<f64>, f64)> {
        let scale = self.facets.iter().fold(0.0f64, |m, f| m.max(f.offset.abs()));
        let tol = 1e-7 * scale.max(1.0);
        let mut merged: Vec<(DVector<f64>, f64)> = Vec::new();
        for f in &self.facets {
            let dup = merged
                .iter()
                .any(|(n, o)| n.dot(&f.normal) > 1.0 - 1e-8 && (o - f.offset).abs() < tol);
            if !dup {
                merged.push((f.normal.clone(), f.offset));
            }
        }
        merged
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.facets.iter().all(|f| f.normal.dot(x) <= f.offset + tol)
    }

    /// Exact volume: fan of simplices from an interior point.
    pub fn volume(&self, points: &[DVector<f64>]) -> f64 {
        let n = self.dim;
        let factorial: f64 = (1..=n).map(|k| k as f64).product();
        let mut total = 0.0;
        for f in &self.facets {
            let mat = DMatrix::from_fn(n, n, |r, c| points[f.points[c]][r] - self.interior[r]);
            total += mat.determinant().abs() / factorial;
        }
        total
    }

    pub fn vertex_points(&self, points: &[DVector<f64>]) -> Vec<DVector<f64>> {
        self.vertices.iter().map(|&i| points[i].clone()).collect()
    }

    /// Volume centroid via the simplex fan from the interior point.
    pub fn centroid(&self, points: &[DVector<f64>]) -> DVector<f64> {
        let n = self.dim;
        let factorial: f64 = (1..=n).map(|k| k as f64).product();
        let mut total = 0.0;
        let mut acc = DVector::zeros(n);
        for f in &self.facets {
            let mat = DMatrix::from_fn(n, n, |r, c| points[f.points[c]][r] - self.interior[r]);
            let vol = mat.determinant().abs() / factorial;
            let mut c = self.interior.clone();
            for &i in &f.points {
                c += &points[i];
            }
            c /= (n + 1) as f64;
            acc += c * vol;
            total += vol;
        }
        acc / total.max(1e-300)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn pts(vals: &[&[f64]]) -> Vec<DVector<f64>> {
        vals.iter().map(|v| DVector::from_column_slice(v)).collect()
    }

    #[test]
    fn square_with_clutter() {
        let mut p = pts(&[
            &[-1.0, -1.0],
            &[1.0, -1.0],
            &[1.0, 1.0],
            &[-1.0, 1.0],
            &[0.0, 0.0],
            &[1.0, 0.0],   // edge midpoint: not a vertex
            &[0.3, -0.2],
        ]);
        p.push(DVector::from_column_slice(&[-1.0, 1.0])); // duplicate corner
        let h = convex_hull(&p).unwrap();
        assert_eq!(h.vertices, vec![0, 1, 2, 3]);
        assert!((h.volume(&p) - 4.0).abs() < 1e-9);
        assert_eq!(h.merged_facets().len(), 4);
    }

    #[test]
    fn cube_and_simplex_3d() {
        let mut cube = Vec::new();
        for x in [-1.0, 1.0] {
            for y in [-1.0, 1.0] {
                for z in [-1.0, 1.0] {
                    cube.push(DVector::from_column_slice(&[x, y, z]));
                }
            }
        }
        cube.push(DVector::from_column_slice(&[0.2, -0.1, 0.4]));
        let h = convex_hull(&cube).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert!((h.volume(&cube) - 8.0).abs() < 1e-9);
        assert_eq!(h.merged_facets().len(), 6);

        let simplex = pts(&[
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
        ]);
        let h = convex_hull(&simplex).unwrap();
        assert!((h.volume(&simplex) - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn cross_polytope_4d() {
        let mut p = Vec::new();
        for j in 0..4 {
            for s in [-1.0, 1.0] {
                let mut v = DVector::zeros(4);
                v[j] = s;
                p.push(v);
            }
        }
        let h = convex_hull(&p).unwrap();
        assert_eq!(h.vertices.len(), 8);
        assert_eq!(h.facets.len(), 16);
        assert!((h.volume(&p) - 16.0 / 24.0).abs() < 1e-9);
    }

    /// 2-D oracle: monotone chain.
    fn chain_hull(points: &[DVector<f64>]) -> Vec<(f64, f64)> {
        let mut ps: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
        ps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ps.dedup();
        let cross =
            |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
        let mut lower: Vec<(f64, f64)> = Vec::new();
        for &p in &ps {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 1e-12 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<(f64, f64)> = Vec::new();
        for &p in ps.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 1e-12 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        lower
    }

    #[test]
    fn random_2d_matches_monotone_chain() {
        let mut rng = crate::rng::root(5);
        for _ in 0..40 {
            let m = rng.random_range(6..40);
            let points: Vec<DVector<f64>> = (0..m)
                .map(|_| DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0)))
                .collect();
            let h = convex_hull(&points).unwrap();
            let oracle = chain_hull(&points);
            let mut got: Vec<(f64, f64)> =
                h.vertices.iter().map(|&i| (points[i][0], points[i][1])).collect();
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut want = oracle.clone();
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                assert!((g.0 - w.0).abs() < 1e-9 && (g.1 - w.1).abs() < 1e-9);
            }
            // shoelace oracle for the area
            let mut area = 0.0;
            for i in 0..oracle.len() {
                let (x1, y1) = oracle[i];
                let (x2, y2) = oracle[(i + 1) % oracle.len()];
                area += x1 * y2 - x2 * y1;
            }
            assert!((h.volume(&points) - area.abs() / 2.0).abs() < 1e-8);
            for p in &points {
                assert!(h.contains(p, 1e-8));
            }
        }
    }

    #[test]
    fn random_3d_containment() {
        let mut rng = crate::rng::root(6);
        for _ in 0..20 {
            let m = rng.random_range(8..30);
            let points: Vec<DVector<f64>> = (0..m)
                .map(|_| DVector::from_fn(3, |_, _| rng.random_range(-1.5..1.5)))
                .collect();
            let h = convex_hull(&points).unwrap();
            for p in &points {
                assert!(h.contains(p, 1e-8));
            }
            // every vertex is extreme: strictly outside the hull of the others
            for &v in &h.vertices {
                let rest: Vec<DVector<f64>> = points
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != v)
                    .map(|(_, p)| p.clone())
                    .collect();
                let sub = convex_hull(&rest).unwrap();
                assert!(!sub.contains(&points[v], 1e-9), "vertex {v} not extreme");
            }
        }
    }

    #[test]
    fn degenerate_input_is_an_error() {
        let p = pts(&[&[0.0, 0.0], &[1.0, 1.0], &[2.0, 2.0]]);
        assert!(convex_hull(&p).is_err());
    }
}
