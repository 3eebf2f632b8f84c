//! Convex bodies: polytopes with full facet data, Euclidean balls and sampled star bodies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, complement_basis, dot, normal_of, scale, sub, LinearMap};
use crate::numerics::{self, kappa, simplex_volume, Simplex, SphereGrid};

/// Relative tolerance for coplanarity, duplicate points and membership.
pub const GEOM_TOL: f64 = 1e-9;

/// One facet of a polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    /// Unit outward normal.
    pub normal: Vec<f64>,
    /// Support value in the normal direction.
    pub offset: f64,
    /// (n-1)-dimensional measure.
    pub area: f64,
    pub centroid: Vec<f64>,
    /// Indices into the polytope vertex list.
    pub vertices: Vec<usize>,
    /// Triangulation into (n-1)-simplices embedded in R^n.
    pub simplices: Vec<Simplex>,
}

/// Convex polytope held by its vertices, with derived facet data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    facets: Vec<Facet>,
    volume: f64,
    centroid: Vec<f64>,
}

struct RawFacet {
    normal: Vec<f64>,
    offset: f64,
    members: Vec<usize>,
}

struct LocalHull {
    vertices: Vec<usize>,
    facets: Vec<RawFacet>,
    /// Triangulation as indices into the input points.
    simplices: Vec<Vec<usize>>,
}

fn scale_of(points: &[Vec<f64>]) -> f64 {
    points.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()))
}

fn for_each_combination<F: FnMut(&[usize])>(m: usize, k: usize, mut f: F) {
    if k == 0 || k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    'outer: loop {
        f(&idx);
        for i in (0..k).rev() {
            if idx[i] < m - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                continue 'outer;
            }
        }
        return;
    }
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull vertex indices of planar points, collinear points dropped.
fn monotone_chain(points: &[Vec<f64>], tol: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i][0].total_cmp(&points[j][0]).then(points[i][1].total_cmp(&points[j][1])));
    let mut hull: Vec<usize> = Vec::with_capacity(2 * points.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 { Box::new(order.iter()) } else { Box::new(order.iter().rev()) };
        for &i in iter {
            while hull.len() >= start + 2 {
                let a = hull[hull.len() - 2];
                let b = hull[hull.len() - 1];
                let scale = linalg::dist(&points[a], &points[i]).max(1e-300);
                if cross2(&points[a], &points[b], &points[i]) <= tol * scale {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

fn project(origin: &[f64], basis: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let d = sub(x, origin);
    basis.iter().map(|b| dot(&d, b)).collect()
}

/// Hull of full-dimensional points in R^d, d ≥ 1, with a pulling triangulation.
fn local_hull(points: &[Vec<f64>], tol: f64) -> Result<LocalHull> {
    let d = points[0].len();
    if d == 1 {
        let (mut lo, mut hi) = (0, 0);
        for (i, p) in points.iter().enumerate() {
            if p[0] < points[lo][0] {
                lo = i;
            }
            if p[0] > points[hi][0] {
                hi = i;
            }
        }
        if points[hi][0] - points[lo][0] <= tol {
            return Err(Error::Degenerate("segment of zero length".into()));
        }
        return Ok(LocalHull {
            vertices: vec![lo, hi],
            facets: vec![
                RawFacet { normal: vec![-1.0], offset: -points[lo][0], members: vec![lo] },
                RawFacet { normal: vec![1.0], offset: points[hi][0], members: vec![hi] },
            ],
            simplices: vec![vec![lo, hi]],
        });
    }
    if d == 2 {
        let ring = monotone_chain(points, tol);
        if ring.len() < 3 {
            return Err(Error::Degenerate("planar points are collinear".into()));
        }
        let m = ring.len();
        let facets = (0..m)
            .map(|k| {
                let a = &points[ring[k]];
                let b = &points[ring[(k + 1) % m]];
                let e = sub(b, a);
                let l = linalg::norm(&e);
                let normal = vec![e[1] / l, -e[0] / l];
                let offset = dot(&normal, a);
                RawFacet { normal, offset, members: vec![ring[k], ring[(k + 1) % m]] }
            })
            .collect();
        let simplices = (1..m - 1).map(|k| vec![ring[0], ring[k], ring[k + 1]]).collect();
        return Ok(LocalHull { vertices: ring, facets, simplices });
    }
    let raw = brute_force_facets(points, tol)?;
    // apex: lexicographic minimum is always a vertex
    let apex = (0..points.len())
        .min_by(|&i, &j| points[i].iter().zip(&points[j]).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
        .expect("nonempty");
    let mut is_vertex = vec![false; points.len()];
    let mut simplices = Vec::new();
    for f in &raw {
        let basis = complement_basis(&f.normal);
        let origin = &points[f.members[0]];
        let local: Vec<Vec<f64>> = f.members.iter().map(|&i| project(origin, &basis, &points[i])).collect();
        let sub_hull = local_hull(&local, tol)?;
        for &v in &sub_hull.vertices {
            is_vertex[f.members[v]] = true;
        }
        if (dot(&f.normal, &points[apex]) - f.offset).abs() > tol {
            for s in &sub_hull.simplices {
                let mut cell: Vec<usize> = s.iter().map(|&j| f.members[j]).collect();
                cell.push(apex);
                simplices.push(cell);
            }
        }
    }
    let vertices = (0..points.len()).filter(|&i| is_vertex[i]).collect();
    Ok(LocalHull { vertices, facets: raw, simplices })
}

fn brute_force_facets(points: &[Vec<f64>], tol: f64) -> Result<Vec<RawFacet>> {
    let d = points[0].len();
    let m = points.len();
    let mut facets: Vec<RawFacet> = Vec::new();
    let mut on_facet: Vec<Vec<bool>> = Vec::new();
    for_each_combination(m, d, |idx| {
        if on_facet.iter().any(|mask| idx.iter().all(|&i| mask[i])) {
            return;
        }
        let diffs: Vec<Vec<f64>> = idx[1..].iter().map(|&i| sub(&points[i], &points[idx[0]])).collect();
        let Some(u) = normal_of(&diffs) else { return };
        let b = dot(&u, &points[idx[0]]);
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for p in points {
            let s = dot(&u, p) - b;
            lo = lo.min(s);
            hi = hi.max(s);
            if lo < -tol && hi > tol {
                return;
            }
        }
        let (u, b) = if hi <= tol { (u, b) } else { (u.iter().map(|x| -x).collect::<Vec<_>>(), -b) };
        let mask: Vec<bool> = points.iter().map(|p| (dot(&u, p) - b).abs() <= tol).collect();
        if let Some(k) = facets.iter().position(|f| dot(&f.normal, &u) > 1.0 - GEOM_TOL && (f.offset - b).abs() <= tol) {
            // the same facet seen through another triple: keep every member
            for (i, on) in mask.iter().enumerate() {
                if *on && !on_facet[k][i] {
                    on_facet[k][i] = true;
                    facets[k].members.push(i);
                }
            }
            return;
        }
        let members = (0..m).filter(|&i| mask[i]).collect();
        on_facet.push(mask);
        facets.push(RawFacet { normal: u, offset: b, members });
    });
    for f in &mut facets {
        f.members.sort_unstable();
    }
    if facets.len() < d + 1 {
        return Err(Error::Degenerate("hull has too few facets".into()));
    }
    Ok(facets)
}

fn dedup_points(points: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    let mut sorted: Vec<&Vec<f64>> = points.iter().collect();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));
    for p in sorted {
        let dup = out.iter().rev().take_while(|q| p[0] - q[0] <= tol).any(|q| linalg::dist(p, q) <= tol);
        if !dup {
            out.push(p.clone());
        }
    }
    out
}

impl Polytope {
    /// Convex hull of a point set with complete facet data.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let n = points.first().map(|p| p.len()).unwrap_or(0);
        if !(2..=4).contains(&n) {
            return Err(Error::config(format!("dimension {n} outside 2..=4")));
        }
        if points.iter().any(|p| p.len() != n || p.iter().any(|v| !v.is_finite())) {
            return Err(Error::config("points must share one dimension and be finite"));
        }
        let tol = GEOM_TOL * scale_of(points);
        let pts = dedup_points(points, tol);
        if pts.len() < n + 1 {
            return Err(Error::Degenerate(format!("{} distinct points cannot span dimension {n}", pts.len())));
        }
        let diffs: Vec<Vec<f64>> = pts[1..].iter().map(|p| sub(p, &pts[0])).collect();
        let span = scale_of(&diffs);
        if linalg::rank(&diffs, 1e-7 * span) < n {
            return Err(Error::Degenerate("points are affinely dependent".into()));
        }
        let hull = local_hull(&pts, tol)?;
        let mut index = vec![usize::MAX; pts.len()];
        let vertices: Vec<Vec<f64>> = hull
            .vertices
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                index[i] = k;
                pts[i].clone()
            })
            .collect();
        let mut facets = Vec::with_capacity(hull.facets.len());
        for f in hull.facets {
            let basis = complement_basis(&f.normal);
            let origin = &pts[f.members[0]];
            let local: Vec<Vec<f64>> = f.members.iter().map(|&i| project(origin, &basis, &pts[i])).collect();
            let sub_hull = local_hull(&local, tol)?;
            let simplices: Vec<Simplex> = sub_hull.simplices.iter().map(|s| s.iter().map(|&j| pts[f.members[j]].clone()).collect()).collect();
            let (area, centroid) = weighted_centroid(&simplices, n);
            let fv = sub_hull.vertices.iter().map(|&v| index[f.members[v]]).filter(|&k| k != usize::MAX).collect();
            facets.push(Facet { normal: f.normal, offset: f.offset, area, centroid, vertices: fv, simplices });
        }
        let mid = mean(&vertices);
        let mut volume = 0.0;
        let mut centroid = vec![0.0; n];
        for f in &facets {
            for s in &f.simplices {
                let mut cell = s.clone();
                cell.push(mid.clone());
                let v = simplex_volume(&cell);
                volume += v;
                let c = mean(&cell);
                centroid.iter_mut().zip(&c).for_each(|(a, b)| *a += v * b);
            }
        }
        centroid.iter_mut().for_each(|a| *a /= volume);
        if volume <= 0.0 {
            return Err(Error::Degenerate("zero volume".into()));
        }
        Ok(Self { dim: n, vertices, facets, volume, centroid })
    }

    pub fn simplex(n: usize) -> Result<Self> {
        let mut pts = vec![vec![0.0; n]];
        pts.extend((0..n).map(|k| linalg::unit(n, k)));
        Self::from_points(&pts)
    }

    pub fn cube(n: usize, half_width: f64) -> Result<Self> {
        let pts: Vec<Vec<f64>> =
            (0..1usize << n).map(|mask| (0..n).map(|k| if mask >> k & 1 == 1 { half_width } else { -half_width }).collect()).collect();
        Self::from_points(&pts)
    }

    pub fn cross_polytope(n: usize, radius: f64) -> Result<Self> {
        let pts: Vec<Vec<f64>> = (0..n).flat_map(|k| [1.0, -1.0].map(|s| linalg::scale(&linalg::unit(n, k), s * radius))).collect();
        Self::from_points(&pts)
    }

    pub fn regular_polygon(count: usize, radius: f64) -> Result<Self> {
        if count < 3 {
            return Err(Error::config("regular polygon needs at least 3 vertices"));
        }
        let pts: Vec<Vec<f64>> = (0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                vec![radius * t.cos(), radius * t.sin()]
            })
            .collect();
        Self::from_points(&pts)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn centroid(&self) -> &[f64] {
        &self.centroid
    }

    pub fn surface_area(&self) -> f64 {
        self.facets.iter().map(|f| f.area).sum()
    }

    pub fn tolerance(&self) -> f64 {
        GEOM_TOL * scale_of(&self.vertices)
    }

    pub fn support(&self, theta: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(v, theta)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_with(x, self.tolerance())
    }

    #[inline]
    pub fn contains_with(&self, x: &[f64], tol: f64) -> bool {
        self.facets.iter().all(|f| dot(&f.normal, x) <= f.offset + tol)
    }

    /// Minimum slack b_i − ⟨u_i, x⟩ over facets; positive exactly for interior points.
    pub fn depth(&self, x: &[f64]) -> f64 {
        self.facets.iter().map(|f| f.offset - dot(&f.normal, x)).fold(f64::INFINITY, f64::min)
    }

    pub fn contains_origin_interior(&self) -> bool {
        self.depth(&vec![0.0; self.dim]) > GEOM_TOL
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(linalg::dist(a, b));
            }
        }
        d
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let lo = (0..self.dim).map(|k| self.vertices.iter().map(|v| v[k]).fold(f64::INFINITY, f64::min)).collect();
        let hi = (0..self.dim).map(|k| self.vertices.iter().map(|v| v[k]).fold(f64::NEG_INFINITY, f64::max)).collect();
        (lo, hi)
    }

    pub fn radial(&self, theta: &[f64]) -> Result<f64> {
        self.generalized_radial(&vec![0.0; self.dim], theta)
    }

    /// ρ_K(x, θ): distance factor from interior point x to the boundary along θ.
    pub fn generalized_radial(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        if self.depth(x) <= GEOM_TOL {
            return Err(Error::domain("base point is not interior to the body"));
        }
        Ok(self.ray_exit(x, theta))
    }

    fn ray_exit(&self, x: &[f64], theta: &[f64]) -> f64 {
        self.facets
            .iter()
            .filter_map(|f| {
                let c = dot(&f.normal, theta);
                (c > 0.0).then(|| (f.offset - dot(&f.normal, x)) / c)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Gauge ‖x‖_K = max_i ⟨u_i,x⟩/b_i; requires 0 in the interior.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        self.gauge_facet(x).0
    }

    /// Gauge together with the index of the facet attaining it.
    pub fn gauge_facet(&self, x: &[f64]) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, f) in self.facets.iter().enumerate() {
            let v = dot(&f.normal, x) / f.offset;
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }

    pub fn polar(&self) -> Result<Self> {
        let min_offset = self.facets.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min);
        if min_offset <= GEOM_TOL {
            return Err(Error::domain("origin is not interior; polar body is unbounded"));
        }
        let pts: Vec<Vec<f64>> = self.facets.iter().map(|f| linalg::scale(&f.normal, 1.0 / f.offset)).collect();
        Self::from_points(&pts)
    }

    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::config("Minkowski sum of bodies of different dimensions"));
        }
        let pts: Vec<Vec<f64>> = self.vertices.iter().flat_map(|a| other.vertices.iter().map(move |b| linalg::add(a, b))).collect();
        Self::from_points(&pts)
    }

    /// Minkowski sum with a finite point set (e.g. a single translation vector).
    pub fn minkowski_sum_points(&self, points: &[Vec<f64>]) -> Result<Self> {
        let pts: Vec<Vec<f64>> = self.vertices.iter().flat_map(|a| points.iter().map(move |b| linalg::add(a, b))).collect();
        Self::from_points(&pts)
    }

    pub fn difference_body(&self) -> Result<Self> {
        self.minkowski_sum(&self.reflected())
    }

    /// −K.
    pub fn reflected(&self) -> Self {
        self.map_affine(|v| v.iter().map(|x| -x).collect(), |u| u.iter().map(|x| -x).collect(), |b| b)
    }

    pub fn translated(&self, x: &[f64]) -> Self {
        let xs = x.to_vec();
        let xs2 = x.to_vec();
        self.map_affine_with(move |v| linalg::add(v, &xs), |u| u.to_vec(), move |u, b| b + dot(u, &xs2), 1.0)
    }

    pub fn scaled(&self, t: f64) -> Result<Self> {
        if t <= 0.0 {
            return Err(Error::config("scaling factor must be positive"));
        }
        let n = self.dim as i32;
        Ok(self.map_affine_with(move |v| linalg::scale(v, t), |u| u.to_vec(), move |_, b| b * t, t.powi(n - 1)).with_volume_factor(t.powi(n)))
    }

    fn with_volume_factor(mut self, f: f64) -> Self {
        self.volume *= f;
        self
    }

    fn map_affine<V, U, B>(&self, fv: V, fu: U, fb: B) -> Self
    where
        V: Fn(&[f64]) -> Vec<f64>,
        U: Fn(&[f64]) -> Vec<f64>,
        B: Fn(f64) -> f64,
    {
        self.map_affine_with(fv, fu, move |_, b| fb(b), 1.0)
    }

    /// Apply an isometry-like map that preserves facet structure (reflection, translation, scaling).
    fn map_affine_with<V, U, B>(&self, fv: V, fu: U, fb: B, area_factor: f64) -> Self
    where
        V: Fn(&[f64]) -> Vec<f64>,
        U: Fn(&[f64]) -> Vec<f64>,
        B: Fn(&[f64], f64) -> f64,
    {
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let normal = fu(&f.normal);
                Facet {
                    offset: fb(&normal, f.offset),
                    normal,
                    area: f.area * area_factor,
                    centroid: fv(&f.centroid),
                    vertices: f.vertices.clone(),
                    simplices: f.simplices.iter().map(|s| s.iter().map(|v| fv(v)).collect()).collect(),
                }
            })
            .collect();
        Self { dim: self.dim, vertices: self.vertices.iter().map(|v| fv(v)).collect(), facets, volume: self.volume, centroid: fv(&self.centroid) }
    }

    pub fn apply_linear(&self, t: &LinearMap) -> Result<Self> {
        if t.dim() != self.dim {
            return Err(Error::config("linear map dimension does not match body"));
        }
        if !t.is_invertible() {
            return Err(Error::config("linear map is singular"));
        }
        let pts: Vec<Vec<f64>> = self.vertices.iter().map(|v| t.apply(v)).collect();
        Self::from_points(&pts)
    }

    pub fn halfspaces(&self) -> Vec<(Vec<f64>, f64)> {
        self.facets.iter().map(|f| (f.normal.clone(), f.offset)).collect()
    }

    /// Triangulation of the solid into n-simplices (cones over facet simplices).
    pub fn simplices(&self) -> Vec<Simplex> {
        let mid = mean(&self.vertices);
        self.facets
            .iter()
            .flat_map(|f| {
                f.simplices.iter().map(|s| {
                    let mut c = s.clone();
                    c.push(mid.clone());
                    c
                })
            })
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let tol = 1e-7 * scale_of(&self.vertices);
        self.vertices.iter().all(|v| self.vertices.iter().any(|w| v.iter().zip(w).all(|(a, b)| (a + b).abs() <= tol)))
    }

    /// K ∩ (K + x), or `None` when empty or lower-dimensional.
    pub fn intersect_translate(&self, x: &[f64]) -> Result<Option<Polytope>> {
        let pts = self.translate_pair_vertices(x, 1.0, 0.0);
        if pts.len() < self.dim + 1 {
            return Ok(None);
        }
        match Polytope::from_points(&pts) {
            Ok(p) => Ok(Some(p)),
            Err(Error::Degenerate(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// (K + a·x) ∩ (K + b·x) as a vertex list (for 2-D in cyclic order).
    pub fn translate_pair_vertices(&self, x: &[f64], a: f64, b: f64) -> Vec<Vec<f64>> {
        match self.dim {
            2 => self.clip_translate(x, a, b),
            3 => dedup_points(&self.clip_faces(x, a, b).into_iter().flat_map(|(_, ring)| ring).collect::<Vec<_>>(), self.tolerance()),
            _ => hpolytope_vertices(&self.translate_pair_halfspaces(x, a, b), self.dim, self.tolerance()),
        }
    }

    /// Volume of (K + b·x) ∩ (K + a·x); exact.
    pub fn translate_pair_volume(&self, x: &[f64], a: f64, b: f64) -> f64 {
        match self.dim {
            2 => polygon_area(&self.clip_translate(x, a, b)),
            3 => self.clip_faces(x, a, b).iter().map(|(u, ring)| dot(u, &ring[0]) * ring_area(u, ring) / 3.0).sum::<f64>().max(0.0),
            _ => {
                let pts = self.translate_pair_vertices(x, a, b);
                if pts.len() < self.dim + 1 {
                    return 0.0;
                }
                Polytope::from_points(&pts).map(|p| p.volume).unwrap_or(0.0)
            }
        }
    }

    /// Longest chord of K along the unit vector θ, i.e. the radial function of K − K,
    /// found by bisection on whether K ∩ (K + tθ) is a nondegenerate polytope.
    pub fn max_chord(&self, theta: &[f64]) -> f64 {
        let (mut lo, mut hi) = (0.0, self.diameter() * (1.0 + 1e-9));
        while hi - lo > 4.0 * f64::EPSILON * hi {
            let t = 0.5 * (lo + hi);
            let x = scale(theta, t);
            let hit = match self.dim {
                2 => self.clip_translate(&x, 1.0, 0.0).len() > 2,
                3 => !self.clip_faces(&x, 1.0, 0.0).is_empty(),
                _ => self.translate_pair_vertices(&x, 1.0, 0.0).len() > self.dim,
            };
            if hit {
                lo = t;
            } else {
                hi = t;
            }
        }
        lo
    }

    /// Triangulation of (K + b·x) ∩ (K + a·x) into n-simplices.
    pub fn translate_pair_simplices(&self, x: &[f64], a: f64, b: f64) -> Vec<Simplex> {
        match self.dim {
            2 => {
                let ring = self.clip_translate(x, a, b);
                (1..ring.len().saturating_sub(1)).map(|k| vec![ring[0].clone(), ring[k].clone(), ring[k + 1].clone()]).collect()
            }
            3 => {
                let faces = self.clip_faces(x, a, b);
                let pts: Vec<&Vec<f64>> = faces.iter().flat_map(|(_, ring)| ring).collect();
                if pts.is_empty() {
                    return Vec::new();
                }
                let apex: Vec<f64> = (0..3).map(|j| pts.iter().map(|p| p[j]).sum::<f64>() / pts.len() as f64).collect();
                faces
                    .iter()
                    .flat_map(|(_, ring)| (1..ring.len() - 1).map(|k| vec![ring[0].clone(), ring[k].clone(), ring[k + 1].clone(), apex.clone()]))
                    .collect()
            }
            _ => {
                let pts = self.translate_pair_vertices(x, a, b);
                if pts.len() < self.dim + 1 {
                    return Vec::new();
                }
                Polytope::from_points(&pts).map(|p| p.simplices()).unwrap_or_default()
            }
        }
    }

    /// Facet polygons of a 3-polytope, each in cyclic order, with outward normals.
    fn face_rings(&self) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
        self.facets
            .iter()
            .map(|f| (f.normal.clone(), cyclic_order(&f.normal, f.vertices.iter().map(|&i| self.vertices[i].clone()).collect())))
            .collect()
    }

    /// Faces of (K + b·x) ∩ (K + a·x) for a 3-polytope, by clipping the faces of K + b·x
    /// with each halfspace of K + a·x.
    fn clip_faces(&self, x: &[f64], a: f64, b: f64) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
        let eps = 64.0 * f64::EPSILON * scale_of(&self.vertices).max(linalg::norm(x));
        let mut faces: Vec<(Vec<f64>, Vec<Vec<f64>>)> = self
            .face_rings()
            .into_iter()
            .map(|(u, ring)| (u, ring.into_iter().map(|v| v.iter().zip(x).map(|(p, t)| p + b * t).collect()).collect()))
            .collect();
        for f in &self.facets {
            let off = f.offset + a * dot(&f.normal, x);
            let side = |p: &[f64]| {
                let d = dot(&f.normal, p) - off;
                if d.abs() <= eps {
                    0.0
                } else {
                    d
                }
            };
            if !faces.iter().any(|(_, ring)| ring.iter().any(|p| side(p) > 0.0)) {
                continue;
            }
            let mut cut = Vec::new();
            let mut next = Vec::with_capacity(faces.len() + 1);
            for (u, ring) in faces {
                let m = ring.len();
                let mut out = Vec::with_capacity(m + 1);
                for k in 0..m {
                    let p = &ring[k];
                    let q = &ring[(k + 1) % m];
                    let (sp, sq) = (side(p), side(q));
                    if sp <= 0.0 {
                        out.push(p.clone());
                    }
                    if sp == 0.0 {
                        cut.push(p.clone());
                    }
                    if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
                        let t = sp / (sp - sq);
                        let y: Vec<f64> = p.iter().zip(q).map(|(c, d)| c + t * (d - c)).collect();
                        cut.push(y.clone());
                        out.push(y);
                    }
                }
                if out.len() >= 3 {
                    next.push((u, out));
                }
            }
            if cut.len() >= 3 {
                next.push((f.normal.clone(), cyclic_order(&f.normal, cut)));
            }
            faces = next;
            if faces.len() < 4 {
                return Vec::new();
            }
        }
        faces
    }

    /// Exact covariogram g_K(x) = Vol(K ∩ (K + x)).
    pub fn covariogram(&self, x: &[f64]) -> f64 {
        self.translate_pair_volume(x, 1.0, 0.0)
    }

    fn translate_pair_halfspaces(&self, x: &[f64], a: f64, b: f64) -> Vec<(Vec<f64>, f64)> {
        let mut hs: Vec<(Vec<f64>, f64)> = Vec::with_capacity(2 * self.facets.len());
        for f in &self.facets {
            let s = dot(&f.normal, x);
            let (o1, o2) = (f.offset + a * s, f.offset + b * s);
            hs.push((f.normal.clone(), o1.min(o2)));
        }
        hs
    }

    fn clip_translate(&self, x: &[f64], a: f64, b: f64) -> Vec<Vec<f64>> {
        // vertices of K + b·x in ccw order, clipped by halfplanes of K + a·x
        let mut ring: Vec<Vec<f64>> = self.vertices.iter().map(|v| vec![v[0] + b * x[0], v[1] + b * x[1]]).collect();
        for f in &self.facets {
            let off = f.offset + a * dot(&f.normal, x);
            ring = clip_halfplane(&ring, &f.normal, off);
            if ring.len() < 3 {
                return Vec::new();
            }
        }
        ring
    }
}

fn clip_halfplane(ring: &[Vec<f64>], u: &[f64], b: f64) -> Vec<Vec<f64>> {
    let m = ring.len();
    let mut out = Vec::with_capacity(m + 1);
    for k in 0..m {
        let p = &ring[k];
        let q = &ring[(k + 1) % m];
        let sp = dot(u, p) - b;
        let sq = dot(u, q) - b;
        if sp <= 0.0 {
            out.push(p.clone());
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push(vec![p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Points of a planar convex polygon with normal `u`, sorted by angle about their mean.
fn cyclic_order(u: &[f64], pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let basis = complement_basis(u);
    let c = mean(&pts);
    let mut keyed: Vec<(f64, Vec<f64>)> = pts
        .into_iter()
        .map(|p| {
            let d = sub(&p, &c);
            (dot(&d, &basis[1]).atan2(dot(&d, &basis[0])), p)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, p)| p).collect()
}

/// Area of a planar polygon in R³ with unit normal `u`.
fn ring_area(u: &[f64], ring: &[Vec<f64>]) -> f64 {
    let m = ring.len();
    let mut acc = [0.0; 3];
    for k in 0..m {
        let p = &ring[k];
        let q = &ring[(k + 1) % m];
        acc[0] += p[1] * q[2] - p[2] * q[1];
        acc[1] += p[2] * q[0] - p[0] * q[2];
        acc[2] += p[0] * q[1] - p[1] * q[0];
    }
    0.5 * dot(&acc, u).abs()
}

/// Shoelace area of a cyclic polygon.
pub fn polygon_area(ring: &[Vec<f64>]) -> f64 {
    let m = ring.len();
    if m < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for k in 0..m {
        let p = &ring[k];
        let q = &ring[(k + 1) % m];
        s += p[0] * q[1] - p[1] * q[0];
    }
    0.5 * s.abs()
}

/// Vertices of {y : ⟨u_i, y⟩ ≤ b_i} by enumeration of n-subsets of tight constraints.
pub fn hpolytope_vertices(halfspaces: &[(Vec<f64>, f64)], n: usize, tol: f64) -> Vec<Vec<f64>> {
    // merge parallel constraints, keeping the tighter one
    let mut hs: Vec<(Vec<f64>, f64)> = Vec::with_capacity(halfspaces.len());
    for (u, b) in halfspaces {
        if let Some(h) = hs.iter_mut().find(|(v, _)| dot(u, v) > 1.0 - GEOM_TOL) {
            h.1 = h.1.min(*b);
        } else {
            hs.push((u.clone(), *b));
        }
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    for_each_combination(hs.len(), n, |idx| {
        let rows: Vec<&[f64]> = idx.iter().map(|&i| hs[i].0.as_slice()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| hs[i].1).collect();
        let Some(y) = linalg::solve_rows(&rows, &rhs) else { return };
        if hs.iter().all(|(u, b)| dot(u, &y) <= b + 1e-3 * tol) && !out.iter().any(|p| linalg::dist(p, &y) <= tol) {
            out.push(y);
        }
    });
    out
}

fn mean(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points[0].len();
    let mut c = vec![0.0; n];
    for p in points {
        c.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    c.iter_mut().for_each(|a| *a /= points.len() as f64);
    c
}

fn weighted_centroid(simplices: &[Simplex], n: usize) -> (f64, Vec<f64>) {
    let mut total = 0.0;
    let mut c = vec![0.0; n];
    for s in simplices {
        let v = simplex_volume(s);
        total += v;
        let m = mean(s);
        c.iter_mut().zip(&m).for_each(|(a, b)| *a += v * b);
    }
    c.iter_mut().for_each(|a| *a /= total);
    (total, c)
}

/// Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    dim: usize,
    radius: f64,
    center: Vec<f64>,
}

impl Ball {
    pub fn new(dim: usize, radius: f64) -> Result<Self> {
        Self::with_center(radius, vec![0.0; dim])
    }

    pub fn with_center(radius: f64, center: Vec<f64>) -> Result<Self> {
        if !(2..=4).contains(&center.len()) {
            return Err(Error::config("ball dimension outside 2..=4"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::config("ball radius must be positive"));
        }
        Ok(Self { dim: center.len(), radius, center })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn support(&self, theta: &[f64]) -> f64 {
        self.radius * linalg::norm(theta) + dot(&self.center, theta)
    }

    pub fn radial(&self, theta: &[f64]) -> Result<f64> {
        self.generalized_radial(&vec![0.0; self.dim], theta)
    }

    pub fn generalized_radial(&self, x: &[f64], theta: &[f64]) -> Result<f64> {
        let d = sub(x, &self.center);
        if linalg::norm(&d) >= self.radius - GEOM_TOL {
            return Err(Error::domain("base point is not interior to the ball"));
        }
        let a = dot(theta, theta);
        let b = dot(&d, theta);
        let c = dot(&d, &d) - self.radius * self.radius;
        Ok((-b + (b * b - a * c).sqrt()) / a)
    }

    pub fn volume(&self) -> f64 {
        kappa(self.dim) * self.radius.powi(self.dim as i32)
    }

    pub fn surface_area(&self) -> f64 {
        self.dim as f64 * kappa(self.dim) * self.radius.powi(self.dim as i32 - 1)
    }

    /// Support function of the projection body, κ_{n−1} R^{n−1} |θ|.
    pub fn projection_support(&self, theta: &[f64]) -> f64 {
        kappa(self.dim - 1) * self.radius.powi(self.dim as i32 - 1) * linalg::norm(theta)
    }

    /// Covariogram at distance d: 2κ_{n−1}Rⁿ ∫_{d/2R}^1 (1−t²)^{(n−1)/2} dt.
    pub fn covariogram_at(&self, d: f64) -> Result<f64> {
        let r = self.radius;
        if d >= 2.0 * r {
            return Ok(0.0);
        }
        let e = (self.dim as f64 - 1.0) / 2.0;
        let q = numerics::integrate_1d(|t| (1.0 - t * t).max(0.0).powf(e), d / (2.0 * r), 1.0, 1e-13)?;
        Ok(2.0 * kappa(self.dim - 1) * r.powi(self.dim as i32) * q.value)
    }
}

/// Either kind of convex body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Body {
    Polytope(Polytope),
    Ball(Ball),
}

impl Body {
    pub fn dim(&self) -> usize {
        match self {
            Body::Polytope(p) => p.dim(),
            Body::Ball(b) => b.dim(),
        }
    }

    pub fn support(&self, theta: &[f64]) -> f64 {
        match self {
            Body::Polytope(p) => p.support(theta),
            Body::Ball(b) => b.support(theta),
        }
    }

    pub fn radial(&self, theta: &[f64]) -> Result<f64> {
        match self {
            Body::Polytope(p) => p.radial(theta),
            Body::Ball(b) => b.radial(theta),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            Body::Polytope(p) => p.volume(),
            Body::Ball(b) => b.volume(),
        }
    }

    pub fn as_polytope(&self) -> Result<&Polytope> {
        match self {
            Body::Polytope(p) => Ok(p),
            Body::Ball(_) => Err(Error::config("operation needs a polytope; approximate the ball by regular_polygon")),
        }
    }
}

/// Star body sampled on a sphere grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarBody {
    grid: SphereGrid,
    radial: Vec<f64>,
}

impl StarBody {
    pub fn new(grid: SphereGrid, radial: Vec<f64>) -> Result<Self> {
        if radial.len() != grid.len() {
            return Err(Error::config("radial values must match grid size"));
        }
        if radial.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::domain("radial values must be finite and nonnegative"));
        }
        Ok(Self { grid, radial })
    }

    pub fn from_fn<F: FnMut(&[f64]) -> Result<f64>>(grid: SphereGrid, mut rho: F) -> Result<Self> {
        let radial = grid.directions().iter().map(|d| rho(d)).collect::<Result<Vec<_>>>()?;
        Self::new(grid, radial)
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn radial(&self) -> &[f64] {
        &self.radial
    }

    pub fn volume(&self) -> f64 {
        let n = self.grid.dim() as i32;
        self.grid.weights().iter().zip(&self.radial).map(|(w, r)| w * r.powi(n)).sum::<f64>() / n as f64
    }
}

/// Vol(L°) = (1/n)∫ h_L^{−n} on the grid.
pub fn polar_volume_from_support<H: Fn(&[f64]) -> f64>(h: H, grid: &SphereGrid) -> Result<f64> {
    let n = grid.dim() as i32;
    let mut acc = 0.0;
    for (theta, w) in grid.iter() {
        let v = h(theta);
        if !(v > 0.0) {
            return Err(Error::PolarDomain(format!("support value {v} is not positive at direction {theta:?}")));
        }
        acc += w * v.powi(-n);
    }
    Ok(acc / n as f64)
}
