//! Wulff crystals from direction-sampled tensions, surface energies of
//! polygonal profiles, and crystal diagnostics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const TOUCH: f64 = 1e-9;
const MERGE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WulffError {
    #[error("tension does not bound a crystal of positive volume")]
    DegenerateTension,
    #[error("profile is not a simple closed polytope: {0}")]
    NonSimplePolytope(String),
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("tension values must be finite and nonnegative (direction {0})")]
    BadValue(usize),
    #[error("direction {0} has zero length or wrong dimension")]
    BadDirection(usize),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Signed permutation matrices of the lattice, as (permutation, signs).
fn hyperoctahedral(dim: usize) -> Vec<(Vec<usize>, Vec<f64>)> {
    let perms: Vec<Vec<usize>> = match dim {
        2 => vec![vec![0, 1], vec![1, 0]],
        _ => vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ],
    };
    let mut out = Vec::new();
    for p in perms {
        for mask in 0..(1usize << dim) {
            let s = (0..dim).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
            out.push((p.clone(), s));
        }
    }
    out
}

fn apply(g: &(Vec<usize>, Vec<f64>), n: &[f64]) -> Vec<f64> {
    g.0.iter().zip(&g.1).map(|(&i, s)| s * n[i]).collect()
}

/// `τ` sampled on a grid of unit vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensionFunction {
    dim: usize,
    directions: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl TensionFunction {
    /// Normalizes the directions and completes the table under `n ↦ -n`.
    /// Duplicate directions get the mean of their values.
    pub fn new(dim: usize, directions: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self, WulffError> {
        Self::completed(dim, directions, values, false)
    }

    /// As [`TensionFunction::new`], completing under the full lattice
    /// symmetry group (coordinate permutations and sign changes).
    pub fn with_lattice_symmetry(dim: usize, directions: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self, WulffError> {
        Self::completed(dim, directions, values, true)
    }

    /// Evaluates `f` on every grid direction.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(dim: usize, directions: Vec<Vec<f64>>, f: F) -> Result<Self, WulffError> {
        let values = directions.iter().map(|n| f(&normalized(n))).collect();
        Self::new(dim, directions, values)
    }

    fn completed(dim: usize, directions: Vec<Vec<f64>>, values: Vec<f64>, lattice: bool) -> Result<Self, WulffError> {
        if dim != 2 && dim != 3 {
            return Err(WulffError::BadDimension(dim));
        }
        let group = if lattice {
            hyperoctahedral(dim)
        } else {
            let id: Vec<usize> = (0..dim).collect();
            vec![(id.clone(), vec![1.0; dim]), (id, vec![-1.0; dim])]
        };
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        let mut sums: Vec<(f64, usize)> = Vec::new();
        for (i, (n, &v)) in directions.iter().zip(&values).enumerate() {
            if n.len() != dim || norm(n) == 0.0 || !norm(n).is_finite() {
                return Err(WulffError::BadDirection(i));
            }
            if !(v.is_finite() && v >= 0.0) {
                return Err(WulffError::BadValue(i));
            }
            let u = normalized(n);
            for g in &group {
                let m = apply(g, &u);
                match dirs.iter().position(|d| close(d, &m, MERGE)) {
                    Some(k) => {
                        sums[k].0 += v;
                        sums[k].1 += 1;
                    }
                    None => {
                        dirs.push(m);
                        sums.push((v, 1));
                    }
                }
            }
        }
        let values = sums.iter().map(|(s, c)| s / *c as f64).collect();
        Ok(TensionFunction { dim, directions: dirs, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Value on a grid direction, if `n` is one.
    pub fn value_at(&self, n: &[f64]) -> Option<f64> {
        let u = normalized(n);
        self.directions.iter().position(|d| close(d, &u, MERGE)).map(|k| self.values[k])
    }
}

fn normalized(n: &[f64]) -> Vec<f64> {
    let r = norm(n);
    n.iter().map(|x| x / r).collect()
}

/// `n` equally spaced unit vectors in the plane, starting on the first axis.
pub fn grid_2d(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

/// The directions of [`grid_2d`] with angle in `[0, π/4]`; the lattice
/// symmetry completion recovers the full grid when `8 | n`.
pub fn octant_grid_2d(n: usize) -> Vec<Vec<f64>> {
    grid_2d(n)
        .into_iter()
        .filter(|v| v[1] >= -1e-15 && v[1] <= v[0] + 1e-12)
        .collect()
}

/// Vertices of the octahedron with each face subdivided `k` times,
/// projected to the sphere: `4k² + 2` directions.
pub fn grid_3d(k: usize) -> Vec<Vec<f64>> {
    let k = k.max(1) as i64;
    let mut out: Vec<Vec<f64>> = Vec::new();
    for a in -k..=k {
        for b in -(k - a.abs())..=(k - a.abs()) {
            let c = k - a.abs() - b.abs();
            for s in [1, -1] {
                if c == 0 && s == -1 {
                    continue;
                }
                out.push(normalized(&[a as f64, b as f64, (s * c) as f64]));
            }
        }
    }
    out
}

/// Default grids: 64 directions in 2D, 146 in 3D.
pub fn default_grid(dim: usize) -> Vec<Vec<f64>> {
    if dim == 2 {
        grid_2d(64)
    } else {
        grid_3d(6)
    }
}

/// Normalized crystal `λ{x : x·n ≤ τ(n)}` with volume 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WulffShape {
    pub dim: usize,
    /// 2D: counterclockwise polygon. 3D: distinct vertices.
    pub vertices: Vec<Vec<f64>>,
    /// 3D faces as vertex loops (outward orientation); empty in 2D.
    pub faces: Vec<Vec<usize>>,
    /// `λ = Vol(raw)^{-1/d}`.
    pub scale: f64,
    pub volume: f64,
    pub raw_volume: f64,
    /// Half-spaces `x·n ≤ λτ(n)` of the normalized crystal.
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

impl WulffShape {
    /// Vertices of the unnormalized crystal.
    pub fn raw_vertices(&self) -> Vec<Vec<f64>> {
        self.vertices.iter().map(|v| v.iter().map(|x| x / self.scale).collect()).collect()
    }

    /// Support function `sup_x x·n` of the normalized crystal.
    pub fn support(&self, n: &[f64]) -> f64 {
        self.vertices.iter().map(|v| dot(v, n)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.normals.iter().zip(&self.offsets).all(|(n, b)| dot(n, x) <= b + tol)
    }

    /// The crystal scaled by `alpha` as a polytope, for surface energies.
    pub fn scaled(&self, alpha: f64) -> Profile {
        let v: Vec<Vec<f64>> = self.vertices.iter().map(|p| p.iter().map(|x| alpha * x).collect()).collect();
        if self.dim == 2 {
            Profile::Polygon(v)
        } else {
            Profile::Polyhedron { vertices: v, faces: self.faces.clone() }
        }
    }
}

fn clip_polygon(poly: &[Vec<f64>], n: &[f64], b: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let m = poly.len();
    for i in 0..m {
        let p = &poly[i];
        let q = &poly[(i + 1) % m];
        let fp = dot(n, p) - b;
        let fq = dot(n, q) - b;
        if fp <= 0.0 {
            out.push(p.clone());
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(p.iter().zip(q).map(|(a, c)| a + t * (c - a)).collect());
        }
    }
    dedupe_loop(out)
}

fn dedupe_loop(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.dedup_by(|a, b| close(a, b, MERGE));
    while pts.len() > 1 && close(&pts[0], &pts[pts.len() - 1], MERGE) {
        pts.pop();
    }
    pts
}

/// Drops loop vertices lying on the segment between their neighbours.
fn drop_collinear(mut pts: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut i = 0;
    while pts.len() >= 3 && i < pts.len() {
        let m = pts.len();
        let a = sub(&pts[i], &pts[(i + m - 1) % m]);
        let b = sub(&pts[(i + 1) % m], &pts[i]);
        let c = if a.len() == 2 {
            (a[0] * b[1] - a[1] * b[0]).abs()
        } else {
            norm(&cross3(&a, &b))
        };
        if c <= tol * norm(&a).max(norm(&b)) {
            pts.remove(i);
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    pts
}

/// Orders coplanar points counterclockwise about `normal`.
fn order_around(points: Vec<Vec<f64>>, normal: &[f64]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if !pts.iter().any(|q| close(q, &p, MERGE)) {
            pts.push(p);
        }
    }
    if pts.len() < 3 {
        return pts;
    }
    let c: Vec<f64> = (0..3).map(|i| pts.iter().map(|p| p[i]).sum::<f64>() / pts.len() as f64).collect();
    let helper = if normal[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = cross3(normal, &helper);
    let u = normalized(&u);
    let w = cross3(normal, &u);
    let mut keyed: Vec<(f64, Vec<f64>)> = pts
        .into_iter()
        .map(|p| {
            let d = sub(&p, &c);
            (dot(&d, &w).atan2(dot(&d, &u)), p)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|k| k.1).collect()
}

fn clip_polytope(faces: Vec<(Vec<f64>, Vec<Vec<f64>>)>, n: &[f64], b: f64, tol: f64) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
    let mut out = Vec::with_capacity(faces.len() + 1);
    let mut cap = Vec::new();
    for (fnorm, poly) in faces {
        let clipped = drop_collinear(clip_polygon(&poly, n, b), tol);
        for p in &clipped {
            if (dot(n, p) - b).abs() <= 1e-9 * b.abs().max(1.0) {
                cap.push(p.clone());
            }
        }
        if clipped.len() >= 3 {
            out.push((fnorm, clipped));
        }
    }
    let cap = drop_collinear(order_around(cap, n), tol);
    if cap.len() >= 3 {
        out.push((n.to_vec(), cap));
    }
    out
}

fn polygon_area(poly: &[Vec<f64>]) -> f64 {
    let m = poly.len();
    (0..m)
        .map(|i| {
            let (p, q) = (&poly[i], &poly[(i + 1) % m]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        / 2.0
}

/// Newell normal times area of a planar 3D loop.
fn vector_area(poly: &[Vec<f64>]) -> [f64; 3] {
    let m = poly.len();
    let mut a = [0.0; 3];
    for i in 0..m {
        let c = cross3(&poly[i], &poly[(i + 1) % m]);
        for k in 0..3 {
            a[k] += c[k] / 2.0;
        }
    }
    a
}

fn polyhedron_volume(faces: &[Vec<Vec<f64>>]) -> f64 {
    faces.iter().map(|f| dot(&f[0], &vector_area(f)) / 3.0).sum()
}

/// Half-space intersection over the grid, rescaled to volume 1.
pub fn wulff_construct(tau: &TensionFunction) -> Result<WulffShape, WulffError> {
    let dim = tau.dim;
    let tmax = tau.values.iter().copied().fold(0.0, f64::max);
    if tmax <= 0.0 {
        return Err(WulffError::DegenerateTension);
    }
    let big = 1e4 * tmax;
    let (raw_faces, raw_volume): (Vec<Vec<Vec<f64>>>, f64) = if dim == 2 {
        let mut poly = vec![vec![-big, -big], vec![big, -big], vec![big, big], vec![-big, big]];
        for (n, &t) in tau.directions.iter().zip(&tau.values) {
            poly = clip_polygon(&poly, n, t);
            if poly.len() < 3 {
                return Err(WulffError::DegenerateTension);
            }
        }
        let poly = drop_collinear(poly, 1e-12 * big);
        let a = polygon_area(&poly);
        (vec![poly], a)
    } else {
        let mut faces = Vec::new();
        for axis in 0..3 {
            for s in [1.0, -1.0] {
                let mut n = vec![0.0; 3];
                n[axis] = s;
                let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
                let mut loop_ = Vec::new();
                for (a, b) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                    let mut p = vec![0.0; 3];
                    p[axis] = s * big;
                    p[i] = a * big;
                    p[j] = b * big;
                    loop_.push(p);
                }
                let loop_ = order_around(loop_, &n);
                faces.push((n, loop_));
            }
        }
        for (n, &t) in tau.directions.iter().zip(&tau.values) {
            faces = clip_polytope(faces, n, t, 1e-12 * big);
            if faces.len() < 4 {
                return Err(WulffError::DegenerateTension);
            }
        }
        let loops: Vec<Vec<Vec<f64>>> = faces.into_iter().map(|f| drop_collinear(f.1, 1e-12 * big)).collect();
        let v = polyhedron_volume(&loops);
        (loops, v)
    };
    let touches = raw_faces.iter().flatten().any(|p| p.iter().any(|x| x.abs() >= big * (1.0 - TOUCH)));
    if touches || !(raw_volume > 1e-12 * tmax.powi(dim as i32)) {
        return Err(WulffError::DegenerateTension);
    }
    let scale = raw_volume.powf(-1.0 / dim as f64);
    let scaled = |p: &Vec<f64>| -> Vec<f64> { p.iter().map(|x| x * scale).collect() };
    let (vertices, faces) = if dim == 2 {
        (raw_faces[0].iter().map(scaled).collect(), Vec::new())
    } else {
        let mut verts: Vec<Vec<f64>> = Vec::new();
        let mut idx_faces = Vec::new();
        for f in &raw_faces {
            let mut loop_ = Vec::new();
            for p in f {
                let k = match verts.iter().position(|q| close(q, p, 1e-9 * tmax)) {
                    Some(k) => k,
                    None => {
                        verts.push(p.clone());
                        verts.len() - 1
                    }
                };
                if loop_.last() != Some(&k) {
                    loop_.push(k);
                }
            }
            if loop_.len() > 1 && loop_[0] == loop_[loop_.len() - 1] {
                loop_.pop();
            }
            if loop_.len() >= 3 {
                idx_faces.push(loop_);
            }
        }
        (verts.iter().map(scaled).collect(), idx_faces)
    };
    let shape = WulffShape {
        dim,
        volume: raw_volume * scale.powi(dim as i32),
        raw_volume,
        scale,
        normals: tau.directions.clone(),
        offsets: tau.values.iter().map(|t| t * scale).collect(),
        vertices,
        faces,
    };
    Ok(shape)
}

/// Reciprocity residuals `(τ(n) - sup_{x∈𝒲} x·n)/τ(n)` over the grid,
/// on the unnormalized crystal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reciprocity {
    pub max_abs: f64,
    pub min_signed: f64,
}

pub fn reciprocity_check(tau: &TensionFunction, shape: &WulffShape) -> Reciprocity {
    let raw = shape.raw_vertices();
    let mut r = Reciprocity { max_abs: 0.0, min_signed: f64::INFINITY };
    for (n, &t) in tau.directions.iter().zip(&tau.values) {
        if t <= 0.0 {
            continue;
        }
        let h = raw.iter().map(|v| dot(v, n)).fold(f64::NEG_INFINITY, f64::max);
        let d = (t - h) / t;
        r.max_abs = r.max_abs.max(d.abs());
        r.min_signed = r.min_signed.min(d);
    }
    r
}

/// Largest relative gap between the support function of the normalized
/// shape and that of the unit cube `[±1/2]^d`, over the shape's grid.
pub fn cube_residual(shape: &WulffShape) -> f64 {
    shape
        .normals
        .iter()
        .map(|n| {
            let c = n.iter().map(|x| x.abs()).sum::<f64>() / 2.0;
            (shape.support(n) - c).abs() / c
        })
        .fold(0.0, f64::max)
}

/// A polygonal (2D) or polyhedral (3D) profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Profile {
    Polygon(Vec<Vec<f64>>),
    Polyhedron { vertices: Vec<Vec<f64>>, faces: Vec<Vec<usize>> },
}

impl Profile {
    pub fn rectangle(lo: &[f64], hi: &[f64]) -> Profile {
        if lo.len() == 2 {
            return Profile::Polygon(vec![
                vec![lo[0], lo[1]],
                vec![hi[0], lo[1]],
                vec![hi[0], hi[1]],
                vec![lo[0], hi[1]],
            ]);
        }
        let vertices: Vec<Vec<f64>> = (0..8)
            .map(|m| (0..3).map(|i| if m >> i & 1 == 1 { hi[i] } else { lo[i] }).collect())
            .collect();
        // Outward loops of the box faces, vertex bit i = coordinate i high.
        let faces = vec![
            vec![0, 4, 6, 2],
            vec![1, 3, 7, 5],
            vec![0, 1, 5, 4],
            vec![2, 6, 7, 3],
            vec![0, 2, 3, 1],
            vec![4, 5, 7, 6],
        ];
        Profile::Polyhedron { vertices, faces }
    }

    pub fn scaled(&self, alpha: f64) -> Profile {
        let s = |v: &Vec<Vec<f64>>| v.iter().map(|p| p.iter().map(|x| alpha * x).collect()).collect();
        match self {
            Profile::Polygon(v) => Profile::Polygon(s(v)),
            Profile::Polyhedron { vertices, faces } => Profile::Polyhedron { vertices: s(vertices), faces: faces.clone() },
        }
    }

    /// Outward unit normals and face measures.
    pub fn facets(&self) -> Result<Vec<(Vec<f64>, f64)>, WulffError> {
        match self {
            Profile::Polygon(v) => polygon_facets(v),
            Profile::Polyhedron { vertices, faces } => polyhedron_facets(vertices, faces),
        }
    }

    pub fn volume(&self) -> Result<f64, WulffError> {
        match self {
            Profile::Polygon(v) => {
                polygon_facets(v)?;
                Ok(polygon_area(v).abs())
            }
            Profile::Polyhedron { vertices, faces } => {
                polyhedron_facets(vertices, faces)?;
                let loops: Vec<Vec<Vec<f64>>> = faces.iter().map(|f| f.iter().map(|&i| vertices[i].clone()).collect()).collect();
                Ok(polyhedron_volume(&loops).abs())
            }
        }
    }
}

fn segments_cross(a: &[f64], b: &[f64], c: &[f64], d: &[f64]) -> bool {
    let orient = |p: &[f64], q: &[f64], r: &[f64]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn polygon_facets(v: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, f64)>, WulffError> {
    let m = v.len();
    if m < 3 || v.iter().any(|p| p.len() != 2) {
        return Err(WulffError::NonSimplePolytope("polygon needs at least 3 planar vertices".into()));
    }
    for i in 0..m {
        if close(&v[i], &v[(i + 1) % m], 0.0) {
            return Err(WulffError::NonSimplePolytope(format!("repeated vertex {i}")));
        }
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            if segments_cross(&v[i], &v[(i + 1) % m], &v[j], &v[(j + 1) % m]) {
                return Err(WulffError::NonSimplePolytope(format!("edges {i} and {j} cross")));
            }
        }
    }
    let area = polygon_area(v);
    if area == 0.0 {
        return Err(WulffError::NonSimplePolytope("zero area".into()));
    }
    let sign = area.signum();
    Ok((0..m)
        .map(|i| {
            let d = sub(&v[(i + 1) % m], &v[i]);
            let len = norm(&d);
            (vec![sign * d[1] / len, -sign * d[0] / len], len)
        })
        .collect())
}

fn polyhedron_facets(vertices: &[Vec<f64>], faces: &[Vec<usize>]) -> Result<Vec<(Vec<f64>, f64)>, WulffError> {
    use std::collections::HashMap;
    if faces.len() < 4 {
        return Err(WulffError::NonSimplePolytope("fewer than 4 faces".into()));
    }
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for f in faces {
        if f.len() < 3 || f.iter().any(|&i| i >= vertices.len()) {
            return Err(WulffError::NonSimplePolytope("bad face".into()));
        }
        for k in 0..f.len() {
            *directed.entry((f[k], f[(k + 1) % f.len()])).or_default() += 1;
        }
    }
    for (&(a, b), &c) in &directed {
        if c != 1 || directed.get(&(b, a)) != Some(&1) {
            return Err(WulffError::NonSimplePolytope(format!("edge {a}-{b} is not shared by exactly two faces")));
        }
    }
    let loops: Vec<Vec<Vec<f64>>> = faces.iter().map(|f| f.iter().map(|&i| vertices[i].clone()).collect()).collect();
    let vol = polyhedron_volume(&loops);
    if vol == 0.0 {
        return Err(WulffError::NonSimplePolytope("zero volume".into()));
    }
    let sign = vol.signum();
    Ok(loops
        .iter()
        .map(|l| {
            let a = vector_area(l);
            let len = norm(&a);
            (a.iter().map(|x| sign * x / len).collect(), len)
        })
        .collect())
}

/// `Σ_faces |face| τ(n_face)`, with `τ` between grid directions taken as
/// the support function of its crystal.
pub fn surface_energy(profile: &Profile, tau: &TensionFunction) -> Result<f64, WulffError> {
    let shape = wulff_construct(tau)?;
    let raw = shape.raw_vertices();
    let facets = profile.facets()?;
    Ok(facets
        .iter()
        .map(|(n, a)| a * raw.iter().map(|v| dot(v, n)).fold(f64::NEG_INFINITY, f64::max))
        .sum())
}

/// `diam_∞` and the translates `z` with `z + α𝒲 ⊂ [0,1]^d`, as a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diameter {
    pub diam: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Diameter {
    pub fn translates_nonempty(&self) -> bool {
        self.lo.iter().zip(&self.hi).all(|(a, b)| a <= b)
    }
}

pub fn diam_inf(shape: &WulffShape, alpha: f64) -> Diameter {
    let d = shape.dim;
    let mins: Vec<f64> = (0..d).map(|i| shape.vertices.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min)).collect();
    let maxs: Vec<f64> = (0..d).map(|i| shape.vertices.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
    Diameter {
        diam: mins.iter().zip(&maxs).map(|(a, b)| b - a).fold(0.0, f64::max),
        lo: mins.iter().map(|m| -alpha * m).collect(),
        hi: maxs.iter().map(|m| 1.0 - alpha * m).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1(n: &[f64]) -> f64 {
        n.iter().map(|x| x.abs()).sum()
    }

    #[test]
    fn isotropic_2d() {
        let tau = TensionFunction::from_fn(2, grid_2d(64), |_| 1.0).unwrap();
        let w = wulff_construct(&tau).unwrap();
        assert!((w.volume - 1.0).abs() < 1e-9);
        let d = diam_inf(&w, 1.0).diam;
        let want = 2.0 / std::f64::consts::PI.sqrt();
        assert!((d / want - 1.0).abs() < 0.01, "{d}");
        let r = reciprocity_check(&tau, &w);
        assert!(r.max_abs <= 1.0 - (std::f64::consts::PI / 64.0).cos());
    }

    #[test]
    fn l1_gives_cube() {
        for dim in [2, 3] {
            let tau = TensionFunction::from_fn(dim, default_grid(dim), l1).unwrap();
            let w = wulff_construct(&tau).unwrap();
            assert!((w.volume - 1.0).abs() < 1e-9);
            assert_eq!(w.vertices.len(), 1 << dim, "{:?}", w.vertices);
            for v in &w.vertices {
                assert!(v.iter().all(|x| (x.abs() - 0.5).abs() < 1e-6), "{v:?}");
            }
            assert!(reciprocity_check(&tau, &w).max_abs < 1e-9);
            assert!(cube_residual(&w) < 1e-9);
        }
    }

    #[test]
    fn octant_completion() {
        let t = TensionFunction::with_lattice_symmetry(2, octant_grid_2d(64), vec![1.0; 9]).unwrap();
        assert_eq!(octant_grid_2d(64).len(), 9);
        assert_eq!(t.len(), 64);
        assert_eq!(grid_3d(6).len(), 146);
        let t3 = TensionFunction::with_lattice_symmetry(3, grid_3d(6), vec![1.0; 146]).unwrap();
        assert_eq!(t3.len(), 146);
    }

    #[test]
    fn degenerate() {
        let strip = TensionFunction::new(2, vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        assert_eq!(wulff_construct(&strip), Err(WulffError::DegenerateTension));
        let flat = TensionFunction::from_fn(2, grid_2d(8), |n| if n[1].abs() < 1e-9 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(wulff_construct(&flat), Err(WulffError::DegenerateTension));
    }

    #[test]
    fn energies() {
        let tau = TensionFunction::from_fn(2, grid_2d(64), |_| 1.0).unwrap();
        let sq = Profile::rectangle(&[0.0, 0.0], &[1.0, 1.0]);
        assert!((surface_energy(&sq, &tau).unwrap() - 4.0).abs() < 1e-12);
        let tau3 = TensionFunction::from_fn(3, grid_3d(6), l1).unwrap();
        let cube = Profile::rectangle(&[0.0; 3], &[1.0; 3]);
        assert!((surface_energy(&cube, &tau3).unwrap() - 6.0).abs() < 1e-9);
        assert!((cube.volume().unwrap() - 1.0).abs() < 1e-12);
        let bow = Profile::Polygon(vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(surface_energy(&bow, &tau), Err(WulffError::NonSimplePolytope(_))));
    }

    #[test]
    fn polytope_faces_3d() {
        let tau = TensionFunction::from_fn(3, grid_3d(6), |_| 1.0).unwrap();
        let w = wulff_construct(&tau).unwrap();
        let p = w.scaled(1.0);
        assert!((p.volume().unwrap() - 1.0).abs() < 1e-6);
        for v in &w.vertices {
            assert!(w.contains(v, 1e-9));
        }
    }

    #[test]
    fn translates() {
        let tau = TensionFunction::from_fn(2, grid_2d(64), l1).unwrap();
        let w = wulff_construct(&tau).unwrap();
        let d = diam_inf(&w, 0.6);
        assert!((d.diam - 1.0).abs() < 1e-9);
        for i in 0..2 {
            assert!((d.lo[i] - 0.3).abs() < 1e-9 && (d.hi[i] - 0.7).abs() < 1e-9);
        }
        assert!(d.translates_nonempty());
    }
}
