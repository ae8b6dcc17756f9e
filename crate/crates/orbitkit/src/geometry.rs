//! Bounded convex polytopes in a low-dimensional chart space, given by
//! half-space constraints a . u >= b. Exact-at-float-precision vertex
//! enumeration, recursive volume and surface area, Chebyshev centers by
//! linear programming, and reproducible uniform sampling.
//!
//! Tolerances: constraint normals are normalized, so all tolerances below are
//! geometric lengths. Vertices are merged at 1e-9; feasibility and incidence
//! use 1e-9 and 1e-8.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const MERGE_TOL: f64 = 1e-9;
pub const FEAS_TOL: f64 = 1e-9;
pub const INCIDENCE_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("polytope is empty")]
    Empty,
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("constraint set is degenerate: {0}")]
    Degenerate(String),
}

/// Half-space intersection {u in R^d : a_i . u >= b_i} with unit normals.
#[derive(Clone, Debug)]
pub struct ChartPolytope {
    pub d: usize,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl ChartPolytope {
    /// Normalizes the normals; constraints with zero normal must hold
    /// trivially (0 >= b): violated ones yield `Empty`, satisfied ones are
    /// dropped.
    pub fn new(d: usize, raw: Vec<(Vec<f64>, f64)>) -> Result<Self, GeometryError> {
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for (a, b) in raw {
            assert_eq!(a.len(), d);
            let len = norm(&a);
            if len < 1e-14 {
                if b > FEAS_TOL {
                    return Err(GeometryError::Empty);
                }
                continue;
            }
            normals.push(a.iter().map(|x| x / len).collect());
            offsets.push(b / len);
        }
        Ok(ChartPolytope { d, normals, offsets })
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn contains(&self, u: &[f64], tol: f64) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(a, &b)| dot(a, u) >= b - tol)
    }

    /// Keeps one constraint per direction (the tightest offset). Cuts down
    /// vertex enumeration work and avoids double-counting coincident facets.
    pub fn deduplicated(&self) -> ChartPolytope {
        let mut normals: Vec<Vec<f64>> = Vec::new();
        let mut offsets: Vec<f64> = Vec::new();
        'outer: for (a, &b) in self.normals.iter().zip(&self.offsets) {
            for (a2, b2) in normals.iter().zip(offsets.iter_mut()) {
                let diff: f64 = a.iter().zip(a2).map(|(x, y)| (x - y).abs()).sum();
                if diff < MERGE_TOL {
                    if b > *b2 {
                        *b2 = b;
                    }
                    continue 'outer;
                }
            }
            normals.push(a.clone());
            offsets.push(b);
        }
        ChartPolytope { d: self.d, normals, offsets }
    }

    /// Feasibility, boundedness, then exhaustive d-subset vertex solving.
    pub fn vertices(&self) -> Result<VertexSet, GeometryError> {
        let p = self.deduplicated();
        if p.len() < p.d + 1 {
            // Fewer half-spaces than needed to bound a d-dimensional body.
            if lp_feasible(&p)? {
                return Err(GeometryError::Unbounded);
            }
            return Err(GeometryError::Empty);
        }
        if !lp_feasible(&p)? {
            return Err(GeometryError::Empty);
        }
        for j in 0..p.d {
            for sign in [1.0f64, -1.0] {
                let mut c = vec![0.0; p.d];
                c[j] = sign;
                match lp_maximize(&c, &p) {
                    LpOutcome::Unbounded => return Err(GeometryError::Unbounded),
                    LpOutcome::Infeasible => return Err(GeometryError::Empty),
                    LpOutcome::Optimal { .. } => {}
                }
            }
        }

        let m = p.len();
        let mut verts: Vec<Vec<f64>> = Vec::new();
        let mut subset: Vec<usize> = (0..p.d).collect();
        loop {
            if let Some(u) = solve_active(&p, &subset) {
                if p.contains(&u, FEAS_TOL) && !verts.iter().any(|v| dist(v, &u) < MERGE_TOL) {
                    verts.push(u);
                }
            }
            // next d-combination of 0..m
            let mut i = p.d;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if subset[i] != i + m - p.d {
                    subset[i] += 1;
                    for j in i + 1..p.d {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    subset.clear();
                    break;
                }
            }
            if subset.is_empty() {
                break;
            }
        }
        if verts.is_empty() {
            return Err(GeometryError::Empty);
        }
        let incidence = (0..p.len())
            .map(|i| {
                verts
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| (dot(&p.normals[i], v) - p.offsets[i]).abs() <= INCIDENCE_TOL)
                    .map(|(vi, _)| vi)
                    .collect()
            })
            .collect();
        Ok(VertexSet { polytope: p, verts, incidence })
    }

    /// Chebyshev center: the point maximizing the distance to the nearest
    /// bounding hyperplane, with that distance.
    pub fn inradius(&self) -> Result<(f64, Vec<f64>), GeometryError> {
        // Maximize r subject to a_i . u - r >= b_i and r >= 0, over (u, r).
        let d = self.d;
        let mut cons: Vec<(Vec<f64>, f64)> = Vec::new();
        for (a, &b) in self.normals.iter().zip(&self.offsets) {
            let mut row = a.clone();
            row.push(-1.0);
            cons.push((row, b));
        }
        let mut rpos = vec![0.0; d + 1];
        rpos[d] = 1.0;
        cons.push((rpos, 0.0));
        let lp = ChartPolytope::new(d + 1, cons)?;
        let mut c = vec![0.0; d + 1];
        c[d] = 1.0;
        match lp_maximize(&c, &lp) {
            LpOutcome::Infeasible => Err(GeometryError::Empty),
            LpOutcomeUnbounded!() => Err(GeometryError::Unbounded),
            LpOutcome::Optimal { x, value } => Ok((value, x[..d].to_vec())),
        }
    }
}

// Small macro so the match above reads uniformly; expands to the variant.
macro_rules! LpOutcomeUnbounded {
    () => {
        LpOutcome::Unbounded
    };
}
use LpOutcomeUnbounded;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Solves the d active constraints as equalities; None when near-singular.
fn solve_active(p: &ChartPolytope, subset: &[usize]) -> Option<Vec<f64>> {
    let d = p.d;
    let mut a: Vec<Vec<f64>> = subset.iter().map(|&i| p.normals[i].clone()).collect();
    let mut b: Vec<f64> = subset.iter().map(|&i| p.offsets[i]).collect();
    // Gaussian elimination with partial pivoting; unit-norm rows.
    for col in 0..d {
        let (pi, mx) = (col..d)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if mx < 1e-10 {
            return None;
        }
        a.swap(pi, col);
        b.swap(pi, col);
        for r in col + 1..d {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..d {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; d];
    for row in (0..d).rev() {
        let mut acc = b[row];
        for c in row + 1..d {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

// ---------------------------------------------------------------------------
// Linear programming: dense two-phase simplex with Bland's rule.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Maximizes c . u over the (free-variable) polyhedron.
pub fn lp_maximize(c: &[f64], p: &ChartPolytope) -> LpOutcome {
    // Free u = pos - neg; constraints a.u >= b become -a.pos + a.neg <= -b.
    let d = p.d;
    let nv = 2 * d;
    let m = p.len();
    let mut a_ub = vec![vec![0.0; nv]; m];
    let mut b_ub = vec![0.0; m];
    for i in 0..m {
        for j in 0..d {
            a_ub[i][j] = -p.normals[i][j];
            a_ub[i][d + j] = p.normals[i][j];
        }
        b_ub[i] = -p.offsets[i];
    }
    let mut obj = vec![0.0; nv];
    for j in 0..d {
        obj[j] = c[j];
        obj[d + j] = -c[j];
    }
    match simplex_max(&obj, &a_ub, &b_ub) {
        SimplexOutcome::Optimal { x, value } => {
            let u: Vec<f64> = (0..d).map(|j| x[j] - x[d + j]).collect();
            LpOutcome::Optimal { x: u, value }
        }
        SimplexOutcome::Infeasible => LpOutcome::Infeasible,
        SimplexOutcome::Unbounded => LpOutcome::Unbounded,
    }
}

pub fn lp_feasible(p: &ChartPolytope) -> Result<bool, GeometryError> {
    let c = vec![0.0; p.d];
    Ok(!matches!(lp_maximize(&c, p), LpOutcome::Infeasible))
}

enum SimplexOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

const LP_EPS: f64 = 1e-9;

/// maximize c.x s.t. A x <= b, x >= 0. Two phases, Bland's rule.
fn simplex_max(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> SimplexOutcome {
    let m = a.len();
    let n = c.len();
    // Columns: n structural + m slack + (phase-1 artificials as needed) + rhs.
    let mut art_cols: Vec<usize> = Vec::new();
    let total = n + m;
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![0.0; total];
        let flip = b[i] < 0.0;
        for j in 0..n {
            row[j] = if flip { -a[i][j] } else { a[i][j] };
        }
        row[n + i] = if flip { -1.0 } else { 1.0 };
        let rhs = if flip { -b[i] } else { b[i] };
        row.push(rhs);
        rows.push(row);
        if flip {
            art_cols.push(i);
            basis.push(usize::MAX); // artificial, patched below
        } else {
            basis.push(n + i);
        }
    }
    // Append artificial columns.
    let n_art = art_cols.len();
    let width = total + n_art + 1;
    for row in rows.iter_mut() {
        let rhs = row.pop().unwrap();
        row.extend(std::iter::repeat(0.0).take(n_art));
        row.push(rhs);
    }
    for (k, &i) in art_cols.iter().enumerate() {
        rows[i][total + k] = 1.0;
        basis[i] = total + k;
    }

    let pivot = |rows: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, r: usize, col: usize| {
        let pv = rows[r][col];
        for x in rows[r].iter_mut() {
            *x /= pv;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col].abs() > 0.0 {
                let f = rows[i][col];
                for j in 0..width {
                    let sub = f * rows[r][j];
                    rows[i][j] -= sub;
                }
            }
        }
        basis[r] = col;
    };

    let run = |rows: &mut Vec<Vec<f64>>,
               basis: &mut Vec<usize>,
               obj: &mut Vec<f64>,
               allowed: usize|
     -> Option<()> {
        // obj holds reduced costs (row 0 of the tableau, maximize => enter on
        // positive reduced cost). Returns None on unbounded.
        loop {
            // Bland: smallest-index entering column with positive cost.
            let mut enter = None;
            for j in 0..allowed {
                if obj[j] > LP_EPS {
                    enter = Some(j);
                    break;
                }
            }
            let Some(col) = enter else { return Some(()) };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in rows.iter().enumerate() {
                if row[col] > LP_EPS {
                    let ratio = row[width - 1] / row[col];
                    match leave {
                        None => leave = Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - LP_EPS
                                || (ratio < br + LP_EPS && basis[i] < basis[bi])
                            {
                                leave = Some((i, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, _)) = leave else { return None };
            pivot(rows, basis, r, col);
            // Update objective row.
            let f = obj[col];
            for j in 0..width {
                obj[j] -= f * rows[r][j];
            }
        }
    };

    if n_art > 0 {
        // Phase 1: maximize -(sum of artificials).
        let mut obj = vec![0.0; width];
        for k in 0..n_art {
            obj[total + k] = -1.0;
        }
        // Make reduced costs consistent with the starting basis.
        for (i, &bi) in basis.iter().enumerate() {
            if bi >= total {
                let f = obj[bi];
                for j in 0..width {
                    obj[j] -= f * rows[i][j];
                }
            }
        }
        if run(&mut rows, &mut basis, &mut obj, total + n_art).is_none() {
            // Phase 1 objective is bounded by 0; treat as numeric failure.
            return SimplexOutcome::Infeasible;
        }
        // Objective row rhs is the negated objective value; phase 1 maximizes
        // -(sum of artificials), which reaches 0 exactly when feasible.
        let phase1 = -obj[width - 1];
        if phase1 < -1e-7 {
            return SimplexOutcome::Infeasible;
        }
        // Drive any artificial still in the basis out if possible.
        for i in 0..m {
            if basis[i] >= total {
                if let Some(col) = (0..total).find(|&j| rows[i][j].abs() > 1e-7) {
                    pivot(&mut rows, &mut basis, i, col);
                }
            }
        }
    }

    // Phase 2.
    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(c);
    for (i, &bi) in basis.iter().enumerate() {
        if bi < total && obj[bi].abs() > 0.0 {
            let f = obj[bi];
            for j in 0..width {
                obj[j] -= f * rows[i][j];
            }
        }
    }
    // Artificials are frozen out by restricting entering columns.
    if run(&mut rows, &mut basis, &mut obj, total).is_none() {
        return SimplexOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bi) in basis.iter().enumerate() {
        if bi < n {
            x[bi] = rows[i][width - 1];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    SimplexOutcome::Optimal { x, value }
}

// ---------------------------------------------------------------------------
// Vertex sets: volume, surface area, triangulated distance, sampling.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct VertexSet {
    pub polytope: ChartPolytope,
    pub verts: Vec<Vec<f64>>,
    /// incidence[i] lists vertex indices on constraint i.
    pub incidence: Vec<Vec<usize>>,
}

impl VertexSet {
    /// Full-dimensional volume; 0 for lower-dimensional degenerate input.
    pub fn volume(&self) -> f64 {
        let cons: Vec<(Vec<f64>, f64)> = self
            .polytope
            .normals
            .iter()
            .cloned()
            .zip(self.polytope.offsets.iter().copied())
            .collect();
        volume_rec(self.polytope.d, &self.verts, &cons)
    }

    /// Sum of facet volumes; for a 1-dimensional polytope, the endpoint count.
    pub fn surface_area(&self) -> f64 {
        let d = self.polytope.d;
        if d == 1 {
            return 2.0;
        }
        let cons: Vec<(Vec<f64>, f64)> = self
            .polytope
            .normals
            .iter()
            .cloned()
            .zip(self.polytope.offsets.iter().copied())
            .collect();
        let mut total = 0.0;
        for (a, &b) in self.polytope.normals.iter().zip(&self.polytope.offsets) {
            if let Some((fverts, fcons)) = project_facet(d, &self.verts, &cons, a, b) {
                total += volume_rec(d - 1, &fverts, &fcons);
            }
        }
        total
    }

    pub fn centroid(&self) -> Vec<f64> {
        let d = self.polytope.d;
        let mut c = vec![0.0; d];
        for v in &self.verts {
            for j in 0..d {
                c[j] += v[j];
            }
        }
        for x in c.iter_mut() {
            *x /= self.verts.len() as f64;
        }
        c
    }

    /// Axis-aligned bounding box of the vertices.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.polytope.d;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for v in &self.verts {
            for j in 0..d {
                lo[j] = lo[j].min(v[j]);
                hi[j] = hi[j].max(v[j]);
            }
        }
        (lo, hi)
    }

    /// Euclidean distance from u to the polytope (0 inside). Supported for
    /// chart dimensions 1..=3.
    pub fn distance(&self, u: &[f64]) -> f64 {
        if self.polytope.contains(u, 1e-12) {
            return 0.0;
        }
        match self.polytope.d {
            1 => {
                let (lo, hi) = self.bounding_box();
                (lo[0] - u[0]).max(u[0] - hi[0]).max(0.0)
            }
            2 => {
                let ordered = order_polygon(&self.verts, &self.centroid());
                let mut best = f64::INFINITY;
                for i in 0..ordered.len() {
                    let a = &self.verts[ordered[i]];
                    let b = &self.verts[ordered[(i + 1) % ordered.len()]];
                    best = best.min(point_segment_distance(u, a, b));
                }
                best
            }
            3 => {
                let mut best = f64::INFINITY;
                for (i, a) in self.polytope.normals.iter().enumerate() {
                    let face = &self.incidence[i];
                    if face.len() < 3 {
                        continue;
                    }
                    // Order the face polygon in its plane, then fan it.
                    let pts: Vec<Vec<f64>> = face.iter().map(|&vi| self.verts[vi].clone()).collect();
                    let ordered = order_polygon_in_plane(&pts, a);
                    for t in 1..ordered.len() - 1 {
                        best = best.min(point_triangle_distance(
                            u,
                            &pts[ordered[0]],
                            &pts[ordered[t]],
                            &pts[ordered[t + 1]],
                        ));
                    }
                }
                best
            }
            d => panic!("distance unsupported in chart dimension {d}"),
        }
    }
}

/// Recursive pyramid decomposition over facets.
fn volume_rec(d: usize, verts: &[Vec<f64>], cons: &[(Vec<f64>, f64)]) -> f64 {
    if verts.len() < d + 1 {
        return 0.0;
    }
    if d == 1 {
        let lo = verts.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        let hi = verts.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
        return (hi - lo).max(0.0);
    }
    let mut c = vec![0.0; d];
    for v in verts {
        for j in 0..d {
            c[j] += v[j];
        }
    }
    for x in c.iter_mut() {
        *x /= verts.len() as f64;
    }
    let mut total = 0.0;
    for (a, b) in cons {
        let Some((fverts, fcons)) = project_facet(d, verts, cons, a, *b) else { continue };
        let fvol = volume_rec(d - 1, &fverts, &fcons);
        let h = (dot(a, &c) - b).max(0.0);
        total += h * fvol / d as f64;
    }
    total
}

/// Projects the vertices incident to (a, b) into an orthonormal chart of that
/// hyperplane, together with the other constraints. None when the facet is
/// empty or lower-dimensional.
fn project_facet(
    d: usize,
    verts: &[Vec<f64>],
    cons: &[(Vec<f64>, f64)],
    a: &[f64],
    b: f64,
) -> Option<(Vec<Vec<f64>>, Vec<(Vec<f64>, f64)>)> {
    let on: Vec<&Vec<f64>> = verts
        .iter()
        .filter(|v| (dot(a, v) - b).abs() <= INCIDENCE_TOL)
        .collect();
    if on.len() < d {
        return None;
    }
    let origin = on[0].clone();
    // Orthonormal basis of the hyperplane a.x = b: complete a to a basis and
    // Gram-Schmidt away the normal direction.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for seed in 0..d {
        let mut v = vec![0.0; d];
        v[seed] = 1.0;
        let pa = dot(&v, a);
        for j in 0..d {
            v[j] -= pa * a[j];
        }
        for e in &basis {
            let p = dot(&v, e);
            for j in 0..d {
                v[j] -= p * e[j];
            }
        }
        let len = norm(&v);
        if len > 1e-9 {
            for x in v.iter_mut() {
                *x /= len;
            }
            basis.push(v);
            if basis.len() == d - 1 {
                break;
            }
        }
    }
    if basis.len() != d - 1 {
        return None;
    }
    let fverts: Vec<Vec<f64>> = on
        .iter()
        .map(|v| {
            basis
                .iter()
                .map(|e| e.iter().zip(v.iter().zip(&origin)).map(|(ej, (vj, oj))| ej * (vj - oj)).sum())
                .collect()
        })
        .collect();
    // Check the facet actually spans d-1 dimensions.
    if facet_rank(&fverts) < d - 1 {
        return None;
    }
    let mut fcons = Vec::new();
    for (a2, b2) in cons {
        if a2
            .iter()
            .zip(a)
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>()
            < MERGE_TOL
        {
            continue; // the facet's own plane
        }
        let proj: Vec<f64> = basis.iter().map(|e| dot(a2, e)).collect();
        let len = norm(&proj);
        if len < 1e-10 {
            continue; // parallel to the facet plane
        }
        let shifted = b2 - dot(a2, &origin);
        fcons.push((proj.iter().map(|x| x / len).collect(), shifted / len));
    }
    Some((fverts, fcons))
}

fn facet_rank(pts: &[Vec<f64>]) -> usize {
    if pts.len() < 2 {
        return 0;
    }
    let d = pts[0].len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for p in &pts[1..] {
        let mut v: Vec<f64> = p.iter().zip(&pts[0]).map(|(x, o)| x - o).collect();
        for e in &basis {
            let pr = dot(&v, e);
            for j in 0..d {
                v[j] -= pr * e[j];
            }
        }
        let len = norm(&v);
        if len > 1e-7 {
            for x in v.iter_mut() {
                *x /= len;
            }
            basis.push(v);
        }
    }
    basis.len()
}

/// Orders 2-d points counterclockwise around the given center.
fn order_polygon(verts: &[Vec<f64>], center: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..verts.len()).collect();
    idx.sort_by(|&i, &j| {
        let ai = (verts[i][1] - center[1]).atan2(verts[i][0] - center[0]);
        let aj = (verts[j][1] - center[1]).atan2(verts[j][0] - center[0]);
        ai.partial_cmp(&aj).unwrap()
    });
    idx
}

/// Orders coplanar 3-d points around their centroid inside the plane with
/// unit normal `a`.
fn order_polygon_in_plane(pts: &[Vec<f64>], a: &[f64]) -> Vec<usize> {
    let n = pts.len();
    let mut c = vec![0.0; 3];
    for p in pts {
        for j in 0..3 {
            c[j] += p[j] / n as f64;
        }
    }
    // In-plane orthonormal frame.
    let mut e1 = vec![0.0; 3];
    let seed = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let pa = dot(&seed, a);
    for j in 0..3 {
        e1[j] = seed[j] - pa * a[j];
    }
    let l = norm(&e1);
    for x in e1.iter_mut() {
        *x /= l;
    }
    let e2 = vec![
        a[1] * e1[2] - a[2] * e1[1],
        a[2] * e1[0] - a[0] * e1[2],
        a[0] * e1[1] - a[1] * e1[0],
    ];
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        let di: Vec<f64> = (0..3).map(|m| pts[i][m] - c[m]).collect();
        let dj: Vec<f64> = (0..3).map(|m| pts[j][m] - c[m]).collect();
        let ai = dot(&di, &e2).atan2(dot(&di, &e1));
        let aj = dot(&dj, &e2).atan2(dot(&dj, &e1));
        ai.partial_cmp(&aj).unwrap()
    });
    idx
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let d = p.len();
    let ab: Vec<f64> = (0..d).map(|j| b[j] - a[j]).collect();
    let ap: Vec<f64> = (0..d).map(|j| p[j] - a[j]).collect();
    let denom = dot(&ab, &ab);
    let t = if denom > 0.0 { (dot(&ap, &ab) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let closest: Vec<f64> = (0..d).map(|j| a[j] + t * ab[j]).collect();
    dist(p, &closest)
}

/// Closest-point distance from p to triangle abc in R^3 (barycentric clamp).
fn point_triangle_distance(p: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let sub = |x: &[f64], y: &[f64]| -> Vec<f64> { (0..3).map(|j| x[j] - y[j]).collect() };
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(&ab, &ap);
    let d2 = dot(&ac, &ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return dist(p, a);
    }
    let bp = sub(p, b);
    let d3 = dot(&ab, &bp);
    let d4 = dot(&ac, &bp);
    if d3 >= 0.0 && d4 <= d3 {
        return dist(p, b);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        let q: Vec<f64> = (0..3).map(|j| a[j] + t * ab[j]).collect();
        return dist(p, &q);
    }
    let cp = sub(p, c);
    let d5 = dot(&ab, &cp);
    let d6 = dot(&ac, &cp);
    if d6 >= 0.0 && d5 <= d6 {
        return dist(p, c);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        let q: Vec<f64> = (0..3).map(|j| a[j] + t * ac[j]).collect();
        return dist(p, &q);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        let q: Vec<f64> = (0..3).map(|j| b[j] + t * (c[j] - b[j])).collect();
        return dist(p, &q);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    let q: Vec<f64> = (0..3).map(|j| a[j] + ab[j] * v + ac[j] * w).collect();
    dist(p, &q)
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMode {
    BoxRejection,
    /// Hit-and-run from the Chebyshev center with a fixed burn-in of
    /// 10 * d^2 steps per sample; engaged when box acceptance drops under 1%.
    HitAndRun,
}

/// Reproducible uniform sampler over a bounded chart polytope. Each sample
/// index owns a counter-based RNG substream, so results are identical for any
/// parallel work partition.
#[derive(Clone, Debug)]
pub struct PolytopeSampler {
    p: ChartPolytope,
    lo: Vec<f64>,
    hi: Vec<f64>,
    center: Vec<f64>,
    pub mode: SampleMode,
    seed: u64,
}

const PILOT_STREAM: u64 = u64::MAX;
const PILOT_DRAWS: usize = 2000;

impl PolytopeSampler {
    pub fn new(vs: &VertexSet, seed: u64) -> Result<Self, GeometryError> {
        let (lo, hi) = vs.bounding_box();
        let (_, center) = vs.polytope.inradius()?;
        let p = vs.polytope.clone();
        // Pilot run decides the mode.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(PILOT_STREAM);
        let mut hits = 0usize;
        let mut draw = vec![0.0; p.d];
        for _ in 0..PILOT_DRAWS {
            for j in 0..p.d {
                draw[j] = rng.gen_range(lo[j]..=hi[j]);
            }
            if p.contains(&draw, 0.0) {
                hits += 1;
            }
        }
        let mode = if (hits as f64) < 0.01 * PILOT_DRAWS as f64 {
            SampleMode::HitAndRun
        } else {
            SampleMode::BoxRejection
        };
        Ok(PolytopeSampler { p, lo, hi, center, mode, seed })
    }

    /// The idx-th sample; bit-reproducible in (seed, idx).
    pub fn sample(&self, idx: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(idx);
        match self.mode {
            SampleMode::BoxRejection => {
                let mut u = vec![0.0; self.p.d];
                loop {
                    for j in 0..self.p.d {
                        u[j] = rng.gen_range(self.lo[j]..=self.hi[j]);
                    }
                    if self.p.contains(&u, 0.0) {
                        return u;
                    }
                }
            }
            SampleMode::HitAndRun => {
                let d = self.p.d;
                let mut x = self.center.clone();
                let steps = 10 * d * d;
                for _ in 0..steps {
                    let dir = gaussian_unit(&mut rng, d);
                    let mut t_lo = f64::NEG_INFINITY;
                    let mut t_hi = f64::INFINITY;
                    for (a, &b) in self.p.normals.iter().zip(&self.p.offsets) {
                        let ad = dot(a, &dir);
                        let slack = b - dot(a, &x);
                        if ad > 1e-13 {
                            t_lo = t_lo.max(slack / ad);
                        } else if ad < -1e-13 {
                            t_hi = t_hi.min(slack / ad);
                        } else if slack > 0.0 {
                            t_lo = 0.0;
                            t_hi = 0.0;
                        }
                    }
                    if !(t_lo.is_finite() && t_hi.is_finite()) || t_hi <= t_lo {
                        continue;
                    }
                    let t = rng.gen_range(0.0..=1.0) * (t_hi - t_lo) + t_lo;
                    for j in 0..d {
                        x[j] += t * dir[j];
                    }
                }
                x
            }
        }
    }

    pub fn chart_polytope(&self) -> &ChartPolytope {
        &self.p
    }
}

fn gaussian_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let mut v = Vec::with_capacity(d);
        while v.len() < d {
            // Box-Muller.
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            v.push(r * (2.0 * std::f64::consts::PI * u2).cos());
            if v.len() < d {
                v.push(r * (2.0 * std::f64::consts::PI * u2).sin());
            }
        }
        let len = norm(&v);
        if len > 1e-12 {
            for x in v.iter_mut() {
                *x /= len;
            }
            return v;
        }
    }
}

/// Monte Carlo volume by box rejection: (estimate, standard error).
pub fn mc_volume(vs: &VertexSet, samples: usize, seed: u64) -> (f64, f64) {
    let (lo, hi) = vs.bounding_box();
    let d = vs.polytope.d;
    let box_vol: f64 = (0..d).map(|j| hi[j] - lo[j]).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PILOT_STREAM - 1);
    let mut hits = 0usize;
    let mut u = vec![0.0; d];
    for _ in 0..samples {
        for j in 0..d {
            u[j] = rng.gen_range(lo[j]..=hi[j]);
        }
        if vs.polytope.contains(&u, 0.0) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let stderr = box_vol * (p * (1.0 - p) / samples as f64).sqrt();
    (box_vol * p, stderr)
}

/// Monte Carlo volume of the eps-neighborhood (chart dimensions 1..=3).
pub fn mc_neighborhood_volume(vs: &VertexSet, eps: f64, samples: usize, seed: u64) -> (f64, f64) {
    let (mut lo, mut hi) = vs.bounding_box();
    for j in 0..vs.polytope.d {
        lo[j] -= eps;
        hi[j] += eps;
    }
    let d = vs.polytope.d;
    let box_vol: f64 = (0..d).map(|j| hi[j] - lo[j]).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PILOT_STREAM - 2);
    let mut hits = 0usize;
    let mut u = vec![0.0; d];
    for _ in 0..samples {
        for j in 0..d {
            u[j] = rng.gen_range(lo[j]..=hi[j]);
        }
        if vs.distance(&u) <= eps {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let stderr = box_vol * (p * (1.0 - p) / samples as f64).sqrt();
    (box_vol * p, stderr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> ChartPolytope {
        ChartPolytope::new(
            2,
            vec![
                (vec![1.0, 0.0], 0.0),
                (vec![0.0, 1.0], 0.0),
                (vec![-1.0, 0.0], -1.0),
                (vec![0.0, -1.0], -1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn unit_square_vertices_volume_area_inradius() {
        let vs = unit_square().vertices().unwrap();
        assert_eq!(vs.verts.len(), 4);
        assert!((vs.volume() - 1.0).abs() < 1e-9);
        assert!((vs.surface_area() - 4.0).abs() < 1e-9);
        let (r, c) = unit_square().inradius().unwrap();
        assert!((r - 0.5).abs() < 1e-7);
        assert!((c[0] - 0.5).abs() < 1e-6 && (c[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn segment_conventions() {
        // [-3, 5] on the line.
        let p = ChartPolytope::new(1, vec![(vec![1.0], -3.0), (vec![-1.0], -5.0)]).unwrap();
        let vs = p.vertices().unwrap();
        assert_eq!(vs.verts.len(), 2);
        assert!((vs.volume() - 8.0).abs() < 1e-9);
        assert!((vs.surface_area() - 2.0).abs() < 1e-12);
        let (r, c) = p.inradius().unwrap();
        assert!((r - 4.0).abs() < 1e-7);
        assert!((c[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn triangle_perimeter_matches_vertex_distances() {
        // x >= 0, y >= 0, x + y <= 1.
        let s = 0.5f64.sqrt();
        let p = ChartPolytope::new(
            2,
            vec![
                (vec![1.0, 0.0], 0.0),
                (vec![0.0, 1.0], 0.0),
                (vec![-s, -s], -s),
            ],
        )
        .unwrap();
        let vs = p.vertices().unwrap();
        assert_eq!(vs.verts.len(), 3);
        assert!((vs.volume() - 0.5).abs() < 1e-9);
        let perim = 2.0 + 2.0f64.sqrt();
        assert!((vs.surface_area() - perim).abs() < 1e-9);
    }

    #[test]
    fn empty_and_unbounded_detected() {
        let empty = ChartPolytope::new(2, vec![(vec![1.0, 0.0], 1.0), (vec![-1.0, 0.0], 0.0)]).unwrap();
        assert_eq!(empty.vertices().unwrap_err(), GeometryError::Empty);

        let half = ChartPolytope::new(2, vec![(vec![1.0, 0.0], 0.0), (vec![0.0, 1.0], 0.0)]).unwrap();
        assert_eq!(half.vertices().unwrap_err(), GeometryError::Unbounded);
    }

    #[test]
    fn cube_volume_and_area() {
        let mut cons = Vec::new();
        for j in 0..3 {
            let mut a = vec![0.0; 3];
            a[j] = 1.0;
            cons.push((a.clone(), -1.0));
            let neg: Vec<f64> = a.iter().map(|x| -x).collect();
            cons.push((neg, -1.0));
        }
        let p = ChartPolytope::new(3, cons).unwrap();
        let vs = p.vertices().unwrap();
        assert_eq!(vs.verts.len(), 8);
        assert!((vs.volume() - 8.0).abs() < 1e-8);
        assert!((vs.surface_area() - 24.0).abs() < 1e-8);
        let (r, _) = p.inradius().unwrap();
        assert!((r - 1.0).abs() < 1e-7);
    }

    #[test]
    fn simplex_4d_volume() {
        // x_i >= 0, sum x_i <= 1 has volume 1/24 in dimension 4.
        let mut cons = Vec::new();
        for j in 0..4 {
            let mut a = vec![0.0; 4];
            a[j] = 1.0;
            cons.push((a, 0.0));
        }
        cons.push((vec![-1.0; 4], -1.0));
        let p = ChartPolytope::new(4, cons).unwrap();
        let vs = p.vertices().unwrap();
        assert_eq!(vs.verts.len(), 5);
        assert!((vs.volume() - 1.0 / 24.0).abs() < 1e-9);
    }

    #[test]
    fn mc_volume_agrees_with_exact() {
        let vs = unit_square().vertices().unwrap();
        let (v, se) = mc_volume(&vs, 200_000, 123);
        assert!((v - 1.0).abs() <= 3.0 * se.max(1e-6));

        let s = 0.5f64.sqrt();
        let tri = ChartPolytope::new(
            2,
            vec![(vec![1.0, 0.0], 0.0), (vec![0.0, 1.0], 0.0), (vec![-s, -s], -s)],
        )
        .unwrap()
        .vertices()
        .unwrap();
        let (v, se) = mc_volume(&tri, 200_000, 5);
        assert!((v - 0.5).abs() <= 3.0 * se);
    }

    #[test]
    fn distance_and_neighborhood() {
        let vs = unit_square().vertices().unwrap();
        assert_eq!(vs.distance(&[0.5, 0.5]), 0.0);
        assert!((vs.distance(&[2.0, 0.5]) - 1.0).abs() < 1e-12);
        assert!((vs.distance(&[2.0, 2.0]) - 2.0f64.sqrt()).abs() < 1e-12);

        // Steiner: area of the eps-neighborhood = 1 + 4 eps + pi eps^2.
        let eps = 0.5;
        let exact = 1.0 + 4.0 * eps + std::f64::consts::PI * eps * eps;
        let (v, se) = mc_neighborhood_volume(&vs, eps, 200_000, 17);
        assert!((v - exact).abs() <= 4.0 * se, "{v} vs {exact} pm {se}");
    }

    #[test]
    fn distance_3d_cube() {
        let mut cons = Vec::new();
        for j in 0..3 {
            let mut a = vec![0.0; 3];
            a[j] = 1.0;
            cons.push((a.clone(), 0.0));
            let neg: Vec<f64> = a.iter().map(|x| -x).collect();
            cons.push((neg, -1.0));
        }
        let vs = ChartPolytope::new(3, cons).unwrap().vertices().unwrap();
        assert_eq!(vs.distance(&[0.5, 0.5, 0.5]), 0.0);
        assert!((vs.distance(&[0.5, 0.5, 2.0]) - 1.0).abs() < 1e-12);
        assert!((vs.distance(&[2.0, 2.0, 2.0]) - 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sampler_deterministic_and_inside() {
        let vs = unit_square().vertices().unwrap();
        let s1 = PolytopeSampler::new(&vs, 99).unwrap();
        let s2 = PolytopeSampler::new(&vs, 99).unwrap();
        assert_eq!(s1.mode, SampleMode::BoxRejection);
        for i in 0..200u64 {
            let a = s1.sample(i);
            let b = s2.sample(i);
            assert_eq!(a, b);
            assert!(vs.polytope.contains(&a, 0.0));
        }
    }

    #[test]
    fn sampler_mean_near_centroid() {
        let s = 0.5f64.sqrt();
        let tri = ChartPolytope::new(
            2,
            vec![(vec![1.0, 0.0], 0.0), (vec![0.0, 1.0], 0.0), (vec![-s, -s], -s)],
        )
        .unwrap()
        .vertices()
        .unwrap();
        let sampler = PolytopeSampler::new(&tri, 7).unwrap();
        let n = 40_000;
        let mut mean = [0.0f64; 2];
        for i in 0..n {
            let u = sampler.sample(i as u64);
            mean[0] += u[0];
            mean[1] += u[1];
        }
        mean[0] /= n as f64;
        mean[1] /= n as f64;
        // Triangle centroid is (1/3, 1/3); sd of each coordinate ~ 0.24.
        let se = 0.24 / (n as f64).sqrt();
        assert!((mean[0] - 1.0 / 3.0).abs() < 4.0 * se);
        assert!((mean[1] - 1.0 / 3.0).abs() < 4.0 * se);
    }

    #[test]
    fn hit_and_run_engages_on_thin_polytopes() {
        // A diagonal needle |x - y| <= 0.001 inside the unit box: its own
        // bounding box is the unit square, so rejection acceptance ~ 0.3%.
        let s = 0.5f64.sqrt();
        let q = ChartPolytope::new(
            2,
            vec![
                (vec![s, -s], -0.001),
                (vec![-s, s], -0.001),
                (vec![1.0, 0.0], 0.0),
                (vec![-1.0, 0.0], -1.0),
                (vec![0.0, 1.0], 0.0),
                (vec![0.0, -1.0], -1.0),
            ],
        )
        .unwrap();
        let vq = q.vertices().unwrap();
        let sampler = PolytopeSampler::new(&vq, 3).unwrap();
        assert_eq!(sampler.mode, SampleMode::HitAndRun);
        for i in 0..50u64 {
            let u = sampler.sample(i);
            assert!(vq.polytope.contains(&u, 1e-9));
        }
    }

    #[test]
    fn lp_unbounded_detection() {
        let p = ChartPolytope::new(2, vec![(vec![1.0, 0.0], 0.0)]).unwrap();
        assert_eq!(lp_maximize(&[1.0, 0.0], &p), LpOutcome::Unbounded);
        match lp_maximize(&[-1.0, 0.0], &p) {
            LpOutcome::Optimal { value, .. } => assert!(value.abs() < 1e-9),
            other => panic!("expected optimum, got {other:?}"),
        }
    }
}
