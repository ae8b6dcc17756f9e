//! Parametrized unipotent families g(k), their divergence patterns and graphs,
//! predecessor-closed vertex subsets, the subalgebra of bounded diagonal
//! directions, limit-group prediction, and the structural splittings
//! (bounded-times-dichotomy, Iwasawa) used by the experiments.
//!
//! Families are n x n matrices of polynomials in the parameter k with exact
//! rational coefficients. A polynomial entry is bounded along k -> infinity
//! iff it is constant, which makes every dichotomy question decidable.

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use crate::exterior::{wedge_action, MultiIndex};
use crate::rat::{
    parse_rat, rat, rat_nullspace, rat_primitive, rat_row_basis, rat_to_f64, Mat, Poly, Rat,
};
use num::{Signed, Zero};

#[derive(Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("entry ({i},{j}) is a nonzero constant; split off the bounded factor first")]
    DichotomyViolated { i: usize, j: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("family fixes a nonzero diagonal direction; the limit span is not nilpotent")]
    NontrivialBoundedDirections,
    #[error("family is not unipotent upper-triangular")]
    NotUnipotentUpper,
    #[error("singular input matrix")]
    Singular,
    #[error("bad family file: {0}")]
    BadFile(String),
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// An n x n matrix of polynomials in k: the sequence {g(k)}.
#[derive(Clone, Debug)]
pub struct PolyFamily {
    pub n: usize,
    pub entries: Vec<Vec<Poly>>,
    pub name: Option<String>,
}

impl PolyFamily {
    pub fn new(entries: Vec<Vec<Poly>>, name: Option<String>) -> Self {
        let n = entries.len();
        assert!(entries.iter().all(|r| r.len() == n), "family matrix must be square");
        PolyFamily { n, entries, name }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i][j]
    }

    /// True when the diagonal is identically 1 and everything below is 0.
    pub fn is_unipotent_upper(&self) -> bool {
        for i in 0..self.n {
            for j in 0..self.n {
                let e = &self.entries[i][j];
                if i == j && *e != Poly::one() {
                    return false;
                }
                if i > j && !e.is_zero() {
                    return false;
                }
            }
        }
        true
    }

    /// True when each strictly-upper entry is zero or has positive degree.
    pub fn is_dichotomy(&self) -> bool {
        self.upper_constant_violation().is_none()
    }

    fn upper_constant_violation(&self) -> Option<(usize, usize)> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.entries[i][j].degree() == Some(0) {
                    return Some((i + 1, j + 1));
                }
            }
        }
        None
    }

    pub fn eval_rat(&self, k: i64) -> Mat<Rat> {
        Mat::from_fn(self.n, self.n, |i, j| self.entries[i][j].eval_i64(k))
    }

    pub fn eval_f64(&self, k: i64) -> Mat<f64> {
        let exact = self.eval_rat(k);
        exact.map(rat_to_f64)
    }

    pub fn as_poly_mat(&self) -> Mat<Poly> {
        Mat::from_fn(self.n, self.n, |i, j| self.entries[i][j].clone())
    }

    pub fn unipotent_from_upper(n: usize, upper: &[((usize, usize), Poly)], name: &str) -> Self {
        let mut entries = vec![vec![Poly::zero(); n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            row[i] = Poly::one();
        }
        for ((i, j), p) in upper {
            entries[i - 1][j - 1] = p.clone();
        }
        PolyFamily::new(entries, Some(name.to_string()))
    }

    /// n=3 family with entries (1,2)=k, (2,3)=k, (1,3)=k^2/2.
    pub fn square_cascade_3() -> Self {
        let k = Poly::monomial(1, rat(1));
        let k2h = Poly::monomial(2, Rat::new(1.into(), 2.into()));
        Self::unipotent_from_upper(
            3,
            &[((1, 2), k.clone()), ((2, 3), k), ((1, 3), k2h)],
            "cascade3",
        )
    }

    /// n=4 family with entries (1,2)=k and (3,4)=k: two independent blocks.
    pub fn two_block_4() -> Self {
        let k = Poly::monomial(1, rat(1));
        Self::unipotent_from_upper(4, &[((1, 2), k.clone()), ((3, 4), k)], "twoblock4")
    }

    /// n=4 family embedding the 3-dimensional cascade in the top-left corner.
    pub fn cascade_in_corner_4() -> Self {
        let k = Poly::monomial(1, rat(1));
        let k2h = Poly::monomial(2, Rat::new(1.into(), 2.into()));
        Self::unipotent_from_upper(
            4,
            &[((1, 2), k.clone()), ((2, 3), k), ((1, 3), k2h)],
            "cascade_corner4",
        )
    }

    /// Center directions of the 2+1 block reductive subgroup of SL(3).
    pub fn center_basis_block21() -> Vec<Vec<Rat>> {
        vec![vec![rat(1), rat(1), rat(-2)]]
    }

    /// Center directions of the 2+1+1 block reductive subgroup of SL(4).
    pub fn center_basis_block211() -> Vec<Vec<Rat>> {
        vec![
            vec![rat(1), rat(1), rat(0), rat(-2)],
            vec![rat(0), rat(0), rat(1), rat(-1)],
        ]
    }
}

// ---------------------------------------------------------------------------
// Family files
// ---------------------------------------------------------------------------

#[derive(Deserialize)]
struct FamilyFile {
    name: Option<String>,
    n: usize,
    /// entries[i][j] is a list of coefficient strings "p/q"; index = power of k.
    entries: Vec<Vec<Vec<String>>>,
}

/// Parses the family file format: exact "p/q" coefficient strings, index =
/// power of k. Malformed fractions (including zero denominators) are rejected.
pub fn parse_family_json(text: &str) -> Result<PolyFamily, FamilyError> {
    let file: FamilyFile =
        serde_json::from_str(text).map_err(|e| FamilyError::BadFile(format!("entries: {e}")))?;
    if file.n == 0 || file.n > crate::exterior::MAX_N {
        return Err(FamilyError::BadFile(format!("n: {} out of range 1..=8", file.n)));
    }
    if file.entries.len() != file.n || file.entries.iter().any(|r| r.len() != file.n) {
        return Err(FamilyError::BadFile(format!("entries: expected {0}x{0} matrix", file.n)));
    }
    let mut entries = Vec::with_capacity(file.n);
    for (i, row) in file.entries.iter().enumerate() {
        let mut out_row = Vec::with_capacity(file.n);
        for (j, coeffs) in row.iter().enumerate() {
            let mut parsed = Vec::with_capacity(coeffs.len());
            for c in coeffs {
                parsed.push(parse_rat(c).map_err(|e| {
                    FamilyError::BadFile(format!("entries[{i}][{j}]: {e}"))
                })?);
            }
            out_row.push(Poly::from_coeffs(parsed));
        }
        entries.push(out_row);
    }
    Ok(PolyFamily::new(entries, file.name))
}

// ---------------------------------------------------------------------------
// Divergence patterns and graphs
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub enum DivergenceClass {
    Zero,
    Constant(Rat),
    Diverges,
}

/// Per-entry classification of a family by polynomial degree.
#[derive(Clone, Debug)]
pub struct DivergencePattern {
    pub n: usize,
    pub classes: Vec<Vec<DivergenceClass>>,
}

pub fn divergence_pattern(family: &PolyFamily) -> DivergencePattern {
    let classes = family
        .entries
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| match p.degree() {
                    None => DivergenceClass::Zero,
                    Some(0) => DivergenceClass::Constant(p.constant_term()),
                    Some(_) => DivergenceClass::Diverges,
                })
                .collect()
        })
        .collect();
    DivergencePattern { n: family.n, classes }
}

impl DivergencePattern {
    pub fn class(&self, i: usize, j: usize) -> &DivergenceClass {
        &self.classes[i - 1][j - 1]
    }
}

/// Graph on vertex set 1..=n with an edge (i,j), i<j, wherever the (i,j)
/// entry diverges. Adjacency is stored as bitmasks (bit v-1 for vertex v).
#[derive(Clone, Debug, PartialEq)]
pub struct PatternGraph {
    pub n: usize,
    pub adj: Vec<u32>,
}

impl PatternGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![0u32; n];
        for &(i, j) in edges {
            assert!(i != j && i >= 1 && j >= 1 && i <= n && j <= n);
            adj[i - 1] |= 1 << (j - 1);
            adj[j - 1] |= 1 << (i - 1);
        }
        PatternGraph { n, adj }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 1..=self.n {
            for j in i + 1..=self.n {
                if self.adj[i - 1] >> (j - 1) & 1 == 1 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i - 1] >> (j - 1) & 1 == 1
    }

    /// Connected components as sorted vertex lists (1-based), ordered by
    /// smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v + 1);
                for u in 0..self.n {
                    if self.adj[v] >> u & 1 == 1 && !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }
}

/// Builds the graph of a dichotomy pattern: edge (i,j) iff the strictly-upper
/// entry diverges. A nonzero constant strictly-upper entry is an error; run
/// `split_bounded_factor` first.
pub fn graph_of(pattern: &DivergencePattern) -> Result<PatternGraph, FamilyError> {
    let mut edges = Vec::new();
    for i in 1..=pattern.n {
        for j in i + 1..=pattern.n {
            match pattern.class(i, j) {
                DivergenceClass::Zero => {}
                DivergenceClass::Diverges => edges.push((i, j)),
                DivergenceClass::Constant(c) => {
                    if !c.is_zero() {
                        return Err(FamilyError::DichotomyViolated { i, j });
                    }
                }
            }
        }
    }
    Ok(PatternGraph::from_edges(pattern.n, &edges))
}

// ---------------------------------------------------------------------------
// Predecessor-closed subsets and their certificates
// ---------------------------------------------------------------------------

/// All nonempty vertex subsets S such that membership of a vertex forces every
/// smaller-indexed neighbor into S. The full set always qualifies.
pub fn predecessor_closed_subsets(graph: &PatternGraph) -> Vec<MultiIndex> {
    assert!(graph.n <= crate::exterior::MAX_N, "use predecessor_closed_masks beyond n=8");
    predecessor_closed_masks(graph)
        .into_iter()
        .map(|m| MultiIndex::from_mask(m as u64, graph.n).unwrap())
        .collect()
}

/// Bitmask variant without the MultiIndex ambient cap (n <= 20).
pub fn predecessor_closed_masks(graph: &PatternGraph) -> Vec<u32> {
    assert!(graph.n <= 20, "2^n scan capped at n=20");
    (1u32..(1u32 << graph.n))
        .filter(|&m| mask_is_predecessor_closed(graph, m))
        .collect()
}

fn mask_is_predecessor_closed(graph: &PatternGraph, mask: u32) -> bool {
    for v in 0..graph.n {
        if mask >> v & 1 == 1 {
            let below = (1u32 << v) - 1;
            if graph.adj[v] & below & !mask != 0 {
                return false;
            }
        }
    }
    true
}

/// Outcome of the symbolic fixedness test for g(k) . e_I.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WedgeFate {
    Fixed,
    Diverges,
}

/// Decides whether g(k) . e_I is the constant wedge e_I as a polynomial
/// identity in k. For dichotomy families this is equivalent to I being
/// predecessor-closed in the divergence graph.
pub fn wedge_fixedness(family: &PolyFamily, index: &MultiIndex) -> Result<WedgeFate, FamilyError> {
    if !family.is_unipotent_upper() {
        return Err(FamilyError::NotUnipotentUpper);
    }
    if let Some((i, j)) = family.upper_constant_violation() {
        return Err(FamilyError::DichotomyViolated { i, j });
    }
    let w = wedge_action(&family.as_poly_mat(), index).expect("dimensions checked");
    let mut fixed = true;
    for (mask, coeff) in &w.coords {
        if *mask == index.mask() {
            if *coeff != Poly::one() {
                fixed = false;
            }
        } else if !coeff.is_zero() {
            fixed = false;
        }
    }
    Ok(if fixed { WedgeFate::Fixed } else { WedgeFate::Diverges })
}

/// A trace-zero rational value assignment on the vertices of a connected graph
/// that is strictly positive on every proper nonempty predecessor-closed
/// subset. Constructed by removing the smallest vertex, recursing on the
/// remaining components, and shifting by half the minimal slack.
pub fn separating_certificate(graph: &PatternGraph) -> Result<Vec<Rat>, FamilyError> {
    if !graph.is_connected() {
        return Err(FamilyError::Disconnected);
    }
    let all: u32 = if graph.n == 32 { u32::MAX } else { (1u32 << graph.n) - 1 };
    let values = certificate_on(graph, all);
    Ok((1..=graph.n).map(|v| values[&v].clone()).collect())
}

/// Certificate on the sub-vertex-set `mask`, which must induce a connected
/// subgraph. Returns values keyed by 1-based vertex.
fn certificate_on(graph: &PatternGraph, mask: u32) -> BTreeMap<usize, Rat> {
    let verts: Vec<usize> = (0..graph.n).filter(|v| mask >> v & 1 == 1).collect();
    if verts.len() == 1 {
        let mut m = BTreeMap::new();
        m.insert(verts[0] + 1, Rat::zero());
        return m;
    }
    let v1 = verts[0];
    let rest = mask & !(1u32 << v1);
    let comps = components_within(graph, rest);

    let mut values: BTreeMap<usize, Rat> = BTreeMap::new();
    for comp in &comps {
        values.extend(certificate_on(graph, *comp));
    }

    // Minimal slack over proper nonempty predecessor-closed subsets of the
    // component subgraphs: sum(S)/|S| bounds the shift that keeps them strict.
    let mut eps_cap: Option<Rat> = None;
    for comp in &comps {
        for s in proper_pc_subsets_within(graph, *comp) {
            let size = s.count_ones() as i64;
            let total: Rat = (0..graph.n)
                .filter(|v| s >> v & 1 == 1)
                .map(|v| values[&(v + 1)].clone())
                .sum();
            let bound = total / rat(size);
            eps_cap = Some(match eps_cap {
                None => bound,
                Some(cur) => cur.min(bound),
            });
        }
    }
    let eps = eps_cap.map_or_else(|| rat(1), |cap| cap / rat(2));

    let m = verts.len();
    for val in values.values_mut() {
        *val -= &eps;
    }
    values.insert(v1 + 1, rat((m - 1) as i64) * eps);
    values
}

fn components_within(graph: &PatternGraph, mask: u32) -> Vec<u32> {
    let mut seen = 0u32;
    let mut out = Vec::new();
    for start in 0..graph.n {
        if mask >> start & 1 == 0 || seen >> start & 1 == 1 {
            continue;
        }
        let mut comp = 0u32;
        let mut stack = vec![start];
        seen |= 1 << start;
        while let Some(v) = stack.pop() {
            comp |= 1 << v;
            let nbrs = graph.adj[v] & mask & !seen;
            for u in 0..graph.n {
                if nbrs >> u & 1 == 1 {
                    seen |= 1 << u;
                    stack.push(u);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Proper nonempty predecessor-closed subsets of the subgraph induced on
/// `mask`, with the ordering inherited from the full vertex labels.
fn proper_pc_subsets_within(graph: &PatternGraph, mask: u32) -> Vec<u32> {
    let verts: Vec<usize> = (0..graph.n).filter(|v| mask >> v & 1 == 1).collect();
    let m = verts.len();
    let mut out = Vec::new();
    for sub in 1u32..((1u32 << m) - 1) {
        let s: u32 = verts
            .iter()
            .enumerate()
            .filter(|(b, _)| sub >> b & 1 == 1)
            .map(|(_, &v)| 1u32 << v)
            .sum();
        let mut ok = true;
        for v in 0..graph.n {
            if s >> v & 1 == 1 {
                let below = (1u32 << v) - 1;
                if graph.adj[v] & mask & below & !s != 0 {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            out.push(s);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Bounded diagonal directions and the limit prediction
// ---------------------------------------------------------------------------

/// Basis (canonical, row-reduced, rational) of the diagonal directions Y with
/// Ad(g(k))Y bounded: trace-zero vectors constant on each graph component.
/// With `center_basis` given, returns a basis of its span intersected with
/// that space.
pub fn bounded_directions(
    pattern: &DivergencePattern,
    center_basis: Option<&[Vec<Rat>]>,
) -> Result<Vec<Vec<Rat>>, FamilyError> {
    let graph = graph_of(pattern)?;
    let comps = graph.components();
    let n = pattern.n;

    // Component-constant trace-zero basis.
    let mut comp_basis: Vec<Vec<Rat>> = Vec::new();
    let m = comps.len();
    for l in 0..m.saturating_sub(1) {
        let mut v = vec![Rat::zero(); n];
        let last = &comps[m - 1];
        for &i in &comps[l] {
            v[i - 1] = rat(last.len() as i64);
        }
        for &i in last {
            v[i - 1] = -rat(comps[l].len() as i64);
        }
        comp_basis.push(rat_primitive(&v));
    }

    let result = match center_basis {
        None => comp_basis,
        Some(s_basis) => {
            for v in s_basis {
                assert_eq!(v.len(), n, "center basis vector has wrong dimension");
                let total: Rat = v.iter().cloned().sum();
                assert!(total.is_zero(), "center basis vector is not trace-zero");
            }
            intersect_spans(s_basis, &comp_basis, n)
        }
    };
    Ok(rat_row_basis(&result).iter().map(|v| rat_primitive(v)).collect())
}

/// Basis of span(a) intersected with span(b) inside Q^n.
fn intersect_spans(a: &[Vec<Rat>], b: &[Vec<Rat>], n: usize) -> Vec<Vec<Rat>> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    // Solve sum x_i a_i - sum y_j b_j = 0 columnwise: rows are coordinates.
    let cols = a.len() + b.len();
    let mut rows = Vec::with_capacity(n);
    for coord in 0..n {
        let mut row = Vec::with_capacity(cols);
        for v in a {
            row.push(v[coord].clone());
        }
        for v in b {
            row.push(-v[coord].clone());
        }
        rows.push(row);
    }
    let null = rat_nullspace(&rows, cols);
    let mut out = Vec::new();
    for sol in null {
        let mut vec = vec![Rat::zero(); n];
        for (i, v) in a.iter().enumerate() {
            for c in 0..n {
                vec[c] += &sol[i] * &v[c];
            }
        }
        if vec.iter().any(|x| !x.is_zero()) {
            out.push(vec);
        }
    }
    out
}

/// Predicted limit class of the pushed diagonal orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitDescription {
    /// Partition of 1..=n into the diagonal blocks of the limit group,
    /// ordered by smallest member.
    pub components: Vec<Vec<usize>>,
    /// Basis of the bounded-direction subalgebra (center of the limit group).
    pub basis: Vec<Vec<Rat>>,
    pub block_sizes: Vec<usize>,
    pub center_dim: usize,
    /// True when the prediction is the uniform probability measure on the
    /// whole space.
    pub is_haar: bool,
}

pub fn predict_limit(
    pattern: &DivergencePattern,
    center_basis: Option<&[Vec<Rat>]>,
) -> Result<LimitDescription, FamilyError> {
    let basis = bounded_directions(pattern, center_basis)?;
    let n = pattern.n;
    // Blocks are the equality classes of coordinates across the basis.
    let mut class_of: Vec<usize> = vec![0; n];
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        let mut found = None;
        for (c, &r) in reps.iter().enumerate() {
            if basis.iter().all(|v| v[i] == v[r]) {
                found = Some(c);
                break;
            }
        }
        match found {
            Some(c) => class_of[i] = c,
            None => {
                reps.push(i);
                class_of[i] = reps.len() - 1;
            }
        }
    }
    let mut components: Vec<Vec<usize>> = vec![Vec::new(); reps.len()];
    for i in 0..n {
        components[class_of[i]].push(i + 1);
    }
    components.sort_by_key(|c| c[0]);
    let block_sizes = components.iter().map(Vec::len).collect();
    let center_dim = basis.len();
    let is_haar = components.len() == 1;
    Ok(LimitDescription { components, basis, block_sizes, center_dim, is_haar })
}

// ---------------------------------------------------------------------------
// Bounded-times-dichotomy splitting
// ---------------------------------------------------------------------------

/// Splits a unipotent upper family as F = B * V with B constant in k and V
/// satisfying the dichotomy (strictly-upper entries zero or of positive
/// degree). Column-by-column elimination with constant eliminators; exact.
pub fn split_bounded_factor(family: &PolyFamily) -> Result<(PolyFamily, PolyFamily), FamilyError> {
    if !family.is_unipotent_upper() {
        return Err(FamilyError::NotUnipotentUpper);
    }
    let n = family.n;
    // Find constant unipotent C with (C * F) satisfying the dichotomy; then
    // B = C^-1. Processing by increasing column difference makes each entry's
    // constant term removable independently.
    let mut c: Mat<Poly> = Mat::identity(n);
    let f = family.as_poly_mat();
    for diff in 1..n {
        for i in 0..n - diff {
            let j = i + diff;
            // (C*F)[i][j] with the C entries fixed so far.
            let mut acc = Poly::zero();
            for m in i..=j {
                acc = &acc + &(c.at(i, m) * f.at(m, j));
            }
            let shift = acc.constant_term();
            if !shift.is_zero() {
                // Subtract shift * (row j of F) via C[i][j] -= shift; F[j][j]=1.
                *c.at_mut(i, j) = &c.at(i, j).clone() - &Poly::constant(shift);
            }
        }
    }
    let v = c.matmul(&f);
    let b = c.unipotent_inverse();
    let to_family = |m: &Mat<Poly>, tag: &str| {
        PolyFamily::new(
            (0..n).map(|i| (0..n).map(|j| m.at(i, j).clone()).collect()).collect(),
            family.name.as_ref().map(|s| format!("{s}.{tag}")),
        )
    };
    let bounded = to_family(&b, "bounded");
    let dichotomy = to_family(&v, "dichotomy");
    debug_assert!(bounded
        .entries
        .iter()
        .flatten()
        .all(|p| p.degree().map_or(true, |d| d == 0)));
    debug_assert!(dichotomy.is_dichotomy());
    Ok((bounded, dichotomy))
}

// ---------------------------------------------------------------------------
// Iwasawa decomposition
// ---------------------------------------------------------------------------

/// g = K * N * A with K orthogonal, N unipotent upper, A positive diagonal.
/// Computed by modified Gram-Schmidt with a re-orthogonalization pass.
pub fn iwasawa(g: &Mat<f64>) -> Result<(Mat<f64>, Mat<f64>, Mat<f64>), FamilyError> {
    assert_eq!(g.rows, g.cols);
    let n = g.rows;
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut r = vec![vec![0.0f64; n]; n];
    for j in 0..n {
        let mut v = g.column(j);
        for pass in 0..2 {
            for (m, qm) in q.iter().enumerate() {
                let proj: f64 = qm.iter().zip(&v).map(|(a, b)| a * b).sum();
                if pass == 0 {
                    r[m][j] = proj;
                } else {
                    r[m][j] += proj;
                }
                for (x, qv) in v.iter_mut().zip(qm) {
                    *x -= proj * qv;
                }
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale: f64 = g.column(j).iter().map(|x| x.abs()).fold(1.0, f64::max);
        if norm <= 1e-13 * scale {
            return Err(FamilyError::Singular);
        }
        r[j][j] = norm;
        for x in v.iter_mut() {
            *x /= norm;
        }
        q.push(v);
    }
    let k = Mat::from_fn(n, n, |i, j| q[j][i]);
    let a = Mat::from_fn(n, n, |i, j| if i == j { r[i][i] } else { 0.0 });
    let nmat = Mat::from_fn(n, n, |i, j| if i <= j { r[i][j] / r[j][j] } else { 0.0 });
    Ok((k, nmat, a))
}

// ---------------------------------------------------------------------------
// Nilpotent limit of the pushed diagonal subalgebra
// ---------------------------------------------------------------------------

/// Limit of Ad(g(k)) Lie(A) in the Grassmannian, as a basis of strictly-upper
/// nilpotent matrices. Requires the bounded-direction subalgebra to vanish.
///
/// Each conjugated basis direction is normalized by its leading k-power; when
/// leading matrices collide we eliminate the collision with a polynomial
/// change of generators, which leaves the pointwise span untouched.
pub fn nilpotent_limit_span(family: &PolyFamily) -> Result<Vec<Mat<Rat>>, FamilyError> {
    if !family.is_unipotent_upper() {
        return Err(FamilyError::NotUnipotentUpper);
    }
    let pattern = divergence_pattern(family);
    let bounded = bounded_directions(&pattern, None)?;
    if !bounded.is_empty() {
        return Err(FamilyError::NontrivialBoundedDirections);
    }
    let n = family.n;
    let g = family.as_poly_mat();
    let g_inv = g.unipotent_inverse();

    // Conjugate the standard trace-zero diagonal basis H_i = E_ii - E_{i+1,i+1}.
    let mut vectors: Vec<Mat<Poly>> = Vec::new();
    for i in 0..n - 1 {
        let h = Mat::from_fn(n, n, |r, c| {
            if r == c && r == i {
                Poly::one()
            } else if r == c && r == i + 1 {
                -&Poly::one()
            } else {
                Poly::zero()
            }
        });
        vectors.push(g.matmul(&h).matmul(&g_inv));
    }

    loop {
        let degrees: Vec<usize> = vectors.iter().map(poly_mat_degree).collect();
        let leads: Vec<Vec<Rat>> = vectors
            .iter()
            .zip(&degrees)
            .map(|(v, &d)| poly_mat_coeff_flat(v, d))
            .collect();
        // Look for a rational dependence among the leading matrices.
        let mut rows = Vec::with_capacity(n * n);
        for coord in 0..n * n {
            rows.push(leads.iter().map(|l| l[coord].clone()).collect::<Vec<Rat>>());
        }
        let null = rat_nullspace(&rows, leads.len());
        let Some(dep) = null.first() else {
            break;
        };
        let support: Vec<usize> = (0..dep.len()).filter(|&i| !dep[i].is_zero()).collect();
        let d_max = support.iter().map(|&i| degrees[i]).max().unwrap();
        let target = *support.iter().find(|&&i| degrees[i] == d_max).unwrap();
        let mut combo: Mat<Poly> = Mat::from_fn(n, n, |_, _| Poly::zero());
        for &i in &support {
            let shift = Poly::monomial(d_max - degrees[i], dep[i].clone());
            let scaled = vectors[i].map(|p| p * &shift);
            combo = combo.add_mat(&scaled);
        }
        assert!(
            !combo.is_zero_mat(),
            "conjugated diagonal directions are independent over the function field"
        );
        vectors[target] = combo;
    }

    let mut out = Vec::new();
    for v in &vectors {
        let d = poly_mat_degree(v);
        assert!(d >= 1, "trivial bounded directions imply positive degree");
        let lead = Mat::from_fn(n, n, |i, j| v.at(i, j).coeff(d));
        // Unipotent conjugation keeps the diagonal constant, so the leading
        // matrix is strictly upper triangular.
        for i in 0..n {
            for j in 0..=i {
                assert!(lead.at(i, j).is_zero(), "leading matrix not strictly upper");
            }
        }
        out.push(lead);
    }
    Ok(out)
}

fn poly_mat_degree(m: &Mat<Poly>) -> usize {
    let mut d = 0;
    for i in 0..m.rows {
        for j in 0..m.cols {
            if let Some(e) = m.at(i, j).degree() {
                d = d.max(e);
            }
        }
    }
    d
}

fn poly_mat_coeff_flat(m: &Mat<Poly>, d: usize) -> Vec<Rat> {
    let mut out = Vec::with_capacity(m.rows * m.cols);
    for i in 0..m.rows {
        for j in 0..m.cols {
            out.push(m.at(i, j).coeff(d));
        }
    }
    out
}

/// Matrix power check used by tests: true when m^rows is the zero matrix.
pub fn is_nilpotent(m: &Mat<Rat>) -> bool {
    let n = m.rows;
    let mut p = m.clone();
    for _ in 1..n {
        p = p.matmul(m);
    }
    p.is_zero_mat()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_frac;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn k_poly() -> Poly {
        Poly::monomial(1, rat(1))
    }

    #[test]
    fn pattern_classification() {
        let fam = PolyFamily::square_cascade_3();
        let p = divergence_pattern(&fam);
        assert_eq!(*p.class(1, 2), DivergenceClass::Diverges);
        assert_eq!(*p.class(2, 3), DivergenceClass::Diverges);
        assert_eq!(*p.class(1, 3), DivergenceClass::Diverges);
        assert_eq!(*p.class(2, 1), DivergenceClass::Zero);
        assert_eq!(*p.class(1, 1), DivergenceClass::Constant(rat(1)));

        let fam3 = PolyFamily::two_block_4();
        let p3 = divergence_pattern(&fam3);
        assert_eq!(*p3.class(1, 2), DivergenceClass::Diverges);
        assert_eq!(*p3.class(3, 4), DivergenceClass::Diverges);
        assert_eq!(*p3.class(1, 3), DivergenceClass::Zero);
        assert_eq!(*p3.class(2, 3), DivergenceClass::Zero);
    }

    #[test]
    fn graphs_of_paper_families() {
        let g1 = graph_of(&divergence_pattern(&PolyFamily::square_cascade_3())).unwrap();
        assert_eq!(g1.edges(), vec![(1, 2), (1, 3), (2, 3)]);
        assert!(g1.is_connected());

        let g3 = graph_of(&divergence_pattern(&PolyFamily::two_block_4())).unwrap();
        assert_eq!(g3.edges(), vec![(1, 2), (3, 4)]);
        assert_eq!(g3.components(), vec![vec![1, 2], vec![3, 4]]);
    }

    #[test]
    fn constant_entry_violates_dichotomy() {
        let fam = PolyFamily::unipotent_from_upper(3, &[((1, 2), Poly::constant(rat(5)))], "c");
        let err = graph_of(&divergence_pattern(&fam)).unwrap_err();
        assert_eq!(err, FamilyError::DichotomyViolated { i: 1, j: 2 });
    }

    #[test]
    fn pc_subsets_path_graph() {
        let g = PatternGraph::from_edges(3, &[(1, 2), (2, 3)]);
        let sets: Vec<u64> = predecessor_closed_subsets(&g).iter().map(|m| m.mask()).collect();
        assert_eq!(sets, vec![0b001, 0b011, 0b111]); // {1}, {1,2}, {1,2,3}
    }

    #[test]
    fn pc_subsets_two_blocks() {
        let g = PatternGraph::from_edges(4, &[(1, 2), (3, 4)]);
        // products {none,{1},{1,2}} x {none,{3},{3,4}} minus empty = 8
        assert_eq!(predecessor_closed_subsets(&g).len(), 8);
    }

    #[test]
    fn pc_subsets_edgeless() {
        let g = PatternGraph::from_edges(3, &[]);
        assert_eq!(predecessor_closed_subsets(&g).len(), 7);
    }

    #[test]
    fn pc_subsets_brute_force_definition() {
        // Independent check straight from the definition on random graphs.
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(2..=6);
            let mut edges = Vec::new();
            for i in 1..=n {
                for j in i + 1..=n {
                    if rng.gen_bool(0.4) {
                        edges.push((i, j));
                    }
                }
            }
            let g = PatternGraph::from_edges(n, &edges);
            let fast: std::collections::BTreeSet<u64> =
                predecessor_closed_subsets(&g).iter().map(|m| m.mask()).collect();
            let mut slow = std::collections::BTreeSet::new();
            for mask in 1u64..(1 << n) {
                let mut ok = true;
                for i in 1..=n {
                    if mask >> (i - 1) & 1 == 1 {
                        for j in 1..i {
                            if g.has_edge(j, i) && mask >> (j - 1) & 1 == 0 {
                                ok = false;
                            }
                        }
                    }
                }
                if ok {
                    slow.insert(mask);
                }
            }
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn wedge_fixedness_simple() {
        let fam = PolyFamily::unipotent_from_upper(2, &[((1, 2), k_poly())], "n2");
        let i1 = MultiIndex::new(&[1], 2).unwrap();
        let i2 = MultiIndex::new(&[2], 2).unwrap();
        assert_eq!(wedge_fixedness(&fam, &i1).unwrap(), WedgeFate::Fixed);
        assert_eq!(wedge_fixedness(&fam, &i2).unwrap(), WedgeFate::Diverges);
    }

    #[test]
    fn wedge_fixedness_two_block() {
        let fam = PolyFamily::two_block_4();
        let i12 = MultiIndex::new(&[1, 2], 4).unwrap();
        let i23 = MultiIndex::new(&[2, 3], 4).unwrap();
        assert_eq!(wedge_fixedness(&fam, &i12).unwrap(), WedgeFate::Fixed);
        assert_eq!(wedge_fixedness(&fam, &i23).unwrap(), WedgeFate::Diverges);
    }

    #[test]
    fn fixedness_equals_predecessor_closure() {
        // The dichotomy equivalence, exhaustively over random families.
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..25 {
            let n = rng.gen_range(2..=5);
            let mut upper = Vec::new();
            for i in 1..=n {
                for j in i + 1..=n {
                    if rng.gen_bool(0.5) {
                        let deg = rng.gen_range(1..=2);
                        let lead = rat([1, -1, 2, 3][rng.gen_range(0..4)]);
                        upper.push(((i, j), Poly::monomial(deg, lead)));
                    }
                }
            }
            let fam = PolyFamily::unipotent_from_upper(n, &upper, "rand");
            let graph = graph_of(&divergence_pattern(&fam)).unwrap();
            let pc: std::collections::BTreeSet<u64> =
                predecessor_closed_subsets(&graph).iter().map(|m| m.mask()).collect();
            for index in MultiIndex::all_nonempty(n) {
                let fixed = wedge_fixedness(&fam, &index).unwrap() == WedgeFate::Fixed;
                assert_eq!(fixed, pc.contains(&index.mask()), "I={index} fam={fam:?}");
            }
        }
    }

    #[test]
    fn certificate_single_edge_and_path() {
        let g = PatternGraph::from_edges(2, &[(1, 2)]);
        let cert = separating_certificate(&g).unwrap();
        assert!(cert[0].is_positive());
        let total: Rat = cert.iter().cloned().sum();
        assert!(total.is_zero());

        let path = PatternGraph::from_edges(3, &[(1, 2), (2, 3)]);
        let cert = separating_certificate(&path).unwrap();
        let total: Rat = cert.iter().cloned().sum();
        assert!(total.is_zero());
        assert!(cert[0].is_positive());
        assert!((&cert[0] + &cert[1]).is_positive());
    }

    #[test]
    fn certificate_rejects_disconnected() {
        let g = PatternGraph::from_edges(4, &[(1, 2), (3, 4)]);
        assert_eq!(separating_certificate(&g).unwrap_err(), FamilyError::Disconnected);
    }

    #[test]
    fn certificate_verifies_on_random_connected_graphs() {
        let mut rng = StdRng::seed_from_u64(11);
        let mut done = 0;
        while done < 30 {
            let n = rng.gen_range(2..=8);
            let mut edges = Vec::new();
            for i in 1..=n {
                for j in i + 1..=n {
                    if rng.gen_bool(0.45) {
                        edges.push((i, j));
                    }
                }
            }
            let g = PatternGraph::from_edges(n, &edges);
            if !g.is_connected() {
                continue;
            }
            done += 1;
            let cert = separating_certificate(&g).unwrap();
            let total: Rat = cert.iter().cloned().sum();
            assert!(total.is_zero());
            for index in predecessor_closed_subsets(&g) {
                if index.len() == n {
                    continue;
                }
                let s: Rat = index.indices().iter().map(|&i| cert[i - 1].clone()).sum();
                assert!(s.is_positive(), "subset {index} sum {s} not positive in {g:?}");
            }
        }
    }

    #[test]
    fn bounded_directions_paper_answers() {
        // Connected cascade: trivial subalgebra.
        let p1 = divergence_pattern(&PolyFamily::square_cascade_3());
        assert!(bounded_directions(&p1, None).unwrap().is_empty());

        // Two blocks: span of diag(1,1,-1,-1).
        let p3 = divergence_pattern(&PolyFamily::two_block_4());
        let b = bounded_directions(&p3, None).unwrap();
        assert_eq!(b, vec![vec![rat(1), rat(1), rat(-1), rat(-1)]]);

        // Cascade with the 2+1 center: trivial.
        let s2 = PolyFamily::center_basis_block21();
        let b2 = bounded_directions(&p1, Some(&s2)).unwrap();
        assert!(b2.is_empty());

        // Corner cascade with the 2+1+1 center: span of diag(1,1,1,-3).
        let p4 = divergence_pattern(&PolyFamily::cascade_in_corner_4());
        let s4 = PolyFamily::center_basis_block211();
        let b4 = bounded_directions(&p4, Some(&s4)).unwrap();
        assert_eq!(b4, vec![vec![rat(1), rat(1), rat(1), rat(-3)]]);
    }

    #[test]
    fn predict_limit_paper_answers() {
        let p1 = divergence_pattern(&PolyFamily::square_cascade_3());
        let d1 = predict_limit(&p1, None).unwrap();
        assert!(d1.is_haar);
        assert_eq!(d1.components, vec![vec![1, 2, 3]]);
        assert_eq!(d1.center_dim, 0);

        let p3 = divergence_pattern(&PolyFamily::two_block_4());
        let d3 = predict_limit(&p3, None).unwrap();
        assert!(!d3.is_haar);
        assert_eq!(d3.components, vec![vec![1, 2], vec![3, 4]]);
        assert_eq!(d3.center_dim, 1);
        assert_eq!(d3.block_sizes, vec![2, 2]);

        let p4 = divergence_pattern(&PolyFamily::cascade_in_corner_4());
        let d4 = predict_limit(&p4, Some(&PolyFamily::center_basis_block211())).unwrap();
        assert!(!d4.is_haar);
        assert_eq!(d4.components, vec![vec![1, 2, 3], vec![4]]);
        assert_eq!(d4.block_sizes, vec![3, 1]);
    }

    #[test]
    fn dim_matches_component_count() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.gen_range(2..=6);
            let mut upper = Vec::new();
            for i in 1..=n {
                for j in i + 1..=n {
                    if rng.gen_bool(0.35) {
                        upper.push(((i, j), Poly::monomial(rng.gen_range(1..=3), rat(1))));
                    }
                }
            }
            let fam = PolyFamily::unipotent_from_upper(n, &upper, "r");
            let pattern = divergence_pattern(&fam);
            let graph = graph_of(&pattern).unwrap();
            let dirs = bounded_directions(&pattern, None).unwrap();
            assert_eq!(dirs.len(), graph.components().len() - 1);
        }
    }

    #[test]
    fn split_bounded_factor_examples() {
        // Single entry k: B = I, V = F.
        let f1 = PolyFamily::unipotent_from_upper(2, &[((1, 2), k_poly())], "a");
        let (b1, v1) = split_bounded_factor(&f1).unwrap();
        assert!(b1.as_poly_mat() == Mat::identity(2));
        assert!(v1.as_poly_mat() == f1.as_poly_mat());

        // Entry k+7: B has 7, V has k.
        let f2 = PolyFamily::unipotent_from_upper(
            2,
            &[((1, 2), Poly::from_coeffs(vec![rat(7), rat(1)]))],
            "b",
        );
        let (b2, v2) = split_bounded_factor(&f2).unwrap();
        assert_eq!(*b2.entry(0, 1), Poly::constant(rat(7)));
        assert_eq!(*v2.entry(0, 1), k_poly());
        assert!(b2.as_poly_mat().matmul(&v2.as_poly_mat()) == f2.as_poly_mat());

        // Constant family: B = F, V = I.
        let f3 = PolyFamily::unipotent_from_upper(
            3,
            &[((1, 2), Poly::constant(rat(2))), ((1, 3), Poly::constant(rat(-5)))],
            "c",
        );
        let (b3, v3) = split_bounded_factor(&f3).unwrap();
        assert!(v3.as_poly_mat() == Mat::identity(3));
        assert!(b3.as_poly_mat() == f3.as_poly_mat());
    }

    #[test]
    fn split_bounded_factor_random_roundtrip() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(2..=5);
            let mut upper = Vec::new();
            for i in 1..=n {
                for j in i + 1..=n {
                    let deg = rng.gen_range(0..=2usize);
                    let mut coeffs = Vec::new();
                    for _ in 0..=deg {
                        coeffs.push(rat_frac(rng.gen_range(-4..=4), rng.gen_range(1..=3)));
                    }
                    upper.push(((i, j), Poly::from_coeffs(coeffs)));
                }
            }
            let fam = PolyFamily::unipotent_from_upper(n, &upper, "rt");
            let (b, v) = split_bounded_factor(&fam).unwrap();
            assert!(b.as_poly_mat().matmul(&v.as_poly_mat()) == fam.as_poly_mat());
            assert!(v.is_dichotomy());
            assert!(graph_of(&divergence_pattern(&v)).is_ok());
        }
    }

    #[test]
    fn iwasawa_diagonal_and_rotation() {
        let d = Mat::from_rows(vec![vec![2.0, 0.0], vec![0.0, 0.5]]);
        let (k, n, a) = iwasawa(&d).unwrap();
        assert!((k.at(0, 0) - 1.0).abs() < 1e-12 && k.at(0, 1).abs() < 1e-12);
        assert!((n.at(0, 1)).abs() < 1e-12);
        assert!((a.at(0, 0) - 2.0).abs() < 1e-12 && (a.at(1, 1) - 0.5).abs() < 1e-12);

        let th: f64 = 0.7;
        let rot = Mat::from_rows(vec![vec![th.cos(), -th.sin()], vec![th.sin(), th.cos()]]);
        let (k, n, a) = iwasawa(&rot).unwrap();
        assert!((k.at(1, 0) - th.sin()).abs() < 1e-12);
        assert!(n.at(0, 1).abs() < 1e-12);
        assert!((a.at(0, 0) - 1.0).abs() < 1e-12 && (a.at(1, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iwasawa_reconstructs_random_sl3() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..25 {
            // Random matrix, scaled to determinant +-1, column-flipped to +1.
            let mut m = Mat::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
            let det = det3(&m);
            if det.abs() < 1e-3 {
                continue;
            }
            let s = 1.0 / det.abs().powf(1.0 / 3.0);
            m = m.map(|x| x * s);
            if det < 0.0 {
                for i in 0..3 {
                    *m.at_mut(i, 0) = -*m.at(i, 0);
                }
            }
            let (k, n, a) = iwasawa(&m).unwrap();
            let rec = k.matmul(&n).matmul(&a);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((rec.at(i, j) - m.at(i, j)).abs() < 1e-10);
                }
            }
            // K orthogonal, A positive, N unipotent upper.
            let ktk = k.transpose().matmul(&k);
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ktk.at(i, j) - want).abs() < 1e-10);
                }
            }
            for i in 0..3 {
                assert!(*a.at(i, i) > 0.0);
                assert!((n.at(i, i) - 1.0).abs() < 1e-12);
            }
        }
    }

    fn det3(m: &Mat<f64>) -> f64 {
        m.at(0, 0) * (m.at(1, 1) * m.at(2, 2) - m.at(1, 2) * m.at(2, 1))
            - m.at(0, 1) * (m.at(1, 0) * m.at(2, 2) - m.at(1, 2) * m.at(2, 0))
            + m.at(0, 2) * (m.at(1, 0) * m.at(2, 1) - m.at(1, 1) * m.at(2, 0))
    }

    #[test]
    fn nilpotent_limit_n2() {
        // n=2, entry k: conjugating diag(1,-1) gives diag(1,-1) - 2k E12.
        let fam = PolyFamily::unipotent_from_upper(2, &[((1, 2), k_poly())], "n2");
        let g = fam.as_poly_mat();
        let y = Mat::from_rows(vec![
            vec![Poly::one(), Poly::zero()],
            vec![Poly::zero(), -&Poly::one()],
        ]);
        let conj = g.matmul(&y).matmul(&g.unipotent_inverse());
        assert_eq!(*conj.at(0, 1), Poly::monomial(1, rat(-2)));

        let span = nilpotent_limit_span(&fam).unwrap();
        assert_eq!(span.len(), 1);
        let m = &span[0];
        assert!(m.at(0, 0).is_zero() && m.at(1, 1).is_zero() && m.at(1, 0).is_zero());
        assert!(!m.at(0, 1).is_zero());
    }

    #[test]
    fn nilpotent_limit_cascade() {
        let span = nilpotent_limit_span(&PolyFamily::square_cascade_3()).unwrap();
        assert_eq!(span.len(), 2);
        let flat: Vec<Vec<Rat>> = span
            .iter()
            .map(|m| (0..9).map(|i| m.at(i / 3, i % 3).clone()).collect())
            .collect();
        assert_eq!(crate::rat::rat_rank(&flat), 2);
        for m in &span {
            assert!(is_nilpotent(m));
            for i in 0..3 {
                for j in 0..=i {
                    assert!(m.at(i, j).is_zero());
                }
            }
        }
    }

    #[test]
    fn nilpotent_limit_rejects_constant_family() {
        let fam = PolyFamily::unipotent_from_upper(2, &[], "id");
        assert_eq!(
            nilpotent_limit_span(&fam).unwrap_err(),
            FamilyError::NontrivialBoundedDirections
        );
    }

    #[test]
    fn adjoint_fixes_span_exactly() {
        // For Y in the bounded-direction span, g(k) Y g(k)^-1 = Y exactly;
        // outside, the conjugate has positive degree.
        let fam = PolyFamily::two_block_4();
        let g = fam.as_poly_mat();
        let g_inv = g.unipotent_inverse();
        let conj = |diag: [i64; 4]| -> Mat<Poly> {
            let y = Mat::from_fn(4, 4, |i, j| {
                if i == j {
                    Poly::constant(rat(diag[i]))
                } else {
                    Poly::zero()
                }
            });
            g.matmul(&y).matmul(&g_inv)
        };
        let fixed = conj([1, 1, -1, -1]);
        let y = Mat::from_fn(4, 4, |i, j| {
            if i == j {
                Poly::constant(rat([1i64, 1, -1, -1][i]))
            } else {
                Poly::zero()
            }
        });
        assert!(fixed == y);
        let moved = conj([1, -1, 1, -1]);
        assert!(poly_mat_degree(&moved) >= 1);
    }

    #[test]
    fn family_json_round_trip() {
        let text = r#"{
            "name": "demo",
            "n": 2,
            "entries": [[["1"], ["0", "1/2"]], [["0"], ["1"]]]
        }"#;
        let fam = parse_family_json(text).unwrap();
        assert_eq!(fam.n, 2);
        assert_eq!(*fam.entry(0, 1), Poly::monomial(1, rat_frac(1, 2)));
        assert!(fam.is_unipotent_upper());

        let bad = r#"{"n": 2, "entries": [[["1"], ["1/0"]], [["0"], ["1"]]]}"#;
        assert!(matches!(parse_family_json(bad), Err(FamilyError::BadFile(_))));
    }
}
