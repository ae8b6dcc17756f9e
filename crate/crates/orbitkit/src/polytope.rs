//! Convex polytopes inside the trace-zero hyperplane Lie(A): the wedge-norm
//! polytope of a matrix (one constraint per nonempty index set) and the
//! adjoint-weight polytope (one constraint per weight per wedge grade), with
//! exact vertex geometry, Hausdorff or coordinate-chart volumes, Chebyshev
//! centers, and reproducible uniform sampling.
//!
//! All lengths and volumes are measured in the metric induced by the
//! Euclidean norm on n x n matrices; on diagonal matrices that is the plain
//! Euclidean norm of the coordinate vector, so an orthonormal chart of the
//! hyperplane carries the measure isometrically.

use thiserror::Error;

use crate::exterior::{LieAVector, MultiIndex};
use crate::geometry::{
    mc_neighborhood_volume, mc_volume, ChartPolytope, GeometryError, PolytopeSampler, VertexSet,
};
use crate::lattice::{weight_min_log_norm, weight_spaces, LatticeError, WeightSpace};
use crate::rat::{Mat, Rat};

#[derive(Debug, Error, PartialEq)]
pub enum PolytopeError {
    #[error("delta must lie in (0,1), got {0}")]
    BadDelta(f64),
    #[error("dimension cap exceeded: {0}")]
    DimensionCap(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Which constraint produced a facet.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintLabel {
    /// Index-sum functional of a multi-index set.
    Index(MultiIndex),
    /// Adjoint weight at a wedge grade.
    Weight { grade: usize, chi: Vec<i64> },
}

impl std::fmt::Display for ConstraintLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintLabel::Index(i) => write!(f, "I={i}"),
            ConstraintLabel::Weight { grade, chi } => {
                let parts: Vec<String> = chi.iter().map(ToString::to_string).collect();
                write!(f, "chi=({}) l={grade}", parts.join(","))
            }
        }
    }
}

/// Half-space description a . t >= b inside the hyperplane sum(t) = 0.
/// Functionals are stored as raw n-vectors and compared modulo the all-ones
/// direction (the chart projection quotients it out).
#[derive(Clone, Debug)]
pub struct HPolytope {
    pub n: usize,
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub labels: Vec<ConstraintLabel>,
}

/// Vertex description: chart geometry plus the embedded Lie(A) vertices.
#[derive(Clone, Debug)]
pub struct VPolytope {
    pub n: usize,
    pub chart: VertexSet,
    pub vertices: Vec<LieAVector>,
}

/// Volume normalization for the (n-1)-dimensional hyperplane.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// Hausdorff measure of the matrix-space Euclidean metric (default).
    Hausdorff,
    /// Lebesgue measure of the (t_1..t_{n-1}) coordinate chart, which drops
    /// the sqrt(n) distortion factor of that projection.
    CoordinateChart,
}

impl Measure {
    fn from_hausdorff(self, v: f64, n: usize) -> f64 {
        match self {
            Measure::Hausdorff => v,
            Measure::CoordinateChart => v / (n as f64).sqrt(),
        }
    }
}

/// Orthonormal basis of {t : sum t = 0}: rows j=1..n-1 of the Helmert matrix.
pub fn helmert_basis(n: usize) -> Vec<Vec<f64>> {
    (1..n)
        .map(|j| {
            let scale = 1.0 / ((j * (j + 1)) as f64).sqrt();
            (0..n)
                .map(|i| {
                    if i < j {
                        scale
                    } else if i == j {
                        -(j as f64) * scale
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

impl HPolytope {
    pub fn new(
        n: usize,
        constraints: Vec<(Vec<f64>, f64, ConstraintLabel)>,
    ) -> Self {
        let mut normals = Vec::with_capacity(constraints.len());
        let mut offsets = Vec::with_capacity(constraints.len());
        let mut labels = Vec::with_capacity(constraints.len());
        for (a, b, l) in constraints {
            assert_eq!(a.len(), n);
            normals.push(a);
            offsets.push(b);
            labels.push(l);
        }
        HPolytope { n, normals, offsets, labels }
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// a_i . t - b_i for a point of Lie(A).
    pub fn slack(&self, i: usize, t: &LieAVector) -> f64 {
        let a = &self.normals[i];
        a.iter().zip(t.coords()).map(|(x, y)| x * y).sum::<f64>() - self.offsets[i]
    }

    pub fn contains(&self, t: &LieAVector, tol: f64) -> bool {
        (0..self.len()).all(|i| self.slack(i, t) >= -tol)
    }

    /// Projection into the orthonormal chart of the hyperplane.
    pub fn to_chart(&self) -> Result<ChartPolytope, PolytopeError> {
        let q = helmert_basis(self.n);
        let mut cons = Vec::with_capacity(self.len());
        for (a, &b) in self.normals.iter().zip(&self.offsets) {
            let proj: Vec<f64> = q
                .iter()
                .map(|row| row.iter().zip(a).map(|(r, x)| r * x).sum())
                .collect();
            cons.push((proj, b));
        }
        Ok(ChartPolytope::new(self.n - 1, cons)?)
    }

    pub fn vertices(&self) -> Result<VPolytope, PolytopeError> {
        let chart = self.to_chart()?.vertices()?;
        let q = helmert_basis(self.n);
        let vertices = chart
            .verts
            .iter()
            .map(|u| {
                let t: Vec<f64> = (0..self.n)
                    .map(|i| u.iter().zip(&q).map(|(ui, row)| ui * row[i]).sum())
                    .collect();
                LieAVector::new(t).expect("chart points are trace-zero")
            })
            .collect();
        Ok(VPolytope { n: self.n, chart, vertices })
    }

    /// Chebyshev center and inradius, with functional norms taken in the
    /// hyperplane (the chart).
    pub fn inradius(&self) -> Result<(f64, LieAVector), PolytopeError> {
        let chart = self.to_chart()?;
        let (r, u) = chart.inradius()?;
        let q = helmert_basis(self.n);
        let t: Vec<f64> = (0..self.n)
            .map(|i| u.iter().zip(&q).map(|(ui, row)| ui * row[i]).sum())
            .collect();
        Ok((r, LieAVector::new(t).expect("center is trace-zero")))
    }

    /// Uniform samples, bit-reproducible in (seed, count): sample i depends
    /// only on (seed, i), so any prefix or parallel partition agrees.
    pub fn sample_uniform(&self, count: usize, seed: u64) -> Result<Vec<LieAVector>, PolytopeError> {
        let sampler = self.sampler(seed)?;
        Ok((0..count as u64).map(|i| sampler.sample_lie(i)).collect())
    }

    pub fn sampler(&self, seed: u64) -> Result<LieSampler, PolytopeError> {
        let vs = self.to_chart()?.vertices()?;
        let inner = PolytopeSampler::new(&vs, seed)?;
        Ok(LieSampler { n: self.n, q: helmert_basis(self.n), inner })
    }
}

/// Sampler returning Lie(A) points; wraps the chart sampler.
pub struct LieSampler {
    n: usize,
    q: Vec<Vec<f64>>,
    inner: PolytopeSampler,
}

impl LieSampler {
    pub fn sample_lie(&self, idx: u64) -> LieAVector {
        let u = self.inner.sample(idx);
        let t: Vec<f64> = (0..self.n)
            .map(|i| u.iter().zip(&self.q).map(|(ui, row)| ui * row[i]).sum())
            .collect();
        LieAVector::new(t).expect("chart points are trace-zero")
    }

    pub fn mode(&self) -> crate::geometry::SampleMode {
        self.inner.mode
    }
}

impl VPolytope {
    /// (n-1)-dimensional volume in the requested normalization; 0 for
    /// degenerate (lower-dimensional) bodies.
    pub fn volume(&self, measure: Measure) -> f64 {
        measure.from_hausdorff(self.chart.volume(), self.n)
    }

    /// Sum of facet volumes (Hausdorff); endpoint count (2) in dimension 1.
    pub fn surface_area(&self) -> f64 {
        self.chart.surface_area()
    }

    pub fn mc_volume(&self, samples: usize, seed: u64, measure: Measure) -> (f64, f64) {
        let (v, se) = mc_volume(&self.chart, samples, seed);
        (measure.from_hausdorff(v, self.n), measure.from_hausdorff(se, self.n))
    }

    /// Monte Carlo volume of the eps-neighborhood within the hyperplane.
    pub fn mc_neighborhood_volume(&self, eps: f64, samples: usize, seed: u64) -> (f64, f64) {
        mc_neighborhood_volume(&self.chart, eps, samples, seed)
    }

    pub 	fn centroid(&self) -> LieAVector {
        let n = self.n;
        let mut t = vec![0.0; n];
        for v in &self.vertices {
            for i in 0..n {
                t[i] += v.coords()[i];
            }
        }
        for x in t.iter_mut() {
            *x /= self.vertices.len() as f64;
        }
        LieAVector::new(t).expect("mean of trace-zero points")
    }
}

/// The wedge-norm polytope of (g, delta): one constraint per nonempty proper
/// index set I, sum_{i in I} t_i >= ln(delta) - ln ||g e_I||. The full-set
/// constraint 0 >= ln(delta) holds vacuously for delta < 1 and is dropped.
pub fn wedge_polytope(g: &Mat<Rat>, delta: f64) -> Result<HPolytope, PolytopeError> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(PolytopeError::BadDelta(delta));
    }
    let n = g.rows;
    if n > 6 {
        return Err(PolytopeError::DimensionCap(format!("n={n} > 6")));
    }
    let ln_delta = delta.ln();
    let mut cons = Vec::new();
    for index in MultiIndex::all_nonempty(n) {
        if index.len() == n {
            continue;
        }
        let log_norm = crate::exterior::wedge_log_norm(g, &index).expect("square matrix");
        let a: Vec<f64> = (1..=n).map(|i| if index.contains(i) { 1.0 } else { 0.0 }).collect();
        cons.push((a, ln_delta - log_norm, ConstraintLabel::Index(index)));
    }
    Ok(HPolytope::new(n, cons))
}

/// The adjoint-weight polytope of (g, delta): one constraint per weight chi
/// per wedge grade l, chi(t) >= ln(delta) - ln(min nonzero integer vector of
/// the weight space under the wedge adjoint action).
///
/// `grades`: wedge grades to include; defaults to all 1..=dim-1 for n <= 3,
/// and must be given explicitly for n = 4. `basis_only` replaces each
/// shortest-vector computation by the minimum over basis monomials (a
/// superset polytope, cheaper).
pub fn adjoint_weight_polytope(
    g: &Mat<Rat>,
    delta: f64,
    grades: Option<(usize, usize)>,
    basis_only: bool,
) -> Result<HPolytope, PolytopeError> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(PolytopeError::BadDelta(delta));
    }
    let n = g.rows;
    let dim_g = n * n - 1;
    let (lo, hi) = match grades {
        Some((lo, hi)) => (lo.max(1), hi.min(dim_g - 1)),
        None => {
            if n > 3 {
                return Err(PolytopeError::DimensionCap(format!(
                    "n={n} needs an explicit grade range"
                )));
            }
            (1, dim_g - 1)
        }
    };
    let ln_delta = delta.ln();
    let mut cons = Vec::new();
    for l in lo..=hi {
        for w in weight_spaces(n, l)? {
            if w.dim() > crate::lattice::SVP_DIM_CAP && !basis_only {
                // Weight spaces beyond the SVP cap fall back to the basis
                // bound; this only weakens constraints that are far from
                // binding (large-norm spaces).
                let log_norm = weight_min_log_norm(g, &w, true)?;
                cons.push(weight_constraint(n, &w, ln_delta - log_norm));
                continue;
            }
            let log_norm = weight_min_log_norm(g, &w, basis_only)?;
            cons.push(weight_constraint(n, &w, ln_delta - log_norm));
        }
    }
    Ok(HPolytope::new(n, cons))
}

fn weight_constraint(n: usize, w: &WeightSpace, offset: f64) -> (Vec<f64>, f64, ConstraintLabel) {
    let a: Vec<f64> = w.chi.iter().map(|&c| c as f64).collect();
    (
        a,
        offset,
        ConstraintLabel::Weight { grade: w.grade, chi: w.chi.clone() },
    )
}
