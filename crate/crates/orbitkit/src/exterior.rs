//! Multi-index sets, the action of a matrix on wedge products of standard
//! basis vectors, wedge norms, and index-sum functionals on Lie(A).
//!
//! Everything here is pure and deterministic. Matrices with exact rational
//! entries get exact answers; f64 matrices get f64 answers with the same code
//! paths via the shared `Ring` machinery.

use std::collections::BTreeMap;
use std::fmt;

use crate::rat::{minors_all_row_subsets, rat_to_f64, subsets_of_size, Mat, Rat};
use num::{One, Zero};
use thiserror::Error;

/// Hard cap on the ambient dimension; keeps every wedge space at desk scale.
pub const MAX_N: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExteriorError {
    #[error("dimension mismatch: index set lives in n={index_n}, matrix is {mat_n}x{mat_n}")]
    DimensionMismatch { index_n: usize, mat_n: usize },
    #[error("invalid multi-index: {0}")]
    BadIndex(String),
}

/// A nonempty, strictly increasing set of indices in 1..=n, stored as a bitmask
/// (bit i-1 set means index i is a member).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex {
    mask: u64,
    n: usize,
}

impl MultiIndex {
    pub fn new(indices: &[usize], n: usize) -> Result<Self, ExteriorError> {
        if n == 0 || n > MAX_N {
            return Err(ExteriorError::BadIndex(format!("ambient dimension {n} out of range")));
        }
        if indices.is_empty() {
            return Err(ExteriorError::BadIndex("empty index set".into()));
        }
        let mut mask = 0u64;
        let mut prev = 0usize;
        for &i in indices {
            if i == 0 || i > n {
                return Err(ExteriorError::BadIndex(format!("index {i} outside 1..={n}")));
            }
            if i <= prev {
                return Err(ExteriorError::BadIndex("indices not strictly increasing".into()));
            }
            prev = i;
            mask |= 1 << (i - 1);
        }
        Ok(MultiIndex { mask, n })
    }

    pub fn from_mask(mask: u64, n: usize) -> Result<Self, ExteriorError> {
        if mask == 0 {
            return Err(ExteriorError::BadIndex("empty index set".into()));
        }
        if n == 0 || n > MAX_N || mask >> n != 0 {
            return Err(ExteriorError::BadIndex(format!("mask {mask:#b} outside 1..={n}")));
        }
        Ok(MultiIndex { mask, n })
    }

    pub fn full(n: usize) -> Self {
        MultiIndex { mask: (1 << n) - 1, n }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.n && self.mask >> (i - 1) & 1 == 1
    }

    /// Member indices, 1-based, ascending.
    pub fn indices(&self) -> Vec<usize> {
        (1..=self.n).filter(|&i| self.contains(i)).collect()
    }

    /// All C(n,l) multi-indexes of cardinality l.
    pub fn all_of_size(n: usize, l: usize) -> Vec<MultiIndex> {
        subsets_of_size(n, l)
            .into_iter()
            .map(|mask| MultiIndex { mask, n })
            .collect()
    }

    /// All 2^n - 1 nonempty multi-indexes, ascending by cardinality then mask.
    pub fn all_nonempty(n: usize) -> Vec<MultiIndex> {
        (1..=n).flat_map(|l| Self::all_of_size(n, l)).collect()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A grade-l element of the wedge power of R^n in the standard e_I basis.
/// Absent keys are zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct WedgeVector<T> {
    pub n: usize,
    pub grade: usize,
    pub coords: BTreeMap<u64, T>,
}

impl<T: Clone + Zero> WedgeVector<T> {
    pub fn coeff(&self, index: &MultiIndex) -> T {
        assert_eq!(index.n, self.n);
        assert_eq!(index.len(), self.grade);
        self.coords.get(&index.mask).cloned().unwrap_or_else(T::zero)
    }

    /// e_I itself.
    pub fn basis(index: MultiIndex) -> Self
    where
        T: One,
    {
        let mut coords = BTreeMap::new();
        coords.insert(index.mask, T::one());
        WedgeVector { n: index.n, grade: index.len(), coords }
    }
}

/// g . e_I expanded in the wedge basis: the coefficient on e_J is the minor of
/// g with rows J and columns I. Grade is preserved.
pub fn wedge_action<T>(g: &Mat<T>, index: &MultiIndex) -> Result<WedgeVector<T>, ExteriorError>
where
    T: crate::rat::Ring,
    for<'a> &'a T: std::ops::Add<&'a T, Output = T>
        + std::ops::Sub<&'a T, Output = T>
        + std::ops::Mul<&'a T, Output = T>
        + std::ops::Neg<Output = T>,
{
    if g.rows != g.cols || g.rows != index.n {
        return Err(ExteriorError::DimensionMismatch { index_n: index.n, mat_n: g.rows });
    }
    let cols: Vec<Vec<T>> = index.indices().iter().map(|&i| g.column(i - 1)).collect();
    let coords = minors_all_row_subsets(&cols).into_iter().collect();
    Ok(WedgeVector { n: index.n, grade: index.len(), coords })
}

/// Exact squared Euclidean norm of g . e_I (sum of squared minors).
pub fn wedge_norm_sq(g: &Mat<Rat>, index: &MultiIndex) -> Result<Rat, ExteriorError> {
    let w = wedge_action(g, index)?;
    Ok(w.coords.values().map(|c| c * c).sum())
}

/// Euclidean norm of g . e_I for an exact matrix, returned as f64.
pub fn wedge_norm(g: &Mat<Rat>, index: &MultiIndex) -> Result<f64, ExteriorError> {
    let sq = wedge_norm_sq(g, index)?;
    Ok(rat_to_f64(&sq).sqrt())
}

/// ln || g . e_I ||, robust for norms far outside f64 range.
pub fn wedge_log_norm(g: &Mat<Rat>, index: &MultiIndex) -> Result<f64, ExteriorError> {
    let sq = wedge_norm_sq(g, index)?;
    Ok(0.5 * crate::rat::rat_ln(&sq))
}

/// Euclidean norm of g . e_I for an f64 matrix.
pub fn wedge_norm_f64(g: &Mat<f64>, index: &MultiIndex) -> Result<f64, ExteriorError> {
    if g.rows != g.cols || g.rows != index.n {
        return Err(ExteriorError::DimensionMismatch { index_n: index.n, mat_n: g.rows });
    }
    let idx = index.indices();
    let l = idx.len();
    let mut sq = 0.0f64;
    for mask in subsets_of_size(index.n, l) {
        let rows: Vec<usize> = (0..index.n).filter(|i| mask >> i & 1 == 1).collect();
        let mut sub = vec![vec![0.0; l]; l];
        for (ri, &r) in rows.iter().enumerate() {
            for (ci, &c) in idx.iter().enumerate() {
                sub[ri][ci] = *g.at(r, c - 1);
            }
        }
        let d = det_f64(&mut sub);
        sq += d * d;
    }
    Ok(sq.sqrt())
}

fn det_f64(a: &mut [Vec<f64>]) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let (p, &max) = a[col..]
            .iter()
            .map(|row| row[col].abs())
            .enumerate()
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .map(|(i, _)| (i + col, &a[i + col][col]))
            .unwrap();
        if max == 0.0 {
            return 0.0;
        }
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// A point of Lie(A): n log-scale diagonal entries summing to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAVector {
    t: Vec<f64>,
}

impl LieAVector {
    pub fn new(t: Vec<f64>) -> Result<Self, ExteriorError> {
        let sum: f64 = t.iter().sum();
        let scale = t.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if sum.abs() > 1e-12 * scale.max(1.0) {
            return Err(ExteriorError::BadIndex(format!(
                "coordinates sum to {sum}, not zero"
            )));
        }
        Ok(LieAVector { t })
    }

    pub fn zero(n: usize) -> Self {
        LieAVector { t: vec![0.0; n] }
    }

    pub fn from_rational(v: &[Rat]) -> Result<Self, ExteriorError> {
        let sum: Rat = v.iter().cloned().sum();
        if !sum.is_zero() {
            return Err(ExteriorError::BadIndex("rational coordinates do not sum to zero".into()));
        }
        Ok(LieAVector { t: v.iter().map(rat_to_f64).collect() })
    }

    pub fn coords(&self) -> &[f64] {
        &self.t
    }

    pub fn dim(&self) -> usize {
        self.t.len()
    }

    /// exp(t) as a diagonal matrix.
    pub fn exp_diag(&self) -> Mat<f64> {
        let n = self.t.len();
        Mat::from_fn(n, n, |i, j| if i == j { self.t[i].exp() } else { 0.0 })
    }
}

/// The index-sum functional: omega_I(t) = sum of the selected coordinates.
pub fn omega(index: &MultiIndex, t: &LieAVector) -> f64 {
    assert_eq!(index.n, t.dim(), "incompatible dimensions");
    index.indices().iter().map(|&i| t.coords()[i - 1]).sum()
}

/// Exact variant for rational coordinates.
pub fn omega_rat(index: &MultiIndex, t: &[Rat]) -> Rat {
    assert_eq!(index.n, t.len(), "incompatible dimensions");
    index.indices().iter().map(|&i| t[i - 1].clone()).sum()
}
