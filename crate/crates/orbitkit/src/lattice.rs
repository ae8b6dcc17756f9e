//! Lattice computations: exact LLL reduction on rational Gram matrices,
//! shortest vectors and ball point counts by sphere enumeration, and the
//! weight decomposition of wedge powers of sl_n under the diagonal group.
//!
//! Bases arriving as f64 matrices are snapped to exact dyadic rationals, so
//! every reduction step is exact and the results are bit-reproducible. The
//! enumeration runs on the f64 Cholesky of the reduced Gram, which is well
//! conditioned after reduction.

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};
use thiserror::Error;

use crate::rat::{rat, rat_inverse, rat_ln, rat_to_f64, Mat, Rat};

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("singular basis")]
    Singular,
    #[error("dimension {0} exceeds the cap {1}")]
    DimensionCap(usize, usize),
    #[error("point count exceeds the 10^7 cap")]
    CountCap,
    #[error("weight-space rank {0} exceeds the cap 12")]
    RankCap(usize),
    #[error("wedge space too large: C({0},{1}) > 10^5")]
    WedgeCap(usize, usize),
}

pub const SVP_DIM_CAP: usize = 12;
pub const COUNT_DIM_CAP: usize = 6;
pub const COUNT_CAP: u64 = 10_000_000;
const LLL_DELTA_NUM: i64 = 99;
const LLL_DELTA_DEN: i64 = 100;

/// Columns generate the lattice.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    pub dim: usize,
    pub cols: Vec<Vec<f64>>,
}

impl LatticeBasis {
    pub fn new(cols: Vec<Vec<f64>>) -> Self {
        let dim = cols.len();
        assert!(cols.iter().all(|c| c.len() == dim), "basis must be square");
        LatticeBasis { dim, cols }
    }

    pub fn from_mat(m: &Mat<f64>) -> Self {
        LatticeBasis::new((0..m.cols).map(|j| m.column(j)).collect())
    }

    pub fn det(&self) -> f64 {
        let mut a: Vec<Vec<f64>> = self.cols.clone();
        let n = self.dim;
        let mut det = 1.0;
        for col in 0..n {
            let (p, mx) = (col..n)
                .map(|r| (r, a[r][col].abs()))
                .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                .unwrap();
            if mx == 0.0 {
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

    /// Test/bench access to the exact Gram.
    pub fn debug_exact_gram(&self, bits: Option<u32>) -> Result<Mat<Rat>, LatticeError> {
        self.exact_gram(bits)
    }

    /// Exact rational Gram of this basis. With `bits = None` every f64 entry
    /// is taken exactly; otherwise entries are first rounded to that many
    /// significant bits (a nearby lattice, cheaper to reduce).
    fn exact_gram(&self, bits: Option<u32>) -> Result<Mat<Rat>, LatticeError> {
        let n = self.dim;
        let mut cols_rat: Vec<Vec<Rat>> = Vec::with_capacity(n);
        for c in &self.cols {
            cols_rat.push(
                c.iter()
                    .map(|&x| match bits {
                        None => crate::rat::rat_from_f64(x),
                        Some(b) => dyadic_round(x, b),
                    })
                    .collect(),
            );
        }
        let gram = Mat::from_fn(n, n, |i, j| {
            let mut acc = Rat::zero();
            for r in 0..n {
                acc += &cols_rat[i][r] * &cols_rat[j][r];
            }
            acc
        });
        for i in 0..n {
            if gram.at(i, i).is_zero() {
                return Err(LatticeError::Singular);
            }
        }
        Ok(gram)
    }
}

/// Exact dyadic rational with `bits` significant bits of x.
fn dyadic_round(x: f64, bits: u32) -> Rat {
    if x == 0.0 {
        return Rat::zero();
    }
    let exp = x.abs().log2().floor() as i32;
    let shift = bits as i32 - 1 - exp;
    let scaled = if shift >= 0 {
        x * (shift as f64).exp2()
    } else {
        x / ((-shift) as f64).exp2()
    };
    let m = BigInt::from(scaled.round() as i128);
    if shift >= 0 {
        Rat::new(m, BigInt::one() << shift as usize)
    } else {
        Rat::from_integer(m << (-shift) as usize)
    }
}

// ---------------------------------------------------------------------------
// Exact LLL on a rational Gram matrix
// ---------------------------------------------------------------------------

/// All-integer LLL on a positive-definite integer Gram (delta = 99/100),
/// following the classical lambda/d bookkeeping: lambda[k][j] = mu_kj d_{j+1}
/// and d are the leading principal Gram-minor determinants, so every division
/// below is exact. `u` rows express the reduced basis in the original one.
struct IntLll {
    n: usize,
    gram: Vec<Vec<BigInt>>,
    u: Vec<Vec<BigInt>>,
    lambda: Vec<Vec<BigInt>>,
    d: Vec<BigInt>,
    kmax: usize,
}

impl IntLll {
    fn new(gram: Vec<Vec<BigInt>>) -> Self {
        let n = gram.len();
        let u = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        IntLll {
            n,
            gram,
            u,
            lambda: vec![vec![BigInt::zero(); n]; n],
            d: vec![BigInt::one(); n + 1],
            kmax: 0,
        }
    }

    /// Incremental Gram-Schmidt row for basis vector k.
    fn gso_row(&mut self, k: usize) -> Result<(), LatticeError> {
        for j in 0..=k {
            let mut u_val = self.gram[k][j].clone();
            for i in 0..j {
                u_val = (&self.d[i + 1] * &u_val - &self.lambda[k][i] * &self.lambda[j][i])
                    / &self.d[i];
            }
            if j < k {
                self.lambda[k][j] = u_val;
            } else {
                if !u_val.is_positive() {
                    return Err(LatticeError::Singular);
                }
                self.d[k + 1] = u_val;
            }
        }
        Ok(())
    }

    /// Size-reduces b_k against b_l when |mu| > 1/2.
    fn redi(&mut self, k: usize, l: usize) {
        let two_lam: BigInt = &self.lambda[k][l] * 2;
        if two_lam.magnitude() <= self.d[l + 1].magnitude() {
            return;
        }
        // Nearest integer of lambda/d.
        let q = nearest_div(&self.lambda[k][l], &self.d[l + 1]);
        if q.is_zero() {
            return;
        }
        for c in 0..self.n {
            let sub = &q * &self.u[l][c];
            self.u[k][c] -= sub;
        }
        // Symmetric Gram update for b_k -= q b_l.
        for c in 0..self.n {
            let sub = &q * &self.gram[l][c];
            self.gram[k][c] -= sub;
        }
        for r in 0..self.n {
            let sub = &q * &self.gram[r][l];
            self.gram[r][k] -= sub;
        }
        let sub = &q * &self.d[l + 1];
        self.lambda[k][l] -= sub;
        for i in 0..l {
            let sub = &q * &self.lambda[l][i];
            self.lambda[k][i] -= sub;
        }
    }

    /// Swaps b_k and b_{k-1}, k >= 1.
    fn swapi(&mut self, k: usize) {
        self.u.swap(k, k - 1);
        self.gram.swap(k, k - 1);
        for row in self.gram.iter_mut() {
            row.swap(k, k - 1);
        }
        for j in 0..k.saturating_sub(1) {
            let tmp = self.lambda[k][j].clone();
            self.lambda[k][j] = self.lambda[k - 1][j].clone();
            self.lambda[k - 1][j] = tmp;
        }
        let lam = self.lambda[k][k - 1].clone();
        let b = (&self.d[k - 1] * &self.d[k + 1] + &lam * &lam) / &self.d[k];
        for i in k + 1..=self.kmax {
            let t = self.lambda[i][k].clone();
            self.lambda[i][k] = (&self.d[k + 1] * &self.lambda[i][k - 1] - &lam * &t) / &self.d[k];
            self.lambda[i][k - 1] = (&b * &t + &lam * &self.lambda[i][k]) / &self.d[k + 1];
        }
        self.d[k] = b;
    }

    fn reduce(&mut self) -> Result<(), LatticeError> {
        let n = self.n;
        self.d[1] = self.gram[0][0].clone();
        if !self.d[1].is_positive() {
            return Err(LatticeError::Singular);
        }
        let mut k = 1usize;
        while k < n {
            if k > self.kmax {
                self.kmax = k;
                self.gso_row(k)?;
            }
            self.redi(k, k - 1);
            // Lovasz with delta = 99/100:
            // swap when 100 d_{k+1} d_{k-1} < 99 d_k^2 - 100 lambda^2.
            let lhs: BigInt = 100 * (&self.d[k + 1] * &self.d[k - 1]);
            let rhs: BigInt =
                99 * (&self.d[k] * &self.d[k]) - 100 * (&self.lambda[k][k - 1] * &self.lambda[k][k - 1]);
            if lhs < rhs {
                self.swapi(k);
                k = k.max(2) - 1;
            } else {
                for l in (0..k.saturating_sub(1)).rev() {
                    self.redi(k, l);
                }
                k += 1;
            }
        }
        Ok(())
    }
}

/// Nearest integer to a/b for b > 0.
fn nearest_div(a: &BigInt, b: &BigInt) -> BigInt {
    let two_a: BigInt = a * 2;
    let two_b: BigInt = b * 2;
    // floor((2a + b) / 2b)
    (two_a + b).div_floor(&two_b)
}

/// LLL-reduced Gram plus the unimodular row transform, for a rational Gram.
pub fn lll_reduce_gram(gram: Mat<Rat>) -> Result<(Mat<Rat>, Vec<Vec<BigInt>>), LatticeError> {
    let (ints, scale) = integerize(&gram);
    let mut st = IntLll::new(ints);
    st.reduce()?;
    let n = gram.rows;
    let out = Mat::from_fn(n, n, |i, j| Rat::new(st.gram[i][j].clone(), scale.clone()));
    Ok((out, st.u))
}

/// Clears denominators: returns (gram * L, L) with L the denominator lcm.
fn integerize(gram: &Mat<Rat>) -> (Vec<Vec<BigInt>>, BigInt) {
    let n = gram.rows;
    let mut l = BigInt::one();
    for i in 0..n {
        for j in 0..n {
            l = l.lcm(gram.at(i, j).denom());
        }
    }
    let ints = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let r = gram.at(i, j) * Rat::from_integer(l.clone());
                    debug_assert!(r.is_integer());
                    r.to_integer()
                })
                .collect()
        })
        .collect();
    (ints, l)
}

// ---------------------------------------------------------------------------
// Sphere enumeration on a reduced Gram
// ---------------------------------------------------------------------------

/// Visits every nonzero integer vector x with x^T G x <= radius_sq, in the
/// coordinates of the given Gram. The visitor returns the (possibly shrunk)
/// search radius. Aborts with CountCap after `cap` visits when a cap is set.
fn enumerate_gram(
    gram_f64: &[Vec<f64>],
    radius_sq: f64,
    cap: Option<u64>,
    visit: &mut dyn FnMut(&[i64], f64) -> f64,
) -> Result<(), LatticeError> {
    let n = gram_f64.len();
    // GSO in f64: mu and B.
    let mut mu = vec![vec![0.0f64; n]; n];
    let mut b = vec![0.0f64; n];
    for i in 0..n {
        for j in 0..i {
            let mut acc = gram_f64[i][j];
            for m in 0..j {
                acc -= mu[i][m] * mu[j][m] * b[m];
            }
            mu[i][j] = acc / b[j];
        }
        let mut acc = gram_f64[i][i];
        for m in 0..i {
            acc -= mu[i][m] * mu[i][m] * b[m];
        }
        if acc <= 0.0 {
            return Err(LatticeError::Singular);
        }
        b[i] = acc;
    }

    struct Ctx<'a> {
        n: usize,
        mu: &'a [Vec<f64>],
        b: &'a [f64],
        x: Vec<i64>,
        radius_sq: f64,
        visits: u64,
        cap: Option<u64>,
    }
    fn descend(ctx: &mut Ctx, level: isize, used: f64, visit: &mut dyn FnMut(&[i64], f64) -> f64) -> Result<(), LatticeError> {
        if level < 0 {
            if ctx.x.iter().any(|&v| v != 0) {
                if let Some(cap) = ctx.cap {
                    ctx.visits += 1;
                    if ctx.visits > cap {
                        return Err(LatticeError::CountCap);
                    }
                }
                let r = visit(&ctx.x, used);
                ctx.radius_sq = r;
            }
            return Ok(());
        }
        let i = level as usize;
        let center: f64 = -(i + 1..ctx.n).map(|j| ctx.mu[j][i] * ctx.x[j] as f64).sum::<f64>();
        let budget = ctx.radius_sq - used;
        if budget < 0.0 {
            return Ok(());
        }
        let half = (budget / ctx.b[i]).sqrt();
        let lo = (center - half - 1e-9).ceil() as i64;
        let hi = (center + half + 1e-9).floor() as i64;
        for v in lo..=hi {
            let d = v as f64 - center;
            let add = ctx.b[i] * d * d;
            if used + add > ctx.radius_sq + 1e-9 {
                continue;
            }
            ctx.x[i] = v;
            descend(ctx, level - 1, used + add, visit)?;
        }
        ctx.x[i] = 0;
        Ok(())
    }

    let mut ctx = Ctx { n, mu: &mu, b: &b, x: vec![0; n], radius_sq, visits: 0, cap };
    descend(&mut ctx, n as isize - 1, 0.0, visit)
}

/// Outcome of an exact reduction: reduced integer Gram with its scale
/// (true Gram = ints / scale), an f64 image for enumeration, and the
/// transform back to original basis coordinates.
struct Reduced {
    gram_int: Vec<Vec<BigInt>>,
    scale: BigInt,
    gram_f64: Vec<Vec<f64>>,
    u: Vec<Vec<BigInt>>,
}

fn reduce_exact(gram: Mat<Rat>) -> Result<Reduced, LatticeError> {
    let (ints, scale) = integerize(&gram);
    let mut st = IntLll::new(ints);
    st.reduce()?;
    let n = st.n;
    let gram_f64: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| big_ratio_to_f64(&st.gram[i][j], &scale)).collect())
        .collect();
    Ok(Reduced { gram_int: st.gram, scale, gram_f64, u: st.u })
}

/// Signed ratio of two big integers as f64, robust far outside f64 range.
fn big_ratio_to_f64(a: &BigInt, b: &BigInt) -> f64 {
    use num::ToPrimitive;
    if a.is_zero() {
        return 0.0;
    }
    if let (Some(af), Some(bf)) = (a.to_f64(), b.to_f64()) {
        if af.is_finite() && bf.is_finite() && bf != 0.0 {
            let r = af / bf;
            if r.is_finite() {
                return r;
            }
        }
    }
    let sign = if (a.is_negative()) ^ (b.is_negative()) { -1.0 } else { 1.0 };
    sign * (crate::rat::rat_ln(&Rat::new(a.abs(), b.abs())).exp())
}

impl Reduced {
    /// Exact quadratic form value x^T G x of the true (unscaled) Gram.
    fn value(&self, x: &[i64]) -> Rat {
        let n = self.gram_int.len();
        let mut acc = BigInt::zero();
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            for j in 0..n {
                if x[j] == 0 {
                    continue;
                }
                acc += BigInt::from(x[i]) * BigInt::from(x[j]) * &self.gram_int[i][j];
            }
        }
        Rat::new(acc, self.scale.clone())
    }
}

/// Shortest nonzero vector of the lattice: (vector, length).
///
/// LLL preprocessing with delta = 0.99, then sphere enumeration seeded by the
/// first reduced vector; the returned length never exceeds that seed.
pub fn shortest_vector(basis: &LatticeBasis) -> Result<(Vec<f64>, f64), LatticeError> {
    if basis.dim > SVP_DIM_CAP {
        return Err(LatticeError::DimensionCap(basis.dim, SVP_DIM_CAP));
    }
    let gram = basis.exact_gram(None)?;
    let red = reduce_exact(gram)?;
    let n = basis.dim;
    let seed = red.gram_f64[0][0];
    let mut best_x: Vec<i64> = vec![0; n];
    best_x[0] = 1;
    let mut best = seed;
    enumerate_gram(&red.gram_f64, seed * (1.0 + 1e-9), None, &mut |x, q| {
        if q < best {
            best = q;
            best_x = x.to_vec();
        }
        best * (1.0 + 1e-9)
    })?;
    // Exact value of the winning class, then back to ambient coordinates.
    let exact = red.value(&best_x);
    let coeffs: Vec<BigInt> = (0..n)
        .map(|j| {
            let mut acc = BigInt::zero();
            for (i, &xi) in best_x.iter().enumerate() {
                acc += &red.u[i][j] * BigInt::from(xi);
            }
            acc
        })
        .collect();
    let vector: Vec<f64> = (0..n)
        .map(|r| {
            coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| big_to_f64(c) * basis.cols[j][r])
                .sum()
        })
        .collect();
    Ok((vector, rat_to_f64(&exact).sqrt()))
}

fn big_to_f64(b: &BigInt) -> f64 {
    use num::ToPrimitive;
    b.to_f64().unwrap_or(f64::NAN)
}

/// Number of nonzero lattice points with norm <= r. Always even.
pub fn count_points_in_ball(basis: &LatticeBasis, r: f64) -> Result<u64, LatticeError> {
    if basis.dim > COUNT_DIM_CAP {
        return Err(LatticeError::DimensionCap(basis.dim, COUNT_DIM_CAP));
    }
    if r <= 0.0 {
        return Ok(0);
    }
    let gram = basis.exact_gram(None)?;
    let red = reduce_exact(gram)?;
    let mut count = 0u64;
    let rsq = r * r * (1.0 + 1e-12) + 1e-12;
    enumerate_gram(&red.gram_f64, rsq, Some(COUNT_CAP), &mut |_, _| {
        count += 1;
        rsq
    })?;
    debug_assert!(count % 2 == 0);
    Ok(count)
}

/// Shortest length and ball counts in one reduction+enumeration pass:
/// (lambda_1, counts aligned with `radii`).
pub fn lattice_stats(basis: &LatticeBasis, radii: &[f64]) -> Result<(f64, Vec<u64>), LatticeError> {
    if basis.dim > COUNT_DIM_CAP && !radii.is_empty() {
        return Err(LatticeError::DimensionCap(basis.dim, COUNT_DIM_CAP));
    }
    if basis.dim > SVP_DIM_CAP {
        return Err(LatticeError::DimensionCap(basis.dim, SVP_DIM_CAP));
    }
    // 48 significant bits: entry distortion ~2^-48 relative, far below the
    // sampling noise of any statistic while keeping reduction arithmetic lean.
    let gram = basis.exact_gram(Some(48))?;
    let red = reduce_exact(gram)?;
    let seed = red.gram_f64[0][0];
    let rmax = radii.iter().fold(0.0f64, |m, &r| m.max(r));
    let radius_sq = (rmax * rmax).max(seed) * (1.0 + 1e-12) + 1e-12;
    let mut best = seed;
    let mut counts = vec![0u64; radii.len()];
    let radii_sq: Vec<f64> = radii.iter().map(|&r| r * r * (1.0 + 1e-12) + 1e-12).collect();
    enumerate_gram(&red.gram_f64, radius_sq, Some(COUNT_CAP), &mut |_x, q| {
        if q < best {
            best = q;
        }
        for (c, &rs) in counts.iter_mut().zip(&radii_sq) {
            if q <= rs {
                *c += 1;
            }
        }
        radius_sq
    })?;
    Ok((best.sqrt(), counts))
}

// ---------------------------------------------------------------------------
// sl_n basis, adjoint matrices, and weight spaces of wedge powers
// ---------------------------------------------------------------------------

/// Basis element of sl_n: an off-diagonal unit E_ij or a diagonal difference
/// diag(.., 1, -1, ..) at position i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlBasisElement {
    OffDiag { i: usize, j: usize },
    DiagDiff { i: usize },
}

/// The rational basis of sl_n: all E_ij (i != j, row-major) followed by the
/// n-1 diagonal differences.
pub fn sl_basis(n: usize) -> Vec<SlBasisElement> {
    let mut out = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(SlBasisElement::OffDiag { i, j });
            }
        }
    }
    for i in 0..n - 1 {
        out.push(SlBasisElement::DiagDiff { i });
    }
    out
}

pub fn sl_basis_matrix(n: usize, e: &SlBasisElement) -> Mat<Rat> {
    match *e {
        SlBasisElement::OffDiag { i, j } => {
            Mat::from_fn(n, n, |r, c| if r == i && c == j { rat(1) } else { Rat::zero() })
        }
        SlBasisElement::DiagDiff { i } => Mat::from_fn(n, n, |r, c| {
            if r != c {
                Rat::zero()
            } else if r == i {
                rat(1)
            } else if r == i + 1 {
                rat(-1)
            } else {
                Rat::zero()
            }
        }),
    }
}

/// Weight of a basis element under conjugation by exp(diag t): the integer
/// vector w with Ad(exp t) b = exp(w . t) b. Sum of coordinates is zero.
pub fn basis_weight(n: usize, e: &SlBasisElement) -> Vec<i64> {
    let mut w = vec![0i64; n];
    if let SlBasisElement::OffDiag { i, j } = *e {
        w[i] = 1;
        w[j] = -1;
    }
    w
}

/// Coordinates of a trace-zero matrix in the sl basis: off-diagonal entries
/// directly, the diagonal through partial sums.
pub fn sl_coords(m: &Mat<Rat>) -> Vec<Rat> {
    let n = m.rows;
    let mut out = Vec::with_capacity(n * n - 1);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(m.at(i, j).clone());
            }
        }
    }
    let mut acc = Rat::zero();
    for i in 0..n - 1 {
        acc += m.at(i, i);
        out.push(acc.clone());
    }
    out
}

/// The adjoint action of g on sl_n as a (n^2-1) x (n^2-1) rational matrix in
/// the sl basis: column b -> coordinates of g b g^-1.
pub fn ad_matrix(g: &Mat<Rat>) -> Result<Mat<Rat>, LatticeError> {
    let n = g.rows;
    let g_inv = rat_inverse(g).ok_or(LatticeError::Singular)?;
    let basis = sl_basis(n);
    let d = basis.len();
    let cols: Vec<Vec<Rat>> = basis
        .iter()
        .map(|e| {
            let b = sl_basis_matrix(n, e);
            sl_coords(&g.matmul(&b).matmul(&g_inv))
        })
        .collect();
    Ok(Mat::from_fn(d, d, |i, j| cols[j][i].clone()))
}

/// Gram matrix of the sl basis under <X,Y> = Tr(X^T Y).
pub fn sl_gram(n: usize) -> Mat<Rat> {
    let basis = sl_basis(n);
    let d = basis.len();
    Mat::from_fn(d, d, |i, j| {
        let a = sl_basis_matrix(n, &basis[i]);
        let b = sl_basis_matrix(n, &basis[j]);
        let mut acc = Rat::zero();
        for r in 0..n {
            for c in 0..n {
                acc += a.at(r, c) * b.at(r, c);
            }
        }
        acc
    })
}

/// A weight space of the l-th wedge power of sl_n: the span of the wedge
/// monomials whose summed weight is chi (canonical sum-zero representative).
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpace {
    pub n: usize,
    pub grade: usize,
    pub chi: Vec<i64>,
    /// Each member is a sorted list of indices into the sl basis.
    pub members: Vec<Vec<usize>>,
}

impl WeightSpace {
    pub fn dim(&self) -> usize {
        self.members.len()
    }

    /// chi(t) for a point of Lie(A).
    pub fn chi_value(&self, t: &[f64]) -> f64 {
        self.chi.iter().zip(t).map(|(&c, &x)| c as f64 * x).sum()
    }
}

/// Partition of the wedge basis of grade l by total weight, sorted by chi.
pub fn weight_spaces(n: usize, l: usize) -> Result<Vec<WeightSpace>, LatticeError> {
    if n > 4 {
        return Err(LatticeError::DimensionCap(n, 4));
    }
    let d = n * n - 1;
    let dim = binomial(d, l);
    if dim > 100_000 {
        return Err(LatticeError::WedgeCap(d, l));
    }
    let basis = sl_basis(n);
    let weights: Vec<Vec<i64>> = basis.iter().map(|e| basis_weight(n, e)).collect();
    let mut groups: std::collections::BTreeMap<Vec<i64>, Vec<Vec<usize>>> =
        std::collections::BTreeMap::new();
    for mask in crate::rat::subsets_of_size(d, l) {
        let members: Vec<usize> = (0..d).filter(|&i| mask >> i & 1 == 1).collect();
        let mut chi = vec![0i64; n];
        for &m in &members {
            for (c, w) in chi.iter_mut().zip(&weights[m]) {
                *c += w;
            }
        }
        groups.entry(chi).or_default().push(members);
    }
    Ok(groups
        .into_iter()
        .map(|(chi, members)| WeightSpace { n, grade: l, chi, members })
        .collect())
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc = 1usize;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// min over nonzero integer vectors v in the weight space of the norm of the
/// wedge image of v under Ad(g); exact squared value.
///
/// Wedge inner products reduce to l x l determinants of pairwise sl inner
/// products of the image vectors, so nothing of size C(n^2-1, l) is built.
pub fn weight_min_norm_sq(g: &Mat<Rat>, w: &WeightSpace) -> Result<Rat, LatticeError> {
    let r = w.dim();
    if r > SVP_DIM_CAP {
        return Err(LatticeError::RankCap(r));
    }
    let gram = weight_gram(g, w)?;
    if r == 1 {
        return Ok(gram.at(0, 0).clone());
    }
    let red = reduce_exact(gram)?;
    let seed = red.gram_f64[0][0];
    let mut best_x: Vec<i64> = vec![0; r];
    best_x[0] = 1;
    let mut best = seed;
    enumerate_gram(&red.gram_f64, seed * (1.0 + 1e-9), None, &mut |x, q| {
        if q < best {
            best = q;
            best_x = x.to_vec();
        }
        best * (1.0 + 1e-9)
    })?;
    Ok(red.value(&best_x))
}

/// Lower-bound variant: minimum over the basis monomials only (no integer
/// combinations). Cheap, and an upper bound on the true minimum norm.
pub fn weight_min_norm_sq_basis_only(g: &Mat<Rat>, w: &WeightSpace) -> Result<Rat, LatticeError> {
    let gram = weight_gram(g, w)?;
    let mut best: Option<Rat> = None;
    for i in 0..w.dim() {
        let v = gram.at(i, i).clone();
        best = Some(match best {
            None => v,
            Some(cur) => cur.min(v),
        });
    }
    Ok(best.expect("weight space is nonempty"))
}

/// Gram matrix of the wedge images of the weight-space monomials.
fn weight_gram(g: &Mat<Rat>, w: &WeightSpace) -> Result<Mat<Rat>, LatticeError> {
    let ad = ad_matrix(g)?;
    let metric = sl_gram(w.n);
    // Pulled-back sl metric: P[i][j] = <Ad(g) b_i, Ad(g) b_j>.
    let p = ad.transpose().matmul(&metric).matmul(&ad);
    let r = w.dim();
    let gram = Mat::from_fn(r, r, |a, b| {
        let sa = &w.members[a];
        let sb = &w.members[b];
        let l = sa.len();
        let small = Mat::from_fn(l, l, |x, y| p.at(sa[x], sb[y]).clone());
        crate::rat::rat_det(&small)
    });
    Ok(gram)
}

pub fn weight_min_norm(g: &Mat<Rat>, w: &WeightSpace) -> Result<f64, LatticeError> {
    Ok(rat_to_f64(&weight_min_norm_sq(g, w)?).sqrt())
}

/// ln of the minimum norm; robust to values far outside f64 range.
pub fn weight_min_log_norm(g: &Mat<Rat>, w: &WeightSpace, basis_only: bool) -> Result<f64, LatticeError> {
    let sq = if basis_only {
        weight_min_norm_sq_basis_only(g, w)?
    } else {
        weight_min_norm_sq(g, w)?
    };
    Ok(0.5 * rat_ln(&sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_frac;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn id_basis(n: usize) -> LatticeBasis {
        LatticeBasis::new((0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect())
    }

    #[test]
    fn shortest_vector_simple() {
        let (v, len) = shortest_vector(&id_basis(3)).unwrap();
        assert!((len - 1.0).abs() < 1e-12);
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-9);

        let skew = LatticeBasis::new(vec![vec![2.0, 0.0], vec![0.0, 0.5]]);
        let (_, len) = shortest_vector(&skew).unwrap();
        assert!((len - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shortest_vector_matches_brute_force() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..50 {
            let basis = LatticeBasis::new(
                (0..3).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
            );
            if basis.det().abs() < 0.05 {
                continue;
            }
            let (_, len) = shortest_vector(&basis).unwrap();
            let mut best = f64::INFINITY;
            for a in -8i64..=8 {
                for b in -8i64..=8 {
                    for c in -8i64..=8 {
                        if a == 0 && b == 0 && c == 0 {
                            continue;
                        }
                        let mut sq = 0.0;
                        for r in 0..3 {
                            let x = a as f64 * basis.cols[0][r]
                                + b as f64 * basis.cols[1][r]
                                + c as f64 * basis.cols[2][r];
                            sq += x * x;
                        }
                        best = best.min(sq);
                    }
                }
            }
            assert!((len - best.sqrt()).abs() < 1e-7, "len={len} brute={}", best.sqrt());
        }
    }

    #[test]
    fn shortest_vector_huge_skew() {
        // Condition ~1e12: an exactly-known short combination hides between
        // enormous basis vectors. b1 = (1e6, 1e-6), b2 = (1e6 + 3e-6, 3e-6):
        // b2 - b1 = (3e-6, 2e-6).
        let b = LatticeBasis::new(vec![vec![1e6, 1e-6], vec![1e6 + 3e-6, 3e-6]]);
        let (_, len) = shortest_vector(&b).unwrap();
        // Expected from the same f64 entries the basis actually holds.
        let dx = b.cols[1][0] - b.cols[0][0];
        let dy = b.cols[1][1] - b.cols[0][1];
        let expect = (dx * dx + dy * dy).sqrt();
        assert!((len - expect).abs() < 1e-6 * expect, "{len} vs {expect}");
    }

    #[test]
    fn count_points_examples() {
        let z2 = id_basis(2);
        assert_eq!(count_points_in_ball(&z2, 1.5).unwrap(), 8);
        assert_eq!(count_points_in_ball(&z2, 0.5).unwrap(), 0);
        assert_eq!(count_points_in_ball(&z2, 1.0).unwrap(), 4);

        // Monotone and even.
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..10 {
            let basis = LatticeBasis::new(
                (0..2).map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect(),
            );
            if basis.det().abs() < 0.1 {
                continue;
            }
            let mut prev = 0u64;
            for r in [0.3, 0.7, 1.1, 1.9] {
                let c = count_points_in_ball(&basis, r).unwrap();
                assert!(c >= prev);
                assert_eq!(c % 2, 0);
                prev = c;
            }
        }
    }

    #[test]
    fn lattice_stats_consistent() {
        let z3 = id_basis(3);
        let (l1, counts) = lattice_stats(&z3, &[0.5, 1.0, 1.5]).unwrap();
        assert!((l1 - 1.0).abs() < 1e-9);
        assert_eq!(counts, vec![0, 6, 6 + 12]); // 6 units, 12 sqrt(2) vectors
    }

    #[test]
    fn dimension_caps() {
        assert!(matches!(
            count_points_in_ball(&id_basis(7), 1.0),
            Err(LatticeError::DimensionCap(7, 6))
        ));
    }

    #[test]
    fn weight_spaces_sl2() {
        let ws = weight_spaces(2, 1).unwrap();
        assert_eq!(ws.len(), 3);
        let dims: Vec<usize> = ws.iter().map(WeightSpace::dim).collect();
        assert_eq!(dims, vec![1, 1, 1]);
        let chis: Vec<Vec<i64>> = ws.iter().map(|w| w.chi.clone()).collect();
        assert!(chis.contains(&vec![1, -1]));
        assert!(chis.contains(&vec![-1, 1]));
        assert!(chis.contains(&vec![0, 0]));
    }

    #[test]
    fn weight_spaces_sl3_roots() {
        let ws = weight_spaces(3, 1).unwrap();
        // 6 one-dimensional root spaces plus a 2-dimensional zero space.
        assert_eq!(ws.len(), 7);
        let zero: Vec<_> = ws.iter().filter(|w| w.chi.iter().all(|&c| c == 0)).collect();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].dim(), 2);
        for w in &ws {
            assert_eq!(w.chi.iter().sum::<i64>(), 0);
        }
    }

    #[test]
    fn weight_space_dims_partition_wedge() {
        for n in [2usize, 3] {
            let d = n * n - 1;
            for l in 1..=d.min(4) {
                let ws = weight_spaces(n, l).unwrap();
                let total: usize = ws.iter().map(WeightSpace::dim).sum();
                assert_eq!(total, binomial(d, l), "n={n} l={l}");
            }
        }
    }

    #[test]
    fn weight_min_norm_identity_examples() {
        let g: Mat<Rat> = Mat::identity(2);
        let ws = weight_spaces(2, 1).unwrap();
        for w in &ws {
            let m = weight_min_norm_sq(&g, w).unwrap();
            if w.chi == vec![0, 0] {
                assert_eq!(m, rat(2)); // diag(1,-1)
            } else {
                assert_eq!(m, rat(1)); // E_12 or E_21
            }
        }

        // n=3 zero-weight space at grade 1: diag lattice, min norm sqrt(2).
        let g3: Mat<Rat> = Mat::identity(3);
        let ws3 = weight_spaces(3, 1).unwrap();
        let zero = ws3.iter().find(|w| w.chi.iter().all(|&c| c == 0)).unwrap();
        assert_eq!(weight_min_norm_sq(&g3, zero).unwrap(), rat(2));
    }

    #[test]
    fn weight_min_norm_unipotent_fixed_root() {
        // g = [[1,5],[0,1]]: Ad(g) fixes E_12, so its root space keeps min 1.
        let g = Mat::from_rows(vec![vec![rat(1), rat(5)], vec![rat(0), rat(1)]]);
        let ws = weight_spaces(2, 1).unwrap();
        let top = ws.iter().find(|w| w.chi == vec![1, -1]).unwrap();
        assert_eq!(weight_min_norm_sq(&g, top).unwrap(), rat(1));
        // The opposite root space is stretched: Ad(g) E_21 has norm^2 (u^2+1)^2.
        let bottom = ws.iter().find(|w| w.chi == vec![-1, 1]).unwrap();
        assert_eq!(weight_min_norm_sq(&g, bottom).unwrap(), rat(26 * 26));
    }

    #[test]
    fn zero_weight_min_no_smaller_under_unipotent() {
        // Zero-weight integer vectors are diagonal; unipotent conjugation
        // preserves the diagonal part, so norms cannot shrink under Ad(g).
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..5 {
            let n = 3usize;
            let mut g: Mat<Rat> = Mat::identity(n);
            for i in 0..n {
                for j in i + 1..n {
                    *g.at_mut(i, j) = rat_frac(rng.gen_range(-6..=6), 1);
                }
            }
            let ws = weight_spaces(n, 1).unwrap();
            let zero = ws.iter().find(|w| w.chi.iter().all(|&c| c == 0)).unwrap();
            let at_g = weight_min_norm_sq(&g, zero).unwrap();
            let at_id = weight_min_norm_sq(&Mat::identity(n), zero).unwrap();
            assert!(at_g >= at_id);
        }
    }

    #[test]
    fn basis_only_mode_upper_bounds() {
        let g = Mat::from_rows(vec![
            vec![rat(1), rat(3), rat(2)],
            vec![rat(0), rat(1), rat(4)],
            vec![rat(0), rat(0), rat(1)],
        ]);
        for l in 1..=2 {
            for w in weight_spaces(3, l).unwrap() {
                if w.dim() > SVP_DIM_CAP {
                    continue;
                }
                let full = weight_min_norm_sq(&g, &w).unwrap();
                let quick = weight_min_norm_sq_basis_only(&g, &w).unwrap();
                assert!(quick >= full);
            }
        }
    }

    #[test]
    fn ad_matrix_is_adjoint() {
        // Spot check: Ad(g) of E_12 under g=[[1,5],[0,1]] is E_12 itself;
        // Ad(g) of diag(1,-1) is diag(1,-1) - 10 E_12.
        let g = Mat::from_rows(vec![vec![rat(1), rat(5)], vec![rat(0), rat(1)]]);
        let ad = ad_matrix(&g).unwrap();
        let basis = sl_basis(2);
        let e12 = basis
            .iter()
            .position(|e| matches!(e, SlBasisElement::OffDiag { i: 0, j: 1 }))
            .unwrap();
        let h = basis.len() - 1;
        assert_eq!(*ad.at(e12, e12), rat(1));
        assert_eq!(*ad.at(e12, h), rat(-10));
        assert_eq!(*ad.at(h, h), rat(1));
    }
}
