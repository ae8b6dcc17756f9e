//! Exact rational scalars, polynomials in one parameter `k`, and small dense
//! matrices over any of the scalar rings used in the crate (`Rat`, `Poly`, `f64`).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Parses "p/q" or "p" with arbitrary-precision integers. Rejects zero denominators.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let (num_s, den_s) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num_s
        .parse()
        .map_err(|_| format!("bad numerator in {s:?}"))?;
    let den: BigInt = den_s
        .parse()
        .map_err(|_| format!("bad denominator in {s:?}"))?;
    if den.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Rat::new(num, den))
}

/// ln of a positive rational, robust to values far outside f64 range.
pub fn rat_ln(r: &Rat) -> f64 {
    assert!(r.is_positive(), "rat_ln needs a positive argument");
    big_ln(r.numer()) - big_ln(r.denom())
}

fn big_ln(x: &BigInt) -> f64 {
    let x = x.magnitude();
    let bits = x.bits();
    if bits <= 52 {
        return (x.to_f64().unwrap()).ln();
    }
    // Take the top 53 bits as the mantissa and add back the exponent.
    let shift = bits - 53;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + (shift as f64) * std::f64::consts::LN_2
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Magnitude overflow: fall back to the log representation.
        let s = if r.is_negative() { -1.0 } else { 1.0 };
        s * rat_ln(&r.abs()).exp()
    })
}

/// Exact rational from an f64 (every finite f64 is a dyadic rational).
pub fn rat_from_f64(x: f64) -> Rat {
    Rat::from_float(x).expect("finite float")
}

// ---------------------------------------------------------------------------
// Polynomials in the family parameter k, with exact rational coefficients.
// ---------------------------------------------------------------------------

#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    /// coeffs[d] is the coefficient of k^d; the last entry is nonzero.
    coeffs: Vec<Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Rat) -> Self {
        Poly::from_coeffs(vec![c])
    }

    pub fn one() -> Self {
        Poly::constant(rat(1))
    }

    pub fn monomial(deg: usize, c: Rat) -> Self {
        let mut coeffs = vec![Rat::zero(); deg + 1];
        coeffs[deg] = c;
        Poly::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map_or(false, Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, d: usize) -> Rat {
        self.coeffs.get(d).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(0)
    }

    pub fn leading_coeff(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_i64(&self, k: i64) -> Rat {
        self.eval(&rat(k))
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (d, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match d {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*k")?,
                _ => write!(f, "{c}*k^{d}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![Rat::zero(); n];
        for (d, c) in self.coeffs.iter().enumerate() {
            out[d] += c;
        }
        for (d, c) in rhs.coeffs.iter().enumerate() {
            out[d] += c;
        }
        Poly::from_coeffs(out)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::from_coeffs(out)
    }
}

macro_rules! forward_owned_ops {
    ($t:ty) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                &self + &rhs
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                &self - &rhs
            }
        }
        impl Mul for $t {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                &self * &rhs
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                -&self
            }
        }
    };
}
forward_owned_ops!(Poly);

impl Zero for Poly {
    fn zero() -> Self {
        Poly::zero()
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::one()
    }
}

// ---------------------------------------------------------------------------
// Small dense matrices, generic over the scalar ring.
// ---------------------------------------------------------------------------

/// Minimal ring bound for matrix/minor arithmetic.
pub trait Ring: Clone + Zero + One + PartialEq
where
    for<'a> &'a Self: Add<&'a Self, Output = Self>
        + Sub<&'a Self, Output = Self>
        + Mul<&'a Self, Output = Self>
        + Neg<Output = Self>,
{
}

impl Ring for Rat {}
impl Ring for Poly {}
impl Ring for f64 {}

#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Mat<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut T {
        &mut self.data[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self.at(i, j).clone()).collect()
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Mat<T> {
        Mat::from_fn(self.cols, self.rows, |i, j| self.at(j, i).clone())
    }
}

impl<T> Mat<T>
where
    T: Ring,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T> + Neg<Output = T>,
{
    pub fn identity(n: usize) -> Self {
        Mat::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn matmul(&self, rhs: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, rhs.rows);
        Mat::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = T::zero();
            for m in 0..self.cols {
                acc = &acc + &(self.at(i, m) * rhs.at(m, j));
            }
            acc
        })
    }

    pub fn add_mat(&self, rhs: &Mat<T>) -> Mat<T> {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        Mat::from_fn(self.rows, self.cols, |i, j| self.at(i, j) + rhs.at(i, j))
    }

    pub fn sub_mat(&self, rhs: &Mat<T>) -> Mat<T> {
        assert!(self.rows == rhs.rows && self.cols == rhs.cols);
        Mat::from_fn(self.rows, self.cols, |i, j| self.at(i, j) - rhs.at(i, j))
    }

    pub fn is_zero_mat(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Inverse of a unipotent upper-triangular matrix via the finite Neumann
    /// series (I + N)^-1 = I - N + N^2 - ...; exact in any ring.
    pub fn unipotent_inverse(&self) -> Mat<T> {
        let n = self.rows;
        assert_eq!(self.rows, self.cols);
        let id = Mat::identity(n);
        let nil = self.sub_mat(&id);
        let mut inv = Mat::identity(n);
        let mut pow = Mat::identity(n);
        let mut sign_neg = true;
        for _ in 1..n {
            pow = pow.matmul(&nil);
            inv = if sign_neg { inv.sub_mat(&pow) } else { inv.add_mat(&pow) };
            sign_neg = !sign_neg;
        }
        inv
    }
}

impl<T: fmt::Display + Clone> fmt::Debug for Mat<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// All l x l minors of the n x l column set, keyed by the row-subset bitmask.
///
/// DP over column count: det over rows T and the first j+1 columns expands
/// along the last column.
pub fn minors_all_row_subsets<T>(columns: &[Vec<T>]) -> Vec<(u64, T)>
where
    T: Ring,
    for<'a> &'a T: Add<&'a T, Output = T> + Sub<&'a T, Output = T> + Mul<&'a T, Output = T> + Neg<Output = T>,
{
    let l = columns.len();
    assert!(l > 0);
    let n = columns[0].len();
    assert!(n <= 63 && l <= n);

    let mut dp: Vec<Vec<(u64, T)>> = vec![vec![(0, T::one())]];
    for j in 0..l {
        let prev = &dp[j];
        let prev_map: std::collections::BTreeMap<u64, &T> =
            prev.iter().map(|(m, v)| (*m, v)).collect();
        let mut next: Vec<(u64, T)> = Vec::new();
        for mask in subsets_of_size(n, j + 1) {
            let mut acc = T::zero();
            // Laplace along the last column: rows of `mask` in ascending order.
            let mut pos = 0usize; // 1-based position of the row within the subset
            for i in 0..n {
                if mask >> i & 1 == 0 {
                    continue;
                }
                pos += 1;
                let sub = mask & !(1u64 << i);
                if let Some(prev_det) = prev_map.get(&sub) {
                    let term = *prev_det * &columns[j][i];
                    // sign (-1)^{(j+1) + pos}
                    acc = if (j + 1 + pos) % 2 == 0 { &acc + &term } else { &acc - &term };
                }
            }
            if !acc.is_zero() {
                next.push((mask, acc));
            }
        }
        dp.push(next);
    }
    dp.pop().unwrap()
}

/// Ascending bitmasks of all size-l subsets of {0..n-1}.
pub fn subsets_of_size(n: usize, l: usize) -> Vec<u64> {
    let mut out = Vec::new();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    if l == 0 {
        return vec![0];
    }
    if l > n {
        return out;
    }
    // Gosper's hack.
    let mut v: u64 = (1u64 << l) - 1;
    while v <= full {
        out.push(v);
        let c = v & v.wrapping_neg();
        let r = v + c;
        if c == 0 {
            break;
        }
        v = (((r ^ v) >> 2) / c) | r;
        if r > full {
            break;
        }
    }
    out.retain(|m| *m <= full && m.count_ones() as usize == l);
    out
}

// ---------------------------------------------------------------------------
// Rational linear algebra: determinant, inverse, RREF, null space.
// ---------------------------------------------------------------------------

pub fn rat_det(m: &Mat<Rat>) -> Rat {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a: Vec<Vec<Rat>> = (0..n).map(|i| m.row(i)).collect();
    let mut det = Rat::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else { return Rat::zero() };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pv = a[col][col].clone();
        det *= &pv;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &pv;
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    det
}

pub fn rat_inverse(m: &Mat<Rat>) -> Option<Mat<Rat>> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut row = m.row(i);
            for j in 0..n {
                row.push(if i == j { Rat::one() } else { Rat::zero() });
            }
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        let pv = a[col][col].clone();
        for c in 0..2 * n {
            a[col][c] = &a[col][c] / &pv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for c in 0..2 * n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    Some(Mat::from_fn(n, n, |i, j| a[i][n + j].clone()))
}

/// Reduced row echelon form in place; returns pivot column indices.
pub fn rat_rref(a: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let rows = a.len();
    if rows == 0 {
        return vec![];
    }
    let cols = a[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(p, r);
        let pv = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = &*x / &pv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &a[r][j];
                    a[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    pivots
}

/// Basis of the null space of the row-vector system (rows are equations).
pub fn rat_nullspace(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let mut a: Vec<Vec<Rat>> = rows.to_vec();
    let pivots = rat_rref(&mut a);
    let mut basis = Vec::new();
    let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
    for free in 0..ncols {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![Rat::zero(); ncols];
        v[free] = Rat::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Row-reduces the spanning set to a canonical basis (nonzero RREF rows).
pub fn rat_row_basis(vectors: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    if vectors.is_empty() {
        return vec![];
    }
    let mut a = vectors.to_vec();
    rat_rref(&mut a);
    a.retain(|row| row.iter().any(|x| !x.is_zero()));
    a
}

pub fn rat_rank(vectors: &[Vec<Rat>]) -> usize {
    rat_row_basis(vectors).len()
}

/// Scales a rational vector to a primitive integer vector (clears denominators,
/// divides by the gcd, and makes the first nonzero entry positive).
pub fn rat_primitive(v: &[Rat]) -> Vec<Rat> {
    use num::Integer;
    let mut denom_lcm = BigInt::one();
    for x in v {
        denom_lcm = denom_lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rat::from_integer(denom_lcm.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        return v.to_vec();
    }
    let mut out: Vec<Rat> = ints.iter().map(|x| Rat::from_integer(x / &g)).collect();
    if let Some(first) = out.iter().find(|x| !x.is_zero()) {
        if first.is_negative() {
            for x in out.iter_mut() {
                *x = -x.clone();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rejects_zero_denominator() {
        assert!(parse_rat("1/0").is_err());
        assert_eq!(parse_rat("-3/6").unwrap(), rat_frac(-1, 2));
        assert_eq!(parse_rat("7").unwrap(), rat(7));
    }

    #[test]
    fn poly_arithmetic_round_trip() {
        let p = Poly::from_coeffs(vec![rat(1), rat(2)]); // 1 + 2k
        let q = Poly::from_coeffs(vec![rat(-1), rat(0), rat(3)]); // -1 + 3k^2
        let prod = &p * &q;
        // (1+2k)(-1+3k^2) = -1 - 2k + 3k^2 + 6k^3
        assert_eq!(prod.coeff(0), rat(-1));
        assert_eq!(prod.coeff(1), rat(-2));
        assert_eq!(prod.coeff(2), rat(3));
        assert_eq!(prod.coeff(3), rat(6));
        assert_eq!(prod.eval_i64(2), rat(5 * 11));
    }

    #[test]
    fn unipotent_inverse_exact() {
        // [[1,k,k^2/2],[0,1,k],[0,0,1]] has inverse [[1,-k,k^2/2],[0,1,-k],[0,0,1]]
        let k = Poly::monomial(1, rat(1));
        let k2h = Poly::monomial(2, rat_frac(1, 2));
        let g = Mat::from_rows(vec![
            vec![Poly::one(), k.clone(), k2h.clone()],
            vec![Poly::zero(), Poly::one(), k.clone()],
            vec![Poly::zero(), Poly::zero(), Poly::one()],
        ]);
        let inv = g.unipotent_inverse();
        assert_eq!(inv.at(0, 1), &(-&k));
        assert_eq!(inv.at(0, 2), &k2h);
        let prod = g.matmul(&inv);
        assert_eq!(prod, Mat::identity(3));
    }

    #[test]
    fn minor_dp_matches_direct_det() {
        // 3x3 with columns {0,2}: minors over row pairs.
        let m = Mat::from_rows(vec![
            vec![rat(1), rat(2), rat(2)],
            vec![rat(0), rat(1), rat(2)],
            vec![rat(0), rat(0), rat(1)],
        ]);
        let cols = vec![m.column(1), m.column(2)];
        let minors = minors_all_row_subsets(&cols);
        let get = |mask: u64| {
            minors
                .iter()
                .find(|(mm, _)| *mm == mask)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(Rat::zero)
        };
        // rows {0,1}: det [[2,2],[1,2]] = 2
        assert_eq!(get(0b011), rat(2));
        // rows {0,2}: det [[2,2],[0,1]] = 2
        assert_eq!(get(0b101), rat(2));
        // rows {1,2}: det [[1,2],[0,1]] = 1
        assert_eq!(get(0b110), rat(1));
    }

    #[test]
    fn det_inverse_nullspace() {
        let m = Mat::from_rows(vec![
            vec![rat(2), rat(1)],
            vec![rat(1), rat(1)],
        ]);
        assert_eq!(rat_det(&m), rat(1));
        let inv = rat_inverse(&m).unwrap();
        assert_eq!(m.matmul(&inv), Mat::identity(2));

        let rows = vec![vec![rat(1), rat(1), rat(1)]];
        let ns = rat_nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            let s: Rat = v.iter().cloned().sum();
            assert!(s.is_zero());
        }
    }

    #[test]
    fn rat_ln_large_values() {
        let big = Rat::from_integer(BigInt::from(10).pow(200));
        let expected = 200.0 * 10f64.ln();
        assert!((rat_ln(&big) - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn subset_enumeration_counts() {
        assert_eq!(subsets_of_size(5, 2).len(), 10);
        assert_eq!(subsets_of_size(8, 4).len(), 70);
        assert_eq!(subsets_of_size(3, 3), vec![0b111]);
    }
}
