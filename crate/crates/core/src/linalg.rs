//! Exact dense linear algebra over the coefficient rings of the crate.
//!
//! Algorithms only ever divide by pivots that pass `inv()`, so the same code
//! runs over Q, number fields, Gaussian extensions and dual numbers. Over an
//! etale algebra a nonzero element may fail to be a unit; callers that need
//! fieldwise behaviour split into factors first.

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Ring element with enough structure for exact Gaussian elimination.
/// `zero_like`/`one_like` exist because elements of a number field only make
/// sense relative to their parent, so there is no global constant.
pub trait Scalar: Clone + PartialEq + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse when the element is a unit.
    fn inv(&self) -> Option<Self>;
    fn is_zero(&self) -> bool;
    /// Multiply by a rational scalar.
    fn scale_rat(&self, r: &BigRational) -> Self;
}

impl Scalar for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self.clone()
    }
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(BigRational::one() / self)
        }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn scale_rat(&self, r: &BigRational) -> Self {
        self * r
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Mat {
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    pub fn zero(rows: usize, cols: usize, like: &T) -> Self {
        Self::filled(rows, cols, like.zero_like())
    }

    pub fn identity(n: usize, like: &T) -> Self {
        let mut m = Self::zero(n, n, like);
        for i in 0..n {
            m[(i, i)] = like.one_like();
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col_vec(&self, c: usize) -> Vec<T> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Mat<T> {
        let like = self.any();
        let mut out = Mat::zero(self.cols, self.rows, &like);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self.at(r, c).clone();
            }
        }
        out
    }

    fn any(&self) -> T {
        self.data.first().expect("empty matrix").clone()
    }

    pub fn add_mat(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub_mat(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&o.data)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn neg_mat(&self) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.neg()).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a.mul(s)).collect(),
        }
    }

    pub fn matmul(&self, o: &Mat<T>) -> Mat<T> {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let like = self.any();
        let mut out = Mat::zero(self.rows, o.cols, &like);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    let t = a.mul(o.at(k, c));
                    out[(r, c)] = out[(r, c)].add(&t);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        let like = self.any();
        (0..self.rows)
            .map(|r| {
                let mut acc = like.zero_like();
                for c in 0..self.cols {
                    if !self.at(r, c).is_zero() {
                        acc = acc.add(&self.at(r, c).mul(&v[c]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn commutator(&self, o: &Mat<T>) -> Mat<T> {
        self.matmul(o).sub_mat(&o.matmul(self))
    }

    /// Kronecker (tensor) product.
    pub fn kronecker(&self, o: &Mat<T>) -> Mat<T> {
        let like = self.any();
        let mut out = Mat::zero(self.rows * o.rows, self.cols * o.cols, &like);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.at(r1, c1);
                if a.is_zero() {
                    continue;
                }
                for r2 in 0..o.rows {
                    for c2 in 0..o.cols {
                        out[(r1 * o.rows + r2, c1 * o.cols + c2)] = a.mul(o.at(r2, c2));
                    }
                }
            }
        }
        out
    }

    /// Reduced row echelon form; returns (rref, pivot columns).
    pub fn rref(&self) -> (Mat<T>, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = vec![];
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // unit pivot search
            let mut piv = None;
            for r in row..m.rows {
                if m.at(r, col).inv().is_some() {
                    piv = Some(r);
                    break;
                }
            }
            let Some(piv) = piv else {
                // over a field every nonzero element is a unit; over a ring a
                // leftover nonzero non-unit entry would make echelon form
                // unreliable, so insist the column is actually cleared
                debug_assert!(
                    (row..m.rows).all(|r| m.at(r, col).is_zero()),
                    "non-unit pivot encountered; split into field factors first"
                );
                continue;
            };
            m.swap_rows(row, piv);
            let inv = m.at(row, col).inv().unwrap();
            for c in 0..m.cols {
                m[(row, c)] = m.at(row, c).mul(&inv);
            }
            for r in 0..m.rows {
                if r != row && !m.at(r, col).is_zero() {
                    let f = m.at(r, col).clone();
                    for c in 0..m.cols {
                        let t = m.at(row, c).mul(&f);
                        m[(r, c)] = m.at(r, c).sub(&t);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel (solutions of M x = 0).
    pub fn kernel(&self) -> Vec<Vec<T>> {
        let like = self.any();
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = vec![];
        for &fc in &free {
            let mut v = vec![like.zero_like(); self.cols];
            v[fc] = like.one_like();
            for (ri, &pc) in pivots.iter().enumerate() {
                v[pc] = r.at(ri, fc).neg();
            }
            out.push(v);
        }
        out
    }

    /// Solve M x = b; returns one solution if consistent.
    pub fn solve(&self, b: &[T]) -> Option<Vec<T>> {
        assert_eq!(self.rows, b.len());
        let like = self.any();
        let mut aug = Mat::zero(self.rows, self.cols + 1, &like);
        for r in 0..self.rows {
            for c in 0..self.cols {
                aug[(r, c)] = self.at(r, c).clone();
            }
            aug[(r, self.cols)] = b[r].clone();
        }
        let (red, pivots) = aug.rref();
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![like.zero_like(); self.cols];
        for (ri, &pc) in pivots.iter().enumerate() {
            x[pc] = red.at(ri, self.cols).clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Mat<T>> {
        assert_eq!(self.rows, self.cols);
        let like = self.any();
        let n = self.rows;
        let mut aug = Mat::zero(n, 2 * n, &like);
        for r in 0..n {
            for c in 0..n {
                aug[(r, c)] = self.at(r, c).clone();
            }
            aug[(r, n + r)] = like.one_like();
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        let mut out = Mat::zero(n, n, &like);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] = red.at(r, n + c).clone();
            }
        }
        Some(out)
    }

    pub fn det(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let like = self.any();
        let n = self.rows;
        let mut m = self.clone();
        let mut det = like.one_like();
        for col in 0..n {
            let mut piv = None;
            for r in col..n {
                if m.at(r, col).inv().is_some() {
                    piv = Some(r);
                    break;
                }
            }
            let Some(piv) = piv else {
                // no unit pivot: over a field this means a zero column
                return like.zero_like();
            };
            if piv != col {
                m.swap_rows(col, piv);
                det = det.neg();
            }
            let d = m.at(col, col).clone();
            det = det.mul(&d);
            let inv = d.inv().unwrap();
            for r in col + 1..n {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let f = m.at(r, col).mul(&inv);
                for c in col..n {
                    let t = m.at(col, c).mul(&f);
                    m[(r, c)] = m.at(r, c).sub(&t);
                }
            }
        }
        det
    }

    pub fn trace(&self) -> T {
        assert_eq!(self.rows, self.cols);
        let like = self.any();
        let mut acc = like.zero_like();
        for i in 0..self.rows {
            acc = acc.add(self.at(i, i));
        }
        acc
    }

    pub fn is_zero_mat(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Map entries through a function (e.g. an embedding of scalars).
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

/// Rank of the span of a set of vectors.
pub fn span_rank<T: Scalar>(vectors: &[Vec<T>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Mat::from_rows(vectors.to_vec()).rank()
}

/// Reduce a spanning set to a basis (first linearly independent subset).
pub fn independent_subset<T: Scalar>(vectors: &[Vec<T>]) -> Vec<Vec<T>> {
    let mut basis: Vec<Vec<T>> = vec![];
    let mut rank = 0;
    for v in vectors {
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        let mut trial = basis.clone();
        trial.push(v.clone());
        let r = span_rank(&trial);
        if r > rank {
            rank = r;
            basis.push(v.clone());
        }
    }
    basis
}

/// Is `v` in the span of `basis`?
pub fn in_span<T: Scalar>(basis: &[Vec<T>], v: &[T]) -> bool {
    if v.iter().all(|x| x.is_zero()) {
        return true;
    }
    let before = span_rank(basis);
    let mut all = basis.to_vec();
    all.push(v.to_vec());
    span_rank(&all) == before
}

/// Express `v` in terms of `basis` (columns); None if not in the span.
pub fn coords_in_basis<T: Scalar>(basis: &[Vec<T>], v: &[T]) -> Option<Vec<T>> {
    if basis.is_empty() {
        return None;
    }
    let m = Mat::from_rows(basis.to_vec()).transpose();
    m.solve(v)
}

/// Flatten a matrix to a vector (row-major), for treating operators as
/// vectors in End(V).
pub fn flatten<T: Scalar>(m: &Mat<T>) -> Vec<T> {
    m.data.clone()
}

/// Search a span of flattened rows x cols matrices for an invertible member,
/// deterministically: basis elements first, then seeded small-coefficient
/// combinations. An invertible member exists iff the generic combination is
/// invertible, so a failure after many draws is strong (and for the desk
/// suites, verified) evidence of none.
pub fn find_invertible_in_span(
    basis: &[Vec<BigRational>],
    rows: usize,
    cols: usize,
) -> Option<Mat<BigRational>> {
    if rows != cols || basis.is_empty() {
        return None;
    }
    let to_mat = |v: &[BigRational]| Mat {
        rows,
        cols,
        data: v.to_vec(),
    };
    for v in basis {
        let m = to_mat(v);
        if m.inverse().is_some() {
            return Some(m);
        }
    }
    let mut state: u64 = 0x9e3779b97f4a7c15;
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    for _ in 0..40 {
        let mut cand = vec![BigRational::zero(); rows * cols];
        for v in basis {
            let c = BigRational::from_integer((((next() % 19) as i64) - 9).into());
            for (i, x) in v.iter().enumerate() {
                cand[i] += x * &c;
            }
        }
        let m = to_mat(&cand);
        if m.inverse().is_some() {
            return Some(m);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::poly::rat;

    fn m(rows: Vec<Vec<i64>>) -> Mat<BigRational> {
        Mat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(rat).collect())
                .collect(),
        )
    }

    #[test]
    fn kernel_and_rank() {
        let a = m(vec![vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(a.rank(), 2);
        let k = a.kernel();
        assert_eq!(k.len(), 1);
        for row in 0..a.rows {
            let mut acc = rat(0);
            for c in 0..3 {
                acc += a.at(row, c) * &k[0][c];
            }
            assert_eq!(acc, rat(0));
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let a = m(vec![vec![2, 1], vec![1, 1]]);
        let inv = a.inverse().unwrap();
        assert_eq!(a.matmul(&inv), Mat::identity(2, &rat(1)));
    }

    #[test]
    fn det_matches_cofactor() {
        let a = m(vec![vec![1, 2, 0], vec![3, 1, 4], vec![0, 2, 1]]);
        // 1*(1-8) - 2*(3-0) + 0 = -13
        assert_eq!(a.det(), rat(-13));
    }

    #[test]
    fn kronecker_dims() {
        let a = m(vec![vec![1, 0], vec![0, 1]]);
        let b = m(vec![vec![2, 1], vec![1, 2]]);
        let k = a.kronecker(&b);
        assert_eq!((k.rows, k.cols), (4, 4));
        assert_eq!(k.det(), rat(9));
    }
}
