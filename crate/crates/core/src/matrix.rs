//! Dense integer matrices with Hermite and Smith normal forms.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row vectors. All rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| T::from_i64_exact(v)).collect()).collect())
    }

    pub fn from_cols(cols: Vec<Vec<T>>) -> Self {
        Self::from_rows(cols).transpose()
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = a.clone() * other[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + v;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(T::zero(), |acc, j| acc + self[(i, j)].clone() * v[j].clone())
            })
            .collect()
    }

    /// Sub-matrix on the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row(&mut self, dst: usize, src: usize, k: &T) {
        for j in 0..self.cols {
            let v = self[(src, j)].clone() * k.clone();
            self[(dst, j)] = self[(dst, j)].clone() + v;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col(&mut self, dst: usize, src: usize, k: &T) {
        for i in 0..self.rows {
            let v = self[(i, src)].clone() * k.clone();
            self[(i, dst)] = self[(i, dst)].clone() + v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            self[(i, j)] = -self[(i, j)].clone();
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            self[(i, j)] = -self[(i, j)].clone();
        }
    }

    /// Replaces columns (a, b) by (x a + y b, u a + v b).
    fn combine_cols(&mut self, a: usize, b: usize, x: &T, y: &T, u: &T, v: &T) {
        for i in 0..self.rows {
            let ca = self[(i, a)].clone();
            let cb = self[(i, b)].clone();
            self[(i, a)] = x.clone() * ca.clone() + y.clone() * cb.clone();
            self[(i, b)] = u.clone() * ca + v.clone() * cb;
        }
    }

    fn combine_rows(&mut self, a: usize, b: usize, x: &T, y: &T, u: &T, v: &T) {
        for j in 0..self.cols {
            let ra = self[(a, j)].clone();
            let rb = self[(b, j)].clone();
            self[(a, j)] = x.clone() * ra.clone() + y.clone() * rb.clone();
            self[(b, j)] = u.clone() * ra + v.clone() * rb;
        }
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return T::one();
        }
        let mut m = self.clone();
        let mut sign = T::one();
        let mut prev = T::one();
        for k in 0..n {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return T::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = m[(i, j)].clone() * m[(k, k)].clone() - m[(i, k)].clone() * m[(k, j)].clone();
                    m[(i, j)] = v / prev.clone();
                }
            }
            prev = m[(k, k)].clone();
        }
        sign * m[(n - 1, n - 1)].clone()
    }

    pub fn rank(&self) -> usize {
        column_hnf(self).rank
    }

    pub fn to_rational(&self) -> Vec<Vec<Ratio<T>>> {
        self.to_rows()
            .into_iter()
            .map(|r| r.into_iter().map(Ratio::from_integer).collect())
            .collect()
    }

    /// Exact inverse over the rationals, or `None` when singular.
    pub fn inverse_rational(&self) -> Option<Vec<Vec<Ratio<T>>>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.to_rational();
        let mut inv: Vec<Vec<Ratio<T>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Ratio::one() } else { Ratio::zero() })
                    .collect()
            })
            .collect();
        for c in 0..n {
            let p = (c..n).find(|&r| !a[r][c].is_zero())?;
            a.swap(p, c);
            inv.swap(p, c);
            let piv = a[c][c].clone();
            for j in 0..n {
                a[c][j] = a[c][j].clone() / piv.clone();
                inv[c][j] = inv[c][j].clone() / piv.clone();
            }
            for r in 0..n {
                if r != c && !a[r][c].is_zero() {
                    let f = a[r][c].clone();
                    for j in 0..n {
                        let t = a[c][j].clone() * f.clone();
                        a[r][j] = a[r][j].clone() - t;
                        let t = inv[c][j].clone() * f.clone();
                        inv[r][j] = inv[r][j].clone() - t;
                    }
                }
            }
        }
        Some(inv)
    }

    /// Exact inverse of a unimodular matrix.
    pub fn inverse_unimodular(&self) -> Option<Self> {
        let inv = self.inverse_rational()?;
        let mut out = Self::zeros(self.rows, self.cols);
        for (i, row) in inv.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                if !v.is_integer() {
                    return None;
                }
                out[(i, j)] = v.to_integer();
            }
        }
        Some(out)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:?}", self.data[i * self.cols + j])?;
            }
        }
        write!(f, "]")
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
        }
        write!(f, "]")
    }
}

/// Column Hermite form: `a * transform == h`, where the first `rank` columns
/// of `h` are in column echelon form and the rest are zero.
#[derive(Clone, Debug)]
pub struct ColumnHermite<T> {
    pub h: Matrix<T>,
    pub transform: Matrix<T>,
    pub rank: usize,
    /// Row index of the pivot of each of the first `rank` columns.
    pub pivots: Vec<usize>,
}

pub fn column_hnf<T: Scalar>(a: &Matrix<T>) -> ColumnHermite<T> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut h = a.clone();
    let mut u = Matrix::identity(n);
    let mut c = 0;
    let mut pivots = Vec::new();
    for i in 0..m {
        if c == n {
            break;
        }
        for j in c + 1..n {
            if h[(i, j)].is_zero() {
                continue;
            }
            let av = h[(i, c)].clone();
            let bv = h[(i, j)].clone();
            let e = av.extended_gcd(&bv);
            let (g, x, y) = (e.gcd, e.x, e.y);
            let na = -(bv / g.clone());
            let nb = av / g;
            h.combine_cols(c, j, &x, &y, &na, &nb);
            u.combine_cols(c, j, &x, &y, &na, &nb);
        }
        if h[(i, c)].is_zero() {
            continue;
        }
        if h[(i, c)].is_negative() {
            h.negate_col(c);
            u.negate_col(c);
        }
        let p = h[(i, c)].clone();
        for k in 0..c {
            let q = h[(i, k)].div_floor(&p);
            if !q.is_zero() {
                let nq = -q;
                h.add_col(k, c, &nq);
                u.add_col(k, c, &nq);
            }
        }
        pivots.push(i);
        c += 1;
    }
    ColumnHermite { h, transform: u, rank: c, pivots }
}

/// Basis (as rows) of the integer row span of `a`, in row Hermite form.
pub fn row_span_basis<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let ch = column_hnf(&a.transpose());
    let cols: Vec<usize> = (0..ch.rank).collect();
    let all: Vec<usize> = (0..ch.h.nrows()).collect();
    ch.h.select(&all, &cols).transpose()
}

/// Basis (as rows) of the integer kernel `{x : a x = 0}`; always saturated.
pub fn integer_kernel<T: Scalar>(a: &Matrix<T>) -> Matrix<T> {
    let ch = column_hnf(a);
    let n = a.ncols();
    let rows: Vec<Vec<T>> = (ch.rank..n).map(|j| ch.transform.col(j)).collect();
    if rows.is_empty() {
        Matrix::zeros(0, n)
    } else {
        Matrix::from_rows(rows)
    }
}

/// Smith normal form `left * a * right == diag`.
#[derive(Clone, Debug)]
pub struct Smith<T> {
    /// Nonzero diagonal entries, each dividing the next.
    pub invariant_factors: Vec<T>,
    pub left: Matrix<T>,
    pub right: Matrix<T>,
    pub rank: usize,
}

impl<T: Scalar> Smith<T> {
    /// Invariant factors different from one.
    pub fn nontrivial_factors(&self) -> Vec<T> {
        self.invariant_factors.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

pub fn smith<T: Scalar>(a: &Matrix<T>) -> Smith<T> {
    let (m, n) = (a.nrows(), a.ncols());
    let mut d = a.clone();
    let mut left = Matrix::identity(m);
    let mut right = Matrix::identity(n);
    let mut t = 0;
    while t < m.min(n) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !d[(i, j)].is_zero()
                    && best.map_or(true, |(bi, bj)| d[(i, j)].abs() < d[(bi, bj)].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        d.swap_rows(t, bi);
        left.swap_rows(t, bi);
        d.swap_cols(t, bj);
        right.swap_cols(t, bj);
        loop {
            let mut dirty = false;
            for i in t + 1..m {
                if d[(i, t)].is_zero() {
                    continue;
                }
                let (av, bv) = (d[(t, t)].clone(), d[(i, t)].clone());
                if bv.is_multiple_of(&av) {
                    let k = -(bv / av);
                    d.add_row(i, t, &k);
                    left.add_row(i, t, &k);
                    continue;
                }
                let e = av.extended_gcd(&bv);
                let (g, x, y) = (e.gcd, e.x, e.y);
                let na = -(bv / g.clone());
                let nb = av / g;
                d.combine_rows(t, i, &x, &y, &na, &nb);
                left.combine_rows(t, i, &x, &y, &na, &nb);
            }
            for j in t + 1..n {
                if d[(t, j)].is_zero() {
                    continue;
                }
                let (av, bv) = (d[(t, t)].clone(), d[(t, j)].clone());
                if bv.is_multiple_of(&av) {
                    let k = -(bv / av);
                    d.add_col(j, t, &k);
                    right.add_col(j, t, &k);
                    continue;
                }
                let e = av.extended_gcd(&bv);
                let (g, x, y) = (e.gcd, e.x, e.y);
                let na = -(bv / g.clone());
                let nb = av / g;
                d.combine_cols(t, j, &x, &y, &na, &nb);
                right.combine_cols(t, j, &x, &y, &na, &nb);
                dirty = true;
            }
            if dirty && (t + 1..m).any(|i| !d[(i, t)].is_zero()) {
                continue;
            }
            // divisibility of the remaining block
            let p = d[(t, t)].clone();
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d[(i, j)].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    let one = T::one();
                    d.add_row(t, i, &one);
                    left.add_row(t, i, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            left.negate_row(t);
        }
        t += 1;
    }
    let invariant_factors: Vec<T> = (0..t).map(|i| d[(i, i)].clone()).collect();
    Smith { rank: invariant_factors.len(), invariant_factors, left, right }
}

/// Solves `a x = b` over the rationals when `a` is invertible.
pub fn solve_rational<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<Vec<Ratio<T>>> {
    let inv = a.inverse_rational()?;
    Some(
        inv.iter()
            .map(|row| {
                row.iter()
                    .zip(b)
                    .fold(Ratio::zero(), |acc, (x, y)| acc + x.clone() * Ratio::from_integer(y.clone()))
            })
            .collect(),
    )
}

/// Inertia `(positive, negative, zero)` of a symmetric matrix via LDL^T.
pub fn inertia<T: Scalar>(a: &Matrix<T>) -> (usize, usize, usize) {
    assert!(a.is_symmetric(), "inertia of non-symmetric matrix");
    let n = a.nrows();
    let mut m = a.to_rational();
    let (mut pos, mut neg) = (0, 0);
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        // choose a pivot with nonzero diagonal; otherwise create one by congruence
        let piv = active.iter().copied().find(|&i| !m[i][i].is_zero());
        let p = match piv {
            Some(p) => p,
            None => {
                let pair = active.iter().copied().find_map(|i| {
                    active.iter().copied().find(|&j| j != i && !m[i][j].is_zero()).map(|j| (i, j))
                });
                match pair {
                    None => break,
                    Some((i, j)) => {
                        // e_i <- e_i + e_j
                        for r in 0..n {
                            let v = m[r][j].clone();
                            m[r][i] = m[r][i].clone() + v;
                        }
                        for c in 0..n {
                            let v = m[j][c].clone();
                            m[i][c] = m[i][c].clone() + v;
                        }
                        i
                    }
                }
            }
        };
        let d = m[p][p].clone();
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        active.retain(|&i| i != p);
        for &i in &active {
            let f = m[i][p].clone() / d.clone();
            if f.is_zero() {
                continue;
            }
            for &j in &active {
                let v = f.clone() * m[p][j].clone();
                m[i][j] = m[i][j].clone() - v;
            }
        }
        for &i in &active {
            m[i][p] = Ratio::zero();
            m[p][i] = Ratio::zero();
        }
    }
    (pos, neg, n - pos - neg)
}
