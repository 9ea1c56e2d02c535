//! Dense row-major matrices over real, complex or `f64` scalars, with
//! partial-pivoting LU.

use std::fmt::Debug;
use std::ops::{Index, IndexMut};

use super::complex::Cplx;
use super::real::Real;

/// Field operations needed by the dense algorithms.
pub trait Scalar: Clone + Debug + Send + Sync {
    /// Magnitude type used for pivot selection.
    type Mag: PartialOrd + Clone + Debug;

    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mag(&self) -> Self::Mag;
    /// True when `pivot` is negligible against `scale` at `bits` of mantissa.
    fn negligible(pivot: &Self::Mag, scale: &Self::Mag, bits: u32) -> bool;
    fn bits(&self) -> u32;
}

impl Scalar for Real {
    type Mag = Real;
    fn zero_like(&self) -> Self {
        Real::zero(self.prec())
    }
    fn one_like(&self) -> Self {
        Real::one(self.prec())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mag(&self) -> Real {
        self.abs()
    }
    fn negligible(pivot: &Real, scale: &Real, bits: u32) -> bool {
        pivot.is_zero() || *pivot <= scale * &Real::exp2i(-(bits as i32) + 8, scale.prec())
    }
    fn bits(&self) -> u32 {
        self.prec()
    }
}

impl Scalar for Cplx {
    type Mag = Real;
    fn zero_like(&self) -> Self {
        Cplx::zero(self.prec())
    }
    fn one_like(&self) -> Self {
        Cplx::one(self.prec())
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mag(&self) -> Real {
        self.abs()
    }
    fn negligible(pivot: &Real, scale: &Real, bits: u32) -> bool {
        <Real as Scalar>::negligible(pivot, scale, bits)
    }
    fn bits(&self) -> u32 {
        self.prec()
    }
}

impl Scalar for f64 {
    type Mag = f64;
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mag(&self) -> f64 {
        self.abs()
    }
    fn negligible(pivot: &f64, scale: &f64, bits: u32) -> bool {
        *pivot == 0.0 || *pivot <= scale * 2f64.powi(-(bits as i32) + 8)
    }
    fn bits(&self) -> u32 {
        53
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinearAlgebraError {
    #[error("matrix is numerically singular (pivot {pivot} negligible)")]
    SingularMatrix { pivot: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type DenseMatrix = Matrix<Real>;
pub type CMatrix = Matrix<Cplx>;

impl<T: Scalar> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        Self::from_fn(rows, cols, |_, _| v.clone())
    }

    /// Identity with scalars shaped like `like` (precision is taken from it).
    pub fn identity(n: usize, like: &T) -> Self {
        let (z, o) = (like.zero_like(), like.one_like());
        Self::from_fn(n, n, |i, j| if i == j { o.clone() } else { z.clone() })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "inner dimensions differ");
        Self::from_fn(self.rows, o.cols, |i, j| {
            let mut acc = self[(i, 0)].mul(&o[(0, j)]);
            for k in 1..self.cols {
                acc = acc.add(&self[(i, k)].mul(&o[(k, j)]));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = self[(i, 0)].mul(&v[0]);
                for k in 1..self.cols {
                    acc = acc.add(&self[(i, k)].mul(&v[k]));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert!(self.rows == o.rows && self.cols == o.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].add(&o[(i, j)]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert!(self.rows == o.rows && self.cols == o.cols);
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].sub(&o[(i, j)]))
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.mul(s))
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> T::Mag {
        let mut best = self.data[0].mag();
        for x in &self.data[1..] {
            let m = x.mag();
            if m > best {
                best = m;
            }
        }
        best
    }

    /// Infinity norm (maximum absolute row sum) for real-magnitude scalars.
    pub fn norm_inf(&self) -> T::Mag
    where
        T::Mag: MagSum,
    {
        let mut best: Option<T::Mag> = None;
        for i in 0..self.rows {
            let s = T::Mag::sum(self.row(i).iter().map(|x| x.mag()));
            if best.as_ref().is_none_or(|b| s > *b) {
                best = Some(s);
            }
        }
        best.expect("non-empty")
    }

    pub fn lu(&self) -> Result<Lu<T>, LinearAlgebraError> {
        if self.rows != self.cols {
            return Err(LinearAlgebraError::Dimension(format!("{}x{} is not square", self.rows, self.cols)));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = false;
        let scale = self.max_abs();
        let bits = self.data.iter().map(|x| x.bits()).max().unwrap_or(53);
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].mag();
            for r in col + 1..n {
                let m = a[r * n + col].mag();
                if m > best {
                    best = m;
                    piv = r;
                }
            }
            if T::negligible(&best, &scale, bits) {
                return Err(LinearAlgebraError::SingularMatrix { pivot: col });
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                perm.swap(col, piv);
                sign = !sign;
            }
            let pv = a[col * n + col].clone();
            for r in col + 1..n {
                let f = a[r * n + col].div(&pv);
                if f.mag() == f.zero_like().mag() {
                    a[r * n + col] = f;
                    continue;
                }
                for j in col + 1..n {
                    let v = a[r * n + j].sub(&f.mul(&a[col * n + j]));
                    a[r * n + j] = v;
                }
                a[r * n + col] = f;
            }
        }
        Ok(Lu { n, a, perm, odd: sign })
    }

    /// Solves `A x = b` by partial-pivoting elimination.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, LinearAlgebraError> {
        if b.len() != self.rows {
            return Err(LinearAlgebraError::Dimension(format!("rhs length {} vs {}", b.len(), self.rows)));
        }
        Ok(self.lu()?.solve(b))
    }

    pub fn det(&self) -> T {
        match self.lu() {
            Ok(lu) => lu.det(),
            Err(_) => self.data[0].zero_like(),
        }
    }

    pub fn inverse(&self) -> Result<Self, LinearAlgebraError> {
        let lu = self.lu()?;
        let n = self.rows;
        let like = &self.data[0];
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let e: Vec<T> = (0..n).map(|i| if i == j { like.one_like() } else { like.zero_like() }).collect();
            cols.push(lu.solve(&e));
        }
        Ok(Self::from_fn(n, n, |i, j| cols[j][i].clone()))
    }

    /// Classical adjugate via cofactor determinants; `A·adj(A) = det(A)·I`.
    pub fn adjugate(&self) -> Self {
        let n = self.rows;
        assert_eq!(n, self.cols);
        if n == 1 {
            return Self::identity(1, &self.data[0]);
        }
        Self::from_fn(n, n, |i, j| {
            // entry (i, j) is the (j, i) cofactor
            let minor = Matrix::from_fn(n - 1, n - 1, |r, c| {
                let rr = if r < j { r } else { r + 1 };
                let cc = if c < i { c } else { c + 1 };
                self[(rr, cc)].clone()
            });
            let d = minor.det_cofactor();
            if (i + j) % 2 == 0 {
                d
            } else {
                d.neg()
            }
        })
    }

    /// Determinant by fraction-free Laplace expansion; exact up to rounding of
    /// each product, no pivot threshold.
    pub fn det_cofactor(&self) -> T {
        let n = self.rows;
        if n == 1 {
            return self.data[0].clone();
        }
        let mut acc = self.data[0].zero_like();
        for j in 0..n {
            let minor = Matrix::from_fn(n - 1, n - 1, |r, c| {
                let cc = if c < j { c } else { c + 1 };
                self[(r + 1, cc)].clone()
            });
            let term = self[(0, j)].mul(&minor.det_cofactor());
            acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }
}

/// Summation of magnitudes (needed for norms).
pub trait MagSum: Sized {
    fn sum(it: impl Iterator<Item = Self>) -> Self;
}

impl MagSum for Real {
    fn sum(mut it: impl Iterator<Item = Self>) -> Self {
        let first = it.next().expect("non-empty");
        it.fold(first, |a, b| a + b)
    }
}

impl MagSum for f64 {
    fn sum(it: impl Iterator<Item = Self>) -> Self {
        it.sum()
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

/// Packed LU factors with row permutation.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    a: Vec<T>,
    perm: Vec<usize>,
    odd: bool,
}

impl<T: Scalar> Lu<T> {
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            for k in 0..i {
                let v = y[i].sub(&self.a[i * n + k].mul(&y[k]));
                y[i] = v;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let v = y[i].sub(&self.a[i * n + k].mul(&y[k]));
                y[i] = v;
            }
            y[i] = y[i].div(&self.a[i * n + i]);
        }
        y
    }

    pub fn det(&self) -> T {
        let n = self.n;
        let mut d = self.a[0].clone();
        for i in 1..n {
            d = d.mul(&self.a[i * n + i]);
        }
        if self.odd {
            d.neg()
        } else {
            d
        }
    }
}

/// Solves `A x = b`; see [`Matrix::solve`].
pub fn solve_linear(a: &DenseMatrix, b: &[Real]) -> Result<Vec<Real>, LinearAlgebraError> {
    a.solve(b)
}
