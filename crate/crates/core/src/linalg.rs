//! Deterministic exact linear algebra: reduced row echelon form, canonical solves, kernels and images.

use num::{One, Zero};

use crate::error::{Error, Result};
use crate::graded::Scalar;

/// Dense matrix of exact scalars, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<Scalar>>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![vec![Scalar::zero(); cols]; rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i][i] = Scalar::one();
        }
        m
    }

    pub fn from_rows(data: Vec<Vec<Scalar>>) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        Self { rows, cols, data }
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<Scalar>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for i in 0..rows {
                m.data[i][j] = c[i].clone();
            }
        }
        m
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.data[i][j].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|r| r.iter().all(Zero::is_zero))
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols, "matrix-vector shape");
        self.data
            .iter()
            .map(|row| {
                let mut acc = Scalar::zero();
                for (a, b) in row.iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k][j];
                    if !b.is_zero() {
                        out.data[i][j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i][j] += &other.data[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        let mut out = self.clone();
        for row in &mut out.data {
            for x in row {
                *x *= s;
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        Rref::new(self).rank
    }

    /// The inverse of a square matrix, or `None` when it is singular.
    pub fn inverse(&self) -> Option<Matrix> {
        if self.rows != self.cols {
            return None;
        }
        let r = Rref::new(self);
        (r.rank == self.rows).then_some(r.transform)
    }
}

/// Outcome of a canonical solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solve {
    /// The canonical preimage: pivot variables from back-substitution, free variables zero.
    Solution(Vec<Scalar>),
    /// The target is outside the image; `residual` is its component in the cokernel coordinates.
    Infeasible { residual: Vec<Scalar> },
}

/// Reduced row echelon data of a matrix `M`, with the row transform `E` such that `E·M` is reduced.
///
/// Pivots are the first nonzero column available under the fixed column order, so every
/// derived quantity depends only on `M`.
#[derive(Clone, Debug)]
pub struct Rref {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    pub pivots: Vec<usize>,
    /// The reduced matrix `E·M`; rows beyond `rank` vanish.
    pub reduced: Matrix,
    pub transform: Matrix,
}

impl Rref {
    pub fn new(m: &Matrix) -> Self {
        let (rows, cols) = (m.rows, m.cols);
        let mut a = m.clone();
        let mut e = Matrix::identity(rows);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !a.data[i][c].is_zero()) else {
                continue;
            };
            a.data.swap(r, p);
            e.data.swap(r, p);
            let inv = Scalar::one() / &a.data[r][c];
            for x in a.data[r].iter_mut() {
                *x *= &inv;
            }
            for x in e.data[r].iter_mut() {
                *x *= &inv;
            }
            for i in 0..rows {
                if i == r || a.data[i][c].is_zero() {
                    continue;
                }
                let f = a.data[i][c].clone();
                let (pa, pe) = (a.data[r].clone(), e.data[r].clone());
                for (x, y) in a.data[i].iter_mut().zip(&pa) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
                for (x, y) in e.data[i].iter_mut().zip(&pe) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        Self { rows, cols, rank: r, pivots, reduced: a, transform: e }
    }

    /// Canonical solve of `M x = b`.
    pub fn solve(&self, b: &[Scalar]) -> Result<Solve> {
        if b.len() != self.rows {
            return Err(Error::Dimension(format!("target has length {}, map has {} rows", b.len(), self.rows)));
        }
        let c = self.transform.apply(b);
        let residual: Vec<Scalar> = c[self.rank..].to_vec();
        if residual.iter().any(|x| !x.is_zero()) {
            return Ok(Solve::Infeasible { residual });
        }
        let mut x = vec![Scalar::zero(); self.cols];
        for (i, &p) in self.pivots.iter().enumerate() {
            x[p] = c[i].clone();
        }
        Ok(Solve::Solution(x))
    }

    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.cols).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// Kernel basis: one vector per free column, with that free variable set to one.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        self.free_columns()
            .into_iter()
            .map(|f| {
                let mut v = vec![Scalar::zero(); self.cols];
                v[f] = Scalar::one();
                for (i, &p) in self.pivots.iter().enumerate() {
                    v[p] = -self.reduced.data[i][f].clone();
                }
                v
            })
            .collect()
    }
}

/// Canonical solve of `map · x = target`.
pub fn solve_linear(map: &Matrix, target: &[Scalar]) -> Result<Solve> {
    Rref::new(map).solve(target)
}

/// Deterministic kernel and image bases of a map, together with its canonical section.
#[derive(Clone, Debug)]
pub struct KernelImage {
    pub kernel: Vec<Vec<Scalar>>,
    /// The pivot columns of the map, in order.
    pub image: Vec<Vec<Scalar>>,
    rref: Rref,
}

impl KernelImage {
    /// The canonical section on the image; `None` outside it.
    pub fn section(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        match self.rref.solve(b).ok()? {
            Solve::Solution(x) => Some(x),
            Solve::Infeasible { .. } => None,
        }
    }
}

pub fn kernel_image_basis(map: &Matrix) -> KernelImage {
    let rref = Rref::new(map);
    let kernel = rref.kernel_basis();
    let image = rref.pivots.iter().map(|&p| map.column(p)).collect();
    KernelImage { kernel, image, rref }
}

/// Adds `s·v` into `acc`.
pub fn axpy(acc: &mut [Scalar], s: &Scalar, v: &[Scalar]) {
    for (a, b) in acc.iter_mut().zip(v) {
        if !b.is_zero() {
            *a += s * b;
        }
    }
}

pub fn is_zero_vec(v: &[Scalar]) -> bool {
    v.iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::int;

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    #[test]
    fn zero_target_gives_zero_solution() {
        let a = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(solve_linear(&a, &[int(0), int(0)]).unwrap(), Solve::Solution(vec![int(0), int(0)]));
    }

    #[test]
    fn identity_solves_to_target() {
        let b = vec![int(3), int(-1), int(7)];
        assert_eq!(solve_linear(&Matrix::identity(3), &b).unwrap(), Solve::Solution(b));
    }

    #[test]
    fn rank_deficient_canonical_preimage() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        let b = a.apply(&[int(1), int(1), int(1)]);
        let Solve::Solution(x) = solve_linear(&a, &b).unwrap() else { panic!("infeasible") };
        assert_eq!(a.apply(&x), b);
        // Column 2 is free, so its variable is zero.
        assert_eq!(x[2], int(0));
        let bad = vec![int(1), int(0), int(0)];
        assert!(matches!(solve_linear(&a, &bad).unwrap(), Solve::Infeasible { .. }));
    }

    #[test]
    fn zero_and_invertible_maps() {
        let z = Matrix::zeros(3, 3);
        let ki = kernel_image_basis(&z);
        assert_eq!(ki.kernel.len(), 3);
        assert!(ki.image.is_empty());
        let i = kernel_image_basis(&Matrix::identity(3));
        assert!(i.kernel.is_empty());
        assert_eq!(i.image.len(), 3);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        assert!(solve_linear(&Matrix::identity(2), &[int(1)]).is_err());
    }
}
