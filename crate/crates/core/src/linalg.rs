//! Small dense linear algebra: real symmetric and complex Hermitian
//! eigenproblems via Householder tridiagonalization and implicit QL.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// Row-major dense real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `vᵀ A v` for a square matrix.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add_scaled(&mut self, other: &Matrix, s: f64) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
/// Column `j` of `vectors` belongs to `values[j]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn max(&self) -> (f64, Vec<f64>) {
        let j = self.values.len() - 1;
        (self.values[j], self.vectors.column(j))
    }

    pub fn min(&self) -> (f64, Vec<f64>) {
        (self.values[0], self.vectors.column(0))
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off`, ascending, together with the first component
/// of each normalized eigenvector (what Golub–Welsch needs).
pub fn tridiagonal_eigen_first_components(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    if off.len() + 1 != n.max(1) {
        return Err(Error::DimensionMismatch { expected: n.saturating_sub(1), found: off.len() });
    }
    let mut d = diag.to_vec();
    let mut e = subdiag_layout(off, n);
    let mut z = Matrix::zeros(1, n);
    if n > 0 {
        z[(0, 0)] = 1.0;
    }
    implicit_ql(&mut d, &mut e, &mut z)?;
    let order = ascending_order(&d);
    Ok((order.iter().map(|&j| d[j]).collect(), order.iter().map(|&j| z[(0, j)]).collect()))
}

/// Full eigen-decomposition of a symmetric tridiagonal matrix.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<SymEigen> {
    let n = diag.len();
    if off.len() + 1 != n.max(1) {
        return Err(Error::DimensionMismatch { expected: n.saturating_sub(1), found: off.len() });
    }
    let mut d = diag.to_vec();
    let mut e = subdiag_layout(off, n);
    let mut v = Matrix::identity(n);
    implicit_ql(&mut d, &mut e, &mut v)?;
    Ok(sorted(d, v))
}

/// Full eigen-decomposition of a real symmetric matrix (only the lower
/// triangle is read).
pub fn symmetric_eigen(a: &Matrix) -> Result<SymEigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.cols() });
    }
    if n == 0 {
        return Ok(SymEigen { values: Vec::new(), vectors: Matrix::zeros(0, 0) });
    }
    let mut v = Matrix::from_fn(n, n, |i, j| if j <= i { a[(i, j)] } else { a[(j, i)] });
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    householder_tridiagonalize(&mut v, &mut d, &mut e);
    implicit_ql(&mut d, &mut e, &mut v)?;
    Ok(sorted(d, v))
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(a)?.values)
}

fn subdiag_layout(off: &[f64], n: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    for (i, &x) in off.iter().enumerate() {
        e[i + 1] = x;
    }
    e
}

fn ascending_order(d: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    order
}

fn sorted(d: Vec<f64>, v: Matrix) -> SymEigen {
    let order = ascending_order(&d);
    let n = d.len();
    let values = order.iter().map(|&j| d[j]).collect();
    let vectors = Matrix::from_fn(v.rows(), n, |i, k| v[(i, order[k])]);
    SymEigen { values, vectors }
}

/// Householder reduction of the symmetric matrix held in `v` to
/// tridiagonal form. On return `d` is the diagonal, `e[1..]` the
/// sub-diagonal and `v` the accumulated orthogonal transform.
fn householder_tridiagonalize(v: &mut Matrix, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }
    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for x in d[..i].iter_mut() {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for x in e[..i].iter_mut() {
                *x = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let g: f64 = (0..=i).map(|k| v[(k, i + 1)] * v[(k, j)]).sum();
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL iteration with Wilkinson-style shifts on a symmetric
/// tridiagonal matrix (`d` diagonal, `e[1..]` sub-diagonal). Rotations are
/// accumulated into the columns of `z`, which may carry any number of rows.
fn implicit_ql(d: &mut [f64], e: &mut [f64], z: &mut Matrix) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::EigenNoConvergence);
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for x in d[(l + 2)..].iter_mut() {
                    *x -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..z.rows() {
                        let zk1 = z[(k, i + 1)];
                        let zk = z[(k, i)];
                        z[(k, i + 1)] = s * zk + c * zk1;
                        z[(k, i)] = c * zk - s * zk1;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Row-major dense complex square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// `v v†`.
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `v† A v`.
    pub fn sandwich(&self, v: &[Complex64]) -> Complex64 {
        let av = self.mul_vec(v);
        v.iter().zip(&av).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (n, m) = (self.n, other.n);
        CMatrix::from_fn(n * m, |r, c| self[(r / m, c / m)] * other[(r % m, c % m)])
    }

    pub fn scaled(&self, s: f64) -> CMatrix {
        CMatrix { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        CMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x.norm_sqr()).sum())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..=i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// Eigen-decomposition of a Hermitian matrix. Values ascending; vectors
/// stored as columns (`vectors[k]` belongs to `values[k]`).
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Hermitian eigenproblem through the real symmetric embedding
/// `[[Re A, -Im A], [Im A, Re A]]`, whose spectrum is that of `A` with
/// every eigenvalue doubled. Each returned vector is an eigenvector, but
/// within a repeated eigenvalue they need not be mutually orthogonal.
pub fn hermitian_eigen(a: &CMatrix) -> Result<HermEigen> {
    let n = a.size();
    let big = Matrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = a[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let eig = symmetric_eigen(&big)?;
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for k in 0..n {
        let col = 2 * k + 1;
        values.push(0.5 * (eig.values[2 * k] + eig.values[col]));
        let v: Vec<Complex64> =
            (0..n).map(|i| Complex64::new(eig.vectors[(i, col)], eig.vectors[(i + n, col)])).collect();
        let nv = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
        vectors.push(v.into_iter().map(|z| z / nv).collect());
    }
    Ok(HermEigen { values, vectors })
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(a)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x: f64 = rng.random_range(-1.0..1.0);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        m
    }

    /// Power iteration with deflation, used only as an independent check.
    fn power_top(a: &Matrix) -> f64 {
        let n = a.rows();
        let shift = a.max_abs() * n as f64;
        let mut v = vec![1.0; n];
        let mut lambda = 0.0;
        for _ in 0..20000 {
            let mut w = a.mul_vec(&v);
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi += shift * vi;
            }
            let nw = norm(&w);
            v = w.into_iter().map(|x| x / nw).collect();
            lambda = a.quadratic_form(&v);
        }
        lambda
    }

    #[test]
    fn residuals_and_orthogonality() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (17, 4), (40, 5)] {
            let a = random_symmetric(n, seed);
            let eig = symmetric_eigen(&a).unwrap();
            for k in 0..n {
                let v = eig.vectors.column(k);
                let av = a.mul_vec(&v);
                let res: f64 = av.iter().zip(&v).map(|(x, y)| (x - eig.values[k] * y).powi(2)).sum();
                assert!(res.sqrt() < 1e-12 * (1.0 + a.frobenius_norm()), "n={n} k={k}");
                assert!((norm(&v) - 1.0).abs() < 1e-12);
            }
            for w in eig.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn matches_power_iteration() {
        let a = random_symmetric(8, 11);
        let top = symmetric_eigen(&a).unwrap().values[7];
        assert!((top - power_top(&a)).abs() < 1e-8);
    }

    #[test]
    fn tridiagonal_first_components_match_full() {
        let diag = [0.5, -1.0, 2.0, 0.25];
        let off = [1.0, 0.3, -0.7];
        let full = tridiagonal_eigen(&diag, &off).unwrap();
        let (vals, first) = tridiagonal_eigen_first_components(&diag, &off).unwrap();
        for k in 0..4 {
            assert!((vals[k] - full.values[k]).abs() < 1e-13);
            assert!((first[k].abs() - full.vectors[(0, k)].abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_pauli_y() {
        let i = Complex64::new(0.0, 1.0);
        let a = CMatrix::from_fn(2, |r, c| match (r, c) {
            (0, 1) => -i,
            (1, 0) => i,
            _ => Complex64::new(0.0, 0.0),
        });
        let eig = hermitian_eigen(&a).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        let v = &eig.vectors[1];
        let av = a.mul_vec(v);
        for k in 0..2 {
            assert!((av[k] - v[k]).norm() < 1e-13);
        }
    }
}
