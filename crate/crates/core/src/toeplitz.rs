//! Generalized Toeplitz matrices
//!
//! `T[h]_{ij} = ∫ p_i(t) p_j(t) h(t) dμ_d(t)`, `0 ≤ i, j ≤ ℓ`,
//!
//! where `p_k = C_k/√C_k(1)` is the orthonormal Gegenbauer family. A unit
//! vector `e` gives the kernel `q(t) = Σ e_i p_i(t)`, and `eᵀT[h]e` is the
//! integral of `h` against `q²`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::gegenbauer::{gauss_rule, jacobi_offdiag, nodes_for_degree, orthonormal_values, GegenbauerBasis};
use crate::linalg::{symmetric_eigen, tridiagonal_eigen, Matrix};

/// A univariate multiplier `h(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Multiplier {
    /// `h(t) = Σ c_k t^k`.
    Monomial(Vec<f64>),
    /// `h(t) = Σ c_k C_k(t)`.
    Gegenbauer(Vec<f64>),
}

impl Multiplier {
    /// `h = 1`.
    pub fn one() -> Self {
        Multiplier::Gegenbauer(vec![1.0])
    }

    /// `h(t) = t`.
    pub fn t() -> Self {
        Multiplier::Monomial(vec![0.0, 1.0])
    }

    /// `h = C_k / C_k(1)`.
    pub fn normalized_gegenbauer(d: usize, k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0 / crate::gegenbauer::harmonic_dimension(d, k);
        Multiplier::Gegenbauer(c)
    }

    /// `h = (1/n) Σ_{k=1..n} C_{2k}/C_{2k}(1)`.
    pub fn averaged_even(d: usize, n: usize) -> Self {
        let mut c = vec![0.0; 2 * n + 1];
        for k in 1..=n {
            c[2 * k] = 1.0 / (n as f64 * crate::gegenbauer::harmonic_dimension(d, 2 * k));
        }
        Multiplier::Gegenbauer(c)
    }

    pub fn degree(&self) -> usize {
        let c = match self {
            Multiplier::Monomial(c) | Multiplier::Gegenbauer(c) => c,
        };
        c.iter().rposition(|&x| x != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, basis: &GegenbauerBasis, t: f64) -> f64 {
        match self {
            Multiplier::Monomial(c) => c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck),
            Multiplier::Gegenbauer(c) => {
                let vals = basis.eval_upto(c.len().saturating_sub(1), t);
                c.iter().zip(vals).map(|(a, v)| a * v).sum()
            }
        }
    }

    fn is_t(&self) -> bool {
        matches!(self, Multiplier::Monomial(c) if self.degree() == 1 && c[0] == 0.0 && c[1] == 1.0)
    }
}

/// The `(ℓ+1) × (ℓ+1)` matrix `T[h]`.
#[derive(Debug, Clone)]
pub struct ToeplitzOp {
    d: usize,
    gegenbauer_coefficients: Vec<f64>,
    bandwidth: usize,
    matrix: Matrix,
}

impl ToeplitzOp {
    pub fn dim(&self) -> usize {
        self.d
    }

    /// `ℓ + 1`.
    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    /// Coefficients of `h` in the basis `C_0, C_1, …`.
    pub fn gegenbauer_coefficients(&self) -> &[f64] {
        &self.gegenbauer_coefficients
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `eᵀ T[h] e`.
    pub fn quadratic_form(&self, e: &[f64]) -> Result<f64> {
        if e.len() != self.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), found: e.len() });
        }
        Ok(self.matrix.quadratic_form(e))
    }

    /// Largest eigenvalue and a canonical unit eigenvector.
    pub fn lambda_max(&self) -> Result<(f64, Vec<f64>)> {
        lambda_max(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        crate::linalg::symmetric_eigenvalues(&self.matrix)
    }
}

/// Largest eigenvalue of a symmetric matrix with its eigenvector, signed so
/// that its largest-magnitude entry is positive.
pub fn lambda_max(m: &Matrix) -> Result<(f64, Vec<f64>)> {
    let (value, mut v) = symmetric_eigen(m)?.max();
    canonical_sign(&mut v);
    Ok((value, v))
}

pub(crate) fn canonical_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        // first entry wins ties, so the choice is reproducible
        if x.abs() > best * (1.0 + 1e-12) {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Build `T[h]` of size `ℓ + 1`.
pub fn build(basis: &GegenbauerBasis, ell: usize, h: &Multiplier) -> Result<ToeplitzOp> {
    let deg = h.degree();
    if ell + deg > basis.max_degree() {
        return Err(Error::DegreeOverflow { needed: ell + deg, max: basis.max_degree() });
    }
    let d = basis.dim();
    let size = ell + 1;
    let rule = gauss_rule(d, nodes_for_degree(2 * ell + deg))?;

    let gegenbauer_coefficients = match h {
        Multiplier::Gegenbauer(c) => c[..=deg].to_vec(),
        Multiplier::Monomial(_) => (0..=deg)
            .map(|k| {
                let norm = basis.endpoint_value(k).expect("k <= deg <= max_degree");
                rule.integrate(|t| h.eval(basis, t) * basis.eval_upto(k, t)[k]) / norm
            })
            .collect(),
    };

    let matrix = if h.is_t() {
        let off: Vec<f64> = (1..size).map(|k| jacobi_offdiag(d, k)).collect();
        Matrix::from_fn(size, size, |i, j| if i + 1 == j { off[i] } else if j + 1 == i { off[j] } else { 0.0 })
    } else {
        let values: Vec<(f64, Vec<f64>)> = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&t, &w)| (w * h.eval(basis, t), orthonormal_values(d, ell, t)))
            .collect();
        let mut m = Matrix::zeros(size, size);
        for i in 0..size {
            for j in i..size {
                let s: f64 = values.iter().map(|(wh, p)| wh * p[i] * p[j]).sum();
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
        }
        m
    };
    Ok(ToeplitzOp { d, gegenbauer_coefficients, bandwidth: deg, matrix })
}

/// The roots of `C_m`, ascending: eigenvalues of the `m × m` Jacobi matrix
/// `T[t]`.
pub fn gegenbauer_roots(basis: &GegenbauerBasis, m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let off: Vec<f64> = (1..m).map(|k| jacobi_offdiag(basis.dim(), k)).collect();
    Ok(tridiagonal_eigen(&vec![0.0; m], &off)?.values)
}
