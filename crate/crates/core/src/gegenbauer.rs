//! Gegenbauer polynomials `C_k` for ambient dimension `d`, normalized so
//! that `x ↦ C_k(⟨x, y⟩)` is the reproducing kernel of the degree-`k`
//! spherical harmonics on `S^{d−1}`. In this normalization
//! `C_k(1) = dim 𝓗_k^d` and
//!
//! `(ω_{d−1}/ω_d) ∫ C_i C_j (1−t²)^{(d−3)/2} dt = δ_ij C_i(1)`,
//!
//! i.e. `C_k/√C_k(1)` is orthonormal for the probability measure
//! `μ_d = (ω_{d−1}/ω_d)(1−t²)^{(d−3)/2} dt` on `[−1, 1]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::tridiagonal_eigen_first_components;

/// One row of `C_{k+1}(t) = (a_k t + b_k) C_k(t) − c_k C_{k−1}(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recurrence {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone)]
pub struct GegenbauerBasis {
    d: usize,
    max_degree: usize,
    recurrence: Vec<Recurrence>,
    endpoint_values: Vec<f64>,
    weight_ratio: f64,
}

/// `Γ(d/2) / (√π Γ((d−1)/2))`, the ratio `ω_{d−1}/ω_d` of sphere surface
/// areas (`ω_d` is the area of `S^{d−1}`).
pub fn weight_ratio(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(invalid("weight ratio needs d >= 2"));
    }
    let d = d as f64;
    let log = libm::lgamma(d / 2.0) - libm::lgamma((d - 1.0) / 2.0) - 0.5 * libm::log(core::f64::consts::PI);
    Ok(libm::exp(log))
}

/// Dimension of `𝓗_k^d`, computed as `binom(k+d−2, k) + binom(k+d−3, k−1)`
/// (the same number as `binom(d+k−1, k) − binom(d+k−3, k−2)`, without the
/// cancellation).
pub fn harmonic_dimension(d: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    binomial(k + d - 2, k) + binomial(k + d - 3, k - 1)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    libm::round(acc).max(acc.min(1.0))
}

/// Off-diagonal entry `β_k` (k ≥ 1) of the Jacobi matrix of the orthonormal
/// family `p_k = C_k/√C_k(1)`: `t p_k = β_{k+1} p_{k+1} + β_k p_{k−1}`.
pub fn jacobi_offdiag(d: usize, k: usize) -> f64 {
    debug_assert!(k >= 1);
    if k == 1 {
        return libm::sqrt(1.0 / d as f64);
    }
    let (k, d) = (k as f64, d as f64);
    libm::sqrt(k * (k + d - 3.0) / ((2.0 * k + d - 2.0) * (2.0 * k + d - 4.0)))
}

impl GegenbauerBasis {
    pub fn new(d: usize, max_degree: usize) -> Result<Self> {
        if d < 2 {
            return Err(invalid("Gegenbauer basis needs d >= 2 (weight is not integrable for d = 1)"));
        }
        let endpoint_values: Vec<f64> = (0..=max_degree + 1).map(|k| harmonic_dimension(d, k)).collect();
        let recurrence = (0..max_degree)
            .map(|k| {
                let n = &endpoint_values;
                let beta_next = jacobi_offdiag(d, k + 1);
                let a = libm::sqrt(n[k + 1] / n[k]) / beta_next;
                let c = if k == 0 { 0.0 } else { jacobi_offdiag(d, k) * libm::sqrt(n[k + 1] / n[k - 1]) / beta_next };
                Recurrence { a, b: 0.0, c }
            })
            .collect();
        let mut endpoint_values = endpoint_values;
        endpoint_values.truncate(max_degree + 1);
        Ok(Self { d, max_degree, recurrence, endpoint_values, weight_ratio: weight_ratio(d)? })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn weight_ratio(&self) -> f64 {
        self.weight_ratio
    }

    pub fn recurrence(&self) -> &[Recurrence] {
        &self.recurrence
    }

    fn check_degree(&self, k: usize) -> Result<()> {
        if k > self.max_degree {
            return Err(Error::DegreeOverflow { needed: k, max: self.max_degree });
        }
        Ok(())
    }

    /// `C_k(1) = dim 𝓗_k^d`.
    pub fn endpoint_value(&self, k: usize) -> Result<f64> {
        self.check_degree(k)?;
        Ok(self.endpoint_values[k])
    }

    /// `C_k(t)` by forward recurrence.
    pub fn eval(&self, k: usize, t: f64) -> Result<f64> {
        self.check_degree(k)?;
        Ok(self.eval_upto(k, t)[k])
    }

    /// `C_0(t), …, C_k(t)`.
    pub fn eval_upto(&self, k: usize, t: f64) -> Vec<f64> {
        let k = k.min(self.max_degree);
        let mut out = Vec::with_capacity(k + 1);
        out.push(1.0);
        for (j, r) in self.recurrence.iter().take(k).enumerate() {
            let prev = if j == 0 { 0.0 } else { out[j - 1] };
            out.push((r.a * t + r.b) * out[j] - r.c * prev);
        }
        out
    }

    /// `C_0(t)/√C_0(1), …, C_k(t)/√C_k(1)` via the orthonormal recurrence.
    pub fn orthonormal_upto(&self, k: usize, t: f64) -> Vec<f64> {
        orthonormal_values(self.d, k, t)
    }

    /// `C_k'(1) = C_k(1) · k(k+d−2)/(d−1)`.
    pub fn derivative_at_one(&self, k: usize) -> Result<f64> {
        let ck1 = self.endpoint_value(k)?;
        let (kf, d) = (k as f64, self.d as f64);
        Ok(ck1 * kf * (kf + d - 2.0) / (d - 1.0))
    }

    /// Gauss rule for `μ_d` with `node_count` nodes (Golub–Welsch): exact
    /// for polynomials of degree `≤ 2·node_count − 1`, weights sum to 1.
    pub fn gauss_rule(&self, node_count: usize) -> Result<GaussRule> {
        gauss_rule(self.d, node_count)
    }
}

/// Orthonormal values `p_0(t), …, p_k(t)` for dimension `d`, independent of
/// any basis degree cap.
pub fn orthonormal_values(d: usize, k: usize, t: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    for j in 0..k {
        let prev = if j == 0 { 0.0 } else { out[j - 1] * jacobi_offdiag(d, j) };
        out.push((t * out[j] - prev) / jacobi_offdiag(d, j + 1));
    }
    out
}

/// Nodes (ascending) and weights of a Gauss rule on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

/// Gauss rule for `μ_d` from the eigen-decomposition of the `m × m` Jacobi
/// matrix.
pub fn gauss_rule(d: usize, node_count: usize) -> Result<GaussRule> {
    if d < 2 {
        return Err(invalid("Gauss rule needs d >= 2"));
    }
    if node_count == 0 {
        return Err(invalid("node_count must be at least 1"));
    }
    let diag = vec![0.0; node_count];
    let off: Vec<f64> = (1..node_count).map(|k| jacobi_offdiag(d, k)).collect();
    let (nodes, first) = tridiagonal_eigen_first_components(&diag, &off)?;
    let weights = first.iter().map(|v| v * v).collect();
    Ok(GaussRule { nodes, weights })
}

/// Node count needed to integrate a polynomial of total degree `degree`
/// exactly, plus two spare nodes.
pub fn nodes_for_degree(degree: usize) -> usize {
    (degree + 2) / 2 + 2
}
