//! Sparse homogeneous polynomials, scalar and symmetric-matrix valued.

use alloc::collections::btree_map::Entry;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;

/// Exponent multi-index, one entry per variable.
pub type Exponent = Vec<u32>;

/// Homogeneous polynomial in `d` real variables.
///
/// Terms are kept in a `BTreeMap`; since every stored exponent has the same
/// total degree, the map order coincides with graded lexicographic order.
/// Exact zeros are never stored, so the zero polynomial has an empty term
/// map and carries its degree as metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    d: usize,
    degree: usize,
    terms: BTreeMap<Exponent, f64>,
}

impl Poly {
    pub fn zero(d: usize, degree: usize) -> Self {
        Self { d, degree, terms: BTreeMap::new() }
    }

    /// Degree-0 polynomial equal to `c`.
    pub fn constant(d: usize, c: f64) -> Self {
        let mut p = Self::zero(d, 0);
        p.add_term(vec![0; d], c);
        p
    }

    pub fn monomial(exp: Exponent, coef: f64) -> Self {
        let degree = exp.iter().sum::<u32>() as usize;
        let mut p = Self::zero(exp.len(), degree);
        p.add_term(exp, coef);
        p
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, checking
    /// lengths and homogeneity. Repeated exponents accumulate.
    pub fn from_terms<I>(d: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, f64)>,
    {
        let mut p = Self::zero(d, degree);
        for (exp, coef) in terms {
            if exp.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: exp.len() });
            }
            let s = exp.iter().sum::<u32>() as usize;
            if s != degree {
                return Err(Error::NotHomogeneous { expected: degree, found: s });
            }
            p.add_term(exp, coef);
        }
        Ok(p)
    }

    /// `‖x‖^{2j}` expanded in `d` variables.
    pub fn norm_power(d: usize, j: usize) -> Self {
        Self::constant(d, 1.0).mul_norm_power(j)
    }

    /// `⟨x, v⟩^2`.
    pub fn squared_linear_form(v: &[f64]) -> Self {
        let d = v.len();
        let mut p = Self::zero(d, 2);
        for i in 0..d {
            for j in i..d {
                let mut e = vec![0; d];
                e[i] += 1;
                e[j] += 1;
                p.add_term(e, if i == j { v[i] * v[i] } else { 2.0 * v[i] * v[j] });
            }
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded lexicographic order (largest monomial first).
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> {
        self.terms.iter().rev().map(|(e, &c)| (e, c))
    }

    pub fn coef(&self, exp: &[u32]) -> f64 {
        self.terms.get(exp).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, exp: Exponent, coef: f64) {
        debug_assert_eq!(exp.len(), self.d);
        debug_assert_eq!(exp.iter().sum::<u32>() as usize, self.degree);
        if coef == 0.0 {
            return;
        }
        match self.terms.entry(exp) {
            Entry::Vacant(slot) => {
                slot.insert(coef);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += coef;
                if *slot.get() == 0.0 {
                    slot.remove();
                }
            }
        }
    }

    fn check_compatible(&self, other: &Poly) {
        assert!(
            self.d == other.d && self.degree == other.degree,
            "polynomial shape mismatch: ({}, {}) vs ({}, {})",
            self.d,
            self.degree,
            other.d,
            other.degree
        );
    }

    /// `self += s · other`; both must share dimension and degree.
    pub fn add_scaled(&mut self, other: &Poly, s: f64) {
        self.check_compatible(other);
        for (e, c) in &other.terms {
            self.add_term(e.clone(), s * c);
        }
    }

    pub fn scaled(&self, s: f64) -> Poly {
        let mut p = Poly::zero(self.d, self.degree);
        for (e, c) in &self.terms {
            p.add_term(e.clone(), s * c);
        }
        p
    }

    pub fn plus(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        p.add_scaled(other, 1.0);
        p
    }

    pub fn minus(&self, other: &Poly) -> Poly {
        let mut p = self.clone();
        p.add_scaled(other, -1.0);
        p
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.d, other.d, "polynomial dimension mismatch");
        let mut p = Poly::zero(self.d, self.degree + other.degree);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponent = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                p.add_term(e, ca * cb);
            }
        }
        p
    }

    /// `Σ coef · ∏ x_i^{e_i}`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let powers = power_table(x, self.degree);
        self.terms
            .iter()
            .map(|(e, c)| e.iter().enumerate().fold(*c, |acc, (i, &k)| acc * powers[i][k as usize]))
            .sum()
    }

    /// Value and Euclidean gradient at `x`.
    pub fn eval_with_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let d = self.d;
        let powers = power_table(x, self.degree);
        let mut value = 0.0;
        let mut grad = vec![0.0; d];
        let mut factors = vec![0.0; d];
        for (e, c) in &self.terms {
            for i in 0..d {
                factors[i] = powers[i][e[i] as usize];
            }
            value += c * factors.iter().product::<f64>();
            for i in 0..d {
                if e[i] == 0 {
                    continue;
                }
                let mut t = c * e[i] as f64 * powers[i][e[i] as usize - 1];
                for (j, f) in factors.iter().enumerate() {
                    if j != i {
                        t *= f;
                    }
                }
                grad[i] += t;
            }
        }
        (value, grad)
    }

    /// `Σ_i ∂²p/∂x_i²`; the zero polynomial of degree `deg − 2` when
    /// `deg < 2`, degree metadata saturating at 0.
    pub fn laplacian(&self) -> Poly {
        let mut out = Poly::zero(self.d, self.degree.saturating_sub(2));
        if self.degree < 2 {
            return out;
        }
        for (e, c) in &self.terms {
            for i in 0..self.d {
                let k = e[i];
                if k >= 2 {
                    let mut f = e.clone();
                    f[i] -= 2;
                    out.add_term(f, c * (k as f64) * (k as f64 - 1.0));
                }
            }
        }
        out
    }

    /// Iterated Laplacian `Δ^k p`.
    pub fn laplacian_power(&self, k: usize) -> Poly {
        (0..k).fold(self.clone(), |p, _| p.laplacian())
    }

    /// `‖x‖^{2j} · p`, expanded.
    pub fn mul_norm_power(&self, j: usize) -> Poly {
        let mut p = self.clone();
        for _ in 0..j {
            let mut next = Poly::zero(self.d, p.degree + 2);
            for (e, c) in &p.terms {
                for i in 0..self.d {
                    let mut f = e.clone();
                    f[i] += 2;
                    next.add_term(f, *c);
                }
            }
            p = next;
        }
        p
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| f64::max(m, c.abs()))
    }

    /// Largest coefficient-wise difference to `other` (same shape required).
    pub fn max_coef_diff(&self, other: &Poly) -> f64 {
        self.check_compatible(other);
        self.minus(other).max_abs_coef()
    }
}

fn power_table(x: &[f64], degree: usize) -> Vec<Vec<f64>> {
    x.iter()
        .map(|&xi| {
            let mut row = Vec::with_capacity(degree + 1);
            let mut acc = 1.0;
            for _ in 0..=degree {
                row.push(acc);
                acc *= xi;
            }
            row
        })
        .collect()
}

/// All exponent vectors of length `d` with entry sum `degree`, in graded
/// lexicographic order (largest first).
pub fn monomials(d: usize, degree: usize) -> Vec<Exponent> {
    fn rec(pos: usize, left: u32, cur: &mut Exponent, out: &mut Vec<Exponent>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for k in (0..=left).rev() {
            cur[pos] = k;
            rec(pos + 1, left - k, cur, out);
        }
    }
    if d == 0 {
        return if degree == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    rec(0, degree as u32, &mut vec![0; d], &mut out);
    out
}

/// Symmetric `k × k` matrix of homogeneous polynomials sharing `d` and
/// degree. Only the upper triangle `(i, j)`, `i ≤ j`, is stored; absent
/// entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct MatPoly {
    d: usize,
    k: usize,
    degree: usize,
    entries: BTreeMap<(usize, usize), Poly>,
}

impl MatPoly {
    pub fn zero(d: usize, k: usize, degree: usize) -> Self {
        Self { d, k, degree, entries: BTreeMap::new() }
    }

    /// `p · I_k`.
    pub fn identity_times(p: &Poly, k: usize) -> Self {
        let mut m = Self::zero(p.dim(), k, p.degree());
        for i in 0..k {
            m.set(i, i, p.clone()).expect("shape is consistent");
        }
        m
    }

    /// The `1 × 1` matrix polynomial `[p]`.
    pub fn from_scalar(p: &Poly) -> Self {
        Self::identity_times(p, 1)
    }

    /// Sets entry `(i, j)` (and by symmetry `(j, i)`).
    pub fn set(&mut self, i: usize, j: usize, p: Poly) -> Result<()> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if j >= self.k {
            return Err(invalid("matrix entry index out of range"));
        }
        if p.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: p.dim() });
        }
        if p.degree() != self.degree {
            return Err(Error::NotHomogeneous { expected: self.degree, found: p.degree() });
        }
        if p.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), p);
        }
        Ok(())
    }

    pub fn entry(&self, i: usize, j: usize) -> Poly {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries.get(&key).cloned().unwrap_or_else(|| Poly::zero(self.d, self.degree))
    }

    /// Stored upper-triangle entries.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &Poly)> {
        self.entries.iter().map(|(k, p)| (*k, p))
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn map(&self, degree: usize, f: impl Fn(&Poly) -> Poly) -> MatPoly {
        let mut out = MatPoly::zero(self.d, self.k, degree);
        for (&key, p) in &self.entries {
            let q = f(p);
            if !q.is_zero() {
                out.entries.insert(key, q);
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> Result<Matrix> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: x.len() });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.k, self.k);
        for (&(i, j), p) in &self.entries {
            let v = p.eval_unchecked(x);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    /// `yᵀ F(x) y` and its gradient in `x`.
    pub fn quadratic_form_with_gradient(&self, x: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
        let mut value = 0.0;
        let mut grad = vec![0.0; self.d];
        for (&(i, j), p) in &self.entries {
            let w = if i == j { y[i] * y[i] } else { 2.0 * y[i] * y[j] };
            let (v, g) = p.eval_with_gradient(x);
            value += w * v;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += w * b;
            }
        }
        (value, grad)
    }

    /// Scalar polynomial `yᵀ F(x) y` in `x` for a fixed `y`.
    pub fn contract(&self, y: &[f64]) -> Poly {
        let mut out = Poly::zero(self.d, self.degree);
        for (&(i, j), p) in &self.entries {
            let w = if i == j { y[i] * y[i] } else { 2.0 * y[i] * y[j] };
            out.add_scaled(p, w);
        }
        out
    }

    pub fn laplacian(&self) -> MatPoly {
        self.map(self.degree.saturating_sub(2), Poly::laplacian)
    }

    pub fn mul_norm_power(&self, j: usize) -> MatPoly {
        self.map(self.degree + 2 * j, |p| p.mul_norm_power(j))
    }

    pub fn scaled(&self, s: f64) -> MatPoly {
        self.map(self.degree, |p| p.scaled(s))
    }

    pub fn add_scaled(&mut self, other: &MatPoly, s: f64) {
        assert!(
            self.d == other.d && self.k == other.k && self.degree == other.degree,
            "matrix polynomial shape mismatch"
        );
        for (&key, p) in &other.entries {
            let mut cur = self.entries.remove(&key).unwrap_or_else(|| Poly::zero(self.d, self.degree));
            cur.add_scaled(p, s);
            if !cur.is_zero() {
                self.entries.insert(key, cur);
            }
        }
    }

    pub fn max_abs_coef(&self) -> f64 {
        self.entries.values().fold(0.0, |m, p| f64::max(m, p.max_abs_coef()))
    }

    pub fn max_coef_diff(&self, other: &MatPoly) -> f64 {
        let mut diff = self.clone();
        diff.add_scaled(other, -1.0);
        diff.max_abs_coef()
    }
}

/// A point on the unit sphere `S^{d−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = crate::linalg::norm(&coords);
        if (n - 1.0).abs() > Self::TOLERANCE {
            return Err(Error::NotUnit(n));
        }
        Ok(Self(coords))
    }

    /// Normalizes `v`; fails on the zero vector.
    pub fn normalize(mut v: Vec<f64>) -> Result<Self> {
        let n = crate::linalg::norm(&v);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::NotUnit(n));
        }
        for x in v.iter_mut() {
            *x /= n;
        }
        Ok(Self(v))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(d: usize, i: usize, k: u32) -> Poly {
        let mut e = vec![0; d];
        e[i] = k;
        Poly::monomial(e, 1.0)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(x(3, 0, 2).eval(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        let n = Poly::norm_power(3, 1);
        let v = [0.48, 0.6, 0.64];
        assert!((n.eval(&v).unwrap() - 1.0).abs() < 1e-15);
        let q = x(2, 0, 4).plus(&x(2, 1, 4));
        let s = core::f64::consts::FRAC_1_SQRT_2;
        assert!((q.eval(&[s, s]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(q.eval(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn laplacian_examples() {
        let p = x(3, 0, 4);
        assert_eq!(p.laplacian(), x(3, 0, 2).scaled(12.0));
        assert_eq!(Poly::norm_power(4, 1).laplacian(), Poly::constant(4, 8.0));
        assert_eq!(p.laplacian_power(2), Poly::constant(3, 24.0));
        let lin = x(3, 1, 1);
        assert!(lin.laplacian().is_zero());
    }

    #[test]
    fn mul_norm_power_examples() {
        let p = x(2, 0, 1).mul_norm_power(1);
        let expect = Poly::from_terms(2, 3, [(vec![3, 0], 1.0), (vec![1, 2], 1.0)]).unwrap();
        assert_eq!(p, expect);
        let q = Poly::constant(2, 1.0).mul_norm_power(2);
        let expect = Poly::from_terms(2, 4, [(vec![4, 0], 1.0), (vec![2, 2], 2.0), (vec![0, 4], 1.0)]).unwrap();
        assert_eq!(q, expect);
        let r = x(3, 2, 3);
        assert_eq!(r.mul_norm_power(0), r);
    }

    #[test]
    fn rejects_inhomogeneous_terms() {
        let err = Poly::from_terms(2, 2, [(vec![1, 0], 1.0)]).unwrap_err();
        assert_eq!(err, Error::NotHomogeneous { expected: 2, found: 1 });
        let err = Poly::from_terms(2, 1, [(vec![1, 0, 0], 1.0)]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn cancellation_drops_term() {
        let mut p = x(2, 0, 2);
        p.add_term(vec![2, 0], -1.0);
        assert!(p.is_zero());
        assert_eq!(p.degree(), 2);
    }

    #[test]
    fn monomial_count_and_order() {
        let m = monomials(3, 2);
        assert_eq!(m.len(), 6);
        assert_eq!(m[0], vec![2, 0, 0]);
        assert_eq!(m[5], vec![0, 0, 2]);
        let p = Poly::from_terms(3, 2, m.iter().map(|e| (e.clone(), 1.0))).unwrap();
        let order: Vec<_> = p.terms().map(|(e, _)| e.clone()).collect();
        assert_eq!(order, m);
    }

    #[test]
    fn gradient_matches_finite_difference() {
        let p = Poly::from_terms(3, 3, [(vec![3, 0, 0], 1.5), (vec![1, 1, 1], -2.0), (vec![0, 1, 2], 0.7)]).unwrap();
        let pt = [0.3, -0.4, 0.8];
        let (v, g) = p.eval_with_gradient(&pt);
        assert!((v - p.eval(&pt).unwrap()).abs() < 1e-14);
        for i in 0..3 {
            let mut a = pt;
            let mut b = pt;
            a[i] += 1e-6;
            b[i] -= 1e-6;
            let fd = (p.eval(&a).unwrap() - p.eval(&b).unwrap()) / 2e-6;
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn matpoly_symmetry_and_contract() {
        let mut f = MatPoly::zero(2, 2, 2);
        f.set(1, 0, x(2, 0, 2)).unwrap();
        f.set(1, 1, x(2, 1, 2)).unwrap();
        let m = f.eval(&[0.6, 0.8]).unwrap();
        assert!((m[(0, 1)] - 0.36).abs() < 1e-15 && (m[(1, 0)] - 0.36).abs() < 1e-15);
        let y = [0.6, 0.8];
        let c = f.contract(&y);
        let direct = m.quadratic_form(&y);
        assert!((c.eval(&[0.6, 0.8]).unwrap() - direct).abs() < 1e-14);
        assert!(f.set(0, 0, x(3, 0, 2)).is_err());
        assert!(f.set(0, 0, x(2, 0, 1)).is_err());
    }

    #[test]
    fn sphere_point_validation() {
        assert!(SpherePoint::new(vec![1.0, 0.0]).is_ok());
        assert!(SpherePoint::new(vec![1.0, 1e-3]).is_err());
        assert!(SpherePoint::normalize(vec![0.0, 0.0]).is_err());
        let p = SpherePoint::normalize(vec![3.0, 4.0]).unwrap();
        assert_eq!(p.coords(), &[0.6, 0.8]);
    }
}
