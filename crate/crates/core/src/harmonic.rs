//! Fourier–Laplace decomposition of even homogeneous forms.
//!
//! A form `f` of degree `2n` splits uniquely as
//! `f = Σ_{k=0..n} ‖x‖^{2(n−k)} f_{2k}` with every `f_{2k}` harmonic of
//! degree `2k`. Applying `Δ^m` gives the triangular system
//!
//! `Δ^m f = Σ_{k=0..n−m} r(n,d,m,k) ‖x‖^{2(n−k−m)} f_{2k}`,
//!
//! which is solved from `m = n` (only `f_0` survives) down to `m = 0`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::poly::{MatPoly, Poly};

/// Operations shared by scalar and matrix-valued forms.
pub trait Form: Clone {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    fn laplacian(&self) -> Self;
    fn mul_norm_power(&self, j: usize) -> Self;
    fn scaled(&self, s: f64) -> Self;
    fn add_scaled(&mut self, other: &Self, s: f64);
    /// Zero form of the same shape and the given degree.
    fn zero_like(&self, degree: usize) -> Self;
    /// Adds `c` (scalar case) or `c·I` (matrix case) to a degree-0 form.
    fn add_identity(&mut self, c: f64);
    fn max_abs_coef(&self) -> f64;
    fn max_coef_diff(&self, other: &Self) -> f64;
}

impl Form for Poly {
    fn dim(&self) -> usize {
        Poly::dim(self)
    }
    fn degree(&self) -> usize {
        Poly::degree(self)
    }
    fn laplacian(&self) -> Self {
        Poly::laplacian(self)
    }
    fn mul_norm_power(&self, j: usize) -> Self {
        Poly::mul_norm_power(self, j)
    }
    fn scaled(&self, s: f64) -> Self {
        Poly::scaled(self, s)
    }
    fn add_scaled(&mut self, other: &Self, s: f64) {
        Poly::add_scaled(self, other, s)
    }
    fn zero_like(&self, degree: usize) -> Self {
        Poly::zero(self.dim(), degree)
    }
    fn add_identity(&mut self, c: f64) {
        assert_eq!(self.degree(), 0, "identity shift needs a degree-0 form");
        self.add_term(alloc::vec![0; self.dim()], c);
    }
    fn max_abs_coef(&self) -> f64 {
        Poly::max_abs_coef(self)
    }
    fn max_coef_diff(&self, other: &Self) -> f64 {
        Poly::max_coef_diff(self, other)
    }
}

impl Form for MatPoly {
    fn dim(&self) -> usize {
        MatPoly::dim(self)
    }
    fn degree(&self) -> usize {
        MatPoly::degree(self)
    }
    fn laplacian(&self) -> Self {
        MatPoly::laplacian(self)
    }
    fn mul_norm_power(&self, j: usize) -> Self {
        MatPoly::mul_norm_power(self, j)
    }
    fn scaled(&self, s: f64) -> Self {
        MatPoly::scaled(self, s)
    }
    fn add_scaled(&mut self, other: &Self, s: f64) {
        MatPoly::add_scaled(self, other, s)
    }
    fn zero_like(&self, degree: usize) -> Self {
        MatPoly::zero(self.dim(), self.size(), degree)
    }
    fn add_identity(&mut self, c: f64) {
        assert_eq!(self.degree(), 0, "identity shift needs a degree-0 form");
        let shift = MatPoly::identity_times(&Poly::constant(self.dim(), c), self.size());
        MatPoly::add_scaled(self, &shift, 1.0);
    }
    fn max_abs_coef(&self) -> f64 {
        MatPoly::max_abs_coef(self)
    }
    fn max_coef_diff(&self, other: &Self) -> f64 {
        MatPoly::max_coef_diff(self, other)
    }
}

/// `f = Σ_k ‖x‖^{2(n−k)} parts[k]`, with `parts[k]` harmonic of degree `2k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicDecomp<F> {
    pub n: usize,
    pub parts: Vec<F>,
    /// Relative coefficient residual of the reconstruction identity.
    pub residual: f64,
}

impl<F: Form> HarmonicDecomp<F> {
    pub fn reconstruct(&self) -> F {
        let mut out = self.parts[0].mul_norm_power(self.n);
        for (k, p) in self.parts.iter().enumerate().skip(1) {
            out.add_scaled(&p.mul_norm_power(self.n - k), 1.0);
        }
        out
    }

    /// Largest relative Laplacian coefficient over all parts.
    pub fn harmonicity_defect(&self) -> f64 {
        self.parts
            .iter()
            .skip(1)
            .map(|p| p.laplacian().max_abs_coef() / p.max_abs_coef().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

/// `r(n,d,m,k) = 4^m (n−k)_m (n+k+d/2−1)_m` with falling factorials; zero
/// when `k > n − m`.
pub fn r_coefficient(n: usize, d: usize, m: usize, k: usize) -> f64 {
    if k + m > n {
        return 0.0;
    }
    let a = (n - k) as f64;
    let b = (n + k) as f64 + d as f64 / 2.0 - 1.0;
    (0..m).map(|i| 4.0 * (a - i as f64) * (b - i as f64)).product()
}

pub fn decompose(f: &Poly) -> Result<HarmonicDecomp<Poly>> {
    decompose_form(f)
}

pub fn decompose_matrix(f: &MatPoly) -> Result<HarmonicDecomp<MatPoly>> {
    decompose_form(f)
}

pub fn decompose_form<F: Form>(f: &F) -> Result<HarmonicDecomp<F>> {
    if f.degree() % 2 == 1 {
        return Err(Error::OddDegree(f.degree()));
    }
    let n = f.degree() / 2;
    let d = f.dim();
    let mut laps = Vec::with_capacity(n + 1);
    laps.push(f.clone());
    for m in 1..=n {
        let next = laps[m - 1].laplacian();
        laps.push(next);
    }
    let mut parts: Vec<F> = Vec::with_capacity(n + 1);
    for m in (0..=n).rev() {
        let j = n - m;
        let mut rest = laps[m].clone();
        for (k, fk) in parts.iter().enumerate() {
            rest.add_scaled(&fk.mul_norm_power(n - k - m), -r_coefficient(n, d, m, k));
        }
        parts.push(rest.scaled(1.0 / r_coefficient(n, d, m, j)));
    }
    let mut out = HarmonicDecomp { n, parts, residual: 0.0 };
    out.residual = out.reconstruct().max_coef_diff(f) / f.max_abs_coef().max(1.0);
    Ok(out)
}

/// Upper bound on `B_{2n}`, the constant with `‖f_{2k}‖_∞ ≤ B_{2n}‖f‖_∞` for
/// every form of degree `2n`: 2 for `n = 1`, 10 for `n = 2`,
/// `(2n)!·(1 + (2n)!)^n` beyond. `n = 0` gives 1 (the form is its own part).
pub fn b_constant(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => 10.0,
        _ => {
            let fact: f64 = (1..=2 * n).map(|i| i as f64).product();
            fact * libm::pow(1.0 + fact, n as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{sample_sphere, sampled_range};
    use alloc::vec;
    use proptest::prelude::*;

    fn x1_pow(d: usize, p: u32) -> Poly {
        let mut e = vec![0; d];
        e[0] = p;
        Poly::monomial(e, 1.0)
    }

    #[test]
    fn r_values() {
        assert_eq!(r_coefficient(2, 3, 2, 0), 120.0);
        assert_eq!(r_coefficient(2, 3, 1, 1), 14.0);
        assert_eq!(r_coefficient(2, 3, 1, 0), 20.0);
        assert_eq!(r_coefficient(5, 4, 0, 3), 1.0);
        assert_eq!(r_coefficient(2, 3, 2, 1), 0.0);
        // quartic coefficient on f_2 is 2d + 8
        for d in 2..10 {
            assert_eq!(r_coefficient(2, d, 1, 1), (2 * d + 8) as f64);
        }
    }

    #[test]
    fn quadratic_coordinate() {
        let h = decompose(&x1_pow(3, 2)).unwrap();
        assert!((h.parts[0].coef(&[0, 0, 0]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((h.parts[1].coef(&[2, 0, 0]) - 2.0 / 3.0).abs() < 1e-15);
        assert!((h.parts[1].coef(&[0, 2, 0]) + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn quartic_coordinate() {
        let h = decompose(&x1_pow(3, 4)).unwrap();
        assert!((h.parts[0].coef(&[0, 0, 0]) - 0.2).abs() < 1e-15);
        let f2 = Poly::from_terms(3, 2, [(vec![2, 0, 0], 4.0 / 7.0), (vec![0, 2, 0], -2.0 / 7.0), (vec![0, 0, 2], -2.0 / 7.0)]).unwrap();
        assert!(h.parts[1].max_coef_diff(&f2) < 1e-14);
        assert!(h.parts[1].laplacian().max_abs_coef() < 1e-14);
        assert!(h.parts[2].laplacian().max_abs_coef() < 1e-14);
        assert!(h.residual < 1e-15);
    }

    #[test]
    fn quartic_laplacian_coefficient_is_2d_plus_8() {
        // Δ(‖x‖² f₂) = (2d + 8) f₂ for harmonic quadratic f₂
        for d in 2..8 {
            let f2 = Poly::from_terms(d, 2, [(Exponent2::xy(d), 1.0)]).unwrap();
            let lhs = f2.mul_norm_power(1).laplacian();
            assert!(lhs.max_coef_diff(&f2.scaled((2 * d + 8) as f64)) < 1e-12);
        }
    }

    struct Exponent2;
    impl Exponent2 {
        fn xy(d: usize) -> Vec<u32> {
            let mut e = vec![0; d];
            e[0] = 1;
            e[1] = 1;
            e
        }
    }

    #[test]
    fn matrix_parts() {
        let mut f = MatPoly::zero(2, 2, 2);
        f.set(0, 0, x1_pow(2, 2)).unwrap();
        f.set(1, 1, Poly::monomial(vec![0, 2], 1.0)).unwrap();
        let h = decompose_matrix(&f).unwrap();
        let half = MatPoly::identity_times(&Poly::constant(2, 0.5), 2);
        assert!(h.parts[0].max_coef_diff(&half) < 1e-15);

        let mut c = MatPoly::zero(3, 2, 0);
        c.set(0, 1, Poly::constant(3, 0.7)).unwrap();
        c.set(1, 1, Poly::constant(3, -2.0)).unwrap();
        let h = decompose_matrix(&c).unwrap();
        assert_eq!(h.parts.len(), 1);
        assert_eq!(h.parts[0], c);
    }

    #[test]
    fn odd_degree_rejected() {
        assert!(matches!(decompose(&x1_pow(3, 3)), Err(Error::OddDegree(3))));
    }

    #[test]
    fn b_constants() {
        assert_eq!(b_constant(1), 2.0);
        assert_eq!(b_constant(2), 10.0);
        assert_eq!(b_constant(3), 720.0 * 721.0f64.powi(3));
    }

    pub(crate) fn random_form(d: usize, degree: usize, coefs: &[f64]) -> Poly {
        let mons = crate::poly::monomials(d, degree);
        Poly::from_terms(d, degree, mons.into_iter().zip(coefs.iter().cycle().copied())).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip(d in 2usize..=6, n in 0usize..=4, coefs in proptest::collection::vec(-1.0f64..1.0, 1..40)) {
            let f = random_form(d, 2 * n, &coefs);
            let h = decompose(&f).unwrap();
            prop_assert!(h.residual < 1e-9);
            prop_assert!(h.harmonicity_defect() < 1e-9);
            for (k, p) in h.parts.iter().enumerate() {
                prop_assert_eq!(p.degree(), 2 * k);
            }
        }

        #[test]
        fn projection_bounds(d in 2usize..=5, n in 1usize..=2, coefs in proptest::collection::vec(-1.0f64..1.0, 1..20)) {
            let f = random_form(d, 2 * n, &coefs);
            let h = decompose(&f).unwrap();
            let pts = sample_sphere(d, 2000, 11).unwrap();
            let (hi, lo) = sampled_range(&f, &pts);
            let sup = lo.abs().max(hi.abs());
            for (k, p) in h.parts.iter().enumerate() {
                let (phi, plo) = sampled_range(p, &pts);
                let psup = plo.abs().max(phi.abs());
                prop_assert!(psup <= b_constant(n) * sup + 1e-12);
                if k >= 1 {
                    prop_assert!(psup <= b_constant(n) * (hi - lo) / 2.0 + 1e-8);
                }
            }
        }
    }
}
