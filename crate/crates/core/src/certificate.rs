//! Kernel certificates of nonnegativity on the sphere.
//!
//! For a form `G` of degree `2n` with `0 ≤ G ≤ 1` on `S^{d−1}` and a kernel
//! `K = q(⟨x, y⟩)²`, the witness `H = K⁻¹(G + δ)` is computed harmonic by
//! harmonic: `H_{2k} = λ_{2k}⁻¹ (G + δ)_{2k}`. Whenever
//! `(B_{2n}/2)·Σ|λ_{2k}⁻¹ − 1| ≤ δ`, `H ≥ 0` on the sphere and
//! `G + δ = ∫ q(⟨x, y⟩)² H(y) dσ(y)` is a sum of squares of degree-`ℓ`
//! polynomials.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::gegenbauer::{gauss_rule, nodes_for_degree, GegenbauerBasis};
use crate::harmonic::{b_constant, decompose_form, Form, HarmonicDecomp};
use crate::linalg::norm;
use crate::poly::{MatPoly, Poly, SpherePoint};
use crate::rho::{kernel_lambdas, rate, rho2, rho4, rho_tilde, KernelSpec, DEFAULT_THETA_GRID};
use crate::sphere::{self, Ascent, Extremes, DEFAULT_RESTARTS};

pub const UNIT_TOL: f64 = 1e-10;
pub const LAMBDA_TOL: f64 = 1e-10;
pub const FUNK_HECKE_TOL: f64 = 1e-9;
pub const WITNESS_TOL: f64 = 1e-8;
pub const MARGIN_TOL: f64 = 1e-10;
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Forms that can be certified: scalar polynomials and symmetric matrix
/// polynomials (for which "≥ 0" means positive semidefinite).
pub trait Certifiable: Form {
    /// Estimated extreme values (extreme eigenvalues for matrices).
    fn extremes(&self, restarts: usize, seed: u64) -> Result<Extremes>;
    /// Estimated minimum (minimum eigenvalue for matrices).
    fn minimum(&self, restarts: usize, seed: u64) -> Result<Ascent>;
}

impl Certifiable for Poly {
    fn extremes(&self, restarts: usize, seed: u64) -> Result<Extremes> {
        sphere::sup_norm_sphere(self, restarts, seed)
    }
    fn minimum(&self, restarts: usize, seed: u64) -> Result<Ascent> {
        let a = sphere::maximize(&sphere::Negated(self), restarts, seed)?;
        Ok(Ascent { value: -a.value, ..a })
    }
}

impl Certifiable for MatPoly {
    fn extremes(&self, restarts: usize, seed: u64) -> Result<Extremes> {
        sphere::sup_norm_sphere_matrix(self, restarts, seed)
    }
    fn minimum(&self, restarts: usize, seed: u64) -> Result<Ascent> {
        sphere::min_eigenvalue_sphere(self, restarts, seed)
    }
}

/// `G = (F − m‖x‖^{2n})/(M − m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub m: f64,
    pub big_m: f64,
}

impl Normalization {
    pub fn apply<F: Form>(&self, f: &F) -> F {
        let mut shift = f.zero_like(0);
        shift.add_identity(1.0);
        let mut g = f.clone();
        g.add_scaled(&shift.mul_norm_power(f.degree() / 2), -self.m);
        g.scaled(1.0 / (self.big_m - self.m))
    }

    /// Affine map picked for an estimated range `[m, M]`. A (numerically)
    /// constant form gets the identity map when it already lies in `[0, 1]`
    /// and a unit-width window otherwise.
    pub fn for_range(m: f64, big_m: f64) -> Self {
        if big_m - m > 1e-12 * big_m.abs().max(1.0) {
            Self { m, big_m }
        } else if m >= 0.0 && big_m <= 1.0 {
            Self { m: 0.0, big_m: 1.0 }
        } else {
            Self { m, big_m: m + 1.0 }
        }
    }
}

/// Outcome of the four certificate checks.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    /// `|‖e‖ − 1|`.
    pub unit_defect: f64,
    /// Largest gap between stored and recomputed multipliers.
    pub lambda_defect: f64,
    /// Relative coefficient residual of `λ_{2k} H_{2k} = (G + δ)_{2k}`.
    pub funk_hecke_residual: f64,
    /// Estimated minimum (eigenvalue) of the witness on the sphere.
    pub witness_min: f64,
    pub witness_converged: bool,
    /// `δ − (B_{2n}/2)·Σ|λ_{2k}⁻¹ − 1|` with recomputed multipliers.
    pub margin: f64,
    pub shape_ok: bool,
    pub kernel_ok: bool,
    pub funk_hecke_ok: bool,
    pub witness_ok: bool,
    pub margin_ok: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<F> {
    pub spec: KernelSpec,
    pub delta: f64,
    pub normalization: Normalization,
    /// Harmonic parts of the witness `K⁻¹(G + δ)`.
    pub h: HarmonicDecomp<F>,
    pub verification: VerificationReport,
}

impl<F: Form> Certificate<F> {
    /// The witness as a single form (agrees with `Σ H_{2k}` on the sphere).
    pub fn witness(&self) -> F {
        self.h.reconstruct()
    }

    /// `K H = Σ λ_{2k} ‖x‖^{2(n−k)} H_{2k}`, which equals `G + δ` on the
    /// sphere.
    pub fn kernel_image(&self) -> F {
        let mut parts = self.h.clone();
        for (k, p) in parts.parts.iter_mut().enumerate().skip(1) {
            *p = p.scaled(self.spec.lambdas[k - 1]);
        }
        parts.reconstruct()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Replaces the slack `(B_{2n}/2)·ρ`.
    pub delta: Option<f64>,
}

impl Default for CertOptions {
    fn default() -> Self {
        Self { restarts: DEFAULT_RESTARTS, seed: 0, delta: None }
    }
}

fn kernel_for(d: usize, ell: usize, n: usize) -> Result<KernelSpec> {
    if n == 0 {
        let mut e = vec![0.0; ell + 1];
        e[0] = 1.0;
        return KernelSpec::from_vector(d, ell, 0, &e);
    }
    match n {
        1 => rho2(d, ell).map(|r| r.1),
        2 => match rho4(d, ell, DEFAULT_THETA_GRID) {
            Err(Error::DegenerateMultiplier(_)) => rho_tilde(d, ell, 2).map(|r| r.1),
            other => other.map(|r| r.1),
        },
        _ => rho_tilde(d, ell, n).map(|r| r.1),
    }
}

/// Builds a certificate for `F`, normalized to `0 ≤ G ≤ 1` with `bounds`
/// (estimated on the sphere when `None`).
pub fn build_certificate<F: Certifiable>(f: &F, ell: usize, bounds: Option<(f64, f64)>, opts: &CertOptions) -> Result<Certificate<F>> {
    if f.degree() % 2 == 1 {
        return Err(Error::OddDegree(f.degree()));
    }
    if ell == 0 {
        return Err(invalid("ell must be at least 1"));
    }
    let (d, n) = (f.dim(), f.degree() / 2);
    if d < 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let normalization = match bounds {
        Some((m, big_m)) => {
            if !(big_m > m) {
                return Err(invalid("bounds must satisfy m < M"));
            }
            Normalization { m, big_m }
        }
        None => {
            let ext = f.extremes(opts.restarts, opts.seed)?;
            Normalization::for_range(ext.min_est, ext.max_est)
        }
    };
    let g = normalization.apply(f);
    if bounds.is_some() {
        let low = g.minimum(opts.restarts, opts.seed)?.value;
        if low < -NORMALIZATION_TOL {
            return Err(Error::NotNormalized(low));
        }
    }

    let spec = kernel_for(d, ell, n)?;
    for (k, &l) in spec.lambdas.iter().enumerate() {
        if !(l > 1e-12) {
            return Err(Error::KernelNonInvertible { k: 2 * (k + 1), lambda: l });
        }
    }
    let delta = opts.delta.unwrap_or(spec.delta);

    let mut h = decompose_form(&g)?;
    h.parts[0].add_identity(delta);
    for (k, p) in h.parts.iter_mut().enumerate().skip(1) {
        *p = p.scaled(1.0 / spec.lambdas[k - 1]);
    }
    let placeholder = VerificationReport {
        unit_defect: 0.0,
        lambda_defect: 0.0,
        funk_hecke_residual: 0.0,
        witness_min: 0.0,
        witness_converged: false,
        margin: 0.0,
        shape_ok: false,
        kernel_ok: false,
        funk_hecke_ok: false,
        witness_ok: false,
        margin_ok: false,
        passed: false,
    };
    let mut cert = Certificate { spec, delta, normalization, h, verification: placeholder };
    cert.verification = verify_certificate(f, &cert, opts);
    Ok(cert)
}

/// Re-derives everything a certificate claims about `F`.
pub fn verify_certificate<F: Certifiable>(f: &F, cert: &Certificate<F>, opts: &CertOptions) -> VerificationReport {
    let spec = &cert.spec;
    let n = f.degree() / 2;
    let shape_ok = f.degree().is_multiple_of(2)
        && spec.d == f.dim()
        && spec.n == n
        && spec.lambdas.len() == n
        && spec.e.len() == spec.ell + 1
        && cert.h.n == n
        && cert.h.parts.len() == n + 1
        && cert.h.parts.iter().enumerate().all(|(k, p)| p.degree() == 2 * k && p.dim() == f.dim())
        && cert.normalization.big_m > cert.normalization.m;

    let mut report = VerificationReport {
        unit_defect: f64::INFINITY,
        lambda_defect: f64::INFINITY,
        funk_hecke_residual: f64::INFINITY,
        witness_min: f64::NEG_INFINITY,
        witness_converged: false,
        margin: f64::NEG_INFINITY,
        shape_ok,
        kernel_ok: false,
        funk_hecke_ok: false,
        witness_ok: false,
        margin_ok: false,
        passed: false,
    };
    if !shape_ok {
        return report;
    }

    // (1) kernel vector and multipliers
    report.unit_defect = (norm(&spec.e) - 1.0).abs();
    let lambdas = match kernel_lambdas(spec.d, spec.ell, n, &spec.e) {
        Ok(l) => l,
        Err(_) => return report,
    };
    report.lambda_defect = lambdas.iter().zip(&spec.lambdas).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    report.kernel_ok = report.unit_defect <= UNIT_TOL && report.lambda_defect <= LAMBDA_TOL;

    // (2) Funk–Hecke diagonal action
    let g = cert.normalization.apply(f);
    if let Ok(mut target) = decompose_form(&g) {
        target.parts[0].add_identity(cert.delta);
        let scale = target.parts.iter().map(Form::max_abs_coef).fold(1.0, f64::max);
        report.funk_hecke_residual = target
            .parts
            .iter()
            .zip(&cert.h.parts)
            .enumerate()
            .map(|(k, (t, hk))| {
                let lambda = if k == 0 { 1.0 } else { spec.lambdas[k - 1] };
                hk.scaled(lambda).max_coef_diff(t)
            })
            .fold(0.0, f64::max)
            / scale;
        report.funk_hecke_ok = report.funk_hecke_residual <= FUNK_HECKE_TOL;
    }

    // (3) witness positivity
    if let Ok(a) = cert.witness().minimum(opts.restarts, opts.seed.wrapping_add(17)) {
        report.witness_min = a.value;
        report.witness_converged = a.converged;
        report.witness_ok = a.value >= -WITNESS_TOL;
    }

    // (4) slack covers the kernel's rate
    let needed = if n == 0 { 0.0 } else { b_constant(n) / 2.0 * rate(&lambdas) };
    report.margin = cert.delta - needed;
    report.margin_ok = report.margin >= -MARGIN_TOL;

    report.passed = report.kernel_ok && report.funk_hecke_ok && report.witness_ok && report.margin_ok;
    report
}

/// Certified upper bound `p_min + (p_max − p_min)(1 + δ)` on the maximum,
/// given that `(p − p_min)/(p_max − p_min) + δ` is certified nonnegative
/// against the kernel.
pub fn certified_max_bound(p_min: f64, p_max: f64, delta: f64) -> f64 {
    p_max + delta * (p_max - p_min)
}

/// Funk–Hecke multipliers `λ_0 = 1, λ_2, …, λ_{2·max_k}` of the kernel
/// `t^{2ℓ}` (normalized to `λ_0 = 1`).
pub fn reznick_lambdas(d: usize, ell: usize, max_k: usize) -> Result<Vec<f64>> {
    if max_k > ell {
        return Err(invalid("need 2*ell >= 2*max_k"));
    }
    let basis = GegenbauerBasis::new(d, 2 * max_k)?;
    let rule = gauss_rule(d, nodes_for_degree(2 * ell + 2 * max_k))?;
    let mut raw = vec![0.0; max_k + 1];
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let c = basis.eval_upto(2 * max_k, t);
        let phi = w * libm::pow(t, 2.0 * ell as f64);
        for (k, r) in raw.iter_mut().enumerate() {
            *r += phi * c[2 * k];
        }
    }
    let base = raw[0];
    Ok(raw
        .iter()
        .enumerate()
        .map(|(k, r)| r / (base * basis.endpoint_value(2 * k).expect("within basis")))
        .collect())
}

/// Product rule on `S^{d−1}` for `d ∈ {2, 3, 4}`, exact up to the given
/// degree, with weights summing to 1. Points are `(t, √(1−t²)·s)` with `t`
/// from a Gauss rule for the marginal of `x_1` and `s` from the rule one
/// dimension down; the circle uses equispaced angles.
pub fn sphere_quadrature(d: usize, degree: usize) -> Result<(Vec<SpherePoint>, Vec<f64>)> {
    if !(2..=4).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if degree > 60 {
        return Err(invalid("quadrature degree must be at most 60"));
    }
    let (pts, w) = product_rule(d, degree)?;
    let pts = pts.into_iter().map(SpherePoint::normalize).collect::<Result<Vec<_>>>()?;
    Ok((pts, w))
}

fn product_rule(d: usize, degree: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if d == 2 {
        let m = degree + 1;
        let step = 2.0 * core::f64::consts::PI / m as f64;
        let pts = (0..m).map(|j| vec![libm::cos(j as f64 * step), libm::sin(j as f64 * step)]).collect();
        return Ok((pts, vec![1.0 / m as f64; m]));
    }
    let rule = gauss_rule(d, degree / 2 + 1)?;
    let (inner, inner_w) = product_rule(d - 1, degree)?;
    let mut pts = Vec::with_capacity(rule.nodes.len() * inner.len());
    let mut w = Vec::with_capacity(pts.capacity());
    for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let r = libm::sqrt((1.0 - t * t).max(0.0));
        for (s, &ws) in inner.iter().zip(&inner_w) {
            let mut x = Vec::with_capacity(d);
            x.push(t);
            x.extend(s.iter().map(|v| r * v));
            pts.push(x);
            w.push(wt * ws);
        }
    }
    Ok((pts, w))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coord(d: usize, i: usize, p: u32) -> Poly {
        let mut e = vec![0; d];
        e[i] = p;
        Poly::monomial(e, 1.0)
    }

    #[test]
    fn squared_linear_form() {
        let v = [0.6, 0.0, 0.8];
        let f = Poly::squared_linear_form(&v);
        for ell in [1usize, 3, 6] {
            let c = build_certificate(&f, ell, None, &CertOptions::default()).unwrap();
            assert!(c.verification.passed, "{:?}", c.verification);
            assert!(c.verification.witness_min >= -1e-8);
        }
    }

    #[test]
    fn constant_half() {
        let f = Poly::constant(3, 0.5);
        let c = build_certificate(&f, 4, None, &CertOptions::default()).unwrap();
        assert_eq!(c.delta, 0.0);
        assert_eq!(c.normalization, Normalization { m: 0.0, big_m: 1.0 });
        assert!(c.witness().max_coef_diff(&f) < 1e-15);
        assert!(c.verification.passed);
    }

    #[test]
    fn quartic_and_tampering() {
        let f = coord(3, 0, 4).plus(&coord(3, 1, 2).mul(&coord(3, 2, 2)).scaled(3.0)).plus(&coord(3, 2, 4).scaled(0.5));
        let opts = CertOptions::default();
        let c = build_certificate(&f, 12, None, &opts).unwrap();
        assert!(c.verification.passed, "{:?}", c.verification);
        assert!(c.verification.margin >= 0.0);

        let mut bad = c.clone();
        let exp = bad.h.parts[1].terms().next().unwrap().0.clone();
        bad.h.parts[1].add_term(exp, 1e-3);
        assert!(!verify_certificate(&f, &bad, &opts).funk_hecke_ok);

        let mut halved = c.clone();
        halved.delta /= 2.0;
        assert!(!verify_certificate(&f, &halved, &opts).margin_ok);
    }

    #[test]
    fn kernel_image_reproduces_shifted_form() {
        let mut f = MatPoly::zero(3, 2, 2);
        f.set(0, 0, coord(3, 0, 2)).unwrap();
        f.set(0, 1, coord(3, 0, 1).mul(&coord(3, 1, 1))).unwrap();
        f.set(1, 1, coord(3, 2, 2)).unwrap();
        let c = build_certificate(&f, 6, None, &CertOptions::default()).unwrap();
        assert!(c.verification.passed, "{:?}", c.verification);
        let mut g = c.normalization.apply(&f);
        let mut shift = g.zero_like(0);
        shift.add_identity(c.delta);
        g.add_scaled(&shift.mul_norm_power(1), 1.0);
        assert!(c.kernel_image().max_coef_diff(&g) < 1e-12);
    }

    #[test]
    fn user_bounds_checked() {
        let f = coord(3, 0, 2);
        assert!(matches!(
            build_certificate(&f, 4, Some((0.5, 1.0)), &CertOptions::default()),
            Err(Error::NotNormalized(_))
        ));
        let c = build_certificate(&f, 4, Some((0.0, 1.0)), &CertOptions::default()).unwrap();
        assert!(c.verification.passed);
        assert!(build_certificate(&coord(3, 0, 3), 4, None, &CertOptions::default()).is_err());
    }

    #[test]
    fn small_ell_cannot_reach_quartic_harmonics() {
        let f = coord(3, 0, 4);
        assert!(matches!(
            build_certificate(&f, 1, None, &CertOptions::default()),
            Err(Error::KernelNonInvertible { k: 4, .. })
        ));
    }

    #[test]
    fn certified_bound() {
        assert_eq!(certified_max_bound(0.0, 2.0, 0.25), 2.5);
    }

    #[test]
    fn reznick() {
        for d in 3..9 {
            for ell in [4usize, 10, 25] {
                let l = reznick_lambdas(d, ell, 3).unwrap();
                assert_eq!(l[0], 1.0);
                let expect = 2.0 * ell as f64 / (2.0 * ell as f64 + d as f64);
                assert!((l[1] - expect).abs() < 1e-12);
                assert!(l.iter().all(|&x| x > 0.0 && x <= 1.0));
            }
        }
        assert!(reznick_lambdas(3, 2, 3).is_err());
    }

    #[test]
    fn quadrature_moments() {
        for d in 2..=4 {
            let (p, w) = sphere_quadrature(d, 8).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let m2: f64 = p.iter().zip(&w).map(|(x, w)| w * x.coords()[0].powi(2)).sum();
            let m4: f64 = p.iter().zip(&w).map(|(x, w)| w * x.coords()[d - 1].powi(4)).sum();
            let df = d as f64;
            assert!((m2 - 1.0 / df).abs() < 1e-14);
            assert!((m4 - 3.0 / (df * (df + 2.0))).abs() < 1e-14);
        }
        assert!(sphere_quadrature(5, 4).is_err());
        assert!(sphere_quadrature(3, 61).is_err());
    }
}
