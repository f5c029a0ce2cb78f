//! Sampling on `S^{d−1}` and multistart Riemannian gradient estimation of
//! extreme values of (matrix) polynomials on the sphere.
//!
//! The estimates are inner bounds only: `max_est` is a value actually
//! attained, hence never above the true maximum (and dually for `min_est`).

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::linalg::{dot, norm, symmetric_eigen};
use crate::poly::{MatPoly, Poly, SpherePoint};

pub const DEFAULT_RESTARTS: usize = 64;
pub const MAX_ITERATIONS: usize = 200;

/// `count` independent uniform points on `S^{d−1}` (normalized standard
/// Gaussians). The first `m` points do not depend on `count`.
pub fn sample_sphere(d: usize, count: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    if d == 0 || count == 0 {
        return Err(invalid("sample_sphere needs d >= 1 and count >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Ok(p) = SpherePoint::normalize(v) {
            out.push(p);
        }
    }
    Ok(out)
}

/// A function on the sphere with a Euclidean (super)gradient, to be
/// maximized. Minimization is handled by [`Negated`].
pub trait SphereObjective {
    fn dim(&self) -> usize;
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>);
    fn value(&self, x: &[f64]) -> f64 {
        self.value_and_gradient(x).0
    }
}

impl SphereObjective for Poly {
    fn dim(&self) -> usize {
        Poly::dim(self)
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.eval_with_gradient(x)
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.eval_unchecked(x)
    }
}

/// `λ_max(F(x))` with gradient `∇_x uᵀF(x)u` at the top eigenvector `u`.
impl SphereObjective for MatPoly {
    fn dim(&self) -> usize {
        MatPoly::dim(self)
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let m = self.eval_unchecked(x);
        match symmetric_eigen(&m) {
            Ok(eig) => {
                let (_, u) = eig.max();
                self.quadratic_form_with_gradient(x, &u)
            }
            Err(_) => (f64::NEG_INFINITY, alloc::vec![0.0; self.dim()]),
        }
    }
    fn value(&self, x: &[f64]) -> f64 {
        let m = self.eval_unchecked(x);
        symmetric_eigen(&m).map(|e| e.values[e.values.len() - 1]).unwrap_or(f64::NEG_INFINITY)
    }
}

/// `−f`, turning a maximizer into a minimizer.
pub struct Negated<'a, F: ?Sized>(pub &'a F);

impl<F: SphereObjective + ?Sized> SphereObjective for Negated<'_, F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (v, g) = self.0.value_and_gradient(x);
        (-v, g.into_iter().map(|t| -t).collect())
    }
    fn value(&self, x: &[f64]) -> f64 {
        -self.0.value(x)
    }
}

/// Smallest eigenvalue of a matrix polynomial, as a maximization target
/// of `−λ_min`.
struct NegMinEig<'a>(&'a MatPoly);

impl SphereObjective for NegMinEig<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let m = self.0.eval_unchecked(x);
        match symmetric_eigen(&m) {
            Ok(eig) => {
                let (_, u) = eig.min();
                let (v, g) = self.0.quadratic_form_with_gradient(x, &u);
                (-v, g.into_iter().map(|t| -t).collect())
            }
            Err(_) => (f64::NEG_INFINITY, alloc::vec![0.0; self.dim()]),
        }
    }
    fn value(&self, x: &[f64]) -> f64 {
        let m = self.0.eval_unchecked(x);
        symmetric_eigen(&m).map(|e| -e.values[0]).unwrap_or(f64::NEG_INFINITY)
    }
}

/// Result of a one-sided search.
#[derive(Debug, Clone)]
pub struct Ascent {
    pub value: f64,
    pub point: SpherePoint,
    /// False when the best restart hit the iteration cap before its
    /// Riemannian gradient vanished.
    pub converged: bool,
}

/// Two-sided estimate returned by [`sup_norm_sphere`].
#[derive(Debug, Clone)]
pub struct Extremes {
    pub max_est: f64,
    pub min_est: f64,
    pub argmax: SpherePoint,
    pub argmin: SpherePoint,
    pub converged: bool,
}

impl Extremes {
    pub fn sup_abs(&self) -> f64 {
        self.max_est.abs().max(self.min_est.abs())
    }
}

/// Multistart projected gradient ascent: each start is driven uphill along
/// the tangent gradient with a backtracking (Armijo) step, renormalizing
/// after every step.
pub fn maximize<F: SphereObjective + ?Sized>(f: &F, restarts: usize, seed: u64) -> Result<Ascent> {
    if restarts == 0 {
        return Err(invalid("restarts must be at least 1"));
    }
    let d = f.dim();
    if d == 1 {
        let (vp, vm) = (f.value(&[1.0]), f.value(&[-1.0]));
        let (value, c) = if vp >= vm { (vp, 1.0) } else { (vm, -1.0) };
        return Ok(Ascent { value, point: SpherePoint::new(alloc::vec![c])?, converged: true });
    }
    let starts = sample_sphere(d, restarts, seed)?;
    let mut best: Option<Ascent> = None;
    for s in starts {
        let run = ascend(f, s.into_inner());
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn ascend<F: SphereObjective + ?Sized>(f: &F, mut x: Vec<f64>) -> Ascent {
    let (mut fx, mut g) = f.value_and_gradient(&x);
    let mut step: f64 = 1.0;
    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let radial = dot(&g, &x);
        let tangent: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| gi - radial * xi).collect();
        let gnorm = norm(&tangent);
        if !(gnorm > 1e-12 * (1.0 + fx.abs())) {
            converged = true;
            break;
        }
        step = (step * 4.0).min(1.0 / gnorm);
        let mut accepted = None;
        while step * gnorm > 1e-15 {
            let trial: Vec<f64> = x.iter().zip(&tangent).map(|(xi, ti)| xi + step * ti).collect();
            let n = norm(&trial);
            let trial: Vec<f64> = trial.into_iter().map(|t| t / n).collect();
            let ft = f.value(&trial);
            if ft >= fx + 1e-4 * step * gnorm * gnorm {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((trial, _)) => {
                x = trial;
                let (v, grad) = f.value_and_gradient(&x);
                fx = v;
                g = grad;
            }
            None => {
                // no ascent direction at working precision
                converged = true;
                break;
            }
        }
    }
    let point = SpherePoint::normalize(x).expect("iterate stays on the sphere");
    Ascent { value: fx, point, converged }
}

fn combine(max: Ascent, min: Ascent) -> Extremes {
    Extremes {
        max_est: max.value,
        min_est: -min.value,
        argmax: max.point,
        argmin: min.point,
        converged: max.converged && min.converged,
    }
}

/// Estimated maximum and minimum of `p` on the sphere.
pub fn sup_norm_sphere(p: &Poly, restarts: usize, seed: u64) -> Result<Extremes> {
    let max = maximize(p, restarts, seed)?;
    let min = maximize(&Negated(p), restarts, seed.wrapping_add(1))?;
    Ok(combine(max, min))
}

/// Estimated largest and smallest eigenvalue of `F(x)` over the sphere.
pub fn sup_norm_sphere_matrix(f: &MatPoly, restarts: usize, seed: u64) -> Result<Extremes> {
    let max = maximize(f, restarts, seed)?;
    let min = maximize(&NegMinEig(f), restarts, seed.wrapping_add(1))?;
    Ok(combine(max, min))
}

/// Smallest eigenvalue of `F(x)` found by multistart descent.
pub fn min_eigenvalue_sphere(f: &MatPoly, restarts: usize, seed: u64) -> Result<Ascent> {
    let a = maximize(&NegMinEig(f), restarts, seed)?;
    Ok(Ascent { value: -a.value, ..a })
}

/// Max and min of `p` over a fixed point set.
pub fn sampled_range(p: &Poly, points: &[SpherePoint]) -> (f64, f64) {
    points.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), x| {
        let v = p.eval_unchecked(x.coords());
        (hi.max(v), lo.min(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn coord_power(d: usize, i: usize, k: u32) -> Poly {
        let mut e = vec![0; d];
        e[i] = k;
        Poly::monomial(e, 1.0)
    }

    #[test]
    fn samples_are_deterministic_and_unit() {
        let a = sample_sphere(3, 2, 7).unwrap();
        let b = sample_sphere(3, 2, 7).unwrap();
        assert_eq!(a, b);
        for p in sample_sphere(5, 50, 1).unwrap() {
            assert!((norm(p.coords()) - 1.0).abs() < 1e-12);
        }
        for p in sample_sphere(1, 4, 3).unwrap() {
            assert!(p.coords()[0] == 1.0 || p.coords()[0] == -1.0);
        }
        let long = sample_sphere(4, 10, 9).unwrap();
        let short = sample_sphere(4, 3, 9).unwrap();
        assert_eq!(&long[..3], &short[..]);
    }

    #[test]
    fn squared_coordinate_range() {
        let p = coord_power(3, 0, 2);
        let e = sup_norm_sphere(&p, 8, 0).unwrap();
        assert!((e.max_est - 1.0).abs() < 1e-10);
        assert!(e.min_est.abs() < 1e-10);
    }

    #[test]
    fn linear_form_square_peaks_at_v() {
        let v = [0.48, 0.6, 0.64];
        let p = Poly::squared_linear_form(&v);
        let e = sup_norm_sphere(&p, 8, 3).unwrap();
        assert!((e.max_est - 1.0).abs() < 1e-10);
        let x = e.argmax.coords();
        assert!((dot(x, &v).abs() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quartic_minimum_against_grid() {
        let p = coord_power(2, 0, 4).plus(&coord_power(2, 1, 4));
        let grid_min = (0..10_000)
            .map(|i| {
                let t = core::f64::consts::TAU * i as f64 / 10_000.0;
                p.eval(&[libm::cos(t), libm::sin(t)]).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        let e = sup_norm_sphere(&p, 16, 5).unwrap();
        assert!((e.min_est - grid_min).abs() < 1e-9);
        assert!((e.min_est - 0.5).abs() < 1e-10);
        let x = e.argmin.coords();
        assert!((x[0].abs() - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-5);
    }

    #[test]
    fn matrix_extremes() {
        let mut f = MatPoly::zero(2, 2, 2);
        f.set(0, 0, coord_power(2, 0, 2)).unwrap();
        f.set(1, 1, coord_power(2, 1, 2)).unwrap();
        let e = sup_norm_sphere_matrix(&f, 8, 0).unwrap();
        assert!((e.max_est - 1.0).abs() < 1e-10);
        assert!((e.min_est - 0.0).abs() < 1e-10);
        let m = min_eigenvalue_sphere(&f, 8, 0).unwrap();
        assert!(m.value.abs() < 1e-10);
    }

    #[test]
    fn rejects_zero_restarts() {
        assert!(sup_norm_sphere(&coord_power(2, 0, 2), 0, 0).is_err());
    }
}
