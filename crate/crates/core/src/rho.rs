//! Convergence-rate quantities.
//!
//! A unit vector `e ∈ ℝ^{ℓ+1}` defines the kernel `q(t) = Σ e_i p_i(t)` and,
//! through `φ = q²`, the Funk–Hecke multipliers `λ_{2k} = eᵀT[C_{2k}/C_{2k}(1)]e`
//! (with `λ_0 = ‖e‖² = 1`). The rate of a kernel is `Σ_{k=1..n} |λ_{2k}⁻¹ − 1|`;
//! `ρ_{2n}(d, ℓ)` is its minimum over `e`.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::gegenbauer::GegenbauerBasis;
use crate::harmonic::b_constant;
use crate::linalg::{norm, Matrix};
use crate::toeplitz::{build, lambda_max, Multiplier};

/// Default number of directions in the `ρ_4` sweep.
pub const DEFAULT_THETA_GRID: usize = 64;

/// A certificate kernel: its coefficient vector, the multipliers it induces
/// on the even harmonics up to degree `2n`, its rate and the slack
/// `δ = (B_{2n}/2)·rate`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub d: usize,
    pub ell: usize,
    pub n: usize,
    pub e: Vec<f64>,
    /// `λ_2, λ_4, …, λ_{2n}`.
    pub lambdas: Vec<f64>,
    /// `Σ |λ_{2k}⁻¹ − 1|`; infinite if some `λ_{2k} ≤ 0`.
    pub rho_value: f64,
    pub delta: f64,
}

impl KernelSpec {
    /// Normalizes `e` and computes its multipliers.
    pub fn from_vector(d: usize, ell: usize, n: usize, e: &[f64]) -> Result<Self> {
        if e.len() != ell + 1 {
            return Err(Error::DimensionMismatch { expected: ell + 1, found: e.len() });
        }
        let len = norm(e);
        if !(len > 0.0) || !len.is_finite() {
            return Err(invalid("kernel vector must be nonzero and finite"));
        }
        let e: Vec<f64> = e.iter().map(|x| x / len).collect();
        let lambdas = kernel_lambdas(d, ell, n, &e)?;
        Ok(Self::with_lambdas(d, ell, n, e, lambdas))
    }

    fn with_lambdas(d: usize, ell: usize, n: usize, e: Vec<f64>, lambdas: Vec<f64>) -> Self {
        let rho_value = rate(&lambdas);
        let delta = if n == 0 { 0.0 } else { b_constant(n) / 2.0 * rho_value };
        Self { d, ell, n, e, lambdas, rho_value, delta }
    }

    /// The kernel `q(t)` at `t`.
    pub fn q(&self, t: f64) -> f64 {
        let p = crate::gegenbauer::orthonormal_values(self.d, self.ell, t);
        self.e.iter().zip(p).map(|(a, b)| a * b).sum()
    }
}

/// `Σ |λ⁻¹ − 1|`, infinite when some `λ ≤ 0`.
pub fn rate(lambdas: &[f64]) -> f64 {
    lambdas.iter().map(|&l| if l > 0.0 { (1.0 / l - 1.0).abs() } else { f64::INFINITY }).sum()
}

/// `λ_{2k} = eᵀT[C_{2k}/C_{2k}(1)]e` for `k = 1..n`.
pub fn kernel_lambdas(d: usize, ell: usize, n: usize, e: &[f64]) -> Result<Vec<f64>> {
    let basis = GegenbauerBasis::new(d, ell + 2 * n)?;
    (1..=n)
        .map(|k| build(&basis, ell, &Multiplier::normalized_gegenbauer(d, 2 * k))?.quadratic_form(e))
        .collect()
}

fn check(d: usize, ell: usize) -> Result<()> {
    if d < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    if ell < 1 {
        return Err(invalid("ell must be at least 1"));
    }
    Ok(())
}

/// `ρ_2(d, ℓ) = 1/λ_max(T[C_2/C_2(1)]) − 1`, with the optimal kernel.
pub fn rho2(d: usize, ell: usize) -> Result<(f64, KernelSpec)> {
    check(d, ell)?;
    let basis = GegenbauerBasis::new(d, ell + 2)?;
    let (top, e) = build(&basis, ell, &Multiplier::normalized_gegenbauer(d, 2))?.lambda_max()?;
    if top <= 0.0 {
        return Err(Error::DegenerateMultiplier(top));
    }
    let spec = KernelSpec::with_lambdas(d, ell, 1, e, alloc::vec![top]);
    Ok((1.0 / top - 1.0, spec))
}

/// `ρ̃_{2n}(d, ℓ) = n − n·λ_max(T[h])`, `h = (1/n)Σ_{k=1..n} C_{2k}/C_{2k}(1)`.
pub fn rho_tilde(d: usize, ell: usize, n: usize) -> Result<(f64, KernelSpec)> {
    check(d, ell)?;
    if n < 1 {
        return Err(invalid("n must be at least 1"));
    }
    let basis = GegenbauerBasis::new(d, ell + 2 * n)?;
    let (top, e) = build(&basis, ell, &Multiplier::averaged_even(d, n))?.lambda_max()?;
    let lambdas = (1..=n)
        .map(|k| build(&basis, ell, &Multiplier::normalized_gegenbauer(d, 2 * k))?.quadratic_form(&e))
        .collect::<Result<Vec<_>>>()?;
    let value = (n as f64 - n as f64 * top).max(0.0);
    Ok((value, KernelSpec::with_lambdas(d, ell, n, e, lambdas)))
}

/// `ρ ≤ ρ̃/(1 − ρ̃)` for `ρ̃ < 1`.
pub fn rho_from_tilde(tilde: f64) -> Result<f64> {
    if !(tilde < 1.0) {
        return Err(Error::BoundVacuous(tilde));
    }
    if tilde < 0.0 {
        return Err(invalid("surrogate must be nonnegative"));
    }
    Ok(tilde / (1.0 - tilde))
}

struct Sweep {
    a: Matrix,
    b: Matrix,
}

impl Sweep {
    fn candidate(&self, theta: f64) -> Result<(f64, Vec<f64>, [f64; 2])> {
        let (c, s) = (libm::cos(theta), libm::sin(theta));
        let mut m = self.a.scaled(c);
        m.add_scaled(&self.b, s);
        let (_, u) = lambda_max(&m)?;
        let (l2, l4) = (self.a.quadratic_form(&u), self.b.quadratic_form(&u));
        Ok((rate(&[l2, l4]), u, [l2, l4]))
    }
}

/// `ρ_4(d, ℓ)`: the rate over `(λ_2, λ_4)` is decreasing in both
/// coordinates on `(0, 1]²`, so its minimum over the (convex) joint
/// numerical range of `A = T[C_2/C_2(1)]`, `B = T[C_4/C_4(1)]` sits on the
/// north-east boundary. That boundary is traced by top eigenvectors of
/// `cos θ·A + sin θ·B`, `θ ∈ [0, π/2]`: a grid sweep, then golden-section
/// refinement around the best grid point. The `ρ̃_4` kernel is also tried,
/// so the result never exceeds the surrogate's rate.
pub fn rho4(d: usize, ell: usize, theta_grid: usize) -> Result<(f64, KernelSpec)> {
    check(d, ell)?;
    if theta_grid < 8 {
        return Err(invalid("theta grid must have at least 8 directions"));
    }
    let basis = GegenbauerBasis::new(d, ell + 4)?;
    let sweep = Sweep {
        a: build(&basis, ell, &Multiplier::normalized_gegenbauer(d, 2))?.matrix().clone(),
        b: build(&basis, ell, &Multiplier::normalized_gegenbauer(d, 4))?.matrix().clone(),
    };
    let half_pi = core::f64::consts::FRAC_PI_2;
    let step = half_pi / theta_grid as f64;

    type Cand = (f64, Vec<f64>, [f64; 2]);
    fn consider(theta: f64, cand: Cand, best: &mut Option<(Cand, f64)>) {
        let better = match best {
            Some(((v, _, _), _)) => cand.0 < *v,
            None => cand.0.is_finite(),
        };
        if better {
            *best = Some((cand, theta));
        }
    }
    let mut best: Option<(Cand, f64)> = None;
    let mut thetas: Vec<f64> = (0..=theta_grid).map(|i| i as f64 * step).collect();
    thetas.push(half_pi / 2.0);
    for &theta in &thetas {
        consider(theta, sweep.candidate(theta)?, &mut best);
    }

    if let Some((_, best_theta)) = best {
        // golden-section search on [θ* − step, θ* + step]
        let g = (libm::sqrt(5.0) - 1.0) / 2.0;
        let (mut lo, mut hi) = ((best_theta - step).max(0.0), (best_theta + step).min(half_pi));
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let mut f1 = sweep.candidate(x1)?;
        let mut f2 = sweep.candidate(x2)?;
        while hi - lo > 1e-8 {
            if f1.0 <= f2.0 {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = sweep.candidate(x1)?;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = sweep.candidate(x2)?;
            }
        }
        consider(x1, f1, &mut best);
        consider(x2, f2, &mut best);
    }

    let (_, tilde) = rho_tilde(d, ell, 2)?;
    let l = [tilde.lambdas[0], tilde.lambdas[1]];
    consider(f64::NAN, (rate(&l), tilde.e, l), &mut best);

    match best {
        Some(((value, e, l), _)) => Ok((value, KernelSpec::with_lambdas(d, ell, 2, e, l.to_vec()))),
        None => Err(Error::DegenerateMultiplier(0.0)),
    }
}

/// One row of a rate table.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRow {
    pub d: usize,
    pub ell: usize,
    pub n: usize,
    pub rho2: Option<f64>,
    pub rho4: Option<f64>,
    pub rho_tilde: f64,
    /// Best available upper bound on `ρ_{2n}(d, ℓ)`.
    pub rho_bound: Option<f64>,
    pub spec: KernelSpec,
}

pub fn rate_row(d: usize, ell: usize, n: usize) -> Result<RateRow> {
    let (tilde, tilde_spec) = rho_tilde(d, ell, n)?;
    let from_tilde = rho_from_tilde(tilde).ok();
    let (rho2, rho4, direct) = match n {
        1 => {
            let (v, s) = rho2(d, ell)?;
            (Some(v), None, Some((v, s)))
        }
        2 => match rho4(d, ell, DEFAULT_THETA_GRID) {
            Ok((v, s)) => (None, Some(v), Some((v, s))),
            Err(Error::DegenerateMultiplier(_)) => (None, None, None),
            Err(e) => return Err(e),
        },
        _ => (None, None, None),
    };
    let (rho_bound, spec) = match (direct, from_tilde) {
        (Some((v, s)), Some(t)) if t < v => (Some(t), if v.is_finite() { s } else { tilde_spec }),
        (Some((v, s)), _) => (Some(v), s),
        (None, t) => (t, tilde_spec),
    };
    Ok(RateRow { d, ell, n, rho2, rho4, rho_tilde: tilde, rho_bound, spec })
}

/// Rows for every combination, ordered by `(d, ℓ, n)`.
pub fn rate_table(d_list: &[usize], ell_list: &[usize], n_list: &[usize]) -> Result<Vec<RateRow>> {
    let mut rows = Vec::new();
    for &d in d_list {
        for &ell in ell_list {
            for &n in n_list {
                rows.push(rate_row(d, ell, n)?);
            }
        }
    }
    rows.sort_by_key(|r| (r.d, r.ell, r.n));
    Ok(rows)
}
