#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use spheresos_core::linalg::CMatrix;
use spheresos_core::poly::{monomials, MatPoly, Poly};

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Homogeneous form with i.i.d. Gaussian coefficients on every monomial.
pub fn random_form(rng: &mut ChaCha8Rng, d: usize, degree: usize) -> Poly {
    let terms: Vec<_> = monomials(d, degree).into_iter().map(|e| (e, gaussian(rng))).collect();
    Poly::from_terms(d, degree, terms).unwrap()
}

pub fn random_matpoly(rng: &mut ChaCha8Rng, d: usize, k: usize, degree: usize) -> MatPoly {
    let mut f = MatPoly::zero(d, k, degree);
    for i in 0..k {
        for j in i..k {
            f.set(i, j, random_form(rng, d, degree)).unwrap();
        }
    }
    f
}

pub fn coord(d: usize, i: usize, p: u32) -> Poly {
    let mut e = vec![0; d];
    e[i] = p;
    Poly::monomial(e, 1.0)
}

pub fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(gaussian(rng), gaussian(rng))).collect()
}

pub fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let v = random_complex(rng, n);
    let len: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / len).collect()
}

/// Sum of `rank` random rank-one projections (unnormalized).
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n);
    for _ in 0..rank {
        m = m.add(&CMatrix::outer(&random_complex(rng, n)));
    }
    m
}

/// Random separable state on `ℂ^{d_a} ⊗ ℂ^{d_b}` together with the matching
/// symmetric extension to `ℓ` copies of `B`.
pub fn random_separable(rng: &mut ChaCha8Rng, d_a: usize, d_b: usize, ell: usize, terms: usize) -> (CMatrix, CMatrix) {
    let weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = CMatrix::zeros(d_a * d_b);
    let mut ext = CMatrix::zeros(d_a * d_b.pow(ell as u32));
    for w in weights {
        let (x, y) = (random_unit(rng, d_a), random_unit(rng, d_b));
        let p = w / total;
        let mut v = x.clone();
        rho = rho.add(&CMatrix::outer(&kron(&v, &y)).scaled(p));
        for _ in 0..ell {
            v = kron(&v, &y);
        }
        ext = ext.add(&CMatrix::outer(&v).scaled(p));
    }
    (rho, ext)
}

pub fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Projector onto the maximally entangled state of `ℂ^d ⊗ ℂ^d`.
pub fn maxent(d: usize) -> CMatrix {
    let mut psi = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        psi[i * d + i] = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    CMatrix::outer(&psi)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
