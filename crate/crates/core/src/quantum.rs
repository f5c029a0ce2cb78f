//! Bipartite operators and the best-separable-state problem.
//!
//! Tensor products are ordered with the first subsystem most significant,
//! so `M[(i, j), (k, l)]` sits at row `i·d_B + j`, column `k·d_B + l`.
//! The Hermitian form of an operator is
//!
//! `p_M(x, y) = (x ⊗ y)† M (x ⊗ y) = Σ M_{ij,kl} x̄_i ȳ_j x_k y_l`,
//!
//! and `h_Sep(M)` is its maximum over unit `x`, `y`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::certificate::{build_certificate, CertOptions, Certificate};
use crate::error::{invalid, Error, Result};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, CMatrix};
use crate::poly::{MatPoly, Poly};

/// Largest tensor space handled by [`sym_projector`].
pub const MAX_SYM_SIZE: usize = 10_000;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const DPS_TOL: f64 = 1e-9;
pub const BLOCK_POSITIVITY_TOL: f64 = 1e-8;
pub const PSD_TOL: f64 = 1e-10;
pub const WITNESS_DISCREPANCY_TOL: f64 = 1e-9;
/// Relative inflation of the estimated `h_Sep` before certification.
pub const H_INFLATION: f64 = 1e-6;
pub const MAX_DOUBLINGS: usize = 20;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A Hermitian operator on `⊗_s ℂ^{dims[s]}` with named factors.
#[derive(Debug, Clone, PartialEq)]
pub struct QOperator {
    dims: Vec<usize>,
    labels: Vec<String>,
    matrix: CMatrix,
}

impl QOperator {
    pub fn new(dims: Vec<usize>, labels: Vec<String>, matrix: CMatrix) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(invalid("subsystem dimensions must be positive"));
        }
        if labels.len() != dims.len() {
            return Err(Error::LabelMismatch(format!("{} labels for {} subsystems", labels.len(), dims.len())));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::LabelMismatch(format!("duplicate label {l}")));
            }
        }
        let size: usize = dims.iter().product();
        if size != matrix.size() {
            return Err(Error::DimensionMismatch { expected: size, found: matrix.size() });
        }
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL * matrix.frobenius_norm().max(1.0) {
            return Err(invalid("operator is not Hermitian"));
        }
        Ok(Self { dims, labels, matrix })
    }

    /// Operator on `A ⊗ B`.
    pub fn bipartite(d_a: usize, d_b: usize, matrix: CMatrix) -> Result<Self> {
        Self::new(vec![d_a, d_b], vec!["A".to_string(), "B".to_string()], matrix)
    }

    /// Operator on `A ⊗ B1 ⊗ … ⊗ Bℓ`.
    pub fn extension(d_a: usize, d_b: usize, ell: usize, matrix: CMatrix) -> Result<Self> {
        let mut dims = vec![d_a];
        dims.extend(core::iter::repeat_n(d_b, ell));
        Self::new(dims, extension_labels(ell), matrix)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn size(&self) -> usize {
        self.matrix.size()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.dims.len()];
        for name in names {
            let i = self
                .labels
                .iter()
                .position(|l| l == name)
                .ok_or_else(|| Error::LabelMismatch(format!("unknown subsystem {name}")))?;
            mask[i] = true;
        }
        Ok(mask)
    }

    fn bipartite_dims(&self) -> Result<(usize, usize)> {
        match self.dims[..] {
            [a, b] => Ok((a, b)),
            _ => Err(Error::LabelMismatch("expected a bipartite operator".to_string())),
        }
    }

    /// `(x ⊗ y)† M (x ⊗ y)`.
    pub fn product_value(&self, x: &[Complex64], y: &[Complex64]) -> Result<f64> {
        let (da, db) = self.bipartite_dims()?;
        if x.len() != da || y.len() != db {
            return Err(Error::DimensionMismatch { expected: da + db, found: x.len() + y.len() });
        }
        Ok(self.matrix.sandwich(&kron_vec(x, y)).re)
    }
}

fn extension_labels(ell: usize) -> Vec<String> {
    let mut labels = vec!["A".to_string()];
    labels.extend((1..=ell).map(|i| format!("B{i}")));
    labels
}

pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

fn unit(v: &[Complex64]) -> Result<()> {
    let n = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit(n));
    }
    Ok(())
}

/// Mixed-radix digits of `index` (most significant first).
fn digits(mut index: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// `xx† ⊗ (yy†)^{⊗ℓ}` on `A ⊗ B1 ⊗ … ⊗ Bℓ`.
pub fn product_extension(x: &[Complex64], y: &[Complex64], ell: usize) -> Result<QOperator> {
    unit(x)?;
    unit(y)?;
    if ell == 0 {
        return Err(invalid("ell must be at least 1"));
    }
    let mut v = x.to_vec();
    for _ in 0..ell {
        v = kron_vec(&v, y);
    }
    QOperator::extension(x.len(), y.len(), ell, CMatrix::outer(&v))
}

/// Trace over every subsystem not named in `keep`.
pub fn partial_trace(op: &QOperator, keep: &[&str]) -> Result<QOperator> {
    if keep.is_empty() {
        return Err(Error::LabelMismatch("must keep at least one subsystem".to_string()));
    }
    let mask = op.positions(keep)?;
    let dims = &op.dims;
    let kept_dims: Vec<usize> = dims.iter().zip(&mask).filter(|(_, &k)| k).map(|(&d, _)| d).collect();
    let traced_dims: Vec<usize> = dims.iter().zip(&mask).filter(|(_, &k)| !k).map(|(&d, _)| d).collect();
    let split = |i: usize| {
        let dg = digits(i, dims);
        let kept: Vec<usize> = dg.iter().zip(&mask).filter(|(_, &k)| k).map(|(&x, _)| x).collect();
        let traced: Vec<usize> = dg.iter().zip(&mask).filter(|(_, &k)| !k).map(|(&x, _)| x).collect();
        (compose(&kept, &kept_dims), compose(&traced, &traced_dims))
    };
    let parts: Vec<(usize, usize)> = (0..op.size()).map(split).collect();
    let mut out = CMatrix::zeros(kept_dims.iter().product());
    for (r, &(kr, tr)) in parts.iter().enumerate() {
        for (c, &(kc, tc)) in parts.iter().enumerate() {
            if tr == tc {
                out[(kr, kc)] += op.matrix[(r, c)];
            }
        }
    }
    let labels = op.labels.iter().zip(&mask).filter(|(_, &k)| k).map(|(l, _)| l.clone()).collect();
    QOperator::new(kept_dims, labels, out)
}

/// Transpose on the named tensor factors.
pub fn partial_transpose(op: &QOperator, subset: &[&str]) -> Result<QOperator> {
    let mask = op.positions(subset)?;
    let dims = &op.dims;
    let n = op.size();
    let all: Vec<Vec<usize>> = (0..n).map(|i| digits(i, dims)).collect();
    let mut out = CMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            let (mut rr, mut cc) = (all[r].clone(), all[c].clone());
            for (s, &m) in mask.iter().enumerate() {
                if m {
                    core::mem::swap(&mut rr[s], &mut cc[s]);
                }
            }
            out[(r, c)] = op.matrix[(compose(&rr, dims), compose(&cc, dims))];
        }
    }
    QOperator::new(dims.clone(), op.labels.clone(), out)
}

/// Orthogonal projector onto `Sym^ℓ(ℂ^d)`: the average of the `ℓ!`
/// permutation operators. Entry `(r, c)` is nonzero exactly when the digit
/// strings of `r` and `c` are rearrangements of each other, and then equals
/// `∏_v m_v! / ℓ!` with `m_v` the multiplicities.
pub fn sym_projector(d: usize, ell: usize) -> Result<QOperator> {
    if d == 0 || ell == 0 {
        return Err(invalid("d and ell must be at least 1"));
    }
    let size = (0..ell).try_fold(1usize, |acc, _| acc.checked_mul(d).filter(|&s| s <= MAX_SYM_SIZE));
    let size = size.ok_or(Error::SizeOverflow(libm::pow(d as f64, ell as f64) as usize))?;
    let dims = vec![d; ell];
    let counts: Vec<Vec<usize>> = (0..size)
        .map(|i| {
            let mut c = vec![0; d];
            for x in digits(i, &dims) {
                c[x] += 1;
            }
            c
        })
        .collect();
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    let ell_fact = fact(ell);
    let mut out = CMatrix::zeros(size);
    for r in 0..size {
        for c in 0..size {
            if counts[r] == counts[c] {
                let stab: f64 = counts[r].iter().map(|&m| fact(m)).product();
                out[(r, c)] = Complex64::new(stab / ell_fact, 0.0);
            }
        }
    }
    QOperator::new(dims, (1..=ell).map(|i| format!("B{i}")).collect(), out)
}

/// Margins of the DPS conditions; each check passes at `≥ −DPS_TOL`.
#[derive(Debug, Clone, PartialEq)]
pub struct DpsReport {
    /// Smallest eigenvalue of the extension.
    pub positivity: f64,
    /// `−‖tr_{B2..Bℓ} ext − ρ‖_F`.
    pub reduction: f64,
    /// `−‖(I ⊗ Π) ext (I ⊗ Π) − ext‖_F`.
    pub symmetry: f64,
    /// Smallest eigenvalue after transposing `B1..Bs`, for `s = 1..ℓ`.
    pub ppt: Vec<f64>,
    pub positivity_ok: bool,
    pub reduction_ok: bool,
    pub symmetry_ok: bool,
    pub ppt_ok: bool,
    pub passed: bool,
}

/// Checks that `ext` on `A ⊗ B1..Bℓ` is a symmetric PPT extension of `rho`.
pub fn check_dps_conditions(ext: &QOperator, rho: &QOperator) -> Result<DpsReport> {
    let (da, db) = rho.bipartite_dims()?;
    let ell = ext.dims.len() - 1;
    if ell == 0 || ext.dims[0] != da || ext.dims[1..].iter().any(|&d| d != db) {
        return Err(Error::LabelMismatch("extension dims do not match the state".to_string()));
    }
    let ext = QOperator::new(ext.dims.clone(), extension_labels(ell), ext.matrix.clone())?;

    let positivity = ext.min_eigenvalue()?;
    let reduced = partial_trace(&ext, &["A", "B1"])?;
    let reduction = -reduced.matrix.sub(&rho.matrix).frobenius_norm();

    let pi = CMatrix::identity(da).kron(sym_projector(db, ell)?.matrix());
    let symmetry = -pi.matmul(&ext.matrix).matmul(&pi).sub(&ext.matrix).frobenius_norm();

    let labels = extension_labels(ell);
    let ppt = (1..=ell)
        .map(|s| {
            let subset: Vec<&str> = labels[1..=s].iter().map(String::as_str).collect();
            partial_transpose(&ext, &subset)?.min_eigenvalue()
        })
        .collect::<Result<Vec<_>>>()?;

    let ok = |v: f64| v >= -DPS_TOL;
    let (positivity_ok, reduction_ok, symmetry_ok) = (ok(positivity), ok(reduction), ok(symmetry));
    let ppt_ok = ppt.iter().all(|&v| ok(v));
    Ok(DpsReport {
        positivity,
        reduction,
        symmetry,
        ppt,
        positivity_ok,
        reduction_ok,
        symmetry_ok,
        ppt_ok,
        passed: positivity_ok && reduction_ok && symmetry_ok && ppt_ok,
    })
}

/// `A(y)` with `x† A(y) x = p_M(x, y)`: `A_{ik} = Σ_{jl} M_{ij,kl} ȳ_j y_l`.
fn a_of_y(m: &CMatrix, da: usize, db: usize, y: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(da, |i, k| {
        let mut s = ZERO;
        for j in 0..db {
            for l in 0..db {
                s += m[(i * db + j, k * db + l)] * y[j].conj() * y[l];
            }
        }
        s
    })
}

/// `B(x)` with `y† B(x) y = p_M(x, y)`: `B_{jl} = Σ_{ik} M_{ij,kl} x̄_i x_k`.
fn b_of_x(m: &CMatrix, da: usize, db: usize, x: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(db, |j, l| {
        let mut s = ZERO;
        for i in 0..da {
            for k in 0..da {
                s += m[(i * db + j, k * db + l)] * x[i].conj() * x[k];
            }
        }
        s
    })
}

fn top(m: &CMatrix) -> Result<(f64, Vec<Complex64>)> {
    let eig = hermitian_eigen(m)?;
    let k = eig.values.len() - 1;
    Ok((eig.values[k], eig.vectors[k].clone()))
}

pub(crate) fn random_complex(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect()
}

fn normalized(v: Vec<Complex64>) -> Vec<Complex64> {
    let n = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum());
    v.into_iter().map(|z| z / n).collect()
}

/// Best product state found: a lower bound on `h_Sep(M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SepEstimate {
    pub value: f64,
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

/// Alternating maximization of `p_M`: with `y` fixed the best `x` is a top
/// eigenvector of `A(y)`, and symmetrically for `y`.
pub fn hsep_lower(m: &QOperator, restarts: usize, seed: u64) -> Result<SepEstimate> {
    let (da, db) = m.bipartite_dims()?;
    if restarts == 0 {
        return Err(invalid("restarts must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<SepEstimate> = None;
    for _ in 0..restarts {
        let mut y = normalized(random_complex(&mut rng, db));
        let (mut value, mut x) = top(&a_of_y(&m.matrix, da, db, &y))?;
        for _ in 0..500 {
            let (_, ny) = top(&b_of_x(&m.matrix, da, db, &x))?;
            y = ny;
            let (nv, nx) = top(&a_of_y(&m.matrix, da, db, &y))?;
            x = nx;
            let stalled = nv - value <= 1e-12 * value.abs().max(1.0);
            value = value.max(nv);
            if stalled {
                break;
            }
        }
        let value = m.matrix.sandwich(&kron_vec(&x, &y)).re;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(SepEstimate { value, x, y });
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Smallest `p_M(x, y)` found over product states.
pub fn block_minimum(m: &QOperator, restarts: usize, seed: u64) -> Result<f64> {
    let neg = QOperator { dims: m.dims.clone(), labels: m.labels.clone(), matrix: m.matrix.scaled(-1.0) };
    Ok(-hsep_lower(&neg, restarts, seed)?.value)
}

/// The real matrix polynomial `P̃(ỹ)` of size `2d_A` in `ỹ = (Re y, Im y)`
/// with `x̃ᵀ P̃(ỹ) x̃ = (x ⊗ y)† M (x ⊗ y)`, `x̃ = (Re x, Im x)`. Writing
/// `A(y) = R + iS`, `P̃ = [[R, −S], [S, R]]`.
pub fn realify(m: &QOperator) -> Result<MatPoly> {
    let (da, db) = m.bipartite_dims()?;
    let nv = 2 * db;
    let quad = |a: usize, b: usize| {
        let mut e = vec![0u32; nv];
        e[a] += 1;
        e[b] += 1;
        e
    };
    let mut re = vec![vec![Poly::zero(nv, 2); da]; da];
    let mut im = vec![vec![Poly::zero(nv, 2); da]; da];
    for i in 0..da {
        for k in 0..da {
            for j in 0..db {
                for l in 0..db {
                    let z = m.matrix[(i * db + j, k * db + l)];
                    if z == ZERO {
                        continue;
                    }
                    // ȳ_j y_l = c_j c_l + e_j e_l + i(c_j e_l − e_j c_l)
                    let (cj, ej, cl, el) = (j, db + j, l, db + l);
                    let sym = [(quad(cj, cl), 1.0), (quad(ej, el), 1.0)];
                    let anti = [(quad(cj, el), 1.0), (quad(ej, cl), -1.0)];
                    for (e, s) in &sym {
                        re[i][k].add_term(e.clone(), z.re * s);
                        im[i][k].add_term(e.clone(), z.im * s);
                    }
                    for (e, s) in &anti {
                        re[i][k].add_term(e.clone(), -z.im * s);
                        im[i][k].add_term(e.clone(), z.re * s);
                    }
                }
            }
        }
    }
    let mut out = MatPoly::zero(nv, 2 * da, 2);
    for p in 0..2 * da {
        for q in p..2 * da {
            let (i, k) = (p % da, q % da);
            let entry = match (p < da, q < da) {
                (true, true) | (false, false) => re[i][k].clone(),
                (true, false) => im[i][k].scaled(-1.0),
                (false, true) => im[i][k].clone(),
            };
            out.set(p, q, entry)?;
        }
    }
    Ok(out)
}

/// `x̃ = (Re x, Im x)`.
pub fn realify_vector(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|z| z.re).chain(x.iter().map(|z| z.im)).collect()
}

/// Certified sandwich `h_lower ≤ h_Sep(M) ≤ h_certified_upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapCertificate {
    pub h_lower: f64,
    /// The level `ĥ` at which `(ĥ‖ỹ‖²I − P̃)/ĥ` was certified.
    pub h_hat: f64,
    pub h_certified_upper: f64,
    pub doublings: usize,
    pub cert: Certificate<MatPoly>,
}

fn try_level(p: &MatPoly, h: f64, ell: usize, opts: &CertOptions) -> Option<Certificate<MatPoly>> {
    let mut f = MatPoly::identity_times(&Poly::norm_power(p.dim(), 1), p.size());
    f.add_scaled(p, -1.0 / h);
    match build_certificate(&f, ell, Some((0.0, 1.0)), opts) {
        Ok(c) if c.verification.passed => Some(c),
        _ => None,
    }
}

/// Bounds `h_Sep(M)` from both sides. The lower end comes from
/// [`hsep_lower`]; the upper end certifies `ĥ‖ỹ‖²I − P̃` on the sphere
/// `S^{2d_B−1}` with a degree-`ℓ` kernel, giving `h_Sep ≤ ĥ(1 + δ)`. The
/// level starts just above the lower estimate; if it fails to certify
/// (the estimate was short of `h_Sep`), it is doubled until it does and then
/// bisected back down.
pub fn bss_gap_certificate(m: &QOperator, ell: usize, restarts: usize, seed: u64) -> Result<GapCertificate> {
    if ell < 2 {
        return Err(invalid("ell must be at least 2"));
    }
    let low = block_minimum(m, restarts, seed.wrapping_add(1))?;
    if low < -BLOCK_POSITIVITY_TOL {
        return Err(Error::NotBlockPositive(low));
    }
    let h_lower = hsep_lower(m, restarts, seed)?.value;
    if !(h_lower > 0.0) {
        return Err(invalid("operator vanishes on product states"));
    }
    let p = realify(m)?;
    let opts = CertOptions { seed, ..CertOptions::default() };

    let mut h = h_lower * (1.0 + H_INFLATION);
    let mut doublings = 0;
    let (mut failed, mut passed) = (None, try_level(&p, h, ell, &opts));
    while passed.is_none() {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::GapSearchExhausted(doublings));
        }
        failed = Some(h);
        h *= 2.0;
        doublings += 1;
        passed = try_level(&p, h, ell, &opts);
    }
    let mut cert = passed.expect("loop exits with a certificate");
    if let Some(mut lo) = failed {
        let mut hi = h;
        while hi - lo > H_INFLATION * hi {
            let mid = 0.5 * (lo + hi);
            match try_level(&p, mid, ell, &opts) {
                Some(c) => {
                    hi = mid;
                    cert = c;
                }
                None => lo = mid,
            }
        }
        h = hi;
    }
    Ok(GapCertificate { h_lower, h_hat: h, h_certified_upper: h * (1.0 + cert.delta), doublings, cert })
}

/// Number of monomials `x_i x̄_k y^α ȳ^β` (`|α| = |β| = ℓ`) a bidegree
/// `(1,1;ℓ,ℓ)` Hermitian form can carry.
pub fn monomial_count(d_a: usize, d_b: usize, ell: usize) -> usize {
    let sym = crate::gegenbauer::binomial(d_b + ell - 1, ell) as usize;
    d_a * d_a * sym * sym
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub samples: usize,
    /// Largest `|lhs − rhs| / max(1, |lhs|)` over the samples.
    pub max_discrepancy: f64,
    /// Smallest eigenvalue of each `W_s`.
    pub min_eigenvalues: Vec<f64>,
    /// Indices `s` with `W_s` not positive semidefinite.
    pub non_psd: Vec<usize>,
    pub passed: bool,
}

/// Compares `‖y‖^{2(ℓ−1)} p_M(x, y)` with
/// `Σ_s v_s† W_s v_s`, `v_s = x ⊗ ȳ^{⊗s} ⊗ y^{⊗(ℓ−s)}`, at random
/// (unnormalized) complex Gaussian points.
pub fn verify_rsos_witness(m: &QOperator, w: &[QOperator], samples: usize, seed: u64) -> Result<WitnessReport> {
    let (da, db) = m.bipartite_dims()?;
    if w.len() < 2 {
        return Err(invalid("need W_0, …, W_ℓ with ℓ >= 1"));
    }
    let ell = w.len() - 1;
    let size = da * (0..ell).map(|_| db).product::<usize>();
    for ws in w {
        if ws.size() != size || ws.dims[0] != da || ws.dims[1..].iter().any(|&d| d != db) || ws.dims.len() != ell + 1 {
            return Err(Error::DimensionMismatch { expected: size, found: ws.size() });
        }
    }
    let min_eigenvalues = w.iter().map(QOperator::min_eigenvalue).collect::<Result<Vec<_>>>()?;
    let non_psd: Vec<usize> = (0..=ell).filter(|&s| min_eigenvalues[s] < -PSD_TOL).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_discrepancy: f64 = 0.0;
    for _ in 0..samples {
        let x = random_complex(&mut rng, da);
        let y = random_complex(&mut rng, db);
        let ybar: Vec<Complex64> = y.iter().map(|z| z.conj()).collect();
        let ny2: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        let lhs = libm::pow(ny2, (ell - 1) as f64) * m.matrix.sandwich(&kron_vec(&x, &y)).re;
        let mut rhs = 0.0;
        for (s, ws) in w.iter().enumerate() {
            let mut v = x.clone();
            for t in 0..ell {
                v = kron_vec(&v, if t < s { &ybar } else { &y });
            }
            rhs += ws.matrix.sandwich(&v).re;
        }
        max_discrepancy = max_discrepancy.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    Ok(WitnessReport {
        samples,
        max_discrepancy,
        passed: non_psd.is_empty() && max_discrepancy <= WITNESS_DISCREPANCY_TOL,
        min_eigenvalues,
        non_psd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn maxent(d: usize) -> QOperator {
        let mut psi = vec![ZERO; d * d];
        for i in 0..d {
            psi[i * d + i] = c(1.0 / libm::sqrt(d as f64));
        }
        QOperator::bipartite(d, d, CMatrix::outer(&psi)).unwrap()
    }

    fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        normalized(random_complex(rng, n))
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for _ in 0..rank {
            m = m.add(&CMatrix::outer(&random_complex(rng, n)));
        }
        m
    }

    #[test]
    fn product_extension_and_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (x, y) = (random_unit(&mut rng, 2), random_unit(&mut rng, 3));
        let e1 = product_extension(&x, &y, 1).unwrap();
        let direct = CMatrix::outer(&x).kron(&CMatrix::outer(&y));
        assert!(e1.matrix().sub(&direct).frobenius_norm() < 1e-14);
        let e3 = product_extension(&x, &y, 3).unwrap();
        assert!((e3.trace() - 1.0).abs() < 1e-13);
        let red = partial_trace(&e3, &["A", "B1"]).unwrap();
        assert!(red.matrix().sub(&direct).frobenius_norm() < 1e-13);
        let only_a = partial_trace(&e3, &["A"]).unwrap();
        assert!(only_a.matrix().sub(&CMatrix::outer(&x)).frobenius_norm() < 1e-13);
        assert!(product_extension(&[c(2.0)], &y, 1).is_err());
        assert!(partial_trace(&e3, &["C"]).is_err());
        assert!(partial_trace(&e3, &[]).is_err());
    }

    #[test]
    fn trace_of_product_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_psd(&mut rng, 2, 2);
        let b = random_psd(&mut rng, 3, 1);
        let op = QOperator::bipartite(2, 3, a.kron(&b)).unwrap();
        let ta = partial_trace(&op, &["A"]).unwrap();
        assert!(ta.matrix().sub(&a.scaled(b.trace().re)).frobenius_norm() < 1e-12);
        assert!((ta.trace() - op.trace()).abs() < 1e-12);
    }

    #[test]
    fn transposes() {
        let m = maxent(2);
        let t = partial_transpose(&m, &["B"]).unwrap();
        let ev = t.eigenvalues().unwrap();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10);
        }
        let back = partial_transpose(&t, &["B"]).unwrap();
        assert_eq!(back, m);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut rho = CMatrix::zeros(6);
        for _ in 0..4 {
            let (x, y) = (random_unit(&mut rng, 2), random_unit(&mut rng, 3));
            rho = rho.add(&CMatrix::outer(&kron_vec(&x, &y)).scaled(0.25));
        }
        let rho = QOperator::bipartite(2, 3, rho).unwrap();
        assert!(partial_transpose(&rho, &["B"]).unwrap().min_eigenvalue().unwrap() >= -1e-10);
    }

    #[test]
    fn symmetric_projector() {
        for d in 1..=3 {
            for ell in 1..=4 {
                let p = sym_projector(d, ell).unwrap();
                let rank = p.trace();
                let expect = crate::gegenbauer::binomial(ell + d - 1, ell);
                assert!((rank - expect).abs() < 1e-12);
                assert!(p.matrix().matmul(p.matrix()).sub(p.matrix()).frobenius_norm() < 1e-12);
                assert!(p.matrix().hermiticity_defect() == 0.0);
                let ev = p.eigenvalues().unwrap();
                assert_eq!(ev.iter().filter(|&&v| v > 0.5).count() as f64, expect);
            }
        }
        assert_eq!(sym_projector(2, 2).unwrap().trace(), 3.0);
        let id = sym_projector(3, 1).unwrap();
        assert_eq!(id.matrix(), &CMatrix::identity(3));
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y = random_unit(&mut rng, 2);
        let v = kron_vec(&kron_vec(&y, &y), &y);
        let pv = sym_projector(2, 3).unwrap().matrix().mul_vec(&v);
        assert!(pv.iter().zip(&v).all(|(a, b)| (a - b).norm() < 1e-14));
        assert!(matches!(sym_projector(10, 5), Err(Error::SizeOverflow(_))));
    }

    #[test]
    fn dps_conditions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ell = 3;
        let mut ext = CMatrix::zeros(2 * 8);
        let mut rho = CMatrix::zeros(4);
        for _ in 0..3 {
            let (x, y) = (random_unit(&mut rng, 2), random_unit(&mut rng, 2));
            let p: f64 = rng.random_range(0.1..1.0);
            ext = ext.add(&product_extension(&x, &y, ell).unwrap().matrix().scaled(p));
            rho = rho.add(&CMatrix::outer(&kron_vec(&x, &y)).scaled(p));
        }
        let ext = QOperator::extension(2, 2, ell, ext).unwrap();
        let rho = QOperator::bipartite(2, 2, rho).unwrap();
        let r = check_dps_conditions(&ext, &rho).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.ppt.len(), ell);

        // one B factor swapped for another state
        let (x, y, z) = (random_unit(&mut rng, 2), random_unit(&mut rng, 2), random_unit(&mut rng, 2));
        let bad = QOperator::extension(2, 2, 2, CMatrix::outer(&kron_vec(&kron_vec(&x, &z), &y))).unwrap();
        let rho = QOperator::bipartite(2, 2, CMatrix::outer(&kron_vec(&x, &y))).unwrap();
        let r = check_dps_conditions(&bad, &rho).unwrap();
        assert!(!r.reduction_ok && !r.symmetry_ok && !r.passed);
    }

    #[test]
    fn hsep_examples() {
        let id = QOperator::bipartite(2, 3, CMatrix::identity(6)).unwrap();
        assert!((hsep_lower(&id, 4, 0).unwrap().value - 1.0).abs() < 1e-12);
        let h = hsep_lower(&maxent(2), 8, 0).unwrap();
        assert!((h.value - 0.5).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (x, y) = (random_unit(&mut rng, 3), random_unit(&mut rng, 2));
        let r1 = QOperator::bipartite(3, 2, CMatrix::outer(&kron_vec(&x, &y))).unwrap();
        assert!((hsep_lower(&r1, 4, 0).unwrap().value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn realified_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let raw = random_psd(&mut rng, 6, 3);
        let skew = CMatrix::from_fn(6, |i, j| Complex64::new(0.0, (i as f64) - (j as f64)));
        let m = QOperator::bipartite(2, 3, raw.add(&skew)).unwrap();
        let p = realify(&m).unwrap();
        assert_eq!((p.dim(), p.size(), p.degree()), (6, 4, 2));
        for _ in 0..100 {
            let (x, y) = (random_complex(&mut rng, 2), random_complex(&mut rng, 3));
            let lhs = m.matrix().sandwich(&kron_vec(&x, &y)).re;
            let rhs = p.eval(&realify_vector(&y)).unwrap().quadratic_form(&realify_vector(&x));
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
        }
        let id = realify(&QOperator::bipartite(2, 2, CMatrix::identity(4)).unwrap()).unwrap();
        let expect = MatPoly::identity_times(&Poly::norm_power(4, 1), 4);
        assert!(id.max_coef_diff(&expect) < 1e-15);
    }

    #[test]
    fn gap_certificate_identity_and_maxent() {
        let id = QOperator::bipartite(2, 2, CMatrix::identity(4)).unwrap();
        let g = bss_gap_certificate(&id, 8, 4, 0).unwrap();
        assert!((g.h_lower - 1.0).abs() < 1e-12);
        assert!(g.cert.verification.passed);
        assert!(g.h_certified_upper >= 1.0);

        let g = bss_gap_certificate(&maxent(2), 16, 8, 0).unwrap();
        assert!((g.h_lower - 0.5).abs() < 1e-6);
        assert!(g.h_lower <= 0.5 + 1e-9 && 0.5 <= g.h_certified_upper);
        let (rho2, _) = crate::rho::rho2(4, 16).unwrap();
        assert!((g.h_certified_upper - g.h_hat * (1.0 + rho2)).abs() < 1e-12);

        let neg = QOperator::bipartite(2, 2, CMatrix::identity(4).scaled(-1.0)).unwrap();
        assert!(matches!(bss_gap_certificate(&neg, 8, 4, 0), Err(Error::NotBlockPositive(_))));
    }

    #[test]
    fn rsos_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = random_psd(&mut rng, 4, 2);
        let q = random_psd(&mut rng, 4, 2);
        let qop = QOperator::bipartite(2, 2, q.clone()).unwrap();
        let qt = partial_transpose(&qop, &["B"]).unwrap();
        let m = QOperator::bipartite(2, 2, p.add(qt.matrix())).unwrap();
        let w = [QOperator::extension(2, 2, 1, p).unwrap(), QOperator::extension(2, 2, 1, q).unwrap()];
        let samples = 10 * monomial_count(2, 2, 1);
        let r = verify_rsos_witness(&m, &w, samples, 0).unwrap();
        assert!(r.passed && r.max_discrepancy <= 1e-9, "{r:?}");
        assert_eq!(r.samples, 160);

        // all-zero witness only matches the zero form
        let zero = QOperator::extension(2, 2, 1, CMatrix::zeros(4)).unwrap();
        let zw = [zero.clone(), zero];
        assert!(!verify_rsos_witness(&m, &zw, 20, 0).unwrap().passed);
        let m0 = QOperator::bipartite(2, 2, CMatrix::zeros(4)).unwrap();
        assert!(verify_rsos_witness(&m0, &zw, 20, 0).unwrap().passed);

        // a non-PSD block is flagged
        let neg = QOperator::extension(2, 2, 1, CMatrix::identity(4).scaled(-1.0)).unwrap();
        let r = verify_rsos_witness(&m, &[neg, w[1].clone()], 10, 0).unwrap();
        assert_eq!(r.non_psd, vec![0]);
    }

    #[test]
    fn csos_form_at_ell_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = random_complex(&mut rng, 6);
        let w = CMatrix::outer(&v);
        let m = QOperator::bipartite(2, 3, w.clone()).unwrap();
        let ws = [QOperator::extension(2, 3, 1, w).unwrap(), QOperator::extension(2, 3, 1, CMatrix::zeros(6)).unwrap()];
        let r = verify_rsos_witness(&m, &ws, 10 * monomial_count(2, 3, 1), 1).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn rejects_bad_operators() {
        let bad = CMatrix::from_fn(2, |i, j| Complex64::new(0.0, if i < j { 1.0 } else { 0.0 }));
        assert!(QOperator::bipartite(1, 2, bad).is_err());
        assert!(QOperator::bipartite(2, 2, CMatrix::identity(3)).is_err());
        assert!(QOperator::new(vec![2, 2], vec!["A".into(), "A".into()], CMatrix::identity(4)).is_err());
    }
}
