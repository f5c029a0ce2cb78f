//! JSON file formats and their conversions to the core types.
//!
//! Every `*Json` type converts from its core counterpart and back, so an
//! emitted document re-parses into the value that produced it. Conversions
//! into core types validate first and report every schema violation, not
//! just the first.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use spheresos_core::certificate::{Certificate, Normalization, VerificationReport};
use spheresos_core::harmonic::HarmonicDecomp;
use spheresos_core::linalg::CMatrix;
use spheresos_core::quantum::{DpsReport, GapCertificate, QOperator, WitnessReport};
use spheresos_core::rho::{KernelSpec, RateRow};
use spheresos_core::{MatPoly, Poly};

pub type Violations = Vec<String>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub d: usize,
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

fn terms_of(p: &Poly) -> Vec<TermJson> {
    p.terms().map(|(e, c)| TermJson { exp: e.clone(), coef: c }).collect()
}

fn check_terms(path: &str, d: usize, degree: usize, terms: &[TermJson], out: &mut Violations) {
    for (t, term) in terms.iter().enumerate() {
        if term.exp.len() != d {
            out.push(format!("{path}[{t}].exp: length {}, expected d = {d}", term.exp.len()));
        } else {
            let total: u64 = term.exp.iter().map(|&e| e as u64).sum();
            if total != degree as u64 {
                out.push(format!("{path}[{t}].exp: total degree {total}, expected {degree}"));
            }
        }
        if !term.coef.is_finite() {
            out.push(format!("{path}[{t}].coef: not finite"));
        }
    }
}

fn build_poly(d: usize, degree: usize, terms: &[TermJson]) -> Poly {
    let mut p = Poly::zero(d, degree);
    for t in terms {
        p.add_term(t.exp.clone(), t.coef);
    }
    p
}

impl PolyJson {
    pub fn from_poly(p: &Poly) -> Self {
        Self { d: p.dim(), degree: p.degree(), terms: terms_of(p) }
    }

    pub fn violations(&self) -> Violations {
        let mut out = Vec::new();
        if self.d == 0 {
            out.push("d: must be at least 1".to_string());
        }
        check_terms("terms", self.d, self.degree, &self.terms, &mut out);
        out
    }

    pub fn to_poly(&self) -> Result<Poly, Violations> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(v);
        }
        Ok(build_poly(self.d, self.degree, &self.terms))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatPolyJson {
    pub d: usize,
    pub k: usize,
    pub degree: usize,
    pub entries: Vec<EntryJson>,
}

impl MatPolyJson {
    pub fn from_matpoly(m: &MatPoly) -> Self {
        let entries = m.entries().map(|((i, j), p)| EntryJson { i, j, terms: terms_of(p) }).collect();
        Self { d: m.dim(), k: m.size(), degree: m.degree(), entries }
    }

    pub fn violations(&self) -> Violations {
        let mut out = Vec::new();
        if self.d == 0 {
            out.push("d: must be at least 1".to_string());
        }
        if self.k == 0 {
            out.push("k: must be at least 1".to_string());
        }
        let mut seen = std::collections::BTreeSet::new();
        for (n, e) in self.entries.iter().enumerate() {
            if e.i > e.j {
                out.push(format!("entries[{n}]: i = {} > j = {}, only the upper triangle is stored", e.i, e.j));
            }
            if e.j >= self.k {
                out.push(format!("entries[{n}]: index ({}, {}) out of range for k = {}", e.i, e.j, self.k));
            }
            if !seen.insert((e.i, e.j)) {
                out.push(format!("entries[{n}]: duplicate entry ({}, {})", e.i, e.j));
            }
            check_terms(&format!("entries[{n}].terms"), self.d, self.degree, &e.terms, &mut out);
        }
        out
    }

    pub fn to_matpoly(&self) -> Result<MatPoly, Violations> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(v);
        }
        let mut m = MatPoly::zero(self.d, self.k, self.degree);
        for e in &self.entries {
            m.set(e.i, e.j, build_poly(self.d, self.degree, &e.terms)).map_err(|err| vec![err.to_string()])?;
        }
        Ok(m)
    }
}

/// A form that has a JSON representation.
pub trait FormJson: Sized {
    type Json: Serialize + for<'de> Deserialize<'de> + Clone + PartialEq + core::fmt::Debug;
    const KIND: &'static str;
    fn to_json(&self) -> Self::Json;
    fn from_json(j: &Self::Json) -> Result<Self, Violations>;
}

impl FormJson for Poly {
    type Json = PolyJson;
    const KIND: &'static str = "scalar";
    fn to_json(&self) -> PolyJson {
        PolyJson::from_poly(self)
    }
    fn from_json(j: &PolyJson) -> Result<Self, Violations> {
        j.to_poly()
    }
}

impl FormJson for MatPoly {
    type Json = MatPolyJson;
    const KIND: &'static str = "matrix";
    fn to_json(&self) -> MatPolyJson {
        MatPolyJson::from_matpoly(self)
    }
    fn from_json(j: &MatPolyJson) -> Result<Self, Violations> {
        j.to_matpoly()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicJson<P> {
    pub d: usize,
    pub degree: usize,
    pub n: usize,
    /// `parts[k]` is the harmonic component of degree `2k`.
    pub parts: Vec<P>,
    pub residual: f64,
}

impl<P> HarmonicJson<P> {
    pub fn from_decomp<F: FormJson<Json = P> + spheresos_core::harmonic::Form>(h: &HarmonicDecomp<F>) -> Self {
        let d = h.parts.first().map_or(0, |p| p.dim());
        Self { d, degree: 2 * h.n, n: h.n, parts: h.parts.iter().map(F::to_json).collect(), residual: h.residual }
    }

    pub fn to_decomp<F: FormJson<Json = P>>(&self) -> Result<HarmonicDecomp<F>, Violations> {
        let mut out = Vec::new();
        if self.degree != 2 * self.n {
            out.push(format!("degree: {} is not 2n = {}", self.degree, 2 * self.n));
        }
        if self.parts.len() != self.n + 1 {
            out.push(format!("parts: {} entries, expected n + 1 = {}", self.parts.len(), self.n + 1));
        }
        let mut parts = Vec::with_capacity(self.parts.len());
        for (k, p) in self.parts.iter().enumerate() {
            match F::from_json(p) {
                Ok(f) => parts.push(f),
                Err(v) => out.extend(v.into_iter().map(|s| format!("parts[{k}].{s}"))),
            }
        }
        if out.is_empty() {
            Ok(HarmonicDecomp { n: self.n, parts, residual: self.residual })
        } else {
            Err(out)
        }
    }
}

/// `null` stands for an infinite (vacuous) value.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpecJson {
    pub d: usize,
    pub ell: usize,
    pub n: usize,
    pub e: Vec<f64>,
    /// `λ_2, …, λ_{2n}`.
    pub lambdas: Vec<f64>,
    pub rho_value: Option<f64>,
    pub delta: Option<f64>,
}

impl KernelSpecJson {
    pub fn from_spec(s: &KernelSpec) -> Self {
        Self {
            d: s.d,
            ell: s.ell,
            n: s.n,
            e: s.e.clone(),
            lambdas: s.lambdas.clone(),
            rho_value: finite(s.rho_value),
            delta: finite(s.delta),
        }
    }

    pub fn to_spec(&self) -> Result<KernelSpec, Violations> {
        let mut out = Vec::new();
        if self.e.len() != self.ell + 1 {
            out.push(format!("spec.e: length {}, expected ell + 1 = {}", self.e.len(), self.ell + 1));
        }
        if self.lambdas.len() != self.n {
            out.push(format!("spec.lambdas: length {}, expected n = {}", self.lambdas.len(), self.n));
        }
        if !out.is_empty() {
            return Err(out);
        }
        Ok(KernelSpec {
            d: self.d,
            ell: self.ell,
            n: self.n,
            e: self.e.clone(),
            lambdas: self.lambdas.clone(),
            rho_value: self.rho_value.unwrap_or(f64::INFINITY),
            delta: self.delta.unwrap_or(f64::INFINITY),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationJson {
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationJson {
    pub unit_defect: f64,
    pub lambda_defect: f64,
    pub funk_hecke_residual: f64,
    pub witness_min: f64,
    pub witness_converged: bool,
    pub margin: f64,
    pub shape_ok: bool,
    pub kernel_ok: bool,
    pub funk_hecke_ok: bool,
    pub witness_ok: bool,
    pub margin_ok: bool,
    pub passed: bool,
}

impl VerificationJson {
    pub fn from_report(r: &VerificationReport) -> Self {
        Self {
            unit_defect: r.unit_defect,
            lambda_defect: r.lambda_defect,
            funk_hecke_residual: r.funk_hecke_residual,
            witness_min: r.witness_min,
            witness_converged: r.witness_converged,
            margin: r.margin,
            shape_ok: r.shape_ok,
            kernel_ok: r.kernel_ok,
            funk_hecke_ok: r.funk_hecke_ok,
            witness_ok: r.witness_ok,
            margin_ok: r.margin_ok,
            passed: r.passed,
        }
    }

    pub fn to_report(&self) -> VerificationReport {
        VerificationReport {
            unit_defect: self.unit_defect,
            lambda_defect: self.lambda_defect,
            funk_hecke_residual: self.funk_hecke_residual,
            witness_min: self.witness_min,
            witness_converged: self.witness_converged,
            margin: self.margin,
            shape_ok: self.shape_ok,
            kernel_ok: self.kernel_ok,
            funk_hecke_ok: self.funk_hecke_ok,
            witness_ok: self.witness_ok,
            margin_ok: self.margin_ok,
            passed: self.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson<P> {
    pub seed: u64,
    pub version: String,
    pub kind: String,
    pub spec: KernelSpecJson,
    pub delta: f64,
    pub normalization: NormalizationJson,
    #[serde(rename = "H")]
    pub h: HarmonicJson<P>,
    pub verification: VerificationJson,
}

impl<P> CertificateJson<P> {
    pub fn from_certificate<F>(c: &Certificate<F>, seed: u64) -> Self
    where
        F: FormJson<Json = P> + spheresos_core::harmonic::Form,
    {
        Self {
            seed,
            version: crate::VERSION.to_string(),
            kind: F::KIND.to_string(),
            spec: KernelSpecJson::from_spec(&c.spec),
            delta: c.delta,
            normalization: NormalizationJson { m: c.normalization.m, big_m: c.normalization.big_m },
            h: HarmonicJson::from_decomp(&c.h),
            verification: VerificationJson::from_report(&c.verification),
        }
    }

    pub fn to_certificate<F: FormJson<Json = P>>(&self) -> Result<Certificate<F>, Violations> {
        let mut out = Vec::new();
        if self.kind != F::KIND {
            out.push(format!("kind: \"{}\", expected \"{}\"", self.kind, F::KIND));
        }
        let spec = self.spec.to_spec().map_err(|v| out.extend(v)).ok();
        let h = self.h.to_decomp::<F>().map_err(|v| out.extend(v.into_iter().map(|s| format!("H.{s}")))).ok();
        match (spec, h) {
            (Some(spec), Some(h)) if out.is_empty() => Ok(Certificate {
                spec,
                delta: self.delta,
                normalization: Normalization { m: self.normalization.m, big_m: self.normalization.big_m },
                h,
                verification: self.verification.to_report(),
            }),
            _ => Err(out),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QOperatorJson {
    pub dims: Vec<usize>,
    pub labels: Vec<String>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl QOperatorJson {
    pub fn from_operator(op: &QOperator) -> Self {
        let n = op.size();
        let m = op.matrix();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        Self { dims: op.dims().to_vec(), labels: op.labels().to_vec(), re, im }
    }

    pub fn violations(&self) -> Violations {
        let mut out = Vec::new();
        let size = self.dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
        if self.dims.is_empty() || self.dims.contains(&0) {
            out.push("dims: must be a nonempty list of positive integers".to_string());
        }
        if self.labels.len() != self.dims.len() {
            out.push(format!("labels: {} labels for {} subsystems", self.labels.len(), self.dims.len()));
        }
        let Some(size) = size else {
            out.push("dims: product overflows".to_string());
            return out;
        };
        for (name, rows) in [("re", &self.re), ("im", &self.im)] {
            if rows.len() != size {
                out.push(format!("{name}: {} rows, expected {size}", rows.len()));
            }
            for (i, r) in rows.iter().enumerate() {
                if r.len() != size {
                    out.push(format!("{name}[{i}]: {} columns, expected {size}", r.len()));
                }
                if r.iter().any(|v| !v.is_finite()) {
                    out.push(format!("{name}[{i}]: non-finite entry"));
                }
            }
        }
        out
    }

    pub fn to_operator(&self) -> Result<QOperator, Violations> {
        let v = self.violations();
        if !v.is_empty() {
            return Err(v);
        }
        let n = self.re.len();
        let m = CMatrix::from_fn(n, |i, j| Complex64::new(self.re[i][j], self.im[i][j]));
        QOperator::new(self.dims.clone(), self.labels.clone(), m).map_err(|e| vec![e.to_string()])
    }
}

/// Blocks `W_0, …, W_ℓ` of a real-sum-of-squares witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessJson {
    pub blocks: Vec<QOperatorJson>,
}

impl WitnessJson {
    pub fn to_operators(&self) -> Result<Vec<QOperator>, Violations> {
        let mut out = Vec::new();
        let mut ops = Vec::new();
        for (s, b) in self.blocks.iter().enumerate() {
            match b.to_operator() {
                Ok(op) => ops.push(op),
                Err(v) => out.extend(v.into_iter().map(|m| format!("blocks[{s}].{m}"))),
            }
        }
        if out.is_empty() {
            Ok(ops)
        } else {
            Err(out)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapJson {
    pub seed: u64,
    pub version: String,
    pub dims: Vec<usize>,
    pub ell: usize,
    pub h_lower: f64,
    pub h_hat: f64,
    pub h_certified_upper: f64,
    pub doublings: usize,
    pub certificate: CertificateJson<MatPolyJson>,
}

impl GapJson {
    pub fn from_gap(g: &GapCertificate, dims: &[usize], ell: usize, seed: u64) -> Self {
        Self {
            seed,
            version: crate::VERSION.to_string(),
            dims: dims.to_vec(),
            ell,
            h_lower: g.h_lower,
            h_hat: g.h_hat,
            h_certified_upper: g.h_certified_upper,
            doublings: g.doublings,
            certificate: CertificateJson::from_certificate(&g.cert, seed),
        }
    }

    pub fn to_gap(&self) -> Result<GapCertificate, Violations> {
        Ok(GapCertificate {
            h_lower: self.h_lower,
            h_hat: self.h_hat,
            h_certified_upper: self.h_certified_upper,
            doublings: self.doublings,
            cert: self.certificate.to_certificate()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DpsJson {
    pub seed: u64,
    pub version: String,
    pub positivity: f64,
    pub reduction: f64,
    pub symmetry: f64,
    pub ppt: Vec<f64>,
    pub positivity_ok: bool,
    pub reduction_ok: bool,
    pub symmetry_ok: bool,
    pub ppt_ok: bool,
    pub passed: bool,
}

impl DpsJson {
    pub fn from_report(r: &DpsReport, seed: u64) -> Self {
        Self {
            seed,
            version: crate::VERSION.to_string(),
            positivity: r.positivity,
            reduction: r.reduction,
            symmetry: r.symmetry,
            ppt: r.ppt.clone(),
            positivity_ok: r.positivity_ok,
            reduction_ok: r.reduction_ok,
            symmetry_ok: r.symmetry_ok,
            ppt_ok: r.ppt_ok,
            passed: r.passed,
        }
    }

    pub fn to_report(&self) -> DpsReport {
        DpsReport {
            positivity: self.positivity,
            reduction: self.reduction,
            symmetry: self.symmetry,
            ppt: self.ppt.clone(),
            positivity_ok: self.positivity_ok,
            reduction_ok: self.reduction_ok,
            symmetry_ok: self.symmetry_ok,
            ppt_ok: self.ppt_ok,
            passed: self.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessReportJson {
    pub seed: u64,
    pub version: String,
    pub samples: usize,
    pub max_discrepancy: f64,
    pub min_eigenvalues: Vec<f64>,
    pub non_psd: Vec<usize>,
    pub passed: bool,
}

impl WitnessReportJson {
    pub fn from_report(r: &WitnessReport, seed: u64) -> Self {
        Self {
            seed,
            version: crate::VERSION.to_string(),
            samples: r.samples,
            max_discrepancy: r.max_discrepancy,
            min_eigenvalues: r.min_eigenvalues.clone(),
            non_psd: r.non_psd.clone(),
            passed: r.passed,
        }
    }

    pub fn to_report(&self) -> WitnessReport {
        WitnessReport {
            samples: self.samples,
            max_discrepancy: self.max_discrepancy,
            min_eigenvalues: self.min_eigenvalues.clone(),
            non_psd: self.non_psd.clone(),
            passed: self.passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateRowJson {
    pub d: usize,
    pub ell: usize,
    pub n: usize,
    pub rho2: Option<f64>,
    pub rho4: Option<f64>,
    pub rho_tilde: f64,
    pub rho_bound: Option<f64>,
    pub spec: KernelSpecJson,
}

impl RateRowJson {
    pub fn from_row(r: &RateRow) -> Self {
        Self {
            d: r.d,
            ell: r.ell,
            n: r.n,
            rho2: r.rho2.and_then(finite),
            rho4: r.rho4.and_then(finite),
            rho_tilde: r.rho_tilde,
            rho_bound: r.rho_bound.and_then(finite),
            spec: KernelSpecJson::from_spec(&r.spec),
        }
    }

    pub fn to_row(&self) -> Result<RateRow, Violations> {
        Ok(RateRow {
            d: self.d,
            ell: self.ell,
            n: self.n,
            rho2: self.rho2,
            rho4: self.rho4,
            rho_tilde: self.rho_tilde,
            rho_bound: self.rho_bound,
            spec: self.spec.to_spec()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateTableJson {
    pub seed: u64,
    pub version: String,
    pub rows: Vec<RateRowJson>,
}

/// One CSV record of a rate table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCsvRow {
    pub d: usize,
    pub ell: usize,
    pub n: usize,
    pub rho2: Option<f64>,
    pub rho4: Option<f64>,
    pub rho_tilde: f64,
    pub rho_bound: Option<f64>,
}

impl RateCsvRow {
    pub fn from_row(r: &RateRow) -> Self {
        let j = RateRowJson::from_row(r);
        Self { d: j.d, ell: j.ell, n: j.n, rho2: j.rho2, rho4: j.rho4, rho_tilde: j.rho_tilde, rho_bound: j.rho_bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceRowJson {
    pub k: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussRuleJson {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisJson {
    pub seed: u64,
    pub version: String,
    pub d: usize,
    pub max_degree: usize,
    /// `C_k(1)`, the dimension of the degree-`k` harmonics.
    pub endpoint_values: Vec<f64>,
    pub recurrence: Vec<RecurrenceRowJson>,
    pub gauss_rule: GaussRuleJson,
}
