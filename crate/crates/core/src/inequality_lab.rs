//! Numerical checks of the hypercontractivity region, Gross's lemma, norm
//! monotonicity, the log-Sobolev inequality, the `g'(t)` formula, norm
//! multiplicativity and the block-matrix norm inequality.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::channel_algebra::{
    diagonalize_generator, random_unit_rate_generator, CpMap, DiagonalChannel, GeneratorTriple, ProductChannel, Site,
};
use crate::error::{domain, refused, validation, HyperqError, Result};
use crate::norm_estimator::{
    diagonal_witness_scan, estimate_norm, estimate_norm_seeded, single_qubit_norm_oracle, NormQuery, TensorWithQubit,
};
use crate::pauli_tensor::{
    czero, eigen_raw, eigenvalues, gaussian_matrix, general_schatten_norm, hs_inner_raw, matrix_power, power_sum,
    schatten_norm, sq_log_sq, CMatrix, HermitianOperator,
};
use crate::seed;

/// Tolerance for closed-form inequality gaps.
pub const GAP_TOL: f64 = 1e-9;
pub const MONOTONICITY_TOL: f64 = 1e-10;
pub const DOMINATION_TOL: f64 = 1e-10;
/// An estimate at most this far above 1 counts as contractive.
pub const CONTRACTIVE_SLACK: f64 = 1e-6;
/// A ratio this far above 1 is a violation.
pub const VIOLATION_SLACK: f64 = 1e-9;
pub const MULTIPLICATIVITY_REL_TOL: f64 = 1e-4;
pub const PRODUCT_FLOOR_TOL: f64 = 1e-8;
/// Step of the finite differences in [`g_derivative`].
pub const G_FD_STEP: f64 = 1e-5;
/// Relative agreement required between analytic and finite-difference `g'`.
pub const G_FD_REL_TOL: f64 = 1e-5;
const PSD_TOL: f64 = 1e-10;

/// One evaluated inequality `lhs <= rhs`.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub inputs: Value,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub gap: f64,
    pub pass: bool,
    pub tolerance: f64,
}

impl InequalityReport {
    pub fn new(name: &str, inputs: Value, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let gap = rhs - lhs;
        Self {
            name: name.to_string(),
            inputs,
            lhs,
            rhs,
            gap,
            pass: gap >= -tolerance,
            tolerance,
        }
    }
}

fn ensure_psd(a: &HermitianOperator) -> Result<()> {
    let e = eigenvalues(a.matrix())?;
    let scale = e.last().unwrap().abs().max(1.0);
    if e[0] < -PSD_TOL * scale {
        return validation(format!("matrix is not PSD (least eigenvalue {:.3e})", e[0]));
    }
    Ok(())
}

fn ensure_gcp(h: &GeneratorTriple) -> Result<()> {
    if !h.is_gcp() {
        return refused(format!("generator {:?} is not in the CP class", h.rates));
    }
    Ok(())
}

fn ensure_unit_rate(h: &GeneratorTriple) -> Result<()> {
    ensure_gcp(h)?;
    if h.h_min() < 1.0 - 1e-9 {
        return refused(format!("generator {:?} has h_min = {} < 1; the inequality is proved only for unit rate", h.rates, h.h_min()));
    }
    Ok(())
}

fn site_count(a: &HermitianOperator) -> usize {
    a.sites()
}

/// Normalized trace of the real part.
fn tau(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum::<f64>() / m.nrows() as f64
}

fn re_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    hs_inner_raw(a, b).re
}

fn generator_on(h: &GeneratorTriple, site: usize, a: &CMatrix) -> Result<CMatrix> {
    crate::channel_algebra::apply_generator_on_site(h, site, a)
}

/// `<A^{p/2}, H(A^{p/2})> <= (p/2)^2/(p-1) <A, H(A^{p-1})>` with `H` on `site`.
pub fn gross_gap(a: &HermitianOperator, h: &GeneratorTriple, site: usize, p: f64) -> Result<InequalityReport> {
    if !(p > 1.0) {
        return domain(format!("p = {p} must exceed 1"));
    }
    ensure_gcp(h)?;
    ensure_psd(a)?;
    let half = matrix_power(a, p / 2.0)?;
    let pm1 = matrix_power(a, p - 1.0)?;
    let lhs = re_inner(half.matrix(), &generator_on(h, site, half.matrix())?);
    let coef = (p / 2.0).powi(2) / (p - 1.0);
    let rhs = coef * re_inner(a.matrix(), &generator_on(h, site, pm1.matrix())?);
    Ok(InequalityReport::new(
        "gross",
        json!({ "A": a, "generator": h.rates, "site": site, "p": p }),
        lhs,
        rhs,
        GAP_TOL,
    ))
}

/// Identity except for `e^{-tH}` on `site`.
fn single_site_semigroup(h: &GeneratorTriple, site: usize, sites: usize, t: f64) -> Result<ProductChannel> {
    let mut channels = vec![DiagonalChannel::identity(); sites];
    channels[site] = h.exponentiate(t)?;
    ProductChannel::diagonal(channels)
}

/// `t -> ||(I (x) e^{-tH})(A)||_q` on an ascending grid. `lhs` is the largest
/// successive increase.
pub fn monotonicity_scan(a: &HermitianOperator, h: &GeneratorTriple, site: usize, q: f64, ts: &[f64]) -> Result<InequalityReport> {
    ensure_gcp(h)?;
    ensure_psd(a)?;
    if ts.windows(2).any(|w| !(w[1] > w[0])) || ts.iter().any(|&t| !(t >= 0.0)) {
        return validation("t-grid must be nonnegative and strictly ascending");
    }
    let n = site_count(a);
    if site >= n {
        return validation(format!("site {site} out of range for {n} sites"));
    }
    let values = ts
        .iter()
        .map(|&t| schatten_norm(&single_site_semigroup(h, site, n, t)?.apply(a)?, q))
        .collect::<Result<Vec<_>>>()?;
    let increase = values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let lhs = if increase.is_finite() { increase } else { 0.0 };
    Ok(InequalityReport::new(
        "monotonicity",
        json!({ "A": a, "generator": h.rates, "site": site, "q": q, "t": ts, "norms": values }),
        lhs,
        0.0,
        MONOTONICITY_TOL,
    ))
}

/// `-tau(A^2) ln tau(A^2) + tau(A^2 ln A^2) <= 2 sum_k tau(A H^(k)(A))`.
pub fn log_sobolev_gap(a: &HermitianOperator, generators: &[GeneratorTriple]) -> Result<InequalityReport> {
    let n = site_count(a);
    if generators.len() != n {
        return validation(format!("{} generators for {n} sites", generators.len()));
    }
    generators.iter().try_for_each(ensure_unit_rate)?;
    ensure_psd(a)?;
    let d = a.dim() as f64;
    let eig = eigenvalues(a.matrix())?;
    let t2: f64 = eig.iter().map(|x| x * x).sum::<f64>() / d;
    let ent: f64 = eig.iter().map(|&x| sq_log_sq(x)).sum::<f64>() / d;
    let lhs = if t2 > 0.0 { -t2 * t2.ln() + ent } else { 0.0 };
    let mut rhs = 0.0;
    for (k, h) in generators.iter().enumerate() {
        rhs += 2.0 * tau(&(a.matrix() * generator_on(h, k, a.matrix())?));
    }
    Ok(InequalityReport::new(
        "log_sobolev",
        json!({ "A": a, "generators": generators.iter().map(|h| h.rates).collect::<Vec<_>>() }),
        lhs,
        rhs,
        GAP_TOL,
    ))
}

/// `tau(A H_u^(k)(A)) <= tau(A H^(k)(A))` for a unit-rate generator `H`.
pub fn lsi_domination(a: &HermitianOperator, h: &GeneratorTriple, site: usize) -> Result<InequalityReport> {
    ensure_unit_rate(h)?;
    ensure_psd(a)?;
    let lhs = tau(&(a.matrix() * generator_on(&GeneratorTriple::uniform(), site, a.matrix())?));
    let rhs = tau(&(a.matrix() * generator_on(h, site, a.matrix())?));
    Ok(InequalityReport::new(
        "lsi_domination",
        json!({ "A": a, "generator": h.rates, "site": site }),
        lhs,
        rhs,
        DOMINATION_TOL,
    ))
}

/// `q(t) = 1 + e^{2t}(p - 1)`.
pub fn q_of_t(p: f64, t: f64) -> f64 {
    1.0 + (2.0 * t).exp() * (p - 1.0)
}

fn evolve(a: &HermitianOperator, generators: &[GeneratorTriple], t: f64) -> Result<HermitianOperator> {
    ProductChannel::from_generators(generators, &vec![t; generators.len()])?.apply(a)
}

/// `g(t) = ln(2^{-n/q} ||B||_q)` with `B = (e^{-tH_1} (x) ... (x) e^{-tH_n})(A)`, `q = q(t)`.
pub fn g_value(a: &HermitianOperator, generators: &[GeneratorTriple], p: f64, t: f64) -> Result<f64> {
    let b = evolve(a, generators, t)?;
    let q = q_of_t(p, t);
    let eig = eigenvalues(b.matrix())?;
    let bmax = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if bmax == 0.0 {
        return domain("B has zero trace power");
    }
    let s = power_sum(&eig.iter().map(|x| x / bmax).collect::<Vec<_>>(), q);
    let n = generators.len() as f64;
    Ok(-n * std::f64::consts::LN_2 / q + bmax.ln() + s.ln() / q)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GDerivative {
    pub analytic: f64,
    pub finite_difference: f64,
    pub q: f64,
}

/// The closed-form `g'(t)` next to a finite-difference derivative of
/// [`g_value`] (central, or one-sided second order when `t` is within one step
/// of 0).
pub fn g_derivative(a: &HermitianOperator, generators: &[GeneratorTriple], p: f64, t: f64) -> Result<GDerivative> {
    if !(p > 1.0) {
        return domain(format!("p = {p} must exceed 1"));
    }
    if !(t >= 0.0) {
        return domain(format!("t = {t} must be >= 0"));
    }
    let n = site_count(a);
    if generators.len() != n {
        return validation(format!("{} generators for {n} sites", generators.len()));
    }
    generators.iter().try_for_each(ensure_gcp)?;
    ensure_psd(a)?;
    let q = q_of_t(p, t);
    let b = evolve(a, generators, t)?;

    // g' is invariant under B -> cB; scale the top eigenvalue to 1
    let dec = eigen_raw(b.matrix())?;
    let bmax = dec.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if bmax == 0.0 {
        return domain("B has zero trace power");
    }
    let c: Vec<f64> = dec.eigenvalues.iter().map(|x| (x / bmax).max(0.0)).collect();
    let s = power_sum(&c, q);
    if !(s > 0.0) {
        return domain("B has zero trace power");
    }
    let entropy: f64 = c
        .iter()
        .map(|&x| if x > 0.0 { let y = x.powf(q); y * y.ln() } else { 0.0 })
        .sum();
    let cq1 = dec.recompose(&c.iter().map(|&x| x.powf(q - 1.0)).collect::<Vec<_>>());
    let scaled = b.matrix() * Complex64::new(1.0 / bmax, 0.0);
    let mut hb = CMatrix::from_element(b.dim(), b.dim(), czero());
    for (k, h) in generators.iter().enumerate() {
        hb += generator_on(h, k, &scaled)?;
    }
    let energy = re_inner(&cq1, &hb);
    let bracket = n as f64 * std::f64::consts::LN_2 - s.ln() + entropy / s - q * q / (2.0 * (q - 1.0)) * energy / s;
    let analytic = 2.0 * (q - 1.0) / (q * q) * bracket;

    let h = G_FD_STEP;
    let g = |t: f64| g_value(a, generators, p, t);
    let finite_difference = if t >= h {
        (g(t + h)? - g(t - h)?) / (2.0 * h)
    } else {
        (-3.0 * g(t)? + 4.0 * g(t + h)? - g(t + 2.0 * h)?) / (2.0 * h)
    };
    Ok(GDerivative { analytic, finite_difference, q })
}

/// Checks the block-matrix norm inequality for `M = [[C11, C12], [C12*, C22]]`
/// and `N = [[|C11|_r, |C12|_r], [|C12|_r, |C22|_r]]`: `|M|_r <= |N|_r` when
/// `r >= 2`, reversed when `r < 2`. `lhs` is the side predicted smaller.
pub fn block_norm_inequality_check(c11: &CMatrix, c12: &CMatrix, c22: &CMatrix, r: f64) -> Result<InequalityReport> {
    if !(r >= 1.0) {
        return domain(format!("r = {r} must be >= 1"));
    }
    let k = c11.nrows();
    if [c11, c12, c22].iter().any(|c| c.nrows() != k || c.ncols() != k) || k == 0 {
        return validation("blocks must be square and of equal size");
    }
    let mut m = CMatrix::from_element(2 * k, 2 * k, czero());
    m.view_mut((0, 0), (k, k)).copy_from(c11);
    m.view_mut((0, k), (k, k)).copy_from(c12);
    m.view_mut((k, 0), (k, k)).copy_from(&c12.adjoint());
    m.view_mut((k, k), (k, k)).copy_from(c22);
    let scale = m.iter().fold(1.0f64, |acc, z| acc.max(z.norm()));
    if (&m - m.adjoint()).iter().any(|z| z.norm() > 1e-12 * scale) {
        return validation("assembled block matrix is not Hermitian");
    }
    let spectrum = eigenvalues(&m)?;
    if spectrum[0] < -PSD_TOL * spectrum.last().unwrap().abs().max(1.0) {
        return validation(format!("assembled block matrix is not PSD (least eigenvalue {:.3e})", spectrum[0]));
    }
    let a = general_schatten_norm(c11, r)?;
    let b = general_schatten_norm(c12, r)?;
    let c = general_schatten_norm(c22, r)?;
    let mid = (a + c) / 2.0;
    let rad = (((a - c) / 2.0).powi(2) + b * b).sqrt();
    let small = power_sum(&[mid - rad, mid + rad], r).powf(1.0 / r);
    let big = power_sum(&spectrum, r).powf(1.0 / r);
    let (lhs, rhs) = if r >= 2.0 { (big, small) } else { (small, big) };
    Ok(InequalityReport::new(
        "block_norm",
        json!({ "M": { "re": rows(&m, |z| z.re), "im": rows(&m, |z| z.im) }, "r": r, "block_norms": [a, b, c] }),
        lhs,
        rhs,
        GAP_TOL,
    ))
}

/// `||Omega (x) Phi||_{p->q} = ||Omega||_{p->q} ||Phi||_{p->q}` for a unital
/// qubit channel `Phi`. `lhs` estimates the tensor product (seeded with the
/// product of the factor witnesses), `rhs` is the estimate for `Omega` times
/// the exact qubit norm; unnormalized norms throughout.
pub fn multiplicativity_gap(omega: &CpMap, phi: &DiagonalChannel, p: f64, q: f64, query: &NormQuery) -> Result<InequalityReport> {
    if !(p >= 1.0) {
        return domain(format!("p = {p} must be >= 1"));
    }
    if p > 2.0 || q < 2.0 {
        return refused(format!("multiplicativity is established for 1 <= p <= 2 <= q, got p = {p}, q = {q}"));
    }
    if !phi.is_cp() {
        return refused(format!("channel {:?} is not completely positive", phi.lambdas));
    }
    let query = NormQuery { p, q, ..query.clone() };
    let om = estimate_norm(omega, &query)?;
    let (phi_value, phi_witness) = single_qubit_norm_oracle(phi, p, q)?;
    let phi_unnormalized = phi_value * 2f64.powf(1.0 / q - 1.0 / p);
    let rhs = om.unnormalized_value * phi_unnormalized;

    let tensor = TensorWithQubit::new(omega, Site::Diagonal(*phi))?;
    let product_witness = om.witness.kron(&phi_witness);
    let joint = estimate_norm_seeded(&tensor, &NormQuery { seed: seed::split(query.seed, 1), ..query.clone() }, &[product_witness])?;
    let lhs = joint.unnormalized_value;
    if lhs < rhs - PRODUCT_FLOOR_TOL {
        return Err(HyperqError::Numerical(format!(
            "joint estimate {lhs} fell below the product-witness floor {rhs}"
        )));
    }
    let kraus: Vec<Value> = omega
        .kraus()
        .iter()
        .map(|k| json!({ "re": rows(k, |z| z.re), "im": rows(k, |z| z.im) }))
        .collect();
    Ok(InequalityReport::new(
        "multiplicativity",
        json!({ "omega_kraus": kraus, "phi": phi.lambdas, "p": p, "q": q, "restarts": query.restarts, "seed": query.seed }),
        lhs,
        rhs,
        MULTIPLICATIVITY_REL_TOL * rhs,
    ))
}

fn rows(m: &CMatrix, f: impl Fn(&Complex64) -> f64) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Contractive,
    Violated,
    Inconclusive,
}

/// What the hypercontractivity theorem predicts for a grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Expected {
    Contractive,
    Violated,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateEntry {
    pub p: f64,
    pub q: f64,
    /// Per-site times as requested.
    pub times: Vec<f64>,
    /// Times after rate normalization.
    pub effective_times: Vec<f64>,
    pub threshold: f64,
    /// Best ratio found; realized by `witness`.
    pub estimate: f64,
    /// Best ratio over the diagonal-witness scan.
    pub witness_ratio: f64,
    pub verdict: Verdict,
    pub expected: Expected,
    pub converged: bool,
    pub witness: HermitianOperator,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub channel: Value,
    /// Preprocessing applied to the generators.
    pub normalization: Vec<String>,
    /// Inputs outside the theorem's hypotheses; expectations are `UNKNOWN`.
    pub exploratory: bool,
    pub entries: Vec<CertificateEntry>,
}

/// A one-parameter channel family indexed by `t >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum ChannelFamily {
    /// `e^{-t_1 H_1} (x) ... (x) e^{-t_n H_n}`.
    Semigroup(Vec<GeneratorTriple>),
    /// Two-Pauli channel with `l = e^{-t}` on every site.
    TwoPauli { sites: usize },
}

/// Diagonal rates of general symmetric generators in the Pauli basis.
pub fn canonical_generators(matrices: &[Matrix4<f64>]) -> Result<Vec<GeneratorTriple>> {
    matrices.iter().map(|m| Ok(diagonalize_generator(m)?.0)).collect()
}

struct Prepared {
    generators: Vec<GeneratorTriple>,
    time_scale: Vec<f64>,
    exploratory: bool,
    two_pauli: bool,
    log: Vec<String>,
    spec: Value,
}

fn prepare(family: &ChannelFamily) -> Result<Prepared> {
    match family {
        ChannelFamily::TwoPauli { sites } => {
            if *sites == 0 {
                return validation("need at least one site");
            }
            Ok(Prepared {
                generators: Vec::new(),
                time_scale: vec![1.0; *sites],
                exploratory: true,
                two_pauli: true,
                log: vec!["two-Pauli family (l, l, 2l - 1) with l = e^{-t}; exploratory".into()],
                spec: json!({ "family": "two-pauli", "sites": sites }),
            })
        }
        ChannelFamily::Semigroup(gens) => {
            if gens.is_empty() {
                return validation("need at least one generator");
            }
            let mut out = Prepared {
                generators: Vec::new(),
                time_scale: Vec::new(),
                exploratory: false,
                two_pauli: false,
                log: Vec::new(),
                spec: json!({ "family": "semigroup", "generators": gens.iter().map(|h| h.rates).collect::<Vec<_>>() }),
            };
            for (k, h) in gens.iter().enumerate() {
                ensure_gcp(h)?;
                let m = h.h_min();
                if m <= 1e-12 {
                    out.exploratory = true;
                    out.generators.push(*h);
                    out.time_scale.push(1.0);
                    out.log.push(format!("site {k}: generator {:?} has h_min = 0; exploratory", h.rates));
                } else {
                    let unit = h.normalize_rate()?;
                    if (m - 1.0).abs() > 1e-12 {
                        out.log.push(format!(
                            "site {k}: generator {:?} normalized to {:?}; time t -> {m} t",
                            h.rates, unit.rates
                        ));
                    }
                    out.generators.push(unit);
                    out.time_scale.push(m);
                }
            }
            Ok(out)
        }
    }
}

pub fn threshold(p: f64, q: f64) -> f64 {
    if p == q {
        1.0
    } else {
        ((p - 1.0) / (q - 1.0)).sqrt()
    }
}

impl Prepared {
    fn channel(&self, times: &[f64]) -> Result<(ProductChannel, Vec<f64>)> {
        if times.len() != self.time_scale.len() {
            return validation(format!("{} times for {} sites", times.len(), self.time_scale.len()));
        }
        if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
            return domain(format!("time {t} must be >= 0"));
        }
        let eff: Vec<f64> = times.iter().zip(&self.time_scale).map(|(t, m)| t * m).collect();
        let ch = if self.two_pauli {
            ProductChannel::diagonal(
                eff.iter()
                    .map(|t| DiagonalChannel::two_pauli((-t).exp()))
                    .collect::<Result<_>>()?,
            )?
        } else {
            ProductChannel::from_generators(&self.generators, &eff)?
        };
        Ok((ch, eff))
    }

    fn expected(&self, eff: &[f64], p: f64, q: f64) -> Expected {
        if self.exploratory {
            return Expected::Unknown;
        }
        let worst = eff.iter().map(|t| (-t).exp()).fold(0.0, f64::max);
        if worst <= threshold(p, q) + 1e-12 {
            Expected::Contractive
        } else {
            Expected::Violated
        }
    }
}

fn certify_point(prep: &Prepared, times: &[f64], p: f64, q: f64, query: &NormQuery) -> Result<CertificateEntry> {
    if !(p > 1.0) {
        return domain(format!("certification needs p > 1, got {p}"));
    }
    if !(q >= p) {
        return domain(format!("q = {q} must be >= p = {p}"));
    }
    let (channel, effective_times) = prep.channel(times)?;
    let expected = prep.expected(&effective_times, p, q);
    let (witness_ratio, scan_witness) = diagonal_witness_scan(&channel, p, q)?;
    let est = estimate_norm_seeded(&channel, &NormQuery { p, q, ..query.clone() }, &[scan_witness.clone()])?;
    let (estimate, witness) = if witness_ratio > est.value {
        (witness_ratio, scan_witness)
    } else {
        (est.value, est.witness)
    };
    let verdict = if estimate > 1.0 + VIOLATION_SLACK {
        Verdict::Violated
    } else if expected == Expected::Contractive && estimate <= 1.0 + CONTRACTIVE_SLACK {
        Verdict::Contractive
    } else {
        Verdict::Inconclusive
    };
    Ok(CertificateEntry {
        p,
        q,
        times: times.to_vec(),
        effective_times,
        threshold: threshold(p, q),
        estimate,
        witness_ratio,
        verdict,
        expected,
        converged: est.converged,
        witness,
    })
}

/// Certifies `|||e^{-t_1 H_1} (x) ... (x) e^{-t_n H_n}|||_{p->q} <= 1` at one
/// point. Generators are rate-normalized first (times rescaled by `h_min`);
/// generators with `h_min = 0` are run in exploratory mode.
pub fn hc_certify(generators: &[GeneratorTriple], times: &[f64], p: f64, q: f64, query: &NormQuery) -> Result<Certificate> {
    let prep = prepare(&ChannelFamily::Semigroup(generators.to_vec()))?;
    let entry = certify_point(&prep, times, p, q, query)?;
    Ok(Certificate {
        channel: prep.spec.clone(),
        normalization: prep.log.clone(),
        exploratory: prep.exploratory,
        entries: vec![entry],
    })
}

/// [`hc_certify`] over a `(p, q, t)` grid with a common time on every site.
/// Points with `q < p` are skipped. Point `i` (in `p`, `q`, `t` order) uses
/// estimator seed `split(query.seed, i)`.
pub fn region_scan(family: &ChannelFamily, ps: &[f64], qs: &[f64], ts: &[f64], query: &NormQuery) -> Result<Certificate> {
    let prep = prepare(family)?;
    let sites = prep.time_scale.len();
    let mut points = Vec::new();
    for &p in ps {
        for &q in qs {
            if q < p {
                continue;
            }
            for &t in ts {
                points.push((p, q, t));
            }
        }
    }
    let entries = points
        .par_iter()
        .enumerate()
        .map(|(i, &(p, q, t))| {
            let query = NormQuery { seed: seed::split(query.seed, i as u64), ..query.clone() };
            certify_point(&prep, &vec![t; sites], p, q, &query)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Certificate {
        channel: prep.spec.clone(),
        normalization: prep.log.clone(),
        exploratory: prep.exploratory,
        entries,
    })
}

/// Random sweeps over the closed-form inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Gross,
    LogSobolev,
    Monotonicity,
    GDerivative,
    BlockNorm,
    Domination,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Gross,
        Suite::LogSobolev,
        Suite::Monotonicity,
        Suite::GDerivative,
        Suite::BlockNorm,
        Suite::Domination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Gross => "gross",
            Suite::LogSobolev => "logsobolev",
            Suite::Monotonicity => "monotonicity",
            Suite::GDerivative => "gderivative",
            Suite::BlockNorm => "blocknorm",
            Suite::Domination => "domination",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| HyperqError::Validation(format!("unknown suite `{s}`")))
    }

    fn salt(self) -> u64 {
        self as u64 + 1
    }
}

/// A seeded PSD test matrix with `tau(A) = 1`; random rank unless `full_rank`.
pub fn random_test_psd(sites: usize, seed: u64, full_rank: bool) -> HermitianOperator {
    let d = 1usize << sites;
    let mut rng = seed::rng(seed);
    let cols = if full_rank || rng.random_bool(0.5) { d } else { rng.random_range(1..=d) };
    let g = gaussian_matrix(d, cols, &mut rng);
    let a = HermitianOperator::from_matrix_unchecked(&g * g.adjoint());
    let t = a.normalized_trace();
    a.scaled(1.0 / t)
}

/// A seeded generator in the CP class with arbitrary rate scale; every
/// seventh draw is a degenerate `Gamma_i`.
pub fn random_cp_generator(seed: u64) -> GeneratorTriple {
    let mut rng = seed::rng(seed);
    if rng.random_range(0..7) == 0 {
        return GeneratorTriple::gamma(rng.random_range(1..=3)).expect("index in range");
    }
    let scale = rng.random_range(0.2..3.0);
    let h = random_unit_rate_generator(rng.random());
    GeneratorTriple::new(h.rates.map(|x| x * scale))
}

const GROSS_P: [f64; 4] = [1.5, 2.0, 2.5, 4.0];
const MONOTONE_Q: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 4.0];
const G_P: [f64; 4] = [1.2, 1.5, 2.0, 3.0];
const BLOCK_R: [f64; 4] = [1.2, 2.0, 3.0, 5.0];
pub const MONOTONICITY_POINTS: usize = 50;

/// `samples` random instances of `suite`. Sample `i` draws from seed
/// `split(split(seed, suite), i)` and uses `n` sites (cycling 1, 2, 3 when
/// `n` is `None`). The g-derivative suite emits a sign report and an
/// analytic-versus-finite-difference report per sample.
pub fn run_suite(suite: Suite, samples: usize, n: Option<usize>, seed: u64) -> Result<Vec<InequalityReport>> {
    if let Some(n) = n {
        if n == 0 || n > 3 {
            return validation(format!("sweeps run on 1..=3 sites, got {n}"));
        }
    }
    let base = seed::split(seed, suite.salt());
    let per_sample = (0..samples)
        .into_par_iter()
        .map(|i| {
            let s = seed::split(base, i as u64);
            let n = n.unwrap_or(1 + i % 3);
            let mut rng = seed::rng(s);
            let site = rng.random_range(0..n);
            match suite {
                Suite::Gross => {
                    let a = random_test_psd(n, rng.random(), false);
                    let h = random_cp_generator(rng.random());
                    Ok(vec![gross_gap(&a, &h, site, GROSS_P[i % GROSS_P.len()])?])
                }
                Suite::LogSobolev => {
                    let a = random_test_psd(n, rng.random(), false);
                    let gens: Vec<_> = (0..n).map(|_| random_unit_rate_generator(rng.random())).collect();
                    Ok(vec![log_sobolev_gap(&a, &gens)?])
                }
                Suite::Monotonicity => {
                    let a = random_test_psd(n, rng.random(), false);
                    let h = random_cp_generator(rng.random());
                    let ts: Vec<f64> = (0..MONOTONICITY_POINTS)
                        .map(|j| 2.0 * j as f64 / (MONOTONICITY_POINTS - 1) as f64)
                        .collect();
                    Ok(vec![monotonicity_scan(&a, &h, site, MONOTONE_Q[i % MONOTONE_Q.len()], &ts)?])
                }
                Suite::GDerivative => {
                    let a = random_test_psd(n, rng.random(), true);
                    let gens: Vec<_> = (0..n).map(|_| random_unit_rate_generator(rng.random())).collect();
                    let p = G_P[i % G_P.len()];
                    let t = rng.random_range(0.0..2.0);
                    let g = g_derivative(&a, &gens, p, t)?;
                    let inputs = json!({ "A": a, "generators": gens.iter().map(|h| h.rates).collect::<Vec<_>>(), "p": p, "t": t, "q": g.q });
                    Ok(vec![
                        InequalityReport::new("g_derivative_sign", inputs.clone(), g.analytic, 0.0, GAP_TOL),
                        InequalityReport::new(
                            "g_derivative_fd",
                            json!({ "instance": inputs, "analytic": g.analytic, "finite_difference": g.finite_difference }),
                            (g.analytic - g.finite_difference).abs(),
                            G_FD_REL_TOL * g.analytic.abs().max(1.0),
                            0.0,
                        ),
                    ])
                }
                Suite::BlockNorm => {
                    let k = 1 + i % 4;
                    let g = gaussian_matrix(2 * k, 2 * k, &mut rng);
                    let m = &g * g.adjoint();
                    let t = (0..2 * k).map(|j| m[(j, j)].re).sum::<f64>();
                    let m = m * Complex64::new(1.0 / t, 0.0);
                    let c11 = m.view((0, 0), (k, k)).into_owned();
                    let c12 = m.view((0, k), (k, k)).into_owned();
                    let c22 = m.view((k, k), (k, k)).into_owned();
                    Ok(vec![block_norm_inequality_check(&c11, &c12, &c22, BLOCK_R[i % BLOCK_R.len()])?])
                }
                Suite::Domination => {
                    let a = random_test_psd(n, rng.random(), false);
                    let h = random_unit_rate_generator(rng.random());
                    Ok(vec![lsi_domination(&a, &h, site)?])
                }
            }
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    Ok(per_sample.into_iter().flatten().collect())
}
