//! Lower-bound estimation of `p -> q` norms of completely positive maps.
//!
//! For CP maps the supremum defining `|||Phi|||_{p->q}` is attained on
//! positive semidefinite inputs, so the estimator maximizes the norm ratio over
//! `A = B B*` with an unconstrained complex factor `B`. The ratio is scale
//! invariant, so iterates are kept on the unit Frobenius sphere. Every value
//! returned is realized by a concrete witness and is therefore a certified
//! lower bound; nothing here proves an upper bound.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel_algebra::{CpMap, DiagonalChannel, ProductChannel, Site};
use crate::error::{domain, refused, validation, Result};
use crate::pauli_tensor::{
    apply_site_op, czero, eigen_raw, eigenvalues, gaussian_matrix, hs_inner_raw, pauli_matrix, power_sum,
    site_op_from_transfer, CMatrix, HermitianOperator, ZERO_CLAMP,
};
use crate::seed;

/// Linear maps the estimator can act on.
pub trait SuperOperator: Sync {
    /// Input (and output) matrix dimension.
    fn dim(&self) -> usize;
    fn apply(&self, a: &CMatrix) -> CMatrix;
    /// Hilbert-Schmidt adjoint.
    fn apply_adjoint(&self, a: &CMatrix) -> CMatrix;
    /// Whether complete positivity has been established.
    fn is_cp(&self) -> bool;
    /// A problem-specific starting witness (restart 0).
    fn structured_witness(&self, _p: f64, _q: f64) -> Option<HermitianOperator> {
        None
    }
}

impl SuperOperator for ProductChannel {
    fn dim(&self) -> usize {
        ProductChannel::dim(self)
    }

    fn apply(&self, a: &CMatrix) -> CMatrix {
        self.apply_matrix(a, false)
    }

    fn apply_adjoint(&self, a: &CMatrix) -> CMatrix {
        self.apply_matrix(a, true)
    }

    fn is_cp(&self) -> bool {
        ProductChannel::is_cp(self)
    }

    /// Tensor product of the single-site oracle maximizers (identity on
    /// non-diagonal sites).
    fn structured_witness(&self, p: f64, q: f64) -> Option<HermitianOperator> {
        let mut out: Option<HermitianOperator> = None;
        for site in self.sites() {
            let w = match site {
                Site::Diagonal(c) => single_qubit_norm_oracle(c, p, q).ok()?.1,
                Site::Transfer(_) => HermitianOperator::identity(1),
            };
            out = Some(match out {
                None => w,
                Some(acc) => acc.kron(&w),
            });
        }
        out
    }
}

impl SuperOperator for CpMap {
    fn dim(&self) -> usize {
        CpMap::dim(self)
    }

    fn apply(&self, a: &CMatrix) -> CMatrix {
        self.apply_matrix(a, false)
    }

    fn apply_adjoint(&self, a: &CMatrix) -> CMatrix {
        self.apply_matrix(a, true)
    }

    fn is_cp(&self) -> bool {
        true
    }
}

/// `Omega (x) Phi` with `Omega` a Kraus map on `M_k` and `Phi` a qubit channel
/// acting on the last (least significant) qubit.
#[derive(Clone, Debug)]
pub struct TensorWithQubit {
    omega: CpMap,
    phi: Site,
    sites: usize,
}

impl TensorWithQubit {
    pub fn new(omega: &CpMap, phi: Site) -> Result<Self> {
        let k = omega.dim();
        if !k.is_power_of_two() {
            return validation(format!("Omega acts on M_{k}; dimension must be a power of two"));
        }
        Ok(Self {
            omega: omega.tensor_identity(2),
            phi,
            sites: k.trailing_zeros() as usize + 1,
        })
    }

    fn phi_op(&self, adjoint: bool) -> crate::pauli_tensor::SiteOp {
        let t = self.phi.transfer();
        site_op_from_transfer(&if adjoint { t.transpose() } else { t })
    }
}

impl SuperOperator for TensorWithQubit {
    fn dim(&self) -> usize {
        self.omega.dim()
    }

    fn apply(&self, a: &CMatrix) -> CMatrix {
        let mut m = self.omega.apply_matrix(a, false);
        apply_site_op(&mut m, self.sites - 1, self.sites, &self.phi_op(false));
        m
    }

    fn apply_adjoint(&self, a: &CMatrix) -> CMatrix {
        let mut m = a.clone();
        apply_site_op(&mut m, self.sites - 1, self.sites, &self.phi_op(true));
        self.omega.apply_matrix(&m, true)
    }

    fn is_cp(&self) -> bool {
        self.phi.is_cp()
    }
}

/// Parameters of a norm estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormQuery {
    pub p: f64,
    pub q: f64,
    pub restarts: usize,
    pub max_iter: usize,
    /// Initial step of the line search.
    pub step: f64,
    /// Relative improvement below which an iteration counts as stalled.
    pub tol: f64,
    pub seed: u64,
    /// Optimize over Hermitian rather than PSD witnesses; results are not certified.
    pub hermitian_witness: bool,
}

pub const DEFAULT_RESTARTS: usize = 64;
pub const DEFAULT_MAX_ITER: usize = 500;
const MAX_HALVINGS: usize = 30;
const STALL_ITERATIONS: usize = 5;

impl NormQuery {
    pub fn new(p: f64, q: f64) -> Self {
        Self {
            p,
            q,
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
            step: 1.0,
            tol: 1e-10,
            seed: 0,
            hermitian_witness: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) {
            return domain(format!("p = {} must be >= 1", self.p));
        }
        if !(self.q >= self.p) {
            return domain(format!("q = {} must be >= p = {}", self.q, self.p));
        }
        if self.restarts == 0 {
            return domain("restarts must be >= 1");
        }
        if !(self.step > 0.0) || !(self.tol >= 0.0) {
            return domain("step must be positive and tol nonnegative");
        }
        Ok(())
    }
}

/// Result of [`estimate_norm`].
#[derive(Clone, Debug, Serialize)]
pub struct NormEstimate {
    /// `|||Phi(W)|||_q / |||W|||_p` at the witness.
    pub value: f64,
    /// The same ratio with unnormalized Schatten norms.
    pub unnormalized_value: f64,
    pub witness: HermitianOperator,
    pub converged: bool,
    pub iterations: usize,
    /// Index of the restart that produced the witness.
    pub restart: usize,
    /// False when the PSD restriction was bypassed.
    pub certified: bool,
}

/// `sum |x_i|^r` and, optionally, the matrix `|X|^{r-1} sgn(X)`.
fn power_data(m: &CMatrix, r: f64, psd: bool, want_grad: bool) -> Result<(f64, Option<CMatrix>)> {
    if r == 2.0 {
        let s = m.iter().map(|z| z.norm_sqr()).sum();
        return Ok((s, want_grad.then(|| m.clone())));
    }
    if r == 1.0 && psd {
        let s = (0..m.nrows()).map(|i| m[(i, i)].re).sum();
        return Ok((s, want_grad.then(|| CMatrix::identity(m.nrows(), m.ncols()))));
    }
    if !want_grad {
        return Ok((power_sum(&eigenvalues(m)?, r), None));
    }
    let dec = eigen_raw(m)?;
    let s = power_sum(&dec.eigenvalues, r);
    let g: Vec<f64> = dec
        .eigenvalues
        .iter()
        .map(|&x| {
            if x.abs() <= ZERO_CLAMP {
                if r == 1.0 && psd {
                    1.0
                } else {
                    0.0
                }
            } else {
                x.abs().powf(r - 1.0) * x.signum()
            }
        })
        .collect();
    Ok((s, Some(dec.recompose(&g))))
}

fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `ln(||Phi(A)||_q / ||A||_p)` and optionally its gradient with respect to `A`.
struct Evaluation {
    log_ratio: f64,
    grad_a: Option<CMatrix>,
}

fn evaluate<M: SuperOperator + ?Sized>(map: &M, a: &CMatrix, p: f64, q: f64, psd: bool, want_grad: bool) -> Result<Evaluation> {
    let x = map.apply(a);
    let (sa, ga) = power_data(a, p, psd, want_grad)?;
    let (sx, gx) = power_data(&x, q, psd, want_grad)?;
    if !(sa > 0.0) {
        return domain("the zero matrix has no norm ratio");
    }
    let log_ratio = if sx > 0.0 { sx.ln() / q - sa.ln() / p } else { f64::NEG_INFINITY };
    let grad_a = match (ga, gx) {
        (Some(ga), Some(gx)) if sx > 0.0 => {
            Some(map.apply_adjoint(&gx) * Complex64::new(1.0 / sx, 0.0) - ga * Complex64::new(1.0 / sa, 0.0))
        }
        (Some(ga), Some(_)) => Some(ga * Complex64::new(-1.0 / sa, 0.0)),
        _ => None,
    };
    Ok(Evaluation { log_ratio, grad_a })
}

fn log_normalization(dim: usize, p: f64, q: f64) -> f64 {
    (1.0 / p - 1.0 / q) * (dim as f64).ln()
}

/// `|||Phi(A)|||_q / |||A|||_p`. Scale invariant in `A`; `A` may be any nonzero
/// Hermitian matrix.
pub fn ratio<M: SuperOperator + ?Sized>(map: &M, a: &HermitianOperator, p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0 && q >= 1.0) {
        return domain(format!("exponents p = {p}, q = {q} must be >= 1"));
    }
    if a.dim() != map.dim() {
        return validation(format!("witness dim {} does not match map dim {}", a.dim(), map.dim()));
    }
    if a.frobenius_norm() == 0.0 {
        return domain("the zero matrix has no norm ratio");
    }
    let x = map.apply(a.matrix());
    let d = a.dim() as f64;
    let (sa, _) = power_data(a.matrix(), p, false, false)?;
    let (sx, _) = power_data(&x, q, false, false)?;
    if !(sa > 0.0) {
        return domain("the zero matrix has no norm ratio");
    }
    Ok(((sx / d).ln() / q - (sa / d).ln() / p).exp())
}

/// Unnormalized counterpart of [`ratio`].
pub fn unnormalized_ratio<M: SuperOperator + ?Sized>(map: &M, a: &HermitianOperator, p: f64, q: f64) -> Result<f64> {
    Ok(ratio(map, a, p, q)? * (-log_normalization(a.dim(), p, q)).exp())
}

struct RestartOutcome {
    log_ratio: f64,
    param: CMatrix,
    converged: bool,
    iterations: usize,
}

fn psd_sqrt(a: &HermitianOperator) -> Result<CMatrix> {
    let dec = eigen_raw(a.matrix())?;
    let roots: Vec<f64> = dec.eigenvalues.iter().map(|&x| x.max(0.0).sqrt()).collect();
    Ok(dec.recompose(&roots))
}

fn normalize(m: CMatrix) -> CMatrix {
    let f = frobenius(&m);
    m * Complex64::new(1.0 / f, 0.0)
}

/// Maps the optimization parameter to the witness matrix.
fn witness_of(param: &CMatrix, psd: bool) -> CMatrix {
    if psd {
        param * param.adjoint()
    } else {
        (param + param.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

fn ascend<M: SuperOperator + ?Sized>(map: &M, start: CMatrix, query: &NormQuery, psd: bool) -> Result<RestartOutcome> {
    let (p, q) = (query.p, query.q);
    let mut param = normalize(start);
    let mut current = evaluate(map, &witness_of(&param, psd), p, q, psd, true)?;
    let mut step = query.step;
    let mut stalls = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < query.max_iter {
        iterations += 1;
        let ga = current.grad_a.as_ref().expect("gradient requested");
        let mut g = if psd { ga * &param * Complex64::new(2.0, 0.0) } else { ga.clone() };
        // tangent to the unit sphere
        let radial = hs_inner_raw(&param, &g).re;
        g -= &param * Complex64::new(radial, 0.0);
        if !(frobenius(&g) > 0.0) {
            converged = true;
            break;
        }

        let mut s = step;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate = normalize(&param + &g * Complex64::new(s, 0.0));
            let trial = evaluate(map, &witness_of(&candidate, psd), p, q, psd, true)?;
            if trial.log_ratio > current.log_ratio {
                accepted = Some((candidate, trial));
                break;
            }
            s *= 0.5;
        }
        let Some((candidate, trial)) = accepted else {
            // no ascent direction at working precision: every further
            // iteration would stall identically
            converged = true;
            break;
        };
        let improvement = trial.log_ratio.exp_m1_diff(current.log_ratio);
        param = candidate;
        current = trial;
        step = (s * 2.0).min(1e6);
        if improvement < query.tol {
            stalls += 1;
            if stalls >= STALL_ITERATIONS {
                converged = true;
                break;
            }
        } else {
            stalls = 0;
        }
    }
    Ok(RestartOutcome {
        log_ratio: current.log_ratio,
        param,
        converged,
        iterations,
    })
}

trait RelativeImprovement {
    fn exp_m1_diff(self, from: f64) -> f64;
}

impl RelativeImprovement for f64 {
    /// `exp(self - from) - 1`: relative growth of the ratio.
    fn exp_m1_diff(self, from: f64) -> f64 {
        if from.is_finite() {
            (self - from).exp_m1()
        } else {
            f64::INFINITY
        }
    }
}

/// Starting parameter for restart `index`.
fn start_param<M: SuperOperator + ?Sized>(
    map: &M,
    query: &NormQuery,
    index: usize,
    seeds: &[HermitianOperator],
    psd: bool,
) -> Result<CMatrix> {
    let d = map.dim();
    let from_witness = |w: &HermitianOperator| -> Result<CMatrix> {
        if psd {
            psd_sqrt(w)
        } else {
            Ok(w.matrix().clone())
        }
    };
    if index == 0 {
        return match map.structured_witness(query.p, query.q) {
            Some(w) => from_witness(&w),
            None => Ok(CMatrix::identity(d, d)),
        };
    }
    if index == 1 {
        return Ok(CMatrix::identity(d, d));
    }
    if let Some(w) = seeds.get(index - 2) {
        return from_witness(w);
    }
    let mut rng = seed::rng(seed::split(query.seed, index as u64));
    // every fourth random start is rank one (a pure-state direction)
    let cols = if index % 4 == 3 { 1 } else { d };
    let g = gaussian_matrix(d, cols, &mut rng);
    let mut b = CMatrix::from_element(d, d, czero());
    b.columns_mut(0, cols).copy_from(&g);
    Ok(b)
}

/// Best ratio over `query.restarts` projected-gradient-ascent runs. Restart 0
/// starts from the map's structured witness, restart 1 from the identity, the
/// rest from seeded random factors.
pub fn estimate_norm<M: SuperOperator + ?Sized>(map: &M, query: &NormQuery) -> Result<NormEstimate> {
    estimate_norm_seeded(map, query, &[])
}

/// [`estimate_norm`] with extra starting witnesses tried after restart 1.
pub fn estimate_norm_seeded<M: SuperOperator + ?Sized>(
    map: &M,
    query: &NormQuery,
    seeds: &[HermitianOperator],
) -> Result<NormEstimate> {
    query.validate()?;
    let psd = !query.hermitian_witness;
    if psd && !map.is_cp() {
        return refused("map is not certified completely positive; PSD restriction does not apply (use the hermitian-witness override)");
    }
    if let Some(s) = seeds.iter().find(|s| s.dim() != map.dim()) {
        return validation(format!("seed witness of dim {} for a map on dim {}", s.dim(), map.dim()));
    }
    let total = if query.restarts == 1 { 1 } else { query.restarts.max(2 + seeds.len()) };

    let outcomes: Vec<Result<RestartOutcome>> = (0..total)
        .into_par_iter()
        .map(|i| ascend(map, start_param(map, query, i, seeds, psd)?, query, psd))
        .collect();

    let mut best: Option<(usize, RestartOutcome)> = None;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let outcome = outcome?;
        let better = match &best {
            None => true,
            Some((_, b)) => outcome.log_ratio > b.log_ratio,
        };
        if better {
            best = Some((i, outcome));
        }
    }
    let (restart, best) = best.expect("at least one restart");
    let mut w = witness_of(&best.param, psd);
    let scale = if psd {
        (0..w.nrows()).map(|i| w[(i, i)].re).sum::<f64>()
    } else {
        frobenius(&w)
    };
    w *= Complex64::new(1.0 / scale, 0.0);
    let witness = HermitianOperator::from_matrix_unchecked(w);
    let value = ratio(map, &witness, query.p, query.q)?;
    Ok(NormEstimate {
        value,
        unnormalized_value: value * (-log_normalization(map.dim(), query.p, query.q)).exp(),
        witness,
        converged: best.converged,
        iterations: best.iterations,
        restart,
        certified: psd,
    })
}

pub const ORACLE_GRID_POINTS: usize = 1000;

/// Normalized ratio for the qubit witness `s0 + r n.s` under a channel whose
/// largest contraction along `n` is `m`.
fn bloch_ratio(r: f64, m: f64, p: f64, q: f64) -> f64 {
    let num = (((1.0 + r * m).powf(q) + (1.0 - r * m).powf(q)) / 2.0).ln() / q;
    let den = (((1.0 + r).powf(p) + (1.0 - r).powf(p)) / 2.0).ln() / p;
    (num - den).exp()
}

/// Exact `|||c|||_{p->q}` for a diagonal CP qubit channel.
///
/// Any PSD qubit matrix is `c0 (s0 + r n.s)`. The input norm depends only on
/// `r`, and the output Bloch radius `r |(l_i n_i)|` is largest for `n` along the
/// axis of largest `|l_i|`, so the search reduces to `r` in `[0, 1]`.
pub fn single_qubit_norm_oracle(c: &DiagonalChannel, p: f64, q: f64) -> Result<(f64, HermitianOperator)> {
    if !c.is_cp() {
        return refused(format!("channel {:?} is not completely positive", c.lambdas));
    }
    if !(p >= 1.0 && q >= p) {
        return domain(format!("need 1 <= p <= q, got p = {p}, q = {q}"));
    }
    let (axis, m) = c.dominant_axis();
    let m = m.min(1.0);
    let f = |r: f64| bloch_ratio(r, m, p, q);

    let n = ORACLE_GRID_POINTS;
    let grid = |i: usize| i as f64 / (n - 1) as f64;
    let (mut best_i, mut best_v) = (0, f(0.0));
    for i in 1..n {
        let v = f(grid(i));
        if v > best_v {
            best_i = i;
            best_v = v;
        }
    }
    let (mut lo, mut hi) = (grid(best_i.saturating_sub(1)), grid((best_i + 1).min(n - 1)));
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo < 1e-15 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut r = grid(best_i);
    for cand in [lo, hi, 0.5 * (lo + hi)] {
        let v = f(cand);
        if v > best_v {
            best_v = v;
            r = cand;
        }
    }
    let w = pauli_matrix(0) + pauli_matrix(axis as u8 + 1) * Complex64::new(r, 0.0);
    Ok((best_v, HermitianOperator::from_matrix_unchecked(w * Complex64::new(0.5, 0.0))))
}

/// Number of `eps` magnitudes per sign in the diagonal witness scan.
pub const EPS_GRID_POINTS: usize = 60;

/// Signed logarithmic grid in `[-1, 1]` including 0.
pub fn signed_log_grid(points: usize) -> Vec<f64> {
    let mut out = vec![0.0];
    for k in 0..points {
        let e = if points == 1 { 1.0 } else { 10f64.powf(-4.0 + 4.0 * k as f64 / (points - 1) as f64) };
        out.push(e);
        out.push(-e);
    }
    out
}

/// Qubit factor `s0 + eps s_axis` (a diagonal `1 + eps (-1)^s` when `axis = 3`).
fn site_witness(axis: usize, eps: f64) -> HermitianOperator {
    let m = pauli_matrix(0) + pauli_matrix(axis as u8) * Complex64::new(eps, 0.0);
    HermitianOperator::from_matrix_unchecked(m)
}

/// Best ratio over product witnesses `prod_j (s0 + eps_j s_{a_j})`, where
/// `a_j` is the axis of largest contraction parameter on site `j`. For the
/// canonical orientation (`a_j = 3`) these are the diagonal matrices of
/// functions `prod_j (1 + eps_j (-1)^{s_j})`. Scanned families: a shared
/// `eps` on all sites, and `eps` on a single site with the rest at identity.
/// The result is a certified lower bound on the norm.
pub fn diagonal_witness_scan(channel: &ProductChannel, p: f64, q: f64) -> Result<(f64, HermitianOperator)> {
    let Some(diag) = channel.diagonal_sites() else {
        return validation("diagonal witness scan needs a diagonal channel on every site");
    };
    // prefer the diagonal orientation on ties
    let axes: Vec<usize> = diag
        .iter()
        .map(|c| {
            let (axis, m) = c.dominant_axis();
            if c.lambdas[2].abs() >= m {
                3
            } else {
                axis + 1
            }
        })
        .collect();
    let n = axes.len();
    let build = |eps: &dyn Fn(usize) -> f64| -> HermitianOperator {
        let mut w = site_witness(axes[0], eps(0));
        for (j, &axis) in axes.iter().enumerate().skip(1) {
            w = w.kron(&site_witness(axis, eps(j)));
        }
        w
    };
    let mut best = (1.0, HermitianOperator::identity(n));
    let mut consider = |w: HermitianOperator| -> Result<()> {
        let r = ratio(channel, &w, p, q)?;
        if r > best.0 {
            best = (r, w);
        }
        Ok(())
    };
    for eps in signed_log_grid(EPS_GRID_POINTS) {
        consider(build(&|_| eps))?;
        if n > 1 {
            for j in 0..n {
                consider(build(&|k| if k == j { eps } else { 0.0 }))?;
            }
        }
    }
    Ok(best)
}

/// Outcome of [`gradient_check`].
#[derive(Clone, Debug, Serialize)]
pub struct GradientCheck {
    /// Largest relative gap between analytic and finite-difference directional derivatives.
    pub max_deviation: f64,
    /// Norm of the ratio gradient with the radial component removed, at `B = A^{1/2}` scaled to unit Frobenius norm.
    pub projected_gradient_norm: f64,
    /// Set when the spectrum of `A` had a gap below [`MIN_SPECTRAL_GAP`]; the
    /// gradient was then taken by finite differences.
    pub fallback: bool,
}

pub const MIN_SPECTRAL_GAP: f64 = 1e-6;
pub const FD_STEP: f64 = 1e-5;
pub const GRADIENT_DIRECTIONS: usize = 20;

/// Compares the analytic gradient of `B -> ratio(B B*)` with central
/// differences along seeded random directions.
pub fn gradient_check<M: SuperOperator + ?Sized>(
    map: &M,
    a: &HermitianOperator,
    p: f64,
    q: f64,
    seed: u64,
) -> Result<GradientCheck> {
    if a.dim() != map.dim() {
        return validation("witness dimension does not match the map");
    }
    let spectrum = eigenvalues(a.matrix())?;
    if spectrum[0] < -1e-10 * spectrum.last().unwrap().abs().max(1.0) {
        return validation("gradient check needs a PSD matrix");
    }
    let fallback = spectrum.windows(2).any(|w| w[1] - w[0] < MIN_SPECTRAL_GAP);
    let b = normalize(psd_sqrt(a)?);
    let r_of = |m: &CMatrix| -> Result<f64> {
        let e = evaluate(map, &witness_of(m, true), p, q, true, false)?;
        Ok((e.log_ratio + log_normalization(map.dim(), p, q)).exp())
    };
    let r0 = r_of(&b)?;
    let d = map.dim();

    let grad = if fallback {
        let mut g = CMatrix::from_element(d, d, czero());
        for i in 0..d {
            for j in 0..d {
                for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                    let mut plus = b.clone();
                    let mut minus = b.clone();
                    plus[(i, j)] += unit * FD_STEP;
                    minus[(i, j)] -= unit * FD_STEP;
                    let dd = (r_of(&plus)? - r_of(&minus)?) / (2.0 * FD_STEP);
                    g[(i, j)] += unit * dd;
                }
            }
        }
        g
    } else {
        let e = evaluate(map, &witness_of(&b, true), p, q, true, true)?;
        e.grad_a.expect("gradient requested") * &b * Complex64::new(2.0 * r0, 0.0)
    };
    let radial = hs_inner_raw(&b, &grad).re;
    let projected_gradient_norm = frobenius(&(&grad - &b * Complex64::new(radial, 0.0)));

    let mut max_deviation: f64 = 0.0;
    if !fallback {
        let mut rng = seed::rng(seed);
        let gnorm = frobenius(&grad);
        for _ in 0..GRADIENT_DIRECTIONS {
            let z = normalize(gaussian_matrix(d, d, &mut rng));
            let analytic = hs_inner_raw(&grad, &z).re;
            let fd = (r_of(&(&b + &z * Complex64::new(FD_STEP, 0.0)))? - r_of(&(&b - &z * Complex64::new(FD_STEP, 0.0)))?)
                / (2.0 * FD_STEP);
            let scale = analytic.abs().max(fd.abs()).max(1e-3 * gnorm).max(1e-9);
            max_deviation = max_deviation.max((analytic - fd).abs() / scale);
        }
    }
    Ok(GradientCheck {
        max_deviation,
        projected_gradient_norm,
        fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_algebra::random_cp_map;
    use crate::error::HyperqError;

    fn depol(l: f64, n: usize) -> ProductChannel {
        ProductChannel::uniform(DiagonalChannel::depolarizing(l).unwrap(), n).unwrap()
    }

    #[test]
    fn identity_witness_gives_exactly_one() {
        for n in 1..=3 {
            let ch = depol((1.0f64 / 3.0).sqrt(), n);
            let r = ratio(&ch, &HermitianOperator::identity(n), 2.0, 4.0).unwrap();
            assert!(r >= 1.0, "{r}");
        }
    }

    #[test]
    fn oracle_at_threshold_is_one() {
        let c = DiagonalChannel::depolarizing((1.0f64 / 3.0).sqrt()).unwrap();
        let (v, w) = single_qubit_norm_oracle(&c, 2.0, 4.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
        let ch = ProductChannel::uniform(c, 1).unwrap();
        assert!((ratio(&ch, &w, 2.0, 4.0).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn oracle_above_threshold_exceeds_one() {
        let c = DiagonalChannel::depolarizing(0.8).unwrap();
        let (v, w) = single_qubit_norm_oracle(&c, 2.0, 4.0).unwrap();
        assert!(v > 1.0);
        let ch = ProductChannel::uniform(c, 1).unwrap();
        assert!((ratio(&ch, &w, 2.0, 4.0).unwrap() - v).abs() < 1e-12);
    }

    #[test]
    fn oracle_refuses_non_cp() {
        let c = DiagonalChannel::new([1.0, 1.0, -1.0]);
        assert!(matches!(single_qubit_norm_oracle(&c, 2.0, 4.0), Err(HyperqError::Refused(_))));
    }

    #[test]
    fn estimate_matches_threshold() {
        let ch = depol((1.0f64 / 3.0).sqrt(), 1);
        let est = estimate_norm(&ch, &NormQuery::new(2.0, 4.0).with_restarts(8)).unwrap();
        assert!((est.value - 1.0).abs() < 1e-6, "{}", est.value);
        assert!(est.certified);
    }

    #[test]
    fn identity_channel_reaches_pure_state_ratio() {
        let ch = depol(1.0, 1);
        let est = estimate_norm(&ch, &NormQuery::new(2.0, 4.0).with_restarts(8)).unwrap();
        assert!(est.value >= 2f64.powf(0.25) - 1e-9, "{}", est.value);
    }

    #[test]
    fn contractive_product_has_unit_norm() {
        let ch = depol(0.5, 2);
        let est = estimate_norm(&ch, &NormQuery::new(2.0, 4.0).with_restarts(8)).unwrap();
        assert!((est.value - 1.0).abs() < 1e-6, "{}", est.value);
    }

    #[test]
    fn estimate_is_deterministic_and_reproducible() {
        let ch = depol(0.7, 2);
        let q = NormQuery::new(2.0, 3.0).with_restarts(6).with_seed(11);
        let a = estimate_norm(&ch, &q).unwrap();
        let b = estimate_norm(&ch, &q).unwrap();
        assert_eq!(a.value, b.value);
        let again = ratio(&ch, &a.witness, 2.0, 3.0).unwrap();
        assert!((again - a.value).abs() <= 1e-10);
        assert!((a.unnormalized_value - unnormalized_ratio(&ch, &a.witness, 2.0, 3.0).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn non_cp_is_refused_without_override() {
        let ch = ProductChannel::diagonal(vec![DiagonalChannel::new([1.0, 1.0, -1.0])]).unwrap();
        let q = NormQuery::new(2.0, 4.0).with_restarts(4);
        assert!(matches!(estimate_norm(&ch, &q), Err(HyperqError::Refused(_))));
        let mut q = q;
        q.hermitian_witness = true;
        let est = estimate_norm(&ch, &q).unwrap();
        assert!(!est.certified);
    }

    #[test]
    fn zero_witness_is_a_domain_error() {
        let ch = depol(0.5, 1);
        let z = HermitianOperator::diagonal(&[0.0, 0.0]).unwrap();
        assert!(matches!(ratio(&ch, &z, 2.0, 4.0), Err(HyperqError::Domain(_))));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let ch = depol(1.0, 1);
        let a = HermitianOperator::diagonal(&[1.3, 0.7]).unwrap();
        let g = gradient_check(&ch, &a, 2.0, 4.0, 1).unwrap();
        assert!(!g.fallback);
        assert!(g.max_deviation <= 1e-5, "{}", g.max_deviation);
    }

    #[test]
    fn gradient_vanishes_at_oracle_maximizer() {
        let c = DiagonalChannel::depolarizing(0.8).unwrap();
        let (_, w) = single_qubit_norm_oracle(&c, 2.0, 4.0).unwrap();
        let ch = ProductChannel::uniform(c, 1).unwrap();
        let g = gradient_check(&ch, &w, 2.0, 4.0, 2).unwrap();
        assert!(g.projected_gradient_norm <= 1e-5, "{}", g.projected_gradient_norm);
    }

    #[test]
    fn degenerate_spectrum_falls_back() {
        let ch = depol(0.5, 1);
        let g = gradient_check(&ch, &HermitianOperator::identity(1), 2.0, 4.0, 3).unwrap();
        assert!(g.fallback);
        assert!(g.projected_gradient_norm < 1e-6);
    }

    #[test]
    fn diagonal_scan_at_threshold_does_not_exceed_one() {
        let ch = depol((1.0f64 / 3.0).sqrt(), 2);
        let (v, _) = diagonal_witness_scan(&ch, 2.0, 4.0).unwrap();
        assert!(v <= 1.0 + 1e-9, "{v}");
    }

    #[test]
    fn tensor_with_qubit_matches_dense_kraus() {
        let omega = random_cp_map(2, 2, 5).unwrap();
        let phi = DiagonalChannel::depolarizing(0.6).unwrap();
        let t = TensorWithQubit::new(&omega, Site::Diagonal(phi.clone())).unwrap();
        // depolarizing(l) = l * id + (1 - l) * tr(.) I / 2 in Kraus form
        let mut kraus = Vec::new();
        let w0 = ((1.0 + 3.0 * 0.6) / 4.0f64).sqrt();
        let w = ((1.0 - 0.6) / 4.0f64).sqrt();
        for (i, coef) in [(0u8, w0), (1, w), (2, w), (3, w)] {
            let s = pauli_matrix(i) * Complex64::new(coef, 0.0);
            for k in omega.kraus() {
                kraus.push(k.kronecker(&s));
            }
        }
        let dense = CpMap::new(kraus).unwrap();
        let a = crate::pauli_tensor::random_psd(2, 9);
        let lhs = t.apply(a.matrix());
        let rhs = dense.apply(a.matrix()).unwrap();
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-12));
        let adj_l = t.apply_adjoint(a.matrix());
        let adj_r = SuperOperator::apply_adjoint(&dense, a.matrix());
        assert!((adj_l - adj_r).iter().all(|z| z.norm() < 1e-12));
    }
}
