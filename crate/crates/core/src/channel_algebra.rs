//! Unital qubit channels and semigroup generators in the Pauli basis.
//!
//! A diagonal channel `(l1, l2, l3)` maps `sigma_i -> l_i sigma_i`; a diagonal
//! generator `(h1, h2, h3)` maps `sigma_i -> h_i sigma_i` and kills the
//! identity. Generators whose semigroup stays completely positive are exactly
//! the nonnegative combinations of `Gamma1 = (0,1,1)`, `Gamma2 = (1,0,1)` and
//! `Gamma3 = (1,1,0)`.

use nalgebra::{Matrix3, Matrix4};
use num_complex::Complex64;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, Result};
use crate::pauli_tensor::{
    apply_site_op, eigenvalues, gaussian_matrix, site_op_from_transfer, CMatrix, HermitianOperator, SiteOp,
};
use crate::seed;

/// Slack allowed on each complete-positivity inequality.
pub const CP_SLACK: f64 = 1e-12;

/// A diagonal unital qubit channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalChannel {
    pub lambdas: [f64; 3],
}

impl DiagonalChannel {
    pub const fn new(lambdas: [f64; 3]) -> Self {
        Self { lambdas }
    }

    pub const fn identity() -> Self {
        Self::new([1.0, 1.0, 1.0])
    }

    /// `M -> l M + (1-l)/2 Tr(M) I`, CP for `-1/3 <= l <= 1`.
    pub fn depolarizing(lambda: f64) -> Result<Self> {
        check_range("depolarizing", lambda, -1.0 / 3.0, 1.0)?;
        Ok(Self::new([lambda; 3]))
    }

    /// `M -> (1+l)/2 M + (1-l)/2 s3 M s3`, CP for `-1 <= l <= 1`.
    pub fn phase_damping(lambda: f64) -> Result<Self> {
        check_range("phase-damping", lambda, -1.0, 1.0)?;
        Ok(Self::new([lambda, lambda, 1.0]))
    }

    /// `M -> l M + (1-l)/2 (s1 M s1 + s2 M s2)` for `0 <= l <= 1`.
    pub fn two_pauli(lambda: f64) -> Result<Self> {
        check_range("two-Pauli", lambda, 0.0, 1.0)?;
        // conjugation by s1 flips s2,s3; by s2 flips s1,s3
        Ok(Self::new([lambda, lambda, 2.0 * lambda - 1.0]))
    }

    /// Left-hand sides minus one of the four CP inequalities; all must be `<= 0`.
    pub fn cp_slacks(&self) -> [f64; 4] {
        let [a, b, c] = self.lambdas;
        [a + b - c - 1.0, a - b + c - 1.0, -a + b + c - 1.0, -a - b - c - 1.0]
    }

    pub fn is_cp(&self) -> bool {
        self.cp_slacks().iter().all(|&s| s <= CP_SLACK)
    }

    pub fn transfer(&self) -> Matrix4<f64> {
        let [a, b, c] = self.lambdas;
        Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, a, b, c))
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self::new(std::array::from_fn(|i| self.lambdas[i] * other.lambdas[i]))
    }

    /// Largest `|l_i|` and its (0-based) axis; ties go to the first axis.
    pub fn dominant_axis(&self) -> (usize, f64) {
        let mut best = (0, self.lambdas[0].abs());
        for (i, l) in self.lambdas.iter().enumerate().skip(1) {
            if l.abs() > best.1 {
                best = (i, l.abs());
            }
        }
        best
    }
}

fn check_range(name: &str, lambda: f64, lo: f64, hi: f64) -> Result<()> {
    if !(lo..=hi).contains(&lambda) {
        return domain(format!("{name} parameter {lambda} outside [{lo}, {hi}]"));
    }
    Ok(())
}

/// A diagonal generator `(h1, h2, h3)`. Signed rates are representable so that
/// membership in the CP class can be tested.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorTriple {
    pub rates: [f64; 3],
}

/// Weights of a generator over `Gamma1, Gamma2, Gamma3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaWeights {
    pub a: [f64; 3],
}

impl GammaWeights {
    pub fn recompose(&self) -> GeneratorTriple {
        let [a1, a2, a3] = self.a;
        GeneratorTriple::new([a2 + a3, a1 + a3, a1 + a2])
    }

    pub fn is_nonnegative(&self) -> bool {
        self.a.iter().all(|&x| x >= -CP_SLACK)
    }
}

impl GeneratorTriple {
    pub const fn new(rates: [f64; 3]) -> Self {
        Self { rates }
    }

    /// `H_u(M) = M - Tr(M)/2 I`.
    pub const fn uniform() -> Self {
        Self::new([1.0, 1.0, 1.0])
    }

    /// `Gamma_i` for `i` in 1..=3.
    pub fn gamma(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Self::new([0.0, 1.0, 1.0])),
            2 => Ok(Self::new([1.0, 0.0, 1.0])),
            3 => Ok(Self::new([1.0, 1.0, 0.0])),
            _ => domain(format!("Gamma index {i} outside 1..=3")),
        }
    }

    pub fn decompose_gamma(&self) -> GammaWeights {
        let [h1, h2, h3] = self.rates;
        GammaWeights {
            a: [(-h1 + h2 + h3) / 2.0, (h1 - h2 + h3) / 2.0, (h1 + h2 - h3) / 2.0],
        }
    }

    /// Whether `e^{-tH}` is CP for every `t >= 0`.
    pub fn is_gcp(&self) -> bool {
        self.decompose_gamma().is_nonnegative()
    }

    pub fn h_min(&self) -> f64 {
        self.rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn exponentiate(&self, t: f64) -> Result<DiagonalChannel> {
        if !(t >= 0.0) {
            return domain(format!("semigroup time t = {t} must be >= 0"));
        }
        Ok(DiagonalChannel::new(self.rates.map(|h| (-t * h).exp())))
    }

    /// Rescales to unit minimal rate.
    pub fn normalize_rate(&self) -> Result<Self> {
        let m = self.h_min();
        if !(m > 0.0) {
            return domain(format!("generator {:?} has h_min = {m}; cannot normalize", self.rates));
        }
        Ok(Self::new(self.rates.map(|h| h / m)))
    }

    /// `diag(0, h1, h2, h3)`.
    pub fn transfer(&self) -> Matrix4<f64> {
        let [a, b, c] = self.rates;
        Matrix4::from_diagonal(&nalgebra::Vector4::new(0.0, a, b, c))
    }

    pub fn site_op(&self) -> SiteOp {
        site_op_from_transfer(&self.transfer())
    }
}

/// Diagonalizes a symmetric generator matrix in the Pauli basis (first row and
/// column zero). Returns the rates in ascending order and a rotation `O` with
/// `O diag(h) O^T` equal to the traceless block.
pub fn diagonalize_generator(s: &Matrix4<f64>) -> Result<(GeneratorTriple, Matrix3<f64>)> {
    for i in 0..4 {
        for j in 0..4 {
            if (s[(i, j)] - s[(j, i)]).abs() > 1e-10 {
                return validation(format!("generator matrix is not symmetric at ({i},{j})"));
            }
        }
        if s[(0, i)].abs() > 1e-10 || s[(i, 0)].abs() > 1e-10 {
            return validation("generator must annihilate the identity (first row and column zero)");
        }
    }
    let block = CMatrix::from_fn(3, 3, |i, j| Complex64::new(0.5 * (s[(i + 1, j + 1)] + s[(j + 1, i + 1)]), 0.0));
    let dec = crate::pauli_tensor::eigen_raw(&block)?;
    let mut o = Matrix3::from_fn(|i, j| dec.eigenvectors[(i, j)].re);
    // Jacobi on a real symmetric input only produces real phases (+-1)
    for j in 0..3 {
        let im: f64 = (0..3).map(|i| dec.eigenvectors[(i, j)].im.abs()).sum();
        if im > 1e-12 {
            let col = dec.eigenvectors.column(j);
            let pivot = (0..3).max_by(|&a, &b| col[a].norm().total_cmp(&col[b].norm())).unwrap();
            let phase = col[pivot] / col[pivot].norm();
            for i in 0..3 {
                o[(i, j)] = (dec.eigenvectors[(i, j)] * phase.conj()).re;
            }
        }
    }
    if o.determinant() < 0.0 {
        o = -o;
    }
    let h = GeneratorTriple::new([dec.eigenvalues[0], dec.eigenvalues[1], dec.eigenvalues[2]]);
    Ok((h, o))
}

/// A unital trace-preserving qubit channel given by its Pauli transfer matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrix {
    rows: [[f64; 4]; 4],
}

impl TransferMatrix {
    /// Validates trace preservation, unitality and complete positivity (via the
    /// Choi matrix).
    pub fn new(t: Matrix4<f64>) -> Result<Self> {
        for k in 0..4 {
            let e = if k == 0 { 1.0 } else { 0.0 };
            if (t[(0, k)] - e).abs() > 1e-10 {
                return validation("transfer matrix is not trace preserving (row 0 must be (1,0,0,0))");
            }
            if (t[(k, 0)] - e).abs() > 1e-10 {
                return validation("non-unital qubit channels are not supported (column 0 must be (1,0,0,0))");
            }
        }
        let choi_min = eigenvalues(&choi_matrix(&site_op_from_transfer(&t)))?[0];
        if choi_min < -1e-10 {
            return validation(format!("transfer matrix is not completely positive (Choi eigenvalue {choi_min:e})"));
        }
        Ok(Self {
            rows: std::array::from_fn(|i| std::array::from_fn(|j| t[(i, j)])),
        })
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.rows[i][j])
    }
}

/// Choi matrix `sum_{ij} E_ij (x) Phi(E_ij)` of a single-site operation.
pub fn choi_matrix(op: &SiteOp) -> CMatrix {
    // slot e = 2i + j; column e of op is Phi(E_ij) in slot coordinates
    CMatrix::from_fn(4, 4, |r, c| {
        let (i, a) = (r >> 1, r & 1);
        let (j, b) = (c >> 1, c & 1);
        op[2 * a + b][2 * i + j]
    })
}

/// One site of a [`ProductChannel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Site {
    Diagonal(DiagonalChannel),
    Transfer(TransferMatrix),
}

impl Site {
    pub fn transfer(&self) -> Matrix4<f64> {
        match self {
            Site::Diagonal(c) => c.transfer(),
            Site::Transfer(t) => t.matrix(),
        }
    }

    pub fn is_cp(&self) -> bool {
        match self {
            Site::Diagonal(c) => c.is_cp(),
            // validated on construction
            Site::Transfer(_) => true,
        }
    }
}

/// `Phi_1 (x) ... (x) Phi_n`, one unital qubit channel per site.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductChannel {
    sites: Vec<Site>,
}

impl ProductChannel {
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        if sites.is_empty() {
            return validation("a product channel needs at least one site");
        }
        if sites.len() > crate::pauli_tensor::MAX_SITES {
            return validation(format!("{} sites exceeds the supported maximum", sites.len()));
        }
        Ok(Self { sites })
    }

    pub fn diagonal(channels: Vec<DiagonalChannel>) -> Result<Self> {
        Self::new(channels.into_iter().map(Site::Diagonal).collect())
    }

    /// `e^{-t_1 H_1} (x) ... (x) e^{-t_n H_n}`.
    pub fn from_generators(generators: &[GeneratorTriple], times: &[f64]) -> Result<Self> {
        if generators.len() != times.len() {
            return validation(format!("{} generators but {} times", generators.len(), times.len()));
        }
        Self::diagonal(
            generators
                .iter()
                .zip(times)
                .map(|(h, &t)| h.exponentiate(t))
                .collect::<Result<_>>()?,
        )
    }

    pub fn uniform(channel: DiagonalChannel, n: usize) -> Result<Self> {
        Self::diagonal(vec![channel; n])
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.sites.len()
    }

    pub fn transfers(&self) -> Vec<Matrix4<f64>> {
        self.sites.iter().map(Site::transfer).collect()
    }

    pub fn is_cp(&self) -> bool {
        self.sites.iter().all(Site::is_cp)
    }

    /// Per-site diagonal channels, if every site is diagonal.
    pub fn diagonal_sites(&self) -> Option<Vec<DiagonalChannel>> {
        self.sites
            .iter()
            .map(|s| match s {
                Site::Diagonal(c) => Some(*c),
                Site::Transfer(_) => None,
            })
            .collect()
    }

    pub(crate) fn apply_matrix(&self, a: &CMatrix, adjoint: bool) -> CMatrix {
        let n = self.sites.len();
        let mut m = a.clone();
        for (k, site) in self.sites.iter().enumerate() {
            if site.transfer() == Matrix4::identity() {
                continue;
            }
            let t = if adjoint { site.transfer().transpose() } else { site.transfer() };
            apply_site_op(&mut m, k, n, &site_op_from_transfer(&t));
        }
        m
    }

    pub fn apply(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        if a.dim() != self.dim() {
            return validation(format!("operator dim {} does not match {}-site channel", a.dim(), self.len()));
        }
        Ok(HermitianOperator::from_matrix_unchecked(self.apply_matrix(a.matrix(), false)))
    }
}

/// `H^{(k)}`: a generator acting on site `k` of an `n`-site operator.
pub fn apply_generator_on_site(h: &GeneratorTriple, site: usize, a: &CMatrix) -> Result<CMatrix> {
    let d = a.nrows();
    if !d.is_power_of_two() || d < 2 {
        return validation(format!("dimension {d} is not 2^n"));
    }
    let n = d.trailing_zeros() as usize;
    if site >= n {
        return validation(format!("site {site} out of range for {n} sites"));
    }
    let mut m = a.clone();
    apply_site_op(&mut m, site, n, &h.site_op());
    Ok(m)
}

/// A completely positive map on `M_k` in Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct CpMap {
    kraus: Vec<CMatrix>,
    dim: usize,
}

impl CpMap {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return validation("a Kraus representation needs at least one operator");
        };
        let dim = first.nrows();
        if dim == 0 || kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return validation("Kraus operators must be square and of equal size");
        }
        Ok(Self { kraus, dim })
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `sum K_i* K_i = I` to 1e-10.
    pub fn is_trace_preserving(&self) -> bool {
        let s: CMatrix = self.kraus.iter().map(|k| k.adjoint() * k).sum();
        let id = CMatrix::identity(self.dim, self.dim);
        (s - id).iter().all(|z| z.norm() <= 1e-10)
    }

    pub(crate) fn apply_matrix(&self, a: &CMatrix, adjoint: bool) -> CMatrix {
        let mut out = CMatrix::zeros(a.nrows(), a.ncols());
        for k in &self.kraus {
            if adjoint {
                out += k.adjoint() * a * k;
            } else {
                out += k * a * k.adjoint();
            }
        }
        out
    }

    pub fn apply(&self, a: &CMatrix) -> Result<CMatrix> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return validation(format!("operator is {}x{}, map acts on M_{}", a.nrows(), a.ncols(), self.dim));
        }
        Ok(self.apply_matrix(a, false))
    }

    /// `K_i -> K_i (x) I_m`.
    pub fn tensor_identity(&self, m: usize) -> Self {
        let id = CMatrix::identity(m, m);
        Self {
            kraus: self.kraus.iter().map(|k| k.kronecker(&id)).collect(),
            dim: self.dim * m,
        }
    }
}

/// A seeded unit-rate generator: exponential Gamma weights, recomposed and
/// rate-normalized. Degenerate draws are resampled.
pub fn random_unit_rate_generator(seed: u64) -> GeneratorTriple {
    let mut rng = seed::rng(seed);
    loop {
        let a: [f64; 3] = std::array::from_fn(|_| Exp1.sample(&mut rng));
        if let Ok(h) = unit_rate_from_weights(GammaWeights { a }) {
            return h;
        }
    }
}

/// Recomposes nonnegative weights and normalizes the rate.
pub fn unit_rate_from_weights(w: GammaWeights) -> Result<GeneratorTriple> {
    if !w.is_nonnegative() {
        return domain(format!("Gamma weights {:?} are not all nonnegative", w.a));
    }
    w.recompose().normalize_rate()
}

/// Seeded Kraus operators with standard complex Gaussian entries on `M_k`.
pub fn random_cp_map(k: usize, kraus_count: usize, seed: u64) -> Result<CpMap> {
    if !matches!(k, 2 | 4) {
        return domain(format!("random CP maps are generated on M_2 or M_4, not M_{k}"));
    }
    if kraus_count == 0 {
        return domain("kraus_count must be >= 1");
    }
    let mut rng = seed::rng(seed);
    CpMap::new((0..kraus_count).map(|_| gaussian_matrix(k, k, &mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::HyperqError;
    use crate::pauli_tensor::{pauli_expand, pauli_matrix, random_hermitian};
    use approx::assert_abs_diff_eq;

    #[test]
    fn cp_examples() {
        assert!(DiagonalChannel::identity().is_cp());
        assert!(!DiagonalChannel::new([-0.4; 3]).is_cp());
        assert!(!DiagonalChannel::new([1.0, 1.0, -1.0]).is_cp());
        assert!(DiagonalChannel::depolarizing(-1.0 / 3.0).unwrap().is_cp());
    }

    #[test]
    fn gamma_decomposition_examples() {
        assert_eq!(GeneratorTriple::uniform().decompose_gamma().a, [0.5, 0.5, 0.5]);
        assert_eq!(GeneratorTriple::gamma(3).unwrap().decompose_gamma().a, [0.0, 0.0, 1.0]);
        let h = GeneratorTriple::new([3.0, 1.0, 1.0]);
        assert_eq!(h.decompose_gamma().a, [-0.5, 1.5, 1.5]);
        assert!(!h.is_gcp());
        // CP violation of the semigroup at small t confirms the flag
        assert!(!h.exponentiate(0.01).unwrap().is_cp());
    }

    #[test]
    fn gcp_and_h_min() {
        let hu = GeneratorTriple::uniform();
        assert!(hu.is_gcp());
        assert_eq!(hu.h_min(), 1.0);
        let g3 = GeneratorTriple::gamma(3).unwrap();
        assert!(g3.is_gcp());
        assert_eq!(g3.h_min(), 0.0);
        assert!(GeneratorTriple::gamma(4).is_err());
    }

    #[test]
    fn exponentiate_examples() {
        let d = GeneratorTriple::uniform().exponentiate(2f64.ln()).unwrap();
        for l in d.lambdas {
            assert_abs_diff_eq!(l, 0.5, epsilon = 1e-15);
        }
        assert_eq!(GeneratorTriple::new([2.0, 5.0, 0.3]).exponentiate(0.0).unwrap(), DiagonalChannel::identity());
        let t = 0.7;
        let g = GeneratorTriple::gamma(3).unwrap().exponentiate(t).unwrap();
        assert_eq!(g, DiagonalChannel::phase_damping((-t).exp()).unwrap());
        assert!(matches!(GeneratorTriple::uniform().exponentiate(-1.0), Err(HyperqError::Domain(_))));
    }

    #[test]
    fn constructor_examples() {
        assert_eq!(DiagonalChannel::depolarizing(1.0).unwrap(), DiagonalChannel::identity());
        assert_eq!(DiagonalChannel::two_pauli(1.0).unwrap(), DiagonalChannel::identity());
        assert_eq!(DiagonalChannel::two_pauli(0.5).unwrap().lambdas, [0.5, 0.5, 0.0]);
        assert!(DiagonalChannel::depolarizing(-0.5).is_err());
        assert!(DiagonalChannel::phase_damping(1.5).is_err());
        assert!(DiagonalChannel::two_pauli(-0.1).is_err());
    }

    #[test]
    fn two_pauli_triple_matches_kraus_form() {
        // expand Theta_l(M) = l M + (1-l)/2 (s1 M s1 + s2 M s2) on each Pauli
        let l: f64 = 0.3;
        let s1 = pauli_matrix(1);
        let s2 = pauli_matrix(2);
        let theta = CpMap::new(vec![
            CMatrix::identity(2, 2) * Complex64::new(l.sqrt(), 0.0),
            &s1 * Complex64::new(((1.0 - l) / 2.0).sqrt(), 0.0),
            &s2 * Complex64::new(((1.0 - l) / 2.0).sqrt(), 0.0),
        ])
        .unwrap();
        assert!(theta.is_trace_preserving());
        let expected = DiagonalChannel::two_pauli(l).unwrap().lambdas;
        for i in 1..4u8 {
            let out = theta.apply(&pauli_matrix(i)).unwrap();
            let c = pauli_expand(&HermitianOperator::new(out).unwrap());
            assert_abs_diff_eq!(c.coeffs()[i as usize], expected[i as usize - 1], epsilon = 1e-14);
        }
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(GeneratorTriple::new([2.0, 2.0, 2.0]).normalize_rate().unwrap().rates, [1.0, 1.0, 1.0]);
        assert_eq!(GeneratorTriple::new([2.0, 4.0, 6.0]).normalize_rate().unwrap().rates, [1.0, 2.0, 3.0]);
        assert!(matches!(
            GeneratorTriple::gamma(3).unwrap().normalize_rate(),
            Err(HyperqError::Domain(_))
        ));
    }

    fn embed(block: Matrix3<f64>) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| if i == 0 || j == 0 { 0.0 } else { block[(i - 1, j - 1)] })
    }

    #[test]
    fn diagonalize_examples() {
        let (h, o) = diagonalize_generator(&embed(Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 2.0, 3.0)))).unwrap();
        assert_eq!(h.rates, [1.0, 2.0, 3.0]);
        assert_abs_diff_eq!((o - Matrix3::identity()).abs().max(), 0.0, epsilon = 1e-15);

        let (h, _) = diagonalize_generator(&Matrix4::zeros()).unwrap();
        assert_eq!(h.rates, [0.0, 0.0, 0.0]);

        let mut asym = Matrix4::zeros();
        asym[(1, 2)] = 1.0;
        assert!(matches!(diagonalize_generator(&asym), Err(HyperqError::Validation(_))));
    }

    #[test]
    fn diagonalize_recovers_rotated_rates() {
        let r = nalgebra::Rotation3::from_euler_angles(0.3, -1.1, 2.0).into_inner();
        let d = Matrix3::from_diagonal(&nalgebra::Vector3::new(3.0, 1.0, 2.0));
        let s = r * d * r.transpose();
        let (h, o) = diagonalize_generator(&embed(s)).unwrap();
        for (got, want) in h.rates.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let back = o * Matrix3::from_diagonal(&nalgebra::Vector3::from(h.rates)) * o.transpose();
        assert_abs_diff_eq!((back - s).abs().max(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!((o.transpose() * o - Matrix3::identity()).abs().max(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn transfer_matrix_validation() {
        assert!(TransferMatrix::new(DiagonalChannel::depolarizing(0.2).unwrap().transfer()).is_ok());
        assert!(TransferMatrix::new(DiagonalChannel::new([1.0, 1.0, -1.0]).transfer()).is_err());
        let mut nonunital = Matrix4::identity() * 0.5;
        nonunital[(0, 0)] = 1.0;
        nonunital[(3, 0)] = 0.5;
        assert!(TransferMatrix::new(nonunital).is_err());
    }

    #[test]
    fn random_generators_are_unit_rate() {
        for seed in 0..200 {
            let h = random_unit_rate_generator(seed);
            assert!(h.is_gcp());
            assert_abs_diff_eq!(h.h_min(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(random_unit_rate_generator(9), random_unit_rate_generator(9));
        let forced = unit_rate_from_weights(GammaWeights { a: [0.5; 3] }).unwrap();
        assert_eq!(forced, GeneratorTriple::uniform());
    }

    #[test]
    fn random_cp_map_shape_and_determinism() {
        let m = random_cp_map(4, 3, 1).unwrap();
        assert_eq!(m.dim(), 4);
        assert_eq!(m.kraus().len(), 3);
        assert_eq!(m, random_cp_map(4, 3, 1).unwrap());
        assert!(random_cp_map(3, 1, 0).is_err());
        assert!(random_cp_map(2, 0, 0).is_err());
    }

    #[test]
    fn product_channel_scales_paulis() {
        let ch = ProductChannel::diagonal(vec![DiagonalChannel::new([0.2, -0.3, 0.4])]).unwrap();
        let s1 = HermitianOperator::new(pauli_matrix(1)).unwrap();
        let out = ch.apply(&s1).unwrap();
        assert_abs_diff_eq!(out.max_abs_diff(&s1.scaled(0.2)), 0.0, epsilon = 1e-15);
        let a = random_hermitian(1, 4);
        let c = pauli_expand(&ch.apply(&a).unwrap());
        let c0 = pauli_expand(&a);
        assert_abs_diff_eq!(c.coeffs()[2], -0.3 * c0.coeffs()[2], epsilon = 1e-14);
    }
}
