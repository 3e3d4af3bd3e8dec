//! Dense Hermitian-operator arithmetic on `C^{2^n}`: Pauli-basis expansion,
//! spectral calculus, Schatten norms and mode-wise superoperator application.
//!
//! Pauli words are indexed base-4 little-endian: the letter of site 1 is the
//! least significant digit. In the matrix picture site 1 is the first
//! Kronecker factor.

mod jacobi;
mod modes;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, validation, HyperqError, Result};
use crate::seed;

pub use jacobi::{MAX_SWEEPS, OFF_DIAGONAL_TOL};
pub use modes::{apply_product_map, apply_site_op, site_op_from_transfer, SiteOp};
pub(crate) use modes::{FROM_PAULI, TO_PAULI};

pub type CMatrix = DMatrix<Complex64>;

/// Absolute tolerance of the Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues this close to zero are treated as zero before fractional powers.
pub const ZERO_CLAMP: f64 = 1e-12;

/// Upper bound on the site count handled by the dense routines.
pub const MAX_SITES: usize = 8;

pub(crate) fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// The 2x2 Pauli matrix `sigma_letter` (letter 0 is the identity).
pub fn pauli_matrix(letter: u8) -> CMatrix {
    let o = czero();
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match letter {
        0 => CMatrix::from_row_slice(2, 2, &[one, o, o, one]),
        1 => CMatrix::from_row_slice(2, 2, &[o, one, one, o]),
        2 => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        3 => CMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
        _ => panic!("Pauli letter {letter} out of range"),
    }
}

/// A tensor product of Pauli letters, one per site.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliWord {
    letters: Vec<u8>,
}

impl PauliWord {
    pub fn new(letters: Vec<u8>) -> Result<Self> {
        if letters.is_empty() {
            return validation("Pauli word must have at least one letter");
        }
        if let Some(bad) = letters.iter().find(|&&l| l > 3) {
            return validation(format!("Pauli letter {bad} out of range 0..=3"));
        }
        Ok(Self { letters })
    }

    pub fn from_index(index: usize, sites: usize) -> Result<Self> {
        if sites == 0 || index >= 1usize << (2 * sites) {
            return validation(format!("word index {index} out of range for {sites} sites"));
        }
        Ok(Self {
            letters: (0..sites).map(|k| ((index >> (2 * k)) & 3) as u8).collect(),
        })
    }

    pub fn index(&self) -> usize {
        self.letters
            .iter()
            .enumerate()
            .map(|(k, &l)| (l as usize) << (2 * k))
            .sum()
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn sites(&self) -> usize {
        self.letters.len()
    }

    /// `sigma_{s1} (x) ... (x) sigma_{sn}`.
    pub fn matrix(&self) -> CMatrix {
        let mut m = pauli_matrix(self.letters[0]);
        for &l in &self.letters[1..] {
            m = m.kronecker(&pauli_matrix(l));
        }
        m
    }
}

/// A Hermitian matrix of dimension `2^n`, `n >= 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
    sites: usize,
}

fn sites_of(dim: usize) -> Option<usize> {
    (dim >= 2 && dim.is_power_of_two() && dim.trailing_zeros() as usize <= MAX_SITES)
        .then(|| dim.trailing_zeros() as usize)
}

impl HermitianOperator {
    /// Validates shape and hermiticity (to [`HERMITIAN_TOL`]).
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return validation(format!("matrix is {}x{}, not square", m.nrows(), m.ncols()));
        }
        let Some(sites) = sites_of(m.nrows()) else {
            return validation(format!("dimension {} is not 2^n with 1 <= n <= {MAX_SITES}", m.nrows()));
        };
        let d = m.nrows();
        for i in 0..d {
            for j in i..d {
                let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
                if dev > HERMITIAN_TOL {
                    return validation(format!("entry ({i},{j}) breaks hermiticity by {dev:e}"));
                }
            }
        }
        Ok(Self::hermitize(m, sites))
    }

    /// For matrices Hermitian by construction; rounding asymmetry is averaged out.
    pub(crate) fn from_matrix_unchecked(m: CMatrix) -> Self {
        let sites = sites_of(m.nrows()).expect("dimension must be 2^n");
        Self::hermitize(m, sites)
    }

    fn hermitize(mut m: CMatrix, sites: usize) -> Self {
        let d = m.nrows();
        for i in 0..d {
            m[(i, i)].im = 0.0;
            for j in (i + 1)..d {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Self { m, sites }
    }

    pub fn identity(sites: usize) -> Self {
        Self::from_matrix_unchecked(CMatrix::identity(1 << sites, 1 << sites))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let d = values.len();
        if sites_of(d).is_none() {
            return validation(format!("diagonal length {d} is not 2^n"));
        }
        Ok(Self::from_matrix_unchecked(CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                czero()
            }
        })))
    }

    /// Builds from real and imaginary parts given row by row.
    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let d = re.len();
        if im.len() != d || re.iter().chain(im).any(|row| row.len() != d) {
            return validation("real and imaginary parts must both be square and equally sized");
        }
        Self::new(CMatrix::from_fn(d, d, |i, j| Complex64::new(re[i][j], im[i][j])))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// `tau(A) = Tr(A) / dim`.
    pub fn normalized_trace(&self) -> f64 {
        self.trace() / self.dim() as f64
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            m: self.m.map(|z| z * s),
            sites: self.sites,
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_matrix_unchecked(self.m.kronecker(&other.m))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigenvalues(&self.m)?[0])
    }
}

#[derive(Serialize, Deserialize)]
struct HermitianRepr {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for HermitianOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = self.dim();
        HermitianRepr {
            dim: d,
            re: (0..d).map(|i| (0..d).map(|j| self.m[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| self.m[(i, j)].im).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = HermitianRepr::deserialize(d)?;
        if repr.re.len() != repr.dim {
            return Err(serde::de::Error::custom("row count does not match dim"));
        }
        Self::from_parts(&repr.re, &repr.im).map_err(serde::de::Error::custom)
    }
}

/// Real expansion coefficients over the `4^n` Pauli words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliCoefficients {
    sites: usize,
    coeffs: Vec<f64>,
}

impl PauliCoefficients {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let len = coeffs.len();
        let ok = len >= 4 && len.is_power_of_two() && len.trailing_zeros() % 2 == 0;
        if !ok {
            return validation(format!("coefficient length {len} is not a power of 4"));
        }
        let sites = len.trailing_zeros() as usize / 2;
        if sites > MAX_SITES {
            return validation(format!("{sites} sites exceeds the supported {MAX_SITES}"));
        }
        Ok(Self { sites, coeffs })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, word: &PauliWord) -> f64 {
        self.coeffs[word.index()]
    }
}

/// Moves slot `(i_k, j_k)` of every mode to base-4 digit `k` of a word index.
fn tensor_to_word_order(m: &CMatrix, sites: usize) -> Vec<Complex64> {
    let d = m.nrows();
    let mut out = vec![czero(); d * d];
    for i in 0..d {
        for j in 0..d {
            let word: usize = (0..sites)
                .map(|k| {
                    let bit = sites - 1 - k;
                    let slot = 2 * ((i >> bit) & 1) + ((j >> bit) & 1);
                    slot << (2 * k)
                })
                .sum();
            out[word] = m[(i, j)];
        }
    }
    out
}

fn word_order_to_tensor(w: &[Complex64], sites: usize) -> CMatrix {
    let d = 1usize << sites;
    CMatrix::from_fn(d, d, |i, j| {
        let word: usize = (0..sites)
            .map(|k| {
                let bit = sites - 1 - k;
                (2 * ((i >> bit) & 1) + ((j >> bit) & 1)) << (2 * k)
            })
            .sum();
        w[word]
    })
}

/// `coeffs[s] = 2^{-n} Tr[(sigma_{s1} (x) ... (x) sigma_{sn}) A]`.
pub fn pauli_expand(a: &HermitianOperator) -> PauliCoefficients {
    let n = a.sites();
    let mut m = a.matrix().clone();
    for k in 0..n {
        apply_site_op(&mut m, k, n, &TO_PAULI);
    }
    let coeffs = tensor_to_word_order(&m, n).into_iter().map(|z| z.re).collect();
    PauliCoefficients { sites: n, coeffs }
}

/// Full complex expansion, used to test that hermiticity means real coefficients.
pub fn pauli_expand_complex(m: &CMatrix) -> Result<Vec<Complex64>> {
    let Some(n) = sites_of(m.nrows()).filter(|_| m.nrows() == m.ncols()) else {
        return validation("matrix must be square with dimension 2^n");
    };
    let mut m = m.clone();
    for k in 0..n {
        apply_site_op(&mut m, k, n, &TO_PAULI);
    }
    Ok(tensor_to_word_order(&m, n))
}

/// `A = sum_s coeffs[s] sigma_{s1} (x) ... (x) sigma_{sn}`.
pub fn pauli_reconstruct(c: &PauliCoefficients) -> HermitianOperator {
    let n = c.sites();
    let w: Vec<Complex64> = c.coeffs().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut m = word_order_to_tensor(&w, n);
    for k in 0..n {
        apply_site_op(&mut m, k, n, &FROM_PAULI);
    }
    HermitianOperator::from_matrix_unchecked(m)
}

/// Eigenvalues ascending and a unitary whose columns are eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// `V diag(values) V*`.
    pub fn recompose(&self, values: &[f64]) -> CMatrix {
        let v = &self.eigenvectors;
        let d = v.nrows();
        CMatrix::from_fn(d, d, |i, j| {
            (0..d)
                .filter(|&k| values[k] != 0.0)
                .map(|k| v[(i, k)] * values[k] * v[(j, k)].conj())
                .sum()
        })
    }

    /// Applies a scalar map to the spectrum; `None` marks the map undefined there.
    pub fn apply(&self, f: impl Fn(f64) -> Option<f64>) -> Result<HermitianOperator> {
        let values = self
            .eigenvalues
            .iter()
            .map(|&x| f(x).ok_or_else(|| HyperqError::Domain(format!("function undefined at eigenvalue {x:e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(HermitianOperator::from_matrix_unchecked(self.recompose(&values)))
    }

    pub fn power(&self, r: f64) -> Result<HermitianOperator> {
        self.apply(|x| clamped_power(x, r))
    }
}

pub fn eigen_hermitian(a: &HermitianOperator) -> Result<SpectralDecomposition> {
    let (eigenvalues, vectors) = jacobi::jacobi_eigen(a.matrix(), true)?;
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: vectors.expect("vectors requested"),
    })
}

/// Ascending eigenvalues of a Hermitian matrix, without eigenvectors.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    Ok(jacobi::jacobi_eigen(m, false)?.0)
}

pub(crate) fn eigen_raw(m: &CMatrix) -> Result<SpectralDecomposition> {
    let (eigenvalues, vectors) = jacobi::jacobi_eigen(m, true)?;
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: vectors.expect("vectors requested"),
    })
}

/// Clamps `|x| <= ZERO_CLAMP` to zero, then evaluates `x^r`. Integer `r` is
/// defined on all reals; fractional `r` only on `x >= 0`, with `0^r = 0` for
/// `r > 0`.
pub fn clamped_power(x: f64, r: f64) -> Option<f64> {
    let x = if x.abs() <= ZERO_CLAMP { 0.0 } else { x };
    if r.fract() == 0.0 && r.abs() < 64.0 {
        if x == 0.0 && r < 0.0 {
            return None;
        }
        return Some(x.powi(r as i32));
    }
    if x < 0.0 {
        None
    } else if x == 0.0 {
        (r > 0.0).then_some(0.0)
    } else {
        Some(x.powf(r))
    }
}

/// `x^2 ln x^2` with the continuous value 0 at 0.
pub fn sq_log_sq(x: f64) -> f64 {
    let s = x * x;
    if s == 0.0 {
        0.0
    } else {
        s * s.ln()
    }
}

/// Applies `f` to the spectrum of `a`.
pub fn matrix_function(a: &HermitianOperator, f: impl Fn(f64) -> Option<f64>) -> Result<HermitianOperator> {
    eigen_hermitian(a)?.apply(f)
}

/// `A^r` under the conventions of [`clamped_power`]; `r = 1` returns `A` unchanged.
pub fn matrix_power(a: &HermitianOperator, r: f64) -> Result<HermitianOperator> {
    if r == 1.0 {
        return Ok(a.clone());
    }
    matrix_function(a, |x| clamped_power(x, r))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || p.is_nan() {
        return domain(format!("Schatten exponent p = {p} must be >= 1"));
    }
    Ok(())
}

/// `sum |lambda_i|^p` from a spectrum.
pub(crate) fn power_sum(eigs: &[f64], p: f64) -> f64 {
    eigs.iter().map(|x| x.abs().powf(p)).sum()
}

/// `(sum_i |lambda_i|^p)^{1/p}`.
pub fn schatten_norm(a: &HermitianOperator, p: f64) -> Result<f64> {
    check_p(p)?;
    if p == 2.0 {
        return Ok(a.frobenius_norm());
    }
    Ok(power_sum(&eigenvalues(a.matrix())?, p).powf(1.0 / p))
}

/// `(tau |A|^p)^{1/p} = dim^{-1/p} ||A||_p`.
pub fn normalized_norm(a: &HermitianOperator, p: f64) -> Result<f64> {
    check_p(p)?;
    let d = a.dim() as f64;
    if p == 2.0 {
        let f2: f64 = a.matrix().iter().map(|z| z.norm_sqr()).sum();
        return Ok((f2 / d).sqrt());
    }
    Ok((power_sum(&eigenvalues(a.matrix())?, p) / d).powf(1.0 / p))
}

/// Schatten norm of an arbitrary square matrix via its singular values.
pub fn general_schatten_norm(m: &CMatrix, p: f64) -> Result<f64> {
    check_p(p)?;
    if p == 2.0 {
        return Ok(m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    }
    let gram = m.adjoint() * m;
    let sv2 = eigenvalues(&gram)?;
    Ok(sv2.iter().map(|&s| s.max(0.0).sqrt().powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `<A, B> = Tr(A* B)`.
pub fn hs_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return validation(format!("dimension mismatch {} vs {}", a.dim(), b.dim()));
    }
    Ok(hs_inner_raw(a.matrix(), b.matrix()))
}

pub(crate) fn hs_inner_raw(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Standard complex Gaussian matrix (each part with variance 1/2).
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * scale, im * scale)
    })
}

/// `G G*` for a seeded standard complex Gaussian `G` of size `2^n`.
pub fn random_psd(sites: usize, seed: u64) -> HermitianOperator {
    assert!((1..=MAX_SITES).contains(&sites), "site count {sites} out of range");
    let d = 1usize << sites;
    let mut rng = seed::rng(seed);
    let g = gaussian_matrix(d, d, &mut rng);
    HermitianOperator::from_matrix_unchecked(&g * g.adjoint())
}

/// A seeded random Hermitian matrix `(G + G*)/2`.
pub fn random_hermitian(sites: usize, seed: u64) -> HermitianOperator {
    let d = 1usize << sites;
    let mut rng = seed::rng(seed);
    let g = gaussian_matrix(d, d, &mut rng);
    HermitianOperator::from_matrix_unchecked((&g + g.adjoint()) * Complex64::new(0.5, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(v: &[f64]) -> HermitianOperator {
        HermitianOperator::diagonal(v).unwrap()
    }

    fn sigma(l: u8) -> HermitianOperator {
        HermitianOperator::new(pauli_matrix(l)).unwrap()
    }

    #[test]
    fn expand_basis_elements() {
        assert_eq!(pauli_expand(&sigma(1)).coeffs(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(pauli_expand(&diag(&[1.0, 0.0])).coeffs(), &[0.5, 0.0, 0.0, 0.5]);
        // sigma_2 on site 1, sigma_3 on site 2: word index 2 + 4*3
        let w = PauliWord::new(vec![2, 3]).unwrap();
        let c = pauli_expand(&HermitianOperator::new(w.matrix()).unwrap());
        for (i, &x) in c.coeffs().iter().enumerate() {
            assert_abs_diff_eq!(x, if i == 14 { 1.0 } else { 0.0 }, epsilon = 1e-15);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let c = PauliCoefficients::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(pauli_reconstruct(&c), HermitianOperator::identity(1));
        let c = PauliCoefficients::new(vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(pauli_reconstruct(&c), diag(&[1.0, 0.0]));
        assert!(PauliCoefficients::new(vec![1.0; 8]).is_err());
        assert!(PauliCoefficients::new(vec![1.0; 2]).is_err());
    }

    #[test]
    fn reconstruct_e0_tensor_e0() {
        // indicator of the string 00 is E0 (x) E0 = (s0 + s3)/2 (x) (s0 + s3)/2
        let mut c = vec![0.0; 16];
        for &(a, b) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            c[a + 4 * b] = 0.25;
        }
        let m = pauli_reconstruct(&PauliCoefficients::new(c).unwrap());
        assert_abs_diff_eq!(m.max_abs_diff(&diag(&[1.0, 0.0, 0.0, 0.0])), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn word_index_roundtrip() {
        for idx in 0..64 {
            assert_eq!(PauliWord::from_index(idx, 3).unwrap().index(), idx);
        }
        assert!(PauliWord::new(vec![0, 4]).is_err());
        assert!(PauliWord::new(vec![]).is_err());
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = pauli_matrix(1);
        m[(0, 1)] = Complex64::new(2.0, 0.0);
        assert!(matches!(HermitianOperator::new(m), Err(HyperqError::Validation(_))));
        assert!(HermitianOperator::new(CMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn eigen_examples() {
        assert_eq!(eigen_hermitian(&diag(&[1.0, 0.0])).unwrap().eigenvalues, vec![0.0, 1.0]);
        let e = eigen_hermitian(&sigma(1)).unwrap().eigenvalues;
        assert_abs_diff_eq!(e[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], 1.0, epsilon = 1e-15);
        let c = PauliCoefficients::new(vec![1.0, 0.0, 0.0, 0.5]).unwrap();
        let e = eigen_hermitian(&pauli_reconstruct(&c)).unwrap().eigenvalues;
        assert_abs_diff_eq!(e[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], 1.5, epsilon = 1e-15);
    }

    #[test]
    fn matrix_function_examples() {
        let sq = matrix_function(&sigma(1), |x| Some(x * x)).unwrap();
        assert_abs_diff_eq!(sq.max_abs_diff(&HermitianOperator::identity(1)), 0.0, epsilon = 1e-14);
        let rt = matrix_function(&diag(&[4.0, 9.0]), |x| clamped_power(x, 0.5)).unwrap();
        assert_abs_diff_eq!(rt.max_abs_diff(&diag(&[2.0, 3.0])), 0.0, epsilon = 1e-14);
        let xlx = matrix_function(&diag(&[1.0, 0.0]), |x| Some(if x == 0.0 { 0.0 } else { x * x.ln() })).unwrap();
        assert_eq!(xlx, diag(&[0.0, 0.0]));
        assert!(matches!(
            matrix_function(&sigma(3), |x| clamped_power(x, 0.5)),
            Err(HyperqError::Domain(_))
        ));
    }

    #[test]
    fn power_conventions() {
        assert_eq!(clamped_power(0.0, 0.5), Some(0.0));
        assert_eq!(clamped_power(-1e-13, 0.5), Some(0.0));
        assert_eq!(clamped_power(-2.0, 2.0), Some(4.0));
        assert_eq!(clamped_power(-2.0, 0.5), None);
        assert_eq!(clamped_power(0.0, 0.0), Some(1.0));
        assert_eq!(sq_log_sq(0.0), 0.0);
    }

    #[test]
    fn norm_examples() {
        assert_abs_diff_eq!(schatten_norm(&diag(&[3.0, 4.0]), 2.0).unwrap(), 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(schatten_norm(&diag(&[3.0, 4.0]), 3.0).unwrap(), 91f64.powf(1.0 / 3.0), epsilon = 1e-14);
        for p in [1.0, 1.5, 2.0, 7.0] {
            assert_abs_diff_eq!(normalized_norm(&HermitianOperator::identity(3), p).unwrap(), 1.0, epsilon = 1e-15);
        }
        let a = diag(&[1.0, -1.0]);
        assert_abs_diff_eq!(schatten_norm(&a, 1.0).unwrap(), 2.0);
        assert_abs_diff_eq!(normalized_norm(&a, 1.0).unwrap(), 1.0);
        assert!(matches!(schatten_norm(&a, 0.5), Err(HyperqError::Domain(_))));
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(hs_inner(&sigma(1), &sigma(1)).unwrap(), Complex64::new(2.0, 0.0));
        assert_eq!(hs_inner(&sigma(1), &sigma(3)).unwrap(), Complex64::new(0.0, 0.0));
        assert!(hs_inner(&sigma(1), &HermitianOperator::identity(2)).is_err());
    }

    #[test]
    fn random_psd_is_seeded_and_psd() {
        assert_eq!(random_psd(2, 11), random_psd(2, 11));
        assert_ne!(random_psd(2, 11), random_psd(2, 12));
        assert_eq!(random_psd(2, 3).dim(), 4);
        for seed in 0..20 {
            assert!(random_psd(3, seed).min_eigenvalue().unwrap() >= -1e-12);
        }
    }

    #[test]
    fn general_norm_matches_hermitian_norm() {
        let a = random_hermitian(2, 5);
        for p in [1.0, 1.5, 3.0] {
            assert_abs_diff_eq!(
                general_schatten_norm(a.matrix(), p).unwrap(),
                schatten_norm(&a, p).unwrap(),
                epsilon = 1e-12
            );
        }
    }
}
