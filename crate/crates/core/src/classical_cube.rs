//! Functions on the Boolean cube `{0,1}^n`, the bit-flip noise operator, and
//! the embedding of such functions as diagonal matrices.
//!
//! A bit string `s = (s_1, ..., s_n)` is stored at index `sum_j s_j 2^{n-j}`,
//! i.e. `s_1` is the most significant bit. This matches the diagonal of
//! `E_{s_1} (x) ... (x) E_{s_n}`.

use serde::Serialize;

use crate::error::{domain, validation, Result};
use crate::norm_estimator::signed_log_grid;
use crate::pauli_tensor::{HermitianOperator, MAX_SITES};
use crate::seed;
use rand::Rng;

/// A real function on `{0,1}^n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubeFunction {
    n: usize,
    values: Vec<f64>,
}

impl CubeFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let len = values.len();
        if len < 2 || !len.is_power_of_two() {
            return validation(format!("cube function needs 2^n values with n >= 1, got {len}"));
        }
        let n = len.trailing_zeros() as usize;
        if n > MAX_SITES {
            return validation(format!("n = {n} exceeds the supported {MAX_SITES} bits"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return validation("cube function values must be finite");
        }
        Ok(Self { n, values })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; 1 << n])
    }

    /// `prod_j (1 + eps_j (-1)^{s_j})`.
    pub fn product(eps: &[f64]) -> Result<Self> {
        let n = eps.len();
        let values = (0..1usize << n)
            .map(|s| {
                eps.iter()
                    .enumerate()
                    .map(|(j, e)| if s >> (n - 1 - j) & 1 == 0 { 1.0 + e } else { 1.0 - e })
                    .product()
            })
            .collect();
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `(T_l f)(s) = E[f(s')]` where each bit of `s'` is flipped independently
/// with probability `(1 - l) / 2`.
pub fn noise_apply(f: &CubeFunction, lambda: f64) -> Result<CubeFunction> {
    if !(lambda.abs() <= 1.0) {
        return domain(format!("noise parameter {lambda} outside [-1, 1]"));
    }
    let stay = (1.0 + lambda) / 2.0;
    let flip = (1.0 - lambda) / 2.0;
    let mut v = f.values.clone();
    for bit in 0..f.n {
        let mask = 1usize << bit;
        for s in 0..v.len() {
            if s & mask == 0 {
                let (a, b) = (v[s], v[s | mask]);
                v[s] = stay * a + flip * b;
                v[s | mask] = flip * a + stay * b;
            }
        }
    }
    Ok(CubeFunction { n: f.n, values: v })
}

/// `(sum |f|^p)^{1/p}`, or `(2^{-n} sum |f|^p)^{1/p}` when `normalized`.
pub fn lp_norm(f: &CubeFunction, p: f64, normalized: bool) -> Result<f64> {
    if !(p >= 1.0) {
        return domain(format!("p = {p} must be >= 1"));
    }
    let mut s: f64 = if p == 2.0 {
        f.values.iter().map(|x| x * x).sum()
    } else {
        f.values.iter().map(|x| x.abs().powf(p)).sum()
    };
    if normalized {
        s /= f.values.len() as f64;
    }
    Ok(if p == 2.0 { s.sqrt() } else { s.powf(1.0 / p) })
}

/// `D = sum_s f(s) E_{s_1} (x) ... (x) E_{s_n}`.
pub fn embed_diagonal(f: &CubeFunction) -> HermitianOperator {
    HermitianOperator::diagonal(&f.values).expect("length is a power of two")
}

/// The classical hypercontractivity threshold `sqrt((p-1)/(q-1))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Threshold {
    pub p: f64,
    pub q: f64,
    pub value: f64,
}

pub fn classical_threshold(p: f64, q: f64) -> Result<Threshold> {
    if !(p > 1.0) {
        return domain(format!("p = {p} must exceed 1"));
    }
    if !(q >= p) {
        return domain(format!("q = {q} must be >= p = {p}"));
    }
    let value = if p == q { 1.0 } else { ((p - 1.0) / (q - 1.0)).sqrt() };
    Ok(Threshold { p, q, value })
}

/// `||T_l f||_q / ||f||_p` with normalized norms.
pub fn classical_ratio(f: &CubeFunction, lambda: f64, p: f64, q: f64) -> Result<f64> {
    let den = lp_norm(f, p, true)?;
    if den == 0.0 {
        return domain("the zero function has no norm ratio");
    }
    Ok(lp_norm(&noise_apply(f, lambda)?, q, true)? / den)
}

pub const VIOLATION_SLACK: f64 = 1e-9;
pub const RANDOM_WITNESSES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassicalVerdict {
    Contractive { best_ratio: f64 },
    Violated { ratio: f64, witness: CubeFunction },
}

/// Searches for `f` with `||T_l f||_q > (1 + 1e-9) ||f||_p`. Scans the product
/// family `prod_j (1 + eps (-1)^{s_j})` over a signed log grid of
/// `resolution` magnitudes per sign, then [`RANDOM_WITNESSES`] seeded random
/// functions. Finding nothing is evidence, not proof, of contraction.
pub fn classical_hc_check(lambda: f64, p: f64, q: f64, n: usize, resolution: usize, seed: u64) -> Result<ClassicalVerdict> {
    classical_threshold(p, q)?;
    if n == 0 || n > MAX_SITES {
        return validation(format!("n = {n} outside 1..={MAX_SITES}"));
    }
    let mut best: Option<(f64, CubeFunction)> = None;
    let mut consider = |f: CubeFunction| -> Result<()> {
        if f.values.iter().all(|&v| v == 0.0) {
            return Ok(());
        }
        let r = classical_ratio(&f, lambda, p, q)?;
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, f));
        }
        Ok(())
    };
    for eps in signed_log_grid(resolution.max(1)) {
        consider(CubeFunction::product(&vec![eps; n])?)?;
    }
    let mut rng = seed::rng(seed);
    for _ in 0..RANDOM_WITNESSES {
        let values = (0..1usize << n).map(|_| rng.random_range(-1.0..1.0)).collect();
        consider(CubeFunction::new(values)?)?;
    }
    let (ratio, witness) = best.expect("grid contains nonzero functions");
    Ok(if ratio > 1.0 + VIOLATION_SLACK {
        ClassicalVerdict::Violated { ratio, witness }
    } else {
        ClassicalVerdict::Contractive { best_ratio: ratio }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel_algebra::{DiagonalChannel, ProductChannel};
    use crate::norm_estimator::ratio;
    use crate::pauli_tensor::normalized_norm;

    fn random_function(n: usize, seed: u64) -> CubeFunction {
        let mut rng = seed::rng(seed);
        CubeFunction::new((0..1 << n).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap()
    }

    #[test]
    fn noise_endpoints() {
        let f = random_function(3, 1);
        assert_eq!(noise_apply(&f, 1.0).unwrap(), f);
        let g = noise_apply(&f, 0.0).unwrap();
        assert!(g.values().iter().all(|v| (v - f.mean()).abs() < 1e-12));
        assert!(noise_apply(&f, 1.5).is_err());
    }

    #[test]
    fn single_bit_expectation() {
        let f = CubeFunction::new(vec![1.0, 0.0]).unwrap();
        let g = noise_apply(&f, 0.4).unwrap();
        assert!((g.values()[0] - 0.7).abs() < 1e-15 && (g.values()[1] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn noise_matches_explicit_expectation() {
        // sum over all s' with probability prod of per-bit stay/flip weights
        let n = 3;
        let f = random_function(n, 2);
        let l = 0.35;
        let g = noise_apply(&f, l).unwrap();
        for s in 0..1usize << n {
            let mut e = 0.0;
            for t in 0..1usize << n {
                let flips = (s ^ t).count_ones() as i32;
                e += ((1.0 - l) / 2.0f64).powi(flips) * ((1.0 + l) / 2.0f64).powi(n as i32 - flips) * f.values()[t];
            }
            assert!((g.values()[s] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn semigroup_and_mean() {
        let f = random_function(3, 3);
        let a = noise_apply(&noise_apply(&f, 0.3).unwrap(), -0.6).unwrap();
        let b = noise_apply(&f, 0.3 * -0.6).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| (x - y).abs() < 1e-12));
        assert!((a.mean() - f.mean()).abs() < 1e-12);
    }

    #[test]
    fn norms() {
        assert_eq!(lp_norm(&CubeFunction::new(vec![3.0, 4.0]).unwrap(), 2.0, false).unwrap(), 5.0);
        let one = CubeFunction::constant(3, 1.0).unwrap();
        for p in [1.0, 1.7, 4.0] {
            assert!((lp_norm(&one, p, true).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(lp_norm(&one, 0.5, true).is_err());
    }

    #[test]
    fn embedding_is_isometric() {
        for (n, seed) in [(1, 4), (2, 5), (3, 6)] {
            let f = random_function(n, seed);
            let d = embed_diagonal(&f);
            for p in [1.0, 1.5, 2.0, 3.0] {
                let a = lp_norm(&f, p, true).unwrap();
                let b = normalized_norm(&d, p).unwrap();
                assert!((a - b).abs() < 1e-12 * a.max(1.0));
            }
        }
        let e0 = embed_diagonal(&CubeFunction::new(vec![1.0, 0.0]).unwrap());
        assert_eq!(e0, HermitianOperator::diagonal(&[1.0, 0.0]).unwrap());
    }

    #[test]
    fn embedding_commutes_with_depolarizing() {
        for (n, seed) in [(1, 7), (2, 8), (3, 9)] {
            let f = random_function(n, seed);
            let ch = ProductChannel::uniform(DiagonalChannel::depolarizing(0.45).unwrap(), n).unwrap();
            let lhs = ch.apply(&embed_diagonal(&f)).unwrap();
            let rhs = embed_diagonal(&noise_apply(&f, 0.45).unwrap());
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            let q = ratio(&ch, &embed_diagonal(&f), 2.0, 3.0).unwrap();
            let c = classical_ratio(&f, 0.45, 2.0, 3.0).unwrap();
            assert!((q - c).abs() < 1e-12);
        }
    }

    #[test]
    fn thresholds() {
        assert!((classical_threshold(2.0, 4.0).unwrap().value - 0.577350269190).abs() < 1e-12);
        assert_eq!(classical_threshold(3.0, 3.0).unwrap().value, 1.0);
        assert!(classical_threshold(1.0, 4.0).is_err());
    }

    #[test]
    fn hc_check_verdicts() {
        match classical_hc_check(0.7, 2.0, 4.0, 1, 60, 0).unwrap() {
            ClassicalVerdict::Violated { ratio, witness } => {
                assert!(ratio > 1.0 + 1e-9);
                assert!((classical_ratio(&witness, 0.7, 2.0, 4.0).unwrap() - ratio).abs() < 1e-15);
            }
            v => panic!("{v:?}"),
        }
        assert!(matches!(
            classical_hc_check(0.5, 2.0, 4.0, 2, 60, 0).unwrap(),
            ClassicalVerdict::Contractive { .. }
        ));
    }
}
