//! Mode-wise action of single-site superoperators.
//!
//! A `2^n x 2^n` matrix is viewed as an n-mode tensor whose mode `k` has the
//! four slots `(i_k, j_k) -> 2*i_k + j_k`. Site 0 is the first Kronecker
//! factor, i.e. the most significant bit of the row and column index.

use nalgebra::Matrix4;
use num_complex::Complex64;

use super::{CMatrix, PauliCoefficients};
use crate::error::{validation, Result};

/// A single-site superoperator in the matrix-unit basis `(E00, E01, E10, E11)`.
pub type SiteOp = [[Complex64; 4]; 4];

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Matrix-unit entries -> Pauli coefficients `(1/2) Tr(sigma_i M)`.
pub(crate) const TO_PAULI: SiteOp = [
    [c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
    [c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)],
    [c(0.0, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.0, 0.0)],
    [c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)],
];

/// Pauli coefficients -> matrix-unit entries.
pub(crate) const FROM_PAULI: SiteOp = [
    [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
    [c(0.0, 0.0), c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0)],
    [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
    [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
];

fn compose(a: &SiteOp, b: &SiteOp) -> SiteOp {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Converts a Pauli transfer matrix into its matrix-unit form.
pub fn site_op_from_transfer(t: &Matrix4<f64>) -> SiteOp {
    let mut tc = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            tc[i][j] = Complex64::new(t[(i, j)], 0.0);
        }
    }
    compose(&FROM_PAULI, &compose(&tc, &TO_PAULI))
}

/// Applies `op` to mode `site` of the `sites`-mode matrix `m`, in place.
pub fn apply_site_op(m: &mut CMatrix, site: usize, sites: usize, op: &SiteOp) {
    let d = m.nrows();
    debug_assert_eq!(d, 1 << sites);
    let stride = 1usize << (sites - 1 - site);
    for i in (0..d).filter(|i| i & stride == 0) {
        for j in (0..d).filter(|j| j & stride == 0) {
            let e = [
                m[(i, j)],
                m[(i, j + stride)],
                m[(i + stride, j)],
                m[(i + stride, j + stride)],
            ];
            let mut out = [Complex64::new(0.0, 0.0); 4];
            for (k, o) in out.iter_mut().enumerate() {
                *o = op[k][0] * e[0] + op[k][1] * e[1] + op[k][2] * e[2] + op[k][3] * e[3];
            }
            m[(i, j)] = out[0];
            m[(i, j + stride)] = out[1];
            m[(i + stride, j)] = out[2];
            m[(i + stride, j + stride)] = out[3];
        }
    }
}

/// Applies one 4x4 Pauli transfer matrix per site to a coefficient tensor by
/// mode-k contraction. `transfers[k]` acts on the k-th base-4 digit of the
/// word index.
pub fn apply_product_map(transfers: &[Matrix4<f64>], c: &PauliCoefficients) -> Result<PauliCoefficients> {
    let n = c.sites();
    if transfers.len() != n {
        return validation(format!(
            "{} transfer matrices supplied for a {n}-site coefficient tensor",
            transfers.len()
        ));
    }
    let mut data = c.coeffs().to_vec();
    let len = data.len();
    for (k, t) in transfers.iter().enumerate() {
        let stride = 1usize << (2 * k);
        for base in (0..len).filter(|i| (i / stride) % 4 == 0) {
            let x = [
                data[base],
                data[base + stride],
                data[base + 2 * stride],
                data[base + 3 * stride],
            ];
            for a in 0..4 {
                data[base + a * stride] = (0..4).map(|b| t[(a, b)] * x[b]).sum();
            }
        }
    }
    PauliCoefficients::new(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_tables_are_inverse() {
        let id = compose(&FROM_PAULI, &TO_PAULI);
        for (i, row) in id.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((z - Complex64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn identity_transfer_is_identity_site_op() {
        let op = site_op_from_transfer(&Matrix4::identity());
        for (i, row) in op.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((z - Complex64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
    }
}
