//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.

use num_complex::Complex64;

use super::CMatrix;
use crate::error::{HyperqError, Result};

/// Off-diagonal Frobenius mass, relative to the full Frobenius norm, at which
/// the sweep loop stops.
pub const OFF_DIAGONAL_TOL: f64 = 1e-14;
pub const MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and, if requested, the unitary of eigenvector columns.
pub(crate) fn jacobi_eigen(m: &CMatrix, with_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    let d = m.nrows();
    debug_assert_eq!(d, m.ncols());

    // row-major working copy, hermitized
    let mut a = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        for j in 0..d {
            a[i * d + j] = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
        }
        a[i * d + i].im = 0.0;
    }
    let mut v = if with_vectors {
        let mut v = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            v[i * d + i] = Complex64::new(1.0, 0.0);
        }
        Some(v)
    } else {
        None
    };

    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut converged = total == 0.0 || d == 1;
    let mut sweep = 0;
    while !converged {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * d + j].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= OFF_DIAGONAL_TOL * total {
            converged = true;
            break;
        }
        if sweep == MAX_SWEEPS {
            break;
        }
        sweep += 1;

        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let app = a[p * d + p].re;
                let aqq = a[q * d + q].re;
                // negligible against both diagonal entries
                if sweep > 4 && app.abs() + 100.0 * r == app.abs() && aqq.abs() + 100.0 * r == aqq.abs() {
                    a[p * d + q] = Complex64::new(0.0, 0.0);
                    a[q * d + p] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let phase = apq / r;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // V = [[phase c, phase s], [-s, c]]; only the phase is complex
                let phase_c = phase.conj();
                for k in 0..d {
                    let akp = a[k * d + p] * phase;
                    let akq = a[k * d + q];
                    a[k * d + p] = akp * c - akq * s;
                    a[k * d + q] = akp * s + akq * c;
                }
                for k in 0..d {
                    let apk = a[p * d + k] * phase_c;
                    let aqk = a[q * d + k];
                    a[p * d + k] = apk * c - aqk * s;
                    a[q * d + k] = apk * s + aqk * c;
                }
                a[p * d + q] = Complex64::new(0.0, 0.0);
                a[q * d + p] = Complex64::new(0.0, 0.0);
                a[p * d + p].im = 0.0;
                a[q * d + q].im = 0.0;

                if let Some(v) = v.as_mut() {
                    for k in 0..d {
                        let vkp = v[k * d + p] * phase;
                        let vkq = v[k * d + q];
                        v[k * d + p] = vkp * c - vkq * s;
                        v[k * d + q] = vkp * s + vkq * c;
                    }
                }
            }
        }
    }
    if !converged {
        return Err(HyperqError::Numerical(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps (dim {d})"
        )));
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[i * d + i].re.total_cmp(&a[j * d + j].re));
    let values = order.iter().map(|&i| a[i * d + i].re).collect();
    let vectors = v.map(|v| CMatrix::from_fn(d, d, |row, col| v[row * d + order[col]]));
    Ok((values, vectors))
}
