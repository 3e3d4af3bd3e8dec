//! Structured kernels against dense brute-force constructions.

use hyperq::channel_algebra::{CpMap, DiagonalChannel, ProductChannel, TransferMatrix};
use hyperq::pauli_tensor::{
    apply_product_map, eigenvalues, pauli_expand, pauli_matrix, random_hermitian, random_psd, CMatrix, HermitianOperator,
    PauliWord,
};
use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

/// Kraus operators `sqrt(w_i) s_i` of a CP diagonal channel as a Pauli mixture.
fn pauli_kraus(c: &DiagonalChannel) -> Vec<CMatrix> {
    let [l1, l2, l3] = c.lambdas;
    let w = [
        (1.0 + l1 + l2 + l3) / 4.0,
        (1.0 + l1 - l2 - l3) / 4.0,
        (1.0 - l1 + l2 - l3) / 4.0,
        (1.0 - l1 - l2 + l3) / 4.0,
    ];
    assert!(w.iter().all(|&x| x >= -1e-12), "{:?} is not CP", c.lambdas);
    (0..4u8).map(|i| pauli_matrix(i) * Complex64::new(w[i as usize].max(0.0).sqrt(), 0.0)).collect()
}

fn product_kraus(channels: &[DiagonalChannel]) -> CpMap {
    let mut ops = vec![CMatrix::identity(1, 1)];
    for c in channels {
        let site = pauli_kraus(c);
        ops = ops.iter().flat_map(|k| site.iter().map(move |s| k.kronecker(s))).collect();
    }
    CpMap::new(ops).unwrap()
}

fn naive_coefficients(a: &HermitianOperator) -> Vec<f64> {
    let n = a.sites();
    (0..1usize << (2 * n))
        .map(|w| {
            let s = PauliWord::from_index(w, n).unwrap().matrix();
            (s * a.matrix()).trace().re / a.dim() as f64
        })
        .collect()
}

#[test]
fn pauli_expansion_matches_trace_formula() {
    for (n, seed) in [(1, 1), (2, 2), (3, 3)] {
        let a = random_hermitian(n, seed);
        let fast = pauli_expand(&a);
        let slow = naive_coefficients(&a);
        for (x, y) in fast.coeffs().iter().zip(&slow) {
            assert!((x - y).abs() < 1e-12, "n = {n}: {x} vs {y}");
        }
    }
}

#[test]
fn product_map_matches_dense_kraus() {
    let sets = [
        vec![DiagonalChannel::depolarizing(0.4).unwrap()],
        vec![DiagonalChannel::new([0.3, -0.2, 0.5])],
        vec![DiagonalChannel::phase_damping(0.6).unwrap(), DiagonalChannel::two_pauli(0.7).unwrap()],
        vec![DiagonalChannel::new([0.7, 0.1, -0.1]), DiagonalChannel::depolarizing(-0.2).unwrap()],
    ];
    for (i, channels) in sets.iter().enumerate() {
        let n = channels.len();
        let a = random_hermitian(n, 10 + i as u64);
        let dense = product_kraus(channels).apply(a.matrix()).unwrap();
        let expected = naive_coefficients(&HermitianOperator::new(dense.clone()).unwrap());
        let transfers: Vec<Matrix4<f64>> = channels.iter().map(|c| c.transfer()).collect();
        let got = apply_product_map(&transfers, &pauli_expand(&a)).unwrap();
        for (x, y) in got.coeffs().iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12, "set {i}: {x} vs {y}");
        }
        let direct = ProductChannel::diagonal(channels.clone()).unwrap().apply(&a).unwrap();
        assert!(direct.matrix().iter().zip(dense.iter()).all(|(x, y)| (x - y).norm() < 1e-12));
    }
}

#[test]
fn non_diagonal_transfer_matches_conjugated_channel() {
    // Hadamard conjugation after depolarizing: T = R diag(1, l, l, l) with R swapping x and z
    let l = 0.6;
    let mut t = Matrix4::zeros();
    t[(0, 0)] = 1.0;
    t[(1, 3)] = l;
    t[(2, 2)] = -l;
    t[(3, 1)] = l;
    let tm = TransferMatrix::new(t).unwrap();
    let ch = ProductChannel::new(vec![hyperq::channel_algebra::Site::Transfer(tm)]).unwrap();
    let h = (pauli_matrix(1) + pauli_matrix(3)) * Complex64::new(1.0 / 2f64.sqrt(), 0.0);
    let a = random_hermitian(1, 5);
    let dep = ProductChannel::uniform(DiagonalChannel::depolarizing(l).unwrap(), 1).unwrap().apply(&a).unwrap();
    let expected = &h * dep.matrix() * &h;
    let got = ch.apply(&a).unwrap();
    assert!(got.matrix().iter().zip(expected.iter()).all(|(x, y)| (x - y).norm() < 1e-12));
}

#[test]
fn jacobi_matches_library_eigensolver() {
    for n in 1..=3 {
        for seed in 0..20 {
            let a = if seed % 2 == 0 { random_hermitian(n, seed) } else { random_psd(n, seed) };
            let ours = eigenvalues(a.matrix()).unwrap();
            let mut reference: Vec<f64> = SymmetricEigen::new(a.matrix().clone()).eigenvalues.iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            let scale = reference.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            for (x, y) in ours.iter().zip(&reference) {
                assert!((x - y).abs() <= 1e-12 * scale, "n = {n}, seed = {seed}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn eigenvectors_reconstruct_the_matrix() {
    for n in 1..=3 {
        let a = random_hermitian(n, 40 + n as u64);
        let dec = hyperq::pauli_tensor::eigen_hermitian(&a).unwrap();
        let back = dec.recompose(&dec.eigenvalues);
        let err = (back - a.matrix()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(err < 1e-12, "n = {n}: {err}");
    }
}
