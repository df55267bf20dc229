//! Small dense routines: economical QR of an n-by-2 matrix, Hermitian Jacobi
//! eigenvalues and spectral norms.

use crate::error::{Error, Result};
use crate::matrix::CMat;
use num_complex::Complex64;

pub const EPS: f64 = f64::EPSILON;

/// Economical QR of an n-by-2 matrix with full column rank.
///
/// Modified Gram-Schmidt with one reorthogonalization pass. The diagonal of
/// R is real and nonnegative, which fixes the factorization uniquely.
pub fn economical_qr(w: &CMat) -> Result<(CMat, [[Complex64; 2]; 2])> {
    assert_eq!(w.cols(), 2, "economical_qr expects an n-by-2 matrix");
    let n = w.rows();
    let norm_w = w.norm_fro();
    let tol = 100.0 * EPS * norm_w;

    let w1 = w.col(0);
    let w2 = w.col(1);
    let r11 = vec_norm(&w1);
    if r11 <= tol {
        return Err(Error::RankDeficientWeights { r22: 0.0 });
    }
    let q1: Vec<Complex64> = w1.iter().map(|v| v / r11).collect();

    let r12a = dot(&q1, &w2);
    let mut u: Vec<Complex64> = w2
        .iter()
        .zip(q1.iter())
        .map(|(v, q)| v - r12a * q)
        .collect();
    let r12b = dot(&q1, &u);
    for (ui, qi) in u.iter_mut().zip(q1.iter()) {
        *ui -= r12b * qi;
    }
    let r12 = r12a + r12b;
    let r22 = vec_norm(&u);
    if r22 <= tol {
        return Err(Error::RankDeficientWeights { r22 });
    }
    let q2: Vec<Complex64> = u.iter().map(|v| v / r22).collect();

    let mut q = CMat::zeros(n, 2);
    q.set_col(0, &q1);
    q.set_col(1, &q2);
    let r = [
        [Complex64::new(r11, 0.0), r12],
        [Complex64::ZERO, Complex64::new(r22, 0.0)],
    ];
    Ok((q, r))
}

/// Inverse of an upper triangular 2x2 matrix.
pub fn inverse_upper_2x2(r: &[[Complex64; 2]; 2]) -> Result<[[Complex64; 2]; 2]> {
    let a = r[0][0];
    let b = r[0][1];
    let d = r[1][1];
    if !(a.norm() > 0.0) || !(d.norm() > 0.0) {
        return Err(Error::SingularR);
    }
    Ok([
        [1.0 / a, -b / (a * d)],
        [Complex64::ZERO, 1.0 / d],
    ])
}

/// Euclidean inner product y^H x.
pub fn dot(y: &[Complex64], x: &[Complex64]) -> Complex64 {
    y.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eigenvalues(a: &CMat) -> Vec<f64> {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    let mut m = a.clone();
    let scale = m.norm_fro().max(f64::MIN_POSITIVE);
    for _sweep in 0..40 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let gamma = m[(p, q)];
                let gn = gamma.norm();
                if gn <= 1e-300 {
                    continue;
                }
                let alpha = m[(p, p)].re;
                let beta = m[(q, q)].re;
                let phase = gamma / gn;
                let theta = (beta - alpha) / (2.0 * gn);
                let t = if theta >= 0.0 {
                    -1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J[p][p] = c, J[p][q] = -s*phase, J[q][p] = s*conj(phase), J[q][q] = c
                let jpq = -s * phase;
                let jqp = s * phase.conj();
                // columns: col_p' = c col_p + jqp col_q ; col_q' = jpq col_p + c col_q
                for i in 0..n {
                    let vp = m[(i, p)];
                    let vq = m[(i, q)];
                    m[(i, p)] = c * vp + jqp * vq;
                    m[(i, q)] = jpq * vp + c * vq;
                }
                // rows: row_p' = c row_p + conj(jqp) row_q ; row_q' = conj(jpq) row_p + c row_q
                let wqp = jqp.conj();
                let wpq = jpq.conj();
                for j in 0..n {
                    let vp = m[(p, j)];
                    let vq = m[(q, j)];
                    m[(p, j)] = c * vp + wqp * vq;
                    m[(q, j)] = wpq * vp + c * vq;
                }
            }
        }
    }
    (0..n).map(|i| m[(i, i)].re).collect()
}

/// Spectral norm of a Hermitian matrix: max |eigenvalue|.
pub fn spectral_norm_hermitian(a: &CMat) -> f64 {
    let n = a.rows();
    if n == 0 {
        return 0.0;
    }
    if n <= 64 {
        hermitian_eigenvalues(a)
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max)
    } else {
        // top singular value of a Hermitian matrix equals max |eigenvalue|
        top_singular_value(a)
    }
}

/// Spectral norm (largest singular value) of a general matrix.
pub fn spectral_norm(x: &CMat) -> f64 {
    let small = x.rows().min(x.cols());
    if small == 0 {
        return 0.0;
    }
    if x.rows().max(x.cols()) <= 64 {
        let g = if x.rows() >= x.cols() {
            x.adjoint().matmul(x)
        } else {
            x.matmul(&x.adjoint())
        };
        hermitian_eigenvalues(&g)
            .into_iter()
            .fold(0.0, f64::max)
            .max(0.0)
            .sqrt()
    } else {
        top_singular_value(x)
    }
}

/// Largest singular value by block power iteration on x^H x.
fn top_singular_value(x: &CMat) -> f64 {
    let n = x.cols();
    let mut v1: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 + 1.0).sin() * 0.25, 0.0))
        .collect();
    let mut v2: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.3 * ((i as f64) * 0.7).cos()))
        .collect();
    normalize(&mut v1);
    orthonormalize_pair(&v1, &mut v2);

    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        // x^H (x v)
        let mut xv = vec![Complex64::ZERO; x.rows()];
        for i in 0..x.rows() {
            let row = x.row(i);
            let mut acc = Complex64::ZERO;
            for (r, vv) in row.iter().zip(v.iter()) {
                acc += r * vv;
            }
            xv[i] = acc;
        }
        let mut out = vec![Complex64::ZERO; n];
        for i in 0..x.rows() {
            let row = x.row(i);
            let s = xv[i];
            for (o, r) in out.iter_mut().zip(row.iter()) {
                *o += r.conj() * s;
            }
        }
        out
    };

    let mut sigma = 0.0f64;
    for _ in 0..1200 {
        let w1 = apply(&v1);
        let w2 = apply(&v2);
        let lam1 = dot(&v1, &w1).re.max(0.0);
        let lam2 = dot(&v2, &w2).re.max(0.0);
        let new_sigma = lam1.max(lam2).sqrt();
        let done = (new_sigma - sigma).abs() <= 1e-14 * new_sigma.max(1e-300);
        sigma = new_sigma;
        v1 = w1;
        let n1 = vec_norm(&v1);
        if n1 == 0.0 {
            return 0.0;
        }
        for v in &mut v1 {
            *v /= n1;
        }
        v2 = w2;
        orthonormalize_pair(&v1, &mut v2);
        if done {
            break;
        }
    }
    sigma
}

fn normalize(v: &mut [Complex64]) {
    let n = vec_norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

fn orthonormalize_pair(v1: &[Complex64], v2: &mut [Complex64]) {
    for _ in 0..2 {
        let c = dot(v1, v2);
        for (b, a) in v2.iter_mut().zip(v1.iter()) {
            *b -= c * a;
        }
    }
    let n2 = vec_norm(v2);
    if n2 > 0.0 {
        for x in v2.iter_mut() {
            *x /= n2;
        }
    } else {
        // fall back to a fixed perturbation orthogonal to nothing in particular
        for (i, x) in v2.iter_mut().enumerate() {
            *x = Complex64::new(((i * 7 + 3) % 11) as f64 - 5.0, 1.0);
        }
        normalize(v2);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_cmat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    #[test]
    fn qr_identity_padded() {
        let mut w = CMat::zeros(4, 2);
        w[(0, 0)] = Complex64::ONE;
        w[(1, 1)] = Complex64::ONE;
        let (q, r) = economical_qr(&w).unwrap();
        assert!((q[(0, 0)] - Complex64::ONE).norm() < 1e-15);
        assert!((q[(1, 1)] - Complex64::ONE).norm() < 1e-15);
        assert!((r[0][0] - Complex64::ONE).norm() < 1e-15);
        assert!((r[1][1] - Complex64::ONE).norm() < 1e-15);
        assert!(r[0][1].norm() < 1e-15);
    }

    #[test]
    fn qr_diagonal_scaling() {
        let w = CMat::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(3.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        let (_, r) = economical_qr(&w).unwrap();
        assert!((r[0][0] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((r[1][1] - c(3.0, 0.0)).norm() < 1e-15);
        assert!(r[0][1].norm() < 1e-15);
    }

    #[test]
    fn qr_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let w = random_cmat(&mut rng, 10, 2);
            let (q, r) = economical_qr(&w).unwrap();
            // reconstruction residual
            let mut err: f64 = 0.0;
            for i in 0..10 {
                for j in 0..2 {
                    let rec = q[(i, 0)] * r[0][j] + q[(i, 1)] * r[1][j];
                    err = err.max((rec - w[(i, j)]).norm());
                }
            }
            assert!(err <= 10.0 * EPS * w.norm_fro(), "residual {err:e}");
            // orthonormality
            let g = q.adjoint().matmul(&q).sub_identity();
            assert!(g.max_abs() <= 10.0 * EPS, "gram {:e}", g.max_abs());
            // diagonal of R real nonnegative
            assert!(r[0][0].im == 0.0 && r[0][0].re >= 0.0);
            assert!(r[1][1].im == 0.0 && r[1][1].re >= 0.0);
        }
    }

    #[test]
    fn qr_rank_deficient() {
        let w = CMat::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
            vec![c(-1.0, 0.0), c(-2.0, 0.0)],
        ]);
        assert!(matches!(
            economical_qr(&w),
            Err(Error::RankDeficientWeights { .. })
        ));
    }

    #[test]
    fn inverse_upper_2x2_multiply_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let r = [
                [c(rng.gen_range(0.2..2.0), 0.0), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))],
                [Complex64::ZERO, c(rng.gen_range(0.2..2.0), 0.0)],
            ];
            let inv = inverse_upper_2x2(&r).unwrap();
            // R * inv = I
            for i in 0..2 {
                for j in 0..2 {
                    let v = r[i][0] * inv[0][j] + r[i][1] * inv[1][j];
                    let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                    assert!((v - expect).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn jacobi_known_eigenvalues() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let a = CMat::from_rows(&[
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ]);
        let mut e = hermitian_eigenvalues(&a);
        e.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_matches_trace_and_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = random_cmat(&mut rng, 12, 12);
        // Hermitian matrix from a random one
        let a = {
            let mut h = b.adjoint().matmul(&b);
            for i in 0..12 {
                h[(i, i)] = Complex64::new(h[(i, i)].re, 0.0);
            }
            h
        };
        let e = hermitian_eigenvalues(&a);
        let trace: f64 = (0..12).map(|i| a[(i, i)].re).sum();
        let esum: f64 = e.iter().sum();
        assert!((trace - esum).abs() < 1e-10 * trace.abs());
        let fro2: f64 = a.norm_fro().powi(2);
        let e2: f64 = e.iter().map(|x| x * x).sum();
        assert!((fro2 - e2).abs() < 1e-9 * fro2);
    }

    #[test]
    fn power_iteration_agrees_with_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let x = random_cmat(&mut rng, 80, 80);
        let fast = top_singular_value(&x);
        let g = x.adjoint().matmul(&x);
        let slow = hermitian_eigenvalues(&g)
            .into_iter()
            .fold(0.0f64, f64::max)
            .sqrt();
        assert!(
            (fast - slow).abs() <= 1e-8 * slow,
            "power {fast:e} vs jacobi {slow:e}"
        );
    }

    #[test]
    fn spectral_norm_scaled_column() {
        // Q = I with one column scaled by 2: ||Q^H Q - I|| = 3
        let mut q = CMat::identity(5);
        q[(2, 2)] = c(2.0, 0.0);
        let e = q.adjoint().matmul(&q).sub_identity();
        let nrm = spectral_norm_hermitian(&e);
        assert!((nrm - 3.0).abs() < 1e-12);
    }
}
