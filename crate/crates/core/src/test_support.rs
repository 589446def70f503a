//! Random matrices and standard shapes shared by the unit tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cmatrix::ComplexMatrix;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Entries with independent standard-normal-ish parts (sum of uniforms).
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let mut draw = || (0..4).map(|_| rng.gen::<f64>() - 0.5).sum::<f64>();
    let entries = (0..rows * cols).map(|_| c(draw(), draw())).collect();
    ComplexMatrix::new(rows, cols, entries).unwrap()
}

/// Product of random `n × r` and `r × n` factors, rank `r` almost surely.
pub fn random_rank(rng: &mut ChaCha8Rng, n: usize, r: usize) -> ComplexMatrix {
    if r == 0 {
        return ComplexMatrix::zeros(n, n);
    }
    random_matrix(rng, n, r)
        .matmul(&random_matrix(rng, r, n))
        .unwrap()
}

/// Nilpotent shift with ones on the superdiagonal.
pub fn jordan_block(n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n.saturating_sub(1) {
        m[(i, i + 1)] = c(1.0, 0.0);
    }
    m
}

/// `S J S⁻¹` for a well-conditioned `S = I + 0.3·R`.
pub fn similar_jordan(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let s = ComplexMatrix::identity(n)
        .add(&random_matrix(rng, n, n).scale(c(0.3 / (n as f64).sqrt(), 0.0)))
        .unwrap();
    let s_inv = inverse(&s);
    s.matmul(&jordan_block(n)).unwrap().matmul(&s_inv).unwrap()
}

/// Gauss–Jordan inverse with partial pivoting, independent of the SVD code.
pub fn inverse(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut m = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm()))
            .unwrap();
        for k in 0..n {
            let (x, y) = (m[(col, k)], m[(pivot, k)]);
            m[(col, k)] = y;
            m[(pivot, k)] = x;
            let (x, y) = (inv[(col, k)], inv[(pivot, k)]);
            inv[(col, k)] = y;
            inv[(pivot, k)] = x;
        }
        let p = m[(col, col)];
        assert!(p.norm() > 0.0, "singular matrix");
        for k in 0..n {
            m[(col, k)] /= p;
            inv[(col, k)] /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[(r, col)];
                for k in 0..n {
                    let (mk, ik) = (m[(col, k)], inv[(col, k)]);
                    m[(r, k)] -= f * mk;
                    inv[(r, k)] -= f * ik;
                }
            }
        }
    }
    inv
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
}
