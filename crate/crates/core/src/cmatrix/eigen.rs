//! Eigenvalues of a general complex matrix.
//!
//! Householder reduction to upper Hessenberg form followed by single-shift
//! complex QR sweeps (Wilkinson shift, Givens rotations) with deflation of
//! negligible subdiagonal entries. Only eigenvalues are produced, so each
//! sweep only touches the active diagonal window.

use num_complex::Complex64;

use super::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Magnitude used for the exceptional shifts, as in LAPACK's `zlahqr`.
const EXCEPTIONAL_SHIFT: f64 = 0.75;

fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Unitary similarity to upper Hessenberg form.
pub(crate) fn hessenberg(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;

        // v = x - alpha e1, reflector I - 2 v v† / (v† v)
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let tau = 2.0 / vnorm2;

        // Left: rows k+1..n, all columns from k on.
        for c in k..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * h[(k + 1 + i, c)])
                .sum();
            let f = dot * tau;
            for (i, vi) in v.iter().enumerate() {
                h[(k + 1 + i, c)] -= vi * f;
            }
        }
        // Right: all rows, columns k+1..n.
        for r in 0..n {
            let dot: Complex64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| h[(r, k + 1 + i)] * vi)
                .sum();
            let f = dot * tau;
            for (i, vi) in v.iter().enumerate() {
                h[(r, k + 1 + i)] -= f * vi.conj();
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    h
}

/// Givens rotation `[c s; -s̄ c]` mapping `(a, b)` to `(r, 0)`, `c` real.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == ZERO {
        return (1.0, ZERO);
    }
    if a == ZERO {
        return (0.0, b.conj() / b.norm());
    }
    let na = a.norm();
    let norm = na.hypot(b.norm());
    (na / norm, (a / na) * b.conj() / norm)
}

/// Wilkinson shift: eigenvalue of the trailing 2x2 block closest to its
/// bottom-right entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mean = (a + d) * 0.5;
    let l1 = mean + disc;
    let l2 = mean - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

pub(crate) fn hessenberg_qr_eigenvalues(
    a: &ComplexMatrix,
    max_sweeps: usize,
) -> Result<Vec<Complex64>> {
    let n = a.rows();
    let mut h = hessenberg(a);
    let mut values = vec![ZERO; n];
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(values);
    }
    let ulp = f64::EPSILON;
    let small = f64::MIN_POSITIVE * (n as f64 / ulp);

    let mut hi = n - 1;
    let mut sweeps = 0usize;
    let mut its = 0usize;
    loop {
        // Locate the active unreduced window [lo, hi].
        let mut lo = hi;
        while lo > 0 {
            let sub = abs1(h[(lo, lo - 1)]);
            let mut diag = abs1(h[(lo - 1, lo - 1)]) + abs1(h[(lo, lo)]);
            if diag == 0.0 {
                diag = scale;
            }
            if sub <= small || sub <= ulp * diag {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            values[hi] = h[(hi, hi)];
            its = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }

        sweeps += 1;
        its += 1;
        if sweeps > max_sweeps {
            return Err(Error::NoConvergence {
                op: "hessenberg qr",
                iterations: max_sweeps,
            });
        }

        let shift = if its.is_multiple_of(10) {
            // Exceptional shift to break cycles.
            if its.is_multiple_of(20) {
                h[(hi, hi)] + EXCEPTIONAL_SHIFT * h[(hi, hi - 1)].re.abs()
            } else {
                h[(lo, lo)] + EXCEPTIONAL_SHIFT * h[(lo + 1, lo)].re.abs()
            }
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(values)
}

/// One explicitly shifted QR step `H - μI = QR`, `H ← RQ + μI` on the
/// window `[lo, hi]`.
fn qr_sweep(h: &mut ComplexMatrix, lo: usize, hi: usize, mu: Complex64) {
    for i in lo..=hi {
        h[(i, i)] -= mu;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for col in k..=hi {
            let x = h[(k, col)];
            let y = h[(k + 1, col)];
            h[(k, col)] = x * c + s * y;
            h[(k + 1, col)] = -s.conj() * x + y * c;
        }
        h[(k + 1, k)] = ZERO;
        rotations.push((c, s));
    }
    for (offset, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + offset;
        for row in lo..=(k + 1).min(hi) {
            let x = h[(row, k)];
            let y = h[(row, k + 1)];
            h[(row, k)] = x * c + y * s.conj();
            h[(row, k + 1)] = -x * s + y * c;
        }
    }
    for i in lo..=hi {
        h[(i, i)] += mu;
    }
}
