//! One-sided (Hestenes) Jacobi SVD for small dense complex matrices.
//!
//! Column pairs of the working matrix are rotated until all of them are
//! mutually orthogonal to working precision. The column norms are then the
//! singular values, the normalized columns the left singular vectors, and the
//! accumulated rotations the right singular vectors.

use num_complex::Complex64;

use super::{ComplexMatrix, ComplexVector, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U Σ V†` with `V` square (`cols × cols`).
///
/// `singular_values` has one entry per column of `A`, in descending order.
/// Wide inputs are zero-padded to square internally, so the trailing
/// `cols − rows` values are zero for them.
#[derive(Debug, Clone)]
pub struct Svd {
    rows: usize,
    cols: usize,
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

impl Svd {
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        let (rows, cols) = (a.rows(), a.cols());
        let m = rows.max(cols);
        let n = cols;

        // Column-major working copy so that column operations are contiguous.
        let mut w: Vec<Vec<Complex64>> = (0..n)
            .map(|c| {
                let mut col: Vec<Complex64> = (0..rows).map(|r| a[(r, c)]).collect();
                col.resize(m, ZERO);
                col
            })
            .collect();
        let mut v: Vec<Vec<Complex64>> = (0..n)
            .map(|c| {
                let mut col = vec![ZERO; n];
                col[c] = Complex64::new(1.0, 0.0);
                col
            })
            .collect();

        // Columns below this norm are rounding noise; rotating them against
        // large columns only re-injects noise of the same size.
        let frobenius: f64 = w.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let negligible = (m as f64 * f64::EPSILON * frobenius).powi(2);

        let mut converged = n < 2;
        for _ in 0..MAX_SWEEPS {
            if converged {
                break;
            }
            let mut rotated = false;
            for p in 0..n - 1 {
                for q in p + 1..n {
                    if rotate_pair(&mut w, &mut v, p, q, negligible) {
                        rotated = true;
                    }
                }
            }
            converged = !rotated;
        }
        if !converged {
            return Err(Error::NoConvergence {
                op: "jacobi svd",
                iterations: MAX_SWEEPS,
            });
        }

        let mut order: Vec<(usize, f64)> = w
            .iter()
            .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
            .enumerate()
            .collect();
        order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

        let mut u = ComplexMatrix::zeros(rows, n);
        let mut vm = ComplexMatrix::zeros(n, n);
        let mut singular_values = Vec::with_capacity(n);
        for (k, &(j, sigma)) in order.iter().enumerate() {
            singular_values.push(sigma);
            if sigma > 0.0 {
                for r in 0..rows {
                    u[(r, k)] = w[j][r] / sigma;
                }
            }
            for r in 0..n {
                vm[(r, k)] = v[j][r];
            }
        }
        Ok(Svd {
            rows,
            cols,
            u,
            singular_values,
            v: vm,
        })
    }

    /// Absolute cut-off below which singular values count as zero.
    pub fn threshold(&self, rtol: f64) -> f64 {
        let smax = self.singular_values.first().copied().unwrap_or(0.0);
        rtol * self.rows.max(self.cols) as f64 * smax
    }

    pub fn rank(&self, rtol: f64) -> usize {
        let thr = self.threshold(rtol);
        self.singular_values.iter().filter(|&&s| s > thr).count()
    }

    /// Right singular vectors belonging to negligible singular values.
    pub fn kernel_basis(&self, rtol: f64) -> Vec<ComplexVector> {
        let thr = self.threshold(rtol);
        self.singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= thr)
            .map(|(k, _)| self.v.column(k))
            .collect()
    }

    /// `σ_max / σ_min` over the singular values kept at this tolerance.
    pub fn retained_condition(&self, rtol: f64) -> f64 {
        let r = self.rank(rtol);
        if r == 0 {
            1.0
        } else {
            self.singular_values[0] / self.singular_values[r - 1]
        }
    }

    /// `x = Σ_{σ_k > thr} v_k ⟨u_k|b⟩ / σ_k`.
    pub fn pseudo_solve(&self, b: &ComplexVector, rtol: f64) -> ComplexVector {
        let thr = self.threshold(rtol);
        let mut x = ComplexVector::zeros(self.cols);
        for (k, &sigma) in self.singular_values.iter().enumerate() {
            if sigma <= thr {
                break;
            }
            let coeff: Complex64 = (0..self.rows)
                .map(|r| self.u[(r, k)].conj() * b[r])
                .sum::<Complex64>()
                / sigma;
            for r in 0..self.cols {
                x[r] += self.v[(r, k)] * coeff;
            }
        }
        x
    }
}

/// Orthogonalizes columns `p` and `q`; returns whether a rotation was applied.
fn rotate_pair(
    w: &mut [Vec<Complex64>],
    v: &mut [Vec<Complex64>],
    p: usize,
    q: usize,
    negligible: f64,
) -> bool {
    let alpha: f64 = w[p].iter().map(|z| z.norm_sqr()).sum();
    let beta: f64 = w[q].iter().map(|z| z.norm_sqr()).sum();
    let gamma: Complex64 = w[p].iter().zip(&w[q]).map(|(a, b)| a.conj() * b).sum();
    let g = gamma.norm();
    if alpha.min(beta) <= negligible {
        return false;
    }
    // The computed inner product carries an absolute error of order
    // m·ε·‖w_p‖‖w_q‖, so orthogonality cannot be resolved below that.
    let m = w[p].len() as f64;
    if g == 0.0 || g <= m * f64::EPSILON * (alpha * beta).sqrt() {
        return false;
    }

    // Rotate column q by the phase of gamma so the 2x2 Gram block is real,
    // then apply the classical real Jacobi rotation.
    let phase = gamma.conj() / g;
    let zeta = (beta - alpha) / (2.0 * g);
    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = c * t;

    for col in [&mut *w, &mut *v] {
        let (left, right) = col.split_at_mut(q);
        let (cp, cq) = (&mut left[p], &mut right[0]);
        for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
            let yq = *y * phase;
            let xp = *x;
            *x = xp * c - yq * s;
            *y = xp * s + yq * c;
        }
    }
    true
}
