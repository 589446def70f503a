//! Exceptional-point detection through nilpotency of the traceless part.
//!
//! An `n × n` matrix `H` sits at an EP of order `n` exactly when
//! `N = H − (tr H / n)·I` is nilpotent of index `n`. The spectral response
//! strength is then `ξ = ‖N^{n−1}‖₂`, which equals the Frobenius norm because
//! `N^{n−1}` has rank one. This module also carries the Green's-function
//! expansion at the EP and the leading-order splitting law used to predict
//! eigenvalues under a perturbation `H + ε H₁`.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::cmatrix::{ComplexMatrix, ComplexScalar, DEFAULT_RTOL};
use crate::error::{Error, Result};

/// Double-precision machine epsilon used in the rounding-saturation estimate.
pub const MACHINE_EPSILON: f64 = f64::EPSILON;

/// Relative agreement required between two evaluations of the same quantity.
const ROUTE_AGREEMENT: f64 = 1e-10;

/// Default scale-aware nilpotency threshold, `1e-10 · dim`.
pub fn default_nil_tol(dim: usize) -> f64 {
    1e-10 * dim as f64
}

/// Result of EP detection on a square matrix.
#[derive(Debug, Clone)]
pub struct EpReport {
    pub dim: usize,
    /// Nilpotency index of the traceless part; `None` if it is not nilpotent.
    pub order: Option<usize>,
    /// `tr(H) / dim`.
    pub ep_eigenvalue: ComplexScalar,
    /// Traceless part `N`.
    pub nilpotent: ComplexMatrix,
    /// `N^{order−1}` at a full-order EP.
    pub top_power: Option<ComplexMatrix>,
    /// `ξ = ‖N^{n−1}‖₂` at a full-order EP.
    pub response_strength: Option<f64>,
}

impl EpReport {
    /// True when the matrix has a single Jordan block spanning the whole space.
    pub fn is_full_order(&self) -> bool {
        self.order == Some(self.dim)
    }

    /// True when the response strength was not computed.
    pub fn partial(&self) -> bool {
        !self.is_full_order()
    }

    pub(crate) fn require_full_order(&self) -> Result<usize> {
        if self.is_full_order() {
            Ok(self.dim)
        } else {
            Err(Error::NotFullOrder {
                order: self.order,
                dim: self.dim,
            })
        }
    }

    /// Response strength of a full-order EP.
    pub fn xi(&self) -> Result<f64> {
        self.require_full_order()?;
        Ok(self.response_strength.expect("full-order report carries ξ"))
    }
}

#[derive(Serialize)]
struct EpReportJson {
    dim: usize,
    order: Option<usize>,
    ep_eigenvalue: [f64; 2],
    response_strength: Option<f64>,
    partial: bool,
}

impl Serialize for EpReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        EpReportJson {
            dim: self.dim,
            order: self.order,
            ep_eigenvalue: [self.ep_eigenvalue.re, self.ep_eigenvalue.im],
            response_strength: self.response_strength,
            partial: self.partial(),
        }
        .serialize(s)
    }
}

/// Returns `(tr H / n, H − (tr H / n)·I)`.
pub fn traceless_part(h: &ComplexMatrix) -> Result<(ComplexScalar, ComplexMatrix)> {
    let n = h.require_square("traceless_part")?;
    let eps = h.trace()? / n as f64;
    Ok((eps, h.shift_diagonal(-eps)?))
}

/// Smallest `k ≤ dim` with `‖N^k‖₂ ≤ nil_tol · ‖N‖₂^k`, or `None`.
///
/// The zero matrix has index 1.
pub fn nilpotency_index(n: &ComplexMatrix, nil_tol: f64) -> Result<Option<usize>> {
    let dim = n.require_square("nilpotency_index")?;
    Ok(nilpotency_scan(n, dim, nil_tol)?.map(|(k, _)| k))
}

/// Nilpotency index together with `N^{k−1}`.
fn nilpotency_scan(
    n: &ComplexMatrix,
    dim: usize,
    nil_tol: f64,
) -> Result<Option<(usize, ComplexMatrix)>> {
    let base = n.spectral_norm();
    let mut previous = ComplexMatrix::identity(dim);
    let mut power = n.clone();
    for k in 1..=dim {
        if power.spectral_norm() <= nil_tol * base.powi(k as i32) {
            return Ok(Some((k, previous)));
        }
        let next = power.matmul(n)?;
        previous = std::mem::replace(&mut power, next);
    }
    Ok(None)
}

/// Detects an EP through the nilpotency index of the traceless part.
///
/// A report whose order is below the dimension is flagged partial and
/// carries no response strength; a non-nilpotent traceless part yields
/// `order = None`.
pub fn detect_ep(h: &ComplexMatrix, nil_tol: f64) -> Result<EpReport> {
    let (ep_eigenvalue, nilpotent) = traceless_part(h)?;
    let dim = h.rows();
    let scan = nilpotency_scan(&nilpotent, dim, nil_tol)?;
    let order = scan.as_ref().map(|(k, _)| *k);
    let (top_power, response_strength) = match scan {
        Some((k, top)) if k == dim => {
            let xi = top.spectral_norm();
            (Some(top), Some(xi))
        }
        _ => (None, None),
    };
    Ok(EpReport {
        dim,
        order,
        ep_eigenvalue,
        nilpotent,
        top_power,
        response_strength,
    })
}

/// `ξ = ‖N^{n−1}‖₂`, cross-checked against the Frobenius norm.
pub fn response_strength(h: &ComplexMatrix, nil_tol: f64) -> Result<f64> {
    let report = detect_ep(h, nil_tol)?;
    report.require_full_order()?;
    let top = report.top_power.as_ref().expect("full-order report");
    let spectral = report.response_strength.expect("full-order report");
    let frobenius = top.frobenius_norm();
    if (spectral - frobenius).abs() > ROUTE_AGREEMENT * frobenius {
        return Err(Error::Consistency(format!(
            "N^(n-1) is not rank one: spectral norm {spectral:e} vs Frobenius norm {frobenius:e}"
        )));
    }
    Ok(spectral)
}

/// `G(E) = Σ_{k<order} N^k / (E − ε_EP)^{k+1}`.
pub fn greens_function(report: &EpReport, e: ComplexScalar) -> Result<ComplexMatrix> {
    let order = report.order.ok_or(Error::NotFullOrder {
        order: None,
        dim: report.dim,
    })?;
    let z = e - report.ep_eigenvalue;
    if z.norm() == 0.0 {
        return Err(Error::Pole);
    }
    let inv = z.inv();
    let mut g = ComplexMatrix::zeros(report.dim, report.dim);
    let mut term = ComplexMatrix::identity(report.dim);
    let mut factor = inv;
    for k in 0..order {
        if k > 0 {
            term = term.matmul(&report.nilpotent)?;
            factor *= inv;
        }
        g = g.add(&term.scale(factor))?;
    }
    Ok(g)
}

/// Upper bound on `|E_j − ε_EP|`: `(ε ‖H₁‖₂ ξ)^{1/n}`.
pub fn splitting_bound(xi: f64, eps: f64, h1_spectral_norm: f64, n: usize) -> f64 {
    (eps * h1_spectral_norm * xi).powf(1.0 / n as f64)
}

/// Rounding-induced splitting estimate `(2√n ε_mp ξ)^{1/n}`, modelling
/// rounding as a random perturbation of spectral norm `2√n`.
pub fn machine_precision_bound(xi: f64, n: usize, eps_mp: f64) -> f64 {
    let nf = n as f64;
    (2.0 * nf.sqrt() * eps_mp * xi).powf(1.0 / nf)
}

/// Leading-order eigenvalues of `H + ε H₁` at a full-order EP.
#[derive(Debug, Clone, Serialize)]
pub struct SplittingPrediction {
    pub n: usize,
    /// `ε · tr(N^{n−1} H₁)`.
    #[serde(serialize_with = "complex_pair")]
    pub radicand: ComplexScalar,
    /// `ε · ⟨ψ_EP|N^{n−1} H₁|ψ_EP⟩`, the same quantity evaluated on the EP state.
    #[serde(serialize_with = "complex_pair")]
    pub sandwich: ComplexScalar,
    /// `ε_EP + radicand^{1/n} · ω_k` for the `n` roots of unity `ω_k`.
    #[serde(serialize_with = "complex_list")]
    pub predicted_eigenvalues: Vec<ComplexScalar>,
}

fn complex_pair<S: Serializer>(z: &ComplexScalar, s: S) -> std::result::Result<S::Ok, S::Error> {
    [z.re, z.im].serialize(s)
}

fn complex_list<S: Serializer>(zs: &[ComplexScalar], s: S) -> std::result::Result<S::Ok, S::Error> {
    zs.iter()
        .map(|z| [z.re, z.im])
        .collect::<Vec<_>>()
        .serialize(s)
}

/// The `n` complex `n`-th roots of `z`, principal root first.
pub fn nth_roots(z: Complex64, n: usize) -> Vec<Complex64> {
    let nf = n as f64;
    let principal = Complex64::from_polar(z.norm().powf(1.0 / nf), z.arg() / nf);
    (0..n)
        .map(|k| principal * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / nf))
        .collect()
}

pub fn predicted_splitting(
    report: &EpReport,
    h1: &ComplexMatrix,
    eps: f64,
) -> Result<SplittingPrediction> {
    let n = report.require_full_order()?;
    if h1.rows() != n || h1.cols() != n {
        return Err(Error::Shape {
            op: "predicted_splitting",
            detail: format!(
                "perturbation is {}x{}, system is {n}x{n}",
                h1.rows(),
                h1.cols()
            ),
        });
    }
    let top = report.top_power.as_ref().expect("full-order report");
    let product = top.matmul(h1)?;
    let radicand = product.trace()? * eps;

    let psi = report.nilpotent.kernel_vector(DEFAULT_RTOL)?;
    let sandwich = psi.inner(&product.mul_vec(&psi)?) * eps;
    let scale = eps * report.xi()? * h1.spectral_norm();
    if (radicand - sandwich).norm() > ROUTE_AGREEMENT * scale.max(radicand.norm()) {
        return Err(Error::Consistency(format!(
            "trace form {radicand} and EP-state form {sandwich} of the splitting disagree"
        )));
    }

    let predicted_eigenvalues = nth_roots(radicand, n)
        .into_iter()
        .map(|r| report.ep_eigenvalue + r)
        .collect();
    Ok(SplittingPrediction {
        n,
        radicand,
        sandwich,
        predicted_eigenvalues,
    })
}

/// Pairs computed eigenvalues with predicted ones by a minimum-cost
/// assignment on `|computed − predicted|`. Returns, for each computed value,
/// the index of its partner, and the largest paired distance.
pub fn match_eigenvalues(
    computed: &[Complex64],
    predicted: &[Complex64],
) -> Result<(Vec<usize>, f64)> {
    if computed.len() != predicted.len() {
        return Err(Error::Shape {
            op: "match_eigenvalues",
            detail: format!(
                "{} computed vs {} predicted",
                computed.len(),
                predicted.len()
            ),
        });
    }
    let cost: Vec<Vec<f64>> = computed
        .iter()
        .map(|c| predicted.iter().map(|p| (c - p).norm()).collect())
        .collect();
    let assignment = min_cost_assignment(&cost);
    let worst = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0, f64::max);
    Ok((assignment, worst))
}

/// Hungarian algorithm on a square cost matrix; `result[row] = column`.
fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // Potentials and matching use 1-based indices with 0 as the sentinel.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut result = vec![0; n];
    for j in 1..=n {
        if owner[j] > 0 {
            result[owner[j] - 1] = j - 1;
        }
    }
    result
}
