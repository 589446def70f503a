//! Gauge-fixed Jordan chains at a full-order EP.
//!
//! The chain satisfies `N j₁ = 0`, `N j_l = j_{l−1}`, `⟨j₁|j₁⟩ = 1` and
//! `⟨j_n|j_l⟩ = 0` for `l < n`. In that gauge the response strength is
//! `ξ = 1/‖j_n‖`, and `N^{n−1} = |j₁⟩⟨j_n| / ‖j_n‖²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::cmatrix::{ComplexMatrix, ComplexScalar, ComplexVector, DEFAULT_RTOL};
use crate::compose::CompositeSystem;
use crate::ep::EpReport;
use crate::error::{Error, Result};

/// Default relative tolerance for the chain conditions.
pub const DEFAULT_CHAIN_TOL: f64 = 1e-10;

const NORMALIZATION_TOL: f64 = 1e-12;

/// Achieved residuals of the chain conditions, all dimensionless.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainResiduals {
    /// `‖N j₁‖ / ‖N‖₂`.
    pub kernel: f64,
    /// `‖N j_l − j_{l−1}‖ / ‖j_{l−1}‖` for `l = 2..n`.
    pub chain: Vec<f64>,
    /// `|⟨j₁|j₁⟩ − 1|`.
    pub normalization: f64,
    /// `|⟨j_n|j_l⟩| / (‖j_n‖ ‖j_l‖)` for `l = 1..n−1`.
    pub orthogonality: Vec<f64>,
}

impl ChainResiduals {
    /// Largest of the kernel, chain and orthogonality residuals.
    pub fn worst(&self) -> f64 {
        self.chain
            .iter()
            .chain(&self.orthogonality)
            .copied()
            .fold(self.kernel, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct JordanChain {
    pub n: usize,
    /// `j₁ … j_n`; `j₁` is the normalized EP eigenstate.
    pub vectors: Vec<ComplexVector>,
    pub residuals: ChainResiduals,
}

impl JordanChain {
    pub fn eigenstate(&self) -> &ComplexVector {
        &self.vectors[0]
    }

    pub fn last(&self) -> &ComplexVector {
        self.vectors.last().expect("chain is never empty")
    }
}

/// Builds the gauge-fixed chain of a full-order EP.
///
/// `j₁` is the phase-fixed kernel vector of `N`; each further vector is the
/// minimum-norm solution of `N j_l = j_{l−1}`. The remaining freedom
/// `j_l → j_l + Σ_m c_m j_{l−m}` is then fixed by making `j_n` orthogonal to
/// the earlier vectors.
pub fn jordan_chain(report: &EpReport, tol: f64) -> Result<JordanChain> {
    let n = report.require_full_order()?;
    let nilpotent = &report.nilpotent;

    let first = nilpotent
        .kernel_vector(DEFAULT_RTOL)
        .map_err(|e| Error::Structure(format!("EP eigenstate: {e}")))?;
    let mut raw = vec![first];
    for l in 2..=n {
        let next = nilpotent
            .min_norm_solve(raw.last().expect("nonempty"), DEFAULT_RTOL)
            .map_err(|e| Error::Structure(format!("chain step {l}: {e}")))?;
        raw.push(next);
    }

    let vectors = if n >= 2 {
        let last = raw.last().expect("nonempty");
        // Column m−1 holds j_{n−m}, so J·c = Σ_m c_m j_{n−m}.
        let earlier: Vec<ComplexVector> = raw[..n - 1].iter().rev().cloned().collect();
        let gauge = ComplexMatrix::from_columns(&earlier)?
            .least_squares(last, DEFAULT_RTOL)?
            .scale(Complex64::new(-1.0, 0.0));
        (0..n)
            .map(|l| (1..=l).try_fold(raw[l].clone(), |acc, m| acc.axpy(gauge[m - 1], &raw[l - m])))
            .collect::<Result<Vec<_>>>()?
    } else {
        raw
    };

    let residuals = chain_residuals(nilpotent, &vectors)?;
    if residuals.normalization > NORMALIZATION_TOL {
        return Err(Error::Structure(format!(
            "eigenstate normalization off by {:e}",
            residuals.normalization
        )));
    }
    if residuals.worst() > tol {
        return Err(Error::Structure(format!(
            "chain residual {:e} exceeds tolerance {tol:e}",
            residuals.worst()
        )));
    }
    Ok(JordanChain {
        n,
        vectors,
        residuals,
    })
}

pub fn chain_residuals(
    nilpotent: &ComplexMatrix,
    vectors: &[ComplexVector],
) -> Result<ChainResiduals> {
    let norm_n = nilpotent.spectral_norm().max(f64::MIN_POSITIVE);
    let first = &vectors[0];
    let kernel = nilpotent.mul_vec(first)?.norm() / norm_n;
    let chain = vectors
        .windows(2)
        .map(|w| Ok(nilpotent.mul_vec(&w[1])?.sub(&w[0])?.norm() / w[0].norm()))
        .collect::<Result<Vec<_>>>()?;
    let last = vectors.last().expect("nonempty");
    let orthogonality = vectors[..vectors.len() - 1]
        .iter()
        .map(|v| last.inner(v).norm() / (last.norm() * v.norm()))
        .collect();
    Ok(ChainResiduals {
        kernel,
        chain,
        normalization: (first.inner(first).re - 1.0).abs(),
        orthogonality,
    })
}

/// `ξ = 1/‖j_n‖`.
pub fn response_from_chain(chain: &JordanChain) -> f64 {
    1.0 / chain.last().norm()
}

/// `⟨j̃_{b,n_b}|K|ψ_{EP,a}⟩` with `j̃` the unit-normalized last Jordan vector of `b`.
pub fn coupling_amplitude(
    chain_b: &JordanChain,
    psi_ep_a: &ComplexVector,
    k: &ComplexMatrix,
) -> Result<ComplexScalar> {
    if k.rows() != chain_b.last().dim() || k.cols() != psi_ep_a.dim() {
        return Err(Error::Shape {
            op: "coupling_amplitude",
            detail: format!(
                "coupling is {}x{}, subsystem b has dimension {} and a has {}",
                k.rows(),
                k.cols(),
                chain_b.last().dim(),
                psi_ep_a.dim()
            ),
        });
    }
    if (psi_ep_a.norm() - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Parameter(format!(
            "EP eigenstate must be normalized, has norm {}",
            psi_ep_a.norm()
        )));
    }
    let last = chain_b.last();
    let unit = last.scale(Complex64::new(1.0 / last.norm(), 0.0));
    Ok(unit.inner(&k.mul_vec(psi_ep_a)?))
}

/// Composite response strength from the subsystem chains: `ξ_a ξ_b |⟨j̃_b|K|ψ_a⟩|`.
pub fn factorized_response(sys: &CompositeSystem, tol: f64) -> Result<f64> {
    let chain_a = jordan_chain(&sys.report_a, tol)?;
    let chain_b = jordan_chain(&sys.report_b, tol)?;
    let amplitude = coupling_amplitude(&chain_b, chain_a.eigenstate(), &sys.k)?;
    Ok(sys.xi_a() * sys.xi_b() * amplitude.norm())
}
