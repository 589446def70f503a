//! Hierarchical composition of two EPs by unidirectional coupling.
//!
//! Subsystem `a` drives subsystem `b` through `K` (shape `n_b × n_a`):
//!
//! ```text
//!     H = [ H_a   0  ]
//!         [ K    H_b ]
//! ```
//!
//! With `N_a^{n_a} = 0` and `N_b^{n_b} = 0`, the highest surviving power of
//! the composite traceless part is
//! `N^{n_a+n_b−1} = [[0, 0], [N_b^{n_b−1} K N_a^{n_a−1}, 0]]`, so the composite
//! is an EP of order `n_a + n_b` iff the genericity product
//! `C = N_b^{n_b−1} K N_a^{n_a−1}` is nonzero, and then `ξ = ‖C‖₂ = ‖C‖_F`.

use serde::Serialize;

use crate::cmatrix::{ComplexMatrix, ComplexScalar};
use crate::ep::{default_nil_tol, detect_ep, nilpotency_index, EpReport};
use crate::error::{Error, Result};

/// Relative size below which `C` counts as zero.
pub const GENERICITY_RTOL: f64 = 1e-8;

const ROUTE_AGREEMENT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComposeOptions {
    /// Nilpotency threshold for the subsystems; `None` uses the default per
    /// dimension.
    pub nil_tol: Option<f64>,
    /// Largest allowed `|ε_a − ε_b|`.
    pub eigenvalue_tol: f64,
    /// Shift `H_b` by `(ε_a − ε_b)·I` instead of rejecting a mismatch.
    pub align_eigenvalues: bool,
}

impl Default for ComposeOptions {
    fn default() -> Self {
        ComposeOptions {
            nil_tol: None,
            eigenvalue_tol: 1e-10,
            align_eigenvalues: false,
        }
    }
}

/// Two full-order EPs joined by a unidirectional coupling.
#[derive(Debug, Clone)]
pub struct CompositeSystem {
    pub n_a: usize,
    pub n_b: usize,
    pub h_a: ComplexMatrix,
    pub h_b: ComplexMatrix,
    pub k: ComplexMatrix,
    pub h: ComplexMatrix,
    pub ep_eigenvalue: ComplexScalar,
    pub report_a: EpReport,
    pub report_b: EpReport,
}

#[derive(Serialize)]
struct CompositeJson<'a> {
    h_a: &'a ComplexMatrix,
    h_b: &'a ComplexMatrix,
    k: &'a ComplexMatrix,
    h: &'a ComplexMatrix,
    ep_eigenvalue: [f64; 2],
}

impl Serialize for CompositeSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CompositeJson {
            h_a: &self.h_a,
            h_b: &self.h_b,
            k: &self.k,
            h: &self.h,
            ep_eigenvalue: [self.ep_eigenvalue.re, self.ep_eigenvalue.im],
        }
        .serialize(s)
    }
}

/// Outcome of the genericity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Genericity {
    pub generic: bool,
    /// `‖C‖_F`.
    pub c_norm: f64,
    /// `1e-8 · ‖K‖₂ · ‖N_a‖₂^{n_a−1} · ‖N_b‖₂^{n_b−1}`.
    pub threshold: f64,
}

fn certify(h: &ComplexMatrix, nil_tol: Option<f64>, which: &str) -> Result<EpReport> {
    let n = h.require_square("block_compose")?;
    let report = detect_ep(h, nil_tol.unwrap_or_else(|| default_nil_tol(n)))?;
    if !report.is_full_order() {
        return Err(Error::Parameter(format!(
            "subsystem {which} is not a full-order EP (order {:?}, dimension {n})",
            report.order
        )));
    }
    Ok(report)
}

/// Assembles the block lower-triangular composite of two certified EPs.
pub fn block_compose(
    h_a: &ComplexMatrix,
    h_b: &ComplexMatrix,
    k: &ComplexMatrix,
    options: &ComposeOptions,
) -> Result<CompositeSystem> {
    let n_a = h_a.require_square("block_compose")?;
    let n_b = h_b.require_square("block_compose")?;
    if k.rows() != n_b || k.cols() != n_a {
        return Err(Error::Shape {
            op: "block_compose",
            detail: format!(
                "coupling must be {n_b}x{n_a} (n_b x n_a), got {}x{}",
                k.rows(),
                k.cols()
            ),
        });
    }
    let report_a = certify(h_a, options.nil_tol, "a")?;
    let mut report_b = certify(h_b, options.nil_tol, "b")?;
    let mut h_b = h_b.clone();

    let gap = report_a.ep_eigenvalue - report_b.ep_eigenvalue;
    if gap.norm() > options.eigenvalue_tol {
        if !options.align_eigenvalues {
            return Err(Error::IncompatibleSubsystems {
                a: report_a.ep_eigenvalue.to_string(),
                b: report_b.ep_eigenvalue.to_string(),
            });
        }
        h_b = h_b.shift_diagonal(gap)?;
        report_b = certify(&h_b, options.nil_tol, "b")?;
    }

    let n = n_a + n_b;
    let mut h = ComplexMatrix::zeros(n, n);
    h.set_block(0, 0, h_a)?;
    h.set_block(n_a, 0, k)?;
    h.set_block(n_a, n_a, &h_b)?;
    let ep_eigenvalue = h.trace()? / n as f64;

    Ok(CompositeSystem {
        n_a,
        n_b,
        h_a: h_a.clone(),
        h_b,
        k: k.clone(),
        h,
        ep_eigenvalue,
        report_a,
        report_b,
    })
}

/// Folds `block_compose` left to right: `H₀ ← H₁ ← H₂ ...`, where
/// `couplings[i]` couples everything assembled so far into
/// `hamiltonians[i + 1]`.
pub fn compose_chain(
    hamiltonians: &[ComplexMatrix],
    couplings: &[ComplexMatrix],
    options: &ComposeOptions,
) -> Result<CompositeSystem> {
    if hamiltonians.len() < 2 || couplings.len() != hamiltonians.len() - 1 {
        return Err(Error::Parameter(format!(
            "need at least two subsystems and one coupling per link, got {} and {}",
            hamiltonians.len(),
            couplings.len()
        )));
    }
    let mut system = block_compose(&hamiltonians[0], &hamiltonians[1], &couplings[0], options)?;
    for (h_next, k_next) in hamiltonians[2..].iter().zip(&couplings[1..]) {
        system = block_compose(&system.h, h_next, k_next, options)?;
    }
    Ok(system)
}

impl CompositeSystem {
    pub fn dim(&self) -> usize {
        self.n_a + self.n_b
    }

    pub fn xi_a(&self) -> f64 {
        self.report_a
            .response_strength
            .expect("certified subsystem")
    }

    pub fn xi_b(&self) -> f64 {
        self.report_b
            .response_strength
            .expect("certified subsystem")
    }

    /// Traceless part of the assembled Hamiltonian.
    pub fn nilpotent(&self) -> Result<ComplexMatrix> {
        self.h.shift_diagonal(-self.ep_eigenvalue)
    }

    /// Structured `N^{n−1}`: `C` in the lower-left block, exact zeros elsewhere.
    pub fn top_power(&self) -> Result<ComplexMatrix> {
        let c = genericity_product(self)?;
        let mut top = ComplexMatrix::zeros(self.dim(), self.dim());
        top.set_block(self.n_a, 0, &c)?;
        Ok(top)
    }

    pub fn genericity(&self) -> Result<Genericity> {
        let c = genericity_product(self)?;
        let threshold = GENERICITY_RTOL
            * self.k.spectral_norm()
            * self
                .report_a
                .nilpotent
                .spectral_norm()
                .powi(self.n_a as i32 - 1)
            * self
                .report_b
                .nilpotent
                .spectral_norm()
                .powi(self.n_b as i32 - 1);
        let c_norm = c.frobenius_norm();
        Ok(Genericity {
            generic: c_norm > threshold,
            c_norm,
            threshold,
        })
    }

    /// EP report of the assembled system.
    ///
    /// At full order the top power is replaced by its structured block form,
    /// so that traces against perturbations that keep the upper-right block
    /// zero vanish exactly.
    pub fn ep_report(&self, nil_tol: f64) -> Result<EpReport> {
        let mut report = detect_ep(&self.h, nil_tol)?;
        if report.is_full_order() {
            let top = self.top_power()?;
            report.response_strength = Some(top.spectral_norm());
            report.top_power = Some(top);
        }
        Ok(report)
    }
}

/// `C = N_b^{n_b−1} K N_a^{n_a−1}`, checked against the lower-left block of
/// the directly computed `N^{n_a+n_b−1}`.
pub fn genericity_product(sys: &CompositeSystem) -> Result<ComplexMatrix> {
    let top_a = sys
        .report_a
        .top_power
        .as_ref()
        .expect("certified subsystem");
    let top_b = sys
        .report_b
        .top_power
        .as_ref()
        .expect("certified subsystem");
    let c = top_b.matmul(&sys.k)?.matmul(top_a)?;

    let direct = sys.nilpotent()?.pow(sys.dim() - 1)?;
    let block = direct.block(sys.n_a, 0, sys.n_b, sys.n_a)?;
    let scale = c.frobenius_norm().max(
        sys.k.spectral_norm()
            * sys
                .report_a
                .nilpotent
                .spectral_norm()
                .powi(sys.n_a as i32 - 1)
            * sys
                .report_b
                .nilpotent
                .spectral_norm()
                .powi(sys.n_b as i32 - 1),
    );
    let diff = block.sub(&c)?.frobenius_norm();
    if diff > ROUTE_AGREEMENT * scale {
        return Err(Error::Consistency(format!(
            "genericity product deviates from the block of N^(n-1) by {diff:e} (scale {scale:e})"
        )));
    }
    Ok(c)
}

/// `ξ = ‖C‖₂`, cross-checked against `‖C‖_F`. Fails for degenerate couplings.
pub fn composite_response(sys: &CompositeSystem) -> Result<f64> {
    let verdict = sys.genericity()?;
    if !verdict.generic {
        let n = sys.nilpotent()?;
        return Err(Error::DegenerateCoupling {
            c_norm: verdict.c_norm,
            threshold: verdict.threshold,
            achieved_order: nilpotency_index(&n, default_nil_tol(sys.dim()))?,
            full_order: sys.dim(),
        });
    }
    let c = genericity_product(sys)?;
    let spectral = c.spectral_norm();
    let frobenius = c.frobenius_norm();
    if (spectral - frobenius).abs() > ROUTE_AGREEMENT * frobenius {
        return Err(Error::Consistency(format!(
            "genericity product is not rank one: {spectral:e} vs {frobenius:e}"
        )));
    }
    Ok(spectral)
}

/// Submultiplicative bound `ξ ≤ ξ_a ξ_b ‖K‖₂`.
pub fn response_upper_bound(xi_a: f64, xi_b: f64, k: &ComplexMatrix) -> f64 {
    xi_a * xi_b * k.spectral_norm()
}
