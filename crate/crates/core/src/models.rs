//! Built-in PT-symmetric dimer and trimer and their unidirectional coupling.
//!
//! The EP constructors lock the gain/loss coefficient to the coupling
//! (`α = g` for the dimer, `α = √2 g` for the trimer). The `*_detuned`
//! variants take `α` freely and are meant for off-EP studies only.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cmatrix::{ComplexMatrix, ComplexScalar};
use crate::compose::{block_compose, ComposeOptions, CompositeSystem};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtDimerParams {
    pub omega0: f64,
    pub g_a: f64,
    pub alpha_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtTrimerParams {
    pub omega0: f64,
    pub g_b: f64,
    pub alpha_b: f64,
}

impl PtDimerParams {
    pub fn at_ep(omega0: f64, g_a: f64) -> Self {
        PtDimerParams {
            omega0,
            g_a,
            alpha_a: g_a,
        }
    }

    pub fn hamiltonian(&self) -> Result<ComplexMatrix> {
        positive("g_a", self.g_a)?;
        positive("alpha_a", self.alpha_a)?;
        let (w, g, a) = (self.omega0, self.g_a, self.alpha_a);
        ComplexMatrix::from_rows(vec![
            vec![Complex64::new(w, a), Complex64::new(g, 0.0)],
            vec![Complex64::new(g, 0.0), Complex64::new(w, -a)],
        ])
    }
}

impl PtTrimerParams {
    pub fn at_ep(omega0: f64, g_b: f64) -> Self {
        PtTrimerParams {
            omega0,
            g_b,
            alpha_b: std::f64::consts::SQRT_2 * g_b,
        }
    }

    pub fn hamiltonian(&self) -> Result<ComplexMatrix> {
        positive("g_b", self.g_b)?;
        positive("alpha_b", self.alpha_b)?;
        let (w, g, a) = (self.omega0, self.g_b, self.alpha_b);
        let z = Complex64::new(0.0, 0.0);
        let g = Complex64::new(g, 0.0);
        ComplexMatrix::from_rows(vec![
            vec![Complex64::new(w, a), g, z],
            vec![g, Complex64::new(w, 0.0), g],
            vec![z, g, Complex64::new(w, -a)],
        ])
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{name} must be positive and finite, got {value}"
        )))
    }
}

/// Dimer at its EP₂ (`α_a = g_a`); `ξ_a = 2 g_a`.
pub fn pt_dimer(omega0: f64, g_a: f64) -> Result<ComplexMatrix> {
    PtDimerParams::at_ep(omega0, g_a).hamiltonian()
}

/// Trimer at its EP₃ (`α_b = √2 g_b`); `ξ_b = 4 g_b²`.
pub fn pt_trimer(omega0: f64, g_b: f64) -> Result<ComplexMatrix> {
    PtTrimerParams::at_ep(omega0, g_b).hamiltonian()
}

pub fn pt_dimer_detuned(omega0: f64, g_a: f64, alpha_a: f64) -> Result<ComplexMatrix> {
    PtDimerParams {
        omega0,
        g_a,
        alpha_a,
    }
    .hamiltonian()
}

pub fn pt_trimer_detuned(omega0: f64, g_b: f64, alpha_b: f64) -> Result<ComplexMatrix> {
    PtTrimerParams {
        omega0,
        g_b,
        alpha_b,
    }
    .hamiltonian()
}

/// `n_b × n_a` matrix with the single entry `k` at 1-based `(row, col)`.
pub fn single_entry_coupling(
    k: ComplexScalar,
    n_b: usize,
    n_a: usize,
    row: usize,
    col: usize,
) -> Result<ComplexMatrix> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::Parameter(
            "coupling dimensions must be positive".into(),
        ));
    }
    if !(1..=n_b).contains(&row) || !(1..=n_a).contains(&col) {
        return Err(Error::Parameter(format!(
            "entry ({row}, {col}) outside a {n_b}x{n_a} coupling matrix"
        )));
    }
    let mut m = ComplexMatrix::zeros(n_b, n_a);
    m[(row - 1, col - 1)] = k;
    Ok(m)
}

/// Dimer driving the trimer through its gain site: `K = k·e₁e₁ᵀ`.
pub fn dimer_trimer_system(
    omega0: f64,
    g_a: f64,
    g_b: f64,
    k: ComplexScalar,
) -> Result<CompositeSystem> {
    let h_a = pt_dimer(omega0, g_a)?;
    let h_b = pt_trimer(omega0, g_b)?;
    let coupling = single_entry_coupling(k, 3, 2, 1, 1)?;
    block_compose(&h_a, &h_b, &coupling, &ComposeOptions::default())
}

/// Named-system file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NamedSystem {
    Dimer {
        omega0: f64,
        g_a: f64,
    },
    Trimer {
        omega0: f64,
        g_b: f64,
    },
    DimerTrimer {
        omega0: f64,
        g_a: f64,
        g_b: f64,
        k: [f64; 2],
    },
}

impl NamedSystem {
    pub fn hamiltonian(&self) -> Result<ComplexMatrix> {
        match *self {
            NamedSystem::Dimer { omega0, g_a } => pt_dimer(omega0, g_a),
            NamedSystem::Trimer { omega0, g_b } => pt_trimer(omega0, g_b),
            NamedSystem::DimerTrimer { .. } => Ok(self.composite()?.expect("composite model").h),
        }
    }

    /// The composite system, for models that are one.
    pub fn composite(&self) -> Result<Option<CompositeSystem>> {
        match *self {
            NamedSystem::DimerTrimer {
                omega0,
                g_a,
                g_b,
                k,
            } => Ok(Some(dimer_trimer_system(
                omega0,
                g_a,
                g_b,
                Complex64::new(k[0], k[1]),
            )?)),
            _ => Ok(None),
        }
    }
}
