//! Randomized perturbation experiments on EP Hamiltonians.
//!
//! Perturbations have independent real and imaginary parts uniform on
//! `[-1/2, 1/2)`. Each trial draws its own matrix from a child seed
//! `seed ⊕ splitmix64(trial)` through a ChaCha8 stream, so a trial's matrix
//! depends only on `(seed, trial)` and never on evaluation order.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cmatrix::{ComplexMatrix, ComplexScalar, ZERO};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationMode {
    Generic,
    Preserving,
}

impl FromStr for PerturbationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(PerturbationMode::Generic),
            "preserving" => Ok(PerturbationMode::Preserving),
            other => Err(Error::Parse(format!(
                "unknown perturbation mode {other:?} (expected generic or preserving)"
            ))),
        }
    }
}

/// Which random ensemble a sweep draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    Generic,
    /// Keeps the block that would couple `b` back into `a` (rows `< n_a`,
    /// columns `≥ n_a`) exactly zero.
    Preserving {
        n_a: usize,
    },
}

impl Ensemble {
    pub fn mode(&self) -> PerturbationMode {
        match self {
            Ensemble::Generic => PerturbationMode::Generic,
            Ensemble::Preserving { .. } => PerturbationMode::Preserving,
        }
    }

    pub fn draw(&self, dim: usize, seed: u64) -> Result<Perturbation> {
        match *self {
            Ensemble::Generic => random_generic(dim, seed),
            Ensemble::Preserving { n_a } => {
                if n_a == 0 || n_a >= dim {
                    return Err(Error::Parameter(format!(
                        "block split {n_a} invalid for dimension {dim}"
                    )));
                }
                random_preserving(n_a, dim - n_a, seed)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Perturbation {
    pub matrix: ComplexMatrix,
    pub mode: PerturbationMode,
    pub seed: u64,
}

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn child_seed(seed: u64, trial: u64) -> u64 {
    seed ^ splitmix64(trial)
}

fn uniform_entry(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
}

pub fn random_generic(dim: usize, seed: u64) -> Result<Perturbation> {
    if dim == 0 {
        return Err(Error::Parameter(
            "perturbation dimension must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..dim * dim).map(|_| uniform_entry(&mut rng)).collect();
    Ok(Perturbation {
        matrix: ComplexMatrix::new(dim, dim, entries)?,
        mode: PerturbationMode::Generic,
        seed,
    })
}

/// Random perturbation with the `[[H1a, 0], [K1, H1b]]` block layout.
pub fn random_preserving(n_a: usize, n_b: usize, seed: u64) -> Result<Perturbation> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::Parameter(
            "subsystem dimensions must be positive".into(),
        ));
    }
    let dim = n_a + n_b;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(dim * dim);
    for r in 0..dim {
        for c in 0..dim {
            // Draw every entry so the stream layout matches the generic ensemble.
            let z = uniform_entry(&mut rng);
            entries.push(if r < n_a && c >= n_a { ZERO } else { z });
        }
    }
    Ok(Perturbation {
        matrix: ComplexMatrix::new(dim, dim, entries)?,
        mode: PerturbationMode::Preserving,
        seed,
    })
}

/// `max_j |E_j − ε_EP|` over the eigenvalues `E_j` of `H + eps·H₁`.
///
/// The EP eigenvalue is subtracted before the eigensolve, which leaves the
/// spectrum shifted but otherwise unchanged and keeps the rounding floor
/// proportional to `‖N‖` rather than `‖H‖`.
pub fn max_splitting(
    h: &ComplexMatrix,
    ep_eigenvalue: ComplexScalar,
    h1: &ComplexMatrix,
    eps: f64,
) -> Result<f64> {
    if eps < 0.0 || !eps.is_finite() {
        return Err(Error::Parameter(format!(
            "perturbation strength must be >= 0, got {eps}"
        )));
    }
    let shifted = h.shift_diagonal(-ep_eigenvalue)?;
    let perturbed = shifted.add(&h1.scale(Complex64::new(eps, 0.0)))?;
    Ok(perturbed
        .eigenvalues()?
        .iter()
        .map(|e| e.norm())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub eps: f64,
    pub trial: u64,
    pub max_splitting: f64,
}

/// `points` values spaced evenly in `log10` from `min` to `max` inclusive.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && min.is_finite() && max.is_finite()) {
        return Err(Error::Parameter(format!(
            "grid bounds must satisfy 0 < min < max, got [{min}, {max}]"
        )));
    }
    if points < 2 {
        return Err(Error::Parameter("grid needs at least two points".into()));
    }
    let (lo, hi) = (min.log10(), max.log10());
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| 10f64.powf(lo + step * i as f64))
        .collect())
}

/// Measures the splitting for every `(eps, trial)` pair, sorted by eps then
/// trial.
pub fn sweep(
    h: &ComplexMatrix,
    ep_eigenvalue: ComplexScalar,
    ensemble: Ensemble,
    eps_grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<SweepRecord>> {
    if trials == 0 {
        return Err(Error::Parameter("at least one trial is required".into()));
    }
    if eps_grid.is_empty()
        || eps_grid.iter().any(|&e| e <= 0.0 || !e.is_finite())
        || eps_grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Parameter(
            "eps grid must be positive and strictly ascending".into(),
        ));
    }
    let dim = h.require_square("sweep")?;
    let perturbations = (0..trials)
        .map(|t| ensemble.draw(dim, child_seed(seed, t)))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(eps_grid.len() * trials as usize);
    for &eps in eps_grid {
        for (trial, p) in perturbations.iter().enumerate() {
            records.push(SweepRecord {
                eps,
                trial: trial as u64,
                max_splitting: max_splitting(h, ep_eigenvalue, &p.matrix, eps)?,
            });
        }
    }
    Ok(records)
}

/// CSV with header `epsilon,trial,max_splitting` and 17 significant digits.
pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("epsilon,trial,max_splitting\n");
    for r in records {
        writeln!(out, "{:.16e},{},{:.16e}", r.eps, r.trial, r.max_splitting)
            .expect("writing to a String cannot fail");
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("epsilon,trial,max_splitting") => {}
        other => return Err(Error::Parse(format!("unexpected CSV header {other:?}"))),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            let bad = || Error::Parse(format!("malformed CSV row {line:?}"));
            if fields.len() != 3 {
                return Err(bad());
            }
            Ok(SweepRecord {
                eps: fields[0].parse().map_err(|_| bad())?,
                trial: fields[1].parse().map_err(|_| bad())?,
                max_splitting: fields[2].parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Least-squares line through `(log10 eps, log10 median splitting)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    /// Root-mean-square residual in decades.
    pub residual: f64,
    pub points: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Fits the scaling exponent over records whose eps lies in `window`
/// (inclusive, compared in `log10` with a 1e-9 decade margin).
pub fn fit_slope(records: &[SweepRecord], window: (f64, f64)) -> Result<SlopeFit> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Fit(format!("invalid window [{lo}, {hi}]")));
    }
    let (llo, lhi) = (lo.log10() - 1e-9, hi.log10() + 1e-9);

    let mut groups: Vec<(f64, Vec<f64>)> = Vec::new();
    for r in records {
        if r.eps <= 0.0 {
            continue;
        }
        let le = r.eps.log10();
        if le < llo || le > lhi {
            continue;
        }
        match groups.iter_mut().find(|(eps, _)| *eps == r.eps) {
            Some((_, values)) => values.push(r.max_splitting),
            None => groups.push((r.eps, vec![r.max_splitting])),
        }
    }
    if groups.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 distinct eps values in [{lo:e}, {hi:e}], found {}",
            groups.len()
        )));
    }
    let points: Vec<(f64, f64)> = groups
        .iter_mut()
        .map(|(eps, values)| (eps.log10(), median(values).log10()))
        .collect();
    if points.iter().any(|(_, y)| !y.is_finite()) {
        return Err(Error::Fit("zero splitting inside the fit window".into()));
    }

    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        window,
        residual,
        points: points.len(),
    })
}
