//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so the lines stay in order.

use std::time::{Duration, Instant};

use hiep::cli::{reproduce_fig3, Fig3Config};
use hiep::compose::{block_compose, composite_response, ComposeOptions};
use hiep::ep::{
    default_nil_tol, detect_ep, greens_function, machine_precision_bound, nilpotency_index,
    predicted_splitting, response_strength, MACHINE_EPSILON,
};
use hiep::jordan::{
    coupling_amplitude, factorized_response, jordan_chain, response_from_chain, DEFAULT_CHAIN_TOL,
};
use hiep::models::{dimer_trimer_system, pt_dimer, pt_trimer};
use hiep::perturb::{random_generic, random_preserving};
use hiep::{ComplexMatrix, ComplexVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

/// Identifier, description, check and optional time limit.
type Criterion = (&'static str, &'static str, fn() -> Check, Option<Duration>);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn gaussian_like(rng: &mut ChaCha8Rng) -> f64 {
    (0..4).map(|_| rng.gen::<f64>() - 0.5).sum()
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let entries = (0..rows * cols)
        .map(|_| c(gaussian_like(rng), gaussian_like(rng)))
        .collect();
    ComplexMatrix::new(rows, cols, entries).unwrap()
}

fn inverse(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows();
    let columns: Vec<ComplexVector> = (0..n)
        .map(|i| a.min_norm_solve(&ComplexVector::unit(n, i), 1e-14).unwrap())
        .collect();
    ComplexMatrix::from_columns(&columns).unwrap()
}

fn similar_jordan(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut j = ComplexMatrix::zeros(n, n);
    for i in 0..n - 1 {
        j[(i, i + 1)] = c(1.0, 0.0);
    }
    let s = ComplexMatrix::identity(n)
        .add(&random_matrix(rng, n, n).scale(c(0.3 / (n as f64).sqrt(), 0.0)))
        .unwrap();
    s.matmul(&j).unwrap().matmul(&inverse(&s)).unwrap()
}

fn ac1() -> Check {
    let sys = dimer_trimer_system(1.0, 1.5, 1.3, c(1.0, 0.0)).map_err(|e| e.to_string())?;
    let xi_a = response_strength(&sys.h_a, default_nil_tol(2)).map_err(|e| e.to_string())?;
    let xi_b = response_strength(&sys.h_b, default_nil_tol(3)).map_err(|e| e.to_string())?;
    let xi = composite_response(&sys).map_err(|e| e.to_string())?;
    let expected = 8f64.sqrt() * 1.5 * 1.69;
    ensure(rel(xi_a, 3.0) <= 1e-10, || format!("xi_a = {xi_a}"))?;
    ensure(rel(xi_b, 6.76) <= 1e-10, || format!("xi_b = {xi_b}"))?;
    ensure(rel(xi, expected) <= 1e-10, || {
        format!("xi = {xi}, expected {expected}")
    })?;
    Ok(format!("xi_a={xi_a:.12} xi_b={xi_b:.12} xi={xi:.12}"))
}

fn three_routes(sys: &hiep::compose::CompositeSystem) -> std::result::Result<f64, String> {
    let direct =
        response_strength(&sys.h, default_nil_tol(sys.dim())).map_err(|e| e.to_string())?;
    let report = detect_ep(&sys.h, default_nil_tol(sys.dim())).map_err(|e| e.to_string())?;
    let chain = jordan_chain(&report, DEFAULT_CHAIN_TOL).map_err(|e| e.to_string())?;
    let via_chain = response_from_chain(&chain);
    let factored = factorized_response(sys, DEFAULT_CHAIN_TOL).map_err(|e| e.to_string())?;
    let spread = [
        rel(via_chain, direct),
        rel(factored, direct),
        rel(factored, via_chain),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok(spread)
}

fn ac2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let g_a = 10f64.powf(rng.gen_range(-1.0..1.0));
        let g_b = 10f64.powf(rng.gen_range(-1.0..1.0));
        let k = Complex64::from_polar(
            10f64.powf(rng.gen_range(-1.0..1.0)),
            rng.gen_range(0.0..6.3),
        );
        let sys = dimer_trimer_system(rng.gen_range(-2.0..2.0), g_a, g_b, k)
            .map_err(|e| e.to_string())?;
        worst = worst.max(three_routes(&sys)?);
    }
    for _ in 0..100 {
        let k = random_matrix(&mut rng, 3, 2);
        let sys = block_compose(
            &pt_dimer(1.0, 1.5).unwrap(),
            &pt_trimer(1.0, 1.3).unwrap(),
            &k,
            &ComposeOptions::default(),
        )
        .map_err(|e| e.to_string())?;
        worst = worst.max(three_routes(&sys)?);
    }
    ensure(worst <= 1e-8, || {
        format!("largest relative route spread {worst:e}")
    })?;
    Ok(format!("200 systems, largest relative spread {worst:.2e}"))
}

fn order_of(h: &ComplexMatrix) -> Option<usize> {
    let (_, n) = hiep::ep::traceless_part(h).unwrap();
    nilpotency_index(&n, default_nil_tol(h.rows())).unwrap()
}

fn ac3() -> Check {
    for k in [c(1.0, 0.0), c(0.2, -0.7), c(-3.0, 1.0)] {
        let sys = dimer_trimer_system(1.0, 1.5, 1.3, k).map_err(|e| e.to_string())?;
        ensure(order_of(&sys.h) == Some(5), || {
            format!("k={k}: order {:?}", order_of(&sys.h))
        })?;
    }
    let zero = dimer_trimer_system(1.0, 1.5, 1.3, c(0.0, 0.0)).map_err(|e| e.to_string())?;
    let o = order_of(&zero.h);
    ensure(matches!(o, Some(m) if m < 5), || {
        format!("k=0: order {o:?}")
    })?;

    let j = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
    let cases: [(&[&[f64]], usize); 4] = [
        (&[&[0.0, 0.0], &[1.0, 0.0]], 4),
        (&[&[1.0, 0.0], &[0.0, 0.0]], 3),
        (&[&[1.0, 0.0], &[0.0, -1.0]], 2),
        (&[&[0.0, 1.0], &[0.0, 0.0]], 2),
    ];
    for (rows, expected) in cases {
        let k = ComplexMatrix::from_real_rows(rows).unwrap();
        let sys =
            block_compose(&j, &j, &k, &ComposeOptions::default()).map_err(|e| e.to_string())?;
        let o = order_of(&sys.h);
        ensure(o == Some(expected), || {
            format!("2+2 with K={rows:?}: order {o:?}, expected {expected}")
        })?;
    }
    Ok("generic k -> 5, k=0 -> 3, 2+2 cases -> 4/3/2/2".into())
}

fn ac4() -> Check {
    let mut worst = 0.0f64;
    for k in [c(1.0, 0.0), c(0.0, 2.0), c(-0.4, 0.3)] {
        let sys = dimer_trimer_system(1.0, 1.5, 1.3, k).map_err(|e| e.to_string())?;
        let chain_a = jordan_chain(&sys.report_a, DEFAULT_CHAIN_TOL).map_err(|e| e.to_string())?;
        let chain_b = jordan_chain(&sys.report_b, DEFAULT_CHAIN_TOL).map_err(|e| e.to_string())?;
        let amp = coupling_amplitude(&chain_b, chain_a.eigenstate(), &sys.k)
            .map_err(|e| e.to_string())?;
        worst = worst.max(rel(amp.norm(), k.norm() / (2.0 * 2f64.sqrt())));
    }
    ensure(worst <= 1e-10, || format!("relative error {worst:e}"))?;
    Ok(format!(
        "|amp| = |k|/(2 sqrt 2), relative error {worst:.2e}"
    ))
}

fn ac5() -> Check {
    let out = reproduce_fig3(&Fig3Config::default()).map_err(|e| e.to_string())?;
    let (g, p) = (out.summary.generic.slope, out.summary.preserving.slope);
    ensure((g - 0.2).abs() <= 0.02, || format!("generic slope {g}"))?;
    ensure((p - 1.0 / 3.0).abs() <= 0.02, || {
        format!("preserving slope {p}")
    })?;
    Ok(format!("generic slope {g:.4}, preserving slope {p:.4}"))
}

fn ac6() -> Check {
    let sys = dimer_trimer_system(1.0, 1.5, 1.3, c(1.0, 0.0)).map_err(|e| e.to_string())?;
    let xi = composite_response(&sys).map_err(|e| e.to_string())?;
    let bound = machine_precision_bound(xi, 5, MACHINE_EPSILON);
    let mut measured = 0.0f64;
    for seed in 0..32 {
        let h1 = random_generic(5, seed).unwrap().matrix;
        measured = measured.max(
            hiep::perturb::max_splitting(&sys.h, sys.ep_eigenvalue, &h1, 0.0)
                .map_err(|e| e.to_string())?,
        );
    }
    ensure(measured <= 1.5e-3 * 1.5, || {
        format!("measured saturation {measured:e}")
    })?;
    ensure(rel(bound, 1.5e-3) <= 0.1, || format!("bound {bound:e}"))?;
    Ok(format!(
        "measured {measured:.3e} <= 2.25e-3, bound {bound:.3e}"
    ))
}

fn ac7() -> Check {
    let sys = dimer_trimer_system(1.0, 1.5, 1.3, c(1.0, 0.0)).map_err(|e| e.to_string())?;
    let xi = composite_response(&sys).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let trials = 1000;
    for trial in 0..trials {
        let h1 = random_generic(5, rng.gen()).unwrap().matrix;
        let eps = 10f64.powf(rng.gen_range(-12.0..-2.0));
        let budget = eps * h1.spectral_norm() * xi;
        let perturbed = sys.h.add(&h1.scale(c(eps, 0.0))).unwrap();
        for e in perturbed.eigenvalues().map_err(|e| e.to_string())? {
            let lhs = (e - sys.ep_eigenvalue).norm().powi(5);
            ensure(lhs <= budget * (1.0 + 1e-6) + 1e-12, || {
                format!("trial {trial}: |E-e|^5 = {lhs:e} > {budget:e} at eps {eps:e}")
            })?;
            worst = worst.max(lhs / budget);
        }
    }
    Ok(format!(
        "{trials} trials, eps in [1e-12, 1e-2], largest |E-e|^5 / bound = {worst:.3}"
    ))
}

fn ac8() -> Check {
    let sys = dimer_trimer_system(1.0, 1.5, 1.3, c(1.0, 0.0)).map_err(|e| e.to_string())?;
    let report = sys
        .ep_report(default_nil_tol(5))
        .map_err(|e| e.to_string())?;
    let top = report.top_power.clone().unwrap();
    let mut checked = 0;
    let mut structured = vec![random_preserving(2, 3, 0).unwrap().matrix];
    let mut ones = ComplexMatrix::zeros(5, 5);
    for r in 0..5 {
        for col in 0..5 {
            if !(r < 2 && col >= 2) {
                ones[(r, col)] = c(1.0 + r as f64, -(col as f64));
            }
        }
    }
    structured.push(ones);
    structured.extend((1..500).map(|s| random_preserving(2, 3, s).unwrap().matrix));
    for h1 in &structured {
        let tr = top.matmul(h1).unwrap().trace().unwrap();
        ensure(tr == c(0.0, 0.0), || format!("trace {tr}"))?;
        let p = predicted_splitting(&report, h1, 1e-3).map_err(|e| e.to_string())?;
        ensure(p.radicand == c(0.0, 0.0), || {
            format!("radicand {}", p.radicand)
        })?;
        checked += 1;
    }
    Ok(format!(
        "{checked} preserving perturbations, trace and radicand exactly 0"
    ))
}

fn chain_worst(h: &ComplexMatrix) -> std::result::Result<f64, String> {
    let report = detect_ep(h, default_nil_tol(h.rows())).map_err(|e| e.to_string())?;
    let chain = jordan_chain(&report, DEFAULT_CHAIN_TOL).map_err(|e| e.to_string())?;
    ensure(chain.residuals.normalization <= 1e-12, || {
        format!("normalization {:e}", chain.residuals.normalization)
    })?;
    Ok(chain.residuals.worst())
}

fn ac9() -> Check {
    let sys = dimer_trimer_system(1.0, 1.5, 1.3, c(1.0, 0.0)).map_err(|e| e.to_string())?;
    let mut worst = chain_worst(&pt_dimer(1.0, 1.5).unwrap())?
        .max(chain_worst(&pt_trimer(1.0, 1.3).unwrap())?)
        .max(chain_worst(&sys.h)?);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut count = 3;
    for n in 2..=8 {
        for _ in 0..10 {
            let h = similar_jordan(&mut rng, n)
                .shift_diagonal(c(rng.gen_range(-2.0..2.0), 0.5))
                .unwrap();
            worst = worst.max(chain_worst(&h)?);
            count += 1;
        }
    }
    ensure(worst <= 1e-10, || format!("worst residual {worst:e}"))?;
    Ok(format!("{count} chains, worst residual {worst:.2e}"))
}

fn ac10() -> Check {
    let sys = dimer_trimer_system(1.0, 1.5, 1.3, c(1.0, 0.0)).map_err(|e| e.to_string())?;
    let report = sys
        .ep_report(default_nil_tol(5))
        .map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..20 {
        let radius = 10f64.powf(-1.0 + 2.0 * i as f64 / 19.0);
        let e = report.ep_eigenvalue + Complex64::from_polar(radius, 0.7 + 1.3 * i as f64);
        let g = greens_function(&report, e).map_err(|e| e.to_string())?;
        let residual = sys
            .h
            .scale(c(-1.0, 0.0))
            .shift_diagonal(e)
            .unwrap()
            .matmul(&g)
            .unwrap()
            .sub(&ComplexMatrix::identity(5))
            .unwrap()
            .frobenius_norm();
        worst = worst.max(residual);
    }
    ensure(worst <= 1e-8, || format!("worst residual {worst:e}"))?;
    Ok(format!("20 energies, worst residual {worst:.2e}"))
}

fn ac11() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut rank_one = 0;
    for trial in 0..1000 {
        let n = rng.gen_range(1..=8);
        let r = rng.gen_range(0..=n);
        let a = if r == 0 {
            ComplexMatrix::zeros(n, n)
        } else {
            random_matrix(&mut rng, n, r)
                .matmul(&random_matrix(&mut rng, r, n))
                .unwrap()
        };
        let rank = a.rank(1e-12).map_err(|e| e.to_string())?;
        ensure(rank == r, || {
            format!("trial {trial}: rank {rank}, constructed {r}")
        })?;
        let s = a.spectral_norm();
        let f = a.frobenius_norm();
        let slack = 1e-10 * f.max(1.0);
        ensure(s <= f + slack, || {
            format!("trial {trial}: spectral {s} > Frobenius {f}")
        })?;
        ensure(f <= (rank as f64).sqrt() * s + slack, || {
            format!("trial {trial}: Frobenius {f} > sqrt({rank}) * {s}")
        })?;
        if rank == 1 {
            ensure((s - f).abs() <= 1e-10 * f, || {
                format!("trial {trial}: rank one but {s} != {f}")
            })?;
            rank_one += 1;
        }
    }
    Ok(format!("1000 matrices ({rank_one} of rank one)"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "AC1",
            "closed-form response strengths",
            ac1,
            Some(Duration::from_secs(1)),
        ),
        (
            "AC2",
            "route equivalence",
            ac2,
            Some(Duration::from_secs(10)),
        ),
        ("AC3", "order detection", ac3, None),
        ("AC4", "coupling amplitude", ac4, None),
        (
            "AC5",
            "scaling-law slopes",
            ac5,
            Some(Duration::from_secs(60)),
        ),
        ("AC6", "saturation bound", ac6, None),
        ("AC7", "spectral response bound", ac7, None),
        ("AC8", "preserving-perturbation nullity", ac8, None),
        ("AC9", "Jordan-chain conditions", ac9, None),
        ("AC10", "Green's-function identity", ac10, None),
        ("AC11", "norm inequalities", ac11, None),
    ];
    let mut failures = 0;
    for (id, name, check, limit) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(detail), Some(limit)) if elapsed > limit => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit:.0?}"))
            }
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {id} {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {id} {name}: {detail} [{elapsed:.2?}]");
            }
        }
    }
    println!("{} of {} criteria passed", 11 - failures, 11);
    if failures > 0 {
        std::process::exit(1);
    }
}
