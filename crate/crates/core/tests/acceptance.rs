//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::FRAC_PI_4;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use spinsep::criteria::{cartesian_identity_check, class1_p, class2_p};
use spinsep::momentmat::{build_moment_matrix, scan_principal_minors, MinorScan};
use spinsep::qstate::{
    density_from_pure, min_eigenvalue, mix, partial_transpose, Bipartition, DensityMatrix,
};
use spinsep::spinops::{collective_ladder, normal_order_coefficients, Ladder};
use spinsep::states::{example3, ghz, random_pure, random_separable, w, werner};
use spinsep::wernerscan::{pmin_class1, pmin_ppt};
use spinsep::{CMatrix, CVector, C64};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn close(got: f64, want: f64, tol: f64, what: &str) -> Result<(), String> {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, want {want} ± {tol}"))
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn part(n: usize, a: &[usize]) -> Result<Bipartition, String> {
    Bipartition::new(n, a.to_vec()).map_err(e)
}

fn every_orientation(n: usize) -> Vec<Bipartition> {
    (1..(1usize << n) - 1)
        .map(|bits| {
            let a: Vec<usize> = (1..=n).filter(|q| bits >> (q - 1) & 1 == 1).collect();
            Bipartition::new(n, a).unwrap()
        })
        .collect()
}

fn factorial(x: usize) -> f64 {
    (1..=x).map(|k| k as f64).product()
}

fn ghz3_class_one() -> Outcome {
    let psi = ghz(3, FRAC_PI_4).map_err(e)?;
    let ab = part(3, &[1, 2])?;
    let p1 = class1_p(&psi, &ab).map_err(e)?;
    let p2 = class2_p(&psi, &ab).map_err(e)?;
    close(p1, 1.0, 1e-9, "P_I")?;
    ensure(p2 < 1e-8, || format!("P_II = {p2}"))?;
    Ok(format!("P_I = {p1:.12}, P_II = {p2:.3e}"))
}

fn w3_class_two() -> Outcome {
    let psi = w(3).map_err(e)?;
    let ab = part(3, &[1, 2])?;
    let p1 = class1_p(&psi, &ab).map_err(e)?;
    let p2 = class2_p(&psi, &ab).map_err(e)?;
    close(p2, 4.0 / 9.0, 1e-9, "P_II")?;
    ensure(p1 < 1e-8, || format!("P_I = {p1}"))?;
    Ok(format!("P_II = {p2:.12}, P_I = {p1:.3e}"))
}

fn closed_form_sweeps() -> Outcome {
    let thetas = [0.0, 0.3, FRAC_PI_4, 1.1, std::f64::consts::FRAC_PI_2];
    let mut checked = 0;
    let mut worst = 0.0f64;
    for n in 2..=8 {
        let wn = w(n).map_err(e)?;
        for n_a in 1..n {
            let ab = Bipartition::leading(n, n_a).map_err(e)?;
            let n_b = n - n_a;
            for &theta in &thetas {
                let psi = ghz(n, theta).map_err(e)?;
                let got = class1_p(&psi, &ab).map_err(e)?;
                let (s, c) = theta.sin_cos();
                let want = (s * c).powi(2) * (factorial(n_a) * factorial(n_b)).powi(2);
                // relative, with an absolute floor where the expectation vanishes
                let err = (got - want).abs() / want.abs().max(1.0);
                worst = worst.max(err);
                ensure(err <= 1e-9, || {
                    format!("P_I N={n} n_A={n_a} θ={theta}: {got} vs {want}")
                })?;
                checked += 1;
            }
            let got = class2_p(&wn, &ab).map_err(e)?;
            let want = ((n_a * n_b) as f64 / n as f64).powi(2);
            let err = (got - want).abs() / want;
            worst = worst.max(err);
            ensure(err <= 1e-9, || {
                format!("P_II N={n} n_A={n_a}: {got} vs {want}")
            })?;
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} values, worst relative error {worst:.2e}"
    ))
}

fn example3_table() -> Outcome {
    let psi = example3();
    let big = part(3, &[1, 2])?;
    // the split written (1,23) has the two-spin group {2,3} as A
    let small = part(3, &[2, 3])?;
    let rows = [
        ("P_I|(12,3)", class1_p(&psi, &big).map_err(e)?, -0.5),
        ("P_II|(12,3)", class2_p(&psi, &big).map_err(e)?, 0.25),
        ("P_I|(1,23)", class1_p(&psi, &small).map_err(e)?, 0.0),
        ("P_II|(1,23)", class2_p(&psi, &small).map_err(e)?, 0.0),
    ];
    for (name, got, want) in rows {
        close(got, want, 1e-9, name)?;
    }
    Ok(rows
        .iter()
        .map(|(n, g, _)| format!("{n} = {g:.6}"))
        .collect::<Vec<_>>()
        .join(", "))
}

fn werner_thresholds() -> Outcome {
    let tol = 1e-8;
    let a = pmin_class1(4, 1, tol).map_err(e)?;
    let b = pmin_class1(4, 2, tol).map_err(e)?;
    close(a, 0.4472, 1e-3, "p_min(4,1)")?;
    close(b, 0.3333, 1e-3, "p_min(4,2)")?;
    let tail = pmin_class1(10, 1, tol).map_err(e)?;
    close(tail, 1.0 / 3.0, 2e-2, "p_min(10,1)")?;
    let mut series = Vec::new();
    for n in [4, 6, 8] {
        let got = pmin_class1(n, n / 2, tol).map_err(e)?;
        let want = 1.0 / (2f64.powi((n as i32 - 2) / 2) + 1.0);
        close(got, want, 1e-4, &format!("p_min({n},{})", n / 2))?;
        series.push(format!("{got:.4}"));
    }
    Ok(format!(
        "(4,1) = {a:.4}, (4,2) = {b:.4}, (10,1) = {tail:.4}, N/2 series {}",
        series.join(" ")
    ))
}

fn ppt_thresholds() -> Outcome {
    let mut vals = Vec::new();
    for n in 2..=5 {
        let got = pmin_ppt(n, 1, 1e-9).map_err(e)?;
        let want = 1.0 / (2f64.powi(n as i32 - 1) + 1.0);
        close(got, want, 1e-5, &format!("PPT p_min({n},1)"))?;
        vals.push(format!("{got:.6}"));
    }
    Ok(vals.join(" "))
}

fn random_mixed(n: usize, seed: u64) -> Result<DensityMatrix, String> {
    let rhos: Vec<DensityMatrix> = (0..3)
        .map(|k| density_from_pure(&random_pure(n, seed * 7 + k)?))
        .collect::<spinsep::Result<_>>()
        .map_err(e)?;
    mix(&[(0.5, &rhos[0]), (0.3, &rhos[1]), (0.2, &rhos[2])]).map_err(e)
}

fn property_suite() -> Outcome {
    let scan = MinorScan::with_order(3);
    let mut worst_minor = f64::INFINITY;
    let mut worst_p = f64::NEG_INFINITY;
    for seed in 0..200u64 {
        let n = 2 + (seed % 3) as usize;
        let rho = random_separable(n, 1 + (seed % 8) as usize, seed).map_err(e)?;
        for ab in every_orientation(n) {
            let p = class1_p(&rho, &ab)
                .map_err(e)?
                .max(class2_p(&rho, &ab).map_err(e)?);
            worst_p = worst_p.max(p);
            ensure(p <= 1e-8, || format!("separable seed {seed} {ab}: P = {p}"))?;
            let mm = build_moment_matrix(&rho, &ab, 2).map_err(e)?;
            if let Some(c) = scan_principal_minors(&mm, &scan).map_err(e)?.first() {
                worst_minor = worst_minor.min(c.determinant);
                ensure(c.determinant >= -1e-8, || {
                    format!("separable seed {seed} {ab}: minor {}", c.determinant)
                })?;
            }
        }
    }

    let mut states: Vec<DensityMatrix> = vec![density_from_pure(&example3()).map_err(e)?];
    for n in 2..=4 {
        for theta in [0.3, FRAC_PI_4, 1.2] {
            states.push(density_from_pure(&ghz(n, theta).map_err(e)?).map_err(e)?);
        }
        states.push(density_from_pure(&w(n).map_err(e)?).map_err(e)?);
        for p in [0.2, 0.35, 0.5, 0.9] {
            states.push(werner(n, p).map_err(e)?);
        }
        for seed in 0..10 {
            states.push(random_mixed(n, seed)?);
            states.push(density_from_pure(&random_pure(n, 1000 + seed).map_err(e)?).map_err(e)?);
        }
    }
    let mut positives = 0;
    for rho in &states {
        for ab in every_orientation(rho.n_qubits()) {
            let p = class1_p(rho, &ab)
                .map_err(e)?
                .max(class2_p(rho, &ab).map_err(e)?);
            if p > 1e-8 {
                positives += 1;
                let lo = min_eigenvalue(&partial_transpose(rho, &ab).map_err(e)?).map_err(e)?;
                ensure(lo < -1e-9, || {
                    format!("{ab}: P = {p} with PPT min eigenvalue {lo}")
                })?;
            }
        }
    }
    Ok(format!(
        "max separable P {worst_p:.2e}, lowest separable minor {}, {positives} detections all NPT",
        if worst_minor.is_finite() {
            format!("{worst_minor:.2e}")
        } else {
            "none negative".into()
        }
    ))
}

fn reordering_identity() -> Outcome {
    let pow = |m: &CMatrix, k: usize| {
        (0..k).fold(CMatrix::identity(m.nrows(), m.ncols()), |acc, _| acc * m)
    };
    let mut worst = 0.0f64;
    let mut cases = 0;
    for n in 1..=4usize {
        let support: Vec<usize> = (1..=n).collect();
        let sp = collective_ladder(n, &support, Ladder::Raise)
            .map_err(e)?
            .matrix;
        let sm = collective_ladder(n, &support, Ladder::Lower)
            .map_err(e)?
            .matrix;
        for j in 0..=3usize {
            for k in 0..=3usize {
                for idx in 0..1usize << n {
                    let up = idx.count_ones() as f64;
                    let m = up - n as f64 / 2.0;
                    let mut v = CVector::zeros(1 << n);
                    v[idx] = C64::new(1.0, 0.0);
                    let lhs = pow(&sm, j) * pow(&sp, k) * &v;
                    let mut rhs = CVector::zeros(1 << n);
                    for (r, c) in normal_order_coefficients(j as i64, k as i64, m).map_err(e)? {
                        rhs += (pow(&sp, k - r) * pow(&sm, j - r) * &v) * C64::new(c, 0.0);
                    }
                    worst = worst.max((lhs - rhs).norm());
                    cases += 1;
                }
            }
        }
    }
    ensure(worst <= 1e-10, || format!("worst deviation {worst}"))?;
    Ok(format!(
        "{cases} eigenstate cases, worst deviation {worst:.2e}"
    ))
}

fn cartesian_identity() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let rho = if seed % 2 == 0 {
            random_mixed(2, seed)?
        } else {
            density_from_pure(&random_pure(2, seed).map_err(e)?).map_err(e)?
        };
        let chk = cartesian_identity_check(&rho).map_err(e)?;
        worst = worst.max(chk.max_deviation());
    }
    ensure(worst <= 1e-10, || format!("worst deviation {worst}"))?;
    Ok(format!("100 states, worst deviation {worst:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("GHZ3 Class I", ghz3_class_one, Duration::from_secs(1)),
        ("W3 Class II", w3_class_two, Duration::from_secs(1)),
        (
            "closed-form sweeps",
            closed_form_sweeps,
            Duration::from_secs(60),
        ),
        ("example 3 table", example3_table, Duration::from_secs(1)),
        (
            "Werner Class I thresholds",
            werner_thresholds,
            Duration::from_secs(300),
        ),
        (
            "Werner PPT thresholds",
            ppt_thresholds,
            Duration::from_secs(60),
        ),
        (
            "separable / soundness properties",
            property_suite,
            Duration::from_secs(300),
        ),
        (
            "reordering identity",
            reordering_identity,
            Duration::from_secs(60),
        ),
        (
            "Cartesian identities",
            cartesian_identity,
            Duration::from_secs(60),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > *budget => Err(format!("{msg}; took {took:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS {} {name}: {msg} [{took:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg} [{took:.2?}]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
