use proptest::prelude::*;
use spinsep::criteria::{cartesian_identity_check, class1_p, class1_words, class2_p, class2_words};
use spinsep::momentmat::{build_moment_matrix, moment, scan_principal_minors, MinorScan};
use spinsep::qstate::{
    density_from_pure, hermitian_deviation, min_eigenvalue, mix, partial_transpose,
    partial_transpose_raw, Bipartition, DensityMatrix,
};
use spinsep::spinops::{
    collective_ladder, graded_words, normal_order_coefficients, word_matrix, Ladder,
};
use spinsep::states::{ghz, random_product, random_pure, random_separable, w, werner};
use spinsep::{CMatrix, CVector, C64};

/// Every nonempty proper subset A, both orientations of each split.
fn every_orientation(n: usize) -> Vec<Bipartition> {
    (1..(1usize << n) - 1)
        .map(|bits| {
            let a: Vec<usize> = (1..=n).filter(|q| bits >> (q - 1) & 1 == 1).collect();
            Bipartition::new(n, a).unwrap()
        })
        .collect()
}

/// Entangled mixed state: mixture of a few random pure states.
fn random_mixed(n: usize, seed: u64) -> DensityMatrix {
    let rhos: Vec<DensityMatrix> = (0..3)
        .map(|k| density_from_pure(&random_pure(n, seed * 7 + k).unwrap()).unwrap())
        .collect();
    mix(&[(0.5, &rhos[0]), (0.3, &rhos[1]), (0.2, &rhos[2])]).unwrap()
}

fn pow(m: &CMatrix, k: usize) -> CMatrix {
    (0..k).fold(CMatrix::identity(m.nrows(), m.ncols()), |acc, _| acc * m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn moment_matrix_is_hermitian(n in 2usize..=4, seed in 0u64..10_000, pick in 0usize..14) {
        let rho = random_mixed(n, seed);
        let parts = every_orientation(n);
        let part = &parts[pick % parts.len()];
        let words = graded_words(2);
        for a in &words {
            for b in &words {
                let x = moment(&rho, part, a, b).unwrap();
                let y = moment(&rho, part, b, a).unwrap();
                prop_assert!((x - y.conj()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_transpose_is_trace_preserving_involution(n in 2usize..=4, seed in 0u64..10_000, pick in 0usize..14) {
        let rho = random_mixed(n, seed);
        let parts = every_orientation(n);
        let part = &parts[pick % parts.len()];
        let pt = partial_transpose(&rho, part).unwrap();
        prop_assert!(hermitian_deviation(&pt) < 1e-12);
        prop_assert!((pt.trace() - rho.entries().trace()).norm() < 1e-12);
        let back = partial_transpose_raw(&pt, part.b_mask());
        prop_assert!((&back - rho.entries()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn product_states_stay_ppt(na in 1usize..=2, nb in 1usize..=2, s1 in 0u64..1000, s2 in 0u64..1000) {
        let ra = random_separable(na, 3, s1).unwrap();
        let rb = random_separable(nb, 2, s2).unwrap();
        let rho = ra.kron(&rb).unwrap();
        let part = Bipartition::leading(na + nb, na).unwrap();
        let lo = min_eigenvalue(&partial_transpose(&rho, &part).unwrap()).unwrap();
        prop_assert!(lo >= -1e-10);
    }

    #[test]
    fn cartesian_identity_on_random_pure(seed in 0u64..100_000) {
        let rho = density_from_pure(&random_pure(2, seed).unwrap()).unwrap();
        let chk = cartesian_identity_check(&rho).unwrap();
        prop_assert!(chk.max_deviation() < 1e-10);
    }

    #[test]
    fn positive_criteria_imply_npt(n in 2usize..=4, seed in 0u64..10_000) {
        let psi = random_pure(n, seed).unwrap();
        let rho = density_from_pure(&psi).unwrap();
        for part in every_orientation(n) {
            let p1 = class1_p(&rho, &part).unwrap();
            let p2 = class2_p(&rho, &part).unwrap();
            if p1 > 1e-8 || p2 > 1e-8 {
                let lo = min_eigenvalue(&partial_transpose(&rho, &part).unwrap()).unwrap();
                prop_assert!(lo < -1e-9, "P_I={p1} P_II={p2} but PPT min eig {lo}");
            }
        }
    }
}

#[test]
fn word_adjoint_symmetry() {
    for n in 2..=5 {
        for part in every_orientation(n) {
            for word in graded_words(4) {
                let m = word_matrix(&word, &part).unwrap();
                let adj = word_matrix(&word.adjoint(), &part).unwrap();
                let err = (m.adjoint() - adj)
                    .iter()
                    .fold(0.0f64, |s, z| s.max(z.norm()));
                assert!(err < 1e-12, "n={n} {part} {word}");
            }
        }
    }
}

#[test]
fn a_and_b_factors_commute() {
    for n in 2..=4 {
        for part in every_orientation(n) {
            let b = part.b_indices();
            for la in [Ladder::Raise, Ladder::Lower] {
                for lb in [Ladder::Raise, Ladder::Lower] {
                    let x = collective_ladder(n, part.a_indices(), la).unwrap().matrix;
                    let y = collective_ladder(n, &b, lb).unwrap().matrix;
                    let err = (&x * &y - &y * &x)
                        .iter()
                        .fold(0.0f64, |s, z| s.max(z.norm()));
                    assert!(err < 1e-12);
                }
            }
        }
    }
}

/// Applies both sides of the reordering identity to every S_z eigenstate of
/// the collective spin on `support`.
fn reordering_error(
    n: usize,
    support: &[usize],
    j: usize,
    k: usize,
    coeffs: impl Fn(f64) -> Vec<(usize, f64)>,
) -> f64 {
    let sp = collective_ladder(n, support, Ladder::Raise).unwrap().matrix;
    let sm = collective_ladder(n, support, Ladder::Lower).unwrap().matrix;
    let mask: usize = support.iter().map(|&q| 1usize << (n - q)).sum();
    let mut worst = 0.0f64;
    for idx in 0..1usize << n {
        let up = (idx & mask).count_ones() as f64;
        let m = 0.5 * (up - (support.len() as f64 - up));
        let mut e = CVector::zeros(1 << n);
        e[idx] = C64::new(1.0, 0.0);
        let lhs = pow(&sm, j) * pow(&sp, k) * &e;
        let mut rhs = CVector::zeros(1 << n);
        for (r, c) in coeffs(m) {
            rhs += (pow(&sp, k - r) * pow(&sm, j - r) * &e) * C64::new(c, 0.0);
        }
        worst = worst.max((lhs - rhs).norm());
    }
    worst
}

#[test]
fn reordering_identity_on_eigenstates() {
    for n in 1..=4 {
        let supports: Vec<Vec<usize>> = vec![(1..=n).collect(), vec![1], (2..=n).collect()];
        for support in supports.into_iter().filter(|s| !s.is_empty()) {
            for j in 0..=3 {
                for k in 0..=3 {
                    let err = reordering_error(n, &support, j, k, |m| {
                        normal_order_coefficients(j as i64, k as i64, m).unwrap()
                    });
                    assert!(err < 1e-10, "n={n} support={support:?} j={j} k={k}: {err}");
                }
            }
        }
    }
}

#[test]
fn constant_m_reordering_fails_beyond_first_order() {
    // c_r = j! k! (−2m)^r / (r! (j−r)! (k−r)!) is exact for j = k = 1 only.
    let fact = |x: usize| (1..=x).product::<usize>() as f64;
    let constant_m = |j: usize, k: usize| {
        move |m: f64| {
            (0..=j.min(k))
                .map(|r| {
                    let c = fact(j) * fact(k) * (-2.0 * m).powi(r as i32)
                        / (fact(r) * fact(j - r) * fact(k - r));
                    (r, c)
                })
                .collect::<Vec<_>>()
        }
    };
    assert!(reordering_error(2, &[1, 2], 1, 1, constant_m(1, 1)) < 1e-12);
    assert!(reordering_error(2, &[1, 2], 2, 1, constant_m(2, 1)) > 0.1);
    assert!(reordering_error(2, &[1, 2], 1, 2, constant_m(1, 2)) > 0.1);
}

#[test]
fn separable_states_have_no_certificates() {
    for seed in 0..200u64 {
        let n = 2 + (seed % 3) as usize;
        let terms = 1 + (seed % 8) as usize;
        let rho = random_separable(n, terms, seed).unwrap();
        for part in every_orientation(n) {
            let p1 = class1_p(&rho, &part).unwrap();
            let p2 = class2_p(&rho, &part).unwrap();
            assert!(p1 <= 1e-8 && p2 <= 1e-8, "seed {seed} {part}: {p1} {p2}");
            let mm = build_moment_matrix(&rho, &part, 2).unwrap();
            let certs = scan_principal_minors(&mm, &MinorScan::with_order(3)).unwrap();
            if let Some(c) = certs.first() {
                assert!(c.determinant >= -1e-8, "seed {seed} {part}: {:?}", c);
            }
        }
    }
}

#[test]
fn certificates_are_sound_against_ppt() {
    let mut states: Vec<DensityMatrix> = Vec::new();
    for n in 2..=4 {
        for theta in [0.3, std::f64::consts::FRAC_PI_4, 1.2] {
            states.push(density_from_pure(&ghz(n, theta).unwrap()).unwrap());
        }
        states.push(density_from_pure(&w(n).unwrap()).unwrap());
        for p in [0.2, 0.5, 0.9] {
            states.push(werner(n, p).unwrap());
        }
        for seed in 0..4 {
            states.push(random_mixed(n, seed));
        }
    }
    states.push(density_from_pure(&spinsep::states::example3()).unwrap());
    let mut certified = 0;
    for rho in &states {
        for part in every_orientation(rho.n_qubits()) {
            let mm = build_moment_matrix(rho, &part, 2).unwrap();
            let certs = scan_principal_minors(&mm, &MinorScan::default()).unwrap();
            if !certs.is_empty() {
                certified += 1;
                let lo = min_eigenvalue(&partial_transpose(rho, &part).unwrap()).unwrap();
                assert!(
                    lo < -1e-9,
                    "{part}: certificate {:?} but PPT min eig {lo}",
                    certs[0]
                );
            }
        }
    }
    assert!(certified > 10);
}

#[test]
fn product_moment_matrices_are_psd() {
    for seed in 0..20 {
        let a = density_from_pure(&random_product(2, seed).unwrap()).unwrap();
        let b = random_separable(2, 3, seed + 100).unwrap();
        let rho = a.kron(&b).unwrap();
        let part = Bipartition::leading(4, 2).unwrap();
        let mm = build_moment_matrix(&rho, &part, 2).unwrap();
        let lo = min_eigenvalue(&mm.entries).unwrap();
        let scale = mm.entries.iter().fold(1.0f64, |s, z| s.max(z.norm()));
        assert!(lo >= -1e-9 * scale, "seed {seed}: {lo}");
    }
}

#[test]
fn bell_moment_matrix_certifies() {
    let bell = density_from_pure(&ghz(2, std::f64::consts::FRAC_PI_4).unwrap()).unwrap();
    let part = Bipartition::new(2, vec![1]).unwrap();
    let mm = build_moment_matrix(&bell, &part, 2).unwrap();
    let certs = scan_principal_minors(&mm, &MinorScan::with_order(2)).unwrap();
    assert!(!certs.is_empty());
    assert!(class1_p(&bell, &part).unwrap() > 0.0);
}

#[test]
fn criteria_are_principal_minors() {
    let mut states = vec![
        density_from_pure(&ghz(3, 0.4).unwrap()).unwrap(),
        density_from_pure(&w(4).unwrap()).unwrap(),
        density_from_pure(&spinsep::states::example3()).unwrap(),
        werner(4, 0.6).unwrap(),
    ];
    for n in 2..=5 {
        states.push(random_mixed(n, n as u64));
        states.push(density_from_pure(&random_pure(n, 40 + n as u64).unwrap()).unwrap());
    }
    for rho in &states {
        for part in every_orientation(rho.n_qubits()) {
            let degree = part.n_a().max(part.n_b()).max(2) as u32;
            let mm = build_moment_matrix(rho, &part, degree).unwrap();
            let idx = |ws: [spinsep::spinops::OperatorWord; 2]| -> Vec<usize> {
                ws.iter().map(|w| mm.index_of(w).unwrap()).collect()
            };
            let d1 = mm.principal_minor(&idx(class1_words(&part))).unwrap();
            let d2 = mm.principal_minor(&idx(class2_words())).unwrap();
            let p1 = class1_p(rho, &part).unwrap();
            let p2 = class2_p(rho, &part).unwrap();
            assert!((p1 + d1).abs() < 1e-9, "{part}: P_I {p1} vs minor {d1}");
            assert!((p2 + d2).abs() < 1e-9, "{part}: P_II {p2} vs minor {d2}");
        }
    }
}

#[test]
fn werner_ppt_threshold_brackets() {
    for n in 2..=5 {
        let t = 1.0 / (2f64.powi(n as i32 - 1) + 1.0);
        for part in every_orientation(n) {
            let above =
                min_eigenvalue(&partial_transpose(&werner(n, t + 1e-4).unwrap(), &part).unwrap())
                    .unwrap();
            let below =
                min_eigenvalue(&partial_transpose(&werner(n, t - 1e-4).unwrap(), &part).unwrap())
                    .unwrap();
            assert!(above < 0.0 && below > 0.0, "n={n} {part}: {below} {above}");
        }
    }
}

#[test]
fn factory_outputs_are_density_matrices() {
    let mut states = vec![werner(3, 0.37).unwrap(), random_separable(3, 5, 9).unwrap()];
    for n in 2..=4 {
        states.push(density_from_pure(&ghz(n, 0.9).unwrap()).unwrap());
        states.push(density_from_pure(&w(n).unwrap()).unwrap());
    }
    for rho in states {
        assert!(DensityMatrix::new(rho.n_qubits(), rho.entries().clone()).is_ok());
    }
}

#[test]
fn class_one_closed_form_holds_for_odd_sizes() {
    use spinsep::wernerscan::{class1_closed_form, pmin_class1};
    for n in [4, 5, 6, 7, 8, 9] {
        for n_a in 2..=n / 2 {
            let got = pmin_class1(n, n_a, 1e-10).unwrap();
            assert!(
                (got - class1_closed_form(n)).abs() < 1e-7,
                "n={n} n_a={n_a}: {got}"
            );
        }
    }
}

#[test]
fn thresholds_never_beat_ppt() {
    use spinsep::wernerscan::{pmin_class1, pmin_ppt, ppt_closed_form};
    for n in 2..=7 {
        for n_a in 1..n {
            let c1 = pmin_class1(n, n_a, 1e-9).unwrap();
            let ppt = pmin_ppt(n, n_a, 1e-9).unwrap();
            assert!(c1 > 0.0 && c1 <= 1.0);
            assert!(ppt <= c1 + 1e-6, "n={n} n_a={n_a}");
            assert!((ppt - ppt_closed_form(n)).abs() < 1e-6);
        }
    }
}

#[test]
fn detection_strength_varies_with_split_size() {
    for n in 3..=8 {
        let g = ghz(n, std::f64::consts::FRAC_PI_4).unwrap();
        let wn = w(n).unwrap();
        let p1: Vec<f64> = (1..n)
            .map(|k| class1_p(&g, &Bipartition::leading(n, k).unwrap()).unwrap())
            .collect();
        let p2: Vec<f64> = (1..n)
            .map(|k| class2_p(&wn, &Bipartition::leading(n, k).unwrap()).unwrap())
            .collect();
        let half = n / 2 - 1;
        let (max1, min1) = (
            p1.iter().cloned().fold(f64::MIN, f64::max),
            p1.iter().cloned().fold(f64::MAX, f64::min),
        );
        let (max2, min2) = (
            p2.iter().cloned().fold(f64::MIN, f64::max),
            p2.iter().cloned().fold(f64::MAX, f64::min),
        );
        assert_eq!(p1[0], max1);
        assert_eq!(p1[half], min1);
        assert_eq!(p2[half], max2);
        assert_eq!(p2[0], min2);
    }
}

#[test]
fn ghz_and_w_are_detected_by_one_class_only() {
    for n in 2..=7 {
        for part in Bipartition::all(n).unwrap() {
            for theta in [0.2, 0.7, 1.3] {
                let g = ghz(n, theta).unwrap();
                assert!(class1_p(&g, &part).unwrap() > 1e-8);
                assert!(class2_p(&g, &part).unwrap() < 1e-8);
            }
            let wn = w(n).unwrap();
            assert!(class2_p(&wn, &part).unwrap() > 1e-8);
            if n > 2 {
                assert!(class1_p(&wn, &part).unwrap() < 1e-8);
            }
        }
    }
}

#[test]
fn aggregate_summaries_and_round_trip() {
    use spinsep::criteria::{
        analyze, AggregateReport, AnalyzeOptions, PartitionSelection, Summary,
    };
    let opts = AnalyzeOptions::default();
    let cases = [
        (
            density_from_pure(&ghz(4, 0.5).unwrap()).unwrap(),
            Summary::FullyInseparableClassI,
        ),
        (
            density_from_pure(&w(4).unwrap()).unwrap(),
            Summary::FullyInseparableClassII,
        ),
        (
            density_from_pure(&spinsep::states::example3()).unwrap(),
            Summary::PartiallySeparable,
        ),
        (random_separable(3, 4, 5).unwrap(), Summary::Undetected),
    ];
    for (rho, want) in cases {
        let rep = analyze(&rho, &PartitionSelection::All, &opts).unwrap();
        assert_eq!(rep.summary, want);
        let text = serde_json::to_string(&rep).unwrap();
        let back: AggregateReport = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        let sym = analyze(
            &rho,
            &PartitionSelection::All,
            &AnalyzeOptions {
                symmetric: true,
                ..opts
            },
        )
        .unwrap();
        assert!(sym.reports.len() <= rep.reports.len());
    }
}
