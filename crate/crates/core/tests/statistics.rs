use dispatch_core::stats::special::student_t_two_tailed;
use dispatch_core::stats::{wasserstein_1d, welch_t_test};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

// (a, b, t, p, df) from scipy.stats.ttest_ind(a, b, equal_var=False)
#[allow(clippy::type_complexity)]
fn welch_references() -> Vec<(Vec<f64>, Vec<f64>, f64, f64, f64)> {
    vec![
        (
            vec![1.0, 2.0, 3.0, 4.0, 5.0],
            vec![2.0, 3.0, 4.0, 5.0, 6.0],
            -1.0,
            0.34659350708733416,
            8.0,
        ),
        (
            vec![396.0, 410.5, 388.2, 402.9, 420.1, 377.4],
            vec![205.4, 199.0, 230.7, 188.3, 214.2],
            20.101681397530626,
            1.843713273225834e-08,
            8.494767764377013,
        ),
        (
            vec![10.0, 12.0, 9.5, 11.2, 10.8, 13.1, 9.9, 10.4],
            vec![20.0, 18.5, 22.1, 19.7],
            -10.694645738060874,
            0.00011944227791463058,
            5.029876453551583,
        ),
        (
            vec![0.5, 1.5, 2.5],
            vec![0.4, 1.6, 2.4, 3.9, 0.1, 2.2, 5.5],
            -0.8669935711116858,
            0.4137984256894083,
            7.228151622763915,
        ),
        (
            vec![
                100.0, 101.0, 99.0, 100.5, 98.5, 101.5, 100.2, 99.8, 100.1, 99.9,
            ],
            vec![
                100.3, 100.9, 99.2, 100.4, 98.8, 101.2, 100.0, 99.7, 100.6, 99.5,
            ],
            -0.027307730683981974,
            0.9785198887166533,
            17.696328292267083,
        ),
    ]
}

#[test]
fn welch_matches_references() {
    for (a, b, t, p, df) in welch_references() {
        let r = welch_t_test(&a, &b).unwrap();
        assert!((r.t - t).abs() < 1e-9, "t {} vs {t}", r.t);
        assert!((r.p - p).abs() < 1e-12, "p {} vs {p}", r.p);
        assert!((r.df - df).abs() < 1e-9);
        // swapping samples flips t only
        let s = welch_t_test(&b, &a).unwrap();
        assert!((s.t + r.t).abs() < 1e-12 && (s.p - r.p).abs() < 1e-15);
    }
}

/// ∫₀¹ |F_a⁻¹(u) − F_b⁻¹(u)| du over the merged quantile breakpoints.
fn quantile_w1(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let mut cuts: Vec<(usize, usize)> = Vec::new();
    for i in 1..=na {
        cuts.push((i * nb, na * nb));
    }
    for j in 1..=nb {
        cuts.push((j * na, na * nb));
    }
    let mut us: Vec<f64> = cuts.iter().map(|&(n, d)| n as f64 / d as f64).collect();
    us.sort_by(f64::total_cmp);
    us.dedup();
    let q = |xs: &[f64], u: f64| xs[((u * xs.len() as f64).ceil() as usize).clamp(1, xs.len()) - 1];
    let mut prev = 0.0;
    let mut total = 0.0;
    for &u in &us {
        let mid = (prev + u) / 2.0;
        total += (u - prev) * (q(&a, mid) - q(&b, mid)).abs();
        prev = u;
    }
    total
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1000.0f64..1000.0, 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn p_value_matches_students_t(t in -50.0f64..50.0, df in 1.0f64..200.0) {
        let dist = StudentsT::new(0.0, 1.0, df).unwrap();
        let oracle = 2.0 * dist.cdf(-t.abs());
        prop_assert!((student_t_two_tailed(t, df) - oracle).abs() < 1e-9);
    }

    #[test]
    fn p_value_decreases_in_abs_t(t1 in 0.0f64..40.0, dt in 0.0f64..10.0, df in 1.0f64..500.0) {
        let p1 = student_t_two_tailed(t1, df);
        let p2 = student_t_two_tailed(-(t1 + dt), df);
        prop_assert!((0.0..=1.0).contains(&p1));
        prop_assert!(p2 <= p1 + 1e-15);
    }

    #[test]
    fn w1_metric_axioms(a in sample(), b in sample(), c in sample()) {
        let ab = wasserstein_1d(&a, &b).unwrap();
        let ba = wasserstein_1d(&b, &a).unwrap();
        let bc = wasserstein_1d(&b, &c).unwrap();
        let ac = wasserstein_1d(&a, &c).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab));
        prop_assert_eq!(wasserstein_1d(&a, &a).unwrap(), 0.0);
        prop_assert!(ab >= 0.0);
        prop_assert!(ac <= ab + bc + 1e-9 * (1.0 + ab + bc));
    }

    #[test]
    fn w1_matches_quantile_integral(a in sample(), b in sample()) {
        let w = wasserstein_1d(&a, &b).unwrap();
        let q = quantile_w1(&a, &b);
        prop_assert!((w - q).abs() <= 1e-9 * (1.0 + q), "{} vs {}", w, q);
    }

    #[test]
    fn w1_translation(a in sample(), b in sample(), shift in -500.0f64..500.0) {
        let w = wasserstein_1d(&a, &b).unwrap();
        let a2: Vec<f64> = a.iter().map(|x| x + shift).collect();
        let b2: Vec<f64> = b.iter().map(|x| x + shift).collect();
        prop_assert!((wasserstein_1d(&a2, &b2).unwrap() - w).abs() <= 1e-8 * (1.0 + w));
        prop_assert!((wasserstein_1d(&a2, &b).unwrap() - w).abs() <= shift.abs() + 1e-8 * (1.0 + w));
    }
}
