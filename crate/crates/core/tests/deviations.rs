use dilute_core::deviations::*;
use dilute_core::disorder::CouplingLaw;
use dilute_core::exact::ising_exact;
use dilute_core::geometry::{build_rect_relaxed, Direction, RectRegion};
use dilute_core::oracle::*;
use dilute_core::spin::{region_clamps, SpinBc};
use proptest::prelude::*;

fn strip(l: f64, h: f64) -> RectRegion {
    build_rect_relaxed(&[0.0, 0.0], l, h, &Direction::axis(2, 1).unwrap()).unwrap()
}

fn prov(area: f64) -> Provenance {
    Provenance { length: area, half_height: 1.0, beta: 1.0, q: 2.0, direction: "test".into(), area }
}

#[test]
fn jensen_on_three_laws() {
    for law in [
        CouplingLaw::Dilution { p: 0.7 },
        CouplingLaw::Uniform { lo: 0.0, hi: 1.0 },
        CouplingLaw::TwoPoint { a: 0.5, b: 1.0, p: 0.8 },
    ] {
        let c = jensen_check(&law, 500, 12).unwrap();
        assert!(c.passes(), "{c:?}");
        // Small λ: τ^λ/λ is close to the mean. Large λ: it decreases.
        let first = c.tau_lambda[0] / c.lambda[0];
        assert!((first - c.mean).abs() < 1e-2 * c.mean.max(1e-3), "{first} vs {}", c.mean);
        let ratios: Vec<f64> = c.lambda.iter().zip(&c.tau_lambda).map(|(l, t)| t / l).collect();
        assert!(ratios.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}

#[test]
fn two_atom_closed_form() {
    let t = 1.3;
    let samples: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 0.0 } else { t }).collect();
    assert!((annealed_value(&samples, 1.0, 1.0) + ((1.0 + (-t as f64).exp()) / 2.0).ln()).abs() < 1e-14);
    // The closed-form dual agrees with a brute maximization over λ.
    for s in [0.05, 0.2, 0.35, 0.49] {
        let brute = (0..200_000)
            .map(|k| k as f64 * 1e-4)
            .map(|l| -((1.0 + (-l * t).exp()) / 2.0).ln() - l * s * t)
            .fold(0.0, f64::max);
        assert!((two_atom_dual(t, s * t) - brute).abs() < 1e-6, "{s}");
    }
    for (t, n) in [(1.3, 100), (0.4, 250), (3.0, 60)] {
        let c = two_atom_check(t, n, 25).unwrap();
        assert!(c.passes(), "{c:?}");
    }
}

#[test]
fn finer_lambda_grid_tightens_two_atom_residual() {
    let coarse = two_atom_check(1.3, 100, 9).unwrap();
    let fine = two_atom_check(1.3, 100, 81).unwrap();
    let worst = |c: &TwoAtomCheck| c.residual.iter().copied().fold(0.0, f64::max);
    assert!(worst(&fine) <= worst(&coarse) + 1e-12);
}

#[test]
fn rate_definition_at_median() {
    let samples: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
    let median = samples[99];
    let r = empirical_rate(&samples, prov(3.0), &[median, 2.0, -1.0]).unwrap();
    assert!((r.rate[0].unwrap() + 0.5f64.ln() / 3.0).abs() < 1e-14);
    assert_eq!(r.rate[1], Some(0.0));
    assert_eq!(r.rate[2], None);
}

proptest! {
    #[test]
    fn rate_nonincreasing_and_annealed_concave(xs in prop::collection::vec(0.0f64..2.0, 100..300)) {
        let grid = default_tau_grid(&xs, 31);
        let r = empirical_rate(&xs, prov(2.0), &grid).unwrap();
        let present: Vec<f64> = r.rate.iter().flatten().copied().collect();
        prop_assert!(present.windows(2).all(|w| w[1] <= w[0] + 1e-15));
        let lg = default_lambda_grid(15);
        let a = annealed_tension(&xs, &lg, &r).unwrap();
        // Concavity along a non-uniform grid: slopes decrease.
        let slopes: Vec<f64> = lg.windows(2).zip(a.tau_lambda.windows(2)).map(|(l, t)| (t[1] - t[0]) / (l[1] - l[0])).collect();
        prop_assert!(slopes.windows(2).all(|s| s[1] <= s[0] + 1e-9));
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        prop_assert!(lg.iter().zip(&a.tau_lambda).all(|(l, t)| *t <= l * mean + 1e-12));
        let res = legendre_residual(&r, &a).unwrap();
        prop_assert!(res.min_signed >= -1e-12);
        for ((lo, hi), l) in a.tau_hat_lo.iter().zip(&a.tau_hat_hi).zip(&lg) {
            prop_assert!(lo.unwrap() <= hi.unwrap(), "{l}");
        }
    }

    #[test]
    fn minorant_lies_below_and_is_convex(ys in prop::collection::vec(-3.0f64..3.0, 2..40)) {
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64 * 0.5).collect();
        let h = convex_minorant(&xs, &ys);
        prop_assert!(h.iter().zip(&ys).all(|(a, b)| a <= &(b + 1e-12)));
        prop_assert!(h.windows(3).all(|w| w[0] + w[2] - 2.0 * w[1] >= -1e-9));
    }
}

#[test]
fn sensitivity_bounds_on_random_fixtures() {
    for i in 0..30 {
        let c = sensitivity_fixture(fixture_seed(3, i)).unwrap();
        assert!(c.passes(), "{c:?}");
    }
}

#[test]
fn sensitivity_is_half_the_ising_gap() {
    let r = strip(2.5, 1.5);
    let m = r.system().num_edges();
    let j: Vec<f64> = (0..m).map(|e| 0.2 + 0.1 * (e % 8) as f64).collect();
    let beta = 0.8;
    for e in 0..m {
        let rows = edge_sensitivity_exact(&r, &j, beta, 2.0, e, &[j[e]]).unwrap();
        let plus = ising_exact(r.system(), &region_clamps(&r, SpinBc::Plus), &j, beta).unwrap();
        let mixed = ising_exact(r.system(), &region_clamps(&r, SpinBc::Mixed), &j, beta).unwrap();
        let gap = 0.5 * (plus.edge_corr[e] - mixed.edge_corr[e]);
        assert!((rows[0].a_e - gap).abs() < 1e-9, "edge {e}: {} vs {gap}", rows[0].a_e);
    }
}

#[test]
fn sensitivity_rejects_bad_input() {
    let r = strip(2.5, 1.5);
    let j = vec![0.5; r.system().num_edges()];
    assert!(matches!(edge_sensitivity_exact(&r, &j, 1.0, 2.0, 0, &[0.0]), Err(DeviationError::NonPositiveCoupling(_))));
    assert!(matches!(edge_sensitivity_exact(&r, &j, 1.0, 2.0, 99, &[0.5]), Err(DeviationError::EdgeOutOfRange(99))));
    let big = strip(3.0, 3.5);
    let jb = vec![0.5; big.system().num_edges()];
    assert!(matches!(edge_sensitivity_exact(&big, &jb, 1.0, 2.0, 0, &[0.5]), Err(DeviationError::TooLarge { .. })));
}

#[test]
fn entropy_identity_holds() {
    let lambdas = [0.05, 0.3, 1.0, 2.5];
    for law in [CouplingLaw::Dilution { p: 0.6 }, CouplingLaw::TwoPoint { a: 0.5, b: 1.0, p: 0.8 }] {
        for s in entropy_identity_check(&law, &lambdas, 1e-3).unwrap() {
            assert!((s.lhs - s.rhs).abs() < 1e-4, "{law:?} {s:?}");
            assert!(s.entropy >= -1e-15);
        }
    }
    let c = entropy_identity_check(&CouplingLaw::Constant { c: 0.7 }, &[0.5], 1e-3).unwrap();
    assert!(c[0].entropy.abs() < 1e-15);
    assert!(matches!(
        entropy_identity_check(&CouplingLaw::Uniform { lo: 0.0, hi: 1.0 }, &[0.5], 1e-3),
        Err(DeviationError::InfiniteSupport(_))
    ));
}

#[test]
fn vanishing_tilt_recovers_plain_means() {
    let r = strip(2.5, 1.5);
    let law = CouplingLaw::Dilution { p: 0.6 };
    let lambda = 1e-4;
    let (table, s) = tilted_stats_exact(&r, &law, 1.0, 2.0, lambda, 1e-5).unwrap();
    // To first order the tilt shifts a mean by -λA·Cov(h, τ).
    let mean_j = |j: &[f64]| j.iter().sum::<f64>() / j.len() as f64;
    let cov_j = table.mean(|j, t| mean_j(j) * t) - s.mean_coupling * s.mean_tau;
    let var_t = table.mean(|_, t| t * t) - s.mean_tau * s.mean_tau;
    let first_order = lambda * table.area;
    assert!((s.tilted_mean_coupling - s.mean_coupling + first_order * cov_j).abs() < 1e-8);
    assert!((s.tilted_mean_tau - s.mean_tau + first_order * var_t).abs() < 1e-8);
    assert!((s.tilted_mean_coupling - s.mean_coupling).abs() < 1e-4);
    // Probabilities sum to one and the mean coupling matches the law.
    assert!((table.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!((s.mean_coupling - 0.6).abs() < 1e-12);
}
