mod common;

use common::mean_se;
use pointproc::{
    anticipativity_report, compensator_at, dyadic_approximation, ihf_compensator, instantaneous_rate_estimate,
    martingale_residual_test, model_compensator, predictable_projection_check, simulate_ensemble, simulate_thinning,
    Baseline, EventSequence, HazardSpec, IntensityModel, Probe, RandomStream, WaitingDist,
};
use proptest::prelude::*;

fn hawkes() -> IntensityModel {
    IntensityModel::HawkesConst { a: 0.3, b: 0.2, c: 0.1, phi0: 0.2 }
}

#[test]
fn exponential_ihf_agrees_with_constant_rate_model() {
    let path = simulate_thinning(&IntensityModel::Constant { rate: 1.3 }, 20.0, RandomStream::new(4, 0)).unwrap();
    let spec = HazardSpec::new(vec![WaitingDist::Exponential { rate: 1.3 }]).unwrap();
    let ihf = ihf_compensator(&spec, &path).unwrap();
    let model = model_compensator(&IntensityModel::Constant { rate: 1.3 }, &path, 0.5).unwrap();
    for (t, v) in ihf.breakpoints().into_iter().chain(model.breakpoints()) {
        assert!((ihf.eval(t).unwrap() - v).abs() < 1e-12);
        assert!((model.eval(t).unwrap() - v).abs() < 1e-12);
        assert!((v - 1.3 * t).abs() < 1e-12);
    }
}

#[test]
fn baseline_compensator_closed_form_at_ten() {
    let m = IntensityModel::Baseline { a: 0.3, b: 0.2, c: 0.1 };
    let e = EventSequence::empty(10.0).unwrap();
    let a = model_compensator(&m, &e, 0.1).unwrap();
    let want = 3.0 + 2.0 * (1.0 - (-1.0f64).exp());
    assert!((a.eval(10.0).unwrap() - want).abs() < 1e-12);
}

#[test]
fn model_compensator_matches_quadrature() {
    // independent check: midpoint rule on the left-limit intensity
    let m = IntensityModel::HawkesExp { a: 0.4, b: 0.3, c: 0.5, alpha: 0.7, beta: 2.0 };
    let e = simulate_thinning(&m, 8.0, RandomStream::new(12, 0)).unwrap();
    let path = model_compensator(&m, &e, 0.25).unwrap();
    let steps = 400_000;
    let h = 8.0 / steps as f64;
    let mut q = 0.0;
    for k in 0..steps {
        let t = (k as f64 + 0.5) * h;
        q += pointproc::intensity_at(&m, &e, t).unwrap() * h;
    }
    assert!((path.eval(8.0).unwrap() - q).abs() < 1e-6, "{} vs {q}", path.eval(8.0).unwrap());
}

#[test]
fn dyadic_converges_on_a_hawkes_path() {
    let path = simulate_thinning(&hawkes(), 10.0, RandomStream::new(17, 0)).unwrap();
    let exact = compensator_at(&hawkes(), &path, 10.0).unwrap();
    let e4 = (dyadic_approximation(&hawkes(), &path, 10.0, 4).unwrap() - exact).abs();
    let e12 = (dyadic_approximation(&hawkes(), &path, 10.0, 12).unwrap() - exact).abs();
    assert!(e12 < e4, "level 12 error {e12} vs level 4 error {e4}");
    assert!(e12 < 0.05);
}

#[test]
fn dyadic_riemann_bound_for_baseline() {
    let b = Baseline { a: 0.3, b: 0.2, c: 0.1 };
    let m = IntensityModel::Baseline { a: b.a, b: b.b, c: b.c };
    let e = EventSequence::empty(10.0).unwrap();
    let t = 10.0;
    let sup_deriv = b.b * b.c;
    let mut prev = f64::INFINITY;
    for n in 0..16 {
        let err = (dyadic_approximation(&m, &e, t, n).unwrap() - b.integral(t)).abs();
        assert!(err <= sup_deriv * t * t / 2f64.powi(n as i32 + 1) + 1e-13, "level {n}: {err}");
        if n >= 2 {
            assert!(err <= prev, "level {n} worse than level {}", n - 2);
        }
        if n % 2 == 0 {
            prev = err;
        }
    }
}

#[test]
fn instantaneous_rate_constant() {
    let m = IntensityModel::Constant { rate: 2.0 };
    let e = EventSequence::empty(1.0).unwrap();
    let r = instantaneous_rate_estimate(&m, &e, 0.5, 0.01, 200_000, RandomStream::new(8, 0)).unwrap();
    let expected = (1.0 - (-0.02f64).exp()) / 0.01;
    assert!((expected - 1.980_132_669_324_209).abs() < 1e-12);
    assert!((r.estimate - expected).abs() < 4.0 * r.std_error, "{r:?}");
}

#[test]
fn instantaneous_rate_hawkes_frozen_history() {
    let m = hawkes();
    let hist = EventSequence::new(5.0, vec![0.7, 1.9, 3.2]).unwrap();
    let t = 4.0;
    let lambda = 0.3 + 0.2 * (-0.4f64).exp() + 0.2 * 3.0;
    // exact expectation: no event in (t, t+h] has probability exp(-(A(t+h) - A(t)))
    let expect = |h: f64| {
        let ext = EventSequence::new(t + h, hist.times().to_vec()).unwrap();
        let inc = compensator_at(&m, &ext, t + h).unwrap() - compensator_at(&m, &ext, t).unwrap();
        -(-inc).exp_m1() / h
    };
    assert!((expect(1e-6) - lambda).abs() < 1e-5);
    assert!((expect(1e-3) - lambda).abs() < (expect(1e-2) - lambda).abs());
    let h = 0.01;
    let r = instantaneous_rate_estimate(&m, &hist, t, h, 200_000, RandomStream::new(9, 0)).unwrap();
    assert!((r.estimate - expect(h)).abs() < 4.0 * r.std_error, "{r:?} vs {}", expect(h));
}

fn variants() -> Vec<IntensityModel> {
    vec![
        IntensityModel::Constant { rate: 1.5 },
        IntensityModel::Baseline { a: 0.3, b: 0.2, c: 0.1 },
        hawkes(),
        IntensityModel::HawkesExp { a: 0.5, b: 0.0, c: 0.0, alpha: 0.8, beta: 1.5 },
        IntensityModel::OneShot { rate: 0.7 },
    ]
}

#[test]
fn residual_test_accepts_true_and_rejects_doubled_compensators() {
    let pairs = [(1.0, 3.0), (2.0, 5.0)];
    let probes = [Probe::One, Probe::CountEquals(0), Probe::CountAtLeast(1)];
    for (i, m) in variants().into_iter().enumerate() {
        let ens = simulate_ensemble(&m, 5.0, 10_000, 1000 + i as u64).unwrap();
        let good = martingale_residual_test(&ens, |_, p, t| compensator_at(&m, p, t), &pairs, &probes).unwrap();
        assert!(good.passed, "{m:?}: max |z| = {}", good.max_abs_z());
        let bad =
            martingale_residual_test(&ens, |_, p, t| Ok(2.0 * compensator_at(&m, p, t)?), &pairs, &probes).unwrap();
        assert!(!bad.passed, "{m:?} accepted a doubled compensator");
    }
}

#[test]
fn ihf_compensator_passes_residual_test() {
    // waiting times with an atom: half the mass at 0.5, the rest Exp(1) after it
    let spec = HazardSpec::new(vec![WaitingDist::PiecewiseCdf {
        knots: vec![0.5, 1.0, 2.0, 4.0],
        values: vec![0.5, 0.7, 0.9, 1.0],
    }])
    .unwrap();
    let ens = simulate_ensemble(&spec, 6.0, 10_000, 55).unwrap();
    let paths: Vec<_> = ens.iter().map(|p| ihf_compensator(&spec, p).unwrap()).collect();
    let r = martingale_residual_test(
        &ens,
        |i, _, t| paths[i].eval(t),
        &[(0.0, 2.0), (1.0, 4.0), (3.0, 6.0)],
        &[Probe::One, Probe::CountEquals(1), Probe::CountAtLeast(2)],
    )
    .unwrap();
    assert!(r.passed, "max |z| = {}", r.max_abs_z());
}

#[test]
fn projection_check_examples() {
    let ens = simulate_ensemble(&IntensityModel::Constant { rate: 1.0 }, 1.0, 10_000, 404).unwrap();
    let ok = predictable_projection_check(&ens, |_, _, t| Ok(t), 0.5, 1.0, 0).unwrap();
    let target = (-0.5f64).exp() * 0.5;
    let p0: Vec<f64> = ens.iter().map(|p| (p.count(0.5) == 0) as u8 as f64 * 0.5).collect();
    let (m, se) = mean_se(&p0);
    assert!((ok.compensated - m).abs() < 1e-12);
    assert!((m - target).abs() < 4.0 * se);
    assert!(ok.z.abs() <= 3.0, "{ok:?}");
    let bad = predictable_projection_check(&ens, |_, _, t| Ok(2.0 * t), 0.5, 1.0, 0).unwrap();
    assert!(bad.z.abs() > 3.0, "{bad:?}");
}

#[test]
fn anticipative_drift_for_several_windows() {
    for (k, a) in [0.5, 1.0, 2.0].into_iter().enumerate() {
        let r = anticipativity_report(50_000, a, 1.0, 1.0 + a, 600 + k as u64).unwrap();
        assert!((r.drift - r.expected_drift).abs() < 3.0 * r.drift_se, "a = {a}: {} vs {}", r.drift, r.expected_drift);
        assert!(!r.anticipative.passed);
        assert!(r.control.passed);
    }
}

fn waiting_dist() -> impl Strategy<Value = WaitingDist> {
    prop_oneof![
        (0.05f64..5.0).prop_map(|rate| WaitingDist::Exponential { rate }),
        (0.05f64..3.0, 0.0f64..0.95).prop_map(|(at, mass)| WaitingDist::PointMass { at, mass }),
        (0.0f64..1.0, 0.05f64..5.0).prop_map(|(mass, rate)| WaitingDist::Defective {
            mass,
            inner: Some(Box::new(WaitingDist::Exponential { rate })),
        }),
        proptest::collection::vec((0.01f64..1.0, 0.0f64..0.3), 1..5).prop_map(|steps| {
            let mut knots = Vec::new();
            let mut values = Vec::new();
            let (mut k, mut v) = (0.0, 0.0);
            for (dk, dv) in steps {
                k += dk;
                v = f64::min(v + dv, 0.99);
                knots.push(k);
                values.push(v);
            }
            WaitingDist::PiecewiseCdf { knots, values }
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ihf_paths_are_non_decreasing_from_zero(
        dists in proptest::collection::vec(waiting_dist(), 1..4),
        seed in 0u64..1000,
    ) {
        let spec = HazardSpec::new(dists).unwrap();
        let events = pointproc::simulate_from_hazard(&spec, 5.0, RandomStream::new(seed, 0)).unwrap();
        let a = ihf_compensator(&spec, &events).unwrap();
        prop_assert_eq!(a.eval(0.0).unwrap(), 0.0);
        let mut prev = 0.0;
        for k in 0..=500 {
            let v = a.eval(5.0 * k as f64 / 500.0).unwrap();
            prop_assert!(v >= prev - 1e-12);
            prev = v;
        }
        for w in a.breakpoints().windows(2) {
            prop_assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }
}
