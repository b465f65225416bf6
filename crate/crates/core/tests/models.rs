use pointproc::{
    compensator_at, intensity_at, intensity_right, io, simulate_ensemble, simulate_thinning, EventSequence,
    IntensityModel, RandomStream,
};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = IntensityModel> {
    let base = (0.0f64..2.0, 0.0f64..2.0, 0.0f64..3.0);
    prop_oneof![
        (0.0f64..5.0).prop_map(|rate| IntensityModel::Constant { rate }),
        base.clone().prop_map(|(a, b, c)| IntensityModel::Baseline { a, b, c }),
        (base.clone(), 0.0f64..0.3).prop_map(|((a, b, c), phi0)| IntensityModel::HawkesConst { a, b, c, phi0 }),
        (base, 0.0f64..1.0, 0.1f64..4.0).prop_map(|((a, b, c), alpha, beta)| IntensityModel::HawkesExp {
            a,
            b,
            c,
            alpha,
            beta
        }),
        (0.0f64..5.0).prop_map(|rate| IntensityModel::OneShot { rate }),
    ]
}

fn events() -> impl Strategy<Value = EventSequence> {
    proptest::collection::vec(0.0f64..10.0, 0..20).prop_map(|mut t| {
        t.sort_by(f64::total_cmp);
        t.dedup();
        t.retain(|&x| x > 0.0);
        EventSequence::new(10.0, t).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn intensity_is_non_negative(m in model(), e in events(), t in 0.0f64..10.0) {
        prop_assert!(intensity_at(&m, &e, t).unwrap() >= 0.0);
        prop_assert!(intensity_right(&m, &e, t).unwrap() >= 0.0);
    }

    #[test]
    fn intensity_ignores_the_future(m in model(), e in events(), t in 0.1f64..9.0, extra in proptest::collection::vec(0.0f64..1.0, 1..5)) {
        let before = intensity_at(&m, &e, t).unwrap();
        let comp = compensator_at(&m, &e, t).unwrap();
        let mut times: Vec<f64> = e.times().iter().copied().filter(|&x| x < t).collect();
        times.push(t);
        times.extend(extra.iter().map(|x| t + x));
        times.sort_by(f64::total_cmp);
        times.dedup();
        let e2 = EventSequence::new(11.0, times).unwrap();
        // same past, an event at t itself and more after it
        let past: Vec<f64> = e.times().iter().copied().filter(|&x| x < t).collect();
        let e1 = EventSequence::new(11.0, past).unwrap();
        prop_assert_eq!(intensity_at(&m, &e1, t).unwrap(), intensity_at(&m, &e2, t).unwrap());
        prop_assert_eq!(compensator_at(&m, &e1, t).unwrap(), compensator_at(&m, &e2, t).unwrap());
        if e.times().iter().all(|&x| x < t) {
            prop_assert_eq!(before, intensity_at(&m, &e2, t).unwrap());
            prop_assert_eq!(comp, compensator_at(&m, &e2, t).unwrap());
        }
    }

    #[test]
    fn compensator_is_non_decreasing(m in model(), e in events()) {
        let mut prev = 0.0;
        for k in 0..=200 {
            let v = compensator_at(&m, &e, k as f64 * 0.05).unwrap();
            prop_assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn inline_form_round_trips(m in model()) {
        let back: IntensityModel = m.to_string().parse().unwrap();
        prop_assert_eq!(back, m);
    }
}

#[test]
fn same_seed_same_path() {
    let m = IntensityModel::HawkesExp { a: 0.5, b: 0.1, c: 0.2, alpha: 0.5, beta: 1.0 };
    let a = simulate_thinning(&m, 20.0, RandomStream::new(42, 3)).unwrap();
    let b = simulate_thinning(&m, 20.0, RandomStream::new(42, 3)).unwrap();
    let c = simulate_thinning(&m, 20.0, RandomStream::new(42, 4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let ens = simulate_ensemble(&m, 20.0, 8, 42).unwrap();
    assert_eq!(ens[3], a);
}

#[test]
fn event_csv_round_trip_is_bit_exact() {
    let m = IntensityModel::Constant { rate: 3.0 };
    let ens = simulate_ensemble(&m, 5.0, 4, 8).unwrap();
    let mut buf = Vec::new();
    io::write_events(&ens[0], &mut buf).unwrap();
    assert_eq!(io::read_events(&buf[..], Some(5.0)).unwrap(), ens[0]);
    let mut buf = Vec::new();
    io::write_ensemble(&ens, &mut buf).unwrap();
    assert_eq!(io::read_ensemble(&buf[..], 5.0, Some(4)).unwrap(), ens);
}

#[test]
fn model_json_uses_kind_and_params() {
    let m = IntensityModel::HawkesConst { a: 0.3, b: 0.2, c: 0.1, phi0: 0.2 };
    let v = serde_json::to_value(m).unwrap();
    assert_eq!(v["kind"], "hawkes_const");
    assert_eq!(v["params"]["phi0"], 0.2);
    assert_eq!(serde_json::from_value::<IntensityModel>(v).unwrap(), m);
}
