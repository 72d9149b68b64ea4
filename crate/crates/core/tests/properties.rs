use katolab_core::functionals::{
    green_value, kato_functional, resolvent_functional, semigroup_functional, CenterStrategy, GreenKernelSpec,
};
use katolab_core::{HeatKernelModel, Measure, Profile};
use proptest::prelude::*;

fn measure() -> impl Strategy<Value = Measure> {
    prop_oneof![
        Just(Measure::lebesgue(3)),
        (0.2f64..2.0).prop_map(|r| Measure::sphere(vec![0.0; 3], r, 1.0).unwrap()),
        (0.0f64..2.5).prop_map(|g| {
            Measure::radial(3, Profile::Power { c: 1.0, gamma: g }.truncated(1.0), vec![0.0; 3]).unwrap()
        }),
        prop::collection::vec((prop::array::uniform3(-1.0f64..1.0), 0.1f64..2.0), 1..4)
            .prop_map(|a| Measure::atoms(3, a.into_iter().map(|(p, w)| (p.to_vec(), w)).collect()).unwrap()),
        (0.5f64..3.0).prop_map(|eta| Measure::ahlfors(3, eta, 1.0, 2.0, 1.0).unwrap()),
    ]
}

fn le(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, .. ProptestConfig::default() })]

    #[test]
    fn kato_monotone_in_p(mu in measure(), p1 in 1.0f64..4.0, dp in 0.0f64..1.5, r in 0.01f64..0.3) {
        let spec = GreenKernelSpec::new(3.0, 2.0).unwrap();
        let centers = CenterStrategy::adapted();
        let p2 = p1 + dp;
        let a = kato_functional(&mu, &spec, p1, r, &centers).unwrap();
        let b = kato_functional(&mu, &spec, p2, r, &centers).unwrap();
        if !b.diverged {
            prop_assert!(!a.diverged);
            let scale = green_value(&spec, r).unwrap().powf(p2 - p1);
            prop_assert!(le(a.value, b.value / scale, a.total_error() + b.total_error() / scale));
        }
    }

    #[test]
    fn kato_nondecreasing_in_r(mu in measure(), p in 1.0f64..3.5, r in 0.01f64..0.15, f in 1.0f64..2.0) {
        let spec = GreenKernelSpec::new(3.0, 2.0).unwrap();
        let centers = CenterStrategy::points(vec![vec![0.0, 0.0, 0.0], vec![0.3, 0.0, 0.0]]);
        let a = kato_functional(&mu, &spec, p, r, &centers).unwrap();
        let b = kato_functional(&mu, &spec, p, r * f, &centers).unwrap();
        if a.diverged {
            prop_assert!(b.diverged);
        } else if !b.diverged {
            prop_assert!(le(a.value, b.value, a.total_error() + b.total_error()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, .. ProptestConfig::default() })]

    #[test]
    fn semigroup_bounded_by_resolvent(g in 0.0f64..1.5, p in 1.0f64..2.0, t in 0.05f64..1.0, alpha in 0.5f64..4.0) {
        let model = HeatKernelModel::gaussian(3).unwrap();
        let mu = Measure::radial(3, Profile::Power { c: 1.0, gamma: g }.truncated(1.0), vec![0.0; 3]).unwrap();
        let centers = CenterStrategy::adapted();
        let s = semigroup_functional(&mu, &model, p, t, &centers, None).unwrap();
        let r = resolvent_functional(&mu, &model, p, alpha, &centers, None).unwrap();
        let k = (alpha * t * p).exp();
        prop_assert!(le(s.value, k * r.value, s.total_error() + k * r.total_error()));
        let s2 = semigroup_functional(&mu, &model, p, 2.0 * t, &centers, None).unwrap();
        prop_assert!(le(s.value, s2.value, s.total_error() + s2.total_error()));
    }
}
