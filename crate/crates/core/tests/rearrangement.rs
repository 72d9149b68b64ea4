use katolab_core::functionals::{kato_functional, CenterStrategy, GreenKernelSpec};
use katolab_core::rearrangement::{layer_cake_criterion, radial_criterion, DistributionFunction};
use katolab_core::{Measure, Profile};

struct Case {
    gamma: f64,
    k: f64,
    finite: bool,
    /// `int_0^{0.1} r^{1-gamma} (log 1/r)^k dr` when it has a closed form.
    exact: Option<f64>,
}

/// `r^{-gamma} (log 1/r)^k` on the ball of radius 0.1, where it decreases.
/// For d = 3, alpha = 2, p = 1 the radial integrand is `r^{1-gamma} (log 1/r)^k`.
fn cases() -> Vec<Case> {
    let mut out = Vec::new();
    let ln10 = std::f64::consts::LN_10;
    for g in [0.0, 0.5, 1.0, 1.5, 1.9, 2.1, 2.5, 3.0] {
        let exact = (g < 2.0).then(|| 0.1f64.powf(2.0 - g) / (2.0 - g));
        out.push(Case { gamma: g, k: 0.0, finite: g < 2.0, exact });
    }
    for (g, k) in [(0.5, 1.0), (1.0, 1.0), (1.5, 1.0), (2.5, 1.0), (1.0, -1.0), (1.5, -1.0), (2.5, -1.0)] {
        out.push(Case { gamma: g, k, finite: g < 2.0, exact: None });
    }
    for k in [-3.0, -2.0, 0.0, 1.0, 2.0] {
        let exact = (k < -1.0).then(|| ln10.powf(k + 1.0) / (-k - 1.0));
        out.push(Case { gamma: 2.0, k, finite: k < -1.0, exact });
    }
    out
}

fn profile(c: &Case) -> Profile {
    Profile::PowerLog { c: 1.0, gamma: c.gamma, k: c.k }.truncated(0.1)
}

#[test]
fn radial_and_layer_cake_agree_on_twenty_profiles() {
    let cases = cases();
    assert_eq!(cases.len(), 20);
    for c in &cases {
        let f = profile(c);
        let r = radial_criterion(&f, 3, 2.0, 1.0, 0.5).unwrap();
        let dist = DistributionFunction::radial(&f, 3).unwrap();
        let l = layer_cake_criterion(&dist, 3, 2.0, 1.0, 4.0).unwrap();
        assert_eq!(r.finite, c.finite, "radial gamma={} k={}", c.gamma, c.k);
        assert_eq!(l.finite, r.finite, "layer cake gamma={} k={}", c.gamma, c.k);
        assert!(r.converse_applies);
        if let Some(exact) = c.exact {
            assert!((r.value - exact).abs() <= r.error + 1e-9 * exact, "gamma={} k={}: {} vs {exact} ± {}", c.gamma, c.k, r.value, r.error);
        }
    }
}

#[test]
fn centered_ball_realizes_the_supremum() {
    let spec = GreenKernelSpec::new(3.0, 2.0).unwrap();
    for gamma in [0.5, 1.0, 1.5] {
        let mu = Measure::radial(3, Profile::Power { c: 1.0, gamma }.truncated(0.5), vec![0.0; 3]).unwrap();
        for r in [0.05, 0.2] {
            let centered = kato_functional(&mu, &spec, 1.0, r, &CenterStrategy::adapted()).unwrap();
            let others = CenterStrategy { adapted: false, ..Default::default() }
                .with_quasi_random(48)
                .with_window(vec![0.0; 3], 2.0 * r);
            let off = kato_functional(&mu, &spec, 1.0, r, &others).unwrap();
            let tol = centered.total_error() + off.total_error() + 1e-9 * centered.value;
            assert!(off.value <= centered.value + tol, "gamma={gamma} r={r}: {} > {}", off.value, centered.value);
            // The exact centered value is 4 pi int_0^r s^{1-gamma} ds.
            let exact = 4.0 * std::f64::consts::PI * r.powf(2.0 - gamma) / (2.0 - gamma);
            assert!((centered.value - exact).abs() <= 1e-6 * exact + centered.total_error());
        }
    }
}
