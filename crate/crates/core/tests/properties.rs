use proptest::prelude::*;
use ua_wkb::{
    flow2, flow4, lie_step, sigma_s_norm, strang_step, Complex64, ComplexField, PeriodicGrid, Potential, SchemeKind,
    SchemeSpec, WkbState,
};

const N: usize = 32;

/// Band-limited state from a few low modes.
fn state(coef: &[f64]) -> WkbState {
    let g = PeriodicGrid::new(N).unwrap();
    let (c, d) = coef.split_at(4);
    WkbState::from_fns(
        &g,
        |x| 0.3 * (c[0] * x.sin() + c[1] * (2.0 * x).cos()) + 0.1 * (c[2] * (3.0 * x).sin() + c[3] * x.cos()),
        |x| Complex64::new(1.0 + 0.3 * d[0] * x.cos(), 0.3 * d[1] * (2.0 * x).sin()) + 0.2 * d[2] * (3.0 * x).cos(),
    )
    .unwrap()
}

fn max_diff(a: &WkbState, b: &WkbState) -> f64 {
    let ds = a.phase().values().iter().zip(b.phase().values()).map(|(x, y)| (x - y).abs());
    let da = a.amplitude().values().iter().zip(b.amplitude().values()).map(|(x, y)| (x - y).norm());
    ds.chain(da).fold(0.0, f64::max)
}

fn coefs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spectral_round_trip(re in prop::collection::vec(-1.0f64..1.0, N), im in prop::collection::vec(-1.0f64..1.0, N)) {
        let g = PeriodicGrid::new(N).unwrap();
        let vals: Vec<Complex64> = re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect();
        let f = ComplexField::new(g, vals.clone()).unwrap();
        let back = f.spectrum().inverse();
        for (x, y) in back.values().iter().zip(&vals) {
            prop_assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn dispersion_and_heat_are_semigroups(c in coefs(), eps in 0.0f64..1.0, h1 in 0.0f64..0.5, h2 in 0.0f64..0.5) {
        let u = state(&c);
        let split = flow2(&flow2(&u, h1, eps).unwrap(), h2, eps).unwrap();
        prop_assert!(max_diff(&split, &flow2(&u, h1 + h2, eps).unwrap()) < 1e-12);
        let split = flow4(&flow4(&u, h1, eps).unwrap(), h2, eps).unwrap();
        prop_assert!(max_diff(&split, &flow4(&u, h1 + h2, eps).unwrap()) < 1e-11);
    }

    #[test]
    fn splitting_steps_preserve_amplitude_mass(c in coefs(), eps in 0.0f64..1.0, h in 0.0f64..0.1, strang: bool) {
        let u = state(&c);
        let g = u.grid().clone();
        let kind = if strang { SchemeKind::StrangPalindromic } else { SchemeKind::Lie1234 };
        let spec = SchemeSpec::new(kind, eps, Potential::trig_ratio(&g)).unwrap();
        let mut v = u.clone();
        for _ in 0..8 {
            v = if strang { strang_step(&v, h, &spec) } else { lie_step(&v, h, &spec) }.unwrap();
        }
        let (m0, m1) = (u.amplitude_mass(), v.amplitude_mass());
        prop_assert!((m1 - m0).abs() <= 1e-12 * m0, "{m0} {m1}");
    }

    #[test]
    fn sigma_norm_grows_with_s(c in coefs(), s in 1.6f64..4.0, ds in 0.0f64..2.0) {
        let u = state(&c);
        prop_assert!(sigma_s_norm(&u, s).unwrap() <= sigma_s_norm(&u, s + ds).unwrap() * (1.0 + 1e-14));
    }
}
