use std::collections::BTreeMap;
use std::f64::consts::PI;

use proptest::prelude::*;

use qfridge_core::currents::{heat_breakdown, heat_rh, CurrentsConfig};
use qfridge_core::floquet::{CoefficientProvider, ExactFloquet, GreenStatic};
use qfridge_core::limits::{occupation_at, occupation_slow_sd, CoefficientModel};
use qfridge_core::model::{
    eval_spectral_density, DrivePlan, Label, ReservoirSpec, Reservoirs, SpectralDensity,
    SystemParams,
};
use qfridge_core::Cplx;

fn reservoirs(
    a: SpectralDensity<f64>,
    ta: f64,
    b: SpectralDensity<f64>,
    tb: f64,
) -> Reservoirs<f64> {
    Reservoirs::new(
        ReservoirSpec::new(Label::A, a, ta).unwrap(),
        ReservoirSpec::new(Label::B, b, tb).unwrap(),
    )
    .unwrap()
}

fn density() -> impl Strategy<Value = SpectralDensity<f64>> {
    prop_oneof![
        (1e-4f64..1.0, 0.2f64..4.0, 1.0f64..100.0)
            .prop_map(|(p, k, cut)| SpectralDensity::power_law(p, k, 1.0, cut).unwrap()),
        (1e-4f64..1.0, 0.05f64..2.0, 1e-3f64..0.5)
            .prop_map(|(w, c, g)| SpectralDensity::lorentzian(w, c, g).unwrap()),
        proptest::collection::vec(0.0f64..1.0, 2..8).prop_map(|ys| {
            let n = ys.len();
            SpectralDensity::tabulated(
                ys.into_iter()
                    .enumerate()
                    .map(|(i, y)| (3.0 * i as f64 / (n - 1) as f64, y))
                    .collect(),
            )
            .unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn densities_are_non_negative(d in density(), u in 0.0f64..1.0) {
        let w = 120.0 * u;
        prop_assert!(eval_spectral_density(&d, w).unwrap() >= 0.0);
    }

    #[test]
    fn hermitian_drive_is_real(
        v1 in (-0.1f64..0.1, -0.1f64..0.1),
        v2 in (-0.1f64..0.1, -0.1f64..0.1),
        wd in 0.1f64..3.0,
        t in -100.0f64..100.0,
    ) {
        let mut c = BTreeMap::new();
        c.insert(0, Cplx::new(1.0, 0.0));
        for (k, (re, im)) in [(1i64, v1), (2, v2)] {
            c.insert(k, Cplx::new(re, im));
            c.insert(-k, Cplx::new(re, -im));
        }
        let d = DrivePlan::new(c, wd).unwrap();
        let v = d.eval(t);
        prop_assert!(v.im.abs() < 1e-12 * v.norm().max(1.0));
    }

    #[test]
    fn static_harmonic_approaches_green_quadratically(w in 0.0f64..2.0, wd in 0.3f64..1.5) {
        let s = SystemParams::new(1.0, 0.02).unwrap();
        let g = GreenStatic::new(&s).eval(w);
        let dev = |v: f64| {
            let d = DrivePlan::harmonic(1.0, v, wd).unwrap();
            let a0 = ExactFloquet::new(&s, &d, 6).unwrap().coefficient(w, 0).unwrap();
            (a0 - g).norm()
        };
        let (d1, d2) = (dev(1e-4), dev(2e-4));
        prop_assume!(d1 > 1e-13 * g.norm());
        let slope = (d2 / d1).log2();
        prop_assert!((slope - 2.0).abs() < 0.05, "slope {}", slope);
    }

    #[test]
    fn harmonics_decay_geometrically(w in 0.0f64..2.0, wd in 0.3f64..1.5, rel in 1e-3f64..0.1) {
        let s = SystemParams::new(1.0, 0.02).unwrap();
        let d = DrivePlan::harmonic(1.0, rel, wd).unwrap();
        let a = ExactFloquet::new(&s, &d, 8).unwrap().coefficients(w).unwrap();
        let k0 = 8usize;
        let norm = |k: usize| a[k0 + k].norm().max(a[k0 - k].norm());
        // a harmonic whose frequency lands on the resonance may exceed its
        // neighbour, so decay is asserted over two orders
        for k in 0..6 {
            prop_assert!(norm(k + 2) < norm(k), "k = {}: {} !< {}", k, norm(k + 2), norm(k));
        }
        let rate = (norm(7) / norm(0)).powf(1.0 / 7.0);
        prop_assert!(rate < 0.5, "rate {}", rate);
    }

    #[test]
    fn resonant_heating_never_positive_when_thermal(
        rel in 1e-3f64..0.05, ta in 0.01f64..1.0, tb in 0.01f64..1.0, wd in 0.3f64..1.5, wm in 0.05f64..0.45,
    ) {
        let s = SystemParams::new(1.0, 0.02).unwrap();
        let d = DrivePlan::harmonic(1.0, rel, wd).unwrap();
        let p = ExactFloquet::new(&s, &d, 4).unwrap();
        let r = reservoirs(
            SpectralDensity::lorentzian(1e-3, wm, 0.05 * wm).unwrap(),
            ta,
            s.ohmic_density(50.0).unwrap(),
            tb,
        );
        let cfg = CurrentsConfig::default();
        for l in [Label::A, Label::B] {
            prop_assert!(heat_rh(&p, &r, l, &cfg).unwrap() <= 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closure_defect_vanishes(rel in 1e-3f64..0.05, ta in 0.0f64..1.0, tb in 0.0f64..1.0, wd in 0.3f64..1.5) {
        let s = SystemParams::new(1.0, 0.02).unwrap();
        let d = DrivePlan::harmonic(1.0, rel, wd).unwrap();
        let p = ExactFloquet::new(&s, &d, 4).unwrap();
        let r = reservoirs(
            SpectralDensity::dirac(1e-3, 0.2).unwrap(),
            ta,
            SpectralDensity::power_law(4e-2 / PI, 3.0, 1.0, 50.0).unwrap(),
            tb,
        );
        let hb = heat_breakdown(&p, &r, &CurrentsConfig::default()).unwrap();
        let scale = hb.a.total.abs() + hb.b.total.abs();
        prop_assert!(hb.closure_defect <= 4.0 * f64::EPSILON * scale, "{} of {}", hb.closure_defect, scale);
    }

    #[test]
    fn occupancy_ignores_density_scale(scale in 1e-3f64..1e3, wd in 0.8f64..1.0, wm in 5e-3f64..0.1) {
        let s = SystemParams::new(1.0, 1e-3).unwrap();
        let d = DrivePlan::harmonic(1.0, 1e-3, wd).unwrap();
        let b = s.ohmic_density(50.0).unwrap();
        let a = SpectralDensity::dirac(1e-4, wm).unwrap();
        let model = CoefficientModel::Exact { k: 4 };
        let n1 = occupation_at(&s, &d, &reservoirs(a.clone(), 0.0, b.clone(), 0.0), model, wd).unwrap();
        let n2 = occupation_at(&s, &d, &reservoirs(a, 0.0, b.scaled(scale), 0.0), model, wd).unwrap();
        prop_assume!(n1.is_finite());
        prop_assert!(((n1 - n2) / n1).abs() < 1e-12, "{} vs {}", n1, n2);
    }

    #[test]
    fn infeasible_exactly_outside_the_condition(g in 1e-3f64..0.5, wm in 1e-3f64..0.5, wd in 0.01f64..1.2) {
        let s = SystemParams::new(1.0, g).unwrap();
        let n = occupation_slow_sd(&s, wm, wd).unwrap();
        let feasible = 1.0 > wm * wm + g * g + wd * wd;
        prop_assert_eq!(n.is_finite(), feasible);
        if feasible {
            prop_assert!(n >= 0.0);
        }
    }
}
