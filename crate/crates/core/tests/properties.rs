use std::collections::BTreeMap;

use proptest::prelude::*;

use revspec::io::fmt17;
use revspec::numerics::{abel_forward, abel_invert, frac_integral, FracOrder, SampledFunction};
use revspec::profile::{isometry_distance, BesseForm, Profile, DEFAULT_NODES};
use revspec::quantization::{JointSpectrum, NormalForm, Provenance, SpectrumEntry};

fn besse(q0: f64, q1: f64) -> BesseForm {
    BesseForm::polynomial(vec![q0, q1], "prop")
}

fn sigma_grid(n: usize, vmax: f64) -> Vec<f64> {
    (0..n)
        .map(|i| vmax * (i as f64 / (n - 1) as f64).powi(2))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn h1_is_homogeneous(q0 in 0.0..0.6f64, q1 in -0.2..0.2f64, nu in -0.9..0.9f64, t in 0.2..20.0f64) {
        let nf = NormalForm::from_besse(&besse(q0, q1)).unwrap();
        let i2 = nf.action(nu).0;
        let a = nf.h1(nu, i2).unwrap();
        let b = nf.h1(t * nu, t * i2).unwrap();
        prop_assert!((a - 1.0).abs() < 1e-9, "{}", a);
        prop_assert!((b - t * a).abs() < 1e-9 * t, "{} vs {}", b, t * a);
    }

    #[test]
    fn lattice_is_even_in_n(q0 in 0.0..0.6f64, q1 in -0.2..0.2f64, n in 1i64..20, dm in 0i64..20) {
        let nf = NormalForm::from_besse(&besse(q0, q1)).unwrap();
        let (a1, am1) = nf.lattice(n, n + dm).unwrap();
        let (b1, bm1) = nf.lattice(-n, n + dm).unwrap();
        prop_assert!((a1 - b1).abs() <= 1e-9 && (am1 - bm1).abs() <= 1e-9);
    }

    #[test]
    fn reflection_preserves_normal_form(q0 in 0.0..0.6f64, q1 in -0.2..0.2f64, nu in 0.0..0.95f64) {
        let b = besse(q0, q1);
        let x = NormalForm::from_besse(&b).unwrap();
        let y = NormalForm::from_besse(&b.reflected()).unwrap();
        prop_assert!((x.action(nu).0 - y.action(nu).0).abs() < 1e-10);
        prop_assert!((x.level_hm1(nu) - y.level_hm1(nu)).abs() < 1e-8);
    }

    #[test]
    fn reflection_is_an_isometry(q0 in 0.0..0.6f64, q1 in -0.2..0.2f64) {
        let p = Profile::from_besse(besse(q0, q1), DEFAULT_NODES).unwrap();
        let r = p.reflected().unwrap();
        prop_assert!(isometry_distance(&p, &r) < 1e-9);
        let d1 = isometry_distance(&p, &Profile::from_besse(besse(q0 + 0.05, q1), DEFAULT_NODES).unwrap());
        prop_assert!(d1 > 1e-4);
    }
}

proptest! {
    #[test]
    fn abel_roundtrip_on_cubics(c in prop::array::uniform4(-2.0..2.0f64)) {
        let g = |y: f64| c[0] + y * (c[1] + y * (c[2] + y * c[3]));
        let nodes = sigma_grid(513, 1.0);
        let f = abel_forward(&SampledFunction::from_fn(nodes, g).unwrap()).unwrap();
        let back = abel_invert(&f).unwrap();
        prop_assert!(back.values.max_abs_diff(g) < 1e-7);
    }

    #[test]
    fn fractional_semigroup(a in 0.4..1.0f64, b in 0.1..1.0f64, k in 0.2..3.0f64) {
        let nodes = sigma_grid(513, 1.0);
        let u = SampledFunction::from_fn(nodes, |y| (k * y).sin() + 1.0).unwrap();
        let two = frac_integral(&frac_integral(&u, FracOrder::new(a)).unwrap(), FracOrder::new(b)).unwrap();
        let one = frac_integral(&u, FracOrder::new(a + b)).unwrap();
        let err = two.values().iter().zip(one.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-5, "{}", err);
    }

    #[test]
    fn fmt17_roundtrips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn spectrum_csv_roundtrips(rows in prop::collection::vec((-20i64..20, 0i64..20, 0.0..1e4f64), 1..30)) {
        let unique: BTreeMap<(i64, i64), f64> = rows
            .iter()
            .map(|&(n, dm, lambda)| ((n, n.abs() + dm), lambda))
            .collect();
        let entries: Vec<SpectrumEntry> = unique
            .into_iter()
            .map(|((n, m), lambda)| SpectrumEntry { n, m, lambda })
            .collect();
        let s = JointSpectrum::new(entries, Provenance::Semiclassical);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = JointSpectrum::read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.entries, s.entries);
    }
}
