use blobloop::amplitudes::{closed_form_amplitudes, WindingParams};
use blobloop::cabling::LinkModule;
use blobloop::cft::kac::kac_weight_exact;
use blobloop::cft::{kac_weight, r_of_y, y_of_r};
use blobloop::linkstate::{enumerate_states, sector_dimension};
use blobloop::matrix::{self, Dense};
use blobloop::ring::{binomial, rat};
use blobloop::rsos::{enumerate_heights, walk_count, RsosSector};
use blobloop::transfer::{generator_matrix, LoopWeights};
use blobloop::{Error, SectorLabel};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn sector_strategy(max_n: usize) -> impl Strategy<Value = (usize, SectorLabel)> {
    (2..=max_n).prop_flat_map(|n| {
        let sectors = SectorLabel::all(n);
        (Just(n), proptest::sample::select(sectors))
    })
}

fn mul3(a: &Dense<BigRational>, b: &Dense<BigRational>, c: &Dense<BigRational>) -> Dense<BigRational> {
    matrix::mul(&matrix::mul(a, b), c)
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(2000))]

    #[test]
    fn kac_table_symmetry(p in 1.5f64..40.0, r in -20.0f64..20.0, s in -20.0f64..20.0) {
        let h = kac_weight(p, r, s);
        let h2 = kac_weight(p, p - r, p + 1.0 - s);
        prop_assert!((h - h2).abs() <= 1e-9 * h.abs().max(1.0));
    }

    #[test]
    fn kac_table_symmetry_exact(pn in 2i64..60, pd in 1i64..9, rn in -40i64..40, sn in -40i64..40, den in 1i64..7) {
        let p = rat(pn, pd);
        let r = rat(rn, den);
        let s = rat(sn, den);
        let one = rat(1, 1);
        let h = kac_weight_exact(&p, &r, &s);
        let h2 = kac_weight_exact(&p, &(&p - &r), &(&p + &one - &s));
        prop_assert_eq!(h, h2);
    }

    #[test]
    fn y_of_r_round_trip(p in 1.2f64..30.0, t in 0.02f64..0.98) {
        let r = t * (p + 1.0);
        let back = r_of_y(p, y_of_r(p, r)).unwrap();
        prop_assert!((back - r).abs() <= 1e-12 * r.max(1.0));
    }

    #[test]
    fn sector_dimension_is_binomial((n, s) in sector_strategy(12)) {
        let strings = s.n_strings as i64;
        let k = if s.blobbed { (n as i64 - strings) / 2 } else { (n as i64 - strings - 2) / 2 };
        let expected = usize::try_from(&binomial(n as i64 - 1, k)).unwrap();
        prop_assert_eq!(enumerate_states(n, s).unwrap().len(), expected);
        prop_assert_eq!(sector_dimension(n, s).unwrap(), expected);
    }

    #[test]
    fn rsos_dimension_is_walk_count(
        (n, p, d, a) in (2usize..=10, 3usize..=8).prop_flat_map(|(n, p)| (Just(n), Just(p), 1..p, 1..=p))
    ) {
        let sector = RsosSector::new(n, p, d, a).unwrap();
        let dim = enumerate_heights(n, p, &sector).len() as u64;
        prop_assert_eq!(dim, walk_count(n, p, &sector));
    }

    #[test]
    fn closed_forms_even_under_joint_sign_flip(
        ar in -2.0f64..2.0, ai in -3.0f64..3.0, br in -2.0f64..2.0, bi in -3.0f64..3.0, big_l in 0usize..=10
    ) {
        let alpha = Complex64::new(ar, ai);
        let beta = Complex64::new(br, bi);
        prop_assume!(beta.sinh().norm() > 1e-3);
        let plus = closed_form_amplitudes(big_l, &WindingParams::new(alpha, beta).unwrap()).unwrap();
        let minus = closed_form_amplitudes(big_l, &WindingParams::new(-alpha, -beta).unwrap()).unwrap();
        let scale = plus.0.norm().max(plus.1.norm()).max(1.0);
        prop_assert!((plus.0 - minus.0).norm() <= 1e-10 * scale);
        prop_assert!((plus.1 - minus.1).norm() <= 1e-10 * scale);
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn generators_satisfy_blob_algebra(
        (n, s) in sector_strategy(10),
        xn in 1i64..9, xd in 1i64..5, yn in -7i64..9, yd in 1i64..5,
        i in 1usize..10, j in 1usize..10,
    ) {
        prop_assume!(i < n && j < n);
        let x = rat(xn, xd);
        let y = rat(yn, yd);
        let w = LoopWeights::new(x.clone(), y.clone(), rat(1, 1), rat(1, 1));
        let e = |k: usize| generator_matrix(n, s, Some(k), &w).unwrap();
        let b = generator_matrix(n, s, None, &w).unwrap();
        let ei = e(i);

        prop_assert_eq!(matrix::mul(&ei, &ei), matrix::scale(&ei, &x));
        prop_assert_eq!(matrix::mul(&b, &b), b.clone());
        if i == 1 {
            prop_assert_eq!(mul3(&ei, &b, &ei), matrix::scale(&ei, &y));
        } else {
            prop_assert_eq!(matrix::mul(&ei, &b), matrix::mul(&b, &ei));
        }
        let ej = e(j);
        if i.abs_diff(j) == 1 {
            prop_assert_eq!(mul3(&ei, &ej, &ei), ei.clone());
        } else if i.abs_diff(j) > 1 {
            prop_assert_eq!(matrix::mul(&ei, &ej), matrix::mul(&ej, &ei));
        }
    }

    #[test]
    fn symmetrizer_is_an_idempotent_killed_by_its_generators(k in 1usize..=5, xn in 3i64..12, xd in 2i64..5) {
        let x = rat(xn, xd);
        let module = LinkModule::new(k, x);
        let s = match module.symmetrizer(k, 0) {
            Ok(s) => s,
            Err(Error::DegenerateQNumber(_)) => return Err(TestCaseError::reject("q-number vanishes")),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        prop_assert_eq!(matrix::mul(&s, &s), s.clone());
        for i in 1..k {
            prop_assert!(matrix::mul(module.e(i), &s).iter().flatten().all(|v| v.is_zero()));
            prop_assert!(matrix::mul(&s, module.e(i)).iter().flatten().all(|v| v.is_zero()));
        }
    }
}
