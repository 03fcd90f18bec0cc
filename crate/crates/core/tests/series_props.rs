use num_complex::Complex64;
use proptest::prelude::*;

use saddle_core::multiseries::{
    compose_map, identity_map, invert_map, MultiIndex, TruncatedSeries,
};

const ORDER: u32 = 5;

fn coeff() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn series(d: usize) -> impl Strategy<Value = TruncatedSeries> {
    let idx = MultiIndex::all_up_to(d, ORDER);
    prop::collection::vec(coeff(), idx.len()).prop_map(move |cs| {
        TruncatedSeries::from_terms(d, ORDER, idx.iter().copied().zip(cs).collect::<Vec<_>>())
    })
}

/// Maps of the form `y + higher order`, with a small linear perturbation.
fn near_identity(d: usize) -> impl Strategy<Value = Vec<TruncatedSeries>> {
    prop::collection::vec(series(d), d).prop_map(move |fs| {
        fs.into_iter()
            .enumerate()
            .map(|(i, f)| {
                let mut g = f.scale(Complex64::new(0.3, 0.0));
                g.set(MultiIndex::zero(d), Complex64::new(0.0, 0.0));
                let unit = MultiIndex::unit(d, i);
                g.set(unit, g.coeff(&unit) + 1.0);
                g
            })
            .collect()
    })
}

fn close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol * a.max_abs().max(b.max_abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms((f, g, h) in (1usize..=3).prop_flat_map(|d| (series(d), series(d), series(d)))) {
        let fg = f.mul(&g).unwrap();
        prop_assert!(close(&fg, &g.mul(&f).unwrap(), 1e-13));
        let left = fg.mul(&h).unwrap();
        let right = f.mul(&g.mul(&h).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-12));
        let dist = f.mul(&g.add(&h).unwrap()).unwrap();
        let sum = fg.add(&f.mul(&h).unwrap()).unwrap();
        prop_assert!(close(&dist, &sum, 1e-12));
        prop_assert!(f.sub(&f).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn reversion_inverts(f in (1usize..=3).prop_flat_map(near_identity)) {
        let d = f.len();
        let g = invert_map(&f).unwrap();
        let id = identity_map(d, ORDER);
        for (a, b) in compose_map(&f, &g).unwrap().iter().zip(&id) {
            prop_assert!(close(a, b, 1e-11));
        }
        for (a, b) in compose_map(&g, &f).unwrap().iter().zip(&id) {
            prop_assert!(close(a, b, 1e-11));
        }
    }

    #[test]
    fn sqrt_squares_back(f in series(2)) {
        let f = f.add_constant(Complex64::new(3.0, 0.0) - f.constant_term());
        let r = f.sqrt_series(Complex64::new(3.0f64.sqrt(), 0.0)).unwrap();
        prop_assert!(close(&r.mul(&r).unwrap(), &f, 1e-12));
    }

    #[test]
    fn partials_commute(f in series(3)) {
        let a = f.diff(0).unwrap().diff(2).unwrap();
        let b = f.diff(2).unwrap().diff(0).unwrap();
        prop_assert!(close(&a, &b, 1e-14));
    }

    #[test]
    fn eval_is_multiplicative(f in series(2), g in series(2), x in -0.3f64..0.3, y in -0.3f64..0.3) {
        // polynomials of degree ≤ 2 multiply without truncation at order 5
        let f = f.truncate(2);
        let g = g.truncate(2);
        let f = TruncatedSeries::from_terms(2, ORDER, f.terms().map(|(k, c)| (*k, *c)).collect::<Vec<_>>());
        let g = TruncatedSeries::from_terms(2, ORDER, g.terms().map(|(k, c)| (*k, *c)).collect::<Vec<_>>());
        let p = [Complex64::new(x, 0.0), Complex64::new(y, 0.0)];
        let lhs = f.mul(&g).unwrap().eval(&p).unwrap();
        let rhs = f.eval(&p).unwrap() * g.eval(&p).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }
}
