use pfint::backends::FiniteSpace;
use pfint::expr::{Expr, Scalar};
use pfint::extension::ExtendedMeasure;
use pfint::functions::{dyadic_approx, leq, mono_limit_down, mono_limit_up, simplify, Fun, FunError, FunStream, Truth};
use pfint::integration::{check_fatou, integrate, IntegrateOptions};
use pfint::syntax::{parse_fun, parse_fun_in, print_fun};
use pfint::term::Term;
use proptest::prelude::*;
use std::sync::Arc;

fn atoms(a: i64, b: i64) -> Term {
    Term::cyl(Expr::int(1), Expr::int(a), Expr::int(b))
}

fn finite() -> ExtendedMeasure {
    ExtendedMeasure::new(Arc::new(FiniteSpace::uniform(6)))
}

fn simple_leaf() -> impl Strategy<Value = Fun> {
    (0i64..6, 0i64..6, 0i64..50, 1i64..8).prop_map(|(a, b, p, q)| {
        Fun::scale(Expr::ratio(p, q), &Fun::indicator(&atoms(a.min(b), a.max(b) + 1)))
    })
}

fn combination() -> impl Strategy<Value = Fun> {
    simple_leaf().prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, g)| Fun::sum(&f, &g)),
            (inner.clone(), inner.clone()).prop_map(|(f, g)| Fun::max(&f, &g)),
            (inner.clone(), inner.clone()).prop_map(|(f, g)| Fun::min(&f, &g)),
            (inner.clone(), inner).prop_map(|(f, g)| Fun::monus(&f, &g)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dyadic_ladder_increases_below_the_function(f in combination(), n in 0u64..6) {
        let mu = finite();
        let lo = Fun::simple(dyadic_approx(&f, n)).unwrap();
        let hi = Fun::simple(dyadic_approx(&f, n + 1)).unwrap();
        prop_assert_eq!(leq(&lo, &hi, &mu, 8).unwrap(), Truth::True);
        prop_assert_eq!(leq(&hi, &f, &mu, 8).unwrap(), Truth::True);
    }

    #[test]
    fn printed_functions_parse_back(f in combination()) {
        let text = print_fun(&f);
        prop_assert_eq!(parse_fun(&text).unwrap(), f, "{}", text);
    }

    #[test]
    fn simplification_keeps_the_integral(f in combination()) {
        let mu = finite();
        let opts = IntegrateOptions { eps: 1e-12, ..IntegrateOptions::default() };
        let a = integrate(&f, &mu, &opts).unwrap();
        let b = integrate(&simplify(&f), &mu, &opts).unwrap();
        prop_assert!((a.mid() - b.mid()).abs() <= 1e-12);
    }
}

#[test]
fn dyadic_levels_of_a_constant() {
    let pi = Fun::constant(Expr::float(std::f64::consts::PI));
    assert_eq!(dyadic_approx(&pi, 2).parts, vec![(Term::one(), Scalar::int(2))]);
    assert_eq!(dyadic_approx(&pi, 3).parts, vec![(Term::one(), Scalar::int(3))]);
    assert_eq!(dyadic_approx(&pi, 6).parts, vec![(Term::one(), Scalar::ratio(201, 64))]);
}

#[test]
fn monotone_limits_check_direction() {
    let mu = finite();
    let g = Fun::indicator(&atoms(0, 3));
    let n = Expr::var("n");
    let up = FunStream::new("n", Expr::int(1), Fun::scale(Expr::int(1).sub(&n.pow2_neg()), &g));
    let lim = mono_limit_up(up.clone(), &mu, 8).unwrap();
    assert_eq!(leq(&lim, &g, &mu, 8).unwrap(), Truth::True);
    assert_eq!(leq(&g, &lim, &mu, 8).unwrap(), Truth::True);
    match mono_limit_down(up, &mu, 8) {
        Err(FunError::NotMonotone { index: 1 }) => {}
        other => panic!("{other:?}"),
    }
}

#[test]
fn fatou_is_strict_for_alternating_indicators() {
    let mu = finite();
    let f = parse_fun("liminf(n in 1.., if(mod(n, 2) == 0, ind(cyl(1, 0, 3)), ind(!cyl(1, 0, 3))))").unwrap();
    let r = integrate(&f, &mu, &IntegrateOptions::default()).unwrap();
    assert_eq!((r.lo, r.hi), (0.0, 0.0));
    let alt = FunStream::new(
        "n",
        Expr::int(1),
        parse_fun_in("if(mod(n, 2) == 0, ind(cyl(1, 0, 3)), ind(!cyl(1, 0, 3)))", &["n"]).unwrap(),
    );
    let report = check_fatou(&alt, &mu, &IntegrateOptions::default(), 32).unwrap();
    assert!(report.holds && (report.margin - 0.5).abs() < 1e-12, "{report:?}");
}
