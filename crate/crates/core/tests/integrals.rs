use num_rational::BigRational;
use num_traits::ToPrimitive;
use pfint::backends::{Density, FiniteSpace, ProductBackend, UnitInterval};
use pfint::expr::{Expr, Scalar};
use pfint::extension::ExtendedMeasure;
use pfint::functions::{ComplexMeasurable, ComplexStream, Fun, RealMeasurable, SimpleFunction};
use pfint::integration::{
    check_dominated, integrate, integrate_best, integrate_complex, integrate_real, integrate_simple,
    IntegrateOptions, IntegrationError,
};
use pfint::term::Term;
use proptest::prelude::*;
use std::sync::Arc;

const ATOMS: usize = 5;

fn atom(i: usize) -> Term {
    Term::cyl(Expr::int(1), Expr::int(i as i64), Expr::int(i as i64 + 1))
}

fn space(raw: &[u32]) -> (FiniteSpace, Vec<BigRational>) {
    let total: u32 = raw.iter().sum();
    let w: Vec<BigRational> = raw.iter().map(|&x| BigRational::new(x.into(), total.into())).collect();
    (FiniteSpace::new(w.clone()).unwrap(), w)
}

fn exact() -> IntegrateOptions {
    IntegrateOptions {
        eps: 1e-12,
        ..IntegrateOptions::default()
    }
}

/// Value `p/q` on the atoms of each mask not claimed by an earlier mask, 0 elsewhere.
fn simple_on_atoms(values: &[(u8, i64, i64)]) -> Fun {
    let mut parts = Vec::new();
    let mut covered = Term::zero();
    for &(mask, p, q) in values {
        let set = Term::or((0..ATOMS).filter(|i| mask >> i & 1 == 1).map(atom).collect()).minus(&covered);
        covered = covered.or2(&set);
        parts.push((set, Scalar::ratio(p, q)));
    }
    parts.push((covered.not(), Scalar::int(0)));
    Fun::simple(SimpleFunction::new(parts)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn simple_integral_is_the_weighted_sum(
        raw in prop::collection::vec(1u32..10, ATOMS),
        values in prop::collection::vec((1u8..32, 1i64..40, 1i64..8), 1..5),
    ) {
        let (fs, w) = space(&raw);
        // the first part containing an atom decides its value
        let mut per_atom: Vec<Option<BigRational>> = vec![None; ATOMS];
        for &(mask, p, q) in &values {
            for (i, slot) in per_atom.iter_mut().enumerate() {
                if mask >> i & 1 == 1 && slot.is_none() {
                    *slot = Some(BigRational::new(p.into(), q.into()));
                }
            }
        }
        let brute: BigRational = per_atom
            .iter()
            .zip(&w)
            .map(|(v, wi)| v.clone().unwrap_or_else(|| BigRational::from_integer(0.into())) * wi)
            .sum();
        let f = simple_on_atoms(&values);
        let mu = ExtendedMeasure::new(Arc::new(fs));
        let r = integrate(&f, &mu, &exact()).unwrap();
        let b = brute.to_f64().unwrap();
        prop_assert!(r.lo <= b + 1e-12 && b - 1e-12 <= r.hi, "{} vs {}", r, b);
        prop_assert!(r.width() <= 1e-12);
    }

    #[test]
    fn sums_and_scales_are_linear(
        raw in prop::collection::vec(1u32..10, ATOMS),
        a in prop::collection::vec((1u8..32, 0i64..20, 1i64..5), 1..4),
        b in prop::collection::vec((1u8..32, 0i64..20, 1i64..5), 1..4),
        c in 0i64..9,
    ) {
        let (fs, _) = space(&raw);
        let mu = ExtendedMeasure::new(Arc::new(fs));
        let f = simple_on_atoms(&a);
        let g = simple_on_atoms(&b);
        let i = |h: &Fun| integrate(h, &mu, &exact()).unwrap().mid();
        let lhs = i(&Fun::sum(&Fun::scale(Expr::int(c), &f), &g));
        prop_assert!((lhs - (c as f64) * i(&f) - i(&g)).abs() <= 1e-9);
    }
}

#[test]
fn simple_integral_by_hand() {
    let (fs, _) = space(&[1, 1, 2, 4, 2]);
    let mu = ExtendedMeasure::new(Arc::new(fs));
    let s = SimpleFunction::new(vec![
        (atom(0).or2(&atom(1)), Scalar::int(3)),
        (atom(3), Scalar::ratio(1, 2)),
        (Term::or(vec![atom(2), atom(4)]), Scalar::int(0)),
    ]);
    // 3·(1/10 + 1/10) + (1/2)(4/10)
    let r = integrate_simple(&s, &mu, 1e-12, 8).unwrap();
    assert!((r.lo - 0.8).abs() < 1e-15 && (r.hi - 0.8).abs() < 1e-15, "{r}");
}

#[test]
fn signed_and_complex_integrals() {
    let mu = ExtendedMeasure::new(Arc::new(FiniteSpace::uniform(4)));
    let u = RealMeasurable::from_signed_simple(&[
        (atom(0), Scalar::int(4)),
        (atom(1), Scalar::int(-2)),
        (atom(2).or2(&atom(3)), Scalar::ratio(-1, 2)),
    ]);
    // (4 − 2 − 1/2 − 1/2) / 4
    let r = integrate_real(&u, &mu, &exact()).unwrap();
    assert!((r.mid() - 0.25).abs() < 1e-12, "{r}");
    let abs = integrate(&u.abs(), &mu, &exact()).unwrap();
    assert!((abs.mid() - 1.75).abs() < 1e-12, "{abs}");
    let v = u.scale(&BigRational::new((-3).into(), 1.into()));
    let z = integrate_complex(&ComplexMeasurable::new(u.clone(), v), &mu, &exact()).unwrap();
    assert!((z.re.mid() - 0.25).abs() < 1e-12 && (z.im.mid() + 0.75).abs() < 1e-12);
}

#[test]
fn one_plus_reciprocal_is_dominated() {
    let mu = ExtendedMeasure::new(Arc::new(FiniteSpace::uniform(4)));
    let u = RealMeasurable::from_signed_simple(&[
        (atom(0).or2(&atom(1)), Scalar::int(1)),
        (atom(2).or2(&atom(3)), Scalar::int(-3)),
    ]);
    let f = ComplexMeasurable::real(u);
    let g = Fun::scale(Expr::int(2), &f.abs());
    let fs = ComplexStream::new(1, |n| {
        let c = BigRational::new((n + 1).into(), n.into());
        ComplexMeasurable::new(f.re.scale(&c), f.im.scale(&c))
    });
    let r = check_dominated(&fs, &g, &f, &mu, &exact(), 32).unwrap();
    assert!(r.decreasing);
    // ∫|fₙ − f| = ∫|f| / n = 2 / n
    for s in &r.samples {
        assert!((s.l1.mid() - 2.0 / s.n as f64).abs() < 1e-12, "{s:?}");
    }
    assert!((r.final_gap - 1.0 / 32.0).abs() < 1e-12, "{}", r.final_gap);
}

#[test]
fn lebesgue_integral_of_the_identity() {
    let mu = ExtendedMeasure::new(Arc::new(UnitInterval));
    let opts = IntegrateOptions {
        max_level: 10,
        bound: Some(1.0),
        ..IntegrateOptions::default()
    };
    let r = integrate_best(&Fun::coord(Expr::int(1)), &mu, &opts).unwrap();
    assert!(r.contains(0.5) && r.width() <= 2f64.powi(-9), "{r}");
    let capped = integrate_best(&Fun::min(&Fun::coord(Expr::int(1)), &Fun::constant(Expr::ratio(1, 2))), &mu, &opts).unwrap();
    // ∫ min(x, 1/2) = 1/8 + 1/4
    assert!(capped.contains(0.375), "{capped}");
}

#[test]
fn heavy_tails_are_not_integrable() {
    let mu = ExtendedMeasure::new(Arc::new(
        ProductBackend::new(vec![Density::Cauchy {
            location: 0.0,
            scale: 1.0,
        }])
        .unwrap(),
    ));
    let opts = IntegrateOptions {
        max_level: 6,
        budget: 12,
        ..IntegrateOptions::default()
    };
    match integrate_real(&RealMeasurable::coordinate(Expr::int(1)), &mu, &opts) {
        Err(IntegrationError::NotIntegrable { .. }) => {}
        other => panic!("{other:?}"),
    }
}
