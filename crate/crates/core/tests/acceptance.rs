//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines always print.

#![allow(clippy::excessive_precision)]

use num_rational::BigRational;
use pfint::backends::{
    Corrupted, Density, FiniteSpace, GaussianBackend, GeneratorBackend, McOracle, ProductBackend, SkewNormalBackend,
    UnitInterval,
};
use pfint::expr::{CmpOp, Expr, Func, Pred, Scalar};
use pfint::extension::{check_additivity, ExtendedMeasure};
use pfint::functions::{mono_limit_up, ComplexMeasurable, ComplexStream, Fun, FunStream, RealMeasurable, SimpleFunction};
use pfint::integration::{
    check_dominated, check_fatou, integrate, integrate_best, IntegrateOptions, IntegrationError,
};
use pfint::selftest::algebraic_laws;
use pfint::syntax::parse_term;
use pfint::term::Term;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

/// 1 − ∏_{n≥1}(1 − 2^-n), from a 200-term product in 50-digit arithmetic.
const ONE_MINUS_PRODUCT: f64 = 0.711_211_904_913_397_578_721_100_278_071;
/// 2Φ(1) − 1 = erf(1/√2).
const TWO_PHI_ONE_MINUS_ONE: f64 = 0.682_689_492_137_085_897_170_465_091_264;
/// P(Z ≤ 0) = 1/2 − arcsin(δ)/π for δ = 0.3, 0.6, 0.9.
const SKEW_HALF_LINE: [(f64, f64); 3] = [
    (0.3, 0.403_013_315_979_321_713_203_218_906_645),
    (0.6, 0.295_167_235_300_866_557_185_676_267_626),
    (0.9, 0.143_566_293_128_706_254_536_068_854_477),
];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: u64) -> Result<(), String> {
    ensure(
        elapsed <= Duration::from_secs(limit_s),
        format!("took {elapsed:.2?}, limit {limit_s}s"),
    )
}

fn cyl(i: i64, lo: Expr, hi: Expr) -> Term {
    Term::cyl(Expr::int(i), lo, hi)
}

/// Atoms `lo..hi` of a finite space.
fn atoms(lo: i64, hi: i64) -> Term {
    cyl(1, Expr::int(lo), Expr::int(hi))
}

/// A random simple function on the atoms `0..k` of coordinate 1.
fn random_simple(rng: &mut ChaCha8Rng, k: i64, max_num: i64) -> Fun {
    let cut = rng.gen_range(1..k);
    let a = atoms(0, cut);
    let b = atoms(rng.gen_range(0..k), k);
    let v = |rng: &mut ChaCha8Rng| Scalar::ratio(rng.gen_range(0..=max_num), rng.gen_range(1..=4));
    let parts = vec![
        (a.and2(&b), v(rng)),
        (a.minus(&b), v(rng)),
        (b.minus(&a), v(rng)),
        (a.or2(&b).not(), v(rng)),
    ];
    Fun::simple(SimpleFunction::new(parts)).expect("non-negative values")
}

fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> FiniteSpace {
    let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = raw.iter().sum();
    let weights: Vec<String> = raw.iter().map(|w| format!("{w}/{total}")).collect();
    FiniteSpace::parse(&weights).expect("weights sum to one")
}

fn c1_algebraic_laws() -> Outcome {
    let start = Instant::now();
    let checks = algebraic_laws(4);
    let elapsed = start.elapsed();
    for c in &checks {
        ensure(c.passed, format!("{}: {}", c.name, c.detail))?;
    }
    within(elapsed, 10)?;
    let cases: u64 = checks.iter().map(|c| c.cases).sum();
    Ok(format!("{cases} cases over algebras with up to 4 atoms in {elapsed:.2?}"))
}

fn c2_classical_compatibility() -> Outcome {
    let start = Instant::now();
    let mu = ExtendedMeasure::new(Arc::new(UnitInterval));
    let opts = IntegrateOptions {
        max_level: 12,
        ..IntegrateOptions::default()
    };
    let r = integrate_best(&Fun::coord(Expr::int(1)), &mu, &opts).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(r.effort == 12, format!("stopped at level {}", r.effort))?;
    ensure(r.contains(0.5), format!("{r} misses 1/2"))?;
    ensure(r.width() <= 2f64.powi(-10), format!("{r} wider than 2^-10"))?;
    within(elapsed, 5)?;
    Ok(format!("{r}, width {:e}, {elapsed:.2?}", r.width()))
}

fn c3_monotone_convergence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = IntegrateOptions {
        eps: 1e-12,
        ..IntegrateOptions::default()
    };
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let space = random_weights(&mut rng, 6);
        let mu = ExtendedMeasure::new(Arc::new(space));
        let g = random_simple(&mut rng, 6, 12);
        let n = Expr::var("n");
        let body = match trial % 3 {
            0 => Fun::scale(Expr::int(1).sub(&n.pow2_neg()), &g),
            1 => Fun::min(&g, &Fun::constant(n.div(&Expr::int(4)))),
            _ => Fun::approx(&g, n.clone()),
        };
        let stream = FunStream::new("n", Expr::int(1), body);
        let mut prev = f64::NEG_INFINITY;
        let mut last = None;
        for k in 0..64 {
            let r = integrate(&stream.at(k), &mu, &opts).map_err(|e| format!("trial {trial}: {e}"))?;
            ensure(r.lo >= prev, format!("trial {trial}: lower bound fell at {}", k + 1))?;
            prev = r.lo;
            last = Some(r);
        }
        let last = last.expect("64 elements");
        let limit = mono_limit_up(stream, &mu, 8).map_err(|e| format!("trial {trial}: {e}"))?;
        let lim = integrate(&limit, &mu, &opts).map_err(|e| format!("trial {trial}: {e}"))?;
        let gap = (lim.mid() - last.mid()).abs();
        let widths = lim.width() + last.width();
        ensure(
            gap <= widths + 1e-6 && widths <= 1e-6,
            format!("trial {trial}: limit {lim} vs element 64 {last}"),
        )?;
        worst = worst.max(gap);
    }
    Ok(format!("20 streams, largest gap at n = 64 {worst:e}"))
}

fn c4_linearity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let opts = IntegrateOptions {
        eps: 1e-12,
        ..IntegrateOptions::default()
    };
    let mut worst: f64 = 0.0;
    for pair in 0..50 {
        let mu = ExtendedMeasure::new(Arc::new(random_weights(&mut rng, 5)));
        let f = random_simple(&mut rng, 5, 20);
        let g = match pair % 3 {
            0 => random_simple(&mut rng, 5, 20),
            1 => Fun::max(&random_simple(&mut rng, 5, 20), &random_simple(&mut rng, 5, 20)),
            _ => Fun::monus(&random_simple(&mut rng, 5, 20), &random_simple(&mut rng, 5, 20)),
        };
        let i = |h: &Fun| integrate(h, &mu, &opts).map_err(|e| format!("pair {pair}: {e}"));
        let (a, b, s) = (i(&f)?, i(&g)?, i(&Fun::sum(&f, &g))?);
        let gap = (s.mid() - a.mid() - b.mid()).abs();
        let widths = s.width() + a.width() + b.width();
        ensure(gap <= widths + 1e-12, format!("pair {pair}: gap {gap:e}"))?;
        worst = worst.max(gap);
    }
    Ok(format!("50 pairs, largest |∫(f+g) − ∫f − ∫g| = {worst:e}"))
}

fn c5_fatou() -> Outcome {
    let mu = ExtendedMeasure::new(Arc::new(FiniteSpace::uniform(4)));
    let opts = IntegrateOptions::default();
    let a = atoms(0, 2);
    let even = Pred::new(
        Expr::call(Func::Mod, vec![Expr::var("n"), Expr::int(2)]),
        CmpOp::Eq,
        Expr::int(0),
    );
    let alt = FunStream::new(
        "n",
        Expr::int(1),
        Fun::cond(even, &Fun::indicator(&a), &Fun::indicator(&a.not())),
    );
    let r = check_fatou(&alt, &mu, &opts, 64).map_err(|e| e.to_string())?;
    ensure(r.lhs.hi <= 1e-9, format!("left side {}", r.lhs))?;
    ensure(
        (r.rhs.lo - 0.5).abs() <= 1e-9 && (r.rhs.hi - 0.5).abs() <= 1e-9,
        format!("right side {}", r.rhs),
    )?;
    ensure(r.holds && r.margin > 0.0, "strict inequality not witnessed")?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..5 {
        let g = random_simple(&mut rng, 4, 12);
        let n = Expr::var("n");
        let body = if trial % 2 == 0 {
            Fun::scale(Expr::int(1).sub(&n.pow2_neg()), &g)
        } else {
            Fun::min(&g, &Fun::constant(n.clone()))
        };
        let m = check_fatou(&FunStream::new("n", Expr::int(1), body), &mu, &opts, 64).map_err(|e| e.to_string())?;
        let gap = (m.lhs.mid() - m.rhs.mid()).abs();
        ensure(
            gap <= m.lhs.width() + m.rhs.width() + 1e-12,
            format!("monotone trial {trial}: {} vs {}", m.lhs, m.rhs),
        )?;
    }
    Ok(format!("alternating: left {} right {}; 5 monotone streams equal", r.lhs, r.rhs))
}

fn complex_base() -> ComplexMeasurable {
    let a = atoms(0, 1);
    let b = atoms(1, 3);
    let c = a.or2(&b).not();
    let re = RealMeasurable::from_signed_simple(&[
        (a.clone(), Scalar::int(2)),
        (b.clone(), Scalar::int(-1)),
        (c.clone(), Scalar::ratio(1, 2)),
    ]);
    let im = RealMeasurable::from_signed_simple(&[
        (a, Scalar::int(0)),
        (b, Scalar::int(3)),
        (c, Scalar::int(-4)),
    ]);
    ComplexMeasurable::new(re, im)
}

fn scaled(f: &ComplexMeasurable, c: &BigRational) -> ComplexMeasurable {
    ComplexMeasurable::new(f.re.scale(c), f.im.scale(c))
}

fn c6_dominated_convergence() -> Outcome {
    let mu = ExtendedMeasure::new(Arc::new(FiniteSpace::uniform(4)));
    let opts = IntegrateOptions {
        eps: 1e-12,
        ..IntegrateOptions::default()
    };
    let f = complex_base();
    let g = Fun::scale(Expr::int(2), &f.abs());
    let one = BigRational::from_integer(1.into());
    let two = BigRational::from_integer(2.into());
    let shrinking = ComplexStream::new(1, |n| scaled(&f, &(&one + num_traits::pow(two.recip(), n as usize))));
    let r = check_dominated(&shrinking, &g, &f, &mu, &opts, 64).map_err(|e| e.to_string())?;
    ensure(r.decreasing, "margins do not decrease")?;
    let margins: Vec<f64> = r.samples.iter().map(|s| s.l1.hi).collect();
    ensure(
        margins.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0),
        format!("margins not strictly shrinking: {margins:?}"),
    )?;
    ensure(r.final_gap <= 1e-6, format!("final gap {:e}", r.final_gap))?;

    let blowup = ComplexStream::new(1, |n| scaled(&f, &BigRational::from_integer(n.into())));
    match check_dominated(&blowup, &g, &f, &mu, &opts, 64) {
        Err(IntegrationError::DominationFails { index }) => Ok(format!(
            "{} samples, final |∫fₙ − ∫f| = {:e}; blow-up rejected at n = {index}",
            r.samples.len(),
            r.final_gap
        )),
        other => Err(format!("undominated stream not rejected: {other:?}")),
    }
}

fn c7_extension_evaluation() -> Outcome {
    let start = Instant::now();
    let mu = ExtendedMeasure::new(Arc::new(GaussianBackend::new()));
    let t = parse_term("Vee(n in 1.., cyl(n, c(n), inf))").map_err(|e| e.to_string())?;
    let r = mu.bounds(&t, 1e-3, 30).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(r.lo <= ONE_MINUS_PRODUCT && ONE_MINUS_PRODUCT <= r.hi, format!("{r} misses {ONE_MINUS_PRODUCT}"))?;
    ensure(r.width() <= 1e-3, format!("{r} wider than 1e-3"))?;
    within(elapsed, 10)?;
    Ok(format!("{r}, {elapsed:.2?}"))
}

fn c8_gaussian_values() -> Outcome {
    let mu = ExtendedMeasure::new(Arc::new(GaussianBackend::new()));
    let m = |t: &Term| mu.bounds(t, 1e-12, 8).map_err(|e| e.to_string());
    let half = m(&cyl(1, Expr::int(0), Expr::inf()))?;
    ensure(half.lo == 0.5 && half.hi == 0.5, format!("half line {half}"))?;
    let mid = m(&cyl(1, Expr::int(-1), Expr::int(1)))?;
    ensure(
        (mid.lo - TWO_PHI_ONE_MINUS_ONE).abs() <= 1e-9 && (mid.hi - TWO_PHI_ONE_MINUS_ONE).abs() <= 1e-9,
        format!("[-1, 1) gives {mid}"),
    )?;
    let quad = m(&cyl(1, Expr::int(0), Expr::inf()).and2(&cyl(2, Expr::int(0), Expr::inf())))?;
    ensure(
        (quad.lo - 0.25).abs() <= 1e-15 && (quad.hi - 0.25).abs() <= 1e-15,
        format!("quadrant {quad}"),
    )?;
    Ok(format!("half line {half}, [-1, 1) {mid}, quadrant {quad}"))
}

fn c9_skew_normal() -> Outcome {
    let boxes: [[(f64, f64); 2]; 5] = [
        [(f64::NEG_INFINITY, 0.0), (f64::NEG_INFINITY, f64::INFINITY)],
        [(-1.0, 0.5), (f64::NEG_INFINITY, f64::INFINITY)],
        [(0.5, f64::INFINITY), (f64::NEG_INFINITY, f64::INFINITY)],
        [(-0.5, 1.0), (0.0, f64::INFINITY)],
        [(f64::NEG_INFINITY, -1.0), (-1.0, 1.0)],
    ];
    let to_expr = |x: f64| -> Expr {
        if x == f64::INFINITY {
            Expr::inf()
        } else if x == f64::NEG_INFINITY {
            Expr::neg_inf()
        } else {
            Expr::constant(Scalar::Rat(BigRational::from_float(x).expect("finite")))
        }
    };
    let mut worst_z: f64 = 0.0;
    for (delta, expected) in SKEW_HALF_LINE {
        let backend = SkewNormalBackend::new(vec![delta]).map_err(|e| e.to_string())?;
        let oracle = McOracle::sample(&backend, 2, 1_000_000, 9);
        let mu = ExtendedMeasure::new(Arc::new(backend));
        for sides in boxes {
            let t = Term::and(
                sides
                    .iter()
                    .enumerate()
                    .map(|(k, (lo, hi))| cyl(k as i64 + 1, to_expr(*lo), to_expr(*hi)))
                    .collect(),
            );
            let q = mu.bounds(&t, 1e-9, 8).map_err(|e| e.to_string())?;
            let (p, se) = oracle.estimate(&sides);
            let z = (q.interval().mid() - p).abs() / se;
            ensure(z <= 3.0, format!("delta {delta}, box {sides:?}: quadrature {q}, simulation {p} ± {se:e}"))?;
            worst_z = worst_z.max(z);
        }
        let h = mu
            .bounds(&cyl(1, Expr::neg_inf(), Expr::int(0)), 1e-12, 8)
            .map_err(|e| e.to_string())?;
        ensure(
            h.lo - 1e-9 <= expected && expected <= h.hi + 1e-9,
            format!("delta {delta}: half line {h}, arcsine value {expected}"),
        )?;
    }

    let plain = ExtendedMeasure::new(Arc::new(SkewNormalBackend::new(vec![0.0]).map_err(|e| e.to_string())?));
    let gauss = ExtendedMeasure::new(Arc::new(GaussianBackend::new()));
    for t in [
        cyl(1, Expr::int(-1), Expr::ratio(1, 2)),
        cyl(1, Expr::int(0), Expr::inf()).and2(&cyl(2, Expr::int(-2), Expr::int(1))),
    ] {
        let a = plain.bounds(&t, 1e-12, 8).map_err(|e| e.to_string())?;
        let b = gauss.bounds(&t, 1e-12, 8).map_err(|e| e.to_string())?;
        ensure(
            (a.interval().mid() - b.interval().mid()).abs() <= 1e-6,
            format!("zero skew {a} vs Gaussian {b}"),
        )?;
    }

    for bad in [vec![1.0], vec![0.8, 0.6], vec![0.9, 0.5]] {
        ensure(
            SkewNormalBackend::new(bad.clone()).is_err(),
            format!("{bad:?} accepted"),
        )?;
    }
    Ok(format!("15 boxes within {worst_z:.2} standard errors; zero skew matches; invalid skew rejected"))
}

fn c10_additivity() -> Outcome {
    let backends: Vec<Arc<dyn GeneratorBackend>> = vec![
        Arc::new(GaussianBackend::new()),
        Arc::new(SkewNormalBackend::new(vec![0.6, 0.3]).map_err(|e| e.to_string())?),
        Arc::new(
            ProductBackend::new(vec![
                Density::Laplace {
                    location: 0.0,
                    scale: 1.0,
                },
                Density::StudentT {
                    location: 0.0,
                    scale: 1.0,
                    freedom: 3.0,
                },
            ])
            .map_err(|e| e.to_string())?,
        ),
        Arc::new(FiniteSpace::uniform(5)),
        Arc::new(UnitInterval),
    ];
    let mut names = Vec::new();
    for b in &backends {
        let r = check_additivity(&**b, 1000, 10);
        ensure(r.passed(), format!("{}: {} violations, max gap {:e}", r.backend, r.violations, r.max_gap))?;
        names.push(format!("{} (max gap {:.1e})", r.backend, r.max_gap));
    }
    let bad = check_additivity(&Corrupted(GaussianBackend::new()), 1000, 10);
    ensure(!bad.passed(), "corrupted backend not flagged")?;
    Ok(format!(
        "{}; corrupted fixture flagged with {} violations",
        names.join(", "),
        bad.violations
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("algebraic laws", c1_algebraic_laws),
        ("classical compatibility", c2_classical_compatibility),
        ("monotone convergence", c3_monotone_convergence),
        ("linearity", c4_linearity),
        ("fatou", c5_fatou),
        ("dominated convergence", c6_dominated_convergence),
        ("extension evaluation", c7_extension_evaluation),
        ("gaussian values", c8_gaussian_values),
        ("skew-normal gate", c9_skew_normal),
        ("additivity spot-check", c10_additivity),
    ];
    // optional criterion numbers select a subset; libtest flags are ignored
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        match run() {
            Ok(detail) => println!("criterion {:2} PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:2} FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
