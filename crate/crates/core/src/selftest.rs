//! Invariant suites runnable against any backend.

use crate::backends::GeneratorBackend;
use crate::boolean::{BoolElem, FiniteBoolAlgebra};
use crate::expr::{CmpOp, Expr, Func, Pred};
use crate::extension::{check_additivity, ExtendedMeasure};
use crate::functions::{dyadic_approx, leq, simplify, Fun, FunStream, Truth};
use crate::integration::{check_fatou, integrate_best, IntegrateOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::sync::Arc;

pub const ADDITIVITY_SAMPLES: usize = 1000;
const FUNCTION_SAMPLES: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub cases: u64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, cases: u64, failures: Vec<String>) -> CheckResult {
        CheckResult {
            name: name.into(),
            passed: failures.is_empty(),
            cases,
            detail: failures.into_iter().take(3).collect::<Vec<_>>().join("; "),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub backend: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

type Elems = Vec<BoolElem>;

fn law(
    name: &str,
    max_atoms: usize,
    arity: usize,
    holds: impl Fn(&[&BoolElem]) -> Result<bool, crate::boolean::BoolError>,
) -> CheckResult {
    let mut cases = 0;
    let mut failures = Vec::new();
    for k in 0..=max_atoms {
        let alg = FiniteBoolAlgebra::new(k);
        let all: Elems = alg.elements().collect();
        let n = all.len();
        let total = n.pow(arity as u32);
        for code in 0..total {
            let mut c = code;
            let picked: Vec<&BoolElem> = (0..arity)
                .map(|_| {
                    let e = &all[c % n];
                    c /= n;
                    e
                })
                .collect();
            cases += 1;
            match holds(&picked) {
                Ok(true) => {}
                Ok(false) => failures.push(format!("{name} fails on {picked:?} ({k} atoms)")),
                Err(e) => failures.push(e.to_string()),
            }
        }
    }
    CheckResult::new(name, cases, failures)
}

/// Boolean-ring axioms, De Morgan and distributivity, exhaustively on every
/// power-set algebra with at most `max_atoms` atoms.
pub fn algebraic_laws(max_atoms: usize) -> Vec<CheckResult> {
    vec![
        law("ring axioms", max_atoms, 3, |e| {
            let (a, b, c) = (e[0], e[1], e[2]);
            let zero = a.algebra().zero();
            let one = a.algebra().one();
            Ok(a.symdiff(b)?.symdiff(c)? == a.symdiff(&b.symdiff(c)?)?
                && a.meet(b)?.meet(c)? == a.meet(&b.meet(c)?)?
                && a.symdiff(b)? == b.symdiff(a)?
                && a.meet(b)? == b.meet(a)?
                && a.meet(&b.symdiff(c)?)? == a.meet(b)?.symdiff(&a.meet(c)?)?
                && a.meet(a)? == *a
                && a.symdiff(a)? == zero
                && a.symdiff(&zero)? == *a
                && a.meet(&one)? == *a
                // the lattice and ring structures agree
                && a.join(b)? == a.symdiff(b)?.symdiff(&a.meet(b)?)?
                && a.complement() == a.symdiff(&one)?)
        }),
        law("de morgan", max_atoms, 2, |e| {
            let (a, b) = (e[0], e[1]);
            Ok(a.meet(b)?.complement() == a.complement().join(&b.complement())?
                && a.join(b)?.complement() == a.complement().meet(&b.complement())?)
        }),
        law("distributivity", max_atoms, 3, |e| {
            let (a, b, c) = (e[0], e[1], e[2]);
            // (a + ab + b)(c + cb + b) = ac + bac + b, i.e. (a ∨ b)(c ∨ b) = ac ∨ b
            let ring_join = |x: &BoolElem| -> Result<BoolElem, crate::boolean::BoolError> {
                x.symdiff(&x.meet(b)?)?.symdiff(b)
            };
            let ac = a.meet(c)?;
            Ok(ring_join(a)?.meet(&ring_join(c)?)? == ac.symdiff(&b.meet(&ac)?)?.symdiff(b)?
                && a.meet(&b.join(c)?)? == a.meet(b)?.join(&a.meet(c)?)?
                && a.join(&b.meet(c)?)? == a.join(b)?.meet(&a.join(c)?)?)
        }),
    ]
}

fn random_simple(backend: &dyn GeneratorBackend, rng: &mut ChaCha8Rng) -> Fun {
    let value = |rng: &mut ChaCha8Rng| Expr::ratio(rng.gen_range(1..=6), 2);
    let a = Fun::scale(value(rng), &Fun::indicator(&backend.random_generator(rng)));
    let b = Fun::scale(value(rng), &Fun::indicator(&backend.random_generator(rng)));
    Fun::sum(&a, &b)
}

fn truth_failure(name: &str, t: Truth) -> Option<String> {
    match t {
        Truth::True => None,
        other => Some(format!("{name}: {other:?}")),
    }
}

fn convergence_checks(mu: &ExtendedMeasure, seed: u64) -> Vec<CheckResult> {
    let backend = Arc::clone(mu.backend());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = IntegrateOptions {
        eps: 1e-9,
        budget: 16,
        ..IntegrateOptions::default()
    };
    let budget = opts.budget;
    let mut ladder = Vec::new();
    let mut linear = Vec::new();
    let mut monotone = Vec::new();
    let mut fatou = Vec::new();
    for sample in 0..FUNCTION_SAMPLES {
        let f = random_simple(&*backend, &mut rng);
        let g = random_simple(&*backend, &mut rng);

        let mut prev = -1.0;
        for n in 1..=4u64 {
            let lo = Fun::simple(dyadic_approx(&f, n)).expect("non-negative");
            let hi = Fun::simple(dyadic_approx(&f, n + 1)).expect("non-negative");
            match leq(&lo, &hi, mu, budget) {
                Ok(t) => ladder.extend(truth_failure(&format!("sample {sample}, level {n}"), t)),
                Err(e) => ladder.push(e.to_string()),
            }
            match integrate_best(&lo, mu, &opts) {
                Ok(r) if r.hi + 1e-12 < prev => ladder.push(format!("sample {sample}: integral fell at level {n}")),
                Ok(r) => prev = r.lo,
                Err(e) => ladder.push(e.to_string()),
            }
        }

        let parts = [&f, &g, &Fun::sum(&f, &g)].map(|h| integrate_best(h, mu, &opts));
        match parts {
            [Ok(a), Ok(b), Ok(s)] => {
                let gap = (s.mid() - a.mid() - b.mid()).abs();
                let slack = s.width() + a.width() + b.width() + 4.0 * mu.null_threshold();
                if gap > slack {
                    linear.push(format!("sample {sample}: gap {gap:e} exceeds widths {slack:e}"));
                }
            }
            [a, b, s] => linear.extend([a, b, s].into_iter().filter_map(|r| r.err()).map(|e| e.to_string())),
        }

        // scale(1 − 2^-n, f) increases to f
        let n = Expr::var("n");
        let stream = FunStream::new("n", Expr::int(1), Fun::scale(Expr::int(1).sub(&n.pow2_neg()), &f));
        let target = integrate_best(&simplify(&Fun::sup(stream.clone())), mu, &opts);
        let mut prev = -1.0;
        let mut last = None;
        for k in 0..8 {
            match integrate_best(&stream.at(k), mu, &opts) {
                Ok(r) => {
                    if r.lo + 1e-12 < prev {
                        monotone.push(format!("sample {sample}: lower bound fell at {k}"));
                    }
                    prev = r.lo;
                    last = Some(r);
                }
                Err(e) => monotone.push(e.to_string()),
            }
        }
        if let (Ok(t), Some(l)) = (target, last) {
            // the 8th element is within 2^-8 of the limit
            if l.lo > t.hi + 1e-12 || t.lo - l.hi > (t.hi * 2f64.powi(-8)) + 1e-9 {
                monotone.push(format!("sample {sample}: limit {t} inconsistent with {l}"));
            }
        }

        let a = backend.random_generator(&mut rng);
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
        match check_fatou(&alt, mu, &opts, 16) {
            Ok(r) if r.holds => {}
            Ok(r) => fatou.push(format!("sample {sample}: {} > {}", r.lhs, r.rhs)),
            Err(e) => fatou.push(e.to_string()),
        }
    }
    let n = FUNCTION_SAMPLES as u64;
    vec![
        CheckResult::new("dyadic ladder", 4 * n, ladder),
        CheckResult::new("linearity", n, linear),
        CheckResult::new("monotone convergence", n, monotone),
        CheckResult::new("fatou", n, fatou),
    ]
}

/// Exhaustive law checks, the additivity spot-check and convergence
/// properties of the integral on random functions built from the backend's
/// generators.
pub fn run_suite(backend: Arc<dyn GeneratorBackend>, seed: u64) -> SuiteReport {
    let mut checks = algebraic_laws(4);
    let add = check_additivity(&*backend, ADDITIVITY_SAMPLES, seed);
    checks.push(CheckResult {
        name: "additivity".into(),
        passed: add.passed(),
        cases: add.samples as u64,
        detail: format!(
            "{} violations, {} errors, max gap {:e}",
            add.violations, add.errors, add.max_gap
        ),
    });
    let mu = ExtendedMeasure::new(Arc::clone(&backend));
    checks.extend(convergence_checks(&mu, seed));
    SuiteReport {
        backend: backend.name(),
        checks,
    }
}
