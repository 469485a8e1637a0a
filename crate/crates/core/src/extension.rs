//! Evaluation of the σ-additive extension of a backend's `μ₀`.
//!
//! The value of the extension on a σ-term is the limit of `μ₀` on its finite
//! truncations, so evaluation is demand-driven: truncate every stream at
//! depth `N`, measure the finite lower and upper elements with the backend,
//! add the tail slack, and double `N` until the enclosure is narrow enough or
//! the budget runs out. Each round's enclosure is sound on its own, so rounds
//! are intersected and the cache only ever shrinks.

use crate::backends::{BackendError, GeneratorBackend};
use crate::interval::Interval;
use crate::term::{normalize, sandwich, Term, TermError, DEFAULT_DEPTH_CAP};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};
use thiserror::Error;

pub const DEFAULT_NULL_THRESHOLD: f64 = 1e-12;

/// Certified enclosure of `μ(t)` together with the truncation depth reached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureInterval {
    pub lo: f64,
    pub hi: f64,
    pub effort: u64,
}

impl MeasureInterval {
    pub fn interval(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for MeasureInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}] (depth {})", self.lo, self.hi, self.effort)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("budget exhausted before reaching the tolerance; best enclosure {best}")]
    BudgetExhausted { best: MeasureInterval },
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Term(#[from] TermError),
}

impl MeasureError {
    pub fn is_depth_cap(&self) -> bool {
        matches!(self, MeasureError::Term(TermError::DepthCapExceeded { .. }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Nullity {
    Null,
    NonNull,
    Unknown,
}

#[derive(Clone, Copy, Debug)]
struct Cached {
    interval: Interval,
    depth: u64,
}

/// The extension `μ` of a backend, with a monotone cache of enclosures.
pub struct ExtendedMeasure {
    backend: Arc<dyn GeneratorBackend>,
    cache: RwLock<HashMap<Term, Cached>>,
    depth_cap: usize,
    null_threshold: f64,
}

impl ExtendedMeasure {
    pub fn new(backend: Arc<dyn GeneratorBackend>) -> Self {
        ExtendedMeasure {
            backend,
            cache: RwLock::new(HashMap::new()),
            depth_cap: DEFAULT_DEPTH_CAP,
            null_threshold: DEFAULT_NULL_THRESHOLD,
        }
    }

    pub fn with_depth_cap(mut self, cap: usize) -> Self {
        self.depth_cap = cap;
        self
    }

    pub fn with_null_threshold(mut self, threshold: f64) -> Self {
        self.null_threshold = threshold;
        self
    }

    pub fn backend(&self) -> &Arc<dyn GeneratorBackend> {
        &self.backend
    }

    pub fn null_threshold(&self) -> f64 {
        self.null_threshold
    }

    /// Enclosure of width at most `eps`, or `BudgetExhausted` carrying the
    /// best enclosure found with truncation depth at most `budget`.
    pub fn eval_measure(&self, t: &Term, eps: f64, budget: u64) -> Result<MeasureInterval, MeasureError> {
        let r = self.refine(t, budget, &|i: &Interval| i.width() <= eps)?;
        if r.width() <= eps {
            Ok(r)
        } else {
            Err(MeasureError::BudgetExhausted { best: r })
        }
    }

    /// Best enclosure within the budget, stopping early at width `eps`.
    pub fn bounds(&self, t: &Term, eps: f64, budget: u64) -> Result<MeasureInterval, MeasureError> {
        self.refine(t, budget, &|i: &Interval| i.width() <= eps)
    }

    /// `Null` once the upper bound drops to the threshold, `NonNull` once the
    /// lower bound is positive.
    pub fn is_null(&self, t: &Term, budget: u64) -> Result<Nullity, MeasureError> {
        let thr = self.null_threshold;
        let r = self.refine(t, budget, &|i: &Interval| i.hi <= thr || i.lo > 0.0)?;
        Ok(if r.hi <= thr {
            Nullity::Null
        } else if r.lo > 0.0 {
            Nullity::NonNull
        } else {
            Nullity::Unknown
        })
    }

    fn refine(
        &self,
        t: &Term,
        budget: u64,
        done: &dyn Fn(&Interval) -> bool,
    ) -> Result<MeasureInterval, MeasureError> {
        t.check_depth(self.depth_cap)?;
        let t = normalize(t);
        if t.is_finite() {
            if !t.is_closed() {
                return Err(TermError::FreeVariable(t.free_vars()[0].to_string()).into());
            }
            let i = self.backend.mu0(&t)?.clamp_unit();
            return Ok(MeasureInterval {
                lo: i.lo,
                hi: i.hi,
                effort: 0,
            });
        }
        let cached = self.cache.read().expect("cache poisoned").get(&t).copied();
        let (mut best, mut depth) = match cached {
            Some(c) => (c.interval, c.depth),
            None => (Interval::UNIT, 0),
        };
        let budget = budget.max(1);
        let mut n = 1u64;
        while !done(&best) && depth < budget {
            if n > depth {
                let round = self.round(&t, n)?;
                best = best.intersect(&round).unwrap_or(round);
                depth = n;
            }
            if n == budget {
                break;
            }
            n = (n * 2).min(budget);
        }
        let mut cache = self.cache.write().expect("cache poisoned");
        let entry = cache.entry(t).or_insert(Cached {
            interval: best,
            depth,
        });
        if let Some(i) = entry.interval.intersect(&best) {
            entry.interval = i;
        }
        entry.depth = entry.depth.max(depth);
        let out = entry.interval;
        Ok(MeasureInterval {
            lo: out.lo,
            hi: out.hi,
            effort: entry.depth,
        })
    }

    fn round(&self, t: &Term, n: u64) -> Result<Interval, MeasureError> {
        let backend = &self.backend;
        let sw = sandwich(t, n, &|s, is_join| backend.infer_tail(s, is_join))?;
        let lower = backend.mu0(&sw.lower)?;
        let upper = backend.mu0(&sw.upper)?;
        let lo = (lower.lo - sw.lower_slack).max(0.0);
        let hi = (upper.hi + sw.upper_slack).min(1.0);
        Ok(if lo <= hi {
            Interval::new(lo, hi)
        } else {
            // only rounding of the two enclosures can cross them
            Interval::new(hi, lo)
        })
    }
}

/// Finite-additivity spot check of `μ₀` on sampled disjoint pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct AdditivityReport {
    pub backend: String,
    pub samples: usize,
    pub violations: usize,
    /// Largest distance of a residual enclosure from 0.
    pub max_gap: f64,
    /// Largest residual enclosure width.
    pub max_width: f64,
    pub worst: Option<String>,
    pub errors: usize,
}

impl AdditivityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.errors == 0
    }
}

fn random_combo(backend: &dyn GeneratorBackend, rng: &mut dyn RngCore) -> Term {
    let k = rng.gen_range(1..=3);
    let mut acc = backend.random_generator(rng);
    for _ in 1..k {
        let mut g = backend.random_generator(rng);
        if rng.gen_bool(0.3) {
            g = g.not();
        }
        acc = if rng.gen_bool(0.5) { acc.and2(&g) } else { acc.or2(&g) };
    }
    acc
}

/// Samples `a`, `b` from random combinations of one to three generators and
/// checks `μ₀(x ∨ b) = μ₀(x) + μ₀(b)` for the disjoint `x = a ∧ ¬b`. A
/// violation is a residual enclosure that misses 0 by more than a few ulps.
pub fn check_additivity(backend: &dyn GeneratorBackend, samples: usize, seed: u64) -> AdditivityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AdditivityReport {
        backend: backend.name(),
        samples,
        violations: 0,
        max_gap: 0.0,
        max_width: 0.0,
        worst: None,
        errors: 0,
    };
    let mut worst_gap = -1.0;
    for _ in 0..samples {
        let a = random_combo(backend, &mut rng);
        let b = random_combo(backend, &mut rng);
        let x = a.minus(&b);
        let measured = (|| -> Result<Interval, BackendError> {
            Ok(backend.mu0(&x.or2(&b))? - backend.mu0(&x)? - backend.mu0(&b)?)
        })();
        let residual = match measured {
            Ok(r) => r,
            Err(_) => {
                report.errors += 1;
                continue;
            }
        };
        let gap = residual.gap(&Interval::ZERO);
        report.max_width = report.max_width.max(residual.width());
        report.max_gap = report.max_gap.max(gap);
        if gap > 4.0 * f64::EPSILON {
            report.violations += 1;
        }
        if gap > worst_gap {
            worst_gap = gap;
            report.worst = Some(format!("a = {x}, b = {b}, residual {residual}"));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{Corrupted, FiniteSpace, GaussianBackend};
    use crate::expr::Expr;
    use crate::term::Stream;

    fn gauss() -> ExtendedMeasure {
        ExtendedMeasure::new(Arc::new(GaussianBackend))
    }

    #[test]
    fn complement_arithmetic() {
        let m = gauss();
        let t = Term::cyl(Expr::int(1), Expr::int(-1), Expr::int(2));
        let a = m.eval_measure(&t, 1e-12, 4).unwrap();
        let b = m.eval_measure(&t.not(), 1e-12, 4).unwrap();
        assert!(Interval::new(a.lo + b.lo, a.hi + b.hi).contains(1.0));
    }

    #[test]
    fn bare_join_without_tail_stays_open() {
        // ⋁ cyl(1, n, n + 1): disjoint, total mass Φ̄(1), no recognised tail
        let body = Term::cyl(Expr::int(1), Expr::var("n"), Expr::var("n").add(&Expr::int(1)));
        let t = Term::join(Stream::new("n", Expr::int(1), body));
        let m = gauss();
        let r = m.bounds(&t, 1e-9, 16).unwrap();
        assert!(r.lo > 0.158 && r.lo <= 0.1587 && r.hi == 1.0, "{r}");
        match m.eval_measure(&t, 1e-9, 16) {
            Err(MeasureError::BudgetExhausted { best }) => assert_eq!(best.lo, r.lo),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cache_only_shrinks() {
        let m = gauss();
        let body = Term::cyl(Expr::var("n"), Expr::call(crate::expr::Func::GaussQuantile, vec![Expr::var("n")]), Expr::inf());
        let t = Term::join(Stream::new("n", Expr::int(1), body));
        let coarse = m.bounds(&t, 0.0, 4).unwrap();
        let fine = m.bounds(&t, 0.0, 16).unwrap();
        let again = m.bounds(&t, 0.0, 2).unwrap();
        assert!(coarse.interval().contains_interval(&fine.interval()));
        assert_eq!(again, fine);
    }

    #[test]
    fn nullity() {
        let m = ExtendedMeasure::new(Arc::new(FiniteSpace::uniform(4)));
        let a = Term::cyl(Expr::int(1), Expr::int(0), Expr::int(2));
        assert_eq!(m.is_null(&a.xor(&a), 4).unwrap(), Nullity::Null);
        assert_eq!(m.is_null(&Term::one(), 4).unwrap(), Nullity::NonNull);
    }

    #[test]
    fn additivity_flags_corruption() {
        assert!(check_additivity(&FiniteSpace::uniform(5), 200, 1).passed());
        assert!(!check_additivity(&Corrupted(FiniteSpace::uniform(5)), 200, 1).passed());
    }
}
