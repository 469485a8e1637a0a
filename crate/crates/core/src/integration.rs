//! Lebesgue integrals against an extended measure.
//!
//! Simple functions integrate exactly up to the measure enclosures. A general
//! `f` is bracketed through the layer-cake identity `∫f = ∫₀^∞ μ(f > t) dt`:
//! on the grid `t_k = k/2ⁿ` the lower sum is the integral of the dyadic rung
//! `sₙ ≤ f`, and the matching upper sum is certified either by a declared bound
//! `f ≤ cap` or by a grid point where `μ(f ≤ t) = 1` is certified.

use crate::extension::{ExtendedMeasure, MeasureError};
use crate::functions::{
    leq, liminf, simplify, ComplexMeasurable, ComplexStream, Fun, FunError, FunStream, RealMeasurable,
    SimpleFunction, Truth,
};
use crate::interval::mul0;
use crate::expr::{Expr, Scalar};
use std::fmt;
use thiserror::Error;

/// Enclosure of an integral. `hi` may be `+∞`; signed integrals may be negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralResult {
    pub lo: f64,
    pub hi: f64,
    pub converged: bool,
    /// Highest ladder level evaluated, or the measure truncation depth for
    /// simple functions.
    pub effort: u64,
}

impl IntegralResult {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    fn with_eps(mut self, eps: f64) -> Self {
        self.converged = self.hi - self.lo <= eps || self.lo == self.hi;
        self
    }

    /// `self − other` in interval arithmetic.
    pub fn minus(&self, other: &IntegralResult) -> IntegralResult {
        IntegralResult {
            lo: self.lo - other.hi,
            hi: self.hi - other.lo,
            converged: self.converged && other.converged,
            effort: self.effort.max(other.effort),
        }
    }
}

impl fmt::Display for IntegralResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)?;
        if !self.converged {
            f.write_str(" (not converged)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("budget exhausted before reaching the tolerance; best enclosure {best}")]
    BudgetExhausted { best: IntegralResult },
    #[error("no certified upper bound: tail mass did not vanish and no bound was declared; lower bound {best}")]
    UnboundedTail { best: IntegralResult },
    #[error("function is not integrable: the integral of its {part} is not certifiably finite")]
    NotIntegrable { part: &'static str },
    #[error("domination fails at index {index}")]
    DominationFails { index: u64 },
    #[error("domination could not be decided at index {index}")]
    DominationUnknown { index: u64 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Fun(#[from] FunError),
}

impl IntegrationError {
    /// The sound partial enclosure carried by budget and tail failures.
    pub fn best(&self) -> Option<IntegralResult> {
        match self {
            IntegrationError::BudgetExhausted { best } | IntegrationError::UnboundedTail { best } => Some(*best),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub eps: f64,
    /// Truncation depth passed to the measure.
    pub budget: u64,
    /// Highest dyadic ladder level.
    pub max_level: u32,
    /// Declared bound `f ≤ cap` almost everywhere.
    pub bound: Option<f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            eps: 1e-6,
            budget: 30,
            max_level: 12,
            bound: None,
        }
    }
}

/// `Σ xᵢ·μ(aᵢ)` with `0·∞ = 0`.
pub fn integrate_simple(
    s: &SimpleFunction,
    mu: &ExtendedMeasure,
    eps: f64,
    budget: u64,
) -> Result<IntegralResult, IntegrationError> {
    let finite_mass: f64 = s
        .parts
        .iter()
        .filter(|(_, x)| x.is_finite())
        .map(|(_, x)| x.to_f64())
        .sum();
    let part_eps = eps / (2.0 * finite_mass.max(1.0) * s.parts.len().max(1) as f64);
    let (mut lo, mut hi, mut effort) = (0.0f64, 0.0f64, 0u64);
    for (a, x) in &s.parts {
        let m = mu.bounds(a, part_eps, budget)?;
        let x = x.to_f64();
        lo += mul0(x, m.lo);
        hi += mul0(x, m.hi);
        effort = effort.max(m.effort);
    }
    let r = IntegralResult {
        lo,
        hi: hi.max(lo),
        converged: false,
        effort,
    }
    .with_eps(eps);
    if r.converged {
        Ok(r)
    } else {
        Err(IntegrationError::BudgetExhausted { best: r })
    }
}

/// One rung of the ladder: `(lower, upper)` sums at grid `2^-n`.
fn ladder_rung(
    f: &Fun,
    mu: &ExtendedMeasure,
    n: u32,
    opts: &IntegrateOptions,
) -> Result<(f64, Option<f64>), IntegrationError> {
    let step = (-(n as f64)).exp2();
    let per = 1u64 << n;
    let (count, span) = match opts.bound {
        Some(cap) => ((cap * per as f64).ceil() as u64, cap),
        None => (n as u64 * per, n as f64),
    };
    let m_eps = opts.eps / (4.0 * span.max(1.0));
    let mut lower = 0.0;
    let mut upper = 0.0;
    for k in 0..=count {
        let t = Expr::ratio(k as i64, per as i64);
        let closed = mu.bounds(&f.level(&t), m_eps, opts.budget)?;
        let open = mu.bounds(&f.strict(&t), m_eps, opts.budget)?;
        // μ(f > t) ≤ μ(f ≥ t) ≤ μ(f > s) for s < t
        let above_lo = (1.0 - closed.hi).max(1.0 - open.hi).max(0.0);
        let above_hi = (1.0 - open.lo).min(1.0 - closed.lo).max(0.0);
        if k > 0 {
            lower += step * above_lo;
        }
        if closed.lo >= 1.0 {
            return Ok((lower, Some(upper)));
        }
        if k < count {
            upper += step * above_hi;
        }
    }
    match opts.bound {
        Some(_) => Ok((lower, Some(upper))),
        None => Ok((lower, None)),
    }
}

fn ladder_levels(max_level: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut n = 1;
    while n < max_level {
        out.push(n);
        n *= 2;
    }
    out.push(max_level.max(1));
    out
}

/// Per-level enclosures of the ladder, without intersecting across levels.
pub fn ladder_trace(
    f: &Fun,
    mu: &ExtendedMeasure,
    opts: &IntegrateOptions,
) -> Result<Vec<(u32, f64, Option<f64>)>, IntegrationError> {
    let f = simplify(f);
    ladder_levels(opts.max_level)
        .into_iter()
        .map(|n| ladder_rung(&f, mu, n, opts).map(|(lo, hi)| (n, lo, hi)))
        .collect()
}

/// `∫f dμ` for non-negative measurable `f`.
pub fn integrate(f: &Fun, mu: &ExtendedMeasure, opts: &IntegrateOptions) -> Result<IntegralResult, IntegrationError> {
    let f = simplify(f);
    if let Some(s) = f.as_simple() {
        return integrate_simple(&s, mu, opts.eps, opts.budget);
    }
    let mut best = IntegralResult {
        lo: 0.0,
        hi: f64::INFINITY,
        converged: false,
        effort: 0,
    };
    let mut tail_open = false;
    for n in ladder_levels(opts.max_level) {
        let (lo, hi) = ladder_rung(&f, mu, n, opts)?;
        best.lo = best.lo.max(lo);
        match hi {
            Some(hi) => best.hi = best.hi.min(hi),
            None => tail_open = true,
        }
        if best.hi < best.lo {
            // the two sums are both sound; crossing only comes from rounding
            std::mem::swap(&mut best.lo, &mut best.hi);
        }
        best.effort = n as u64;
        best = best.with_eps(opts.eps);
        if best.converged {
            return Ok(best);
        }
    }
    if tail_open && best.hi.is_infinite() {
        Err(IntegrationError::UnboundedTail { best })
    } else {
        Err(IntegrationError::BudgetExhausted { best })
    }
}

/// Best enclosure regardless of convergence; hard errors still propagate.
pub fn integrate_best(f: &Fun, mu: &ExtendedMeasure, opts: &IntegrateOptions) -> Result<IntegralResult, IntegrationError> {
    match integrate(f, mu, opts) {
        Ok(r) => Ok(r),
        Err(e) => e.best().ok_or(e),
    }
}

/// `∫u⁺ − ∫u⁻`.
pub fn integrate_real(
    u: &RealMeasurable,
    mu: &ExtendedMeasure,
    opts: &IntegrateOptions,
) -> Result<IntegralResult, IntegrationError> {
    let part = |f: &Fun, name: &'static str| match integrate(f, mu, opts) {
        Ok(r) if r.hi.is_finite() => Ok(r),
        Ok(_) | Err(IntegrationError::UnboundedTail { .. }) => Err(IntegrationError::NotIntegrable { part: name }),
        Err(IntegrationError::BudgetExhausted { best }) if best.hi.is_finite() => Ok(best),
        Err(IntegrationError::BudgetExhausted { .. }) => Err(IntegrationError::NotIntegrable { part: name }),
        Err(e) => Err(e),
    };
    let p = part(&u.pos, "positive part")?;
    let n = part(&u.neg, "negative part")?;
    let r = p.minus(&n);
    let converged = p.converged && n.converged && r.width() <= opts.eps;
    let r = IntegralResult { converged, ..r };
    if converged {
        Ok(r)
    } else {
        Err(IntegrationError::BudgetExhausted { best: r })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexIntegral {
    pub re: IntegralResult,
    pub im: IntegralResult,
}

impl ComplexIntegral {
    /// Upper bound of `|self − other|`.
    pub fn distance_hi(&self, other: &ComplexIntegral) -> f64 {
        let far = |a: &IntegralResult, b: &IntegralResult| (a.hi - b.lo).abs().max((a.lo - b.hi).abs());
        far(&self.re, &other.re).hypot(far(&self.im, &other.im))
    }
}

pub fn integrate_complex(
    f: &ComplexMeasurable,
    mu: &ExtendedMeasure,
    opts: &IntegrateOptions,
) -> Result<ComplexIntegral, IntegrationError> {
    Ok(ComplexIntegral {
        re: integrate_real(&f.re, mu, opts)?,
        im: integrate_real(&f.im, mu, opts)?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FatouReport {
    /// `∫ liminf fₙ`.
    pub lhs: IntegralResult,
    /// `min` of `∫fᵢ` over the window, standing in for `liminf ∫fₙ`.
    pub rhs: IntegralResult,
    pub window: Vec<(u64, IntegralResult)>,
    /// Certified gap `rhs.lo − lhs.hi`; positive when the inequality is strict.
    pub margin: f64,
    /// False only when `lhs.lo > rhs.hi`, a certified violation.
    pub holds: bool,
}

/// Evaluates both sides of Fatou's inequality with the right side taken over
/// the positions `[N − max(1, N/8), N]` of the stream.
pub fn check_fatou(
    s: &FunStream,
    mu: &ExtendedMeasure,
    opts: &IntegrateOptions,
    n: u64,
) -> Result<FatouReport, IntegrationError> {
    let lhs = integrate_best(&simplify(&liminf(s)), mu, opts)?;
    let from = n.saturating_sub((n / 8).max(1));
    let mut window = Vec::new();
    for k in from..=n {
        window.push((k, integrate_best(&s.at(k), mu, opts)?));
    }
    let rhs = window.iter().fold(
        IntegralResult {
            lo: f64::INFINITY,
            hi: f64::INFINITY,
            converged: true,
            effort: 0,
        },
        |acc, (_, r)| IntegralResult {
            lo: acc.lo.min(r.lo),
            hi: acc.hi.min(r.hi),
            converged: acc.converged && r.converged,
            effort: acc.effort.max(r.effort),
        },
    );
    Ok(FatouReport {
        margin: rhs.lo - lhs.hi,
        holds: lhs.lo <= rhs.hi,
        lhs,
        rhs,
        window,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominatedSample {
    pub n: u64,
    /// `∫|fₙ − f|`.
    pub l1: IntegralResult,
    /// Upper bound of `|∫fₙ − ∫f|`.
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominatedReport {
    pub samples: Vec<DominatedSample>,
    /// Whether the `l1` upper bounds never increase along the samples.
    pub decreasing: bool,
    pub final_gap: f64,
}

fn sample_points(start: u64, n: u64) -> Vec<u64> {
    let mut out = vec![start.max(1)];
    let mut k = 1u64;
    while k <= n {
        if k > start {
            out.push(k);
        }
        k *= 2;
    }
    if *out.last().unwrap() != n && n > start {
        out.push(n);
    }
    out
}

/// Checks `|fₙ| ≤ g` and `|f| ≤ g`, then reports `∫|fₙ − f|` and
/// `|∫fₙ − ∫f|` at `start` and the powers of two up to `n`.
pub fn check_dominated(
    fs: &ComplexStream<'_>,
    g: &Fun,
    f: &ComplexMeasurable,
    mu: &ExtendedMeasure,
    opts: &IntegrateOptions,
    n: u64,
) -> Result<DominatedReport, IntegrationError> {
    let points = sample_points(fs.start, n);
    let dominated = |h: &Fun, index: u64| -> Result<(), IntegrationError> {
        match leq(h, g, mu, opts.budget)? {
            Truth::True => Ok(()),
            Truth::False => Err(IntegrationError::DominationFails { index }),
            Truth::Unknown => Err(IntegrationError::DominationUnknown { index }),
        }
    };
    for &k in &points {
        dominated(&fs.at(k).abs(), k)?;
    }
    dominated(&f.abs(), u64::MAX)?;
    let target = integrate_complex(f, mu, opts)?;
    let mut samples = Vec::new();
    for &k in &points {
        let fk = fs.at(k);
        let l1 = integrate_best(&fk.abs_diff(f), mu, opts)?;
        let gap = integrate_complex(&fk, mu, opts)?.distance_hi(&target);
        samples.push(DominatedSample { n: k, l1, gap });
    }
    let decreasing = samples.windows(2).all(|w| w[1].l1.hi <= w[0].l1.hi);
    let final_gap = samples.last().map(|s| s.gap).unwrap_or(0.0);
    Ok(DominatedReport {
        samples,
        decreasing,
        final_gap,
    })
}

/// Scalar value of a closed expression, for reports.
pub fn scalar_value(e: &Expr) -> Option<f64> {
    e.eval().ok().map(|s: Scalar| s.to_f64())
}
