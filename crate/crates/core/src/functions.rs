//! Measurable functions as monotone level-set maps.
//!
//! A non-negative measurable function `f` is determined by its closed levels
//! `t ↦ {f ≤ t}`; every [`Fun`] also provides strict levels `t ↦ {f < t}`,
//! because pointwise operations are naturally countable joins in one form and
//! countable meets in the other, and the evaluator bounds joins from below and
//! meets from above. Both forms are exact descriptions of the same function.
//!
//! Levels are σ-terms in the threshold `t`, which may itself be symbolic (it
//! contains the index variables of enclosing streams).

use crate::expr::{CmpOp, Expr, Func, Mono, Period, Pred, Scalar, Var};
use crate::extension::{ExtendedMeasure, MeasureError, Nullity};
use crate::term::{interval_form, pick_var, Stream, Term};
use num_rational::BigRational;
use num_traits::Signed;
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Most parts a folded simple function may have.
pub const SIMPLE_PART_CAP: usize = 256;
/// Leading pairs of a stream checked by the monotone-limit constructors.
pub const MONOTONE_CHECK_PAIRS: u64 = 4;
/// Grid resolution `2^-LEQ_LEVEL` and range `[0, LEQ_RANGE]` of the level
/// comparison in [`leq`].
pub const LEQ_LEVEL: u32 = 4;
pub const LEQ_RANGE: u32 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunError {
    #[error("stream is not monotone at index {index}")]
    NotMonotone { index: u64 },
    #[error("monotonicity of the stream at index {index} could not be decided")]
    MonotoneUnknown { index: u64 },
    #[error("invalid function: {0}")]
    Invalid(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Three-valued answer of comparisons decided through measure bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    True,
    False,
    Unknown,
}

impl Truth {
    fn and(self, other: Truth) -> Truth {
        match (self, other) {
            (Truth::False, _) | (_, Truth::False) => Truth::False,
            (Truth::True, Truth::True) => Truth::True,
            _ => Truth::Unknown,
        }
    }
}

/// A finite partition of 1 with values in `[0, ∞]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimpleFunction {
    pub parts: Vec<(Term, Scalar)>,
}

impl SimpleFunction {
    /// Drops syntactically empty parts and merges parts with equal values.
    pub fn new(parts: Vec<(Term, Scalar)>) -> SimpleFunction {
        let mut out: Vec<(Term, Scalar)> = Vec::new();
        for (a, x) in parts {
            let a = interval_form(&a).unwrap_or(a);
            if a.is_zero() {
                continue;
            }
            match out.iter_mut().find(|(_, y)| y.cmp_value(&x) == Ordering::Equal) {
                Some(slot) => slot.0 = slot.0.or2(&a),
                None => out.push((a, x)),
            }
        }
        for slot in &mut out {
            if let Some(merged) = interval_form(&slot.0) {
                slot.0 = merged;
            }
        }
        out.sort_by(|a, b| a.1.cmp_value(&b.1));
        SimpleFunction { parts: out }
    }

    pub fn zero() -> SimpleFunction {
        SimpleFunction::new(vec![(Term::one(), Scalar::int(0))])
    }

    pub fn indicator(a: &Term) -> SimpleFunction {
        SimpleFunction::new(vec![(a.not(), Scalar::int(0)), (a.clone(), Scalar::int(1))])
    }

    pub fn constant(c: Scalar) -> SimpleFunction {
        SimpleFunction::new(vec![(Term::one(), c)])
    }

    /// Pairwise disjointness and exhaustiveness, up to null sets.
    pub fn check_partition(&self, mu: &ExtendedMeasure, budget: u64) -> Result<Truth, MeasureError> {
        let mut verdict = Truth::True;
        let all = Term::or(self.parts.iter().map(|(a, _)| a.clone()).collect());
        let mut checks = vec![all.not()];
        for i in 0..self.parts.len() {
            for j in i + 1..self.parts.len() {
                checks.push(self.parts[i].0.and2(&self.parts[j].0));
            }
        }
        for t in checks {
            verdict = verdict.and(match mu.is_null(&t, budget)? {
                Nullity::Null => Truth::True,
                Nullity::NonNull => Truth::False,
                Nullity::Unknown => Truth::Unknown,
            });
        }
        Ok(verdict)
    }

    /// Common refinement with `op` applied to the values; `None` past the cap.
    fn combine(&self, other: &SimpleFunction, op: impl Fn(&Scalar, &Scalar) -> Scalar) -> Option<SimpleFunction> {
        let mut parts = Vec::new();
        for (a, x) in &self.parts {
            for (b, y) in &other.parts {
                let ab = a.and2(b);
                let ab = interval_form(&ab).unwrap_or(ab);
                if !ab.is_zero() {
                    parts.push((ab, op(x, y)));
                }
            }
            if parts.len() > SIMPLE_PART_CAP {
                return None;
            }
        }
        Some(SimpleFunction::new(parts))
    }

    fn map(&self, op: impl Fn(&Scalar) -> Scalar) -> SimpleFunction {
        SimpleFunction::new(self.parts.iter().map(|(a, x)| (a.clone(), op(x))).collect())
    }
}

fn s_add(x: &Scalar, y: &Scalar) -> Scalar {
    x.add(y).unwrap_or(Scalar::PosInf)
}

/// `max(x − y, 0)` with `x ∸ ∞ = 0`.
fn s_monus(x: &Scalar, y: &Scalar) -> Scalar {
    match (x, y) {
        (_, Scalar::PosInf) => Scalar::int(0),
        (Scalar::PosInf, _) => Scalar::PosInf,
        _ => x.sub(y).map(|d| d.max(&Scalar::int(0))).unwrap_or(Scalar::int(0)),
    }
}

/// `c·x` with `0·∞ = 0`.
fn s_scale(c: &Scalar, x: &Scalar) -> Scalar {
    if c.is_zero() || x.is_zero() {
        Scalar::int(0)
    } else {
        c.mul(x).unwrap_or(Scalar::PosInf)
    }
}

fn s_hypot(x: &Scalar, y: &Scalar) -> Scalar {
    if x.is_zero() {
        return y.clone();
    }
    if y.is_zero() {
        return x.clone();
    }
    if !x.is_finite() || !y.is_finite() {
        return Scalar::PosInf;
    }
    let sq = x.mul(x).and_then(|a| y.mul(y).and_then(|b| a.add(&b)));
    match sq {
        Ok(s) => Expr::call(Func::Sqrt, vec![Expr::constant(s)])
            .eval()
            .unwrap_or(Scalar::PosInf),
        Err(_) => Scalar::PosInf,
    }
}

/// `body[var := start], body[var := start + 1], ...` of functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunStream {
    pub var: Var,
    pub start: Expr,
    pub body: Fun,
}

impl FunStream {
    pub fn new(var: &str, start: Expr, body: Fun) -> FunStream {
        FunStream {
            var: Arc::from(var),
            start,
            body,
        }
    }

    pub fn index(&self, k: u64) -> Expr {
        self.start.add(&Expr::int(k as i64))
    }

    /// The element at position `k`, simplified.
    pub fn at(&self, k: u64) -> Fun {
        simplify(&self.body.subst(&self.var, &self.index(k)))
    }

    /// Renames the bound variable away from `avoid`.
    fn fresh(&self, avoid: &[Var]) -> FunStream {
        if !avoid.contains(&self.var) {
            return self.clone();
        }
        let mut all = avoid.to_vec();
        all.extend(self.body.free_vars());
        let v = pick_var(&self.var, &all);
        FunStream {
            body: self.body.subst(&self.var, &Expr::var_ref(&v)),
            var: v,
            start: self.start.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FunNode {
    Simple(SimpleFunction),
    Indicator(Term),
    Const(Expr),
    /// `x_i⁺`, or `x_i⁻ = max(−x_i, 0)` when `neg`.
    Coord { coord: Expr, neg: bool },
    Sum(Fun, Fun),
    /// `√(f² + g²)`.
    Hypot(Fun, Fun),
    Min(Fun, Fun),
    Max(Fun, Fun),
    /// `max(f − g, 0)`.
    Monus(Fun, Fun),
    /// `c·f` for a non-negative finite scalar `c`.
    Scale(Expr, Fun),
    Sup(FunStream),
    Inf(FunStream),
    /// The n-th rung `min(n, ⌊2ⁿf⌋/2ⁿ)` of the dyadic ladder.
    Approx(Fun, Expr),
    Cond(Pred, Fun, Fun),
}

/// A non-negative measurable function. Cloning is a reference-count bump.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Fun(Arc<FunNode>);

fn is_pos_inf(t: &Expr) -> bool {
    matches!(t.eval(), Ok(Scalar::PosInf))
}

fn lt(a: Expr, b: Expr) -> Pred {
    Pred::new(a, CmpOp::Lt, b)
}

fn le(a: Expr, b: Expr) -> Pred {
    Pred::new(a, CmpOp::Le, b)
}

fn dyadic(m: &Expr) -> Expr {
    Expr::call(Func::Dyadic, vec![m.clone()])
}

fn nonneg_dyadic(m: &Expr) -> Expr {
    Expr::call(Func::NonNegDyadic, vec![m.clone()])
}

impl Fun {
    fn wrap(node: FunNode) -> Fun {
        Fun(Arc::new(node))
    }

    pub fn node(&self) -> &FunNode {
        &self.0
    }

    pub fn simple(s: SimpleFunction) -> Result<Fun, FunError> {
        if s.parts.iter().any(|(_, x)| x.signum() < 0) {
            return Err(FunError::Invalid("simple function with a negative value".into()));
        }
        Ok(Fun::wrap(FunNode::Simple(s)))
    }

    pub fn zero() -> Fun {
        Fun::constant(Expr::int(0))
    }

    pub fn indicator(a: &Term) -> Fun {
        Fun::wrap(FunNode::Indicator(a.clone()))
    }

    pub fn constant(c: Expr) -> Fun {
        Fun::wrap(FunNode::Const(c))
    }

    pub fn coord(i: Expr) -> Fun {
        Fun::wrap(FunNode::Coord { coord: i, neg: false })
    }

    pub fn neg_coord(i: Expr) -> Fun {
        Fun::wrap(FunNode::Coord { coord: i, neg: true })
    }

    pub fn sum(f: &Fun, g: &Fun) -> Fun {
        Fun::wrap(FunNode::Sum(f.clone(), g.clone()))
    }

    pub fn hypot(f: &Fun, g: &Fun) -> Fun {
        Fun::wrap(FunNode::Hypot(f.clone(), g.clone()))
    }

    pub fn min(f: &Fun, g: &Fun) -> Fun {
        Fun::wrap(FunNode::Min(f.clone(), g.clone()))
    }

    pub fn max(f: &Fun, g: &Fun) -> Fun {
        Fun::wrap(FunNode::Max(f.clone(), g.clone()))
    }

    pub fn monus(f: &Fun, g: &Fun) -> Fun {
        Fun::wrap(FunNode::Monus(f.clone(), g.clone()))
    }

    pub fn scale(c: Expr, f: &Fun) -> Fun {
        Fun::wrap(FunNode::Scale(c, f.clone()))
    }

    /// Pointwise supremum, without a monotonicity check.
    pub fn sup(s: FunStream) -> Fun {
        Fun::wrap(FunNode::Sup(s))
    }

    /// Pointwise infimum, without a monotonicity check.
    pub fn inf(s: FunStream) -> Fun {
        Fun::wrap(FunNode::Inf(s))
    }

    pub fn approx(f: &Fun, n: Expr) -> Fun {
        Fun::wrap(FunNode::Approx(f.clone(), n))
    }

    pub fn cond(p: Pred, f: &Fun, g: &Fun) -> Fun {
        match p.decide() {
            Some(true) => f.clone(),
            Some(false) => g.clone(),
            None => Fun::wrap(FunNode::Cond(p, f.clone(), g.clone())),
        }
    }

    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_free(&mut out, &mut Vec::new());
        out
    }

    fn collect_free(&self, out: &mut Vec<Var>, bound: &mut Vec<Var>) {
        let push = |vs: Vec<Var>, out: &mut Vec<Var>| {
            for v in vs {
                if !bound.contains(&v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        let expr_vars = |e: &Expr| {
            let mut vs = Vec::new();
            e.free_vars(&mut vs);
            vs
        };
        match self.node() {
            FunNode::Simple(s) => {
                for (a, _) in &s.parts {
                    push(a.free_vars(), out);
                }
            }
            FunNode::Indicator(a) => push(a.free_vars(), out),
            FunNode::Const(c) => push(expr_vars(c), out),
            FunNode::Coord { coord, .. } => push(expr_vars(coord), out),
            FunNode::Sum(f, g)
            | FunNode::Hypot(f, g)
            | FunNode::Min(f, g)
            | FunNode::Max(f, g)
            | FunNode::Monus(f, g) => {
                f.collect_free(out, bound);
                g.collect_free(out, bound);
            }
            FunNode::Scale(c, f) | FunNode::Approx(f, c) => {
                push(expr_vars(c), out);
                f.collect_free(out, bound);
            }
            FunNode::Sup(s) | FunNode::Inf(s) => {
                push(expr_vars(&s.start), out);
                bound.push(Arc::clone(&s.var));
                s.body.collect_free(out, bound);
                bound.pop();
            }
            FunNode::Cond(p, f, g) => {
                let mut vs = Vec::new();
                p.free_vars(&mut vs);
                push(vs, out);
                f.collect_free(out, bound);
                g.collect_free(out, bound);
            }
        }
    }

    pub fn contains_var(&self, v: &str) -> bool {
        self.free_vars().iter().any(|x| &**x == v)
    }

    /// Capture-avoiding substitution of `value` for the free variable `v`.
    pub fn subst(&self, v: &str, value: &Expr) -> Fun {
        if !self.contains_var(v) {
            return self.clone();
        }
        let e = |x: &Expr| x.subst(v, value);
        let f = |x: &Fun| x.subst(v, value);
        match self.node() {
            FunNode::Simple(s) => Fun::wrap(FunNode::Simple(SimpleFunction::new(
                s.parts.iter().map(|(a, x)| (a.subst(v, value), x.clone())).collect(),
            ))),
            FunNode::Indicator(a) => Fun::indicator(&a.subst(v, value)),
            FunNode::Const(c) => Fun::constant(e(c)),
            FunNode::Coord { coord, neg } => Fun::wrap(FunNode::Coord {
                coord: e(coord),
                neg: *neg,
            }),
            FunNode::Sum(a, b) => Fun::sum(&f(a), &f(b)),
            FunNode::Hypot(a, b) => Fun::hypot(&f(a), &f(b)),
            FunNode::Min(a, b) => Fun::min(&f(a), &f(b)),
            FunNode::Max(a, b) => Fun::max(&f(a), &f(b)),
            FunNode::Monus(a, b) => Fun::monus(&f(a), &f(b)),
            FunNode::Scale(c, a) => Fun::scale(e(c), &f(a)),
            FunNode::Approx(a, n) => Fun::approx(&f(a), e(n)),
            FunNode::Cond(p, a, b) => Fun::cond(p.subst(v, value), &f(a), &f(b)),
            FunNode::Sup(s) | FunNode::Inf(s) => {
                let is_sup = matches!(self.node(), FunNode::Sup(_));
                let start = e(&s.start);
                let body = if &*s.var == v {
                    s.clone()
                } else {
                    let mut avoid = Vec::new();
                    value.free_vars(&mut avoid);
                    let s = s.fresh(&avoid);
                    FunStream {
                        body: s.body.subst(v, value),
                        ..s
                    }
                };
                let s = FunStream { start, ..body };
                if is_sup {
                    Fun::sup(s)
                } else {
                    Fun::inf(s)
                }
            }
        }
    }

    fn avoid(&self, t: &Expr) -> Vec<Var> {
        let mut vs = self.free_vars();
        t.free_vars(&mut vs);
        vs
    }

    /// `{f ≤ t}` for `t ≥ 0`.
    pub fn level(&self, t: &Expr) -> Term {
        if is_pos_inf(t) {
            return Term::one();
        }
        match self.node() {
            FunNode::Simple(s) => Term::or(
                s.parts
                    .iter()
                    .map(|(a, x)| Term::cond(le(Expr::constant(x.clone()), t.clone()), a.clone(), Term::zero()))
                    .collect(),
            ),
            FunNode::Indicator(a) => Term::cond(lt(t.clone(), Expr::int(1)), a.not(), Term::one()),
            FunNode::Const(c) => Term::cond(le(c.clone(), t.clone()), Term::one(), Term::zero()),
            FunNode::Coord { coord, neg: false } => Term::cond(
                le(Expr::int(0), t.clone()),
                Term::cylc(coord.clone(), Expr::neg_inf(), t.clone()),
                Term::zero(),
            ),
            FunNode::Coord { coord, neg: true } => Term::cond(
                le(Expr::int(0), t.clone()),
                Term::cyl(coord.clone(), t.neg(), Expr::inf()),
                Term::zero(),
            ),
            FunNode::Sum(f, g) => {
                // f + g > t iff f > t − r and g > r for some r = t·d(m) in (0, t],
                // or one summand alone exceeds t
                let m = pick_var("m", &self.avoid(t));
                let r = t.mul(&dyadic(&Expr::var_ref(&m)));
                let body = f.level(&t.sub(&r)).or2(&g.level(&r));
                Term::and(vec![
                    f.level(t),
                    g.level(t),
                    Term::meet(Stream::new(&m, Expr::int(0), body)),
                ])
            }
            FunNode::Hypot(f, g) => {
                let m = pick_var("m", &self.avoid(t));
                let one = Expr::int(1);
                let r = t.mul(&one.sub(&dyadic(&Expr::var_ref(&m))));
                let rest = Expr::call(
                    Func::Sqrt,
                    vec![t.mul(t).sub(&r.mul(&r))],
                );
                let body = f.level(&r).or2(&g.level(&rest));
                Term::and(vec![
                    f.level(t),
                    g.level(t),
                    Term::meet(Stream::new(&m, Expr::int(0), body)),
                ])
            }
            FunNode::Min(f, g) => f.level(t).or2(&g.level(t)),
            FunNode::Max(f, g) => f.level(t).and2(&g.level(t)),
            FunNode::Monus(f, g) => {
                // f > g + t iff g < e and f > e + t for some non-negative dyadic e
                let m = pick_var("m", &self.avoid(t));
                let e = nonneg_dyadic(&Expr::var_ref(&m));
                let body = g.strict(&e).not().or2(&f.level(&e.add(t)));
                Term::meet(Stream::new(&m, Expr::int(0), body))
            }
            FunNode::Scale(c, f) => Term::cond(
                Pred::new(c.clone(), CmpOp::Eq, Expr::int(0)),
                Term::one(),
                f.level(&t.div(c)),
            ),
            FunNode::Sup(s) => {
                let s = s.fresh(&self.avoid(t));
                Term::meet(Stream::new(&s.var, s.start.clone(), s.body.level(t)))
            }
            FunNode::Inf(_) => self.closed_from_strict(t),
            FunNode::Approx(f, n) => {
                let p = Expr::int(2).pow(n);
                let next = Expr::call(Func::Floor, vec![t.mul(&p)]).add(&Expr::int(1)).div(&p);
                Term::cond(
                    le(n.clone(), t.clone()),
                    Term::one(),
                    f.strict(&Expr::call(Func::Min, vec![n.clone(), next])),
                )
            }
            FunNode::Cond(p, f, g) => Term::cond(p.clone(), f.level(t), g.level(t)),
        }
    }

    /// `{f < t}`.
    pub fn strict(&self, t: &Expr) -> Term {
        let composite = !matches!(
            self.node(),
            FunNode::Simple(_) | FunNode::Indicator(_) | FunNode::Const(_) | FunNode::Coord { .. }
        );
        if composite && is_pos_inf(t) {
            // {f < ∞} = ⋁_j {f ≤ 2^j}
            let j = pick_var("j", &self.free_vars());
            let body = self.level(&Expr::int(2).pow(&Expr::var_ref(&j)));
            return Term::join(Stream::new(&j, Expr::int(0), body));
        }
        match self.node() {
            FunNode::Simple(s) => Term::or(
                s.parts
                    .iter()
                    .map(|(a, x)| Term::cond(lt(Expr::constant(x.clone()), t.clone()), a.clone(), Term::zero()))
                    .collect(),
            ),
            FunNode::Indicator(a) => Term::cond(
                le(t.clone(), Expr::int(0)),
                Term::zero(),
                Term::cond(le(t.clone(), Expr::int(1)), a.not(), Term::one()),
            ),
            FunNode::Const(c) => Term::cond(lt(c.clone(), t.clone()), Term::one(), Term::zero()),
            FunNode::Coord { coord, neg: false } => Term::cond(
                lt(Expr::int(0), t.clone()),
                Term::cyl(coord.clone(), Expr::neg_inf(), t.clone()),
                Term::zero(),
            ),
            FunNode::Coord { coord, neg: true } => Term::cond(
                lt(Expr::int(0), t.clone()),
                Term::cylc(coord.clone(), Expr::neg_inf(), t.neg()).not(),
                Term::zero(),
            ),
            FunNode::Sum(f, g) => {
                let m = pick_var("m", &self.avoid(t));
                let r = t.mul(&dyadic(&Expr::var_ref(&m)));
                let body = f.strict(&r).and2(&g.strict(&t.sub(&r)));
                Term::join(Stream::new(&m, Expr::int(0), body))
            }
            FunNode::Hypot(f, g) => {
                let m = pick_var("m", &self.avoid(t));
                let r = t.mul(&dyadic(&Expr::var_ref(&m)));
                let rest = Expr::call(Func::Sqrt, vec![t.mul(t).sub(&r.mul(&r))]);
                let body = f.strict(&r).and2(&g.strict(&rest));
                Term::join(Stream::new(&m, Expr::int(0), body))
            }
            FunNode::Min(f, g) => f.strict(t).or2(&g.strict(t)),
            FunNode::Max(f, g) => f.strict(t).and2(&g.strict(t)),
            FunNode::Monus(f, g) => {
                let m = pick_var("m", &self.avoid(t));
                let e = nonneg_dyadic(&Expr::var_ref(&m));
                let body = g.strict(&e).not().and2(&f.strict(&t.add(&e)));
                Term::cond(
                    lt(Expr::int(0), t.clone()),
                    f.strict(t).or2(&Term::join(Stream::new(&m, Expr::int(0), body))),
                    Term::zero(),
                )
            }
            FunNode::Scale(c, f) => Term::cond(
                Pred::new(c.clone(), CmpOp::Eq, Expr::int(0)),
                Term::cond(lt(Expr::int(0), t.clone()), Term::one(), Term::zero()),
                f.strict(&t.div(c)),
            ),
            FunNode::Sup(_) => self.strict_from_closed(t),
            FunNode::Inf(s) => {
                let s = s.fresh(&self.avoid(t));
                Term::join(Stream::new(&s.var, s.start.clone(), s.body.strict(t)))
            }
            FunNode::Approx(f, n) => {
                let p = Expr::int(2).pow(n);
                Term::cond(
                    lt(n.clone(), t.clone()),
                    Term::one(),
                    f.strict(&Expr::call(Func::Ceil, vec![t.mul(&p)]).div(&p)),
                )
            }
            FunNode::Cond(p, f, g) => Term::cond(p.clone(), f.strict(t), g.strict(t)),
        }
    }

    /// `{f ≤ t} = ⋀_j {f < t + 2^-j}`.
    fn closed_from_strict(&self, t: &Expr) -> Term {
        let j = pick_var("j", &self.avoid(t));
        let body = self.strict(&t.add(&Expr::var_ref(&j).pow2_neg()));
        Term::cond(
            le(Expr::int(0), t.clone()),
            Term::meet(Stream::new(&j, Expr::int(0), body)),
            Term::zero(),
        )
    }

    /// `{f < t} = ⋁_j {f ≤ t − 2^-j}` over the `j` with `2^-j ≤ t`.
    fn strict_from_closed(&self, t: &Expr) -> Term {
        let j = pick_var("j", &self.avoid(t));
        let step = Expr::var_ref(&j).pow2_neg();
        let body = Term::cond(le(step.clone(), t.clone()), self.level(&t.sub(&step)), Term::zero());
        Term::join(Stream::new(&j, Expr::int(0), body))
    }

    /// The simple function this denotes, when it is one syntactically.
    pub fn as_simple(&self) -> Option<SimpleFunction> {
        match self.node() {
            FunNode::Simple(s) => Some(s.clone()),
            FunNode::Indicator(a) => Some(SimpleFunction::indicator(a)),
            FunNode::Const(c) => {
                let v = c.eval().ok()?;
                (v.signum() >= 0).then(|| SimpleFunction::constant(v))
            }
            _ => None,
        }
    }

    /// Behaviour of the stream `v ↦ self` pointwise, when readable from syntax.
    pub fn monotonicity(&self, v: &str) -> Option<Mono> {
        if !self.contains_var(v) {
            return Some(Mono::Constant);
        }
        match self.node() {
            FunNode::Const(c) => c.monotonicity(v),
            FunNode::Sum(f, g) | FunNode::Hypot(f, g) | FunNode::Min(f, g) | FunNode::Max(f, g) => {
                f.monotonicity(v)?.combine(g.monotonicity(v)?)
            }
            FunNode::Monus(f, g) => f.monotonicity(v)?.combine(g.monotonicity(v)?.flip()),
            FunNode::Scale(c, f) => c.monotonicity(v)?.combine(f.monotonicity(v)?),
            FunNode::Approx(f, n) if !f.contains_var(v) => match n.monotonicity(v)? {
                Mono::Decreasing => None,
                m => Some(m),
            },
            _ => None,
        }
    }

    /// Pointwise limit as `v → ∞`, for monotone streams.
    pub fn limit(&self, v: &str) -> Option<Fun> {
        if !self.contains_var(v) {
            return Some(self.clone());
        }
        Some(match self.node() {
            FunNode::Const(c) => Fun::constant(Expr::constant(c.limit(v)?)),
            FunNode::Sum(f, g) => Fun::sum(&f.limit(v)?, &g.limit(v)?),
            FunNode::Hypot(f, g) => Fun::hypot(&f.limit(v)?, &g.limit(v)?),
            FunNode::Min(f, g) => Fun::min(&f.limit(v)?, &g.limit(v)?),
            FunNode::Max(f, g) => Fun::max(&f.limit(v)?, &g.limit(v)?),
            FunNode::Monus(f, g) => Fun::monus(&f.limit(v)?, &g.limit(v)?),
            FunNode::Scale(c, f) => {
                let c = c.limit(v)?;
                if !c.is_finite() {
                    return None;
                }
                Fun::scale(Expr::constant(c), &f.limit(v)?)
            }
            FunNode::Approx(f, n) if !f.contains_var(v) => {
                if n.limit(v)? != Scalar::PosInf {
                    return None;
                }
                f.clone()
            }
            _ => return None,
        })
    }

    fn period(&self, v: &str) -> Period {
        if !self.contains_var(v) {
            return Period::Invariant;
        }
        match self.node() {
            FunNode::Simple(s) => s
                .parts
                .iter()
                .fold(Period::Invariant, |p, (a, _)| p.join(a.period(v))),
            FunNode::Indicator(a) => a.period(v),
            FunNode::Const(c) | FunNode::Coord { coord: c, .. } => c.period(v),
            FunNode::Sum(f, g)
            | FunNode::Hypot(f, g)
            | FunNode::Min(f, g)
            | FunNode::Max(f, g)
            | FunNode::Monus(f, g) => f.period(v).join(g.period(v)),
            FunNode::Scale(c, f) | FunNode::Approx(f, c) => c.period(v).join(f.period(v)),
            FunNode::Cond(p, f, g) => p.period(v).join(f.period(v)).join(g.period(v)),
            FunNode::Sup(s) | FunNode::Inf(s) => {
                if &*s.var == v {
                    s.start.period(v)
                } else {
                    Period::Unknown
                }
            }
        }
    }
}

impl fmt::Display for Fun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_fun(self))
    }
}

impl fmt::Debug for Fun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn fold2(f: &Fun, g: &Fun, op: impl Fn(&Scalar, &Scalar) -> Scalar) -> Option<Fun> {
    let s = f.as_simple()?.combine(&g.as_simple()?, op)?;
    Some(Fun::wrap(FunNode::Simple(s)))
}

fn is_const(f: &Fun, value: &Scalar) -> bool {
    matches!(f.node(), FunNode::Const(c) if c.eval().is_ok_and(|v| v.cmp_value(value) == Ordering::Equal))
}

/// Folds operations on simple functions, resolves decidable conditions,
/// collapses periodic and symbolically monotone streams, and applies the unit
/// laws of the pointwise operations. Denotes the same function.
pub fn simplify(f: &Fun) -> Fun {
    let zero = Scalar::int(0);
    let inf = Scalar::PosInf;
    match f.node() {
        FunNode::Simple(s) => Fun::wrap(FunNode::Simple(SimpleFunction::new(s.parts.clone()))),
        FunNode::Indicator(a) => {
            if a.is_zero() {
                Fun::zero()
            } else if a.is_one() {
                Fun::constant(Expr::int(1))
            } else {
                f.clone()
            }
        }
        FunNode::Const(c) => match c.eval() {
            Ok(v) => Fun::constant(Expr::constant(v)),
            Err(_) => f.clone(),
        },
        FunNode::Coord { .. } => f.clone(),
        FunNode::Sum(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if is_const(&a, &zero) {
                b
            } else if is_const(&b, &zero) {
                a
            } else {
                fold2(&a, &b, s_add).unwrap_or_else(|| Fun::sum(&a, &b))
            }
        }
        FunNode::Hypot(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if is_const(&a, &zero) {
                b
            } else if is_const(&b, &zero) {
                a
            } else {
                fold2(&a, &b, s_hypot).unwrap_or_else(|| Fun::hypot(&a, &b))
            }
        }
        FunNode::Min(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if a == b || is_const(&b, &inf) {
                a
            } else if is_const(&a, &inf) {
                b
            } else {
                fold2(&a, &b, |x, y| x.min(y)).unwrap_or_else(|| Fun::min(&a, &b))
            }
        }
        FunNode::Max(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if a == b || is_const(&b, &zero) {
                a
            } else if is_const(&a, &zero) {
                b
            } else {
                fold2(&a, &b, |x, y| x.max(y)).unwrap_or_else(|| Fun::max(&a, &b))
            }
        }
        FunNode::Monus(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if is_const(&b, &zero) {
                a
            } else if a == b {
                Fun::zero()
            } else {
                fold2(&a, &b, s_monus).unwrap_or_else(|| Fun::monus(&a, &b))
            }
        }
        FunNode::Scale(c, a) => {
            let a = simplify(a);
            match c.eval() {
                Ok(cv) if cv.cmp_value(&Scalar::int(1)) == Ordering::Equal => a,
                Ok(cv) if cv.is_zero() => Fun::zero(),
                Ok(cv) => match a.as_simple() {
                    Some(s) => Fun::wrap(FunNode::Simple(s.map(|x| s_scale(&cv, x)))),
                    None => Fun::scale(Expr::constant(cv), &a),
                },
                Err(_) => Fun::scale(c.clone(), &a),
            }
        }
        FunNode::Approx(a, n) => {
            let a = simplify(a);
            match (n.eval().ok().and_then(|v| v.as_u64()), a.as_simple()) {
                (Some(k), Some(_)) => Fun::wrap(FunNode::Simple(dyadic_approx(&a, k))),
                _ => Fun::approx(&a, n.clone()),
            }
        }
        FunNode::Cond(p, a, b) => match p.decide() {
            Some(true) => simplify(a),
            Some(false) => simplify(b),
            None => Fun::cond(p.clone(), &simplify(a), &simplify(b)),
        },
        FunNode::Sup(s) | FunNode::Inf(s) => {
            let is_sup = matches!(f.node(), FunNode::Sup(_));
            let s = FunStream {
                body: simplify(&s.body),
                ..s.clone()
            };
            simplify_stream(s, is_sup)
        }
    }
}

fn simplify_stream(s: FunStream, is_sup: bool) -> Fun {
    let combine = |a: &Fun, b: &Fun| if is_sup { Fun::max(a, b) } else { Fun::min(a, b) };
    match s.body.period(&s.var) {
        Period::Invariant => return s.body.clone(),
        Period::Periodic(p) if p <= 64 => {
            let mut acc = s.body.subst(&s.var, &s.index(0));
            for k in 1..p {
                acc = combine(&acc, &s.body.subst(&s.var, &s.index(k)));
            }
            return simplify(&acc);
        }
        _ => {}
    }
    let first = || simplify(&s.body.subst(&s.var, &s.start));
    match (s.body.monotonicity(&s.var), is_sup) {
        (Some(Mono::Increasing), false) | (Some(Mono::Decreasing), true) => return first(),
        (Some(Mono::Increasing), true) | (Some(Mono::Decreasing), false) => {
            if let Some(lim) = s.body.limit(&s.var) {
                return simplify(&lim);
            }
        }
        _ => {}
    }
    if is_sup {
        Fun::sup(s)
    } else {
        Fun::inf(s)
    }
}

/// `sₙ`: value `k/2ⁿ` on `f([k/2ⁿ, (k+1)/2ⁿ))` for `k < n2ⁿ` and `n` on
/// `f([n, ∞])`, where `f([a, b)) = {f < b} ∖ {f < a}`. Empty parts are dropped.
pub fn dyadic_approx(f: &Fun, n: u64) -> SimpleFunction {
    let f = &simplify(f);
    let cap = Scalar::int(n as i64);
    let scale = BigRational::from_integer(num_traits::pow(num_bigint::BigInt::from(2), n as usize));
    if let Some(s) = f.as_simple() {
        // sₙ(x) = min(n, ⌊2ⁿx⌋/2ⁿ) pointwise
        let p = Scalar::Rat(scale);
        return s.map(|x| match x.mul(&p).and_then(|y| y.floor().div(&p)) {
            Ok(v) => v.min(&cap),
            Err(_) => cap.clone(),
        });
    }
    let grid = |k: u64| BigRational::from_integer(k.into()) / &scale;
    let top = n.saturating_mul(1u64 << n.min(62));
    let mut parts = Vec::new();
    let mut below = Term::zero();
    for k in 0..top {
        let next = f.strict(&Expr::rational(grid(k + 1)));
        let part = next.minus(&below);
        if !part.is_zero() {
            parts.push((part, Scalar::Rat(grid(k))));
        }
        below = next;
        if below.is_one() {
            break;
        }
    }
    parts.push((below.not(), cap));
    SimpleFunction::new(parts)
}

/// `f ≤ g` pointwise up to null sets, i.e. `{g ≤ t} ⊆ {f ≤ t}` for all `t`.
/// Exact for pairs of simple functions; otherwise checked on the grid
/// `k/2^LEQ_LEVEL` in `[0, LEQ_RANGE]`.
pub fn leq(f: &Fun, g: &Fun, mu: &ExtendedMeasure, budget: u64) -> Result<Truth, MeasureError> {
    let (f, g) = (simplify(f), simplify(g));
    if f == g {
        return Ok(Truth::True);
    }
    let null = |t: &Term| -> Result<Truth, MeasureError> {
        Ok(match mu.is_null(t, budget)? {
            Nullity::Null => Truth::True,
            Nullity::NonNull => Truth::False,
            Nullity::Unknown => Truth::Unknown,
        })
    };
    if let (Some(a), Some(b)) = (f.as_simple(), g.as_simple()) {
        let mut verdict = Truth::True;
        for (pa, x) in &a.parts {
            for (pb, y) in &b.parts {
                if x.cmp_value(y) == Ordering::Greater {
                    verdict = verdict.and(null(&pa.and2(pb))?);
                    if verdict == Truth::False {
                        return Ok(verdict);
                    }
                }
            }
        }
        return Ok(verdict);
    }
    let steps = 1u64 << LEQ_LEVEL;
    let mut verdict = Truth::True;
    for k in 0..=(LEQ_RANGE as u64 * steps) {
        let t = Expr::ratio(k as i64, steps as i64);
        verdict = verdict.and(null(&g.level(&t).minus(&f.level(&t)))?);
        if verdict == Truth::False {
            break;
        }
    }
    Ok(verdict)
}

fn check_monotone(s: &FunStream, up: bool, mu: &ExtendedMeasure, budget: u64) -> Result<(), FunError> {
    for k in 0..MONOTONE_CHECK_PAIRS {
        let (a, b) = (s.at(k), s.at(k + 1));
        let verdict = if up { leq(&a, &b, mu, budget)? } else { leq(&b, &a, mu, budget)? };
        let index = k + 1;
        match verdict {
            Truth::True => {}
            Truth::False => return Err(FunError::NotMonotone { index }),
            Truth::Unknown => return Err(FunError::MonotoneUnknown { index }),
        }
    }
    Ok(())
}

/// The limit of an increasing stream, after checking its leading pairs.
pub fn mono_limit_up(s: FunStream, mu: &ExtendedMeasure, budget: u64) -> Result<Fun, FunError> {
    check_monotone(&s, true, mu, budget)?;
    Ok(simplify(&Fun::sup(s)))
}

/// The limit of a decreasing stream, after checking its leading pairs.
pub fn mono_limit_down(s: FunStream, mu: &ExtendedMeasure, budget: u64) -> Result<Fun, FunError> {
    check_monotone(&s, false, mu, budget)?;
    Ok(simplify(&Fun::inf(s)))
}

/// `(k, i)` stream variables for the tail operations, fresh for `s`.
fn tail_stream(s: &FunStream, inner_is_sup: bool) -> Fun {
    let mut avoid = s.body.free_vars();
    let mut sv = Vec::new();
    s.start.free_vars(&mut sv);
    avoid.extend(sv);
    let k = pick_var("k", &avoid);
    avoid.push(Arc::clone(&k));
    let i = pick_var("i", &avoid);
    let inner = FunStream {
        var: Arc::clone(&i),
        start: Expr::var_ref(&k),
        body: s.body.subst(&s.var, &Expr::var_ref(&i)),
    };
    let inner = if inner_is_sup { Fun::sup(inner) } else { Fun::inf(inner) };
    let outer = FunStream {
        var: k,
        start: s.start.clone(),
        body: inner,
    };
    if inner_is_sup {
        Fun::inf(outer)
    } else {
        Fun::sup(outer)
    }
}

/// `liminf fₙ = sup_k inf_{i ≥ k} f_i`.
pub fn liminf(s: &FunStream) -> Fun {
    tail_stream(s, false)
}

/// `limsup fₙ = inf_k sup_{i ≥ k} f_i`.
pub fn limsup(s: &FunStream) -> Fun {
    tail_stream(s, true)
}

/// A real measurable function `u = u⁺ − u⁻` with `u⁻ = max(−u, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMeasurable {
    pub pos: Fun,
    pub neg: Fun,
}

impl RealMeasurable {
    pub fn new(pos: Fun, neg: Fun) -> Self {
        RealMeasurable { pos, neg }
    }

    pub fn from_nonneg(f: &Fun) -> Self {
        RealMeasurable::new(f.clone(), Fun::zero())
    }

    /// Splits a signed simple function part by part.
    pub fn from_signed_simple(parts: &[(Term, Scalar)]) -> Self {
        let zero = Scalar::int(0);
        let pos = parts.iter().map(|(a, x)| (a.clone(), x.max(&zero))).collect();
        let neg = parts.iter().map(|(a, x)| (a.clone(), x.neg().max(&zero))).collect();
        RealMeasurable::new(
            Fun::wrap(FunNode::Simple(SimpleFunction::new(pos))),
            Fun::wrap(FunNode::Simple(SimpleFunction::new(neg))),
        )
    }

    /// `x_i` itself.
    pub fn coordinate(i: Expr) -> Self {
        RealMeasurable::new(Fun::coord(i.clone()), Fun::neg_coord(i))
    }

    pub fn split(&self) -> (Fun, Fun) {
        (self.pos.clone(), self.neg.clone())
    }

    pub fn negate(&self) -> Self {
        RealMeasurable::new(self.neg.clone(), self.pos.clone())
    }

    /// `c·u` for a finite real `c`.
    pub fn scale(&self, c: &BigRational) -> Self {
        let a = Expr::rational(c.abs());
        let scaled = RealMeasurable::new(
            simplify(&Fun::scale(a.clone(), &self.pos)),
            simplify(&Fun::scale(a, &self.neg)),
        );
        if c.is_negative() {
            scaled.negate()
        } else {
            scaled
        }
    }

    /// `(u⁺ + v⁺) − (u⁻ + v⁻)`, re-split so both parts stay minimal.
    pub fn add(&self, other: &RealMeasurable) -> Self {
        let p = Fun::sum(&self.pos, &other.pos);
        let n = Fun::sum(&self.neg, &other.neg);
        RealMeasurable::new(simplify(&Fun::monus(&p, &n)), simplify(&Fun::monus(&n, &p)))
    }

    pub fn sub(&self, other: &RealMeasurable) -> Self {
        self.add(&other.negate())
    }

    /// `|u| = max(u⁺, u⁻)`, the parts having disjoint supports.
    pub fn abs(&self) -> Fun {
        simplify(&Fun::max(&self.pos, &self.neg))
    }

    /// `|u − v| = max(A ∸ B, B ∸ A)` with `A = u⁺ + v⁻`, `B = u⁻ + v⁺`.
    pub fn abs_diff(&self, other: &RealMeasurable) -> Fun {
        let a = Fun::sum(&self.pos, &other.neg);
        let b = Fun::sum(&self.neg, &other.pos);
        simplify(&Fun::max(&Fun::monus(&a, &b), &Fun::monus(&b, &a)))
    }
}

/// `f = u + iv`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMeasurable {
    pub re: RealMeasurable,
    pub im: RealMeasurable,
}

impl ComplexMeasurable {
    pub fn new(re: RealMeasurable, im: RealMeasurable) -> Self {
        ComplexMeasurable { re, im }
    }

    pub fn real(re: RealMeasurable) -> Self {
        ComplexMeasurable::new(re, RealMeasurable::from_nonneg(&Fun::zero()))
    }

    /// `(u⁺, u⁻, v⁺, v⁻)`.
    pub fn parts(&self) -> [Fun; 4] {
        [
            self.re.pos.clone(),
            self.re.neg.clone(),
            self.im.pos.clone(),
            self.im.neg.clone(),
        ]
    }

    pub fn abs(&self) -> Fun {
        simplify(&Fun::hypot(&self.re.abs(), &self.im.abs()))
    }

    pub fn abs_diff(&self, other: &ComplexMeasurable) -> Fun {
        simplify(&Fun::hypot(&self.re.abs_diff(&other.re), &self.im.abs_diff(&other.im)))
    }
}

/// A stream of complex functions given by a closure over the index.
pub struct ComplexStream<'a> {
    pub start: u64,
    pub element: Box<dyn Fn(u64) -> ComplexMeasurable + 'a>,
}

impl<'a> ComplexStream<'a> {
    pub fn new(start: u64, element: impl Fn(u64) -> ComplexMeasurable + 'a) -> Self {
        ComplexStream {
            start,
            element: Box::new(element),
        }
    }

    pub fn at(&self, n: u64) -> ComplexMeasurable {
        (self.element)(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::FiniteSpace;

    fn atoms(a: i64, b: i64) -> Term {
        Term::cyl(Expr::int(1), Expr::int(a), Expr::int(b))
    }

    fn finite() -> ExtendedMeasure {
        ExtendedMeasure::new(Arc::new(FiniteSpace::uniform(4)))
    }

    #[test]
    fn indicator_levels() {
        let a = atoms(0, 2);
        let f = Fun::indicator(&a);
        assert_eq!(f.level(&Expr::ratio(1, 2)), a.not());
        assert!(f.level(&Expr::int(1)).is_one());
        assert!(f.strict(&Expr::int(0)).is_zero());
        assert!(Fun::indicator(&Term::zero()).level(&Expr::int(0)).is_one());
        assert!(Fun::indicator(&Term::one()).level(&Expr::ratio(1, 2)).is_zero());
    }

    #[test]
    fn sum_of_simple_folds() {
        let a = atoms(0, 2);
        let f = simplify(&Fun::sum(&Fun::indicator(&a), &Fun::indicator(&a.not())));
        assert!(is_const(&f, &Scalar::int(1)) || f.as_simple() == Some(SimpleFunction::constant(Scalar::int(1))));
    }

    #[test]
    fn constant_pi_dyadic_approx() {
        let f = Fun::constant(Expr::float(std::f64::consts::PI));
        let s = dyadic_approx(&f, 2);
        assert_eq!(s.parts, vec![(Term::one(), Scalar::int(2))]);
        let s4 = dyadic_approx(&f, 4);
        assert_eq!(s4.parts, vec![(Term::one(), Scalar::ratio(50, 16))]);
    }

    #[test]
    fn indicator_approx_parts() {
        let a = atoms(1, 3);
        let s = dyadic_approx(&Fun::indicator(&a), 3);
        let outside = Term::cyl(Expr::int(1), Expr::neg_inf(), Expr::int(1)).or2(&Term::cyl(Expr::int(1), Expr::int(3), Expr::inf()));
        assert_eq!(interval_form(&a.not()), Some(outside.clone()));
        assert_eq!(s.parts, vec![(outside, Scalar::int(0)), (a, Scalar::int(1))]);
    }

    #[test]
    fn leq_on_simple_functions() {
        let mu = finite();
        let a = atoms(0, 1);
        let f = Fun::indicator(&a);
        assert_eq!(leq(&f, &Fun::constant(Expr::int(2)), &mu, 4).unwrap(), Truth::True);
        assert_eq!(leq(&Fun::constant(Expr::int(2)), &f, &mu, 4).unwrap(), Truth::False);
        assert_eq!(leq(&Fun::zero(), &f, &mu, 4).unwrap(), Truth::True);
    }

    #[test]
    fn sum_levels_match_pointwise_sum() {
        // x⁺ + 1 on the finite space: levels are shifted cylinders
        let mu = finite();
        let f = Fun::sum(&Fun::coord(Expr::int(1)), &Fun::constant(Expr::int(1)));
        for (t, atoms_in) in [(1, 1), (2, 2), (3, 3)] {
            let lvl = f.level(&Expr::int(t));
            let r = mu.bounds(&lvl, 0.0, 64).unwrap();
            assert!(r.hi >= atoms_in as f64 / 4.0 && r.lo <= atoms_in as f64 / 4.0, "t={t} {r}");
            assert!((r.hi - atoms_in as f64 / 4.0).abs() < 1e-12, "t={t} {r}");
        }
    }

    #[test]
    fn alternating_liminf_is_zero() {
        let a = atoms(0, 2);
        let body = Fun::cond(
            Pred::new(
                Expr::call(Func::Mod, vec![Expr::var("n"), Expr::int(2)]),
                CmpOp::Eq,
                Expr::int(0),
            ),
            &Fun::indicator(&a),
            &Fun::indicator(&a.not()),
        );
        let s = FunStream::new("n", Expr::int(1), body);
        assert_eq!(simplify(&liminf(&s)).as_simple(), Some(SimpleFunction::zero()));
        assert_eq!(
            simplify(&limsup(&s)).as_simple(),
            Some(SimpleFunction::constant(Scalar::int(1)))
        );
    }

    #[test]
    fn symbolic_monotone_limits() {
        let g = Fun::indicator(&atoms(0, 3));
        let n = Expr::var("n");
        let scaled = Fun::scale(Expr::int(1).sub(&n.pow2_neg()), &g);
        let s = FunStream::new("n", Expr::int(1), scaled);
        assert_eq!(simplify(&Fun::sup(s)), simplify(&g));
        let capped = Fun::min(&g, &Fun::constant(n.div(&Expr::int(4))));
        let s = FunStream::new("n", Expr::int(1), capped);
        assert_eq!(simplify(&Fun::sup(s)), g);
    }

    #[test]
    fn mono_limit_rejects_decreasing_stream() {
        let mu = finite();
        let g = Fun::indicator(&atoms(0, 3));
        let s = FunStream::new("n", Expr::int(1), Fun::scale(Expr::int(1).div(&Expr::var("n")), &g));
        assert_eq!(
            mono_limit_up(s, &mu, 4).unwrap_err(),
            FunError::NotMonotone { index: 1 }
        );
    }

    #[test]
    fn mixed_sign_split() {
        let a = atoms(0, 2);
        let u = RealMeasurable::from_signed_simple(&[(a.clone(), Scalar::int(1)), (a.not(), Scalar::int(-2))]);
        assert_eq!(u.pos.as_simple(), Some(SimpleFunction::indicator(&a)));
        assert_eq!(
            u.neg.as_simple(),
            Some(SimpleFunction::new(vec![(a.not(), Scalar::int(2)), (a, Scalar::int(0))]))
        );
    }
}
