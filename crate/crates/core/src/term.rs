//! σ-terms: the free abstract σ-algebra over a generator backend.
//!
//! A [`Term`] is a hash-consed syntax tree. Structurally equal terms share one
//! allocation, so equality and hashing are pointer operations and memo tables
//! keyed by terms stay cheap. Countable joins and meets carry a [`Stream`]
//! whose body is a template in a bound index variable.
//!
//! Nothing here measures anything. [`truncate`] produces the finite lower and
//! upper elements used by the evaluator, and [`sandwich`] additionally tracks
//! residual slack from tail majorants.

use crate::expr::{CmpOp, Expr, Func, Period, Pred, Scalar, Var};
use serde_json::{json, Value};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

pub const DEFAULT_DEPTH_CAP: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TermError {
    #[error(transparent)]
    Expr(#[from] crate::expr::ExprError),
    #[error("unbound index variable `{0}`")]
    FreeVariable(String),
    #[error("countable nesting depth {depth} exceeds the cap {cap}")]
    DepthCapExceeded { depth: usize, cap: usize },
    #[error("stream start `{0}` is not a natural number")]
    BadStart(String),
}

/// The cylinder `{x : lo <= x_coord < hi}`, or `lo <= x_coord <= hi` when `closed`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gen {
    pub coord: Expr,
    pub lo: Expr,
    pub hi: Expr,
    pub closed: bool,
}

/// Closed-form bound `m(n)` on the part of the n-th stream element not already
/// covered by earlier ones: `μ(s_n ∖ ⋁_{k<n} s_k)` for a join and
/// `μ(⋀_{k<n} s_k ∖ s_n)` for a meet. Summing from `n0` bounds the measure
/// missed by truncating before index `n0`.
#[derive(Clone, Copy, Debug)]
pub enum Majorant {
    /// `m(n) = c·rⁿ`, `0 <= r < 1`.
    Geom { c: f64, r: f64 },
    /// `m(n) = c·n^{-p}`, `p > 1`.
    Pow { c: f64, p: f64 },
    /// `m(n) = Φ̄(α·n + β)`, `α > 0`.
    GaussTail { alpha: f64, beta: f64 },
}

impl Majorant {
    fn key(&self) -> (u8, u64, u64) {
        match *self {
            Majorant::Geom { c, r } => (0, c.to_bits(), r.to_bits()),
            Majorant::Pow { c, p } => (1, c.to_bits(), p.to_bits()),
            Majorant::GaussTail { alpha, beta } => (2, alpha.to_bits(), beta.to_bits()),
        }
    }

    pub fn is_valid(&self) -> bool {
        match *self {
            Majorant::Geom { c, r } => c >= 0.0 && (0.0..1.0).contains(&r) && c.is_finite(),
            Majorant::Pow { c, p } => c >= 0.0 && p > 1.0 && c.is_finite(),
            Majorant::GaussTail { alpha, beta } => alpha > 0.0 && beta.is_finite(),
        }
    }

    /// Upper bound on `Σ_{n >= n0} m(n)`.
    pub fn tail(&self, n0: f64) -> f64 {
        let raw = match *self {
            Majorant::Geom { c, r } => c * r.powf(n0) / (1.0 - r),
            Majorant::Pow { c, p } => {
                if n0 < 1.0 {
                    f64::INFINITY
                } else {
                    c * (n0.powf(-p) + n0.powf(1.0 - p) / (p - 1.0))
                }
            }
            Majorant::GaussTail { alpha, beta } => {
                // Φ̄ is decreasing: the sum is at most its first term plus the integral
                let v = alpha * n0 + beta;
                let sf = crate::backends::normal::sf(v);
                sf + (crate::backends::normal::pdf(v) - v * sf).max(0.0) / alpha
            }
        };
        if raw.is_nan() {
            f64::INFINITY
        } else {
            raw * (1.0 + 1e-12)
        }
    }
}

impl PartialEq for Majorant {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Majorant {}

impl Hash for Majorant {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

/// `body[var := start], body[var := start + 1], ...`
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Stream {
    pub var: Var,
    pub start: Expr,
    pub body: Term,
    pub tail: Option<Majorant>,
    /// Declared monotone: increasing for a join, decreasing for a meet.
    pub monotone: bool,
}

impl Stream {
    pub fn new(var: &str, start: Expr, body: Term) -> Stream {
        Stream {
            var: Arc::from(var),
            start,
            body,
            tail: None,
            monotone: false,
        }
    }

    pub fn with_tail(mut self, tail: Majorant) -> Stream {
        self.tail = Some(tail);
        self
    }

    pub fn monotone(mut self) -> Stream {
        self.monotone = true;
        self
    }

    pub fn start_index(&self) -> Result<u64, TermError> {
        self.start
            .eval()
            .ok()
            .and_then(|s| s.as_u64())
            .ok_or_else(|| TermError::BadStart(self.start.to_string()))
    }

    /// The element at position `k` (index value `start + k`), normalized.
    pub fn at(&self, k: u64) -> Result<Term, TermError> {
        let idx = self.start_index()? + k;
        Ok(normalize(&self.body.subst(&self.var, &Expr::int(idx as i64))))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Zero,
    One,
    Gen(Gen),
    Not(Term),
    And(Vec<Term>),
    Or(Vec<Term>),
    Join(Stream),
    Meet(Stream),
    Cond(Pred, Term, Term),
}

/// Interned σ-term. Cloning is a reference-count bump.
#[derive(Clone)]
pub struct Term(Arc<Node>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        (Arc::as_ptr(&self.0) as usize).hash(state)
    }
}

fn interner() -> &'static Mutex<HashSet<Arc<Node>>> {
    static TABLE: OnceLock<Mutex<HashSet<Arc<Node>>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashSet::new()))
}

fn intern(node: Node) -> Term {
    let mut table = interner().lock().expect("interner poisoned");
    if let Some(existing) = table.get(&node) {
        return Term(Arc::clone(existing));
    }
    let shared = Arc::new(node);
    table.insert(Arc::clone(&shared));
    Term(shared)
}

/// Picks `base`, `base1`, `base2`, ... avoiding every name in `avoid`.
pub fn pick_var(base: &str, avoid: &[Var]) -> Var {
    if !avoid.iter().any(|v| &**v == base) {
        return Arc::from(base);
    }
    (1..)
        .map(|i| format!("{base}{i}"))
        .find(|cand| !avoid.iter().any(|v| **v == **cand))
        .map(|s| Arc::from(s.as_str()))
        .expect("unbounded search")
}

impl Term {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn zero() -> Term {
        intern(Node::Zero)
    }

    pub fn one() -> Term {
        intern(Node::One)
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self.0, Node::Zero)
    }

    pub fn is_one(&self) -> bool {
        matches!(*self.0, Node::One)
    }

    /// Half-open cylinder `lo <= x_coord < hi`.
    pub fn cyl(coord: Expr, lo: Expr, hi: Expr) -> Term {
        Term::generator(Gen {
            coord,
            lo,
            hi,
            closed: false,
        })
    }

    /// Closed cylinder `lo <= x_coord <= hi`.
    pub fn cylc(coord: Expr, lo: Expr, hi: Expr) -> Term {
        Term::generator(Gen {
            coord,
            lo,
            hi,
            closed: true,
        })
    }

    pub fn generator(g: Gen) -> Term {
        if let (Ok(lo), Ok(hi)) = (g.lo.eval(), g.hi.eval()) {
            let c = lo.cmp_value(&hi);
            let empty = c.is_gt() || (c.is_eq() && !g.closed) || matches!(lo, Scalar::PosInf);
            if empty {
                return Term::zero();
            }
            if matches!(lo, Scalar::NegInf) && matches!(hi, Scalar::PosInf) {
                return Term::one();
            }
        }
        intern(Node::Gen(g))
    }

    pub fn not(&self) -> Term {
        match &*self.0 {
            Node::Zero => Term::one(),
            Node::One => Term::zero(),
            Node::Not(inner) => inner.clone(),
            _ => intern(Node::Not(self.clone())),
        }
    }

    pub fn and(items: Vec<Term>) -> Term {
        Term::lattice(items, true)
    }

    pub fn or(items: Vec<Term>) -> Term {
        Term::lattice(items, false)
    }

    pub fn and2(&self, other: &Term) -> Term {
        Term::and(vec![self.clone(), other.clone()])
    }

    pub fn or2(&self, other: &Term) -> Term {
        Term::or(vec![self.clone(), other.clone()])
    }

    /// `self ∧ ¬other`.
    pub fn minus(&self, other: &Term) -> Term {
        self.and2(&other.not())
    }

    /// Finite meet (`is_and`) or join with unit/absorber folding, flattening,
    /// deduplication and complementary-literal detection. Order of first
    /// occurrence is kept so printed output is deterministic.
    fn lattice(items: Vec<Term>, is_and: bool) -> Term {
        let (unit, absorber) = if is_and {
            (Term::one(), Term::zero())
        } else {
            (Term::zero(), Term::one())
        };
        let mut out: Vec<Term> = Vec::with_capacity(items.len());
        let mut seen: HashSet<Term> = HashSet::new();
        let mut stack: Vec<Term> = items.into_iter().rev().collect();
        while let Some(t) = stack.pop() {
            if t == unit {
                continue;
            }
            if t == absorber {
                return absorber;
            }
            match (&*t.0, is_and) {
                (Node::And(xs), true) | (Node::Or(xs), false) => {
                    stack.extend(xs.iter().rev().cloned());
                    continue;
                }
                _ => {}
            }
            if seen.contains(&t.not()) {
                return absorber;
            }
            if seen.insert(t.clone()) {
                out.push(t);
            }
        }
        match out.len() {
            0 => unit,
            1 => out.pop().expect("one element"),
            _ if is_and => intern(Node::And(out)),
            _ => intern(Node::Or(out)),
        }
    }

    pub fn join(s: Stream) -> Term {
        intern(Node::Join(s))
    }

    pub fn meet(s: Stream) -> Term {
        intern(Node::Meet(s))
    }

    pub fn cond(p: Pred, then: Term, otherwise: Term) -> Term {
        match p.decide() {
            Some(true) => then,
            Some(false) => otherwise,
            None if then == otherwise => then,
            None => intern(Node::Cond(p, then, otherwise)),
        }
    }

    /// `self ⊕ other`.
    pub fn xor(&self, other: &Term) -> Term {
        symdiff_term(self, other)
    }

    pub fn free_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_free(&mut out, &mut Vec::new());
        out
    }

    fn collect_free(&self, out: &mut Vec<Var>, bound: &mut Vec<Var>) {
        let push_expr = |e: &Expr, out: &mut Vec<Var>| {
            let mut vs = Vec::new();
            e.free_vars(&mut vs);
            for v in vs {
                if !bound.contains(&v) && !out.contains(&v) {
                    out.push(v);
                }
            }
        };
        match &*self.0 {
            Node::Zero | Node::One => {}
            Node::Gen(g) => {
                push_expr(&g.coord, out);
                push_expr(&g.lo, out);
                push_expr(&g.hi, out);
            }
            Node::Not(x) => x.collect_free(out, bound),
            Node::And(xs) | Node::Or(xs) => xs.iter().for_each(|x| x.collect_free(out, bound)),
            Node::Join(s) | Node::Meet(s) => {
                push_expr(&s.start, out);
                bound.push(Arc::clone(&s.var));
                s.body.collect_free(out, bound);
                bound.pop();
            }
            Node::Cond(p, a, b) => {
                push_expr(&p.lhs, out);
                push_expr(&p.rhs, out);
                a.collect_free(out, bound);
                b.collect_free(out, bound);
            }
        }
    }

    pub fn contains_var(&self, v: &str) -> bool {
        self.free_vars().iter().any(|w| &**w == v)
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Capture-avoiding substitution of `value` for the free variable `v`.
    /// Conditions that become decidable are resolved on the way.
    pub fn subst(&self, v: &str, value: &Expr) -> Term {
        let mut memo = HashMap::new();
        let mut value_vars = Vec::new();
        value.free_vars(&mut value_vars);
        self.subst_in(v, value, &value_vars, &mut memo)
    }

    fn subst_in(
        &self,
        v: &str,
        value: &Expr,
        value_vars: &[Var],
        memo: &mut HashMap<Term, Term>,
    ) -> Term {
        if let Some(done) = memo.get(self) {
            return done.clone();
        }
        let out = match &*self.0 {
            Node::Zero | Node::One => self.clone(),
            Node::Gen(g) => Term::generator(Gen {
                coord: g.coord.subst(v, value),
                lo: g.lo.subst(v, value),
                hi: g.hi.subst(v, value),
                closed: g.closed,
            }),
            Node::Not(x) => x.subst_in(v, value, value_vars, memo).not(),
            Node::And(xs) => Term::and(
                xs.iter()
                    .map(|x| x.subst_in(v, value, value_vars, memo))
                    .collect(),
            ),
            Node::Or(xs) => Term::or(
                xs.iter()
                    .map(|x| x.subst_in(v, value, value_vars, memo))
                    .collect(),
            ),
            Node::Join(s) | Node::Meet(s) => {
                let is_join = matches!(&*self.0, Node::Join(_));
                let start = s.start.subst(v, value);
                // the bound variable shadows `v`, or `v` does not occur
                let (var, body) = if &*s.var == v || !s.body.contains_var(v) {
                    (Arc::clone(&s.var), s.body.clone())
                } else if value_vars.contains(&s.var) {
                    let mut avoid = s.body.free_vars();
                    avoid.extend(value_vars.iter().cloned());
                    avoid.push(Arc::from(v));
                    let fresh = pick_var(&s.var, &avoid);
                    let renamed = s.body.subst(&s.var, &Expr::var_ref(&fresh));
                    let body = renamed.subst(v, value);
                    (fresh, body)
                } else {
                    let mut inner = HashMap::new();
                    (Arc::clone(&s.var), s.body.subst_in(v, value, value_vars, &mut inner))
                };
                let stream = Stream {
                    var,
                    start,
                    body,
                    tail: s.tail,
                    monotone: s.monotone,
                };
                if is_join {
                    Term::join(stream)
                } else {
                    Term::meet(stream)
                }
            }
            Node::Cond(p, a, b) => {
                let p = p.subst(v, value);
                match p.decide() {
                    Some(true) => a.subst_in(v, value, value_vars, memo),
                    Some(false) => b.subst_in(v, value, value_vars, memo),
                    None => Term::cond(
                        p,
                        a.subst_in(v, value, value_vars, memo),
                        b.subst_in(v, value, value_vars, memo),
                    ),
                }
            }
        };
        memo.insert(self.clone(), out.clone());
        out
    }

    /// Countable-operator nesting depth.
    pub fn depth(&self) -> usize {
        match &*self.0 {
            Node::Zero | Node::One | Node::Gen(_) => 0,
            Node::Not(x) => x.depth(),
            Node::And(xs) | Node::Or(xs) => xs.iter().map(Term::depth).max().unwrap_or(0),
            Node::Join(s) | Node::Meet(s) => 1 + s.body.depth(),
            Node::Cond(_, a, b) => a.depth().max(b.depth()),
        }
    }

    pub fn check_depth(&self, cap: usize) -> Result<(), TermError> {
        let depth = self.depth();
        if depth > cap {
            Err(TermError::DepthCapExceeded { depth, cap })
        } else {
            Ok(())
        }
    }

    /// A finite Boolean combination of generators with closed endpoints.
    pub fn is_finite(&self) -> bool {
        match &*self.0 {
            Node::Zero | Node::One => true,
            Node::Gen(g) => g.coord.is_closed() && g.lo.is_closed() && g.hi.is_closed(),
            Node::Not(x) => x.is_finite(),
            Node::And(xs) | Node::Or(xs) => xs.iter().all(Term::is_finite),
            Node::Join(_) | Node::Meet(_) | Node::Cond(..) => false,
        }
    }

    /// Every generator occurring in the term, in order of first occurrence.
    pub fn generators(&self) -> Vec<Gen> {
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        self.collect_gens(&mut out, &mut seen);
        out
    }

    fn collect_gens(&self, out: &mut Vec<Gen>, seen: &mut HashSet<Term>) {
        if !seen.insert(self.clone()) {
            return;
        }
        match &*self.0 {
            Node::Zero | Node::One => {}
            Node::Gen(g) => out.push(g.clone()),
            Node::Not(x) => x.collect_gens(out, seen),
            Node::And(xs) | Node::Or(xs) => xs.iter().for_each(|x| x.collect_gens(out, seen)),
            Node::Join(s) | Node::Meet(s) => s.body.collect_gens(out, seen),
            Node::Cond(_, a, b) => {
                a.collect_gens(out, seen);
                b.collect_gens(out, seen);
            }
        }
    }

    /// How the term changes when the integer variable `v` shifts.
    pub fn period(&self, v: &str) -> Period {
        match &*self.0 {
            Node::Zero | Node::One => Period::Invariant,
            Node::Gen(g) => g.coord.period(v).join(g.lo.period(v)).join(g.hi.period(v)),
            Node::Not(x) => x.period(v),
            Node::And(xs) | Node::Or(xs) => xs
                .iter()
                .fold(Period::Invariant, |p, x| p.join(x.period(v))),
            Node::Join(s) | Node::Meet(s) => {
                let start = s.start.period(v);
                if &*s.var == v {
                    start
                } else {
                    start.join(s.body.period(v))
                }
            }
            Node::Cond(p, a, b) => p.period(v).join(a.period(v)).join(b.period(v)),
        }
    }

    /// Canonical JSON tree. Expressions are embedded in their printed form.
    pub fn to_json(&self) -> Value {
        match &*self.0 {
            Node::Zero => json!({"op": "zero"}),
            Node::One => json!({"op": "one"}),
            Node::Gen(g) => json!({
                "op": if g.closed { "cylc" } else { "cyl" },
                "coord": g.coord.to_string(),
                "lo": g.lo.to_string(),
                "hi": g.hi.to_string(),
            }),
            Node::Not(x) => json!({"op": "not", "arg": x.to_json()}),
            Node::And(xs) => json!({"op": "and", "args": xs.iter().map(Term::to_json).collect::<Vec<_>>()}),
            Node::Or(xs) => json!({"op": "or", "args": xs.iter().map(Term::to_json).collect::<Vec<_>>()}),
            Node::Join(s) | Node::Meet(s) => {
                let op = if matches!(&*self.0, Node::Join(_)) { "join" } else { "meet" };
                let mut v = json!({
                    "op": op,
                    "var": &*s.var,
                    "start": s.start.to_string(),
                    "body": s.body.to_json(),
                });
                if let Some(m) = s.tail {
                    v["tail"] = majorant_json(&m);
                }
                if s.monotone {
                    v["monotone"] = json!(true);
                }
                v
            }
            Node::Cond(p, a, b) => json!({
                "op": "if",
                "pred": p.to_string(),
                "then": a.to_json(),
                "else": b.to_json(),
            }),
        }
    }
}

fn majorant_json(m: &Majorant) -> Value {
    match *m {
        Majorant::Geom { c, r } => json!({"kind": "geom", "c": c, "r": r}),
        Majorant::Pow { c, p } => json!({"kind": "pow", "c": c, "p": p}),
        Majorant::GaussTail { alpha, beta } => json!({"kind": "gauss", "alpha": alpha, "beta": beta}),
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::syntax::print_term(self))
    }
}

/// `s ⊕ t = (s ∧ ¬t) ∨ (¬s ∧ t)`.
pub fn symdiff_term(s: &Term, t: &Term) -> Term {
    if s == t {
        return Term::zero();
    }
    Term::or(vec![s.minus(t), t.minus(s)])
}

fn normal_memo() -> &'static Mutex<HashMap<(Term, bool), Term>> {
    static MEMO: OnceLock<Mutex<HashMap<(Term, bool), Term>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Negation normal form with lattice flattening, resolved conditions,
/// collapsed periodic streams and diagonal flattening of nested joins (meets).
/// The result denotes the same element. Idempotent.
pub fn normalize(t: &Term) -> Term {
    nnf(t, false)
}

fn nnf(t: &Term, negate: bool) -> Term {
    let key = (t.clone(), negate);
    if let Some(done) = normal_memo().lock().expect("memo poisoned").get(&key) {
        return done.clone();
    }
    let out = match &*t.0 {
        Node::Zero | Node::One => {
            if negate {
                t.not()
            } else {
                t.clone()
            }
        }
        Node::Gen(_) => {
            if negate {
                intern(Node::Not(t.clone()))
            } else {
                t.clone()
            }
        }
        Node::Not(x) => nnf(x, !negate),
        Node::And(xs) | Node::Or(xs) => {
            let kids: Vec<Term> = xs.iter().map(|x| nnf(x, negate)).collect();
            let is_and = matches!(&*t.0, Node::And(_)) != negate;
            Term::lattice(kids, is_and)
        }
        Node::Join(s) | Node::Meet(s) => {
            let is_join = matches!(&*t.0, Node::Join(_)) != negate;
            let body = nnf(&s.body, negate);
            normal_stream(
                Stream {
                    var: Arc::clone(&s.var),
                    start: s.start.clone(),
                    body,
                    tail: s.tail,
                    monotone: s.monotone,
                },
                is_join,
            )
        }
        Node::Cond(p, a, b) => match p.decide() {
            Some(true) => nnf(a, negate),
            Some(false) => nnf(b, negate),
            None => Term::cond(p.clone(), nnf(a, negate), nnf(b, negate)),
        },
    };
    normal_memo()
        .lock()
        .expect("memo poisoned")
        .insert(key, out.clone());
    out
}

fn normal_stream(s: Stream, is_join: bool) -> Term {
    let combine = |items: Vec<Term>| {
        if is_join {
            Term::or(items)
        } else {
            Term::and(items)
        }
    };
    match s.body.period(&s.var) {
        Period::Invariant => return s.body.clone(),
        Period::Periodic(p) => {
            let items = (0..p)
                .map(|j| {
                    let idx = s.start.add(&Expr::int(j as i64));
                    nnf(&s.body.subst(&s.var, &idx), false)
                })
                .collect();
            return combine(items);
        }
        Period::Unknown => {}
    }
    let same_kind = match s.body.node() {
        Node::Join(inner) if is_join => Some(inner),
        Node::Meet(inner) if !is_join => Some(inner),
        _ => None,
    };
    if let Some(inner) = same_kind {
        if s.tail.is_none() && inner.tail.is_none() {
            return flatten_diagonal(&s, inner, is_join);
        }
    }
    if is_join {
        Term::join(s)
    } else {
        Term::meet(s)
    }
}

/// `⋁_{i>=a} ⋁_{j>=b(i)} t(i,j) = ⋁_{m>=0} t(a + p1(m), b(a + p1(m)) + p2(m))`.
fn flatten_diagonal(outer: &Stream, inner: &Stream, is_join: bool) -> Term {
    let mut avoid = outer.body.free_vars();
    avoid.push(Arc::clone(&outer.var));
    avoid.push(Arc::clone(&inner.var));
    let m = pick_var("m", &avoid);
    let mv = Expr::var_ref(&m);
    let i_val = outer.start.add(&Expr::call(Func::Unpair1, vec![mv.clone()]));
    let inner_start = inner.start.subst(&outer.var, &i_val);
    let j_val = inner_start.add(&Expr::call(Func::Unpair2, vec![mv]));
    let body = inner
        .body
        .subst(&outer.var, &i_val)
        .subst(&inner.var, &j_val);
    let flat = Stream {
        var: m,
        start: Expr::int(0),
        body: nnf(&body, false),
        tail: None,
        monotone: false,
    };
    normal_stream(flat, is_join)
}

/// Cells visited by [`interval_form`] before it gives up.
pub const INTERVAL_FORM_CELL_CAP: usize = 4096;

fn interval_memo() -> &'static Mutex<HashMap<Term, Option<Term>>> {
    static MEMO: OnceLock<Mutex<HashMap<Term, Option<Term>>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Canonical form of a finite term over half-open cylinders with constant
/// bounds: split on the cells of each coordinate in turn and merge runs of
/// adjacent cells with the same residual. Equal sets get equal forms and the
/// empty set becomes `0`. `None` for closed cylinders, streams, conditions or
/// grids above [`INTERVAL_FORM_CELL_CAP`].
pub fn interval_form(t: &Term) -> Option<Term> {
    if t.is_zero() || t.is_one() {
        return Some(t.clone());
    }
    if let Some(done) = interval_memo().lock().expect("memo poisoned").get(t) {
        return done.clone();
    }
    let out = interval_form_uncached(t);
    interval_memo()
        .lock()
        .expect("memo poisoned")
        .insert(t.clone(), out.clone());
    out
}

type Cell = (Scalar, Scalar);

fn interval_form_uncached(t: &Term) -> Option<Term> {
    if !t.is_finite() {
        return None;
    }
    let mut axes: Vec<(u64, Vec<Scalar>)> = Vec::new();
    for g in t.generators() {
        if g.closed {
            return None;
        }
        let c = g.coord.eval().ok()?.as_u64()?;
        let (lo, hi) = (g.lo.eval().ok()?, g.hi.eval().ok()?);
        let slot = match axes.iter().position(|(k, _)| *k == c) {
            Some(i) => i,
            None => {
                axes.push((c, Vec::new()));
                axes.len() - 1
            }
        };
        axes[slot].1.extend([lo, hi].into_iter().filter(Scalar::is_finite));
    }
    axes.sort_by_key(|(c, _)| *c);
    let mut grid: Vec<(u64, Vec<Cell>)> = Vec::new();
    let mut total = 1usize;
    for (c, mut pts) in axes {
        pts.sort_by(|a, b| a.cmp_value(b));
        pts.dedup_by(|a, b| a.cmp_value(b).is_eq());
        let mut edges = vec![Scalar::NegInf];
        edges.extend(pts);
        edges.push(Scalar::PosInf);
        let cells: Vec<Cell> = edges.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        total = total.checked_mul(cells.len())?;
        if total > INTERVAL_FORM_CELL_CAP {
            return None;
        }
        grid.push((c, cells));
    }
    Some(split_axes(t, &grid, &mut HashMap::new()))
}

fn split_axes(t: &Term, grid: &[(u64, Vec<Cell>)], memo: &mut HashMap<(Term, usize), Term>) -> Term {
    if t.is_zero() || t.is_one() || grid.is_empty() {
        return t.clone();
    }
    let key = (t.clone(), grid.len());
    if let Some(done) = memo.get(&key) {
        return done.clone();
    }
    let (coord, cells) = &grid[0];
    let mut runs: Vec<(Scalar, Scalar, Term)> = Vec::new();
    for (lo, hi) in cells {
        let r = split_axes(&fix_cell(t, *coord, lo, hi, &mut HashMap::new()), &grid[1..], memo);
        match runs.last_mut() {
            Some(last) if last.2 == r => last.1 = hi.clone(),
            _ => runs.push((lo.clone(), hi.clone(), r)),
        }
    }
    let out = if runs.len() == 1 {
        runs.pop().expect("one run").2
    } else {
        let c = Expr::constant(Scalar::int(*coord as i64));
        Term::or(
            runs.into_iter()
                .filter(|(_, _, r)| !r.is_zero())
                .map(|(lo, hi, r)| Term::cyl(c.clone(), Expr::constant(lo), Expr::constant(hi)).and2(&r))
                .collect(),
        )
    };
    memo.insert(key, out.clone());
    out
}

/// Decides the generators on `coord` for a cell lying inside or outside each.
fn fix_cell(t: &Term, coord: u64, lo: &Scalar, hi: &Scalar, memo: &mut HashMap<Term, Term>) -> Term {
    if let Some(done) = memo.get(t) {
        return done.clone();
    }
    let out = match &*t.0 {
        Node::Gen(g) if g.coord.eval().ok().and_then(|c| c.as_u64()) == Some(coord) => {
            let inside = match (g.lo.eval(), g.hi.eval()) {
                (Ok(glo), Ok(ghi)) => !glo.cmp_value(lo).is_gt() && !hi.cmp_value(&ghi).is_gt(),
                _ => false,
            };
            if inside {
                Term::one()
            } else {
                Term::zero()
            }
        }
        Node::Not(x) => fix_cell(x, coord, lo, hi, memo).not(),
        Node::And(xs) => Term::and(xs.iter().map(|x| fix_cell(x, coord, lo, hi, memo)).collect()),
        Node::Or(xs) => Term::or(xs.iter().map(|x| fix_cell(x, coord, lo, hi, memo)).collect()),
        _ => t.clone(),
    };
    memo.insert(t.clone(), out.clone());
    out
}

/// Finite bounds `lower <= t <= upper` from the first `n` elements of every
/// stream. A join contributes `(first n, 1)`, a meet `(0, first n)`.
pub fn truncate(t: &Term, n: u64) -> Result<(Term, Term), TermError> {
    let sw = sandwich(t, n, &|_, _| None)?;
    Ok((sw.lower, sw.upper))
}

/// Finite elements `lower`, `upper` with `μ(lower ∖ t) <= lower_slack` and
/// `μ(t ∖ upper) <= upper_slack`, valid for every measure whose streams obey
/// their majorants.
#[derive(Clone, Debug)]
pub struct Sandwich {
    pub lower: Term,
    pub lower_slack: f64,
    pub upper: Term,
    pub upper_slack: f64,
}

/// Truncates every stream at `n` elements. `tails` supplies a majorant for
/// streams without a declared one; with a majorant, the dual side is the same
/// truncation plus tail slack instead of the trivial 1 (join) or 0 (meet).
pub fn sandwich(
    t: &Term,
    n: u64,
    tails: &dyn Fn(&Stream, bool) -> Option<Majorant>,
) -> Result<Sandwich, TermError> {
    let mut memo = HashMap::new();
    sandwich_in(&normalize(t), n, tails, &mut memo)
}

fn sandwich_in(
    t: &Term,
    n: u64,
    tails: &dyn Fn(&Stream, bool) -> Option<Majorant>,
    memo: &mut HashMap<Term, Sandwich>,
) -> Result<Sandwich, TermError> {
    if let Some(done) = memo.get(t) {
        return Ok(done.clone());
    }
    let exact = |x: &Term| Sandwich {
        lower: x.clone(),
        lower_slack: 0.0,
        upper: x.clone(),
        upper_slack: 0.0,
    };
    let out = match t.node() {
        Node::Zero | Node::One => exact(t),
        Node::Gen(_) | Node::Not(_) => {
            if !t.is_closed() {
                return Err(TermError::FreeVariable(t.free_vars()[0].to_string()));
            }
            exact(t)
        }
        Node::And(xs) | Node::Or(xs) => {
            let parts = xs
                .iter()
                .map(|x| sandwich_in(x, n, tails, memo))
                .collect::<Result<Vec<_>, _>>()?;
            let is_and = matches!(t.node(), Node::And(_));
            let pick = |f: fn(&Sandwich) -> Term| {
                let items = parts.iter().map(f).collect();
                if is_and {
                    Term::and(items)
                } else {
                    Term::or(items)
                }
            };
            Sandwich {
                lower: pick(|s| s.lower.clone()),
                lower_slack: parts.iter().map(|s| s.lower_slack).sum(),
                upper: pick(|s| s.upper.clone()),
                upper_slack: parts.iter().map(|s| s.upper_slack).sum(),
            }
        }
        Node::Join(s) | Node::Meet(s) => {
            let is_join = matches!(t.node(), Node::Join(_));
            let start = s.start_index()?;
            let parts = (0..n)
                .map(|k| sandwich_in(&s.at(k)?, n, tails, memo))
                .collect::<Result<Vec<_>, _>>()?;
            let lowers: Vec<Term> = parts.iter().map(|p| p.lower.clone()).collect();
            let uppers: Vec<Term> = parts.iter().map(|p| p.upper.clone()).collect();
            let lslack: f64 = parts.iter().map(|p| p.lower_slack).sum();
            let uslack: f64 = parts.iter().map(|p| p.upper_slack).sum();
            let majorant = s.tail.or_else(|| tails(s, is_join)).filter(Majorant::is_valid);
            let rest = majorant.map(|m| m.tail((start + n) as f64));
            if is_join {
                let lower = if s.monotone {
                    lowers.last().cloned().unwrap_or_else(Term::zero)
                } else {
                    Term::or(lowers)
                };
                match rest {
                    Some(r) => Sandwich {
                        lower,
                        lower_slack: lslack,
                        upper: Term::or(uppers),
                        upper_slack: uslack + r,
                    },
                    None => Sandwich {
                        lower,
                        lower_slack: lslack,
                        upper: Term::one(),
                        upper_slack: 0.0,
                    },
                }
            } else {
                let upper = if s.monotone {
                    uppers.last().cloned().unwrap_or_else(Term::one)
                } else {
                    Term::and(uppers)
                };
                match rest {
                    Some(r) => Sandwich {
                        lower: Term::and(lowers),
                        lower_slack: lslack + r,
                        upper,
                        upper_slack: uslack,
                    },
                    None => Sandwich {
                        lower: Term::zero(),
                        lower_slack: 0.0,
                        upper,
                        upper_slack: uslack,
                    },
                }
            }
        }
        Node::Cond(..) => {
            return Err(TermError::FreeVariable(
                t.free_vars().first().map(|v| v.to_string()).unwrap_or_default(),
            ))
        }
    };
    memo.insert(t.clone(), out.clone());
    Ok(out)
}

/// Convenience for guards of the form `lhs op rhs`.
pub fn pred(lhs: Expr, op: CmpOp, rhs: Expr) -> Pred {
    Pred::new(lhs, op, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(i: i64) -> Term {
        Term::cyl(Expr::int(i), Expr::int(0), Expr::inf())
    }

    fn stream_n(body: Term) -> Stream {
        Stream::new("n", Expr::int(1), body)
    }

    fn cyl_n() -> Term {
        Term::cyl(Expr::var("n"), Expr::var("n"), Expr::inf())
    }

    #[test]
    fn hash_consing_shares_structure() {
        let a = Term::and(vec![g(1), g(2)]);
        let b = Term::and(vec![g(1), g(2)]);
        assert_eq!(a, b);
        assert!(Arc::ptr_eq(&a.0, &b.0));
        assert_ne!(a, Term::and(vec![g(2), g(1)]));
    }

    #[test]
    fn double_negation_and_de_morgan() {
        let raw = intern(Node::Not(intern(Node::Not(g(1)))));
        assert_eq!(normalize(&raw), g(1));
        let join = Term::join(stream_n(cyl_n()));
        let pushed = normalize(&join.not());
        match pushed.node() {
            Node::Meet(s) => assert_eq!(s.body, cyl_n().not()),
            other => panic!("expected a meet, got {other:?}"),
        }
        assert_eq!(normalize(&pushed.not()), join);
    }

    #[test]
    fn complementary_literals_fold() {
        assert!(Term::and(vec![g(1), g(1).not()]).is_zero());
        assert!(Term::or(vec![g(1), g(2), g(1).not()]).is_one());
        assert!(symdiff_term(&g(3), &g(3)).is_zero());
    }

    #[test]
    fn nested_joins_flatten_along_the_diagonal() {
        let inner = Stream::new(
            "j",
            Expr::int(0),
            Term::cyl(Expr::var("i"), Expr::var("j"), Expr::inf()),
        );
        let outer = Stream::new("i", Expr::int(1), Term::join(inner));
        let flat = normalize(&Term::join(outer));
        assert_eq!(flat.depth(), 1);
        let Node::Join(s) = flat.node() else { panic!() };
        // m = 0 -> (i, j) = (1, 0); m = 2 -> unpair(2) = (0, 1) -> (1, 1); m = 1 -> (2, 0)
        let expect = [(1, 0), (2, 0), (1, 1)];
        for (k, (i, j)) in expect.into_iter().enumerate() {
            let want = Term::cyl(Expr::int(i), Expr::int(j), Expr::inf());
            assert_eq!(s.at(k as u64).unwrap(), want);
        }
    }

    #[test]
    fn periodic_and_constant_streams_collapse() {
        let alt = Term::cond(
            pred(
                Expr::call(Func::Mod, vec![Expr::var("n"), Expr::int(2)]),
                CmpOp::Eq,
                Expr::int(0),
            ),
            g(1),
            g(1).not(),
        );
        assert!(normalize(&Term::join(stream_n(alt.clone()))).is_one());
        assert!(normalize(&Term::meet(stream_n(alt))).is_zero());
        assert_eq!(normalize(&Term::join(stream_n(g(4)))), g(4));
    }

    #[test]
    fn truncation_shapes() {
        let join = Term::join(Stream::new("n", Expr::int(0), cyl_n()));
        let (lo, hi) = truncate(&join, 2).unwrap();
        let s0 = Term::cyl(Expr::int(0), Expr::int(0), Expr::inf());
        let s1 = Term::cyl(Expr::int(1), Expr::int(1), Expr::inf());
        assert_eq!(lo, Term::or(vec![s0.clone(), s1.clone()]));
        assert!(hi.is_one());
        let meet = Term::meet(Stream::new("n", Expr::int(0), cyl_n()));
        let (lo, hi) = truncate(&meet, 2).unwrap();
        assert!(lo.is_zero());
        assert_eq!(hi, Term::and(vec![s0, s1]));
        assert_eq!(truncate(&g(2), 5).unwrap(), (g(2), g(2)));
    }

    #[test]
    fn majorant_slack_tightens_the_dual_side() {
        let join = Term::join(stream_n(cyl_n()).with_tail(Majorant::Geom { c: 1.0, r: 0.5 }));
        let sw = sandwich(&join, 3, &|_, _| None).unwrap();
        assert_eq!(sw.upper, sw.lower);
        assert!((sw.upper_slack - 0.125).abs() < 1e-12);
    }

    #[test]
    fn substitution_avoids_capture() {
        let body = Term::cyl(Expr::var("n"), Expr::var("k"), Expr::inf());
        let t = Term::join(Stream::new("n", Expr::int(0), body));
        let s = t.subst("k", &Expr::var("n"));
        let Node::Join(st) = s.node() else { panic!() };
        assert_ne!(&*st.var, "n");
        assert!(s.contains_var("n"));
    }

    #[test]
    fn depth_cap() {
        let inner = Term::meet(stream_n(cyl_n()));
        let mid = Term::join(Stream::new("k", Expr::int(1), inner));
        assert_eq!(mid.depth(), 2);
        assert!(mid.check_depth(1).is_err());
        assert!(mid.check_depth(3).is_ok());
    }

    fn iv(c: i64, lo: i64, hi: i64) -> Term {
        Term::cyl(Expr::int(c), Expr::int(lo), Expr::int(hi))
    }

    #[test]
    fn interval_form_merges_and_decides_emptiness() {
        let (a, b) = (iv(1, 0, 2), iv(1, 1, 3));
        assert_eq!(interval_form(&a.or2(&b)), Some(iv(1, 0, 3)));
        assert_eq!(interval_form(&a.minus(&iv(1, -1, 5))), Some(Term::zero()));
        assert_eq!(interval_form(&a.or2(&a.not())), Some(Term::one()));
        // the same set written two ways
        let x = iv(1, 0, 1).and2(&iv(2, 0, 1)).or2(&iv(1, 0, 1).and2(&iv(2, 1, 2)));
        let y = iv(1, 0, 1).and2(&iv(2, 0, 2));
        assert_eq!(interval_form(&x), interval_form(&y));
        assert_eq!(interval_form(&Term::cylc(Expr::int(1), Expr::int(0), Expr::int(1))), None);
        assert_eq!(interval_form(&Term::join(stream_n(cyl_n()))), None);
    }
}
