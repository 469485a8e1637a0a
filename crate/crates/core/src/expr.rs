//! Closed-form index expressions.
//!
//! Countable joins and meets are written as templates: a term with a free
//! index variable, instantiated at `n = start, start + 1, ...`. Generator
//! endpoints and function values inside templates are [`Expr`]s over exact
//! rationals, floats and a small table of registered functions. Keeping the
//! streams in this closed form makes them printable, serializable and open to
//! the symbolic analyses below (periodicity, monotonicity, limits).

use num_bigint::{BigInt, Sign};
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("unbound index variable `{0}`")]
    FreeVariable(String),
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Var = Arc<str>;

/// An extended real: exact rational, binary float, or ±∞.
#[derive(Clone, Debug)]
pub enum Scalar {
    Rat(BigRational),
    Float(f64),
    PosInf,
    NegInf,
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a == b,
            (Scalar::Float(a), Scalar::Float(b)) => a.to_bits() == b.to_bits(),
            (Scalar::PosInf, Scalar::PosInf) | (Scalar::NegInf, Scalar::NegInf) => true,
            _ => false,
        }
    }
}

impl Eq for Scalar {}

impl Hash for Scalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Scalar::Rat(r) => r.hash(state),
            Scalar::Float(f) => f.to_bits().hash(state),
            _ => {}
        }
    }
}

fn domain(msg: impl Into<String>) -> ExprError {
    ExprError::Domain(msg.into())
}

impl Scalar {
    pub fn int(n: i64) -> Scalar {
        Scalar::Rat(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(p: i64, q: i64) -> Scalar {
        Scalar::Rat(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    /// Non-finite floats become ±∞; NaN is rejected.
    pub fn float(x: f64) -> Result<Scalar, ExprError> {
        if x.is_nan() {
            Err(domain("NaN"))
        } else if x == f64::INFINITY {
            Ok(Scalar::PosInf)
        } else if x == f64::NEG_INFINITY {
            Ok(Scalar::NegInf)
        } else {
            Ok(Scalar::Float(x))
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rat(r) => r.to_f64().unwrap_or_else(|| {
                if r.is_negative() {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }),
            Scalar::Float(f) => *f,
            Scalar::PosInf => f64::INFINITY,
            Scalar::NegInf => f64::NEG_INFINITY,
        }
    }

    /// The exact rational value, if finite.
    pub fn to_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Rat(r) => Some(r.clone()),
            Scalar::Float(f) => BigRational::from_float(*f),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Scalar::PosInf | Scalar::NegInf)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Float(f) => *f == 0.0,
            _ => false,
        }
    }

    pub fn as_integer(&self) -> Option<BigInt> {
        self.to_rational()
            .filter(|r| r.is_integer())
            .map(|r| r.to_integer())
    }

    pub fn as_i64(&self) -> Option<i64> {
        self.as_integer().and_then(|i| i.to_i64())
    }

    pub fn as_u64(&self) -> Option<u64> {
        self.as_integer().and_then(|i| i.to_u64())
    }

    pub fn signum(&self) -> i32 {
        match self {
            Scalar::Rat(r) => match r.numer().sign() {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            },
            Scalar::Float(f) => {
                if *f > 0.0 {
                    1
                } else if *f < 0.0 {
                    -1
                } else {
                    0
                }
            }
            Scalar::PosInf => 1,
            Scalar::NegInf => -1,
        }
    }

    /// Exact comparison on the extended reals.
    pub fn cmp_value(&self, other: &Scalar) -> Ordering {
        use Scalar::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
            (Float(a), Float(b)) => a.partial_cmp(b).expect("no NaN"),
            _ => {
                let a = self.to_rational().expect("finite");
                let b = other.to_rational().expect("finite");
                a.cmp(&b)
            }
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::Float(f) => Scalar::Float(-f),
            Scalar::PosInf => Scalar::NegInf,
            Scalar::NegInf => Scalar::PosInf,
        }
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar, ExprError> {
        use Scalar::*;
        match (self, other) {
            (PosInf, NegInf) | (NegInf, PosInf) => Err(domain("inf - inf")),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (Rat(a), Rat(b)) => Ok(Rat(a + b)),
            _ => Scalar::float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar, ExprError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar, ExprError> {
        use Scalar::*;
        match (self, other) {
            (Rat(a), Rat(b)) => Ok(Rat(a * b)),
            (Float(_), Float(_)) | (Rat(_), Float(_)) | (Float(_), Rat(_)) => {
                Scalar::float(self.to_f64() * other.to_f64())
            }
            _ => {
                let s = self.signum() * other.signum();
                match s {
                    0 => Err(domain("0 * inf")),
                    1 => Ok(PosInf),
                    _ => Ok(NegInf),
                }
            }
        }
    }

    pub fn div(&self, other: &Scalar) -> Result<Scalar, ExprError> {
        use Scalar::*;
        if other.is_zero() {
            return Err(domain("division by zero"));
        }
        match (self, other) {
            (Rat(a), Rat(b)) => Ok(Rat(a / b)),
            (PosInf | NegInf, PosInf | NegInf) => Err(domain("inf / inf")),
            (_, PosInf | NegInf) => Ok(Rat(BigRational::zero())),
            (PosInf | NegInf, _) => {
                if other.signum() > 0 {
                    Ok(self.clone())
                } else {
                    Ok(self.neg())
                }
            }
            _ => Scalar::float(self.to_f64() / other.to_f64()),
        }
    }

    pub fn pow(&self, exp: &Scalar) -> Result<Scalar, ExprError> {
        use Scalar::*;
        if let (Rat(b), Some(e)) = (self, exp.as_i64()) {
            if e.unsigned_abs() <= 4096 {
                if b.is_zero() && e < 0 {
                    return Err(domain("0 to a negative power"));
                }
                let p = num_traits::pow(b.clone(), e.unsigned_abs() as usize);
                return Ok(Rat(if e < 0 { p.recip() } else { p }));
            }
        }
        let (b, e) = (self.to_f64(), exp.to_f64());
        if b < 0.0 && exp.as_integer().is_none() {
            return Err(domain("negative base with fractional exponent"));
        }
        Scalar::float(b.powf(e))
    }

    pub fn floor(&self) -> Scalar {
        match self.to_rational() {
            Some(r) => Scalar::Rat(BigRational::from_integer(r.floor().to_integer())),
            None => self.clone(),
        }
    }

    pub fn ceil(&self) -> Scalar {
        match self.to_rational() {
            Some(r) => Scalar::Rat(BigRational::from_integer(r.ceil().to_integer())),
            None => self.clone(),
        }
    }

    pub fn min(&self, other: &Scalar) -> Scalar {
        if self.cmp_value(other) == Ordering::Greater {
            other.clone()
        } else {
            self.clone()
        }
    }

    pub fn max(&self, other: &Scalar) -> Scalar {
        if self.cmp_value(other) == Ordering::Less {
            other.clone()
        } else {
            self.clone()
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Float(x) => write!(f, "fl({x:?})"),
            Scalar::PosInf => write!(f, "inf"),
            Scalar::NegInf => write!(f, "-inf"),
        }
    }
}

/// Registered closed-form functions usable inside templates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Floor,
    Ceil,
    Min,
    Max,
    Mod,
    Sqrt,
    /// `c(x) = Φ⁻¹(1 − 2^{−x})`, the standard normal upper-tail quantile at `2^{−x}`.
    GaussQuantile,
    /// `q(n)`: the n-th rational of `[0,1]` in order of denominator (0, 1, 1/2, 1/3, 2/3, ...).
    Rational,
    /// `d(m)`: the m-th dyadic rational of `(0,1]` (1, 1/2, 1/4, 3/4, 1/8, ...).
    Dyadic,
    /// `e(m)`: the m-th non-negative dyadic rational, via the Cantor pairing.
    NonNegDyadic,
    /// First component of the inverse Cantor pairing.
    Unpair1,
    /// Second component of the inverse Cantor pairing.
    Unpair2,
}

impl Func {
    pub const ALL: [Func; 12] = [
        Func::Floor,
        Func::Ceil,
        Func::Min,
        Func::Max,
        Func::Mod,
        Func::Sqrt,
        Func::GaussQuantile,
        Func::Rational,
        Func::Dyadic,
        Func::NonNegDyadic,
        Func::Unpair1,
        Func::Unpair2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Floor => "floor",
            Func::Ceil => "ceil",
            Func::Min => "min",
            Func::Max => "max",
            Func::Mod => "mod",
            Func::Sqrt => "sqrt",
            Func::GaussQuantile => "c",
            Func::Rational => "q",
            Func::Dyadic => "d",
            Func::NonNegDyadic => "e",
            Func::Unpair1 => "p1",
            Func::Unpair2 => "p2",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max | Func::Mod => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, args: &[Scalar]) -> Result<Scalar, ExprError> {
        let index = |s: &Scalar| {
            s.as_u64()
                .ok_or_else(|| domain(format!("{}: expected a natural number, got {s}", self.name())))
        };
        match self {
            Func::Floor => Ok(args[0].floor()),
            Func::Ceil => Ok(args[0].ceil()),
            Func::Min => Ok(args[0].min(&args[1])),
            Func::Max => Ok(args[0].max(&args[1])),
            Func::Mod => {
                let (a, m) = (&args[0], &args[1]);
                match (a.to_rational(), m.to_rational()) {
                    (Some(a), Some(m)) if m.is_positive() => {
                        Ok(Scalar::Rat(&a - &m * (&a / &m).floor()))
                    }
                    _ => Err(domain("mod needs finite arguments and a positive modulus")),
                }
            }
            Func::Sqrt => {
                let x = &args[0];
                match x {
                    Scalar::PosInf => Ok(Scalar::PosInf),
                    _ if x.signum() < 0 => Err(domain("sqrt of a negative number")),
                    Scalar::Rat(r) => {
                        let (n, d) = (r.numer().sqrt(), r.denom().sqrt());
                        if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
                            Ok(Scalar::Rat(BigRational::new(n, d)))
                        } else {
                            Scalar::float(x.to_f64().sqrt())
                        }
                    }
                    _ => Scalar::float(x.to_f64().sqrt()),
                }
            }
            Func::GaussQuantile => {
                let x = &args[0];
                if x.signum() <= 0 {
                    return Err(domain("c(x) needs x > 0"));
                }
                Scalar::float(crate::backends::normal::upper_quantile_pow2(x.to_f64()))
            }
            Func::Rational => Ok(Scalar::Rat(nth_rational(index(&args[0])?))),
            Func::Dyadic => Ok(Scalar::Rat(nth_dyadic(index(&args[0])?))),
            Func::NonNegDyadic => {
                let (i, j) = unpair(index(&args[0])?);
                let frac = if j == 0 {
                    BigRational::zero()
                } else {
                    nth_dyadic(j)
                };
                Ok(Scalar::Rat(BigRational::from_integer(BigInt::from(i)) + frac))
            }
            Func::Unpair1 => Ok(Scalar::int(unpair(index(&args[0])?).0 as i64)),
            Func::Unpair2 => Ok(Scalar::int(unpair(index(&args[0])?).1 as i64)),
        }
    }
}

/// Parses `p/q`, an integer, or a decimal with optional exponent exactly.
pub fn parse_exact(text: &str) -> Option<BigRational> {
    let s = text.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (!q.is_zero()).then(|| BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    // a trailing zero keeps "5." and ".5" parseable; the scale compensates
    let all: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let scale = exp - frac_part.len() as i32 - 1;
    let ten = BigRational::from_integer(BigInt::from(10));
    let r = BigRational::from_integer(all);
    let r = if scale >= 0 {
        r * num_traits::pow(ten, scale as usize)
    } else {
        r / num_traits::pow(ten, (-scale) as usize)
    };
    Some(if neg { -r } else { r })
}

/// Inverse of the Cantor pairing `(x, y) ↦ (x+y)(x+y+1)/2 + y`.
pub fn unpair(m: u64) -> (u64, u64) {
    let w = ((8 * m as u128 + 1).sqrt() - 1) / 2;
    let t = w * (w + 1) / 2;
    let y = m as u128 - t;
    ((w - y) as u64, y as u64)
}

/// `1, 1/2, 1/4, 3/4, 1/8, 3/8, ...`: every dyadic rational in `(0, 1]` exactly once.
pub fn nth_dyadic(m: u64) -> BigRational {
    if m == 0 {
        return BigRational::one();
    }
    let level = 64 - m.leading_zeros();
    let i = m - (1u64 << (level - 1));
    BigRational::new(
        BigInt::from(2 * i + 1),
        BigInt::one() << level as usize,
    )
}

/// `0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, ...`: every rational in `[0, 1]` exactly once.
pub fn nth_rational(n: u64) -> BigRational {
    if n < 2 {
        return BigRational::from_integer(BigInt::from(n));
    }
    let mut remaining = n - 2;
    let mut den: u64 = 2;
    loop {
        for num in 1..den {
            if num.gcd(&den) == 1 {
                if remaining == 0 {
                    return BigRational::new(BigInt::from(num), BigInt::from(den));
                }
                remaining -= 1;
            }
        }
        den += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprNode {
    Const(Scalar),
    Var(Var),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Pow(Expr, Expr),
    Call(Func, Vec<Expr>),
}

/// A shared, immutable expression tree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Expr(Arc<ExprNode>);

/// Direction of a sequence in its index variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mono {
    Constant,
    Increasing,
    Decreasing,
}

impl Mono {
    pub fn flip(self) -> Mono {
        match self {
            Mono::Increasing => Mono::Decreasing,
            Mono::Decreasing => Mono::Increasing,
            Mono::Constant => Mono::Constant,
        }
    }

    /// Direction of a sum of two sequences with these directions.
    pub fn combine(self, other: Mono) -> Option<Mono> {
        match (self, other) {
            (Mono::Constant, m) | (m, Mono::Constant) => Some(m),
            (a, b) if a == b => Some(a),
            _ => None,
        }
    }
}

/// Behaviour of an expression under shifts of an index variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Period {
    Invariant,
    Periodic(u64),
    Unknown,
}

impl Period {
    pub fn join(self, other: Period) -> Period {
        match (self, other) {
            (Period::Unknown, _) | (_, Period::Unknown) => Period::Unknown,
            (Period::Invariant, p) | (p, Period::Invariant) => p,
            (Period::Periodic(a), Period::Periodic(b)) => {
                let l = a.lcm(&b);
                if l > 1 << 16 {
                    Period::Unknown
                } else {
                    Period::Periodic(l)
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SignInfo {
    NonNeg,
    NonPos,
    Unknown,
}

impl SignInfo {
    fn of(s: &Scalar) -> SignInfo {
        match s.signum() {
            1 | 0 if s.signum() >= 0 => SignInfo::NonNeg,
            _ => SignInfo::NonPos,
        }
    }

    fn neg(self) -> SignInfo {
        match self {
            SignInfo::NonNeg => SignInfo::NonPos,
            SignInfo::NonPos => SignInfo::NonNeg,
            SignInfo::Unknown => SignInfo::Unknown,
        }
    }
}

impl Expr {
    fn node(n: ExprNode) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn kind(&self) -> &ExprNode {
        &self.0
    }

    pub fn constant(s: Scalar) -> Expr {
        Expr::node(ExprNode::Const(s))
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(Scalar::int(n))
    }

    pub fn ratio(p: i64, q: i64) -> Expr {
        Expr::constant(Scalar::ratio(p, q))
    }

    pub fn rational(r: BigRational) -> Expr {
        Expr::constant(Scalar::Rat(r))
    }

    pub fn float(x: f64) -> Expr {
        Expr::constant(Scalar::float(x).expect("not NaN"))
    }

    pub fn inf() -> Expr {
        Expr::constant(Scalar::PosInf)
    }

    pub fn neg_inf() -> Expr {
        Expr::constant(Scalar::NegInf)
    }

    pub fn var(name: &str) -> Expr {
        Expr::node(ExprNode::Var(Arc::from(name)))
    }

    pub fn var_ref(v: &Var) -> Expr {
        Expr::node(ExprNode::Var(Arc::clone(v)))
    }

    pub fn as_const(&self) -> Option<&Scalar> {
        match &*self.0 {
            ExprNode::Const(s) => Some(s),
            _ => None,
        }
    }

    fn fold(node: ExprNode) -> Expr {
        let e = Expr::node(node);
        let foldable = match &*e.0 {
            ExprNode::Const(_) | ExprNode::Var(_) => false,
            ExprNode::Neg(a) => a.as_const().is_some(),
            ExprNode::Add(a, b)
            | ExprNode::Sub(a, b)
            | ExprNode::Mul(a, b)
            | ExprNode::Div(a, b)
            | ExprNode::Pow(a, b) => a.as_const().is_some() && b.as_const().is_some(),
            ExprNode::Call(_, args) => args.iter().all(|a| a.as_const().is_some()),
        };
        if foldable {
            // keep the symbolic form when evaluation fails so the error surfaces at use
            if let Ok(v) = e.eval() {
                return Expr::constant(v);
            }
        }
        e
    }

    pub fn add(&self, o: &Expr) -> Expr {
        Expr::fold(ExprNode::Add(self.clone(), o.clone()))
    }

    pub fn sub(&self, o: &Expr) -> Expr {
        Expr::fold(ExprNode::Sub(self.clone(), o.clone()))
    }

    pub fn mul(&self, o: &Expr) -> Expr {
        Expr::fold(ExprNode::Mul(self.clone(), o.clone()))
    }

    pub fn div(&self, o: &Expr) -> Expr {
        Expr::fold(ExprNode::Div(self.clone(), o.clone()))
    }

    pub fn neg(&self) -> Expr {
        Expr::fold(ExprNode::Neg(self.clone()))
    }

    pub fn pow(&self, o: &Expr) -> Expr {
        Expr::fold(ExprNode::Pow(self.clone(), o.clone()))
    }

    pub fn call(f: Func, args: Vec<Expr>) -> Expr {
        assert_eq!(args.len(), f.arity(), "arity of {}", f.name());
        Expr::fold(ExprNode::Call(f, args))
    }

    /// `2^{-self}`.
    pub fn pow2_neg(&self) -> Expr {
        Expr::int(2).pow(&self.neg())
    }

    pub fn eval(&self) -> Result<Scalar, ExprError> {
        match &*self.0 {
            ExprNode::Const(s) => Ok(s.clone()),
            ExprNode::Var(v) => Err(ExprError::FreeVariable(v.to_string())),
            ExprNode::Add(a, b) => a.eval()?.add(&b.eval()?),
            ExprNode::Sub(a, b) => a.eval()?.sub(&b.eval()?),
            ExprNode::Mul(a, b) => a.eval()?.mul(&b.eval()?),
            ExprNode::Div(a, b) => a.eval()?.div(&b.eval()?),
            ExprNode::Neg(a) => Ok(a.eval()?.neg()),
            ExprNode::Pow(a, b) => a.eval()?.pow(&b.eval()?),
            ExprNode::Call(f, args) => {
                let vals: Vec<Scalar> = args.iter().map(|a| a.eval()).collect::<Result<_, _>>()?;
                f.apply(&vals)
            }
        }
    }

    pub fn contains_var(&self, v: &str) -> bool {
        match &*self.0 {
            ExprNode::Const(_) => false,
            ExprNode::Var(w) => &**w == v,
            ExprNode::Neg(a) => a.contains_var(v),
            ExprNode::Add(a, b)
            | ExprNode::Sub(a, b)
            | ExprNode::Mul(a, b)
            | ExprNode::Div(a, b)
            | ExprNode::Pow(a, b) => a.contains_var(v) || b.contains_var(v),
            ExprNode::Call(_, args) => args.iter().any(|a| a.contains_var(v)),
        }
    }

    pub fn free_vars(&self, out: &mut Vec<Var>) {
        match &*self.0 {
            ExprNode::Const(_) => {}
            ExprNode::Var(w) => {
                if !out.contains(w) {
                    out.push(Arc::clone(w));
                }
            }
            ExprNode::Neg(a) => a.free_vars(out),
            ExprNode::Add(a, b)
            | ExprNode::Sub(a, b)
            | ExprNode::Mul(a, b)
            | ExprNode::Div(a, b)
            | ExprNode::Pow(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            ExprNode::Call(_, args) => args.iter().for_each(|a| a.free_vars(out)),
        }
    }

    pub fn is_closed(&self) -> bool {
        let mut vs = Vec::new();
        self.free_vars(&mut vs);
        vs.is_empty()
    }

    /// Replaces `v` by `value`, folding constants along the way.
    pub fn subst(&self, v: &str, value: &Expr) -> Expr {
        if !self.contains_var(v) {
            return self.clone();
        }
        match &*self.0 {
            ExprNode::Const(_) => self.clone(),
            ExprNode::Var(_) => value.clone(),
            ExprNode::Neg(a) => a.subst(v, value).neg(),
            ExprNode::Add(a, b) => a.subst(v, value).add(&b.subst(v, value)),
            ExprNode::Sub(a, b) => a.subst(v, value).sub(&b.subst(v, value)),
            ExprNode::Mul(a, b) => a.subst(v, value).mul(&b.subst(v, value)),
            ExprNode::Div(a, b) => a.subst(v, value).div(&b.subst(v, value)),
            ExprNode::Pow(a, b) => a.subst(v, value).pow(&b.subst(v, value)),
            ExprNode::Call(f, args) => {
                Expr::call(*f, args.iter().map(|a| a.subst(v, value)).collect())
            }
        }
    }

    /// Slope `a` when the expression is `a·v + b` with `b` free of `v`.
    pub fn affine_coeff(&self, v: &str) -> Option<BigRational> {
        if !self.contains_var(v) {
            return Some(BigRational::zero());
        }
        match &*self.0 {
            ExprNode::Var(_) => Some(BigRational::one()),
            ExprNode::Neg(a) => a.affine_coeff(v).map(|c| -c),
            ExprNode::Add(a, b) => Some(a.affine_coeff(v)? + b.affine_coeff(v)?),
            ExprNode::Sub(a, b) => Some(a.affine_coeff(v)? - b.affine_coeff(v)?),
            ExprNode::Mul(a, b) => match (a.as_const(), b.as_const()) {
                (Some(k), _) => Some(k.to_rational()? * b.affine_coeff(v)?),
                (_, Some(k)) => Some(a.affine_coeff(v)? * k.to_rational()?),
                _ => None,
            },
            ExprNode::Div(a, b) => {
                let k = b.as_const()?.to_rational()?;
                if k.is_zero() {
                    None
                } else {
                    Some(a.affine_coeff(v)? / k)
                }
            }
            _ => None,
        }
    }

    /// How the value changes when the integer variable `v` is shifted.
    pub fn period(&self, v: &str) -> Period {
        if !self.contains_var(v) {
            return Period::Invariant;
        }
        match &*self.0 {
            ExprNode::Call(Func::Mod, args) => {
                let Some(m) = args[1].as_const().and_then(|m| m.as_u64()) else {
                    return Period::Unknown;
                };
                match args[0].affine_coeff(v) {
                    Some(a) if a.is_integer() && m > 0 => {
                        let a = a.to_integer().abs().to_u64().unwrap_or(0) % m;
                        if a == 0 {
                            Period::Invariant
                        } else {
                            Period::Periodic(m / a.gcd(&m))
                        }
                    }
                    _ => Period::Unknown,
                }
            }
            ExprNode::Var(_) => Period::Unknown,
            ExprNode::Const(_) => Period::Invariant,
            ExprNode::Neg(a) => a.period(v),
            ExprNode::Add(a, b)
            | ExprNode::Sub(a, b)
            | ExprNode::Mul(a, b)
            | ExprNode::Div(a, b)
            | ExprNode::Pow(a, b) => a.period(v).join(b.period(v)),
            ExprNode::Call(_, args) => args
                .iter()
                .fold(Period::Invariant, |p, a| p.join(a.period(v))),
        }
    }

    /// Direction of the sequence `v ↦ self` over integers `v ≥ 0`, if it can
    /// be read off the syntax.
    pub fn monotonicity(&self, v: &str) -> Option<Mono> {
        self.mono_sign(v).0
    }

    fn mono_sign(&self, v: &str) -> (Option<Mono>, SignInfo) {
        use SignInfo::*;
        if !self.contains_var(v) {
            let sign = self.eval().map(|s| SignInfo::of(&s)).unwrap_or(Unknown);
            return (Some(Mono::Constant), sign);
        }
        match &*self.0 {
            ExprNode::Const(_) => unreachable!(),
            ExprNode::Var(_) => (Some(Mono::Increasing), NonNeg),
            ExprNode::Neg(a) => {
                let (m, s) = a.mono_sign(v);
                (m.map(Mono::flip), s.neg())
            }
            ExprNode::Add(a, b) => {
                let ((ma, sa), (mb, sb)) = (a.mono_sign(v), b.mono_sign(v));
                let sign = if sa == sb { sa } else { Unknown };
                (ma.zip(mb).and_then(|(x, y)| x.combine(y)), sign)
            }
            ExprNode::Sub(a, b) => {
                let ((ma, sa), (mb, sb)) = (a.mono_sign(v), b.mono_sign(v));
                let sign = if sa == sb.neg() { sa } else { Unknown };
                (ma.zip(mb).and_then(|(x, y)| x.combine(y.flip())), sign)
            }
            ExprNode::Mul(a, b) => {
                let ((ma, sa), (mb, sb)) = (a.mono_sign(v), b.mono_sign(v));
                let sign = match (sa, sb) {
                    (Unknown, _) | (_, Unknown) => Unknown,
                    (x, y) if x == y => NonNeg,
                    _ => NonPos,
                };
                let m = match (ma, mb) {
                    (Some(Mono::Constant), Some(m)) => scale_mono(m, sa),
                    (Some(m), Some(Mono::Constant)) => scale_mono(m, sb),
                    (Some(x), Some(y)) if x == y && sa == NonNeg && sb == NonNeg => Some(x),
                    _ => None,
                };
                (m, sign)
            }
            ExprNode::Div(a, b) => {
                let ((ma, sa), (mb, sb)) = (a.mono_sign(v), b.mono_sign(v));
                let sign = match (sa, sb) {
                    (Unknown, _) | (_, Unknown) => Unknown,
                    (x, y) if x == y => NonNeg,
                    _ => NonPos,
                };
                let m = match (ma, mb) {
                    (Some(m), Some(Mono::Constant)) => scale_mono(m, sb),
                    (Some(Mono::Constant), Some(m)) if sa == NonNeg && sb == NonNeg => {
                        Some(m.flip())
                    }
                    _ => None,
                };
                (m, sign)
            }
            ExprNode::Pow(base, exp) => {
                let ((mb, sb), (me, _)) = (base.mono_sign(v), exp.mono_sign(v));
                match (base.as_const(), exp.as_const()) {
                    (Some(b), None) => {
                        let c = b.cmp_value(&Scalar::int(1));
                        let m = match (c, b.signum() > 0) {
                            (Ordering::Greater, _) => me,
                            (Ordering::Less, true) => me.map(Mono::flip),
                            (Ordering::Equal, _) => Some(Mono::Constant),
                            _ => None,
                        };
                        (m, if b.signum() > 0 { NonNeg } else { Unknown })
                    }
                    (None, Some(e)) if sb == NonNeg => {
                        let m = match e.signum() {
                            1 => mb,
                            -1 => mb.map(Mono::flip),
                            _ => Some(Mono::Constant),
                        };
                        (m, NonNeg)
                    }
                    _ => (None, Unknown),
                }
            }
            ExprNode::Call(f, args) => {
                let parts: Vec<(Option<Mono>, SignInfo)> =
                    args.iter().map(|a| a.mono_sign(v)).collect();
                match f {
                    Func::Floor | Func::Ceil | Func::Sqrt | Func::GaussQuantile => {
                        let sign = if matches!(f, Func::Sqrt) { NonNeg } else { parts[0].1 };
                        (parts[0].0, sign)
                    }
                    Func::Min | Func::Max => {
                        let m = parts[0]
                            .0
                            .zip(parts[1].0)
                            .and_then(|(x, y)| x.combine(y));
                        let sign = if parts[0].1 == parts[1].1 {
                            parts[0].1
                        } else {
                            Unknown
                        };
                        (m, sign)
                    }
                    Func::Rational | Func::Dyadic | Func::NonNegDyadic => (None, NonNeg),
                    _ => (None, Unknown),
                }
            }
        }
    }

    /// Limit as the integer variable `v → ∞`, when it follows from the syntax.
    pub fn limit(&self, v: &str) -> Option<Scalar> {
        if !self.contains_var(v) {
            return self.eval().ok();
        }
        match &*self.0 {
            ExprNode::Const(_) => unreachable!(),
            ExprNode::Var(_) => Some(Scalar::PosInf),
            ExprNode::Neg(a) => Some(a.limit(v)?.neg()),
            ExprNode::Add(a, b) => a.limit(v)?.add(&b.limit(v)?).ok(),
            ExprNode::Sub(a, b) => a.limit(v)?.sub(&b.limit(v)?).ok(),
            ExprNode::Mul(a, b) => a.limit(v)?.mul(&b.limit(v)?).ok(),
            ExprNode::Div(a, b) => {
                let (la, lb) = (a.limit(v)?, b.limit(v)?);
                if lb.is_zero() {
                    None
                } else {
                    la.div(&lb).ok()
                }
            }
            ExprNode::Pow(base, exp) => {
                let (lb, le) = (base.limit(v)?, exp.limit(v)?);
                match (&lb, &le) {
                    (b, Scalar::PosInf | Scalar::NegInf) if b.is_finite() && b.signum() > 0 => {
                        let c = b.cmp_value(&Scalar::int(1));
                        let grows = (c == Ordering::Greater) == matches!(le, Scalar::PosInf);
                        match c {
                            Ordering::Equal => Some(Scalar::int(1)),
                            _ if grows => Some(Scalar::PosInf),
                            _ => Some(Scalar::int(0)),
                        }
                    }
                    (Scalar::PosInf, e) if e.is_finite() => match e.signum() {
                        1 => Some(Scalar::PosInf),
                        -1 => Some(Scalar::int(0)),
                        _ => Some(Scalar::int(1)),
                    },
                    _ => lb.pow(&le).ok(),
                }
            }
            ExprNode::Call(f, args) => match f {
                Func::Min | Func::Max => {
                    let (a, b) = (args[0].limit(v)?, args[1].limit(v)?);
                    Some(if *f == Func::Min { a.min(&b) } else { a.max(&b) })
                }
                Func::Sqrt => {
                    let a = args[0].limit(v)?;
                    f.apply(&[a]).ok()
                }
                Func::GaussQuantile => match args[0].limit(v)? {
                    Scalar::PosInf => Some(Scalar::PosInf),
                    a => f.apply(&[a]).ok(),
                },
                Func::Floor | Func::Ceil => match args[0].limit(v)? {
                    s @ (Scalar::PosInf | Scalar::NegInf) => Some(s),
                    _ => None,
                },
                _ => None,
            },
        }
    }

    fn precedence(&self) -> u8 {
        match &*self.0 {
            ExprNode::Add(..) | ExprNode::Sub(..) => 1,
            ExprNode::Mul(..) | ExprNode::Div(..) => 2,
            ExprNode::Neg(_) => 3,
            ExprNode::Pow(..) => 4,
            ExprNode::Const(s) if s.signum() < 0 => 3,
            ExprNode::Const(Scalar::Rat(r)) if !r.is_integer() => 2,
            _ => 5,
        }
    }
}

fn scale_mono(m: Mono, sign: SignInfo) -> Option<Mono> {
    match (m, sign) {
        (Mono::Constant, _) => Some(Mono::Constant),
        (m, SignInfo::NonNeg) => Some(m),
        (m, SignInfo::NonPos) => Some(m.flip()),
        (_, SignInfo::Unknown) => None,
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match &*self.0 {
            ExprNode::Const(s) => write!(f, "{s}"),
            ExprNode::Var(v) => write!(f, "{v}"),
            ExprNode::Add(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " + ")?;
                wrap(f, b, 2)
            }
            ExprNode::Sub(a, b) => {
                wrap(f, a, 1)?;
                write!(f, " - ")?;
                wrap(f, b, 2)
            }
            ExprNode::Mul(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "*")?;
                wrap(f, b, 3)
            }
            ExprNode::Div(a, b) => {
                wrap(f, a, 2)?;
                write!(f, "/")?;
                wrap(f, b, 3)
            }
            ExprNode::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, 3)
            }
            ExprNode::Pow(a, b) => {
                wrap(f, a, 5)?;
                write!(f, "^")?;
                wrap(f, b, 4)
            }
            ExprNode::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Comparison operator of a [`Pred`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

/// `lhs op rhs`, used as the guard of conditional terms and functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pred {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl Pred {
    pub fn new(lhs: Expr, op: CmpOp, rhs: Expr) -> Pred {
        Pred { lhs, op, rhs }
    }

    /// `Some(truth)` once both sides are closed.
    pub fn decide(&self) -> Option<bool> {
        let (a, b) = (self.lhs.eval().ok()?, self.rhs.eval().ok()?);
        let c = a.cmp_value(&b);
        Some(match self.op {
            CmpOp::Lt => c == Ordering::Less,
            CmpOp::Le => c != Ordering::Greater,
            CmpOp::Eq => c == Ordering::Equal,
            CmpOp::Ne => c != Ordering::Equal,
        })
    }

    pub fn subst(&self, v: &str, value: &Expr) -> Pred {
        Pred {
            lhs: self.lhs.subst(v, value),
            op: self.op,
            rhs: self.rhs.subst(v, value),
        }
    }

    pub fn contains_var(&self, v: &str) -> bool {
        self.lhs.contains_var(v) || self.rhs.contains_var(v)
    }

    pub fn free_vars(&self, out: &mut Vec<Var>) {
        self.lhs.free_vars(out);
        self.rhs.free_vars(out);
    }

    pub fn period(&self, v: &str) -> Period {
        self.lhs.period(v).join(self.rhs.period(v))
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op.symbol(), self.rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n() -> Expr {
        Expr::var("n")
    }

    #[test]
    fn exact_arithmetic() {
        let e = Expr::int(3).mul(&Expr::int(2).pow(&Expr::int(-4)));
        assert_eq!(e.eval().unwrap(), Scalar::ratio(3, 16));
        let x = n().mul(&Expr::ratio(1, 2)).add(&Expr::int(1));
        assert_eq!(x.subst("n", &Expr::int(3)).eval().unwrap(), Scalar::ratio(5, 2));
        assert!(matches!(n().eval(), Err(ExprError::FreeVariable(_))));
        assert!(Expr::int(1).div(&Expr::int(0)).eval().is_err());
    }

    #[test]
    fn enumerations() {
        let ds: Vec<_> = (0..8).map(nth_dyadic).collect();
        let expect = [(1, 1), (1, 2), (1, 4), (3, 4), (1, 8), (3, 8), (5, 8), (7, 8)];
        for (d, (p, q)) in ds.iter().zip(expect) {
            assert_eq!(*d, BigRational::new(p.into(), q.into()));
        }
        let qs: Vec<_> = (0..7).map(nth_rational).collect();
        let expect = [(0, 1), (1, 1), (1, 2), (1, 3), (2, 3), (1, 4), (3, 4)];
        for (r, (p, q)) in qs.iter().zip(expect) {
            assert_eq!(*r, BigRational::new(p.into(), q.into()));
        }
        for m in 0..500u64 {
            let (x, y) = unpair(m);
            assert_eq!((x + y) * (x + y + 1) / 2 + y, m);
        }
    }

    #[test]
    fn periodicity() {
        let alt = Expr::call(Func::Mod, vec![n(), Expr::int(2)]);
        assert_eq!(alt.period("n"), Period::Periodic(2));
        let shifted = Expr::call(Func::Mod, vec![n().add(&Expr::var("k")), Expr::int(2)]);
        assert_eq!(shifted.period("n"), Period::Periodic(2));
        let twice = Expr::call(Func::Mod, vec![Expr::int(2).mul(&n()), Expr::int(6)]);
        assert_eq!(twice.period("n"), Period::Periodic(3));
        assert_eq!(n().period("n"), Period::Unknown);
        assert_eq!(Expr::var("k").period("n"), Period::Invariant);
    }

    #[test]
    fn monotonicity_and_limits() {
        let up = Expr::int(1).sub(&n().pow2_neg());
        assert_eq!(up.monotonicity("n"), Some(Mono::Increasing));
        assert_eq!(up.limit("n"), Some(Scalar::int(1)));
        let down = Expr::int(1).add(&Expr::int(1).div(&n()));
        assert_eq!(down.monotonicity("n"), Some(Mono::Decreasing));
        assert_eq!(down.limit("n"), Some(Scalar::int(1)));
        assert_eq!(n().monotonicity("n"), Some(Mono::Increasing));
        assert_eq!(n().limit("n"), Some(Scalar::PosInf));
        let q = Expr::call(Func::Rational, vec![n()]);
        assert_eq!(q.monotonicity("n"), None);
        assert_eq!(q.limit("n"), None);
        let c = Expr::call(Func::GaussQuantile, vec![n()]);
        assert_eq!(c.monotonicity("n"), Some(Mono::Increasing));
        assert_eq!(c.limit("n"), Some(Scalar::PosInf));
    }

    #[test]
    fn display_parenthesizes() {
        let e = n().add(&Expr::int(1)).mul(&Expr::int(2).pow(&n().neg()));
        assert_eq!(e.to_string(), "(n + 1)*2^(-n)");
        assert_eq!(Expr::ratio(-1, 2).to_string(), "-1/2");
        assert_eq!(Expr::float(0.25).to_string(), "fl(0.25)");
    }
}
