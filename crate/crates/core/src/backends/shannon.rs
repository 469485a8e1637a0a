//! Shannon expansion of a finite term over product measures.
//!
//! The smallest coordinate occurring in the term is split at every endpoint
//! of its generators. On each resulting cell those generators are constant,
//! so the term restricts to a residual over the remaining coordinates. Cells
//! with the same residual are grouped, and residuals are memoized by pointer,
//! which keeps long unions such as `⋁ₙ cyl(n, ...)` linear in the number of
//! coordinates rather than exponential.

use super::BackendError;
use crate::expr::Scalar;
use crate::interval::Interval;
use crate::term::{Gen, Node, Term};
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;

/// Values a cell measure may take: exact rationals or floats with a
/// rigorous running error bound.
pub trait Weight: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
}

/// `v ± e`, where `e` accounts for every rounding made so far. Additions and
/// products whose rounding error is zero leave `e` unchanged, so sums of a
/// few dyadic cell masses stay exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Approx {
    pub v: f64,
    pub e: f64,
}

const GROW: f64 = 1.0 + 4.0 * f64::EPSILON;

impl Approx {
    pub fn exact(v: f64) -> Approx {
        Approx { v, e: 0.0 }
    }

    pub fn new(v: f64, e: f64) -> Approx {
        Approx { v, e }
    }

    pub fn neg(&self) -> Approx {
        Approx { v: -self.v, e: self.e }
    }

    pub fn sub(&self, other: &Approx) -> Approx {
        self.add(&other.neg())
    }

    pub fn to_interval(&self) -> Interval {
        if self.e == 0.0 {
            Interval::point(self.v)
        } else {
            Interval::new(self.v - self.e, self.v + self.e)
        }
    }
}

impl Weight for Approx {
    fn zero() -> Self {
        Approx::exact(0.0)
    }

    fn one() -> Self {
        Approx::exact(1.0)
    }

    fn add(&self, o: &Self) -> Self {
        let s = self.v + o.v;
        // two-sum: the exact rounding error of s
        let bp = s - self.v;
        let err = (self.v - (s - bp)) + (o.v - bp);
        let e = self.e + o.e + err.abs();
        Approx {
            v: s,
            e: if e == 0.0 { 0.0 } else { e * GROW },
        }
    }

    fn mul(&self, o: &Self) -> Self {
        let p = self.v * o.v;
        let err = self.v.mul_add(o.v, -p);
        let e = self.e * (o.v.abs() + o.e) + o.e * self.v.abs() + err.abs();
        Approx {
            v: p,
            e: if e == 0.0 { 0.0 } else { e * GROW },
        }
    }
}

impl Weight for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn add(&self, o: &Self) -> Self {
        self + o
    }

    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

/// Outward-rounded enclosure of an exact rational.
pub fn rational_interval(r: &BigRational) -> Interval {
    use num_traits::ToPrimitive;
    let x = r.to_f64().unwrap_or(f64::NAN);
    match BigRational::from_float(x) {
        Some(back) => match back.cmp(r) {
            Ordering::Equal => Interval::point(x),
            Ordering::Less => Interval::new(x, x.next_up()),
            Ordering::Greater => Interval::new(x.next_down(), x),
        },
        None => Interval::UNIT,
    }
}

/// A measure on one coordinate line, queried on cells between breakpoints.
pub trait LineMeasure<W: Weight> {
    fn cell(&self, coord: u64, lo: &Scalar, hi: &Scalar) -> Result<W, BackendError>;
}

pub(crate) fn gen_coord(g: &Gen) -> Result<u64, BackendError> {
    g.coord
        .eval()
        .ok()
        .and_then(|c| c.as_u64())
        .filter(|&c| c >= 1)
        .ok_or_else(|| BackendError::BadCoordinate(g.coord.to_string()))
}

pub(crate) fn gen_bounds(g: &Gen) -> Result<(Scalar, Scalar), BackendError> {
    Ok((g.lo.eval()?, g.hi.eval()?))
}

/// Sorted distinct finite endpoints of the generators on `coord`.
pub(crate) fn breakpoints(gens: &[Gen], coord: u64) -> Result<Vec<Scalar>, BackendError> {
    let mut pts: Vec<Scalar> = Vec::new();
    for g in gens {
        if gen_coord(g)? != coord {
            continue;
        }
        let (lo, hi) = gen_bounds(g)?;
        for p in [lo, hi] {
            if p.is_finite() {
                pts.push(p);
            }
        }
    }
    pts.sort_by(|a, b| a.cmp_value(b));
    pts.dedup_by(|a, b| a.cmp_value(b) == Ordering::Equal);
    Ok(pts)
}

/// Cells `(-inf, p0), (p0, p1), ..., (pk, inf)` for the given breakpoints.
pub(crate) fn cells(pts: &[Scalar]) -> Vec<(Scalar, Scalar)> {
    let mut edges = Vec::with_capacity(pts.len() + 2);
    edges.push(Scalar::NegInf);
    edges.extend(pts.iter().cloned());
    edges.push(Scalar::PosInf);
    edges.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
}

/// Replaces every generator on a coordinate in `fixed` by 0 or 1 according to
/// whether it contains the given cell. Cells never straddle an endpoint.
pub(crate) fn restrict(
    t: &Term,
    fixed: &[(u64, Scalar, Scalar)],
    memo: &mut HashMap<Term, Term>,
) -> Result<Term, BackendError> {
    if let Some(done) = memo.get(t) {
        return Ok(done.clone());
    }
    let out = match t.node() {
        Node::Zero | Node::One => t.clone(),
        Node::Gen(g) => {
            let c = gen_coord(g)?;
            match fixed.iter().find(|(fc, _, _)| *fc == c) {
                None => t.clone(),
                Some((_, lo, hi)) => {
                    let (glo, ghi) = gen_bounds(g)?;
                    let inside = glo.cmp_value(lo) != Ordering::Greater
                        && hi.cmp_value(&ghi) != Ordering::Greater;
                    if inside {
                        Term::one()
                    } else {
                        Term::zero()
                    }
                }
            }
        }
        Node::Not(x) => restrict(x, fixed, memo)?.not(),
        Node::And(xs) => Term::and(
            xs.iter()
                .map(|x| restrict(x, fixed, memo))
                .collect::<Result<_, _>>()?,
        ),
        Node::Or(xs) => Term::or(
            xs.iter()
                .map(|x| restrict(x, fixed, memo))
                .collect::<Result<_, _>>()?,
        ),
        _ => return Err(BackendError::NotFinite(t.to_string())),
    };
    memo.insert(t.clone(), out.clone());
    Ok(out)
}

/// Product measure of a finite term by coordinate-wise expansion.
pub struct Expansion<'a, W: Weight, M: LineMeasure<W>> {
    line: &'a M,
    memo: HashMap<Term, W>,
}

impl<'a, W: Weight, M: LineMeasure<W>> Expansion<'a, W, M> {
    pub fn new(line: &'a M) -> Self {
        Expansion {
            line,
            memo: HashMap::new(),
        }
    }

    pub fn measure(&mut self, t: &Term) -> Result<W, BackendError> {
        if t.is_zero() {
            return Ok(W::zero());
        }
        if t.is_one() {
            return Ok(W::one());
        }
        if let Some(w) = self.memo.get(t) {
            return Ok(w.clone());
        }
        let gens = t.generators();
        let coord = gens
            .iter()
            .map(gen_coord)
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .min()
            .ok_or_else(|| BackendError::NotFinite(t.to_string()))?;
        let pts = breakpoints(&gens, coord)?;
        let mut groups: Vec<(Term, W)> = Vec::new();
        let mut index: HashMap<Term, usize> = HashMap::new();
        for (lo, hi) in cells(&pts) {
            let mass = self.line.cell(coord, &lo, &hi)?;
            let mut rmemo = HashMap::new();
            let residual = restrict(t, &[(coord, lo, hi)], &mut rmemo)?;
            if residual.is_zero() {
                continue;
            }
            match index.get(&residual) {
                Some(&i) => groups[i].1 = groups[i].1.add(&mass),
                None => {
                    index.insert(residual.clone(), groups.len());
                    groups.push((residual, mass));
                }
            }
        }
        let mut total = W::zero();
        for (residual, mass) in groups {
            let inner = self.measure(&residual)?;
            total = total.add(&mass.mul(&inner));
        }
        self.memo.insert(t.clone(), total.clone());
        Ok(total)
    }
}
