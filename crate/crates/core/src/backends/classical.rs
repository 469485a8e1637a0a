//! Classical measure spaces as generator backends, used as compatibility
//! oracles: a finite weighted atom space and Lebesgue measure on the unit cube.

use super::shannon::{gen_bounds, gen_coord, rational_interval, Expansion, LineMeasure};
use super::{BackendError, GeneratorBackend};
use crate::boolean::{BoolElem, FiniteBoolAlgebra};
use crate::expr::{parse_exact, Expr, Scalar};
use crate::interval::Interval;
use crate::term::{Node, Term};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, RngCore};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

/// Atoms `0, 1, ..., k-1` placed on coordinate 1 with exact weights.
/// `cyl(1, a, b)` is the set of atoms `j` with `a <= j < b`.
pub struct FiniteSpace {
    algebra: Arc<FiniteBoolAlgebra>,
    weights: Vec<BigRational>,
}

impl FiniteSpace {
    pub fn new(weights: Vec<BigRational>) -> Result<Self, BackendError> {
        if weights.is_empty() || weights.len() > 1 << 16 {
            return Err(BackendError::Config("between 1 and 65536 atoms required".into()));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(BackendError::Config("weights must be non-negative".into()));
        }
        let total: BigRational = weights.iter().sum();
        if !total.is_one() {
            return Err(BackendError::Config(format!("weights sum to {total}, not 1")));
        }
        Ok(FiniteSpace {
            algebra: FiniteBoolAlgebra::new(weights.len()),
            weights,
        })
    }

    /// `k` atoms of weight `1/k`.
    pub fn uniform(k: usize) -> Self {
        let w = BigRational::new(1.into(), (k as i64).into());
        FiniteSpace::new(vec![w; k]).expect("uniform weights sum to 1")
    }

    pub fn parse(weights: &[String]) -> Result<Self, BackendError> {
        let ws = weights
            .iter()
            .map(|w| {
                parse_exact(w).ok_or_else(|| BackendError::Config(format!("bad weight `{w}`")))
            })
            .collect::<Result<_, _>>()?;
        FiniteSpace::new(ws)
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn algebra(&self) -> &Arc<FiniteBoolAlgebra> {
        &self.algebra
    }

    /// The element of the atom algebra denoted by a finite term.
    pub fn compile(&self, t: &Term) -> Result<BoolElem, BackendError> {
        let mut memo = HashMap::new();
        self.compile_in(t, &mut memo)
    }

    fn compile_in(
        &self,
        t: &Term,
        memo: &mut HashMap<Term, BoolElem>,
    ) -> Result<BoolElem, BackendError> {
        if let Some(e) = memo.get(t) {
            return Ok(e.clone());
        }
        let mismatch = |e: crate::boolean::BoolError| BackendError::Unsupported(e.to_string());
        let out = match t.node() {
            Node::Zero => self.algebra.zero(),
            Node::One => self.algebra.one(),
            Node::Gen(g) => {
                if gen_coord(g)? != 1 {
                    return Err(BackendError::Unsupported(format!(
                        "the finite space only has coordinate 1, got {}",
                        g.coord
                    )));
                }
                let (lo, hi) = gen_bounds(g)?;
                let atoms = (0..self.atom_count()).filter(|&j| {
                    let x = Scalar::int(j as i64);
                    let above = lo.cmp_value(&x) != Ordering::Greater;
                    let below = match x.cmp_value(&hi) {
                        Ordering::Less => true,
                        Ordering::Equal => g.closed,
                        Ordering::Greater => false,
                    };
                    above && below
                });
                self.algebra.element(atoms).map_err(mismatch)?
            }
            Node::Not(x) => self.compile_in(x, memo)?.complement(),
            Node::And(xs) | Node::Or(xs) => {
                let is_and = matches!(t.node(), Node::And(_));
                let mut acc = if is_and {
                    self.algebra.one()
                } else {
                    self.algebra.zero()
                };
                for x in xs {
                    let e = self.compile_in(x, memo)?;
                    acc = if is_and { acc.meet(&e) } else { acc.join(&e) }.map_err(mismatch)?;
                }
                acc
            }
            _ => return Err(BackendError::NotFinite(t.to_string())),
        };
        memo.insert(t.clone(), out.clone());
        Ok(out)
    }

    /// Exact measure of a finite term.
    pub fn measure_exact(&self, t: &Term) -> Result<BigRational, BackendError> {
        let e = self.compile(t)?;
        Ok(e.atoms().map(|j| &self.weights[j]).sum())
    }
}

impl GeneratorBackend for FiniteSpace {
    fn name(&self) -> String {
        format!("finite({})", self.atom_count())
    }

    fn mu0(&self, t: &Term) -> Result<Interval, BackendError> {
        Ok(rational_interval(&self.measure_exact(t)?))
    }

    fn random_generator(&self, rng: &mut dyn RngCore) -> Term {
        let k = self.atom_count() as i64;
        let a = rng.gen_range(0..=k);
        let b = rng.gen_range(0..=k);
        let (lo, hi) = (a.min(b), a.max(b));
        Term::cyl(Expr::int(1), Expr::int(lo), Expr::int(hi))
    }
}

/// Independent uniform coordinates on `[0, 1)`: Lebesgue measure on the cube,
/// evaluated in exact rational arithmetic.
#[derive(Clone, Copy, Debug, Default)]
pub struct UnitInterval;

impl LineMeasure<BigRational> for UnitInterval {
    fn cell(&self, _coord: u64, lo: &Scalar, hi: &Scalar) -> Result<BigRational, BackendError> {
        let clip = |s: &Scalar| match s {
            Scalar::NegInf => BigRational::zero(),
            Scalar::PosInf => BigRational::one(),
            _ => s
                .to_rational()
                .expect("finite")
                .clamp(BigRational::zero(), BigRational::one()),
        };
        let (a, b) = (clip(lo), clip(hi));
        Ok(if b > a { b - a } else { BigRational::zero() })
    }
}

impl UnitInterval {
    pub fn measure_exact(&self, t: &Term) -> Result<BigRational, BackendError> {
        Expansion::new(self).measure(t)
    }
}

impl GeneratorBackend for UnitInterval {
    fn name(&self) -> String {
        "unit".into()
    }

    fn mu0(&self, t: &Term) -> Result<Interval, BackendError> {
        Ok(rational_interval(&self.measure_exact(t)?))
    }

    fn random_generator(&self, rng: &mut dyn RngCore) -> Term {
        let coord = rng.gen_range(1..=2);
        let a = rng.gen_range(0..=8);
        let b = rng.gen_range(0..=8);
        let (lo, hi) = (a.min(b), a.max(b));
        Term::cyl(Expr::int(coord), Expr::ratio(lo, 8), Expr::ratio(hi, 8))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyl1(a: i64, b: i64) -> Term {
        Term::cyl(Expr::int(1), Expr::int(a), Expr::int(b))
    }

    #[test]
    fn finite_space_counts_atoms() {
        let s = FiniteSpace::parse(&["1/2".into(), "1/4".into(), "0.25".into()]).unwrap();
        assert_eq!(s.mu0(&cyl1(0, 1)).unwrap(), Interval::point(0.5));
        assert_eq!(s.mu0(&cyl1(1, 3).not()).unwrap(), Interval::point(0.5));
        let closed = Term::cylc(Expr::int(1), Expr::int(1), Expr::int(2));
        assert_eq!(s.mu0(&closed).unwrap(), Interval::point(0.5));
        assert!(s.mu0(&Term::cyl(Expr::int(2), Expr::int(0), Expr::int(1))).is_err());
        assert!(FiniteSpace::parse(&["1/2".into()]).is_err());
    }

    #[test]
    fn unit_interval_lengths_are_exact() {
        let u = UnitInterval;
        let t = Term::cyl(Expr::int(1), Expr::ratio(1, 3), Expr::int(5))
            .or2(&Term::cyl(Expr::int(1), Expr::int(-1), Expr::ratio(1, 6)));
        assert_eq!(u.measure_exact(&t).unwrap(), BigRational::new(5.into(), 6.into()));
        let sq = Term::cyl(Expr::int(1), Expr::int(0), Expr::ratio(1, 2))
            .and2(&Term::cyl(Expr::int(2), Expr::int(0), Expr::ratio(1, 2)));
        assert_eq!(u.mu0(&sq).unwrap(), Interval::point(0.25));
    }
}
