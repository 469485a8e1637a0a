//! Standard cylindrical Gaussian measure: independent `N(0, 1)` coordinates.

use super::normal;
use super::shannon::{Approx, Expansion, LineMeasure};
use super::{BackendError, GeneratorBackend};
use crate::expr::{Expr, ExprNode, Func, Scalar};
use crate::interval::Interval;
use crate::term::{Majorant, Node, Stream, Term};

/// Relative accuracy credited to each `erfc`-based tail evaluation, on top of
/// the `2x²ε` picked up by rounding `x/√2`.
const CDF_REL: f64 = 2e-15;
/// Relative slack on the `c(n)` quantile: `Φ̄(c(x))` is `2^{-x}` only to the
/// accuracy of `erfc_inv`.
const QUANTILE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default)]
pub struct GaussianBackend;

impl GaussianBackend {
    pub fn new() -> Self {
        GaussianBackend
    }
}

fn is_exact_point(x: f64) -> bool {
    x == 0.0 || x.is_infinite()
}

/// `Φ̄(x)` with its error allowance; the endpoint itself may already be a
/// rounded rational, which shifts the value by up to `φ(x)·|x|·ε`.
fn sf_approx(x: f64) -> Approx {
    let v = normal::sf(x);
    if is_exact_point(x) {
        Approx::exact(v)
    } else {
        let rel = CDF_REL + 2.0 * f64::EPSILON * x * x;
        Approx::new(v, rel * v + 2.0 * f64::EPSILON * normal::pdf(x) * x.abs())
    }
}

/// `Φ(b) − Φ(a)` evaluated in whichever tail keeps relative accuracy.
pub(crate) fn gauss_cell(a: f64, b: f64) -> Approx {
    let c = if a >= 0.0 {
        sf_approx(a).sub(&sf_approx(b))
    } else if b <= 0.0 {
        sf_approx(-b).sub(&sf_approx(-a))
    } else {
        Approx::exact(1.0).sub(&sf_approx(b)).sub(&sf_approx(-a))
    };
    Approx::new(c.v.max(0.0), c.e)
}

pub(crate) struct GaussLine;

impl LineMeasure<Approx> for GaussLine {
    fn cell(&self, _coord: u64, lo: &Scalar, hi: &Scalar) -> Result<Approx, BackendError> {
        Ok(gauss_cell(lo.to_f64(), hi.to_f64()))
    }
}

pub(crate) fn approx_to_unit(a: Approx) -> Interval {
    a.to_interval().clamp_unit()
}

/// Shapes of generator streams whose n-th element has Gaussian mass bounded
/// in closed form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum TailShape {
    /// `μ(s_n) = Φ̄(c(a·n + b)) ≈ 2^{-(a·n + b)}`.
    Pow2 { a: f64, b: f64 },
    /// `μ(s_n) = Φ̄(α·n + β)`.
    Affine { alpha: f64, beta: f64 },
}

/// Recognises `⋁ cyl(i, e(n), inf)` and `⋁ cyl(i, -inf, -e(n))` (and the
/// complemented bodies of meets) where `e` grows at least linearly.
pub(crate) fn tail_shape(stream: &Stream, is_join: bool) -> Option<TailShape> {
    let body = if is_join {
        stream.body.clone()
    } else {
        match stream.body.node() {
            Node::Not(x) => x.clone(),
            _ => return None,
        }
    };
    let Node::Gen(g) = body.node() else {
        return None;
    };
    let hi = g.hi.eval().ok();
    let lo = g.lo.eval().ok();
    let e = if hi == Some(Scalar::PosInf) {
        g.lo.clone()
    } else if lo == Some(Scalar::NegInf) {
        match g.hi.kind() {
            ExprNode::Neg(x) => x.clone(),
            _ => g.hi.neg(),
        }
    } else {
        return None;
    };
    let v = &*stream.var;
    let at0 = |x: &Expr| x.subst(v, &Expr::int(0)).eval().ok().map(|s| s.to_f64());
    if let ExprNode::Call(Func::GaussQuantile, args) = e.kind() {
        let a = args[0].affine_coeff(v)?;
        let a = num_traits::ToPrimitive::to_f64(&a)?;
        if a > 0.0 {
            return Some(TailShape::Pow2 { a, b: at0(&args[0])? });
        }
        return None;
    }
    let alpha = num_traits::ToPrimitive::to_f64(&e.affine_coeff(v)?)?;
    (alpha > 0.0).then(|| TailShape::Affine {
        alpha,
        beta: at0(&e).unwrap_or(f64::NAN),
    })
    .filter(|s| matches!(s, TailShape::Affine { beta, .. } if beta.is_finite()))
}

pub(crate) fn shape_majorant(shape: TailShape, scale: f64) -> Option<Majorant> {
    match shape {
        TailShape::Pow2 { a, b } => Some(Majorant::Geom {
            c: scale * (-b).exp2() * (1.0 + QUANTILE_SLACK),
            r: (-a).exp2(),
        }),
        TailShape::Affine { alpha, beta } if scale == 1.0 => {
            Some(Majorant::GaussTail { alpha, beta })
        }
        TailShape::Affine { .. } => None,
    }
}

impl GeneratorBackend for GaussianBackend {
    fn name(&self) -> String {
        "gaussian".into()
    }

    fn mu0(&self, t: &Term) -> Result<Interval, BackendError> {
        let mut ex = Expansion::new(&GaussLine);
        Ok(approx_to_unit(ex.measure(t)?))
    }

    fn infer_tail(&self, stream: &Stream, is_join: bool) -> Option<Majorant> {
        tail_shape(stream, is_join).and_then(|s| shape_majorant(s, 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyl(i: i64, a: Expr, b: Expr) -> Term {
        Term::cyl(Expr::int(i), a, b)
    }

    #[test]
    fn symmetric_boxes_are_exact() {
        let g = GaussianBackend::new();
        let half = cyl(1, Expr::int(0), Expr::inf());
        assert_eq!(g.mu0(&half).unwrap(), Interval::point(0.5));
        let quarter = half.and2(&cyl(2, Expr::int(0), Expr::inf()));
        assert_eq!(g.mu0(&quarter).unwrap(), Interval::point(0.25));
        assert_eq!(g.mu0(&half.not()).unwrap(), Interval::point(0.5));
    }

    #[test]
    fn coordinate_exchangeability() {
        let g = GaussianBackend::new();
        let a = g.mu0(&cyl(1, Expr::ratio(-1, 3), Expr::int(2))).unwrap();
        let b = g.mu0(&cyl(7, Expr::ratio(-1, 3), Expr::int(2))).unwrap();
        assert_eq!(a, b);
        assert!(a.width() < 1e-14);
    }

    #[test]
    fn recognises_quantile_streams() {
        let s = Stream::new(
            "n",
            Expr::int(1),
            Term::cyl(
                Expr::var("n"),
                Expr::call(Func::GaussQuantile, vec![Expr::var("n")]),
                Expr::inf(),
            ),
        );
        assert_eq!(tail_shape(&s, true), Some(TailShape::Pow2 { a: 1.0, b: 0.0 }));
        let s = Stream::new(
            "n",
            Expr::int(0),
            Term::cyl(Expr::int(1), Expr::var("n").mul(&Expr::int(2)), Expr::inf()),
        );
        assert_eq!(
            tail_shape(&s, true),
            Some(TailShape::Affine { alpha: 2.0, beta: 0.0 })
        );
    }
}
