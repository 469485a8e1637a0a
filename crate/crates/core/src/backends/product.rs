//! Independent coordinates with absolutely continuous marginals.

use super::shannon::{Approx, Expansion, LineMeasure};
use super::{BackendError, GeneratorBackend};
use crate::expr::Scalar;
use crate::interval::Interval;
use crate::term::Term;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Cauchy, ContinuousCDF, Exp, Laplace, Normal, StudentsT, Uniform};

/// Absolute error credited to each CDF difference.
const CELL_ERR: f64 = 1e-14;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    Normal { mean: f64, sd: f64 },
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
    Laplace { location: f64, scale: f64 },
    Cauchy { location: f64, scale: f64 },
    StudentT { location: f64, scale: f64, freedom: f64 },
}

enum Law {
    Normal { mean: f64, sd: f64 },
    Uniform(Uniform),
    Exp(Exp),
    Laplace(Laplace),
    Cauchy(Cauchy),
    StudentT(StudentsT),
}

impl Law {
    fn build(d: &Density) -> Result<Law, BackendError> {
        Ok(match *d {
            Density::Normal { mean, sd } => {
                Normal::new(mean, sd).map_err(|e| BackendError::Config(e.to_string()))?;
                Law::Normal { mean, sd }
            }
            Density::Uniform { a, b } => Law::Uniform(
                Uniform::new(a, b).map_err(|e| BackendError::Config(e.to_string()))?,
            ),
            Density::Exponential { rate } => {
                Law::Exp(Exp::new(rate).map_err(|e| BackendError::Config(e.to_string()))?)
            }
            Density::Laplace { location, scale } => Law::Laplace(
                Laplace::new(location, scale).map_err(|e| BackendError::Config(e.to_string()))?,
            ),
            Density::Cauchy { location, scale } => Law::Cauchy(
                Cauchy::new(location, scale).map_err(|e| BackendError::Config(e.to_string()))?,
            ),
            Density::StudentT {
                location,
                scale,
                freedom,
            } => Law::StudentT(
                StudentsT::new(location, scale, freedom)
                    .map_err(|e| BackendError::Config(e.to_string()))?,
            ),
        })
    }

    fn cdf(&self, x: f64) -> f64 {
        match self {
            Law::Normal { mean, sd } => super::normal::cdf((x - mean) / sd),
            Law::Uniform(d) => d.cdf(x),
            Law::Exp(d) => d.cdf(x),
            Law::Laplace(d) => d.cdf(x),
            Law::Cauchy(d) => d.cdf(x),
            Law::StudentT(d) => d.cdf(x),
        }
    }

    fn sf(&self, x: f64) -> f64 {
        match self {
            Law::Normal { mean, sd } => super::normal::sf((x - mean) / sd),
            Law::Uniform(d) => d.sf(x),
            Law::Exp(d) => d.sf(x),
            Law::Laplace(d) => d.sf(x),
            Law::Cauchy(d) => d.sf(x),
            Law::StudentT(d) => d.sf(x),
        }
    }

    fn mass(&self, a: f64, b: f64) -> f64 {
        let (ca, cb) = (self.cdf(a), self.cdf(b));
        if ca > 0.5 {
            (self.sf(a) - self.sf(b)).max(0.0)
        } else {
            (cb - ca).max(0.0)
        }
    }
}

/// `μ(π⁻¹(S)) = ∫_S f₁(x₁)⋯fₙ(xₙ) dx`. Coordinates past the end of the
/// density list reuse its last entry.
pub struct ProductBackend {
    specs: Vec<Density>,
    laws: Vec<Law>,
}

impl ProductBackend {
    pub fn new(densities: Vec<Density>) -> Result<Self, BackendError> {
        if densities.is_empty() {
            return Err(BackendError::Config("at least one density is required".into()));
        }
        let laws = densities.iter().map(Law::build).collect::<Result<_, _>>()?;
        Ok(ProductBackend {
            specs: densities,
            laws,
        })
    }

    pub fn densities(&self) -> &[Density] {
        &self.specs
    }

    fn law(&self, coord: u64) -> &Law {
        let i = (coord as usize - 1).min(self.laws.len() - 1);
        &self.laws[i]
    }
}

impl LineMeasure<Approx> for ProductBackend {
    fn cell(&self, coord: u64, lo: &Scalar, hi: &Scalar) -> Result<Approx, BackendError> {
        let m = self.law(coord).mass(lo.to_f64(), hi.to_f64());
        let exact = matches!(lo, Scalar::NegInf) && matches!(hi, Scalar::PosInf);
        Ok(if exact {
            Approx::exact(1.0)
        } else {
            Approx::new(m, CELL_ERR)
        })
    }
}

impl GeneratorBackend for ProductBackend {
    fn name(&self) -> String {
        "product".into()
    }

    fn mu0(&self, t: &Term) -> Result<Interval, BackendError> {
        let mut ex = Expansion::new(self);
        Ok(ex.measure(t)?.to_interval().clamp_unit())
    }

    fn random_generator(&self, rng: &mut dyn RngCore) -> Term {
        super::random_box(rng, 3, &[-2.0, -1.0, 0.0, 0.25, 0.5, 1.0, 3.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    #[test]
    fn uniform_and_exponential_boxes() {
        let b = ProductBackend::new(vec![
            Density::Uniform { a: 0.0, b: 1.0 },
            Density::Exponential { rate: 1.0 },
        ])
        .unwrap();
        let t = Term::cyl(Expr::int(1), Expr::ratio(1, 4), Expr::inf())
            .and2(&Term::cyl(Expr::int(2), Expr::int(1), Expr::inf()));
        let m = b.mu0(&t).unwrap();
        assert!(m.contains(0.75 * (-1.0f64).exp()));
        assert!(m.width() < 1e-12);
        // coordinate 5 reuses the exponential law
        let tail = b.mu0(&Term::cyl(Expr::int(5), Expr::int(2), Expr::inf())).unwrap();
        assert!(tail.contains((-2.0f64).exp()));
    }
}
