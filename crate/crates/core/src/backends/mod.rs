//! Generator backends: a Boolean algebra of coordinate boxes together with a
//! finitely additive `μ₀` on it.
//!
//! Every backend measures finite Boolean combinations of cylinders
//! `{x : lo <= x_i < hi}` and returns a certified enclosure. Tail inference
//! lets a backend supply residual bounds for recognised stream shapes, which
//! turns the trivial upper bound of a countable join into a convergent one.

pub mod classical;
pub mod gaussian;
pub mod normal;
pub mod product;
pub mod quadrature;
pub mod shannon;
pub mod skew;

use crate::expr::{ExprError, Scalar};
use crate::interval::Interval;
use crate::term::{Majorant, Stream, Term};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

pub use classical::{FiniteSpace, UnitInterval};
pub use gaussian::GaussianBackend;
pub use product::{Density, ProductBackend};
pub use skew::{McOracle, SkewNormalBackend};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("coordinate `{0}` is not a positive integer")]
    BadCoordinate(String),
    #[error("term is not a finite combination of generators: {0}")]
    NotFinite(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("{dims} skewed coordinates exceed the cap of {cap}")]
    DimensionCap { dims: usize, cap: usize },
    #[error("quadrature error estimate {estimate:e} exceeds the cap {cap:e}")]
    QuadratureFailure { estimate: f64, cap: f64 },
    #[error("invalid backend configuration: {0}")]
    Config(String),
}

/// A Boolean algebra of cylinder generators with a finitely additive `μ₀`.
pub trait GeneratorBackend: Send + Sync {
    fn name(&self) -> String;

    /// Enclosure of `μ₀(t)` for a finite combination `t` of closed generators.
    fn mu0(&self, t: &Term) -> Result<Interval, BackendError>;

    /// A residual majorant for the stream of a join (`is_join`) or meet, when
    /// its shape is recognised.
    fn infer_tail(&self, _stream: &Stream, _is_join: bool) -> Option<Majorant> {
        None
    }

    /// A random generator, used to sample disjoint pairs for additivity checks.
    fn random_generator(&self, rng: &mut dyn RngCore) -> Term {
        random_box(rng, 3, &[-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0])
    }
}

impl<B: GeneratorBackend + ?Sized> GeneratorBackend for Arc<B> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn mu0(&self, t: &Term) -> Result<Interval, BackendError> {
        (**self).mu0(t)
    }

    fn infer_tail(&self, stream: &Stream, is_join: bool) -> Option<Majorant> {
        (**self).infer_tail(stream, is_join)
    }

    fn random_generator(&self, rng: &mut dyn RngCore) -> Term {
        (**self).random_generator(rng)
    }
}

/// A random box on one of the first `coords` coordinates with endpoints drawn
/// from `grid ∪ {±∞}`.
pub fn random_box(rng: &mut dyn RngCore, coords: u64, grid: &[f64]) -> Term {
    use crate::expr::Expr;
    let coord = rng.gen_range(1..=coords) as i64;
    let pick = |rng: &mut dyn RngCore| -> Scalar {
        let k = rng.gen_range(0..grid.len() + 2);
        match k {
            0 => Scalar::NegInf,
            1 => Scalar::PosInf,
            _ => grid_scalar(grid[k - 2]),
        }
    };
    let (a, b) = (pick(rng), pick(rng));
    let (lo, hi) = if a.cmp_value(&b).is_le() { (a, b) } else { (b, a) };
    Term::cyl(Expr::int(coord), Expr::constant(lo), Expr::constant(hi))
}

fn grid_scalar(x: f64) -> Scalar {
    num_rational::BigRational::from_float(x)
        .map(Scalar::Rat)
        .unwrap_or(Scalar::Float(x))
}

/// Test fixture: reports `μ₀(t)²`, which breaks finite additivity.
pub struct Corrupted<B>(pub B);

impl<B: GeneratorBackend> GeneratorBackend for Corrupted<B> {
    fn name(&self) -> String {
        format!("corrupted({})", self.0.name())
    }

    fn mu0(&self, t: &Term) -> Result<Interval, BackendError> {
        let i = self.0.mu0(t)?;
        Ok(Interval::new(i.lo * i.lo, i.hi * i.hi))
    }

    fn random_generator(&self, rng: &mut dyn RngCore) -> Term {
        self.0.random_generator(rng)
    }
}

pub const CONFIG_VERSION: u32 = 1;

/// Backend configuration file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BackendConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    #[serde(flatten)]
    pub kind: BackendKind,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BackendKind {
    Gaussian {
        #[serde(default)]
        precision: Option<f64>,
    },
    Skew {
        delta: Vec<f64>,
        #[serde(default)]
        precision: Option<f64>,
    },
    Product {
        densities: Vec<Density>,
    },
    Classical {
        #[serde(flatten)]
        space: ClassicalSpace,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "space", rename_all = "lowercase")]
pub enum ClassicalSpace {
    /// Atoms `0..k` on coordinate 1 with the given weights (decimal or `p/q` strings).
    Finite { weights: Vec<String> },
    /// Lebesgue measure on `[0, 1)` along coordinate 1.
    Unit,
}

impl BackendConfig {
    pub fn gaussian() -> BackendConfig {
        BackendConfig {
            version: CONFIG_VERSION,
            kind: BackendKind::Gaussian { precision: None },
        }
    }

    pub fn from_json(text: &str) -> Result<BackendConfig, BackendError> {
        let cfg: BackendConfig =
            serde_json::from_str(text).map_err(|e| BackendError::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(BackendError::Config(format!(
                "unsupported config version {}",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn build(&self) -> Result<Arc<dyn GeneratorBackend>, BackendError> {
        Ok(match &self.kind {
            BackendKind::Gaussian { .. } => Arc::new(GaussianBackend::new()),
            BackendKind::Skew { delta, precision } => {
                let mut b = SkewNormalBackend::new(delta.clone())?;
                if let Some(p) = precision {
                    b = b.with_tolerance(*p);
                }
                Arc::new(b)
            }
            BackendKind::Product { densities } => Arc::new(ProductBackend::new(densities.clone())?),
            BackendKind::Classical { space } => match space {
                ClassicalSpace::Finite { weights } => Arc::new(FiniteSpace::parse(weights)?),
                ClassicalSpace::Unit => Arc::new(UnitInterval),
            },
        })
    }
}
