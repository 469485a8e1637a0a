//! Multivariate skew-normal cylindrical measure.
//!
//! Let `X ~ N(0, I)` and `X₀ = δ·X + s·W` with `W ~ N(0, 1)` independent and
//! `s² = 1 − Σδ²`, so that `(X₀, X)` is centred Gaussian with unit variances
//! and `Cov(X₀, X_k) = δ_k`. Set `Z = X` when `X₀ > 0` and `Z = −X` otherwise.
//! Conditioning on `X = z` gives `P(X₀ > 0 | z) = Φ(δ·z / s)`, and the sign
//! flip contributes the same amount, so `Z` has density
//!
//! ```text
//! φ_δ(z) = 2 φ(z) Φ(δ·z / s).
//! ```
//!
//! Integrating out a block of coordinates folds their part of `δ·X` into the
//! noise term, so every marginal has the same form with `δ` restricted to the
//! remaining coordinates. That is the cylindrical consistency of the family.
//! Coordinates with `δ_k = 0` factor off as independent standard normals.

use super::gaussian::{approx_to_unit, shape_majorant, tail_shape, GaussLine};
use super::normal;
use super::quadrature;
use super::shannon::{breakpoints, cells, gen_coord, restrict, Approx, Expansion, Weight};
use super::{BackendError, GeneratorBackend};
use crate::expr::Scalar;
use crate::interval::Interval;
use crate::term::{Majorant, Stream, Term};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::HashMap;
use std::sync::Mutex;

/// Skewed coordinates measured jointly by nested quadrature.
pub const MAX_SKEWED_DIMS: usize = 3;
const DEFAULT_TOL: f64 = 1e-11;
const MAX_PANELS: usize = 400;
/// Widening applied to quadrature error estimates.
const SAFETY: f64 = 10.0;
const ERROR_FLOOR: f64 = 1e-14;

type BoxKey = Vec<(u64, u64, u64)>;

pub struct SkewNormalBackend {
    delta: Vec<f64>,
    tol: f64,
    /// Box masses already computed; cells repeat across calls.
    memo: Mutex<HashMap<BoxKey, Approx>>,
}

impl SkewNormalBackend {
    /// Rejects `Σδ² >= 1`, for which `(X₀, X)` has no positive-definite covariance.
    pub fn new(delta: Vec<f64>) -> Result<Self, BackendError> {
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(BackendError::Config("delta entries must be finite".into()));
        }
        let norm2: f64 = delta.iter().map(|d| d * d).sum();
        if norm2 >= 1.0 {
            return Err(BackendError::Config(format!(
                "sum of squared delta is {norm2}, must be below 1"
            )));
        }
        Ok(SkewNormalBackend {
            delta,
            tol: DEFAULT_TOL,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol.max(1e-15);
        self.memo.get_mut().expect("memo lock").clear();
        self
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    fn delta_at(&self, coord: u64) -> f64 {
        self.delta.get(coord as usize - 1).copied().unwrap_or(0.0)
    }

    /// `φ_δ` of the first `x.len()` coordinates at `x`.
    pub fn skew_density(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let d: Vec<f64> = (0..n).map(|k| self.delta_at(k as u64 + 1)).collect();
        let s = (1.0 - d.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let dot: f64 = d.iter().zip(x).map(|(a, b)| a * b).sum();
        let phi: f64 = x.iter().map(|&v| normal::pdf(v)).product();
        2.0 * phi * normal::cdf(dot / s)
    }

    /// Mass of the box `∏ [lo_k, hi_k)` over skewed coordinates.
    pub fn box_mass(&self, sides: &[(u64, f64, f64)]) -> Result<Approx, BackendError> {
        let key: BoxKey = sides.iter().map(|&(c, a, b)| (c, a.to_bits(), b.to_bits())).collect();
        if let Some(hit) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(*hit);
        }
        let r = self.box_mass_uncached(sides)?;
        self.memo.lock().expect("memo lock").insert(key, r);
        Ok(r)
    }

    fn box_mass_uncached(&self, sides: &[(u64, f64, f64)]) -> Result<Approx, BackendError> {
        let active: Vec<(f64, f64, f64)> = sides
            .iter()
            .filter(|(_, a, b)| !(*a == f64::NEG_INFINITY && *b == f64::INFINITY))
            .map(|&(c, a, b)| (self.delta_at(c), a, b))
            .collect();
        if active.iter().any(|(_, a, b)| a >= b) {
            return Ok(Approx::exact(0.0));
        }
        if active.is_empty() {
            return Ok(Approx::exact(1.0));
        }
        if active.len() > MAX_SKEWED_DIMS {
            return Err(BackendError::DimensionCap {
                dims: active.len(),
                cap: MAX_SKEWED_DIMS,
            });
        }
        let s = (1.0 - active.iter().map(|(d, _, _)| d * d).sum::<f64>()).sqrt();
        let limits: Vec<(f64, f64, f64)> = active
            .iter()
            .map(|&(d, a, b)| (d / s, normal::cdf(a), normal::cdf(b)))
            .collect();
        let mut worst_inner = 0.0f64;
        let r = nested(&limits, 0.0, self.tol, &mut worst_inner);
        let est = r.error + worst_inner;
        let err = (SAFETY * est).max(ERROR_FLOOR);
        if est > 1e-6 {
            return Err(BackendError::QuadratureFailure {
                estimate: est,
                cap: 1e-6,
            });
        }
        Ok(Approx::new((2.0 * r.value).clamp(0.0, 1.0), 2.0 * err))
    }

    fn skewed_coords(&self, t: &Term) -> Result<Vec<u64>, BackendError> {
        let mut out = Vec::new();
        for g in t.generators() {
            let c = gen_coord(&g)?;
            if self.delta_at(c) != 0.0 && !out.contains(&c) {
                out.push(c);
            }
        }
        out.sort_unstable();
        Ok(out)
    }
}

/// `∫ Φ(Σ_k λ_k Φ⁻¹(u_k) + offset) du` over `∏ [p_k, q_k]`, innermost last.
fn nested(
    limits: &[(f64, f64, f64)],
    offset: f64,
    tol: f64,
    worst_inner: &mut f64,
) -> quadrature::QuadResult {
    let (lambda, p, q) = limits[0];
    let rest = &limits[1..];
    let width = q - p;
    let mut f = |u: f64| {
        let z = normal::quantile(u);
        if rest.is_empty() {
            normal::cdf(lambda * z + offset)
        } else {
            let inner = nested(rest, offset + lambda * z, tol, worst_inner);
            *worst_inner = worst_inner.max(inner.error * width);
            inner.value
        }
    };
    quadrature::integrate(&mut f, p, q, tol, MAX_PANELS)
}

impl GeneratorBackend for SkewNormalBackend {
    fn name(&self) -> String {
        "skew".into()
    }

    fn mu0(&self, t: &Term) -> Result<Interval, BackendError> {
        let skewed = self.skewed_coords(t)?;
        if skewed.is_empty() {
            return Ok(approx_to_unit(Expansion::new(&GaussLine).measure(t)?));
        }
        if skewed.len() > MAX_SKEWED_DIMS {
            return Err(BackendError::DimensionCap {
                dims: skewed.len(),
                cap: MAX_SKEWED_DIMS,
            });
        }
        let gens = t.generators();
        let per_coord: Vec<Vec<(Scalar, Scalar)>> = skewed
            .iter()
            .map(|&c| breakpoints(&gens, c).map(|p| cells(&p)))
            .collect::<Result<_, _>>()?;
        let mut groups: Vec<(Term, Approx)> = Vec::new();
        let mut index: HashMap<Term, usize> = HashMap::new();
        let mut choice = vec![0usize; skewed.len()];
        loop {
            let fixed: Vec<(u64, Scalar, Scalar)> = skewed
                .iter()
                .zip(&choice)
                .zip(&per_coord)
                .map(|((&c, &i), cs)| (c, cs[i].0.clone(), cs[i].1.clone()))
                .collect();
            let residual = restrict(t, &fixed, &mut HashMap::new())?;
            if !residual.is_zero() {
                let sides: Vec<(u64, f64, f64)> = fixed
                    .iter()
                    .map(|(c, a, b)| (*c, a.to_f64(), b.to_f64()))
                    .collect();
                let mass = self.box_mass(&sides)?;
                match index.get(&residual) {
                    Some(&i) => groups[i].1 = groups[i].1.add(&mass),
                    None => {
                        index.insert(residual.clone(), groups.len());
                        groups.push((residual, mass));
                    }
                }
            }
            // odometer over the grid of cells
            let mut k = 0;
            loop {
                if k == choice.len() {
                    let mut ex = Expansion::new(&GaussLine);
                    let mut total = Approx::exact(0.0);
                    for (residual, mass) in &groups {
                        total = total.add(&mass.mul(&ex.measure(residual)?));
                    }
                    return Ok(approx_to_unit(total));
                }
                choice[k] += 1;
                if choice[k] < per_coord[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }

    fn infer_tail(&self, stream: &Stream, is_join: bool) -> Option<Majorant> {
        // every one-dimensional marginal has density at most 2φ
        tail_shape(stream, is_join).and_then(|s| shape_majorant(s, 2.0))
    }

    fn random_generator(&self, rng: &mut dyn RngCore) -> Term {
        super::random_box(rng, 2, &[-1.5, -0.5, 0.0, 0.5, 1.0])
    }
}

/// Empirical box measures from direct simulation of the sign-flip construction.
pub struct McOracle {
    dims: usize,
    samples: Vec<f64>,
}

const CHUNK: usize = 1 << 16;

impl McOracle {
    /// Draws `count` samples of the first `dims` coordinates of `Z`. Chunk `j`
    /// uses ChaCha8 stream `j`, so the draw is reproducible under any split.
    pub fn sample(backend: &SkewNormalBackend, dims: usize, count: usize, seed: u64) -> McOracle {
        let d: Vec<f64> = (0..dims).map(|k| backend.delta_at(k as u64 + 1)).collect();
        let s = (1.0 - d.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let mut samples = Vec::with_capacity(dims * count);
        let mut x = vec![0.0; dims];
        for (chunk, start) in (0..count).step_by(CHUNK).enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            for _ in start..(start + CHUNK).min(count) {
                let mut x0 = 0.0;
                for (k, xk) in x.iter_mut().enumerate() {
                    *xk = StandardNormal.sample(&mut rng);
                    x0 += d[k] * *xk;
                }
                let w: f64 = StandardNormal.sample(&mut rng);
                x0 += s * w;
                let sign = if x0 > 0.0 { 1.0 } else { -1.0 };
                samples.extend(x.iter().map(|v| sign * v));
            }
        }
        McOracle { dims, samples }
    }

    pub fn count(&self) -> usize {
        self.samples.len() / self.dims.max(1)
    }

    /// Fraction of samples in `∏ [lo_k, hi_k)` and its standard error.
    pub fn estimate(&self, sides: &[(f64, f64)]) -> (f64, f64) {
        assert_eq!(sides.len(), self.dims, "one side per sampled coordinate");
        let n = self.count();
        let hits = self
            .samples
            .chunks_exact(self.dims)
            .filter(|z| z.iter().zip(sides).all(|(v, (a, b))| *a <= *v && *v < *b))
            .count();
        let p = hits as f64 / n as f64;
        (p, (p * (1.0 - p) / n as f64).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    #[test]
    fn rejects_non_positive_definite_delta() {
        assert!(SkewNormalBackend::new(vec![0.8, 0.6]).is_err());
        assert!(SkewNormalBackend::new(vec![0.7, 0.7]).is_ok());
    }

    #[test]
    fn half_line_matches_arcsine_formula() {
        for d in [0.3, 0.6, 0.9, -0.5] {
            let b = SkewNormalBackend::new(vec![d]).unwrap();
            let t = Term::cyl(Expr::int(1), Expr::neg_inf(), Expr::int(0));
            let m = b.mu0(&t).unwrap();
            let want = 0.5 - d.asin() / std::f64::consts::PI;
            assert!(m.gap(&Interval::point(want)) == 0.0, "d={d} m={m} want={want}");
            assert!(m.width() < 1e-9, "{m}");
        }
    }

    #[test]
    fn density_without_skew_is_standard_normal() {
        let b = SkewNormalBackend::new(vec![0.0, 0.0]).unwrap();
        let x = [0.3, -1.2];
        let want = normal::pdf(0.3) * normal::pdf(-1.2);
        assert!((b.skew_density(&x) - want).abs() < 1e-16);
    }
}
