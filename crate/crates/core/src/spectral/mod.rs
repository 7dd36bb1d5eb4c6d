//! Floating-point analysis of the characteristic function
//! `f(x) = Σ a_k e^{ikx} = a_0 + 2 Σ_{k≥1} a_k cos(kx)` of a symmetric walk.

pub mod beta;
pub mod quadrature;

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{format_rational, to_f64};
use crate::returns::return_sequence;
use crate::walk::{classify, StepDistribution, WalkType};

pub use beta::{beta_asymptotic_ratio, BetaAsymptotic};
pub use quadrature::{integrate, Integral};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("the characteristic function is only real for symmetric walks")]
    NotSymmetric,
    #[error("walk must be symmetric, primitive and proper")]
    NotClassifiable,
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("quadrature did not reach tolerance {tol:e} for n = {n}")]
    QuadratureNonConvergence { n: u32, tol: f64 },
}

/// Cosine-series form of `f` for a symmetric walk, over any float type.
#[derive(Debug, Clone)]
pub struct CharacterFunction<T> {
    source: StepDistribution,
    walk_type: WalkType,
    a0: T,
    /// `(k, 2 a_k)` for each `k ≥ 1` in the support.
    cosine_coeffs: Vec<(T, T)>,
}

impl<T: Float> CharacterFunction<T> {
    /// Accepts symmetric walks, including subprobability truncations.
    pub fn new(w: &StepDistribution) -> Result<Self, SpectralError> {
        if !w.is_symmetric() {
            return Err(SpectralError::NotSymmetric);
        }
        let cast = |v: f64| T::from(v).expect("f64 converts to the float type");
        let a0 = cast(to_f64(&w.mass(0)));
        let cosine_coeffs = w
            .entries()
            .filter(|(k, _)| *k > 0)
            .map(|(k, p)| (cast(k as f64), cast(2.0 * to_f64(p))))
            .collect();
        Ok(Self {
            source: w.clone(),
            walk_type: classify(w).walk_type,
            a0,
            cosine_coeffs,
        })
    }

    pub fn source(&self) -> &StepDistribution {
        &self.source
    }

    pub fn walk_type(&self) -> WalkType {
        self.walk_type
    }

    pub fn cosine_coeffs(&self) -> (T, &[(T, T)]) {
        (self.a0, &self.cosine_coeffs)
    }

    pub fn eval(&self, x: T) -> T {
        self.cosine_coeffs
            .iter()
            .fold(self.a0, |acc, &(k, c)| acc + c * (k * x).cos())
    }

    /// Half-width of the fundamental domain scanned for `|f| < 1`: `π` for
    /// walks with an even step size, `π/2` when every step is odd.
    pub fn half_period(&self) -> Result<T, SpectralError> {
        let pi = T::from(PI).unwrap();
        match self.walk_type {
            WalkType::Type1 => Ok(pi),
            WalkType::Type2 => Ok(pi / (T::one() + T::one())),
            WalkType::NotApplicable => Err(SpectralError::NotClassifiable),
        }
    }
}

pub fn eval_f<T: Float>(cf: &CharacterFunction<T>, x: T) -> T {
    cf.eval(x)
}

/// Exact step variance `Σ k² a_k`.
pub fn variance(w: &StepDistribution) -> BigRational {
    w.entries()
        .map(|(k, p)| p * BigRational::from_integer(BigInt::from(k) * BigInt::from(k)))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// `c_n ≈ (1/2π) ∫_{-π}^{π} f(x)^n dx`, integrated as `(1/π) ∫_0^π` since
/// `f` is even.
pub fn quadrature_return(
    cf: &CharacterFunction<f64>,
    n: u32,
    tol: f64,
) -> Result<Integral, SpectralError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(SpectralError::OutOfRange(format!(
            "tolerance {tol} must be positive"
        )));
    }
    if n == 0 {
        return Ok(Integral {
            value: 1.0,
            abs_error_estimate: 0.0,
            intervals: 0,
        });
    }
    let exponent = n as i32;
    integrate(|x| cf.eval(x).powi(exponent), 0.0, PI, tol * PI)
        .map(|i| Integral {
            value: i.value / PI,
            abs_error_estimate: i.abs_error_estimate / PI,
            intervals: i.intervals,
        })
        .ok_or(SpectralError::QuadratureNonConvergence { n, tol })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub exclusion_radius: f64,
    pub sup_abs_f: f64,
    pub arg: f64,
}

/// Largest `|f|` on `[δ, P]` with `P` the half period, by a uniform grid
/// followed by golden-section refinement around the best grid cell.
pub fn extrema_scan(
    cf: &CharacterFunction<f64>,
    exclusion_radius: f64,
    grid_points: usize,
) -> Result<Extremum, SpectralError> {
    let half = cf.half_period()?;
    if !(exclusion_radius > 0.0 && exclusion_radius < half) {
        return Err(SpectralError::OutOfRange(format!(
            "exclusion radius {exclusion_radius} must lie in (0, {half})"
        )));
    }
    if grid_points < 2 {
        return Err(SpectralError::OutOfRange(
            "need at least two grid points".into(),
        ));
    }
    Ok(sup_abs_on(
        cf,
        exclusion_radius,
        half,
        grid_points,
        exclusion_radius,
    ))
}

fn sup_abs_on(
    cf: &CharacterFunction<f64>,
    lo: f64,
    hi: f64,
    grid_points: usize,
    radius: f64,
) -> Extremum {
    let step = (hi - lo) / (grid_points - 1) as f64;
    let abs_f = |x: f64| cf.eval(x).abs();
    let (best_i, best) = (0..grid_points)
        .map(|i| (i, abs_f(lo + step * i as f64)))
        .fold((0, f64::NEG_INFINITY), |acc, cur| {
            if cur.1 > acc.1 {
                cur
            } else {
                acc
            }
        });
    let cell_lo = (lo + step * best_i.saturating_sub(1) as f64).max(lo);
    let cell_hi = (lo + step * (best_i + 1) as f64).min(hi);
    let (x, fx) = quadrature::golden_max(abs_f, cell_lo, cell_hi, 100);
    let (arg, sup) = if fx > best {
        (x, fx)
    } else {
        (lo + step * best_i as f64, best)
    };
    Extremum {
        exclusion_radius: radius,
        sup_abs_f: sup,
        arg,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayGap {
    pub n: u32,
    pub epsilon: f64,
    /// Distance between `c_n` (or `c_{2n}`) and the `[0, ε]` part of its
    /// Fourier integral.
    pub measured: f64,
    /// `α^n` (or `α^{2n}`) with `α = sup |f|` off `[0, ε]`.
    pub bound: f64,
    pub alpha: f64,
    /// The same gap computed as `|c - head integral|` from the exact return
    /// probability; agrees with `measured` up to rounding in `c`.
    pub direct: f64,
}

/// Exponentially small remainder left after keeping only the neighbourhood
/// `[0, ε]` of the peak of `f` in the Fourier integral of the return
/// probability.
///
/// For walks with an even step size this is
/// `|c_n - (1/π) ∫_0^ε f^n|` against `α^n`, with `α = sup |f|` on `[ε, π]`.
/// When every step is odd the odd terms vanish and the even ones satisfy
/// `|c_{2n} - (2/π) ∫_0^ε f^{2n}|` against `α^{2n}` with `α` taken on
/// `[ε, π/2]`.
///
/// `measured` is integrated directly over the complement `[ε, P]` (the two
/// expressions are equal because `c_n` is the full integral), which keeps
/// relative accuracy when the gap is far below `c_n`.
pub fn decay_gap(
    cf: &CharacterFunction<f64>,
    epsilon: f64,
    n: u32,
) -> Result<DecayGap, SpectralError> {
    let half = cf.half_period()?;
    if !(epsilon > 0.0 && epsilon < half) {
        return Err(SpectralError::OutOfRange(format!(
            "epsilon {epsilon} must lie in (0, {half})"
        )));
    }
    if n == 0 {
        return Err(SpectralError::OutOfRange("n must be positive".into()));
    }
    let (exponent, weight) = match cf.walk_type() {
        WalkType::Type2 => (2 * n, 2.0 / PI),
        _ => (n, 1.0 / PI),
    };
    let alpha = sup_abs_on(cf, epsilon, half, 4096, epsilon).sup_abs_f;
    let bound = alpha.powi(exponent as i32);
    let power = |x: f64| cf.eval(x).powi(exponent as i32);

    let tail_tol = (bound * 1e-9).max(1e-300);
    let tail = integrate(power, epsilon, half, tail_tol).ok_or(
        SpectralError::QuadratureNonConvergence {
            n: exponent,
            tol: tail_tol,
        },
    )?;
    let measured = weight * tail.value.abs();

    let head =
        integrate(power, 0.0, epsilon, 1e-14).ok_or(SpectralError::QuadratureNonConvergence {
            n: exponent,
            tol: 1e-14,
        })?;
    let exact = return_sequence(cf.source(), exponent);
    let c = to_f64(&exact.values[exponent as usize - 1]);
    let direct = (c - weight * head.value).abs();

    Ok(DecayGap {
        n,
        epsilon,
        measured,
        bound,
        alpha,
        direct,
    })
}

/// Least-squares slope of `ln(measured)` against `n`.
pub fn decay_slope(gaps: &[DecayGap]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = gaps
        .iter()
        .filter(|g| g.measured > 0.0)
        .map(|g| (g.n as f64, g.measured.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureValue {
    pub n: u32,
    pub approx: f64,
    pub abs_error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub source: String,
    /// Exact `Σ k² a_k` as `"p/q"`.
    pub variance: String,
    pub near_extrema: Vec<Extremum>,
    pub quadrature_values: Vec<QuadratureValue>,
    pub decay_gaps: Vec<DecayGap>,
}

#[derive(Debug, Clone)]
pub struct SpectralOptions {
    pub exclusion_radii: Vec<f64>,
    pub grid_points: usize,
    pub quadrature_max_n: u32,
    pub quadrature_tol: f64,
    pub epsilon: f64,
    pub decay_ns: Vec<u32>,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            exclusion_radii: vec![0.05, 0.2, 0.5],
            grid_points: 10_000,
            quadrature_max_n: 12,
            quadrature_tol: 1e-10,
            epsilon: 0.5,
            decay_ns: vec![2, 5, 10, 15],
        }
    }
}

/// Runs every spectral diagnostic on one symmetric, primitive, proper walk.
pub fn spectral_report(
    w: &StepDistribution,
    opts: &SpectralOptions,
) -> Result<SpectralReport, SpectralError> {
    let cf = CharacterFunction::<f64>::new(w)?;
    cf.half_period()?;
    let near_extrema = opts
        .exclusion_radii
        .iter()
        .map(|&d| extrema_scan(&cf, d, opts.grid_points))
        .collect::<Result<_, _>>()?;
    let quadrature_values = (1..=opts.quadrature_max_n)
        .map(|n| {
            quadrature_return(&cf, n, opts.quadrature_tol).map(|i| QuadratureValue {
                n,
                approx: i.value,
                abs_error_estimate: i.abs_error_estimate,
            })
        })
        .collect::<Result<_, _>>()?;
    let decay_gaps = opts
        .decay_ns
        .iter()
        .map(|&n| decay_gap(&cf, opts.epsilon, n))
        .collect::<Result<_, _>>()?;
    Ok(SpectralReport {
        source: w.fingerprint(),
        variance: format_rational(&variance(w)),
        near_extrema,
        quadrature_values,
        decay_gaps,
    })
}
