//! Recovering a symmetric walk `a_0, a_{±1}, ..., a_{±m}` from a prefix of
//! its return probabilities.
//!
//! The forward map `a ↦ (c_1, ..., c_K)` is polynomial, so the fit is a
//! small constrained least-squares problem over the simplex
//! `{a_k ≥ 0, a_0 + 2 Σ_{k≥1} a_k = 1}`. Each start runs a Gauss-Newton
//! iteration with Levenberg damping; steps are confined to the affine
//! constraint through a KKT system and then projected (clip negatives,
//! renormalize). Candidates are checked afterwards in exact arithmetic.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::laurent::LaurentPoly;
use crate::rational::{best_rational, format_rational, gcd_all, is_in_unit_interval, to_f64};
use crate::returns::return_sequence;
use crate::walk::StepDistribution;

/// Denominator cap for rounding recovered parameters to rationals.
pub const ROUNDING_MAX_DENOMINATOR: u64 = 1_000_000;
/// Recovered parameters within this distance of a rational are rounded.
pub const ROUNDING_TOLERANCE: f64 = 1e-9;
/// Parameters at or below this are treated as absent when judging
/// primitivity of a floating-point solution.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;
/// Number of deterministic simplex starts besides the uniform seed.
pub const GRID_STARTS: usize = 16;
/// Rounds of restarts from perturbed fits tried when no start reaches the tolerance.
pub const ESCAPE_ROUNDS: usize = 3;
/// Candidates per round whose swaps are tried.
const ESCAPE_WIDTH: usize = 3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconstructError {
    #[error("targets are infeasible: {0}")]
    InfeasibleTargets(String),
    #[error("need at least {needed} targets for support bound {support_bound}, got {got}")]
    TooFewTargets {
        needed: usize,
        got: usize,
        support_bound: usize,
    },
    #[error("best fit has step gcd {gcd}; a primitive walk was required")]
    NonPrimitiveSolution { gcd: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionProblem {
    pub targets: Vec<BigRational>,
    pub support_bound: usize,
    pub tolerance: f64,
    pub require_primitive: bool,
}

impl ReconstructionProblem {
    pub fn new(targets: Vec<BigRational>, support_bound: usize, tolerance: f64) -> Self {
        Self {
            targets,
            support_bound,
            tolerance,
            require_primitive: true,
        }
    }

    /// Targets `c_1..c_k` of a known walk.
    pub fn from_walk(w: &StepDistribution, k: u32, support_bound: usize, tolerance: f64) -> Self {
        Self::new(return_sequence(w, k).values, support_bound, tolerance)
    }

    fn validate(&self) -> Result<(), ReconstructError> {
        let needed = self.support_bound + 1;
        if self.support_bound == 0 || self.targets.len() < needed {
            return Err(ReconstructError::TooFewTargets {
                needed,
                got: self.targets.len(),
                support_bound: self.support_bound,
            });
        }
        if let Some((i, t)) = self
            .targets
            .iter()
            .enumerate()
            .find(|(_, t)| !is_in_unit_interval(t))
        {
            return Err(ReconstructError::InfeasibleTargets(format!(
                "c_{} = {} lies outside [0, 1]",
                i + 1,
                format_rational(t)
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(ReconstructError::InfeasibleTargets(
                "tolerance must be positive".into(),
            ));
        }
        Ok(())
    }

    fn float_targets(&self) -> Vec<f64> {
        self.targets.iter().map(to_f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub symmetric: bool,
    pub primitive: bool,
    pub proper: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionResult {
    /// `a_0, a_1, ..., a_m`; the walk puts `a_k` at both `±k`.
    pub params: Vec<f64>,
    /// `|c_n(params) - target_n|` for `n = 1..=K`.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub certificate: Certificate,
    pub converged: bool,
    pub start_index: usize,
    pub iterations: usize,
    /// Ratio of extreme singular values of the Jacobian at the solution.
    pub condition_number: f64,
}

impl ReconstructionResult {
    /// Steps `k ≥ 1` carrying mass above [`SUPPORT_THRESHOLD`].
    pub fn step_gcd(&self) -> u64 {
        step_gcd(&self.params)
    }

    /// Rounds every parameter to a nearby rational; `None` if some parameter
    /// is not within [`ROUNDING_TOLERANCE`] of one, or the rounded masses do
    /// not form a probability distribution.
    pub fn rounded_walk(&self) -> Option<StepDistribution> {
        let half: Option<Vec<BigRational>> = self
            .params
            .iter()
            .map(|&a| {
                let q = best_rational(a, ROUNDING_MAX_DENOMINATOR)?;
                ((to_f64(&q) - a).abs() <= ROUNDING_TOLERANCE).then_some(q)
            })
            .collect();
        let walk = StepDistribution::symmetric(&half?).ok()?;
        walk.is_proper().then_some(walk)
    }
}

fn step_gcd(params: &[f64]) -> u64 {
    gcd_all(
        params
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &a)| a > SUPPORT_THRESHOLD)
            .map(|(k, _)| k as i64),
    )
}

/// Forward map in floating point: `c_1..c_K` of the symmetric walk with
/// half-line masses `params`, and the Jacobian
/// `∂c_n/∂a_0 = n [t^0] p^{n-1}`, `∂c_n/∂a_k = 2n [t^k] p^{n-1}`.
pub fn forward_with_jacobian(params: &[f64], k: usize) -> (Vec<f64>, DMatrix<f64>) {
    let poly = symmetric_poly(params);
    let mut values = Vec::with_capacity(k);
    let mut jac = DMatrix::zeros(k, params.len());
    let mut prev = LaurentPoly::<f64>::one();
    for n in 1..=k {
        let nf = n as f64;
        jac[(n - 1, 0)] = nf * prev.constant_term();
        for j in 1..params.len() {
            // p^{n-1} is symmetric, so t^{-j} and t^{j} contribute equally.
            jac[(n - 1, j)] = 2.0 * nf * prev.coeff(j as i64);
        }
        prev = prev.mul(&poly);
        values.push(prev.constant_term());
    }
    (values, jac)
}

pub fn forward(params: &[f64], k: usize) -> Vec<f64> {
    let poly = symmetric_poly(params);
    poly.powers().take(k).map(|p| p.constant_term()).collect()
}

fn symmetric_poly(params: &[f64]) -> LaurentPoly<f64> {
    LaurentPoly::from_terms(params.iter().enumerate().flat_map(|(k, &a)| {
        let k = k as i64;
        let pair = if k == 0 { None } else { Some((-k, a)) };
        std::iter::once((k, a)).chain(pair)
    }))
}

/// Exact objective `Σ (c_n(w) - target_n)^2`.
pub fn objective_exact(w: &StepDistribution, targets: &[BigRational]) -> BigRational {
    let seq = return_sequence(w, targets.len() as u32);
    seq.values
        .iter()
        .zip(targets)
        .map(|(c, t)| {
            let d = c - t;
            &d * &d
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

fn constraint(m: usize) -> DVector<f64> {
    DVector::from_fn(m + 1, |i, _| if i == 0 { 1.0 } else { 2.0 })
}

fn project(params: &mut [f64], g: &DVector<f64>) {
    for a in params.iter_mut() {
        if *a < 0.0 || !a.is_finite() {
            *a = 0.0;
        }
    }
    let total: f64 = params.iter().zip(g.iter()).map(|(a, w)| a * w).sum();
    if total > 0.0 {
        for a in params.iter_mut() {
            *a /= total;
        }
    } else {
        params[0] = 1.0;
    }
}

/// Deterministic starting points: the seed with `a_0 = c_1` and the rest of
/// the mass spread evenly, then [`GRID_STARTS`] Dirichlet-like points from a
/// Kronecker sequence. Every start keeps `a_0 = c_1`.
pub fn starting_points(c1: f64, m: usize) -> Vec<Vec<f64>> {
    let rest = ((1.0 - c1) / 2.0).max(0.0);
    let mut starts = Vec::with_capacity(GRID_STARTS + 1);
    let mut even = vec![rest / m as f64; m + 1];
    even[0] = c1;
    starts.push(even);
    // Generalized golden ratio for dimension m: root of x^{m+1} = x + 1.
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (m as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=m).map(|j| phi.powi(-(j as i32))).collect();
    for s in 1..=GRID_STARTS {
        let expo: Vec<f64> = alphas
            .iter()
            .map(|a| {
                let u = (0.5 + a * s as f64).fract().clamp(1e-6, 1.0 - 1e-6);
                -u.ln()
            })
            .collect();
        let sum: f64 = expo.iter().sum();
        let mut p = Vec::with_capacity(m + 1);
        p.push(c1);
        p.extend(expo.iter().map(|e| rest * e / sum));
        starts.push(p);
    }
    starts
}

struct Fit {
    params: Vec<f64>,
    iterations: usize,
}

const MAX_ITERATIONS: usize = 500;

/// Levenberg-damped Gauss-Newton step on the affine constraint. Coordinates
/// sitting at zero whose step would leave the simplex are held at zero and
/// the system is solved again on the rest.
fn damped_step(
    jtj: &DMatrix<f64>,
    jtr: &DVector<f64>,
    g: &DVector<f64>,
    params: &[f64],
    lambda: f64,
    frozen: Option<usize>,
) -> Option<Vec<f64>> {
    let n = params.len();
    let mut held = vec![false; n];
    if let Some(j) = frozen {
        held[j] = true;
    }
    loop {
        let free: Vec<usize> = (0..n).filter(|&i| !held[i]).collect();
        let dim = free.len() + 1;
        let mut kkt = DMatrix::zeros(dim, dim);
        let mut rhs = DVector::zeros(dim);
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                kkt[(a, b)] = jtj[(i, j)];
            }
            kkt[(a, a)] += lambda * jtj[(i, i)].max(1e-12);
            kkt[(a, dim - 1)] = g[i];
            kkt[(dim - 1, a)] = g[i];
            rhs[a] = -jtr[i];
        }
        let sol = kkt.lu().solve(&rhs)?;
        let mut step = vec![0.0; n];
        for (a, &i) in free.iter().enumerate() {
            step[i] = sol[a];
        }
        let newly: Vec<usize> = free
            .iter()
            .copied()
            .filter(|&i| params[i] <= 0.0 && step[i] < 0.0)
            .collect();
        if newly.is_empty() || newly.len() == free.len() {
            return Some(step);
        }
        for i in newly {
            held[i] = true;
        }
    }
}

/// Damped Gauss-Newton from `start`; a `frozen` coordinate stays at its
/// starting value.
fn solve_from(start: Vec<f64>, targets: &[f64], frozen: Option<usize>) -> Fit {
    let m = start.len() - 1;
    let k = targets.len();
    let g = constraint(m);
    let mut params = start;
    project(&mut params, &g);
    let objective =
        |vals: &[f64]| -> f64 { vals.iter().zip(targets).map(|(c, t)| (c - t).powi(2)).sum() };
    let (mut vals, mut jac) = forward_with_jacobian(&params, k);
    let mut obj = objective(&vals);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS && obj > 1e-32 {
        iterations += 1;
        let resid = DVector::from_iterator(k, vals.iter().zip(targets).map(|(c, t)| c - t));
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &resid;
        let mut accepted = false;
        while lambda < 1e16 {
            let Some(step) = damped_step(&jtj, &jtr, &g, &params, lambda, frozen) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = params.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
            project(&mut trial, &g);
            let (tv, tj) = forward_with_jacobian(&trial, k);
            let tobj = objective(&tv);
            if tobj < obj {
                let moved = trial
                    .iter()
                    .zip(&params)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                params = trial;
                vals = tv;
                jac = tj;
                obj = tobj;
                lambda = (lambda / 5.0).max(1e-15);
                accepted = moved > 0.0;
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    Fit { params, iterations }
}

fn to_result(
    fit: Fit,
    targets: &[f64],
    tolerance: f64,
    start_index: usize,
) -> ReconstructionResult {
    let (vals, jac) = forward_with_jacobian(&fit.params, targets.len());
    let residuals: Vec<f64> = vals
        .iter()
        .zip(targets)
        .map(|(c, t)| (c - t).abs())
        .collect();
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let total: f64 = fit
        .params
        .iter()
        .enumerate()
        .map(|(k, a)| if k == 0 { *a } else { 2.0 * a })
        .sum();
    let sv = jac.singular_values();
    let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &s| {
        (hi.max(s), lo.min(s))
    });
    ReconstructionResult {
        certificate: Certificate {
            symmetric: true,
            primitive: step_gcd(&fit.params) == 1,
            proper: (total - 1.0).abs() <= 1e-12,
        },
        converged: max_residual <= tolerance,
        residuals,
        max_residual,
        start_index,
        iterations: fit.iterations,
        condition_number: if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        },
        params: fit.params,
    }
}

/// Runs every start and returns the best candidate, converged or not.
///
/// Selection: converged primitive candidates first (when primitivity is
/// required), then smallest maximum residual, then lowest start index.
pub fn best_fit(p: &ReconstructionProblem) -> Result<ReconstructionResult, ReconstructError> {
    p.validate()?;
    let targets = p.float_targets();
    let preferred =
        |c: &ReconstructionResult| c.converged && (!p.require_primitive || c.certificate.primitive);
    let order = |a: &ReconstructionResult, b: &ReconstructionResult| {
        (!preferred(a), !a.converged)
            .cmp(&(!preferred(b), !b.converged))
            .then(a.max_residual.total_cmp(&b.max_residual))
            .then(a.start_index.cmp(&b.start_index))
    };
    let run =
        |starts: Vec<(Vec<f64>, Option<usize>)>, offset: usize| -> Vec<ReconstructionResult> {
            starts
                .into_par_iter()
                .enumerate()
                .map(|(i, (s, frozen))| {
                    let mut fit = solve_from(s, &targets, frozen);
                    if frozen.is_some() {
                        let polished = solve_from(fit.params, &targets, None);
                        fit = Fit {
                            params: polished.params,
                            iterations: fit.iterations + polished.iterations,
                        };
                    }
                    to_result(fit, &targets, p.tolerance, offset + i)
                })
                .collect()
        };
    let grid = starting_points(targets[0], p.support_bound);
    let mut candidates = run(grid.iter().map(|s| (s.clone(), None)).collect(), 0);
    for round in 0..ESCAPE_ROUNDS {
        if candidates.iter().any(&preferred) {
            break;
        }
        candidates.sort_by(order);
        let mut restarts: Vec<(Vec<f64>, Option<usize>)> = candidates
            .iter()
            .take(ESCAPE_WIDTH)
            .flat_map(|c| escape_moves(&c.params))
            .collect();
        if round == 0 {
            restarts.extend(face_starts(&grid));
        }
        let next = run(restarts, candidates.len());
        candidates.extend(next);
    }
    Ok(candidates
        .into_iter()
        .min_by(order)
        .expect("at least one start"))
}

/// Restarts derived from a stuck fit: two of `a_1..a_m` exchanged, the
/// whole mass of one moved onto another, or one held at zero. Fits that put
/// the right masses on the wrong steps, or spread one step's mass over two,
/// are local minima that descent cannot leave.
fn escape_moves(params: &[f64]) -> Vec<(Vec<f64>, Option<usize>)> {
    let m = params.len() - 1;
    let mut out = Vec::new();
    for i in 1..=m {
        for j in 1..=m {
            if i < j {
                let mut q = params.to_vec();
                q.swap(i, j);
                out.push((q, None));
            }
            if i != j && params[j] > 0.0 {
                let mut q = params.to_vec();
                q[i] += q[j];
                q[j] = 0.0;
                out.push((q, None));
            }
        }
        if params[i] > 0.0 {
            let mut q = params.to_vec();
            q[i] = 0.0;
            out.push((q, Some(i)));
        }
    }
    out
}

/// The grid starts again with one of `a_1..a_m` held at zero, so the walk is
/// first fitted on a smaller support.
fn face_starts(grid: &[Vec<f64>]) -> Vec<(Vec<f64>, Option<usize>)> {
    let m = grid[0].len() - 1;
    (1..=m)
        .flat_map(|j| {
            grid.iter().map(move |s| {
                let mut q = s.clone();
                q[j] = 0.0;
                (q, Some(j))
            })
        })
        .collect()
}

/// As [`best_fit`], but fails unless some candidate meets the tolerance and,
/// when required, is primitive.
pub fn reconstruct(p: &ReconstructionProblem) -> Result<ReconstructionResult, ReconstructError> {
    let best = best_fit(p)?;
    if !best.converged {
        return Err(ReconstructError::InfeasibleTargets(format!(
            "no start reached tolerance {:e} (best max residual {:e})",
            p.tolerance, best.max_residual
        )));
    }
    if p.require_primitive && !best.certificate.primitive {
        return Err(ReconstructError::NonPrimitiveSolution {
            gcd: best.step_gcd(),
        });
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexCheck {
    pub n: usize,
    pub target: Option<String>,
    /// Exact `c_n` of the rounded walk, when rounding succeeded.
    pub recovered_exact: Option<String>,
    pub recovered_float: f64,
    /// Distance to the target (`n ≤ K`) or between the exact and float
    /// forward values (`n > K`).
    pub residual: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    /// `a_0..a_m` as `"p/q"` after rounding.
    pub rounded_params: Option<Vec<String>>,
    pub exact_match: bool,
    pub per_index: Vec<IndexCheck>,
    pub max_residual: f64,
    pub certificate: Certificate,
}

/// Re-derives the return probabilities of a fitted walk up to `recheck_to`,
/// exactly where the parameters round to nearby rationals.
pub fn verify(
    r: &ReconstructionResult,
    p: &ReconstructionProblem,
    recheck_to: usize,
) -> VerificationReport {
    let k = p.targets.len();
    let recheck_to = recheck_to.max(k);
    let floats = forward(&r.params, recheck_to);
    let rounded = r.rounded_walk();
    let exact = rounded
        .as_ref()
        .map(|w| return_sequence(w, recheck_to as u32).values);
    let mut per_index = Vec::with_capacity(recheck_to);
    let mut exact_match = exact.is_some();
    for n in 1..=recheck_to {
        let float_c = floats[n - 1];
        let exact_c = exact.as_ref().map(|v| &v[n - 1]);
        let target = p.targets.get(n - 1);
        let (residual, agrees) = match (target, exact_c) {
            (Some(t), Some(c)) => {
                let same = c == t;
                exact_match &= same;
                (to_f64(&(c - t)).abs(), same)
            }
            (Some(t), None) => {
                let d = (float_c - to_f64(t)).abs();
                (d, d <= p.tolerance)
            }
            (None, Some(c)) => {
                let d = (float_c - to_f64(c)).abs();
                (d, d <= ROUNDING_TOLERANCE)
            }
            (None, None) => (0.0, true),
        };
        per_index.push(IndexCheck {
            n,
            target: target.map(format_rational),
            recovered_exact: exact_c.map(format_rational),
            recovered_float: float_c,
            residual,
            agrees,
        });
    }
    let max_residual = per_index
        .iter()
        .take(k)
        .map(|c| c.residual)
        .fold(0.0, f64::max);
    VerificationReport {
        rounded_params: rounded.as_ref().map(|w| {
            (0..r.params.len() as i64)
                .map(|s| format_rational(&w.mass(s)))
                .collect()
        }),
        exact_match,
        per_index,
        max_residual,
        certificate: Certificate {
            symmetric: true,
            primitive: rounded
                .as_ref()
                .map(|w| gcd_all(w.support()) == 1)
                .unwrap_or(r.certificate.primitive),
            proper: rounded
                .as_ref()
                .map(|w| w.total().is_one())
                .unwrap_or(r.certificate.proper),
        },
    }
}
