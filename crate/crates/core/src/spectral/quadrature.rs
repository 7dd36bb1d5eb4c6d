//! Adaptive composite Gauss-Legendre quadrature.

use std::sync::OnceLock;

use num_traits::Float;

/// Nodes and weights of the `order`-point rule on `[-1, 1]`, from Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 1);
    let n = order;
    let mut rule = vec![(0.0, 0.0); n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule[i] = (-x, w);
        rule[n - 1 - i] = (x, w);
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const ORDER: usize = 20;
const MAX_DEPTH: u32 = 40;
const MAX_INTERVALS: usize = 1 << 16;

fn rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * rule()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub intervals: usize,
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by bisection.
///
/// Subintervals are visited left to right and summed in that order, so the
/// result is reproducible. Returns `None` when the depth or interval budget
/// runs out before every piece meets its share of the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Option<Integral> {
    if a == b {
        return Some(Integral {
            value: 0.0,
            abs_error_estimate: 0.0,
            intervals: 0,
        });
    }
    let width = b - a;
    let mut value = 0.0;
    let mut err = 0.0;
    let mut intervals = 0usize;
    // (a, b, whole-interval estimate, depth), processed depth-first, left first.
    let mut stack = vec![(a, b, fixed(&f, a, b), 0u32)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = fixed(&f, lo, mid);
        let right = fixed(&f, mid, hi);
        let diff = (left + right - whole).abs();
        let allowed = tol * (hi - lo) / width;
        let floor = 8.0 * f64::EPSILON * (left.abs() + right.abs());
        if diff <= allowed.max(floor) {
            value += left + right;
            err += diff;
            intervals += 1;
            continue;
        }
        if depth >= MAX_DEPTH || intervals + stack.len() >= MAX_INTERVALS {
            return None;
        }
        stack.push((mid, hi, right, depth + 1));
        stack.push((lo, mid, left, depth + 1));
    }
    Some(Integral {
        value,
        abs_error_estimate: err,
        intervals,
    })
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<T: Float, F: Fn(T) -> T>(f: F, a: T, b: T, iterations: usize) -> (T, T) {
    let inv_phi = T::from(0.618_033_988_749_894_9).unwrap();
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iterations {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
