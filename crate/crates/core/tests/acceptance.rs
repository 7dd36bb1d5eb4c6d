//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run alone with `cargo test -p walkprint --test acceptance`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use walkprint::corpus::{lazy_walk, random_walk, rep_corpus, simple_walk, walk_corpus, WalkFamily};
use walkprint::montecarlo::{consistency_test, simulate_return_with_threads};
use walkprint::rational::{format_rational, to_f64};
use walkprint::reconstruct::{reconstruct, ReconstructionProblem};
use walkprint::rep::{
    dimension_bracket, dimension_identity_holds, dims_to_rep, invariant_dims, rep_to_walk,
};
use walkprint::returns::{
    chebyshev_lower_bound, distinguishing_index, nth_root_f64, position_distributions,
    return_sequence,
};
use walkprint::spectral::beta::beta_asymptotic_ratio;
use walkprint::spectral::{decay_gap, decay_slope, extrema_scan, quadrature_return, variance};
use walkprint::walk::{classify, dilate, truncate_geometric, WalkType};
use walkprint::{CharFn, StepDistribution};

const CORPUS_SEED: u64 = 0x5eed_0001;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn main_corpus() -> Vec<StepDistribution> {
    walk_corpus(CORPUS_SEED, 1000, WalkFamily::new(6, 64))
}

fn binomial(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n - i) / BigInt::from(i + 1)
    })
}

fn c1_simple_walk_closed_form() -> Verdict {
    let start = Instant::now();
    let seq = return_sequence(&simple_walk(), 60);
    let elapsed = start.elapsed();
    let four = BigInt::from(4);
    let mut bad = Vec::new();
    for n in 1..=30u64 {
        let expected = BigRational::new(binomial(2 * n, n), Pow::pow(&four, n));
        if seq.get(2 * n as usize) != Some(&expected) {
            bad.push(2 * n);
        }
        if !seq.get(2 * n as usize - 1).is_some_and(Zero::is_zero) {
            bad.push(2 * n - 1);
        }
    }
    let fast = elapsed < Duration::from_secs(5);
    verdict(
        bad.is_empty() && fast,
        format!(
            "K=60, mismatches at {bad:?}, {:.3}s (limit 5s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn c2_odd_returns_vanish_iff_odd_steps(corpus: &[StepDistribution]) -> Verdict {
    let failures: Vec<String> = corpus
        .par_iter()
        .filter_map(|w| {
            let class = classify(w);
            let seq = return_sequence(w, 49);
            let odd_zero = (1..=49)
                .step_by(2)
                .all(|n| seq.get(n).is_some_and(Zero::is_zero));
            let all_odd = class.walk_type == WalkType::Type2;
            if odd_zero != all_odd {
                return Some(format!(
                    "{w}: odd vanish {odd_zero}, all steps odd {all_odd}"
                ));
            }
            if !all_odd {
                let m = w.max_step() as usize;
                let limit = m * m + m;
                let first = (1..=49)
                    .step_by(2)
                    .find(|&n| !seq.get(n).is_some_and(Zero::is_zero));
                if !first.is_some_and(|n| n <= limit) {
                    return Some(format!("{w}: first nonzero odd index {first:?} > {limit}"));
                }
            }
            None
        })
        .collect();
    let type2 = corpus
        .iter()
        .filter(|w| classify(w).walk_type == WalkType::Type2)
        .count();
    verdict(
        failures.is_empty(),
        format!(
            "{} walks ({type2} all-odd), K=49, failures {}{}",
            corpus.len(),
            failures.len(),
            failures
                .first()
                .map(|f| format!(": {f}"))
                .unwrap_or_default()
        ),
    )
}

fn c3_dilation_invariance(corpus: &[StepDistribution]) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 3);
    let pairs: Vec<(&StepDistribution, u64)> = (0..100)
        .map(|_| {
            (
                &corpus[rng.gen_range(0..corpus.len())],
                rng.gen_range(1..=5),
            )
        })
        .collect();
    let bad = pairs
        .par_iter()
        .filter(|(w, c)| {
            return_sequence(&dilate(w, *c), 40).values != return_sequence(w, 40).values
        })
        .count();
    verdict(
        bad == 0,
        format!("100 pairs, c in 1..=5, K=40, mismatches {bad}"),
    )
}

fn c4_square_sum_and_lower_bounds(corpus: &[StepDistribution]) -> Verdict {
    struct Tally {
        failures: Vec<String>,
        bound_checks: usize,
        root_checks: usize,
        root_skipped: usize,
    }
    let tallies: Vec<Tally> = corpus
        .par_iter()
        .map(|w| {
            let mut t = Tally {
                failures: Vec::new(),
                bound_checks: 0,
                root_checks: 0,
                root_skipped: 0,
            };
            let seq = return_sequence(w, 40);
            let dists = position_distributions(w, 20);
            let var = variance(w);
            for n in 1..=20usize {
                let c2n = seq.get(2 * n).expect("in range");
                if &dists[n - 1].sum_of_squares() != c2n {
                    t.failures.push(format!("{w}: c_{} != sum r^2", 2 * n));
                }
                let nn = BigRational::from_integer(BigInt::from(n * n));
                if var < nn {
                    t.bound_checks += 1;
                    let lb = chebyshev_lower_bound(&var, n).expect("bound applies");
                    if c2n < &lb {
                        t.failures
                            .push(format!("{w}: c_{} < {}", 2 * n, format_rational(&lb)));
                    }
                }
                // The root bound follows from the lower bound once 1 - σ²/n² > 1/2.
                if BigRational::from_integer(2.into()) * &var < nn {
                    t.root_checks += 1;
                    let floor = BigRational::new(BigInt::one(), BigInt::from(4 * n * n + 2));
                    let root = nth_root_f64(c2n, 2 * n);
                    let root_floor =
                        (1.0 / (4.0 * (n * n) as f64 + 2.0)).powf(1.0 / (2 * n) as f64);
                    if c2n < &floor || root < root_floor * (1.0 - 1e-12) {
                        t.failures.push(format!(
                            "{w}: c_{}^(1/{}) = {root} below {root_floor}",
                            2 * n,
                            2 * n
                        ));
                    }
                } else {
                    t.root_skipped += 1;
                }
            }
            t
        })
        .collect();
    let failures: Vec<&String> = tallies.iter().flat_map(|t| &t.failures).collect();
    let bounds: usize = tallies.iter().map(|t| t.bound_checks).sum();
    let roots: usize = tallies.iter().map(|t| t.root_checks).sum();
    let skipped: usize = tallies.iter().map(|t| t.root_skipped).sum();
    verdict(
        failures.is_empty(),
        format!(
            "n<=20 over {} walks: {} square-sum identities, {bounds} lower bounds, {roots} root bounds \
             ({skipped} indices with 2σ²>=n² outside the root bound's range), failures {}{}",
            corpus.len(),
            20 * corpus.len(),
            failures.len(),
            failures.first().map(|f| format!(": {f}")).unwrap_or_default()
        ),
    )
}

fn c5_quadrature_and_truncation(corpus: &[StepDistribution]) -> Verdict {
    let worst = corpus[..50]
        .par_iter()
        .map(|w| {
            let cf = CharFn::new(w).expect("symmetric");
            let seq = return_sequence(w, 12);
            (1..=12u32)
                .map(|n| match quadrature_return(&cf, n, 1e-10) {
                    Ok(i) => (i.value - to_f64(&seq.values[n as usize - 1])).abs(),
                    Err(_) => f64::INFINITY,
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);

    let mut cases = Vec::new();
    for (rn, rd) in [(1, 2), (1, 3), (2, 3), (3, 4), (9, 10)] {
        for (cn, cd) in [(0, 1), (1, 4), (1, 2)] {
            for m in 1..=6u32 {
                cases.push((
                    BigRational::new(rn.into(), rd.into()),
                    BigRational::new(cn.into(), cd.into()),
                    m,
                ));
            }
        }
    }
    let trunc_failures = cases
        .par_iter()
        .filter(|(r, c, m)| {
            let (wm, tail) = truncate_geometric(r, c, *m).expect("valid parameters");
            let (wm2, _) = truncate_geometric(r, c, m + 30).expect("valid parameters");
            let a = return_sequence(&wm, 20);
            let b = return_sequence(&wm2, 20);
            (1..=20usize).any(|n| {
                let diff = (a.get(n).unwrap() - b.get(n).unwrap()).abs();
                diff > BigRational::from_integer(n.into()) * &tail
            })
        })
        .count();
    verdict(
        worst <= 1e-10 && trunc_failures == 0,
        format!(
            "50 walks n<=12: max |quadrature - exact| = {worst:.2e} (limit 1e-10); \
             {} truncations m'=m+30 n<=20: bound violations {trunc_failures}",
            cases.len()
        ),
    )
}

fn c6_extrema_and_decay(corpus: &[StepDistribution]) -> Verdict {
    let results: Vec<Result<f64, String>> = corpus
        .par_iter()
        .map(|w| {
            let cf = CharFn::new(w).map_err(|e| e.to_string())?;
            for delta in [0.05, 0.2, 0.5] {
                let e = extrema_scan(&cf, delta, 10_000).map_err(|e| e.to_string())?;
                if e.sup_abs_f >= 1.0 {
                    return Err(format!("{w}: sup|f| = {} on [{delta}, P]", e.sup_abs_f));
                }
            }
            let gaps = [2u32, 5, 10, 15]
                .iter()
                .map(|&n| decay_gap(&cf, 0.5, n))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| format!("{w}: {e}"))?;
            if let Some(g) = gaps.iter().find(|g| g.measured > g.bound) {
                return Err(format!(
                    "{w}: n={} gap {:e} > bound {:e}",
                    g.n, g.measured, g.bound
                ));
            }
            let alpha = gaps[0].alpha;
            let slope = decay_slope(&gaps).ok_or_else(|| format!("{w}: gaps vanish"))?;
            let limit = alpha.ln() / 2.0;
            if slope > limit {
                return Err(format!("{w}: slope {slope:.4} > ln(alpha)/2 = {limit:.4}"));
            }
            Ok(slope - limit)
        })
        .collect();
    let failures: Vec<&String> = results.iter().filter_map(|r| r.as_ref().err()).collect();
    let margin = results
        .iter()
        .filter_map(|r| r.as_ref().ok())
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    verdict(
        failures.is_empty(),
        format!(
            "{} walks, radii {{0.05,0.2,0.5}}, eps=0.5, n in {{2,5,10,15}}: failures {}, \
             closest slope - ln(alpha)/2 = {margin:.4}{}",
            corpus.len(),
            failures.len(),
            failures
                .first()
                .map(|f| format!("; first: {f}"))
                .unwrap_or_default()
        ),
    )
}

fn c7_beta_ratio() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for y in [0.5, 1.5] {
        let r = beta_asymptotic_ratio(1e4, y)
            .expect("valid arguments")
            .ratio;
        pass &= (0.999..=1.001).contains(&r);
        lines.push(format!("y={y}: {r:.8}"));
    }
    for x in [1e4, 123.5, 3.0] {
        let r = beta_asymptotic_ratio(x, 2.0)
            .expect("valid arguments")
            .ratio;
        let exact = x / (x + 1.0);
        pass &= ((r - exact) / exact).abs() <= 1e-12;
        lines.push(format!("y=2, x={x}: {r:.12} vs {exact:.12}"));
    }
    verdict(pass, lines.join("; "))
}

fn c8_distinguishing_probe() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 8);
    let family = WalkFamily::new(4, 16);
    let pairs: Vec<(StepDistribution, StepDistribution)> = (0..500)
        .map(|_| loop {
            let a = random_walk(&mut rng, family);
            let b = random_walk(&mut rng, family);
            if a != b {
                break (a, b);
            }
        })
        .collect();
    let found: Vec<Option<u32>> = pairs
        .par_iter()
        .map(|(a, b)| distinguishing_index(a, b, 50))
        .collect();
    let anomalies: Vec<String> = pairs
        .iter()
        .zip(&found)
        .filter(|(_, f)| f.is_none())
        .map(|((a, b), _)| format!("{a} vs {b}"))
        .collect();
    for a in &anomalies {
        println!("    anomaly: no distinguishing index up to 50 for {a}");
    }
    let max = found.iter().flatten().max().copied().unwrap_or(0);
    verdict(
        anomalies.is_empty(),
        format!(
            "500 pairs, K=50: anomalies {}, largest index needed {max}",
            anomalies.len()
        ),
    )
}

fn c9_reconstruction_round_trip() -> Verdict {
    let corpus = walk_corpus(CORPUS_SEED ^ 9, 200, WalkFamily::new(4, 64));
    let start = Instant::now();
    let failures: Vec<String> = corpus
        .par_iter()
        .filter_map(|w| {
            let p = ReconstructionProblem::from_walk(w, 12, 4, 1e-8);
            let r = match reconstruct(&p) {
                Ok(r) => r,
                Err(e) => return Some(format!("{w}: {e}")),
            };
            let source = (0..=4).map(|k| to_f64(&w.mass(k)));
            let err = r
                .params
                .iter()
                .zip(source)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if err > 1e-6 {
                return Some(format!("{w}: parameter error {err:e}"));
            }
            if r.rounded_walk().as_ref() != Some(w) {
                return Some(format!("{w}: rounding gave {:?}", r.rounded_walk()));
            }
            None
        })
        .collect();
    let elapsed = start.elapsed();
    verdict(
        failures.is_empty() && elapsed < Duration::from_secs(120),
        format!(
            "200 walks, m<=4, K=12: failures {}, {:.1}s (limit 120s){}",
            failures.len(),
            elapsed.as_secs_f64(),
            failures
                .first()
                .map(|f| format!("; first: {f}"))
                .unwrap_or_default()
        ),
    )
}

fn c10_rep_round_trip() -> Verdict {
    let reps = rep_corpus(CORPUS_SEED ^ 10, 100, 4, 5);
    let k = 2 * 4 + 6;
    let failures: Vec<String> = reps
        .par_iter()
        .filter_map(|r| {
            let dims = invariant_dims(r, k);
            if !dimension_identity_holds(r, &dims) {
                return Some(format!("{r:?}: d_n != N^n c_n"));
            }
            let c = return_sequence(&rep_to_walk(r), k);
            let big_n = BigInt::from(r.dim());
            for (i, d) in dims.dims.iter().enumerate() {
                let scaled = &c.values[i] * BigRational::from_integer(Pow::pow(&big_n, i + 1));
                if !scaled.is_integer() || &scaled.to_integer() != d {
                    return Some(format!("{r:?}: d_{} = {d} but N^n c_n = {scaled}", i + 1));
                }
            }
            let (lo, hi) = dimension_bracket(&dims, 4);
            if !(lo <= big_n && big_n <= hi) {
                return Some(format!(
                    "{r:?}: N = {} outside bracket [{lo}, {hi}]",
                    r.dim()
                ));
            }
            match dims_to_rep(&dims, 4) {
                Ok(back) if &back == r => None,
                Ok(back) => Some(format!("{r:?}: recovered {back:?}")),
                Err(e) => Some(format!("{r:?}: {e}")),
            }
        })
        .collect();
    verdict(
        failures.is_empty(),
        format!(
            "100 reps, weights<=4, mult<=5, K={k}: failures {}{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!("; first: {f}"))
                .unwrap_or_default()
        ),
    )
}

fn c11_monte_carlo() -> Verdict {
    let trials = 1_000_000;
    let cases: [(&str, StepDistribution, u32, u64); 4] = [
        ("S", simple_walk(), 2, 101),
        ("L", lazy_walk(), 1, 102),
        ("L", lazy_walk(), 2, 103),
        ("L", lazy_walk(), 3, 104),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, w, n, seed) in &cases {
        let r = consistency_test(w, *n, trials, *seed, 4.0).expect("proper walk");
        pass &= r.pass;
        parts.push(format!("{name} n={n} z={:+.2}", r.z_score));
    }
    let a = simulate_return_with_threads(&lazy_walk(), 3, trials, 7, 1).expect("proper walk");
    let b = simulate_return_with_threads(&lazy_walk(), 3, trials, 7, 1).expect("proper walk");
    let c = simulate_return_with_threads(&lazy_walk(), 3, trials, 7, 8).expect("proper walk");
    let bytes = |e: &walkprint::montecarlo::SimulationEstimate| {
        serde_json::to_string(e).expect("serializes")
    };
    let deterministic = bytes(&a) == bytes(&b) && bytes(&a) == bytes(&c);
    pass &= deterministic;
    parts.push(format!(
        "repeat and 1 vs 8 threads identical: {deterministic}"
    ));
    verdict(pass, format!("10^6 trials, z_max=4: {}", parts.join(", ")))
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Verdict + 'a>);

fn main() {
    let corpus = main_corpus();
    let criteria: Vec<Criterion> = vec![
        (
            "exact closed form for the simple walk",
            Box::new(c1_simple_walk_closed_form),
        ),
        (
            "odd returns vanish iff every step is odd",
            Box::new(|| c2_odd_returns_vanish_iff_odd_steps(&corpus)),
        ),
        (
            "dilation leaves return probabilities unchanged",
            Box::new(|| c3_dilation_invariance(&corpus)),
        ),
        (
            "square-sum identity and variance lower bounds",
            Box::new(|| c4_square_sum_and_lower_bounds(&corpus)),
        ),
        (
            "quadrature and truncation bounds",
            Box::new(|| c5_quadrature_and_truncation(&corpus)),
        ),
        (
            "characteristic function extrema and decay gaps",
            Box::new(|| c6_extrema_and_decay(&corpus)),
        ),
        ("beta function asymptotic ratio", Box::new(c7_beta_ratio)),
        (
            "return probabilities distinguish random pairs",
            Box::new(c8_distinguishing_probe),
        ),
        (
            "reconstruction round trip",
            Box::new(c9_reconstruction_round_trip),
        ),
        (
            "weight decomposition round trip",
            Box::new(c10_rep_round_trip),
        ),
        (
            "Monte Carlo consistency and determinism",
            Box::new(c11_monte_carlo),
        ),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} criterion {:>2}: {name} [{:.1}s] {}",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            v.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
