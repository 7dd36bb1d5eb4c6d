//! Large-`x` behaviour of the beta function, `B(x, y) ~ Γ(y) x^{-y}`.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::SpectralError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaAsymptotic {
    pub beta_value: f64,
    pub asymptote: f64,
    /// `B(x, y) / (Γ(y) x^{-y})`, computed in log space.
    pub ratio: f64,
}

pub fn beta_asymptotic_ratio(x: f64, y: f64) -> Result<BetaAsymptotic, SpectralError> {
    if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
        return Err(SpectralError::OutOfRange(format!(
            "beta arguments ({x}, {y}) must be positive"
        )));
    }
    let ln_gx = ln_gamma(x);
    let ln_gy = ln_gamma(y);
    let ln_gxy = ln_gamma(x + y);
    let beta_value = (ln_gx + ln_gy - ln_gxy).exp();
    let asymptote = (ln_gy - y * x.ln()).exp();
    let ratio = ln_ratio(x, y).exp();
    Ok(BetaAsymptotic {
        beta_value,
        asymptote,
        ratio,
    })
}

/// `ln Γ(x) - ln Γ(x + y) + y ln x`.
///
/// The log-gammas are each of size `x ln x` while their difference is of
/// size `y ln x`, so subtracting them loses digits. The Stirling series is
/// differenced term by term instead.
fn ln_ratio(x: f64, y: f64) -> f64 {
    if x < 20.0 {
        // Γ(z + 1) = z Γ(z) moves x up to where the series is accurate.
        let shift = (20.0 - x).ceil();
        let steps: f64 = (0..shift as u32)
            .map(|i| (y / (x + f64::from(i))).ln_1p())
            .sum();
        return ln_ratio(x + shift, y) + steps - y * (shift / x).ln_1p();
    }
    // B_{2k} / (2k (2k - 1)) for k = 1..6.
    const STIRLING: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
    ];
    let series = |z: f64| {
        let z2 = z * z;
        let mut term = 1.0 / z;
        let mut sum = 0.0;
        for c in STIRLING {
            sum += c * term;
            term /= z2;
        }
        sum
    };
    -(x + y - 0.5) * (y / x).ln_1p() + y - (series(x + y) - series(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_second_argument_is_exact() {
        let b = beta_asymptotic_ratio(10.0, 1.0).unwrap();
        assert!((b.beta_value - 0.1).abs() < 1e-13);
        assert!((b.asymptote - 0.1).abs() < 1e-13);
        assert!((b.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn second_argument_two_gives_x_over_x_plus_one() {
        for x in [3.0, 100.0, 1e4] {
            let b = beta_asymptotic_ratio(x, 2.0).unwrap();
            let exact = x / (x + 1.0);
            assert!(
                ((b.ratio - exact) / exact).abs() < 1e-13,
                "x = {x}: {}",
                b.ratio
            );
        }
        assert!((beta_asymptotic_ratio(100.0, 2.0).unwrap().ratio - 0.990099).abs() < 1e-6);
    }

    #[test]
    fn ratio_tends_to_one() {
        for y in [0.5, 1.5] {
            let errs: Vec<f64> = [1e2, 1e3, 1e4]
                .iter()
                .map(|&x| (beta_asymptotic_ratio(x, y).unwrap().ratio - 1.0).abs())
                .collect();
            assert!(errs[0] > errs[1] && errs[1] > errs[2], "y = {y}: {errs:?}");
            // Leading correction is y(1 - y)/(2x).
            assert!((errs[2] - (y * (1.0 - y) / 2e4).abs()).abs() < 1e-6);
        }
        let b = beta_asymptotic_ratio(1e4, 0.5).unwrap();
        assert!((b.ratio - 1.0).abs() < 2e-4);
    }

    #[test]
    fn log_ratio_matches_high_precision_values() {
        // 40-digit evaluations of ln Γ(x) - ln Γ(x + y) + y ln x.
        let cases = [
            (10.0, 0.5, 0.012494807174728820055),
            (10.0, 3.0, -0.27763173659827948626),
            (25.0, 1.5, -0.014802960469706892784),
            (60.0, 7.25, -0.36418672755542617075),
            (1e4, 2.0, -0.000099995000333308335333),
            (1e4, 0.5, 0.000012499999994791666682),
        ];
        for (x, y, want) in cases {
            let got = ln_ratio(x, y);
            assert!((got - want).abs() < 2e-15, "({x}, {y}): {got} vs {want}");
        }
        let below = ln_ratio(20.0 - 1e-9, 2.0);
        let above = ln_ratio(20.0, 2.0);
        assert!((below - above).abs() < 1e-9);
        // Γ(x)/Γ(x + 3) = 1/(x (x + 1) (x + 2)).
        for x in [0.25, 1.0, 7.5, 19.0] {
            let want = 3.0 * f64::ln(x) - (x * (x + 1.0) * (x + 2.0)).ln();
            assert!((ln_ratio(x, 3.0) - want).abs() < 4e-15, "x = {x}");
        }
    }

    #[test]
    fn rejects_nonpositive_arguments() {
        assert!(beta_asymptotic_ratio(0.0, 1.0).is_err());
        assert!(beta_asymptotic_ratio(1.0, -2.0).is_err());
    }
}
