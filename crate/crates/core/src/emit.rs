//! Text emitters: CSV rows of return probabilities and ndjson records.

use std::fmt::Write as _;

use serde::Serialize;

use crate::rational::{format_rational, to_f64};
use crate::returns::ReturnSequence;

/// `x` to `digits` significant digits, fixed notation for moderate
/// exponents and scientific otherwise.
pub fn format_significant(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci
        .rsplit('e')
        .next()
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if exp < -5 || exp >= digits as i32 {
        return sci;
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let fixed = format!("{x:.decimals$}");
    if fixed.contains('.') {
        fixed.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        fixed
    }
}

pub const CSV_HEADER: &str = "n,c_n,c_n_approx";

/// One row per index: `n`, the exact value and a 12-digit approximation.
pub fn returns_csv(seq: &ReturnSequence) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (i, c) in seq.values.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            i + 1,
            format_rational(c),
            format_significant(to_f64(c), 12)
        );
    }
    out
}

/// A single ndjson line (no trailing newline).
pub fn ndjson_line<T: Serialize>(record: &T) -> String {
    serde_json::to_string(record).expect("report serializes")
}

pub fn ndjson<T: Serialize>(records: &[T]) -> String {
    records.iter().map(|r| ndjson_line(r) + "\n").collect()
}
