//! Answer extraction and bootstrap confidence intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("bootstrap requires a nonempty flag list")]
    EmptyInput,
}

/// Accuracy with a percentile-bootstrap confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
    pub resamples: usize,
    pub level: f64,
}

/// Extract the model's predicted answer: the last maximal decimal digit
/// run, with an optional sign and grouping commas stripped.
///
/// A '-' counts as a sign only when it is not preceded by a digit, so
/// "17-10=7" reads as 17, 10, 7 while "= -3" reads as -3. Returns `None`
/// when no digits occur (or the final number overflows i64, which only a
/// degenerate output can produce).
pub fn extract_answer(text: &str) -> Option<i64> {
    // drop commas sitting between digits: "1,234" -> "1234"
    let chars: Vec<char> = text.chars().collect();
    let mut cleaned = String::with_capacity(text.len());
    for (i, &c) in chars.iter().enumerate() {
        if c == ','
            && i > 0
            && chars[i - 1].is_ascii_digit()
            && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit())
        {
            continue;
        }
        cleaned.push(c);
    }
    let bytes: Vec<char> = cleaned.chars().collect();
    let mut last: Option<(usize, usize, bool)> = None; // start, end, negative
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let negative = start > 0
                && bytes[start - 1] == '-'
                && (start == 1 || !bytes[start - 2].is_ascii_digit());
            last = Some((start, i, negative));
        } else {
            i += 1;
        }
    }
    let (start, end, negative) = last?;
    let digits: String = bytes[start..end].iter().collect();
    let value = digits.parse::<i64>().ok()?;
    Some(if negative { -value } else { value })
}

/// Percentile-method bootstrap interval over per-problem correctness
/// flags: `resamples` with-replacement redraws of size n, deterministic
/// under the seed.
pub fn bootstrap_ci(
    flags: &[bool],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<Metrics, MetricsError> {
    if flags.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let n = flags.len();
    let accuracy = flags.iter().filter(|&&f| f).count() as f64 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut hits = 0usize;
        for _ in 0..n {
            if flags[rng.gen_range(0..n)] {
                hits += 1;
            }
        }
        means.push(hits as f64 / n as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let alpha = 1.0 - level;
    let pick = |p: f64| -> f64 {
        let idx = (p * (resamples as f64 - 1.0)).round() as usize;
        means[idx.min(resamples - 1)]
    };
    Ok(Metrics {
        accuracy,
        ci_low: pick(alpha / 2.0),
        ci_high: pick(1.0 - alpha / 2.0),
        n,
        resamples,
        level,
    })
}
