#![allow(dead_code)] // each test target uses its own subset

//! Shared independent oracles for the property and acceptance suites.
//! These deliberately re-derive results through a different route than
//! the library code they check.

/// Brute-force box statistics via exact rational rank arithmetic:
/// quantile position num/den * (n-1) split into an integer index and a
/// remainder, interpolated explicitly.
pub fn oracle_quantile(sorted: &[f64], num: usize, den: usize) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let t = num * (n - 1);
    let idx = t / den;
    let rem = t % den;
    if rem == 0 {
        sorted[idx]
    } else {
        sorted[idx] + (sorted[idx + 1] - sorted[idx]) * (rem as f64 / den as f64)
    }
}

pub struct OracleBox {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn oracle_box(samples: &[f64]) -> OracleBox {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q1 = oracle_quantile(&sorted, 1, 4);
    let median = oracle_quantile(&sorted, 2, 4);
    let q3 = oracle_quantile(&sorted, 3, 4);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = sorted.iter().copied().filter(|v| *v >= lo && *v <= hi).collect();
    OracleBox {
        q1,
        median,
        q3,
        whisker_low: *inside.first().unwrap_or(&sorted[0]),
        whisker_high: *inside.last().unwrap_or(&sorted[sorted.len() - 1]),
        outliers: sorted.iter().copied().filter(|v| *v < lo || *v > hi).collect(),
    }
}

/// All multisets of `len` values drawn from `domain` (non-decreasing
/// index sequences), used for exhaustive small-case checks.
pub fn multisets(domain: &[f64], len: usize) -> Vec<Vec<f64>> {
    fn rec(domain: &[f64], len: usize, start: usize, cur: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..domain.len() {
            cur.push(domain[i]);
            rec(domain, len, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(domain, len, 0, &mut Vec::new(), &mut out);
    out
}
