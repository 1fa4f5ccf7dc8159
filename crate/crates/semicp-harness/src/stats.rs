//! Order-independent aggregation helpers. Replica outputs are collected into
//! replica-indexed vectors before any of these run, so results do not depend
//! on the parallelism degree.

/// Pairwise (cascade) summation; deterministic for a fixed input order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let (a, b) = values.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

/// Median with mid-point interpolation on even lengths. Input must be sorted.
pub fn median_sorted(sorted: &[f64]) -> f64 {
    let len = sorted.len();
    assert!(len > 0);
    if len % 2 == 1 {
        sorted[len / 2]
    } else {
        0.5 * (sorted[len / 2 - 1] + sorted[len / 2])
    }
}

/// Nearest-rank percentile (`p` in (0, 100]). Input must be sorted.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let len = sorted.len();
    assert!(len > 0 && p > 0.0 && p <= 100.0);
    let rank = (p / 100.0 * len as f64).ceil() as usize;
    sorted[rank.clamp(1, len) - 1]
}

/// Least-squares line fit; returns `(slope, intercept, r_squared)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    assert!(x.len() == y.len() && x.len() >= 2);
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
        syy += (yi - my) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let _ = n;
    (slope, intercept, r2)
}
