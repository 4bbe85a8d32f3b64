//! Order statistics: linearly interpolated quantiles and Tukey box summaries.

use serde::Serialize;

use crate::scalar::Scalar;

/// Quantile `num/den` of an ascending slice, interpolating linearly between
/// the two closest ranks (rank position `(n - 1) * p`).
///
/// Panics on an empty slice or `num > den`.
pub fn quantile_sorted<T: Scalar>(sorted: &[T], num: usize, den: usize) -> T {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!(den > 0 && num <= den);
    let scaled = (sorted.len() - 1) * num;
    let lo = scaled / den;
    let rem = scaled % den;
    if rem == 0 {
        return sorted[lo];
    }
    let (a, b) = (sorted[lo], sorted[lo + 1]);
    a + (b - a) * T::ratio(rem, den)
}

/// Box-and-whisker summary with whiskers at the most extreme data points
/// inside `[q1 - 1.5 IQR, q3 + 1.5 IQR]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TukeySummary<T> {
    pub n: usize,
    pub median: T,
    pub q1: T,
    pub q3: T,
    pub whisker_low: T,
    pub whisker_high: T,
    /// Points beyond the whiskers, ascending.
    pub outliers: Vec<T>,
}

impl<T: Scalar> TukeySummary<T> {
    pub fn iqr(&self) -> T {
        self.q3 - self.q1
    }
}

/// Returns `None` for an empty sample.
pub fn tukey_summary<T: Scalar>(values: &[T]) -> Option<TukeySummary<T>> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let q1 = quantile_sorted(&sorted, 1, 4);
    let median = quantile_sorted(&sorted, 1, 2);
    let q3 = quantile_sorted(&sorted, 3, 4);
    let reach = (q3 - q1) * T::ratio(3, 2);
    let (low_fence, high_fence) = (q1 - reach, q3 + reach);
    // q1 and q3 lie inside the fences and between data points, so both
    // searches find a value
    let whisker_low = *sorted.iter().find(|v| **v >= low_fence).expect("point within fence");
    let whisker_high = *sorted.iter().rev().find(|v| **v <= high_fence).expect("point within fence");
    let outliers = sorted
        .iter()
        .copied()
        .filter(|v| *v < whisker_low || *v > whisker_high)
        .collect();
    Some(TukeySummary {
        n: sorted.len(),
        median,
        q1,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    })
}
