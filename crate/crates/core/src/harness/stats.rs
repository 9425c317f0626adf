use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Five-number summary plus outliers.
///
/// Hinges are Tukey's: the medians of the lower and upper halves of the sorted sample,
/// with the median itself included in both halves when the count is odd. Points more
/// than 1.5 IQR beyond a hinge are outliers; `min` and `max` are the whisker ends, the
/// most extreme points that are not outliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub n: usize,
    pub min: f64,
    pub hinge_lo: f64,
    pub median: f64,
    pub hinge_hi: f64,
    pub max: f64,
    pub outliers: Vec<f64>,
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn aggregate_trials(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::invalid("box statistics need at least one value"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("box statistics need finite values"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let half = n.div_ceil(2);
    let hinge_lo = median_sorted(&v[..half]);
    let hinge_hi = median_sorted(&v[n - half..]);
    let fence = 1.5 * (hinge_hi - hinge_lo);
    let (lo_fence, hi_fence) = (hinge_lo - fence, hinge_hi + fence);
    let inside: Vec<f64> = v
        .iter()
        .copied()
        .filter(|x| (lo_fence..=hi_fence).contains(x))
        .collect();
    let outliers = v
        .iter()
        .copied()
        .filter(|x| !(lo_fence..=hi_fence).contains(x))
        .collect();
    Ok(BoxStats {
        n,
        min: inside.first().copied().unwrap_or(hinge_lo),
        hinge_lo,
        median: median_sorted(&v),
        hinge_hi,
        max: inside.last().copied().unwrap_or(hinge_hi),
        outliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eleven_values() {
        let v: Vec<f64> = (1..=11).map(f64::from).collect();
        let s = aggregate_trials(&v).unwrap();
        assert_eq!(s.median, 6.0);
        // lower half 1..=6, upper half 6..=11
        assert_eq!((s.hinge_lo, s.hinge_hi), (3.5, 8.5));
        assert_eq!((s.min, s.max), (1.0, 11.0));
        assert!(s.outliers.is_empty());
    }

    #[test]
    fn single_value() {
        let s = aggregate_trials(&[4.0]).unwrap();
        assert_eq!([s.min, s.hinge_lo, s.median, s.hinge_hi, s.max], [4.0; 5]);
        assert!(s.outliers.is_empty());
    }

    #[test]
    fn far_point_is_outlier() {
        let s = aggregate_trials(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!((s.hinge_lo, s.hinge_hi), (2.0, 4.0));
        assert_eq!(s.outliers, vec![100.0]);
        assert_eq!(s.max, 4.0);
    }

    #[test]
    fn rejects_empty() {
        assert!(aggregate_trials(&[]).is_err());
        assert!(aggregate_trials(&[f64::NAN]).is_err());
    }
}
