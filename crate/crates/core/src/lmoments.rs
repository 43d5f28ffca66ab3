//! Sample L-moments from unbiased probability-weighted moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LMomentSet {
    /// L-location (the sample mean).
    pub l1: f64,
    /// L-scale.
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    /// L-skewness, l3 / l2.
    pub tau3: f64,
    /// L-kurtosis, l4 / l2.
    pub tau4: f64,
}

/// Unbiased PWMs b_0..b_3 of the sorted sample.
pub fn probability_weighted_moments(sorted: &[f64]) -> [f64; 4] {
    let n = sorted.len() as f64;
    let mut b = [0.0; 4];
    for (idx, &x) in sorted.iter().enumerate() {
        // i is the 1-based rank
        let i = idx as f64 + 1.0;
        let mut w = 1.0;
        b[0] += x;
        #[allow(clippy::needless_range_loop)]
        for r in 1..4 {
            let r_f = r as f64;
            w *= (i - r_f) / (n - r_f);
            if w <= 0.0 {
                break;
            }
            b[r] += w * x;
        }
    }
    b.map(|v| v / n)
}

pub fn sample_lmoments(data: &[f64]) -> Result<LMomentSet> {
    if data.len() < 4 {
        return Err(Error::SampleTooSmall {
            n: data.len(),
            required: 4,
        });
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let [b0, b1, b2, b3] = probability_weighted_moments(&sorted);
    let l1 = b0;
    let l2 = 2.0 * b1 - b0;
    let l3 = 6.0 * b2 - 6.0 * b1 + b0;
    let l4 = 20.0 * b3 - 30.0 * b2 + 12.0 * b1 - b0;
    if l2 <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(LMomentSet {
        l1,
        l2,
        l3,
        l4,
        tau3: l3 / l2,
        tau4: l4 / l2,
    })
}
