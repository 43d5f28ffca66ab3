//! Information criteria: AIC, AICc and BIC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FittedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AiccMode {
    /// `-2 ln L + 2K + 2K(K+1)/(N-K-1)`
    #[default]
    Standard,
    /// `-2 ln L + 2K(K+1)/(N-K-1)`, without the `2K` term.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionScores {
    pub aic: f64,
    pub aicc: f64,
    pub bic: f64,
    /// Difference from the smallest AICc among the compared models.
    pub delta_aicc: f64,
    pub delta_bic: f64,
}

pub fn aic(log_l: f64, k: usize) -> f64 {
    -2.0 * log_l + 2.0 * k as f64
}

pub fn aicc(log_l: f64, k: usize, n: usize, mode: AiccMode) -> Result<f64> {
    if n <= k + 1 {
        return Err(Error::SampleTooSmall { n, required: k + 2 });
    }
    let kf = k as f64;
    let correction = 2.0 * kf * (kf + 1.0) / (n as f64 - kf - 1.0);
    Ok(match mode {
        AiccMode::Standard => aic(log_l, k) + correction,
        AiccMode::Literal => -2.0 * log_l + correction,
    })
}

pub fn bic(log_l: f64, k: usize, n: usize) -> f64 {
    -2.0 * log_l + k as f64 * (n as f64).ln()
}

/// Scores for a set of competing models on the same sample, with deltas
/// relative to the set's minimum.
pub fn score_models(models: &[FittedModel], mode: AiccMode) -> Result<Vec<CriterionScores>> {
    let raw: Vec<(f64, f64, f64)> = models
        .iter()
        .map(|m| {
            Ok((
                aic(m.log_likelihood, m.k_params),
                aicc(m.log_likelihood, m.k_params, m.n, mode)?,
                bic(m.log_likelihood, m.k_params, m.n),
            ))
        })
        .collect::<Result<_>>()?;
    let min_aicc = raw.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let min_bic = raw.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    Ok(raw
        .into_iter()
        .map(|(aic, aicc, bic)| CriterionScores {
            aic,
            aicc,
            bic,
            delta_aicc: aicc - min_aicc,
            delta_bic: bic - min_bic,
        })
        .collect())
}
