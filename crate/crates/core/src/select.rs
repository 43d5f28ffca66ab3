//! Per-criterion ranking of the fitted families and rank aggregation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::FamilyId;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Ks,
    Ad,
    Chi2,
    Aicc,
    Bic,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Ks,
        Criterion::Ad,
        Criterion::Chi2,
        Criterion::Aicc,
        Criterion::Bic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Ks => "ks",
            Criterion::Ad => "ad",
            Criterion::Chi2 => "chi2",
            Criterion::Aicc => "aicc",
            Criterion::Bic => "bic",
        }
    }

    /// Parse a comma-separated list such as `ks,ad,chi2`.
    pub fn parse_list(s: &str) -> Result<Vec<Criterion>> {
        let mut out: Vec<Criterion> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let c: Criterion = part.parse()?;
            if !out.contains(&c) {
                out.push(c);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidConfig("no criteria selected".into()));
        }
        out.sort();
        Ok(out)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown criterion `{s}`")))
    }
}

/// Everything the ranking needs from one family's fit on one station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyScores {
    pub family: FamilyId,
    pub k_params: usize,
    pub ks_p: f64,
    pub ad_p: f64,
    pub chi2_p: f64,
    pub chi2: f64,
    pub chi2_dof: usize,
    pub aicc: f64,
    pub bic: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectConfig {
    /// Criteria summed into the cumulative rank.
    pub criteria: Vec<Criterion>,
    /// Rank chi-square by statistic per degree of freedom instead of p-value.
    pub chi2_by_statistic: bool,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig {
            criteria: Criterion::ALL.to_vec(),
            chi2_by_statistic: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTable {
    pub station: String,
    pub per_criterion_best: BTreeMap<Criterion, FamilyId>,
    pub ranks: BTreeMap<Criterion, BTreeMap<FamilyId, usize>>,
    /// Criteria included in `cumulative`.
    pub aggregated: Vec<Criterion>,
    pub cumulative: BTreeMap<FamilyId, usize>,
    pub winner: FamilyId,
}

/// Score under `criterion` oriented so that smaller is better.
fn badness(s: &FamilyScores, criterion: Criterion, chi2_by_statistic: bool) -> f64 {
    let v = match criterion {
        Criterion::Ks => -s.ks_p,
        Criterion::Ad => -s.ad_p,
        Criterion::Chi2 if chi2_by_statistic => s.chi2 / s.chi2_dof.max(1) as f64,
        Criterion::Chi2 => -s.chi2_p,
        Criterion::Aicc => s.aicc,
        Criterion::Bic => s.bic,
    };
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn tie_order(a: (FamilyId, usize), b: (FamilyId, usize)) -> std::cmp::Ordering {
    a.1.cmp(&b.1).then_with(|| a.0.name().cmp(b.0.name()))
}

/// Ranks 1..=n under one criterion; rank 1 is best.
pub fn rank_by_criterion(
    scores: &[FamilyScores],
    criterion: Criterion,
    chi2_by_statistic: bool,
) -> BTreeMap<FamilyId, usize> {
    let mut order: Vec<&FamilyScores> = scores.iter().collect();
    order.sort_by(|a, b| {
        badness(a, criterion, chi2_by_statistic)
            .total_cmp(&badness(b, criterion, chi2_by_statistic))
            .then_with(|| tie_order((a.family, a.k_params), (b.family, b.k_params)))
    });
    order
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s.family, i + 1))
        .collect()
}

/// Row sums of the rank matrix over `criteria` and the family with the
/// smallest sum.
pub fn aggregate(
    ranks: &BTreeMap<Criterion, BTreeMap<FamilyId, usize>>,
    criteria: &[Criterion],
    k_params: &BTreeMap<FamilyId, usize>,
) -> Result<(BTreeMap<FamilyId, usize>, FamilyId)> {
    let mut cumulative: BTreeMap<FamilyId, usize> = BTreeMap::new();
    for c in criteria {
        let column = ranks
            .get(c)
            .ok_or_else(|| Error::InvalidConfig(format!("no ranks for criterion {c}")))?;
        for (&family, &r) in column {
            *cumulative.entry(family).or_default() += r;
        }
    }
    let winner = cumulative
        .iter()
        .min_by(|a, b| {
            a.1.cmp(b.1).then_with(|| {
                let ka = k_params.get(a.0).copied().unwrap_or(usize::MAX);
                let kb = k_params.get(b.0).copied().unwrap_or(usize::MAX);
                tie_order((*a.0, ka), (*b.0, kb))
            })
        })
        .map(|(&f, _)| f)
        .ok_or_else(|| Error::InvalidConfig("no families to select from".into()))?;
    Ok((cumulative, winner))
}

/// The rank-1 family under each criterion.
pub fn per_criterion_winners(
    ranks: &BTreeMap<Criterion, BTreeMap<FamilyId, usize>>,
) -> BTreeMap<Criterion, FamilyId> {
    ranks
        .iter()
        .filter_map(|(&c, column)| {
            column
                .iter()
                .find(|(_, &r)| r == 1)
                .map(|(&f, _)| (c, f))
        })
        .collect()
}

pub fn select(station: &str, scores: &[FamilyScores], config: &SelectConfig) -> Result<SelectionTable> {
    if scores.is_empty() {
        return Err(Error::InvalidConfig("no families to select from".into()));
    }
    let ranks: BTreeMap<Criterion, BTreeMap<FamilyId, usize>> = Criterion::ALL
        .into_iter()
        .map(|c| (c, rank_by_criterion(scores, c, config.chi2_by_statistic)))
        .collect();
    let k_params = scores.iter().map(|s| (s.family, s.k_params)).collect();
    let (cumulative, winner) = aggregate(&ranks, &config.criteria, &k_params)?;
    Ok(SelectionTable {
        station: station.to_string(),
        per_criterion_best: per_criterion_winners(&ranks),
        ranks,
        aggregated: config.criteria.clone(),
        cumulative,
        winner,
    })
}
