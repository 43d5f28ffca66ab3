//! Published station tables and comparisons against a pipeline run.

use std::collections::BTreeMap;

use distsel::criteria::{score_models, AiccMode};
use distsel::ingest::SummaryStats;
use distsel::lmoments::LMomentSet;
use distsel::report::StationReport;
use distsel::select::{select, Criterion, FamilyScores, SelectConfig};
use distsel::FamilyId;

/// min, max, mean, sd, cv, skewness, excess kurtosis
pub const SUMMARY: [(&str, [f64; 7]); 20] = [
    ("Kohima", [0.0, 802.43, 196.33, 177.67, 0.91, 0.77, -0.24]),
    ("Jaipur", [0.0, 517.61, 48.6, 83.53, 1.72, 2.28, 5.26]),
    ("Kolkata", [0.0, 892.15, 132.15, 148.63, 1.13, 1.31, 1.474]),
    ("Raipur", [0.0, 635.98, 105.38, 140.33, 1.33, 1.33, 0.72]),
    ("Gandhinagar", [0.0, 694.2, 56.42, 105.18, 1.86, 2.33, 5.36]),
    ("Hyderabad", [0.0, 544.26, 70.06, 89.41, 1.28, 1.53, 2.19]),
    ("Aizawl", [0.0, 1065.92, 227.2, 221.48, 0.98, 0.8, -0.311]),
    ("Bhopal", [0.0, 725.72, 89.53, 140.91, 1.57, 1.73, 2.18]),
    ("Ahmednagar", [0.0, 611.13, 70.73, 96.63, 1.37, 1.58, 2.33]),
    ("Cuttack", [0.0, 506.19, 106.32, 115.32, 1.09, 0.91, -0.34]),
    ("Chennai", [0.0, 768.91, 96.89, 118.27, 1.22, 1.99, 4.82]),
    ("Bangalore", [0.0, 360.95, 69.89, 68.66, 0.98, 1.08, 0.78]),
    ("Patna", [0.0, 534.69, 90.96, 121.9, 1.34, 1.39, 0.9]),
    ("Amritsar", [0.0, 416.06, 39.16, 59.15, 1.51, 2.61, 8.02]),
    ("Guntur", [0.0, 438.45, 65.66, 74.58, 1.14, 1.44, 2.24]),
    ("Lucknow", [0.0, 619.08, 74.85, 113.6, 1.52, 1.76, 2.43]),
    ("Kurnool", [0.0, 374.53, 45.19, 53.93, 1.19, 1.85, 4.69]),
    ("Jammu", [0.0, 704.43, 60.88, 83.41, 1.37, 2.59, 8.35]),
    ("Delhi", [0.0, 511.54, 47.45, 80.67, 1.7, 2.47, 6.58]),
    ("Panipat", [0.0, 463.83, 43.58, 69.103, 1.59, 2.33, 5.87]),
];

use FamilyId::*;

/// Per-criterion winners: ks, ad, chi2, aicc, bic.
pub const PER_CRITERION: [(&str, [FamilyId; 5]); 20] = [
    ("Patna", [Fisher, Fisher, Gev, Fisher, Beta]),
    ("Kurnool", [Fisher, Fisher, Weibull, Fisher, Beta]),
    ("Jaipur", [Fisher, Fisher, InverseGaussian, Fisher, Beta]),
    ("Chennai", [Fisher, Fisher, Gamma, Fisher, Beta]),
    ("Hyderabad", [Fisher, Fisher, InverseGaussian, Fisher, Beta]),
    ("Lucknow", [Fisher, Fisher, InverseGaussian, Fisher, Beta]),
    ("Bangalore", [Fisher, Fisher, Weibull, Fisher, Beta]),
    ("Kohima", [Weibull, Beta, Beta, Weibull, Beta]),
    ("Aizawl", [Weibull, Beta, Gamma, Weibull, Beta]),
    ("Guntur", [Fisher, Fisher, Fisher, Fisher, Beta]),
    ("Panipat", [Fisher, Fisher, Gev, Fisher, Beta]),
    ("Amritsar", [Fisher, Fisher, InverseGaussian, Fisher, Beta]),
    ("Cuttack", [Fisher, Fisher, Gev, Fisher, Beta]),
    ("Gandhinagar", [Fisher, Fisher, Beta, Gev, StudentT]),
    ("Ahmednagar", [Fisher, Fisher, InverseGaussian, StudentT, Beta]),
    ("Raipur", [Fisher, Fisher, Gev, Fisher, Beta]),
    ("Jammu", [Fisher, Fisher, Weibull, Fisher, Beta]),
    ("Kolkata", [Fisher, Fisher, Fisher, Fisher, Beta]),
    ("Bhopal", [Fisher, Fisher, InverseGaussian, Fisher, Beta]),
    ("Delhi", [Fisher, Fisher, InverseGaussian, Fisher, Beta]),
];

pub const BEST_FIT: [(&str, FamilyId); 20] = [
    ("Kohima", Gev),
    ("Jaipur", InverseGaussian),
    ("Kolkata", Gev),
    ("Raipur", Gev),
    ("Gandhinagar", Gev),
    ("Hyderabad", InverseGaussian),
    ("Aizawl", Gamma),
    ("Bhopal", InverseGaussian),
    ("Ahmednagar", InverseGaussian),
    ("Cuttack", Gev),
    ("Chennai", InverseGaussian),
    ("Bangalore", Gev),
    ("Patna", Gev),
    ("Amritsar", InverseGaussian),
    ("Guntur", Gumbel),
    ("Lucknow", InverseGaussian),
    ("Kurnool", Gumbel),
    ("Jammu", InverseGaussian),
    ("Delhi", InverseGaussian),
    ("Panipat", Gev),
];

/// l1, l2, tau3, tau4
pub const LMOMENTS: [(&str, [f64; 4]); 20] = [
    ("Kohima", [196.33, 98.56, 0.21, 0.02]),
    ("Jaipur", [48.6, 36.27, 0.57, 0.27]),
    ("Kolkata", [132.15, 77.77, 0.33, 0.07]),
    ("Raipur", [105.38, 70.01, 0.43, 0.09]),
    ("Gandhinagar", [56.42, 44.44, 0.61, 0.29]),
    ("Hyderabad", [70.06, 45.1, 0.4, 0.1]),
    ("Aizawl", [227.2, 121.87, 0.24, 0.01]),
    ("Bhopal", [89.53, 65.42, 0.53, 0.18]),
    ("Ahmednagar", [70.73, 47.78, 0.43, 0.11]),
    ("Cuttack", [106.32, 62.07, 0.3, 0.01]),
    ("Chennai", [96.89, 58.01, 0.39, 0.17]),
    ("Bangalore", [69.89, 37.14, 0.26, 0.07]),
    ("Patna", [90.96, 60.58, 0.44, 0.11]),
    ("Amritsar", [39.16, 26.01, 0.51, 0.27]),
    ("Guntur", [65.66, 38.73, 0.33, 0.08]),
    ("Lucknow", [74.85, 53.11, 0.51, 0.18]),
    ("Kurnool", [45.19, 27.06, 0.36, 0.13]),
    ("Jammu", [60.88, 37.41, 0.48, 0.26]),
    ("Delhi", [47.45, 34.68, 0.57, 0.28]),
    ("Panipat", [43.58, 30.62, 0.54, 0.25]),
];

/// Canonical key for matching station labels across spellings.
pub fn station_key(name: &str) -> String {
    let key: String = name
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect();
    match key.as_str() {
        "banglore" | "bengaluru" => "bangalore".into(),
        "ahmedanagar" => "ahmednagar".into(),
        _ => key,
    }
}

pub fn find<'a, T>(table: &'a [(&str, T)], station: &str) -> Option<&'a T> {
    let key = station_key(station);
    table.iter().find(|(s, _)| station_key(s) == key).map(|(_, v)| v)
}

/// Failures of one station's summary against the printed row.
pub fn summary_mismatches(station: &str, s: &SummaryStats) -> Vec<String> {
    let Some(want) = find(&SUMMARY, station) else {
        return vec![format!("{station}: not in the published table")];
    };
    let mut out = Vec::new();
    let mut check = |label: &str, got: f64, ok: bool, expect: f64| {
        if !ok {
            out.push(format!("{station} {label}: got {got:.4}, printed {expect}"));
        }
    };
    check("min", s.min, s.min == want[0], want[0]);
    check("max", s.max, (s.max - want[1]).abs() <= 0.01, want[1]);
    check("mean", s.mean, (s.mean - want[2]).abs() <= 0.005 * want[2].abs(), want[2]);
    check("sd", s.sd, (s.sd - want[3]).abs() <= 0.005 * want[3].abs(), want[3]);
    check("cv", s.cv, (s.cv - want[4]).abs() <= 0.02, want[4]);
    let skew = s.skewness.unwrap_or(f64::NAN);
    check("skewness", skew, (skew - want[5]).abs() <= 0.05, want[5]);
    let kurt = s.kurtosis.unwrap_or(f64::NAN);
    check("kurtosis", kurt, (kurt - want[6]).abs() <= 0.1, want[6]);
    out
}

pub fn lmoment_mismatches(station: &str, mean: f64, l: &LMomentSet) -> Vec<String> {
    let Some(want) = find(&LMOMENTS, station) else {
        return vec![format!("{station}: not in the published table")];
    };
    let mut out = Vec::new();
    if (l.l1 - mean).abs() > 0.01 {
        out.push(format!("{station} l1 {} differs from mean {mean}", l.l1));
    }
    if (l.l1 - want[0]).abs() > 0.005 * want[0] {
        out.push(format!("{station} l1 {:.4} vs printed {}", l.l1, want[0]));
    }
    if (l.l2 - want[1]).abs() > 0.005 * want[1] {
        out.push(format!("{station} l2 {:.4} vs printed {}", l.l2, want[1]));
    }
    if (l.tau3 - want[2]).abs() > 0.02 {
        out.push(format!("{station} tau3 {:.4} vs printed {}", l.tau3, want[2]));
    }
    if (l.tau4 - want[3]).abs() > 0.02 {
        out.push(format!("{station} tau4 {:.4} vs printed {}", l.tau4, want[3]));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agreement {
    pub label: String,
    /// Matching cells of the per-criterion table, out of `per_criterion_cells`.
    pub per_criterion: usize,
    pub per_criterion_cells: usize,
    pub best_fit: usize,
    pub best_fit_cells: usize,
}

/// Re-rank stored fits under each {AICc form} x {4, 5 criteria} setting and
/// count cells agreeing with the published tables.
pub fn agreement(reports: &[StationReport]) -> Vec<Agreement> {
    let four = vec![Criterion::Ks, Criterion::Ad, Criterion::Chi2, Criterion::Aicc];
    let five = Criterion::ALL.to_vec();
    let mut out = Vec::new();
    for (mode, mode_label) in [(AiccMode::Standard, "standard"), (AiccMode::Literal, "literal")] {
        for (criteria, n_label) in [(&four, 4), (&five, 5)] {
            let cfg = SelectConfig {
                criteria: criteria.clone(),
                chi2_by_statistic: false,
            };
            let mut a = Agreement {
                label: format!("aicc={mode_label}, {n_label} criteria"),
                per_criterion: 0,
                per_criterion_cells: 0,
                best_fit: 0,
                best_fit_cells: 0,
            };
            for r in reports {
                let models: Vec<_> = r.models.iter().map(|m| m.model.clone()).collect();
                let Ok(scores) = score_models(&models, mode) else { continue };
                let fs: Vec<FamilyScores> = r
                    .models
                    .iter()
                    .zip(&scores)
                    .map(|(m, s)| FamilyScores {
                        family: m.model.family,
                        k_params: m.model.k_params,
                        ks_p: m.gof.ks_p,
                        ad_p: m.gof.ad_p,
                        chi2_p: m.gof.chi2_p,
                        chi2: m.gof.chi2,
                        chi2_dof: m.gof.chi2_dof,
                        aicc: s.aicc,
                        bic: s.bic,
                    })
                    .collect();
                let Ok(table) = select(&r.station, &fs, &cfg) else { continue };
                if let Some(row) = find(&PER_CRITERION, &r.station) {
                    for (c, want) in Criterion::ALL.iter().zip(row) {
                        a.per_criterion_cells += 1;
                        if table.per_criterion_best.get(c) == Some(want) {
                            a.per_criterion += 1;
                        }
                    }
                }
                if let Some(want) = find(&BEST_FIT, &r.station) {
                    a.best_fit_cells += 1;
                    if table.winner == *want {
                        a.best_fit += 1;
                    }
                }
            }
            out.push(a);
        }
    }
    out
}

/// Stations of the published tables missing from a run.
pub fn missing_stations(found: &[String]) -> Vec<&'static str> {
    let keys: BTreeMap<String, ()> = found.iter().map(|s| (station_key(s), ())).collect();
    SUMMARY
        .iter()
        .map(|(s, _)| *s)
        .filter(|s| !keys.contains_key(&station_key(s)))
        .collect()
}
