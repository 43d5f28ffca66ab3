//! Goodness-of-fit statistics: Kolmogorov-Smirnov, Anderson-Darling and
//! binned chi-square, with asymptotic or parametric-bootstrap p-values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, FamilyId};
use crate::error::{Error, Result};
use crate::fit::{fit_mle, FitConfig, FittedModel};
use crate::special::chi2_sf;

/// CDF values are clamped to `[AD_CLAMP, 1 - AD_CLAMP]` before taking logs.
pub const AD_CLAMP: f64 = 1e-15;

/// Minimum expected count per chi-square bin after merging.
pub const MIN_EXPECTED: f64 = 5.0;

const KS_SERIES_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PValueMode {
    #[default]
    Asymptotic,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binning {
    /// Edges at the model quantiles j / n_bins.
    #[default]
    EqualProbability,
    /// Equal-width bins over the sample range; the outer bins extend to the
    /// ends of the support.
    EqualWidth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofConfig {
    pub bins: usize,
    pub binning: Binning,
    pub pvalue_mode: PValueMode,
    /// Bootstrap replicates B.
    pub bootstrap: usize,
    /// Apply Stephens' sample-size multipliers to A^2 where one exists.
    pub stephens: bool,
    pub seed: u64,
}

impl Default for GofConfig {
    fn default() -> Self {
        GofConfig {
            bins: 100,
            binning: Binning::EqualProbability,
            pvalue_mode: PValueMode::Asymptotic,
            bootstrap: 200,
            stephens: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub ks_d: f64,
    pub ks_p: f64,
    pub ad_a2: f64,
    pub ad_p: f64,
    pub chi2: f64,
    pub chi2_dof: usize,
    pub chi2_p: f64,
    pub n_bins_used: usize,
    pub p_mode: PValueMode,
}

/// Empirical CDF as a right-continuous step function.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    pub values: Vec<f64>,
    /// `heights[i] = (i + 1) / n`, the ECDF value at and after `values[i]`.
    pub heights: Vec<f64>,
}

impl Ecdf {
    pub fn eval(&self, x: f64) -> f64 {
        let count = self.values.partition_point(|&v| v <= x);
        count as f64 / self.values.len() as f64
    }
}

pub fn ecdf(data: &[f64]) -> Result<Ecdf> {
    if data.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut values = data.to_vec();
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let heights = (1..=values.len()).map(|i| i as f64 / n).collect();
    Ok(Ecdf { values, heights })
}

fn sorted_cdf(data: &[f64], dist: &Distribution) -> Vec<f64> {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().map(|&x| dist.cdf(x)).collect()
}

pub fn ks_statistic(data: &[f64], model: &FittedModel) -> f64 {
    ks_from_cdf(&sorted_cdf(data, &model.distribution()))
}

/// D over CDF values of the sorted sample.
pub fn ks_from_cdf(f: &[f64]) -> f64 {
    let n = f.len() as f64;
    f.iter()
        .enumerate()
        .map(|(i, &fi)| {
            let i = i as f64;
            (fi - i / n).max((i + 1.0) / n - fi)
        })
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0)
}

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(j-1) exp(-2 j^2 lambda^2).
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Jacobi-theta form of the same function; converges fast for small lambda.
        let l2 = lambda * lambda;
        let factor = (2.0 * std::f64::consts::PI).sqrt() / lambda;
        let mut cdf = 0.0;
        for j in 1..=100 {
            let k = (2 * j - 1) as f64;
            let term = (-k * k * std::f64::consts::PI.powi(2) / (8.0 * l2)).exp();
            cdf += term;
            if term < KS_SERIES_EPS * cdf.max(f64::MIN_POSITIVE) {
                break;
            }
        }
        return (1.0 - factor * cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let j = j as f64;
        let term = (-2.0 * j * j * lambda * lambda).exp();
        sum += sign * term;
        if term < KS_SERIES_EPS {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sqrt_n = (n as f64).sqrt();
    let p = kolmogorov_q((sqrt_n + 0.12 + 0.11 / sqrt_n) * d);
    if p < KS_SERIES_EPS {
        0.0
    } else {
        p
    }
}

pub fn ad_statistic(data: &[f64], model: &FittedModel) -> f64 {
    ad_from_cdf(&sorted_cdf(data, &model.distribution()))
}

/// A^2 over CDF values of the sorted sample.
pub fn ad_from_cdf(f: &[f64]) -> f64 {
    let n = f.len();
    let nf = n as f64;
    let clamped: Vec<f64> = f
        .iter()
        .map(|&v| v.clamp(AD_CLAMP, 1.0 - AD_CLAMP))
        .collect();
    let sum: f64 = (0..n)
        .map(|i| {
            let weight = (2 * i + 1) as f64 / nf;
            weight * (clamped[i].ln() + (1.0 - clamped[n - 1 - i]).ln())
        })
        .sum();
    -nf - sum
}

/// Beyond this the series approximation decays too fast; the tail is
/// continued with its exact asymptotic rate z^(-1/2) e^(-z), which follows
/// from the largest eigenvalue (1/2) of the A^2 quadratic form.
const AD_TAIL_SWITCH: f64 = 6.0;

/// Asymptotic distribution of A^2 for a fully specified model, as
/// (cdf, upper tail) so the tail keeps precision when the cdf is near 1.
fn ad_inf(z: f64) -> (f64, f64) {
    if z <= 0.0 {
        return (0.0, 1.0);
    }
    if z > AD_TAIL_SWITCH {
        let (_, at_switch) = ad_inf(AD_TAIL_SWITCH);
        let tail = at_switch * (AD_TAIL_SWITCH / z).sqrt() * (AD_TAIL_SWITCH - z).exp();
        return (1.0 - tail, tail);
    }
    if z < 2.0 {
        let cdf = (-1.233_714_1 / z).exp() / z.sqrt()
            * (2.000_12
                + (0.247_105
                    - (0.064_982_1 - (0.034_796_2 - (0.011_672 - 0.001_686_91 * z) * z) * z)
                        * z)
                    * z);
        (cdf, 1.0 - cdf)
    } else {
        let inner = -(1.077_6
            - (2.306_95 - (0.434_24 - (0.082_433 - (0.008_056 - 0.000_314_6 * z) * z) * z) * z)
                * z)
            .exp();
        (inner.exp(), -inner.exp_m1())
    }
}

fn ad_errfix_upper(x: f64) -> f64 {
    -130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x
}

/// Finite-sample correction to the asymptotic A^2 CDF value `x`.
fn ad_errfix(n: f64, x: f64) -> f64 {
    if x > 0.8 {
        // The published polynomial misses zero at x = 1 by rounding in its
        // coefficients; remove that offset so tiny tails are not floored.
        return (ad_errfix_upper(x) - ad_errfix_upper(1.0)) / n;
    }
    let c = 0.01265 + 0.1757 / n;
    if x < c {
        let t = x / c;
        let t = t.sqrt() * (1.0 - t) * (49.0 * t - 102.0);
        return t * (0.0037 / (n * n) + 0.00078 / n + 0.00006) / n;
    }
    let t = (x - c) / (0.8 - c);
    let t = -0.000_226_33
        + (6.540_34 - (14.6538 - (14.458 - (8.259 - 1.918_64 * t) * t) * t) * t) * t;
    t * (0.04213 / n + 0.01365 / (n * n)) / n
}

/// Upper-tail probability of A^2 for a fully specified distribution.
pub fn ad_pvalue_asymptotic(a2: f64, n: usize) -> f64 {
    if !(a2 > 0.0) {
        return 1.0;
    }
    let (x, tail) = ad_inf(a2);
    (tail - ad_errfix(n.max(1) as f64, x)).clamp(0.0, 1.0)
}

/// Stephens' sample-size multiplier for A^2, where one is tabulated.
pub fn stephens_factor(family: FamilyId, n: usize) -> f64 {
    let n = n as f64;
    match family {
        FamilyId::Normal | FamilyId::Lognormal => 1.0 + 0.75 / n + 2.25 / (n * n),
        FamilyId::Gamma | FamilyId::Weibull => 1.0 + 0.6 / n,
        _ => 1.0,
    }
}

/// Share of null replicates at least as large as `observed`.
pub fn bootstrap_pvalue(observed: f64, null: &[f64]) -> f64 {
    if null.is_empty() {
        return f64::NAN;
    }
    null.iter().filter(|&&s| s >= observed).count() as f64 / null.len() as f64
}

/// Derive an independent seed for stream `stream` from `base` (SplitMix64).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// (D, A^2) for `replicates` samples drawn from `model` and refitted.
pub fn bootstrap_null(
    model: &FittedModel,
    fit_config: &FitConfig,
    replicates: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    if replicates == 0 {
        return Err(Error::InvalidConfig("bootstrap needs at least one replicate".into()));
    }
    let dist = model.distribution();
    (0..replicates as u64)
        .into_par_iter()
        .map(|b| {
            let sample = dist.sample(model.n, derive_seed(seed, b))?;
            let refit = fit_mle(model.family, &sample, fit_config)?;
            let f = sorted_cdf(&sample, &refit.distribution());
            Ok((ks_from_cdf(&f), ad_from_cdf(&f)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquare {
    pub chi2: f64,
    pub dof: usize,
    pub p: f64,
    /// Observed and expected counts per bin after merging.
    pub observed: Vec<f64>,
    pub expected: Vec<f64>,
}

pub fn chi_square(data: &[f64], model: &FittedModel, n_bins: usize, binning: Binning) -> Result<ChiSquare> {
    if n_bins < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 bins, got {n_bins}")));
    }
    if data.is_empty() {
        return Err(Error::EmptySample);
    }
    let dist = model.distribution();
    let n = data.len() as f64;
    let mut observed = vec![0.0; n_bins];
    let expected: Vec<f64> = match binning {
        Binning::EqualProbability => {
            for &x in data {
                let u = dist.cdf(x);
                let idx = ((u * n_bins as f64).floor() as usize).min(n_bins - 1);
                observed[idx] += 1.0;
            }
            vec![n / n_bins as f64; n_bins]
        }
        Binning::EqualWidth => {
            let min = data.iter().copied().fold(f64::INFINITY, f64::min);
            let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let width = (max - min) / n_bins as f64;
            if !(width > 0.0) {
                return Err(Error::DegenerateSample);
            }
            for &x in data {
                let idx = (((x - min) / width).floor() as usize).min(n_bins - 1);
                observed[idx] += 1.0;
            }
            let mut cdf_edges: Vec<f64> = (0..=n_bins)
                .map(|j| dist.cdf(min + j as f64 * width))
                .collect();
            cdf_edges[0] = 0.0;
            cdf_edges[n_bins] = 1.0;
            cdf_edges.windows(2).map(|w| n * (w[1] - w[0])).collect()
        }
    };
    let (observed, expected) = merge_bins(&observed, &expected);
    let chi2: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dof = expected.len() as i64 - (model.k_params as i64 + 1);
    if dof < 1 {
        return Err(Error::TooFewBins {
            bins: expected.len(),
            dof,
        });
    }
    Ok(ChiSquare {
        chi2,
        dof: dof as usize,
        p: chi2_sf(chi2, dof as f64).clamp(0.0, 1.0),
        observed,
        expected,
    })
}

/// Merge adjacent bins left to right until every expected count reaches
/// [`MIN_EXPECTED`]; a short remainder joins the last closed bin.
fn merge_bins(observed: &[f64], expected: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut out_o: Vec<f64> = Vec::new();
    let mut out_e: Vec<f64> = Vec::new();
    let (mut acc_o, mut acc_e) = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= MIN_EXPECTED {
            out_o.push(acc_o);
            out_e.push(acc_e);
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 || acc_o > 0.0 {
        match (out_o.last_mut(), out_e.last_mut()) {
            (Some(lo), Some(le)) => {
                *lo += acc_o;
                *le += acc_e;
            }
            _ => {
                out_o.push(acc_o);
                out_e.push(acc_e);
            }
        }
    }
    (out_o, out_e)
}

/// All three statistics and their p-values for one fitted model.
pub fn evaluate(
    data: &[f64],
    model: &FittedModel,
    config: &GofConfig,
    fit_config: &FitConfig,
) -> Result<GofResult> {
    let f = sorted_cdf(data, &model.distribution());
    let ks_d = ks_from_cdf(&f);
    let ad_a2 = ad_from_cdf(&f);
    let n = data.len();
    let ad_for_p = if config.stephens {
        ad_a2 * stephens_factor(model.family, n)
    } else {
        ad_a2
    };
    let (ks_p, ad_p) = match config.pvalue_mode {
        PValueMode::Asymptotic => (ks_pvalue(ks_d, n), ad_pvalue_asymptotic(ad_for_p, n)),
        PValueMode::Bootstrap => {
            let null = bootstrap_null(model, fit_config, config.bootstrap, config.seed)?;
            let ks_null: Vec<f64> = null.iter().map(|r| r.0).collect();
            let ad_null: Vec<f64> = null.iter().map(|r| r.1).collect();
            (bootstrap_pvalue(ks_d, &ks_null), bootstrap_pvalue(ad_a2, &ad_null))
        }
    };
    let chi = chi_square(data, model, config.bins, config.binning)?;
    Ok(GofResult {
        ks_d,
        ks_p,
        ad_a2,
        ad_p,
        chi2: chi.chi2,
        chi2_dof: chi.dof,
        chi2_p: chi.p,
        n_bins_used: chi.expected.len(),
        p_mode: config.pvalue_mode,
    })
}
