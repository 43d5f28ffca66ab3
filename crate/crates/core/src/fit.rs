//! Maximum-likelihood fitting.
//!
//! The sample is first standardized to zero mean and unit SD; the simplex
//! search runs on that copy over unconstrained coordinates and the result is
//! mapped back. This makes fits exactly equivariant under rescaling of the
//! data, and keeps initial simplex steps meaningful for any unit.
//!
//! Coordinates per family:
//!
//! * free location: `loc`; positive-support families: `ln(lb - loc)` with
//!   `lb = min - eps`, so every observation keeps a finite density;
//! * `ln(scale)`, and `ln(shape)` for every positive shape;
//! * GEV shape `xi` as is;
//! * beta: `ln(lb - loc)` and `ln(loc + scale - ub)` with `ub = max + eps`.
//!
//! `eps = 1e-6 * (max - min)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{Distribution, FamilyId, ParamVector};
use crate::error::{Error, Result};
use crate::ingest::summarize_values;
use crate::lmoments::sample_lmoments;
use crate::optimize::{nelder_mead, NelderMeadOptions};
use crate::special::ln_gamma;

/// Relative support margin applied below the sample minimum (and above the
/// maximum for beta).
pub const SUPPORT_EPS: f64 = 1e-6;

/// Simplex diameter tolerance in standardized coordinates.
const PARAM_TOL: f64 = 1e-6;

/// Two restarts' log-likelihoods closer than this count as a tie.
const RESTART_TIE: f64 = 1e-9;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Relative spread of the negative log-likelihood across the simplex.
    pub tol: f64,
    /// Fix `loc = 0` for positive-support families instead of fitting it.
    pub raw_support: bool,
    /// Seeds the perturbation of the restart point.
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iter: 2000,
            tol: 1e-8,
            raw_support: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub family: FamilyId,
    pub params: ParamVector,
    pub log_likelihood: f64,
    /// Number of parameters actually optimized.
    pub k_params: usize,
    pub n: usize,
    pub converged: bool,
}

impl FittedModel {
    pub fn distribution(&self) -> Distribution {
        Distribution::new(self.family, self.params.clone())
            .expect("fitted parameters satisfy family invariants")
    }
}

/// Number of free parameters for `family` under `config`.
pub fn free_parameter_count(family: FamilyId, config: &FitConfig) -> usize {
    let frozen = usize::from(config.raw_support && family.is_positive_support());
    family.n_shapes() + 2 - frozen
}

pub fn support_epsilon(min: f64, max: f64) -> f64 {
    SUPPORT_EPS * (max - min)
}

#[derive(Debug, Clone, Copy)]
struct Extent {
    min: f64,
    max: f64,
    eps: f64,
}

impl Extent {
    fn of(data: &[f64]) -> Self {
        let min = data.iter().copied().fold(f64::INFINITY, f64::min);
        let max = data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Extent {
            min,
            max,
            eps: support_epsilon(min, max),
        }
    }

    fn lower_bound(&self) -> f64 {
        self.min - self.eps
    }

    fn upper_bound(&self) -> f64 {
        self.max + self.eps
    }
}

/// Moment-matched starting point. Location is always fitted here; see
/// [`fit_mle`] for the `raw_support` variant.
pub fn initial_params(family: FamilyId, data: &[f64]) -> Result<ParamVector> {
    initial_params_with(family, data, None)
}

fn initial_params_with(
    family: FamilyId,
    data: &[f64],
    fixed_loc: Option<f64>,
) -> Result<ParamVector> {
    let stats = summarize_values(data)?;
    let ext = Extent::of(data);
    let (mean, sd) = (stats.mean, stats.sd);

    let params = match family {
        FamilyId::Normal => ParamVector::new(&[], mean, sd),
        FamilyId::Gumbel => {
            let scale = sd * 6f64.sqrt() / std::f64::consts::PI;
            ParamVector::new(&[], mean - EULER_GAMMA * scale, scale)
        }
        FamilyId::StudentT => {
            let nu = match stats.kurtosis {
                Some(k) if k > 0.0 => (4.0 + 6.0 / k).clamp(2.5, 100.0),
                _ => 30.0,
            };
            ParamVector::new(&[nu], mean, sd * ((nu - 2.0) / nu).sqrt())
        }
        FamilyId::Gev => gev_start(data, mean, sd),
        FamilyId::Beta => {
            let pad = 0.05 * (ext.max - ext.min);
            let loc = ext.lower_bound() - pad;
            let scale = ext.upper_bound() + pad - loc;
            let (m, v) = shifted_moments(data, loc, scale);
            let common = m * (1.0 - m) / v - 1.0;
            let (a, b) = if common > 0.0 {
                (
                    (m * common).clamp(1e-2, 1e3),
                    ((1.0 - m) * common).clamp(1e-2, 1e3),
                )
            } else {
                (1.0, 1.0)
            };
            ParamVector::new(&[a, b], loc, scale)
        }
        _ => {
            let loc = fixed_loc.unwrap_or(ext.lower_bound() - 0.1 * sd);
            let (m, v) = shifted_moments(data, loc, 1.0);
            positive_start(family, m, v, loc)
        }
    };
    params.validate(family)?;
    Ok(params)
}

/// Mean and variance of `(x - loc) / scale`.
fn shifted_moments(data: &[f64], loc: f64, scale: f64) -> (f64, f64) {
    let n = data.len() as f64;
    let m = data.iter().map(|&x| (x - loc) / scale).sum::<f64>() / n;
    let v = data
        .iter()
        .map(|&x| ((x - loc) / scale - m).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    (m, v)
}

fn positive_start(family: FamilyId, m: f64, v: f64, loc: f64) -> ParamVector {
    let cv2 = v / (m * m);
    match family {
        FamilyId::Gamma => {
            let k = (1.0 / cv2).clamp(1e-3, 1e4);
            ParamVector::new(&[k], loc, m / k)
        }
        FamilyId::Lognormal => {
            let s2 = cv2.ln_1p();
            ParamVector::new(&[s2.sqrt().max(1e-3)], loc, m / (1.0 + cv2).sqrt())
        }
        FamilyId::InverseGaussian => {
            // mean = mu * scale, var = mu^3 * scale^2
            let mu = cv2.clamp(1e-4, 1e4);
            ParamVector::new(&[mu], loc, m / mu)
        }
        FamilyId::Weibull => {
            let k = weibull_shape_for_cv(cv2.sqrt());
            ParamVector::new(&[k], loc, m / ln_gamma(1.0 + 1.0 / k).exp())
        }
        FamilyId::Fisher => {
            // Chi-square-like limit for d1; d2 fixed at a moderately heavy tail.
            let d1 = (2.0 / cv2).clamp(0.2, 200.0);
            let d2 = 20.0;
            ParamVector::new(&[d1, d2], loc, m * (d2 - 2.0) / d2)
        }
        _ => unreachable!("not a positive-support family: {family}"),
    }
}

/// Solve CV(k) = cv for the Weibull shape by bisection on ln k.
fn weibull_shape_for_cv(cv: f64) -> f64 {
    let cv_of = |k: f64| {
        let g1 = ln_gamma(1.0 + 1.0 / k);
        let g2 = ln_gamma(1.0 + 2.0 / k);
        ((g2 - 2.0 * g1).exp() - 1.0).max(0.0).sqrt()
    };
    let (mut lo, mut hi) = (0.05f64.ln(), 50f64.ln());
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if cv_of(mid.exp()) > cv {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// GEV start from the L-moment approximation, falling back to the Gumbel
/// moment match when it leaves observations outside the support.
fn gev_start(data: &[f64], mean: f64, sd: f64) -> ParamVector {
    let gumbel_scale = sd * 6f64.sqrt() / std::f64::consts::PI;
    let gumbel = ParamVector::new(&[0.0], mean - EULER_GAMMA * gumbel_scale, gumbel_scale);
    let Ok(lm) = sample_lmoments(data) else {
        return gumbel;
    };
    let c = 2.0 / (3.0 + lm.tau3) - 2f64.ln() / 3f64.ln();
    let k = 7.8590 * c + 2.9554 * c * c;
    if k.abs() < 1e-6 || k <= -1.0 {
        return gumbel;
    }
    let g = ln_gamma(1.0 + k).exp();
    let scale = lm.l2 * k / ((1.0 - 2f64.powf(-k)) * g);
    let loc = lm.l1 - scale * (1.0 - g) / k;
    let candidate = ParamVector::new(&[-k], loc, scale);
    let feasible = scale.is_finite()
        && scale > 0.0
        && Distribution::new(FamilyId::Gev, candidate.clone())
            .map(|d| d.log_likelihood(data).is_finite())
            .unwrap_or(false);
    if feasible {
        candidate
    } else {
        gumbel
    }
}

/// Maps unconstrained simplex coordinates to family parameters.
#[derive(Debug, Clone)]
struct Coordinates {
    family: FamilyId,
    ext: Extent,
    fixed_loc: Option<f64>,
}

impl Coordinates {
    fn bounded_loc(&self) -> bool {
        self.family.is_positive_support() || self.family == FamilyId::Beta
    }

    fn to_params(&self, theta: &[f64]) -> ParamVector {
        let fam = self.family;
        let mut it = theta.iter().copied();
        let mut next = || it.next().expect("coordinate count matches family");
        let loc = match self.fixed_loc {
            Some(l) => l,
            None if self.bounded_loc() => self.ext.lower_bound() - next().exp(),
            None => next(),
        };
        let scale = if fam == FamilyId::Beta {
            self.ext.upper_bound() + next().exp() - loc
        } else {
            next().exp()
        };
        let shapes: Vec<f64> = (0..fam.n_shapes())
            .map(|_| {
                let t = next();
                if fam == FamilyId::Gev {
                    t
                } else {
                    t.exp()
                }
            })
            .collect();
        ParamVector {
            shapes,
            loc,
            scale,
        }
    }

    fn to_theta(&self, p: &ParamVector) -> Vec<f64> {
        let mut theta = Vec::new();
        if self.fixed_loc.is_none() {
            if self.bounded_loc() {
                theta.push((self.ext.lower_bound() - p.loc).ln());
            } else {
                theta.push(p.loc);
            }
        }
        if self.family == FamilyId::Beta {
            theta.push((p.loc + p.scale - self.ext.upper_bound()).ln());
        } else {
            theta.push(p.scale.ln());
        }
        for &s in &p.shapes {
            theta.push(if self.family == FamilyId::Gev { s } else { s.ln() });
        }
        theta
    }

    fn steps(&self) -> Vec<f64> {
        let mut steps = Vec::new();
        if self.fixed_loc.is_none() {
            steps.push(if self.bounded_loc() { 0.5 } else { 0.1 });
        }
        steps.push(if self.family == FamilyId::Beta { 0.5 } else { 0.2 });
        for _ in 0..self.family.n_shapes() {
            steps.push(if self.family == FamilyId::Gev { 0.05 } else { 0.2 });
        }
        steps
    }
}

/// Maximum-likelihood fit of `family` to `data`.
///
/// Returns the best point found with `converged = false` if the simplex
/// does not meet its tolerances within the iteration budget (after one
/// restart).
pub fn fit_mle(family: FamilyId, data: &[f64], config: &FitConfig) -> Result<FittedModel> {
    let k_params = free_parameter_count(family, config);
    let n = data.len();
    if n < k_params + 1 {
        return Err(Error::SampleTooSmall {
            n,
            required: k_params + 1,
        });
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig("sample contains non-finite values".into()));
    }
    let stats = summarize_values(data)?;
    let (center, spread) = (stats.mean, stats.sd);
    let z: Vec<f64> = data.iter().map(|&x| (x - center) / spread).collect();
    let ext = Extent::of(&z);

    let fixed_loc = if config.raw_support && family.is_positive_support() {
        if stats.min <= 0.0 {
            return Err(Error::OutsideSupport { family });
        }
        Some(-center / spread)
    } else {
        None
    };

    let coords = Coordinates {
        family,
        ext,
        fixed_loc,
    };
    let start = initial_params_with(family, &z, fixed_loc)?;
    let theta0 = coords.to_theta(&start);
    let steps = coords.steps();
    let objective = |theta: &[f64]| -> f64 {
        match Distribution::new(family, coords.to_params(theta)) {
            Ok(d) => {
                let ll = d.log_likelihood(&z);
                if ll.is_finite() {
                    -ll
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        }
    };
    if !objective(&theta0).is_finite() {
        return Err(Error::ConvergenceFailure(format!(
            "{family}: starting point has zero likelihood"
        )));
    }

    let opts = NelderMeadOptions {
        max_iter: config.max_iter,
        ftol: config.tol,
        xtol: PARAM_TOL,
    };
    let mut best = nelder_mead(objective, &theta0, &steps, &opts);
    if !best.converged {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ family_salt(family));
        let perturbed: Vec<f64> = best
            .x
            .iter()
            .zip(&steps)
            .map(|(x, s)| x + 0.5 * s * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let second = nelder_mead(objective, &perturbed, &steps, &opts);
        // lower objective = higher likelihood; ties keep the first run
        if second.fx < best.fx - RESTART_TIE {
            best = second;
        } else if second.converged && (second.fx - best.fx).abs() <= RESTART_TIE {
            best.converged = true;
        }
    }

    let pz = coords.to_params(&best.x);
    let params = ParamVector {
        shapes: pz.shapes,
        loc: match fixed_loc {
            Some(_) => 0.0,
            None => center + spread * pz.loc,
        },
        scale: spread * pz.scale,
    };
    let dist = Distribution::new(family, params)?;
    let log_likelihood = dist.log_likelihood(data);
    if !log_likelihood.is_finite() {
        return Err(Error::ConvergenceFailure(format!(
            "{family}: fitted model assigns zero density to an observation"
        )));
    }
    Ok(FittedModel {
        family,
        params: dist.params().clone(),
        log_likelihood,
        k_params,
        n,
        converged: best.converged,
    })
}

fn family_salt(family: FamilyId) -> u64 {
    let idx = FamilyId::ALL.iter().position(|&f| f == family).unwrap_or(0) as u64;
    0x9E37_79B9_7F4A_7C15u64.wrapping_mul(idx + 1)
}
