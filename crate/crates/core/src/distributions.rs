//! The ten distribution families and their density, CDF, quantile and
//! sampling routines.
//!
//! Every family is a location-scale extension of a standardized form:
//! `f(x) = g((x - loc) / scale; shapes) / scale`. Shapes per family:
//!
//! | family       | shapes        | standardized support |
//! |--------------|---------------|----------------------|
//! | `normal`     | none          | R                    |
//! | `lognorm`    | `s`           | (0, inf)             |
//! | `gamma`      | `k`           | (0, inf)             |
//! | `invgauss`   | `mu`          | (0, inf)             |
//! | `genextreme` | `xi`          | 1 + xi z > 0         |
//! | `gumbel`     | none          | R                    |
//! | `t`          | `nu`          | R                    |
//! | `beta`       | `alpha, beta` | (0, 1)               |
//! | `weibull`    | `k`           | (0, inf)             |
//! | `f`          | `d1, d2`      | (0, inf)             |
//!
//! The lognormal `s` is sigma of the log, with `ln(scale)` playing the role
//! of the log-mean. The inverse Gaussian uses the relative form: with
//! `scale = lambda`, the shape is `mu / lambda`. The GEV shape is stored in
//! the `xi` convention (support `1 + xi (x - loc) / scale > 0`), which is
//! the negative of the `k` used in the `(1 - k (x - mu) / sigma)` form.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{self, LN_SQRT_2PI};

/// Below this magnitude the GEV shape is treated as the Gumbel limit.
const GEV_GUMBEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FamilyId {
    #[serde(rename = "normal")]
    Normal,
    #[serde(rename = "lognorm")]
    Lognormal,
    #[serde(rename = "gamma")]
    Gamma,
    #[serde(rename = "invgauss")]
    InverseGaussian,
    #[serde(rename = "genextreme")]
    Gev,
    #[serde(rename = "gumbel")]
    Gumbel,
    #[serde(rename = "t")]
    StudentT,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "weibull")]
    Weibull,
    #[serde(rename = "f")]
    Fisher,
}

impl FamilyId {
    pub const ALL: [FamilyId; 10] = [
        FamilyId::Normal,
        FamilyId::Lognormal,
        FamilyId::Gamma,
        FamilyId::InverseGaussian,
        FamilyId::Gev,
        FamilyId::Gumbel,
        FamilyId::StudentT,
        FamilyId::Beta,
        FamilyId::Weibull,
        FamilyId::Fisher,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyId::Normal => "normal",
            FamilyId::Lognormal => "lognorm",
            FamilyId::Gamma => "gamma",
            FamilyId::InverseGaussian => "invgauss",
            FamilyId::Gev => "genextreme",
            FamilyId::Gumbel => "gumbel",
            FamilyId::StudentT => "t",
            FamilyId::Beta => "beta",
            FamilyId::Weibull => "weibull",
            FamilyId::Fisher => "f",
        }
    }

    pub fn n_shapes(self) -> usize {
        match self {
            FamilyId::Normal | FamilyId::Gumbel => 0,
            FamilyId::Beta | FamilyId::Fisher => 2,
            _ => 1,
        }
    }

    /// Families whose standardized support is `(0, inf)`.
    pub fn is_positive_support(self) -> bool {
        matches!(
            self,
            FamilyId::Lognormal
                | FamilyId::Gamma
                | FamilyId::InverseGaussian
                | FamilyId::Weibull
                | FamilyId::Fisher
        )
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        FamilyId::ALL
            .into_iter()
            .find(|f| f.name() == lower)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    pub shapes: Vec<f64>,
    pub loc: f64,
    pub scale: f64,
}

impl ParamVector {
    pub fn new(shapes: &[f64], loc: f64, scale: f64) -> Self {
        ParamVector {
            shapes: shapes.to_vec(),
            loc,
            scale,
        }
    }

    pub fn standard(shapes: &[f64]) -> Self {
        Self::new(shapes, 0.0, 1.0)
    }

    pub fn validate(&self, family: FamilyId) -> Result<()> {
        let invalid = |reason: String| Err(Error::InvalidParams { family, reason });
        if self.shapes.len() != family.n_shapes() {
            return invalid(format!(
                "expected {} shape parameter(s), got {}",
                family.n_shapes(),
                self.shapes.len()
            ));
        }
        if !self.loc.is_finite() {
            return invalid(format!("loc must be finite, got {}", self.loc));
        }
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return invalid(format!("scale must be positive, got {}", self.scale));
        }
        for &s in &self.shapes {
            if !s.is_finite() {
                return invalid(format!("shape must be finite, got {s}"));
            }
            if family != FamilyId::Gev && s <= 0.0 {
                return invalid(format!("shape must be positive, got {s}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl Support {
    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lower_closed {
            x >= self.lower
        } else {
            x > self.lower
        };
        let below = if self.upper_closed {
            x <= self.upper
        } else {
            x < self.upper
        };
        above && below
    }
}

/// A validated family + parameter pair with cached normalizing constants.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    family: FamilyId,
    params: ParamVector,
    ln_norm: f64,
}

impl Distribution {
    pub fn new(family: FamilyId, params: ParamVector) -> Result<Self> {
        params.validate(family)?;
        let s = &params.shapes;
        let ln_norm = match family {
            FamilyId::Normal => -LN_SQRT_2PI,
            FamilyId::Lognormal => -LN_SQRT_2PI - s[0].ln(),
            FamilyId::Gamma => -special::ln_gamma(s[0]),
            FamilyId::InverseGaussian => -LN_SQRT_2PI,
            FamilyId::Gev | FamilyId::Gumbel => 0.0,
            FamilyId::StudentT => {
                let nu = s[0];
                special::ln_gamma(0.5 * (nu + 1.0))
                    - special::ln_gamma(0.5 * nu)
                    - 0.5 * (nu * std::f64::consts::PI).ln()
            }
            FamilyId::Beta => -special::ln_beta(s[0], s[1]),
            FamilyId::Weibull => s[0].ln(),
            FamilyId::Fisher => {
                let (d1, d2) = (s[0], s[1]);
                0.5 * d1 * (d1 / d2).ln() - special::ln_beta(0.5 * d1, 0.5 * d2)
            }
        };
        let ln_norm = ln_norm - params.scale.ln();
        Ok(Distribution {
            family,
            params,
            ln_norm,
        })
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    pub fn params(&self) -> &ParamVector {
        &self.params
    }

    fn standardize(&self, x: f64) -> f64 {
        (x - self.params.loc) / self.params.scale
    }

    fn shape(&self, i: usize) -> f64 {
        self.params.shapes[i]
    }

    pub fn support(&self) -> Support {
        let ParamVector { loc, scale, .. } = self.params;
        let (lo, hi) = match self.family {
            FamilyId::Normal | FamilyId::Gumbel | FamilyId::StudentT => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            FamilyId::Beta => (0.0, 1.0),
            FamilyId::Gev => {
                let xi = self.shape(0);
                if xi.abs() < GEV_GUMBEL_EPS {
                    (f64::NEG_INFINITY, f64::INFINITY)
                } else if xi > 0.0 {
                    (-1.0 / xi, f64::INFINITY)
                } else {
                    (f64::NEG_INFINITY, -1.0 / xi)
                }
            }
            _ => (0.0, f64::INFINITY),
        };
        Support {
            lower: loc + scale * lo,
            upper: loc + scale * hi,
            lower_closed: false,
            upper_closed: false,
        }
    }

    /// Log-density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let z = self.standardize(x);
        let core = match self.family {
            FamilyId::Normal => -0.5 * z * z,
            FamilyId::Lognormal => {
                if z <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let s = self.shape(0);
                let lz = z.ln();
                -lz - lz * lz / (2.0 * s * s)
            }
            FamilyId::Gamma => {
                if z <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                (self.shape(0) - 1.0) * z.ln() - z
            }
            FamilyId::InverseGaussian => {
                if z <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let mu = self.shape(0);
                let d = z - mu;
                -1.5 * z.ln() - d * d / (2.0 * z * mu * mu)
            }
            FamilyId::Gev => {
                let xi = self.shape(0);
                if xi.abs() < GEV_GUMBEL_EPS {
                    -z - (-z).exp()
                } else {
                    let xz = xi * z;
                    if xz <= -1.0 {
                        return f64::NEG_INFINITY;
                    }
                    let lt = xz.ln_1p() / xi;
                    -(1.0 + xi) * lt - (-lt).exp()
                }
            }
            FamilyId::Gumbel => -z - (-z).exp(),
            FamilyId::StudentT => {
                let nu = self.shape(0);
                -0.5 * (nu + 1.0) * (z * z / nu).ln_1p()
            }
            FamilyId::Beta => {
                if z <= 0.0 || z >= 1.0 {
                    return f64::NEG_INFINITY;
                }
                (self.shape(0) - 1.0) * z.ln() + (self.shape(1) - 1.0) * (-z).ln_1p()
            }
            FamilyId::Weibull => {
                if z <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let c = self.shape(0);
                (c - 1.0) * z.ln() - z.powf(c)
            }
            FamilyId::Fisher => {
                if z <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                let (d1, d2) = (self.shape(0), self.shape(1));
                (0.5 * d1 - 1.0) * z.ln() - 0.5 * (d1 + d2) * (d1 * z / d2).ln_1p()
            }
        };
        let v = core + self.ln_norm;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let z = self.standardize(x);
        let v = match self.family {
            FamilyId::Normal => special::norm_cdf(z),
            FamilyId::Lognormal => {
                if z <= 0.0 {
                    0.0
                } else {
                    special::norm_cdf(z.ln() / self.shape(0))
                }
            }
            FamilyId::Gamma => special::gamma_p(self.shape(0), z),
            FamilyId::InverseGaussian => invgauss_cdf(z, self.shape(0)),
            FamilyId::Gev => {
                let xi = self.shape(0);
                if xi.abs() < GEV_GUMBEL_EPS {
                    (-(-z).exp()).exp()
                } else {
                    let xz = xi * z;
                    if xz <= -1.0 {
                        if xi > 0.0 {
                            0.0
                        } else {
                            1.0
                        }
                    } else {
                        let lt = xz.ln_1p() / xi;
                        (-(-lt).exp()).exp()
                    }
                }
            }
            FamilyId::Gumbel => (-(-z).exp()).exp(),
            FamilyId::StudentT => student_t_cdf(z, self.shape(0)),
            FamilyId::Beta => special::beta_reg(self.shape(0), self.shape(1), z),
            FamilyId::Weibull => {
                if z <= 0.0 {
                    0.0
                } else {
                    -(-z.powf(self.shape(0))).exp_m1()
                }
            }
            FamilyId::Fisher => {
                if z <= 0.0 {
                    0.0
                } else if z == f64::INFINITY {
                    1.0
                } else {
                    let (d1, d2) = (self.shape(0), self.shape(1));
                    let w = d1 * z / (d1 * z + d2);
                    special::beta_reg(0.5 * d1, 0.5 * d2, w)
                }
            }
        };
        v.clamp(0.0, 1.0)
    }

    /// Inverse CDF for `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidProbability(p));
        }
        let z = match self.family {
            FamilyId::Normal => special::ndtri(p),
            FamilyId::Lognormal => (self.shape(0) * special::ndtri(p)).exp(),
            FamilyId::Gumbel => -(-p.ln()).ln(),
            FamilyId::Gev => {
                let xi = self.shape(0);
                let y = -p.ln();
                if xi.abs() < GEV_GUMBEL_EPS {
                    -y.ln()
                } else {
                    (-xi * y.ln()).exp_m1() / xi
                }
            }
            FamilyId::Weibull => (-(-p).ln_1p()).powf(1.0 / self.shape(0)),
            _ => {
                let standard = Distribution::new(
                    self.family,
                    ParamVector::standard(&self.params.shapes),
                )?;
                standard.invert_standard_cdf(p)?
            }
        };
        Ok(self.params.loc + self.params.scale * z)
    }

    /// Bracketed safeguarded-Newton inversion of the CDF, on a standardized
    /// (loc 0, scale 1) distribution so positive supports start at zero.
    fn invert_standard_cdf(&self, p: f64) -> Result<f64> {
        let sup = self.support();
        let f = |x: f64| self.cdf(x) - p;
        let (loc, scale) = (0.0, 1.0);

        // Bracket [a, b] with f(a) <= 0 <= f(b).
        let (mut a, mut b);
        if sup.lower.is_finite() && sup.upper.is_finite() {
            a = sup.lower;
            b = sup.upper;
        } else if sup.lower.is_finite() {
            a = sup.lower;
            let mut step = scale;
            b = sup.lower + step;
            let mut guard = 0;
            while f(b) < 0.0 {
                a = b;
                step *= 2.0;
                b = sup.lower + step;
                guard += 1;
                if guard > 2000 || !b.is_finite() {
                    return Err(Error::ConvergenceFailure(format!(
                        "{}: could not bracket quantile {p}",
                        self.family
                    )));
                }
            }
            // Tighten the lower end geometrically so tiny quantiles resolve quickly.
            if a == sup.lower {
                let mut w = b - sup.lower;
                while w > f64::MIN_POSITIVE * 1e10 && f(sup.lower + w * 0.5) > 0.0 {
                    w *= 0.5;
                }
                b = sup.lower + w;
                a = sup.lower + w * 0.5;
                if f(a) > 0.0 {
                    a = sup.lower;
                }
            }
        } else {
            let mut step = scale;
            a = loc - step;
            b = loc + step;
            let mut guard = 0;
            while f(a) > 0.0 || f(b) < 0.0 {
                step *= 2.0;
                a = loc - step;
                b = loc + step;
                guard += 1;
                if guard > 2000 || !a.is_finite() || !b.is_finite() {
                    return Err(Error::ConvergenceFailure(format!(
                        "{}: could not bracket quantile {p}",
                        self.family
                    )));
                }
            }
        }

        let mut x = if a > 0.0 && b / a > 4.0 {
            (a * b).sqrt()
        } else {
            0.5 * (a + b)
        };
        let mut best = (f64::INFINITY, x);
        for _ in 0..300 {
            let fx = f(x);
            if fx.abs() < best.0 {
                best = (fx.abs(), x);
            }
            if fx == 0.0 {
                return Ok(x);
            }
            if fx < 0.0 {
                a = x;
            } else {
                b = x;
            }
            if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) {
                break;
            }
            let d = self.pdf(x);
            let newton = x - fx / d;
            x = if d > 0.0 && newton > a && newton < b {
                newton
            } else if a > 0.0 && b / a > 4.0 {
                (a * b).sqrt()
            } else {
                0.5 * (a + b)
            };
        }
        Ok(best.1)
    }

    /// Inverse-transform sampling with a ChaCha8 stream seeded from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u: f64 = rng.random();
            if u > 0.0 {
                out.push(self.quantile(u)?);
            }
        }
        Ok(out)
    }

    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        data.iter().map(|&x| self.ln_pdf(x)).sum()
    }
}

fn invgauss_cdf(z: f64, mu: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if z == f64::INFINITY {
        return 1.0;
    }
    let r = z.sqrt().recip();
    let first = special::norm_cdf(r * (z / mu - 1.0));
    let second = (2.0 / mu + special::log_ndtr(-r * (z / mu + 1.0))).exp();
    first + second
}

fn student_t_cdf(z: f64, nu: f64) -> f64 {
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    let z2 = z * z;
    if z2 < nu {
        let half = 0.5 * special::beta_reg(0.5, 0.5 * nu, z2 / (nu + z2));
        if z < 0.0 {
            0.5 - half
        } else {
            0.5 + half
        }
    } else {
        let tail = 0.5 * special::beta_reg(0.5 * nu, 0.5, nu / (nu + z2));
        if z < 0.0 {
            tail
        } else {
            1.0 - tail
        }
    }
}

pub fn log_pdf(family: FamilyId, params: &ParamVector, x: f64) -> Result<f64> {
    Ok(Distribution::new(family, params.clone())?.ln_pdf(x))
}

pub fn pdf(family: FamilyId, params: &ParamVector, x: f64) -> Result<f64> {
    Ok(Distribution::new(family, params.clone())?.pdf(x))
}

pub fn cdf(family: FamilyId, params: &ParamVector, x: f64) -> Result<f64> {
    Ok(Distribution::new(family, params.clone())?.cdf(x))
}

pub fn quantile(family: FamilyId, params: &ParamVector, p: f64) -> Result<f64> {
    Distribution::new(family, params.clone())?.quantile(p)
}

pub fn sample(family: FamilyId, params: &ParamVector, n: usize, seed: u64) -> Result<Vec<f64>> {
    Distribution::new(family, params.clone())?.sample(n, seed)
}
