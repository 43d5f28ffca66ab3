//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use distsel::{Distribution, FamilyId, ParamVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod reference;

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = GK_WEIGHTS[7] * fc;
    let mut gauss = G_WEIGHTS[3] * fc;
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += GK_WEIGHTS[i] * s;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7-15) on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth >= 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    rec(f, a, b, tol, 0)
}

/// Integral over (lo, hi) where either end may be infinite; `width` sets
/// the length scale of the substitution used for infinite ends.
pub fn integrate_range<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, center: f64, width: f64, tol: f64) -> f64 {
    // split at the center so an infinite end never hides the bulk of the mass
    if lo < center && center < hi && (lo.is_infinite() != hi.is_infinite()) {
        return integrate_range(f, lo, center, center, width, tol / 2.0)
            + integrate_range(f, center, hi, center, width, tol / 2.0);
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            let pieces = 64;
            let h = (hi - lo) / pieces as f64;
            (0..pieces)
                .map(|i| integrate(f, lo + i as f64 * h, lo + (i + 1) as f64 * h, tol / pieces as f64))
                .sum()
        }
        (true, false) => {
            let g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let x = lo + width * t / (1.0 - t);
                f(x) * width / ((1.0 - t) * (1.0 - t))
            };
            integrate(&g, 0.0, 1.0, tol)
        }
        (false, true) => {
            let g = |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let x = hi - width * t / (1.0 - t);
                f(x) * width / ((1.0 - t) * (1.0 - t))
            };
            integrate(&g, 0.0, 1.0, tol)
        }
        (false, false) => {
            integrate_range(f, center, f64::INFINITY, center, width, tol / 2.0)
                + integrate_range(f, f64::NEG_INFINITY, center, center, width, tol / 2.0)
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A valid parameter set with shapes kept away from values where the
/// density is singular at a support end.
pub fn random_params(family: FamilyId, rng: &mut ChaCha8Rng) -> ParamVector {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    let loc = u(-20.0, 20.0);
    let scale = u(0.5, 15.0);
    let shapes = match family {
        FamilyId::Normal | FamilyId::Gumbel => vec![],
        FamilyId::Lognormal => vec![u(0.2, 1.5)],
        FamilyId::Gamma => vec![u(1.2, 8.0)],
        FamilyId::InverseGaussian => vec![u(0.2, 3.0)],
        FamilyId::Gev => vec![u(-0.4, 0.4)],
        FamilyId::StudentT => vec![u(2.0, 10.0)],
        FamilyId::Beta => vec![u(1.2, 6.0), u(1.2, 6.0)],
        FamilyId::Weibull => vec![u(1.2, 5.0)],
        FamilyId::Fisher => vec![u(2.5, 20.0), u(2.5, 30.0)],
    };
    ParamVector::new(&shapes, loc, scale)
}

pub fn support_bounds(dist: &Distribution) -> (f64, f64) {
    let s = dist.support();
    (s.lower, s.upper)
}

/// KS distance by direct search: ECDF just left of and at each point,
/// counted from scratch.
pub fn ks_brute(data: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = data.len() as f64;
    let mut d: f64 = 0.0;
    for &x in data {
        let at = data.iter().filter(|&&y| y <= x).count() as f64 / n;
        let left = data.iter().filter(|&&y| y < x).count() as f64 / n;
        let f = cdf(x);
        d = d.max((at - f).abs()).max((left - f).abs());
    }
    d
}

/// A^2 from the per-point form
/// -N - (1/N) sum [(2i-1) ln F_i + (2N+1-2i) ln(1-F_i)].
pub fn ad_direct(data: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut s = 0.0;
    for (idx, &x) in sorted.iter().enumerate() {
        let i = idx as f64 + 1.0;
        let f = cdf(x).clamp(1e-15, 1.0 - 1e-15);
        s += (2.0 * i - 1.0) * f.ln() + (2.0 * n + 1.0 - 2.0 * i) * (1.0 - f).ln();
    }
    -n - s / n
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn subsets(n: usize, r: usize, start: usize, cur: &mut Vec<usize>, out: &mut dyn FnMut(&[usize])) {
    if cur.len() == r {
        out(cur);
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, r, i + 1, cur, out);
        cur.pop();
    }
}

/// L-moments l1..l4 from their definition: the average over all size-r
/// subsamples of sum_k (-1)^k C(r-1, k) X_(r-k:r) / r.
pub fn lmoments_brute(data: &[f64]) -> [f64; 4] {
    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let mut out = [0.0; 4];
    for r in 1..=4 {
        let mut total = 0.0;
        let mut cur = Vec::new();
        subsets(n, r, 0, &mut cur, &mut |idx: &[usize]| {
            // idx is increasing, so sorted[idx[j]] is the (j+1)-th order statistic
            let mut v = 0.0;
            for k in 0..r {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                v += sign * binom(r - 1, k) * sorted[idx[r - 1 - k]];
            }
            total += v / r as f64;
        });
        out[r - 1] = total / binom(n, r);
    }
    out
}

/// Weibull shape MLE with location 0, from the profile equation
/// sum x^k ln x / sum x^k - 1/k - mean(ln x) = 0 solved by bisection.
pub fn weibull_profile_shape(data: &[f64]) -> f64 {
    let mean_ln = data.iter().map(|x| x.ln()).sum::<f64>() / data.len() as f64;
    let g = |k: f64| {
        let (mut num, mut den) = (0.0, 0.0);
        for &x in data {
            let p = x.powf(k);
            num += p * x.ln();
            den += p;
        }
        num / den - 1.0 / k - mean_ln
    };
    let (mut lo, mut hi) = (0.05, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sided KS distance of a sample from Uniform(0, 1).
pub fn uniform_ks(p: &[f64]) -> f64 {
    let mut s = p.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).max((i as f64 + 1.0) / n - v))
        .fold(0.0, f64::max)
}

/// Long-format CSV text for a set of stations with the given series.
pub fn long_csv(stations: &[(&str, Vec<f64>)], first_year: i32) -> String {
    let mut s = String::from("station,year,month,precip_mm\n");
    for (name, values) in stations {
        for (i, v) in values.iter().enumerate() {
            let year = first_year + (i / 12) as i32;
            let month = i % 12 + 1;
            s.push_str(&format!("{name},{year},{month},{v}\n"));
        }
    }
    s
}

/// Synthetic monthly series: seasonal gamma-like amounts with dry months.
pub fn synthetic_station(seed: u64, years: usize, scale: f64) -> Vec<f64> {
    let mut r = rng(seed);
    let gamma = Distribution::new(FamilyId::Gamma, ParamVector::new(&[1.4], 0.0, scale)).unwrap();
    let draws = gamma.sample(years * 12, seed ^ 0x5eed).unwrap();
    draws
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let month = i % 12;
            let season = 0.3 + 0.7 * (std::f64::consts::PI * month as f64 / 11.0).sin().abs();
            if r.random::<f64>() < 0.12 {
                0.0
            } else {
                (v * season * 100.0).round() / 100.0
            }
        })
        .collect()
}

/// Inverse-transform sample with one seeded uniform per stratum
/// ((i + U_i) / n), which keeps Monte Carlo noise well below the
/// estimator's own spread.
pub fn stratified_sample(dist: &Distribution, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n)
        .map(|i| {
            let u = (i as f64 + r.random::<f64>()) / n as f64;
            dist.quantile(u.clamp(1e-300, 1.0 - 1e-16)).unwrap()
        })
        .collect()
}
