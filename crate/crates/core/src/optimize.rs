//! Nelder-Mead simplex minimization.
//!
//! Non-finite objective values are treated as `+inf`, which lets callers
//! encode infeasible regions directly in the objective.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Relative spread of objective values across the simplex.
    pub ftol: f64,
    /// Largest vertex distance from the best vertex (max-norm).
    pub xtol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iter: 2000,
            ftol: 1e-8,
            xtol: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimize `f` starting from `x0` with an axis-aligned initial simplex
/// whose edge along coordinate `i` is `steps[i]`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], steps: &[f64], opts: &NelderMeadOptions) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    assert_eq!(dim, steps.len(), "one step per coordinate");
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    if dim == 0 {
        let fx = eval(x0);
        return Minimum {
            x: Vec::new(),
            fx,
            iterations: 0,
            evaluations: 1,
            converged: true,
        };
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(x0);
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        let mut fx = eval(&x);
        if !fx.is_finite() && f0.is_finite() {
            // step into the infeasible region: try the other side
            x[i] = x0[i] - steps[i];
            fx = eval(&x);
        }
        simplex.push((x, fx));
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut centroid = vec![0.0; dim];
    let mut trial = vec![0.0; dim];

    while iterations < opts.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if has_converged(&simplex, opts) {
            converged = true;
            break;
        }
        iterations += 1;

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (x, _) in &simplex[..dim] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[dim - 1].1;

        let along = |coef: f64, out: &mut Vec<f64>| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(&worst.0) {
                *o = c + coef * (c - w);
            }
        };

        along(REFLECT, &mut trial);
        let f_reflect = eval(&trial);

        if f_reflect < f_best {
            let reflected = trial.clone();
            along(EXPAND, &mut trial);
            let f_expand = eval(&trial);
            simplex[dim] = if f_expand < f_reflect {
                (trial.clone(), f_expand)
            } else {
                (reflected, f_reflect)
            };
            continue;
        }
        if f_reflect < f_second {
            simplex[dim] = (trial.clone(), f_reflect);
            continue;
        }

        // contraction, outside if the reflection improved on the worst
        let (coef, target) = if f_reflect < worst.1 {
            (CONTRACT * REFLECT, f_reflect)
        } else {
            (-CONTRACT, worst.1)
        };
        along(coef, &mut trial);
        let f_contract = eval(&trial);
        if f_contract <= target && f_contract.is_finite() {
            simplex[dim] = (trial.clone(), f_contract);
            continue;
        }

        let best = simplex[0].0.clone();
        for (x, fx) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&best) {
                *xi = bi + SHRINK * (*xi - bi);
            }
            *fx = eval(x);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    if !converged {
        converged = has_converged(&simplex, opts);
    }
    let (x, fx) = simplex.swap_remove(0);
    Minimum {
        x,
        fx,
        iterations,
        evaluations,
        converged,
    }
}

fn has_converged(sorted: &[(Vec<f64>, f64)], opts: &NelderMeadOptions) -> bool {
    let f_best = sorted[0].1;
    let f_worst = sorted[sorted.len() - 1].1;
    if !f_best.is_finite() || !f_worst.is_finite() {
        return false;
    }
    let f_spread = f_worst - f_best;
    let f_ok = f_spread <= opts.ftol * f_best.abs().max(1.0);
    let best = &sorted[0].0;
    let diameter = sorted[1..]
        .iter()
        .flat_map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    f_ok && diameter <= opts.xtol
}
