//! Test-only oracles that share no code with the library's fitting routines.

#![allow(dead_code)]

use longicausal::glm::Family;
use nalgebra::DMatrix;

/// Weighted log-likelihood up to constants that do not depend on `beta`.
/// The linear family uses `-0.5 * RSS`, whose maximiser is the MLE of the mean.
pub fn log_likelihood(family: Family, x: &DMatrix<f64>, y: &[f64], w: &[f64], beta: &[f64]) -> f64 {
    let mut ll = 0.0;
    for i in 0..x.nrows() {
        let eta: f64 = (0..x.ncols()).map(|j| x[(i, j)] * beta[j]).sum();
        ll += w[i]
            * match family {
                Family::Linear => -0.5 * (y[i] - eta).powi(2),
                Family::Poisson => y[i] * eta - eta.exp(),
                Family::Logistic => y[i] * eta - (1.0 + eta.exp()).ln(),
            };
    }
    ll
}

/// Minimises `f` with Nelder-Mead, restarting from the best vertex until a
/// restart no longer improves the objective.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, start: &[f64], step: f64) -> Vec<f64> {
    let mut best = start.to_vec();
    let mut best_f = f(&best);
    let mut scale = step;
    for _ in 0..60 {
        let (x, fx) = nelder_mead_once(&f, &best, scale);
        let improved = best_f - fx;
        if fx <= best_f {
            best = x;
            best_f = fx;
        }
        if improved.abs() <= 1e-15 * (1.0 + best_f.abs()) && scale < 1e-3 {
            break;
        }
        scale = (scale * 0.3).max(1e-6);
    }
    best
}

fn nelder_mead_once(f: &impl Fn(&[f64]) -> f64, start: &[f64], step: f64) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for j in 0..n {
        let mut v = start.to_vec();
        v[j] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    for _ in 0..20_000 {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .flat_map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= 1e-16 * (1.0 + values[0].abs()) && size < 1e-11 {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|j| centroid[j] + t * (simplex[n][j] - centroid[j]))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = if fr < values[n] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = f(&contracted);
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    simplex[i] = (0..n)
                        .map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]))
                        .collect();
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let i = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap();
    (simplex[i].clone(), values[i])
}

pub fn brute_force_mle(family: Family, x: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Vec<f64> {
    nelder_mead(
        |b| -log_likelihood(family, x, y, w, b),
        &vec![0.0; x.ncols()],
        1.0,
    )
}

/// True when the MLE exists for an intercept (+ optional single slope) design.
pub fn mle_exists(family: Family, x: &DMatrix<f64>, y: &[f64]) -> bool {
    let n = x.nrows();
    let xs: Vec<f64> = (0..n)
        .map(|i| if x.ncols() == 2 { x[(i, 1)] } else { 0.0 })
        .collect();
    let distinct = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s.len()
    };
    if x.ncols() == 2 && distinct(&xs) < 2 {
        return false;
    }
    match family {
        Family::Linear => n >= x.ncols(),
        Family::Poisson => {
            let pos: Vec<f64> = (0..n).filter(|&i| y[i] > 0.0).map(|i| xs[i]).collect();
            !pos.is_empty() && (x.ncols() == 1 || distinct(&pos) >= 2)
        }
        Family::Logistic => {
            let ones: Vec<f64> = (0..n).filter(|&i| y[i] == 1.0).map(|i| xs[i]).collect();
            let zeros: Vec<f64> = (0..n).filter(|&i| y[i] == 0.0).map(|i| xs[i]).collect();
            if ones.is_empty() || zeros.is_empty() {
                return false;
            }
            if x.ncols() == 1 {
                return true;
            }
            let (min1, max1) = ones
                .iter()
                .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            let (min0, max0) = zeros
                .iter()
                .fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
            // no threshold (even a touching one) separates the classes
            min1 < max0 && min0 < max1
        }
    }
}

/// Mean and variance-based standard error of a sample.
pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub struct Instance {
    pub x: DMatrix<f64>,
    pub y: Vec<f64>,
}

/// Small random GLM problems (n <= 6, p <= 2) whose MLE is finite.
pub fn small_instances(family: Family, count: usize, seed: u64) -> Vec<Instance> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let p = rng.random_range(1..=2usize);
        let n = rng.random_range((p + 1).max(2)..=6usize);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { xs[i] });
        let y: Vec<f64> = (0..n)
            .map(|_| match family {
                Family::Linear => rng.random_range(-3.0..3.0),
                Family::Poisson => rng.random_range(0..6u32) as f64,
                Family::Logistic => f64::from(rng.random_bool(0.5)),
            })
            .collect();
        if mle_exists(family, &x, &y) {
            out.push(Instance { x, y });
        }
    }
    out
}
