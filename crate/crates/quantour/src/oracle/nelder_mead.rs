//! Derivative-free simplex minimization (Nelder–Mead) with a pattern-search
//! polish, for the brute-force check-loss oracle. The objective is convex
//! piecewise linear, so restarts plus polishing reach the minimizer without
//! gradients.

/// Standard reflection/expansion/contraction coefficients.
const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

pub struct Options {
    pub max_iters: usize,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self { max_iters: 4000, f_tol: 1e-12, x_tol: 1e-10 }
    }
}

pub fn minimize<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: f64,
    opts: &Options,
) -> (Vec<f64>, f64) {
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for i in 0..dim {
        let mut x = x0.to_vec();
        x[i] += step;
        let fx = f(&x);
        simplex.push((x, fx));
    }

    for _ in 0..opts.max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[dim].1;
        let spread = worst - best;
        let diam = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max)
            })
            .fold(0.0f64, f64::max);
        if spread <= opts.f_tol && diam <= opts.x_tol {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let worst_x = simplex[dim].0.clone();
        let second_worst = simplex[dim - 1].1;

        let point = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst_x)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = point(ALPHA);
        let f_r = f(&reflected);
        if f_r < simplex[0].1 {
            let expanded = point(GAMMA);
            let f_e = f(&expanded);
            simplex[dim] = if f_e < f_r { (expanded, f_e) } else { (reflected, f_r) };
            continue;
        }
        if f_r < second_worst {
            simplex[dim] = (reflected, f_r);
            continue;
        }
        let contracted = if f_r < simplex[dim].1 {
            point(ALPHA * RHO) // outside
        } else {
            point(-RHO) // inside
        };
        let f_c = f(&contracted);
        if f_c < simplex[dim].1.min(f_r) {
            simplex[dim] = (contracted, f_c);
            continue;
        }
        // Shrink toward the best vertex.
        let best_x = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let x: Vec<f64> =
                entry.0.iter().zip(&best_x).map(|(v, b)| b + SIGMA * (v - b)).collect();
            let fx = f(&x);
            *entry = (x, fx);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}

/// Coordinate pattern search with geometrically shrinking steps; cleans up
/// the last few digits that the simplex leaves on piecewise-linear surfaces.
pub fn polish<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], initial_step: f64) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut step = initial_step;
    while step > 1e-12 {
        let mut improved = true;
        while improved {
            improved = false;
            for i in 0..x.len() {
                for delta in [step, -step] {
                    let old = x[i];
                    x[i] = old + delta;
                    let ft = f(&x);
                    if ft < fx {
                        fx = ft;
                        improved = true;
                    } else {
                        x[i] = old;
                    }
                }
            }
        }
        step *= 0.25;
    }
    (x, fx)
}
