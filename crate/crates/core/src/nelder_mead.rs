//! Derivative-free simplex minimization (Nelder-Mead) with deterministic
//! tie-breaking and staged restarts, so repeated runs from the same start
//! produce bit-identical trajectories.

/// Standard reflection/expansion/contraction/shrink coefficients.
const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct Options {
    /// Step added to each coordinate of the start point to seed the simplex.
    pub initial_step: f64,
    /// Converged when the value spread over the simplex drops below this.
    pub f_tolerance: f64,
    /// ... and the largest coordinate spread drops below this.
    pub x_tolerance: f64,
    /// Total evaluation budget across all restarts; 0 means 500 per dimension.
    pub max_evaluations: usize,
    /// Number of times the simplex is re-seeded around the current best point
    /// with a smaller step after converging.
    pub restarts: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            initial_step: 0.05,
            f_tolerance: 1e-7,
            x_tolerance: 1e-6,
            max_evaluations: 0,
            restarts: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimize `f` starting from `x0`. Zero-dimensional input evaluates once.
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], options: &Options) -> Minimum {
    let n = x0.len();
    let mut evaluations = 0usize;
    if n == 0 {
        let value = f(x0);
        return Minimum {
            x: Vec::new(),
            value,
            evaluations: 1,
            converged: true,
        };
    }
    let budget = if options.max_evaluations == 0 {
        500 * n
    } else {
        options.max_evaluations
    };

    let mut best_x = x0.to_vec();
    let mut best_f = f(&best_x);
    evaluations += 1;
    let mut converged = false;

    for stage in 0..=options.restarts {
        let step = options.initial_step / 4f64.powi(stage as i32);
        // Simplex of n+1 points seeded around the current best.
        let mut xs: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut fs: Vec<f64> = Vec::with_capacity(n + 1);
        xs.push(best_x.clone());
        fs.push(best_f);
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += step;
            if evaluations >= budget {
                break;
            }
            fs.push(f(&x));
            evaluations += 1;
            xs.push(x);
        }
        if xs.len() < n + 1 {
            break; // budget exhausted while seeding
        }

        let mut stage_converged = false;
        while evaluations < budget {
            // Order by value, breaking ties by current position for
            // determinism.
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| fs[a].partial_cmp(&fs[b]).unwrap().then(a.cmp(&b)));
            let permute = |v: &mut Vec<Vec<f64>>, w: &mut Vec<f64>, order: &[usize]| {
                let nv: Vec<Vec<f64>> = order.iter().map(|&i| v[i].clone()).collect();
                let nw: Vec<f64> = order.iter().map(|&i| w[i]).collect();
                *v = nv;
                *w = nw;
            };
            permute(&mut xs, &mut fs, &order);

            let f_spread = fs[n] - fs[0];
            let x_spread = (0..n)
                .map(|d| {
                    let lo = xs.iter().map(|x| x[d]).fold(f64::INFINITY, f64::min);
                    let hi = xs.iter().map(|x| x[d]).fold(f64::NEG_INFINITY, f64::max);
                    hi - lo
                })
                .fold(0.0, f64::max);
            if f_spread <= options.f_tolerance && x_spread <= options.x_tolerance {
                stage_converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|d| xs[..n].iter().map(|x| x[d]).sum::<f64>() / n as f64)
                .collect();
            let lerp = |coef: f64| -> Vec<f64> {
                (0..n)
                    .map(|d| centroid[d] + coef * (centroid[d] - xs[n][d]))
                    .collect()
            };

            let xr = lerp(ALPHA);
            let fr = f(&xr);
            evaluations += 1;

            if fr < fs[0] {
                // Try to go further in the same direction.
                if evaluations < budget {
                    let xe = lerp(GAMMA);
                    let fe = f(&xe);
                    evaluations += 1;
                    if fe < fr {
                        xs[n] = xe;
                        fs[n] = fe;
                        continue;
                    }
                }
                xs[n] = xr;
                fs[n] = fr;
                continue;
            }
            if fr < fs[n - 1] {
                xs[n] = xr;
                fs[n] = fr;
                continue;
            }
            if evaluations >= budget {
                break;
            }
            // Contract: outside if the reflected point improved on the worst,
            // inside otherwise.
            let (xc, against) = if fr < fs[n] {
                (lerp(RHO), fr)
            } else {
                (
                    (0..n)
                        .map(|d| centroid[d] - RHO * (centroid[d] - xs[n][d]))
                        .collect(),
                    fs[n],
                )
            };
            let fc = f(&xc);
            evaluations += 1;
            if fc <= against {
                xs[n] = xc;
                fs[n] = fc;
                continue;
            }
            // Shrink everything toward the best vertex. A vertex only moves
            // if its new value can still be evaluated within budget.
            for i in 1..=n {
                if evaluations >= budget {
                    break;
                }
                let shrunk: Vec<f64> = (0..n)
                    .map(|d| xs[0][d] + SIGMA * (xs[i][d] - xs[0][d]))
                    .collect();
                fs[i] = f(&shrunk);
                evaluations += 1;
                xs[i] = shrunk;
            }
        }

        // Keep the best simplex vertex.
        for i in 0..xs.len() {
            if fs[i] < best_f {
                best_f = fs[i];
                best_x = xs[i].clone();
            }
        }
        converged = stage_converged;
        if !stage_converged {
            break; // out of budget; restarting would only repeat that
        }
    }

    Minimum {
        x: best_x,
        value: best_f,
        evaluations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl_converges_to_center() {
        let target = [1.25, -0.5, 3.0];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        };
        let m = minimize(f, &[0.0, 0.0, 0.0], &Options::default());
        assert!(m.converged, "should converge, used {} evals", m.evaluations);
        for (a, b) in m.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
        assert!(m.value < 1e-7);
    }

    #[test]
    fn banana_valley_reaches_global_minimum() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            100.0 * (b - a * a) * (b - a * a) + (1.0 - a) * (1.0 - a)
        };
        let opts = Options {
            initial_step: 0.5,
            max_evaluations: 4000,
            restarts: 3,
            ..Options::default()
        };
        let m = minimize(f, &[-1.2, 1.0], &opts);
        assert!((m.x[0] - 1.0).abs() < 1e-3 && (m.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn runs_are_bitwise_deterministic() {
        let f = |x: &[f64]| x[0] * x[0] + (x[1] - 2.0).powi(2) + 0.3 * (x[0] * x[1]).sin();
        let a = minimize(f, &[3.0, -1.0], &Options::default());
        let b = minimize(f, &[3.0, -1.0], &Options::default());
        assert_eq!(a.x, b.x);
        assert_eq!(a.value, b.value);
        assert_eq!(a.evaluations, b.evaluations);
    }

    #[test]
    fn budget_exhaustion_reports_not_converged() {
        let f = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>();
        let opts = Options {
            max_evaluations: 10,
            ..Options::default()
        };
        let m = minimize(f, &[5.0, 5.0, 5.0, 5.0], &opts);
        assert!(!m.converged);
        assert!(m.evaluations <= 10 + 4); // shrink loop may finish its sweep
    }
}
