//! Derivative-free simplex minimization (Nelder-Mead with the standard
//! reflection/expansion/contraction/shrink coefficients).

/// Outcome of a simplex run.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    /// True when the scaled simplex diameter dropped below the tolerance
    /// within the iteration budget.
    pub converged: bool,
}

/// Minimizes `f` starting from `x0`, building the initial simplex by
/// stepping `steps[i]` along each coordinate.
///
/// Convergence is declared when the simplex diameter, measured per
/// coordinate in units of `scale`, falls below `tol`. The objective may
/// return `f64::INFINITY` to reject a point (constraint penalties); the
/// starting point itself must be finite for the search to make progress.
pub fn nelder_mead<F>(
    f: F,
    x0: &[f64],
    steps: &[f64],
    scale: &[f64],
    tol: f64,
    max_iterations: usize,
) -> SimplexResult
where
    F: Fn(&[f64]) -> f64,
{
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let n = x0.len();
    assert!(n > 0 && steps.len() == n && scale.len() == n);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += steps[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let diameter = |simplex: &[Vec<f64>]| -> f64 {
        let mut d: f64 = 0.0;
        for v in &simplex[1..] {
            for i in 0..n {
                d = d.max((v[i] - simplex[0][i]).abs() / scale[i].abs().max(f64::MIN_POSITIVE));
            }
        }
        d
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;

        // Order vertices best -> worst.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let revalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = reordered;
        values = revalues;

        if diameter(&simplex) < tol {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for i in 0..n {
                centroid[i] += v[i] / n as f64;
            }
        }

        let worst = values[n];
        let second_worst = values[n - 1];
        let best = values[0];

        let lerp = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|i| centroid[i] + t * (centroid[i] - simplex[n][i]))
                .collect()
        };

        let reflected = lerp(ALPHA);
        let f_reflected = f(&reflected);

        if f_reflected < best {
            let expanded = lerp(GAMMA);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[n] = expanded;
                values[n] = f_expanded;
            } else {
                simplex[n] = reflected;
                values[n] = f_reflected;
            }
        } else if f_reflected < second_worst {
            simplex[n] = reflected;
            values[n] = f_reflected;
        } else {
            let contracted = if f_reflected < worst {
                lerp(ALPHA * RHO) // outside contraction
            } else {
                lerp(-RHO) // inside contraction
            };
            let f_contracted = f(&contracted);
            if f_contracted < worst.min(f_reflected) {
                simplex[n] = contracted;
                values[n] = f_contracted;
            } else {
                // Shrink toward the best vertex.
                let best_vertex = simplex[0].clone();
                for j in 1..=n {
                    for (x, b) in simplex[j].iter_mut().zip(&best_vertex) {
                        *x = b + SIGMA * (*x - b);
                    }
                    values[j] = f(&simplex[j]);
                }
            }
        }
    }

    let mut best_idx = 0;
    for j in 1..=n {
        if values[j] < values[best_idx] {
            best_idx = j;
        }
    }
    SimplexResult {
        x: simplex[best_idx].clone(),
        fx: values[best_idx],
        iterations,
        converged,
    }
}
