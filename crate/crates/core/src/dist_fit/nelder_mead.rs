//! Nelder–Mead simplex minimiser.

use crate::error::{Error, Result};

pub(crate) const MAX_ITERATIONS: usize = 2000;
pub(crate) const DIAMETER_TOL: f64 = 1e-8;
const INITIAL_STEP: f64 = 0.1;

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
}

/// Largest coordinate distance from the best vertex.
fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

/// Minimises `f` from `x0`. Non-finite values count as `+inf`, so the
/// returned value is never worse than `f(x0)`.
pub(crate) fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64]) -> Result<Minimum> {
    let d = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..d {
        let mut v = x0.to_vec();
        v[i] += INITIAL_STEP;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    for _ in 0..MAX_ITERATIONS {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if diameter(&simplex) < DIAMETER_TOL {
            return Ok(Minimum {
                x: simplex.swap_remove(0),
            });
        }

        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|v| v[j]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&xe);
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
            continue;
        }
        if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[d] {
            let x = along(-0.5);
            let v = eval(&x);
            (x, v)
        } else {
            let x = along(0.5);
            let v = eval(&x);
            (x, v)
        };
        if fc < values[d].min(fr) {
            simplex[d] = xc;
            values[d] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=d {
            let shrunk: Vec<f64> = simplex[0]
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            values[i] = eval(&shrunk);
            simplex[i] = shrunk;
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_ITERATIONS,
    })
}
