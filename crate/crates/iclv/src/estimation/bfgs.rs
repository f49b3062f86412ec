//! Quasi-Newton ascent: BFGS inverse-Hessian updates with a backtracking
//! (Armijo) line search, written as maximization since the objective is a
//! log-likelihood.

use crate::error::Result;

/// One accepted iterate, kept for diagnostics and invariant checks.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub gradient_max_norm: f64,
    pub step_size: f64,
}

pub struct MaximizeOutcome {
    pub point: Vec<f64>,
    pub objective: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 40;

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximizes `objective_gradient` (which returns the value and gradient at a
/// point, with `f_only` for cheap line-search probes) from `start`.
///
/// Rank-2 BFGS update on the inverse Hessian approximation with the standard
/// first-step scaling; the search direction falls back to steepest ascent
/// whenever curvature information is unusable. Convergence is declared when
/// the gradient max-norm drops below `tol`. The accepted objective values
/// are non-decreasing by construction of the Armijo test.
pub fn maximize<FG, F>(
    mut objective_gradient: FG,
    mut f_only: F,
    start: Vec<f64>,
    tol: f64,
    max_iterations: usize,
) -> Result<MaximizeOutcome>
where
    FG: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = start.len();
    let mut x = start;
    let (mut f, mut g) = objective_gradient(&x)?;
    let mut trace = vec![IterationRecord {
        iteration: 0,
        objective: f,
        gradient_max_norm: max_norm(&g),
        step_size: 0.0,
    }];
    // inverse Hessian approximation of the *negated* objective, stored dense
    let mut h_inv = identity(n);
    let mut converged = max_norm(&g) < tol;
    let mut iterations = 0;

    while !converged && iterations < max_iterations {
        iterations += 1;
        // ascent direction d = H * g (H approximates the inverse of -f'')
        let mut d = mat_vec(&h_inv, &g);
        let mut dir_deriv = dot(&g, &d);
        if !(dir_deriv > 0.0) || !d.iter().all(|v| v.is_finite()) {
            h_inv = identity(n);
            d = g.clone();
            dir_deriv = dot(&g, &g);
            if dir_deriv == 0.0 {
                break;
            }
        }

        // backtracking line search on the ascent direction
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let candidate: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
            match f_only(&candidate) {
                Ok(fc) if fc.is_finite() && fc >= f + ARMIJO_C1 * alpha * dir_deriv => {
                    accepted = Some((candidate, fc));
                    break;
                }
                _ => alpha *= 0.5,
            }
        }
        let Some((x_new, _)) = accepted else {
            // no acceptable step along this direction; give up here
            break;
        };

        let (f_new, g_new) = objective_gradient(&x_new)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        // y is the gradient change of the negated objective
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(old, new)| old - new).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if iterations == 1 {
                // scale the initial inverse Hessian to the observed curvature
                let yy = dot(&y, &y);
                if yy > 0.0 {
                    h_inv = identity(n);
                    scale_in_place(&mut h_inv, sy / yy);
                }
            }
            bfgs_update(&mut h_inv, &s, &y, sy);
        }

        x = x_new;
        f = f_new;
        g = g_new;
        trace.push(IterationRecord {
            iteration: iterations,
            objective: f,
            gradient_max_norm: max_norm(&g),
            step_size: alpha,
        });
        converged = max_norm(&g) < tol;
    }

    Ok(MaximizeOutcome {
        point: x,
        objective: f,
        gradient: g,
        iterations,
        converged,
        trace,
    })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn scale_in_place(m: &mut [Vec<f64>], s: f64) {
    for row in m {
        for v in row {
            *v *= s;
        }
    }
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|row| dot(row, v)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Standard BFGS inverse-Hessian update:
/// H <- (I - r s y') H (I - r y s') + r s s', r = 1/(s'y).
fn bfgs_update(h: &mut Vec<Vec<f64>>, s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let r = 1.0 / sy;
    let hy = mat_vec(h, y);
    let yhy = dot(y, &hy);
    // H + (1 + y'Hy * r) r s s' - r (s (Hy)' + Hy s')
    for i in 0..n {
        for j in 0..n {
            h[i][j] += (1.0 + yhy * r) * r * s[i] * s[j] - r * (s[i] * hy[j] + hy[i] * s[j]);
        }
    }
}
