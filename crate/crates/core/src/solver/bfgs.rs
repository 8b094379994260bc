//! Dense BFGS on the inverse Hessian with an Armijo backtracking line search.

use crate::error::Result;

pub(crate) struct Settings {
    pub max_iterations: usize,
    /// Success once the largest gradient component falls below this.
    pub gradient_tolerance: f64,
    /// Success once the objective itself falls below this.
    pub objective_floor: f64,
}

#[derive(Debug)]
pub(crate) struct Run {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub success: bool,
}

const ARMIJO_C1: f64 = 1e-4;
const MIN_STEP: f64 = 1e-20;

/// Minimizes `f` from `x0`. `f` returns the objective and writes the gradient.
pub(crate) fn minimize<F>(mut f: F, x0: Vec<f64>, settings: &Settings) -> Result<Run>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g)?;
    if n == 0 {
        return Ok(Run { x, value: fx, iterations: 0, success: true });
    }

    let mut h = identity(n);
    let mut fresh = true;
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut d = vec![0.0; n];

    for iteration in 0..settings.max_iterations {
        if inf_norm(&g) <= settings.gradient_tolerance || fx <= settings.objective_floor {
            return Ok(Run { x, value: fx, iterations: iteration, success: true });
        }

        mat_vec(&h, &g, &mut d);
        d.iter_mut().for_each(|v| *v = -*v);
        let mut slope = dot(&g, &d);
        if slope >= 0.0 || slope.is_nan() {
            h = identity(n);
            fresh = true;
            d.iter_mut().zip(&g).for_each(|(di, gi)| *di = -gi);
            slope = dot(&g, &d);
        }

        let mut step = 1.0;
        let accepted = loop {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            let f_new = f(&x_new, &mut g_new)?;
            if f_new <= fx + ARMIJO_C1 * step * slope {
                break Some(f_new);
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };

        let Some(f_new) = accepted else {
            if fresh {
                // Steepest descent cannot make progress at working precision.
                return Ok(Run { x, value: fx, iterations: iteration, success: false });
            }
            h = identity(n);
            fresh = true;
            continue;
        };

        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) && sy > 0.0 {
            if fresh {
                let scale = sy / dot(&y, &y);
                h.iter_mut().for_each(|v| *v *= scale);
                fresh = false;
            }
            update_inverse(&mut h, &s, &y, sy);
        }

        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        fx = f_new;
    }

    let success = inf_norm(&g) <= settings.gradient_tolerance || fx <= settings.objective_floor;
    Ok(Run { x, value: fx, iterations: settings.max_iterations, success })
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ` with `ρ = 1 / sᵀy`.
fn update_inverse(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let mut hy = vec![0.0; n];
    mat_vec(h, y, &mut hy);
    let yhy = dot(y, &hy);
    let coef = (1.0 + rho * yhy) * rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn mat_vec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for i in 0..n {
        out[i] = m[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
