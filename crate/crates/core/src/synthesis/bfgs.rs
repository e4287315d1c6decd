// Copyright 2026 The boqc Developers
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
// in compliance with the License. You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under
// the License.

//! Quasi-Newton minimization with an inverse-Hessian BFGS update.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Stop as soon as the value drops below this.
    pub value_target: f64,
    pub gradient_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions { max_iterations: 2000, gradient_tolerance: 1e-10, value_target: 0.0, gradient_step: 1e-7 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Central differences with step `h`.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = xp[i];
            xp[i] = orig + h;
            let fp = f(&xp);
            xp[i] = orig - h;
            let fm = f(&xp);
            xp[i] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f` using `fg`, which returns the value and gradient together.
///
/// The line search tries the full step, then one quadratic-interpolation step, and accepts the
/// better under Armijo decrease; on failure it backtracks. Quadratics are therefore searched
/// exactly. Besides the gradient, value and iteration limits, the run stops after two
/// consecutive steps that make no progress, the second taken along the steepest descent.
pub fn bfgs_minimize_with<FG>(fg: FG, x0: &[f64], opts: &BfgsOptions) -> Result<Minimum>
where
    FG: Fn(&[f64]) -> (f64, Vec<f64>),
{
    const ARMIJO: f64 = 1e-4;
    // Relative decrease below which a step counts as no progress.
    const STALL: f64 = 1e-14;
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut g) = fg(&x);
    if !fx.is_finite() {
        return Err(Error::Format("objective is not finite at the start point".into()));
    }
    let mut h = identity(n);
    let mut reset = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        if fx < opts.value_target || dot(&g, &g).sqrt() < opts.gradient_tolerance {
            break;
        }
        iterations += 1;
        let mut p: Vec<f64> = (0..n).map(|i| -dot(&h[i], &g)).collect();
        let mut slope = dot(&p, &g);
        if slope >= 0.0 {
            // Lost positive definiteness; fall back to steepest descent.
            h = identity(n);
            p = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let step_to = |a: f64| -> Vec<f64> { x.iter().zip(&p).map(|(xi, pi)| xi + a * pi).collect() };
        let x1 = step_to(1.0);
        let (f1, g1) = fg(&x1);
        let mut best = (1.0, x1, f1, g1);
        let curv = f1 - fx - slope;
        if curv > 0.0 {
            let aq = -slope / (2.0 * curv);
            if aq.is_finite() && aq > 0.0 && (aq - 1.0).abs() > 1e-12 {
                let xq = step_to(aq);
                let (fq, gq) = fg(&xq);
                if fq.is_finite() && (!best.2.is_finite() || fq < best.2) {
                    best = (aq, xq, fq, gq);
                }
            }
        }
        let mut alpha = best.0;
        while !(best.2.is_finite() && best.2 <= fx + ARMIJO * alpha * slope) {
            alpha *= 0.5;
            if alpha < 1e-20 {
                return Ok(Minimum { x, value: fx, iterations });
            }
            let xa = step_to(alpha);
            let (fa, ga) = fg(&xa);
            best = (alpha, xa, fa, ga);
        }
        let (_, x_new, f_new, g_new) = best;
        let stalled = fx - f_new <= STALL * fx.abs();
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        x = x_new;
        fx = f_new;
        g = g_new;
        if stalled {
            // A second step in a row that cannot lower the value in floating point ends the run.
            if reset {
                break;
            }
            h = identity(n);
            reset = true;
            continue;
        }
        reset = false;
        if sy > 1e-12 {
            update_inverse_hessian(&mut h, &s, &y, sy);
        }
    }
    Ok(Minimum { x, value: fx, iterations })
}

/// Minimizes `f` with finite-difference gradients.
pub fn bfgs_minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &BfgsOptions) -> Result<Minimum> {
    let step = opts.gradient_step;
    bfgs_minimize_with(|x| (f(x), fd_gradient(&f, x, step)), x0, opts)
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// `H ← (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ`, expanded.
fn update_inverse_hessian(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], y)).collect();
    let yhy = dot(y, &hy);
    let c = (1.0 + rho * yhy) * rho;
    for i in 0..n {
        for j in 0..n {
            h[i][j] += c * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
