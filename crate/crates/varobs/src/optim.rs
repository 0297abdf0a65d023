//! Full-memory BFGS with a strong-Wolfe line search.

use crate::error::{Divergence, Error, Result};

/// A differentiable objective. Implementations count their own evaluations.
pub trait Objective {
    fn value(&mut self, z: &[f64]) -> Result<f64>;
    fn gradient(&mut self, z: &[f64]) -> Result<Vec<f64>>;
    /// Cumulative number of objective evaluations, including those spent on gradients.
    fn evaluations(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub c1: f64,
    pub c2: f64,
    pub max_line_search: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            gradient_tolerance: 1e-8,
            c1: 1e-4,
            c2: 0.9,
            max_line_search: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Best cost seen so far.
    pub cost: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub cost: f64,
    pub gradient_norm: f64,
    pub termination: Termination,
    pub history: Vec<IterationRecord>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(x: &[f64], alpha: f64, p: &[f64]) -> Vec<f64> {
    x.iter().zip(p).map(|(a, b)| a + alpha * b).collect()
}

struct Step {
    alpha: f64,
    cost: f64,
    gradient: Vec<f64>,
}

pub fn minimize<O: Objective>(obj: &mut O, x0: &[f64], opts: &BfgsOptions) -> Result<BfgsResult> {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut f = obj.value(&x)?;
    if !f.is_finite() {
        return Err(divergence(0, f, &x));
    }
    let mut g = obj.gradient(&x)?;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(divergence(0, f, &x));
    }
    let mut h = identity(n);
    let mut fresh = true;
    let mut history = vec![IterationRecord {
        iteration: 0,
        cost: f,
        evaluations: obj.evaluations(),
    }];
    let mut termination = Termination::MaxIterations;
    for iteration in 1..=opts.max_iterations {
        let gnorm = norm(&g);
        if gnorm < opts.gradient_tolerance {
            termination = Termination::GradientTolerance;
            break;
        }
        let mut p = matvec(&h, &g, -1.0);
        let mut slope = dot(&g, &p);
        if !(slope < 0.0) {
            h = identity(n);
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
        }
        let alpha0 = if fresh { (1.0 / gnorm).min(1.0) } else { 1.0 };
        let mut step = line_search(obj, &x, f, &p, slope, alpha0, opts)?;
        if step.is_none() && !fresh {
            h = identity(n);
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
            step = line_search(obj, &x, f, &p, slope, (1.0 / gnorm).min(1.0), opts)?;
        }
        let Some(step) = step else {
            termination = Termination::LineSearchFailed;
            break;
        };
        if step.gradient.iter().any(|v| !v.is_finite()) {
            return Err(divergence(iteration, f, &x));
        }
        let s: Vec<f64> = p.iter().map(|v| step.alpha * v).collect();
        let y: Vec<f64> = step.gradient.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * norm(&s) * norm(&y) && sy > 0.0 {
            if fresh {
                let scale = sy / dot(&y, &y);
                h = identity(n);
                for i in 0..n {
                    h[i * n + i] = scale;
                }
            }
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        x = axpy(&x, 1.0, &s);
        f = step.cost;
        g = step.gradient;
        history.push(IterationRecord {
            iteration,
            cost: f.min(history.last().map_or(f, |r| r.cost)),
            evaluations: obj.evaluations(),
        });
    }
    Ok(BfgsResult {
        gradient_norm: norm(&g),
        x,
        cost: f,
        termination,
        history,
    })
}

fn divergence(iteration: usize, cost: f64, x: &[f64]) -> Error {
    Error::Divergence(Box::new(Divergence {
        iteration,
        cost,
        x: x.to_vec(),
        theta: Vec::new(),
    }))
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn matvec(h: &[f64], v: &[f64], scale: f64) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| scale * dot(&h[i * n..(i + 1) * n], v))
        .collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ` with `ρ = 1/(yᵀs)`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy = matvec(h, y, 1.0);
    let yhy = dot(y, &hy);
    let coef = (1.0 + rho * yhy) * rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

fn line_search<O: Objective>(
    obj: &mut O,
    x: &[f64],
    f0: f64,
    p: &[f64],
    d0: f64,
    alpha_init: f64,
    opts: &BfgsOptions,
) -> Result<Option<Step>> {
    let armijo = |alpha: f64, fa: f64| fa.is_finite() && fa <= f0 + opts.c1 * alpha * d0;
    let curvature = |da: f64| da.abs() <= -opts.c2 * d0;
    let mut prev = (0.0, f0, d0, None::<Vec<f64>>);
    let mut alpha = alpha_init;
    for i in 0..opts.max_line_search {
        let xa = axpy(x, alpha, p);
        let fa = obj.value(&xa)?;
        if !armijo(alpha, fa) || (i > 0 && fa >= prev.1) {
            return zoom(obj, x, f0, p, d0, prev, (alpha, fa), opts);
        }
        let ga = obj.gradient(&xa)?;
        let da = dot(&ga, p);
        if curvature(da) {
            return Ok(Some(Step {
                alpha,
                cost: fa,
                gradient: ga,
            }));
        }
        if da >= 0.0 {
            return zoom(obj, x, f0, p, d0, (alpha, fa, da, Some(ga)), (prev.0, prev.1), opts);
        }
        prev = (alpha, fa, da, Some(ga));
        alpha *= 2.0;
        if alpha > 1e10 {
            break;
        }
    }
    Ok(prev.3.map(|gradient| Step {
        alpha: prev.0,
        cost: prev.1,
        gradient,
    }))
}

#[allow(clippy::too_many_arguments)]
fn zoom<O: Objective>(
    obj: &mut O,
    x: &[f64],
    f0: f64,
    p: &[f64],
    d0: f64,
    lo: (f64, f64, f64, Option<Vec<f64>>),
    hi: (f64, f64),
    opts: &BfgsOptions,
) -> Result<Option<Step>> {
    let (mut a_lo, mut f_lo, mut d_lo, mut g_lo) = lo;
    let (mut a_hi, mut f_hi) = hi;
    for _ in 0..opts.max_line_search {
        let width = a_hi - a_lo;
        if width.abs() <= 1e-14 * a_lo.abs().max(a_hi.abs()).max(1e-300) {
            break;
        }
        let mut trial = a_lo + 0.5 * width;
        if f_hi.is_finite() {
            let denom = 2.0 * (f_hi - f_lo - d_lo * width);
            if denom > 0.0 {
                let q = a_lo - d_lo * width * width / denom;
                let (lo_b, hi_b) = if width > 0.0 {
                    (a_lo + 0.1 * width, a_hi - 0.1 * width)
                } else {
                    (a_hi - 0.1 * width, a_lo + 0.1 * width)
                };
                if q.is_finite() && q > lo_b && q < hi_b {
                    trial = q;
                }
            }
        }
        let xt = axpy(x, trial, p);
        let ft = obj.value(&xt)?;
        if !(ft.is_finite() && ft <= f0 + opts.c1 * trial * d0) || ft >= f_lo {
            a_hi = trial;
            f_hi = ft;
            continue;
        }
        let gt = obj.gradient(&xt)?;
        let dt = dot(&gt, p);
        if dt.abs() <= -opts.c2 * d0 {
            return Ok(Some(Step {
                alpha: trial,
                cost: ft,
                gradient: gt,
            }));
        }
        if dt * (a_hi - a_lo) >= 0.0 {
            a_hi = a_lo;
            f_hi = f_lo;
        }
        a_lo = trial;
        f_lo = ft;
        d_lo = dt;
        g_lo = Some(gt);
    }
    // sufficient decrease without the curvature condition still makes progress
    Ok(match g_lo {
        Some(gradient) if a_lo > 0.0 && f_lo < f0 => Some(Step {
            alpha: a_lo,
            cost: f_lo,
            gradient,
        }),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock {
        calls: usize,
    }

    impl Objective for Rosenbrock {
        fn value(&mut self, z: &[f64]) -> Result<f64> {
            self.calls += 1;
            Ok((1.0 - z[0]).powi(2) + 100.0 * (z[1] - z[0] * z[0]).powi(2))
        }
        fn gradient(&mut self, z: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![
                -2.0 * (1.0 - z[0]) - 400.0 * z[0] * (z[1] - z[0] * z[0]),
                200.0 * (z[1] - z[0] * z[0]),
            ])
        }
        fn evaluations(&self) -> usize {
            self.calls
        }
    }

    #[test]
    fn solves_rosenbrock() {
        let mut obj = Rosenbrock { calls: 0 };
        let r = minimize(&mut obj, &[-1.2, 1.0], &BfgsOptions::default()).unwrap();
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
        assert!(r.history.windows(2).all(|w| w[1].cost <= w[0].cost));
    }

    struct Quadratic;

    impl Objective for Quadratic {
        fn value(&mut self, z: &[f64]) -> Result<f64> {
            Ok(z.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v * v).sum())
        }
        fn gradient(&mut self, z: &[f64]) -> Result<Vec<f64>> {
            Ok(z.iter().enumerate().map(|(i, v)| 2.0 * (i + 1) as f64 * v).collect())
        }
        fn evaluations(&self) -> usize {
            0
        }
    }

    #[test]
    fn quadratic_converges_to_tolerance() {
        let r = minimize(&mut Quadratic, &[1.0, -2.0, 3.0, 0.5], &BfgsOptions::default()).unwrap();
        assert_eq!(r.termination, Termination::GradientTolerance);
        assert!(r.cost < 1e-15);
    }
}
