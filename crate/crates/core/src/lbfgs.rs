//! Limited-memory BFGS with a backtracking Armijo line search.

use alloc::{collections::VecDeque, vec::Vec};

pub(crate) struct Options {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when the max-norm of the gradient falls below this.
    pub gtol: f64,
    /// Stop after this many iterations without relative decrease above `ftol`.
    pub ftol: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self { memory: 12, max_iter: 600, gtol: 1e-11, ftol: 1e-15 }
    }
}

pub(crate) struct Outcome {
    pub x: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which returns the value and writes the gradient into its second argument.
pub(crate) fn minimize(mut f: impl FnMut(&[f64], &mut [f64]) -> f64, x0: Vec<f64>, opts: &Options) -> Outcome {
    let n = x0.len();
    let mut x = x0;
    let mut g = alloc::vec![0.0; n];
    let mut fx = f(&x, &mut g);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut x_new = alloc::vec![0.0; n];
    let mut g_new = alloc::vec![0.0; n];
    let mut stall = 0;
    for _ in 0..opts.max_iter {
        if !fx.is_finite() || g.iter().all(|v| v.abs() <= opts.gtol) {
            break;
        }
        // Two-loop recursion.
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, rho) in hist.iter().rev() {
            let a = rho * dot(s, &d);
            d.iter_mut().zip(y).for_each(|(di, yi)| *di -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = hist.back() {
            let gamma = dot(s, y) / dot(y, y);
            d.iter_mut().for_each(|di| *di *= gamma);
        }
        for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &d);
            d.iter_mut().zip(s).for_each(|(di, si)| *di += (a - b) * si);
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            hist.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let mut step = if hist.is_empty() { 1.0 / g.iter().fold(1.0_f64, |m, v| m.max(v.abs())) } else { 1.0 };
        let mut accepted = false;
        let mut f_new = fx;
        for _ in 0..60 {
            x_new.iter_mut().zip(&x).zip(&d).for_each(|((xn, xi), di)| *xn = xi + step * di);
            f_new = f(&x_new, &mut g_new);
            if f_new.is_finite() && f_new <= fx + 1e-4 * step * slope {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-300 {
            if hist.len() == opts.memory {
                hist.pop_front();
            }
            hist.push_back((s, y, 1.0 / sy));
        }
        let decrease = fx - f_new;
        core::mem::swap(&mut x, &mut x_new);
        core::mem::swap(&mut g, &mut g_new);
        fx = f_new;
        if decrease <= opts.ftol * fx.abs().max(1.0) {
            stall += 1;
            if stall >= 8 {
                break;
            }
        } else {
            stall = 0;
        }
    }
    Outcome { x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let out = minimize(
            |x, g| {
                let (a, b) = (x[0], x[1]);
                g[0] = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
                g[1] = 200.0 * (b - a * a);
                (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2)
            },
            alloc::vec![-1.2, 1.0],
            &Options::default(),
        );
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6, "{:?}", out.x);
    }
}
