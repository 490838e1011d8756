//! Small dense BFGS minimizer with central-difference gradients.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop once the sup-norm of the gradient falls below this.
    pub grad_tol: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            max_iter: 500,
            grad_tol: 1e-10,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], rel: f64) -> DVector<f64> {
    let mut xs = x.to_vec();
    DVector::from_iterator(
        x.len(),
        (0..x.len()).map(|i| {
            let h = rel * x[i].abs().max(1.0);
            xs[i] = x[i] + h;
            let fp = f(&xs);
            xs[i] = x[i] - h;
            let fm = f(&xs);
            xs[i] = x[i];
            (fp - fm) / (2.0 * h)
        }),
    )
}

/// Minimizes `f` from `x0`. Returns the best point seen; `converged` is set
/// when the gradient tolerance was met or no further decrease is possible at
/// machine precision with `f` already at zero.
pub fn minimize_bfgs<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], opts: &BfgsOptions) -> BfgsResult {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut fx = f(x.as_slice());
    if n == 0 {
        return BfgsResult {
            x: vec![],
            f: fx,
            iterations: 0,
            converged: true,
        };
    }
    let mut g = gradient(&f, x.as_slice(), opts.fd_step);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        if g.amax() < opts.grad_tol || fx == 0.0 {
            converged = true;
            break;
        }
        iterations += 1;
        let mut dir = -(&h * &g);
        let mut slope = g.dot(&dir);
        if !(slope < 0.0) {
            h = DMatrix::identity(n, n);
            dir = -g.clone();
            slope = -g.norm_squared();
        }

        // Armijo backtracking
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + step * &dir;
            let ft = f(trial.as_slice());
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew)) = accepted else {
            // no descent left at this precision
            converged = g.amax() < opts.grad_tol.sqrt();
            break;
        };

        let gn = gradient(&f, xn.as_slice(), opts.fd_step);
        let s = &xn - &x;
        let y = &gn - &g;
        let sy = s.dot(&y);
        if sy > 1e-16 * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            h += (rho * rho * yhy + rho) * &s * s.transpose() - rho * (&hy * s.transpose() + &s * hy.transpose());
        }
        x = xn;
        fx = fnew;
        g = gn;
    }
    if !converged && (g.amax() < opts.grad_tol || fx == 0.0) {
        converged = true;
    }
    BfgsResult {
        x: x.iter().copied().collect(),
        f: fx,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2);
        let r = minimize_bfgs(f, &[5.0, 5.0], &BfgsOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-7 && (r.x[1] + 2.0).abs() < 1e-7);
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize_bfgs(f, &[-1.2, 1.0], &BfgsOptions::default());
        assert!((r.x[0] - 1.0).abs() < 1e-5, "{:?}", r);
        assert!((r.x[1] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn iteration_cap_reports_flag() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = BfgsOptions {
            max_iter: 2,
            ..Default::default()
        };
        let r = minimize_bfgs(f, &[-1.2, 1.0], &opts);
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
        assert!(r.f < f(&[-1.2, 1.0]));
    }
}
