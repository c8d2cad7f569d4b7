//! Damped least-squares (Levenberg–Marquardt) with analytic Jacobians.
//!
//! Small, dependency-free solver for the handful of low-dimensional fits in
//! this crate (<= 6 parameters). Deterministic: no randomized restarts.

/// A residual vector r(p) with analytic Jacobian dr/dp.
pub trait LeastSquaresProblem {
    fn residual_count(&self) -> usize;
    fn parameter_count(&self) -> usize;
    /// Fill `r` (length residual_count) with residuals at `p`.
    fn residuals(&self, p: &[f64], r: &mut [f64]);
    /// Fill `j` (row-major residual_count x parameter_count) at `p`.
    fn jacobian(&self, p: &[f64], j: &mut [f64]);
}

#[derive(Debug, Clone, Copy)]
pub struct LevMarOptions {
    pub max_iterations: usize,
    /// Converged when every |δp_i| <= rel_tol·(|p_i| + rel_tol).
    pub rel_tol: f64,
    pub lambda_init: f64,
}

impl Default for LevMarOptions {
    fn default() -> Self {
        LevMarOptions {
            max_iterations: 200,
            rel_tol: 1e-8,
            lambda_init: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LevMarOutcome {
    pub params: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub residual_rms: f64,
    /// (JᵀJ)⁻¹ at the solution, row-major, if invertible.
    pub jtj_inverse: Option<Vec<f64>>,
}

fn cost(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum::<f64>()
}

/// Solve a dense linear system in place via Gaussian elimination with
/// partial pivoting. Returns false if singular.
fn solve_linear(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return false;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] * inv;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= f * a[col * n + k];
            }
            b[row] -= f * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    true
}

fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut out = vec![0.0; n * n];
    for col in 0..n {
        let mut m = a.to_vec();
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        if !solve_linear(&mut m, &mut e, n) {
            return None;
        }
        for row in 0..n {
            out[row * n + col] = e[row];
        }
    }
    Some(out)
}

pub fn solve(
    problem: &dyn LeastSquaresProblem,
    initial: &[f64],
    opts: &LevMarOptions,
) -> LevMarOutcome {
    let n_res = problem.residual_count();
    let n_par = problem.parameter_count();
    assert_eq!(initial.len(), n_par);

    let mut p = initial.to_vec();
    let mut r = vec![0.0; n_res];
    let mut j = vec![0.0; n_res * n_par];
    problem.residuals(&p, &mut r);
    let mut current_cost = cost(&r);
    let mut lambda = opts.lambda_init;
    let mut converged = false;
    let mut iterations = 0;

    'outer: for iter in 0..opts.max_iterations {
        iterations = iter + 1;
        problem.jacobian(&p, &mut j);

        // normal equations: JᵀJ and g = Jᵀr
        let mut jtj = vec![0.0; n_par * n_par];
        let mut g = vec![0.0; n_par];
        for row in 0..n_res {
            let jr = &j[row * n_par..(row + 1) * n_par];
            for a in 0..n_par {
                g[a] += jr[a] * r[row];
                for b in a..n_par {
                    jtj[a * n_par + b] += jr[a] * jr[b];
                }
            }
        }
        for a in 0..n_par {
            for b in 0..a {
                jtj[a * n_par + b] = jtj[b * n_par + a];
            }
        }

        // inner loop: adapt the damping until a step is accepted
        loop {
            let mut lhs = jtj.clone();
            for a in 0..n_par {
                // Marquardt scaling with an absolute floor for flat directions
                let d = jtj[a * n_par + a];
                lhs[a * n_par + a] = d + lambda * d.max(1e-12);
            }
            let mut delta: Vec<f64> = g.iter().map(|v| -v).collect();
            if !solve_linear(&mut lhs, &mut delta, n_par) {
                lambda *= 10.0;
                if lambda > 1e14 {
                    break 'outer;
                }
                continue;
            }
            let trial: Vec<f64> = p.iter().zip(&delta).map(|(a, d)| a + d).collect();
            let mut r_trial = vec![0.0; n_res];
            problem.residuals(&trial, &mut r_trial);
            let trial_cost = cost(&r_trial);
            if trial_cost.is_finite() && trial_cost <= current_cost {
                let small = delta
                    .iter()
                    .zip(&p)
                    .all(|(d, pi)| d.abs() <= opts.rel_tol * (pi.abs() + opts.rel_tol));
                p = trial;
                r = r_trial;
                current_cost = trial_cost;
                lambda = (lambda / 3.0).max(1e-14);
                if small {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 4.0;
            if lambda > 1e14 {
                break 'outer;
            }
        }
    }

    let residual_rms = (current_cost / n_res as f64).sqrt();
    // recompute JᵀJ at the solution for the covariance estimate
    problem.jacobian(&p, &mut j);
    let mut jtj = vec![0.0; n_par * n_par];
    for row in 0..n_res {
        let jr = &j[row * n_par..(row + 1) * n_par];
        for a in 0..n_par {
            for b in 0..n_par {
                jtj[a * n_par + b] += jr[a] * jr[b];
            }
        }
    }
    LevMarOutcome {
        params: p,
        converged,
        iterations,
        residual_rms,
        jtj_inverse: invert(&jtj, n_par),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct ExpProblem {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquaresProblem for ExpProblem {
        fn residual_count(&self) -> usize {
            self.t.len()
        }
        fn parameter_count(&self) -> usize {
            2
        }
        fn residuals(&self, p: &[f64], r: &mut [f64]) {
            for (i, (&t, &y)) in self.t.iter().zip(&self.y).enumerate() {
                r[i] = p[0] * (-t / p[1]).exp() - y;
            }
        }
        fn jacobian(&self, p: &[f64], j: &mut [f64]) {
            for (i, &t) in self.t.iter().enumerate() {
                let e = (-t / p[1]).exp();
                j[i * 2] = e;
                j[i * 2 + 1] = p[0] * e * t / (p[1] * p[1]);
            }
        }
    }

    #[test]
    fn recovers_exponential_parameters() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = t.iter().map(|&t| 2.5 * (-t / 0.8f64).exp()).collect();
        let problem = ExpProblem { t, y };
        let out = solve(&problem, &[1.0, 0.3], &LevMarOptions::default());
        assert!(out.converged);
        assert!((out.params[0] - 2.5).abs() < 1e-8);
        assert!((out.params[1] - 0.8).abs() < 1e-8);
        assert!(out.residual_rms < 1e-10);
    }

    #[test]
    fn linear_solver_pivots() {
        let mut a = vec![0.0, 2.0, 1.0, 0.0];
        let mut b = vec![4.0, 3.0];
        assert!(solve_linear(&mut a, &mut b, 2));
        assert!((b[0] - 3.0).abs() < 1e-14);
        assert!((b[1] - 2.0).abs() < 1e-14);
    }
}
