//! Harmonic-oscillator eigenfunctions on the grid (internal units).

use ndarray::Array2;

use super::grid::QuantumGrid;

/// ψ_n(x_i) for n = 0..=n_max, row n = state n. Upward recurrence
/// ψ_{n+1} = sqrt(2/(n+1))·x·ψ_n - sqrt(n/(n+1))·ψ_{n-1}, each row
/// renormalized to unit grid norm (Σψ²·dx = 1).
pub fn hermite_functions(grid: &QuantumGrid, n_max: usize) -> Array2<f64> {
    let n_pts = grid.len();
    let dx = grid.spacing();
    let mut psi = Array2::<f64>::zeros((n_max + 1, n_pts));
    let norm0 = std::f64::consts::PI.powf(-0.25);
    for i in 0..n_pts {
        let x = grid.x(i);
        psi[(0, i)] = norm0 * (-0.5 * x * x).exp();
    }
    if n_max >= 1 {
        for i in 0..n_pts {
            let x = grid.x(i);
            psi[(1, i)] = std::f64::consts::SQRT_2 * x * psi[(0, i)];
        }
    }
    for n in 1..n_max {
        let c1 = (2.0 / (n as f64 + 1.0)).sqrt();
        let c2 = (n as f64 / (n as f64 + 1.0)).sqrt();
        for i in 0..n_pts {
            let x = grid.x(i);
            psi[(n + 1, i)] = c1 * x * psi[(n, i)] - c2 * psi[(n - 1, i)];
        }
    }
    for mut row in psi.rows_mut() {
        let norm = (row.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|v| v / norm);
        }
    }
    psi
}
