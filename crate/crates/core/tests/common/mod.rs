//! Independent oracles shared by the integration tests. Nothing here calls
//! into the crate's numerics.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Closed-form cubic standing wave `tanh(x / sqrt 2)`.
pub fn tanh_wave(x: f64) -> f64 {
    (x / SQRT2).tanh()
}

pub fn tanh_wave_derivative(x: f64) -> f64 {
    let c = (x / SQRT2).cosh();
    1.0 / (SQRT2 * c * c)
}

/// `|m'|_{L2}^2 = 2 sqrt 2 / 3` for the cubic wave.
pub fn cubic_grad_norm_sq() -> f64 {
    2.0 * SQRT2 / 3.0
}

/// Interior nodes of `[-l, l]` with spacing `dx`.
pub fn interior_nodes(l: f64, dx: f64) -> Vec<f64> {
    let n = (2.0 * l / dx).round() as usize;
    (1..n).map(|i| -l + i as f64 * dx).collect()
}

/// Dense `-d^2/dx^2 + v(x)` with Dirichlet ends.
pub fn dense_schrodinger(l: f64, dx: f64, v: impl Fn(f64) -> f64) -> (Vec<f64>, DMatrix<f64>) {
    let xs = interior_nodes(l, dx);
    let n = xs.len();
    let h2 = dx * dx;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = 2.0 / h2 + v(xs[i]);
        if i + 1 < n {
            a[(i, i + 1)] = -1.0 / h2;
            a[(i + 1, i)] = -1.0 / h2;
        }
    }
    (xs, a)
}

/// Sorted eigenvalues and matching eigenvectors (columns) of a dense
/// symmetric matrix.
pub fn dense_eigen(a: DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let e = SymmetricEigen::new(a);
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = idx.iter().map(|&i| e.eigenvectors.column(i).iter().copied().collect()).collect();
    (vals, vecs)
}

/// Cubic linearized potential `-f'(m) = 3 m^2 - 1`.
pub fn cubic_potential(x: f64) -> f64 {
    let m = tanh_wave(x);
    3.0 * m * m - 1.0
}

fn thomas(lower: f64, diag: &[f64], upper: f64, rhs: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = diag[0];
    c[0] = upper / d;
    rhs[0] /= d;
    for i in 1..n {
        d = diag[i] - lower * c[i - 1];
        c[i] = upper / d;
        rhs[i] = (rhs[i] - lower * rhs[i - 1]) / d;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c[i] * rhs[i + 1];
    }
}

/// Time integral of `I(t) = sum_y g(y) int x (p^2 - p0^2) dx` with
/// `p = e^{-tH}` evolved by implicit Euler from discrete deltas, where
/// `g = f''(m) m'` and `p0` is the zero-mode part. Steps grow as
/// `h (t + dx^2)` up to `h` so that every mode's decay is resolved;
/// trapezoid in `t` on `[0, t_max]` plus the tail `I(t_max) / lambda_1`.
fn alpha2_implicit_euler(l: f64, dx: f64, h: f64, t_max: f64) -> f64 {
    let (xs, a) = dense_schrodinger(l, dx, cubic_potential);
    let n = xs.len();
    let (vals, vecs) = dense_eigen(a);
    let norm = dx.sqrt();
    let phi0: Vec<f64> = vecs[0].iter().map(|v| v / norm).collect();
    let lambda1 = vals[1];
    let g: Vec<f64> = xs.iter().map(|&x| -6.0 * tanh_wave(x) * tanh_wave_derivative(x)).collect();
    // q = p - phi0 phi0^T, column by column.
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut c: Vec<f64> = (0..n).map(|i| -phi0[i] * phi0[j]).collect();
            c[j] += 1.0 / dx;
            c
        })
        .collect();
    let h2 = dx * dx;
    let integrand = |q: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for (j, col) in q.iter().enumerate() {
            let mut inner = 0.0;
            for i in 0..n {
                inner += xs[i] * (2.0 * phi0[i] * phi0[j] * col[i] + col[i] * col[i]);
            }
            s += g[j] * inner * dx * dx;
        }
        s
    };
    let mut t = 0.0;
    let mut prev = integrand(&q);
    let mut total = 0.0;
    while t < t_max {
        let dt = (h * (t + h2)).min(h).min(t_max - t);
        let diag: Vec<f64> = xs.iter().map(|&x| 1.0 + dt * (2.0 / h2 + cubic_potential(x))).collect();
        for col in q.iter_mut() {
            thomas(-dt / h2, &diag, -dt / h2, col);
        }
        let cur = integrand(&q);
        total += 0.5 * dt * (prev + cur);
        prev = cur;
        t += dt;
    }
    total += prev / lambda1;
    -total / cubic_grad_norm_sq()
}

/// Time-stepping value of `alpha_2` for the cubic reaction on `[-l, l]`:
/// graded implicit Euler at `h` and `h / 2`, extrapolated to `h -> 0`.
pub fn alpha2_time_stepping(l: f64, dx: f64, h: f64, t_max: f64) -> f64 {
    let coarse = alpha2_implicit_euler(l, dx, h, t_max);
    let fine = alpha2_implicit_euler(l, dx, h / 2.0, t_max);
    2.0 * fine - coarse
}

/// Two-sided 99.7% band half-width for a sample variance of `n` Gaussian draws.
pub fn variance_band(var: f64, n: usize) -> f64 {
    3.0 * var * (2.0 / (n as f64 - 1.0)).sqrt()
}
