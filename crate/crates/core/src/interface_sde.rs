//! Coefficients of the limiting interface SDE
//! `d xi = alpha1 a(xi) dB + alpha2 a(xi) a'(xi) dt` and its simulation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Field, Grid1D, RngStream, SymTridiagonal};
use crate::path::{PathPoint, PathRecord};
use crate::reaction::ReactionSpec;
use crate::spde::{bump, bump_derivative};
use crate::standing_wave::StandingWaveProfile;

/// Default half width of the coefficient grid.
pub const COEFF_HALF_WIDTH: f64 = 12.0;
/// Default spacing of the coefficient grid.
pub const COEFF_DX: f64 = 5e-3;
/// Default number of modes kept in the spectral sum.
pub const COEFF_MODES: usize = 256;

/// `-d^2/dx^2 - f'(m)` with Dirichlet ends and its lowest modes.
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    pub grid: Grid1D,
    /// `f'(m(x))`.
    pub potential: Field,
    /// `m'(x)` on the operator grid.
    pub grad_m: Field,
    /// `f''(m(x))`.
    pub curvature: Field,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `sum phi_k^2 dx = 1`; `phi_0` has positive overlap with `m'`.
    pub eigenfunctions: Vec<Field>,
}

impl LinearizedOperator {
    /// Largest `|<phi_j, phi_k> - delta_jk|` over all computed pairs.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (j, a) in self.eigenfunctions.iter().enumerate() {
            for (k, b) in self.eigenfunctions.iter().enumerate().skip(j) {
                let ip = dot_dx(a, b);
                worst = worst.max((ip - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// Cosine similarity between `phi_0` and `m'`.
    pub fn zero_mode_alignment(&self) -> f64 {
        let p = &self.eigenfunctions[0];
        dot_dx(p, &self.grad_m) / (dot_dx(p, p) * dot_dx(&self.grad_m, &self.grad_m)).sqrt()
    }
}

fn dot_dx(a: &Field, b: &Field) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum::<f64>() * a.grid.dx()
}

/// Builds the operator on `grid` and extracts its `n_modes` lowest modes.
pub fn build_linearized_operator(
    profile: &StandingWaveProfile,
    r: &ReactionSpec,
    grid: &Grid1D,
    n_modes: usize,
) -> Result<LinearizedOperator> {
    let n = grid.len();
    if n < 3 || n_modes > n - 2 {
        return Err(Error::InvalidParameter(format!("{n_modes} modes need more than {n} nodes")));
    }
    let dx = grid.dx();
    let mut potential = Vec::with_capacity(n);
    let mut grad = Vec::with_capacity(n);
    let mut curv = Vec::with_capacity(n);
    for i in 0..n {
        let (m, dm) = profile.eval(grid.x(i));
        let (_, df, d2f) = r.eval_all(m);
        potential.push(df);
        grad.push(dm);
        curv.push(d2f);
    }
    let h2 = 1.0 / (dx * dx);
    let d: Vec<f64> = (1..n - 1).map(|i| 2.0 * h2 - potential[i]).collect();
    let e = vec![-h2; n - 3];
    let mat = SymTridiagonal::new(d, e)?;
    let (values, vectors) = mat.lowest_eigenpairs(n_modes)?;
    if values[0] < -100.0 * dx * dx {
        return Err(Error::InconsistentOperator(format!("lambda_0 = {:e} below -100 dx^2", values[0])));
    }
    let norm = 1.0 / dx.sqrt();
    let grad_m = Field::from_values(*grid, grad)?;
    let mut eigenfunctions = Vec::with_capacity(n_modes);
    for v in vectors {
        let mut full = vec![0.0; n];
        for (dst, src) in full[1..n - 1].iter_mut().zip(&v) {
            *dst = norm * src;
        }
        eigenfunctions.push(Field::from_values(*grid, full)?);
    }
    if dot_dx(&eigenfunctions[0], &grad_m) < 0.0 {
        eigenfunctions[0] = eigenfunctions[0].scale(-1.0);
    }
    Ok(LinearizedOperator {
        grid: *grid,
        potential: Field::from_values(*grid, potential)?,
        grad_m,
        curvature: Field::from_values(*grid, curv)?,
        eigenvalues: values,
        eigenfunctions,
    })
}

/// Operator on the default coefficient grid.
pub fn default_operator(profile: &StandingWaveProfile, r: &ReactionSpec) -> Result<LinearizedOperator> {
    let grid = Grid1D::with_max_spacing(COEFF_HALF_WIDTH, COEFF_DX)?;
    build_linearized_operator(profile, r, &grid, COEFF_MODES)
}

/// `1 / ||m'||`.
pub fn compute_alpha1(profile: &StandingWaveProfile) -> Result<f64> {
    let g = profile.grad_norm_sq;
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::DegenerateProfile(format!("||m'||^2 = {g}")));
    }
    Ok(1.0 / g.sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdeCoefficients {
    pub alpha1: f64,
    /// Spectral sum with the `1/K` truncation tail removed.
    pub alpha2: f64,
    pub alpha2_error_estimate: f64,
    /// Raw truncated sum with all computed modes.
    pub alpha2_truncated: f64,
    /// `(K, alpha2(K))` for `K = modes/4, modes/2, modes`.
    pub truncation_series: Vec<(usize, f64)>,
    pub g00: f64,
}

impl SdeCoefficients {
    /// Coefficients given directly, without an operator.
    pub fn new(alpha1: f64, alpha2: f64) -> Self {
        Self {
            alpha1,
            alpha2,
            alpha2_error_estimate: 0.0,
            alpha2_truncated: alpha2,
            truncation_series: Vec::new(),
            g00: 0.0,
        }
    }
}

/// Tolerance on `|G_00|`, which vanishes for odd reactions.
pub const G00_TOLERANCE: f64 = 1e-4;

/// `alpha2 = -(1/||m'||^2) sum_{(j,k) != (0,0)} X_jk G_jk / (lambda_j + lambda_k)`
/// with `X_jk = int x phi_j phi_k` and `G_jk = int phi_j phi_k f''(m) m'`.
/// The sum is evaluated at `K = modes/2` and `K = modes`; the reported value
/// is `2 alpha2(K) - alpha2(K/2)`, removing the `1/K` tail left by the
/// small-time singularity of the kernel.
pub fn compute_alpha2(op: &LinearizedOperator, profile: &StandingWaveProfile) -> Result<SdeCoefficients> {
    let alpha1 = compute_alpha1(profile)?;
    let k_max = op.eigenvalues.len();
    if k_max < 4 {
        return Err(Error::InsufficientData(format!("{k_max} modes, need at least 4")));
    }
    let grid = op.grid;
    let dx = grid.dx();
    let xs = grid.nodes();
    let weight: Vec<f64> = (0..grid.len()).map(|i| op.curvature.values[i] * op.grad_m.values[i]).collect();
    let phi = &op.eigenfunctions;
    let lam = &op.eigenvalues;
    let rows: Vec<Vec<(f64, f64)>> = (0..k_max)
        .into_par_iter()
        .map(|j| {
            (0..k_max)
                .map(|k| {
                    let (mut x, mut g) = (0.0, 0.0);
                    for i in 0..xs.len() {
                        let p = phi[j].values[i] * phi[k].values[i];
                        x += xs[i] * p;
                        g += weight[i] * p;
                    }
                    (x * dx, g * dx)
                })
                .collect()
        })
        .collect();
    let g00 = rows[0][0].1;
    if g00.abs() > G00_TOLERANCE {
        return Err(Error::SymmetryViolated(g00));
    }
    for j in 0..k_max {
        for k in 0..k_max {
            if (j, k) != (0, 0) && lam[j] + lam[k] <= dx * dx {
                return Err(Error::NearSingularPair { j, k, sum: lam[j] + lam[k] });
            }
        }
    }
    let scale = -1.0 / op.grad_m.values.iter().map(|v| v * v).sum::<f64>() / dx;
    let partial = |kk: usize| -> f64 {
        let mut s = 0.0;
        for j in 0..kk {
            for k in 0..kk {
                if (j, k) != (0, 0) {
                    s += rows[j][k].0 * rows[j][k].1 / (lam[j] + lam[k]);
                }
            }
        }
        scale * s
    };
    let series: Vec<(usize, f64)> = [k_max / 4, k_max / 2, k_max].iter().map(|&k| (k, partial(k))).collect();
    let (half, full) = (series[1].1, series[2].1);
    Ok(SdeCoefficients {
        alpha1,
        alpha2: 2.0 * full - half,
        alpha2_error_estimate: (full - half).abs(),
        alpha2_truncated: full,
        truncation_series: series,
        g00,
    })
}

/// Noise amplitude `a(xi)` seen by the interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Amplitude {
    /// `A exp(1 + 1/(x^2 - 1))` on `(-1, 1)`.
    Bump { amplitude: f64 },
    Constant { value: f64 },
    Zero,
}

impl Amplitude {
    /// `(a(x), a'(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            Amplitude::Bump { amplitude } => (bump(x, amplitude), bump_derivative(x, amplitude)),
            Amplitude::Constant { value } => (value, 0.0),
            Amplitude::Zero => (0.0, 0.0),
        }
    }
}

/// Euler-Maruyama settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SdeRun {
    pub xi0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub n_paths: usize,
    /// Record every `stride` steps.
    pub stride: usize,
    pub stream: RngStream,
}

/// Independent Euler-Maruyama paths; path `i` draws from `stream.path(i)`.
pub fn euler_maruyama(coeffs: &SdeCoefficients, a: &Amplitude, run: &SdeRun) -> Result<Vec<PathRecord>> {
    if !(run.dt > 0.0) || !(run.t_end >= 0.0) || run.stride == 0 {
        return Err(Error::InvalidParameter("need dt > 0, t_end >= 0 and stride >= 1".into()));
    }
    let n_steps = (run.t_end / run.dt - 1e-9).ceil().max(0.0) as usize;
    let (a1, a2) = (coeffs.alpha1, coeffs.alpha2);
    let paths = (0..run.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut noise = run.stream.path(i as u64).generator();
            let mut rec = PathRecord::new(i as u64);
            let mut xi = run.xi0;
            rec.points.push(PathPoint::new(0.0, xi));
            let sq = run.dt.sqrt();
            for s in 1..=n_steps {
                let (av, dav) = a.eval(xi);
                xi += a2 * av * dav * run.dt + a1 * av * sq * noise.normal();
                if s % run.stride == 0 || s == n_steps {
                    rec.points.push(PathPoint::new(s as f64 * run.dt, xi));
                }
            }
            rec
        })
        .collect();
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standing_wave::solve_standing_wave;

    fn cubic_profile() -> StandingWaveProfile {
        solve_standing_wave(&ReactionSpec::cubic(), &Grid1D::with_max_spacing(20.0, 1e-3).unwrap()).unwrap()
    }

    #[test]
    fn alpha1_closed_form() {
        let a = compute_alpha1(&cubic_profile()).unwrap();
        assert!((a - (2.0 * 2f64.sqrt() / 3.0).powf(-0.5)).abs() < 1e-6);
    }

    #[test]
    fn alpha1_rejects_flat_profile() {
        let g = Grid1D::new(1.0, 10).unwrap();
        let p = StandingWaveProfile::from_fields(Field::zeros(g), Field::zeros(g), -1.0, 1.0).unwrap();
        assert!(matches!(compute_alpha1(&p), Err(Error::DegenerateProfile(_))));
    }

    #[test]
    fn zero_mode_and_first_bound_state() {
        let r = ReactionSpec::cubic();
        let g = Grid1D::with_max_spacing(12.0, 1e-2).unwrap();
        let op = build_linearized_operator(&cubic_profile(), &r, &g, 4).unwrap();
        let dx = g.dx();
        assert!(op.eigenvalues[0].abs() < 10.0 * dx * dx);
        assert!(op.zero_mode_alignment() > 1.0 - 1e-4);
        assert!((op.eigenvalues[1] - 1.5).abs() < 0.03);
        assert!(op.orthonormality_defect() < 1e-8);
    }

    #[test]
    fn linear_reaction_has_zero_alpha2() {
        let p = cubic_profile();
        let r = ReactionSpec::linear(-1.0);
        let g = Grid1D::with_max_spacing(6.0, 0.02).unwrap();
        let op = build_linearized_operator(&p, &r, &g, 16).unwrap();
        assert_eq!(compute_alpha2(&op, &p).unwrap().alpha2, 0.0);
    }

    #[test]
    fn frozen_paths() {
        let c = SdeCoefficients::new(1.0, 2.5);
        let run = SdeRun { xi0: 0.3, t_end: 1.0, dt: 0.01, n_paths: 4, stride: 10, stream: RngStream::new(1, 0) };
        for p in euler_maruyama(&c, &Amplitude::Zero, &run).unwrap() {
            assert!(p.positions().iter().all(|&x| x == 0.3));
            assert_eq!(p.points.len(), 11);
        }
        let out = SdeRun { xi0: 1.5, ..run };
        for p in euler_maruyama(&c, &Amplitude::Bump { amplitude: 1.0 }, &out).unwrap() {
            assert!(p.positions().iter().all(|&x| x == 1.5));
        }
    }
}
