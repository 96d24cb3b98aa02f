//! The standing wave `m'' + f(m) = 0`, `m(0) = 0`, `m(±inf) = a_±`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::{quad, Field, Grid1D, UniformHermite};
use crate::reaction::ReactionSpec;

/// Below this distance from a stable zero the profile switches to its
/// exponential asymptotics.
const TAIL_CUTOFF: f64 = 1e-6;

/// Tabulated standing wave with its gradient.
#[derive(Debug, Clone)]
pub struct StandingWaveProfile {
    pub grid: Grid1D,
    pub m: Field,
    pub grad_m: Field,
    /// `||m'||^2` by trapezoid quadrature on the grid.
    pub grad_norm_sq: f64,
    pub a_minus: f64,
    pub a_plus: f64,
    table: UniformHermite,
}

impl StandingWaveProfile {
    /// Wraps sampled `m` and `m'`.
    pub fn from_fields(m: Field, grad_m: Field, a_minus: f64, a_plus: f64) -> Result<Self> {
        if m.grid != grad_m.grid {
            return Err(Error::InvalidParameter("profile and gradient on different grids".into()));
        }
        let grid = m.grid;
        let grad_norm_sq = grad_m.inner(&grad_m);
        let table = UniformHermite::new(grid.x(0), grid.dx(), m.values.clone(), grad_m.values.clone())?;
        Ok(Self { grid, m, grad_m, grad_norm_sq, a_minus, a_plus, table })
    }

    /// `(m(z), m'(z))`, clamped to `(a_±, 0)` outside the table.
    #[inline]
    pub fn eval(&self, z: f64) -> (f64, f64) {
        if z < self.table.x_min() {
            (self.a_minus, 0.0)
        } else if z > self.table.x_max() {
            (self.a_plus, 0.0)
        } else {
            self.table.eval(z)
        }
    }

    /// `m(eps^{-1/2} (x - eta))` on `grid`.
    pub fn rescale(&self, grid: &Grid1D, eps: f64, eta: f64) -> Field {
        let s = 1.0 / eps.sqrt();
        Field::from_fn(*grid, |x| self.eval(s * (x - eta)).0)
    }

    /// `d/dx m(eps^{-1/2} (x - eta))` on `grid`.
    pub fn rescale_gradient(&self, grid: &Grid1D, eps: f64, eta: f64) -> Field {
        let s = 1.0 / eps.sqrt();
        Field::from_fn(*grid, |x| s * self.eval(s * (x - eta)).1)
    }

    /// Sup of `m'' + f(m)` on interior nodes with the three-point Laplacian.
    pub fn discrete_residual(&self, r: &ReactionSpec) -> f64 {
        let lap = self.m.laplacian();
        (1..self.m.len() - 1).map(|i| (lap.values[i] + r.f(self.m.values[i])).abs()).fold(0.0, f64::max)
    }

    /// Sup of `m'' + f(m)` on interior nodes with a fourth-order stencil.
    pub fn ode_residual(&self, r: &ReactionSpec) -> f64 {
        let v = &self.m.values;
        let h2 = self.grid.dx() * self.grid.dx();
        (2..v.len() - 2)
            .map(|i| {
                let d2 = (-v[i + 2] + 16.0 * v[i + 1] - 30.0 * v[i] + 16.0 * v[i - 1] - v[i - 2]) / (12.0 * h2);
                (d2 + r.f(v[i])).abs()
            })
            .fold(0.0, f64::max)
    }

    /// CSV with columns `x, m, grad_m`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "m", "grad_m"])?;
        for i in 0..self.m.len() {
            w.write_record([
                self.grid.x(i).to_string(),
                self.m.values[i].to_string(),
                self.grad_m.values[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Standing wave on `grid`: closed form `tanh(x / sqrt 2)` for the cubic,
/// first-integral quadrature otherwise.
pub fn solve_standing_wave(r: &ReactionSpec, grid: &Grid1D) -> Result<StandingWaveProfile> {
    if r.is_cubic() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = Field::from_fn(*grid, |x| (s * x).tanh());
        let grad = Field::from_fn(*grid, |x| {
            let c = (s * x).cosh();
            s / (c * c)
        });
        return StandingWaveProfile::from_fields(m, grad, -1.0, 1.0);
    }
    solve_by_quadrature(r, grid)
}

/// First-integral path `x(m) = int_0^m ds / sqrt(2 W(s))`, usable for any
/// balanced bistable reaction.
pub fn solve_by_quadrature(r: &ReactionSpec, grid: &Grid1D) -> Result<StandingWaveProfile> {
    let c = r.constants()?;
    let (am, ap) = (r.a_minus, r.a_plus);
    let anchor = if am < 0.0 && 0.0 < ap { 0.0 } else { r.a_zero };
    let potential = Potential::new(r, anchor)?;
    let p_minus = -r.df(am);
    if !(p_minus > 0.0) {
        return Err(Error::NotBistable(format!("f'(a-) = {}", -p_minus)));
    }

    let right = Branch::build(&potential, ap, anchor, 1.0, c.p.sqrt(), grid.half_width);
    let left = Branch::build(&potential, am, anchor, -1.0, p_minus.sqrt(), grid.half_width);

    let mut m = vec![0.0; grid.len()];
    let mut dm = vec![0.0; grid.len()];
    for i in 0..grid.len() {
        let x = grid.x(i);
        let (v, d) = if x >= 0.0 { right.at(&potential, x) } else { left.at(&potential, -x) };
        m[i] = v;
        dm[i] = d;
    }
    let m = Field::from_values(*grid, m)?;
    let dm = Field::from_values(*grid, dm)?;
    if m.values.windows(2).any(|w| w[1] <= w[0]) {
        let strict = m.values.windows(2).filter(|w| w[1] <= w[0]).count();
        // Plateaus in the far tail are legitimate once the profile has
        // converged to a_± in floating point.
        let tail_ok = m.values.windows(2).all(|w| w[1] >= w[0]);
        if !tail_ok || strict > m.len() / 2 {
            return Err(Error::DegenerateProfile("profile is not monotone".into()));
        }
    }
    StandingWaveProfile::from_fields(m, dm, am, ap)
}

/// `W(s) = int_s^{a+} f` evaluated from whichever end is nearer, so that
/// both wells are resolved to full relative precision.
struct Potential<'a> {
    r: &'a ReactionSpec,
    anchor: f64,
}

impl<'a> Potential<'a> {
    fn new(r: &'a ReactionSpec, anchor: f64) -> Result<Self> {
        let pot = Self { r, anchor };
        let from_right = pot.integral(anchor, r.a_plus);
        let from_left = -pot.integral(r.a_minus, anchor);
        let scale = from_right.abs().max(from_left.abs()).max(1e-300);
        if (from_right - from_left).abs() > 1e-6 * scale {
            return Err(Error::UnbalancedWell { s: r.a_minus, w: from_left - from_right });
        }
        let n = 2000;
        for i in 1..n {
            let s = r.a_minus + (r.a_plus - r.a_minus) * i as f64 / n as f64;
            let w = pot.w(s);
            if !(w > 0.0) {
                return Err(Error::UnbalancedWell { s, w });
            }
        }
        Ok(pot)
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        quad::integrate(|s| self.r.f(s), a, b, 8)
    }

    fn w(&self, s: f64) -> f64 {
        if s >= self.anchor {
            self.integral(s, self.r.a_plus)
        } else {
            -self.integral(self.r.a_minus, s)
        }
    }
}

/// One half of the profile, parametrized by `z = -log|a - m|` where `a`
/// is the stable zero the branch approaches.
struct Branch {
    target: f64,
    dir: f64,
    rate: f64,
    z_knots: Vec<f64>,
    x_knots: Vec<f64>,
}

impl Branch {
    /// `dx/dz` along the branch.
    fn dxdz(&self, pot: &Potential, z: f64) -> f64 {
        let gap = (-z).exp();
        let s = self.target - self.dir * gap;
        gap / (2.0 * pot.w(s)).sqrt()
    }

    fn build(pot: &Potential, target: f64, anchor: f64, dir: f64, rate: f64, half_width: f64) -> Self {
        let z0 = -((target - anchor).abs()).ln();
        let z_cut = -TAIL_CUTOFF.ln();
        let mut b = Self { target, dir, rate, z_knots: vec![z0], x_knots: vec![0.0] };
        let dz = 0.05;
        let mut z = z0;
        let mut x = 0.0;
        while z < z_cut && x <= half_width {
            let z1 = (z + dz).min(z_cut);
            x += quad::integrate(|t| b.dxdz(pot, t), z, z1, 1);
            z = z1;
            b.z_knots.push(z);
            b.x_knots.push(x);
        }
        b
    }

    fn value(&self, pot: &Potential, z: f64) -> (f64, f64) {
        let gap = (-z).exp();
        let m = self.target - self.dir * gap;
        (m, (2.0 * pot.w(m)).sqrt())
    }

    /// `(m, m')` at distance `x >= 0` from the anchor along this branch.
    fn at(&self, pot: &Potential, x: f64) -> (f64, f64) {
        let last = self.x_knots.len() - 1;
        if x >= self.x_knots[last] {
            // Exponential tail: |a - m| = gap_c * exp(-rate (x - x_c)).
            let gap_c = (-self.z_knots[last]).exp();
            let gap = gap_c * (-self.rate * (x - self.x_knots[last])).exp();
            return (self.target - self.dir * gap, self.rate * gap);
        }
        let k = self.x_knots.partition_point(|&v| v <= x).saturating_sub(1).min(last - 1);
        let (zk, xk) = (self.z_knots[k], self.x_knots[k]);
        let (zk1, xk1) = (self.z_knots[k + 1], self.x_knots[k + 1]);
        let mut z = zk + (zk1 - zk) * (x - xk) / (xk1 - xk);
        for _ in 0..30 {
            let xz = xk + quad::integrate(|t| self.dxdz(pot, t), zk, z, 1);
            let step = (xz - x) / self.dxdz(pot, z);
            z = (z - step).clamp(zk, zk1);
            if step.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        self.value(pot, z)
    }
}
