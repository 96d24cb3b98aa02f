//! Semi-implicit time stepping of
//! `du = (u_xx + f(u)/eps) dt + eps^gamma a(x) dW` on a truncated line.

pub mod initial;

use std::io::Write;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Field, Grid1D, Noise, RngStream, TridiagonalLu};
use crate::reaction::ReactionSpec;

pub use initial::{make_initial_data, GeneralParams, InitialKind, SuperSubParams, TransitionShape};

/// Smooth bump `A exp(1 + 1/(x^2 - 1))` supported in `(-1, 1)`.
#[inline]
pub fn bump(x: f64, amplitude: f64) -> f64 {
    let d = x * x - 1.0;
    if d >= 0.0 {
        0.0
    } else {
        amplitude * (1.0 + 1.0 / d).exp()
    }
}

/// Derivative of [`bump`].
#[inline]
pub fn bump_derivative(x: f64, amplitude: f64) -> f64 {
    let d = x * x - 1.0;
    if d >= 0.0 {
        0.0
    } else {
        bump(x, amplitude) * (-2.0 * x / (d * d))
    }
}

/// [`bump`] sampled on `grid`.
pub fn default_bump(grid: &Grid1D, amplitude: f64) -> Field {
    Field::from_fn(*grid, |x| bump(x, amplitude))
}

#[derive(Debug, Clone)]
pub struct NoiseSpec {
    pub gamma: f64,
    pub amplitude: Field,
    pub enabled: bool,
}

impl NoiseSpec {
    pub fn new(gamma: f64, amplitude: Field) -> Self {
        Self { gamma, amplitude, enabled: true }
    }

    pub fn disabled(grid: &Grid1D) -> Self {
        Self { gamma: 0.0, amplitude: Field::zeros(*grid), enabled: false }
    }

    /// Nodes where the amplitude is nonzero.
    pub fn support(&self) -> Range<usize> {
        let v = &self.amplitude.values;
        match (v.iter().position(|&a| a != 0.0), v.iter().rposition(|&a| a != 0.0)) {
            (Some(lo), Some(hi)) if self.enabled => lo..hi + 1,
            _ => 0..0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub eps: f64,
    pub reaction: ReactionSpec,
    pub noise: NoiseSpec,
    pub grid: Grid1D,
    pub dt: f64,
    pub t_end: f64,
    pub record_times: Vec<f64>,
    pub stream: RngStream,
    /// Dirichlet values at `-L` and `L`; defaults to `(a_-, a_+)`.
    pub boundary: Option<(f64, f64)>,
}

impl SimConfig {
    /// Deterministic run with the stability-rule time step `eps / (10 c_f)`.
    pub fn deterministic(eps: f64, reaction: ReactionSpec, grid: Grid1D, t_end: f64) -> Self {
        let dt = stable_dt(eps, &reaction);
        Self {
            eps,
            noise: NoiseSpec::disabled(&grid),
            reaction,
            grid,
            dt,
            t_end,
            record_times: vec![t_end],
            stream: RngStream::new(0, 0),
            boundary: None,
        }
    }

    pub fn with_noise(mut self, noise: NoiseSpec, stream: RngStream) -> Self {
        self.noise = noise;
        self.stream = stream;
        self
    }

    pub fn boundary_values(&self) -> (f64, f64) {
        self.boundary.unwrap_or((self.reaction.a_minus, self.reaction.a_plus))
    }

    pub fn n_steps(&self) -> usize {
        if self.dt == 0.0 {
            0
        } else {
            (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(Error::InvalidParameter("dt must be positive and t_end nonnegative".into()));
        }
        let c_f = self.reaction.c_f.max(0.0);
        if c_f > 0.0 && self.dt > self.eps / (10.0 * c_f) * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} exceeds the reaction stability limit eps/(10 c_f) = {}",
                self.dt,
                self.eps / (10.0 * c_f)
            )));
        }
        if self.noise.amplitude.grid != self.grid {
            return Err(Error::InvalidParameter("noise amplitude lives on a different grid".into()));
        }
        if self.record_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("record times must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// `eps / (10 c_f)`, or `eps / 10` when `f' <= 0` everywhere.
pub fn stable_dt(eps: f64, r: &ReactionSpec) -> f64 {
    let c = if r.c_f > 0.0 { r.c_f } else { 1.0 };
    eps / (10.0 * c)
}

/// Pre-factorized implicit-diffusion step for a fixed configuration.
#[derive(Debug, Clone)]
pub struct Stepper {
    eps: f64,
    dt: f64,
    ratio: f64,
    reaction: ReactionSpec,
    lu: TridiagonalLu,
    amp: Vec<f64>,
    support: Range<usize>,
    bl: f64,
    br: f64,
    rhs: Vec<f64>,
}

impl Stepper {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        let n = cfg.grid.len();
        let m = n - 2;
        let r = cfg.dt / (cfg.grid.dx() * cfg.grid.dx());
        let lower = vec![-r; m];
        let upper = vec![-r; m];
        let diag = vec![1.0 + 2.0 * r; m];
        let lu = TridiagonalLu::factor(&lower, &diag, &upper)?;
        let scale = if cfg.noise.enabled { cfg.eps.powf(cfg.noise.gamma) } else { 0.0 };
        let amp = cfg.noise.amplitude.values.iter().map(|a| scale * a).collect();
        let (bl, br) = cfg.boundary_values();
        Ok(Self {
            eps: cfg.eps,
            dt: cfg.dt,
            ratio: r,
            reaction: cfg.reaction.clone(),
            lu,
            amp,
            support: cfg.noise.support(),
            bl,
            br,
            rhs: vec![0.0; m],
        })
    }

    /// Nodes that receive noise.
    pub fn noise_support(&self) -> Range<usize> {
        self.support.clone()
    }

    /// One step in place. `dw` holds increments for the nodes of
    /// [`Stepper::noise_support`] (empty for a deterministic step).
    pub fn advance(&mut self, u: &mut [f64], dw: &[f64], time: f64) -> Result<()> {
        let n = u.len();
        let k = self.dt / self.eps;
        for i in 1..n - 1 {
            let v = u[i];
            self.rhs[i - 1] = v + k * self.reaction.f(v);
        }
        if !dw.is_empty() {
            for (j, i) in self.support.clone().enumerate() {
                if i >= 1 && i < n - 1 {
                    self.rhs[i - 1] += self.amp[i] * dw[j];
                }
            }
        }
        self.rhs[0] += self.ratio * self.bl;
        self.rhs[n - 3] += self.ratio * self.br;
        self.lu.solve(&mut self.rhs);
        if self.rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::Unstable { time });
        }
        u[1..n - 1].copy_from_slice(&self.rhs);
        u[0] = self.bl;
        u[n - 1] = self.br;
        Ok(())
    }
}

/// One semi-implicit step `(I - dt D2) u' = u + dt f(u)/eps + eps^gamma a dW`.
pub fn step(u: &Field, cfg: &SimConfig, dw: &Field) -> Result<Field> {
    if cfg.dt == 0.0 {
        return Ok(u.clone());
    }
    let mut st = Stepper::new(cfg)?;
    let mut out = u.clone();
    let inc: Vec<f64> = st.noise_support().map(|i| dw.values[i]).collect();
    st.advance(&mut out.values, &inc, cfg.dt)?;
    Ok(out)
}

/// Metadata stored with every trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub eps: f64,
    pub gamma: f64,
    pub noise_enabled: bool,
    pub dt: f64,
    pub t_end: f64,
    pub grid: Grid1D,
    pub stream: RngStream,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub meta: TrajectoryMeta,
    pub times: Vec<f64>,
    pub fields: Vec<Field>,
}

impl Trajectory {
    /// Long-format CSV with columns `t, x, u`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "u"])?;
        for (t, f) in self.times.iter().zip(&self.fields) {
            for (i, v) in f.values.iter().enumerate() {
                w.write_record([t.to_string(), f.grid.x(i).to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn record_steps(cfg: &SimConfig) -> Vec<usize> {
    let n = cfg.n_steps();
    let mut out: Vec<usize> = cfg
        .record_times
        .iter()
        .filter(|&&t| t <= cfg.t_end + 0.5 * cfg.dt)
        .map(|&t| ((t / cfg.dt).round() as usize).min(n))
        .collect();
    out.dedup();
    out
}

/// Runs `cfg` from `u0`, calling `observer(t, u)` at every record time.
/// Returns the number of steps taken.
pub fn simulate_with<F>(cfg: &SimConfig, u0: &Field, mut observer: F) -> Result<usize>
where
    F: FnMut(f64, &Field) -> Result<()>,
{
    cfg.validate()?;
    if u0.grid != cfg.grid || !u0.is_finite() {
        return Err(Error::InvalidInitialData("initial field does not match the grid or is not finite".into()));
    }
    let mut st = Stepper::new(cfg)?;
    let mut noise: Noise = cfg.stream.generator();
    let sd = (cfg.dt / cfg.grid.dx()).sqrt();
    let support = st.noise_support();
    let mut dw = vec![0.0; support.len()];
    let mut u = u0.clone();
    let stops = record_steps(cfg);
    let mut next = 0;
    let n = cfg.n_steps();
    for k in 0..=n {
        while next < stops.len() && stops[next] == k {
            observer(k as f64 * cfg.dt, &u)?;
            next += 1;
        }
        if k == n {
            break;
        }
        noise.fill_normal(&mut dw, sd);
        st.advance(&mut u.values, &dw, (k + 1) as f64 * cfg.dt)?;
    }
    Ok(n)
}

/// Runs `cfg` from `u0` and stores the recorded slices.
pub fn simulate(cfg: &SimConfig, u0: &Field) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut fields = Vec::new();
    simulate_with(cfg, u0, |t, u| {
        times.push(t);
        fields.push(u.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        meta: TrajectoryMeta {
            eps: cfg.eps,
            gamma: cfg.noise.gamma,
            noise_enabled: cfg.noise.enabled,
            dt: cfg.dt,
            t_end: cfg.t_end,
            grid: cfg.grid,
            stream: cfg.stream,
        },
        times,
        fields,
    })
}

/// Earliest recorded time with `sup |u| > bound`.
pub fn sup_norm_monitor(traj: &Trajectory, bound: f64) -> Option<f64> {
    traj.times.iter().zip(&traj.fields).find(|(_, f)| f.sup_norm() > bound).map(|(t, _)| *t)
}
