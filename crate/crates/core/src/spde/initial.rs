use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Field, Grid1D};
use crate::standing_wave::StandingWaveProfile;

/// Flat smooth step: 0 for `z <= 0`, 1 for `z >= 1`, `C^inf` in between.
pub fn flat_step(z: f64, k: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z >= 1.0 {
        1.0
    } else {
        let a = (-k / z).exp();
        let b = (-k / (1.0 - z)).exp();
        a / (a + b)
    }
}

/// Cutoff equal to 1 on `[-inner, inner]` and 0 off `[-outer, outer]`.
pub fn cutoff(x: f64, inner: f64, outer: f64) -> f64 {
    1.0 - flat_step((x.abs() - inner) / (outer - inner), 1.0)
}

/// Shape of the transition from -1 to 1 across `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitionShape {
    /// Quintic smoothstep of `x + c (1 - x^2)`; needs `|xi0| < sqrt(2) - 1`.
    #[default]
    Quintic,
    /// `C^inf` step of `((x + 1) / 2)^r` with flat ends; any `xi0`.
    Flat,
}

/// Parameters of the general interface-forming initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneralParams {
    /// Unique zero, in `(-1, 1)`.
    pub xi0: f64,
    pub kappa: f64,
    pub shape: TransitionShape,
    /// Sharpness of the flat transition; smaller is steeper.
    pub steepness: f64,
    /// Amplitude of a `sin(2 pi x) (1 - x^2)^3` perturbation.
    pub wiggle: f64,
    pub mu: f64,
}

impl Default for GeneralParams {
    fn default() -> Self {
        Self { xi0: 0.0, kappa: 1.5, shape: TransitionShape::Quintic, steepness: 1.0, wiggle: 0.0, mu: 1.0 }
    }
}

/// Parameters of the shifted super/sub initial data built around a base
/// field that already carries an interface near `xi0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperSubParams {
    pub xi0: f64,
    pub c: f64,
    pub c_prime: f64,
    pub beta_bar: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialKind {
    ProfileOnManifold { eta: f64 },
    SmoothedStep { xi0: f64, width: f64 },
    General(GeneralParams),
    Super { base: Field, params: SuperSubParams },
    Sub { base: Field, params: SuperSubParams },
}

/// Even `C^2` function equal to `|x|` for `|x| >= 1`.
fn smooth_abs(x: f64) -> f64 {
    let a = x.abs();
    if a >= 1.0 {
        a
    } else {
        0.375 + 0.75 * a * a - 0.125 * a * a * a * a
    }
}

/// `C_mu = min(mu / 4, 1)`.
pub fn c_mu(mu: f64) -> f64 {
    (mu / 4.0).min(1.0)
}

/// General datum `T(x) (1 - eps^kappa c exp(-sqrt(mu) |x| / 2))` where `T`
/// is a flat transition from -1 to 1 across `[-1, 1]` vanishing at `xi0`.
/// The tails then satisfy `|u - 1| + |u'| + |u''| = eps^kappa C_mu
/// exp(-sqrt(mu) x / 2)` for `x >= 1` and symmetrically on the left.
pub fn general_initial(grid: &Grid1D, eps: f64, p: &GeneralParams) -> Result<Field> {
    if !(p.xi0 > -1.0 && p.xi0 < 1.0) {
        return Err(Error::InvalidInitialData(format!("xi0 = {} must lie in (-1, 1)", p.xi0)));
    }
    let transition = transition(p)?;
    let sq = p.mu.sqrt();
    let c = c_mu(p.mu) / (1.0 + sq / 2.0 + p.mu / 4.0);
    let e = eps.powf(p.kappa);
    let f = Field::from_fn(*grid, |x| {
        let mut t = transition(x);
        if x.abs() < 1.0 {
            t += p.wiggle * (2.0 * std::f64::consts::PI * (x - p.xi0)).sin() * (1.0 - x * x).powi(3);
        }
        t * (1.0 - e * c * (-sq * smooth_abs(x) / 2.0).exp())
    });
    single_zero(&f, p.xi0)?;
    Ok(f)
}

fn transition(p: &GeneralParams) -> Result<impl Fn(f64) -> f64> {
    let (xi0, k, shape) = (p.xi0, p.steepness, p.shape);
    let r = 0.5f64.ln() / ((xi0 + 1.0) / 2.0).ln();
    let c = -xi0 / (1.0 - xi0 * xi0);
    if shape == TransitionShape::Quintic && !(2.0 * c.abs() < 1.0) {
        return Err(Error::InvalidInitialData(format!("quintic transition needs |xi0| < sqrt(2) - 1, got {xi0}")));
    }
    Ok(move |x: f64| match shape {
        TransitionShape::Quintic => {
            let x = x.clamp(-1.0, 1.0);
            let z = ((x + c * (1.0 - x * x) + 1.0) / 2.0).clamp(0.0, 1.0);
            2.0 * z * z * z * (10.0 - 15.0 * z + 6.0 * z * z) - 1.0
        }
        TransitionShape::Flat => 2.0 * flat_step(((x + 1.0) / 2.0).clamp(0.0, 1.0).powf(r), k) - 1.0,
    })
}

/// Checks that `f` changes sign exactly once, next to `xi0`.
fn single_zero(f: &Field, xi0: f64) -> Result<()> {
    let changes: Vec<usize> = f.values.windows(2).enumerate().filter(|(_, w)| w[0] * w[1] <= 0.0 && w[0] != w[1]).map(|(i, _)| i).collect();
    let nonpos_then_pos = changes.len() == 1 || (changes.len() == 2 && changes[1] == changes[0] + 1);
    if !nonpos_then_pos {
        return Err(Error::InvalidInitialData(format!("{} sign changes", changes.len())));
    }
    let g = f.grid;
    let i = changes[0];
    if (g.x(i) - xi0).abs() > 2.0 * g.dx() && (g.x(i + 1) - xi0).abs() > 2.0 * g.dx() {
        return Err(Error::InvalidInitialData(format!("sign change at {} instead of {xi0}", g.x(i))));
    }
    Ok(())
}

fn shifted_initial(base: &Field, profile: &StandingWaveProfile, eps: f64, p: &SuperSubParams, sign: f64) -> Result<Field> {
    let g = base.grid;
    let shift = p.c * eps.powf(p.beta_bar);
    let lift = sign * p.c_prime * eps.powf(p.kappa);
    let wave = profile.rescale(&g, eps, p.xi0 - sign * shift);
    let values = (0..g.len())
        .map(|i| {
            let x = g.x(i);
            let c1 = cutoff(x, 1.0, 2.0);
            let c2 = cutoff(x, 2.0, 3.0);
            (1.0 - c1) * (base.values[i] + lift * c2) + c1 * (wave.values[i] + lift)
        })
        .collect();
    let f = Field::from_values(g, values)?;
    let violated = f.values.iter().zip(&base.values).position(|(a, b)| sign * (a - b) < 0.0);
    if let Some(i) = violated {
        return Err(Error::InvalidInitialData(format!(
            "{} datum does not dominate the base at x = {}",
            if sign > 0.0 { "super" } else { "sub" },
            g.x(i)
        )));
    }
    Ok(f)
}

/// Super datum: base outside `[-2, 2]`, the wave shifted left by
/// `C eps^beta_bar` and lifted by `C' eps^kappa` inside `[-1, 1]`, blended by
/// the cutoffs in between.
pub fn super_initial(base: &Field, profile: &StandingWaveProfile, eps: f64, p: &SuperSubParams) -> Result<Field> {
    shifted_initial(base, profile, eps, p, 1.0)
}

/// Mirror image of [`super_initial`].
pub fn sub_initial(base: &Field, profile: &StandingWaveProfile, eps: f64, p: &SuperSubParams) -> Result<Field> {
    shifted_initial(base, profile, eps, p, -1.0)
}

/// Builds initial data of the requested kind. `profile` is needed for the
/// kinds that involve the standing wave.
pub fn make_initial_data(
    kind: &InitialKind,
    grid: &Grid1D,
    eps: f64,
    profile: Option<&StandingWaveProfile>,
) -> Result<Field> {
    let need = || profile.ok_or_else(|| Error::InvalidParameter("this initial datum needs the standing wave".into()));
    match kind {
        InitialKind::ProfileOnManifold { eta } => Ok(need()?.rescale(grid, eps, *eta)),
        InitialKind::SmoothedStep { xi0, width } => {
            if !(*width > 0.0) {
                return Err(Error::InvalidInitialData("step width must be positive".into()));
            }
            Ok(Field::from_fn(*grid, |x| ((x - xi0) / width).tanh()))
        }
        InitialKind::General(p) => general_initial(grid, eps, p),
        InitialKind::Super { base, params } => super_initial(base, need()?, eps, params),
        InitialKind::Sub { base, params } => sub_initial(base, need()?, eps, params),
    }
}
