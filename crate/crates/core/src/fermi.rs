//! Projection onto the manifold of translated standing waves
//! `M = { m((x - eta) / sqrt(eps)) }`.

use crate::error::{Error, Result};
use crate::numerics::{h1_norm, Field};
use crate::path::{PathPoint, PathRecord};
use crate::spde::Trajectory;
use crate::standing_wave::StandingWaveProfile;

/// Interface coordinate and remainder of a field.
#[derive(Debug, Clone)]
pub struct FermiDecomposition {
    pub eta: f64,
    pub distance: f64,
    pub remainder: Field,
    pub h1_of_remainder: f64,
    /// `<remainder, d/dx m_eta>` at the returned `eta`.
    pub orthogonality: f64,
}

/// Squared distance and orthogonality residual for one `eta`.
struct Objective<'a> {
    u: &'a Field,
    profile: &'a StandingWaveProfile,
    inv_sqrt_eps: f64,
}

impl Objective<'_> {
    /// `(g, h, |m_eta'|^2)` with `g = |u - m_eta|^2` and
    /// `h = <u - m_eta, d/dx m_eta>`.
    fn eval(&self, eta: f64) -> (f64, f64, f64) {
        let grid = self.u.grid;
        let s = self.inv_sqrt_eps;
        let (mut g, mut h, mut nn) = (0.0, 0.0, 0.0);
        for (i, &v) in self.u.values.iter().enumerate() {
            let w = grid.weight(i);
            let (m, dm) = self.profile.eval(s * (grid.x(i) - eta));
            let r = v - m;
            let d = s * dm;
            g += w * r * r;
            h += w * r * d;
            nn += w * d * d;
        }
        (g, h, nn)
    }

    fn g(&self, eta: f64) -> f64 {
        self.eval(eta).0
    }
}

fn scan(obj: &Objective, half_width: f64, stride: f64) -> Vec<(f64, f64)> {
    let n = (2.0 * half_width / stride).round() as usize;
    (0..=n)
        .map(|k| {
            let eta = -half_width + 2.0 * half_width * k as f64 / n as f64;
            (eta, obj.g(eta))
        })
        .collect()
}

/// Safeguarded Gauss-Newton on `h(eta) = 0`, kept inside `[lo, hi]`.
fn refine(obj: &Objective, start: f64, lo: f64, hi: f64) -> f64 {
    let mut eta = start;
    let (mut g, mut h, mut nn) = obj.eval(eta);
    for _ in 0..60 {
        if nn <= 0.0 || h.abs() <= 1e-12 * nn.sqrt() {
            break;
        }
        // Moving the wave right lowers m_eta, so g'(eta) = 2h.
        let mut step = -h / nn;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = (eta + step).clamp(lo, hi);
            let (g2, h2, nn2) = obj.eval(cand);
            if g2 <= g {
                eta = cand;
                g = g2;
                h = h2;
                nn = nn2;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted || step.abs() < 1e-15 {
            break;
        }
    }
    eta
}

fn local_minima(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let n = samples.len();
    let mut out = Vec::new();
    for k in 0..n {
        let left = k == 0 || samples[k].1 < samples[k - 1].1;
        let right = k + 1 == n || samples[k].1 <= samples[k + 1].1;
        if left && right {
            out.push(samples[k]);
        }
    }
    out
}

fn decompose(u: &Field, profile: &StandingWaveProfile, eps: f64, eta: f64) -> FermiDecomposition {
    let m = profile.rescale(&u.grid, eps, eta);
    let dm = profile.rescale_gradient(&u.grid, eps, eta);
    let remainder = u.sub(&m);
    FermiDecomposition {
        eta,
        distance: remainder.l2_norm(),
        h1_of_remainder: h1_norm(&remainder),
        orthogonality: remainder.inner(&dm),
        remainder,
    }
}

/// Closest point of the manifold: coarse scan over `eta` in `[-L, L]` with
/// stride `sqrt(eps)/4`, then Gauss-Newton on the orthogonality condition.
/// Fails when two local minima of the scan are within 1% of each other.
pub fn project(u: &Field, profile: &StandingWaveProfile, eps: f64) -> Result<FermiDecomposition> {
    let obj = Objective { u, profile, inv_sqrt_eps: 1.0 / eps.sqrt() };
    let stride = eps.sqrt() / 4.0;
    let samples = scan(&obj, u.grid.half_width, stride);
    let mut minima = local_minima(&samples);
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));
    let best = minima[0];
    if let Some(second) = minima.get(1) {
        if second.1 - best.1 <= 0.01 * second.1.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NonUniqueProjection { first: best.0, second: second.0 });
        }
    }
    let eta = refine(&obj, best.0, best.0 - stride, best.0 + stride);
    Ok(decompose(u, profile, eps, eta))
}

/// `inf_eta |u - m_eta|`, without the uniqueness requirement.
pub fn dist_to_manifold(u: &Field, profile: &StandingWaveProfile, eps: f64) -> f64 {
    let obj = Objective { u, profile, inv_sqrt_eps: 1.0 / eps.sqrt() };
    let stride = eps.sqrt() / 4.0;
    let samples = scan(&obj, u.grid.half_width, stride);
    let best = samples.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    let eta = refine(&obj, best.0, best.0 - stride, best.0 + stride);
    obj.g(eta).min(best.1).max(0.0).sqrt()
}

/// Projects one recorded slice into a path point at rescaled time `t`.
/// Projection failures and distances above `radius` mark the point invalid.
pub fn path_point(u: &Field, profile: &StandingWaveProfile, eps: f64, t: f64, radius: f64) -> PathPoint {
    match project(u, profile, eps) {
        Ok(d) => PathPoint {
            t,
            position: d.eta,
            distance: Some(d.distance),
            h1_remainder: Some(d.h1_of_remainder),
            valid: d.distance <= radius,
        },
        Err(_) => PathPoint { t, position: f64::NAN, distance: None, h1_remainder: None, valid: false },
    }
}

/// Default tube radius `eps^{1/4} / 2`, the distance a unit shift of the
/// wave in its own length scale produces.
pub fn default_radius(eps: f64) -> f64 {
    0.5 * eps.powf(0.25)
}

/// Interface path of a trajectory in rescaled time `eps^{2 gamma + 1/2} t`.
pub fn interface_path(traj: &Trajectory, profile: &StandingWaveProfile, eps: f64, gamma: f64, radius: f64) -> PathRecord {
    let scale = eps.powf(2.0 * gamma + 0.5);
    let mut rec = PathRecord::new(traj.meta.stream.stream);
    for (t, u) in traj.times.iter().zip(&traj.fields) {
        rec.points.push(path_point(u, profile, eps, scale * t, radius));
    }
    rec
}

/// Limit profile `chi_xi`: -1 left of `xi`, +1 right of it.
pub fn chi(grid: &crate::numerics::Grid1D, xi: f64) -> Field {
    Field::from_fn(*grid, |x| if x < xi { -1.0 } else { 1.0 })
}
