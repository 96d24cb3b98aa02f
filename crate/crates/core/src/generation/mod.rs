//! Generation of an interface: the reaction flow, the barrier `h`, the
//! super/sub solutions built from them and the time a solution needs to
//! settle near the standing-wave manifold.

pub mod barrier;
pub mod flow;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fermi::dist_to_manifold;
use crate::numerics::Field;
use crate::spde::Trajectory;
use crate::standing_wave::StandingWaveProfile;

pub use barrier::{build_barrier, verify_barrier, BarrierCheck, BarrierFunction, BarrierParams, BarrierReport};
pub use flow::{ode_threshold_times, FlowState, OdeFlow, ThresholdReport};

/// `w_-(t) <= w_+(t)` with `w_±(t, x) = Y(t / eps, u0(x) ± eps h(x) (e^{mu t / eps} - 1))`.
pub fn super_sub_solutions(flow: &OdeFlow, h: &BarrierFunction, u0: &Field, eps: f64, t: f64) -> Result<(Field, Field)> {
    if u0.grid != h.grid {
        return Err(Error::InvalidParameter("initial datum and barrier on different grids".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time must be nonnegative, got {t}")));
    }
    let growth = eps * (h.params.mu * t / eps).exp_m1();
    let tau = t / eps;
    let pairs: Vec<(f64, f64)> = u0
        .values
        .par_iter()
        .zip(h.h.values.par_iter())
        .map(|(&u, &hv)| Ok((flow.flow_y(tau, u - growth * hv)?, flow.flow_y(tau, u + growth * hv)?)))
        .collect::<Result<_>>()?;
    let (lo, hi) = pairs.into_iter().unzip();
    Ok((Field::from_values(u0.grid, lo)?, Field::from_values(u0.grid, hi)?))
}

/// Earliest recorded time at which the distance to the manifold is at most
/// `threshold`.
pub fn first_generation_time(traj: &Trajectory, profile: &StandingWaveProfile, eps: f64, threshold: f64) -> Option<f64> {
    traj.times
        .iter()
        .zip(&traj.fields)
        .find(|(_, u)| dist_to_manifold(u, profile, eps) <= threshold)
        .map(|(&t, _)| t)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingFit {
    pub c_hat: f64,
    /// Centered coefficient of determination.
    pub r_squared: f64,
    /// `1 - SS_res / sum t*^2`, the through-origin variant.
    pub r_squared_uncentered: f64,
}

/// Least squares fit of `t* = C eps |log eps|` through the origin.
pub fn fit_generation_scaling(pairs: &[(f64, f64)]) -> Result<ScalingFit> {
    let mut eps: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 3 {
        return Err(Error::InsufficientData(format!("{} distinct eps values, need 3", eps.len())));
    }
    if pairs.iter().any(|&(e, t)| !(e > 0.0 && e < 1.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter("eps must lie in (0, 1) and times must be finite".into()));
    }
    let xs: Vec<f64> = pairs.iter().map(|&(e, _)| e * e.ln().abs()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let c_hat = sxy / sxx;
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - c_hat * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else if ss_res == 0.0 { 1.0 } else { 0.0 };
    let syy: f64 = ys.iter().map(|y| y * y).sum();
    let r_squared_uncentered = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(ScalingFit { c_hat, r_squared, r_squared_uncentered })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid1D;
    use crate::reaction::ReactionSpec;
    use crate::spde::initial::{general_initial, GeneralParams};

    #[test]
    fn exact_scaling_fit() {
        let pairs: Vec<_> = [0.04, 0.02, 0.01, 0.005].iter().map(|&e: &f64| (e, 0.7 * e * e.ln().abs())).collect();
        let fit = fit_generation_scaling(&pairs).unwrap();
        assert!((fit.c_hat - 0.7).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(matches!(fit_generation_scaling(&pairs[..2]), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn sandwich_at_time_zero_and_ordering() {
        let eps = 0.01;
        let g = Grid1D::new(4.0, 640).unwrap();
        let u0 = general_initial(&g, eps, &GeneralParams::default()).unwrap();
        let b = build_barrier(&BarrierParams::new(eps, 1.0, 1.0), &g).unwrap();
        let flow = OdeFlow::new(ReactionSpec::cubic());
        let (lo, hi) = super_sub_solutions(&flow, &b, &u0, eps, 0.0).unwrap();
        assert_eq!(lo.values, u0.values);
        assert_eq!(hi.values, u0.values);
        let (lo, hi) = super_sub_solutions(&flow, &b, &u0, eps, 0.2 * eps).unwrap();
        assert!(lo.values.iter().zip(&hi.values).all(|(a, b)| a <= b));
    }
}
