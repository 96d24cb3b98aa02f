//! Monte Carlo ensembles of the SPDE: interface paths, shared-noise ordered
//! pairs, the stochastic heat equation and noisy/deterministic twins.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermi::{chi, default_radius, path_point};
use crate::harness::stats::quantile;
use crate::numerics::{Field, Grid1D, RngStream};
use crate::path::PathRecord;
use crate::reaction::ReactionSpec;
use crate::spde::{default_bump, simulate_with, NoiseSpec, SimConfig};
use crate::standing_wave::StandingWaveProfile;

/// Path that failed mechanically and was left out of the statistics.
#[derive(Debug, Clone, Serialize)]
pub struct PathFailure {
    pub path_id: u64,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleRun<T> {
    pub completed: Vec<T>,
    pub failures: Vec<PathFailure>,
}

impl<T> EnsembleRun<T> {
    pub fn n_paths(&self) -> usize {
        self.completed.len() + self.failures.len()
    }

    /// Fails when more than 5% of the paths failed.
    pub fn check_failure_rate(&self) -> Result<()> {
        let n = self.n_paths();
        if 20 * self.failures.len() > n {
            return Err(Error::TooManyFailures { failed: self.failures.len(), total: n });
        }
        Ok(())
    }
}

fn run_paths<T: Send>(n_paths: usize, f: impl Fn(u64) -> Result<T> + Sync) -> EnsembleRun<T> {
    let results: Vec<(u64, Result<T>)> = (0..n_paths as u64).into_par_iter().map(|i| (i, f(i))).collect();
    let mut run = EnsembleRun { completed: Vec::new(), failures: Vec::new() };
    for (i, r) in results {
        match r {
            Ok(v) => run.completed.push(v),
            Err(e) => {
                log::warn!("path {i} quarantined: {e}");
                run.failures.push(PathFailure { path_id: i, error: e.to_string() });
            }
        }
    }
    run
}

/// Time step `eps * dt_factor`, capped by the stability rule.
pub fn ensemble_dt(eps: f64, r: &ReactionSpec, dt_factor: f64) -> f64 {
    (eps * dt_factor).min(crate::spde::stable_dt(eps, r))
}

/// Interface paths of the SPDE started on the manifold at `xi0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterfaceEnsembleSpec {
    pub eps: f64,
    pub gamma: f64,
    pub half_width: f64,
    /// Peak of the bump amplitude `a`.
    pub amplitude: f64,
    pub xi0: f64,
    /// Horizon in rescaled time.
    pub t_rescaled: f64,
    pub n_slices: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub dt_factor: f64,
}

impl InterfaceEnsembleSpec {
    /// Rescaled recording lattice `k T / n_slices`.
    pub fn lattice(&self) -> Vec<f64> {
        (0..=self.n_slices).map(|k| self.t_rescaled * k as f64 / self.n_slices as f64).collect()
    }

    /// Factor `eps^{2 gamma + 1/2}` from original to rescaled time.
    pub fn time_scale(&self) -> f64 {
        self.eps.powf(2.0 * self.gamma + 0.5)
    }
}

/// Interface path of one SPDE run and `|u(T) - chi_xi(T)|_{L2}` at its end.
#[derive(Debug, Clone, Serialize)]
pub struct SpdePath {
    pub record: PathRecord,
    /// NaN when the last slice has no valid position.
    pub chi_gap: f64,
}

/// Simulates `n_paths` SPDE runs and projects each recorded slice. Path `i`
/// uses stream `i` of `seed`.
pub fn spde_interface_paths(
    spec: &InterfaceEnsembleSpec,
    profile: &StandingWaveProfile,
    r: &ReactionSpec,
) -> Result<EnsembleRun<SpdePath>> {
    if spec.n_slices == 0 || !(spec.t_rescaled > 0.0) {
        return Err(Error::InvalidParameter("need at least one slice and a positive horizon".into()));
    }
    let grid = Grid1D::for_eps(spec.half_width, spec.eps)?;
    let scale = spec.time_scale();
    let lattice = spec.lattice();
    let mut cfg = SimConfig::deterministic(spec.eps, r.clone(), grid, spec.t_rescaled / scale);
    cfg.dt = ensemble_dt(spec.eps, r, spec.dt_factor);
    cfg.record_times = lattice.iter().map(|t| t / scale).collect();
    let noise = NoiseSpec::new(spec.gamma, default_bump(&grid, spec.amplitude));
    let cfg = cfg.with_noise(noise, RngStream::new(spec.seed, 0));
    cfg.validate()?;
    let u0 = profile.rescale(&grid, spec.eps, spec.xi0);
    let radius = default_radius(spec.eps);
    Ok(run_paths(spec.n_paths, |i| {
        let mut c = cfg.clone();
        c.stream = RngStream::new(spec.seed, i);
        let mut rec = PathRecord::new(i);
        let mut k = 0;
        let mut chi_gap = f64::NAN;
        simulate_with(&c, &u0, |_, u| {
            let t = *lattice.get(k).ok_or_else(|| Error::InvalidParameter("record lattice overrun".into()))?;
            let p = path_point(u, profile, spec.eps, t, radius);
            if k + 1 == lattice.len() && p.valid {
                chi_gap = u.sub(&chi(&u.grid, p.position)).l2_norm();
            }
            rec.points.push(p);
            k += 1;
            Ok(())
        })?;
        if rec.points.len() != lattice.len() {
            return Err(Error::InvalidParameter(format!(
                "recorded {} of {} slices; the lattice is finer than dt",
                rec.points.len(),
                lattice.len()
            )));
        }
        Ok(SpdePath { record: rec, chi_gap })
    }))
}

/// Two solutions driven by the same noise from ordered initial data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderedPairSpec {
    pub eps: f64,
    pub gamma: f64,
    pub half_width: f64,
    pub amplitude: f64,
    /// Original-time horizon.
    pub t_end: f64,
    pub n_records: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Interface positions of the lower and upper initial waves; the lower
    /// one must lie to the right.
    pub lower_xi: f64,
    pub upper_xi: f64,
}

/// Outcome of one ordered pair.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairOutcome {
    pub path_id: u64,
    /// `max (lower - upper)` over nodes and recorded times.
    pub worst_violation: f64,
}

/// Runs `lower` and `upper` reactions from `m_{eps, lower_xi} <= m_{eps, upper_xi}`
/// with a shared stream per pair.
pub fn ordered_pairs(
    spec: &OrderedPairSpec,
    profile: &StandingWaveProfile,
    lower: &ReactionSpec,
    upper: &ReactionSpec,
) -> Result<EnsembleRun<PairOutcome>> {
    if !(spec.lower_xi >= spec.upper_xi) {
        return Err(Error::InvalidParameter("the lower wave must sit to the right of the upper one".into()));
    }
    let grid = Grid1D::for_eps(spec.half_width, spec.eps)?;
    let noise = NoiseSpec::new(spec.gamma, default_bump(&grid, spec.amplitude));
    let dt = crate::spde::stable_dt(spec.eps, lower).min(crate::spde::stable_dt(spec.eps, upper));
    let times: Vec<f64> = (1..=spec.n_records).map(|k| spec.t_end * k as f64 / spec.n_records as f64).collect();
    let make = |r: &ReactionSpec| {
        let mut c = SimConfig::deterministic(spec.eps, r.clone(), grid, spec.t_end);
        c.dt = dt;
        c.record_times = times.clone();
        c.with_noise(noise.clone(), RngStream::new(spec.seed, 0))
    };
    let (cl, cu) = (make(lower), make(upper));
    cl.validate()?;
    cu.validate()?;
    let u_lo = profile.rescale(&grid, spec.eps, spec.lower_xi);
    let u_hi = profile.rescale(&grid, spec.eps, spec.upper_xi);
    Ok(run_paths(spec.n_paths, |i| {
        let stream = RngStream::new(spec.seed, i);
        let mut a = Vec::new();
        simulate_with(&SimConfig { stream, ..cl.clone() }, &u_lo, |_, u| {
            a.push(u.clone());
            Ok(())
        })?;
        let mut worst = f64::NEG_INFINITY;
        let mut k = 0;
        simulate_with(&SimConfig { stream, ..cu.clone() }, &u_hi, |_, u| {
            for (x, y) in a[k].values.iter().zip(&u.values) {
                worst = worst.max(x - y);
            }
            k += 1;
            Ok(())
        })?;
        Ok(PairOutcome { path_id: i, worst_violation: worst })
    }))
}

/// Reaction-free stochastic heat equation from 0 on `[-L, L]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseAuditSpec {
    pub eps_list: Vec<f64>,
    pub gamma: f64,
    pub half_width: f64,
    pub amplitude: f64,
    pub t_end: f64,
    pub n_paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseAuditRow {
    pub eps: f64,
    pub dx: f64,
    pub dt: f64,
    /// `sup_{t, x} |u_1| / eps^gamma` per path.
    pub normalized_sups: Vec<f64>,
    pub median: f64,
    pub q90: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseAuditReport {
    pub rows: Vec<NoiseAuditRow>,
    /// `max / min - 1` of the median across `eps`.
    pub median_spread: f64,
    /// `max / min - 1` of the 90% quantile across `eps`.
    pub q90_spread: f64,
    pub failures: Vec<PathFailure>,
}

fn spread(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = v.fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min - 1.0
    } else if max == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Sup norms of `du = u_xx dt + eps^gamma a dW` over `[0, t_end]`, sampled
/// at every step, normalized by `eps^gamma`.
pub fn noise_audit(spec: &NoiseAuditSpec) -> Result<NoiseAuditReport> {
    if spec.eps_list.is_empty() {
        return Err(Error::Config("noise audit needs at least one eps".into()));
    }
    let heat = ReactionSpec::linear(0.0);
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (e_idx, &eps) in spec.eps_list.iter().enumerate() {
        let grid = Grid1D::for_eps(spec.half_width, eps)?;
        let mut cfg = SimConfig::deterministic(eps, heat.clone(), grid, spec.t_end);
        cfg.boundary = Some((0.0, 0.0));
        let n = cfg.n_steps();
        cfg.record_times = (1..=n).map(|k| k as f64 * cfg.dt).collect();
        let noise = NoiseSpec::new(spec.gamma, default_bump(&grid, spec.amplitude));
        let cfg = cfg.with_noise(noise, RngStream::new(spec.seed, 0));
        cfg.validate()?;
        let u0 = Field::zeros(grid);
        let norm = eps.powf(spec.gamma);
        let run = run_paths(spec.n_paths, |i| {
            let stream = RngStream::new(spec.seed, ((e_idx as u64) << 32) + i);
            let mut sup = 0.0_f64;
            simulate_with(&SimConfig { stream, ..cfg.clone() }, &u0, |_, u| {
                sup = sup.max(u.sup_norm());
                Ok(())
            })?;
            Ok(sup / norm)
        });
        failures.extend(run.failures);
        let mut sups = run.completed;
        let mut sorted = sups.clone();
        sorted.sort_by(f64::total_cmp);
        sups.shrink_to_fit();
        rows.push(NoiseAuditRow {
            eps,
            dx: grid.dx(),
            dt: cfg.dt,
            median: quantile(&sorted, 0.5),
            q90: quantile(&sorted, 0.9),
            normalized_sups: sups,
        });
    }
    Ok(NoiseAuditReport {
        median_spread: spread(rows.iter().map(|r| r.median)),
        q90_spread: spread(rows.iter().map(|r| r.q90)),
        rows,
        failures,
    })
}

/// L² gap between a noisy run and its deterministic twin, with the noise
/// magnitude of the same realization.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TwinOutcome {
    pub path_id: u64,
    /// `sup_t |u_noisy - u_det|_{L2}`.
    pub gap: f64,
    /// `sup_{t, x} |u_1| / eps^gamma` of the same noise.
    pub noise_factor: f64,
}

/// For each path: the noisy run, the deterministic run and the stochastic
/// heat solution driven by the same increments, all from `u0`
/// (the heat solution from 0), over `[0, t_end]`.
pub fn noisy_twins(
    eps: f64,
    gamma: f64,
    r: &ReactionSpec,
    u0: &Field,
    amplitude: f64,
    t_end: f64,
    n_paths: usize,
    seed: u64,
) -> Result<EnsembleRun<TwinOutcome>> {
    let grid = u0.grid;
    let mut det = SimConfig::deterministic(eps, r.clone(), grid, t_end);
    let n = det.n_steps();
    det.record_times = (0..=n).map(|k| k as f64 * det.dt).collect();
    det.validate()?;
    let mut reference = Vec::new();
    simulate_with(&det, u0, |_, u| {
        reference.push(u.clone());
        Ok(())
    })?;
    let noise = NoiseSpec::new(gamma, default_bump(&grid, amplitude));
    let noisy = det.clone().with_noise(noise.clone(), RngStream::new(seed, 0));
    let mut heat = SimConfig { reaction: ReactionSpec::linear(0.0), boundary: Some((0.0, 0.0)), ..noisy.clone() };
    heat.dt = noisy.dt;
    let zero = Field::zeros(grid);
    let norm = eps.powf(gamma);
    let run = run_paths(n_paths, |i| {
        let stream = RngStream::new(seed, i);
        let mut gap = 0.0_f64;
        let mut k = 0;
        simulate_with(&SimConfig { stream, ..noisy.clone() }, u0, |_, u| {
            gap = gap.max(u.sub(&reference[k]).l2_norm());
            k += 1;
            Ok(())
        })?;
        let mut sup = 0.0_f64;
        simulate_with(&SimConfig { stream, ..heat.clone() }, &zero, |_, u| {
            sup = sup.max(u.sup_norm());
            Ok(())
        })?;
        Ok(TwinOutcome { path_id: i, gap, noise_factor: sup / norm })
    });
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_audit_is_zero() {
        let spec = NoiseAuditSpec {
            eps_list: vec![0.05],
            gamma: 1.0,
            half_width: 3.0,
            amplitude: 0.0,
            t_end: 0.1,
            n_paths: 3,
            seed: 7,
        };
        let rep = noise_audit(&spec).unwrap();
        assert!(rep.rows[0].normalized_sups.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn failure_rate_threshold() {
        let mut run: EnsembleRun<()> = EnsembleRun { completed: vec![(); 95], failures: Vec::new() };
        for i in 0..5 {
            run.failures.push(PathFailure { path_id: i, error: String::new() });
        }
        assert!(run.check_failure_rate().is_ok());
        run.failures.push(PathFailure { path_id: 9, error: String::new() });
        assert!(run.check_failure_rate().is_err());
    }
}
