//! Deterministic campaigns: the super/sub sandwich and the generation-time
//! scaling fit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermi::dist_to_manifold;
use crate::generation::barrier::differences;
use crate::generation::{
    build_barrier, fit_generation_scaling, super_sub_solutions, verify_barrier, BarrierParams, BarrierReport, OdeFlow,
    ScalingFit,
};
use crate::numerics::{Field, Grid1D};
use crate::reaction::ReactionSpec;
use crate::spde::initial::{general_initial, GeneralParams};
use crate::spde::{simulate_with, SimConfig};
use crate::standing_wave::StandingWaveProfile;

/// Five interface-forming data with `C0` small enough for the flow window.
pub fn default_sandwich_cases() -> Vec<GeneralParams> {
    let d = GeneralParams::default();
    vec![
        d,
        GeneralParams { xi0: 0.2, ..d },
        GeneralParams { xi0: 0.1, wiggle: -0.05, ..d },
        GeneralParams { xi0: -0.15, ..d },
        GeneralParams { wiggle: 0.03, ..d },
    ]
}

/// `C0 = max(1, |u0|_inf + |u0'|_inf + |u0''|_inf)` from finite differences.
pub fn data_c0(u0: &Field) -> f64 {
    let (d1, d2) = differences(u0);
    (u0.sup_norm() + d1.sup_norm() + d2.sup_norm()).max(1.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichSpec {
    pub eps: f64,
    pub half_width: f64,
    /// `C1 mu`; the horizon is `C1 eps |log eps|`.
    pub c1_mu: f64,
    /// Recorded times in `(0, C1 eps |log eps|]`.
    pub n_times: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SandwichOutcome {
    pub eps: f64,
    pub case: GeneralParams,
    pub c0: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_max: f64,
    /// `max(w_- - u, u - w_+)` over nodes and recorded times.
    pub worst_violation: f64,
    pub tolerance: f64,
    pub barrier: BarrierReport,
}

impl SandwichOutcome {
    pub fn holds(&self) -> bool {
        self.worst_violation <= self.tolerance
    }
}

/// Solves the cubic equation with `C0` taken from the datum and compares it
/// against `w_±` at every recorded time.
pub fn sandwich_check(spec: &SandwichSpec, case: &GeneralParams) -> Result<SandwichOutcome> {
    let eps = spec.eps;
    let grid = Grid1D::for_eps(spec.half_width, eps)?;
    let u0 = general_initial(&grid, eps, case)?;
    let c0 = data_c0(&u0);
    let reaction = ReactionSpec::cubic_with_c0(c0);
    let mu = reaction.constants()?.mu;
    let params = BarrierParams { c1: spec.c1_mu / mu, ..BarrierParams::new(eps, c0, mu) };
    let barrier = build_barrier(&params, &grid)?;
    let report = verify_barrier(&barrier, &u0, params.c1, eps, spec.n_times)?;
    let t_max = report.t_max;
    let flow = OdeFlow::new(reaction.clone());
    let mut cfg = SimConfig::deterministic(eps, reaction, grid, t_max);
    let n = spec.n_times.max(1);
    cfg.record_times = (1..=n).map(|k| t_max * k as f64 / n as f64).collect();
    let mut worst = f64::NEG_INFINITY;
    let mut failure = None;
    simulate_with(&cfg, &u0, |t, u| {
        match super_sub_solutions(&flow, &barrier, &u0, eps, t) {
            Ok((lo, hi)) => {
                for ((l, h), v) in lo.values.iter().zip(&hi.values).zip(&u.values) {
                    worst = worst.max(l - v).max(v - h);
                }
            }
            Err(e) => failure = Some(e),
        }
        Ok(())
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(SandwichOutcome {
        eps,
        case: *case,
        c0,
        dx: grid.dx(),
        dt: cfg.dt,
        t_max,
        worst_violation: worst,
        tolerance: 10.0 * (grid.dx() * grid.dx() + cfg.dt),
        barrier: report,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationSpec {
    pub eps_list: Vec<f64>,
    pub half_width: f64,
    /// Time step as a multiple of `eps`.
    pub dt_factor: f64,
    /// Threshold exponent: generation ends once the distance is `<= eps^kappa_prime`.
    pub kappa_prime: f64,
    /// Horizon as a multiple of `eps |log eps|`.
    pub horizon: f64,
    /// Distance samples over the horizon.
    pub n_records: usize,
    pub datum: GeneralParams,
}

impl Default for GenerationSpec {
    fn default() -> Self {
        Self {
            eps_list: vec![0.04, 0.02, 0.01, 0.005],
            half_width: 4.0,
            dt_factor: 0.01,
            kappa_prime: 1.05,
            horizon: 2.0,
            n_records: 400,
            datum: GeneralParams::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationRow {
    pub eps: f64,
    pub threshold: f64,
    pub t_star: Option<f64>,
    /// `t* / (eps |log eps|)`.
    pub ratio: Option<f64>,
    pub final_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenerationReport {
    pub rows: Vec<GenerationRow>,
    pub fit: Option<ScalingFit>,
}

/// First time a deterministic run from `spec.datum` is within
/// `eps^kappa_prime` of the manifold, for each `eps`, and the fit of those
/// times against `eps |log eps|`.
pub fn generation_scaling(
    spec: &GenerationSpec,
    r: &ReactionSpec,
    profile: &StandingWaveProfile,
) -> Result<GenerationReport> {
    if spec.eps_list.is_empty() || spec.n_records == 0 {
        return Err(Error::Config("generation scaling needs eps values and records".into()));
    }
    let rows = spec
        .eps_list
        .par_iter()
        .map(|&eps| {
            let grid = Grid1D::for_eps(spec.half_width, eps)?;
            let u0 = general_initial(&grid, eps, &spec.datum)?;
            let t_end = spec.horizon * eps * eps.ln().abs();
            let mut cfg = SimConfig::deterministic(eps, r.clone(), grid, t_end);
            cfg.dt = cfg.dt.min(spec.dt_factor * eps);
            cfg.record_times = (0..=spec.n_records).map(|k| t_end * k as f64 / spec.n_records as f64).collect();
            let threshold = eps.powf(spec.kappa_prime);
            let mut t_star = None;
            let mut last = f64::NAN;
            simulate_with(&cfg, &u0, |t, u| {
                last = dist_to_manifold(u, profile, eps);
                if t_star.is_none() && last <= threshold {
                    t_star = Some(t);
                }
                Ok(())
            })?;
            Ok(GenerationRow {
                eps,
                threshold,
                t_star,
                ratio: t_star.map(|t| t / (eps * eps.ln().abs())),
                final_distance: last,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.t_star.map(|t| (r.eps, t))).collect();
    let fit = fit_generation_scaling(&pairs).ok();
    Ok(GenerationReport { rows, fit })
}
