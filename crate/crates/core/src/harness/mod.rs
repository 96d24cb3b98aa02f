//! Experiment orchestration: a JSON config, one pipeline per experiment
//! kind and an artifact directory with CSV tables and `summary.json`.

pub mod deterministic;
pub mod ensembles;
pub mod stats;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interface_sde::{compute_alpha1, compute_alpha2, default_operator, euler_maruyama, Amplitude, SdeCoefficients, SdeRun};
use crate::numerics::{Grid1D, RngStream};
use crate::path::{write_paths_csv, PathRecord};
use crate::reaction::{ReactionConfig, ReactionSpec};
use crate::spde::initial::GeneralParams;
use crate::standing_wave::{solve_standing_wave, StandingWaveProfile};

pub use deterministic::{
    data_c0, default_sandwich_cases, generation_scaling, sandwich_check, GenerationReport, GenerationRow, GenerationSpec,
    SandwichOutcome, SandwichSpec,
};
pub use ensembles::{
    noise_audit, noisy_twins, ordered_pairs, spde_interface_paths, EnsembleRun, InterfaceEnsembleSpec, NoiseAuditReport,
    NoiseAuditSpec, OrderedPairSpec, PairOutcome, PathFailure, SpdePath,
};
pub use stats::{compare_path_laws, increments, ks_two_sample, EnsembleStats, SliceStats, KS_LEVEL, MIN_KS_POINTS};

/// Version of the `summary.json` layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Half-width and spacing of the grid the standing wave is solved on.
pub const PROFILE_HALF_WIDTH: f64 = 30.0;
pub const PROFILE_DX: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GenerationScaling,
    SpdeVsSde,
    SandwichCheck,
    Coefficients,
    NoiseAudit,
}

/// Everything an experiment needs. Unknown keys are rejected; missing keys
/// take the defaults below.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub kind: ExperimentKind,
    pub reaction: ReactionConfig,
    pub eps: Vec<f64>,
    pub gamma: f64,
    /// Half-width `L` of the domain `[-L, L]`.
    pub half_width: f64,
    /// Time step `min(dt_factor eps, eps / (10 c_f))`.
    pub dt_factor: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Generation threshold exponent: distance `<= eps^kappa_prime`.
    pub kappa_prime: f64,
    /// Tolerance for `|u - chi_xi|_{L2}` at the end of the SPDE runs.
    pub delta: f64,
    /// Peak of the noise amplitude bump.
    pub amplitude: f64,
    pub xi0: f64,
    /// Rescaled horizon `T` and the number of slices of its lattice.
    pub t_rescaled: f64,
    pub n_slices: usize,
    /// Euler-Maruyama steps per lattice slice.
    pub sde_substeps: usize,
    /// `C1 mu` for the sandwich.
    pub c1_mu: f64,
    /// Sampled times of the sandwich horizon.
    pub n_times: usize,
    /// Initial data of the sandwich and generation runs; empty means the
    /// built-in set.
    pub cases: Vec<GeneralParams>,
    /// Original-time horizon of the noise audit.
    pub t_end: f64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            id: "experiment".into(),
            kind: ExperimentKind::Coefficients,
            reaction: ReactionConfig::default(),
            eps: vec![0.01],
            gamma: 1.0,
            half_width: 4.0,
            dt_factor: 0.1,
            n_paths: 100,
            seed: 0,
            kappa_prime: 1.05,
            delta: 0.75,
            amplitude: 1.0,
            xi0: 0.0,
            t_rescaled: 0.5,
            n_slices: 10,
            sde_substeps: 50,
            c1_mu: 0.25,
            n_times: 20,
            cases: Vec::new(),
            t_end: 1.0,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Checks every parameter the selected pipeline will use.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return Err(Error::Config(format!("invalid experiment id {:?}", self.id)));
        }
        if self.kind != ExperimentKind::Coefficients {
            if self.eps.is_empty() {
                return Err(Error::Config("the eps list is empty".into()));
            }
            for &e in &self.eps {
                if !(e > 0.0 && e < 1.0) {
                    return Err(Error::Config(format!("eps must lie in (0, 1), got {e}")));
                }
            }
        }
        let r = self.reaction.build()?;
        if !r.validate_conditions().all_passed() {
            return Err(Error::Config("the reaction fails the structural conditions".into()));
        }
        positive("half_width", self.half_width)?;
        positive("dt_factor", self.dt_factor)?;
        for &e in &self.eps {
            Grid1D::for_eps(self.half_width, e)?;
        }
        match self.kind {
            ExperimentKind::Coefficients => {}
            ExperimentKind::SandwichCheck => {
                if !r.is_cubic() {
                    return Err(Error::Config("the sandwich check uses the cubic reaction".into()));
                }
                if !(self.c1_mu > 0.0 && self.c1_mu < 1.0) || self.n_times == 0 {
                    return Err(Error::Config("need 0 < c1_mu < 1 and n_times >= 1".into()));
                }
            }
            ExperimentKind::GenerationScaling => {
                positive("kappa_prime", self.kappa_prime)?;
                if self.n_times == 0 {
                    return Err(Error::Config("n_times must be at least 1".into()));
                }
            }
            ExperimentKind::NoiseAudit => {
                positive("t_end", self.t_end)?;
                self.check_noise()?;
            }
            ExperimentKind::SpdeVsSde => {
                self.check_noise()?;
                positive("t_rescaled", self.t_rescaled)?;
                positive("delta", self.delta)?;
                if self.n_slices == 0 || self.sde_substeps == 0 {
                    return Err(Error::Config("n_slices and sde_substeps must be at least 1".into()));
                }
                if self.xi0.abs() >= self.half_width - 1.0 {
                    return Err(Error::Config("xi0 must stay clear of the boundary".into()));
                }
                for &e in &self.eps {
                    let spec = self.interface_spec(e, 0);
                    let dt = ensembles::ensemble_dt(e, &r, self.dt_factor);
                    let slice = self.t_rescaled / self.n_slices as f64 / spec.time_scale();
                    if slice < dt {
                        return Err(Error::Config(format!("at eps = {e} a lattice slice is shorter than dt")));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_noise(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::Config("need at least 2 paths".into()));
        }
        if !(self.gamma >= 0.0) || !(self.amplitude >= 0.0) {
            return Err(Error::Config("gamma and amplitude must be nonnegative".into()));
        }
        Ok(())
    }

    fn interface_spec(&self, eps: f64, index: usize) -> InterfaceEnsembleSpec {
        InterfaceEnsembleSpec {
            eps,
            gamma: self.gamma,
            half_width: self.half_width,
            amplitude: self.amplitude,
            xi0: self.xi0,
            t_rescaled: self.t_rescaled,
            n_slices: self.n_slices,
            n_paths: self.n_paths,
            seed: self.seed.wrapping_add(index as u64),
            dt_factor: self.dt_factor,
        }
    }
}

/// One verdict of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    pub note: String,
}

impl Criterion {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64, note: &str) -> Self {
        Self { name: name.into(), passed: value <= threshold, value, threshold, note: note.into() }
    }

    fn at_least(name: impl Into<String>, value: f64, threshold: f64, note: &str) -> Self {
        Self { name: name.into(), passed: value >= threshold, value, threshold, note: note.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub schema_version: u32,
    pub id: String,
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub criteria: Vec<Criterion>,
    pub n_paths: usize,
    pub paths_completed: usize,
    pub paths_failed: usize,
    pub failures: Vec<PathFailure>,
    /// Kind-specific results.
    pub details: serde_json::Value,
}

impl ExperimentSummary {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

fn profile_for(r: &ReactionSpec) -> Result<StandingWaveProfile> {
    solve_standing_wave(r, &Grid1D::with_max_spacing(PROFILE_HALF_WIDTH, PROFILE_DX)?)
}

/// Standing wave, operator and both SDE coefficients of a reaction.
pub fn coefficients(r: &ReactionSpec) -> Result<(StandingWaveProfile, SdeCoefficients)> {
    let profile = profile_for(r)?;
    let op = default_operator(&profile, r)?;
    let mut c = compute_alpha2(&op, &profile)?;
    c.alpha1 = compute_alpha1(&profile)?;
    Ok((profile, c))
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn tag(eps: f64) -> String {
    format!("{eps}").replace('.', "p")
}

/// Validates `cfg`, runs its pipeline and writes the artifacts into
/// `cfg.out_dir / cfg.id`. Nothing is written when validation fails.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let dir = cfg.out_dir.join(&cfg.id);
    fs::create_dir_all(&dir)?;
    let r = cfg.reaction.build()?;
    let mut summary = ExperimentSummary {
        schema_version: SCHEMA_VERSION,
        id: cfg.id.clone(),
        kind: cfg.kind,
        config: cfg.clone(),
        criteria: Vec::new(),
        n_paths: 0,
        paths_completed: 0,
        paths_failed: 0,
        failures: Vec::new(),
        details: serde_json::Value::Null,
    };
    match cfg.kind {
        ExperimentKind::Coefficients => run_coefficients(cfg, &r, &dir, &mut summary)?,
        ExperimentKind::SandwichCheck => run_sandwich(cfg, &dir, &mut summary)?,
        ExperimentKind::GenerationScaling => run_generation(cfg, &r, &dir, &mut summary)?,
        ExperimentKind::NoiseAudit => run_noise_audit(cfg, &dir, &mut summary)?,
        ExperimentKind::SpdeVsSde => run_spde_vs_sde(cfg, &r, &dir, &mut summary)?,
    }
    let mut out = create(&dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut out, &summary)?;
    writeln!(out)?;
    out.flush()?;
    Ok(summary)
}

fn run_coefficients(cfg: &ExperimentConfig, r: &ReactionSpec, dir: &Path, s: &mut ExperimentSummary) -> Result<()> {
    let _ = cfg;
    let (profile, c) = coefficients(r)?;
    profile.write_csv(create(dir, "standing_wave.csv")?)?;
    let mut w = csv::Writer::from_writer(create(dir, "alpha2_truncation.csv")?);
    w.write_record(["modes", "alpha2"])?;
    for (k, v) in &c.truncation_series {
        w.write_record([k.to_string(), v.to_string()])?;
    }
    w.flush()?;
    let monotone = c.truncation_series.windows(2).all(|p| p[1].1 >= p[0].1);
    s.criteria.push(Criterion::at_most("G00 symmetry", c.g00.abs(), 1e-6, "|G00| of the mode sum"));
    s.criteria.push(Criterion {
        name: "monotone truncation".into(),
        passed: monotone,
        value: c.truncation_series.last().map(|p| p.1).unwrap_or(f64::NAN),
        threshold: f64::NAN,
        note: "partial sums nondecreasing in the mode count".into(),
    });
    s.details = serde_json::to_value(&c)?;
    Ok(())
}

fn run_sandwich(cfg: &ExperimentConfig, dir: &Path, s: &mut ExperimentSummary) -> Result<()> {
    let cases = if cfg.cases.is_empty() { default_sandwich_cases() } else { cfg.cases.clone() };
    let mut outcomes = Vec::new();
    for &eps in &cfg.eps {
        let spec = SandwichSpec { eps, half_width: cfg.half_width, c1_mu: cfg.c1_mu, n_times: cfg.n_times };
        for case in &cases {
            outcomes.push(sandwich_check(&spec, case)?);
        }
    }
    let mut w = csv::Writer::from_writer(create(dir, "sandwich.csv")?);
    w.write_record(["eps", "case", "c0", "dx", "dt", "t_max", "worst_violation", "tolerance", "holds", "barrier_passed"])?;
    for (i, o) in outcomes.iter().enumerate() {
        w.write_record([
            o.eps.to_string(),
            (i % cases.len()).to_string(),
            o.c0.to_string(),
            o.dx.to_string(),
            o.dt.to_string(),
            o.t_max.to_string(),
            o.worst_violation.to_string(),
            o.tolerance.to_string(),
            o.holds().to_string(),
            o.barrier.all_passed().to_string(),
        ])?;
    }
    w.flush()?;
    let worst_margin = outcomes.iter().map(|o| o.worst_violation - o.tolerance).fold(f64::NEG_INFINITY, f64::max);
    s.criteria.push(Criterion::at_most(
        "sandwich holds at all nodes/times",
        worst_margin,
        0.0,
        "worst violation minus the 10 (dx^2 + dt) tolerance",
    ));
    s.details = serde_json::to_value(&outcomes)?;
    Ok(())
}

fn run_generation(cfg: &ExperimentConfig, r: &ReactionSpec, dir: &Path, s: &mut ExperimentSummary) -> Result<()> {
    let profile = profile_for(r)?;
    let spec = GenerationSpec {
        eps_list: cfg.eps.clone(),
        half_width: cfg.half_width,
        dt_factor: cfg.dt_factor,
        kappa_prime: cfg.kappa_prime,
        n_records: GenerationSpec::default().n_records.max(cfg.n_times),
        datum: cfg.cases.first().copied().unwrap_or_default(),
        ..GenerationSpec::default()
    };
    let rep = generation_scaling(&spec, r, &profile)?;
    let mut w = csv::Writer::from_writer(create(dir, "generation.csv")?);
    w.write_record(["eps", "threshold", "t_star", "ratio", "final_distance"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in &rep.rows {
        w.write_record([
            row.eps.to_string(),
            row.threshold.to_string(),
            opt(row.t_star),
            opt(row.ratio),
            row.final_distance.to_string(),
        ])?;
    }
    w.flush()?;
    let mu = r.constants()?.mu;
    match &rep.fit {
        Some(fit) => {
            s.criteria.push(Criterion::at_least("scaling fit r^2", fit.r_squared, 0.95, "centered r^2"));
            s.criteria.push(Criterion {
                name: "scaling constant".into(),
                passed: fit.c_hat > 0.0 && fit.c_hat < 1.5 / mu,
                value: fit.c_hat,
                threshold: 1.5 / mu,
                note: "0 < C_hat < 1.5 / mu".into(),
            });
        }
        None => s.criteria.push(Criterion {
            name: "scaling fit r^2".into(),
            passed: false,
            value: f64::NAN,
            threshold: 0.95,
            note: "fewer than 3 eps reached the threshold".into(),
        }),
    }
    s.details = serde_json::to_value(&rep)?;
    Ok(())
}

fn run_noise_audit(cfg: &ExperimentConfig, dir: &Path, s: &mut ExperimentSummary) -> Result<()> {
    let spec = NoiseAuditSpec {
        eps_list: cfg.eps.clone(),
        gamma: cfg.gamma,
        half_width: cfg.half_width,
        amplitude: cfg.amplitude,
        t_end: cfg.t_end,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
    };
    let rep = noise_audit(&spec)?;
    let mut w = csv::Writer::from_writer(create(dir, "noise_audit.csv")?);
    w.write_record(["eps", "sample", "normalized_sup"])?;
    for row in &rep.rows {
        for (i, v) in row.normalized_sups.iter().enumerate() {
            w.write_record([row.eps.to_string(), i.to_string(), v.to_string()])?;
        }
    }
    w.flush()?;
    s.n_paths = cfg.n_paths * cfg.eps.len();
    s.paths_failed = rep.failures.len();
    s.paths_completed = s.n_paths - s.paths_failed;
    s.failures = rep.failures.clone();
    let note = "max / min - 1 across eps";
    s.criteria.push(Criterion::at_most("median stability", rep.median_spread, 0.2, note));
    s.criteria.push(Criterion::at_most("90% quantile stability", rep.q90_spread, 0.2, note));
    s.details = serde_json::json!({
        "rows": rep.rows.iter().map(|r| serde_json::json!({
            "eps": r.eps, "dx": r.dx, "dt": r.dt, "median": r.median, "q90": r.q90,
        })).collect::<Vec<_>>(),
    });
    check_failures(s)
}

fn check_failures(s: &ExperimentSummary) -> Result<()> {
    if 20 * s.paths_failed > s.n_paths {
        return Err(Error::TooManyFailures { failed: s.paths_failed, total: s.n_paths });
    }
    Ok(())
}

/// Per-`eps` verdicts of the SPDE against SDE comparison.
#[derive(Debug, Clone, Serialize)]
pub struct LawComparison {
    pub eps: f64,
    pub ks_pass_fraction: f64,
    pub max_variance_mismatch: f64,
    /// The same statistics for two independent SDE ensembles.
    pub null_ks_pass_fraction: f64,
    pub null_variance_mismatch: f64,
    pub slices: Vec<SliceStats>,
}

/// SDE ensemble on the lattice of `spec`.
pub fn sde_lattice_paths(
    coeffs: &SdeCoefficients,
    spec: &InterfaceEnsembleSpec,
    substeps: usize,
    stream: RngStream,
) -> Result<Vec<PathRecord>> {
    let run = SdeRun {
        xi0: spec.xi0,
        t_end: spec.t_rescaled,
        dt: spec.t_rescaled / (spec.n_slices * substeps) as f64,
        n_paths: spec.n_paths,
        stride: substeps,
        stream,
    };
    euler_maruyama(coeffs, &Amplitude::Bump { amplitude: spec.amplitude }, &run)
}

fn run_spde_vs_sde(cfg: &ExperimentConfig, r: &ReactionSpec, dir: &Path, s: &mut ExperimentSummary) -> Result<()> {
    let (profile, coeffs) = coefficients(r)?;
    let mut results = Vec::new();
    for (k, &eps) in cfg.eps.iter().enumerate() {
        let spec = cfg.interface_spec(eps, k);
        let run = spde_interface_paths(&spec, &profile, r)?;
        let spde: Vec<PathRecord> = run.completed.iter().map(|p| p.record.clone()).collect();
        s.n_paths += run.n_paths();
        s.paths_completed += run.completed.len();
        s.paths_failed += run.failures.len();
        s.failures.extend(run.failures.iter().cloned());
        let sde = sde_lattice_paths(&coeffs, &spec, cfg.sde_substeps, RngStream::new(spec.seed, 1))?;
        let null = sde_lattice_paths(&coeffs, &spec, cfg.sde_substeps, RngStream::new(spec.seed, 2))?;
        write_paths_csv(&spde, create(dir, &format!("spde_paths_eps{}.csv", tag(eps)))?)?;
        write_paths_csv(&sde, create(dir, &format!("sde_paths_eps{}.csv", tag(eps)))?)?;
        let stats = compare_path_laws(&increments(&spde), &increments(&sde))?;
        let null_stats = compare_path_laws(&increments(&null), &increments(&sde))?;
        let mut w = csv::Writer::from_writer(create(dir, &format!("slices_eps{}.csv", tag(eps)))?);
        w.write_record(["t", "n_spde", "n_sde", "mean_spde", "mean_sde", "var_spde", "var_sde", "ks_statistic", "ks_p_value"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for sl in &stats.slices {
            w.write_record([
                sl.t.to_string(),
                sl.n_a.to_string(),
                sl.n_b.to_string(),
                sl.mean_a.to_string(),
                sl.mean_b.to_string(),
                sl.var_a.to_string(),
                sl.var_b.to_string(),
                opt(sl.ks_statistic),
                opt(sl.ks_p_value),
            ])?;
        }
        w.flush()?;
        let close = run.completed.iter().filter(|p| p.chi_gap <= cfg.delta).count();
        let close = close as f64 / run.completed.len().max(1) as f64;
        s.criteria.push(Criterion::at_least(
            format!("KS slices eps={eps}"),
            stats.ks_pass_fraction(),
            0.9,
            &format!("fraction of slices with p > {KS_LEVEL}; null fraction {:.3}", null_stats.ks_pass_fraction()),
        ));
        s.criteria.push(Criterion::at_most(
            format!("slice variances eps={eps}"),
            stats.max_variance_mismatch(),
            0.15,
            "max |var_spde / var_sde - 1|",
        ));
        s.criteria.push(Criterion::at_least(
            format!("step profile at T eps={eps}"),
            close,
            0.95,
            &format!("fraction of paths with |u(T) - chi_xi|_L2 <= {}", cfg.delta),
        ));
        results.push(LawComparison {
            eps,
            ks_pass_fraction: stats.ks_pass_fraction(),
            max_variance_mismatch: stats.max_variance_mismatch(),
            null_ks_pass_fraction: null_stats.ks_pass_fraction(),
            null_variance_mismatch: null_stats.max_variance_mismatch(),
            slices: stats.slices,
        });
    }
    s.details = serde_json::json!({ "alpha1": coeffs.alpha1, "alpha2": coeffs.alpha2, "comparisons": results });
    check_failures(s)
}
