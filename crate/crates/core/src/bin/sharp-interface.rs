use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use sharp_interface::fermi::{default_radius, interface_path};
use sharp_interface::harness::{coefficients, run_experiment, ExperimentConfig, ExperimentKind, SCHEMA_VERSION};
use sharp_interface::interface_sde::{compute_alpha1, euler_maruyama, Amplitude, SdeRun};
use sharp_interface::path::write_paths_csv;
use sharp_interface::spde::{default_bump, make_initial_data, simulate, InitialKind, NoiseSpec, SimConfig};
use sharp_interface::{solve_standing_wave, Grid1D, Result, RngStream};

#[derive(Parser)]
#[command(name = "sharp-interface", version, about = "Sharp interface experiments for the stochastic Allen-Cahn equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for path-level parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Standing wave profile of the configured reaction.
    StandingWave,
    /// SDE coefficients alpha1, alpha2 and the truncation series.
    Coeffs,
    /// One SPDE trajectory with its interface path.
    SimulateSpde,
    /// Euler-Maruyama paths of the interface SDE.
    SimulateSde,
    /// Generation-time scaling campaign.
    Generation,
    /// Super/sub solution sandwich check.
    Sandwich,
    /// SPDE interface paths against SDE paths.
    Compare,
    /// Normalized sup norms of the stochastic heat equation.
    NoiseAudit,
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out_dir = o.clone();
    }
    Ok(cfg)
}

fn artifact_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir.join(&cfg.id);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<()> {
    serde_json::to_writer_pretty(BufWriter::new(File::create(dir.join(name))?), value)?;
    Ok(())
}

fn standing_wave(cfg: &ExperimentConfig) -> Result<()> {
    let r = cfg.reaction.build()?;
    let p = solve_standing_wave(&r, &Grid1D::with_max_spacing(20.0, 1e-3)?)?;
    let dir = artifact_dir(cfg)?;
    p.write_csv(BufWriter::new(File::create(dir.join("standing_wave.csv"))?))?;
    let summary = json!({
        "schema_version": SCHEMA_VERSION,
        "id": cfg.id,
        "kind": "standing-wave",
        "config": cfg,
        "grad_norm_sq": p.grad_norm_sq,
        "alpha1": compute_alpha1(&p)?,
        "ode_residual": p.ode_residual(&r),
    });
    write_json(&dir, "summary.json", &summary)?;
    println!("{}", serde_json::to_string_pretty(&summary["ode_residual"])?);
    Ok(())
}

fn simulate_spde(cfg: &ExperimentConfig) -> Result<()> {
    let r = cfg.reaction.build()?;
    let eps = *cfg.eps.first().ok_or_else(|| sharp_interface::Error::Config("the eps list is empty".into()))?;
    let profile = solve_standing_wave(&r, &Grid1D::with_max_spacing(30.0, 5e-3)?)?;
    let grid = Grid1D::for_eps(cfg.half_width, eps)?;
    let kind = match cfg.cases.first() {
        Some(p) => InitialKind::General(*p),
        None => InitialKind::ProfileOnManifold { eta: cfg.xi0 },
    };
    let u0 = make_initial_data(&kind, &grid, eps, Some(&profile))?;
    let mut sim = SimConfig::deterministic(eps, r, grid, cfg.t_end);
    sim.dt = sim.dt.min(cfg.dt_factor * eps);
    let n = cfg.n_times.max(1);
    sim.record_times = (0..=n).map(|k| cfg.t_end * k as f64 / n as f64).collect();
    let sim = sim.with_noise(NoiseSpec::new(cfg.gamma, default_bump(&grid, cfg.amplitude)), RngStream::new(cfg.seed, 0));
    let traj = simulate(&sim, &u0)?;
    let dir = artifact_dir(cfg)?;
    traj.write_csv(BufWriter::new(File::create(dir.join("trajectory.csv"))?))?;
    let path = interface_path(&traj, &profile, eps, cfg.gamma, default_radius(eps));
    write_paths_csv(&[path], BufWriter::new(File::create(dir.join("interface_path.csv"))?))?;
    write_json(
        &dir,
        "summary.json",
        &json!({ "schema_version": SCHEMA_VERSION, "id": cfg.id, "kind": "simulate-spde", "config": cfg, "meta": traj.meta }),
    )
}

fn simulate_sde(cfg: &ExperimentConfig) -> Result<()> {
    let r = cfg.reaction.build()?;
    let (_, coeffs) = coefficients(&r)?;
    let steps = cfg.n_slices.max(1) * cfg.sde_substeps.max(1);
    let run = SdeRun {
        xi0: cfg.xi0,
        t_end: cfg.t_rescaled,
        dt: cfg.t_rescaled / steps as f64,
        n_paths: cfg.n_paths,
        stride: cfg.sde_substeps.max(1),
        stream: RngStream::new(cfg.seed, 1),
    };
    let paths = euler_maruyama(&coeffs, &Amplitude::Bump { amplitude: cfg.amplitude }, &run)?;
    let dir = artifact_dir(cfg)?;
    write_paths_csv(&paths, BufWriter::new(File::create(dir.join("sde_paths.csv"))?))?;
    write_json(
        &dir,
        "summary.json",
        &json!({ "schema_version": SCHEMA_VERSION, "id": cfg.id, "kind": "simulate-sde", "config": cfg, "coefficients": coeffs }),
    )
}

fn experiment(mut cfg: ExperimentConfig, kind: ExperimentKind) -> Result<bool> {
    cfg.kind = kind;
    let s = run_experiment(&cfg)?;
    for c in &s.criteria {
        println!("[{}] {}: {} (threshold {}) {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold, c.note);
    }
    println!("artifacts in {}", cfg.out_dir.join(&cfg.id).display());
    Ok(s.all_passed())
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| sharp_interface::Error::Config(e.to_string()))?;
    }
    let cfg = load(&cli.common)?;
    match cli.command {
        Command::StandingWave => standing_wave(&cfg).map(|_| true),
        Command::SimulateSpde => simulate_spde(&cfg).map(|_| true),
        Command::SimulateSde => simulate_sde(&cfg).map(|_| true),
        Command::Coeffs => experiment(cfg, ExperimentKind::Coefficients),
        Command::Generation => experiment(cfg, ExperimentKind::GenerationScaling),
        Command::Sandwich => experiment(cfg, ExperimentKind::SandwichCheck),
        Command::Compare => experiment(cfg, ExperimentKind::SpdeVsSde),
        Command::NoiseAudit => experiment(cfg, ExperimentKind::NoiseAudit),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
