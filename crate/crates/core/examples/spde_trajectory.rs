//! One noisy run from an interface-forming datum, exported as CSV.

use sharp_interface::spde::initial::{general_initial, GeneralParams};
use sharp_interface::spde::{default_bump, simulate, sup_norm_monitor, NoiseSpec, SimConfig};
use sharp_interface::{Grid1D, ReactionSpec, RngStream};

fn main() -> sharp_interface::Result<()> {
    let eps = 0.02;
    let grid = Grid1D::for_eps(3.0, eps)?;
    let u0 = general_initial(&grid, eps, &GeneralParams { xi0: 0.2, ..Default::default() })?;
    let mut cfg = SimConfig::deterministic(eps, ReactionSpec::cubic(), grid, 0.5);
    cfg.record_times = (0..=10).map(|k| 0.05 * k as f64).collect();
    let cfg = cfg.with_noise(NoiseSpec::new(1.0, default_bump(&grid, 1.0)), RngStream::new(1, 0));
    let traj = simulate(&cfg, &u0)?;
    for (t, u) in traj.times.iter().zip(&traj.fields) {
        println!("t = {t:.2}: sup |u| = {:.4}", u.sup_norm());
    }
    println!("first time above 1.5: {:?}", sup_norm_monitor(&traj, 1.5));
    let path = std::env::temp_dir().join("spde_trajectory.csv");
    traj.write_csv(std::fs::File::create(&path)?)?;
    println!("wrote {}", path.display());
    Ok(())
}
